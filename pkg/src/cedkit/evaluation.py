"""Repeatability, runtime, and threshold-sweep evaluation of detectors.

Repeatability protocol: detect keypoints in a source cloud, build a copy
under a random rigid motion (optionally with Gaussian noise), detect again,
and count a source keypoint as repeated when its transformed position has a
detected keypoint strictly within epsilon in the copy. Matching is
one-directional; several source keypoints may share one match.

A "detector" here is any deterministic callable from a cloud to a
KeypointSet; factories for the bundled detectors are provided below.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from statistics import mean, median
from typing import Callable, Sequence

import numpy as np

from .baseline import detect_random
from .cloud import (
    ColoredPointCloud,
    RigidTransform,
    add_gaussian_noise,
    apply_rigid_transform,
)
from .detector import DetectorParams, KeypointSet, detect
from .errors import InvalidParamsError

Detector = Callable[[ColoredPointCloud], KeypointSet]

DEFAULT_EPSILON_FACTOR = 2.0  # of cloud resolution
DEFAULT_SIGMA_FACTOR = 0.5  # of cloud resolution
DEFAULT_TRIALS = 10


@dataclass(frozen=True)
class RepeatabilityConfig:
    """Evaluation knobs; epsilon and sigma default to multiples of resolution.

    epsilon: match radius in meters; None means 2 x cloud resolution.
    sigma: noise standard deviation in meters; None means 0.5 x resolution.
    """

    epsilon: float | None = None
    sigma: float | None = None
    transform_seed: int = 0
    noise_seed: int = 1000
    trials: int = DEFAULT_TRIALS

    def __post_init__(self):
        if self.epsilon is not None and not (self.epsilon > 0):
            raise InvalidParamsError(f"epsilon must be > 0, got {self.epsilon}")
        if self.sigma is not None and self.sigma < 0:
            raise InvalidParamsError(f"sigma must be >= 0, got {self.sigma}")
        if self.trials < 1:
            raise InvalidParamsError(f"trials must be >= 1, got {self.trials}")

    def resolve(self, resolution: float) -> tuple[float, float]:
        epsilon = self.epsilon if self.epsilon is not None else DEFAULT_EPSILON_FACTOR * resolution
        sigma = self.sigma if self.sigma is not None else DEFAULT_SIGMA_FACTOR * resolution
        return epsilon, sigma


@dataclass(frozen=True)
class RepeatabilityReport:
    """Aggregate over trials; relative = repeatable / total (0 when total is 0)."""

    total_keypoints: int
    repeatable_keypoints: float
    relative_repeatability: float
    detect_time_seconds: float
    trials: int
    empty_keypoint_set: bool = False
    per_trial: tuple[float, ...] = ()


@dataclass(frozen=True)
class RuntimeStats:
    mean_seconds: float
    median_seconds: float
    min_seconds: float
    samples: tuple[float, ...]


@dataclass(frozen=True)
class AblationRow:
    geo_threshold: float
    color_threshold: float
    keypoint_count: int
    repeatability: float
    runtime_seconds: float


def ced_detector(params: DetectorParams) -> Detector:
    """Detector callable with fixed parameters."""

    def run(cloud: ColoredPointCloud) -> KeypointSet:
        return detect(cloud, params)

    return run


def random_detector(count: int, seed: int) -> Detector:
    """Seeded random-baseline callable drawing a fresh sample per call.

    Each invocation advances the seed, so the source and transformed clouds
    get independent selections (a fixed selection would trivially repeat),
    while the call sequence as a whole stays reproducible.
    """
    state = {"calls": 0}

    def run(cloud: ColoredPointCloud) -> KeypointSet:
        call_seed = seed + state["calls"]
        state["calls"] += 1
        return detect_random(cloud, count, call_seed)

    return run


def sample_rigid_transform(rng: np.random.Generator) -> RigidTransform:
    """Rotation uniform over orientations, translation uniform in [-1, 1]^3.

    The rotation comes from a normalized 4-vector of standard normals, which
    is uniform on the unit quaternion sphere.
    """
    q = rng.normal(size=4)
    q /= np.sqrt(q @ q)
    w, x, y, z = q
    rotation = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    translation = rng.uniform(-1.0, 1.0, size=3)
    return RigidTransform(rotation, translation)


def count_matches(
    source_points: np.ndarray, target_points: np.ndarray, epsilon: float
) -> int:
    """How many source points have a target point strictly within epsilon."""
    if len(source_points) == 0 or len(target_points) == 0:
        return 0
    diffs = source_points[:, None, :] - target_points[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diffs, diffs)
    return int((d2.min(axis=1) < epsilon * epsilon).sum())


def evaluate_repeatability(
    cloud: ColoredPointCloud,
    detector: Detector,
    config: RepeatabilityConfig = RepeatabilityConfig(),
    transforms: Sequence[RigidTransform] | None = None,
) -> RepeatabilityReport:
    """Mean repeatability of a detector over random rigid motions of a cloud.

    Pass `transforms` to pin the motions (e.g. the identity); otherwise
    config.trials transforms are sampled from transform_seed. Noise uses a
    fresh seed per trial, derived as noise_seed + trial index.
    """
    epsilon, sigma = config.resolve(cloud.resolution)

    start = time.perf_counter()
    source_keys = detector(cloud)
    detect_time = time.perf_counter() - start

    if transforms is None:
        rng = np.random.default_rng(config.transform_seed)
        transforms = [sample_rigid_transform(rng) for _ in range(config.trials)]
    total = len(source_keys)
    source_points = cloud.xyz[source_keys.indices]

    ratios = []
    for trial, transform in enumerate(transforms):
        if total == 0:
            ratios.append(0.0)
            continue
        moved = apply_rigid_transform(cloud, transform)
        if sigma > 0:
            moved = add_gaussian_noise(moved, sigma, config.noise_seed + trial)
        target_keys = detector(moved)
        matched = count_matches(
            transform.apply(source_points),
            moved.xyz[target_keys.indices],
            epsilon,
        )
        ratios.append(matched / total)

    relative = mean(ratios)
    return RepeatabilityReport(
        total_keypoints=total,
        repeatable_keypoints=relative * total,
        relative_repeatability=relative,
        detect_time_seconds=detect_time,
        trials=len(ratios),
        empty_keypoint_set=total == 0,
        per_trial=tuple(ratios),
    )


def measure_runtime(
    cloud: ColoredPointCloud, detector: Detector, repetitions: int = 5
) -> RuntimeStats:
    """Wall-clock seconds per detector run, sequentially, index build included."""
    if repetitions < 3:
        raise InvalidParamsError(f"repetitions must be >= 3, got {repetitions}")
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        detector(cloud)
        samples.append(time.perf_counter() - start)
    return RuntimeStats(mean(samples), median(samples), min(samples), tuple(samples))


def ablation_sweep(
    cloud: ColoredPointCloud,
    geo_thresholds: Sequence[float],
    color_thresholds: Sequence[float],
    fixed_params: DetectorParams,
    config: RepeatabilityConfig | None = None,
) -> list[AblationRow]:
    """One row per (geo, color) threshold pair, everything else held fixed.

    Repeatability follows evaluate_repeatability; unless overridden the sweep
    runs with sigma = 0 so rows isolate the thresholds from noise.
    """
    if len(geo_thresholds) == 0 or len(color_thresholds) == 0:
        raise InvalidParamsError("threshold lists must be non-empty")
    if config is None:
        config = RepeatabilityConfig(sigma=0.0)
    rows = []
    for geo in geo_thresholds:
        for color in color_thresholds:
            params = replace(fixed_params, geo_threshold=geo, color_threshold=color)
            report = evaluate_repeatability(cloud, ced_detector(params), config)
            rows.append(
                AblationRow(
                    geo_threshold=geo,
                    color_threshold=color,
                    keypoint_count=report.total_keypoints,
                    repeatability=report.relative_repeatability,
                    runtime_seconds=report.detect_time_seconds,
                )
            )
    return rows


def repeatability_csv(report: RepeatabilityReport) -> str:
    header = "total_keypoints,repeatable_keypoints,relative_repeatability,detect_time_seconds"
    row = (
        f"{report.total_keypoints},{report.repeatable_keypoints:.9g},"
        f"{report.relative_repeatability:.9g},{report.detect_time_seconds:.9g}"
    )
    return header + "\n" + row + "\n"


def runtime_csv(stats: RuntimeStats) -> str:
    header = "mean_seconds,median_seconds,min_seconds,repetitions"
    row = (
        f"{stats.mean_seconds:.9g},{stats.median_seconds:.9g},"
        f"{stats.min_seconds:.9g},{len(stats.samples)}"
    )
    return header + "\n" + row + "\n"


def ablation_csv(rows: Sequence[AblationRow], config: RepeatabilityConfig) -> str:
    lines = [
        f"# sigma={config.sigma if config.sigma is not None else 'default'}"
        f" epsilon={config.epsilon if config.epsilon is not None else 'default'}"
        f" trials={config.trials}",
        "t_g,t_c,keypoint_count,repeatability,runtime_seconds",
    ]
    for row in rows:
        lines.append(
            f"{row.geo_threshold:.9g},{row.color_threshold:.9g},"
            f"{row.keypoint_count},{row.repeatability:.9g},{row.runtime_seconds:.9g}"
        )
    return "\n".join(lines) + "\n"
