"""Centroid-distance saliency and multi-modal non-maximum suppression.

Per point, saliency is the distance from the point to the centroid of its
strict-radius neighborhood: L2 in geometric space, L1 in RGB space. Both
measures are invariant to rigid motion because the neighborhood's shape (and
its colors) move with the query point. Keypoints are the points that pass a
per-modality threshold filter and whose product of saliencies is not strictly
beaten by any neighbor.

Points whose neighborhood is smaller than ``min_neighbors`` are marked
invalid: they are never selected and never suppress anyone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .cloud import ColoredPointCloud
from .cloudio import CloudFormat, write_cloud
from .errors import (
    EmptyNeighborhoodError,
    InvalidParamsError,
    MisalignedFieldsError,
    NoColorError,
)
from .index import NeighborGraph, SpatialIndex, build_index

logger = logging.getLogger(__name__)

GEOMETRIC = "geometric"
PHOTOMETRIC = "photometric"

DEFAULT_RADIUS_FACTOR = 5.0
DEFAULT_GEO_THRESHOLD = 0.2
DEFAULT_COLOR_THRESHOLD = 0.1
DEFAULT_MIN_NEIGHBORS = 5


class DetectorMode(Enum):
    CED = "ced"
    CED_3D = "ced3d"


@dataclass(frozen=True)
class DetectorParams:
    """Detection parameters.

    radius: neighborhood radius in meters, > 0.
    geo_threshold: in [0, 1], compared against saliency / radius.
    color_threshold: in [0, 3], compared against the raw L1 color saliency.
    mode: CED (geometry and color) or CED_3D (geometry only).
    min_neighbors: minimum neighborhood size for a point to be valid.
    """

    radius: float
    geo_threshold: float = DEFAULT_GEO_THRESHOLD
    color_threshold: float = DEFAULT_COLOR_THRESHOLD
    mode: DetectorMode = DetectorMode.CED
    min_neighbors: int = DEFAULT_MIN_NEIGHBORS

    def __post_init__(self):
        if not (self.radius > 0):
            raise InvalidParamsError(f"radius must be > 0, got {self.radius}")
        if not 0.0 <= self.geo_threshold <= 1.0:
            raise InvalidParamsError(
                f"geometric threshold must be in [0, 1], got {self.geo_threshold}"
            )
        if not 0.0 <= self.color_threshold <= 3.0:
            raise InvalidParamsError(
                f"color threshold must be in [0, 3], got {self.color_threshold}"
            )
        if not isinstance(self.mode, DetectorMode):
            raise InvalidParamsError(f"mode must be a DetectorMode, got {self.mode!r}")
        if self.min_neighbors < 1:
            raise InvalidParamsError(
                f"min_neighbors must be >= 1, got {self.min_neighbors}"
            )

    @classmethod
    def for_cloud(cls, cloud: ColoredPointCloud, **overrides) -> "DetectorParams":
        """Defaults tied to the cloud: radius = 5 x resolution, CED mode."""
        overrides.setdefault("radius", DEFAULT_RADIUS_FACTOR * cloud.resolution)
        if "mode" not in overrides and not cloud.has_color:
            overrides["mode"] = DetectorMode.CED_3D
        return cls(**overrides)


@dataclass(frozen=True)
class SaliencyField:
    """Per-point saliency values for one modality, index-aligned with the cloud."""

    values: np.ndarray
    modality: str
    valid: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if values.shape != valid.shape or values.ndim != 1:
            raise MisalignedFieldsError("values and valid must be equal-length vectors")
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class KeypointSet:
    """Ascending, unique indices of selected points plus the parameters used.

    params is None for detectors that take no DetectorParams (e.g. random).
    """

    indices: np.ndarray
    params: DetectorParams | None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class DetectionResult:
    keypoints: KeypointSet
    geometric: SaliencyField
    photometric: SaliencyField | None


def geometric_centroid(cloud: ColoredPointCloud, neighbor_indices) -> np.ndarray:
    """Per-axis mean of the geometric components of the listed points."""
    idx = np.asarray(neighbor_indices, dtype=np.int64)
    if idx.size == 0:
        raise EmptyNeighborhoodError("geometric centroid of an empty neighborhood")
    return cloud.xyz[idx].mean(axis=0)


def photometric_centroid(cloud: ColoredPointCloud, neighbor_indices) -> np.ndarray:
    """Per-channel mean of the color components of the listed points."""
    if not cloud.has_color:
        raise NoColorError("cloud carries no color")
    idx = np.asarray(neighbor_indices, dtype=np.int64)
    if idx.size == 0:
        raise EmptyNeighborhoodError("photometric centroid of an empty neighborhood")
    return cloud.rgb[idx].mean(axis=0)


def _neighborhood_means(values: np.ndarray, graph: NeighborGraph, counts: np.ndarray):
    """Mean of `values` over each point's neighborhood (self included)."""
    first, second = graph.pairs[:, 0], graph.pairs[:, 1]
    sums = values.copy()
    for column in range(values.shape[1]):
        sums[:, column] += np.bincount(
            first, weights=values[second, column], minlength=graph.n_points
        )
        sums[:, column] += np.bincount(
            second, weights=values[first, column], minlength=graph.n_points
        )
    return sums / counts[:, None]


def saliency_from_graph(
    cloud: ColoredPointCloud, graph: NeighborGraph, params: DetectorParams
) -> tuple[SaliencyField, SaliencyField | None]:
    """Saliency fields over a prebuilt neighbor graph.

    Invalid points (neighborhood smaller than min_neighbors) get value 0.
    The photometric field is produced only in CED mode.
    """
    counts = graph.counts()
    valid = counts >= params.min_neighbors

    # The distance to the neighborhood centroid equals the norm of the summed
    # neighbor displacements divided by the count; the graph already carries
    # the per-pair displacements, so no coordinate gathers are needed.
    first, second = graph.pairs[:, 0], graph.pairs[:, 1]
    displacement_sums = np.zeros((graph.n_points, 3))
    for column in range(3):
        offsets_column = graph.pair_offsets[:, column]
        displacement_sums[:, column] = np.bincount(
            first, weights=-offsets_column, minlength=graph.n_points
        )
        displacement_sums[:, column] += np.bincount(
            second, weights=offsets_column, minlength=graph.n_points
        )
    geo_values = (
        np.sqrt(np.einsum("ij,ij->i", displacement_sums, displacement_sums)) / counts
    )
    geo_values = np.where(valid, geo_values, 0.0)
    geo = SaliencyField(geo_values, GEOMETRIC, valid)

    if params.mode is not DetectorMode.CED:
        return geo, None
    if not cloud.has_color:
        raise NoColorError("CED mode needs a colored cloud; use CED_3D instead")
    color_centroids = _neighborhood_means(cloud.rgb, graph, counts)
    color_values = np.abs(cloud.rgb - color_centroids).sum(axis=1)
    color_values = np.where(valid, color_values, 0.0)
    return geo, SaliencyField(color_values, PHOTOMETRIC, valid)


def compute_saliency(
    cloud: ColoredPointCloud, index: SpatialIndex, params: DetectorParams
) -> tuple[SaliencyField, SaliencyField | None]:
    """Geometric and (in CED mode) photometric saliency for every point."""
    graph = index.neighbor_graph(params.radius)
    return saliency_from_graph(cloud, graph, params)


def multimodal_nms(
    fields: Sequence[SaliencyField],
    thresholds: Sequence[float],
    neighborhoods: NeighborGraph,
) -> np.ndarray:
    """Select locally best points across one or more saliency modalities.

    A point survives the filter when at least one modality meets its
    threshold (values are compared with >=), and survives suppression when no
    neighbor has a strictly greater product of modality values. Equal products
    do not suppress each other, so a point never suppresses itself. Invalid
    points are never selected and never suppress others.

    Returns ascending indices of the selected points.
    """
    if len(fields) == 0:
        raise MisalignedFieldsError("need at least one saliency field")
    if len(thresholds) != len(fields):
        raise MisalignedFieldsError(
            f"{len(fields)} fields but {len(thresholds)} thresholds"
        )
    n = neighborhoods.n_points
    for field in fields:
        if len(field) != n:
            raise MisalignedFieldsError(
                f"field of length {len(field)} does not match {n} points"
            )

    valid = fields[0].valid.copy()
    for field in fields[1:]:
        valid &= field.valid

    product = fields[0].values.copy()
    for field in fields[1:]:
        product *= field.values

    passes_filter = np.zeros(n, dtype=bool)
    for field, threshold in zip(fields, thresholds):
        passes_filter |= field.values >= threshold

    # Suppression: max neighbor product, with invalid points masked out so
    # they can never beat anyone. Values are non-negative, so -1 is inert.
    masked = np.where(valid, product, -1.0)
    neighborhood_max = masked.copy()
    first, second = neighborhoods.pairs[:, 0], neighborhoods.pairs[:, 1]
    np.maximum.at(neighborhood_max, first, masked[second])
    np.maximum.at(neighborhood_max, second, masked[first])

    selected = valid & passes_filter & ~(neighborhood_max > product)
    return np.nonzero(selected)[0].astype(np.int64)


def detect_with_fields(cloud: ColoredPointCloud, params: DetectorParams) -> DetectionResult:
    """Full detection pipeline returning the keypoints and both fields."""
    if params.mode is DetectorMode.CED and not cloud.has_color:
        raise NoColorError("CED mode needs a colored cloud; use CED_3D instead")
    index = build_index(cloud)
    graph = index.neighbor_graph(params.radius)
    geo, photo = saliency_from_graph(cloud, graph, params)

    if params.mode is DetectorMode.CED:
        if photo.valid.any() and not photo.values[photo.valid].any():
            logger.warning(
                "all color saliencies are zero; every filtered-in point ties at "
                "product 0. CED_3D mode is probably what you want for this cloud."
            )
        fields = [geo, photo]
        thresholds = [params.geo_threshold * params.radius, params.color_threshold]
    else:
        fields = [geo]
        thresholds = [params.geo_threshold * params.radius]

    indices = multimodal_nms(fields, thresholds, graph)
    return DetectionResult(KeypointSet(indices, params), geo, photo)


def detect(cloud: ColoredPointCloud, params: DetectorParams) -> KeypointSet:
    """Detect keypoints; see detect_with_fields for the saliency values too."""
    return detect_with_fields(cloud, params).keypoints


def export_keypoints_csv(
    cloud: ColoredPointCloud,
    keypoints: KeypointSet,
    geometric: SaliencyField | None = None,
    photometric: SaliencyField | None = None,
) -> str:
    """Keypoints as CSV text: index,x,y,z,r,g,b,d_g,d_c with LF line endings.

    Saliency columns are written as 0 when the corresponding field is absent.
    """
    rows = ["index,x,y,z,r,g,b,d_g,d_c"]
    for i in keypoints.indices:
        x, y, z = cloud.xyz[i]
        r, g, b = cloud.rgb[i]
        dg = geometric.values[i] if geometric is not None else 0.0
        dc = photometric.values[i] if photometric is not None else 0.0
        rows.append(
            f"{i},{x:.9g},{y:.9g},{z:.9g},{r:.9g},{g:.9g},{b:.9g},{dg:.9g},{dc:.9g}"
        )
    return "\n".join(rows) + "\n"


def export_keypoints_ply(
    cloud: ColoredPointCloud,
    keypoints: KeypointSet,
    fmt: CloudFormat = CloudFormat.PLY_ASCII,
) -> bytes:
    """The selected points as a standalone point-cloud file."""
    subset = ColoredPointCloud(
        cloud.xyz[keypoints.indices],
        cloud.rgb[keypoints.indices],
        cloud.resolution,
        cloud.has_color,
    )
    return write_cloud(subset, fmt)
