"""Crowd head-annotation maps.

Converts per-image head points into ground-truth density maps (isotropic
geometry-adaptive, anisotropic Voronoi-based, or a blend of the two) and
sparse anchor maps, recovers head detections from predicted maps, and
scores predictions with counting and map-quality metrics.
"""

from .annotations import HeadAnnotation, merge_close_points, parse_annotation
from .errors import (
    BadMagicError,
    CenterOutOfBoundsError,
    CrowdMapsError,
    DuplicatePointError,
    EmptyAnnotationError,
    EmptyInputError,
    MalformedInputError,
    NonPositiveInputError,
    PointOutOfBoundsError,
    SeedOnBoundaryError,
    ShapeMismatchError,
    SinglePointError,
    TooSmallError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    ZeroGroundTruthError,
)
from .geometry import (
    GEOM_EPS,
    ImageRect,
    Tessellation,
    VoronoiCell,
    downward_ray_intersection,
    knn_mean_distance,
    mean_k_edge_distance,
    mean_knn_distances,
    point_segment_distances,
    polygon_area,
    polygon_contains,
    voronoi_tessellate,
)
from .io import (
    detections_to_json,
    read_map,
    render_png,
    write_map,
    write_png,
)
from .kernels import (
    GeoParams,
    KernelSpec,
    VorParams,
    ellipse_semi_axes,
    geo_kernel_specs,
    voronoi_kernel_specs,
)
from .metrics import (
    MetricReport,
    combined_loss,
    mae_mse,
    map_euclidean_loss,
    psnr,
    ssim,
)
from .postprocess import (
    Detection,
    PostprocessParams,
    count_from_map,
    estimate_boxes,
    extract_anchors,
)
from .rasterize import blend, render_anchors, render_density

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "CenterOutOfBoundsError",
    "CrowdMapsError",
    "Detection",
    "DuplicatePointError",
    "EmptyAnnotationError",
    "EmptyInputError",
    "GEOM_EPS",
    "GeoParams",
    "HeadAnnotation",
    "ImageRect",
    "KernelSpec",
    "MalformedInputError",
    "MetricReport",
    "NonPositiveInputError",
    "PointOutOfBoundsError",
    "PostprocessParams",
    "SeedOnBoundaryError",
    "ShapeMismatchError",
    "SinglePointError",
    "Tessellation",
    "TooSmallError",
    "TruncatedPayloadError",
    "UnsupportedVersionError",
    "VorParams",
    "VoronoiCell",
    "ZeroGroundTruthError",
    "blend",
    "combined_loss",
    "count_from_map",
    "detections_to_json",
    "downward_ray_intersection",
    "ellipse_semi_axes",
    "estimate_boxes",
    "extract_anchors",
    "geo_kernel_specs",
    "knn_mean_distance",
    "mae_mse",
    "map_euclidean_loss",
    "mean_k_edge_distance",
    "mean_knn_distances",
    "merge_close_points",
    "parse_annotation",
    "point_segment_distances",
    "polygon_area",
    "polygon_contains",
    "psnr",
    "read_map",
    "render_anchors",
    "render_density",
    "render_png",
    "ssim",
    "voronoi_kernel_specs",
    "voronoi_tessellate",
    "write_map",
    "write_png",
]
