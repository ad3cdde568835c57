"""Fruit counting by tracking-via-segmentation on rail-mounted RGB-D rows."""

from ._core import (
    Error,
    Intrinsics,
    Transform,
    Variant,
    aggregate,
    back_project,
    build_map,
    camera_motion,
    count_row,
    gt_count,
    normalized_error,
    project,
    r_squared,
    rail_motion,
    run,
)

__all__ = [
    "Error",
    "Intrinsics",
    "Transform",
    "Variant",
    "aggregate",
    "back_project",
    "build_map",
    "camera_motion",
    "count_row",
    "gt_count",
    "normalized_error",
    "project",
    "r_squared",
    "rail_motion",
    "run",
]
