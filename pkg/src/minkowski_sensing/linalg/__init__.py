from .matrix import (
    SvdResult,
    as_matrix,
    check_same_shape,
    delta_product,
    log_delta_product,
    numerical_rank,
    svd,
    trace_inner,
)
from .geometry import ball_volume, log_ball_volume, log_sphere_area, sphere_area

__all__ = [
    "SvdResult",
    "as_matrix",
    "check_same_shape",
    "delta_product",
    "log_delta_product",
    "numerical_rank",
    "svd",
    "trace_inner",
    "ball_volume",
    "log_ball_volume",
    "log_sphere_area",
    "sphere_area",
]
