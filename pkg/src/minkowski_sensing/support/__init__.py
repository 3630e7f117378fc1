from .spec import (
    LowRankSpec,
    SparseFactorSpec,
    PointCloudSpec,
    SupportSpec,
    manifold_dim,
    product_perturbation,
    sample_factor_set,
    sample_sparse_factor_pair,
    sample_support,
)
from .box_counting import DimensionEstimate, cell_side, covering_count, estimate_dim, rho_schedule
from .io import dimension_trailer, export_dimension_estimate, export_point_cloud, import_matrix, import_point_cloud

__all__ = [
    "LowRankSpec",
    "SparseFactorSpec",
    "PointCloudSpec",
    "SupportSpec",
    "manifold_dim",
    "product_perturbation",
    "sample_factor_set",
    "sample_sparse_factor_pair",
    "sample_support",
    "DimensionEstimate",
    "cell_side",
    "covering_count",
    "estimate_dim",
    "rho_schedule",
    "dimension_trailer",
    "export_dimension_estimate",
    "export_point_cloud",
    "import_matrix",
    "import_point_cloud",
]
