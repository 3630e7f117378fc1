from .constants import (
    RANK_TOL,
    COLLISION_TOL,
    AMBIGUITY_DISTANCE,
    RIDGE,
    DEFAULT_EPSILON,
    DEFAULT_ENUMERATION_BUDGET,
    CONFIDENCE_LEVEL,
    PHASE_CSV_COLUMNS,
    CONCENTRATION_CSV_COLUMNS,
    DIMENSION_CSV_COLUMNS,
)
