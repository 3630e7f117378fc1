# Numerical rank cutoff relative to the largest singular value.
RANK_TOL = 1e-10

# Measurement gap below which two distinct matrices count as colliding.
COLLISION_TOL = 1e-9

# Successful reconstructions farther apart than this are structurally distinct.
AMBIGUITY_DISTANCE = 1e-6

# Ridge added to singular least-squares substeps.
RIDGE = 1e-12

DEFAULT_EPSILON = 0.01
DEFAULT_ENUMERATION_BUDGET = 10**6

# Two-sided level of the Wilson interval reported with Monte-Carlo estimates.
CONFIDENCE_LEVEL = 0.99

PHASE_CSV_COLUMNS = ("k", "trials", "successes", "success_rate", "mean_rel_err", "median_iters", "wall_seconds")

CONCENTRATION_CSV_COLUMNS = (
    "m",
    "n",
    "r",
    "s",
    "delta",
    "k",
    "trials",
    "empirical_prob",
    "ci_halfwidth",
    "f_value",
    "d_exact",
    "d_paper_bound",
    "single_bound",
    "k_bound",
)

DIMENSION_CSV_COLUMNS = ("rho", "count")
