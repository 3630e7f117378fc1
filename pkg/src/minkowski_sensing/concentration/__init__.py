from .bounds import (
    ball_volume_audit,
    covering_union_bound,
    d_const,
    d_const_audit,
    d_paper_bound,
    f_bound,
    lemma_bound_k,
    lemma_bound_single,
    log_d_const,
    log_lemma_bound_k,
    log_lemma_factor,
    stratum_g,
    stratum_rank,
)
from .monte_carlo import (
    BoundReport,
    ConcentrationParams,
    McEstimate,
    bound_reports,
    delta_grid,
    mc_prob_curve,
    mc_prob_k,
    mc_prob_single,
    partition_sizes,
    wilson_halfwidth,
)
from .perturbation import perturbation_gap
