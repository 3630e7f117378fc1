from .sampling import RNG_ALGORITHM, derive_seed, make_rng, sample_uniform_ball
from .ensemble import EnsembleKind, MeasurementEnsemble, apply, sample_ensemble, storage_cost

__all__ = [
    "RNG_ALGORITHM",
    "derive_seed",
    "make_rng",
    "sample_uniform_ball",
    "EnsembleKind",
    "MeasurementEnsemble",
    "apply",
    "sample_ensemble",
    "storage_cost",
]
