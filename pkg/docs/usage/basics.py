# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
#       format_version: '1.5'
#       jupytext_version: 1.16.4
#   kernelspec:
#     display_name: Python 3 (ipykernel)
#     language: python
#     name: python3
# ---

# # Recovering a sparse-factor matrix
#
# This notebook draws a matrix `X = X₁ᵀX₂` whose factors have few nonzero columns, measures it with rank-one measurements, and decodes it with and without the sparsity information.

# +
import minkowski_sensing.ms_logging as lg
from minkowski_sensing.measurement import sample_ensemble
from minkowski_sensing.recovery import AltMinOptions, decode_altmin, decode_sparse_factor, enumeration_size
from minkowski_sensing.support import SparseFactorSpec, manifold_dim, sample_support

lg.info()
# -

spec = SparseFactorSpec(m=8, n=8, r=1, l1=2, l2=2, bound=3.0)
x = sample_support(spec, count=1, seed=5)[0]
print(spec.reference_dim, manifold_dim(8, 8, 1))

# Eight measurements are below the 15 a generic rank-one matrix needs, but above the (l1 + l2) r = 4 of the sparse-factor set.

ensemble = sample_ensemble("rankone", m=8, n=8, k=8, s=1.0, seed=1)
y = ensemble.apply(x)

# +
opts = AltMinOptions(r=1, restarts=3, max_iters=200, success_rel_err=1e-6, seed=2)

plain = decode_altmin(ensemble, y, opts, x_true=x)
print("altmin:", plain.outcome, plain.rel_error)
# -

# The sparse-factor decoder runs the same alternating minimization on every pair of column supports.

print("supports:", enumeration_size(8, 8, 2, 2))
sparse = decode_sparse_factor(ensemble, y, r=1, l1=2, l2=2, opts=opts, x_true=x)
print("sparse factor:", sparse.outcome, sparse.rel_error)

# # Box counting
#
# The same support set, sampled densely, has a box-counting slope close to its dimension.

# +
from minkowski_sensing.support import estimate_dim, sample_factor_set

points = sample_factor_set(r=1, m=3, l=1, bound=3.0, count=20_000, seed=0)
estimate = estimate_dim(points, rho_min=0.5 / 32, rho_max=0.5)
estimate.slope, estimate.r2
