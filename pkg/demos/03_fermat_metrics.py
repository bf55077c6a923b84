# %% [markdown]
# # Fermat metrics and light rays
#
# Lightlike curves are graphs t = t0 + (Fermat length of x).  The future
# and past Fermat metrics differ when the shift delta is nonzero, so the
# travel time depends on direction.

# %%
import numpy as np

from stationary_geodesics import builtin
from stationary_geodesics.fermat import (
    F, FermatStructure, Side, T_tilde, arrival_time, fermat_distance, lightlike_lift,
)
from stationary_geodesics.reduction import eval_J
from stationary_geodesics.solver import SolveParams
from stationary_geodesics.spacetime import segment_metric_values

m = builtin("boost").metric
fut, past = FermatStructure(m, Side.FUTURE), FermatStructure(m, Side.PAST)
x, y = np.zeros(2), np.array([1.0, 0.0])
print("F+ =", F(fut, x, y), " F- =", F(past, x, y), " product =", F(fut, x, y) * F(past, x, y))

# %% [markdown]
# Distances are upper bounds from curve optimization.  Forward and backward
# values differ.

# %%
params = SolveParams(N=32, restarts=2)
print("d(p, q) =", fermat_distance(fut, [0, 0], [1, 0], params).value)
print("d(q, p) =", fermat_distance(fut, [1, 0], [0, 0], params).value)

# %% [markdown]
# Lift a spatial curve to a light ray and check g(z', z') per segment.

# %%
s = np.linspace(0, 1, 129)[:, None]
X = np.column_stack([s[:, 0], 0.4 * np.sin(np.pi * s[:, 0])])
ray = lightlike_lift(fut, X)
gzz, _, _ = segment_metric_values(m, ray)
print("max |g(z', z')| =", np.max(np.abs(gzz)))
print("Delta =", ray.delta_t, " arrival_time =", arrival_time(fut, X))

# %% [markdown]
# The two roots of Delta -> J(x, Delta) bracket the light rays over x: the
# future root is at least the future arrival time, the past root at most
# the past one.

# %%
for side in Side:
    T = T_tilde(m, X, side)
    fs = FermatStructure(m, side)
    print(side.value, "root =", T, " J(x, root) =", eval_J(m, X, T), " arrival =", arrival_time(fs, X))
