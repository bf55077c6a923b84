# %% [markdown]
# # Geodesics through the base metric
#
# When both sets are unions of Killing orbits, the problem drops to a
# Riemannian one on space with metric h1 = g0 + (delta delta^T) / beta.
# A base geodesic lifts horizontally to a spacetime geodesic.

# %%
import numpy as np

from stationary_geodesics import builtin, solve_normal_geodesic
from stationary_geodesics.solver import SolveParams
from stationary_geodesics.spacetime import geodesic_residual
from stationary_geodesics.submersion import BaseMetric, base_energy, horizontal_lift, riemannian_normal_geodesic

sc = builtin("boost", "cylinder-cylinder")
bm = BaseMetric(sc.metric)
print("h1 at the origin:\n", bm.h1(np.zeros((1, 2)))[0])

X = riemannian_normal_geodesic(bm, sc.boundary.P.base_section(), sc.boundary.Q.base_section(), SolveParams())
lift = horizontal_lift(bm, X)
print("base energy      ", base_energy(bm, X), "(expected", sc.expected.base_energy, ")")
print("lift residual    ", geodesic_residual(sc.metric, lift))
print("lift end point   ", lift.nodes[-1])

# %% [markdown]
# The general solver picks this route on its own for such boundary data.

# %%
res = solve_normal_geodesic(sc.metric, sc.boundary, SolveParams())
print(res.branch.value, res.diagnostics.character.value, res.J_value)
