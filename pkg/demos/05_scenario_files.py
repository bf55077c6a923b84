# %% [markdown]
# # Custom scenarios and the command line
#
# Metrics can be given as polynomial tables in a YAML file.  This one is
# the static well beta = 1 + |x|^2 with a circle at t = 0 as P.

# %%
import tempfile
from pathlib import Path

from stationary_geodesics.cli import main
from stationary_geodesics.scenario_file import load_scenario

doc = """
name: well
dimension: 2
chart: {lower: [-2, -2], upper: [2, 2]}
metric:
  g0: [[[{coef: 1, powers: [0, 0]}], []], [[], [{coef: 1, powers: [0, 0]}]]]
  delta: [[], []]
  beta: [{coef: 1, powers: [0, 0]}, {coef: 1, powers: [2, 0]}, {coef: 1, powers: [0, 2]}]
boundary:
  P: {shape: sphere, center: [0, 0], radius: 1, t: 0}
  Q: {shape: point, coords: [1.8, 0, 0.8]}
solver: {N: 512, restarts: 1}
seed: 0
"""

work = Path(tempfile.mkdtemp())
path = work / "well.yaml"
path.write_text(doc)
loaded = load_scenario(path)
print(loaded.scenario.name, loaded.scenario.boundary.hypothesis.value, loaded.solver)

# %% [markdown]
# The same file through the CLI: a curve CSV and a key: value report.

# %%
code = main(["solve", str(path), "--out-dir", str(work / "out")])
print("exit code", code)
print((work / "out" / "curve.csv").read_text().splitlines()[:3])

# %% [markdown]
# Re-certify the stored curve without solving again.

# %%
main(["diagnose", str(work / "out" / "curve.csv"), str(path)])
