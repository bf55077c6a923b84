import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stationary_geodesics import CATALOG, builtin

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def smooth_curve(m, rng, N, coefs=None, spread=0.3, bump=0.05):
    """Chord plus three sine modes inside the chart; same curve for any N given ``coefs``."""
    lo, hi = m.lower, m.upper
    c, w = 0.5 * (lo + hi), hi - lo
    if coefs is None:
        p = c + spread * w * rng.uniform(-1, 1, m.dim)
        q = c + spread * w * rng.uniform(-1, 1, m.dim)
        modes = bump * w * rng.standard_normal((3, m.dim))
        coefs = (p, q, modes)
    p, q, modes = coefs
    s = np.linspace(0.0, 1.0, N + 1)[:, None]
    X = (1 - s) * p + s * q + sum(np.sin((k + 1) * np.pi * s) * modes[k] for k in range(3))
    return X, coefs


@pytest.fixture(params=CATALOG)
def scenario(request):
    return builtin(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, shown after the run even when output is captured
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
