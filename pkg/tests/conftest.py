import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from smatrix_lab import EvenBox, NumericPair, OddBox, PolyExp, Shift, Zero

settings.register_profile(
    "lab", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")


def bump_pair():
    """Smooth profile supported in [0, 1.5], declared non-cyclic through Shift(2)."""
    def b(x):
        x = np.asarray(x, dtype=float)
        t = np.clip(x / 1.5, 0.0, 1.0)
        return (t * (1 - t)) ** 3 * 64

    return NumericPair.from_functions(lambda x: (1 + 0.5j) * b(x), lambda x: -0.7j * b(x),
                                      x_max=2.0, n=801, psi1=Shift(2.0), psi2=Shift(2.0))


CLOSED_FAMILIES = {
    "zero": Zero(),
    "even_box": EvenBox(1 + 1j, 1.0),
    "odd_box": OddBox(2j, 1.0),
    "poly_exp0": PolyExp([8j]),
}

ALL_PROFILES = dict(CLOSED_FAMILIES)
ALL_PROFILES["poly_exp2"] = PolyExp([0.5 - 0.3j, 1.0, 0.2j])


@pytest.fixture(params=sorted(CLOSED_FAMILIES))
def closed_profile(request):
    return CLOSED_FAMILIES[request.param]


def lower_points(rng, n, re=(-3, 3), im=(-3, -0.2), avoid_axis=0.1):
    out = []
    while len(out) < n:
        z = complex(rng.uniform(*re), rng.uniform(*im))
        if abs(z.real) > avoid_axis:
            out.append(z)
    return out


def grid(re, im, n_re, n_im):
    return [complex(x, y) for y in np.linspace(*im, n_im) for x in np.linspace(*re, n_re)]


SQRT3 = math.sqrt(3.0)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
