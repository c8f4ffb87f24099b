import math
from pathlib import Path

import numpy as np
import pytest

from avgorbit import PendulumParams, RationalPeriod, build_profile

REPO_ROOT = Path(__file__).resolve().parent.parent
PAPER_SIM_CONFIG = REPO_ROOT / "configs" / "paper-sim.json"


def _zero(t, theta, thetadot):
    return 0.0


def _sin_t(t, theta, thetadot):
    return math.sin(t)


@pytest.fixture(scope="session")
def sim_params():
    """Reference simulation parameters: a = 1, b_bar = 1, epsilon = 0.1."""
    return PendulumParams(a=1.0, b_bar=1.0, epsilon=0.1)


@pytest.fixture(scope="session")
def sim_profile():
    """Reference forcing: f = 0, g = sin(t), both with the base period."""
    return build_profile(
        _zero, _sin_t,
        RationalPeriod.for_frequency(1, 1, 1.0),
        RationalPeriod.for_frequency(1, 1, 1.0),
    )


@pytest.fixture(scope="session")
def trig_profile_factory():
    """Factory of random trigonometric-polynomial forcing profiles.

    Coefficient functions are trig polynomials of degree <= 3 in the base
    angle sqrt(a)*t, so every profile has the base period (p = q = 1).  The
    forcing f is built as f1(t)*theta + f2(t)*thetadot, which realizes the
    coefficient functions exactly and vanishes at zero amplitude.
    """

    def make(rng: np.random.Generator):
        a = rng.uniform(0.5, 4.0)
        b_bar = rng.uniform(0.1, 2.0)
        w = math.sqrt(a)

        def trig_poly(coeffs):
            const = coeffs[0]
            cos_c = coeffs[1:4]
            sin_c = coeffs[4:7]

            def fn(t: float) -> float:
                out = const
                for k in range(3):
                    out += cos_c[k] * math.cos((k + 1) * w * t)
                    out += sin_c[k] * math.sin((k + 1) * w * t)
                return out

            return fn

        f1 = trig_poly(rng.uniform(-1.0, 1.0, size=7))
        f2 = trig_poly(rng.uniform(-1.0, 1.0, size=7))
        g0 = trig_poly(rng.uniform(-1.0, 1.0, size=7))

        def f(t, theta, thetadot):
            return f1(t) * theta + f2(t) * thetadot

        def g(t, theta, thetadot):
            return g0(t)

        params = PendulumParams(a=a, b_bar=b_bar, epsilon=0.05)
        profile = build_profile(
            f, g,
            RationalPeriod.for_frequency(1, 1, a),
            RationalPeriod.for_frequency(1, 1, a),
            f1=f1, f2=f2, g0=g0,
        )
        return params, profile

    return make
