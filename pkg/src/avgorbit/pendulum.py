"""Parameters and small-angle data of the forced damped pendulum.

The model is a pendulum with gravity-to-length ratio ``a`` whose damping and
forcing are tied to one smallness parameter: the damping coefficient is
``epsilon * b_bar`` and two forcing terms enter at first and second order in
``epsilon``.  For small swings the forcing is summarized by three periodic
coefficient functions of time: the second-order forcing at zero amplitude and
the two partial derivatives of the first-order forcing with respect to angle
and angular velocity, also at zero amplitude.

This module owns parameter validation, equilibrium classification of the
unforced pendulum, reconciliation of rational forcing periods to a common
period, and numerical extraction of the coefficient functions.
"""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

__all__ = [
    "Classification",
    "CoefficientEvaluationError",
    "ForcingFunction",
    "InconsistentPeriodsError",
    "PendulumParams",
    "PerturbationProfile",
    "RationalPeriod",
    "TimeFunction",
    "build_profile",
    "classify_equilibrium",
    "common_period",
    "eigenvalues",
    "extract_coefficients",
]

TimeFunction = Callable[[float], float]
ForcingFunction = Callable[[float, float, float], float]

# cube root of machine epsilon, the standard central-difference step scale
_FD_STEP = sys.float_info.epsilon ** (1.0 / 3.0)


class Classification(Enum):
    """Equilibrium type of the unforced pendulum at the hanging position."""

    ATTRACTOR_NODE = "attractor-node"
    ATTRACTOR_FOCUS = "attractor-focus"
    CENTER = "center"


class InconsistentPeriodsError(ValueError):
    """Forcing periods refer to different base frequencies."""


class CoefficientEvaluationError(ValueError):
    """A forcing term evaluated to a non-finite value."""

    def __init__(self, name: str, t: float, value: float):
        super().__init__(f"{name} evaluated to {value!r} at t = {t!r}")
        self.t = t
        self.value = value


@dataclass(frozen=True)
class PendulumParams:
    """Scalars of the forced pendulum.

    Parameters
    ----------
    a : float
        Gravity over rod length, positive.  The unforced small-swing
        frequency is ``sqrt(a)``.
    b_bar : float
        Damping per unit forcing amplitude.  The physical damping
        coefficient is ``epsilon * b_bar``, so damping vanishes together
        with the forcing.  Must be positive whenever ``epsilon > 0``.
    epsilon : float
        Forcing amplitude, nonnegative.  Zero selects the unforced limit.
    """

    a: float
    b_bar: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"a must be positive and finite, got {self.a!r}")
        if not math.isfinite(self.b_bar):
            raise ValueError(f"b_bar must be finite, got {self.b_bar!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon!r}")
        if self.epsilon > 0.0 and not self.b_bar > 0.0:
            raise ValueError(
                f"b_bar must be positive when epsilon > 0, got {self.b_bar!r}")

    @property
    def omega(self) -> float:
        """Small-swing angular frequency sqrt(a)."""
        return math.sqrt(self.a)

    @property
    def base_period(self) -> float:
        """Period of the unforced small swing, 2*pi/sqrt(a)."""
        return 2.0 * math.pi / self.omega

    @property
    def damping(self) -> float:
        """Physical damping coefficient epsilon * b_bar."""
        return self.epsilon * self.b_bar


@dataclass(frozen=True)
class RationalPeriod:
    """A period equal to p/q times the base period of the unforced swing.

    p and q are reduced to lowest terms on construction.
    """

    p: int
    q: int
    base: float

    def __post_init__(self):
        if not isinstance(self.p, int) or not isinstance(self.q, int):
            raise TypeError("p and q must be integers")
        if self.p < 1 or self.q < 1:
            raise ValueError(f"p and q must be positive, got {self.p}/{self.q}")
        if not (math.isfinite(self.base) and self.base > 0.0):
            raise ValueError(f"base period must be positive, got {self.base!r}")
        g = math.gcd(self.p, self.q)
        if g > 1:
            object.__setattr__(self, "p", self.p // g)
            object.__setattr__(self, "q", self.q // g)

    @classmethod
    def for_frequency(cls, p: int, q: int, a: float) -> "RationalPeriod":
        """Period p/q * 2*pi/sqrt(a) for a pendulum with parameter ``a``."""
        if not a > 0.0:
            raise ValueError("a must be positive")
        return cls(p, q, 2.0 * math.pi / math.sqrt(a))

    @property
    def value(self) -> float:
        return self.p * self.base / self.q


def _require_ab(a: float, b: float) -> None:
    if not a > 0.0:
        raise ValueError(f"a must be positive, got {a!r}")
    if not b >= 0.0:
        raise ValueError(f"b must be nonnegative, got {b!r}")


def eigenvalues(a: float, b: float) -> tuple[complex, complex]:
    """Eigenvalues of the pendulum linearized about the hanging equilibrium.

    These are the roots of ``lambda**2 + b*lambda + a``, computed with the
    principal complex square root when the discriminant is negative.
    """
    _require_ab(a, b)
    root = cmath.sqrt(complex(b * b - 4.0 * a, 0.0))
    return ((-b + root) / 2.0, (-b - root) / 2.0)


def classify_equilibrium(a: float, b: float) -> Classification:
    """Equilibrium type of the hanging position from the damping strength.

    Overdamped or critically damped (b*b >= 4a with b > 0) gives an
    attracting node, light damping an attracting focus, and no damping a
    center.
    """
    _require_ab(a, b)
    if b == 0.0:
        return Classification.CENTER
    if b * b >= 4.0 * a:
        return Classification.ATTRACTOR_NODE
    return Classification.ATTRACTOR_FOCUS


def common_period(period_f: RationalPeriod, period_g: RationalPeriod) -> tuple[int, float]:
    """Smallest common period of two rational periods over the same base.

    Returns ``(p, T)`` where ``p = lcm(p_f, p_g)`` and ``T = p * base`` is an
    integer multiple of both input period values.  The rational bookkeeping
    stays exact; floats enter only in the final multiplication.
    """
    base = period_f.base
    if abs(period_g.base - base) > 1e-12 * base:
        raise InconsistentPeriodsError(
            f"base periods differ: {base!r} vs {period_g.base!r}")
    p = math.lcm(period_f.p, period_g.p)
    return p, p * base


def _finite(name: str, t: float, value: float) -> float:
    if not math.isfinite(value):
        raise CoefficientEvaluationError(name, t, value)
    return value


def extract_coefficients(
    f: ForcingFunction,
    g: ForcingFunction,
    h: Optional[float] = None,
) -> tuple[TimeFunction, TimeFunction, TimeFunction]:
    """Small-angle coefficient functions of the forcing terms.

    Returns ``(g0, f1, f2)``: the second-order forcing at zero amplitude
    ``g(t, 0, 0)`` and the partials of the first-order forcing with respect
    to angle and angular velocity at zero amplitude, the latter two by
    central differences.  ``h`` fixes the difference step; by default it is
    the cube root of machine epsilon scaled by ``1 + |t|``.

    Non-finite values of ``f`` or ``g`` raise CoefficientEvaluationError
    carrying the offending time.
    """

    def step_at(t: float) -> float:
        return h if h is not None else _FD_STEP * (1.0 + abs(t))

    def g0(t: float) -> float:
        return _finite("g(t,0,0)", t, g(t, 0.0, 0.0))

    def f1(t: float) -> float:
        s = step_at(t)
        hi = _finite("f", t, f(t, s, 0.0))
        lo = _finite("f", t, f(t, -s, 0.0))
        return (hi - lo) / (2.0 * s)

    def f2(t: float) -> float:
        s = step_at(t)
        hi = _finite("f", t, f(t, 0.0, s))
        lo = _finite("f", t, f(t, 0.0, -s))
        return (hi - lo) / (2.0 * s)

    return g0, f1, f2


@dataclass(frozen=True)
class PerturbationProfile:
    """Forcing terms of the pendulum plus their small-angle coefficients.

    ``f`` and ``g`` are the first- and second-order forcing, called as
    ``f(t, theta, thetadot)``.  ``g0``, ``f1`` and ``f2`` are the periodic
    coefficient functions of time.  ``T = p * base`` is the common forcing
    period over which all averaging and return maps run.
    """

    f: ForcingFunction
    g: ForcingFunction
    g0: TimeFunction
    f1: TimeFunction
    f2: TimeFunction
    period_f: RationalPeriod
    period_g: RationalPeriod
    p: int
    T: float


def build_profile(
    f: ForcingFunction,
    g: ForcingFunction,
    period_f: RationalPeriod,
    period_g: RationalPeriod,
    *,
    f1: Optional[TimeFunction] = None,
    f2: Optional[TimeFunction] = None,
    g0: Optional[TimeFunction] = None,
    fd_step: Optional[float] = None,
) -> PerturbationProfile:
    """Assemble a profile, deriving any coefficient function not supplied.

    Explicitly supplied ``f1``, ``f2`` or ``g0`` take precedence over the
    finite-difference extraction.
    """
    p, T = common_period(period_f, period_g)
    auto_g0, auto_f1, auto_f2 = extract_coefficients(f, g, fd_step)
    return PerturbationProfile(
        f=f,
        g=g,
        g0=g0 if g0 is not None else auto_g0,
        f1=f1 if f1 is not None else auto_f1,
        f2=f2 if f2 is not None else auto_f2,
        period_f=period_f,
        period_g=period_g,
        p=p,
        T=T,
    )
