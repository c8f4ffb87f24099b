"""First-order averaging of the small-swing pendulum dynamics.

Viewed in the frame co-rotating with the unforced center, the slow drift of
the rescaled pendulum integrates, over one common forcing period, to an
affine field: a 2x2 coefficient matrix acting on the frame state minus a
constant forcing vector.  When the matrix is invertible and the forcing
vector is nonzero, the unique zero of that field predicts the initial state
of a genuine periodic orbit of the full equations, valid for small forcing
amplitude; that prediction is what the shooting verifier is seeded with.

Averages here are plain integrals over the period, NOT divided by its
length.  Zeros of the averaged field are unaffected by the normalization,
but magnitudes carry the period factor and all tolerances below are stated
for the unnormalized convention.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .newton import damped_newton
from .pendulum import InconsistentPeriodsError, PendulumParams, PerturbationProfile
from .quadrature import adaptive_quad

__all__ = [
    "AveragedSystem",
    "DEFAULT_QUAD_TOL",
    "ExistenceVerdict",
    "FORCING_TOL",
    "SINGULARITY_RTOL",
    "average_over_period",
    "averaged_forcing",
    "averaged_matrix",
    "build_averaged_system",
    "constant_coefficient_det",
    "existence_check",
    "find_averaged_zero",
    "first_order_field",
]

DEFAULT_QUAD_TOL = 1e-10
# invertibility threshold: |det| must exceed this times the squared
# Frobenius norm of the matrix
SINGULARITY_RTOL = 1e-8
# a matrix whose norm sits at quadrature-noise scale is the zero matrix;
# without this floor the relative determinant test can pass on pure noise
MATRIX_NOISE_FLOOR = 1e-8
# the forcing vector counts as nonzero above this norm
FORCING_TOL = 1e-10

_SQRT_EPS = math.sqrt(sys.float_info.epsilon)


def _check_consistent(params: PendulumParams, profile: PerturbationProfile) -> None:
    base = params.base_period
    if abs(profile.period_f.base - base) > 1e-9 * base:
        raise InconsistentPeriodsError(
            f"profile base period {profile.period_f.base!r} does not match "
            f"2*pi/sqrt(a) = {base!r}")


def averaged_matrix(
    params: PendulumParams,
    profile: PerturbationProfile,
    *,
    abs_tol: float = DEFAULT_QUAD_TOL,
) -> np.ndarray:
    """Coefficient matrix of the averaged co-rotating dynamics.

    Each entry is a period integral of the small-angle coefficient functions
    against products of the center's sine and cosine, by adaptive quadrature
    to ``abs_tol``; the damping contributes ``-b_bar * p * pi / sqrt(a)`` on
    the diagonal (one ``pi / sqrt(a)`` per base period covered).
    """
    _check_consistent(params, profile)
    a = params.a
    w = params.omega
    f1, f2 = profile.f1, profile.f2
    T = profile.T
    diagonal = -params.b_bar * profile.p * math.pi / w

    def m11(t: float) -> float:
        s, c = math.sin(w * t), math.cos(w * t)
        return s * (-c / w * f1(t) + s * f2(t))

    def m12(t: float) -> float:
        s, c = math.sin(w * t), math.cos(w * t)
        return s / a * (-s * f1(t) - w * c * f2(t))

    def m21(t: float) -> float:
        s, c = math.sin(w * t), math.cos(w * t)
        return c * (c * f1(t) - w * s * f2(t))

    def m22(t: float) -> float:
        s, c = math.sin(w * t), math.cos(w * t)
        return c * (s / w * f1(t) + c * f2(t))

    def quad(fn: Callable[[float], float]) -> float:
        return adaptive_quad(fn, 0.0, T, abs_tol=abs_tol)[0]

    return np.array((
        (diagonal + quad(m11), quad(m12)),
        (quad(m21), diagonal + quad(m22)),
    ))


def averaged_forcing(
    params: PendulumParams,
    profile: PerturbationProfile,
    *,
    abs_tol: float = DEFAULT_QUAD_TOL,
) -> np.ndarray:
    """Constant vector of the averaged co-rotating dynamics.

    Period integrals of the zero-amplitude forcing ``g0`` against
    ``sin(w t)/w`` and ``-cos(w t)``.
    """
    _check_consistent(params, profile)
    w = params.omega
    g0 = profile.g0
    T = profile.T
    v1 = adaptive_quad(lambda t: math.sin(w * t) / w * g0(t), 0.0, T, abs_tol=abs_tol)[0]
    v2 = -adaptive_quad(lambda t: math.cos(w * t) * g0(t), 0.0, T, abs_tol=abs_tol)[0]
    return np.array((v1, v2))


@dataclass(frozen=True)
class AveragedSystem:
    """The affine averaged field ``z -> matrix @ z - forcing``."""

    matrix: np.ndarray
    forcing: np.ndarray
    period: float

    @property
    def det(self) -> float:
        """Determinant of the coefficient matrix, recomputed on access."""
        m = self.matrix
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    @property
    def is_invertible(self) -> bool:
        m = self.matrix
        frobenius_sq = float((m * m).sum())
        if frobenius_sq <= MATRIX_NOISE_FLOOR ** 2:
            return False
        return abs(self.det) > SINGULARITY_RTOL * frobenius_sq

    @property
    def zero(self) -> Optional[np.ndarray]:
        """Solution of ``matrix @ z = forcing``, or None when singular."""
        if not self.is_invertible:
            return None
        m, v = self.matrix, self.forcing
        return np.array((
            m[1, 1] * v[0] - m[0, 1] * v[1],
            m[0, 0] * v[1] - m[1, 0] * v[0],
        )) / self.det

    def field(self, zeta: np.ndarray) -> np.ndarray:
        """Value of the averaged field at ``zeta``."""
        return self.matrix @ np.asarray(zeta, dtype=float) - self.forcing

    def to_json_dict(self) -> dict:
        z = self.zero
        return {
            "M": [float(x) for x in self.matrix.ravel()],
            "v": [float(x) for x in self.forcing],
            "T": self.period,
            "detM": self.det,
            "z0": None if z is None else [float(x) for x in z],
        }


def build_averaged_system(
    params: PendulumParams,
    profile: PerturbationProfile,
    *,
    abs_tol: float = DEFAULT_QUAD_TOL,
) -> AveragedSystem:
    return AveragedSystem(
        matrix=averaged_matrix(params, profile, abs_tol=abs_tol),
        forcing=averaged_forcing(params, profile, abs_tol=abs_tol),
        period=profile.T,
    )


@dataclass(frozen=True)
class ExistenceVerdict:
    """Outcome of the averaged existence test.

    ``conditions_hold`` reports the algebraic conditions alone (invertible
    matrix, nonzero forcing vector); ``hypothesis_ok`` reports whether the
    first-order forcing vanishes at zero amplitude, which the prediction
    additionally requires.  Failures never raise, they land in
    ``diagnostics``.
    """

    conditions_hold: bool
    det: float
    forcing_norm: float
    zero: Optional[np.ndarray]
    hypothesis_ok: bool
    diagnostics: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "conditions_hold": self.conditions_hold,
            "detM": self.det,
            "v_norm": self.forcing_norm,
            "z0": None if self.zero is None else [float(x) for x in self.zero],
            "hypothesis_ok": self.hypothesis_ok,
            "diagnostics": list(self.diagnostics),
        }


def existence_check(
    system: AveragedSystem,
    profile: PerturbationProfile,
    *,
    hypothesis_tol: float = 1e-10,
    samples: int = 64,
) -> ExistenceVerdict:
    """Existence verdict for a small periodic orbit near the origin.

    Samples ``f(t, 0, 0)`` on an equispaced grid over one period (it must
    vanish for the averaged prediction to apply) and checks that the
    averaged matrix is invertible and the averaged forcing vector nonzero.
    """
    notes: list[str] = []
    hypothesis_ok = True
    T = system.period
    for k in range(samples):
        t = T * k / samples
        try:
            value = profile.f(t, 0.0, 0.0)
        except (ValueError, ZeroDivisionError) as exc:
            hypothesis_ok = False
            notes.append(f"f(t,0,0) failed at t = {t:.6g}: {exc}")
            break
        if not math.isfinite(value) or abs(value) > hypothesis_tol:
            hypothesis_ok = False
            notes.append(
                f"f(t,0,0) = {value:.6e} at t = {t:.6g}, "
                f"must vanish (tolerance {hypothesis_tol:g})")
            break
    if not system.is_invertible:
        notes.append(
            f"averaged matrix is numerically singular (det = {system.det:.6e})")
    forcing_norm = float(np.linalg.norm(system.forcing))
    if forcing_norm <= FORCING_TOL:
        notes.append(
            f"averaged forcing vector is numerically zero (norm = {forcing_norm:.3e})")
    conditions_hold = system.is_invertible and forcing_norm > FORCING_TOL
    return ExistenceVerdict(
        conditions_hold=conditions_hold,
        det=system.det,
        forcing_norm=forcing_norm,
        zero=system.zero,
        hypothesis_ok=hypothesis_ok,
        diagnostics=tuple(notes),
    )


def constant_coefficient_det(c1: float, c2: float, a: float, b_bar: float) -> float:
    """Closed-form determinant of the averaged matrix for constant
    small-angle coefficients ``f1 = c1`` and ``f2 = c2`` over one base
    period: ``(c1^2 + a*(b_bar - c2)^2) * pi^2 / a^2``.

    It vanishes exactly when ``(c1, c2) = (0, b_bar)``.
    """
    if not a > 0.0:
        raise ValueError("a must be positive")
    return (c1 * c1 + a * (b_bar - c2) ** 2) * math.pi ** 2 / (a * a)


def first_order_field(
    params: PendulumParams,
    profile: PerturbationProfile,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Co-rotating forcing field whose period integral is the affine
    averaged field.

    Returns a callable ``(s, z) -> 2-vector``: the first-order forcing of
    the rescaled pendulum, evaluated along the unforced rotation through
    ``z`` and rotated back into the frame.  Integrating it over one period
    at frozen ``z`` reproduces ``averaged_matrix @ z - averaged_forcing``;
    the two routes serve as independent cross-checks of each other.
    """
    _check_consistent(params, profile)
    w = params.omega
    b_bar = params.b_bar
    g0, f1, f2 = profile.g0, profile.f1, profile.f2

    def field(s: float, z: np.ndarray) -> np.ndarray:
        c = math.cos(w * s)
        sn = math.sin(w * s)
        x = c * z[0] + sn / w * z[1]
        y = -w * sn * z[0] + c * z[1]
        forcing = g0(s) + f1(s) * x + (f2(s) - b_bar) * y
        return np.array((-sn / w * forcing, c * forcing))

    return field


def average_over_period(
    field: Callable[[float, np.ndarray], np.ndarray],
    period: float,
    state: np.ndarray,
    *,
    abs_tol: float = DEFAULT_QUAD_TOL,
) -> np.ndarray:
    """Integrate a time-periodic field at a frozen state over one period.

    Component-wise adaptive quadrature.  This is the plain integral, not
    divided by the period.
    """
    z = np.asarray(state, dtype=float)
    out = np.empty_like(z)
    for i in range(z.size):
        out[i] = adaptive_quad(
            lambda s, i=i: float(field(s, z)[i]), 0.0, period, abs_tol=abs_tol)[0]
    return out


def find_averaged_zero(
    field: Callable[[float, np.ndarray], np.ndarray],
    period: float,
    guess: np.ndarray,
    *,
    abs_tol: float = DEFAULT_QUAD_TOL,
    tol: float = 1e-10,
    max_iterations: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Newton zero of the period-averaged field, seeded at ``guess``.

    Returns ``(zero, jacobian)``; the Jacobian at the zero supports the
    nondegeneracy check.  Raises MaxIterationsError or
    SingularJacobianError when the iteration stalls or the Jacobian cannot
    be solved.
    """
    result = damped_newton(
        lambda z: average_over_period(field, period, z, abs_tol=abs_tol),
        guess,
        tol=tol,
        max_iterations=max_iterations,
        step_scale=_SQRT_EPS,
    )
    return result.x, result.jacobian
