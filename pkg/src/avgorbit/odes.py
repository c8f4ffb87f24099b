"""Exact pendulum dynamics in three coordinate charts, and an integrator.

Charts
------
original
    Physical angle and angular velocity ``(theta, thetadot)``; the equation
    of motion is ``theta'' = -a sin(theta) - eps*b_bar*theta' + eps*f + eps^2*g``.
rescaled
    Amplitude-rescaled coordinates ``theta = eps * phi``.  Dividing through
    by ``eps`` keeps the state O(1) as the forcing shrinks; the stiffness
    term becomes ``-a * phi * sinc(eps * phi)``, which is evaluated by a
    short series for small arguments so the unforced limit is exact.
standard
    The rescaled state viewed in the frame co-rotating with the unforced
    center, ``y(t) = E(-t) x(t)`` with ``E(t)`` the rotation-like fundamental
    matrix below.  In this frame the unforced flow is frozen and everything
    that remains is driven by the forcing.

The integrator is an adaptive embedded Runge-Kutta 5(4) pair (Dormand and
Prince coefficients) with local error control per step and exact endpoint
hit.  Trajectory samples are the accepted steps; there is no dense output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, TextIO

import numpy as np

from .pendulum import ForcingFunction, PendulumParams
from .serialize import format_float

__all__ = [
    "Chart",
    "IntegrationError",
    "NonFiniteStateError",
    "StepUnderflowError",
    "Trajectory",
    "convert_state",
    "from_standard_form",
    "fundamental_matrix",
    "integrate",
    "pendulum_rhs",
    "rescaled_rhs",
    "rhs_for_chart",
    "standard_form_rhs",
    "to_standard_form",
]

Rhs = Callable[[float, np.ndarray], np.ndarray]

DEFAULT_REL_TOL = 1e-10
DEFAULT_ABS_TOL = 1e-10


class Chart(Enum):
    """Coordinate chart for pendulum states."""

    ORIGINAL = "original"
    RESCALED = "rescaled"
    STANDARD = "standard"


class IntegrationError(RuntimeError):
    """Base class for integrator failures."""


class StepUnderflowError(IntegrationError):
    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow at t = {t!r} (h = {h:.3e})")
        self.t = t


class NonFiniteStateError(IntegrationError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state or derivative at t = {t!r}")
        self.t = t


def _sinc(u: float) -> float:
    """sin(u)/u with a series branch near zero, free of cancellation."""
    if abs(u) < 1e-4:
        u2 = u * u
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0
    return math.sin(u) / u


def pendulum_rhs(
    t: float,
    state: np.ndarray,
    params: PendulumParams,
    f: ForcingFunction,
    g: ForcingFunction,
) -> np.ndarray:
    """Right-hand side in the original chart (theta, thetadot)."""
    theta, thetadot = float(state[0]), float(state[1])
    eps = params.epsilon
    acc = (
        -params.a * math.sin(theta)
        - eps * params.b_bar * thetadot
        + eps * f(t, theta, thetadot)
        + eps * eps * g(t, theta, thetadot)
    )
    return np.array((thetadot, acc))


def rescaled_rhs(
    t: float,
    state: np.ndarray,
    params: PendulumParams,
    f: ForcingFunction,
    g: ForcingFunction,
) -> np.ndarray:
    """Right-hand side in the rescaled chart (phi, phidot), theta = eps*phi.

    At ``eps = 0`` this is exactly the linear center plus the forcing value
    at zero amplitude.
    """
    phi, phidot = float(state[0]), float(state[1])
    eps = params.epsilon
    theta = eps * phi
    thetadot = eps * phidot
    acc = (
        -params.a * phi * _sinc(theta)
        - eps * params.b_bar * phidot
        + f(t, theta, thetadot)
        + eps * g(t, theta, thetadot)
    )
    return np.array((phidot, acc))


def fundamental_matrix(t: float, a: float) -> np.ndarray:
    """Solution operator of the unforced small-swing system at time t.

    For ``x' = (y, -a x)`` this is the rotation-like matrix
    ``[[cos(w t), sin(w t)/w], [-w sin(w t), cos(w t)]]`` with ``w = sqrt(a)``;
    it has unit determinant and period ``2*pi/w``.
    """
    if not a > 0.0:
        raise ValueError("a must be positive")
    w = math.sqrt(a)
    c = math.cos(w * t)
    s = math.sin(w * t)
    return np.array(((c, s / w), (-w * s, c)))


def to_standard_form(t: float, state: np.ndarray, a: float) -> np.ndarray:
    """Rescaled-chart state to the co-rotating frame: y = E(-t) x."""
    return fundamental_matrix(-t, a) @ np.asarray(state, dtype=float)


def from_standard_form(t: float, state: np.ndarray, a: float) -> np.ndarray:
    """Co-rotating frame back to the rescaled chart: x = E(t) y."""
    return fundamental_matrix(t, a) @ np.asarray(state, dtype=float)


def standard_form_rhs(
    t: float,
    state: np.ndarray,
    params: PendulumParams,
    f: ForcingFunction,
    g: ForcingFunction,
) -> np.ndarray:
    """Right-hand side in the co-rotating frame.

    Built from the exact rescaled dynamics: map to the rescaled chart,
    subtract the linear-center part, and rotate the remainder back.
    Integrating this reproduces ``y(t) = E(-t) x(t)`` of the rescaled flow;
    at ``eps = 0`` (with forcing vanishing at zero amplitude) it is
    identically zero.
    """
    a = params.a
    x = from_standard_form(t, state, a)
    full = rescaled_rhs(t, x, params, f, g)
    residual = np.array((full[0] - x[1], full[1] + a * x[0]))
    return fundamental_matrix(-t, a) @ residual


def rhs_for_chart(
    chart: Chart,
    params: PendulumParams,
    f: ForcingFunction,
    g: ForcingFunction,
) -> Rhs:
    """Bind parameters and forcing into a ``(t, state) -> state`` callable."""
    table = {
        Chart.ORIGINAL: pendulum_rhs,
        Chart.RESCALED: rescaled_rhs,
        Chart.STANDARD: standard_form_rhs,
    }
    rhs = table[chart]

    def bound(t: float, state: np.ndarray) -> np.ndarray:
        return rhs(t, state, params, f, g)

    return bound


def convert_state(
    state: np.ndarray,
    t: float,
    source: Chart,
    target: Chart,
    params: PendulumParams,
) -> np.ndarray:
    """Convert a state between charts at time ``t``.

    The original chart collapses to the origin at ``eps = 0``, so converting
    out of it is rejected there.
    """
    s = np.array(state, dtype=float)
    if source == target:
        return s
    if source is Chart.ORIGINAL:
        if params.epsilon == 0.0:
            raise ValueError("original chart is degenerate at epsilon = 0")
        s = s / params.epsilon
    elif source is Chart.STANDARD:
        s = from_standard_form(t, s, params.a)
    if target is Chart.ORIGINAL:
        s = s * params.epsilon
    elif target is Chart.STANDARD:
        s = to_standard_form(t, s, params.a)
    return s


@dataclass
class Trajectory:
    """Time-stamped states from one integration run."""

    times: np.ndarray   # (n,), strictly increasing, endpoints exact
    states: np.ndarray  # (n, 2)
    accepted_steps: int
    rejected_steps: int
    max_error_estimate: float

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def write_csv(self, stream: TextIO) -> None:
        stream.write("t,x,y\n")
        for t, (x, y) in zip(self.times, self.states):
            stream.write(f"{format_float(t)},{format_float(x)},{format_float(y)}\n")


# Dormand-Prince 5(4) tableau.  The fifth-order solution is propagated; the
# last stage sits at the step end (first-same-as-last).
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth- minus fourth-order weights, for the local error estimate
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


def integrate(
    rhs: Rhs,
    s0: np.ndarray,
    t0: float,
    t1: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    *,
    max_step: Optional[float] = None,
) -> Trajectory:
    """Integrate ``state' = rhs(t, state)`` from ``t0`` to ``t1``.

    A step is accepted when the embedded error estimate satisfies
    ``est <= abs_tol + rel_tol * ||state||``.  The final sample lands on
    ``t1`` exactly.  Raises StepUnderflowError when the step falls below
    ``1e-14 * (t1 - t0)`` and NonFiniteStateError when the initial state or
    derivative is not finite; non-finite trial states during stepping are
    rejected and retried with a smaller step.
    """
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0!r}, {t1!r}]")
    if not (rel_tol > 0.0 and abs_tol > 0.0):
        raise ValueError("tolerances must be positive")
    if max_step is not None and not max_step > 0.0:
        raise ValueError("max_step must be positive")

    y = np.array(s0, dtype=float)
    if y.shape != (2,):
        raise ValueError(f"state must have shape (2,), got {y.shape}")
    if not np.isfinite(y).all():
        raise NonFiniteStateError(t0)

    span = t1 - t0
    h_min = 1e-14 * span
    k1 = np.asarray(rhs(t0, y), dtype=float)
    if not np.isfinite(k1).all():
        raise NonFiniteStateError(t0)

    h = span / 1000.0
    if max_step is not None:
        h = min(h, max_step)

    times = [t0]
    states = [y.copy()]
    accepted = 0
    rejected = 0
    max_est = 0.0
    t = t0

    while t < t1:
        if max_step is not None:
            h = min(h, max_step)
        clipped = (t1 - t) <= 1.05 * h
        if clipped:
            h = t1 - t
        if h < h_min:
            raise StepUnderflowError(t, h)

        k2 = np.asarray(rhs(t + _C2 * h, y + h * (_A21 * k1)), dtype=float)
        k3 = np.asarray(rhs(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2)), dtype=float)
        k4 = np.asarray(rhs(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3)), dtype=float)
        k5 = np.asarray(
            rhs(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4)),
            dtype=float)
        k6 = np.asarray(
            rhs(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5)),
            dtype=float)
        y1 = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        if not np.isfinite(y1).all():
            rejected += 1
            h *= 0.25
            continue
        k7 = np.asarray(rhs(t + h, y1), dtype=float)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        if not np.isfinite(err).all():
            rejected += 1
            h *= 0.25
            continue

        est = float(math.hypot(err[0], err[1]))
        scale = abs_tol + rel_tol * max(
            math.hypot(y[0], y[1]), math.hypot(y1[0], y1[1]))
        if est <= scale:
            t = t1 if clipped else t + h
            y = y1
            k1 = k7
            times.append(t)
            states.append(y.copy())
            accepted += 1
            if est > max_est:
                max_est = est
        else:
            rejected += 1

        if est == 0.0:
            factor = 5.0
        else:
            factor = min(5.0, max(0.2, 0.9 * (scale / est) ** 0.2))
        h *= factor

    return Trajectory(np.array(times), np.array(states), accepted, rejected, max_est)
