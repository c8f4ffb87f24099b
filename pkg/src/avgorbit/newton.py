"""Damped Newton iteration with forward-difference Jacobians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "MaxIterationsError",
    "NewtonError",
    "NewtonResult",
    "SingularJacobianError",
    "damped_newton",
    "forward_jacobian",
]


class NewtonError(RuntimeError):
    """Base class for Newton iteration failures."""


class MaxIterationsError(NewtonError):
    pass


class SingularJacobianError(NewtonError):
    pass


@dataclass
class NewtonResult:
    x: np.ndarray
    jacobian: np.ndarray  # of the residual function, at x
    iterations: int
    residual_norm: float


def forward_jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    f0: np.ndarray | None = None,
    *,
    step_scale: float,
) -> np.ndarray:
    """Forward-difference Jacobian, column i with step ``step_scale * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = np.asarray(func(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        step = step_scale * (1.0 + abs(x[i]))
        shifted = x.copy()
        shifted[i] += step
        jac[:, i] = (np.asarray(func(shifted), dtype=float) - f0) / step
    return jac


def damped_newton(
    func: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    tol: float,
    step_scale: float,
    max_iterations: int = 50,
    max_backtracks: int = 20,
    min_singular_value: float = 0.0,
) -> NewtonResult:
    """Newton iteration on ``func`` with residual-decrease backtracking.

    Converged when ``||func(x)|| <= tol``; the returned Jacobian is the one
    computed at the accepted point, for use in nondegeneracy and stability
    checks.  A positive ``min_singular_value`` rejects numerically
    rank-deficient Jacobians up front, before any convergence shortcut, so
    degenerate problems (where the residual is small everywhere) fail loudly
    instead of returning an arbitrary point.
    """
    x = np.array(x0, dtype=float)
    fx = np.asarray(func(x), dtype=float)
    nfx = float(np.linalg.norm(fx))
    for iteration in range(max_iterations):
        jac = forward_jacobian(func, x, fx, step_scale=step_scale)
        if min_singular_value > 0.0:
            smallest = float(np.linalg.svd(jac, compute_uv=False)[-1])
            if smallest < min_singular_value:
                raise SingularJacobianError(
                    f"Jacobian is numerically singular "
                    f"(smallest singular value {smallest:.3e})")
        if nfx <= tol:
            return NewtonResult(x, jac, iteration, nfx)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(str(exc)) from None
        scale = 1.0
        for _ in range(max_backtracks + 1):
            trial = x + scale * step
            ftrial = np.asarray(func(trial), dtype=float)
            ntrial = float(np.linalg.norm(ftrial))
            if ntrial < nfx:
                break
            scale *= 0.5
        else:
            raise MaxIterationsError(
                f"no residual decrease after {max_backtracks} backtracks "
                f"(residual {nfx:.3e})")
        x, fx, nfx = trial, ftrial, ntrial
    raise MaxIterationsError(
        f"no convergence in {max_iterations} iterations (residual {nfx:.3e})")
