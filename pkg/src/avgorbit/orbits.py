"""Periodic orbits of the forced pendulum by Newton shooting.

The period map (stroboscopic map) sends a state at time zero to the state
one common forcing period later; its fixed points are periodic orbits.
Shooting runs in the rescaled chart by default, where the fixed point stays
O(1) as the forcing shrinks instead of collapsing into the origin, which
keeps the Newton Jacobian well conditioned.

Stability comes from the Floquet multipliers, the eigenvalues of the period
map's Jacobian (monodromy matrix) at the fixed point; both strictly inside
the unit circle means the orbit attracts its neighborhood.  The convergence
sweep shrinks the forcing amplitude and records how fast the fixed point
approaches the averaged prediction.
"""

from __future__ import annotations

import cmath
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, TextIO

import numpy as np

from .newton import NewtonError, damped_newton, forward_jacobian
from .odes import Chart, Trajectory, integrate, rhs_for_chart
from .pendulum import PendulumParams, PerturbationProfile
from .serialize import format_float

__all__ = [
    "ConvergenceReport",
    "ConvergenceRow",
    "DEGENERACY_TOL",
    "MAP_FD_SCALE",
    "PeriodicOrbit",
    "SHOOTING_TOL",
    "SweepError",
    "convergence_study",
    "find_periodic",
    "monodromy_matrix",
    "stroboscopic_map",
]

# finite-difference step scale for the period-map Jacobian: the map is
# smooth, and this balances integrator noise (~1e-10) against truncation
MAP_FD_SCALE = 1e-6
SHOOTING_TOL = 1e-10
# smallest singular value of (period-map Jacobian - identity) below which
# shooting is refused: at zero forcing every state is a fixed point
DEGENERACY_TOL = 1e-8


class SweepError(RuntimeError):
    """Too few amplitudes of a sweep produced a converged orbit."""


def stroboscopic_map(
    state: np.ndarray,
    params: PendulumParams,
    profile: PerturbationProfile,
    chart: Chart = Chart.RESCALED,
    *,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
) -> np.ndarray:
    """State reached from ``state`` after one common forcing period."""
    rhs = rhs_for_chart(chart, params, profile.f, profile.g)
    return integrate(rhs, state, 0.0, profile.T, rel_tol, abs_tol).final_state


def monodromy_matrix(
    state: np.ndarray,
    params: PendulumParams,
    profile: PerturbationProfile,
    chart: Chart = Chart.RESCALED,
    *,
    fd_scale: float = MAP_FD_SCALE,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
) -> np.ndarray:
    """Forward-difference Jacobian of the period map at ``state``."""

    def period_map(s: np.ndarray) -> np.ndarray:
        return stroboscopic_map(
            s, params, profile, chart, rel_tol=rel_tol, abs_tol=abs_tol)

    return forward_jacobian(period_map, np.asarray(state, dtype=float),
                            step_scale=fd_scale)


def _eigenvalues_2x2(m: np.ndarray) -> tuple[complex, complex]:
    # quadratic formula on the characteristic polynomial; dimension is fixed
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    root = cmath.sqrt(complex(tr * tr - 4.0 * det, 0.0))
    return ((tr + root) / 2.0, (tr - root) / 2.0)


@dataclass
class PeriodicOrbit:
    """A fixed point of the period map together with its stability data."""

    epsilon: float
    chart: Chart
    x0: np.ndarray
    T: float
    residual: float
    floquet: tuple[complex, complex]
    monodromy: np.ndarray
    orbit: Trajectory
    iterations: int

    @property
    def stable(self) -> bool:
        return all(abs(m) < 1.0 for m in self.floquet)

    @property
    def original_x0(self) -> np.ndarray:
        """Initial state in the original chart (theta scales with epsilon)."""
        if self.chart is Chart.ORIGINAL:
            return self.x0.copy()
        # standard and rescaled charts agree at t = 0
        return self.epsilon * self.x0

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "chart": self.chart.value,
            "T": self.T,
            "x0": [float(x) for x in self.x0],
            "x0_original": [float(x) for x in self.original_x0],
            "residual": self.residual,
            "floquet": [[m.real, m.imag] for m in self.floquet],
            "floquet_moduli": [abs(m) for m in self.floquet],
            "stable": self.stable,
            "monodromy": [float(x) for x in self.monodromy.ravel()],
            "iterations": self.iterations,
        }


def find_periodic(
    params: PendulumParams,
    profile: PerturbationProfile,
    seed: np.ndarray,
    chart: Chart = Chart.RESCALED,
    *,
    tol: float = SHOOTING_TOL,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
    fd_scale: float = MAP_FD_SCALE,
    max_iterations: int = 50,
) -> PeriodicOrbit:
    """Newton shooting for a fixed point of the period map.

    ``seed`` is typically the averaged prediction (in the rescaled chart).
    Raises SingularJacobianError when the period map is degenerate, e.g. at
    zero forcing where every state returns to itself, and MaxIterationsError
    when shooting stalls.
    """
    rhs = rhs_for_chart(chart, params, profile.f, profile.g)
    T = profile.T

    def period_map(s: np.ndarray) -> np.ndarray:
        return integrate(rhs, s, 0.0, T, rel_tol, abs_tol).final_state

    def displacement(s: np.ndarray) -> np.ndarray:
        return period_map(s) - s

    result = damped_newton(
        displacement,
        seed,
        tol=tol,
        max_iterations=max_iterations,
        step_scale=fd_scale,
        min_singular_value=DEGENERACY_TOL,
    )
    monodromy = result.jacobian + np.eye(2)
    orbit = integrate(rhs, result.x, 0.0, T, rel_tol, abs_tol)
    return PeriodicOrbit(
        epsilon=params.epsilon,
        chart=chart,
        x0=result.x,
        T=T,
        residual=result.residual_norm,
        floquet=_eigenvalues_2x2(monodromy),
        monodromy=monodromy,
        orbit=orbit,
        iterations=result.iterations,
    )


@dataclass
class ConvergenceRow:
    epsilon: float
    x0: Optional[np.ndarray]
    distance: float
    residual: float
    converged: bool
    iterations: int


@dataclass
class ConvergenceReport:
    """Fixed points over a decreasing-amplitude sweep, with distances to the
    averaged prediction and the fitted log-log decay slope."""

    reference: np.ndarray
    rows: list[ConvergenceRow]
    fitted_slope: float

    @property
    def successful_rows(self) -> list[ConvergenceRow]:
        return [row for row in self.rows if row.converged]

    @property
    def monotone(self) -> bool:
        """Distances of the converged rows strictly decrease."""
        distances = [row.distance for row in self.successful_rows]
        return all(b < a for a, b in zip(distances, distances[1:]))

    def write_csv(self, stream: TextIO) -> None:
        stream.write("epsilon,x0_1,x0_2,dist,residual,converged\n")
        for row in self.rows:
            if row.converged:
                fields = (
                    format_float(row.epsilon),
                    format_float(row.x0[0]),
                    format_float(row.x0[1]),
                    format_float(row.distance),
                    format_float(row.residual),
                    "true",
                )
            else:
                fields = (format_float(row.epsilon), "nan", "nan", "nan", "nan", "false")
            stream.write(",".join(fields) + "\n")

    def summary_dict(self) -> dict:
        rows = []
        for row in self.rows:
            original = None if row.x0 is None else row.epsilon * row.x0
            rows.append({
                "epsilon": row.epsilon,
                "converged": row.converged,
                "x0": None if row.x0 is None else [float(x) for x in row.x0],
                "x0_original": None if original is None else [float(x) for x in original],
                "distance": row.distance if row.converged else None,
                "distance_original": row.epsilon * row.distance if row.converged else None,
                "original_norm": None if original is None else float(np.linalg.norm(original)),
                "residual": row.residual if row.converged else None,
                "iterations": row.iterations,
            })
        return {
            "reference": [float(x) for x in self.reference],
            "fitted_slope": self.fitted_slope,
            "monotone": self.monotone,
            "rows": rows,
        }


def convergence_study(
    params: PendulumParams,
    profile: PerturbationProfile,
    epsilons: Sequence[float],
    reference: np.ndarray,
    *,
    warm_start: bool = True,
    jobs: int = 1,
    tol: float = SHOOTING_TOL,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-10,
) -> ConvergenceReport:
    """Shoot for the periodic orbit at each amplitude of a decreasing sweep.

    Each row records the fixed point found in the rescaled chart and its
    distance to ``reference`` (the averaged prediction).  With
    ``warm_start`` the previous amplitude's fixed point seeds the next run
    (continuation), so rows run sequentially; parallel rows (``jobs > 1``)
    require ``warm_start=False`` and reseed every row from ``reference``.

    The decay slope is a least-squares fit of log distance against log
    amplitude over the converged rows; at least three are required.
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 3:
        raise ValueError(f"need at least 3 amplitudes, got {len(eps)}")
    if any(not e > 0.0 for e in eps):
        raise ValueError("amplitudes must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("amplitudes must be strictly decreasing")
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    if jobs > 1 and warm_start:
        raise ValueError("parallel rows require warm_start=False")
    z0 = np.asarray(reference, dtype=float)

    def solve(amplitude: float, seed: np.ndarray) -> PeriodicOrbit:
        p = replace(params, epsilon=amplitude)
        return find_periodic(p, profile, seed, Chart.RESCALED,
                             tol=tol, rel_tol=rel_tol, abs_tol=abs_tol)

    def row_from(amplitude: float, orbit: PeriodicOrbit) -> ConvergenceRow:
        return ConvergenceRow(
            epsilon=amplitude,
            x0=orbit.x0,
            distance=float(np.linalg.norm(orbit.x0 - z0)),
            residual=orbit.residual,
            converged=True,
            iterations=orbit.iterations,
        )

    failed = ConvergenceRow(0.0, None, float("nan"), float("nan"), False, 0)
    rows: list[ConvergenceRow] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(solve, e, z0) for e in eps]
        for e, future in zip(eps, futures):
            try:
                rows.append(row_from(e, future.result()))
            except NewtonError:
                rows.append(replace(failed, epsilon=e))
    else:
        seed = z0
        for e in eps:
            try:
                orbit = solve(e, seed)
            except NewtonError:
                rows.append(replace(failed, epsilon=e))
                continue
            rows.append(row_from(e, orbit))
            if warm_start:
                seed = orbit.x0

    good = [row for row in rows if row.converged]
    if len(good) < 3:
        raise SweepError(
            f"only {len(good)} of {len(eps)} amplitudes converged, need at least 3")
    log_eps = np.log([row.epsilon for row in good])
    log_dist = np.log([max(row.distance, 1e-300) for row in good])
    slope = float(np.polyfit(log_eps, log_dist, 1)[0])
    return ConvergenceReport(reference=z0, rows=rows, fitted_slope=slope)
