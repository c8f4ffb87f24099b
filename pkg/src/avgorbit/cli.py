"""Command-line front end.

Reads a JSON problem configuration and runs one of four pipelines:
``analyze`` (averaged system and existence conditions), ``simulate``
(trajectory CSV), ``find-orbit`` (Newton shooting seeded by the averaged
prediction), or ``sweep`` (convergence study over shrinking amplitudes).

Exit codes: 0 success and existence conditions hold, 1 usage/config or
numerical-infrastructure error, 2 analysis ran but existence is not
established, 3 verification failed (shooting or sweep).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .averaging import build_averaged_system, existence_check
from .expressions import Expr, ExpressionError, free_variables, parse
from .newton import MaxIterationsError, SingularJacobianError
from .odes import Chart, IntegrationError, integrate, rhs_for_chart
from .orbits import SweepError, convergence_study, find_periodic
from .pendulum import (
    CoefficientEvaluationError,
    InconsistentPeriodsError,
    PendulumParams,
    PerturbationProfile,
    RationalPeriod,
    build_profile,
)
from .quadrature import QuadratureError
from .serialize import dumps

__all__ = ["ConfigError", "ProblemConfig", "load_config", "main", "entry"]

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_POSITIVE_INT = {"type": "integer", "minimum": 1}
_DSL = {"type": "string"}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["a", "b_bar", "epsilon", "f", "g", "p_f", "q_f", "p_g", "q_g"],
    "properties": {
        "a": _POSITIVE,
        "b_bar": _NUMBER,
        "epsilon": {"type": "number", "minimum": 0},
        "f": _DSL,
        "g": _DSL,
        "p_f": _POSITIVE_INT,
        "q_f": _POSITIVE_INT,
        "p_g": _POSITIVE_INT,
        "q_g": _POSITIVE_INT,
        "f1": _DSL,
        "f2": _DSL,
        "g0": _DSL,
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "quadrature": _POSITIVE,
                "integrator": _POSITIVE,
                "newton": _POSITIVE,
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["epsilons"],
            "properties": {
                "epsilons": {"type": "array", "items": _POSITIVE, "minItems": 3},
            },
        },
    },
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemConfig:
    params: PendulumParams
    f: Expr
    g: Expr
    period_f: RationalPeriod
    period_g: RationalPeriod
    f1: Optional[Expr]
    f2: Optional[Expr]
    g0: Optional[Expr]
    quad_tol: float
    ode_tol: float
    newton_tol: float
    sweep_epsilons: Optional[tuple[float, ...]]

    def profile(self) -> PerturbationProfile:
        return build_profile(
            self.f, self.g, self.period_f, self.period_g,
            f1=self.f1, f2=self.f2, g0=self.g0)


def load_config(path: str) -> ProblemConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(part) for part in exc.absolute_path) or "top level"
        raise ConfigError(f"{path}: {exc.message} (at {where})") from None

    def parse_field(name: str, time_only: bool = False) -> Optional[Expr]:
        if name not in raw:
            return None
        try:
            expr = parse(raw[name])
        except ExpressionError as exc:
            raise ConfigError(f"{path}: field {name!r}: {exc}") from None
        if time_only:
            extra = free_variables(expr) - {"t"}
            if extra:
                raise ConfigError(
                    f"{path}: field {name!r} is a coefficient function of t "
                    f"and may not use {sorted(extra)}")
        return expr

    f = parse_field("f")
    g = parse_field("g")
    overrides = {name: parse_field(name, time_only=True) for name in ("f1", "f2", "g0")}
    try:
        params = PendulumParams(raw["a"], raw["b_bar"], raw["epsilon"])
        period_f = RationalPeriod.for_frequency(raw["p_f"], raw["q_f"], raw["a"])
        period_g = RationalPeriod.for_frequency(raw["p_g"], raw["q_g"], raw["a"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    tolerances = raw.get("tolerances", {})
    sweep = raw.get("sweep")
    return ProblemConfig(
        params=params,
        f=f,
        g=g,
        period_f=period_f,
        period_g=period_g,
        f1=overrides["f1"],
        f2=overrides["f2"],
        g0=overrides["g0"],
        quad_tol=tolerances.get("quadrature", 1e-10),
        ode_tol=tolerances.get("integrator", 1e-10),
        newton_tol=tolerances.get("newton", 1e-10),
        sweep_epsilons=tuple(sweep["epsilons"]) if sweep else None,
    )


def _write_text(out: Optional[str], text: str) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _out_base(out: str) -> Path:
    path = Path(out)
    if path.suffix in (".json", ".csv"):
        return path.with_suffix("")
    return path


def _analysis(cfg: ProblemConfig):
    profile = cfg.profile()
    system = build_averaged_system(cfg.params, profile, abs_tol=cfg.quad_tol)
    verdict = existence_check(system, profile)
    return profile, system, verdict


def _established(verdict) -> bool:
    return verdict.conditions_hold and verdict.hypothesis_ok


def cmd_analyze(cfg: ProblemConfig, args) -> int:
    _, system, verdict = _analysis(cfg)
    doc = {
        "M": system.to_json_dict()["M"],
        "v": system.to_json_dict()["v"],
        "T": system.period,
        "detM": system.det,
        "v_norm": verdict.forcing_norm,
        "z0": verdict.to_json_dict()["z0"],
        "conditions_hold": verdict.conditions_hold,
        "hypothesis_ok": verdict.hypothesis_ok,
        "diagnostics": list(verdict.diagnostics),
    }
    _write_text(args.out, dumps(doc) + "\n")
    return 0 if _established(verdict) else 2


def _parse_state(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"state must be 'x,y', got {text!r}")
    try:
        return np.array([float(parts[0]), float(parts[1])])
    except ValueError as exc:
        raise ConfigError(f"state must be 'x,y' with numeric parts: {exc}") from None


def cmd_simulate(cfg: ProblemConfig, args) -> int:
    profile = cfg.profile()
    chart = Chart(args.chart)
    t1 = args.t1 if args.t1 is not None else profile.T
    if not t1 > 0.0:
        raise ConfigError(f"--t1 must be positive, got {t1!r}")
    s0 = _parse_state(args.s0)
    rhs = rhs_for_chart(chart, cfg.params, profile.f, profile.g)
    trajectory = integrate(rhs, s0, 0.0, t1, cfg.ode_tol, cfg.ode_tol)
    if args.out:
        with open(args.out, "w") as stream:
            trajectory.write_csv(stream)
    else:
        trajectory.write_csv(sys.stdout)
    return 0


def cmd_find_orbit(cfg: ProblemConfig, args) -> int:
    profile, system, verdict = _analysis(cfg)
    if not _established(verdict):
        print("existence conditions not established:", file=sys.stderr)
        for note in verdict.diagnostics:
            print(f"  {note}", file=sys.stderr)
        if not verdict.diagnostics:
            print("  (no diagnostics)", file=sys.stderr)
        return 2
    try:
        orbit = find_periodic(
            cfg.params, profile, verdict.zero, Chart.RESCALED,
            tol=cfg.newton_tol, rel_tol=cfg.ode_tol, abs_tol=cfg.ode_tol)
    except SingularJacobianError as exc:
        print(
            "shooting failed: the period map is degenerate (singular Jacobian). "
            "At epsilon = 0 every state is periodic and there is no isolated "
            f"orbit to converge to. Details: {exc}",
            file=sys.stderr)
        return 3
    except MaxIterationsError as exc:
        print(f"shooting did not converge: {exc}", file=sys.stderr)
        return 3
    doc = orbit.to_json_dict()
    if args.out:
        base = _out_base(args.out)
        base.with_suffix(".json").write_text(dumps(doc) + "\n")
        with open(base.with_suffix(".csv"), "w") as stream:
            orbit.orbit.write_csv(stream)
    else:
        sys.stdout.write(dumps(doc) + "\n")
    return 0


def cmd_sweep(cfg: ProblemConfig, args) -> int:
    if cfg.sweep_epsilons is None:
        print("config has no sweep block", file=sys.stderr)
        return 1
    profile, system, verdict = _analysis(cfg)
    if not _established(verdict):
        print("existence conditions not established, nothing to sweep",
              file=sys.stderr)
        return 2
    try:
        report = convergence_study(
            cfg.params, profile, cfg.sweep_epsilons, verdict.zero,
            warm_start=not args.no_warm_start, jobs=args.jobs,
            tol=cfg.newton_tol, rel_tol=cfg.ode_tol, abs_tol=cfg.ode_tol)
    except ValueError as exc:
        print(f"invalid sweep: {exc}", file=sys.stderr)
        return 1
    except SweepError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return 3
    passed = report.monotone and report.fitted_slope >= 0.8
    summary = dict(report.summary_dict(), passed=passed)
    if args.out:
        base = _out_base(args.out)
        base.with_suffix(".json").write_text(dumps(summary) + "\n")
        with open(base.with_suffix(".csv"), "w") as stream:
            report.write_csv(stream)
    else:
        sys.stdout.write(dumps(summary) + "\n")
    if not passed:
        print(
            f"sweep did not confirm convergence: monotone={report.monotone}, "
            f"fitted_slope={report.fitted_slope:.3f} (need >= 0.8)",
            file=sys.stderr)
        return 3
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avg-orbit",
        description="Small periodic orbits of the forced damped pendulum: "
                    "averaging analysis and shooting verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON problem configuration")
        p.add_argument("--out", help="output path (base path for commands "
                                     "writing .json and .csv pairs)")
        return p

    add("analyze", "averaged system and existence conditions (JSON)")

    simulate = add("simulate", "integrate one trajectory (CSV)")
    simulate.add_argument("--t1", type=float, help="end time (default: one period)")
    simulate.add_argument("--s0", default="0,0", help="initial state 'x,y'")
    simulate.add_argument("--chart", default="original",
                          choices=[c.value for c in Chart])

    add("find-orbit", "Newton shooting for the periodic orbit (JSON + CSV)")

    sweep = add("sweep", "convergence study over the sweep amplitudes (CSV + JSON)")
    sweep.add_argument("--jobs", type=int, default=1,
                       help="parallel rows (requires --no-warm-start)")
    sweep.add_argument("--no-warm-start", action="store_true",
                       help="reseed every row from the averaged prediction")

    return parser


_HANDLERS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "find-orbit": cmd_find_orbit,
    "sweep": cmd_sweep,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the exit-code contract
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = load_config(args.config)
        return _HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ExpressionError, QuadratureError, IntegrationError,
            InconsistentPeriodsError, CoefficientEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
