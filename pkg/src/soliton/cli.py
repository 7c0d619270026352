"""
Command-line entry point.

Every command resolves its flags into a RunConfig, optionally overridden by a JSON file
given with --config, and writes that config as config.json next to its artifacts. Exit status
is 0 on success, 1 when a check fails or a command raises, 2 on a malformed configuration
and 3 on I/O failure.
"""

import argparse
import json
import logging
import math
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pydantic

from constant import BISECTION_TOL, DELTA, HORIZON, STOP_XI, TOL

from . import asymptotic_atlas, compact_shooter, kahler_closed_form, reference_solutions
from .asymptotic_atlas import ScanRegion
from .compact_shooter import ClosingSpec
from .env import app
from .exceptions import ConfigError, SolitonError
from .flow_engine import StopConditions, integrate
from .phase_core import SolitonParams
from .runner import RunResult, write_csv, write_json
from .schema import BaseModel, ClosingKind, KahlerBoundaryKind, System
from .series_boundary import init_beta0, init_so4, init_state

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 1e-9
DEFAULT_RESOLUTION = 21

# commands whose germs default to shrinkers
SHRINKING = {"shoot", "kahler"}


class RunConfig(BaseModel):
    """
    The resolved configuration of one CLI run.
    """

    command: str
    action: Optional[str] = None
    """
    Subcommand of shoot and kahler.
    """
    lam: Optional[float] = None
    """
    lambda; -1 for expanding commands and +1 for shooting when unset.
    """
    delta: float = DELTA
    stop_xi: float = STOP_XI
    tol: float = TOL
    horizon: float = HORIZON
    resolution: int = pydantic.Field(default=DEFAULT_RESOLUTION, ge=2)
    out: Path = Path("out")
    threads: Optional[pydantic.PositiveInt] = None
    germ: Optional[SolitonParams] = None
    end: Optional[ClosingSpec] = None
    region: Optional[ScanRegion] = None
    options: dict[str, Any] = {}
    """
    Command specific settings, such as a solution name or a q range.
    """
    deterministic: bool = True
    """
    Rows are assembled in input order; kept for the record, runs are always deterministic.
    """

    @property
    def lam_value(self) -> float:
        if self.lam is not None:
            return self.lam
        return 1.0 if self.command in SHRINKING else -1.0

    def option(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


def _germ(args: argparse.Namespace, lam: float) -> Optional[dict]:
    if getattr(args, "fixed", None):
        return SolitonParams.fixed(*args.fixed, lam=lam).to_primitive()
    if getattr(args, "bolt", None):
        if len(args.bolt) not in (3, 4):
            raise ConfigError("--bolt takes N ALPHA BETA and an optional GAMMA")
        n, *rest = args.bolt
        if not float(n).is_integer():
            raise ConfigError(f"bolt slope must be an integer, got {n}")
        return SolitonParams.bolt(int(n), *rest, lam=lam).to_primitive()
    return None


def _axis(spec: Sequence[str], resolution: int) -> dict:
    name, lo, hi = spec
    return {"name": name, "lo": float(lo), "hi": float(hi), "resolution": resolution}


def _fixed_values(items: Optional[Sequence[str]]) -> dict[str, float]:
    values = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected NAME=VALUE, got {item!r}")
        values[name] = float(value)
    return values


def _region(args: argparse.Namespace, lam: float, resolution: int) -> Optional[dict]:
    if not getattr(args, "axis", None):
        return None
    return {
        "boundary": args.boundary,
        "n": args.n if args.boundary == "bolt" else None,
        "lam": lam,
        "axes": [_axis(spec, resolution) for spec in args.axis],
        "reduce": [_axis(spec, resolution) for spec in getattr(args, "reduce", None) or []],
        "fixed": _fixed_values(args.fix),
    }


def _end(args: argparse.Namespace) -> Optional[dict]:
    if getattr(args, "end", None) is None:
        return None
    if args.end == "fixed":
        return ClosingSpec.fixed_end().to_primitive()
    return {"kind": args.end, "n": args.end_n, "permute": args.permute}


_OPTION_KEYS = (
    "system",
    "name",
    "t_lo",
    "t_hi",
    "n",
    "alpha_lo",
    "alpha_hi",
    "beta_bracket",
    "xtol",
    "gamma",
    "radius",
    "start",
    "q",
    "q1",
    "q2",
    "C",
    "q_lo",
    "q_hi",
)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Build the RunConfig from parsed flags; keys of the --config JSON file replace them.

    Raises:
        ConfigError: if the JSON file is unreadable or the result does not validate.
    """
    lam = args.lam if args.lam is not None else (1.0 if args.command in SHRINKING else -1.0)
    try:
        raw: dict[str, Any] = {
            "command": args.command,
            "action": getattr(args, "action", None),
            "lam": args.lam,
            "delta": args.delta,
            "stop_xi": args.stop_xi,
            "tol": args.tol,
            "horizon": args.horizon,
            "resolution": args.resolution,
            "out": args.out,
            "threads": args.threads,
            "germ": _germ(args, lam),
            "end": _end(args),
            "region": _region(args, lam, args.resolution),
            "options": {
                key: getattr(args, key)
                for key in _OPTION_KEYS
                if getattr(args, key, None) is not None
            },
        }
    except (SolitonError, pydantic.ValidationError) as e:
        raise ConfigError(f"invalid flags: {e}") from e

    if args.config is not None:
        try:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(overrides, dict):
            raise ConfigError("the config file must hold a JSON object")
        options = dict(raw["options"], **overrides.pop("options", {}))
        raw.update(overrides, options=options)
    try:
        return RunConfig.model_validate(raw)
    except pydantic.ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def _need(value: Any, what: str) -> Any:
    if value is None:
        raise ConfigError(f"this command needs {what}")
    return value


def _grid(lo: float, hi: float, resolution: int) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, resolution)]


def run_integrate(config: RunConfig) -> RunResult:
    system = System(config.option("system", System.su2.value))
    germ = _need(config.germ, "a germ (--fixed or --bolt)")
    if system is System.beta0:
        start = init_beta0(germ.alpha, germ.lam, config.delta)
    elif system is System.so4:
        start = init_so4(germ.alpha, germ.lam, config.delta)
    else:
        start = init_state(germ, config.delta)
    stops = StopConditions(t_max=config.horizon, xi_floor=config.stop_xi)
    traj = integrate(start, germ.lam, system, stops, config.tol, params=germ)
    path = write_csv(
        config.out / "trajectory.csv",
        ["t", "xi", "L1", "L2", "L3", "R1", "R2", "R3"],
        ([t, *y] for t, y in zip(traj.t, traj.y)),
    )
    return RunResult(
        command=["integrate"],
        outputs=[str(path)],
        summary={"event": traj.event.value, "t": float(traj.t[-1]), "steps": traj.steps},
    )


def run_classify(config: RunConfig) -> RunResult:
    germ = _need(config.germ, "a germ (--fixed or --bolt)")
    result = asymptotic_atlas.classify(
        germ, horizon=config.horizon, delta=config.delta, tol=config.tol
    )
    path = write_json(config.out / "classification.json", result.to_primitive())
    return RunResult(command=["classify"], outputs=[str(path)], summary=result.to_primitive())


def run_scan(config: RunConfig) -> RunResult:
    region = _need(config.region, "a region (--axis)")
    grid = asymptotic_atlas.scan(
        region,
        horizon=config.horizon,
        delta=config.delta,
        tol=config.tol,
        threads=config.threads,
    )
    path = asymptotic_atlas.write_atlas_csv(grid, config.out / "atlas.csv")
    counts: dict[str, int] = {}
    for cell in grid.cells:
        counts[cell.result.kind.value] = counts.get(cell.result.kind.value, 0) + 1
    return RunResult(
        command=["scan"], outputs=[str(path)], summary=counts, failed_cells=grid.failed
    )


def run_trace(config: RunConfig) -> RunResult:
    n = _need(config.option("n"), "the slope --n")
    alphas = _grid(
        config.option("alpha_lo", 0.0), config.option("alpha_hi", 1.0), config.resolution
    )
    points = asymptotic_atlas.einstein_sweep(
        n,
        alphas,
        beta_bracket=tuple(config.option("beta_bracket", (0.05, 3.0))),
        gamma=config.option("gamma", 0.0),
        lam=config.lam_value,
        xtol=config.option("xtol", BISECTION_TOL),
        horizon=config.horizon,
    )
    path = write_csv(
        config.out / "trace.csv",
        ["alpha", "beta_max", "flagged", "einstein_defect", "einstein_gap"],
        ([p.alpha, p.beta_max, p.flagged, p.einstein_defect, p.einstein_gap] for p in points),
    )
    traced = [p for p in points if not p.flagged]
    summary: dict[str, Any] = {"points": len(points), "flagged": len(points) - len(traced)}
    if traced:
        summary["einstein_defect"] = traced[-1].einstein_defect
        summary["einstein_gap"] = traced[-1].einstein_gap
    return RunResult(command=["trace"], outputs=[str(path)], summary=summary)


def run_shoot(config: RunConfig) -> RunResult:
    end = _need(config.end, "a closing orbit (--end)")
    settings = {"delta": config.delta, "C": config.stop_xi, "tol": config.tol}
    if config.action == "sol":
        report = compact_shooter.sol_report(
            _need(config.germ, "a germ"), end, t_max=config.horizon, **settings
        )
        path = write_json(config.out / "shooting.json", report.to_primitive())
        summary = {"sol": report.sol, "T": report.T}
        return RunResult(command=["shoot", "sol"], outputs=[str(path)], summary=summary)
    if config.action == "heatmap":
        grid = compact_shooter.sol_heatmap(
            _need(config.region, "a region (--axis)"),
            end,
            t_max=config.horizon,
            threads=config.threads,
            **settings,
        )
        path = compact_shooter.write_heatmap_csv(grid, config.out / "heatmap.csv")
        best = grid.best()
        return RunResult(
            command=["shoot", "heatmap"],
            outputs=[str(path)],
            summary={"best": list(best.coords), "sol": best.sol},
            failed_cells=grid.failed,
        )
    candidate = compact_shooter.refine_candidate(
        _need(config.germ, "a seed germ"), end, radius=config.option("radius", 0.05), **settings
    )
    path = compact_shooter.write_candidate_json(candidate, config.out / "candidate.json")
    summary = {"sol": candidate.sol, "seed_sol": candidate.seed_sol}
    return RunResult(command=["shoot", "refine"], outputs=[str(path)], summary=summary)


def _kahler_boundary(config: RunConfig) -> kahler_closed_form.KahlerBoundary:
    kind = KahlerBoundaryKind(config.option("start", KahlerBoundaryKind.vanishing.value))
    if kind is KahlerBoundaryKind.vanishing:
        return kahler_closed_form.KahlerBoundary.vanishing()
    n = _need(config.option("n"), "the slope --n")
    q = config.option("q", 1.0)
    if kind is KahlerBoundaryKind.bolt_inc:
        return kahler_closed_form.KahlerBoundary.bolt_inc(n, q)
    return kahler_closed_form.KahlerBoundary.bolt_dec(n, q)


def run_kahler(config: RunConfig) -> RunResult:
    if config.action == "profile":
        C = _need(config.option("C"), "the constant --C")
        profile = kahler_closed_form.build_profile(_kahler_boundary(config), C)
        path = kahler_closed_form.write_profile_json(profile, config.out / "profile.json")
        summary = {"T": profile.T, "case": profile.case, "complete": profile.complete}
        return RunResult(command=["kahler", "profile"], outputs=[str(path)], summary=summary)
    n = _need(config.option("n"), "the slope --n")
    if config.action == "count":
        q1 = config.option("q1", 1.0)
        q2 = config.option("q2", 1.0)
        count = kahler_closed_form.count_solitons(n, q1, q2)
        return RunResult(
            command=["kahler", "count"], summary={"n": n, "q1": q1, "q2": q2, "count": count}
        )
    qs = _grid(config.option("q_lo", 1.01), config.option("q_hi", 1.5), config.resolution)
    rows = kahler_closed_form.limsol_sweep(
        n, qs, delta=config.delta, C_stop=config.stop_xi, threads=config.threads
    )
    path = kahler_closed_form.write_limsol_csv(rows, config.out / "limsol.csv")
    failed = sum(1 for *_, value in rows if math.isinf(value))
    return RunResult(
        command=["kahler", "limsol-sweep"],
        outputs=[str(path)],
        summary={"rows": len(rows)},
        failed_cells=failed,
    )


def run_oracle_check(config: RunConfig) -> RunResult:
    report = reference_solutions.oracle_check()
    path = write_csv(config.out / "oracle.csv", ["name", "max_residual"], report.items())
    worst = max(report.values())
    return RunResult(
        command=["oracle-check"],
        outputs=[str(path)],
        summary={"max_residual": worst},
        exit_code=0 if worst < ORACLE_LIMIT else 1,
    )


def run_dump(config: RunConfig) -> RunResult:
    name = _need(config.option("name"), "a solution --name")
    solution = reference_solutions.lookup(name)
    lo, hi = solution.domain
    hi = min(hi, 5.0)
    pad = 0.01 * (hi - lo)
    ts = _grid(config.option("t_lo", lo + pad), config.option("t_hi", hi - pad), config.resolution)
    header = ["t", "f1", "f2", "f3", "u_prime", "xi", "L1", "L2", "L3", "R1", "R2", "R3"]
    path = write_csv(config.out / f"{name}.csv", header, reference_solutions.dump(name, ts))
    return RunResult(command=["dump", name], outputs=[str(path)], summary={"rows": len(ts)})


COMMANDS: dict[str, Callable[[RunConfig], RunResult]] = {
    "integrate": run_integrate,
    "classify": run_classify,
    "scan": run_scan,
    "trace": run_trace,
    "shoot": run_shoot,
    "kahler": run_kahler,
    "oracle-check": run_oracle_check,
    "dump": run_dump,
}


def run(config: RunConfig) -> RunResult:
    """
    Run one command and write config.json beside its artifacts.

    Raises:
        ConfigError: if the configuration lacks what the command needs.
        OSError: if an artifact cannot be written.
    """
    write_json(config.out / "config.json", config.to_primitive())
    result = COMMANDS[config.command](config)
    logger.info("%s wrote %s", " ".join(result.command), ", ".join(result.outputs))
    return result


def _add_germ(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--fixed", nargs=3, type=float, metavar=("A1", "A2", "A3"))
    group.add_argument("--bolt", nargs="+", type=float, metavar="N ALPHA BETA [GAMMA]")


def _add_region(parser: argparse.ArgumentParser, reduce: bool = False) -> None:
    parser.add_argument("--boundary", choices=["fixed", "bolt"], default="bolt")
    parser.add_argument("--n", type=int)
    parser.add_argument("--axis", nargs=3, action="append", metavar=("NAME", "LO", "HI"))
    parser.add_argument("--fix", nargs="+", metavar="NAME=VALUE")
    if reduce:
        parser.add_argument("--reduce", nargs=3, action="append", metavar=("NAME", "LO", "HI"))


def _add_end(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--end", choices=[k.value for k in ClosingKind], default="fixed")
    parser.add_argument("--end-n", type=int, default=None)
    parser.add_argument("--permute", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=None)
    common.add_argument("--delta", type=float, default=DELTA)
    common.add_argument("--stop-xi", type=float, default=STOP_XI)
    common.add_argument("--tol", type=float, default=TOL)
    common.add_argument("--horizon", type=float, default=HORIZON)
    common.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--config", type=Path, default=None, help="JSON file overriding flags")

    parser = argparse.ArgumentParser(
        prog="soliton", description="Numerical lab for cohomogeneity one Ricci solitons"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", parents=[common])
    _add_germ(p)
    p.add_argument("--system", choices=[s.value for s in System if s is not System.slow])

    p = sub.add_parser("classify", parents=[common])
    _add_germ(p)

    p = sub.add_parser("scan", parents=[common])
    _add_region(p)

    p = sub.add_parser("trace", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha-lo", type=float)
    p.add_argument("--alpha-hi", type=float)
    p.add_argument("--beta-bracket", nargs=2, type=float)
    p.add_argument("--xtol", type=float)
    p.add_argument("--gamma", type=float)

    shoot = sub.add_parser("shoot").add_subparsers(dest="action", required=True)
    p = shoot.add_parser("sol", parents=[common])
    _add_germ(p)
    _add_end(p)
    p = shoot.add_parser("heatmap", parents=[common])
    _add_region(p, reduce=True)
    _add_end(p)
    p = shoot.add_parser("refine", parents=[common])
    _add_germ(p)
    _add_end(p)
    p.add_argument("--radius", type=float)

    kahler = sub.add_parser("kahler").add_subparsers(dest="action", required=True)
    p = kahler.add_parser("profile", parents=[common])
    p.add_argument("--start", choices=[k.value for k in KahlerBoundaryKind])
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--C", type=float)
    p = kahler.add_parser("count", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q1", type=float)
    p.add_argument("--q2", type=float)
    p = kahler.add_parser("limsol-sweep", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q-lo", type=float)
    p.add_argument("--q-hi", type=float)

    sub.add_parser("oracle-check", parents=[common])

    p = sub.add_parser("dump", parents=[common])
    p.add_argument("--name", required=True, choices=reference_solutions.names())
    p.add_argument("--t-lo", type=float)
    p.add_argument("--t-hi", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=app.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        result = run(config)
    except (ConfigError, pydantic.ValidationError) as e:
        logger.error("invalid configuration: %s", e)
        return 2
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return 3
    except SolitonError as e:
        logger.error("%s failed: %s", args.command, e)
        return 1
    print(json.dumps(result.to_primitive(), sort_keys=True, allow_nan=False))
    return result.exit_code


__all__ = ["RunConfig", "build_parser", "main", "resolve_config", "run"]
