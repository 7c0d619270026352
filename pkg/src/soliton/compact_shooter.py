"""
Shooting for compact shrinking solitons.

A germ at the initial orbit is integrated until xi reaches a large negative level C. Near the
far end of a compact soliton xi falls to -infinity, so the metric data at that time should
already satisfy the smoothness conditions of the closing orbit. The closing defect measures
how far they are from it; it is small at compact solitons and bounded away from zero
elsewhere.
"""

import functools
import itertools
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pydantic
from scipy import optimize

from constant import DELTA, HORIZON, STOP_XI, TOL

from .asymptotic_atlas import ScanRegion
from .env import app
from .exceptions import ParameterError, ReconstructionError, SolitonError
from .flow_engine import StopConditions, integrate, locate_crossing, sample
from .phase_core import (
    EXCEPTIONAL_N,
    FixedPoint,
    MetricSample,
    SolitonParams,
    metric_from_state,
    permute_state,
    reverse_state,
)
from .runner import parallel_map, write_csv, write_json
from .schema import ClosingKind, FrozenModel, System, TrajectoryEvent
from .series_boundary import extract_end_params, init_state

logger = logging.getLogger(__name__)

Permutation = tuple[int, int, int]

IDENTITY: Permutation = (0, 1, 2)
SWAP_13: Permutation = (2, 1, 0)

# finite stand-in for a non-closing germ inside the optimizer
PENALTY = 1e6


class ClosingSpec(FrozenModel):
    """
    Smoothness conditions expected at the far end.

    `bolt4` is the n = 4 bolt, whose conditions replace f2' = f3' = 0 by f2' + f3' = 0.
    Permutations are always tried for n in {1, 2}; otherwise `permute` adds the (f1, f3)
    swap to the identity.
    """

    kind: ClosingKind
    n: Optional[pydantic.PositiveInt] = None
    permute: bool = False

    @pydantic.model_validator(mode="before")
    @classmethod
    def closing_normalize(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = ClosingKind(data.get("kind"))
        n = data.get("n")
        if kind is ClosingKind.fixed:
            if n is not None:
                raise ValueError("fixed-point ends take no slope")
        elif kind is ClosingKind.bolt4:
            if n not in (None, 4):
                raise ValueError(f"bolt4 ends have slope 4, got {n}")
            data["n"] = 4
        else:
            if n is None:
                raise ValueError("bolt ends need the slope n")
            if n == 4:
                raise ValueError("the n = 4 bolt end is bolt4")
            if n in (1, 2):
                data["permute"] = True
        return data

    @classmethod
    def fixed_end(cls) -> "ClosingSpec":
        return cls(kind=ClosingKind.fixed)

    @classmethod
    def bolt_end(cls, n: int, permute: bool = False) -> "ClosingSpec":
        kind = ClosingKind.bolt4 if n == 4 else ClosingKind.bolt
        return cls(kind=kind, n=n, permute=permute)

    def permutations(self) -> list[Permutation]:
        if not self.permute or self.kind is ClosingKind.fixed:
            return [IDENTITY]
        if self.n in (1, 2):
            return list(itertools.permutations(range(3)))
        return [IDENTITY, SWAP_13]


class SmoothnessRow(FrozenModel):
    start: str
    end: ClosingSpec


SMOOTHNESS_TABLE: dict[str, SmoothnessRow] = {
    "s4_so3": SmoothnessRow(start="bolt n=4", end=ClosingSpec.bolt_end(4, permute=True)),
    "cp2_so3": SmoothnessRow(start="bolt n=4", end=ClosingSpec.bolt_end(2)),
    "s4_fixed": SmoothnessRow(start="fixed", end=ClosingSpec.fixed_end()),
    "cp2_fixed": SmoothnessRow(start="fixed", end=ClosingSpec.bolt_end(1)),
}


def bolt_to_bolt(n: int) -> SmoothnessRow:
    """The M_n row: the same bolt at both ends."""
    return SmoothnessRow(start=f"bolt n={n}", end=ClosingSpec.bolt_end(n, permute=True))


def _functional(f: np.ndarray, fp: np.ndarray, up: float, end: ClosingSpec) -> float:
    value = up * up
    if end.kind is ClosingKind.fixed:
        return float(value + np.sum(f * f + (fp + 1.0) ** 2))
    value += f[0] ** 2 + (fp[0] + end.n) ** 2 + (f[1] - f[2]) ** 2
    if end.kind is ClosingKind.bolt4:
        return float(value + (fp[1] + fp[2]) ** 2)
    return float(value + fp[1] ** 2 + fp[2] ** 2)


def closing_defect(s: MetricSample, end: ClosingSpec) -> tuple[float, Permutation]:
    """
    Smoothness defect of metric data against a closing orbit, minimized over the admissible
    permutations of (f1, f2, f3).

    The functions approach the far end with f' negative, so a fixed point asks for
    f_i -> 0, f_i' -> -1 and a bolt for f1 -> 0, f1' -> -n with f2 = f3 and f2', f3' -> 0
    (f2' + f3' -> 0 for n = 4). u' must vanish in every case.

    Returns:
        The smallest value and the permutation attaining it.
    """
    f = np.array(s.f)
    fp = np.array(s.f_prime)
    best = (math.inf, IDENTITY)
    for perm in end.permutations():
        idx = list(perm)
        value = _functional(f[idx], fp[idx], s.u_prime, end)
        if value < best[0]:
            best = (value, perm)
    return best


class ShootingResult(FrozenModel):
    sol: float
    """
    The closing defect; +inf when xi never reached C.
    """
    t0: Optional[float] = None
    """
    Time at which xi = C.
    """
    T: Optional[float] = None
    """
    Estimated length of the interval, t0 plus the distance read off the series.
    """
    permutation: Optional[Permutation] = None
    start_params: SolitonParams
    end_params: Optional[SolitonParams] = None

    @property
    def closed(self) -> bool:
        return math.isfinite(self.sol)


def sol_report(
    params: SolitonParams,
    end: ClosingSpec,
    delta: float = DELTA,
    C: float = STOP_XI,
    tol: float = TOL,
    t_max: float = HORIZON,
) -> ShootingResult:
    """
    Shoot from `params` to xi = C and score the closing there.

    Args:
        params: The germ; lambda must be positive.
        end: Smoothness conditions at the far end.
        delta: Series start time.
        C: Stop level for xi.
        tol: Integration tolerance.
        t_max: Give up if xi has not reached C by this time.

    Returns:
        The defect with the crossing time, the permutation used and the far-end parameters.

    Raises:
        ParameterError: if lambda is not positive.
    """
    if params.lam <= 0.0:
        raise ParameterError(f"compact solitons need lambda > 0, got {params.lam}")
    start = init_state(params, delta)
    traj = integrate(
        start,
        params.lam,
        System.su2,
        StopConditions(t_max=t_max, xi_floor=C, critical_radius=None),
        tol,
        params=params,
    )
    if traj.event is not TrajectoryEvent.xi_floor:
        logger.debug("xi did not reach %g: %s", C, traj.event.value)
        return ShootingResult(sol=math.inf, start_params=params)

    t0 = locate_crossing(traj, C)
    state = sample(traj, t0)
    try:
        metric = metric_from_state(state)
    except ReconstructionError as e:
        logger.debug("no metric at t0=%g: %s", t0, e)
        return ShootingResult(sol=math.inf, t0=t0, start_params=params)

    value, perm = closing_defect(metric, end)
    end_params = T = None
    try:
        # reversal about 2 t0 keeps the sampled time t0
        flipped = reverse_state(permute_state(state, perm), 2.0 * t0)
        estimate = extract_end_params(flipped, end.kind, params.lam, end.n)
        end_params = estimate.params
        T = t0 + estimate.distance
    except (ParameterError, ReconstructionError) as e:
        logger.debug("far-end parameters unavailable: %s", e)
    return ShootingResult(
        sol=value, t0=t0, T=T, permutation=perm, start_params=params, end_params=end_params
    )


def sol(
    delta: float,
    C: float,
    params: SolitonParams,
    end: ClosingSpec,
    tol: float = TOL,
    t_max: float = HORIZON,
) -> float:
    """
    The closing defect of the germ `params` at xi = C.

    Examples:
        >>> sol(0.001, -20.0, SolitonParams.fixed(-1/9, -1/9, -1/9, lam=1.0),
        ...     ClosingSpec.fixed_end())  # doctest: +SKIP
        0.0675...
    """
    return sol_report(params, end, delta, C, tol, t_max).sol


class HeatmapCell(FrozenModel):
    coords: tuple[float, ...]
    sol: float
    argmin: dict[str, float] = {}
    """
    Values of the reduced axes at which the minimum was attained.
    """


class Heatmap(FrozenModel):
    region: ScanRegion
    end: ClosingSpec
    delta: float
    C: float
    cells: list[HeatmapCell]
    failed: int = 0

    def values(self) -> np.ndarray:
        shape = tuple(axis.resolution for axis in self.region.axes)
        return np.array([cell.sol for cell in self.cells]).reshape(shape)

    def best(self) -> HeatmapCell:
        return min(self.cells, key=lambda cell: cell.sol)


def _heat_cell(
    coords: tuple[float, ...], region: ScanRegion, end: ClosingSpec, settings: dict
) -> tuple:
    best = (math.inf, {})
    failed = False
    for extra in region.reduced_cells():
        try:
            value = sol(params=region.params_at(coords, extra), end=end, **settings)
        except SolitonError as e:
            if app.fail_fast:
                raise
            logger.warning("cell %s %s failed: %s", coords, extra, e)
            failed = True
            continue
        if value < best[0]:
            best = (value, extra)
    return best[0], best[1], failed


def sol_heatmap(
    region: ScanRegion,
    end: ClosingSpec,
    delta: float = DELTA,
    C: float = STOP_XI,
    tol: float = TOL,
    t_max: float = HORIZON,
    threads: Optional[int] = None,
) -> Heatmap:
    """
    Closing defect over a parameter slice.

    Cells hold the minimum over the region's reduced axes when it has any, else the raw
    value. Germs that never reach C, or whose integration raises, hold +inf.
    """
    settings = {"delta": delta, "C": C, "tol": tol, "t_max": t_max}
    coords = region.cells()
    results = parallel_map(
        functools.partial(_heat_cell, region=region, end=end, settings=settings),
        coords,
        "sol",
        threads,
    )
    cells = [
        HeatmapCell(coords=coord, sol=value, argmin=argmin)
        for coord, (value, argmin, _) in zip(coords, results)
    ]
    return Heatmap(
        region=region,
        end=end,
        delta=delta,
        C=C,
        cells=cells,
        failed=sum(1 for *_, failed in results if failed),
    )


def write_heatmap_csv(grid: Heatmap, path: Path | str) -> Path:
    header = [*grid.region.axis_names, "sol"]
    return write_csv(path, header, ([*cell.coords, cell.sol] for cell in grid.cells))


class Candidate(FrozenModel):
    start_params: SolitonParams
    end_params: Optional[SolitonParams] = None
    sol: float
    T: Optional[float] = None
    seed_sol: float
    refined: bool = False
    """
    False when the seed was returned unchanged.
    """


def _coordinates(params: SolitonParams) -> np.ndarray:
    b = params.boundary
    if isinstance(b, FixedPoint):
        return np.array(b.a)
    if b.n in EXCEPTIONAL_N:
        return np.array([b.alpha, b.beta, b.gamma])
    return np.array([b.alpha, b.beta])


def _from_coordinates(seed: SolitonParams, x: Sequence[float]) -> SolitonParams:
    b = seed.boundary
    if isinstance(b, FixedPoint):
        return SolitonParams.fixed(*(float(v) for v in x), lam=seed.lam)
    gamma = float(x[2]) if len(x) == 3 else 0.0
    return SolitonParams.bolt(b.n, float(x[0]), float(x[1]), gamma, lam=seed.lam)


def refine_candidate(
    seed: SolitonParams,
    end: ClosingSpec,
    radius: float = 0.05,
    delta: float = DELTA,
    C: float = STOP_XI,
    tol: float = TOL,
    maxfev: int = 200,
) -> Candidate:
    """
    Minimize the closing defect with Nelder–Mead inside a box of half-width `radius`.

    The result is never worse than the seed: if the search diverges or fails to improve, the
    seed comes back with its own defect.
    """
    x0 = _coordinates(seed)
    seed_report = sol_report(seed, end, delta, C, tol)
    if not seed_report.closed:
        raise ParameterError("refinement needs a seed that reaches the stop level")

    def objective(x: np.ndarray) -> float:
        if np.max(np.abs(x - x0)) > radius:
            return PENALTY
        try:
            value = sol(delta, C, _from_coordinates(seed, x), end, tol)
        except SolitonError:
            return PENALTY
        return value if math.isfinite(value) else PENALTY

    simplex = np.vstack([x0] + [x0 + 0.25 * radius * row for row in np.eye(len(x0))])
    try:
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": maxfev, "initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-12},
        )
    except (SolitonError, FloatingPointError, ValueError) as e:
        logger.warning("refinement diverged, keeping the seed: %s", e)
        res = None

    report = seed_report
    if res is not None and res.fun < seed_report.sol:
        report = sol_report(_from_coordinates(seed, res.x), end, delta, C, tol)
    logger.info("refined defect %g -> %g", seed_report.sol, report.sol)
    return Candidate(
        start_params=report.start_params,
        end_params=report.end_params,
        sol=report.sol,
        T=report.T,
        seed_sol=seed_report.sol,
        refined=report is not seed_report,
    )


def write_candidate_json(candidate: Candidate, path: Path | str) -> Path:
    payload = candidate.to_primitive()
    return write_json(
        path,
        {key: payload[key] for key in ("start_params", "end_params", "sol", "T", "seed_sol")},
    )

