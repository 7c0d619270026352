"""
Long-time behavior of expanding solitons and scans of their parameter space.

Every trajectory is sorted into one of five classes: it settles on the Einstein critical
point, opens up into a cone (xi ~ -lambda t, L_i t -> 1), gets caught by the unstable Kähler
point, leaves through a blow-up or collapse, or is still undecided at the horizon.
Thresholds are expressed for lambda = -1 and rescaled by sqrt(-lambda), so classification
is invariant under the scaling symmetry of the phase system.
"""

import functools
import itertools
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pydantic

from constant import (
    ATLAS_CRITICAL_RADIUS,
    BISECTION_TOL,
    CONE_SLACK,
    DELTA,
    EINSTEIN_WINDOW,
    HORIZON,
    STOP_XI,
    TOL,
    TOL_CONE,
)

from .env import app
from .exceptions import ParameterError, SolitonError
from .flow_engine import StopConditions, integrate
from .phase_core import EXCEPTIONAL_N, Bolt, SolitonParams, Trajectory
from .runner import parallel_map, write_csv
from .schema import AsymptoticClass, FrozenModel, System, TrajectoryEvent
from .series_boundary import init_beta0, init_state

logger = logging.getLogger(__name__)

R_BOUND = 1e3

FIXED_AXES = ("alpha", "d1", "d2", "a1", "a2", "a3")
BOLT_AXES = ("alpha", "beta", "gamma")

_EVENT_CLASS = {
    TrajectoryEvent.critical: AsymptoticClass.einstein,
    TrajectoryEvent.kahler_critical: AsymptoticClass.kahler,
    TrajectoryEvent.blow_up: AsymptoticClass.divergent,
    TrajectoryEvent.collapse: AsymptoticClass.divergent,
    TrajectoryEvent.xi_floor: AsymptoticClass.divergent,
}


class Axis(FrozenModel):
    name: str
    lo: float
    hi: float
    resolution: int = pydantic.Field(ge=2)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.resolution)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.resolution - 1)


class ScanRegion(FrozenModel):
    """
    A parameter rectangle: axes bound to SolitonParams fields plus fixed values for the rest.

    Fixed-point regions are addressed either by (alpha, d1, d2), the differences
    d1 = a1 - a2 and d2 = a2 - a3, or directly by (a1, a2, a3). Bolt regions use
    (alpha, beta, gamma) with the slope n given separately. Axes listed in `reduce` are
    swept and minimized over by heatmaps; they never appear as output columns.
    """

    boundary: str = "bolt"
    n: Optional[pydantic.PositiveInt] = None
    lam: float = -1.0
    axes: tuple[Axis, ...]
    reduce: tuple[Axis, ...] = ()
    fixed: dict[str, float] = {}

    @pydantic.model_validator(mode="after")
    def region_validate(self) -> "ScanRegion":
        if self.boundary not in ("fixed", "bolt"):
            raise ValueError(f"boundary must be fixed or bolt, got {self.boundary}")
        if self.boundary == "bolt" and self.n is None:
            raise ValueError("bolt regions need the slope n")
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a region has one or two output axes")
        allowed = FIXED_AXES if self.boundary == "fixed" else BOLT_AXES
        names = [axis.name for axis in (*self.axes, *self.reduce)] + list(self.fixed)
        for name in names:
            if name not in allowed:
                raise ValueError(f"unknown {self.boundary} axis {name!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"axis bound twice in {names}")
        return self

    @property
    def axis_names(self) -> list[str]:
        return [axis.name for axis in self.axes]

    def cells(self) -> list[tuple[float, ...]]:
        """Output coordinates in row-major order, the first axis outermost."""
        return [
            tuple(float(v) for v in values)
            for values in itertools.product(*(axis.values() for axis in self.axes))
        ]

    def reduced_cells(self) -> list[dict[str, float]]:
        return [
            {axis.name: float(v) for axis, v in zip(self.reduce, values)}
            for values in itertools.product(*(axis.values() for axis in self.reduce))
        ] or [{}]

    def params_at(self, coords: Sequence[float], extra: Optional[dict] = None) -> SolitonParams:
        values = dict(self.fixed)
        values.update(zip(self.axis_names, coords))
        values.update(extra or {})
        if self.boundary == "bolt":
            return SolitonParams.bolt(
                self.n,
                values.get("alpha", 0.0),
                values.get("beta", 0.0),
                values.get("gamma", 0.0),
                lam=self.lam,
            )
        if any(name in values for name in ("a1", "a2", "a3")):
            return SolitonParams.fixed(
                values.get("a1", 0.0), values.get("a2", 0.0), values.get("a3", 0.0), self.lam
            )
        return SolitonParams.fixed_from_alpha(
            values.get("alpha", 0.0), values.get("d1", 0.0), values.get("d2", 0.0), self.lam
        )

    def check_admissible(self) -> None:
        """
        Raise ParameterError unless the rectangle meets the closed expander cone.

        The axes alpha, beta, gamma, d1 and d2 must be non-negative throughout. Directly
        addressed fixed points (a1, a2, a3) may straddle the ordering a1 >= a2 >= a3; the
        cells outside it are left to the scan, but a rectangle with no cell inside is refused.
        """
        for axis in (*self.axes, *self.reduce):
            if axis.name in ("alpha", "beta", "gamma", "d1", "d2") and min(axis.lo, axis.hi) < 0:
                raise ParameterError(f"axis {axis.name} leaves the admissible cone")
        for name, value in self.fixed.items():
            if name in ("alpha", "beta", "gamma", "d1", "d2") and value < 0:
                raise ParameterError(f"{name}={value} leaves the admissible cone")
        points = itertools.product(self.cells(), self.reduced_cells())
        if not any(in_cone(self.params_at(c, extra)) for c, extra in points):
            raise ParameterError("no cell of the region lies in the admissible cone")


def in_cone(params: SolitonParams) -> bool:
    """
    Closed expander cone: alpha >= 0, a1 >= a2 >= a3 at a fixed point, beta >= 0 and
    gamma >= 0 at a bolt.
    """
    if params.alpha < -CONE_SLACK:
        return False
    b = params.boundary
    if isinstance(b, Bolt):
        return b.beta >= -CONE_SLACK and b.gamma >= -CONE_SLACK
    a1, a2, a3 = b.a
    return a1 - a2 >= -CONE_SLACK and a2 - a3 >= -CONE_SLACK



class Classification(FrozenModel):
    kind: AsymptoticClass
    horizon_t: float
    """
    Time at which the classified trajectory stopped, in units where lambda = -1.
    """
    defect: float
    """
    Largest |xi - (L1 + L2 + L3)| along the trajectory.
    """
    event: Optional[TrajectoryEvent] = None


class AtlasCell(FrozenModel):
    coords: tuple[float, ...]
    result: Classification


class AtlasGrid(FrozenModel):
    region: ScanRegion
    horizon: float
    tol_cone: float
    critical_radius: float
    cells: list[AtlasCell]
    failed: int = 0

    def kinds(self) -> list[AsymptoticClass]:
        return [cell.result.kind for cell in self.cells]

    def as_array(self) -> np.ndarray:
        shape = tuple(axis.resolution for axis in self.region.axes)
        return np.array([kind.value for kind in self.kinds()]).reshape(shape)


def _scale(lam: float) -> float:
    if lam >= 0.0:
        raise ParameterError(f"asymptotic classification is for expanders, got lambda={lam}")
    return math.sqrt(-lam)


def is_conical(traj: Trajectory, lam: float, tol_cone: float = TOL_CONE) -> bool:
    """xi / (-lambda t) and every L_i t within tol_cone of 1 at the last sample, R_i t bounded."""
    t = traj.t[-1]
    y = traj.y[-1]
    cone = abs(y[0] / (-lam * t) - 1.0)
    rays = np.max(np.abs(y[1:4] * t - 1.0))
    return bool(cone < tol_cone and rays < tol_cone and np.max(np.abs(y[4:7] * t)) < R_BOUND)


def classify_trajectory(
    traj: Trajectory, lam: float, tol_cone: float = TOL_CONE
) -> AsymptoticClass:
    if traj.event is TrajectoryEvent.horizon:
        if is_conical(traj, lam, tol_cone):
            return AsymptoticClass.conical
        return AsymptoticClass.undecided
    return _EVENT_CLASS[traj.event]


def classify(
    params: SolitonParams,
    horizon: float = HORIZON,
    tol_cone: float = TOL_CONE,
    critical_radius: float = ATLAS_CRITICAL_RADIUS,
    kahler_radius: Optional[float] = ATLAS_CRITICAL_RADIUS,
    delta: float = DELTA,
    tol: float = TOL,
    rerun: bool = True,
) -> Classification:
    """
    Classify the long-time behavior of an expanding soliton.

    The start comes from series_boundary; degenerate bolts (beta = 0) run on the reduced
    system, where there is no Kähler point to approach.

    Args:
        params: The soliton germ; params.lam must be negative.
        horizon: Classification horizon in units where lambda = -1.
        tol_cone: Tolerance of the cone test at the horizon.
        critical_radius: Radius around the Einstein point counted as convergence.
        kahler_radius: Radius around the Kähler point; None disables that class.
        delta: Series start time.
        tol: Integration tolerance.
        rerun: Integrate once more with twice the horizon if the first pass is undecided.

    Returns:
        The class, the stopping time and the largest Einstein defect.

    Raises:
        ParameterError: if lambda is not negative.
    """
    lam = params.lam
    c = _scale(lam)
    degenerate = isinstance(params.boundary, Bolt) and params.boundary.degenerate
    if degenerate:
        system = System.beta0
        start = init_beta0(params.alpha, lam, delta)
    else:
        system = System.su2
        start = init_state(params, delta)

    stops = StopConditions(
        t_max=horizon / c,
        xi_floor=STOP_XI * c,
        critical_radius=critical_radius * c,
        kahler_radius=None if kahler_radius is None else kahler_radius * c,
    )
    traj = integrate(start, lam, system, stops, tol, params=params)
    kind = classify_trajectory(traj, lam, tol_cone)
    defect = float(np.max(np.abs(traj.y[:, 0] - traj.y[:, 1:4].sum(axis=1))))
    result = Classification(
        kind=kind, horizon_t=float(traj.t[-1] * c), defect=defect, event=traj.event
    )
    if kind is AsymptoticClass.undecided and rerun:
        logger.warning(
            "undecided at t=%g, rerunning with horizon %g", result.horizon_t, 2 * horizon
        )
        return classify(
            params, 2 * horizon, tol_cone, critical_radius, kahler_radius, delta, tol, False
        )
    return result


def _classify_cell(params: SolitonParams, settings: dict) -> Optional[Classification]:
    try:
        return classify(params, **settings)
    except SolitonError as e:
        if app.fail_fast:
            raise
        logger.warning("cell %s failed: %s", params.boundary, e)
        return None


def scan(
    region: ScanRegion,
    horizon: float = HORIZON,
    tol_cone: float = TOL_CONE,
    critical_radius: float = ATLAS_CRITICAL_RADIUS,
    delta: float = DELTA,
    tol: float = TOL,
    threads: Optional[int] = None,
) -> AtlasGrid:
    """
    Classify every lattice point of `region`, row-major, in parallel.

    A cell whose integration raises is recorded as UNDECIDED unless SOLITON_FAIL_FAST is set.
    Cells outside the expander cone are recorded as INADMISSIBLE without integrating.
    """
    region.check_admissible()
    if region.reduce:
        raise ParameterError("membership scans do not reduce axes")
    settings = {
        "horizon": horizon,
        "tol_cone": tol_cone,
        "critical_radius": critical_radius,
        "delta": delta,
        "tol": tol,
    }
    coords = region.cells()
    params = [region.params_at(c) for c in coords]
    inside = [p for p in params if in_cone(p)]
    results = iter(
        parallel_map(functools.partial(_classify_cell, settings=settings), inside, "scan", threads)
    )

    cells = []
    failed = 0
    for coord, p in zip(coords, params):
        if not in_cone(p):
            result = Classification(
                kind=AsymptoticClass.inadmissible, horizon_t=math.nan, defect=math.nan
            )
        elif (result := next(results)) is None:
            failed += 1
            result = Classification(
                kind=AsymptoticClass.undecided, horizon_t=math.nan, defect=math.nan
            )
        cells.append(AtlasCell(coords=coord, result=result))
    return AtlasGrid(
        region=region,
        horizon=horizon,
        tol_cone=tol_cone,
        critical_radius=critical_radius,
        cells=cells,
        failed=failed,
    )


def write_atlas_csv(grid: AtlasGrid, path: Path | str) -> Path:
    header = [*grid.region.axis_names, "class", "horizon_t", "defect"]
    rows = [
        [*cell.coords, cell.result.kind, cell.result.horizon_t, cell.result.defect]
        for cell in grid.cells
    ]
    return write_csv(path, header, rows)


class BoundaryPoint(FrozenModel):
    alpha: float
    beta_max: float
    flagged: bool = False
    """
    Set when the bracket did not straddle the conical boundary; beta_max is then NaN.
    """
    einstein_defect: float = math.nan
    """
    Largest |xi - (L1 + L2 + L3)| up to t = EINSTEIN_WINDOW on the germ at beta_max.
    """
    einstein_gap: float = math.nan
    """
    beta_max - n / (2n - 4), the offset from the U(2) Einstein bolt; NaN for n < 3.
    """


def einstein_beta(n: int) -> float:
    """beta of the U(2) Einstein bolt with slope n, where the first integral c vanishes."""
    if n < 3:
        return math.nan
    return n / (2.0 * n - 4.0)


def einstein_defect(
    params: SolitonParams, window: float = EINSTEIN_WINDOW, delta: float = DELTA, tol: float = TOL
) -> float:
    """Largest |xi - (L1 + L2 + L3)| for t <= window, in units where lambda = -1."""
    c = _scale(params.lam)
    stops = StopConditions(t_max=window / c, critical_radius=None)
    traj = integrate(init_state(params, delta), params.lam, System.su2, stops, tol, params=params)
    return float(np.max(np.abs(traj.y[:, 0] - traj.y[:, 1:4].sum(axis=1))))


def boundary_trace(
    n: int,
    alpha_list: Sequence[float],
    beta_bracket: tuple[float, float] = (0.05, 3.0),
    gamma: float = 0.0,
    lam: float = -1.0,
    xtol: float = BISECTION_TOL,
    horizon: float = HORIZON,
) -> list[BoundaryPoint]:
    """
    Bisect, for each alpha, the largest beta whose bolt germ is still asymptotically conical.

    Examples:
        >>> boundary_trace(3, [0.05])[0].beta_max  # doctest: +SKIP
        1.49...
    """
    if n not in EXCEPTIONAL_N and gamma != 0.0:
        raise ParameterError(f"gamma must vanish for n={n}")

    def conical(alpha: float, beta: float) -> bool:
        params = SolitonParams.bolt(n, alpha, beta, gamma, lam=lam)
        return classify(params, horizon=horizon).kind is AsymptoticClass.conical

    points = []
    for alpha in alpha_list:
        lo, hi = beta_bracket
        if not conical(alpha, lo) or conical(alpha, hi):
            logger.warning(
                "beta bracket %s does not straddle the boundary at alpha=%g", beta_bracket, alpha
            )
            points.append(BoundaryPoint(alpha=alpha, beta_max=math.nan, flagged=True))
            continue
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            if conical(alpha, mid):
                lo = mid
            else:
                hi = mid
        beta_max = 0.5 * (lo + hi)
        germ = SolitonParams.bolt(n, alpha, beta_max, gamma, lam=lam)
        points.append(
            BoundaryPoint(
                alpha=alpha,
                beta_max=beta_max,
                einstein_defect=einstein_defect(germ),
                einstein_gap=beta_max - einstein_beta(n),
            )
        )
        logger.info("n=%d alpha=%g beta_max=%g", n, alpha, points[-1].beta_max)
    return points


def einstein_sweep(n: int, alpha_list: Sequence[float], **trace) -> list[BoundaryPoint]:
    """
    Trace the conical boundary for decreasing alpha.

    As alpha goes to 0 the boundary germs approach the Einstein locus: einstein_defect and
    einstein_gap of the returned points both tend to 0. Keyword arguments go to
    boundary_trace.
    """
    points = boundary_trace(n, sorted(alpha_list, reverse=True), **trace)
    for p in points:
        if not p.flagged:
            logger.info(
                "alpha=%g einstein defect %.3g gap %.3g",
                p.alpha,
                p.einstein_defect,
                p.einstein_gap,
            )
    return points


def neighbors(params: SolitonParams, step: float) -> list[SolitonParams]:
    """
    Lattice neighbors at distance `step`: along (alpha, d1, d2) for a fixed point, along
    (alpha, beta) plus gamma when n is 1, 2 or 4 for a bolt.
    """
    b = params.boundary
    out = []
    if isinstance(b, Bolt):
        coords = {"alpha": b.alpha, "beta": b.beta, "gamma": b.gamma}
        names = ["alpha", "beta"] + (["gamma"] if b.n in EXCEPTIONAL_N else [])
        for name, sign in itertools.product(names, (-1.0, 1.0)):
            moved = dict(coords, **{name: coords[name] + sign * step})
            out.append(SolitonParams.bolt(b.n, lam=params.lam, **moved))
        return out
    a1, a2, a3 = b.a
    coords = {"alpha": params.alpha, "d1": a1 - a2, "d2": a2 - a3}
    for name, sign in itertools.product(coords, (-1.0, 1.0)):
        moved = dict(coords, **{name: coords[name] + sign * step})
        out.append(SolitonParams.fixed_from_alpha(lam=params.lam, **moved))
    return out


def neighbors_agree(params: SolitonParams, step: float = 0.01, **kwargs) -> bool:
    """True when every lattice neighbor at `step` falls in the same class as `params`."""
    center = classify(params, **kwargs).kind
    for other in neighbors(params, step):
        kind = classify(other, **kwargs).kind
        if kind is not center:
            logger.info("neighbor %s is %s, center is %s", other.boundary, kind.value, center.value)
            return False
    return True
