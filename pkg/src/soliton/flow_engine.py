"""
Adaptive integration of the phase systems with event detection.

Integrations use the embedded Dormand–Prince 5(4) pair of scipy with dense output. Every
stopping rule is a terminal event located on the dense output, so crossing times are
reproducible to well below 1e-9.
"""

import logging
from typing import Callable, Optional

import numpy as np
import pydantic
from scipy import integrate as scipy_integrate
from scipy import optimize

from constant import (
    COLLAPSE_FLOOR,
    CRITICAL_RADIUS,
    CROSSING_XTOL,
    DELTA,
    HORIZON,
    MAX_TOL,
    MIN_TOL,
    NORM_CEILING,
    STOP_XI,
    TOL,
)

from .exceptions import IntegrationError, NoCrossingError
from .phase_core import (
    EMBEDDINGS,
    FIELDS,
    PhaseState,
    SolitonParams,
    Trajectory,
    einstein_critical_point,
    kahler_critical_point,
    restrict,
)
from .schema import FrozenModel, System, TrajectoryEvent
from .series_boundary import init_state

logger = logging.getLogger(__name__)

_J = [1, 2, 0]
_K = [2, 0, 1]


class StopConditions(FrozenModel):
    t_max: pydantic.PositiveFloat = HORIZON
    """
    Absolute end time of the integration.
    """
    xi_floor: float = STOP_XI
    """
    Stop once xi falls to this level.
    """
    norm_ceiling: pydantic.PositiveFloat = NORM_CEILING
    """
    Blow-up guard on the largest native component.
    """
    collapse_floor: pydantic.PositiveFloat = COLLAPSE_FLOOR
    """
    Stop once some f_i^2 = 1 / (R_j R_k) falls below this.
    """
    critical_radius: Optional[pydantic.PositiveFloat] = CRITICAL_RADIUS
    """
    Stop inside this distance of the Einstein critical point; ignored for lambda >= 0.
    """
    kahler_radius: Optional[pydantic.PositiveFloat] = None
    """
    Stop inside this distance of the Kähler critical point; ignored for lambda >= 0.
    """


def _event(fn: Callable, direction: float = -1.0) -> Callable:
    fn.terminal = True
    fn.direction = direction
    return fn


def _build_events(
    system: System, lam: float, stops: StopConditions
) -> list[tuple[TrajectoryEvent, Callable]]:
    embed = EMBEDDINGS[system]
    events = []

    if system is not System.slow:
        events.append(
            (TrajectoryEvent.xi_floor, _event(lambda t, y, lam: y[0] - stops.xi_floor))
        )

    events.append(
        (
            TrajectoryEvent.blow_up,
            _event(lambda t, y, lam: stops.norm_ceiling - np.max(np.abs(y))),
        )
    )

    if system is not System.beta0:

        def collapse(t, y, lam):
            R = embed(y)[4:7]
            return 1.0 - stops.collapse_floor * np.max(R[_J] * R[_K])

        events.append((TrajectoryEvent.collapse, _event(collapse)))

    if lam < 0.0:
        targets = [(TrajectoryEvent.critical, stops.critical_radius, einstein_critical_point)]
        if system in (System.su2, System.u2, System.slow):
            targets.append(
                (TrajectoryEvent.kahler_critical, stops.kahler_radius, kahler_critical_point)
            )
        for tag, radius, point_of in targets:
            if radius is None:
                continue
            point = point_of(lam)[1:7]

            def near(t, y, lam, point=point, radius=radius):
                return np.linalg.norm(embed(y)[1:7] - point) - radius

            events.append((tag, _event(near)))
    return events


def integrate(
    start: PhaseState,
    lam: float,
    system: System = System.su2,
    stops: Optional[StopConditions] = None,
    tol: float = TOL,
    params: Optional[SolitonParams] = None,
) -> Trajectory:
    """
    Integrate one of the phase systems from `start` until a stop condition fires.

    Args:
        start: Initial state; for the slow system `start.t` is the initial slow time.
        lam: The soliton constant lambda.
        system: Which right-hand side to use.
        stops: Stop conditions; defaults to StopConditions().
        tol: Relative and absolute local error tolerance, in [1e-13, 1e-6].
        params: Recorded on the trajectory for later reconstruction.

    Returns:
        The trajectory with its terminal event. Step-size underflow near a singular time is
        reported as a blow_up event rather than raised.

    Raises:
        IntegrationError: if tol is out of range or t_max does not exceed start.t.
    """
    stops = stops or StopConditions()
    if not MIN_TOL <= tol <= MAX_TOL:
        raise IntegrationError(f"tol must lie in [{MIN_TOL}, {MAX_TOL}], got {tol}")
    if stops.t_max <= start.t:
        raise IntegrationError(f"t_max={stops.t_max} does not exceed start t={start.t}")

    embed = EMBEDDINGS[system]
    events = _build_events(system, lam, stops)
    y0 = restrict(system, start.to_array())

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sol = scipy_integrate.solve_ivp(
            FIELDS[system],
            (start.t, stops.t_max),
            y0,
            method="RK45",
            rtol=tol,
            atol=tol,
            dense_output=True,
            events=[fn for _, fn in events],
            args=(lam,),
        )

    if sol.status == 1:
        fired = [
            (float(t_ev[-1]), tag) for (tag, _), t_ev in zip(events, sol.t_events) if len(t_ev)
        ]
        event = max(fired, key=lambda item: item[0])[1]
    elif sol.status == 0:
        event = TrajectoryEvent.horizon
    else:
        logger.debug("integration stopped early: %s", sol.message)
        event = TrajectoryEvent.blow_up

    t = np.asarray(sol.t)
    keep = np.concatenate(([True], np.diff(t) > 0.0))
    y = np.array([embed(col) for col in sol.y.T[keep]])
    logger.debug(
        "integrated %s from t=%g to t=%g: %s after %d steps",
        system.value,
        start.t,
        t[-1],
        event.value,
        len(t),
    )
    return Trajectory(
        system=system,
        lam=lam,
        t=t[keep],
        y=y,
        event=event,
        steps=len(t),
        message=sol.message,
        dense=sol.sol,
        params=params,
    )


def sample(traj: Trajectory, t: float) -> PhaseState:
    """Evaluate the dense output at `t`, lifted to the full 7-component state."""
    if traj.dense is None:
        raise IntegrationError("trajectory carries no dense output")
    if not traj.t[0] <= t <= traj.t[-1]:
        raise IntegrationError(f"t={t} outside [{traj.t[0]}, {traj.t[-1]}]")
    return PhaseState.from_array(t, EMBEDDINGS[traj.system](traj.dense(t)))


def locate_crossing(traj: Trajectory, level: float, component: int = 0) -> float:
    """
    Time at which a phase component first crosses `level`, refined by Brent's method on the
    dense output.

    Raises:
        NoCrossingError: if the sampled component never changes sign about `level`.
    """
    values = traj.y[:, component] - level
    signs = np.sign(values)
    hits = np.nonzero(signs[:-1] * signs[1:] <= 0.0)[0]
    if len(hits) == 0:
        raise NoCrossingError(f"component {component} never reaches {level}")
    i = int(hits[0])
    a, b = float(traj.t[i]), float(traj.t[i + 1])
    if values[i] == 0.0:
        return a
    if values[i + 1] == 0.0 or traj.dense is None:
        return b

    def g(t):
        return EMBEDDINGS[traj.system](traj.dense(t))[component] - level

    if g(a) * g(b) > 0.0:
        return b
    return optimize.brentq(g, a, b, xtol=CROSSING_XTOL)


def find_T(
    params: SolitonParams,
    C: float = STOP_XI,
    delta: float = DELTA,
    tol: float = TOL,
    t_max: float = HORIZON,
) -> float:
    """
    Time t0 at which xi reaches C, an approximation of the length of a compact candidate.

    xi is strictly decreasing when lambda >= 0, so the first crossing is the only one.

    Raises:
        NoCrossingError: if xi does not reach C before t_max.
    """
    if params.lam < 0.0:
        logger.warning("find_T with lambda=%g: xi need not be monotone", params.lam)
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
        raise NoCrossingError(
            f"xi did not reach {C} before t={traj.t[-1]:.6g} ({traj.event.value})"
        )
    return locate_crossing(traj, C)
