"""
Catalog of explicit solitons, evaluable at arbitrary t.

Each entry gives the metric functions with their first two derivatives in closed form, so
phase states and residuals come out exact rather than from finite differences.
"""

import logging
import math
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
import pydantic

from .compact_shooter import SMOOTHNESS_TABLE, ClosingSpec, bolt_to_bolt
from .exceptions import DomainError, UnknownSolutionError
from .phase_core import (
    MetricSample,
    PhaseState,
    SolitonParams,
    rhs_reduced_beta0,
    rhs_su2,
)
from .schema import BaseModel, System

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

_J = [1, 2, 0]
_K = [2, 0, 1]


class Jet(NamedTuple):
    """Metric functions with two derivatives, and u' with one."""

    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    up: float
    upp: float


class Wave(NamedTuple):
    """amp * sin(omega t + phase), or amp * sinh(omega t) when hyperbolic."""

    amp: float
    omega: float
    phase: float = 0.0
    hyperbolic: bool = False

    def jet(self, t: float) -> tuple[float, float, float]:
        x = self.omega * t + self.phase
        w2 = self.omega * self.omega
        if self.hyperbolic:
            s, c = math.sinh(x), math.cosh(x)
            return self.amp * s, self.amp * self.omega * c, self.amp * w2 * s
        s, c = math.sin(x), math.cos(x)
        return self.amp * s, self.amp * self.omega * c, -self.amp * w2 * s


def _waves(*functions: Sequence[Wave]) -> Callable[[float], Jet]:
    def jet(t: float) -> Jet:
        values = np.zeros((3, 3))
        for i, terms in enumerate(functions):
            for term in terms:
                values[:, i] += term.jet(t)
        return Jet(values[0], values[1], values[2], 0.0, 0.0)

    return jet


def _flat(up_slope: float) -> Callable[[float], Jet]:
    def jet(t: float) -> Jet:
        f = np.full(3, t)
        return Jet(f, np.ones(3), np.zeros(3), up_slope * t, up_slope)

    return jet


def _constant(value: float) -> Wave:
    # sin(pi/2) with zero frequency
    return Wave(value, 0.0, math.pi / 2.0)


def _beta0_jet(t: float) -> Jet:
    x = SQRT3 * t
    h = 0.5 * x
    f1 = 2.0 ** (2.0 / 3.0) / SQRT3 * math.sinh(x) ** (1.0 / 3.0) * math.tanh(h) ** (2.0 / 3.0)
    f2 = math.cosh(h) ** (2.0 / 3.0)
    L = _beta0_phase(t)[1:3]
    f = np.array([f1, f2, f2])
    fp = f * np.array([L[0], L[1], L[1]])
    return Jet(f, fp, np.full(3, math.nan), 0.0, 0.0)


def _beta0_phase(t: float) -> np.ndarray:
    x = SQRT3 * t
    c = 1.0 / math.tanh(x)
    s = 1.0 / math.sinh(x)
    return np.array([SQRT3 * c, (c + 2.0 * s) / SQRT3, (c - s) / SQRT3])


def _beta0_phase_rate(t: float) -> np.ndarray:
    x = SQRT3 * t
    c = 1.0 / math.tanh(x)
    s = 1.0 / math.sinh(x)
    return np.array([-3.0 * s * s, -s * s - 2.0 * s * c, -s * s + s * c])


class NamedSolution(BaseModel):
    model_config = pydantic.ConfigDict(arbitrary_types_allowed=True)

    name: str
    lam: float
    domain: tuple[float, float]
    system: System = System.su2
    params: SolitonParams
    """
    The germ the solution realizes at t = 0.
    """
    end_params: Optional[SolitonParams] = None
    """
    The germ at the far end, after the closing permutation, for compact entries.
    """
    closing: Optional[ClosingSpec] = None
    jet: Callable[[float], Jet] = pydantic.Field(exclude=True)

    @property
    def compact(self) -> bool:
        return math.isfinite(self.domain[1])

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def interior(self, count: int = 100, margin: float = 0.05) -> np.ndarray:
        lo, hi = self.domain
        if not self.compact:
            hi = 5.0
        pad = margin * (hi - lo)
        return np.linspace(lo + pad, hi - pad, count)


def _check(sol: NamedSolution, t: float) -> None:
    lo, hi = sol.domain
    if not lo < t < hi:
        raise DomainError(f"t={t} outside ({lo}, {hi}) for {sol.name}")


def _phase_from_jet(t: float, jet: Jet) -> PhaseState:
    L = jet.fp / jet.f
    R = jet.f / (jet.f[_J] * jet.f[_K])
    return PhaseState(t=t, xi=float(L.sum() - jet.up), L=tuple(L), R=tuple(R))


def _catalog() -> dict[str, NamedSolution]:
    s4_so3_cos = Wave(6.0, 1.0 / SQRT3, math.pi / 2.0)
    s4_so3_sin = Wave(2.0 * SQRT3, 1.0 / SQRT3)
    entries = [
        NamedSolution(
            name="hyperbolic",
            lam=-1.0,
            domain=(0.0, math.inf),
            params=SolitonParams.fixed(1 / 9, 1 / 9, 1 / 9, lam=-1.0),
            jet=_waves(*[[Wave(SQRT3, 1.0 / SQRT3, hyperbolic=True)]] * 3),
        ),
        NamedSolution(
            name="gaussian_expander",
            lam=-1.0,
            domain=(0.0, math.inf),
            params=SolitonParams.fixed(0.0, 0.0, 0.0, lam=-1.0),
            jet=_flat(-1.0),
        ),
        NamedSolution(
            name="gaussian_shrinker",
            lam=1.0,
            domain=(0.0, math.inf),
            params=SolitonParams.fixed(0.0, 0.0, 0.0, lam=1.0),
            jet=_flat(1.0),
        ),
        NamedSolution(
            name="beta0_einstein",
            lam=-1.0,
            domain=(0.0, math.inf),
            system=System.beta0,
            params=SolitonParams.bolt(2, 0.0, 0.0, 0.0, lam=-1.0),
            jet=_beta0_jet,
        ),
        NamedSolution(
            name="kahler_einstein_R4",
            lam=-1.0,
            domain=(0.0, math.inf),
            params=SolitonParams.fixed(2 / 9, 1 / 18, 1 / 18, lam=-1.0),
            jet=_waves(
                [Wave(SQRT6 / 2.0, 2.0 / SQRT6, hyperbolic=True)],
                [Wave(SQRT6, 1.0 / SQRT6, hyperbolic=True)],
                [Wave(SQRT6, 1.0 / SQRT6, hyperbolic=True)],
            ),
        ),
        NamedSolution(
            name="round_s4_so3",
            lam=1.0,
            domain=(0.0, SQRT3 * math.pi / 3.0),
            params=SolitonParams.bolt(4, 0.0, 1 / 9, 2 / 3, lam=1.0),
            end_params=SolitonParams.bolt(4, 0.0, 1 / 9, 2 / 3, lam=1.0),
            closing=SMOOTHNESS_TABLE["s4_so3"].end,
            jet=_waves(
                [Wave(4.0 * SQRT3, 1.0 / SQRT3)],
                [s4_so3_cos, s4_so3_sin],
                [s4_so3_cos, s4_so3_sin._replace(amp=-2.0 * SQRT3)],
            ),
        ),
        NamedSolution(
            name="fubini_study_so3",
            lam=1.0,
            domain=(0.0, SQRT6 * math.pi / 4.0),
            params=SolitonParams.bolt(4, 0.0, 1 / 3, SQRT6 / 3, lam=1.0),
            end_params=SolitonParams.bolt(2, 0.0, 1 / 12, 1 / 4, lam=1.0),
            closing=SMOOTHNESS_TABLE["cp2_so3"].end,
            jet=_waves(
                [Wave(2.0 * SQRT6, SQRT6 / 3.0)],
                # cos(pi/4 - t/sqrt6) = sin(t/sqrt6 + pi/4)
                [Wave(2.0 * SQRT6, 1.0 / SQRT6, math.pi / 4.0)],
                # sin(pi/4 - t/sqrt6) = sin(-t/sqrt6 + pi/4)
                [Wave(2.0 * SQRT6, -1.0 / SQRT6, math.pi / 4.0)],
            ),
        ),
        NamedSolution(
            name="round_s4_fixed",
            lam=1.0,
            domain=(0.0, SQRT3 * math.pi),
            params=SolitonParams.fixed(-1 / 9, -1 / 9, -1 / 9, lam=1.0),
            end_params=SolitonParams.fixed(-1 / 9, -1 / 9, -1 / 9, lam=1.0),
            closing=SMOOTHNESS_TABLE["s4_fixed"].end,
            jet=_waves(*[[Wave(SQRT3, 1.0 / SQRT3)]] * 3),
        ),
        NamedSolution(
            name="fubini_study_su2",
            lam=1.0,
            domain=(0.0, SQRT6 * math.pi / 2.0),
            params=SolitonParams.fixed(-2 / 9, -1 / 18, -1 / 18, lam=1.0),
            end_params=SolitonParams.bolt(1, 0.0, 1 / 6, 0.0, lam=1.0),
            closing=SMOOTHNESS_TABLE["cp2_fixed"].end,
            jet=_waves(
                [Wave(SQRT6 / 2.0, SQRT6 / 3.0)],
                [Wave(SQRT6, 1.0 / SQRT6)],
                [Wave(SQRT6, 1.0 / SQRT6)],
            ),
        ),
        NamedSolution(
            name="s2xs2",
            lam=1.0,
            domain=(0.0, SQRT2 * math.pi / 2.0),
            params=SolitonParams.bolt(2, 0.0, 1 / 4, 1 / 4, lam=1.0),
            end_params=SolitonParams.bolt(2, 0.0, 1 / 4, 1 / 4, lam=1.0),
            closing=bolt_to_bolt(2).end,
            jet=_waves(
                [Wave(2.0 * SQRT2, 1.0 / SQRT2)],
                [_constant(2.0 * SQRT2)],
                [Wave(2.0 * SQRT2, 1.0 / SQRT2, math.pi / 2.0)],
            ),
        ),
    ]
    return {entry.name: entry for entry in entries}


CATALOG: dict[str, NamedSolution] = _catalog()


def names() -> list[str]:
    return list(CATALOG)


def lookup(name: str) -> NamedSolution:
    try:
        return CATALOG[name]
    except KeyError as e:
        raise UnknownSolutionError(f"no reference solution named {name!r}") from e


def evaluate(name: str, t: float) -> tuple[MetricSample, PhaseState]:
    """
    Closed-form metric data and phase state of a catalog entry.

    Raises:
        UnknownSolutionError: if `name` is not in the catalog.
        DomainError: if t is not inside the open interval of the entry.
    """
    sol = lookup(name)
    _check(sol, t)
    jet = sol.jet(t)
    if sol.system is System.beta0:
        y = _beta0_phase(t)
        state = PhaseState(t=t, xi=y[0], L=(y[1], y[2], y[2]), R=(0.0, 0.0, 0.0))
    else:
        state = _phase_from_jet(t, jet)
    sample = MetricSample(
        t=t, f=tuple(jet.f), f_prime=tuple(jet.fp), u_prime=float(jet.up)
    )
    return sample, state


def residual(name: str, t: float) -> np.ndarray:
    """
    Exact time derivative of the phase state minus the right-hand side of the governing
    system; the beta = 0 entry is checked against the reduced system.
    """
    sol = lookup(name)
    _check(sol, t)
    if sol.system is System.beta0:
        y = _beta0_phase(t)
        state = PhaseState(t=t, xi=y[0], L=(y[1], y[2], y[2]), R=(0.0, 0.0, 0.0))
        return _beta0_phase_rate(t) - rhs_reduced_beta0(state, sol.lam)[:3]
    jet = sol.jet(t)
    state = _phase_from_jet(t, jet)
    L = np.array(state.L)
    R = np.array(state.R)
    dL = jet.fpp / jet.f - L * L
    dR = R * (L - L[_J] - L[_K])
    dxi = dL.sum() - jet.upp
    return np.concatenate(([dxi], dL, dR)) - rhs_su2(state, sol.lam)


def max_residual(name: str, count: int = 100) -> float:
    sol = lookup(name)
    return max(float(np.max(np.abs(residual(name, float(t))))) for t in sol.interior(count))


def oracle_check(count: int = 100) -> dict[str, float]:
    """Largest residual of every catalog entry over `count` interior points."""
    report = {name: max_residual(name, count) for name in CATALOG}
    logger.info("oracle residuals: %s", report)
    return report


def dump(name: str, ts: Sequence[float]) -> list[list[float]]:
    """Rows t, f1, f2, f3, u', xi, L1, L2, L3, R1, R2, R3 for plotting."""
    rows = []
    for t in ts:
        sample, state = evaluate(name, float(t))
        rows.append([t, *sample.f, sample.u_prime, state.xi, *state.L, *state.R])
    return rows
