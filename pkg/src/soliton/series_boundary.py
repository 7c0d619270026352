"""
Short-time series at the initial singular orbit.

The phase system is singular at t = 0, so integrations start at a small t = delta from the
truncated power series that every smooth soliton must follow there.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np
import pydantic

from constant import DELTA, MAX_DELTA

from .exceptions import ParameterError, SeriesRangeError
from .phase_core import (
    EXCEPTIONAL_N,
    Bolt,
    FixedPoint,
    PhaseState,
    SolitonParams,
    jacobian_su2,
    metric_from_state,
)
from .schema import ClosingKind, FrozenModel

logger = logging.getLogger(__name__)


class SeriesOrder(FrozenModel):
    order: int = 1

    @pydantic.field_validator("order")
    @classmethod
    def order_validate(cls, v: int) -> int:
        if v not in (1, 3):
            raise ValueError(f"series order must be 1 or 3, got {v}")
        return v


class EndEstimate(FrozenModel):
    """Parameters read off a state close to the far singular orbit."""

    params: SolitonParams
    distance: float
    """
    Estimated distance in t from the state to the closing orbit.
    """


def _check_delta(delta: float) -> None:
    if not 0.0 < delta <= MAX_DELTA:
        raise SeriesRangeError(f"delta must lie in (0, {MAX_DELTA}], got {delta}")


def init_fixed(params: SolitonParams, delta: float = DELTA) -> PhaseState:
    """
    First order series at a fixed point.

        xi(d)  = 3/d + (a1 + a2 + a3 + alpha) d
        L_i(d) = 1/d + a_i d
        R_i(d) = 1/d + (a_i - a_j - a_k) d / 2

    Raises:
        SeriesRangeError: if delta is outside (0, 0.01].
        ParameterError: if params do not describe a fixed point.
    """
    _check_delta(delta)
    if not isinstance(params.boundary, FixedPoint):
        raise ParameterError("init_fixed needs fixed-point boundary data")
    a = np.array(params.boundary.a)
    inv = 1.0 / delta
    xi = 3.0 * inv + (a.sum() + params.alpha) * delta
    L = inv + a * delta
    R = inv + 0.5 * (a - a[[1, 2, 0]] - a[[2, 0, 1]]) * delta
    return PhaseState(t=delta, xi=xi, L=tuple(L), R=tuple(R))


def _bolt_generic(b: Bolt, lam: float, d: float) -> tuple[float, Sequence[float], Sequence[float]]:
    n, al, be = b.n, b.alpha, b.beta
    xi = 1.0 / d + (2 * n * al + 8 * be - 3 * n * lam) / (3 * n) * d
    L1 = 1.0 / d - (n * al + 4 * be) / (3 * n) * d
    L2 = (4 * be - n * lam) / (2 * n) * d
    R1 = be * d
    R2 = 1.0 / (n * d) + (n * al + 4 * be) / (6 * n * n) * d
    return xi, (L1, L2, L2), (R1, R2, R2)


def _bolt_n2(b: Bolt, lam: float, d: float) -> tuple[float, Sequence[float], Sequence[float]]:
    al, be, ga = b.alpha, b.beta, b.gamma
    xi = 1.0 / d + (2 * al + 4 * be - 3 * lam) / 3 * d
    L1 = 1.0 / d - (al + 2 * be) / 3 * d
    L2 = (2 * be + 2 * ga - lam) / 2 * d
    L3 = (2 * be - 2 * ga - lam) / 2 * d
    R1 = be * d
    R2 = 1.0 / (2 * d) + (al + 2 * be + 6 * ga) / 12 * d
    R3 = 1.0 / (2 * d) + (al + 2 * be - 6 * ga) / 12 * d
    return xi, (L1, L2, L3), (R1, R2, R3)


def _bolt_n4(b: Bolt, lam: float, d: float) -> tuple[float, Sequence[float], Sequence[float]]:
    al, be, ga = b.alpha, b.beta, b.gamma
    xi = 1.0 / d + (4 * al + 4 * be - ga * ga - 6 * lam) / 6 * d
    L1 = 1.0 / d - (2 * al + 2 * be + ga * ga) / 6 * d
    L2 = ga / 2 + (be - lam) / 2 * d
    L3 = -ga / 2 + (be - lam) / 2 * d
    R1 = be * d
    tail = (2 * al + 2 * be + 7 * ga * ga) / 48 * d
    R2 = 1.0 / (4 * d) + ga / 4 + tail
    R3 = 1.0 / (4 * d) - ga / 4 + tail
    return xi, (L1, L2, L3), (R1, R2, R3)


def _bolt_n1(b: Bolt, lam: float, d: float) -> tuple[float, Sequence[float], Sequence[float]]:
    al, be, ga = b.alpha, b.beta, b.gamma
    d3 = d**3
    xi = (
        1.0 / d
        + (2 * al + 8 * be - 3 * lam) / 3 * d
        + (-4 * al**2 - 32 * al * be + 3 * al * lam - 226 * be**2 + 84 * be * lam - 9 * lam**2)
        / 45
        * d3
    )
    L1 = (
        1.0 / d
        - (al + 4 * be) / 3 * d
        + (14 * al**2 + 112 * al * be - 18 * al * lam + 476 * be**2 - 144 * be * lam + 9 * lam**2)
        / 180
        * d3
    )
    L_common = -8 * al * be + 2 * al * lam - 92 * be**2 + 32 * be * lam - 3 * lam**2
    L2 = (4 * be - lam) / 2 * d + (48 * ga + L_common) / 24 * d3
    L3 = (4 * be - lam) / 2 * d + (-48 * ga + L_common) / 24 * d3
    R1 = be * d + (-al * be - 16 * be**2 + 3 * be * lam) / 6 * d3
    R_common = -4 * al**2 - 32 * al * be + 18 * al * lam - 316 * be**2 + 144 * be * lam - 9 * lam**2
    R2 = 1.0 / d + (al + 4 * be) / 6 * d + (720 * ga + R_common) / 720 * d3
    R3 = 1.0 / d + (al + 4 * be) / 6 * d + (-720 * ga + R_common) / 720 * d3
    return xi, (L1, L2, L3), (R1, R2, R3)


def init_bolt(
    params: SolitonParams, delta: float = DELTA, order: Optional[SeriesOrder] = None
) -> PhaseState:
    """
    Series at a bolt with slope n.

    n = 2 and n = 4 use their own columns, where gamma enters at first order; n = 1 is
    carried to third order, since gamma first appears there. Every other n uses the U(2)
    column with gamma = 0.

    Raises:
        SeriesRangeError: if delta is outside (0, 0.01].
        ParameterError: if params are not bolt data, or order 1 is requested for n = 1.
    """
    _check_delta(delta)
    b = params.boundary
    if not isinstance(b, Bolt):
        raise ParameterError("init_bolt needs bolt boundary data")
    if b.n not in EXCEPTIONAL_N and b.gamma != 0.0:
        raise ParameterError(f"gamma must vanish for n={b.n}")
    order = order or SeriesOrder(order=3 if b.n == 1 else 1)
    if b.n == 1 and order.order != 3:
        raise ParameterError("the n = 1 bolt needs the third order series")
    builder = {1: _bolt_n1, 2: _bolt_n2, 4: _bolt_n4}.get(b.n, _bolt_generic)
    logger.debug("bolt series n=%d order=%d delta=%g", b.n, order.order, delta)
    xi, L, R = builder(b, params.lam, delta)
    return PhaseState(
        t=delta, xi=float(xi), L=tuple(float(v) for v in L), R=tuple(float(v) for v in R)
    )


def init_beta0(alpha: float, lam: float = -1.0, delta: float = DELTA) -> PhaseState:
    """
    Start of the degenerate beta = 0 reduced system.

    It is the bolt series at beta = 0, where (xi, L1, L2) no longer depend on n; R is zero.
    """
    _check_delta(delta)
    xi = 1.0 / delta + (2.0 * alpha / 3.0 - lam) * delta
    L1 = 1.0 / delta - alpha / 3.0 * delta
    L2 = -lam / 2.0 * delta
    return PhaseState(t=delta, xi=xi, L=(L1, L2, L2), R=(0.0, 0.0, 0.0))


def init_so4(alpha: float, lam: float = -1.0, delta: float = DELTA) -> PhaseState:
    return init_fixed(SolitonParams.so4(alpha, lam), delta)


def init_state(params: SolitonParams, delta: float = DELTA) -> PhaseState:
    if isinstance(params.boundary, FixedPoint):
        return init_fixed(params, delta)
    return init_bolt(params, delta)


def desingularization_spectrum(kind: Union[FixedPoint, Bolt, int, str]) -> np.ndarray:
    """
    Eigenvalues of the t^-1 part of the system at the singular orbit, in ascending order.

    Substituting the leading terms of the series into the system gives a homogeneous
    quadratic problem; its linearization at the leading coefficients is the Jacobian of the
    lambda = 0 system there.

    Args:
        kind: "fixed" or a FixedPoint for a point orbit; an integer n or a Bolt for a bolt.

    Examples:
        >>> desingularization_spectrum("fixed")
        array([-5., -5., -3., -2.,  1.,  1.,  1.])
    """
    if isinstance(kind, FixedPoint) or kind == "fixed":
        leading = np.array([3.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    else:
        n = kind.n if isinstance(kind, Bolt) else int(kind)
        leading = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 1.0 / n, 1.0 / n])
    values = np.linalg.eigvals(jacobian_su2(leading, 0.0))
    return np.sort(values.real)


def extract_end_params(
    s: PhaseState, kind: ClosingKind, lam: float, n: Optional[int] = None
) -> EndEstimate:
    """
    Read the far-end parameters off a state near the closing orbit.

    The state must already be reversed (xi and L negated) and permuted so that f1 is the
    collapsing function for bolt ends; only its phase values are read, so T is estimated by
    adding `distance` to the time the state was sampled at. The distance d to the orbit
    comes from the series: for a fixed point sum(L) - xi = lambda d + 6 mean(L - R); for a
    bolt d = f1 / n.
    """
    L = np.array(s.L)
    R = np.array(s.R)
    p = L.sum() - s.xi
    if kind is ClosingKind.fixed:
        q = float(np.mean(L - R))
        d = (p - 6.0 * q) / lam
        if d <= 0.0:
            raise ParameterError(f"state is not close to a fixed point: d={d}")
        a = 2.0 * q / (3.0 * d) + (L - L.mean()) / d
        params = SolitonParams.fixed(*(float(v) for v in a), lam=lam)
    else:
        if kind is ClosingKind.bolt4:
            n = 4
        elif n is None:
            raise ParameterError("bolt ends need the slope n")
        f = metric_from_state(s).f
        d = f[0] / n
        beta = n / (f[1] * f[2])
        alpha = -p / d
        if n == 4:
            gamma = L[1] - L[2]
        elif n == 2:
            gamma = (L[1] - L[2]) / (2.0 * d)
        elif n == 1:
            gamma = (R[1] - R[2]) / (2.0 * d**3)
        else:
            gamma = 0.0
        params = SolitonParams.bolt(n, float(alpha), float(beta), float(gamma), lam=lam)
    return EndEstimate(params=params, distance=float(d))
