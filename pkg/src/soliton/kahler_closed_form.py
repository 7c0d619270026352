"""
U(2)-invariant shrinking Kähler solitons with orbifold singularities.

On the Kähler locus the metric is carried by one function f = f2 = f3, with f1 = |f f'| and
u' = C f f'. The soliton equation (lambda = 1) then integrates once:

    d/df (f^4 (f')^2 e^(-C f^2 / 2)) = f^3 e^(-C f^2 / 2) (4 - f^2)

so (f')^2 is known in closed form up to one constant fixed by the boundary orbit. Closing
conditions at a second orbit become transcendental equations in C, handled by the root
functions h1 and h2 below.
"""

import functools
import logging
import math
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pydantic
from scipy import integrate, optimize

from constant import ALPHA_ATOL, DELTA, ROOT_BRACKET, ROOT_SCAN_STEP, ROOT_XTOL, STOP_XI

from .compact_shooter import ClosingSpec, sol
from .env import app
from .exceptions import KahlerClassError, ParameterError, ProfileError, SolitonError
from .phase_core import MetricSample, PhaseState, SolitonParams, rhs_su2
from .runner import parallel_map, write_csv, write_json
from .schema import BaseModel, FrozenModel, KahlerBoundaryKind, KahlerCase

logger = logging.getLogger(__name__)

LAMBDA = 1.0
SERIES_LIMIT = 0.5
SERIES_TERMS = 40
ROOT_GRID = 20000
ZERO_TOL = 1e-9
DEGENERATE_K = 1e-3


def _poly(F, C):
    return C * C * F * (F - 4.0) + 4.0 * C * (F - 2.0) + 8.0


def kahler_first_integral(f: float, C: float, Dconst: float) -> float:
    """
    (f')^2 as a function of f.

        C = 0:  1 - f^2 / 6 + D0 f^-4
        C != 0: (C^2 f^2 (f^2 - 4) + 4 C (f^2 - 2) + 8) / (C^3 f^4) + D f^-4 e^(C f^2 / 2)

    A negative value means f lies outside the range the metric can reach.

    Examples:
        >>> kahler_first_integral(math.sqrt(6.0), 0.0, 0.0)
        0.0
        >>> kahler_first_integral(2.5, 1.0, 0.0)
        1.0
    """
    F = f * f
    if C == 0.0:
        return 1.0 - F / 6.0 + Dconst / (F * F)
    return _poly(F, C) / (C**3 * F * F) + Dconst * math.exp(C * F / 2.0) / (F * F)


def h1(x, k1: float, k2: float):
    """
    Closing function of the two-bolt profile: x = -C must be a root for the profile that
    leaves f^2 = 4 - 2 k1 to reach f^2 = 4 + 2 k2 with f' = 0.
    """
    with np.errstate(over="ignore"):
        grow = np.exp((k1 + k2) * x)
    return (
        grow * (k2 * (2.0 + k2) * x * x - 2.0 * (1.0 + k2) * x + 2.0)
        + k1 * (2.0 - k1) * x * x
        + 2.0 * (1.0 - k1) * x
        - 2.0
    )


def h1_third_derivative(k1: float, k2: float) -> float:
    """h1'''(0); it vanishes exactly on the Kähler–Einstein pairs."""
    s = k1 + k2
    return s * (6.0 * k2 * (2.0 + k2) - 6.0 * s * (1.0 + k2) + 2.0 * s * s)


def h2(alpha, L: float):
    """Closing function of the profile from a fixed point to f^2 = L with f' = 0."""
    with np.errstate(over="ignore"):
        decay = np.exp(-L * alpha / 2.0)
    quadratic = L * (L - 4.0) * alpha * alpha - 4.0 * (L - 2.0) * alpha + 8.0
    return quadratic - (8.0 * alpha + 8.0) * decay


def einstein_partner(k1: float) -> float:
    """
    The k2 for which the two-bolt profile with k1 is Kähler–Einstein.

    Examples:
        >>> einstein_partner(2.0)
        1.0
    """
    return 0.5 * (-(3.0 - k1) + math.sqrt(3.0 * (1.0 + k1) * (3.0 - k1)))


def einstein_orbifold_condition(n: int, q_inc: float, q_dec: float) -> float:
    """
    6 qi^2 (2 qj + n) - 6 qi (qi + qj)(qj + n) + 2 n (qi + qj)^2 with i the increasing end,
    where f^2 = 4 - 2n/qi, and j the decreasing end. Zero exactly on Einstein pairs.
    """
    qi, qj = q_inc, q_dec
    s = qi + qj
    return 6.0 * qi * qi * (2.0 * qj + n) - 6.0 * qi * s * (qj + n) + 2.0 * n * s * s


def nonzero_roots(
    fn: Callable,
    bracket: tuple[float, float] = ROOT_BRACKET,
    step: float = ROOT_SCAN_STEP,
    xtol: float = ROOT_XTOL,
) -> list[float]:
    """
    Roots of `fn` in `bracket` away from the triple root at 0, by a sign scan at `step`
    followed by Brent's method.
    """
    roots = []
    lo, hi = bracket
    negative = np.arange(-step, lo - step / 2, -step)[::-1]
    positive = np.arange(step, hi + step / 2, step)
    for grid in (negative, positive):
        if len(grid) < 2:
            continue
        values = fn(grid)
        signs = np.sign(values)
        for i in np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]:
            roots.append(float(optimize.brentq(fn, grid[i], grid[i + 1], xtol=xtol)))
        for i in np.nonzero(values == 0.0)[0]:
            roots.append(float(grid[i]))
    return sorted(set(roots))


def h1_root(k1: float, k2: float) -> float:
    """
    The nonzero root of h1, or 0 when the pair is Kähler–Einstein.

    Raises:
        ParameterError: if k1 is outside (0, 2) or k2 is not positive.
    """
    if not 0.0 < k1 < 2.0 or k2 <= 0.0:
        raise ParameterError(f"need 0 < k1 < 2 and k2 > 0, got k1={k1}, k2={k2}")
    roots = nonzero_roots(functools.partial(h1, k1=k1, k2=k2))
    if not roots:
        return 0.0
    if len(roots) > 1:
        logger.warning("h1 has %d nonzero roots for k1=%g k2=%g", len(roots), k1, k2)
    return roots[0]


def closing_alpha(n: int, q1: float, q2: float) -> float:
    """
    alpha at the increasing end of the two-bolt profile on M_n with cone angles 2 pi / q1
    (increasing end) and 2 pi / q2; alpha = k1 x with x the root of h1.

    Examples:
        >>> round(closing_alpha(1, 1.0, 1.0), 3)  # Koiso–Cao
        -0.525
    """
    k1 = n / q1
    return k1 * h1_root(k1, n / q2)


def _h2_root(L: float) -> float:
    roots = nonzero_roots(functools.partial(h2, L=L))
    if len(roots) > 1:
        logger.warning("h2 has %d nonzero roots for L=%g", len(roots), L)
    return roots[0] if roots else 0.0


def cp2_alpha(q: float) -> float:
    """
    alpha of the soliton on CP^2 with cone angle 2 pi / q along the CP^1 orbit; 0 is the
    Fubini–Study metric at q = 1.
    """
    if q <= 0.0:
        raise ParameterError(f"q must be positive, got {q}")
    return _h2_root(4.0 + 2.0 / q)


def gn_alpha(n: int, q: float) -> float:
    """The same root with f(T)^2 = 4 + n / q, the family closing up with an extra orbifold point."""
    if q <= 0.0:
        raise ParameterError(f"q must be positive, got {q}")
    return _h2_root(4.0 + n / q)


def count_solitons(n: int, q1: float, q2: float) -> int:
    """
    Number of Kähler solitons on M_n, up to scaling, with cone angles 2 pi / q1 and 2 pi / q2.

    Examples:
        >>> count_solitons(1, 1.0, 1.0)
        1
        >>> count_solitons(2, 2.0, 3.0)
        2
    """
    half = n / 2.0
    if q1 <= half and q2 <= half:
        return 0
    if q1 > half and q2 > half and q1 != q2:
        return 2
    return 1


class ConeConstant(FrozenModel):
    value: float
    degenerate: bool = False
    """
    Set as k = n / q approaches 0, where the constant diverges like 1 / k.
    """


def complete_cone_constant(n: int, q: float) -> ConeConstant:
    """
    C of the complete profile on O(-n) with cone angle 2 pi / q.

    The profile leaving f^2 = 4 - 2k is complete exactly when the exponential part of the
    first integral vanishes, which is the positive root of
    k (2 - k) C^2 - 2 (1 - k) C - 2 = 0, k = n / q.

    Examples:
        >>> complete_cone_constant(1, 1.0).value == math.sqrt(2.0)
        True
    """
    k = n / q
    if not 0.0 < k < 2.0:
        raise ParameterError(f"complete profiles on O(-n) need q > n/2, got n={n}, q={q}")
    value = ((1.0 - k) + math.sqrt(1.0 + 2.0 * k - k * k)) / (k * (2.0 - k))
    return ConeConstant(value=value, degenerate=k < DEGENERATE_K)


def noncompact_vanishing(alpha: float) -> bool:
    """A profile from a fixed point never closes up exactly when alpha <= -1."""
    return alpha <= -1.0 + ALPHA_ATOL


def complete_vanishing(alpha: float) -> bool:
    """Among those only alpha = -1, the Gaussian shrinker, is complete."""
    return math.isclose(alpha, -1.0, rel_tol=0.0, abs_tol=ALPHA_ATOL)


class KahlerBoundary(FrozenModel):
    """
    Boundary orbit of a Kähler profile.

    - vanishing: f(0) = 0, f'(0) = 1, a fixed point;
    - bolt_inc: f(0)^2 = 4 - 2n/q, f'(0) = 0, f increasing away from it;
    - bolt_dec: f(0)^2 = 4 + 2n/q, f'(0) = 0, f decreasing away from it.

    q need not be an integer; integral q is an orbifold with cone angle 2 pi / q and q = 1
    is smooth.
    """

    kind: KahlerBoundaryKind
    n: Optional[pydantic.PositiveInt] = None
    q: Optional[pydantic.PositiveFloat] = None

    @pydantic.model_validator(mode="after")
    def boundary_validate(self) -> "KahlerBoundary":
        if self.kind is KahlerBoundaryKind.vanishing:
            if self.n is not None or self.q is not None:
                raise ValueError("a vanishing boundary takes neither n nor q")
            return self
        if self.n is None or self.q is None:
            raise ValueError(f"{self.kind.value} boundaries need n and q")
        if self.kind is KahlerBoundaryKind.bolt_inc and self.q <= self.n / 2.0:
            raise ValueError(f"bolt_inc needs q > n/2, got n={self.n}, q={self.q}")
        return self

    @classmethod
    def vanishing(cls) -> "KahlerBoundary":
        return cls(kind=KahlerBoundaryKind.vanishing)

    @classmethod
    def bolt_inc(cls, n: int, q: float = 1.0) -> "KahlerBoundary":
        try:
            return cls(kind=KahlerBoundaryKind.bolt_inc, n=n, q=q)
        except pydantic.ValidationError as e:
            raise ParameterError(str(e)) from e

    @classmethod
    def bolt_dec(cls, n: int, q: float = 1.0) -> "KahlerBoundary":
        return cls(kind=KahlerBoundaryKind.bolt_dec, n=n, q=q)

    @property
    def k(self) -> float:
        return 0.0 if self.n is None else self.n / self.q

    @property
    def F0(self) -> float:
        """f(0)^2."""
        if self.kind is KahlerBoundaryKind.vanishing:
            return 0.0
        if self.kind is KahlerBoundaryKind.bolt_inc:
            return 4.0 - 2.0 * self.k
        return 4.0 + 2.0 * self.k

    @property
    def direction(self) -> int:
        return -1 if self.kind is KahlerBoundaryKind.bolt_dec else 1

    @property
    def orbifold(self) -> bool:
        return self.q is not None and float(self.q).is_integer()


def _primitive(F, C: float):
    """
    The integral of s (4 - s) e^(-C s / 2) / 2 over [0, F].

    It is (e^(-C F / 2) P(F) - P(0)) / C^3 with P the polynomial of the first integral; that
    form cancels catastrophically for small |C F|, where the Taylor series is used instead.
    """
    F = np.asarray(F, dtype=float)
    flat = np.atleast_1d(F)
    small = np.abs(C * flat) / 2.0 < SERIES_LIMIT
    out = np.empty_like(flat)

    big = flat[~small]
    out[~small] = (np.exp(-C * big / 2.0) * _poly(big, C) - _poly(0.0, C)) / C**3

    x = flat[small]
    total = np.zeros_like(x)
    coeff = 1.0
    for m in range(SERIES_TERMS):
        total = total + coeff * (2.0 * x ** (m + 2) / (m + 2) - x ** (m + 3) / (2.0 * (m + 3)))
        coeff *= -C / 2.0 / (m + 1)
    out[small] = total
    return float(out[0]) if F.ndim == 0 else out.reshape(F.shape)


def _energy(F, C: float, anchor: float, complete: bool = False):
    """
    f^4 (f')^2 e^(-C f^2 / 2) as a function of F = f^2.

    On a complete profile D = 0 and away from the series range the value is
    e^(-C F / 2) P(F) / C^3, which decays to zero; the anchored primitive would lose it to
    cancellation for large F.
    """
    if not complete:
        return _primitive(F, C) + anchor
    F = np.asarray(F, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        decayed = np.exp(-C * F / 2.0) * _poly(F, C) / C**3
    value = np.where(np.abs(C * F) / 2.0 < SERIES_LIMIT, _primitive(F, C) + anchor, decayed)
    return float(value) if F.ndim == 0 else value


class KahlerProfile(BaseModel):
    """
    A solution f of the Kähler first integral between two orbits, parameterized by t.
    """

    model_config = pydantic.ConfigDict(arbitrary_types_allowed=True)

    boundary: KahlerBoundary
    C: float
    D: float
    """
    The integration constant of the first integral; D0 when C = 0.
    """
    anchor: float
    """
    Value of f^4 (f')^2 e^(-C f^2 / 2) minus the primitive, constant along the profile.
    """
    t: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    T: float
    """
    Length of the interval; infinite for complete noncompact profiles.
    """
    f_end: Optional[float] = None
    """
    f at the far orbit; None when f is unbounded.
    """
    end: Optional[KahlerBoundary] = None
    complete: bool = False
    case: Optional[KahlerCase] = None

    @property
    def direction(self) -> int:
        return self.boundary.direction

    @property
    def compact(self) -> bool:
        return self.f_end is not None

    def G(self, F):
        return _energy(F, self.C, self.anchor, self.complete)

    def Q(self, f: float) -> float:
        """(f')^2 at f, from the numerically stable form of the first integral."""
        F = f * f
        return float(math.exp(self.C * F / 2.0) * self.G(F) / (F * F))

    def _jet(self, f: float) -> tuple[float, float, float, float]:
        Q = max(self.Q(f), 0.0)
        dQ = ((4.0 - f * f) - (4.0 - self.C * f * f) * Q) / f
        ddQ = (-2.0 * f + 2.0 * self.C * f * Q - (5.0 - self.C * f * f) * dQ) / f
        fp = self.direction * math.sqrt(Q)
        return fp, dQ / 2.0, fp * ddQ / 2.0, Q

    def phase_at(self, f: float, t: float = 1.0) -> PhaseState:
        """Exact phase data where the profile passes through f, stamped with time t."""
        fp, fpp, _, Q = self._jet(f)
        L1 = (Q + f * fpp) / (f * fp)
        L2 = fp / f
        R1 = abs(fp) / f
        R2 = 1.0 / (f * abs(fp))
        xi = L1 + 2.0 * L2 - self.C * f * fp
        return PhaseState(t=t, xi=xi, L=(L1, L2, L2), R=(R1, R2, R2))

    def residual_at(self, f: float) -> np.ndarray:
        """Exact time derivative of the phase data minus the full right-hand side."""
        fp, fpp, fppp, Q = self._jet(f)
        s = self.phase_at(f)
        L = np.array(s.L)
        R = np.array(s.R)
        num = Q + f * fpp
        den = f * fp
        dL1 = ((3.0 * fp * fpp + f * fppp) * den - num * (Q + f * fpp)) / (den * den)
        dL2 = fpp / f - (fp / f) ** 2
        dL = np.array([dL1, dL2, dL2])
        dR = R * (L - L[[1, 2, 0]] - L[[2, 0, 1]])
        dxi = dL.sum() - self.C * (Q + f * fpp)
        return np.concatenate(([dxi], dL, dR)) - rhs_su2(s, LAMBDA)

    def interior(self, margin: float = 0.02) -> np.ndarray:
        """Sample indices away from both orbits."""
        n = len(self.t)
        lo, hi = int(margin * n), int((1.0 - margin) * n)
        return np.arange(max(lo, 1), min(hi, n - 1))

    def phase_states(self) -> list[PhaseState]:
        return [self.phase_at(float(self.f[i]), float(self.t[i])) for i in self.interior()]

    def to_metric_samples(self) -> list[MetricSample]:
        """(f1, f2, f3) = (|f f'|, f, f) and u' = C f f' at every interior sample."""
        out = []
        for i in self.interior(margin=0.0):
            f = float(self.f[i])
            fp, fpp, _, Q = self._jet(f)
            f1p = self.direction * (Q + f * fpp)
            out.append(
                MetricSample(
                    t=float(self.t[i]),
                    f=(abs(f * fp), f, f),
                    f_prime=(f1p, fp, fp),
                    u_prime=self.C * f * fp,
                )
            )
        return out

    def start_params(self) -> SolitonParams:
        """
        The germ of the profile in the phase variables, lambda = 1.

        Raises:
            ParameterError: if the start is a bolt with non-integer slope n / q.
        """
        b = self.boundary
        if b.kind is KahlerBoundaryKind.vanishing:
            alpha = -self.C
            c = 1.0 + alpha
            return SolitonParams.fixed(-2.0 * c / 9.0, -c / 18.0, -c / 18.0, lam=LAMBDA)
        slope = round(b.k)
        if abs(b.k - slope) > 1e-12 or slope < 1:
            raise ParameterError(f"bolt slope n/q = {b.k} is not a positive integer")
        return SolitonParams.bolt(
            slope, -b.direction * b.k * self.C, b.k / b.F0, 0.0, lam=LAMBDA
        )

    def payload(self, every: int = 10) -> dict[str, Any]:
        samples = [
            [float(t), float(f), float(fp)]
            for t, f, fp in zip(self.t[::every], self.f[::every], self.fp[::every])
        ]
        return {
            "C": self.C,
            "D": self.D,
            "boundary": self.boundary.to_primitive(),
            "end": None if self.end is None else self.end.to_primitive(),
            "T": self.T,
            "complete": self.complete,
            "case": None if self.case is None else self.case.value,
            "samples": samples,
        }


def integration_constant(boundary: KahlerBoundary, C: float) -> tuple[float, float]:
    """
    The constant of the first integral fixed by the boundary, with the matching anchor of the
    stable form.

    Returns:
        (D, anchor); D is D0 when C = 0.
    """
    if boundary.kind is KahlerBoundaryKind.vanishing:
        anchor = 0.0
    else:
        anchor = -float(_primitive(boundary.F0, C))
    if C == 0.0:
        return anchor, anchor
    return anchor - _poly(0.0, C) / C**3, anchor


def _find_end(G: Callable, F0: float, direction: int, F_max: float) -> Optional[float]:
    stop = F_max if direction > 0 else 0.0
    grid = np.linspace(F0, stop, ROOT_GRID + 1)[1:]
    values = G(grid)
    hits = np.nonzero(values <= 0.0)[0]
    if len(hits) == 0:
        return None
    i = int(hits[0])
    if i == 0:
        raise ProfileError("(f')^2 is negative right at the boundary orbit")
    return float(optimize.brentq(G, grid[i - 1], grid[i], xtol=1e-14))


def _endpoint_rate(f: float, span: float) -> float:
    # dt/dtheta at an orbit where (f')^2 ~ |4 - f^2| / f |f - f_b|
    if f == 0.0:
        return 0.0
    slope = abs(4.0 - f * f) / f
    return math.sqrt(abs(span) / slope)


def build_profile(
    boundary: KahlerBoundary,
    C: float,
    direction: Optional[int] = None,
    samples: int = 2001,
    f_max: float = 20.0,
) -> KahlerProfile:
    """
    Integrate the Kähler first integral away from `boundary`.

    t(f) is obtained by quadrature of dt = df / |f'| under f = f0 + (fe - f0)(1 - cos s) / 2,
    which removes the square-root singularities at orbits where f' vanishes.

    Args:
        boundary: The orbit at t = 0.
        C: The potential constant, u' = C f f'.
        direction: +1 or -1; must agree with the boundary if given.
        samples: Number of samples along the profile.
        f_max: Where an unbounded profile is cut off.

    Returns:
        The profile, with the far orbit and the classification case when they exist.

    Raises:
        ProfileError: if (f')^2 is negative next to the boundary orbit.
        ParameterError: if `direction` contradicts the boundary.
    """
    if direction is not None and direction != boundary.direction:
        raise ParameterError(
            f"{boundary.kind.value} boundaries go in direction {boundary.direction}"
        )
    D, anchor = integration_constant(boundary, C)

    complete = boundary.direction > 0 and C > 0.0 and abs(D) < ZERO_TOL

    def G(F):
        return _energy(F, C, anchor, complete)

    F0 = boundary.F0
    nudged = F0 + boundary.direction * 1e-6 * max(F0, 1.0)
    if G(nudged) <= 0.0:
        raise ProfileError(f"no metric leaves {boundary.kind.value} with C={C}")

    F_end = None if complete else _find_end(G, F0, boundary.direction, f_max * f_max)
    f0 = math.sqrt(F0)
    end = None
    if F_end is not None:
        fe = math.sqrt(F_end)
    elif boundary.direction > 0:
        fe = f_max
    else:
        fe = 0.0
        if abs(float(G(0.0))) < ZERO_TOL:
            end = KahlerBoundary.vanishing()

    span = fe - f0
    start_rate = 0.0
    if boundary.kind is not KahlerBoundaryKind.vanishing:
        start_rate = _endpoint_rate(f0, span)
    end_rate = _endpoint_rate(fe, span) if F_end is not None else 0.0

    def rate(theta: float) -> float:
        if theta <= 0.0:
            return start_rate
        if theta >= math.pi:
            return end_rate
        f = f0 + span * (1.0 - math.cos(theta)) / 2.0
        F = f * f
        Q = math.exp(C * F / 2.0) * float(G(F)) / (F * F)
        return abs(span) * math.sin(theta) / (2.0 * math.sqrt(max(Q, 1e-300)))

    theta = np.linspace(0.0, math.pi, samples)
    rates = np.array([rate(s) for s in theta])
    t = integrate.cumulative_simpson(rates, x=theta, initial=0.0)
    f = f0 + span * (1.0 - np.cos(theta)) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = np.where(f > 0.0, np.exp(C * f * f / 2.0) * G(f * f) / f**4, 1.0)
    fp = boundary.direction * np.sqrt(np.clip(Q, 0.0, None))
    if boundary.kind is not KahlerBoundaryKind.vanishing:
        fp[0] = 0.0
    if F_end is not None:
        fp[-1] = 0.0
        end = _far_boundary(boundary, F_end)

    if F_end is not None or end is not None:
        T = float(integrate.quad(rate, 0.0, math.pi, limit=200)[0])
    elif complete:
        T = math.inf
    else:
        T = float(t[-1])
        logger.warning("profile with C=%g runs into a singular end", C)

    profile = KahlerProfile(
        boundary=boundary,
        C=C,
        D=D,
        anchor=anchor,
        t=t,
        f=f,
        fp=fp,
        T=T,
        f_end=fe if (F_end is not None or end is not None) else None,
        end=end,
        complete=complete,
    )
    try:
        case = classify_kahler_space(boundary, end, complete=complete, C=C)
    except KahlerClassError as e:
        logger.debug("profile is outside the classified cases: %s", e)
        case = None
    return profile.model_copy(update={"case": case})


def _far_boundary(start: KahlerBoundary, F_end: float) -> KahlerBoundary:
    n = start.n or 1
    if F_end > 4.0:
        return KahlerBoundary(kind=KahlerBoundaryKind.bolt_dec, n=n, q=2.0 * n / (F_end - 4.0))
    return KahlerBoundary(kind=KahlerBoundaryKind.bolt_inc, n=n, q=2.0 * n / (4.0 - F_end))


def classify_kahler_space(
    start: KahlerBoundary,
    end: Optional[KahlerBoundary] = None,
    complete: bool = False,
    C: Optional[float] = None,
) -> KahlerCase:
    """
    Which space a Kähler profile lives on, from its boundary orbits.

    Raises:
        KahlerClassError: if the boundary data fit none of the cases.
    """
    kinds = {start.kind, end.kind if end is not None else None}
    V, INC, DEC = (
        KahlerBoundaryKind.vanishing,
        KahlerBoundaryKind.bolt_inc,
        KahlerBoundaryKind.bolt_dec,
    )
    if end is None:
        if not complete:
            raise KahlerClassError("a single orbit needs a complete noncompact end")
        if start.kind is V:
            if C is not None and abs(C - 1.0) > ZERO_TOL:
                raise KahlerClassError(f"the only complete profile from a point has C = 1, got {C}")
            return KahlerCase.gaussian_c2
        if start.kind is INC:
            if start.q <= start.n / 2.0:
                raise KahlerClassError(f"O(-n) needs q > n/2, got n={start.n}, q={start.q}")
            return KahlerCase.o_minus_n
        raise KahlerClassError("a decreasing start cannot be noncompact")
    if complete:
        raise KahlerClassError("a profile with two orbits is compact")
    if V in kinds:
        bolt = end if start.kind is V else start
        if bolt.kind is V:
            raise KahlerClassError("f cannot vanish at both ends")
        if bolt.n != 1:
            raise KahlerClassError(f"a point and a bolt close on CP^2 only for n = 1, got {bolt.n}")
        return KahlerCase.cp2
    if kinds != {INC, DEC}:
        raise KahlerClassError("f is monotone, so one bolt must be increasing and one decreasing")
    if start.n != end.n:
        raise KahlerClassError(f"bolt slopes differ: {start.n} and {end.n}")
    return KahlerCase.blowup_cp2 if start.n % 2 else KahlerCase.s2xs2


def two_bolt_profile(n: int, q1: float, q2: float, **kwargs) -> KahlerProfile:
    """The profile on M_n leaving the increasing end 2 pi / q1 towards the end 2 pi / q2."""
    k1 = n / q1
    C = -h1_root(k1, n / q2)
    return build_profile(KahlerBoundary.bolt_inc(n, q1), C, **kwargs)


def limsol_defect(
    n: int,
    q1: float,
    q2: float = 1.0,
    delta: float = DELTA,
    C_stop: float = STOP_XI,
) -> float:
    """
    Closing defect of the Kähler profile on M_n that is shot from its decreasing end, with
    cone parameter q2, towards the increasing end with cone parameter q1, scored against the
    smooth n-bolt.

    The increasing end has f1' -> n / q1 instead of n, so the defect tends to (n - n/q1)^2
    as C_stop -> -infinity; it is small at the Koiso–Cao soliton and approaches (n - 2)^2 as
    q1 decreases to n / 2.

    Raises:
        ParameterError: if q1 <= n/2 or n / q2 is not an integer.
        ProfileError: if the profile does not exist.
    """
    if q1 <= n / 2.0:
        raise ParameterError(f"the increasing end needs q1 > n/2, got n={n}, q1={q1}")
    if not (n / q2).is_integer():
        raise ParameterError(f"the decreasing end needs an integer slope, got n/q2={n / q2}")
    C = -h1_root(n / q1, n / q2)
    profile = build_profile(KahlerBoundary.bolt_dec(n, q2), C)
    return sol(delta, C_stop, profile.start_params(), ClosingSpec.bolt_end(n, permute=True))


def _limsol_cell(q: float, n: int, delta: float, C_stop: float) -> float:
    try:
        return limsol_defect(n, q, 1.0, delta, C_stop)
    except SolitonError as e:
        if app.fail_fast:
            raise
        logger.warning("limsol n=%d q=%g failed: %s", n, q, e)
        return math.inf


def limsol_sweep(
    n: int,
    qs: Sequence[float],
    delta: float = DELTA,
    C_stop: float = STOP_XI,
    threads: Optional[int] = None,
) -> list[tuple[int, float, float]]:
    values = parallel_map(
        functools.partial(_limsol_cell, n=n, delta=delta, C_stop=C_stop), qs, "limsol", threads
    )
    return [(n, float(q), value) for q, value in zip(qs, values)]


def write_limsol_csv(rows: Sequence[tuple[int, float, float]], path: Path | str) -> Path:
    return write_csv(path, ["n", "q", "limsol"], rows)


def write_profile_json(profile: KahlerProfile, path: Path | str, every: int = 10) -> Path:
    return write_json(path, profile.payload(every))
