"""
Domain types and right-hand sides of the cohomogeneity-one soliton systems.

The metric g = dt^2 + f1^2 w1^2 + f2^2 w2^2 + f3^2 w3^2 with potential u is encoded by the
phase variables

    L_i = f_i' / f_i,  R_i = f_i / (f_j f_k),  xi = L1 + L2 + L3 - u',

which turn the soliton equation Ric + Hess u = lambda g into the first order system

    xi'  = -(L1^2 + L2^2 + L3^2) - lambda
    L_i' = -xi L_i + 2 R_i^2 - 2 (R_j - R_k)^2 - lambda
    R_i' = R_i (L_i - L_j - L_k)

with (i, j, k) a cyclic ordering of (1, 2, 3). Every right-hand side takes lambda explicitly,
so one code path serves expanders, steady and shrinking solitons alike.
"""

import logging
import math
from typing import Annotated, Any, Literal, Optional, Sequence, Union

import numpy as np
import pydantic
from scipy import integrate

from constant import GUARD

from .exceptions import ParameterError, ReconstructionError, SymmetryError
from .schema import BaseModel, FrozenModel, KahlerVariant, System, TrajectoryEvent

logger = logging.getLogger(__name__)

Triple = tuple[float, float, float]
PhaseVector = np.ndarray

EXCEPTIONAL_N = (1, 2, 4)
SYMMETRY_TOL = 1e-9

_J = np.array([1, 2, 0])
_K = np.array([2, 0, 1])


class FixedPoint(FrozenModel):
    """Boundary data at a point orbit, where all f_i vanish with slope one."""

    kind: Literal["fixed"] = "fixed"
    a1: float
    a2: float
    a3: float

    @property
    def a(self) -> Triple:
        return (self.a1, self.a2, self.a3)


class Bolt(FrozenModel):
    """Boundary data at a two-sphere orbit, where f1 vanishes with slope n."""

    kind: Literal["bolt"] = "bolt"
    n: pydantic.PositiveInt
    alpha: float
    beta: float
    gamma: float = 0.0

    @pydantic.model_validator(mode="after")
    def bolt_validate(self) -> "Bolt":
        if self.n not in EXCEPTIONAL_N and self.gamma != 0.0:
            raise ValueError(f"gamma must vanish for n={self.n}, got {self.gamma}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        return self

    @property
    def degenerate(self) -> bool:
        return self.beta == 0.0


Boundary = Annotated[Union[FixedPoint, Bolt], pydantic.Field(discriminator="kind")]


class SolitonParams(FrozenModel):
    """
    The germ of a soliton: lambda plus the boundary data at the initial singular orbit.

    For a fixed point the potential parameter is not independent,
    alpha = -lambda - 3 (a1 + a2 + a3).
    """

    lam: float
    boundary: Boundary

    @property
    def alpha(self) -> float:
        if isinstance(self.boundary, FixedPoint):
            return -self.lam - 3.0 * sum(self.boundary.a)
        return self.boundary.alpha

    @property
    def is_bolt(self) -> bool:
        return isinstance(self.boundary, Bolt)

    @classmethod
    def fixed(cls, a1: float, a2: float, a3: float, lam: float) -> "SolitonParams":
        return cls(lam=lam, boundary=FixedPoint(a1=a1, a2=a2, a3=a3))

    @classmethod
    def bolt(
        cls, n: int, alpha: float, beta: float, gamma: float = 0.0, lam: float = 1.0
    ) -> "SolitonParams":
        try:
            boundary = Bolt(n=n, alpha=alpha, beta=beta, gamma=gamma)
        except pydantic.ValidationError as e:
            raise ParameterError(str(e)) from e
        return cls(lam=lam, boundary=boundary)

    @classmethod
    def fixed_from_alpha(
        cls, alpha: float, d1: float = 0.0, d2: float = 0.0, lam: float = -1.0
    ) -> "SolitonParams":
        """
        Build fixed-point data from alpha and the differences d1 = a1 - a2, d2 = a2 - a3.
        """
        total = -(lam + alpha) / 3.0
        a2 = (total - d1 + d2) / 3.0
        return cls.fixed(a2 + d1, a2, a2 - d2, lam)

    @classmethod
    def so4(cls, alpha: float, lam: float = -1.0) -> "SolitonParams":
        return cls.fixed_from_alpha(alpha, 0.0, 0.0, lam)


class PhaseState(FrozenModel):
    t: pydantic.PositiveFloat
    xi: float
    L: Triple
    R: Triple

    def to_array(self) -> np.ndarray:
        return np.array([self.xi, *self.L, *self.R], dtype=float)

    @classmethod
    def from_array(cls, t: float, y: Sequence[float]) -> "PhaseState":
        y = np.asarray(y, dtype=float)
        return cls(
            t=float(t),
            xi=float(y[0]),
            L=(float(y[1]), float(y[2]), float(y[3])),
            R=(float(y[4]), float(y[5]), float(y[6])),
        )


class MetricSample(FrozenModel):
    t: float
    f: Triple
    f_prime: Triple
    u_prime: float


class DefectPair(FrozenModel):
    first: float
    second: float
    applicable: bool = True


class Trajectory(BaseModel):
    """
    Output of the flow engine.

    `y` always holds the 7 embedded phase components; reduced systems are lifted onto the
    full state (L3 = L2, R3 = R2 for u2 and so on). For the slow system `t` holds the slow
    time s and column 0 holds xi = 1/calL.
    """

    model_config = pydantic.ConfigDict(arbitrary_types_allowed=True)

    system: System
    lam: float
    t: np.ndarray
    y: np.ndarray
    event: TrajectoryEvent
    steps: int = 0
    message: str = ""
    dense: Optional[Any] = pydantic.Field(default=None, exclude=True)
    params: Optional[SolitonParams] = None

    @pydantic.model_validator(mode="after")
    def trajectory_validate(self) -> "Trajectory":
        if self.y.ndim != 2 or self.y.shape[1] != 7 or self.y.shape[0] != self.t.shape[0]:
            raise ValueError(f"trajectory shape mismatch {self.t.shape} {self.y.shape}")
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        return self

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.t[-1], self.y[-1])

    def states(self) -> list[PhaseState]:
        return [PhaseState.from_array(t, y) for t, y in zip(self.t, self.y)]


def su2_field(t: float, y: np.ndarray, lam: float) -> np.ndarray:
    xi = y[0]
    L = y[1:4]
    R = y[4:7]
    out = np.empty(7)
    out[0] = -np.dot(L, L) - lam
    out[1:4] = -xi * L + 2.0 * R * R - 2.0 * (R[_J] - R[_K]) ** 2 - lam
    out[4:7] = R * (L - L[_J] - L[_K])
    return out


def u2_field(t: float, y: np.ndarray, lam: float) -> np.ndarray:
    full = su2_field(t, u2_embed(y), lam)
    return full[[0, 1, 2, 4, 5]]


def beta0_field(t: float, y: np.ndarray, lam: float) -> np.ndarray:
    xi, L1, L2 = y
    return np.array([-L1 * L1 - 2.0 * L2 * L2 - lam, -xi * L1 - lam, -xi * L2 - lam])


def so4_field(t: float, y: np.ndarray, lam: float) -> np.ndarray:
    xi, L, R = y
    return np.array([-3.0 * L * L - lam, -xi * L + 2.0 * R * R - lam, -R * L])


def slow_field(s: float, z: np.ndarray, lam: float) -> np.ndarray:
    ell = z[0]
    L = z[1:4]
    R = z[4:7]
    out = np.empty(7)
    out[0] = ell**3 * (np.dot(L, L) + lam)
    out[1:4] = -L + ell * (2.0 * R * R - 2.0 * (R[_J] - R[_K]) ** 2 - lam)
    out[4:7] = ell * R * (L - L[_J] - L[_K])
    return out


def u2_embed(y: np.ndarray) -> np.ndarray:
    return np.array([y[0], y[1], y[2], y[2], y[3], y[4], y[4]])


def beta0_embed(y: np.ndarray) -> np.ndarray:
    return np.array([y[0], y[1], y[2], y[2], 0.0, 0.0, 0.0])


def so4_embed(y: np.ndarray) -> np.ndarray:
    return np.array([y[0], y[1], y[1], y[1], y[2], y[2], y[2]])


def slow_embed(z: np.ndarray) -> np.ndarray:
    xi = 1.0 / z[0] if abs(z[0]) > GUARD else math.copysign(math.inf, z[0] or 1.0)
    return np.concatenate(([xi], z[1:7]))


def restrict(system: System, y: np.ndarray) -> np.ndarray:
    """Project a 7-component phase vector onto the native coordinates of `system`."""
    if system is System.su2:
        return np.array(y, dtype=float)
    if system is System.u2:
        return np.array([y[0], y[1], y[2], y[4], y[5]], dtype=float)
    if system is System.beta0:
        return np.array([y[0], y[1], y[2]], dtype=float)
    if system is System.so4:
        return np.array([y[0], y[1], y[4]], dtype=float)
    return np.concatenate(([1.0 / y[0]], y[1:7]))


FIELDS = {
    System.su2: su2_field,
    System.u2: u2_field,
    System.beta0: beta0_field,
    System.so4: so4_field,
    System.slow: slow_field,
}

EMBEDDINGS = {
    System.su2: lambda y: np.asarray(y, dtype=float),
    System.u2: u2_embed,
    System.beta0: beta0_embed,
    System.so4: so4_embed,
    System.slow: slow_embed,
}


def _check_u2(s: PhaseState) -> None:
    scale = 1.0 + max(abs(v) for v in (*s.L, *s.R))
    if abs(s.L[1] - s.L[2]) > SYMMETRY_TOL * scale or abs(s.R[1] - s.R[2]) > SYMMETRY_TOL * scale:
        raise SymmetryError(f"state leaves the U(2) locus: L={s.L}, R={s.R}")


def rhs_su2(s: PhaseState, lam: float) -> PhaseVector:
    return su2_field(s.t, s.to_array(), lam)


def rhs_u2(s: PhaseState, lam: float) -> PhaseVector:
    """
    U(2) reduction on the locus L2 = L3, R2 = R3, lifted back to 7 components.

    Raises:
        SymmetryError: if the state breaks the U(2) locus beyond tolerance.
    """
    _check_u2(s)
    native = u2_field(s.t, restrict(System.u2, s.to_array()), lam)
    return u2_embed(native)


def rhs_reduced_beta0(s: PhaseState, lam: float) -> PhaseVector:
    """
    The degenerate beta = 0 system in (xi, L1, L2); R1 vanishes identically there and the
    remaining R components decouple, so the R slots of the result are zero.
    """
    native = beta0_field(s.t, restrict(System.beta0, s.to_array()), lam)
    return beta0_embed(native)


def rhs_so4(s: PhaseState, lam: float) -> PhaseVector:
    native = so4_field(s.t, restrict(System.so4, s.to_array()), lam)
    return so4_embed(native)


def rhs_slow(z: Sequence[float], lam: float = -1.0) -> PhaseVector:
    """
    Slow-time system in (calL, L1, L2, L3, R1, R2, R3) with calL = 1/xi and ds = xi dt.

    The origin is a fixed point; for xi > 0 the result equals rhs_su2 multiplied by 1/xi with
    the xi component replaced by d(1/xi)/ds.
    """
    return slow_field(0.0, np.asarray(z, dtype=float), lam)


def to_slow(s: PhaseState) -> np.ndarray:
    if abs(s.xi) < GUARD:
        raise ParameterError("slow coordinates need xi != 0")
    return np.concatenate(([1.0 / s.xi], s.L, s.R))


def jacobian_su2(y: Sequence[float], lam: float) -> np.ndarray:
    """Analytic Jacobian of the 7-equation system; lambda only shifts, so it drops out."""
    y = np.asarray(y, dtype=float)
    xi = y[0]
    L = y[1:4]
    R = y[4:7]
    jac = np.zeros((7, 7))
    jac[0, 1:4] = -2.0 * L
    for i in range(3):
        j, k = _J[i], _K[i]
        row = 1 + i
        jac[row, 0] = -L[i]
        jac[row, 1 + i] = -xi
        jac[row, 4 + i] = 4.0 * R[i]
        jac[row, 4 + j] = -4.0 * (R[j] - R[k])
        jac[row, 4 + k] = 4.0 * (R[j] - R[k])
        row = 4 + i
        jac[row, 1 + i] = R[i]
        jac[row, 1 + j] = -R[i]
        jac[row, 1 + k] = -R[i]
        jac[row, 4 + i] = L[i] - L[j] - L[k]
    return jac


def einstein_critical_point(lam: float = -1.0) -> np.ndarray:
    """L_i = sqrt(-lambda/3), R_i = 0, xi = L1 + L2 + L3."""
    if lam >= 0.0:
        raise ParameterError(f"critical points exist only for lambda < 0, got {lam}")
    ell = math.sqrt(-lam / 3.0)
    return np.array([3.0 * ell, ell, ell, ell, 0.0, 0.0, 0.0])


def kahler_critical_point(lam: float = -1.0) -> np.ndarray:
    """The unstable U(2) Kähler–Einstein equilibrium, the limit of the Kähler–Einstein R^4."""
    if lam >= 0.0:
        raise ParameterError(f"critical points exist only for lambda < 0, got {lam}")
    c = math.sqrt(-lam)
    r6 = math.sqrt(6.0)
    return c * np.array([2.0 * r6 / 3.0, 2.0 / r6, 1.0 / r6, 1.0 / r6, 1.0 / r6, 0.0, 0.0])


def einstein_linearization(lam: float = -1.0) -> np.ndarray:
    """
    Linearization at the Einstein critical point restricted to the Einstein locus
    xi = L1 + L2 + L3, in coordinates (L1, L2, L3, R1, R2, R3).
    """
    jac = jacobian_su2(einstein_critical_point(lam), lam)
    reduced = jac[1:, 1:].copy()
    reduced[:, :3] += jac[1:, [0]]
    return reduced


def metric_from_state(s: PhaseState) -> MetricSample:
    R = np.array(s.R)
    if np.any(R <= 0.0):
        raise ReconstructionError(f"non-positive R at t={s.t}: {s.R}")
    f = 1.0 / np.sqrt(R[_J] * R[_K])
    fp = np.array(s.L) * f
    return MetricSample(
        t=s.t,
        f=tuple(float(v) for v in f),
        f_prime=tuple(float(v) for v in fp),
        u_prime=float(sum(s.L) - s.xi),
    )


def _cumulative(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    if len(t) < 3:
        return integrate.cumulative_trapezoid(values, x=t, initial=0.0)
    return integrate.cumulative_simpson(values, x=t, initial=0.0)


def reconstruct_metric(
    traj: Trajectory, params: Optional[SolitonParams] = None
) -> list[MetricSample]:
    """
    Recover (f1, f2, f3, u') along a trajectory.

    Regular trajectories invert R_i = f_i / (f_j f_k), giving f_i^2 = 1 / (R_j R_k). On the
    degenerate beta = 0 system R1 vanishes identically, so f1 and f2 = f3 are recovered by
    quadrature of L1 and L2 instead, anchored at f1(t0) = n t0 and f2(t0) = 1.

    Args:
        traj: The trajectory to invert.
        params: The parameters that produced it; a Bolt with beta = 0 selects the
            degenerate reconstruction.

    Returns:
        One MetricSample per trajectory sample.

    Raises:
        ReconstructionError: if some R_i is non-positive on a regular trajectory.
    """
    degenerate = traj.system is System.beta0 or (
        params is not None and params.is_bolt and params.boundary.degenerate
    )
    L = traj.y[:, 1:4]
    u_prime = L.sum(axis=1) - traj.y[:, 0]
    if degenerate:
        n = params.boundary.n if params is not None and params.is_bolt else 1
        f1 = n * traj.t[0] * np.exp(_cumulative(L[:, 0], traj.t))
        f2 = np.exp(_cumulative(L[:, 1], traj.t))
        f = np.column_stack([f1, f2, f2])
    else:
        R = traj.y[:, 4:7]
        if np.any(R <= 0.0):
            bad = int(np.argmax(np.any(R <= 0.0, axis=1)))
            raise ReconstructionError(f"non-positive R at t={traj.t[bad]}: {R[bad]}")
        f = 1.0 / np.sqrt(R[:, _J] * R[:, _K])
    fp = L * f
    return [
        MetricSample(
            t=float(t),
            f=tuple(float(v) for v in fi),
            f_prime=tuple(float(v) for v in dfi),
            u_prime=float(up),
        )
        for t, fi, dfi, up in zip(traj.t, f, fp, u_prime)
    ]


def einstein_defect(s: PhaseState) -> float:
    return s.xi - sum(s.L)


def kahler_defects(
    s: PhaseState,
    lam: float,
    variant: KahlerVariant,
    *,
    alpha: float = 0.0,
    n: int = 1,
    epsilon: int = 1,
    i: int = 2,
    k: int = 1,
) -> DefectPair:
    """
    Evaluate the pair of conserved quantities that vanish on a Kähler locus.

    - fixed: (R_k - L_i, xi - L_k - 2 R_k - alpha / R_i), indices 1-based.
    - bolt: (L2 - eps R1, xi - L1 - 2 eps R1 - alpha / (n R2)); holds when gamma = 0 and
      (4 - 2 eps n) beta = n lambda.
    - ke_n2: (2 lambda + 4 R3 (L3 - R1 - R2 + R3), 2 R1 - 2 R2 + L1 - L2); the n = 2
      Kähler–Einstein locus alpha = 0, gamma = lambda / 4.

    A pair whose denominator is below the guard comes back with applicable = False.
    """
    L = s.L
    R = s.R
    if variant is KahlerVariant.fixed:
        li, lk, ri, rk = L[i - 1], L[k - 1], R[i - 1], R[k - 1]
        first = rk - li
        if abs(ri) < GUARD:
            return DefectPair(first=first, second=math.nan, applicable=False)
        return DefectPair(first=first, second=s.xi - lk - 2.0 * rk - alpha / ri)
    if variant is KahlerVariant.bolt:
        first = L[1] - epsilon * R[0]
        if abs(n * R[1]) < GUARD:
            return DefectPair(first=first, second=math.nan, applicable=False)
        return DefectPair(
            first=first, second=s.xi - L[0] - 2.0 * epsilon * R[0] - alpha / (n * R[1])
        )
    z_bar = 2.0 * lam + 4.0 * R[2] * (L[2] - R[0] - R[1] + R[2])
    y_bar = 2.0 * R[0] - 2.0 * R[1] + L[0] - L[1]
    return DefectPair(first=z_bar, second=y_bar)


def fixed_kahler_rate(s: PhaseState, lam: float, i: int = 2, k: int = 1) -> float:
    """lambda + R_k (xi + L_k - 4 R_i), the rate of R_k - L_i on the fixed-point Kähler locus."""
    return lam + s.R[k - 1] * (s.xi + s.L[k - 1] - 4.0 * s.R[i - 1])


def permute_state(s: PhaseState, perm: Sequence[int]) -> PhaseState:
    perm = list(perm)
    return s.model_copy(
        update={"L": tuple(s.L[p] for p in perm), "R": tuple(s.R[p] for p in perm)}
    )


def reverse_state(s: PhaseState, T: float) -> PhaseState:
    """The same orbit seen from the far end, t -> T - t."""
    if s.t >= T:
        raise ParameterError(f"cannot reverse a state at t={s.t} about T={T}")
    return PhaseState(t=T - s.t, xi=-s.xi, L=tuple(-v for v in s.L), R=s.R)


def rescale_state(s: PhaseState, c: float) -> PhaseState:
    """If y(t) solves the system for lambda then c y(c t) solves it for c^2 lambda."""
    return PhaseState(
        t=s.t / c, xi=c * s.xi, L=tuple(c * v for v in s.L), R=tuple(c * v for v in s.R)
    )


def rescale_params(params: SolitonParams, c: float) -> SolitonParams:
    lam = c * c * params.lam
    b = params.boundary
    if isinstance(b, FixedPoint):
        return SolitonParams.fixed(*(c * c * a for a in b.a), lam=lam)
    gamma_power = {1: 4, 2: 2, 4: 1}.get(b.n, 0)
    return SolitonParams.bolt(
        b.n, c * c * b.alpha, c * c * b.beta, b.gamma * c**gamma_power, lam=lam
    )


def u2_einstein_constant(n: int, beta: float) -> float:
    """Constant c of the U(2)-invariant Einstein bolts; it vanishes at beta = n / (2n - 4)."""
    return (2.0 * (2 + n) * beta + n) * (2.0 * (2 - n) * beta + n) / (4.0 * n**3 * beta)
