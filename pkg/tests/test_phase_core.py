from __future__ import annotations

import math

import numpy as np
import pydantic
import pytest

from soliton.exceptions import ParameterError, ReconstructionError, SymmetryError
from soliton.phase_core import (
    PhaseState,
    SolitonParams,
    Trajectory,
    einstein_critical_point,
    einstein_defect,
    einstein_linearization,
    fixed_kahler_rate,
    jacobian_su2,
    kahler_critical_point,
    kahler_defects,
    metric_from_state,
    permute_state,
    rescale_params,
    rescale_state,
    reverse_state,
    rhs_reduced_beta0,
    rhs_slow,
    rhs_so4,
    rhs_su2,
    rhs_u2,
    su2_field,
    to_slow,
    u2_einstein_constant,
)
from soliton.schema import KahlerVariant, System, TrajectoryEvent


def _state(f, fp, up, t=0.5) -> PhaseState:
    f = np.asarray(f, dtype=float)
    L = np.asarray(fp, dtype=float) / f
    R = f / (f[[1, 2, 0]] * f[[2, 0, 1]])
    return PhaseState(t=t, xi=float(L.sum() - up), L=tuple(L), R=tuple(R))


def test_rhs_su2_by_hand() -> None:
    s = PhaseState(t=1.0, xi=1.0, L=(1.0, 0.0, 0.0), R=(0.0, 0.0, 0.0))
    np.testing.assert_allclose(rhs_su2(s, -1.0), [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0])


def test_rhs_su2_generic_state() -> None:
    s = PhaseState(t=1.0, xi=2.0, L=(0.5, 0.25, -0.5), R=(1.0, 2.0, 0.5))
    out = rhs_su2(s, 1.0)
    assert out[0] == pytest.approx(-(0.25 + 0.0625 + 0.25) - 1.0)
    # L1' = -xi L1 + 2 R1^2 - 2 (R2 - R3)^2 - lambda
    assert out[1] == pytest.approx(-1.0 + 2.0 - 2.0 * 1.5**2 - 1.0)
    # R2' = R2 (L2 - L3 - L1)
    assert out[5] == pytest.approx(2.0 * (0.25 + 0.5 - 0.5))


def test_reductions_agree_with_full_system() -> None:
    u2 = PhaseState(t=0.3, xi=3.0, L=(1.2, 0.4, 0.4), R=(0.2, 0.7, 0.7))
    np.testing.assert_allclose(rhs_u2(u2, -1.0), rhs_su2(u2, -1.0), atol=1e-14)

    so4 = PhaseState(t=0.3, xi=3.0, L=(0.9, 0.9, 0.9), R=(0.6, 0.6, 0.6))
    np.testing.assert_allclose(rhs_so4(so4, 1.0), rhs_su2(so4, 1.0), atol=1e-14)

    flat = PhaseState(t=0.3, xi=2.5, L=(1.1, 0.3, 0.3), R=(0.0, 0.0, 0.0))
    reduced = rhs_reduced_beta0(flat, -1.0)
    np.testing.assert_allclose(reduced[:4], rhs_su2(flat, -1.0)[:4], atol=1e-14)
    np.testing.assert_array_equal(reduced[4:], [0.0, 0.0, 0.0])


def test_rhs_u2_rejects_broken_symmetry() -> None:
    s = PhaseState(t=0.3, xi=3.0, L=(1.2, 0.4, 0.5), R=(0.2, 0.7, 0.7))
    with pytest.raises(SymmetryError):
        rhs_u2(s, -1.0)


def test_slow_system_matches_time_change() -> None:
    s = PhaseState(t=2.0, xi=4.0, L=(0.7, 0.5, -0.2), R=(0.3, 0.4, 0.1))
    z = to_slow(s)
    slow = rhs_slow(z, -1.0)
    full = rhs_su2(s, -1.0)
    np.testing.assert_allclose(slow[1:], full[1:] / s.xi, rtol=1e-13)
    assert slow[0] == pytest.approx(-full[0] / s.xi**3)
    np.testing.assert_array_equal(rhs_slow(np.zeros(7)), np.zeros(7))


def test_to_slow_needs_nonzero_xi() -> None:
    with pytest.raises(ParameterError):
        to_slow(PhaseState(t=1.0, xi=0.0, L=(0.0, 0.0, 0.0), R=(1.0, 1.0, 1.0)))


def test_jacobian_matches_finite_differences() -> None:
    rng = np.random.default_rng(7)
    for _ in range(5):
        y = rng.uniform(-1.0, 1.0, 7)
        jac = jacobian_su2(y, -1.0)
        h = 1e-6
        numeric = np.column_stack(
            [
                (su2_field(0.0, y + h * e, -1.0) - su2_field(0.0, y - h * e, -1.0)) / (2 * h)
                for e in np.eye(7)
            ]
        )
        np.testing.assert_allclose(jac, numeric, atol=1e-7)


@pytest.mark.parametrize("lam", [-1.0, -4.0, -0.3])
def test_critical_points_are_equilibria(lam: float) -> None:
    np.testing.assert_allclose(su2_field(0.0, einstein_critical_point(lam), lam), 0.0, atol=1e-14)
    np.testing.assert_allclose(su2_field(0.0, kahler_critical_point(lam), lam), 0.0, atol=1e-14)


def test_critical_points_need_negative_lambda() -> None:
    with pytest.raises(ParameterError):
        einstein_critical_point(1.0)
    with pytest.raises(ParameterError):
        kahler_critical_point(0.0)


def test_einstein_linearization_spectrum() -> None:
    r3 = math.sqrt(3.0)
    values = np.sort(np.linalg.eigvals(einstein_linearization(-1.0)).real)
    np.testing.assert_allclose(
        values, sorted([-2 * r3, -r3, -r3, -1 / r3, -1 / r3, -1 / r3]), atol=1e-12
    )


def test_metric_from_state_inverts_phase_variables() -> None:
    s = _state((1.0, 2.0, 3.0), (0.5, 1.0, -1.0), 0.3)
    m = metric_from_state(s)
    np.testing.assert_allclose(m.f, (1.0, 2.0, 3.0), rtol=1e-14)
    np.testing.assert_allclose(m.f_prime, (0.5, 1.0, -1.0), rtol=1e-14)
    assert m.u_prime == pytest.approx(0.3)
    assert einstein_defect(s) == pytest.approx(-0.3)


def test_metric_from_state_rejects_collapsed_r() -> None:
    s = PhaseState(t=1.0, xi=1.0, L=(1.0, 0.0, 0.0), R=(0.0, 1.0, 1.0))
    with pytest.raises(ReconstructionError):
        metric_from_state(s)


def test_reverse_and_permute() -> None:
    s = PhaseState(t=0.25, xi=3.0, L=(1.0, 2.0, 3.0), R=(4.0, 5.0, 6.0))
    back = reverse_state(s, 2.0)
    assert back.t == pytest.approx(1.75)
    assert back.xi == -3.0
    assert back.L == (-1.0, -2.0, -3.0)
    assert back.R == s.R
    assert reverse_state(back, 2.0) == s

    with pytest.raises(ParameterError):
        reverse_state(s, 0.25)
    with pytest.raises(ParameterError):
        reverse_state(s, 0.1)

    swapped = permute_state(s, (2, 1, 0))
    assert swapped.L == (3.0, 2.0, 1.0)
    assert swapped.R == (6.0, 5.0, 4.0)
    assert swapped.xi == s.xi


def test_rescaling_is_homogeneous() -> None:
    s = PhaseState(t=0.8, xi=2.0, L=(0.3, -0.1, 0.6), R=(0.5, 0.2, 0.9))
    c = 1.7
    np.testing.assert_allclose(
        rhs_su2(rescale_state(s, c), c * c * -1.0), c * c * rhs_su2(s, -1.0), rtol=1e-13
    )


def test_rescale_params() -> None:
    fixed = rescale_params(SolitonParams.fixed(0.1, 0.2, 0.3, lam=-1.0), 2.0)
    assert fixed.lam == -4.0
    assert fixed.boundary.a == pytest.approx((0.4, 0.8, 1.2))

    bolt = rescale_params(SolitonParams.bolt(1, 0.5, 0.25, 0.1, lam=-1.0), 2.0)
    assert bolt.boundary.alpha == pytest.approx(2.0)
    assert bolt.boundary.beta == pytest.approx(1.0)
    assert bolt.boundary.gamma == pytest.approx(1.6)

    four = rescale_params(SolitonParams.bolt(4, 0.5, 0.25, 0.1, lam=-1.0), 2.0)
    assert four.boundary.gamma == pytest.approx(0.2)


def test_soliton_params_validation() -> None:
    with pytest.raises(ParameterError):
        SolitonParams.bolt(3, 0.1, 0.5, 0.2)
    with pytest.raises(ParameterError):
        SolitonParams.bolt(2, 0.1, -0.5)

    params = SolitonParams.fixed_from_alpha(0.4, d1=0.2, d2=0.1, lam=-1.0)
    a1, a2, a3 = params.boundary.a
    assert params.alpha == pytest.approx(0.4)
    assert a1 - a2 == pytest.approx(0.2)
    assert a2 - a3 == pytest.approx(0.1)

    so4 = SolitonParams.so4(0.5)
    assert so4.boundary.a == pytest.approx(((1.0 - 0.5) / 9.0,) * 3)


def test_params_json_round_trip() -> None:
    params = SolitonParams.bolt(2, 0.3, 0.4, 0.05, lam=-1.0)
    assert SolitonParams.model_validate(params.to_primitive()) == params


def test_phase_state_needs_positive_time() -> None:
    with pytest.raises(pydantic.ValidationError):
        PhaseState(t=0.0, xi=1.0, L=(0.0, 0.0, 0.0), R=(0.0, 0.0, 0.0))


def test_trajectory_shape_is_checked() -> None:
    with pytest.raises(pydantic.ValidationError):
        Trajectory(
            system=System.su2,
            lam=-1.0,
            t=np.array([0.1, 0.2]),
            y=np.zeros((2, 6)),
            event=TrajectoryEvent.horizon,
        )


def test_kahler_defects_vanish_on_constructed_states() -> None:
    alpha, n = 0.3, 2
    R = (0.4, 0.8, 0.8)
    L = (0.9, 0.4, 0.4)
    xi = L[0] + 2.0 * R[0] + alpha / (n * R[1])
    s = PhaseState(t=0.5, xi=xi, L=L, R=R)
    pair = kahler_defects(s, -1.0, KahlerVariant.bolt, alpha=alpha, n=n, epsilon=1)
    assert pair.applicable
    assert pair.first == pytest.approx(0.0)
    assert pair.second == pytest.approx(0.0, abs=1e-14)

    flat = s.model_copy(update={"R": (0.4, 0.0, 0.0)})
    assert not kahler_defects(flat, -1.0, KahlerVariant.bolt, alpha=alpha, n=n).applicable

    fixed = PhaseState(t=0.5, xi=2.0, L=(0.6, 0.5, 0.5), R=(0.5, 0.25, 0.25))
    pair = kahler_defects(fixed, -1.0, KahlerVariant.fixed, alpha=0.0, i=2, k=1)
    assert pair.first == pytest.approx(0.0)
    assert pair.second == pytest.approx(2.0 - 0.6 - 1.0)
    assert fixed_kahler_rate(fixed, -1.0) == pytest.approx(-1.0 + 0.5 * (2.0 + 0.6 - 1.0))


@pytest.mark.parametrize("n", [3, 5, 6])
def test_u2_einstein_constant_zero(n: int) -> None:
    assert u2_einstein_constant(n, n / (2 * n - 4)) == pytest.approx(0.0, abs=1e-14)
    assert u2_einstein_constant(n, 0.1) != 0.0
