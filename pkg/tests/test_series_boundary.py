from __future__ import annotations

import numpy as np
import pydantic
import pytest

from soliton.exceptions import ParameterError, SeriesRangeError
from soliton.flow_engine import StopConditions, integrate
from soliton.phase_core import PhaseState, SolitonParams, permute_state
from soliton.schema import ClosingKind, System
from soliton.series_boundary import (
    SeriesOrder,
    desingularization_spectrum,
    extract_end_params,
    init_beta0,
    init_bolt,
    init_fixed,
    init_so4,
    init_state,
)


def test_init_fixed_first_order_terms() -> None:
    d = 1e-3
    params = SolitonParams.fixed(0.1, 0.2, 0.3, lam=-1.0)
    s = init_fixed(params, d)
    a = np.array([0.1, 0.2, 0.3])
    assert s.t == d
    assert s.xi == pytest.approx(3.0 / d + (a.sum() + params.alpha) * d, rel=1e-14)
    np.testing.assert_allclose(s.L, 1.0 / d + a * d, rtol=1e-14)
    np.testing.assert_allclose(s.R[0], 1.0 / d + (0.1 - 0.2 - 0.3) * d / 2.0, rtol=1e-14)


@pytest.mark.parametrize("delta", [0.0, -1e-3, 0.02])
def test_delta_out_of_range(delta: float) -> None:
    params = SolitonParams.fixed(0.1, 0.2, 0.3, lam=-1.0)
    with pytest.raises(SeriesRangeError):
        init_fixed(params, delta)


def test_init_bolt_generic_column() -> None:
    d = 1e-3
    n, alpha, beta, lam = 3, 0.4, 0.7, -1.0
    s = init_bolt(SolitonParams.bolt(n, alpha, beta, lam=lam), d)
    assert s.L[1] == s.L[2]
    assert s.R[1] == s.R[2]
    assert s.R[0] == pytest.approx(beta * d)
    assert s.L[1] == pytest.approx((4 * beta - n * lam) / (2 * n) * d)
    assert s.xi == pytest.approx(1.0 / d + (2 * n * alpha + 8 * beta - 3 * n * lam) / (3 * n) * d)


def test_gamma_splits_the_exceptional_columns() -> None:
    d = 1e-3
    two = init_bolt(SolitonParams.bolt(2, 0.1, 0.3, 0.2, lam=1.0), d)
    assert two.L[1] - two.L[2] == pytest.approx(2 * 0.2 * d)

    four = init_bolt(SolitonParams.bolt(4, 0.1, 0.3, 0.2, lam=1.0), d)
    assert four.L[1] - four.L[2] == pytest.approx(0.2)
    assert four.R[1] - four.R[2] == pytest.approx(0.1)

    wide = 1e-2
    one = init_bolt(SolitonParams.bolt(1, 0.1, 0.3, 0.2, lam=1.0), wide)
    assert one.R[1] - one.R[2] == pytest.approx(2 * 0.2 * wide**3, rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_gamma_sign_swaps_the_last_two_indices(n: int) -> None:
    d = 1e-3
    plus = init_bolt(SolitonParams.bolt(n, 0.1, 0.3, 0.2, lam=1.0), d)
    minus = init_bolt(SolitonParams.bolt(n, 0.1, 0.3, -0.2, lam=1.0), d)
    swapped = permute_state(plus, (0, 2, 1))
    assert minus.xi == swapped.xi
    np.testing.assert_allclose(minus.L, swapped.L, rtol=1e-15, atol=0.0)
    np.testing.assert_allclose(minus.R, swapped.R, rtol=1e-15, atol=0.0)


@pytest.mark.parametrize(
    "a, lam", [((0.05, -0.02, 0.11), 1.0), ((-1 / 9, -1 / 9, -1 / 9), 1.0), ((0.1, 0.0, 0.0), -1.0)]
)
def test_series_agrees_with_the_flow(a: tuple[float, float, float], lam: float) -> None:
    params = SolitonParams.fixed(*a, lam=lam)
    near, far = 1e-4, 1e-2
    stops = StopConditions(t_max=far, critical_radius=None)
    traj = integrate(init_fixed(params, near), lam, System.su2, stops, 1e-12, params=params)
    series = init_fixed(params, far).to_array()
    relative = np.abs(traj.y[-1] - series) / np.abs(series)
    assert traj.t[-1] == pytest.approx(far)
    assert np.max(relative) < 10.0 * far**2


def test_init_bolt_argument_checks() -> None:
    with pytest.raises(ParameterError):
        init_bolt(SolitonParams.fixed(0.1, 0.1, 0.1, lam=-1.0))
    with pytest.raises(ParameterError):
        init_bolt(SolitonParams.bolt(1, 0.1, 0.3), order=SeriesOrder(order=1))
    with pytest.raises(pydantic.ValidationError):
        SeriesOrder(order=2)


def test_beta0_start_is_the_bolt_column_at_zero_beta() -> None:
    d = 1e-3
    flat = init_beta0(0.6, -1.0, d)
    bolt = init_bolt(SolitonParams.bolt(3, 0.6, 0.0, lam=-1.0), d)
    assert flat.xi == pytest.approx(bolt.xi, rel=1e-14)
    np.testing.assert_allclose(flat.L, bolt.L, rtol=1e-14)
    assert flat.R == (0.0, 0.0, 0.0)


def test_init_so4_and_dispatch() -> None:
    so4 = init_so4(0.5, -1.0, 1e-3)
    assert so4 == init_fixed(SolitonParams.so4(0.5, -1.0), 1e-3)
    assert len(set(so4.L)) == 1

    params = SolitonParams.bolt(2, 0.1, 0.3, 0.0, lam=1.0)
    assert init_state(params, 1e-3) == init_bolt(params, 1e-3)


def test_fixed_point_spectrum() -> None:
    np.testing.assert_allclose(
        desingularization_spectrum("fixed"), [-5.0, -5.0, -3.0, -2.0, 1.0, 1.0, 1.0], atol=1e-10
    )
    values = desingularization_spectrum(3)
    assert values.shape == (7,)
    assert np.all(np.diff(values) >= 0.0)


def test_extract_fixed_end_is_exact_on_the_series() -> None:
    d = 1e-3
    params = SolitonParams.fixed(0.05, -0.02, 0.11, lam=1.0)
    estimate = extract_end_params(init_fixed(params, d), ClosingKind.fixed, 1.0)
    assert estimate.distance == pytest.approx(d, rel=1e-9)
    np.testing.assert_allclose(estimate.params.boundary.a, params.boundary.a, atol=1e-9)


@pytest.mark.parametrize(
    "n, gamma", [(3, 0.0), (2, 0.15), (4, 0.15), (1, 0.15), (5, 0.0)]
)
def test_extract_bolt_end_recovers_parameters(n: int, gamma: float) -> None:
    d = 3e-3
    params = SolitonParams.bolt(n, 0.4, 0.7, gamma, lam=1.0)
    kind = ClosingKind.bolt4 if n == 4 else ClosingKind.bolt
    estimate = extract_end_params(init_bolt(params, d), kind, 1.0, n)
    b = estimate.params.boundary
    assert estimate.distance == pytest.approx(d, rel=1e-4)
    assert b.n == n
    assert b.alpha == pytest.approx(0.4, abs=1e-4)
    assert b.beta == pytest.approx(0.7, abs=1e-4)
    assert b.gamma == pytest.approx(gamma, abs=1e-4)


def test_extract_end_argument_checks() -> None:
    s = init_bolt(SolitonParams.bolt(3, 0.4, 0.7, lam=1.0), 1e-3)
    with pytest.raises(ParameterError):
        extract_end_params(s, ClosingKind.bolt, 1.0)

    far = PhaseState(t=1.0, xi=3.0, L=(1.0, 1.0, 1.0), R=(0.5, 0.5, 0.5))
    with pytest.raises(ParameterError):
        extract_end_params(far, ClosingKind.fixed, 1.0)
