from __future__ import annotations

import math

import numpy as np
import pytest

from soliton import reference_solutions
from soliton.compact_shooter import closing_defect
from soliton.exceptions import DomainError, UnknownSolutionError
from soliton.flow_engine import StopConditions, integrate, sample
from soliton.phase_core import FixedPoint, permute_state, reverse_state
from soliton.schema import System
from soliton.series_boundary import extract_end_params, init_beta0, init_state

COMPACT = [name for name, entry in reference_solutions.CATALOG.items() if entry.compact]


@pytest.mark.parametrize("name", reference_solutions.names())
def test_residual_vanishes(name: str) -> None:
    assert reference_solutions.max_residual(name) < 1e-9


def test_oracle_check_covers_catalog() -> None:
    report = reference_solutions.oracle_check(count=20)
    assert set(report) == set(reference_solutions.names())
    assert max(report.values()) < 1e-9


def test_catalog_contents() -> None:
    assert len(reference_solutions.names()) == 10
    assert set(COMPACT) == {
        "round_s4_so3",
        "fubini_study_so3",
        "round_s4_fixed",
        "fubini_study_su2",
        "s2xs2",
    }
    fs = reference_solutions.lookup("fubini_study_su2")
    assert fs.length == pytest.approx(math.sqrt(6.0) * math.pi / 2.0)


@pytest.mark.parametrize("name", reference_solutions.names())
def test_series_start_integrates_onto_the_solution(name: str) -> None:
    entry = reference_solutions.lookup(name)
    if entry.system is System.beta0:
        start = init_beta0(entry.params.alpha, entry.lam, 1e-3)
    else:
        start = init_state(entry.params, 1e-3)
    stops = StopConditions(t_max=0.5, critical_radius=None)
    traj = integrate(start, entry.lam, entry.system, stops, 1e-11)
    got = sample(traj, 0.5)
    _, want = reference_solutions.evaluate(name, 0.5)
    np.testing.assert_allclose(got.to_array(), want.to_array(), atol=1e-5)


@pytest.mark.parametrize("name", COMPACT)
def test_far_end_parameters(name: str) -> None:
    entry = reference_solutions.lookup(name)
    d = 1e-3
    t = entry.domain[1] - d
    metric, state = reference_solutions.evaluate(name, t)
    value, perm = closing_defect(metric, entry.closing)
    assert value < 1e-4
    flipped = reverse_state(permute_state(state, perm), 2.0 * t)
    estimate = extract_end_params(flipped, entry.closing.kind, entry.lam, entry.closing.n)
    assert t + estimate.distance == pytest.approx(entry.domain[1], abs=1e-5)

    got, want = estimate.params.boundary, entry.end_params.boundary
    if isinstance(want, FixedPoint):
        np.testing.assert_allclose(got.a, want.a, atol=1e-5)
    else:
        assert got.n == want.n
        assert got.alpha == pytest.approx(want.alpha, abs=1e-5)
        assert got.beta == pytest.approx(want.beta, abs=1e-5)
        # f2 and f3 may come out in either order
        assert abs(got.gamma) == pytest.approx(want.gamma, abs=1e-5)


def test_gaussian_expander_values() -> None:
    metric, state = reference_solutions.evaluate("gaussian_expander", 2.0)
    assert metric.f == (2.0, 2.0, 2.0)
    assert metric.u_prime == -2.0
    assert state.xi == pytest.approx(3.5)


def test_lookup_errors() -> None:
    with pytest.raises(UnknownSolutionError):
        reference_solutions.lookup("taub_nut")
    with pytest.raises(DomainError):
        reference_solutions.evaluate("round_s4_fixed", 10.0)
    with pytest.raises(DomainError):
        reference_solutions.residual("hyperbolic", 0.0)


def test_dump_rows() -> None:
    rows = reference_solutions.dump("s2xs2", [0.5, 1.0])
    assert len(rows) == 2
    assert all(len(row) == 12 for row in rows)
    assert rows[1][0] == 1.0
