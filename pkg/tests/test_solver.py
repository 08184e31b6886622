import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmc1 import solver
from cmc1.curve import make_params
from cmc1.errors import ExcludedRootError, NoSignChangeError, ParameterError
from cmc1.monodromy import DS, DS_ELLIPTIC, DS_HYPERBOLIC, DS_PARABOLIC, H3


@pytest.mark.parametrize("k, c", [(1, -0.0467552), (2, -0.505010)])
def test_h_gap_small_at_table_roots(k, c):
    assert abs(solver.h_gap(make_params(k, 2.0, c))) <= 1e-4


def test_h_gap_generic():
    assert abs(solver.h_gap(make_params(1, 2.0, 0.3))) > 0.01


def test_scan_k1_negative():
    samples = solver.scan(1, 2.0, -0.7, -0.01, 200)
    brackets = solver.find_brackets(samples)
    hits = [b for b in brackets if b[0] <= -0.5577 <= b[1] or b[0] <= -0.04676 <= b[1]]
    assert len(hits) >= 2


def test_scan_k1_positive():
    brackets = solver.find_brackets(solver.scan(1, 2.0, 0.5, 0.9, 100))
    assert any(a <= 0.704094 <= b for a, b in brackets)


def test_scan_empty_and_exclusion():
    assert solver.scan(1, 2.0, 0.5, 0.4) == []
    assert solver.scan(1, 2.0, -1e-4, 1e-4, 5) == []


def test_scan_parallel_same_order(monkeypatch):
    a = solver.scan(2, 2.0, 0.2, 0.6, 12, workers=1)
    monkeypatch.setenv("CMC1_THREADS", "3")
    b = solver.scan(2, 2.0, 0.2, 0.6, 12)
    assert [s.c for s in a] == [s.c for s in b]
    assert [s.gap for s in a] == [s.gap for s in b]


def test_brackets_never_straddle_zero():
    samples = solver.scan(2, 2.0, -0.2, 0.2, 41)
    assert all(a * b > 0 for a, b in solver.find_brackets(samples))


@pytest.mark.parametrize(
    "k, bracket, c, h, ambient",
    [
        (1, (-0.05, -0.04), -0.0467552, -6.91432, H3),
        (20, (-0.008, -0.007), -0.00765905, -2.17341, H3),
        (3, (0.45, 0.51), 0.482090, -0.0678105, DS_HYPERBOLIC),
    ],
)
def test_find_root_examples(k, bracket, c, h, ambient):
    res = solver.find_root(k, 2.0, bracket)
    assert res.c_star == pytest.approx(c, abs=2e-6)
    assert res.h == pytest.approx(h, rel=1e-5, abs=1e-6)
    assert res.ambient == ambient
    assert res.gap_residual <= 1e-8
    assert res.membership_residual <= 1e-6
    assert res.bracket == bracket


def test_find_root_errors():
    with pytest.raises(NoSignChangeError):
        solver.find_root(1, 2.0, (0.1, 0.2))
    with pytest.raises(ParameterError):
        solver.find_root(1, 2.0, (-0.1, 0.1))


def test_result_invariants():
    for res in solver.solve_all(2, 2.0):
        if res.ambient == H3:
            assert abs(res.h) > 1
            assert res.alpha**2 - res.beta**2 == pytest.approx(1, abs=1e-9)
            assert solver.h_from_frame(res.alpha, res.beta, H3) == pytest.approx(res.h, abs=1e-9)
        else:
            assert abs(res.h) < 1
            assert res.alpha * res.beta == pytest.approx(-0.5, abs=1e-9)
            assert (res.discriminant > 0) == (res.ambient == DS_ELLIPTIC)
        assert res.gap_residual <= 1e-8
        d = res.to_dict()
        assert d["c_star"] == res.c_star and isinstance(d["bracket"], list)


def test_classify_examples():
    d = solver.discriminant(-0.557726, 1, 2.0)
    assert d == pytest.approx(1 + 8 * 0.557726 * math.sqrt(2)) and d == pytest.approx(7.31, abs=0.01)
    assert solver.classify(0.130869, -0.557726, 1, 2.0) == DS_ELLIPTIC
    assert solver.discriminant(0.704094, 1, 2.0) == pytest.approx(-6.97, abs=0.01)
    assert solver.classify(0.221228, 0.704094, 1, 2.0) == DS_HYPERBOLIC
    assert solver.classify(-6.91432, 0.3, 1, 2.0) == H3
    c_par = 1 / (4 * 2 * math.sqrt(2))
    assert solver.classify(0.5, c_par, 1, 2.0) == DS_PARABOLIC
    with pytest.raises(ExcludedRootError):
        solver.classify(1 + 1e-8, 0.1, 1, 2.0)


def test_initial_frame_examples():
    a, b = solver.initial_frame(0.0, DS)
    assert b == pytest.approx(2 ** -0.5) and a == pytest.approx(-(2 ** -0.5))
    a, b = solver.initial_frame(-0.6, DS)
    assert (a, b) == pytest.approx((-0.5, 1.0))
    h = 3 / (2 * math.sqrt(2))
    assert solver.h_from_frame(math.sqrt(2), 1.0, H3) == pytest.approx(h)
    a, b = solver.initial_frame(h, H3)
    assert b == pytest.approx(1.0, abs=1e-10) and a == pytest.approx(math.sqrt(2))
    with pytest.raises(ParameterError):
        solver.initial_frame(0.5, H3)
    with pytest.raises(ParameterError):
        solver.initial_frame(2.0, DS)
    with pytest.raises(ParameterError):
        solver.initial_frame(-1.0, DS)


@given(st.floats(1.000001, 1e4), st.booleans())
def test_round_trip_h3(mag, neg):
    h = -mag if neg else mag
    a, b = solver.initial_frame(h, H3)
    assert solver.h_from_frame(a, b, H3) == pytest.approx(h, rel=1e-12)
    assert a * b * h > 0


@given(st.floats(-0.999999, 0.999999))
def test_round_trip_ds(h):
    a, b = solver.initial_frame(h, DS)
    assert solver.h_from_frame(a, b, DS) == pytest.approx(h, abs=1e-12)
    assert b > 0 > a


def test_solve_target():
    res = solver.solve_target(2, 2.0, DS_ELLIPTIC)
    assert res.c_star == pytest.approx(-0.505010, abs=2e-6)
    assert res.h == pytest.approx(0.218257, abs=1e-5)
    with pytest.raises(NoSignChangeError):
        solver.solve_target(1, 2.0, DS_ELLIPTIC, bracket=(-0.05, -0.04))


def test_table_row_layout():
    (row,) = solver.table([1])
    assert set(row.results) == {H3, DS_ELLIPTIC, DS_HYPERBOLIC}
    assert row.diagnostics == []


def test_continuation():
    cont = solver.continue_in_lambda(1, 2.0, 2.1, 10, -0.0467552)
    assert cont.complete and len(cont.results) == 10
    cs = [-0.0467552] + [r.c_star for r in cont.results]
    assert np.max(np.abs(np.diff(cs))) < 0.01
    assert cont.lambdas[-1] == pytest.approx(2.1)


def test_continuation_zero_steps():
    cont = solver.continue_in_lambda(1, 2.0, 2.1, 0, -0.0467552)
    assert len(cont.results) == 1 and cont.results[0].c_star == pytest.approx(-0.0467552, abs=1e-6)


def test_continuation_bad_seed():
    cont = solver.continue_in_lambda(1, 2.0, 2.1, 3, 0.3)
    assert not cont.complete and cont.results == []
