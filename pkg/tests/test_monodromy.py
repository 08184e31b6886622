import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmc1 import sl2
from cmc1.curve import make_params
from cmc1.errors import DegenerateDenominatorError, MalformedMonodromyError, ParameterError
from cmc1.monodromy import (
    DS,
    H3,
    closing_data,
    closing_pair,
    conjugated_monodromy,
    initial_frame_matrix,
    loop_monodromies,
    membership_residual,
    phi1,
    phi1_form_residual,
    phi2,
    phi2_form_residual,
    symmetry_report,
)

seeds = st.integers(0, 2**32 - 1)


def test_phi_identity():
    for k in range(1, 5):
        Lam = cmath.exp(2j * math.pi / (k + 1))
        assert np.allclose(phi1(np.eye(2), Lam), np.eye(2))
    assert np.allclose(phi2(np.eye(2)), np.eye(2))


def test_phi1_worked_example():
    F1 = np.array([[1 + 1j, 1j], [1j, 0]])
    assert np.allclose(phi1(F1, -1), [[-3, -2], [2, 1]], atol=1e-15)


@given(seeds, st.integers(1, 6))
def test_phi_shapes_random(seed, k):
    F = sl2.random_sl2(np.random.default_rng(seed))
    Lam = cmath.exp(2j * math.pi / (k + 1))
    m1, m2 = phi1(F, Lam), phi2(F)
    assert phi1_form_residual(m1) <= 1e-12
    assert phi2_form_residual(m2) <= 1e-13
    assert abs(sl2.det(m1) - 1) <= 1e-9 and abs(sl2.det(m2) - 1) <= 1e-9


def test_phi2_real_input():
    F = np.array([[2.0, 1.0], [3.0, 2.0]])
    m = phi2(F)
    assert m[0, 1].imag == 0 and m[1, 0].imag == 0
    assert np.allclose(m, np.array([[2, -1], [-3, 2]]) @ F)


def test_closing_data_identity_degenerate():
    with pytest.raises(DegenerateDenominatorError):
        closing_data(np.eye(2), np.eye(2))


def test_closing_data_h2_degenerate():
    with pytest.raises(DegenerateDenominatorError, match="h2"):
        closing_data(np.array([[-3, -2], [2, 1]], complex), np.diag([1j, -1j]))


def test_closing_data_h1_value():
    cd = closing_data(np.array([[-3, -2], [2, 1]], complex), np.array([[1j, 1j], [-1j, -1j]]))
    assert cd.h1 == pytest.approx(-1.0)
    assert cd.h2 == pytest.approx(2 * 1 / (-1 - 1))


def test_closing_data_malformed():
    with pytest.raises(MalformedMonodromyError):
        closing_data(np.array([[1j, 0], [0, -1j]]), np.eye(2))


@pytest.mark.parametrize(
    "k, c, h",
    [(1, -0.0467552, -6.91432), (1, -0.557726, 0.130869), (2, 0.548964, 0.0345248)],
)
def test_closing_pair_table_values(k, c, h):
    cd = closing_pair(make_params(k, 2.0, c))
    assert cd.h1 == pytest.approx(h, rel=1e-4, abs=1e-5)
    assert cd.h2 == pytest.approx(h, rel=1e-4, abs=1e-5)
    assert isinstance(cd.h1, float) and isinstance(cd.h2, float)


def test_closing_pair_generic_gap():
    assert abs(closing_pair(make_params(1, 2.0, 0.1)).gap) > 1e-3


def test_closing_pair_parallel_is_identical():
    p = make_params(3, 2.0, 0.3)
    a, b = closing_pair(p), closing_pair(p, parallel=True)
    assert a.h1 == b.h1 and a.h2 == b.h2


def test_symmetry_shortcut_matches_loops():
    p = make_params(2, 2.0, 0.5)
    cd = closing_pair(p)
    m1, m2 = loop_monodromies(p)
    assert np.max(np.abs(m1 - cd.phi1)) <= 1e-9 * max(1, np.max(np.abs(m1)))
    assert np.max(np.abs(m2 - cd.phi2)) <= 1e-9 * max(1, np.max(np.abs(m2)))


@pytest.mark.parametrize("k", [1, 2])
def test_symmetry_report(k):
    rep = symmetry_report(make_params(k, 2.0, 0.5))
    assert rep.kappa1 <= 1e-8 and rep.kappa2 <= 1e-8 and rep.kappa3 <= 1e-8


def test_conjugation_identity_and_invariants():
    rng = np.random.default_rng(3)
    M = sl2.random_sl2(rng)
    assert np.allclose(conjugated_monodromy(M, 1.0, 0.0, H3), M)
    beta = 0.7
    for alpha, target in ((math.sqrt(1 + beta**2), H3), (-1 / (2 * beta), DS)):
        C = conjugated_monodromy(M, alpha, beta, target)
        assert np.trace(C) == pytest.approx(np.trace(M))
        assert sl2.det(C) == pytest.approx(1)


def test_conjugation_rejects_bad_frame():
    with pytest.raises(ParameterError):
        conjugated_monodromy(np.eye(2), 1.0, 1.0, H3)


def test_initial_frame_shapes():
    assert np.allclose(initial_frame_matrix(2.0, 3.0, H3), [[2, 3], [3, 2]])
    assert np.allclose(initial_frame_matrix(2.0, 3.0, DS), [[2, 3], [2, -3]])
    with pytest.raises(ParameterError):
        initial_frame_matrix(1.0, 0.0, "R3")


def test_membership_residuals():
    th = 0.3
    u = np.array([[np.exp(1j * th), 0], [0, np.exp(-1j * th)]])
    assert membership_residual(u, H3) < 1e-15
    boost = np.array([[np.cosh(th), np.sinh(th)], [np.sinh(th), np.cosh(th)]])
    assert membership_residual(boost, DS) < 1e-15
    assert membership_residual(boost, H3) > 0.1
