import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmc1.curve import (
    CurveParams,
    SurfacePoint,
    base_point,
    curve_residual,
    gauss_map,
    gauss_map_dz,
    hopf_coefficient,
    log_derivative_w,
    make_params,
    omega_coefficient,
    sheet_index,
    sheet_roots,
    snap_to_curve,
)
from cmc1.errors import (
    InvalidGenusError,
    InvalidLambdaError,
    InvalidScaleError,
    ParameterError,
    SingularEvaluationError,
)

ks = st.integers(1, 20)
lams = st.floats(1.05, 10.0)


def test_make_params_derived_constants():
    p = make_params(1, 2.0, 0.5)
    assert p.w0 == pytest.approx(2 ** -0.5, abs=1e-15)
    assert p.Lambda == pytest.approx(-1)
    assert isinstance(p, CurveParams)


@pytest.mark.parametrize(
    "args, exc, msg",
    [
        ((0, 2.0, 1.0), InvalidGenusError, "k must be >= 1"),
        ((1, 1.0, 1.0), InvalidLambdaError, "lambda must exceed 1"),
        ((1, 2.0, 0.0), InvalidScaleError, "c must be"),
        ((1, float("nan"), 1.0), InvalidLambdaError, "lambda"),
    ],
)
def test_make_params_rejects(args, exc, msg):
    with pytest.raises(exc, match=msg):
        make_params(*args)
    assert issubclass(exc, ParameterError)


@given(ks, lams)
def test_invariants_hold(k, lam):
    p = make_params(k, lam, 1.0)
    assert p.w0 ** (k + 1) * lam ** k == pytest.approx(1.0, rel=1e-13)
    assert abs(p.Lambda ** (k + 1) - 1) < 1e-12
    assert abs(p.Lambda - 1) > 1e-3
    assert gauss_map(p, base_point(p)) == pytest.approx(1.0, abs=1e-14)


def test_curve_residual_examples():
    p = make_params(1, 2.0, 1.0)
    assert abs(curve_residual(p, base_point(p))) < 1e-15
    assert curve_residual(p, SurfacePoint(0.5, 0)) == 0
    assert curve_residual(p, SurfacePoint(1.0, 1.0)) == pytest.approx(0.5)
    with pytest.raises(SingularEvaluationError):
        curve_residual(p, SurfacePoint(2.0, 1.0))


def test_log_derivative_examples():
    p = make_params(1, 2.0, 1.0)
    assert log_derivative_w(p, 1.0) == pytest.approx(2.0)
    with pytest.raises(SingularEvaluationError):
        log_derivative_w(p, 0.5)
    with pytest.raises(SingularEvaluationError):
        log_derivative_w(p, 0.0)


@given(ks, lams, st.floats(0.01, 0.99))
def test_log_derivative_real_on_segment(k, lam, t):
    p = make_params(k, lam, 1.0)
    z = p.inv_lam + t * (lam - p.inv_lam)
    assert abs(complex(log_derivative_w(p, z)).imag) == 0


def test_log_derivative_matches_finite_difference():
    p = make_params(3, 2.5, 1.0)
    z, h = 0.7 - 0.4j, 1e-6
    w = lambda x: sheet_roots(p, x)[0]
    fd = (w(z + h) - w(z - h)) / (2 * h) / w(z)
    assert log_derivative_w(p, z) == pytest.approx(fd, rel=1e-8)


def test_gauss_and_omega_examples():
    p = make_params(1, 2.0, 1.0)
    assert gauss_map(p, SurfacePoint(0.5, 0)) == 0
    assert gauss_map(p, SurfacePoint(1.0, 1j * p.w0)) == pytest.approx(1j)
    assert omega_coefficient(p, base_point(p)) == pytest.approx(math.sqrt(2))
    with pytest.raises(SingularEvaluationError):
        omega_coefficient(p, SurfacePoint(0.5, 0))


def test_hopf_numerator_k1():
    p = make_params(1, 2.0, 1.0)
    # numerator z^2 - 4z + 1 vanishes at 2 +- sqrt(3), whose product is 1
    for z in (2 + math.sqrt(3), 2 - math.sqrt(3)):
        assert abs(hopf_coefficient(p, z)) < 1e-13
    assert (2 + math.sqrt(3)) * (2 - math.sqrt(3)) == pytest.approx(1)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_hopf_numerator_roots_product_one(k):
    lam = 2.0
    roots = np.roots([1, (k - 1) / lam - (k + 1) * lam, 1])
    assert np.prod(roots) == pytest.approx(1)


@pytest.mark.parametrize("k", [1, 2, 3, 7])
def test_hopf_at_base_point(k):
    p = make_params(k, 2.0, 0.8)
    b = base_point(p)
    assert hopf_coefficient(p, b.z) == pytest.approx(
        omega_coefficient(p, b) * gauss_map_dz(p, b), abs=1e-12
    )


def test_hopf_singular():
    p = make_params(2, 2.0, 1.0)
    for z in (0, 0.5, 2.0):
        with pytest.raises(SingularEvaluationError):
            hopf_coefficient(p, z)


@given(ks, lams, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
@settings(max_examples=60)
def test_sheet_roots_are_on_curve(k, lam, z):
    p = make_params(k, lam, 1.0)
    if min(abs(z), abs(z - p.inv_lam), abs(z - lam)) < 1e-2:
        return
    roots = sheet_roots(p, z)
    assert len(roots) == k + 1
    for s, w in enumerate(roots):
        pt = SurfacePoint(z, w)
        scale = max(1.0, abs(w) ** (k + 1))
        assert abs(curve_residual(p, pt)) <= 1e-12 * scale
        assert sheet_index(p, z, w) == s


def test_snap_to_curve_recovers_root():
    p = make_params(2, 2.0, 1.0)
    z = 0.3 + 0.8j
    w = sheet_roots(p, z)[1]
    snapped, moved = snap_to_curve(p, z, w * (1 + 1e-8))
    assert abs(snapped - w) < 1e-14
    assert moved == pytest.approx(1e-8, rel=1e-3)


def test_params_helpers():
    p = make_params(2, 3.0, 0.25)
    assert p.inv_lam == pytest.approx(1 / 3)
    assert p.with_c(-1.0).c == -1.0
    q = p.with_lam(2.0)
    assert q.lam == 2.0 and q.w0 == pytest.approx(2 ** (-2 / 3))
    assert cmath.isclose(p.Lambda, cmath.exp(2j * math.pi / 3))
