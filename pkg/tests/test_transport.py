import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmc1 import sl2
from cmc1.curve import SurfacePoint, curve_residual, make_params, sheet_roots
from cmc1.errors import IntegrationError, PathError
from cmc1.transport import (
    PathSpec,
    Segment,
    circular_arc,
    fixed_step_transport,
    half_ellipse,
    homotopy_check,
    line,
    make_loop_gamma1,
    make_loop_gamma2,
    make_path_c1,
    make_path_c2,
    min_clearance,
    transport,
)

P12 = make_params(1, 2.0, -0.0467552)


def test_c1_shape():
    path = make_path_c1(P12)
    assert path.start == pytest.approx(1.0)
    assert path.end == pytest.approx(0.25)
    z = path.sample(10_000)[1:-1]
    assert np.all(z.imag < 0)
    assert np.min(np.abs(z - 0.5)) >= 1e-3 * 0.5


def test_c2_shape():
    path = make_path_c2(P12)
    assert path.start == pytest.approx(1.0) and path.end == pytest.approx(-1.0)
    z = path.sample(10_000)
    assert np.all(z[1:-1].imag < 0)
    assert np.min(np.abs(z)) >= 0.5 and np.min(np.abs(z - 0.5)) >= 0.5


def test_discontinuous_path_rejected():
    with pytest.raises(PathError):
        PathSpec((line(0, 1), line(2, 3)))


def test_path_through_branch_point_rejected():
    with pytest.raises(PathError):
        transport(P12, PathSpec((line(1.0, 0.25),)))


def test_zero_length_path():
    frame = sl2.random_sl2(np.random.default_rng(0))
    res = transport(P12, PathSpec(()), initial_frame=frame)
    assert np.array_equal(res.frame, frame)
    assert res.step_count == 0


def test_start_must_be_on_curve():
    with pytest.raises(PathError):
        transport(P12, make_path_c1(P12), initial_w=1.0)


def test_endpoint_on_curve_and_det():
    res = transport(P12, make_path_c1(P12))
    assert abs(curve_residual(P12, res.endpoint)) <= 1e-9
    assert res.det_drift <= 1e-9
    assert res.step_count > 0 and res.error_estimate >= 0


@settings(max_examples=25, deadline=None)
@given(
    st.integers(1, 5),
    st.floats(1.5, 3.0),
    st.floats(-1, 1).filter(lambda c: abs(c) > 1e-3),
)
def test_det_conservation_random(k, lam, c):
    p = make_params(k, lam, c)
    for path in (make_path_c1(p), make_path_c2(p)):
        assert transport(p, path).det_drift <= 1e-9


def test_depth_independence():
    for depth in (0.1, 0.2):
        other = make_path_c1(P12, depth=depth)
        assert homotopy_check(P12, make_path_c1(P12), other) <= 1e-8


def test_identical_paths_agree_exactly():
    assert homotopy_check(P12, make_path_c1(P12), make_path_c1(P12)) == 0


def test_non_homotopic_paths_differ():
    above = PathSpec((half_ellipse(1.0, 0.25, -0.3),), "upper")
    assert homotopy_check(P12, make_path_c1(P12), above) > 1e-3


def test_reversal_returns_identity():
    p = make_params(3, 2.5, 0.4)
    path = make_path_c2(p)
    fwd = transport(p, path)
    back = transport(p, path.reversed(), fwd.endpoint.w, fwd.frame)
    assert np.max(np.abs(back.frame - np.eye(2))) <= 1e-8
    assert back.endpoint.w == pytest.approx(p.w0, abs=1e-12)


def test_loops_return_to_base_point():
    p = make_params(2, 2.0, 0.5)
    for loop in (make_loop_gamma1(p), make_loop_gamma2(p)):
        assert loop.start == pytest.approx(1.0) and loop.end == pytest.approx(1.0)
        assert transport(p, loop).endpoint.w == pytest.approx(p.w0, abs=1e-12)


def test_oracle_agreement_k1():
    path = make_path_c1(P12)
    w_ref, f_ref = fixed_step_transport(P12, path, n_steps=200_000)
    res = transport(P12, path)
    assert np.max(np.abs(res.frame - f_ref)) <= 1e-8
    assert res.endpoint.w == pytest.approx(w_ref, abs=1e-10)


def test_transport_from_other_sheet():
    p = make_params(2, 2.0, 0.5)
    w1 = sheet_roots(p, 1.0)[1]
    res = transport(p, make_path_c1(p), initial_w=w1)
    assert abs(curve_residual(p, res.endpoint)) <= 1e-9


def test_integration_failure_reported():
    p = make_params(1, 2.0, 1.0)
    tight = PathSpec((line(1.0, 0.5),), "into branch point")
    with pytest.raises(IntegrationError):
        transport(p, tight, check=False)


def test_segment_transforms():
    seg = circular_arc(2.0, 0.0, np.pi)
    assert seg.start == pytest.approx(2) and seg.end == pytest.approx(-2)
    assert seg.conj().points(0.5) == pytest.approx(-2j)
    assert seg.reversed().start == pytest.approx(-2)
    assert seg.invert().points(0.5) == pytest.approx(1 / 2j)
    assert isinstance(seg, Segment)
    assert min_clearance(P12) == pytest.approx(5e-4)
