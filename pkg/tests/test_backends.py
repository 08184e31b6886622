import os
import subprocess
import sys

import numpy as np
import pytest

from cmc1 import _backend, _kernels_py
from cmc1.curve import make_params
from cmc1.transport import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    MAX_STEPS,
    PathSpec,
    line,
    make_loop_gamma1,
    make_path_c1,
    make_path_c2,
)

compiled = pytest.importorskip("cmc1._kernels")


def _state(params):
    s = np.zeros(8, complex)
    s[0] = params.w0
    s[1] = s[4] = 1
    return s


def test_compiled_backend_selected_by_default():
    assert _backend.BACKEND == "cython"
    assert _backend.kernels is compiled


def test_pure_python_switch():
    env = dict(os.environ, CMC1_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import cmc1; print(cmc1.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("k, c", [(1, -0.0467552), (3, 0.48209), (6, -0.46)])
def test_adaptive_kernels_agree(k, c):
    p = make_params(k, 2.0, c)
    for path in (make_path_c1(p), make_path_c2(p), make_loop_gamma1(p)):
        args = (path.rows(), k, 2.0, c, _state(p), DEFAULT_RTOL, DEFAULT_ATOL, MAX_STEPS)
        s_py, n_py, rej_py, _, st_py, _ = _kernels_py.transport_segments(*args)
        s_cy, n_cy, rej_cy, _, st_cy, _ = compiled.transport_segments(*args)
        assert st_py == st_cy == _kernels_py.OK
        assert (n_py, rej_py) == (n_cy, rej_cy)
        assert np.max(np.abs(s_py - s_cy)) <= 1e-12 * max(1, np.max(np.abs(s_py)))


def test_oracle_kernels_agree():
    p = make_params(2, 2.0, -0.505010)
    rows = make_path_c2(p).rows()
    args = (rows, 2, 2.0, -0.505010, p.w0, np.eye(2, dtype=complex).ravel(), 5000)
    assert np.max(np.abs(_kernels_py.oracle_transport(*args) - compiled.oracle_transport(*args))) < 1e-13


def test_failure_status_agrees():
    p = make_params(1, 2.0, 1.0)
    rows = PathSpec((line(1.0, 0.5),)).rows()
    args = (rows, 1, 2.0, 1.0, _state(p), DEFAULT_RTOL, DEFAULT_ATOL, MAX_STEPS)
    assert _kernels_py.transport_segments(*args)[4] == compiled.transport_segments(*args)[4] != 0


def test_pure_python_closing_pair_matches():
    env = dict(os.environ, CMC1_PURE_PYTHON="1")
    code = ("from cmc1 import closing_pair, make_params;"
            "cd = closing_pair(make_params(1, 2.0, -0.0467552)); print(repr(cd.h1))")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
    from cmc1 import closing_pair
    expected = closing_pair(make_params(1, 2.0, -0.0467552)).h1
    assert float(out.stdout) == pytest.approx(expected, rel=1e-10)
