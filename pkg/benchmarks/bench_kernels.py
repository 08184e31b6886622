"""Compare the compiled and pure-Python transport kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both kernels integrate the same path with the same tolerances; the script
reports the wall time per call and the largest difference of the results.
"""

import argparse
import time

import numpy as np

from cmc1 import _kernels_py
from cmc1.curve import make_params
from cmc1.transport import DEFAULT_ATOL, DEFAULT_RTOL, MAX_STEPS, make_path_c1, make_path_c2

try:
    from cmc1 import _kernels as _compiled
except ImportError:
    _compiled = None


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--oracle-steps", type=int, default=20_000)
    args = parser.parse_args(argv)
    if _compiled is None:
        print("compiled kernel not built; only the Python kernel is available")

    cases = [(k, c) for k, c in ((1, -0.0467552), (2, -0.505010), (8, 0.3))]
    print(f"{'case':<26}{'kernel':<10}{'python [ms]':>12}{'cython [ms]':>12}{'speedup':>9}{'max diff':>11}")
    for k, c in cases:
        params = make_params(k, 2.0, c)
        state0 = np.zeros(8, complex)
        state0[0] = params.w0
        state0[1] = state0[4] = 1
        for path in (make_path_c1(params), make_path_c2(params)):
            rows = path.rows()

            def adaptive(mod):
                return lambda: mod.transport_segments(rows, k, 2.0, c, state0, DEFAULT_RTOL,
                                                      DEFAULT_ATOL, MAX_STEPS)

            def oracle(mod):
                return lambda: mod.oracle_transport(rows, k, 2.0, c, params.w0,
                                                    np.eye(2, dtype=complex).ravel(), args.oracle_steps)

            for name, job in (("dopri", adaptive), ("rk4", oracle)):
                t_py, out_py = _time(job(_kernels_py), args.repeat)
                label = f"k={k} c={c} {path.name}"
                if _compiled is None:
                    print(f"{label:<26}{name:<10}{1e3 * t_py:>12.2f}{'-':>12}{'-':>9}{'-':>11}")
                    continue
                t_cy, out_cy = _time(job(_compiled), args.repeat)
                a = out_py[0] if name == "dopri" else out_py
                b = out_cy[0] if name == "dopri" else out_cy
                diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
                print(f"{label:<26}{name:<10}{1e3 * t_py:>12.2f}{1e3 * t_cy:>12.3f}"
                      f"{t_py / t_cy:>9.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
