"""Transport of (w, F) along paths in the z-plane.

Along a path the pair (w, F) solves

    dw/dz = w * (w'/w)(z),        dF/dz = c/(z w) * [[G, -G^2], [1, -G]] @ F,

with G = lam^(k/(k+1)) w.  The running integrals of Omega, G*Omega and
G^2*Omega are carried along as well; they give the Euclidean periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import sl2
from ._backend import STATUS_MESSAGES, kernels
from .curve import CurveParams, SurfacePoint, base_point, curve_residual
from .errors import IntegrationError, PathError

# Shape of the two reference paths; the closing data do not depend on them.
C1_MAX_DEPTH = 0.3
C2_DEPTH = 0.75
C2_END = -1.0

DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-14
DET_DRIFT_LIMIT = 1e-6
MAX_STEPS = 2_000_000
CURVE_TOL = 1e-9

LINE, ARC = 0, 1


@dataclass(frozen=True)
class Segment:
    """``center + u*s`` (line) or ``center + u*cos(s) + v*sin(s)`` (arc), s in [t0, t1].

    ``inverted`` composes the curve with z -> 1/z.
    """

    kind: int
    center: complex
    u: complex
    v: complex = 0j
    t0: float = 0.0
    t1: float = 1.0
    inverted: bool = False

    def points(self, t) -> np.ndarray:
        s = self.t0 + (self.t1 - self.t0) * np.asarray(t, dtype=float)
        if self.kind == LINE:
            z = self.center + self.u * s
        else:
            z = self.center + self.u * np.cos(s) + self.v * np.sin(s)
        return 1 / z if self.inverted else z

    @property
    def start(self) -> complex:
        return complex(self.points(0.0))

    @property
    def end(self) -> complex:
        return complex(self.points(1.0))

    def conj(self) -> "Segment":
        return replace(
            self,
            center=self.center.conjugate(),
            u=self.u.conjugate(),
            v=self.v.conjugate(),
        )

    def reversed(self) -> "Segment":
        return replace(self, t0=self.t1, t1=self.t0)

    def invert(self) -> "Segment":
        return replace(self, inverted=not self.inverted)

    def row(self) -> list[float]:
        c, u, v = complex(self.center), complex(self.u), complex(self.v)
        return [self.kind, float(self.inverted), c.real, c.imag, u.real, u.imag,
                v.real, v.imag, self.t0, self.t1]


def line(a: complex, b: complex) -> Segment:
    return Segment(LINE, complex(a), complex(b) - complex(a))


def half_ellipse(a: complex, b: complex, depth: float) -> Segment:
    """Half-ellipse from ``a`` to ``b`` bulging towards -i(a - b).

    For real a > b it lies in the lower half-plane.
    """
    a, b = complex(a), complex(b)
    half = (a - b) / 2
    normal = -1j * half / abs(half) * depth
    return Segment(ARC, (a + b) / 2, half, normal, 0.0, math.pi)


def circular_arc(radius: float, theta0: float, theta1: float) -> Segment:
    return Segment(ARC, 0j, complex(radius), 1j * radius, theta0, theta1)


@dataclass(frozen=True)
class PathSpec:
    segments: tuple[Segment, ...]
    name: str = ""

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for prev, nxt in zip(segs, segs[1:]):
            if abs(prev.end - nxt.start) > 1e-12 * max(1.0, abs(prev.end)):
                raise PathError(
                    f"path {self.name!r} is discontinuous: {prev.end} -> {nxt.start}"
                )

    @property
    def start(self) -> complex:
        return self.segments[0].start if self.segments else complex("nan")

    @property
    def end(self) -> complex:
        return self.segments[-1].end if self.segments else complex("nan")

    def sample(self, n: int = 1000) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n)
        return np.concatenate([s.points(t) for s in self.segments])

    def clearance(self, params: CurveParams, n: int = 2000) -> float:
        """Smallest sampled distance to the branch values 0, 1/lam and lam."""
        z = self.sample(n)
        singular = np.array([0.0, params.inv_lam, params.lam])
        return float(np.min(np.abs(z[:, None] - singular[None, :])))

    def conj(self) -> "PathSpec":
        return PathSpec(tuple(s.conj() for s in self.segments), f"conj({self.name})")

    def reversed(self) -> "PathSpec":
        return PathSpec(tuple(s.reversed() for s in reversed(self.segments)), f"{self.name}^-1")

    def invert(self) -> "PathSpec":
        return PathSpec(tuple(s.invert() for s in self.segments), f"1/({self.name})")

    def then(self, other: "PathSpec") -> "PathSpec":
        return PathSpec(self.segments + other.segments, f"{self.name}*{other.name}")

    def rows(self) -> np.ndarray:
        return np.array([s.row() for s in self.segments], dtype=np.float64).reshape(-1, 10)


def min_clearance(params: CurveParams) -> float:
    return 1e-3 * min(params.inv_lam, params.lam - 1)


def check_path(params: CurveParams, path: PathSpec, n: int = 2000) -> None:
    if not path.segments:
        return
    gap = path.clearance(params, n)
    if gap < min_clearance(params):
        raise PathError(
            f"path {path.name!r} passes within {gap:.3g} of a branch value of z"
        )


def make_path_c1(params: CurveParams, depth: float | None = None) -> PathSpec:
    """From z = 1 through the lower half-plane to z = 1/(2 lam), below 1/lam."""
    end = params.inv_lam / 2
    if depth is None:
        depth = min(C1_MAX_DEPTH, end)
    return PathSpec((half_ellipse(1.0, end, depth),), "c1")


def make_path_c2(params: CurveParams, depth: float = C2_DEPTH) -> PathSpec:
    """From z = 1 through the lower half-plane to z = -1, below 0 and 1/lam."""
    return PathSpec((half_ellipse(1.0, C2_END, depth),), "c2")


def make_loop_gamma1(params: CurveParams) -> PathSpec:
    """z-projection of the loop around 1/lam and lam built from c1 and its images.

    Lower half to 1/(2 lam), back to z = 1 through the upper half (arriving on
    the sheet of Lambda*w0), out to 2 lam in the upper half along 1/c1, and
    home through the lower half.
    """
    c1 = make_path_c1(params)
    inv = c1.invert()
    loop = c1.then(c1.conj().reversed()).then(inv).then(inv.conj().reversed())
    return replace(loop, name="gamma1")


def make_loop_gamma2(params: CurveParams) -> PathSpec:
    """z-projection of the loop around 0 and 1/lam: c2 then its mirror image back."""
    c2 = make_path_c2(params)
    return replace(c2.then(c2.conj().reversed()), name="gamma2")


@dataclass(frozen=True)
class TransportResult:
    endpoint: SurfacePoint
    frame: np.ndarray
    det_drift: float
    step_count: int
    error_estimate: float
    rejected_steps: int = 0
    integrals: np.ndarray = field(default_factory=lambda: np.zeros(3, complex))


def transport(
    params: CurveParams,
    path: PathSpec,
    initial_w: complex | None = None,
    initial_frame: np.ndarray | None = None,
    tol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    check: bool = True,
) -> TransportResult:
    """Integrate (w, F) along ``path`` starting from ``(path.start, initial_w)``.

    Defaults start at the base point (1, w0) with the identity frame.  The
    determinant of F is monitored, never renormalized.
    """
    if initial_w is None:
        initial_w = base_point(params).w
    frame0 = sl2.identity() if initial_frame is None else np.asarray(initial_frame, complex)
    start = SurfacePoint(complex(path.start), complex(initial_w))
    if not path.segments:
        return TransportResult(start, frame0.copy(), abs(sl2.det(frame0) - 1), 0, 0.0)
    if check:
        check_path(params, path)
        scale = max(1.0, abs(start.w) ** (params.k + 1))
        if abs(curve_residual(params, start)) > CURVE_TOL * scale:
            raise PathError(f"initial point {start} is not on the curve")

    state0 = np.zeros(8, dtype=np.complex128)
    state0[0] = initial_w
    state0[1:5] = frame0.ravel()
    state, n_acc, n_rej, err_sum, status, where = kernels.transport_segments(
        path.rows(), params.k, params.lam, params.c, state0, tol, atol, MAX_STEPS
    )
    if status != 0:
        raise IntegrationError(
            f"transport along {path.name!r} failed at path position {where:.6g}: "
            f"{STATUS_MESSAGES.get(status, status)}"
        )
    frame = state[1:5].reshape(2, 2)
    drift = abs(sl2.det(frame) - sl2.det(frame0))
    if drift > DET_DRIFT_LIMIT:
        raise IntegrationError(
            f"determinant drift {drift:.3g} along {path.name!r} exceeds {DET_DRIFT_LIMIT}"
        )
    endpoint = SurfacePoint(complex(path.end), complex(state[0]))
    return TransportResult(
        endpoint, frame, float(drift), int(n_acc), float(err_sum), int(n_rej), state[5:8].copy()
    )


def fixed_step_transport(
    params: CurveParams,
    path: PathSpec,
    initial_w: complex | None = None,
    initial_frame: np.ndarray | None = None,
    n_steps: int = 1_000_000,
) -> tuple[complex, np.ndarray]:
    """Brute-force oracle: classical RK4 with ``n_steps`` equal steps per segment.

    ``w`` is evaluated from the continuously unwrapped logarithm of the curve
    equation instead of being integrated.
    """
    if initial_w is None:
        initial_w = base_point(params).w
    frame0 = sl2.identity() if initial_frame is None else np.asarray(initial_frame, complex)
    out = kernels.oracle_transport(
        path.rows(), params.k, params.lam, params.c, complex(initial_w), frame0.ravel(), n_steps
    )
    return complex(out[0]), out[1:].reshape(2, 2)


def homotopy_check(params: CurveParams, path_a: PathSpec, path_b: PathSpec,
                   tol: float = DEFAULT_RTOL) -> float:
    """Max entrywise difference of the frames transported along two paths."""
    fa = transport(params, path_a, tol=tol).frame
    fb = transport(params, path_b, tol=tol).frame
    return float(np.max(np.abs(fa - fb)))
