"""Loop monodromies Phi1, Phi2 and the closing functions h1, h2.

Transporting the identity frame from (1, w0) along c1 and c2 gives
F1 = F(c1(1)) and F2 = F(c2(1)).  The symmetries of the curve turn these two
frames into the monodromies of the generating loops gamma1 and gamma2 without
integrating around the loops themselves.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import sl2
from .curve import CurveParams
from .errors import DegenerateDenominatorError, MalformedMonodromyError, ParameterError
from .transport import (
    DEFAULT_RTOL,
    make_loop_gamma1,
    make_loop_gamma2,
    make_path_c1,
    make_path_c2,
    transport,
)

FORM_TOL = 1e-8
DEGENERATE_TOL = 1e-12

H3 = "H3"
DS = "DS"
DS_ELLIPTIC = "DS_elliptic"
DS_HYPERBOLIC = "DS_hyperbolic"
DS_PARABOLIC = "DS_parabolic"
DS_TAGS = (DS, DS_ELLIPTIC, DS_HYPERBOLIC, DS_PARABOLIC)


def phi1(F1: np.ndarray, Lambda: complex) -> np.ndarray:
    """Monodromy of gamma1 from the frame at the end of c1."""
    (a, b), (c, d) = F1
    ac, bc, cc, dc = np.conj(a), np.conj(b), np.conj(c), np.conj(d)
    lam_inv = 1 / Lambda
    m1 = np.array([[ac, -cc], [-bc, dc]])
    m2 = np.array([[d, Lambda * c], [lam_inv * b, a]])
    m3 = np.array([[dc, -Lambda * bc], [-lam_inv * cc, ac]])
    return m1 @ m2 @ m3 @ np.asarray(F1)


def phi2(F2: np.ndarray) -> np.ndarray:
    """Monodromy of gamma2 from the frame at the end of c2."""
    (a, b), (c, d) = F2
    return np.array([[np.conj(d), -np.conj(b)], [-np.conj(c), np.conj(a)]]) @ np.asarray(F2)


def phi1_form_residual(m: np.ndarray) -> float:
    """Distance of ``m`` from the shape (r1, p; -conj(p), r2), relative to its size."""
    raw = abs(m[0, 0].imag) + abs(m[1, 1].imag) + abs(m[1, 0] + np.conj(m[0, 1]))
    return float(raw / max(1.0, np.max(np.abs(m))))


def phi2_form_residual(m: np.ndarray) -> float:
    """Distance of ``m`` from the shape (q, i r3; i r4, conj(q)), relative to its size."""
    raw = abs(m[0, 1].real) + abs(m[1, 0].real) + abs(m[1, 1] - np.conj(m[0, 0]))
    return float(raw / max(1.0, np.max(np.abs(m))))


@dataclass(frozen=True)
class ClosingData:
    phi1: np.ndarray
    phi2: np.ndarray
    p: complex
    q: complex
    r1: float
    r2: float
    r3: float
    r4: float
    h1: float
    h2: float
    form_residual: float
    det_drift: float = 0.0

    @property
    def gap(self) -> float:
        return self.h1 - self.h2

    @property
    def h(self) -> float:
        return 0.5 * (self.h1 + self.h2)


def closing_data(phi1_m: np.ndarray, phi2_m: np.ndarray, tol: float = FORM_TOL,
                 det_drift: float = 0.0) -> ClosingData:
    """Read p, q, r1..r4 off the monodromies and form h1, h2."""
    form = max(phi1_form_residual(phi1_m), phi2_form_residual(phi2_m))
    if form > tol:
        raise MalformedMonodromyError(
            f"monodromy form residual {form:.3g} exceeds {tol:.3g}"
        )
    p = complex(phi1_m[0, 1])
    q = complex(phi2_m[0, 0])
    r1, r2 = float(phi1_m[0, 0].real), float(phi1_m[1, 1].real)
    r3, r4 = float(phi2_m[0, 1].imag), float(phi2_m[1, 0].imag)
    if abs(r2 - r1) < DEGENERATE_TOL:
        raise DegenerateDenominatorError(f"h1 undefined: r2 - r1 = {r2 - r1:.3g}")
    if abs(r4 - r3) < DEGENERATE_TOL:
        raise DegenerateDenominatorError(f"h2 undefined: r4 - r3 = {r4 - r3:.3g}")
    h1 = 2 * p.real / (r2 - r1)
    h2 = 2 * q.imag / (r4 - r3)
    return ClosingData(np.asarray(phi1_m), np.asarray(phi2_m), p, q, r1, r2, r3, r4,
                       h1, h2, form, det_drift)


def closing_pair(params: CurveParams, tol: float = DEFAULT_RTOL,
                 form_tol: float = FORM_TOL, parallel: bool = False) -> ClosingData:
    """Evaluate (c, lam) -> (h1, h2) for the given curve parameters."""
    paths = (make_path_c1(params), make_path_c2(params))
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            r1, r2 = pool.map(lambda path: transport(params, path, tol=tol), paths)
    else:
        r1, r2 = (transport(params, path, tol=tol) for path in paths)
    return closing_data(
        phi1(r1.frame, params.Lambda),
        phi2(r2.frame),
        form_tol,
        det_drift=max(r1.det_drift, r2.det_drift),
    )


def loop_monodromies(params: CurveParams, tol: float = DEFAULT_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Phi1, Phi2 by integrating the identity frame around the full loops.

    Independent of the symmetry shortcut used by :func:`closing_pair`.
    """
    m1 = transport(params, make_loop_gamma1(params), tol=tol).frame
    m2 = transport(params, make_loop_gamma2(params), tol=tol).frame
    return m1, m2


@dataclass(frozen=True)
class SymmetryReport:
    kappa1: float
    kappa2: float
    kappa3: float

    @property
    def worst(self) -> float:
        return max(self.kappa1, self.kappa2, self.kappa3)


def symmetry_report(params: CurveParams, tol: float = DEFAULT_RTOL) -> SymmetryReport:
    """Residuals of the three frame relations induced by the curve symmetries.

    kappa1 (z, w) -> (conj z, conj w) conjugates the frame; kappa2
    (z, w) -> (1/z, 1/(lam^(2k/(k+1)) w)) swaps it to (D, C; B, A); kappa3
    (z, w) -> (conj z, Lambda conj w) gives (conj A, Lambda conj B;
    conj C / Lambda, conj D).  Each is checked at the end of c1 by
    transporting along the image path.
    """
    c1 = make_path_c1(params)
    w0 = params.w0
    F = transport(params, c1, tol=tol).frame
    (a, b), (c, d) = F

    k1 = transport(params, c1.conj(), w0, tol=tol).frame
    res1 = np.max(np.abs(k1 - np.conj(F)))

    # kappa2 fixes the base point (1, w0)
    k2 = transport(params, c1.invert(), w0, tol=tol).frame
    res2 = np.max(np.abs(k2 - np.array([[d, c], [b, a]])))

    Lam = params.Lambda
    k3 = transport(params, c1.conj(), Lam * w0, tol=tol).frame
    expect3 = np.array([[np.conj(a), Lam * np.conj(b)], [np.conj(c) / Lam, np.conj(d)]])
    res3 = np.max(np.abs(k3 - expect3))
    return SymmetryReport(float(res1), float(res2), float(res3))


def initial_frame_matrix(alpha: float, beta: float, target: str) -> np.ndarray:
    """(alpha, beta; beta, alpha) for H3, (alpha, beta; alpha, -beta) for de Sitter."""
    if target == H3:
        return np.array([[alpha, beta], [beta, alpha]], dtype=complex)
    if target in DS_TAGS:
        return np.array([[alpha, beta], [alpha, -beta]], dtype=complex)
    raise ParameterError(f"unknown ambient space {target!r}")


def conjugated_monodromy(phi: np.ndarray, alpha: float, beta: float, target: str,
                         det_tol: float = 1e-9) -> np.ndarray:
    """P^-1 phi P for the initial frame P built from (alpha, beta)."""
    P = initial_frame_matrix(alpha, beta, target)
    d = sl2.det(P)
    if abs(d - 1) > det_tol:
        raise ParameterError(f"initial frame has determinant {d:.12g}, expected 1")
    return sl2.inverse(P) @ phi @ P


def membership_residual(M: np.ndarray, target: str) -> float:
    return sl2.su2_residual(M) if target == H3 else sl2.su11_residual(M)

