"""The branched curve w^(k+1) = z ((z - 1/lam) / (lam - z))^k and its Weierstrass data.

The surface is parametrized by the points (z, w) of this curve with the two
ends (0, 0) and (inf, inf) removed.  The Weierstrass data are

    G = lam^(k/(k+1)) * w,        Omega = c * dz / (z w).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidGenusError,
    InvalidLambdaError,
    InvalidScaleError,
    SingularEvaluationError,
)

# Points this far out are treated as having reached an end of the surface.
END_RADIUS = 1e12

_SINGULAR_EPS = 1e-14


@dataclass(frozen=True)
class CurveParams:
    """Genus ``k``, branch parameter ``lam`` > 1 and Weierstrass scale ``c`` != 0."""

    k: int
    lam: float
    c: float
    w0: float = field(init=False)
    Lambda: complex = field(init=False)
    gauss_scale: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise InvalidGenusError(f"k must be >= 1 (got {self.k!r})")
        if not math.isfinite(self.lam) or self.lam <= 1:
            raise InvalidLambdaError(f"lambda must exceed 1 (got {self.lam!r})")
        if not math.isfinite(self.c) or self.c == 0:
            raise InvalidScaleError(f"c must be a nonzero real number (got {self.c!r})")
        k = int(self.k)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "c", float(self.c))
        expo = k / (k + 1) * math.log(self.lam)
        object.__setattr__(self, "w0", math.exp(-expo))
        object.__setattr__(self, "gauss_scale", math.exp(expo))
        object.__setattr__(self, "Lambda", cmath.exp(2j * math.pi / (k + 1)))

    @property
    def inv_lam(self) -> float:
        return 1.0 / self.lam

    def with_c(self, c: float) -> "CurveParams":
        return CurveParams(self.k, self.lam, c)

    def with_lam(self, lam: float) -> "CurveParams":
        return CurveParams(self.k, lam, self.c)


@dataclass(frozen=True)
class SurfacePoint:
    z: complex
    w: complex


def make_params(k: int, lam: float, c: float) -> CurveParams:
    """Validate ``(k, lam, c)`` and return the derived parameter record."""
    return CurveParams(k, lam, c)


def base_point(params: CurveParams) -> SurfacePoint:
    """The point (1, w0) where every frame is initialized."""
    return SurfacePoint(1.0 + 0j, complex(params.w0))


def _near(z: complex, target: float) -> bool:
    return abs(z - target) <= _SINGULAR_EPS * max(1.0, abs(target))


def curve_function(params: CurveParams, z: complex) -> complex:
    """Right-hand side z((z - 1/lam)/(lam - z))^k of the curve equation."""
    if _near(z, params.lam):
        raise SingularEvaluationError(f"z = lambda = {params.lam} is a pole of the curve equation")
    return z * ((z - params.inv_lam) / (params.lam - z)) ** params.k


def curve_residual(params: CurveParams, point: SurfacePoint) -> complex:
    return point.w ** (params.k + 1) - curve_function(params, point.z)


def log_derivative_w(params: CurveParams, z: complex) -> complex:
    """w'/w along the curve, from differentiating its defining relation."""
    if _near(z, 0.0) or _near(z, params.inv_lam) or _near(z, params.lam):
        raise SingularEvaluationError(f"w'/w is singular at the branch value z = {z}")
    k = params.k
    return (1.0 / z + k / (z - params.inv_lam) + k / (params.lam - z)) / (k + 1)


def gauss_map(params: CurveParams, point: SurfacePoint) -> complex:
    return params.gauss_scale * point.w


def gauss_map_dz(params: CurveParams, point: SurfacePoint) -> complex:
    """dG/dz, obtained from w'/w rather than the closed-form Hopf expression."""
    return params.gauss_scale * point.w * log_derivative_w(params, point.z)


def omega_coefficient(params: CurveParams, point: SurfacePoint) -> complex:
    """Coefficient of dz in Omega = c dz / (z w)."""
    if point.z == 0 or point.w == 0:
        raise SingularEvaluationError("Omega is singular where z = 0 or w = 0")
    return params.c / (point.z * point.w)


def hopf_coefficient(params: CurveParams, z: complex, w: complex | None = None) -> complex:
    """Coefficient of dz^2 in the Hopf differential Q = Omega dG (closed form).

    The closed form depends only on z; ``w`` is accepted so callers can pass a
    full curve point, and is not used.
    """
    del w
    if _near(z, 0.0) or _near(z, params.inv_lam) or _near(z, params.lam):
        raise SingularEvaluationError(f"Hopf differential is singular at z = {z}")
    k, lam = params.k, params.lam
    numer = z * z + ((k - 1) / lam - (k + 1) * lam) * z + 1
    denom = z * z * (z - 1 / lam) * (z - lam)
    return params.c * params.gauss_scale / (k + 1) * numer / denom


def sheet_roots(params: CurveParams, z: complex) -> np.ndarray:
    """All k+1 values of w over ``z``, ordered by sheet index.

    Sheet ``s`` is the principal (k+1)-th root times Lambda^s.
    """
    value = curve_function(params, z)
    n = params.k + 1
    principal = cmath.exp(cmath.log(value) / n) if value != 0 else 0j
    return principal * params.Lambda ** np.arange(n)


def sheet_index(params: CurveParams, z: complex, w: complex) -> int:
    return int(np.argmin(np.abs(sheet_roots(params, z) - w)))


def snap_to_curve(params: CurveParams, z: complex, w: complex) -> tuple[complex, float]:
    """Move ``w`` to the nearest exact root over ``z``.

    Returns the snapped value and the relative distance moved.
    """
    ratio = curve_function(params, z) / w ** (params.k + 1)
    snapped = w * cmath.exp(cmath.log(ratio) / (params.k + 1))
    return snapped, abs(snapped - w) / abs(w)
