"""Solving the one-parameter closing condition h1(c, lam) = h2(c, lam).

Roots are located by sign changes of the gap h1 - h2 on a grid of c values
and refined with Brent's method.  Each root is then classified: |h| > 1
closes in hyperbolic space, |h| < 1 in de Sitter space, where the sign of
1 - 4 c (k+1) lam^(k/(k+1)) separates elliptic from hyperbolic ends.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curve import CurveParams, make_params
from .errors import (
    CMCError,
    DegenerateDenominatorError,
    ExcludedRootError,
    NoSignChangeError,
    ParameterError,
    SpuriousRootError,
)
from .monodromy import (
    DS,
    DS_ELLIPTIC,
    DS_HYPERBOLIC,
    DS_PARABOLIC,
    DS_TAGS,
    H3,
    ClosingData,
    closing_pair,
    conjugated_monodromy,
    membership_residual,
)
from .transport import DEFAULT_RTOL

log = logging.getLogger(__name__)

ROOT_TOL = 1e-13
SCAN_STEPS = 400
SCAN_RANGE = (-1.0, 1.0)
ZERO_EXCLUSION = 1e-3
UNIT_EXCLUSION = 1e-6
PARABOLIC_TOL = 1e-10
# a refined sign change whose gap is still this large (relative) was a pole
POLE_GAP = 1e-6

TARGETS = (H3, DS_ELLIPTIC, DS_HYPERBOLIC)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("CMC1_THREADS", "1")))
    except ValueError:
        return 1


def discriminant(c: float, k: int, lam: float) -> float:
    """1 - 4 c (k+1) lam^(k/(k+1)); its sign fixes the end type in de Sitter space."""
    return 1.0 - 4.0 * c * (k + 1) * lam ** (k / (k + 1))


def h_gap(params: CurveParams, tol: float = DEFAULT_RTOL) -> float:
    return closing_pair(params, tol=tol).gap


@dataclass(frozen=True)
class ScanSample:
    c: float
    h1: float
    h2: float
    gap: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _sample(k: int, lam: float, c: float, tol: float) -> ScanSample:
    try:
        cd = closing_pair(make_params(k, lam, c), tol=tol)
    except CMCError as exc:
        return ScanSample(c, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
    return ScanSample(c, cd.h1, cd.h2, cd.gap)


def scan(k: int, lam: float, c_min: float, c_max: float, steps: int = SCAN_STEPS,
         exclusion: float = ZERO_EXCLUSION, tol: float = DEFAULT_RTOL,
         workers: int | None = None) -> list[ScanSample]:
    """Evaluate the closing gap on a uniform grid of c, skipping |c| < ``exclusion``."""
    make_params(k, lam, 1.0)
    if steps <= 0 or c_max < c_min:
        return []
    grid = [float(c) for c in np.linspace(c_min, c_max, steps) if abs(c) >= exclusion]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: _sample(k, lam, c, tol), grid))
    return [_sample(k, lam, c, tol) for c in grid]


def find_brackets(samples: list[ScanSample]) -> list[tuple[float, float]]:
    """Sign changes of the gap between consecutive valid samples on one side of c = 0."""
    good = [s for s in samples if s.ok]
    out = []
    for a, b in zip(good, good[1:]):
        if a.c * b.c <= 0:
            continue
        if a.gap == 0:
            out.append((a.c, a.c))
        elif a.gap * b.gap < 0:
            out.append((a.c, b.c))
    return out


def classify(h: float, c: float, k: int, lam: float) -> str:
    if abs(abs(h) - 1) <= UNIT_EXCLUSION:
        raise ExcludedRootError(f"|h| = {abs(h):.9g} is 1: no surface closes")
    if abs(h) > 1:
        return H3
    disc = discriminant(c, k, lam)
    if abs(disc) <= PARABOLIC_TOL:
        return DS_PARABOLIC
    return DS_ELLIPTIC if disc > 0 else DS_HYPERBOLIC


def initial_frame(h: float, target: str) -> tuple[float, float]:
    """(alpha, beta) of the corrected initial frame reproducing ``h``.

    H3 uses (alpha, beta; beta, alpha) with alpha^2 - beta^2 = 1 and
    sign(beta) = sign(h); de Sitter uses (alpha, beta; alpha, -beta) with
    alpha*beta = -1/2, beta > 0.
    """
    if target == H3:
        if not abs(h) > 1:
            raise ParameterError(f"hyperbolic frame needs |h| > 1 (got {h})")
        # (-1 + sqrt(h^2/(h^2-1)))/2, rewritten to avoid cancellation at large |h|
        root = math.sqrt((abs(h) - 1) * (abs(h) + 1))
        beta2 = 1 / (2 * root * (abs(h) + root))
        beta = math.copysign(math.sqrt(beta2), h)
        return math.sqrt(1 + beta2), beta
    if target in DS_TAGS:
        if not abs(h) < 1:
            raise ParameterError(f"de Sitter frame needs |h| < 1 (got {h})")
        beta = ((1 - h) / (4 * (1 + h))) ** 0.25
        return -1 / (2 * beta), beta
    raise ParameterError(f"unknown ambient space {target!r}")


def h_from_frame(alpha: float, beta: float, target: str) -> float:
    if target == H3:
        return (alpha * alpha + beta * beta) / (2 * alpha * beta)
    return (alpha * alpha - beta * beta) / (alpha * alpha + beta * beta)


@dataclass(frozen=True)
class SolveResult:
    k: int
    lam: float
    c_star: float
    h: float
    h1: float
    h2: float
    ambient: str
    discriminant: float
    alpha: float
    beta: float
    gap_residual: float
    membership_residual: float
    bracket: tuple[float, float]
    iterations: int = 0

    @property
    def params(self) -> CurveParams:
        return make_params(self.k, self.lam, self.c_star)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return d


def describe_root(params: CurveParams, cd: ClosingData, bracket=(math.nan, math.nan),
                  iterations: int = 0, target: str | None = None) -> SolveResult:
    """Classify a closing solution and attach the corrected frame and residuals.

    ``target`` forces the ambient space (used for non-closing inputs); by
    default it is read off |h|.
    """
    h = cd.h
    if target is None or (target in DS_TAGS and abs(h) < 1):
        ambient = classify(h, params.c, params.k, params.lam)
    else:
        ambient = target
    alpha, beta = initial_frame(h, ambient)
    member = max(
        membership_residual(conjugated_monodromy(cd.phi1, alpha, beta, ambient), ambient),
        membership_residual(conjugated_monodromy(cd.phi2, alpha, beta, ambient), ambient),
    )
    return SolveResult(
        k=params.k,
        lam=params.lam,
        c_star=params.c,
        h=h,
        h1=cd.h1,
        h2=cd.h2,
        ambient=ambient,
        discriminant=discriminant(params.c, params.k, params.lam),
        alpha=alpha,
        beta=beta,
        gap_residual=abs(cd.gap),
        membership_residual=member,
        bracket=(float(bracket[0]), float(bracket[1])),
        iterations=iterations,
    )


def find_root(k: int, lam: float, bracket: tuple[float, float], tol: float = ROOT_TOL,
              integration_tol: float = DEFAULT_RTOL) -> SolveResult:
    """Refine a sign change of h1 - h2 and describe the closing surface."""
    a, b = sorted(float(x) for x in bracket)
    if a <= 0 <= b:
        raise ParameterError(f"bracket [{a}, {b}] contains the excluded value c = 0")
    base = make_params(k, lam, a)

    def gap(c):
        return h_gap(base.with_c(c), integration_tol)

    try:
        ga, gb = gap(a), gap(b)
    except DegenerateDenominatorError as exc:
        raise DegenerateDenominatorError(f"h undefined at a bracket end: {exc}") from exc
    if ga == 0:
        c_star, iterations = a, 0
    elif gb == 0:
        c_star, iterations = b, 0
    elif ga * gb > 0:
        raise NoSignChangeError(
            f"h1 - h2 has the same sign at both ends of [{a}, {b}] ({ga:.3g}, {gb:.3g})"
        )
    else:
        c_star, info = brentq(gap, a, b, xtol=tol, full_output=True)
        iterations = info.iterations
    params = base.with_c(c_star)
    cd = closing_pair(params, tol=integration_tol)
    if abs(cd.gap) > POLE_GAP * max(1.0, abs(cd.h)):
        raise SpuriousRootError(
            f"sign change in [{a}, {b}] is a pole of h1 - h2 (gap {cd.gap:.3g} at c = {c_star:.9g})"
        )
    return describe_root(params, cd, (a, b), iterations)


def solve_all(k: int, lam: float, c_range: tuple[float, float] = SCAN_RANGE,
              steps: int = SCAN_STEPS, exclusion: float = ZERO_EXCLUSION,
              tol: float = ROOT_TOL, integration_tol: float = DEFAULT_RTOL,
              workers: int | None = None) -> list[SolveResult]:
    """Every closing root found by scanning ``c_range`` and refining each bracket."""
    samples = scan(k, lam, c_range[0], c_range[1], steps, exclusion, integration_tol, workers)
    results = []
    for bracket in find_brackets(samples):
        try:
            results.append(find_root(k, lam, bracket, tol, integration_tol))
        except (SpuriousRootError, ExcludedRootError, DegenerateDenominatorError) as exc:
            log.debug("bracket %s rejected: %s", bracket, exc)
    return results


def matches_target(result: SolveResult, target: str) -> bool:
    if target == DS:
        return result.ambient in DS_TAGS
    return result.ambient == target


def solve_target(k: int, lam: float, target: str, bracket: tuple[float, float] | None = None,
                 **kwargs) -> SolveResult:
    """One root of the requested type; raises :class:`NoSignChangeError` if none exists.

    Without a bracket, the default grid is scanned; when it holds no root of
    the requested type, a grid four times finer is tried before giving up.
    Among several matches the one with the smallest |c| is returned.
    """
    if bracket is not None:
        result = find_root(k, lam, bracket, kwargs.get("tol", ROOT_TOL),
                           kwargs.get("integration_tol", DEFAULT_RTOL))
        if not matches_target(result, target):
            raise NoSignChangeError(
                f"root c = {result.c_star:.9g} in {bracket} is {result.ambient}, not {target}"
            )
        return result
    steps = kwargs.pop("steps", SCAN_STEPS)
    for attempt in (steps, 4 * steps):
        found = [r for r in solve_all(k, lam, steps=attempt, **kwargs) if matches_target(r, target)]
        if found:
            return min(found, key=lambda r: abs(r.c_star))
    raise NoSignChangeError(f"no {target} root found for k={k}, lambda={lam}")


@dataclass
class TableRow:
    k: int
    results: dict[str, SolveResult] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)


def table(k_values, lam: float = 2.0, workers: int | None = None, **kwargs) -> list[TableRow]:
    """The H3, elliptic and hyperbolic root for each genus in ``k_values``."""

    def row(k: int) -> TableRow:
        out = TableRow(k)
        try:
            roots = solve_all(k, lam, workers=1, **kwargs)
        except CMCError as exc:
            out.diagnostics.append(f"scan failed: {exc}")
            return out
        for target in TARGETS:
            found = [r for r in roots if r.ambient == target]
            if found:
                out.results[target] = min(found, key=lambda r: abs(r.c_star))
            else:
                out.diagnostics.append(f"no {target} root")
        return out

    k_values = list(k_values)
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(row, k_values))
    return [row(k) for k in k_values]


@dataclass
class Continuation:
    results: list[SolveResult]
    lambdas: list[float]
    diagnostic: str | None = None

    @property
    def complete(self) -> bool:
        return self.diagnostic is None


def continue_in_lambda(k: int, lambda_from: float, lambda_to: float, steps: int,
                       seed_c: float, width: float = 0.1, tol: float = ROOT_TOL) -> Continuation:
    """Follow a root c*(lam) from ``lambda_from`` to ``lambda_to`` in ``steps`` increments.

    Each step re-solves in the bracket c_prev * (1 -/+ width).  The walk stops
    with a diagnostic when no sign change is found.
    """
    def solve_near(lam, c):
        half = width * abs(c)
        return find_root(k, lam, (c - half, c + half), tol)

    try:
        seed = solve_near(lambda_from, seed_c)
    except CMCError as exc:
        return Continuation([], [], f"seed c = {seed_c} is not a root at lambda = {lambda_from}: {exc}")
    if steps <= 0:
        return Continuation([seed], [lambda_from])

    results, lambdas = [], []
    c = seed.c_star
    for lam in np.linspace(lambda_from, lambda_to, steps + 1)[1:]:
        lam = float(lam)
        try:
            res = solve_near(lam, c)
        except CMCError as exc:
            return Continuation(results, lambdas, f"branch lost at lambda = {lam:.6g}: {exc}")
        results.append(res)
        lambdas.append(lam)
        c = res.c_star
    return Continuation(results, lambdas)
