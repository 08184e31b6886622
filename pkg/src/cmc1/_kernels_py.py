"""Pure-Python transport kernels.

Used when the compiled ``_kernels`` extension is unavailable, or when
``CMC1_PURE_PYTHON=1`` is set.  Both implementations share one calling
convention; see :mod:`cmc1._backend`.

Segment rows (float64, 10 columns)::

    kind, inverted, center.re, center.im, u.re, u.im, v.re, v.im, t0, t1

kind 0 is a line ``center + u*s``, kind 1 an elliptic arc
``center + u*cos(s) + v*sin(s)``, with ``s = t0 + (t1 - t0)*t`` for the
segment parameter ``t`` in [0, 1].  ``inverted`` applies ``z -> 1/z``.

State vector (8 complex): w, A, B, C, D, then the running integrals of
Omega, G*Omega and G^2*Omega.
"""

import cmath
import math

import numpy as np

OK = 0
STEP_UNDERFLOW = 1
TOO_MANY_STEPS = 2
REACHED_END = 3
NOT_FINITE = 4

NSTATE = 8
END_RADIUS = 1e12
SNAP_LIMIT = 1e-6
MIN_STEP = 1e-13

# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def segment_point(seg, t):
    """Return (z, dz/dt) on one segment row."""
    t0, t1 = seg[8], seg[9]
    s = t0 + (t1 - t0) * t
    ctr = complex(seg[2], seg[3])
    u = complex(seg[4], seg[5])
    if seg[0] == 0:
        z = ctr + u * s
        dz = u * (t1 - t0)
    else:
        v = complex(seg[6], seg[7])
        cs, sn = math.cos(s), math.sin(s)
        z = ctr + u * cs + v * sn
        dz = (v * cs - u * sn) * (t1 - t0)
    if seg[1]:
        z = 1 / z
        dz = -dz * z * z
    return z, dz


def _rhs(y, z, dz, k, lam, c, gscale):
    w = y[0]
    inv_z = 1 / z
    lw = (inv_z + k / (z - 1 / lam) + k / (lam - z)) / (k + 1)
    g = gscale * w
    om = c * inv_z / w
    gom = gscale * c * inv_z
    g2om = gom * g
    a, b, cc, d = y[1], y[2], y[3], y[4]
    return [
        w * lw * dz,
        (gom * a - g2om * cc) * dz,
        (gom * b - g2om * d) * dz,
        (om * a - gom * cc) * dz,
        (om * b - gom * d) * dz,
        om * dz,
        gom * dz,
        g2om * dz,
    ]


def _snap(z, w, k, lam):
    value = z * ((z - 1 / lam) / (lam - z)) ** k
    snapped = w * cmath.exp(cmath.log(value / w ** (k + 1)) / (k + 1))
    return snapped, abs(snapped - w) / abs(w)


def transport_segments(segs, k, lam, c, state0, rtol, atol, max_steps, h0=0.01):
    """Adaptive Dormand-Prince integration of the state along all segments.

    Returns ``(state, n_steps, n_rejected, error_sum, status, fail_position)``.
    """
    k = int(k)
    gscale = math.exp(k / (k + 1) * math.log(lam))
    y = [complex(v) for v in state0]
    n_acc = n_rej = 0
    err_sum = 0.0
    for iseg in range(len(segs)):
        seg = segs[iseg]
        t = 0.0
        h = h0
        z, dz = segment_point(seg, t)
        k1 = _rhs(y, z, dz, k, lam, c, gscale)
        while t < 1.0:
            if n_acc + n_rej >= max_steps:
                return np.array(y), n_acc, n_rej, err_sum, TOO_MANY_STEPS, iseg + t
            if h < MIN_STEP:
                return np.array(y), n_acc, n_rej, err_sum, STEP_UNDERFLOW, iseg + t
            last = t + h >= 1.0
            if last:
                h = 1.0 - t
            ks = [k1]
            for stage in range(1, 7):
                coef = _A[stage]
                yi = [
                    y[n] + h * sum(coef[j] * ks[j][n] for j in range(stage) if coef[j])
                    for n in range(NSTATE)
                ]
                zs, dzs = segment_point(seg, 1.0 if (last and stage >= 5) else t + _C[stage] * h)
                ks.append(_rhs(yi, zs, dzs, k, lam, c, gscale))
            ynew = yi  # stage 7 argument is the 5th-order solution (FSAL)
            err = 0.0
            abs_err = 0.0
            for n in range(NSTATE):
                e = h * sum(_E[j] * ks[j][n] for j in range(7) if _E[j])
                ae = abs(e)
                sc = atol + rtol * max(abs(y[n]), abs(ynew[n]))
                err = max(err, ae / sc)
                abs_err = max(abs_err, ae)
            if not all(cmath.isfinite(v) for v in ynew) or not math.isfinite(err):
                if h < MIN_STEP:
                    return np.array(y), n_acc, n_rej, err_sum, NOT_FINITE, iseg + t
                h *= 0.25
                n_rej += 1
                continue
            if err <= 1.0:
                znew = zs
                wsnap, moved = _snap(znew, ynew[0], k, lam)
                if moved > SNAP_LIMIT:
                    h *= 0.5
                    n_rej += 1
                    continue
                ynew[0] = wsnap
                y = ynew
                t = 1.0 if last else t + h
                k1 = ks[6]
                n_acc += 1
                err_sum += abs_err
                if abs(znew) > END_RADIUS or abs(wsnap) > END_RADIUS or abs(wsnap) < 1 / END_RADIUS:
                    return np.array(y), n_acc, n_rej, err_sum, REACHED_END, iseg + t
                fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h *= fac
            else:
                n_rej += 1
                h *= max(0.2, 0.9 * err ** -0.2)
    return np.array(y), n_acc, n_rej, err_sum, OK, float(len(segs))


def _unwrap(angle, previous):
    return angle + 2 * math.pi * round((previous - angle) / (2 * math.pi))


def oracle_transport(segs, k, lam, c, w_start, frame0, n_steps):
    """Classical fixed-step RK4 with w from the continuously unwrapped logarithm.

    Shares no code with the adaptive path: w is never integrated or snapped,
    it is recomputed from log z + k log(z - 1/lam) - k log(lam - z).
    Returns ``[w, A, B, C, D]`` at the end of the path.
    """
    k = int(k)
    inv_lam = 1 / lam
    gscale = lam ** (k / (k + 1))
    f = [complex(v) for v in frame0]
    z, _ = segment_point(segs[0], 0.0)
    args = [cmath.phase(z), cmath.phase(z - inv_lam), cmath.phase(lam - z)]

    def log_value(z, args, commit):
        a1 = _unwrap(cmath.phase(z), args[0])
        a2 = _unwrap(cmath.phase(z - inv_lam), args[1])
        a3 = _unwrap(cmath.phase(lam - z), args[2])
        if commit:
            args[:] = [a1, a2, a3]
        re = math.log(abs(z)) + k * math.log(abs(z - inv_lam)) - k * math.log(abs(lam - z))
        return complex(re, a1 + k * a2 - k * a3)

    log0 = log_value(z, args, False)

    def deriv(fr, z, dz, commit):
        w = w_start * cmath.exp((log_value(z, args, commit) - log0) / (k + 1))
        g = gscale * w
        om = c / (z * w)
        a, b, cc, d = fr
        return [
            om * (g * a - g * g * cc) * dz,
            om * (g * b - g * g * d) * dz,
            om * (a - g * cc) * dz,
            om * (b - g * d) * dz,
        ], w

    w = w_start
    for seg in segs:
        h = 1.0 / n_steps
        for i in range(n_steps):
            t = i * h
            z1, d1 = segment_point(seg, t)
            zm, dm = segment_point(seg, t + 0.5 * h)
            z2, d2 = segment_point(seg, t + h)
            s1, _ = deriv(f, z1, d1, False)
            s2, _ = deriv([f[n] + 0.5 * h * s1[n] for n in range(4)], zm, dm, False)
            s3, _ = deriv([f[n] + 0.5 * h * s2[n] for n in range(4)], zm, dm, False)
            s4, w = deriv([f[n] + h * s3[n] for n in range(4)], z2, d2, True)
            f = [f[n] + h / 6 * (s1[n] + 2 * s2[n] + 2 * s3[n] + s4[n]) for n in range(4)]
    return np.array([w] + f)
