# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transport kernels; same calling convention as ``_kernels_py``."""

import numpy as np
from libc.math cimport sin, cos, exp, log, pow, atan2, hypot, floor, isfinite

cdef enum:
    NSTATE = 8

cdef int OK = 0
cdef int STEP_UNDERFLOW = 1
cdef int TOO_MANY_STEPS = 2
cdef int REACHED_END = 3
cdef int NOT_FINITE = 4

cdef double END_RADIUS = 1e12
cdef double SNAP_LIMIT = 1e-6
cdef double MIN_STEP = 1e-13
cdef double TWO_PI = 6.283185307179586

cdef double C_[7]
cdef double A_[7][6]
cdef double E_[7]

C_[:] = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
A_[0][:] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
A_[1][:] = [1.0 / 5, 0.0, 0.0, 0.0, 0.0, 0.0]
A_[2][:] = [3.0 / 40, 9.0 / 40, 0.0, 0.0, 0.0, 0.0]
A_[3][:] = [44.0 / 45, -56.0 / 15, 32.0 / 9, 0.0, 0.0, 0.0]
A_[4][:] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0.0, 0.0]
A_[5][:] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0.0]
A_[6][:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
E_[:] = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


cdef inline double cabs_(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline double complex cexp_(double complex z) noexcept nogil:
    cdef double m = exp(z.real)
    return m * cos(z.imag) + 1j * (m * sin(z.imag))


cdef inline double complex clog_(double complex z) noexcept nogil:
    return log(cabs_(z)) + 1j * atan2(z.imag, z.real)


cdef inline double complex cpowi(double complex z, int n) noexcept nogil:
    cdef double complex r = 1.0
    cdef int i
    for i in range(n):
        r = r * z
    return r


cdef inline void seg_point(const double[:, ::1] segs, Py_ssize_t i, double t,
                           double complex *z, double complex *dz) noexcept nogil:
    cdef double t0 = segs[i, 8]
    cdef double t1 = segs[i, 9]
    cdef double s = t0 + (t1 - t0) * t
    cdef double complex ctr = segs[i, 2] + 1j * segs[i, 3]
    cdef double complex u = segs[i, 4] + 1j * segs[i, 5]
    cdef double complex v
    cdef double cs, sn
    if segs[i, 0] == 0:
        z[0] = ctr + u * s
        dz[0] = u * (t1 - t0)
    else:
        v = segs[i, 6] + 1j * segs[i, 7]
        cs = cos(s)
        sn = sin(s)
        z[0] = ctr + u * cs + v * sn
        dz[0] = (v * cs - u * sn) * (t1 - t0)
    if segs[i, 1] != 0:
        z[0] = 1.0 / z[0]
        dz[0] = -dz[0] * z[0] * z[0]


cdef inline void rhs(const double complex *y, double complex z, double complex dz, int k,
                     double lam, double c, double gscale, double complex *out) noexcept nogil:
    cdef double complex w = y[0]
    cdef double complex inv_z = 1.0 / z
    cdef double complex lw = (inv_z + k / (z - 1.0 / lam) + k / (lam - z)) / (k + 1)
    cdef double complex g = gscale * w
    cdef double complex om = c * inv_z / w
    cdef double complex gom = gscale * c * inv_z
    cdef double complex g2om = gom * g
    out[0] = w * lw * dz
    out[1] = (gom * y[1] - g2om * y[3]) * dz
    out[2] = (gom * y[2] - g2om * y[4]) * dz
    out[3] = (om * y[1] - gom * y[3]) * dz
    out[4] = (om * y[2] - gom * y[4]) * dz
    out[5] = om * dz
    out[6] = gom * dz
    out[7] = g2om * dz


cdef inline double complex snap(double complex z, double complex w, int k, double lam,
                                double *moved) noexcept nogil:
    cdef double complex value = z * cpowi((z - 1.0 / lam) / (lam - z), k)
    cdef double complex snapped = w * cexp_(clog_(value / cpowi(w, k + 1)) / (k + 1))
    moved[0] = cabs_(snapped - w) / cabs_(w)
    return snapped


cdef int _transport(const double[:, ::1] segs, int k, double lam, double c,
                    double complex *y, double rtol, double atol, long max_steps, double h0,
                    long *n_acc, long *n_rej, double *err_sum, double *fail_pos) noexcept nogil:
    cdef double gscale = exp(k / (k + 1.0) * log(lam))
    cdef double complex ks[7][NSTATE]
    cdef double complex yi[NSTATE]
    cdef double complex z, dz, zs, dzs, e, acc, wsnap
    cdef double t, h, err, abs_err, ae, sc, moved, fac, ts
    cdef bint last, finite
    cdef Py_ssize_t iseg, nseg = segs.shape[0]
    cdef int stage, j, n
    for iseg in range(nseg):
        t = 0.0
        h = h0
        seg_point(segs, iseg, t, &z, &dz)
        rhs(y, z, dz, k, lam, c, gscale, ks[0])
        while t < 1.0:
            if n_acc[0] + n_rej[0] >= max_steps:
                fail_pos[0] = iseg + t
                return TOO_MANY_STEPS
            if h < MIN_STEP:
                fail_pos[0] = iseg + t
                return STEP_UNDERFLOW
            last = t + h >= 1.0
            if last:
                h = 1.0 - t
            for stage in range(1, 7):
                for n in range(NSTATE):
                    acc = 0.0
                    for j in range(stage):
                        acc = acc + A_[stage][j] * ks[j][n]
                    yi[n] = y[n] + h * acc
                if last and stage >= 5:
                    ts = 1.0
                else:
                    ts = t + C_[stage] * h
                seg_point(segs, iseg, ts, &zs, &dzs)
                rhs(yi, zs, dzs, k, lam, c, gscale, ks[stage])
            err = 0.0
            abs_err = 0.0
            finite = True
            for n in range(NSTATE):
                e = 0.0
                for j in range(7):
                    e = e + E_[j] * ks[j][n]
                ae = h * cabs_(e)
                sc = atol + rtol * max(cabs_(y[n]), cabs_(yi[n]))
                if ae / sc > err:
                    err = ae / sc
                if ae > abs_err:
                    abs_err = ae
                if not (isfinite(yi[n].real) and isfinite(yi[n].imag)):
                    finite = False
            if not finite or not isfinite(err):
                if h < MIN_STEP:
                    fail_pos[0] = iseg + t
                    return NOT_FINITE
                h *= 0.25
                n_rej[0] += 1
                continue
            if err <= 1.0:
                wsnap = snap(zs, yi[0], k, lam, &moved)
                if moved > SNAP_LIMIT:
                    h *= 0.5
                    n_rej[0] += 1
                    continue
                yi[0] = wsnap
                for n in range(NSTATE):
                    y[n] = yi[n]
                    ks[0][n] = ks[6][n]
                if last:
                    t = 1.0
                else:
                    t = t + h
                n_acc[0] += 1
                err_sum[0] += abs_err
                if cabs_(zs) > END_RADIUS or cabs_(wsnap) > END_RADIUS or cabs_(wsnap) < 1.0 / END_RADIUS:
                    fail_pos[0] = iseg + t
                    return REACHED_END
                if err == 0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
                h *= fac
            else:
                n_rej[0] += 1
                h *= max(0.2, 0.9 * pow(err, -0.2))
    fail_pos[0] = nseg
    return OK


def transport_segments(segs, int k, double lam, double c, state0, double rtol, double atol,
                       long max_steps, double h0=0.01):
    cdef const double[:, ::1] sv = np.ascontiguousarray(segs, dtype=np.float64)
    cdef double complex y[NSTATE]
    cdef long n_acc = 0, n_rej = 0
    cdef double err_sum = 0.0, fail_pos = 0.0
    cdef int status, n
    s0 = np.asarray(state0, dtype=np.complex128)
    for n in range(NSTATE):
        y[n] = s0[n]
    with nogil:
        status = _transport(sv, k, lam, c, y, rtol, atol, max_steps, h0,
                            &n_acc, &n_rej, &err_sum, &fail_pos)
    out = np.empty(NSTATE, dtype=np.complex128)
    for n in range(NSTATE):
        out[n] = y[n]
    return out, n_acc, n_rej, err_sum, status, fail_pos


cdef inline double unwrap(double angle, double previous) noexcept nogil:
    return angle + TWO_PI * floor((previous - angle) / TWO_PI + 0.5)


cdef inline void oracle_deriv(const double complex *f, double complex z, double complex dz,
                              int k, double lam, double c, double gscale,
                              double complex w_start, double complex log0, double *args,
                              bint commit, double complex *out, double complex *w_out) noexcept nogil:
    cdef double a1 = unwrap(atan2(z.imag, z.real), args[0])
    cdef double complex zm = z - 1.0 / lam
    cdef double complex zl = lam - z
    cdef double a2 = unwrap(atan2(zm.imag, zm.real), args[1])
    cdef double a3 = unwrap(atan2(zl.imag, zl.real), args[2])
    cdef double complex lv
    cdef double complex w, g, om
    if commit:
        args[0] = a1
        args[1] = a2
        args[2] = a3
    lv = (log(cabs_(z)) + k * log(cabs_(zm)) - k * log(cabs_(zl))) + 1j * (a1 + k * a2 - k * a3)
    w = w_start * cexp_((lv - log0) / (k + 1))
    g = gscale * w
    om = c / (z * w)
    out[0] = om * (g * f[0] - g * g * f[2]) * dz
    out[1] = om * (g * f[1] - g * g * f[3]) * dz
    out[2] = om * (f[0] - g * f[2]) * dz
    out[3] = om * (f[1] - g * f[3]) * dz
    w_out[0] = w


def oracle_transport(segs, int k, double lam, double c, double complex w_start, frame0,
                     long n_steps):
    cdef const double[:, ::1] sv = np.ascontiguousarray(segs, dtype=np.float64)
    cdef double gscale = lam ** (k / (k + 1.0))
    cdef double complex f[4]
    cdef double complex tmp[4]
    cdef double complex s1[4]
    cdef double complex s2[4]
    cdef double complex s3[4]
    cdef double complex s4[4]
    cdef double complex z, dz, z1, d1, zm, dm, z2, d2, w, wdummy, log0
    cdef double args[3]
    cdef double h, t
    cdef long i
    cdef Py_ssize_t iseg
    cdef int n
    fr = np.asarray(frame0, dtype=np.complex128)
    for n in range(4):
        f[n] = fr[n]
    seg_point(sv, 0, 0.0, &z, &dz)
    args[0] = atan2(z.imag, z.real)
    args[1] = atan2(z.imag, z.real - 1.0 / lam)
    args[2] = atan2(-z.imag, lam - z.real)
    log0 = (log(cabs_(z)) + k * log(cabs_(z - 1.0 / lam)) - k * log(cabs_(lam - z))) \
        + 1j * (args[0] + k * args[1] - k * args[2])
    w = w_start
    h = 1.0 / n_steps
    with nogil:
        for iseg in range(sv.shape[0]):
            for i in range(n_steps):
                t = i * h
                seg_point(sv, iseg, t, &z1, &d1)
                seg_point(sv, iseg, t + 0.5 * h, &zm, &dm)
                seg_point(sv, iseg, t + h, &z2, &d2)
                oracle_deriv(f, z1, d1, k, lam, c, gscale, w_start, log0, args, False, s1, &wdummy)
                for n in range(4):
                    tmp[n] = f[n] + 0.5 * h * s1[n]
                oracle_deriv(tmp, zm, dm, k, lam, c, gscale, w_start, log0, args, False, s2, &wdummy)
                for n in range(4):
                    tmp[n] = f[n] + 0.5 * h * s2[n]
                oracle_deriv(tmp, zm, dm, k, lam, c, gscale, w_start, log0, args, False, s3, &wdummy)
                for n in range(4):
                    tmp[n] = f[n] + h * s3[n]
                oracle_deriv(tmp, z2, d2, k, lam, c, gscale, w_start, log0, args, True, s4, &w)
                for n in range(4):
                    f[n] = f[n] + h / 6.0 * (s1[n] + 2.0 * s2[n] + 2.0 * s3[n] + s4[n])
    out = np.empty(5, dtype=np.complex128)
    out[0] = w
    for n in range(4):
        out[n + 1] = f[n]
    return out
