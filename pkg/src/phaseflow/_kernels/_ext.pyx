# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the reference kernels in `_pyref`.

Same signatures, same math, C loops.  See `_pyref` for the conventions
(coefficient layout, kick-drift-kick step, RK4 flows, spline remap).
"""

from libc.math cimport cos, log, sqrt, floor

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double SPLINE_POLE = sqrt(3.0) - 2.0
cdef int FILTER_HORIZON = 40


cdef inline void eff_coeffs(double* c, const double[::1] coeffs, const long[::1] dk,
                            const double[::1] damp, const double[::1] domega,
                            const double[::1] dphase, double t) noexcept nogil:
    cdef Py_ssize_t j, i
    for j in range(coeffs.shape[0]):
        c[j] = coeffs[j]
    for i in range(dk.shape[0]):
        c[dk[i]] += damp[i] * cos(domega[i] * t + dphase[i])


cdef inline void derivs_scalar(const double* c, int d, double x, double* dv) noexcept nogil:
    """dv[q] = q-th derivative of sum c_j x^j, q = 0..d."""
    cdef int q, j, i
    cdef double acc, perm
    for q in range(d + 1):
        acc = 0.0
        for j in range(d, q - 1, -1):
            # perm(j, q) = j! / (j-q)!
            perm = 1.0
            for i in range(j - q + 1, j + 1):
                perm *= i
            acc = acc * x + c[j] * perm
        dv[q] = acc


cdef inline double force_scalar(const double* c, int d, double x) noexcept nogil:
    cdef double acc
    cdef int j
    if d < 1:
        return 0.0
    acc = c[d] * d
    for j in range(d - 1, 0, -1):
        acc = acc * x + c[j] * j
    return -acc


# ----------------------------------------------------------------------
def leapfrog_ensemble(double[::1] x, double[::1] p, const double[::1] coeffs,
                      const long[::1] dk, const double[::1] damp, const double[::1] domega,
                      const double[::1] dphase, double mass, double dt, long n_steps,
                      double t0):
    """Advance particles in place by n_steps of kick-drift-kick."""
    cdef double c[13]
    cdef int d = coeffs.shape[0] - 1
    cdef double inv_m = 1.0 / mass
    cdef double half = 0.5 * dt
    cdef double t = t0
    cdef Py_ssize_t npart = x.shape[0]
    cdef Py_ssize_t i
    cdef long s
    with nogil:
        for s in range(n_steps):
            eff_coeffs(c, coeffs, dk, damp, domega, dphase, t + half)
            for i in range(npart):
                p[i] += half * force_scalar(c, d, x[i])
                x[i] += dt * inv_m * p[i]
                p[i] += half * force_scalar(c, d, x[i])
            t += dt
    return None


# ----------------------------------------------------------------------
cdef inline void gauss_rhs(int rule, const double* y, const double* c, int d,
                           double mass, double* out) noexcept nogil:
    cdef double x = y[0], p = y[1], cxx = y[2], cxp = y[3], cpp = y[4]
    cdef double dv[13]
    cdef double f_odd = 0.0, f_even = 0.0, w = 1.0
    cdef double dp, dcxp, dcpp
    cdef double inv_m = 1.0 / mass
    cdef int n = 0
    derivs_scalar(c, d, x, dv)
    if rule == 0:
        while True:
            if 2 * n + 1 <= d:
                f_odd += w * dv[2 * n + 1]
            if 2 * n + 2 <= d:
                f_even += w * dv[2 * n + 2]
            n += 1
            if 2 * n + 1 > d:
                break
            w *= cxx / (2.0 * n)
        dp = -f_odd
        dcxp = cpp * inv_m - cxx * f_even
        dcpp = -2.0 * cxp * f_even
    elif rule == 1:
        dp = -dv[1]
        dcxp = cpp * inv_m - (cxx * dv[2] if d >= 2 else 0.0)
        dcpp = -2.0 * cxp * dv[2] if d >= 2 else 0.0
    else:
        dp = -dv[1] - (0.5 * cxx * dv[3] if d >= 3 else 0.0)
        dcxp = cpp * inv_m - (cxx * dv[2] if d >= 2 else 0.0)
        dcpp = -2.0 * cxp * dv[2] if d >= 2 else 0.0
    out[0] = p * inv_m
    out[1] = dp
    out[2] = 2.0 * cxp * inv_m
    out[3] = dcxp
    out[4] = dcpp


def gaussian_flow(int rule, double[::1] y, const double[::1] coeffs, const long[::1] dk,
                  const double[::1] damp, const double[::1] domega, const double[::1] dphase,
                  double mass, double dt, long n_steps, double t0, long stride,
                  double[:, ::1] out):
    """RK4 flow of (xbar, pbar, cxx, cxp, cpp); snapshots every `stride` steps into `out`."""
    cdef double c0[13]
    cdef double c1[13]
    cdef double c2[13]
    cdef double state[5]
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double tmp[5]
    cdef int d = coeffs.shape[0] - 1
    cdef int i
    cdef long s
    cdef Py_ssize_t row = 0
    cdef double t = t0
    cdef bint static = dk.shape[0] == 0
    for i in range(5):
        state[i] = y[i]
        out[0, i] = y[i]
    with nogil:
        if static:
            eff_coeffs(c0, coeffs, dk, damp, domega, dphase, 0.0)
            eff_coeffs(c1, coeffs, dk, damp, domega, dphase, 0.0)
            eff_coeffs(c2, coeffs, dk, damp, domega, dphase, 0.0)
        for s in range(1, n_steps + 1):
            if not static:
                eff_coeffs(c0, coeffs, dk, damp, domega, dphase, t)
                eff_coeffs(c1, coeffs, dk, damp, domega, dphase, t + 0.5 * dt)
                eff_coeffs(c2, coeffs, dk, damp, domega, dphase, t + dt)
            gauss_rhs(rule, state, c0, d, mass, k1)
            for i in range(5):
                tmp[i] = state[i] + 0.5 * dt * k1[i]
            gauss_rhs(rule, tmp, c1, d, mass, k2)
            for i in range(5):
                tmp[i] = state[i] + 0.5 * dt * k2[i]
            gauss_rhs(rule, tmp, c1, d, mass, k3)
            for i in range(5):
                tmp[i] = state[i] + dt * k3[i]
            gauss_rhs(rule, tmp, c2, d, mass, k4)
            for i in range(5):
                state[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            t = t0 + s * dt
            if s % stride == 0:
                row += 1
                for i in range(5):
                    out[row, i] = state[i]
    for i in range(5):
        y[i] = state[i]
    return None


# ----------------------------------------------------------------------
cdef inline void rho_rhs(const double* y, const double* c, int d, double mass,
                         double inv_factor, double* out) noexcept nogil:
    cdef double x = y[0], p = y[1], rho = y[2], gamma = y[3]
    cdef double dv[13]
    cdef double rho2 = rho * rho
    cdef double f_odd = 0.0, f_even = 0.0, w = 1.0
    cdef double inv_m = 1.0 / mass
    cdef int n = 0
    derivs_scalar(c, d, x, dv)
    while True:
        if 2 * n + 1 <= d:
            f_odd += w * dv[2 * n + 1]
        if 2 * n + 2 <= d:
            f_even += w * dv[2 * n + 2]
        n += 1
        if 2 * n + 1 > d:
            break
        w *= rho2 / (2.0 * n)
    out[0] = p * inv_m
    out[1] = -f_odd
    out[2] = gamma * inv_m
    out[3] = inv_factor / (mass * rho2 * rho) - rho * f_even


def rho_flow(double[::1] y, double inv_factor, const double[::1] coeffs, const long[::1] dk,
             const double[::1] damp, const double[::1] domega, const double[::1] dphase,
             double mass, double dt, long n_steps, double t0, long stride,
             double[:, ::1] out):
    """RK4 flow in the width chart; `inv_factor` multiplies the 1/rho^3 pressure term."""
    cdef double c0[13]
    cdef double c1[13]
    cdef double c2[13]
    cdef double state[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double tmp[4]
    cdef int d = coeffs.shape[0] - 1
    cdef int i
    cdef long s
    cdef Py_ssize_t row = 0
    cdef double t = t0
    cdef bint static = dk.shape[0] == 0
    for i in range(4):
        state[i] = y[i]
        out[0, i] = y[i]
    with nogil:
        if static:
            eff_coeffs(c0, coeffs, dk, damp, domega, dphase, 0.0)
            eff_coeffs(c1, coeffs, dk, damp, domega, dphase, 0.0)
            eff_coeffs(c2, coeffs, dk, damp, domega, dphase, 0.0)
        for s in range(1, n_steps + 1):
            if not static:
                eff_coeffs(c0, coeffs, dk, damp, domega, dphase, t)
                eff_coeffs(c1, coeffs, dk, damp, domega, dphase, t + 0.5 * dt)
                eff_coeffs(c2, coeffs, dk, damp, domega, dphase, t + dt)
            rho_rhs(state, c0, d, mass, inv_factor, k1)
            for i in range(4):
                tmp[i] = state[i] + 0.5 * dt * k1[i]
            rho_rhs(tmp, c1, d, mass, inv_factor, k2)
            for i in range(4):
                tmp[i] = state[i] + 0.5 * dt * k2[i]
            rho_rhs(tmp, c1, d, mass, inv_factor, k3)
            for i in range(4):
                tmp[i] = state[i] + dt * k3[i]
            rho_rhs(tmp, c2, d, mass, inv_factor, k4)
            for i in range(4):
                state[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            t = t0 + s * dt
            if s % stride == 0:
                row += 1
                for i in range(4):
                    out[row, i] = state[i]
    for i in range(4):
        y[i] = state[i]
    return None


# ----------------------------------------------------------------------
cdef inline void combined_rhs(int system, const double* y, const double* u, const double* c,
                              int d, double mass, double inv_factor, double* fy,
                              double* fu) noexcept nogil:
    cdef double dv[13]
    cdef double inv_m = 1.0 / mass
    cdef double x, p, rho, gamma, rho2, w
    cdef double f_odd, f_even, f_odd3, g_even, dpx, dpr, dgr, v2
    cdef int n
    if system == 0:
        derivs_scalar(c, d, y[0], dv)
        v2 = dv[2] if d >= 2 else 0.0
        fy[0] = y[1] * inv_m
        fy[1] = -dv[1]
        fu[0] = u[1] * inv_m
        fu[1] = -v2 * u[0]
        return
    x = y[0]; p = y[1]; rho = y[2]; gamma = y[3]
    derivs_scalar(c, d, x, dv)
    rho2 = rho * rho
    f_odd = 0.0; f_even = 0.0; f_odd3 = 0.0; g_even = 0.0
    w = 1.0
    n = 0
    while True:
        if 2 * n + 1 <= d:
            f_odd += w * dv[2 * n + 1]
        if 2 * n + 2 <= d:
            f_even += w * dv[2 * n + 2]
            g_even += (2 * n + 1) * w * dv[2 * n + 2]
        if 2 * n + 3 <= d:
            f_odd3 += w * dv[2 * n + 3]
        n += 1
        if 2 * n + 1 > d:
            break
        w *= rho2 / (2.0 * n)
    fy[0] = p * inv_m
    fy[1] = -f_odd
    fy[2] = gamma * inv_m
    fy[3] = inv_factor / (mass * rho2 * rho) - rho * f_even
    dpx = -f_even
    dpr = -rho * f_odd3
    dgr = -3.0 * inv_factor / (mass * rho2 * rho2) - g_even
    fu[0] = u[1] * inv_m
    fu[1] = dpx * u[0] + dpr * u[2]
    fu[2] = u[3] * inv_m
    fu[3] = dpr * u[0] + dgr * u[2]


def benettin(int system, double[::1] y, double[::1] u, const double[::1] coeffs,
             const long[::1] dk, const double[::1] damp, const double[::1] domega,
             const double[::1] dphase, double mass, double inv_factor, double dt,
             long steps_per_renorm, long n_renorms, double[::1] log_norms):
    """Benettin loop: evolve state + tangent, renormalize, record log stretch factors."""
    cdef double c[13]
    cdef double state[4]
    cdef double tang[4]
    cdef double k1y[4]
    cdef double k2y[4]
    cdef double k3y[4]
    cdef double k4y[4]
    cdef double k1u[4]
    cdef double k2u[4]
    cdef double k3u[4]
    cdef double k4u[4]
    cdef double ty[4]
    cdef double tu[4]
    cdef int dim = 2 if system == 0 else 4
    cdef int d = coeffs.shape[0] - 1
    cdef int i
    cdef long r, s
    cdef double nrm
    for i in range(dim):
        state[i] = y[i]
        tang[i] = u[i]
    with nogil:
        eff_coeffs(c, coeffs, dk, damp, domega, dphase, 0.0)
        for r in range(n_renorms):
            for s in range(steps_per_renorm):
                combined_rhs(system, state, tang, c, d, mass, inv_factor, k1y, k1u)
                for i in range(dim):
                    ty[i] = state[i] + 0.5 * dt * k1y[i]
                    tu[i] = tang[i] + 0.5 * dt * k1u[i]
                combined_rhs(system, ty, tu, c, d, mass, inv_factor, k2y, k2u)
                for i in range(dim):
                    ty[i] = state[i] + 0.5 * dt * k2y[i]
                    tu[i] = tang[i] + 0.5 * dt * k2u[i]
                combined_rhs(system, ty, tu, c, d, mass, inv_factor, k3y, k3u)
                for i in range(dim):
                    ty[i] = state[i] + dt * k3y[i]
                    tu[i] = tang[i] + dt * k3u[i]
                combined_rhs(system, ty, tu, c, d, mass, inv_factor, k4y, k4u)
                for i in range(dim):
                    state[i] = state[i] + dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i])
                    tang[i] = tang[i] + dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i])
            nrm = 0.0
            for i in range(dim):
                nrm += tang[i] * tang[i]
            nrm = sqrt(nrm)
            log_norms[r] = log(nrm)
            for i in range(dim):
                tang[i] /= nrm
    for i in range(dim):
        y[i] = state[i]
        u[i] = tang[i]
    return None


# ----------------------------------------------------------------------
cdef void filter_axis0(double[:, ::1] a) noexcept nogil:
    """Cubic B-spline prefilter along axis 0, mirror boundary, in place."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef double z = SPLINE_POLE
    cdef Py_ssize_t horizon = FILTER_HORIZON
    cdef Py_ssize_t i, j, k, idx
    cdef double zk, back
    if horizon > 2 * n - 2:
        horizon = 2 * n - 2
    for j in range(m):
        back = a[0, j]
        zk = 1.0
        for k in range(1, horizon):
            zk *= z
            idx = k if k < n else 2 * (n - 1) - k
            back += zk * a[idx, j]
        a[0, j] = back
    for i in range(1, n):
        for j in range(m):
            a[i, j] += z * a[i - 1, j]
    for j in range(m):
        a[n - 1, j] = (z / (z * z - 1.0)) * (a[n - 1, j] + z * a[n - 2, j])
    for i in range(n - 2, -1, -1):
        for j in range(m):
            a[i, j] = z * (a[i + 1, j] - a[i, j])
    for i in range(n):
        for j in range(m):
            a[i, j] *= 6.0


cdef void filter_axis1(double[:, ::1] a) noexcept nogil:
    """Same filter along axis 1 (contiguous rows)."""
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t rows = a.shape[0]
    cdef double z = SPLINE_POLE
    cdef Py_ssize_t horizon = FILTER_HORIZON
    cdef Py_ssize_t i, j, k, idx
    cdef double zk, back
    if horizon > 2 * n - 2:
        horizon = 2 * n - 2
    for i in range(rows):
        back = a[i, 0]
        zk = 1.0
        for k in range(1, horizon):
            zk *= z
            idx = k if k < n else 2 * (n - 1) - k
            back += zk * a[i, idx]
        a[i, 0] = back
        for j in range(1, n):
            a[i, j] += z * a[i, j - 1]
        a[i, n - 1] = (z / (z * z - 1.0)) * (a[i, n - 1] + z * a[i, n - 2])
        for j in range(n - 2, -1, -1):
            a[i, j] = z * (a[i, j + 1] - a[i, j])
        for j in range(n):
            a[i, j] *= 6.0


cdef inline Py_ssize_t mirror_idx(Py_ssize_t idx, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t period = 2 * n - 2
    if idx < 0:
        idx = -idx
    idx = idx % period
    if idx > n - 1:
        idx = period - idx
    return idx


def bicubic_remap(const double[:, ::1] f, const double[:, ::1] ci, const double[:, ::1] cj,
                  double[:, ::1] out):
    """Sample f with cubic B-spline interpolation at fractional indices (ci, cj)."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = f.shape[1]
    coeff_arr = np.array(f, dtype=np.float64, copy=True)
    cdef double[:, ::1] c = coeff_arr
    cdef Py_ssize_t i, j, a, b, ix, jx
    cdef Py_ssize_t ia[4]
    cdef Py_ssize_t jb[4]
    cdef double wx[4]
    cdef double wy[4]
    cdef double x, yv, ux, uy, u2, u3, acc, row
    with nogil:
        filter_axis0(c)
        filter_axis1(c)
        for i in range(ci.shape[0]):
            for j in range(ci.shape[1]):
                x = ci[i, j]
                yv = cj[i, j]
                if x < 0.0 or x > n - 1.0 or yv < 0.0 or yv > m - 1.0:
                    out[i, j] = 0.0
                    continue
                ix = <Py_ssize_t> floor(x)
                jx = <Py_ssize_t> floor(yv)
                if ix > n - 2:
                    ix = n - 2
                if jx > m - 2:
                    jx = m - 2
                ux = x - ix
                uy = yv - jx
                u2 = ux * ux
                u3 = u2 * ux
                wx[0] = (1.0 - 3.0 * ux + 3.0 * u2 - u3) / 6.0
                wx[1] = (4.0 - 6.0 * u2 + 3.0 * u3) / 6.0
                wx[2] = (1.0 + 3.0 * ux + 3.0 * u2 - 3.0 * u3) / 6.0
                wx[3] = u3 / 6.0
                u2 = uy * uy
                u3 = u2 * uy
                wy[0] = (1.0 - 3.0 * uy + 3.0 * u2 - u3) / 6.0
                wy[1] = (4.0 - 6.0 * u2 + 3.0 * u3) / 6.0
                wy[2] = (1.0 + 3.0 * uy + 3.0 * u2 - 3.0 * u3) / 6.0
                wy[3] = u3 / 6.0
                for a in range(4):
                    ia[a] = mirror_idx(ix + a - 1, n)
                    jb[a] = mirror_idx(jx + a - 1, m)
                acc = 0.0
                for a in range(4):
                    row = 0.0
                    for b in range(4):
                        row += wy[b] * c[ia[a], jb[b]]
                    acc += wx[a] * row
                out[i, j] = acc
    return None


def bicubic_remap_planned(const double[:, ::1] f,
                          const long long[:, :, ::1] ia, const long long[:, :, ::1] jb,
                          const double[:, :, ::1] wx, const double[:, :, ::1] wy,
                          const double[:, ::1] inside, double[:, ::1] out):
    """Apply a precomputed tap/weight plan to f; matches bicubic_remap bit for bit."""
    coeff_arr = np.array(f, dtype=np.float64, copy=True)
    cdef double[:, ::1] c = coeff_arr
    cdef Py_ssize_t i, j, a, b
    cdef double acc, row
    with nogil:
        filter_axis0(c)
        filter_axis1(c)
        for i in range(out.shape[0]):
            for j in range(out.shape[1]):
                if inside[i, j] == 0.0:
                    out[i, j] = 0.0
                    continue
                acc = 0.0
                for a in range(4):
                    row = 0.0
                    for b in range(4):
                        row += wy[b, i, j] * c[ia[a, i, j], jb[b, i, j]]
                    acc += wx[a, i, j] * row
                out[i, j] = acc
    return None
