"""Reference implementations of the hot numerical kernels, numpy only.

Every function here has a signature-identical compiled twin in `_ext`; the
package selects one backend at import time.  These versions are the ground
truth for correctness tests and the fallback when the extension is missing.

Shared conventions:
  - polynomial coefficients are passed as a float array (c_0, ..., c_d),
    plus parallel drive arrays (index, amplitude, frequency, phase) giving
    c_k(t) = c_k + amp * cos(omega * t + phase);
  - one time step of the particle map is kick-drift-kick with the potential
    frozen at the step midpoint, which is second order for driven systems
    and time-reversible, so the backward characteristic trace of the grid
    solver is the exact inverse of the particle step;
  - flow integrators are classic fixed-step RK4.
"""

from __future__ import annotations

import math

import numpy as np

SPLINE_POLE = math.sqrt(3.0) - 2.0
_FILTER_HORIZON = 40


# ----------------------------------------------------------------------
# polynomial helpers
# ----------------------------------------------------------------------
def _eff_coeffs(coeffs, dk, damp, domega, dphase, t):
    c = np.array(coeffs, dtype=float, copy=True)
    for i in range(len(dk)):
        c[dk[i]] += damp[i] * math.cos(domega[i] * t + dphase[i])
    return c


def _derivs_scalar(c, x):
    """All derivatives (V, V', ..., V^(d)) of sum c_j x^j at scalar x."""
    d = len(c) - 1
    out = [0.0] * (d + 1)
    for q in range(d + 1):
        acc = 0.0
        for j in range(d, q - 1, -1):
            acc = acc * x + c[j] * math.perm(j, q)
        out[q] = acc
    return out


def _force_array(c, x):
    """-V'(x) for an array of positions."""
    d = len(c) - 1
    if d < 1:
        return np.zeros_like(x)
    acc = np.full_like(x, c[d] * d)
    for j in range(d - 1, 0, -1):
        acc = acc * x + c[j] * j
    return -acc


# ----------------------------------------------------------------------
# particle ensemble
# ----------------------------------------------------------------------
def leapfrog_ensemble(x, p, coeffs, dk, damp, domega, dphase, mass, dt, n_steps, t0):
    """Advance particles in place by n_steps of kick-drift-kick."""
    inv_m = 1.0 / mass
    half = 0.5 * dt
    t = t0
    for _ in range(n_steps):
        c = _eff_coeffs(coeffs, dk, damp, domega, dphase, t + half)
        p += half * _force_array(c, x)
        x += dt * inv_m * p
        p += half * _force_array(c, x)
        t += dt
    return None


# ----------------------------------------------------------------------
# Gaussian-flow right-hand sides
# ----------------------------------------------------------------------
def _gauss_rhs(rule, y, c, mass):
    x, p, cxx, cxp, cpp = y
    d = len(c) - 1
    dv = _derivs_scalar(c, x)
    inv_m = 1.0 / mass
    if rule == 0:
        # self-consistent: Gaussian-averaged force and curvature
        f_odd = 0.0
        f_even = 0.0
        w = 1.0
        n = 0
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
        # bare classical force, local curvature
        dp = -dv[1]
        dcxp = cpp * inv_m - cxx * dv[2] if d >= 2 else cpp * inv_m
        dcpp = -2.0 * cxp * dv[2] if d >= 2 else 0.0
    elif rule == 2:
        # quadratic truncation: one back-reaction term on the mean
        dp = -dv[1] - (0.5 * cxx * dv[3] if d >= 3 else 0.0)
        dcxp = cpp * inv_m - cxx * dv[2] if d >= 2 else cpp * inv_m
        dcpp = -2.0 * cxp * dv[2] if d >= 2 else 0.0
    else:
        raise ValueError(f"unknown flow rule {rule}")
    return (p * inv_m, dp, 2.0 * cxp * inv_m, dcxp, dcpp)


def gaussian_flow(rule, y, coeffs, dk, damp, domega, dphase, mass, dt, n_steps, t0, stride, out):
    """RK4 flow of (xbar, pbar, cxx, cxp, cpp); snapshots every `stride` steps into `out`."""
    state = tuple(float(v) for v in y)
    row = 0
    out[row, :] = state
    t = t0
    static = len(dk) == 0
    c_mid = _eff_coeffs(coeffs, dk, damp, domega, dphase, 0.0) if static else None
    for s in range(1, n_steps + 1):
        if static:
            c0 = c1 = c2 = c_mid
        else:
            c0 = _eff_coeffs(coeffs, dk, damp, domega, dphase, t)
            c1 = _eff_coeffs(coeffs, dk, damp, domega, dphase, t + 0.5 * dt)
            c2 = _eff_coeffs(coeffs, dk, damp, domega, dphase, t + dt)
        k1 = _gauss_rhs(rule, state, c0, mass)
        y2 = tuple(state[i] + 0.5 * dt * k1[i] for i in range(5))
        k2 = _gauss_rhs(rule, y2, c1, mass)
        y3 = tuple(state[i] + 0.5 * dt * k2[i] for i in range(5))
        k3 = _gauss_rhs(rule, y3, c1, mass)
        y4 = tuple(state[i] + dt * k3[i] for i in range(5))
        k4 = _gauss_rhs(rule, y4, c2, mass)
        state = tuple(
            state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(5)
        )
        t = t0 + s * dt
        if s % stride == 0:
            row += 1
            out[row, :] = state
    y[:] = state
    return None


# ----------------------------------------------------------------------
# reduced-chart flow (xbar, pbar, rho, gamma)
# ----------------------------------------------------------------------
def _rho_rhs(y, c, mass, inv_factor):
    x, p, rho, gamma = y
    d = len(c) - 1
    dv = _derivs_scalar(c, x)
    rho2 = rho * rho
    f_odd = 0.0
    f_even = 0.0
    w = 1.0
    n = 0
    while True:
        if 2 * n + 1 <= d:
            f_odd += w * dv[2 * n + 1]
        if 2 * n + 2 <= d:
            f_even += w * dv[2 * n + 2]
        n += 1
        if 2 * n + 1 > d:
            break
        w *= rho2 / (2.0 * n)
    inv_m = 1.0 / mass
    dgamma = inv_factor / (mass * rho2 * rho) - rho * f_even
    return (p * inv_m, -f_odd, gamma * inv_m, dgamma)


def rho_flow(y, inv_factor, coeffs, dk, damp, domega, dphase, mass, dt, n_steps, t0, stride, out):
    """RK4 flow in the width chart; `inv_factor` multiplies the 1/rho^3 pressure term."""
    state = tuple(float(v) for v in y)
    row = 0
    out[row, :] = state
    static = len(dk) == 0
    c_mid = _eff_coeffs(coeffs, dk, damp, domega, dphase, 0.0) if static else None
    t = t0
    for s in range(1, n_steps + 1):
        if static:
            c0 = c1 = c2 = c_mid
        else:
            c0 = _eff_coeffs(coeffs, dk, damp, domega, dphase, t)
            c1 = _eff_coeffs(coeffs, dk, damp, domega, dphase, t + 0.5 * dt)
            c2 = _eff_coeffs(coeffs, dk, damp, domega, dphase, t + dt)
        k1 = _rho_rhs(state, c0, mass, inv_factor)
        y2 = tuple(state[i] + 0.5 * dt * k1[i] for i in range(4))
        k2 = _rho_rhs(y2, c1, mass, inv_factor)
        y3 = tuple(state[i] + 0.5 * dt * k2[i] for i in range(4))
        k3 = _rho_rhs(y3, c1, mass, inv_factor)
        y4 = tuple(state[i] + dt * k3[i] for i in range(4))
        k4 = _rho_rhs(y4, c2, mass, inv_factor)
        state = tuple(
            state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(4)
        )
        t = t0 + s * dt
        if s % stride == 0:
            row += 1
            out[row, :] = state
    y[:] = state
    return None


# ----------------------------------------------------------------------
# Benettin exponent accumulation
# ----------------------------------------------------------------------
def _tangent2d_rhs(y, u, c, mass):
    dv = _derivs_scalar(c, y[0])
    inv_m = 1.0 / mass
    d = len(c) - 1
    v2 = dv[2] if d >= 2 else 0.0
    return (y[1] * inv_m, -dv[1]), (u[1] * inv_m, -v2 * u[0])


def _gauss4d_rhs(y, u, c, mass, inv_factor):
    x, p, rho, gamma = y
    d = len(c) - 1
    dv = _derivs_scalar(c, x)
    rho2 = rho * rho
    f_odd = 0.0   # sum w_n V^(2n+1)
    f_even = 0.0  # sum w_n V^(2n+2)
    f_odd3 = 0.0  # sum w_n V^(2n+3)
    g_even = 0.0  # sum (2n+1) w_n V^(2n+2)
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
    inv_m = 1.0 / mass
    rhs = (
        p * inv_m,
        -f_odd,
        gamma * inv_m,
        inv_factor / (mass * rho2 * rho) - rho * f_even,
    )
    # Jacobian rows acting on the tangent vector u = (ux, up, ur, ug)
    dpx = -f_even          # d(pdot)/dx
    dpr = -rho * f_odd3    # d(pdot)/drho = d(gdot)/dx
    dgr = -3.0 * inv_factor / (mass * rho2 * rho2) - g_even
    urhs = (
        u[1] * inv_m,
        dpx * u[0] + dpr * u[2],
        u[3] * inv_m,
        dpr * u[0] + dgr * u[2],
    )
    return rhs, urhs


def benettin(
    system,
    y,
    u,
    coeffs,
    dk,
    damp,
    domega,
    dphase,
    mass,
    inv_factor,
    dt,
    steps_per_renorm,
    n_renorms,
    log_norms,
):
    """Benettin loop: evolve state + tangent, renormalize, record log stretch factors.

    `system` 0 is the 2-d point trajectory with its linearization; 1 is the
    4-d width-coupled flow.  `y` and `u` are updated in place; `log_norms`
    receives one log |u| per renormalization interval.
    """
    dim = 2 if system == 0 else 4
    state = tuple(float(v) for v in y)
    tang = tuple(float(v) for v in u)
    c = _eff_coeffs(coeffs, dk, damp, domega, dphase, 0.0)

    def rhs(sy, su):
        if system == 0:
            return _tangent2d_rhs(sy, su, c, mass)
        return _gauss4d_rhs(sy, su, c, mass, inv_factor)

    for r in range(n_renorms):
        for _ in range(steps_per_renorm):
            k1y, k1u = rhs(state, tang)
            y2 = tuple(state[i] + 0.5 * dt * k1y[i] for i in range(dim))
            u2 = tuple(tang[i] + 0.5 * dt * k1u[i] for i in range(dim))
            k2y, k2u = rhs(y2, u2)
            y3 = tuple(state[i] + 0.5 * dt * k2y[i] for i in range(dim))
            u3 = tuple(tang[i] + 0.5 * dt * k2u[i] for i in range(dim))
            k3y, k3u = rhs(y3, u3)
            y4 = tuple(state[i] + dt * k3y[i] for i in range(dim))
            u4 = tuple(tang[i] + dt * k3u[i] for i in range(dim))
            k4y, k4u = rhs(y4, u4)
            state = tuple(
                state[i] + dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i])
                for i in range(dim)
            )
            tang = tuple(
                tang[i] + dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i])
                for i in range(dim)
            )
        nrm = math.sqrt(sum(v * v for v in tang))
        log_norms[r] = math.log(nrm)
        tang = tuple(v / nrm for v in tang)
    y[:] = state
    u[:] = tang
    return None


# ----------------------------------------------------------------------
# bicubic spline remap (semi-Lagrangian transport step)
# ----------------------------------------------------------------------
def _filter_axis0(a):
    """Cubic B-spline prefilter along axis 0, mirror boundary, in place."""
    n = a.shape[0]
    z = SPLINE_POLE
    horizon = min(_FILTER_HORIZON, 2 * n - 2)
    # causal initialization: truncated mirror-image sum
    acc = a[0].copy()
    zk = 1.0
    for k in range(1, horizon):
        zk *= z
        idx = k if k < n else 2 * (n - 1) - k
        acc += zk * a[idx]
    a[0] = acc
    for i in range(1, n):
        a[i] += z * a[i - 1]
    a[n - 1] = (z / (z * z - 1.0)) * (a[n - 1] + z * a[n - 2])
    for i in range(n - 2, -1, -1):
        a[i] = z * (a[i + 1] - a[i])
    a *= 6.0
    return a


def _mirror_idx(idx, n):
    m = np.abs(idx) % (2 * n - 2)
    return np.minimum(m, 2 * n - 2 - m)


def _bspline_weights(u):
    u2 = u * u
    u3 = u2 * u
    w0 = (1.0 - 3.0 * u + 3.0 * u2 - u3) / 6.0
    w1 = (4.0 - 6.0 * u2 + 3.0 * u3) / 6.0
    w2 = (1.0 + 3.0 * u + 3.0 * u2 - 3.0 * u3) / 6.0
    w3 = u3 / 6.0
    return w0, w1, w2, w3


def bicubic_remap(f, ci, cj, out):
    """Sample f with cubic B-spline interpolation at fractional indices (ci, cj).

    Coordinates outside the index box [0, n-1] x [0, m-1] sample as zero.
    The prefilter uses mirror boundaries; for the compactly supported fields
    this module transports, the two conventions agree to roundoff.
    """
    c = np.array(f, dtype=float, copy=True)
    _filter_axis0(c)
    _filter_axis0(c.T)
    n, m = c.shape
    inside = (ci >= 0.0) & (ci <= n - 1.0) & (cj >= 0.0) & (cj <= m - 1.0)
    ix = np.floor(ci).astype(np.intp)
    jx = np.floor(cj).astype(np.intp)
    np.clip(ix, 0, n - 2, out=ix)
    np.clip(jx, 0, m - 2, out=jx)
    ux = ci - ix
    uy = cj - jx
    wx = _bspline_weights(ux)
    wy = _bspline_weights(uy)
    acc = np.zeros_like(ci, dtype=float)
    for a in range(4):
        ia = _mirror_idx(ix + (a - 1), n)
        row = np.zeros_like(acc)
        for b in range(4):
            jb = _mirror_idx(jx + (b - 1), m)
            row += wy[b] * c[ia, jb]
        acc += wx[a] * row
    out[...] = np.where(inside, acc, 0.0)
    return None


def bicubic_plan(ci, cj, n, m):
    """Precompute taps and weights for repeated remaps at fixed coordinates.

    Returns (ia, jb, wx, wy, inside): mirrored row/column tap indices and
    spline weights, shaped (4,) + ci.shape, plus a 0/1 inside-domain mask.
    Building the plan is a cold path and always runs in numpy; applying it
    with `bicubic_remap_planned` reproduces `bicubic_remap` bit for bit.
    """
    inside = ((ci >= 0.0) & (ci <= n - 1.0) & (cj >= 0.0) & (cj <= m - 1.0)).astype(
        float
    )
    ix = np.floor(ci).astype(np.int64)
    jx = np.floor(cj).astype(np.int64)
    np.clip(ix, 0, n - 2, out=ix)
    np.clip(jx, 0, m - 2, out=jx)
    wx = np.stack(_bspline_weights(ci - ix))
    wy = np.stack(_bspline_weights(cj - jx))
    ia = np.stack([_mirror_idx(ix + (a - 1), n) for a in range(4)])
    jb = np.stack([_mirror_idx(jx + (b - 1), m) for b in range(4)])
    return ia, jb, wx, wy, inside


def bicubic_remap_planned(f, ia, jb, wx, wy, inside, out):
    """Apply a `bicubic_plan` to f; same arithmetic as `bicubic_remap`."""
    c = np.array(f, dtype=float, copy=True)
    _filter_axis0(c)
    _filter_axis0(c.T)
    acc = np.zeros_like(out)
    for a in range(4):
        row = np.zeros_like(acc)
        for b in range(4):
            row += wy[b] * c[ia[a], jb[b]]
        acc += wx[a] * row
    out[...] = np.where(inside != 0.0, acc, 0.0)
    return None
