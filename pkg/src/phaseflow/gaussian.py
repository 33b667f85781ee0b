"""Gaussian-approximation propagators and their conserved quantities.

Three closure rules evolve the five Gaussian parameters (xbar, pbar, cxx,
cxp, cpp):

  "tdvp"   - self-consistent: both the mean and the covariances feel the
             Gaussian-averaged derivatives of V; conservative.
  "heller" - the mean follows the bare classical force, covariances feel the
             local curvature V''(xbar); not conservative in anharmonic wells.
  "tga"    - like heller for covariances, but the mean keeps the quadratic
             back-reaction term -cxx V'''(xbar)/2; conservative for its own
             (quadratically truncated) energy.

The same dynamics in the reduced width chart (xbar, pbar, rho, gamma) with
rho = sqrt(cxx), gamma = cxp/rho is provided for cross-validation, and the
Benettin largest-Lyapunov machinery runs on either the point-trajectory
linearization (the infinitely narrow limit) or the full 4-d width-coupled
flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .potential import PolynomialPotential
from .states import GaussianState, MomentSet, RealizabilityError, moments_from_gaussian

_RULES = {"tdvp": 0, "heller": 1, "tga": 2}


def _steps_for(t0: float, t_final: float, dt: float, stride: int) -> int:
    """Step count covering [t0, t_final], rounded up to a whole number of strides."""
    n = max(1, int(round((t_final - t0) / dt)))
    if n % stride:
        n += stride - n % stride
    return n


# ----------------------------------------------------------------------
# state
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TdvpState:
    """Gaussian parameters plus the conserved phase-space purity sigma2.

    sigma2 is fixed at construction and never recomputed from covariances
    during a run; the drift of det C away from (1/(4 pi sigma2))^2 is the
    integration-quality diagnostic.
    """

    x: float
    p: float
    cxx: float
    cxp: float
    cpp: float
    sigma2: float

    def __post_init__(self):
        for name in ("x", "p", "cxx", "cxp", "cpp", "sigma2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise RealizabilityError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.cxx <= 0 or self.cpp <= 0:
            raise RealizabilityError("diagonal covariances must be positive")
        if self.det_c <= 0:
            raise RealizabilityError("covariance matrix must be positive definite")
        if self.sigma2 <= 0:
            raise RealizabilityError("sigma2 must be positive")

    @property
    def det_c(self) -> float:
        return self.cxx * self.cpp - self.cxp * self.cxp

    @property
    def rho(self) -> float:
        return math.sqrt(self.cxx)

    @property
    def gamma(self) -> float:
        return self.cxp / math.sqrt(self.cxx)

    @property
    def det_c_target(self) -> float:
        return (1.0 / (4.0 * math.pi * self.sigma2)) ** 2

    def constraint_residual(self) -> float:
        tgt = self.det_c_target
        return abs(self.det_c - tgt) / tgt

    def as_gaussian(self) -> GaussianState:
        return GaussianState(self.x, self.p, self.cxx, self.cxp, self.cpp)

    @classmethod
    def from_gaussian(cls, g: GaussianState, sigma2: float | None = None) -> "TdvpState":
        """Adopt a Gaussian state; sigma2 defaults to the value its covariances imply.

        For a pure-tagged state that default equals 1/(2 pi hbar).
        """
        if sigma2 is None:
            sigma2 = 1.0 / (4.0 * math.pi * math.sqrt(g.det_c))
        return cls(g.mean_x, g.mean_p, g.cxx, g.cxp, g.cpp, float(sigma2))


# ----------------------------------------------------------------------
# right-hand sides (reference surface; the integrators use the kernels)
# ----------------------------------------------------------------------
def _rhs(s: TdvpState, pot: PolynomialPotential, t: float, rule: int) -> np.ndarray:
    c = pot.coeffs_at(t)
    d = len(c) - 1
    dv = [pot.derivative(q, s.x, t) for q in range(d + 1)]
    inv_m = 1.0 / pot.mass
    if rule == 0:
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
            w *= s.cxx / (2.0 * n)
        dp = -f_odd
        dcxp = s.cpp * inv_m - s.cxx * f_even
        dcpp = -2.0 * s.cxp * f_even
    else:
        v2 = dv[2] if d >= 2 else 0.0
        dp = -dv[1]
        if rule == 2 and d >= 3:
            dp -= 0.5 * s.cxx * dv[3]
        dcxp = s.cpp * inv_m - s.cxx * v2
        dcpp = -2.0 * s.cxp * v2
    return np.array([s.p * inv_m, dp, 2.0 * s.cxp * inv_m, dcxp, dcpp])


def tdvp_rhs(s: TdvpState, pot: PolynomialPotential, t: float = 0.0) -> np.ndarray:
    """Time derivative (dx, dp, dcxx, dcxp, dcpp) of the self-consistent flow."""
    return _rhs(s, pot, t, 0)


def heller_rhs(s: TdvpState, pot: PolynomialPotential, t: float = 0.0) -> np.ndarray:
    """Local-curvature flow: the mean ignores the packet width entirely."""
    return _rhs(s, pot, t, 1)


def consistent_tga_rhs(
    s: TdvpState, pot: PolynomialPotential, t: float = 0.0, order: int = 2
) -> np.ndarray:
    """Quadratic truncation: curvature covariances plus one width term on the mean."""
    if order != 2:
        raise ValueError(f"only the quadratic truncation (order=2) is implemented, got {order}")
    return _rhs(s, pot, t, 2)


# ----------------------------------------------------------------------
# energies
# ----------------------------------------------------------------------
def tdvp_energy(s: TdvpState, pot: PolynomialPotential, t: float = 0.0) -> float:
    """Gaussian-averaged energy: (pbar^2 + cpp)/2m + sum_k V^(2k)(xbar) cxx^k / (2^k k!)."""
    d = pot.degree
    total = (s.p * s.p + s.cpp) / (2.0 * pot.mass)
    w = 1.0
    k = 0
    while 2 * k <= d:
        total += w * pot.derivative(2 * k, s.x, t)
        k += 1
        w *= s.cxx / (2.0 * k)
    return total


def hg_energy(s: TdvpState, pot: PolynomialPotential, t: float = 0.0) -> float:
    """Same energy evaluated in the width chart, with the explicit constraint term.

    Identical to `tdvp_energy` whenever det C equals its sigma2 target.
    """
    rho = s.rho
    gamma = s.gamma
    m = pot.mass
    afac = (1.0 / (4.0 * math.pi * s.sigma2)) ** 2
    total = (s.p * s.p + gamma * gamma) / (2.0 * m) + afac / (2.0 * m * rho * rho)
    d = pot.degree
    w = 1.0
    k = 0
    while 2 * k <= d:
        total += w * pot.derivative(2 * k, s.x, t)
        k += 1
        w *= (rho * rho) / (2.0 * k)
    return total


def tga_energy(s: TdvpState, pot: PolynomialPotential, t: float = 0.0) -> float:
    """Quadratically truncated energy, the conserved quantity of the `tga` rule."""
    v2 = pot.derivative(2, s.x, t) if pot.degree >= 2 else 0.0
    return (s.p * s.p + s.cpp) / (2.0 * pot.mass) + pot.evaluate(s.x, t) + 0.5 * s.cxx * v2


def heller_energy_drift(s: TdvpState, pot: PolynomialPotential, t: float = 0.0) -> float:
    """Drift rate (pbar/2m) V'''(xbar) cxx of the truncated energy.

    Along the heller flow the quadratically truncated energy (the quantity
    `tga_energy` computes, and the one the `tga` rule conserves exactly)
    changes at exactly this rate; the anharmonic force on the mean does work
    that the frozen quadratic back-reaction never returns.
    """
    v3 = pot.derivative(3, s.x, t) if pot.degree >= 3 else 0.0
    return (s.p / (2.0 * pot.mass)) * v3 * s.cxx


def _row_energy(rule: str, row, pot: PolynomialPotential, t: float) -> float:
    """Energy of a raw (xbar, pbar, cxx, cxp, cpp) row without state validation."""
    x, p, cxx, _, cpp = (float(v) for v in row)
    kinetic = (p * p + cpp) / (2.0 * pot.mass)
    d = pot.degree
    if rule in ("tga", "heller"):
        # both rules truncate the back-reaction at quadratic order, so the
        # truncated energy is the meaningful conservation diagnostic
        v2 = pot.derivative(2, x, t) if d >= 2 else 0.0
        return kinetic + pot.evaluate(x, t) + 0.5 * cxx * v2
    total = kinetic
    w = 1.0
    k = 0
    while 2 * k <= d:
        total += w * pot.derivative(2 * k, x, t)
        k += 1
        w *= cxx / (2.0 * k)
    return total


def fluct_hamiltonian(
    rho: float,
    gamma: float,
    xbar: float,
    sigma2: float,
    pot: PolynomialPotential,
    t: float = 0.0,
    infinite_sigma2: bool = False,
) -> float:
    """Width-sector energy gamma^2/2m + 1/(2 m rho^2 (4 pi sigma2)^2) + V''(xbar) rho^2 / 2.

    With `infinite_sigma2` the central (width-pressure) term is dropped,
    leaving the Hamiltonian of a linearized perturbation around the mean.
    """
    if rho <= 0:
        raise RealizabilityError(f"rho must be positive, got {rho}")
    m = pot.mass
    v2 = pot.derivative(2, xbar, t) if pot.degree >= 2 else 0.0
    total = gamma * gamma / (2.0 * m) + 0.5 * v2 * rho * rho
    if not infinite_sigma2:
        total += (1.0 / (4.0 * math.pi * sigma2)) ** 2 / (2.0 * m * rho * rho)
    return total


# ----------------------------------------------------------------------
# flow integration
# ----------------------------------------------------------------------
@dataclass
class FlowResult:
    """Sampled Gaussian-flow trajectory with conservation diagnostics."""

    rule: str
    times: np.ndarray
    states: np.ndarray  # rows (xbar, pbar, cxx, cxp, cpp)
    energies: np.ndarray
    constraint_residuals: np.ndarray
    sigma2: float

    def state_at(self, i: int) -> TdvpState:
        x, p, cxx, cxp, cpp = self.states[i]
        return TdvpState(x, p, cxx, cxp, cpp, self.sigma2)

    def moments(self, i: int, order: int) -> MomentSet:
        return moments_from_gaussian(self.state_at(i).as_gaussian(), order)


def integrate_flow(
    s: TdvpState,
    pot: PolynomialPotential,
    dt: float,
    t_final: float,
    rule: str = "tdvp",
    stride: int = 1,
    t0: float = 0.0,
) -> FlowResult:
    """Fixed-step RK4 integration of the selected Gaussian flow."""
    if rule not in _RULES:
        raise ValueError(f"unknown rule {rule!r}; choose from {sorted(_RULES)}")
    if dt <= 0 or t_final <= t0:
        raise ValueError("need dt > 0 and t_final > t0")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n_steps = _steps_for(t0, t_final, dt, stride)
    coeffs, dk, damp, domega, dphase = pot.kernel_arrays()
    y = np.array([s.x, s.p, s.cxx, s.cxp, s.cpp])
    out = np.empty((n_steps // stride + 1, 5))
    _kernels.gaussian_flow(
        _RULES[rule], y, coeffs, dk, damp, domega, dphase, pot.mass, dt, n_steps, t0, stride, out
    )
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(out).all(axis=1)))
        raise FloatingPointError(
            f"{rule} flow left the finite domain near t = {t0 + bad * stride * dt:.6g}"
        )
    times = t0 + dt * stride * np.arange(out.shape[0])
    tgt = s.det_c_target
    det = out[:, 2] * out[:, 4] - out[:, 3] ** 2
    residuals = np.abs(det - tgt) / tgt
    energies = np.array(
        [_row_energy(rule, row, pot, t) for row, t in zip(out, times)]
    )
    return FlowResult(rule, times, out, energies, residuals, s.sigma2)


@dataclass
class RhoFlowResult:
    """Width-chart trajectory (xbar, pbar, rho, gamma) with its energy series."""

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    sigma2: float

    def covariance_rows(self) -> np.ndarray:
        """Reconstruct (cxx, cxp, cpp) rows using the built-in constraint."""
        rho = self.states[:, 2]
        gamma = self.states[:, 3]
        afac = (1.0 / (4.0 * math.pi * self.sigma2)) ** 2
        cxx = rho * rho
        cxp = rho * gamma
        cpp = gamma * gamma + afac / (rho * rho)
        return np.column_stack([cxx, cxp, cpp])


def integrate_rho_chart(
    s: TdvpState,
    pot: PolynomialPotential,
    dt: float,
    t_final: float,
    stride: int = 1,
    t0: float = 0.0,
) -> RhoFlowResult:
    """RK4 integration of the reduced (xbar, pbar, rho, gamma) flow.

    The constraint is built into the chart, so this run cross-validates the
    five-variable integrator: covariances reconstructed from (rho, gamma)
    should track it to integrator accuracy.
    """
    if dt <= 0 or t_final <= t0:
        raise ValueError("need dt > 0 and t_final > t0")
    n_steps = _steps_for(t0, t_final, dt, stride)
    coeffs, dk, damp, domega, dphase = pot.kernel_arrays()
    afac = (1.0 / (4.0 * math.pi * s.sigma2)) ** 2
    y = np.array([s.x, s.p, s.rho, s.gamma])
    out = np.empty((n_steps // stride + 1, 4))
    _kernels.rho_flow(
        y, afac, coeffs, dk, damp, domega, dphase, pot.mass, dt, n_steps, t0, stride, out
    )
    times = t0 + dt * stride * np.arange(out.shape[0])
    energies = np.empty(out.shape[0])
    for i, (t, row) in enumerate(zip(times, out)):
        x, p, rho, gamma = row
        cxx = rho * rho
        cxp = rho * gamma
        cpp = gamma * gamma + afac / cxx
        st = TdvpState(x, p, cxx, cxp, cpp, s.sigma2)
        energies[i] = hg_energy(st, pot, t)
    return RhoFlowResult(times, out, energies, s.sigma2)


# ----------------------------------------------------------------------
# Lyapunov machinery
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class LyapunovJob:
    """Benettin-run description for the largest Lyapunov exponent.

    `system` selects the flow: "tangent2d" is the point trajectory with its
    linearization (the infinitely narrow packet limit); "gaussian4d" is the
    width-coupled (xbar, pbar, rho, gamma) flow with its exact tangent
    dynamics.
    """

    state: TdvpState
    system: str = "tangent2d"
    dt: float = 1e-3
    renorm_interval: float = 0.5
    t_total: float = 1000.0
    transient_fraction: float = 0.1
    n_blocks: int = 10

    def __post_init__(self):
        if self.system not in ("tangent2d", "gaussian4d"):
            raise ValueError(f"unknown system {self.system!r}")
        if not (self.dt > 0 and self.renorm_interval > 0):
            raise ValueError("dt and renorm_interval must be positive")
        if self.renorm_interval < self.dt:
            raise ValueError("renorm_interval must be at least dt")
        if self.t_total <= self.renorm_interval:
            raise ValueError("t_total must exceed one renormalization interval")
        if not (0.0 <= self.transient_fraction < 1.0):
            raise ValueError("transient_fraction must lie in [0, 1)")
        if self.n_blocks < 2:
            raise ValueError("need at least 2 blocks for a standard error")


@dataclass
class LyapunovResult:
    system: str
    lambda_max: float
    stderr: float
    blocks: int
    t_total: float
    renorm_interval: float
    converged: bool
    block_estimates: np.ndarray

    def as_dict(self) -> dict:
        return {
            "system": self.system,
            "lambda_max": self.lambda_max,
            "stderr": self.stderr,
            "blocks": self.blocks,
            "t_total": self.t_total,
            "renorm_interval": self.renorm_interval,
            "converged": self.converged,
        }


def lyapunov_max(job: LyapunovJob, pot: PolynomialPotential) -> LyapunovResult:
    """Benettin estimate of the largest Lyapunov exponent with block errors.

    The tangent vector is renormalized every `renorm_interval`; the first
    `transient_fraction` of intervals is discarded; the remaining log
    stretch factors are averaged, with a standard error from `n_blocks`
    contiguous block means.  Non-convergence (first-half and second-half
    estimates apart by more than 5x the pooled error) is reported in the
    `converged` flag, not raised.
    """
    if not pot.is_static:
        raise ValueError("Lyapunov runs require a static potential")
    steps_per_renorm = max(1, int(round(job.renorm_interval / job.dt)))
    dt = job.renorm_interval / steps_per_renorm
    n_renorms = int(round(job.t_total / job.renorm_interval))
    if n_renorms < 2 * job.n_blocks:
        raise ValueError("t_total too short for the requested block count")
    s = job.state
    if job.system == "tangent2d":
        sys_id = 0
        y = np.array([s.x, s.p])
        u = np.array([1.0, 1.0]) / math.sqrt(2.0)
    else:
        sys_id = 1
        y = np.array([s.x, s.p, s.rho, s.gamma])
        u = np.full(4, 0.5)
    afac = (1.0 / (4.0 * math.pi * s.sigma2)) ** 2
    coeffs, dk, damp, domega, dphase = pot.kernel_arrays()
    log_norms = np.empty(n_renorms)
    _kernels.benettin(
        sys_id, y, u, coeffs, dk, damp, domega, dphase, pot.mass, afac, dt,
        steps_per_renorm, n_renorms, log_norms,
    )
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(log_norms))):
        bad = np.flatnonzero(~np.isfinite(log_norms))
        t_bad = (float(bad[0] + 1) * job.renorm_interval) if bad.size else job.t_total
        raise FloatingPointError(
            "fiducial trajectory left the representable range near "
            f"t={t_bad:.3g}; on unbounded potentials shorten t_total so the "
            "orbit stays finite"
        )
    skip = int(math.floor(job.transient_fraction * n_renorms))
    kept = log_norms[skip:]
    t_kept = kept.size * job.renorm_interval
    lam = float(kept.sum()) / t_kept
    # contiguous block means over the kept stretch factors
    usable = kept.size - kept.size % job.n_blocks
    blocks = kept[:usable].reshape(job.n_blocks, -1)
    block_time = blocks.shape[1] * job.renorm_interval
    block_lams = blocks.sum(axis=1) / block_time
    stderr = float(block_lams.std(ddof=1) / math.sqrt(job.n_blocks))
    half = job.n_blocks // 2
    first = float(block_lams[:half].mean())
    second = float(block_lams[half:].mean())
    pooled = stderr * math.sqrt(2.0)
    converged = abs(first - second) <= 5.0 * pooled if pooled > 0 else True
    return LyapunovResult(
        job.system, lam, stderr, job.n_blocks, n_renorms * job.renorm_interval,
        job.renorm_interval, converged, block_lams,
    )


# ----------------------------------------------------------------------
# multiple-packet propagation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GaussianSum:
    """Normalized mixture of Gaussian packets, each propagated independently."""

    weights: tuple
    packets: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) == 0 or len(w) != len(self.packets):
            raise ValueError("need one weight per packet")
        if any(v < 0 for v in w):
            raise ValueError("weights must be non-negative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(w)}")
        for g in self.packets:
            if not isinstance(g, GaussianState):
                raise TypeError("packets must be GaussianState instances")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "packets", tuple(self.packets))


def tile_packets(parent: GaussianState, count: int, scale: float = 1.0) -> GaussianSum:
    """Equal-weight packets placed around the parent's 1-sigma covariance ellipse.

    Each packet keeps the parent covariances; `scale` multiplies the
    placement radius.  A single packet reproduces the parent.
    """
    if count < 1:
        raise ValueError("need at least one packet")
    if count == 1:
        return GaussianSum((1.0,), (parent,))
    l00 = math.sqrt(parent.cxx)
    l10 = parent.cxp / l00
    l11 = math.sqrt(parent.cpp - l10 * l10)
    packets = []
    for i in range(count):
        th = 2.0 * math.pi * i / count
        ox = scale * l00 * math.cos(th)
        op = scale * (l10 * math.cos(th) + l11 * math.sin(th))
        packets.append(
            GaussianState(
                parent.mean_x + ox, parent.mean_p + op,
                parent.cxx, parent.cxp, parent.cpp, parent.pure_hbar,
            )
        )
    w = 1.0 / count
    return GaussianSum((w,) * count, tuple(packets))


def mtga_density(gs: GaussianSum, x, p):
    """Mixture phase-space density: the weighted sum of packet Gaussians."""
    total = None
    for w, g in zip(gs.weights, gs.packets):
        term = w * g.density(x, p)
        total = term if total is None else total + term
    return total


def mtga_moments(gs: GaussianSum, order: int) -> MomentSet:
    """Raw moments of the mixture: weight-mixed packet moments, not a single Wick set."""
    vals = None
    for w, g in zip(gs.weights, gs.packets):
        ms = moments_from_gaussian(g, order)
        if vals is None:
            vals = {k: w * v for k, v in ms.values.items()}
        else:
            for k, v in ms.values.items():
                vals[k] += w * v
    vals[(0, 0)] = 1.0
    return MomentSet(order=order, values=vals, flavor="classical")


@dataclass
class MtgaResult:
    """Per-packet flow results sharing one time grid, plus the mixture weights."""

    rule: str
    times: np.ndarray
    weights: tuple
    packet_flows: tuple

    def sum_at(self, i: int) -> GaussianSum:
        packets = tuple(
            GaussianState(*flow.states[i]) for flow in self.packet_flows
        )
        return GaussianSum(self.weights, packets)

    def moments(self, i: int, order: int) -> MomentSet:
        return mtga_moments(self.sum_at(i), order)


def mtga_propagate(
    gs: GaussianSum,
    pot: PolynomialPotential,
    dt: float,
    t_final: float,
    rule: str = "heller",
    stride: int = 1,
    t0: float = 0.0,
) -> MtgaResult:
    """Propagate every packet independently under the chosen single-packet rule."""
    if rule not in ("heller", "tga"):
        raise ValueError(f"per-packet rule must be 'heller' or 'tga', got {rule!r}")
    flows = []
    for g in gs.packets:
        flows.append(
            integrate_flow(TdvpState.from_gaussian(g), pot, dt, t_final, rule=rule,
                           stride=stride, t0=t0)
        )
    return MtgaResult(rule, flows[0].times, gs.weights, tuple(flows))
