"""Reference evolutions the approximate propagators are judged against.

Three independent representations of the same dynamics:

- `leapfrog_evolve`: a symplectic kick-drift-kick map applied to every
  particle of a trajectory ensemble (exact classical dynamics up to time
  discretization, no closure and no interpolation).
- `splitstep_evolve`: Strang-split Fourier propagation of a pure-state
  wavefunction (exact quantum dynamics up to time discretization).
- `liouville_evolve`: a semi-Lagrangian solver for the classical phase
  space density, tracing characteristics backward one leapfrog step and
  resampling bicubically.

Each keeps conservation diagnostics (energy, norm, lattice integrals of
powers of the density) so that what the method preserves, and how well,
is measured rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .gaussian import _steps_for
from .potential import PolynomialPotential
from .states import (
    GridClippingError,
    MomentSet,
    PhaseSpaceGrid,
    TrajectoryEnsemble,
    WavefunctionGrid,
    moments_from_ensemble,
    moments_from_grid,
    moments_from_wavefunction,
)

EVOLVED_GRID_NEG_TOL = 1e-3


class ParticleEscapeError(RuntimeError):
    """A trajectory left the configured |x| bound (unbound motion)."""


class BoundaryMassError(RuntimeError):
    """The phase-space density reached the grid boundary (grid too small)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, horizon, and output cadence shared by the evolvers.

    `method` selects the update rule; each evolver accepts "default" plus
    its own tags ("kdk" for the ensemble map, "strang" for the split-step
    propagator, "bicubic" for the semi-Lagrangian grid).
    """

    dt: float
    t_final: float
    stride: int = 1
    method: str = "default"
    t0: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_final > self.t0):
            raise ValueError("t_final must exceed t0")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")

    def steps(self) -> int:
        return _steps_for(self.t0, self.t_final, self.dt, self.stride)

    def check_method(self, allowed: tuple, what: str) -> None:
        if self.method not in ("default",) + allowed:
            raise ValueError(
                f"{what} supports methods {('default',) + allowed}, got {self.method!r}"
            )


# ----------------------------------------------------------------------
# trajectory ensembles
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class EnsembleResult:
    """Moment series plus the final ensemble of a leapfrog run.

    `moments[i]` are the raw ensemble moments at `times[i]`; `energy[i]`
    is the ensemble-mean energy.  Full phase-space snapshots are kept in
    `ensembles` only when requested (they dominate memory for large N).
    """

    times: np.ndarray
    moments: list
    energy: np.ndarray
    final: TrajectoryEnsemble
    ensembles: list | None = None

    def series(self, n: int, k: int) -> np.ndarray:
        return np.array([m.values[(n, k)] for m in self.moments])


def ensemble_energy(e: TrajectoryEnsemble, pot: PolynomialPotential, t: float = 0.0) -> float:
    """Ensemble-mean energy <p^2/2m + V(x)>."""
    kin = float(np.mean(e.p**2)) / (2.0 * pot.mass)
    return kin + float(np.mean(pot.evaluate(e.x, t)))


def leapfrog_evolve(
    e: TrajectoryEnsemble,
    pot: PolynomialPotential,
    cfg: IntegratorConfig,
    moment_order: int = 2,
    x_bound: float = 1e6,
    keep_ensembles: bool = False,
) -> EnsembleResult:
    """Kick-drift-kick evolution of every trajectory in the ensemble.

    The potential coefficients of each step are frozen at the step
    midpoint, which keeps the map symplectic for driven potentials.  Any
    particle crossing `x_bound` in |x| aborts the run with diagnostics,
    since moments of a partially escaped ensemble would be silently wrong.
    """
    cfg.check_method(("kdk",), "leapfrog_evolve")
    n_steps = cfg.steps()
    n_snap = n_steps // cfg.stride + 1
    coeffs, dk, damp, domega, dphase = pot.kernel_arrays()
    x = e.x.copy()
    p = e.p.copy()

    times = np.empty(n_snap)
    energy = np.empty(n_snap)
    moments = []
    ensembles = [] if keep_ensembles else None

    def record(row: int, t: float) -> None:
        times[row] = t
        snap = TrajectoryEnsemble(x.copy(), p.copy())
        energy[row] = ensemble_energy(snap, pot, t)
        moments.append(moments_from_ensemble(snap, moment_order))
        if ensembles is not None:
            ensembles.append(snap)

    record(0, cfg.t0)
    for chunk in range(n_snap - 1):
        t = cfg.t0 + chunk * cfg.stride * cfg.dt
        _kernels.leapfrog_ensemble(
            x, p, coeffs, dk, damp, domega, dphase, pot.mass, cfg.dt, cfg.stride, t
        )
        t_now = cfg.t0 + (chunk + 1) * cfg.stride * cfg.dt
        worst = float(np.max(np.abs(x)))
        if not np.all(np.isfinite(x)) or worst > x_bound:
            n_out = int(np.sum(~(np.abs(x) <= x_bound)))
            raise ParticleEscapeError(
                f"{n_out} of {x.size} trajectories left |x| <= {x_bound:g} "
                f"by t = {t_now:.6g} (max |x| = {worst:.3g}); the motion is "
                "unbound at this energy or the bound is too tight"
            )
        record(chunk + 1, t_now)
    return EnsembleResult(
        times=times,
        moments=moments,
        energy=energy,
        final=TrajectoryEnsemble(x, p),
        ensembles=ensembles,
    )


# ----------------------------------------------------------------------
# split-operator wavefunction propagation
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SplitStepResult:
    """Wavefunction snapshots of a Strang-split run with norm diagnostics."""

    times: np.ndarray
    frames: list
    energy: np.ndarray
    norm_error: np.ndarray

    def moments(self, order: int, interp: str = "spectral") -> list:
        return [moments_from_wavefunction(w, order, interp=interp) for w in self.frames]

    def series(self, n: int, k: int, interp: str = "spectral") -> np.ndarray:
        return np.array([m.values[(n, k)] for m in self.moments(max(n + k, 1), interp)])


def wavefunction_energy(w: WavefunctionGrid, pot: PolynomialPotential, t: float = 0.0) -> float:
    """<H> = <p^2>/2m + <V(x)> of a normalized wavefunction."""
    rho_p = w.momentum_density()
    p = w.p_axis
    dp = p[1] - p[0]
    kin = float(np.sum(rho_p * p**2)) * dp / (2.0 * w.mass)
    rho_x = w.position_density()
    pot_e = float(np.sum(rho_x * pot.evaluate(w.x_axis, t))) * w.dx
    return kin + pot_e


def splitstep_evolve(
    w: WavefunctionGrid,
    pot: PolynomialPotential,
    cfg: IntegratorConfig,
    edge_tol: float = 1e-8,
) -> SplitStepResult:
    """Strang-split Fourier propagation of a pure state.

    Each step applies a half kinetic factor in momentum space, the full
    potential factor at the step midpoint in position space, and a second
    half kinetic factor; consecutive half kinetic factors inside an output
    interval are merged.  The density reaching the grid edge beyond
    `edge_tol` of the peak aborts the run: a periodic Fourier grid would
    otherwise wrap the leaked amplitude around silently.
    """
    cfg.check_method(("strang",), "splitstep_evolve")
    if pot.mass != w.mass:
        raise ValueError(
            f"potential mass {pot.mass} and wavefunction mass {w.mass} differ"
        )
    n_steps = cfg.steps()
    n_snap = n_steps // cfg.stride + 1
    k = 2.0 * math.pi * np.fft.fftfreq(w.n, d=w.dx)
    kin_half = np.exp(-0.5j * w.hbar * k**2 * cfg.dt / (2.0 * w.mass))
    kin_full = kin_half * kin_half
    x = w.x_axis
    static_vphase = None
    if pot.is_static:
        static_vphase = np.exp(-1j * pot.evaluate(x, 0.0) * cfg.dt / w.hbar)

    psi = w.psi.copy()
    frames = [w.copy()]
    times = np.empty(n_snap)
    energy = np.empty(n_snap)
    norm_error = np.empty(n_snap)
    times[0] = cfg.t0
    energy[0] = wavefunction_energy(w, pot, cfg.t0)
    norm_error[0] = abs(w.norm_squared - 1.0)

    for chunk in range(n_snap - 1):
        t = cfg.t0 + chunk * cfg.stride * cfg.dt
        psi = np.fft.ifft(kin_half * np.fft.fft(psi))
        for s in range(cfg.stride):
            t_mid = t + (s + 0.5) * cfg.dt
            if static_vphase is not None:
                psi *= static_vphase
            else:
                psi *= np.exp(-1j * pot.evaluate(x, t_mid) * cfg.dt / w.hbar)
            if s + 1 < cfg.stride:
                psi = np.fft.ifft(kin_full * np.fft.fft(psi))
        psi = np.fft.ifft(kin_half * np.fft.fft(psi))

        t_now = cfg.t0 + (chunk + 1) * cfg.stride * cfg.dt
        dens = np.abs(psi) ** 2
        nrm = float(np.sum(dens)) * w.dx
        if abs(nrm - 1.0) > 1e-9:
            raise RuntimeError(
                f"norm drifted to {nrm} by t = {t_now:.6g}; the propagation "
                "has broken down"
            )
        peak = float(np.max(dens))
        edge = max(float(dens[0]), float(dens[-1]))
        if edge > edge_tol * peak:
            raise GridClippingError(
                f"density at the grid edge reached {edge:.3e} of peak {peak:.3e} "
                f"by t = {t_now:.6g}; enlarge the position span"
            )
        frame = WavefunctionGrid(psi.copy(), w.x_min, w.dx, w.hbar, w.mass)
        frames.append(frame)
        times[chunk + 1] = t_now
        energy[chunk + 1] = wavefunction_energy(frame, pot, t_now)
        norm_error[chunk + 1] = abs(nrm - 1.0)
    return SplitStepResult(times=times, frames=frames, energy=energy, norm_error=norm_error)


# ----------------------------------------------------------------------
# semi-Lagrangian phase-space density
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class LiouvilleResult:
    """Density-level classical evolution with lattice conservation series.

    `sigma[n][i]` is the lattice integral of f^n at `times[i]` for
    n = 1, 2, 3; `sigma_drift[n]` the largest relative departure from the
    initial value — the measured interpolation-diffusion budget of the run.
    """

    times: np.ndarray
    moments: list
    sigma: dict
    sigma_drift: dict
    final: PhaseSpaceGrid
    grids: list | None = None

    def series(self, n: int, k: int) -> np.ndarray:
        return np.array([m.values[(n, k)] for m in self.moments])


def _backward_departure(
    X: np.ndarray,
    P: np.ndarray,
    pot: PolynomialPotential,
    dt: float,
    t_mid: float,
    mass: float,
):
    """Invert one kick-drift-kick step for every node of the arrival lattice."""
    ph = P - 0.5 * dt * pot.force(X, t_mid)
    X0 = X - dt * ph / mass
    P0 = ph - 0.5 * dt * pot.force(X0, t_mid)
    return X0, P0


def liouville_evolve(
    f: PhaseSpaceGrid,
    pot: PolynomialPotential,
    cfg: IntegratorConfig,
    moment_order: int = 2,
    boundary_tol: float = 1e-6,
    boundary_cells: int = 2,
    keep_grids: bool = False,
) -> LiouvilleResult:
    """Semi-Lagrangian transport of a classical phase-space density.

    Every step traces each lattice node backward through one leapfrog step
    (the exact inverse of the trajectory map, evaluated at the step
    midpoint) and resamples the density there with cubic B-spline
    interpolation.  Mass inside the outer `boundary_cells`-wide frame
    above `boundary_tol` of the total aborts the run; transport would
    silently lose that mass across the open boundary.
    """
    cfg.check_method(("bicubic",), "liouville_evolve")
    n_steps = cfg.steps()
    n_snap = n_steps // cfg.stride + 1
    values = f.values.copy()
    nx, npp = values.shape
    X = f.x_axis[:, None] + np.zeros((1, npp))
    P = f.p_axis[None, :] + np.zeros((nx, 1))
    cell = f.dx * f.dp

    static_plan = None
    if pot.is_static:
        # The departure map never changes, so the interpolation taps and
        # weights can be planned once and reused every step.
        X0, P0 = _backward_departure(X, P, pot, cfg.dt, 0.0, pot.mass)
        static_plan = _kernels.bicubic_plan(
            (X0 - f.x0) / f.dx, (P0 - f.p0) / f.dp, nx, npp
        )

    def lattice_sigma(v: np.ndarray, n: int) -> float:
        return float(np.sum(v**n)) * cell

    def boundary_fraction(v: np.ndarray) -> float:
        b = boundary_cells
        frame = v.sum() - v[b:-b, b:-b].sum()
        total = v.sum()
        return abs(frame) / abs(total) if total != 0.0 else 1.0

    def snapshot_grid(v: np.ndarray) -> PhaseSpaceGrid:
        return PhaseSpaceGrid(
            v.copy(), f.x0, f.dx, f.p0, f.dp, neg_tol=EVOLVED_GRID_NEG_TOL
        )

    times = np.empty(n_snap)
    sigma = {1: np.empty(n_snap), 2: np.empty(n_snap), 3: np.empty(n_snap)}
    moments = []
    grids = [] if keep_grids else None

    def record(row: int, t: float, v: np.ndarray) -> None:
        times[row] = t
        for n in (1, 2, 3):
            sigma[n][row] = lattice_sigma(v, n)
        g = snapshot_grid(v)
        moments.append(moments_from_grid(g, moment_order))
        if grids is not None:
            grids.append(g)

    if boundary_fraction(values) > boundary_tol:
        raise BoundaryMassError(
            "initial density already carries "
            f"{boundary_fraction(values):.3e} of its mass in the outer "
            f"{boundary_cells} cells (tolerance {boundary_tol:g})"
        )
    record(0, cfg.t0, values)

    out = np.empty_like(values)
    for chunk in range(n_snap - 1):
        for s in range(cfg.stride):
            t = cfg.t0 + (chunk * cfg.stride + s) * cfg.dt
            if static_plan is not None:
                _kernels.bicubic_remap_planned(values, *static_plan, out)
            else:
                X0, P0 = _backward_departure(
                    X, P, pot, cfg.dt, t + 0.5 * cfg.dt, pot.mass
                )
                ci, cj = (X0 - f.x0) / f.dx, (P0 - f.p0) / f.dp
                _kernels.bicubic_remap(values, ci, cj, out)
            values, out = out, values
        t_now = cfg.t0 + (chunk + 1) * cfg.stride * cfg.dt
        if not np.all(np.isfinite(values)):
            raise RuntimeError(f"density became non-finite by t = {t_now:.6g}")
        frac = boundary_fraction(values)
        if frac > boundary_tol:
            raise BoundaryMassError(
                f"density reached the grid boundary by t = {t_now:.6g}: "
                f"{frac:.3e} of the mass sits in the outer {boundary_cells} "
                f"cells (tolerance {boundary_tol:g}); enlarge the grid"
            )
        record(chunk + 1, t_now, values)

    s1_0 = sigma[1][0]
    if abs(s1_0) > 0 and np.max(np.abs(sigma[1] - s1_0)) > 1e-6 * abs(s1_0):
        raise RuntimeError(
            "lattice mass drifted by "
            f"{np.max(np.abs(sigma[1] - s1_0)) / abs(s1_0):.3e} relative; "
            "the remap has broken down"
        )
    drift = {
        n: float(np.max(np.abs(sigma[n] - sigma[n][0])) / abs(sigma[n][0]))
        for n in (1, 2, 3)
    }
    return LiouvilleResult(
        times=times,
        moments=moments,
        sigma=sigma,
        sigma_drift=drift,
        final=snapshot_grid(values),
        grids=grids,
    )
