"""State representations and conversions between them.

One physical preparation, a Gaussian phase-space blob, can be realized four
ways: as an analytic `GaussianState`, as a sampled trajectory ensemble, as a
wavefunction on a grid (when the blob is the Wigner transform of a pure
state), and as a phase-space density on a lattice.  This module builds each
representation and extracts moments from each, so that different dynamical
treatments can be compared observable-by-observable.

Conventions: covariances are cxx = <dx^2>, cxp = <dx dp>_sym, cpp = <dp^2>;
moment sets hold <x^n p^k> (raw) or <dx^n dp^k> (central) for n + k up to a
stated order; momentum grids are the discrete Fourier conjugates of the
position grids, 2*pi*hbar / (N*dx) spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import wick

MAX_MOMENT_ORDER = 6

_FLAVORS = ("classical", "quantum-weyl")


class GridClippingError(ValueError):
    """A grid-backed state has non-negligible support at the grid edge."""


class RealizabilityError(ValueError):
    """Requested state parameters violate a positivity or purity constraint."""


# ----------------------------------------------------------------------
# Gaussian states
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GaussianState:
    """Gaussian phase-space density with given means and covariances.

    `pure_hbar`, when set, tags the state as the Wigner transform of a pure
    Gaussian wavefunction at that hbar; this requires det C = hbar^2 / 4.
    """

    mean_x: float = 0.0
    mean_p: float = 0.0
    cxx: float = 0.5
    cxp: float = 0.0
    cpp: float = 0.5
    pure_hbar: float | None = None

    def __post_init__(self):
        for name in ("mean_x", "mean_p", "cxx", "cxp", "cpp"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise RealizabilityError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.cxx <= 0 or self.cpp <= 0:
            raise RealizabilityError("diagonal covariances must be positive")
        det = self.det_c
        if det <= 0:
            raise RealizabilityError(f"covariance matrix must be positive definite, det = {det}")
        if self.pure_hbar is not None:
            hb = float(self.pure_hbar)
            if not (math.isfinite(hb) and hb > 0):
                raise RealizabilityError(f"pure_hbar must be positive, got {hb!r}")
            target = 0.25 * hb * hb
            if abs(det - target) > 1e-10 * target:
                raise RealizabilityError(
                    f"pure state requires det C = hbar^2/4 = {target}, got {det}"
                )
            object.__setattr__(self, "pure_hbar", hb)

    @property
    def det_c(self) -> float:
        return self.cxx * self.cpp - self.cxp * self.cxp

    def covariance_matrix(self) -> np.ndarray:
        return np.array([[self.cxx, self.cxp], [self.cxp, self.cpp]])

    def density(self, x, p):
        """The normalized phase-space density at (x, p); broadcasts."""
        det = self.det_c
        dx = np.asarray(x, dtype=float) - self.mean_x
        dp = np.asarray(p, dtype=float) - self.mean_p
        q = (self.cpp * dx * dx - 2.0 * self.cxp * dx * dp + self.cxx * dp * dp) / det
        return np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(det))

    # ------------------------------------------------------------------
    @classmethod
    def coherent(
        cls,
        hbar: float,
        omega: float = 1.0,
        mass: float = 1.0,
        mean_x: float = 0.0,
        mean_p: float = 0.0,
    ) -> "GaussianState":
        """Minimum-uncertainty state matched to a harmonic well (ground-state widths)."""
        cxx = 0.5 * hbar / (mass * omega)
        cpp = 0.5 * hbar * mass * omega
        return cls(mean_x=mean_x, mean_p=mean_p, cxx=cxx, cxp=0.0, cpp=cpp, pure_hbar=hbar)

    @classmethod
    def squeezed(
        cls,
        hbar: float,
        squeeze: float,
        omega: float = 1.0,
        mass: float = 1.0,
        mean_x: float = 0.0,
        mean_p: float = 0.0,
    ) -> "GaussianState":
        """Coherent-state widths rescaled by exp(+-squeeze), still pure."""
        s = math.exp(squeeze)
        cxx = 0.5 * hbar / (mass * omega) * s * s
        cpp = 0.5 * hbar * mass * omega / (s * s)
        return cls(mean_x=mean_x, mean_p=mean_p, cxx=cxx, cxp=0.0, cpp=cpp, pure_hbar=hbar)


def sigma2_of_gaussian(g: GaussianState) -> float:
    """Integral of the squared density, 1 / (4 pi sqrt(det C))."""
    return 1.0 / (4.0 * math.pi * math.sqrt(g.det_c))


# ----------------------------------------------------------------------
# Moment sets
# ----------------------------------------------------------------------
def _moment_keys(order: int):
    return [(n, k) for total in range(order + 1) for n in range(total, -1, -1) for k in (total - n,)]


@dataclass(frozen=True)
class MomentSet:
    """Phase-space moments <x^n p^k> (raw) or <dx^n dp^k> (central), n + k <= order.

    Central sets remember the means they were taken about so the raw set can
    be reconstructed.  `flavor` records which averaging produced the numbers:
    "classical" for phase-space densities and ensembles, "quantum-weyl" for
    symmetrically ordered operator expectations.
    """

    order: int
    values: dict
    flavor: str = "classical"
    central: bool = False
    mean_x: float | None = None
    mean_p: float | None = None

    def __post_init__(self):
        if not (0 <= self.order <= 2 * MAX_MOMENT_ORDER):
            raise ValueError(f"unsupported moment order {self.order}")
        if self.flavor not in _FLAVORS:
            raise ValueError(f"flavor must be one of {_FLAVORS}, got {self.flavor!r}")
        vals = {}
        for key in _moment_keys(self.order):
            if key not in self.values:
                raise ValueError(f"missing moment {key} for order {self.order}")
            v = float(self.values[key])
            if not math.isfinite(v):
                raise ValueError(f"moment {key} is not finite: {v!r}")
            vals[key] = v
        extra = set(self.values) - set(vals)
        if extra:
            raise ValueError(f"unexpected moment keys beyond order {self.order}: {sorted(extra)}")
        if abs(vals[(0, 0)] - 1.0) > 1e-9:
            raise ValueError(f"zeroth moment must be 1, got {vals[(0, 0)]}")
        if self.central:
            if self.mean_x is None or self.mean_p is None:
                raise ValueError("central moment sets must record their means")
            scale = 1.0 + abs(self.mean_x) + abs(self.mean_p)
            if self.order >= 1 and (
                abs(vals[(1, 0)]) > 1e-9 * scale or abs(vals[(0, 1)]) > 1e-9 * scale
            ):
                raise ValueError("first central moments must vanish")
        object.__setattr__(self, "values", vals)

    def get(self, n: int, k: int) -> float:
        return self.values[(n, k)]

    def keys(self):
        return _moment_keys(self.order)

    def means(self) -> tuple:
        if self.central:
            return (self.mean_x, self.mean_p)
        return (self.values[(1, 0)], self.values[(0, 1)])

    def covariance(self) -> tuple:
        """(cxx, cxp, cpp) about the means, whichever representation this is."""
        if self.order < 2:
            raise ValueError("need order >= 2 for covariances")
        if self.central:
            return (self.values[(2, 0)], self.values[(1, 1)], self.values[(0, 2)])
        mx, mp = self.means()
        return (
            self.values[(2, 0)] - mx * mx,
            self.values[(1, 1)] - mx * mp,
            self.values[(0, 2)] - mp * mp,
        )

    def det_c(self) -> float:
        cxx, cxp, cpp = self.covariance()
        return cxx * cpp - cxp * cxp


def central_from_raw(ms: MomentSet) -> MomentSet:
    """Shift a raw moment set to central moments about its own means."""
    if ms.central:
        return ms
    mx, mp = ms.means()
    vals = {}
    for n, k in ms.keys():
        total = 0.0
        for i in range(n + 1):
            bx = math.comb(n, i) * (-mx) ** (n - i)
            for j in range(k + 1):
                total += bx * math.comb(k, j) * (-mp) ** (k - j) * ms.values[(i, j)]
        vals[(n, k)] = total
    vals[(0, 0)] = 1.0
    if ms.order >= 1:
        vals[(1, 0)] = 0.0
        vals[(0, 1)] = 0.0
    return MomentSet(
        order=ms.order, values=vals, flavor=ms.flavor, central=True, mean_x=mx, mean_p=mp
    )


def raw_from_central(ms: MomentSet) -> MomentSet:
    """Invert `central_from_raw` using the means recorded on the central set."""
    if not ms.central:
        return ms
    mx, mp = ms.mean_x, ms.mean_p
    vals = {}
    for n, k in ms.keys():
        total = 0.0
        for i in range(n + 1):
            bx = math.comb(n, i) * mx ** (n - i)
            for j in range(k + 1):
                total += bx * math.comb(k, j) * mp ** (k - j) * ms.values[(i, j)]
        vals[(n, k)] = total
    vals[(0, 0)] = 1.0
    return MomentSet(order=ms.order, values=vals, flavor=ms.flavor, central=False)


def moments_from_gaussian(g: GaussianState, order: int, flavor: str = "classical") -> MomentSet:
    """Exact raw moments of a Gaussian state up to the given order.

    For a Gaussian, symmetrically ordered quantum expectations coincide with
    the classical phase-space averages, so the flavor is just a label here.
    """
    vals = {
        (n, k): wick.raw_moment(g.mean_x, g.mean_p, g.cxx, g.cxp, g.cpp, n, k)
        for (n, k) in _moment_keys(order)
    }
    return MomentSet(order=order, values=vals, flavor=flavor)


# ----------------------------------------------------------------------
# Trajectory ensembles
# ----------------------------------------------------------------------
@dataclass
class TrajectoryEnsemble:
    """Equal-weight swarm of phase-space points."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float)
        p = np.ascontiguousarray(self.p, dtype=float)
        if x.ndim != 1 or x.shape != p.shape:
            raise ValueError("x and p must be 1-d arrays of equal length")
        if x.size == 0:
            raise ValueError("ensemble must contain at least one trajectory")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("ensemble coordinates must be finite")
        self.x = x
        self.p = p

    @property
    def size(self) -> int:
        return self.x.size

    def copy(self) -> "TrajectoryEnsemble":
        return TrajectoryEnsemble(self.x.copy(), self.p.copy())


def sample_ensemble(g: GaussianState, n: int, seed: int) -> TrajectoryEnsemble:
    """Draw n phase-space points from the Gaussian, reproducibly.

    Uses a counter-based generator (Philox) so the draw is a pure function of
    (g, n, seed) across platforms.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    z = rng.standard_normal((2, int(n)))
    l00 = math.sqrt(g.cxx)
    l10 = g.cxp / l00
    l11 = math.sqrt(g.cpp - l10 * l10)
    x = g.mean_x + l00 * z[0]
    p = g.mean_p + l10 * z[0] + l11 * z[1]
    return TrajectoryEnsemble(x, p)


def moments_from_ensemble(e: TrajectoryEnsemble, order: int) -> MomentSet:
    """Sample raw moments <x^n p^k> up to the given order."""
    if order > MAX_MOMENT_ORDER:
        raise ValueError(f"moment extraction supports order <= {MAX_MOMENT_ORDER}")
    xp = [np.ones_like(e.x)]
    pp = [np.ones_like(e.p)]
    for _ in range(order):
        xp.append(xp[-1] * e.x)
        pp.append(pp[-1] * e.p)
    inv_n = 1.0 / e.size
    vals = {}
    for n, k in _moment_keys(order):
        if n == 0 and k == 0:
            vals[(0, 0)] = 1.0
        else:
            vals[(n, k)] = float(np.dot(xp[n], pp[k])) * inv_n
    return MomentSet(order=order, values=vals, flavor="classical")


# ----------------------------------------------------------------------
# Wavefunctions on a grid
# ----------------------------------------------------------------------
@dataclass
class WavefunctionGrid:
    """Complex wavefunction sampled on a uniform position grid.

    The conjugate momentum grid is the DFT grid p_m = 2 pi hbar m / (N dx)
    with m in standard FFT frequency order.
    """

    psi: np.ndarray
    x_min: float
    dx: float
    hbar: float
    mass: float = 1.0

    def __post_init__(self):
        psi = np.ascontiguousarray(self.psi, dtype=complex)
        if psi.ndim != 1:
            raise ValueError("psi must be a 1-d array")
        n = psi.size
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 16, got {n}")
        if not np.all(np.isfinite(psi.view(float))):
            raise ValueError("psi must be finite")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise ValueError(f"dx must be positive, got {self.dx}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive, got {self.mass}")
        nrm = float(np.sum(np.abs(psi) ** 2)) * self.dx
        if abs(nrm - 1.0) > 1e-6:
            raise ValueError(f"wavefunction must be normalized, got norm^2 = {nrm}")
        self.psi = psi

    @property
    def n(self) -> int:
        return self.psi.size

    @property
    def x_axis(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def p_axis(self) -> np.ndarray:
        """Ascending momentum grid (fftshifted DFT frequencies)."""
        return 2.0 * math.pi * self.hbar * np.fft.fftshift(np.fft.fftfreq(self.n, d=self.dx))

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2)) * self.dx

    def position_density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def momentum_amplitudes(self) -> np.ndarray:
        """phi(p) on the ascending `p_axis`, normalized so sum |phi|^2 dp = sum |psi|^2 dx."""
        freqs = np.fft.fftfreq(self.n, d=self.dx)
        phase = np.exp(-2j * math.pi * freqs * self.x_min)
        phi = np.fft.fft(self.psi) * phase * (self.dx / math.sqrt(2.0 * math.pi * self.hbar))
        return np.fft.fftshift(phi)

    def momentum_density(self) -> np.ndarray:
        return np.abs(self.momentum_amplitudes()) ** 2

    def copy(self) -> "WavefunctionGrid":
        return WavefunctionGrid(self.psi.copy(), self.x_min, self.dx, self.hbar, self.mass)


def _check_edges(density: np.ndarray, rel_tol: float, what: str):
    peak = float(np.max(density))
    edge = max(float(density[0]), float(density[-1]))
    if peak <= 0 or edge > rel_tol * peak:
        raise GridClippingError(
            f"{what} has weight {edge:.3e} at the grid edge (peak {peak:.3e}); enlarge the grid"
        )


def wavefunction_from_gaussian(
    g: GaussianState,
    n: int = 1024,
    mass: float = 1.0,
    x_min: float | None = None,
    dx: float | None = None,
    support_sigmas: float = 9.0,
    edge_tol: float = 1e-12,
) -> WavefunctionGrid:
    """The pure Gaussian wavefunction whose Wigner transform is `g`.

    Requires `g.pure_hbar` to be set.  The grid is sized automatically unless
    (x_min, dx) are given: wide enough for `support_sigmas` standard
    deviations in position, fine enough for the same coverage in momentum.
    """
    if g.pure_hbar is None:
        raise RealizabilityError("state is not tagged as pure; set pure_hbar")
    hbar = g.pure_hbar
    sx = math.sqrt(g.cxx)
    sp = math.sqrt(g.cpp)
    if dx is None:
        dx_span = 2.0 * support_sigmas * sx / n
        dx_mom = math.pi * hbar / (abs(g.mean_p) + support_sigmas * sp)
        if dx_span > dx_mom:
            raise GridClippingError(
                f"{n} points cannot cover {support_sigmas} sigma in both position and momentum; "
                "increase n"
            )
        dx = math.sqrt(dx_span * dx_mom)
    if x_min is None:
        x_min = g.mean_x - 0.5 * n * dx
    x = x_min + dx * np.arange(n)
    delta = x - g.mean_x
    a = 1.0 / (4.0 * g.cxx) - 1j * g.cxp / (2.0 * hbar * g.cxx)
    psi = np.exp(-a * delta * delta + 1j * g.mean_p * delta / hbar)
    psi = psi / math.sqrt(float(np.sum(np.abs(psi) ** 2)) * dx)
    w = WavefunctionGrid(psi, float(x_min), float(dx), hbar, mass)
    _check_edges(w.position_density(), edge_tol, "position density")
    _check_edges(w.momentum_density(), edge_tol, "momentum density")
    return w


def superpose(a: WavefunctionGrid, b: WavefunctionGrid, ca: complex = 1.0, cb: complex = 1.0) -> WavefunctionGrid:
    """Normalized coherent superposition ca*psi_a + cb*psi_b on a common grid."""
    if a.n != b.n or a.x_min != b.x_min or a.dx != b.dx or a.hbar != b.hbar or a.mass != b.mass:
        raise ValueError("superposition requires identical grids")
    psi = ca * a.psi + cb * b.psi
    nrm = math.sqrt(float(np.sum(np.abs(psi) ** 2)) * a.dx)
    if nrm == 0.0:
        raise ValueError("superposition vanishes identically")
    return WavefunctionGrid(psi / nrm, a.x_min, a.dx, a.hbar, a.mass)


# ----------------------------------------------------------------------
# Wigner and classical phase-space grids
# ----------------------------------------------------------------------
@dataclass
class WignerGrid:
    """Wigner function values on a rectangular phase-space lattice."""

    values: np.ndarray
    x0: float
    dx: float
    p0: float
    dp: float
    hbar: float

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("values must be a 2-d array indexed [x, p]")
        if not np.all(np.isfinite(v)):
            raise ValueError("Wigner values must be finite")
        if not (self.dx > 0 and self.dp > 0):
            raise ValueError("grid spacings must be positive")
        if not (self.hbar > 0):
            raise ValueError("hbar must be positive")
        self.values = v

    @property
    def x_axis(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.shape[0])

    @property
    def p_axis(self) -> np.ndarray:
        return self.p0 + self.dp * np.arange(self.values.shape[1])


@dataclass
class PhaseSpaceGrid:
    """Classical density values on a rectangular phase-space lattice.

    Classical densities must be non-negative; `neg_tol` is the tolerated
    relative undershoot (interpolation during evolution can produce tiny
    negative values).
    """

    values: np.ndarray
    x0: float
    dx: float
    p0: float
    dp: float
    neg_tol: float = 1e-12

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("values must be a 2-d array indexed [x, p]")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if not (self.dx > 0 and self.dp > 0):
            raise ValueError("grid spacings must be positive")
        peak = float(np.max(v))
        if peak <= 0:
            raise ValueError("density must be positive somewhere")
        worst = float(np.min(v))
        if worst < -self.neg_tol * peak:
            raise ValueError(
                f"density undershoots below tolerance: min {worst:.3e} vs peak {peak:.3e}"
            )
        self.values = v

    @property
    def x_axis(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.shape[0])

    @property
    def p_axis(self) -> np.ndarray:
        return self.p0 + self.dp * np.arange(self.values.shape[1])


def phase_space_grid_from_gaussian(
    g: GaussianState,
    nx: int = 256,
    npts: int = 256,
    support_sigmas: float = 8.0,
    x_span: tuple | None = None,
    p_span: tuple | None = None,
) -> PhaseSpaceGrid:
    """Sample the Gaussian density on a lattice, renormalized to unit grid mass."""
    sx = math.sqrt(g.cxx)
    sp = math.sqrt(g.cpp)
    if x_span is None:
        x_span = (g.mean_x - support_sigmas * sx, g.mean_x + support_sigmas * sx)
    if p_span is None:
        p_span = (g.mean_p - support_sigmas * sp, g.mean_p + support_sigmas * sp)
    x0, x1 = map(float, x_span)
    p0, p1 = map(float, p_span)
    dx = (x1 - x0) / (nx - 1)
    dp = (p1 - p0) / (npts - 1)
    x = x0 + dx * np.arange(nx)
    p = p0 + dp * np.arange(npts)
    vals = g.density(x[:, None], p[None, :])
    vals = vals / (float(vals.sum()) * dx * dp)
    return PhaseSpaceGrid(vals, x0, dx, p0, dp)


def _upsample_spectral(psi: np.ndarray) -> np.ndarray:
    """Band-limited 2x upsample; even output samples equal the input samples."""
    n = psi.size
    half = n // 2
    spec = np.fft.fft(psi)
    up = np.zeros(2 * n, dtype=complex)
    up[:half] = spec[:half]
    up[half] = 0.5 * spec[half]
    up[2 * n - half] = 0.5 * spec[half]
    up[2 * n - half + 1 :] = spec[half + 1 :]
    return np.fft.ifft(up) * 2.0


def _upsample_linear(psi: np.ndarray) -> np.ndarray:
    n = psi.size
    up = np.zeros(2 * n, dtype=complex)
    up[0::2] = psi
    up[1:-1:2] = 0.5 * (psi[:-1] + psi[1:])
    up[-1] = 0.5 * psi[-1]
    return up


def wigner_transform(w: WavefunctionGrid, interp: str = "spectral") -> WignerGrid:
    """Wigner function of a gridded wavefunction.

    The chord integral f_W(x, p) = (1/2 pi hbar) Int dy psi(x + y/2)
    psi*(x - y/2) exp(-i p y / hbar) is evaluated per grid row with an FFT
    over the chord length.  Half-grid wavefunction values come from a 2x
    upsample: band-limited by default (`interp="spectral"`), or midpoint
    averaging (`interp="linear"`).

    The momentum axis is the (ascending) conjugate DFT grid of the position
    axis, so marginals line up bin-for-bin with `position_density` and
    `momentum_density`.
    """
    if interp == "spectral":
        up = _upsample_spectral(w.psi)
    elif interp == "linear":
        up = _upsample_linear(w.psi)
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    n = w.n
    # chord index l in FFT frequency order; psi(x_j + l dx/2) = up[2j + l]
    l = (np.fft.fftfreq(n) * n).astype(np.intp)
    j2 = 2 * np.arange(n, dtype=np.intp)[:, None]
    idx_plus = j2 + l[None, :]
    idx_minus = j2 - l[None, :]
    valid = (idx_plus >= 0) & (idx_plus < 2 * n) & (idx_minus >= 0) & (idx_minus < 2 * n)
    chord = np.where(
        valid,
        up[np.clip(idx_plus, 0, 2 * n - 1)] * np.conj(up[np.clip(idx_minus, 0, 2 * n - 1)]),
        0.0,
    )
    f = np.fft.fft(chord, axis=1) * (w.dx / (2.0 * math.pi * w.hbar))
    values = np.fft.fftshift(f.real, axes=1)
    dp = 2.0 * math.pi * w.hbar / (n * w.dx)
    p0 = -0.5 * n * dp
    return WignerGrid(values, w.x_min, w.dx, p0, dp, w.hbar)


def sigma_n(grid, n: int) -> float:
    """Integral of the n-th power of a phase-space function over the lattice."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    v = grid.values
    return float(np.sum(v**n)) * grid.dx * grid.dp


def _lattice_moments(x_axis, p_axis, values, dx, dp, order, flavor) -> MomentSet:
    if order > MAX_MOMENT_ORDER:
        raise ValueError(f"moment extraction supports order <= {MAX_MOMENT_ORDER}")
    mass = float(values.sum()) * dx * dp
    if mass <= 0:
        raise ValueError("grid carries no mass")
    # contract over p first: A_k[j] = sum_m values[j, m] p_m^k
    pk = np.ones_like(p_axis)
    contractions = []
    for k in range(order + 1):
        contractions.append(values @ pk)
        pk = pk * p_axis
    vals = {}
    for n, k in _moment_keys(order):
        xn = x_axis**n if n else np.ones_like(x_axis)
        vals[(n, k)] = float(np.dot(xn, contractions[k])) * dx * dp / mass
    vals[(0, 0)] = 1.0
    return MomentSet(order=order, values=vals, flavor=flavor)


def moments_from_wigner(W: WignerGrid, order: int) -> MomentSet:
    """Phase-space averages over the Wigner lattice, normalized by its mass."""
    return _lattice_moments(W.x_axis, W.p_axis, W.values, W.dx, W.dp, order, "quantum-weyl")


def moments_from_grid(F: PhaseSpaceGrid, order: int) -> MomentSet:
    """Phase-space averages over a classical density lattice."""
    return _lattice_moments(F.x_axis, F.p_axis, F.values, F.dx, F.dp, order, "classical")


def moments_from_wavefunction(w: WavefunctionGrid, order: int, interp: str = "spectral") -> MomentSet:
    """Symmetrically ordered moments of a gridded wavefunction.

    Pure-x moments come from the position density, pure-p moments from the
    momentum density on the conjugate grid, and genuinely mixed moments from
    the Wigner transform (phase-space averages of x^n p^k).  Rejects states
    whose position or momentum support reaches the grid edge, since moments
    are then untrustworthy.
    """
    if order > MAX_MOMENT_ORDER:
        raise ValueError(f"moment extraction supports order <= {MAX_MOMENT_ORDER}")
    rho_x = w.position_density()
    rho_p = w.momentum_density()
    _check_edges(rho_x, 1e-10, "position density")
    _check_edges(rho_p, 1e-10, "momentum density")
    x = w.x_axis
    p = w.p_axis
    mass_x = float(rho_x.sum()) * w.dx
    mass_p = float(rho_p.sum()) * (p[1] - p[0])
    vals = {}
    need_mixed = any(n >= 1 and k >= 1 for (n, k) in _moment_keys(order))
    wig = wigner_transform(w, interp=interp) if need_mixed else None
    mixed = moments_from_wigner(wig, order) if wig is not None else None
    for n, k in _moment_keys(order):
        if k == 0:
            vals[(n, k)] = float(np.dot(rho_x, x**n)) * w.dx / mass_x
        elif n == 0:
            vals[(n, k)] = float(np.dot(rho_p, p**k)) * (p[1] - p[0]) / mass_p
        else:
            vals[(n, k)] = mixed.values[(n, k)]
    vals[(0, 0)] = 1.0
    return MomentSet(order=order, values=vals, flavor="quantum-weyl")
