"""Polynomial potentials in one dimension, with optional driven coefficients.

A potential is V(x, t) = sum_k c_k(t) x^k where each coefficient may carry a
harmonic drive c_k(t) = c_k + amp * cos(omega * t + phase).  Everything the
rest of the package needs from a potential reduces to evaluating V and its
x-derivatives of any order at given points and times, which is exact for
polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DEGREE = 10


@dataclass(frozen=True)
class Drive:
    """Harmonic modulation of a single polynomial coefficient.

    The driven coefficient is c_k(t) = c_k + amp * cos(omega * t + phase).
    """

    k: int
    amp: float
    omega: float
    phase: float = 0.0

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 0:
            raise ValueError(f"drive index must be a non-negative integer, got {self.k!r}")
        for name in ("amp", "omega", "phase"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"drive {name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PolynomialPotential:
    """V(x, t) = sum_k c_k(t) x^k together with the particle mass.

    Parameters
    ----------
    coeffs : sequence of float
        Static coefficients (c_0, c_1, ..., c_d), degree d <= MAX_DEGREE.
    drives : sequence of Drive, optional
        Harmonic modulations of individual coefficients.
    mass : float
        Particle mass, must be positive.
    """

    coeffs: tuple = ()
    drives: tuple = ()
    mass: float = 1.0

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) == 0:
            coeffs = (0.0,)
        if len(coeffs) - 1 > MAX_DEGREE:
            raise ValueError(
                f"polynomial degree {len(coeffs) - 1} exceeds supported maximum {MAX_DEGREE}"
            )
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("potential coefficients must be finite")
        drives = tuple(self.drives)
        for d in drives:
            if not isinstance(d, Drive):
                raise TypeError(f"expected Drive, got {type(d).__name__}")
            if d.k >= len(coeffs):
                raise ValueError(
                    f"drive targets coefficient {d.k} but degree is {len(coeffs) - 1}"
                )
        seen = [d.k for d in drives]
        if len(seen) != len(set(seen)):
            raise ValueError("at most one drive per coefficient")
        m = float(self.mass)
        if not (math.isfinite(m) and m > 0):
            raise ValueError(f"mass must be positive and finite, got {m!r}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "drives", drives)
        object.__setattr__(self, "mass", m)

    # ------------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_static(self) -> bool:
        return len(self.drives) == 0

    def coeffs_at(self, t: float) -> np.ndarray:
        """Coefficient vector (c_0, ..., c_d) at time t."""
        c = np.array(self.coeffs, dtype=float)
        for d in self.drives:
            c[d.k] += d.amp * math.cos(d.omega * t + d.phase)
        return c

    # ------------------------------------------------------------------
    def evaluate(self, x, t: float = 0.0):
        """V(x, t); x may be a scalar or an ndarray."""
        c = self.coeffs_at(t)
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, c[-1])
        for ck in c[-2::-1]:
            out = out * x + ck
        if out.ndim == 0:
            return float(out)
        return out

    def derivative(self, n: int, x, t: float = 0.0):
        """n-th x-derivative of V at (x, t), exact.

        n = 0 returns V itself.  Orders above the degree are identically zero.
        """
        if n < 0:
            raise ValueError(f"derivative order must be >= 0, got {n}")
        if n == 0:
            return self.evaluate(x, t)
        c = self.coeffs_at(t)
        x = np.asarray(x, dtype=float)
        if n > self.degree:
            out = np.zeros_like(x)
            return float(out) if out.ndim == 0 else out
        # coefficient of x^(k-n) is c_k * k!/(k-n)!
        dc = [c[k] * math.perm(k, n) for k in range(n, len(c))]
        out = np.full_like(x, dc[-1])
        for ck in dc[-2::-1]:
            out = out * x + ck
        if out.ndim == 0:
            return float(out)
        return out

    def derivatives_at(self, x: float, t: float = 0.0) -> np.ndarray:
        """All derivatives (V, V', ..., V^(d)) at a scalar point, as an array."""
        return np.array([self.derivative(n, x, t) for n in range(self.degree + 1)])

    def force(self, x, t: float = 0.0):
        """-dV/dx at (x, t)."""
        d = self.derivative(1, x, t)
        return -d

    def kernel_arrays(self):
        """Coefficient and drive arrays in the layout the numerical kernels take."""
        c = np.array(self.coeffs, dtype=float)
        dk = np.array([d.k for d in self.drives], dtype=np.int64)
        damp = np.array([d.amp for d in self.drives], dtype=float)
        domega = np.array([d.omega for d in self.drives], dtype=float)
        dphase = np.array([d.phase for d in self.drives], dtype=float)
        return c, dk, damp, domega, dphase

    # ------------------------------------------------------------------
    # convenience constructors for the standard model systems
    @classmethod
    def free(cls, mass: float = 1.0) -> "PolynomialPotential":
        return cls(coeffs=(0.0,), mass=mass)

    @classmethod
    def harmonic(cls, omega: float = 1.0, mass: float = 1.0) -> "PolynomialPotential":
        """V = (1/2) m omega^2 x^2.  Negative omega^2 via `inverted`."""
        return cls(coeffs=(0.0, 0.0, 0.5 * mass * omega * omega), mass=mass)

    @classmethod
    def inverted(cls, omega: float = 1.0, mass: float = 1.0) -> "PolynomialPotential":
        """V = -(1/2) m omega^2 x^2, the unstable quadratic hilltop."""
        return cls(coeffs=(0.0, 0.0, -0.5 * mass * omega * omega), mass=mass)

    @classmethod
    def cubic(cls, alpha: float, omega: float = 0.0, mass: float = 1.0) -> "PolynomialPotential":
        """V = (1/2) m omega^2 x^2 + alpha x^3."""
        return cls(coeffs=(0.0, 0.0, 0.5 * mass * omega * omega, float(alpha)), mass=mass)

    @classmethod
    def quartic(cls, a: float, omega: float = 0.0, mass: float = 1.0) -> "PolynomialPotential":
        """V = (1/2) m omega^2 x^2 + a x^4."""
        return cls(coeffs=(0.0, 0.0, 0.5 * mass * omega * omega, 0.0, float(a)), mass=mass)
