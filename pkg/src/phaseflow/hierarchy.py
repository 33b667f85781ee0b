"""Exact raw-moment evolution hierarchies with pluggable closures.

For a polynomial potential the time derivative of every raw moment
<x^n p^k> is a finite linear combination of other raw moments, so the
only modelling step is the closure that supplies moments above the
truncation order M.  Raw moments are the canonical representation here;
the familiar closed-form central-moment rates are cross-checked against
chain-rule derivatives of the raw equations by `central_hierarchy_check`.

Classical and quantum flavors share every term except the odd-derivative
corrections Theta(k, lambda) <x^n p^(k-lambda) V^(lambda)>, which vanish
unless some tracked moment has momentum order k >= 3 and the potential
has degree >= 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import wick
from .potential import PolynomialPotential
from .states import MomentSet, GaussianState, _moment_keys, moments_from_gaussian

FLAVORS = ("classical", "quantum")
CLOSURES = ("gaussian-wick", "zero-central")
MIN_ORDER = 2
MAX_ORDER = 6
CHECK_TOL = 1e-10


def theta_coeff(n: int, lam: int, hbar: float) -> float:
    """Coefficient of <p^(n-lam) V^(lam)> in the quantum moment hierarchy.

    Defined for odd lam with 3 <= lam <= n as
    (-1)^lam / lam! * n!/(n-lam)! * (hbar/2i)^(lam-1); lam - 1 is even so
    the value is real, with sign (-1)^((lam-1)/2).  lam = 1 is excluded:
    that term is the explicit classical force and would be double counted.
    """
    if lam % 2 == 0 or lam < 3:
        raise ValueError(f"lam must be an odd integer >= 3, got {lam}")
    if lam > n:
        raise ValueError(f"lam must not exceed n, got lam={lam}, n={n}")
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    sign = -1.0 if (lam - 1) // 2 % 2 else 1.0
    return -sign * math.perm(n, lam) / math.factorial(lam) * (0.5 * hbar) ** (lam - 1)


@dataclass(frozen=True)
class HierarchySpec:
    """Truncated moment hierarchy: potential, order, flavor, and closure.

    `order` is the highest tracked total moment order M (2 <= M <= 6).
    `closure` supplies moments above M: "gaussian-wick" closes central
    moments by Isserlis pairing of the tracked covariance, "zero-central"
    sets central moments above M to zero.  The zero-central closure only
    supports potentials of degree <= 4, since the right-hand side then
    needs moments up to order M + degree - 2 and the closure is specified
    only up to order M + 2.
    """

    potential: PolynomialPotential
    order: int = 2
    flavor: str = "classical"
    hbar: float = 1.0
    closure: str = "gaussian-wick"

    def __post_init__(self):
        if not isinstance(self.potential, PolynomialPotential):
            raise TypeError("potential must be a PolynomialPotential")
        if not (MIN_ORDER <= self.order <= MAX_ORDER):
            raise ValueError(
                f"order must lie in [{MIN_ORDER}, {MAX_ORDER}], got {self.order}"
            )
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        closure = self.closure
        if closure == "zero-central-above-M":
            closure = "zero-central"
            object.__setattr__(self, "closure", closure)
        if closure not in CLOSURES:
            raise ValueError(f"closure must be one of {CLOSURES}, got {closure!r}")
        if self.flavor == "quantum" and not self.hbar > 0:
            raise ValueError(f"quantum flavor requires hbar > 0, got {self.hbar}")
        need = self.order + self.potential.degree - 2
        if closure == "zero-central" and need > self.order + 2:
            raise ValueError(
                "zero-central closure supports potentials of degree <= 4: "
                f"degree {self.potential.degree} needs moments of order {need} "
                f"> {self.order + 2}"
            )

    @property
    def moment_flavor(self) -> str:
        """The MomentSet flavor label matching this hierarchy."""
        return "classical" if self.flavor == "classical" else "quantum-weyl"


def _active_powers(pot: PolynomialPotential):
    """Powers j >= 1 whose coefficient c_j can be nonzero at some time."""
    driven = {d.k for d in pot.drives}
    return [
        j
        for j in range(1, pot.degree + 1)
        if j in driven or pot.coeffs[j] != 0.0
    ]


def _rhs_terms(pot: PolynomialPotential, flavor: str, hbar: float, n: int, k: int):
    """Terms of d<x^n p^k>/dt as (j, scale, a, b) tuples.

    Each term contributes scale * c_j(t) * <x^a p^b>, where j = -1 means
    no potential coefficient (the kinetic streaming term).  The same
    generator feeds both the compiled evaluation plan and the exact
    central-moment cross-check, so they cannot drift apart.
    """
    terms = []
    if n >= 1:
        terms.append((-1, n / pot.mass, n - 1, k + 1))
    active = _active_powers(pot)
    if k >= 1:
        for j in active:
            terms.append((j, -float(k * j), n + j - 1, k - 1))
    if flavor == "quantum":
        lam = 3
        while lam <= k:
            th = theta_coeff(k, lam, hbar)
            for j in active:
                if j >= lam:
                    terms.append((j, th * math.perm(j, lam), n + j - lam, k - lam))
            lam += 2
    return terms


def _binom_expansion(a: int, b: int):
    """Coefficients of <x^a p^b> as a sum over central moments <dx^i dp^j>."""
    out = []
    for i in range(a + 1):
        ca = math.comb(a, i)
        for j in range(b + 1):
            out.append((i, j, ca * math.comb(b, j), a - i, b - j))
    return out


@dataclass(frozen=True)
class _Plan:
    keys: tuple
    index: dict
    terms: tuple          # per tracked key, tuple of (j, scale, a, b)
    ext_keys: tuple       # referenced keys of order > M, ascending order
    ext_expansions: tuple  # per ext key, tuple of (i, j, comb, ex, ep)
    closure_keys: tuple   # central-moment keys of order > M the closures fill
    exact_keys: tuple     # central-moment keys of order <= M the expansions use
    need_order: int       # highest central order any closure has to supply
    energy_powers: tuple  # potential powers j with <x^j> beyond tracked order


@lru_cache(maxsize=64)
def _build_plan(spec: HierarchySpec) -> _Plan:
    pot = spec.potential
    keys = tuple(key for key in _moment_keys(spec.order) if key != (0, 0))
    index = {key: i for i, key in enumerate(keys)}
    all_terms = []
    referenced = set()
    for n, k in keys:
        terms = tuple(_rhs_terms(pot, spec.flavor, spec.hbar, n, k))
        all_terms.append(terms)
        referenced.update((a, b) for (_, _, a, b) in terms)
    energy_powers = tuple(
        j for j in _active_powers(pot) if j > spec.order
    )
    referenced.update((j, 0) for j in energy_powers)
    ext = sorted(
        (key for key in referenced if key[0] + key[1] > spec.order),
        key=lambda key: (key[0] + key[1], key),
    )
    expansions = tuple(tuple(_binom_expansion(a, b)) for (a, b) in ext)
    used = {(i, j) for exp in expansions for (i, j, _, _, _) in exp}
    closure = sorted(
        (key for key in used if key[0] + key[1] > spec.order),
        key=lambda key: (key[0] + key[1], key),
    )
    exact = sorted(
        (key for key in used if key[0] + key[1] <= spec.order),
        key=lambda key: (key[0] + key[1], key),
    )
    need_order = max((a + b for (a, b) in ext), default=0)
    return _Plan(
        keys=keys,
        index=index,
        terms=tuple(all_terms),
        ext_keys=tuple(ext),
        ext_expansions=expansions,
        closure_keys=tuple(closure),
        exact_keys=tuple(exact),
        need_order=need_order,
        energy_powers=energy_powers,
    )


def _central_below(tab: dict, order: int) -> dict:
    """Exact central moments up to `order` from the raw moments in `tab`."""
    mx = tab[(1, 0)]
    mp = tab[(0, 1)]
    central = {}
    for n in range(order + 1):
        for k in range(order + 1 - n):
            total = 0.0
            for i in range(n + 1):
                bx = math.comb(n, i) * (-mx) ** (n - i)
                for j in range(k + 1):
                    total += bx * math.comb(k, j) * (-mp) ** (k - j) * tab[(i, j)]
            central[(n, k)] = total
    return central


def _extend_table(tab: dict, spec: HierarchySpec, plan: _Plan) -> None:
    """Fill closure-supplied raw moments of order > M into `tab` in place."""
    if not plan.ext_keys:
        return
    mx = tab[(1, 0)]
    mp = tab[(0, 1)]
    central = {}
    for n, k in plan.exact_keys:
        total = 0.0
        for i in range(n + 1):
            bx = math.comb(n, i) * (-mx) ** (n - i)
            for j in range(k + 1):
                total += bx * math.comb(k, j) * (-mp) ** (k - j) * tab[(i, j)]
        central[(n, k)] = total
    if spec.closure == "gaussian-wick":
        cxx = tab[(2, 0)] - mx * mx
        cxp = tab[(1, 1)] - mx * mp
        cpp = tab[(0, 2)] - mp * mp
        w = wick.central_array(cxx, cxp, cpp, plan.need_order)
        for i, j in plan.closure_keys:
            central[(i, j)] = w[i, j]
    else:
        for key in plan.closure_keys:
            central[key] = 0.0
    for key, expansion in zip(plan.ext_keys, plan.ext_expansions):
        total = 0.0
        for i, j, comb, ex, ep in expansion:
            c = central[(i, j)]
            if c != 0.0:
                total += comb * mx**ex * mp**ep * c
        tab[key] = total


def _eval_rhs(y: np.ndarray, t: float, spec: HierarchySpec, plan: _Plan) -> np.ndarray:
    pot = spec.potential
    coeffs = pot.coeffs_at(t) if not pot.is_static else None
    c = pot.coeffs if coeffs is None else coeffs
    tab = {(0, 0): 1.0}
    for i, key in enumerate(plan.keys):
        tab[key] = y[i]
    _extend_table(tab, spec, plan)
    dy = np.empty(len(plan.keys))
    for i, terms in enumerate(plan.terms):
        total = 0.0
        for j, scale, a, b in terms:
            v = tab[(a, b)]
            if v != 0.0:
                total += scale * v if j < 0 else scale * c[j] * v
        dy[i] = total
    return dy


def _rhs_dict(ms: MomentSet, t: float, spec: HierarchySpec) -> dict:
    if ms.central:
        from .states import raw_from_central

        ms = raw_from_central(ms)
    if ms.order != spec.order:
        raise ValueError(
            f"moment set has order {ms.order}, hierarchy order is {spec.order}"
        )
    plan = _build_plan(spec)
    y = np.array([ms.values[key] for key in plan.keys])
    dy = _eval_rhs(y, t, spec, plan)
    out = {(0, 0): 0.0}
    for i, key in enumerate(plan.keys):
        out[key] = float(dy[i])
    return out


def classical_rhs(ms: MomentSet, t: float, spec: HierarchySpec) -> dict:
    """d<x^n p^k>/dt for every tracked key, as a dict keyed like `ms`."""
    if spec.flavor != "classical":
        raise ValueError(f"classical_rhs needs a classical spec, got {spec.flavor!r}")
    return _rhs_dict(ms, t, spec)


def quantum_rhs(ms: MomentSet, t: float, spec: HierarchySpec) -> dict:
    """Like classical_rhs plus the odd-derivative quantum correction terms."""
    if spec.flavor != "quantum":
        raise ValueError(f"quantum_rhs needs a quantum spec, got {spec.flavor!r}")
    return _rhs_dict(ms, t, spec)


def wick_closure(means, cov, n: int, k: int) -> float:
    """Gaussian fluctuation moment <dx^n dp^k> by Isserlis pairing.

    `means` is accepted for interface symmetry with closure providers but
    cannot influence a central moment; `cov` is the 2x2 covariance matrix
    [[cxx, cxp], [cxp, cpp]], required positive definite.
    """
    c = np.asarray(cov, dtype=float)
    if c.shape != (2, 2):
        raise ValueError(f"covariance must be 2x2, got shape {c.shape}")
    if abs(c[0, 1] - c[1, 0]) > 1e-12 * (1.0 + abs(c[0, 1])):
        raise ValueError("covariance matrix must be symmetric")
    if c[0, 0] <= 0 or np.linalg.det(c) <= 0:
        raise ValueError("covariance matrix must be positive definite")
    del means
    return wick.central_moment(c[0, 0], c[0, 1], c[1, 1], n, k)


def hierarchy_energy(spec: HierarchySpec, ms: MomentSet, t: float = 0.0) -> float:
    """<p^2>/2m + <V(x)>, closure-supplied above the tracked order."""
    if ms.central:
        from .states import raw_from_central

        ms = raw_from_central(ms)
    plan = _build_plan(spec)
    tab = {(0, 0): 1.0}
    for key in plan.keys:
        tab[key] = ms.values[key]
    _extend_table(tab, spec, plan)
    return _energy_from_table(tab, spec, t)


def _energy_from_table(tab: dict, spec: HierarchySpec, t: float) -> float:
    pot = spec.potential
    c = pot.coeffs if pot.is_static else pot.coeffs_at(t)
    total = tab[(0, 2)] / (2.0 * pot.mass) + c[0]
    for j in _active_powers(pot):
        total += c[j] * tab[(j, 0)]
    return total


@dataclass(frozen=True)
class HierarchyResult:
    """Snapshots of a truncated-hierarchy integration plus diagnostics.

    `values[i]` holds the tracked raw moments at `times[i]`, ordered by
    `keys`.  `failure_time` is the time at which the state first left the
    finite range (closure blow-up), or None for a clean run; snapshots
    stop at the last finite state.
    """

    spec: HierarchySpec
    keys: tuple
    times: np.ndarray
    values: np.ndarray
    det_c: np.ndarray
    energy: np.ndarray
    failure_time: float | None = None

    def moment_set(self, i: int) -> MomentSet:
        vals = {(0, 0): 1.0}
        for col, key in enumerate(self.keys):
            vals[key] = self.values[i, col]
        return MomentSet(
            order=self.spec.order, values=vals, flavor=self.spec.moment_flavor
        )

    @property
    def final(self) -> MomentSet:
        return self.moment_set(len(self.times) - 1)

    def series(self, n: int, k: int) -> np.ndarray:
        return self.values[:, self.keys.index((n, k))]


def integrate_hierarchy(
    spec: HierarchySpec,
    initial: MomentSet,
    dt: float,
    t_final: float,
    stride: int = 1,
    t0: float = 0.0,
) -> HierarchyResult:
    """Fixed-step RK4 integration of the closed moment system.

    Snapshots are taken every `stride` steps (plus the initial state).
    A non-finite state aborts the run and records `failure_time`; for
    unstable closures that is the expected outcome, not an error.
    """
    if initial.central:
        from .states import raw_from_central

        initial = raw_from_central(initial)
    if initial.order != spec.order:
        raise ValueError(
            f"initial moments have order {initial.order}, hierarchy order is {spec.order}"
        )
    if dt <= 0 or t_final <= t0:
        raise ValueError("need dt > 0 and t_final > t0")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    det0 = initial.det_c()
    if spec.flavor == "quantum":
        bound = 0.25 * spec.hbar**2
        if det0 < bound * (1.0 - 1e-9):
            raise ValueError(
                f"initial det C = {det0:.6g} violates the uncertainty bound "
                f"(hbar/2)^2 = {bound:.6g}"
            )
    elif det0 < 0:
        raise ValueError(f"initial covariance is not realizable: det C = {det0:.6g}")

    plan = _build_plan(spec)
    n_steps = max(1, math.ceil((t_final - t0) / dt - 1e-12))
    n_steps = ((n_steps + stride - 1) // stride) * stride
    n_snap = n_steps // stride + 1

    y = np.array([initial.values[key] for key in plan.keys])
    times = np.empty(n_snap)
    values = np.empty((n_snap, len(plan.keys)))
    i_mx = plan.index[(1, 0)]
    i_mp = plan.index[(0, 1)]
    i_xx = plan.index[(2, 0)]
    i_xp = plan.index[(1, 1)]
    i_pp = plan.index[(0, 2)]

    def record(row: int, t: float) -> None:
        times[row] = t
        values[row] = y

    record(0, t0)
    failure_time = None
    row = 1
    for step in range(n_steps):
        t = t0 + step * dt
        k1 = _eval_rhs(y, t, spec, plan)
        k2 = _eval_rhs(y + 0.5 * dt * k1, t + 0.5 * dt, spec, plan)
        k3 = _eval_rhs(y + 0.5 * dt * k2, t + 0.5 * dt, spec, plan)
        k4 = _eval_rhs(y + dt * k3, t + dt, spec, plan)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            failure_time = t + dt
            break
        if (step + 1) % stride == 0:
            record(row, t0 + (step + 1) * dt)
            row += 1
    times = times[:row]
    values = values[:row]

    det_c = (
        (values[:, i_xx] - values[:, i_mx] ** 2)
        * (values[:, i_pp] - values[:, i_mp] ** 2)
        - (values[:, i_xp] - values[:, i_mx] * values[:, i_mp]) ** 2
    )
    energy = np.empty(row)
    for i in range(row):
        tab = {(0, 0): 1.0}
        for col, key in enumerate(plan.keys):
            tab[key] = values[i, col]
        _extend_table(tab, spec, plan)
        energy[i] = _energy_from_table(tab, spec, times[i])
    return HierarchyResult(
        spec=spec,
        keys=plan.keys,
        times=times,
        values=values,
        det_c=det_c,
        energy=energy,
        failure_time=failure_time,
    )


# ----------------------------------------------------------------------
# central-moment cross-check
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CheckRow:
    moment: str
    n: int
    closed_form: float
    derived: float
    residual: float


@dataclass(frozen=True)
class CentralCheckReport:
    rows: tuple
    max_residual: float
    passed: bool
    tol: float = CHECK_TOL

    def as_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "passed": self.passed,
            "tol": self.tol,
            "rows": [
                {
                    "moment": r.moment,
                    "n": r.n,
                    "closed_form": r.closed_form,
                    "derived": r.derived,
                    "residual": r.residual,
                }
                for r in self.rows
            ],
        }


def _exact_raw_rhs(spec: HierarchySpec, tab: dict, t: float, n: int, k: int) -> float:
    """d<x^n p^k>/dt from an exact (untruncated) raw moment table."""
    pot = spec.potential
    c = pot.coeffs if pot.is_static else pot.coeffs_at(t)
    total = 0.0
    for j, scale, a, b in _rhs_terms(pot, spec.flavor, spec.hbar, n, k):
        v = tab[(a, b)]
        if v != 0.0:
            total += scale * v if j < 0 else scale * c[j] * v
    return total


def _avg_derivative(
    central: dict, derivs: np.ndarray, lam: int, a: int, b: int
) -> float:
    """<dx^a dp^b V^(lam)(x)> with V expanded exactly about the mean."""
    total = 0.0
    for s in range(len(derivs) - lam):
        d = derivs[lam + s]
        if d != 0.0:
            total += d / math.factorial(s) * central[(a + s, b)]
    return total


def central_hierarchy_check(
    spec: HierarchySpec,
    state,
    n_max: int | None = None,
    quantum_delta: str = "raw-power",
) -> CentralCheckReport:
    """Residuals between closed-form and chain-rule central-moment rates.

    The closed forms are, for fluctuations (dx, dp) about the means:

        d<dx^n>/dt    = (n/m) <dx^(n-1) dp>
        d<dp^n>/dt    = n [<dp^(n-1)> <V'> - <dp^(n-1) V'>]   (+ quantum)
        d<dx^n dp>/dt = <dx^n> <V'> - <dx^n V'> + (n/m) <dx^(n-1) dp^2>

    where the quantum addition to the second family is
    sum over odd lam >= 3 of theta_coeff(n, lam) times a moment of
    V^(lam), see `quantum_delta` below.  The derived side applies the
    chain rule to the raw-moment evolution equations, so agreement
    (residual at roundoff) confirms the two routes describe the same
    dynamics.  Both sides are evaluated on the exact moments of `state`
    with no closure involved, which requires moments up to order
    M + degree - 1.

    `quantum_delta` selects the power appearing in the quantum addition:
    "raw-power" uses <(pbar + dp)^(n-lam) V^(lam)>, the raw momentum
    power carried over unchanged from the uncentered equations;
    "fluctuation" uses <dp^(n-lam) V^(lam)>.  The chain rule produces the
    fluctuation form, so with pbar != 0 and n - lam >= 1 the raw-power
    rows report the genuine gap between the two conventions rather than
    an implementation error; the two coincide whenever pbar = 0 or
    n = lam.
    """
    if quantum_delta not in ("raw-power", "fluctuation"):
        raise ValueError(
            f"quantum_delta must be 'raw-power' or 'fluctuation', got {quantum_delta!r}"
        )
    need = max(spec.order, 2) + max(spec.potential.degree, 1) - 1
    if isinstance(state, GaussianState):
        ms = moments_from_gaussian(state, need, flavor=spec.moment_flavor)
    elif isinstance(state, MomentSet):
        from .states import raw_from_central

        ms = raw_from_central(state)
        if ms.order < need:
            raise ValueError(
                f"state carries moments to order {ms.order}; the check needs "
                f"order {need} for hierarchy order {spec.order} and potential "
                f"degree {spec.potential.degree}"
            )
    else:
        raise TypeError("state must be a GaussianState or MomentSet")
    if n_max is None:
        n_max = spec.order
    if n_max > spec.order:
        raise ValueError(f"n_max must not exceed the hierarchy order {spec.order}")

    t = 0.0
    pot = spec.potential
    tab = dict(ms.values)
    mx = tab[(1, 0)]
    mp = tab[(0, 1)]
    central = _central_below(tab, ms.order)
    derivs = pot.derivatives_at(mx, t)
    v1_avg = _avg_derivative(central, derivs, 1, 0, 0)
    dmx = _exact_raw_rhs(spec, tab, t, 1, 0)
    dmp = _exact_raw_rhs(spec, tab, t, 0, 1)

    def derived_central_rate(n: int, k: int) -> float:
        """Chain rule: d/dt of the binomial raw-to-central conversion."""
        total = 0.0
        for i in range(n + 1):
            cn = math.comb(n, i)
            for j in range(k + 1):
                ck = math.comb(k, j)
                mu = tab[(i, j)]
                dmu = _exact_raw_rhs(spec, tab, t, i, j)
                px = (-mx) ** (n - i)
                pp = (-mp) ** (k - j)
                total += cn * ck * px * pp * dmu
                if n - i >= 1:
                    total += (
                        cn * ck * (n - i) * (-mx) ** (n - i - 1) * (-dmx) * pp * mu
                    )
                if k - j >= 1:
                    total += (
                        cn * ck * px * (k - j) * (-mp) ** (k - j - 1) * (-dmp) * mu
                    )
        return total

    rows = []

    def add(moment: str, n: int, closed_form: float, derived: float) -> None:
        res = abs(closed_form - derived) / max(1.0, abs(closed_form), abs(derived))
        rows.append(CheckRow(moment, n, closed_form, derived, res))

    for n in range(2, n_max + 1):
        closed = (n / pot.mass) * central[(n - 1, 1)]
        add(f"dx^{n}", n, closed, derived_central_rate(n, 0))
    for n in range(2, n_max + 1):
        closed = n * (
            central[(0, n - 1)] * v1_avg
            - _avg_derivative(central, derivs, 1, 0, n - 1)
        )
        if spec.flavor == "quantum":
            lam = 3
            while lam <= n:
                th = theta_coeff(n, lam, spec.hbar)
                if quantum_delta == "raw-power":
                    for i in range(n - lam + 1):
                        avg = _avg_derivative(central, derivs, lam, 0, i)
                        if avg != 0.0:
                            closed += (
                                th * math.comb(n - lam, i) * mp ** (n - lam - i) * avg
                            )
                else:
                    closed += th * _avg_derivative(central, derivs, lam, 0, n - lam)
                lam += 2
        add(f"dp^{n}", n, closed, derived_central_rate(0, n))
    for n in range(1, n_max):
        closed = (
            central[(n, 0)] * v1_avg
            - _avg_derivative(central, derivs, 1, n, 0)
            + (n / pot.mass) * central[(n - 1, 2)]
        )
        add(f"dx^{n} dp", n, closed, derived_central_rate(n, 1))

    max_res = max(r.residual for r in rows) if rows else 0.0
    return CentralCheckReport(
        rows=tuple(rows), max_residual=max_res, passed=max_res <= CHECK_TOL
    )
