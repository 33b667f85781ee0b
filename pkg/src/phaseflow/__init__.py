"""Phase-space dynamics of Gaussian initial states, four ways.

The package evolves one Gaussian preparation under exact classical transport
(trajectory ensembles, gridded Liouville flow), exact quantum mechanics
(split-operator wavefunctions and their Wigner transforms), truncated moment
hierarchies of either flavor, and self-consistent Gaussian approximations,
then compares the treatments observable-by-observable.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .gaussian import (
    FlowResult,
    GaussianSum,
    LyapunovJob,
    LyapunovResult,
    MtgaResult,
    TdvpState,
    consistent_tga_rhs,
    fluct_hamiltonian,
    heller_energy_drift,
    heller_rhs,
    hg_energy,
    integrate_flow,
    integrate_rho_chart,
    lyapunov_max,
    mtga_density,
    mtga_moments,
    mtga_propagate,
    tdvp_energy,
    tdvp_rhs,
    tga_energy,
    tile_packets,
)
from .hierarchy import (
    CentralCheckReport,
    HierarchyResult,
    HierarchySpec,
    central_hierarchy_check,
    classical_rhs,
    hierarchy_energy,
    integrate_hierarchy,
    quantum_rhs,
    theta_coeff,
    wick_closure,
)
from .oracles import (
    BoundaryMassError,
    EnsembleResult,
    IntegratorConfig,
    LiouvilleResult,
    ParticleEscapeError,
    SplitStepResult,
    ensemble_energy,
    leapfrog_evolve,
    liouville_evolve,
    splitstep_evolve,
    wavefunction_energy,
)
from .potential import Drive, PolynomialPotential
from .states import (
    GaussianState,
    GridClippingError,
    MomentSet,
    PhaseSpaceGrid,
    RealizabilityError,
    TrajectoryEnsemble,
    WavefunctionGrid,
    WignerGrid,
    central_from_raw,
    moments_from_ensemble,
    moments_from_gaussian,
    moments_from_grid,
    moments_from_wavefunction,
    moments_from_wigner,
    phase_space_grid_from_gaussian,
    raw_from_central,
    sample_ensemble,
    sigma2_of_gaussian,
    sigma_n,
    superpose,
    wavefunction_from_gaussian,
    wigner_transform,
)

__all__ = [
    "BACKEND",
    "Drive",
    "PolynomialPotential",
    "FlowResult",
    "GaussianSum",
    "LyapunovJob",
    "LyapunovResult",
    "MtgaResult",
    "TdvpState",
    "consistent_tga_rhs",
    "fluct_hamiltonian",
    "heller_energy_drift",
    "heller_rhs",
    "hg_energy",
    "integrate_flow",
    "integrate_rho_chart",
    "lyapunov_max",
    "mtga_density",
    "mtga_moments",
    "mtga_propagate",
    "tdvp_energy",
    "tdvp_rhs",
    "tga_energy",
    "tile_packets",
    "CentralCheckReport",
    "HierarchyResult",
    "HierarchySpec",
    "central_hierarchy_check",
    "classical_rhs",
    "hierarchy_energy",
    "integrate_hierarchy",
    "quantum_rhs",
    "theta_coeff",
    "wick_closure",
    "BoundaryMassError",
    "EnsembleResult",
    "IntegratorConfig",
    "LiouvilleResult",
    "ParticleEscapeError",
    "SplitStepResult",
    "ensemble_energy",
    "leapfrog_evolve",
    "liouville_evolve",
    "splitstep_evolve",
    "wavefunction_energy",
    "GaussianState",
    "GridClippingError",
    "MomentSet",
    "PhaseSpaceGrid",
    "RealizabilityError",
    "TrajectoryEnsemble",
    "WavefunctionGrid",
    "WignerGrid",
    "central_from_raw",
    "moments_from_ensemble",
    "moments_from_gaussian",
    "moments_from_grid",
    "moments_from_wavefunction",
    "moments_from_wigner",
    "phase_space_grid_from_gaussian",
    "raw_from_central",
    "sample_ensemble",
    "sigma2_of_gaussian",
    "sigma_n",
    "superpose",
    "wavefunction_from_gaussian",
    "wigner_transform",
    "__version__",
]
