"""Unitary evolution reduced to matrix Riccati equations on Grassmann and flag manifolds."""
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    integrate_riccati,
    integrate_schrodinger,
    riccati_rhs_flag,
    riccati_rhs_grassmann,
)
from .errors import (
    ChartEscape,
    ChartSingular,
    ConfigError,
    DegenerateConfiguration,
    FlagRiccatiError,
    StepRejected,
)
from .extraction import extract, extract_flag, extract_grassmann, extract_trajectory
from .frames import (
    FlagCoordinates,
    UnitaryFrame,
    flag_frame,
    frame,
    grassmann_frame,
    projections,
    recursive_frame,
)
from .hamiltonians import BlockHamiltonian, HarmonicTerm, random_hamiltonian
from .matcore import BlockPartition, polar_unitary
from .superposition import (
    SolutionEnsemble,
    cross_ratio,
    cross_ratio_drift,
    integrate_ensemble,
    invariant_search,
    superpose,
)

__version__ = "0.1.0"

__all__ = [
    "BlockHamiltonian", "BlockPartition", "ChartEscape", "ChartSingular", "ConfigError",
    "DegenerateConfiguration", "FlagCoordinates", "FlagRiccatiError", "HarmonicTerm",
    "IntegratorConfig", "SolutionEnsemble", "StepRejected", "Trajectory", "UnitaryFrame",
    "cross_ratio", "cross_ratio_drift", "extract", "extract_flag", "extract_grassmann",
    "extract_trajectory", "flag_frame", "frame", "grassmann_frame", "integrate_ensemble",
    "integrate_riccati", "integrate_schrodinger", "invariant_search", "polar_unitary",
    "projections", "random_hamiltonian", "recursive_frame", "riccati_rhs_flag",
    "riccati_rhs_grassmann", "superpose",
]
