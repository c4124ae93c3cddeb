"""Phase-diagram diagnostics for the extended Harper chain.

Builds the quasiperiodic chain at Fibonacci flux approximants, diagonalizes
it, and characterizes the (lam, mu) plane through ground-state fidelity,
fidelity susceptibility, and von Neumann entropies, including the
finite-size scaling of the susceptibility peak at the metal-metal and
metal-insulator transitions.
"""

from .entropy import (
    EntropyProfile,
    SpectrumEntropy,
    binary_entropy,
    entropy_profile,
    entropy_vs_energy,
    spectrum_entropy,
    state_entropies,
)
from .fidelity import (
    Direction,
    MetricTensor,
    fidelity,
    fidelity_susceptibility,
    fs_finite_difference,
    metric_from_drivings,
    metric_tensor,
    susceptibility_at,
)
from .model import (
    Driving,
    FibonacciApproximant,
    ModelPoint,
    bond_coefficients,
    build_driving,
    build_hamiltonian,
    fibonacci_approximant,
    model_point,
    zero_bond_site,
)
from .scaling import (
    TRANSITIONS,
    BracketError,
    CollapseResult,
    PeakResult,
    ScalingResult,
    SusceptibilityPath,
    collapse_fit,
    estimate_half_width,
    find_peak,
    fit_power_law,
    partition_by_residue,
    scaling_report,
    write_scaling_csv,
)
from .scan import (
    BoundaryNotFound,
    DiagnosticsRecord,
    GridSpec,
    PhaseThresholds,
    boundary_locate,
    boundary_sweep,
    locate_from_sweep,
    classify_phase,
    distance_to_critical_lines,
    records_to_csv,
    run_scan,
    write_records_csv,
)
from .spectrum import (
    DEGENERACY_TOL,
    ComputationError,
    EigenSystem,
    GroundState,
    diagonalize,
    ground_state,
)
from .verify import CheckReport, run_all_checks

__version__ = "0.1.0"
