"""tempora: extremal bounds and realizations for sequential quantum measurements."""

from .classical import algebraic_max, nchv_bound
from .exceptions import (
    CapExceededError,
    RealizationError,
    ScenarioError,
    SolverError,
)
from .moment import (
    MomentIndex,
    MomentProblem,
    ObjectiveTerm,
    Scenario,
    build_index,
    build_problem,
    class_residual,
    evaluate_objective,
    extract_probabilities,
)
from .realize import (
    GramVectors,
    QuantumRealization,
    clifford_generators,
    gns_from_moments,
    gram_vectors,
    load_realization,
    observables_from_vectors,
    realization_moment_matrix,
    save_realization,
    sequential_correlator,
    sequential_probability,
    simulate_objective,
    validate_realization,
)
from .regions import (
    LgPoint,
    classical_member,
    quantum_member,
    sample_surface,
    write_surface_csv,
)
from .scenarios import (
    NCycleSpec,
    RaySet,
    builtin_names,
    builtin_scenario,
    correlation_from_scenario,
    gyni,
    leggett_garg,
    load_scenario,
    ncycle,
    ncycle_bound,
    ncycle_scenario,
    save_scenario,
    yu_oh,
    yu_oh_rays,
)
from .sdp import (
    CertificateReport,
    CorrelationProblem,
    SdpSolution,
    solve_correlation,
    solve_moment_admm,
    solve_moment_ipm,
    verify_dual_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "RealizationError",
    "ScenarioError",
    "SolverError",
    "MomentIndex",
    "MomentProblem",
    "ObjectiveTerm",
    "Scenario",
    "build_index",
    "build_problem",
    "class_residual",
    "evaluate_objective",
    "extract_probabilities",
    "GramVectors",
    "QuantumRealization",
    "clifford_generators",
    "gns_from_moments",
    "gram_vectors",
    "load_realization",
    "observables_from_vectors",
    "realization_moment_matrix",
    "save_realization",
    "sequential_correlator",
    "sequential_probability",
    "simulate_objective",
    "validate_realization",
    "LgPoint",
    "classical_member",
    "quantum_member",
    "sample_surface",
    "write_surface_csv",
    "NCycleSpec",
    "RaySet",
    "builtin_names",
    "builtin_scenario",
    "correlation_from_scenario",
    "gyni",
    "leggett_garg",
    "load_scenario",
    "ncycle",
    "ncycle_bound",
    "ncycle_scenario",
    "save_scenario",
    "yu_oh",
    "yu_oh_rays",
    "CertificateReport",
    "CorrelationProblem",
    "SdpSolution",
    "solve_correlation",
    "solve_moment_admm",
    "solve_moment_ipm",
    "verify_dual_certificate",
    "nchv_bound",
    "algebraic_max",
    "__version__",
]
