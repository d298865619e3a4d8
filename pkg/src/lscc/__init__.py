"""Locally stable measurement schemes for phase retrieval.

Builds measurement schemes whose local regions each allow stable phase
retrieval, induces the signal-dependent weighted connectivity graph, computes
Cheeger and spectral connectivity, and evaluates explicit stability bounds
with empirical verification harnesses.
"""

from .errors import (
    BudgetExceededError,
    ClassError,
    DegenerateFamilyError,
    DegenerateFrameError,
    DimensionError,
    EmptyGraphError,
    FieldError,
    InvalidWeightError,
    LsccError,
    SchemeError,
    TopologyError,
    UnsupportedPError,
)
from .graphs import (
    CheegerResult,
    SpectralResult,
    WeightedGraph,
    algebraic_connectivity,
    check_cheeger_inequality,
    cheeger,
    cheeger_exact,
    cheeger_interval,
    cheeger_sweep,
    graph_from_json,
    graph_to_json,
    is_connected,
    laplacian,
    normalized_degree,
    normalized_laplacian,
)
from .measurement import (
    COMPLEX,
    REAL,
    Frame,
    Signal,
    align_phase,
    check_phase_vs_linear_alignment,
    linear_align,
    measure,
    p_norm,
    phaseless_measure,
)
from .scheme import (
    INCONCLUSIVE,
    RETRIEVABLE,
    BaseGraph,
    LsccScheme,
    ValidationReport,
    check_edge_phase_consistency,
    induce_graph,
    is_phase_retrievable,
    scheme_from_json,
    scheme_to_json,
    validate_edge_domination,
    validate_exhaustion,
    validate_local_phase_retrieval,
    validate_scheme,
)
from .harness import (
    ExperimentSpec,
    derive_rng,
    fuzz_bounds,
    inequality_suite,
    noisy_recovery_gap,
)
from .shiftinv import (
    DecayProfile,
    GeneratorModel,
    build_shiftinv_scheme,
    sigma_based_constants,
    decay_cheeger_study,
    sigma_crosscheck,
)
from .stability import (
    StabilityReport,
    complex_bound,
    complex_constant,
    empirical_worst_ratio,
    real_bound,
    real_constant,
    stability_report,
)
from .toy import toy_scheme
from .windowed import (
    AdversarialPair,
    WindowedConfig,
    adversarial_pair,
    build_windowed_scheme,
    lower_bound_constants,
    sample_class_signal,
    scaling_sweep,
    window_membership,
)

__version__ = "0.1.0"
