"""Power-flow-equivalent reduction of multiscale grid graphs.

Kron reduction on the loopy Laplacian plus topological collapse stages
(degree-one trees, degree-two strings, greedy triangles), recorded step by
step in an invertible ledger so any intermediate resolution can be
restored.
"""

from .errors import (
    DegenerateNetworkError,
    DependencyError,
    GridReduceError,
    LedgerIntegrityError,
    NumericalError,
    ParseError,
    SpecError,
    TargetNotFoundError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .laplacian import (
    KronResult,
    LoopyLaplacian,
    adjacency_from_laplacian,
    build_loopy_laplacian,
    closed_form_eliminate,
    current_vector,
    kron_reduce,
    power_injections,
    reduced_currents,
    solve_voltages,
)
from .ledger import (
    ExpansionTarget,
    ReductionLedger,
    deserialize,
    parse_target,
    serialize,
)
from .metrics import (
    ReductionReport,
    StageRecord,
    degree_distribution,
    format_summary_table,
    reduction_report,
    wasserstein1,
)
from .network import (
    Bus,
    BusId,
    Line,
    Network,
    RawLine,
    RawNetwork,
    ValidationReport,
    degree_map,
    graph_density,
    preprocess_degree_zero,
    topological_connectivity,
    validate,
)
from .reduction import (
    Thresholds,
    aggregate_triangle_laplacian,
    eligible_nodes,
    greedy_triangle_reduce,
    numeric_reduction_pipeline,
    reduce_degree_one,
    reduce_degree_two,
    reduce_pipeline,
)
from .synth import SyntheticSpec, TreeSpec, generate_synthetic, predict

__version__ = "0.1.0"
