"""Self-similar groupoid actions on finite graphs: closures, trace maps and KMS states."""

from ssact.action import (
    ActionError,
    ActionTable,
    ClosureBoundError,
    ClosureSet,
    Word,
    act,
    closure,
    invert,
    is_trivial,
    restrict,
    restriction_matrix,
    validate_action,
)
from ssact.diagnostics import alpha_bound, census_GF, convergence_report, k_witness, uniform_alpha
from ssact.graph import (
    DirectedMultigraph,
    GraphError,
    Path,
    adjacency_matrix,
    enumerate_paths,
    is_strongly_connected,
    validate_graph,
)
from ssact.instance import Instance, corpus_names, load_corpus, load_instance
from ssact.kernels import BACKEND
from ssact.kms import critical_psi_eval, psi_eval, spanning_element
from ssact.spectral import DiscountError, SpectralData, perron_frobenius, von_neumann_matrix
from ssact.trace import (
    TraceVector,
    apply_chi,
    compute_cg,
    compute_N,
    compute_Z,
    fixed_point_eigen,
    iterate_chi,
    trace_from_mapping,
    verify_recursive,
    vertex_trajectory,
)

__version__ = "0.1.0"
