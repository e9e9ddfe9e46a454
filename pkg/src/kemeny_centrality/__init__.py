"""Kemeny constant and Kemeny-based edge centrality of weighted graphs."""

from ._backend import BACKEND
from .centrality import (
    CutEdgePolicy,
    EdgeScore,
    EdgeScorer,
    EdgeUpdate,
    Measure,
    RegularizationConfig,
    ScoreTable,
    all_scores_cholesky,
    all_scores_dense,
    deletion_score,
    edge_scores,
    filtered_score,
    loop_score,
    regularized_score,
    score_curve,
)
from .errors import (
    CutEdgeError,
    DisconnectedGraphError,
    FactorizationError,
    InputOutputError,
    KemenyError,
    NumericalError,
    ParameterError,
    ParseError,
    ValidationError,
)
from .graph import (
    EdgeRef,
    Graph,
    assign_length_weights,
    bridge_structure,
    connected_components,
    disjoint_union,
    find_bridges,
    load_coordinates,
    load_edge_list,
    load_matrix_market,
)
from .kemeny import (
    KemenyResult,
    TransitionSpectrum,
    kemeny_eig,
    kemeny_per_component,
    kemeny_regularized,
    kemeny_trace,
    transition_spectrum,
)
from .markers import INFINITY, is_unbounded

__version__ = "0.1.0"
