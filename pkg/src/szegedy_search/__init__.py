"""Szegedy quantum walk search, exceptional configurations and classical hitting times."""

from .classical_walk import (
    HittingReport,
    MixingReport,
    cesaro_mixing_time,
    clustered_hitting_time_exact,
    h_step_expectation,
    hitting_from_distance,
    hitting_time_exact_cycle,
    hitting_time_linear_solve,
    oresme_partial_sum,
    simulate_hitting_time,
)
from .exceptional_search import (
    ExceptionalReport,
    GridReductionReport,
    SamplingReport,
    SeparationReport,
    sampling_search_cost,
    separation_report,
    verify_exceptional,
    verify_grid_reduction,
)
from .graph_core import (
    EdgeBasis,
    Graph,
    MarkedSet,
    ReductionMap,
    StochasticMatrix,
    absorbing_matrix,
    cycle_graph,
    diagonal_marked_set,
    edge_basis,
    grid_to_cycle_reduction,
    torus_grid_graph,
    transition_matrix,
)
from .szegedy_engine import (
    Distribution,
    EdgeState,
    SignState,
    detect_period,
    evolve,
    measure_x,
    reflect_a,
    reflect_b,
    sign_step,
    sign_table,
    uniform_initial_state,
    walk_step,
)

__version__ = "0.1.0"
