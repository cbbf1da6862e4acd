"""Constraint-restricted parameterized quantum circuits for tours and covers.

A workbench that builds problem-shaped variational circuits, simulates
them exactly on a dense statevector, runs the variational loop against
penalty-encoded costs, and checks every construction against brute-force
oracles.
"""

from .ansatz import (
    AnsatzKind,
    GateCounts,
    build_mvc_ansatz,
    build_ry_baseline,
    build_tsp_proposed1,
    build_tsp_proposed4,
    build_w_chain,
    gate_counts,
    params_for_tour,
    w_chain_circuit,
)
from .oracle import (
    CountCheck,
    SupportReport,
    brute_force_min,
    enumerate_feasible,
    support,
    verify_counts,
)
from .problems import (
    CostFunction,
    Graph,
    SpanningTree,
    builtin6_graph,
    complete_graph,
    decode_tsp,
    encode_tsp,
    load_graph,
    mvc_cost,
    save_graph,
    spanning_tree,
    tour_length,
    tsp_cost,
)
from .sim import (
    MAX_QUBITS,
    Circuit,
    GateOp,
    ParamExpr,
    StateVector,
    apply_gate,
    main_register_probabilities,
    new_state,
    run,
    sample,
)
from .vqe import (
    EXACT,
    ConvergenceRecord,
    EvalPoint,
    ExpectationMode,
    OptimizerConfig,
    OptResult,
    expectation,
    nelder_mead,
    run_vqe,
    spsa,
)

__version__ = "0.1.0"
