"""Circuit builders whose output states live only on constraint-respecting bases.

Four families plus a generic baseline:

* W chain: one-hot superposition over m qubits driven by m-1 angles; the
  amplitude on the one-hot basis with the 1 in slot k (1-based) is
  (prod_{j<k} -sin theta_j) * cos theta_k, with cos theta_m read as 1.
* tour ansatz "rows" (proposed1): one independent W chain per tour
  position, so every output basis picks exactly one vertex per position.
* tour ansatz "swaps" (proposed4): identity assignment followed by
  ancilla-driven pairwise position swaps, so the main register only ever
  holds permutation matrices.
* cover ansatz: one conditional-selection block per spanning-tree edge,
  so every output basis is a vertex cover of the tree.
* ry baseline: depth-D layers of per-qubit rotations with CNOT chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .problems import Graph, SpanningTree
from .sim import Circuit, GateOp, ParamExpr


@dataclass(frozen=True)
class GateCounts:
    """Resource tally: parameters, X+Ry gates, CZ+CNOT gates, CSWAP gates."""

    params: int
    one_qubit: int
    two_qubit: int
    cswap: int


@dataclass(frozen=True)
class AnsatzKind:
    """Named ansatz selector; `depth` applies to the ry baseline only."""

    tag: str  # "proposed1" | "proposed4" | "mvc-tree" | "ry"
    depth: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tag not in ("proposed1", "proposed4", "mvc-tree", "ry"):
            raise ValueError(f"unknown ansatz tag {self.tag!r}")
        if (self.depth is not None) != (self.tag == "ry"):
            raise ValueError("depth is required for ry and forbidden otherwise")

    def build_tsp(self, n_cities: int) -> Circuit:
        if self.tag == "proposed1":
            return build_tsp_proposed1(n_cities)
        if self.tag == "proposed4":
            return build_tsp_proposed4(n_cities)
        if self.tag == "ry":
            return build_ry_baseline(n_cities * n_cities, self.depth)
        raise ValueError(f"{self.tag} is not a tour ansatz")

    def build_mvc(self, graph: Graph, tree: SpanningTree) -> Circuit:
        if self.tag == "mvc-tree":
            return build_mvc_ansatz(graph, tree)
        if self.tag == "ry":
            return build_ry_baseline(graph.n_vertices, self.depth)
        raise ValueError(f"{self.tag} is not a cover ansatz")


def build_w_chain(qubits: Sequence[int], param_offset: int = 0) -> list[GateOp]:
    """Gate fragment preparing a parameterized one-hot superposition.

    Emits X on qubits[0]; then for k = 1..m-1 the conjugated-rotation
    triple Ry(+theta_k), CZ(qubits[k-1], qubits[k]), Ry(-theta_k) on
    qubits[k]; then CNOT(qubits[k], qubits[k-1]) for k = 1..m-1. Uses the
    m-1 parameters param_offset .. param_offset+m-2. For m = 1 the
    fragment is the single X gate.
    """
    qubits = [int(q) for q in qubits]
    if not qubits:
        raise ValueError("need at least one qubit")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubits in {qubits}")
    ops = [GateOp("x", (qubits[0],))]
    for k in range(1, len(qubits)):
        p = param_offset + k - 1
        ops.append(GateOp("ry", (qubits[k],), ParamExpr(p)))
        ops.append(GateOp("cz", (qubits[k - 1], qubits[k])))
        ops.append(GateOp("ry", (qubits[k],), ParamExpr(p, sign=-1)))
    for k in range(1, len(qubits)):
        ops.append(GateOp("cnot", (qubits[k], qubits[k - 1])))
    return ops


def w_chain_circuit(m: int) -> Circuit:
    """Standalone m-qubit W-chain circuit with m-1 parameters."""
    return Circuit(m, 0, tuple(build_w_chain(range(m))), max(m - 1, 0))


def build_tsp_proposed1(n_cities: int) -> Circuit:
    """One independent W chain per tour position over N*N qubits.

    Row p (qubits p*N .. p*N+N-1) carries the one-hot choice of the
    vertex visited at position p; total parameters N*(N-1).
    """
    N = n_cities
    if N < 2:
        raise ValueError("need at least two cities")
    ops: list[GateOp] = []
    for p in range(N):
        row = range(p * N, (p + 1) * N)
        ops += build_w_chain(row, param_offset=p * (N - 1))
    return Circuit(N * N, 0, tuple(ops), N * (N - 1))


def build_tsp_proposed4(n_cities: int) -> Circuit:
    """Permutation-only tour ansatz: identity start plus controlled row swaps.

    N*N main qubits hold the assignment; one ancilla and one parameter
    per position pair (r, r'), r < r', in lexicographic order. Each block
    rotates its ancilla by Ry(theta) and then CSWAPs rows r and r'
    column by column, so permutation matrices map to permutation
    matrices and the main-register support never leaves them. All-zero
    parameters leave the identity assignment in place; theta = pi makes
    a swap certain, so any target permutation is reachable with
    probability 1 (see params_for_tour).
    """
    N = n_cities
    if N < 2:
        raise ValueError("need at least two cities")
    main = N * N
    ops: list[GateOp] = [GateOp("x", (r * N + r,)) for r in range(N)]
    k = 0
    for r in range(N):
        for rp in range(r + 1, N):
            anc = main + k
            ops.append(GateOp("ry", (anc,), ParamExpr(k)))
            for j in range(N):
                ops.append(GateOp("cswap", (anc, r * N + j, rp * N + j)))
            k += 1
    return Circuit(main, k, tuple(ops), k)


def params_for_tour(tour: Sequence[int]) -> np.ndarray:
    """Swap-ansatz angles that concentrate all probability on one tour.

    Selection-sort rule: walk positions r = 1..N; if the wanted vertex
    currently sits at position j > r, set the (r, j) swap angle to pi.
    The returned vector is 0/pi per pair in the builder's lexicographic
    order and drives build_tsp_proposed4 to the tour's basis exactly.
    """
    N = len(tour)
    if sorted(tour) != list(range(1, N + 1)):
        raise ValueError(f"{tour!r} is not a permutation of 1..{N}")
    order = list(range(1, N + 1))  # vertex currently at each position
    theta = np.zeros(N * (N - 1) // 2)
    for r in range(N):
        j = order.index(tour[r])
        if j != r:
            pair = r * (N - 1) - r * (r - 1) // 2 + (j - r - 1)
            theta[pair] = math.pi
            order[r], order[j] = order[j], order[r]
    return theta


def build_mvc_ansatz(graph: Graph, tree: SpanningTree) -> Circuit:
    """Cover ansatz over one qubit per vertex, shaped by a spanning tree.

    Starts with Ry(theta_0) on the root qubit, then one conditional
    block per tree edge (parent u -> child v) in the tree's discovery
    order: Ry(theta), CZ(q_u, q_v), Ry(-theta), X on q_v. The block
    forces the child on whenever the parent is off, so output bases are
    exactly the vertex covers of the tree (a superset of the covers of
    the full graph). N parameters, 3N-2 one-qubit and N-1 two-qubit
    gates.
    """
    N = graph.n_vertices
    weights = graph.weights()
    if len(tree.parent_edges) != N - 1:
        raise ValueError(
            f"tree has {len(tree.parent_edges)} edges, expected {N - 1}"
        )
    placed = {tree.root}
    if not 1 <= tree.root <= N:
        raise ValueError(f"root {tree.root} outside 1..{N}")
    for u, v, in tree.parent_edges:
        if (min(u, v), max(u, v)) not in weights:
            raise ValueError(f"tree edge ({u},{v}) is not a graph edge")
        if u not in placed:
            raise ValueError(f"tree edge ({u},{v}) precedes its parent")
        if v in placed:
            raise ValueError(f"vertex {v} appears twice in the tree")
        placed.add(v)
    if placed != set(range(1, N + 1)):
        raise ValueError("tree does not span the graph")

    ops: list[GateOp] = [GateOp("ry", (tree.root - 1,), ParamExpr(0))]
    for k, (u, v) in enumerate(tree.parent_edges, start=1):
        ctrl, tgt = u - 1, v - 1
        ops.append(GateOp("ry", (tgt,), ParamExpr(k)))
        ops.append(GateOp("cz", (ctrl, tgt)))
        ops.append(GateOp("ry", (tgt,), ParamExpr(k, sign=-1)))
        ops.append(GateOp("x", (tgt,)))
    return Circuit(N, 0, tuple(ops), N)


def build_ry_baseline(n_qubits: int, depth: int) -> Circuit:
    """Generic rotation ansatz: D+1 Ry layers interleaved with CNOT chains.

    Every qubit gets a fresh parameter per layer ((D+1)*n in total); each
    entangling layer is CNOT(q, q+1) for q = 0..n-2.
    """
    n = n_qubits
    if n < 1:
        raise ValueError("need at least one qubit")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    ops: list[GateOp] = [GateOp("ry", (q,), ParamExpr(q)) for q in range(n)]
    for d in range(1, depth + 1):
        ops += [GateOp("cnot", (q, q + 1)) for q in range(n - 1)]
        ops += [GateOp("ry", (q,), ParamExpr(d * n + q)) for q in range(n)]
    return Circuit(n, 0, tuple(ops), (depth + 1) * n)


def gate_counts(circuit: Circuit) -> GateCounts:
    """Tally parameters and gates by inspection of the op list."""
    params = {op.angle.param_index for op in circuit.ops if op.angle is not None}
    one = sum(1 for op in circuit.ops if op.kind in ("x", "ry"))
    two = sum(1 for op in circuit.ops if op.kind in ("cz", "cnot"))
    cswap = sum(1 for op in circuit.ops if op.kind == "cswap")
    return GateCounts(len(params), one, two, cswap)
