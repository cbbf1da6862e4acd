"""Brute-force ground truth: exhaustive minima, feasible sets, ansatz support.

Everything here is independent of the variational machinery: minima come
from exhaustive scans, feasible objectives are recomputed directly from
the graph, and support sets are measured by running circuits at batches
of random parameter vectors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ansatz
from .problems import CostFunction, Graph, encode_tsp, spanning_tree, tour_length
from .sim import Circuit, _marginal_into, _run_in_place, new_state

BRUTE_FORCE_MAX_BITS = 24
TOUR_ENUM_MAX = 6
COVER_ENUM_MAX = 16

# Probability above this counts as support membership; structural zeros
# stay many orders of magnitude below it (they are exact zeros here).
SUPPORT_EPSILON = 1e-9


@dataclass(frozen=True)
class SupportReport:
    """Observed support of an ansatz over a batch of parameter draws."""

    n_main: int
    basis_set: frozenset[int]
    draws: int
    epsilon: float
    max_excluded_prob: float

    @property
    def always_zero(self) -> frozenset[int]:
        return frozenset(range(1 << self.n_main)) - self.basis_set

    @property
    def n_all(self) -> int:
        return 1 << self.n_main


@dataclass(frozen=True)
class CountCheck:
    """One builder-vs-closed-form resource comparison."""

    builder: str
    n_qubits: int
    field: str
    built: int
    expected: int
    asserted: bool

    @property
    def ok(self) -> bool:
        return self.built == self.expected


def brute_force_min(cost: CostFunction) -> tuple[float, frozenset[int]]:
    """Exhaustive minimum of a diagonal cost and the set of argmin indices.

    Ties are collected with a 1e-9 slack so that equal-by-construction
    costs that differ only in floating summation order stay together.
    """
    if cost.n_bits > BRUTE_FORCE_MAX_BITS:
        raise ValueError(
            f"{cost.n_bits} bits exceeds the {BRUTE_FORCE_MAX_BITS}-bit scan ceiling"
        )
    table = cost.table
    best = float(table.min())
    argmins = np.flatnonzero(table <= best + 1e-9)
    return best, frozenset(int(z) for z in argmins)


def enumerate_feasible(kind: str, graph: Graph) -> dict[int, float]:
    """All feasible basis indices with their bare objectives.

    kind "tsp": every permutation of 1..N encoded as a permutation
    matrix, with the cycle length summed directly from the graph weights
    (missing edges are an error). kind "mvc": every bitstring covering
    all edges, with popcount as the objective.
    """
    N = graph.n_vertices
    if kind == "tsp":
        if N > TOUR_ENUM_MAX:
            raise ValueError(f"{N} cities exceeds the {TOUR_ENUM_MAX}-city ceiling")
        return {
            encode_tsp(perm): tour_length(graph, perm)
            for perm in itertools.permutations(range(1, N + 1))
        }
    if kind == "mvc":
        if N > COVER_ENUM_MAX:
            raise ValueError(f"{N} vertices exceeds the {COVER_ENUM_MAX}-vertex ceiling")
        masks = [(1 << (N - u), 1 << (N - v)) for u, v, _ in graph.edges]
        return {
            z: float(z.bit_count())
            for z in range(1 << N)
            if all((z & mu) or (z & mv) for mu, mv in masks)
        }
    raise ValueError(f"unknown problem kind {kind!r}")


def support(
    circuit: Circuit,
    n_main: Optional[int] = None,
    draws: int = 200,
    seed: int = 0,
    epsilon: float = SUPPORT_EPSILON,
) -> SupportReport:
    """Classify every main-register basis as reachable or always zero.

    Runs the circuit at `draws` uniform parameter vectors in [0, 2*pi)
    plus the all-zero and all-pi/2 probes, and keeps the maximum
    marginal probability seen per basis. This is a sampling procedure:
    a basis reachable only on a measure-zero parameter set can be
    missed, but bases reported always-zero never carried more than
    `epsilon` probability in any draw.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    n_main = circuit.n_qubits if n_main is None else int(n_main)
    rng = np.random.default_rng(seed)
    probes = [
        np.zeros(circuit.n_params),
        np.full(circuit.n_params, math.pi / 2),
    ]
    for _ in range(draws):
        probes.append(rng.uniform(0.0, 2.0 * math.pi, circuit.n_params))
    max_prob = np.zeros(1 << n_main)
    state = new_state(circuit.n_total)
    probs = np.zeros(1 << n_main)
    for theta in probes:
        _run_in_place(circuit, theta, state)
        _marginal_into(state, n_main, probs)
        np.maximum(max_prob, probs, out=max_prob)
    hits = np.flatnonzero(max_prob > epsilon)
    basis_set = frozenset(int(z) for z in hits)
    excluded = np.delete(max_prob, hits)
    max_excluded = float(excluded.max()) if excluded.size else 0.0
    return SupportReport(n_main, basis_set, draws, float(epsilon), max_excluded)


def _tour_expected(N: int) -> dict[str, int]:
    n = N * N
    return {"params": n - N, "one_qubit": 2 * n - N, "two_qubit": 2 * n - 2 * N, "cswap": 0}


def _swap_expected(N: int) -> dict[str, int]:
    n = N * N
    return {
        "params": (n - N) // 2,
        "one_qubit": n - 1,
        "two_qubit": n - N + 2,
        # n*sqrt(n)/3 - n/2 + sqrt(n)/6 - 1 = N(N-1)(2N-1)/6 - 1, always integral
        "cswap": N * (N - 1) * (2 * N - 1) // 6 - 1,
    }


def _ry_expected(n: int, depth: int) -> dict[str, int]:
    return {
        "params": (depth + 1) * n,
        "one_qubit": (depth + 1) * n,
        "two_qubit": depth * (n - 1),
        "cswap": 0,
    }


def _cover_expected(n: int) -> dict[str, int]:
    return {"params": n, "one_qubit": 3 * n - 2, "two_qubit": n - 1, "cswap": 0}


def verify_counts(
    cities: range = range(2, 9),
    depths: range = range(0, 4),
    cover_sizes: range = range(2, 9),
) -> list[CountCheck]:
    """Compare builder gate counts against their closed forms.

    The one-chain-per-position and cover builders plus the ry baseline
    are asserted; the swap-based tour ansatz matches the closed form for
    its parameter count only, so its gate rows are informational.
    """
    checks: list[CountCheck] = []

    def add(builder: str, n: int, got: ansatz.GateCounts, expected: dict[str, int], asserted_fields: set[str]):
        for field in ("params", "one_qubit", "two_qubit", "cswap"):
            checks.append(
                CountCheck(
                    builder,
                    n,
                    field,
                    getattr(got, field),
                    expected[field],
                    field in asserted_fields,
                )
            )

    all_fields = {"params", "one_qubit", "two_qubit", "cswap"}
    for N in cities:
        n = N * N
        add("proposed1", n, ansatz.gate_counts(ansatz.build_tsp_proposed1(N)), _tour_expected(N), all_fields)
        add("proposed4", n, ansatz.gate_counts(ansatz.build_tsp_proposed4(N)), _swap_expected(N), {"params"})
        for depth in depths:
            add(f"ry-d{depth}", n, ansatz.gate_counts(ansatz.build_ry_baseline(n, depth)), _ry_expected(n, depth), all_fields)
    for n in cover_sizes:
        graph = Graph(n, tuple((v, v + 1, 1.0) for v in range(1, n)))
        circ = ansatz.build_mvc_ansatz(graph, spanning_tree(graph))
        add("mvc-tree", n, ansatz.gate_counts(circ), _cover_expected(n), all_fields)
    return checks
