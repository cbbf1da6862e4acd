"""Graphs, spanning trees, and penalty-encoded diagonal cost functions.

Vertices are labeled 1..N externally. Tour assignments use N*N bits in
row-major order: bit (p, v) is 1 when vertex v+1 (0-based v) is visited
at tour position p+1, and row p occupies qubits p*N .. p*N+N-1. Cover
assignments use one bit per vertex, qubit v-1 for vertex v.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

# Dense cost tables above this bit count are refused (2**24 doubles = 128 MiB).
TABLE_MAX_BITS = 24

_CHUNK = 1 << 16


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertices 1..n_vertices.

    Edges are stored canonically as (u, v, weight) with u < v, sorted,
    without self-loops or duplicates; weights are finite and >= 0.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        canon = []
        seen = set()
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if u > v:
                u, v = v, u
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u and v <= self.n_vertices):
                raise ValueError(f"edge ({u},{v}) outside 1..{self.n_vertices}")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            if not (math.isfinite(w) and w >= 0.0):
                raise ValueError(f"weight {w!r} on edge ({u},{v}) must be finite >= 0")
            seen.add((u, v))
            canon.append((u, v, w))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    def weights(self) -> dict[tuple[int, int], float]:
        return {(u, v): w for u, v, w in self.edges}

    def weight(self, u: int, v: int) -> Optional[float]:
        """Weight of edge (u, v) in either orientation, or None if absent."""
        if u > v:
            u, v = v, u
        return self.weights().get((u, v))

    def neighbors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.n_vertices + 1)}
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: sorted(ns) for v, ns in adj.items()}

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))


@dataclass(frozen=True)
class SpanningTree:
    """Rooted spanning tree given as (parent, child) edges in discovery order."""

    root: int
    parent_edges: tuple[tuple[int, int], ...]

    def vertices(self) -> set[int]:
        out = {self.root}
        for u, v in self.parent_edges:
            out.add(u)
            out.add(v)
        return out


def spanning_tree(graph: Graph) -> SpanningTree:
    """BFS spanning tree rooted at vertex 1, neighbors taken in ascending order.

    Deterministic for a given graph; raises on disconnected input.
    """
    adj = graph.neighbors()
    seen = {1}
    edges: list[tuple[int, int]] = []
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                edges.append((u, v))
                queue.append(v)
    if len(seen) != graph.n_vertices:
        missing = sorted(set(range(1, graph.n_vertices + 1)) - seen)
        raise ValueError(f"graph is not connected; unreachable vertices {missing}")
    return SpanningTree(1, tuple(edges))


class CostFunction:
    """Diagonal Hamiltonian as a deterministic map basis index -> real cost.

    evaluate(z) is the bare objective plus penalty terms; feasible(z)
    says whether all constraints hold exactly (then the penalty part is
    zero); decode(z) turns a basis index into the problem answer, or
    None when infeasible. `table` is the dense vector of evaluate over
    all 2**n_bits indices, built lazily and cached.
    """

    def __init__(
        self,
        n_bits: int,
        penalty_weight: float,
        evaluate: Callable[[int], float],
        feasible: Callable[[int], bool],
        decode: Callable[[int], Optional[tuple]],
        dense: Callable[[], np.ndarray],
    ):
        self.n_bits = int(n_bits)
        self.penalty_weight = float(penalty_weight)
        self.evaluate = evaluate
        self.feasible = feasible
        self.decode = decode
        self._dense = dense
        self._table: Optional[np.ndarray] = None

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            if self.n_bits > TABLE_MAX_BITS:
                raise ValueError(
                    f"dense table over {self.n_bits} bits exceeds the "
                    f"{TABLE_MAX_BITS}-bit ceiling"
                )
            self._table = self._dense()
        return self._table


def tsp_cost(graph: Graph, penalty: Optional[float] = None) -> CostFunction:
    """Tour length plus quadratic one-hot penalties over N*N assignment bits.

    evaluate(z) = sum over ordered vertex pairs u != v of
    W[u,v] * sum_p x[u,p] x[v,p+1 (wrapping)] plus penalty * sum of
    squared residuals of the position and vertex one-hot constraints.
    Vertex pairs without an edge get weight `penalty`, which makes tours
    through them strictly unattractive. The default penalty is
    1 + total edge weight; any explicit value must exceed the total edge
    weight so that one constraint violation outweighs any tour.
    """
    N = graph.n_vertices
    if N < 2:
        raise ValueError("tours need at least two vertices")
    total_w = graph.total_weight()
    A = 1.0 + total_w if penalty is None else float(penalty)
    if A <= total_w:
        raise ValueError(f"penalty {A} must exceed the total edge weight {total_w}")
    n_bits = N * N
    W = np.full((N, N), A, dtype=float)
    np.fill_diagonal(W, 0.0)
    for u, v, w in graph.edges:
        W[u - 1, v - 1] = W[v - 1, u - 1] = w

    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)

    def bits_of(z: int) -> np.ndarray:
        return ((int(z) >> shifts) & 1).astype(float).reshape(N, N)

    def evaluate(z: int) -> float:
        X = bits_of(z)
        tour = 0.0
        for p in range(N):
            tour += float(X[p] @ W @ X[(p + 1) % N])
        rows = X.sum(axis=1)
        cols = X.sum(axis=0)
        return tour + A * float(((rows - 1) ** 2).sum() + ((cols - 1) ** 2).sum())

    def feasible(z: int) -> bool:
        X = bits_of(z)
        return bool((X.sum(axis=1) == 1).all() and (X.sum(axis=0) == 1).all())

    def decode(z: int) -> Optional[tuple]:
        return decode_tsp(z, N)

    def dense() -> np.ndarray:
        size = 1 << n_bits
        out = np.empty(size)
        for start in range(0, size, _CHUNK):
            zs = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
            X = ((zs[:, None] >> shifts[None, :]) & 1).astype(float)
            X = X.reshape(-1, N, N)
            tour = np.zeros(len(zs))
            for p in range(N):
                tour += np.einsum("mu,uv,mv->m", X[:, p], W, X[:, (p + 1) % N])
            rows = X.sum(axis=2)
            cols = X.sum(axis=1)
            pen = ((rows - 1) ** 2).sum(axis=1) + ((cols - 1) ** 2).sum(axis=1)
            out[start : start + len(zs)] = tour + A * pen
        return out

    return CostFunction(n_bits, A, evaluate, feasible, decode, dense)


def decode_tsp(z: int, n_cities: int) -> Optional[tuple[int, ...]]:
    """Vertex visited at each tour position, or None if z is not a permutation matrix."""
    N = n_cities
    n_bits = N * N
    mask = (1 << N) - 1
    tour = []
    for p in range(N):
        row = (int(z) >> (n_bits - (p + 1) * N)) & mask
        if row.bit_count() != 1:
            return None
        tour.append(N - row.bit_length() + 1)
    if len(set(tour)) != N:
        return None
    return tuple(tour)


def encode_tsp(tour: Sequence[int]) -> int:
    """Basis index of the permutation-matrix encoding of a tour."""
    N = len(tour)
    if sorted(tour) != list(range(1, N + 1)):
        raise ValueError(f"{tour!r} is not a permutation of 1..{N}")
    n_bits = N * N
    z = 0
    for p, vertex in enumerate(tour):
        k = p * N + (vertex - 1)
        z |= 1 << (n_bits - 1 - k)
    return z


def tour_length(graph: Graph, tour: Sequence[int]) -> float:
    """Cycle length of a tour visiting every vertex once, from the raw weights.

    Computed straight off the edge list (no cost encoding involved);
    a tour through a missing edge is an error.
    """
    if sorted(tour) != list(range(1, graph.n_vertices + 1)):
        raise ValueError(f"{tour!r} is not a tour over 1..{graph.n_vertices}")
    weights = graph.weights()
    total = 0.0
    N = len(tour)
    for p in range(N):
        u, v = tour[p], tour[(p + 1) % N]
        key = (min(u, v), max(u, v))
        if key not in weights:
            raise ValueError(f"tour {tuple(tour)} uses missing edge {key}")
        total += weights[key]
    return total


def mvc_cost(graph: Graph, penalty: float = 2.0) -> CostFunction:
    """Cover size plus `penalty` per uncovered edge, one bit per vertex.

    evaluate(z) = popcount(z) + penalty * #{edges with both endpoints
    unselected}. Any penalty > 1 makes every global minimum a feasible
    cover: turning on an endpoint of an uncovered edge costs 1 and saves
    at least `penalty`.
    """
    N = graph.n_vertices
    A = float(penalty)
    if A <= 1.0:
        raise ValueError("penalty must exceed 1")
    masks = [(1 << (N - u), 1 << (N - v)) for u, v, _ in graph.edges]

    def evaluate(z: int) -> float:
        z = int(z)
        uncovered = sum(1 for mu, mv in masks if not (z & mu) and not (z & mv))
        return z.bit_count() + A * uncovered

    def feasible(z: int) -> bool:
        z = int(z)
        return all((z & mu) or (z & mv) for mu, mv in masks)

    def decode(z: int) -> Optional[tuple[int, ...]]:
        if not feasible(z):
            return None
        z = int(z)
        return tuple(v for v in range(1, N + 1) if z & (1 << (N - v)))

    def dense() -> np.ndarray:
        zs = np.arange(1 << N, dtype=np.int64)
        bits = (zs[:, None] >> np.arange(N - 1, -1, -1)) & 1
        out = bits.sum(axis=1).astype(float)
        for u, v, _ in graph.edges:
            out += A * (1 - bits[:, u - 1]) * (1 - bits[:, v - 1])
        return out

    return CostFunction(N, A, evaluate, feasible, decode, dense)


def complete_graph(
    n_vertices: int,
    weights: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
) -> Graph:
    """K_n with explicit weights (lexicographic pair order) or seeded draws.

    Exactly one of `weights` and `seed` must be given; seeded weights are
    drawn uniformly from [1, 10) and are identical for identical seeds.
    """
    if n_vertices < 2:
        raise ValueError("complete graph needs at least two vertices")
    pairs = list(itertools.combinations(range(1, n_vertices + 1), 2))
    if (weights is None) == (seed is None):
        raise ValueError("give exactly one of weights, seed")
    if weights is None:
        weights = np.random.default_rng(seed).uniform(1.0, 10.0, len(pairs))
    if len(weights) != len(pairs):
        raise ValueError(f"expected {len(pairs)} weights, got {len(weights)}")
    return Graph(
        n_vertices, tuple((u, v, float(w)) for (u, v), w in zip(pairs, weights))
    )


def builtin6_graph() -> Graph:
    """Built-in 6-vertex cover instance: the 4-cycle 1-2-3-4 with tail 4-5-6."""
    edges = ((1, 2), (2, 3), (3, 4), (1, 4), (4, 5), (5, 6))
    return Graph(6, tuple((u, v, 1.0) for u, v in edges))


def load_graph(path: Union[str, Path]) -> Graph:
    """Read the text format: '#' comments, a 'vertices N' header, 'u v weight' lines."""
    n: Optional[int] = None
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0].lower() == "vertices":
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: malformed header {line!r}")
            n = int(fields[1])
            continue
        if len(fields) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'u v weight', got {line!r}")
        if n is None:
            raise ValueError(f"{path}:{lineno}: edge before 'vertices N' header")
        edges.append((int(fields[0]), int(fields[1]), float(fields[2])))
    if n is None:
        raise ValueError(f"{path}: missing 'vertices N' header")
    return Graph(n, tuple(edges))


def save_graph(graph: Graph, path: Union[str, Path]) -> None:
    """Write a graph in the format read by load_graph (weights round-trip exactly)."""
    lines = [f"vertices {graph.n_vertices}"]
    lines += [f"{u} {v} {w!r}" for u, v, w in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n")
