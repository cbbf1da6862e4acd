"""Expectation evaluation and the derivative-free variational loop.

The Hamiltonian is diagonal, so an exact expectation is the dot product
of the ancilla-marginalized probability vector with the dense cost
table; a sampled expectation is the mean cost over a finite number of
measurement draws. Either way the value is a convex combination of cost
entries and can never drop below the true minimum.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .problems import CostFunction
from .sim import (
    Circuit,
    _marginal_into,
    _run_in_place,
    main_register_probabilities,
    new_state,
    run,
    sample,
)


@dataclass(frozen=True)
class ExpectationMode:
    """Exact (shots=None) or shot-sampled expectation evaluation."""

    shots: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")

    @classmethod
    def exact(cls) -> "ExpectationMode":
        return cls()

    @classmethod
    def sampled(cls, shots: int, seed: Optional[int] = None) -> "ExpectationMode":
        return cls(shots=shots, seed=seed)

    @property
    def is_exact(self) -> bool:
        return self.shots is None


EXACT = ExpectationMode.exact()


@dataclass(frozen=True)
class OptimizerConfig:
    """Derivative-free optimizer selection and coefficients.

    kind "nelder-mead" uses the classic simplex moves with coefficients
    (reflection, expansion, contraction, shrink); termination happens at
    max_evals objective calls or when the simplex value spread falls
    below `tolerance` while its diameter is below `x_tolerance` (the
    diameter condition guards against symmetric straddles where opposite
    vertices share one value away from the optimum). kind "spsa" uses
    gain sequences a_k = a/(k+1+stability)^0.602 and
    c_k = c/(k+1)^0.101 with Rademacher perturbations from `seed`;
    stability defaults to 10% of the iteration budget.
    """

    kind: str = "nelder-mead"
    max_evals: int = 500
    tolerance: float = 1e-6
    x_tolerance: float = 1e-6
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.1
    spsa_a: float = 1.0
    spsa_c: float = 0.1
    spsa_stability: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in ("nelder-mead", "spsa"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.tolerance < 0 or self.x_tolerance < 0:
            raise ValueError("tolerances must be >= 0")
        if self.reflection <= 0 or self.expansion <= 1:
            raise ValueError("need reflection > 0 and expansion > 1")
        if not (0 < self.contraction < 1 and 0 < self.shrink < 1):
            raise ValueError("contraction and shrink must lie in (0, 1)")
        if self.initial_step <= 0 or self.spsa_a <= 0 or self.spsa_c <= 0:
            raise ValueError("step sizes must be positive")


class OptResult(NamedTuple):
    x: np.ndarray
    fun: float
    history: list[tuple[int, np.ndarray, float]]


class _BudgetExhausted(Exception):
    pass


def _tracked(objective: Callable, max_evals: int):
    """Wrap an objective with budget enforcement, history, and finiteness checks."""
    history: list[tuple[int, np.ndarray, float]] = []

    def f(x: np.ndarray) -> float:
        if len(history) >= max_evals:
            raise _BudgetExhausted
        value = float(objective(x))
        if not math.isfinite(value):
            raise ValueError(f"objective returned non-finite value {value!r} at {x!r}")
        history.append((len(history), x.copy(), value))
        return value

    return f, history


def _best(history) -> tuple[np.ndarray, float]:
    idx = min(range(len(history)), key=lambda i: history[i][2])
    return history[idx][1], history[idx][2]


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    config: Optional[OptimizerConfig] = None,
) -> OptResult:
    """Minimize with the Nelder-Mead simplex; every evaluation is recorded.

    The initial simplex is x0 plus one `initial_step` unit step per
    coordinate. Returns the best point ever evaluated, not merely the
    final simplex vertex.
    """
    config = config or OptimizerConfig()
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a non-empty vector")
    dim = x0.size
    alpha, gamma = config.reflection, config.expansion
    beta, delta = config.contraction, config.shrink

    f, history = _tracked(objective, config.max_evals)
    try:
        simplex = [x0.copy()]
        fvals = [f(x0)]
        for i in range(dim):
            xi = x0.copy()
            xi[i] += config.initial_step
            simplex.append(xi)
            fvals.append(f(xi))

        while True:
            order = np.argsort(fvals, kind="stable")
            simplex = [simplex[i] for i in order]
            fvals = [fvals[i] for i in order]
            diameter = max(
                float(np.max(np.abs(v - simplex[0]))) for v in simplex[1:]
            )
            if fvals[-1] - fvals[0] < config.tolerance and diameter < config.x_tolerance:
                break
            centroid = np.mean(simplex[:-1], axis=0)

            xr = centroid + alpha * (centroid - simplex[-1])
            fr = f(xr)
            if fr < fvals[0]:
                xe = centroid + gamma * (centroid - simplex[-1])
                fe = f(xe)
                if fe < fr:
                    simplex[-1], fvals[-1] = xe, fe
                else:
                    simplex[-1], fvals[-1] = xr, fr
            elif fr < fvals[-2]:
                simplex[-1], fvals[-1] = xr, fr
            else:
                if fr < fvals[-1]:  # outside contraction
                    xc = centroid + beta * (xr - centroid)
                else:  # inside contraction
                    xc = centroid + beta * (simplex[-1] - centroid)
                fc = f(xc)
                if fc < min(fr, fvals[-1]):
                    simplex[-1], fvals[-1] = xc, fc
                else:  # shrink toward the best vertex
                    for i in range(1, dim + 1):
                        simplex[i] = simplex[0] + delta * (simplex[i] - simplex[0])
                        fvals[i] = f(simplex[i])
    except _BudgetExhausted:
        pass

    x_best, f_best = _best(history)
    return OptResult(x_best, f_best, history)


def spsa(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    config: Optional[OptimizerConfig] = None,
) -> OptResult:
    """Simultaneous-perturbation stochastic approximation.

    Each iteration spends two evaluations at x +/- c_k * delta with a
    Rademacher delta and steps along the resulting gradient estimate.
    Fully deterministic for a fixed config.seed.
    """
    config = config or OptimizerConfig(kind="spsa")
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a non-empty vector")
    rng = np.random.default_rng(config.seed)
    iterations = max(1, config.max_evals // 2)
    stability = (
        0.1 * iterations if config.spsa_stability is None else config.spsa_stability
    )

    f, history = _tracked(objective, config.max_evals)
    x = x0.copy()
    try:
        for k in range(iterations):
            a_k = config.spsa_a / (k + 1 + stability) ** 0.602
            c_k = config.spsa_c / (k + 1) ** 0.101
            delta = rng.integers(0, 2, x.size) * 2.0 - 1.0
            f_plus = f(x + c_k * delta)
            f_minus = f(x - c_k * delta)
            grad = (f_plus - f_minus) / (2.0 * c_k) * delta
            x = x - a_k * grad
        f(x)  # score the final iterate if budget remains
    except _BudgetExhausted:
        pass

    x_best, f_best = _best(history)
    return OptResult(x_best, f_best, history)


@dataclass(frozen=True)
class EvalPoint:
    """One objective evaluation inside a trial."""

    index: int
    params: np.ndarray
    value: float
    argmax_feasible: bool


@dataclass
class ConvergenceRecord:
    """Full history of one variational trial plus its decoded answer."""

    trial_id: int
    evaluations: list[EvalPoint]
    best_expectation: float
    best_params: np.ndarray
    best_basis: int
    answer: Optional[tuple]
    elapsed_seconds: float

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate([e.value for e in self.evaluations])


def _expectation_of_probs(
    probs: np.ndarray, cost: CostFunction, mode: ExpectationMode
) -> float:
    if mode.is_exact:
        return float(probs @ cost.table)
    draws = sample(probs, mode.shots, mode.seed)
    return float(cost.table[draws].mean())


def expectation(
    circuit: Circuit,
    params: Sequence[float],
    cost: CostFunction,
    mode: ExpectationMode = EXACT,
) -> float:
    """Expectation of the diagonal cost over the circuit's main register."""
    if cost.n_bits != circuit.n_qubits:
        raise ValueError(
            f"cost covers {cost.n_bits} bits but the main register has "
            f"{circuit.n_qubits} qubits"
        )
    probs = main_register_probabilities(run(circuit, params), circuit.n_qubits)
    return _expectation_of_probs(probs, cost, mode)


def _run_trial(
    trial: int,
    circuit: Circuit,
    cost: CostFunction,
    optimizer: OptimizerConfig,
    mode: ExpectationMode,
    init_seed: Optional[int],
) -> ConvergenceRecord:
    t0 = time.perf_counter()
    root = np.random.SeedSequence(entropy=init_seed, spawn_key=(trial,))
    init_ss, sample_ss, opt_ss = root.spawn(3)
    x0 = np.random.default_rng(init_ss).uniform(0.0, 2.0 * math.pi, circuit.n_params)
    sample_rng = np.random.default_rng(sample_ss)

    evaluations: list[EvalPoint] = []
    state = new_state(circuit.n_total)  # reused across evaluations
    probs = np.zeros(1 << circuit.n_qubits)

    def objective(theta: np.ndarray) -> float:
        _run_in_place(circuit, theta, state)
        _marginal_into(state, circuit.n_qubits, probs)
        if mode.is_exact:
            value = _expectation_of_probs(probs, cost, mode)
        else:
            per_eval = ExpectationMode.sampled(
                mode.shots, int(sample_rng.integers(1 << 63))
            )
            value = _expectation_of_probs(probs, cost, per_eval)
        top = int(np.argmax(probs))  # ties resolve to the lowest index
        evaluations.append(
            EvalPoint(len(evaluations), theta.copy(), value, bool(cost.feasible(top)))
        )
        return value

    if optimizer.kind == "spsa" and optimizer.seed is None:
        optimizer = replace(
            optimizer, seed=int(np.random.default_rng(opt_ss).integers(1 << 63))
        )
    minimize = nelder_mead if optimizer.kind == "nelder-mead" else spsa
    result = minimize(objective, x0, optimizer)

    _run_in_place(circuit, result.x, state)
    _marginal_into(state, circuit.n_qubits, probs)
    best_basis = int(np.argmax(probs))
    return ConvergenceRecord(
        trial_id=trial,
        evaluations=evaluations,
        best_expectation=result.fun,
        best_params=result.x,
        best_basis=best_basis,
        answer=cost.decode(best_basis),
        elapsed_seconds=time.perf_counter() - t0,
    )


def run_vqe(
    circuit: Circuit,
    cost: CostFunction,
    optimizer: Optional[OptimizerConfig] = None,
    mode: ExpectationMode = EXACT,
    trials: int = 10,
    init_seed: Optional[int] = 0,
    threads: int = 1,
) -> list[ConvergenceRecord]:
    """Run independent variational trials and record their full histories.

    Each trial draws its initial angles uniformly from [0, 2*pi) using a
    per-trial seed derived from init_seed, minimizes the expectation,
    and decodes the most probable main-register basis of the final
    state. Records come back ordered by trial id and are reproducible
    for fixed seeds regardless of `threads`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if cost.n_bits != circuit.n_qubits:
        raise ValueError(
            f"cost covers {cost.n_bits} bits but the main register has "
            f"{circuit.n_qubits} qubits"
        )
    optimizer = optimizer or OptimizerConfig()
    cost.table  # build the dense table once, outside the worker threads

    def one(trial: int) -> ConvergenceRecord:
        return _run_trial(trial, circuit, cost, optimizer, mode, init_seed)

    if threads <= 1:
        return [one(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(trials)))
