"""Dense statevector simulation of shallow parameterized circuits.

The gate set is fixed at {X, Ry(theta), CZ, CNOT, CSWAP}. Gates act in
place on the flat amplitude array through compiled stride iteration, one
O(2^n) pass per gate, so no unitary matrix is ever materialized and no
temporaries are allocated in the hot loop.

Basis convention: qubit 0 is the most significant bit of a basis index,
i.e. |q0 q1 ... q_{n-1}> maps to the integer sum_i q_i * 2**(n-1-i).
Ancilla qubits, when present, occupy the highest qubit indices (least
significant bits), so extracting the main-register index of a basis
state is a plain right shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

# 2**26 complex128 amplitudes = 1 GiB; refuse anything larger.
MAX_QUBITS = 26

_ARITY = {"x": 1, "ry": 1, "cz": 2, "cnot": 2, "cswap": 3}


@dataclass(frozen=True)
class ParamExpr:
    """Reference to one entry of a shared parameter table.

    Binding against a concrete angle vector theta yields
    sign * scale * theta[param_index]. Two expressions with the same
    param_index always bind from the same underlying value, which is how
    a single parameter drives several gates (e.g. the +theta / -theta
    rotation pairs around a CZ).
    """

    param_index: int
    sign: int = 1
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.param_index < 0:
            raise ValueError("param_index must be >= 0")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.scale not in (1.0, 0.5):
            raise ValueError("scale must be 1 or 1/2")

    def bind(self, params: Sequence[float]) -> float:
        return self.sign * self.scale * float(params[self.param_index])


@dataclass(frozen=True)
class GateOp:
    """A single gate application.

    kind is one of "x", "ry", "cz", "cnot", "cswap". For cnot and cswap
    the first listed qubit is the control; cz is symmetric and the two
    cswap targets are interchangeable. Only ry carries an angle.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: Optional[ParamExpr] = None

    def __post_init__(self) -> None:
        if self.kind not in _ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != _ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} acts on {_ARITY[self.kind]} qubits, got {qubits}"
            )
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"gate qubits must be distinct, got {qubits}")
        if (self.angle is not None) != (self.kind == "ry"):
            raise ValueError("exactly the ry gate carries an angle")


@dataclass(frozen=True)
class Circuit:
    """Parameterized circuit over a main register plus trailing ancillas.

    n_qubits counts the main register only; ancillas sit behind it and
    are excluded from cost evaluation. n_params is the size of the
    shared parameter table the ops reference.
    """

    n_qubits: int
    n_ancillas: int = 0
    ops: tuple[GateOp, ...] = ()
    n_params: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("a circuit needs at least one main qubit")
        if self.n_ancillas < 0 or self.n_params < 0:
            raise ValueError("n_ancillas and n_params must be >= 0")
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        total = self.n_total
        for op in ops:
            if max(op.qubits) >= total:
                raise ValueError(
                    f"op {op.kind} on {op.qubits} exceeds the {total}-qubit register"
                )
            if op.angle is not None and op.angle.param_index >= self.n_params:
                raise ValueError(
                    f"param_index {op.angle.param_index} out of range "
                    f"(n_params={self.n_params})"
                )

    @property
    def n_total(self) -> int:
        return self.n_qubits + self.n_ancillas


class StateVector:
    """Dense complex amplitudes of an n-qubit register.

    Gates mutate the array in place; keep separate StateVector objects
    for anything that must survive a gate application.
    """

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}")
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError(
                f"expected {1 << n_qubits} amplitudes, got {amplitudes.shape}"
            )
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def norm(self) -> float:
        a = self.amplitudes
        return float(np.sqrt((a.real**2 + a.imag**2).sum()))


def new_state(n_qubits: int) -> StateVector:
    """All-zeros state |0...0> on n_qubits (1 <= n_qubits <= MAX_QUBITS)."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit ceiling")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


@njit(cache=True, nogil=True)
def _apply_2x2(a, mask, r00, r01, r10, r11):
    """In-place 2x2 gate over all (i, i|mask) amplitude pairs."""
    block = mask << 1
    for base in range(0, a.size, block):
        for i0 in range(base, base + mask):
            i1 = i0 + mask
            x = a[i0]
            y = a[i1]
            a[i0] = r00 * x + r01 * y
            a[i1] = r10 * x + r11 * y


@njit(cache=True, nogil=True)
def _insert_zero(k, pos):
    """Spread k by one bit: insert a 0 at bit position pos."""
    return ((k >> pos) << (pos + 1)) | (k & ((1 << pos) - 1))


@njit(cache=True, nogil=True)
def _apply_cz(a, p_hi, p_lo):
    m = (1 << p_hi) | (1 << p_lo)
    for k in range(a.size >> 2):
        z = _insert_zero(_insert_zero(k, p_lo), p_hi) | m
        a[z] = -a[z]


@njit(cache=True, nogil=True)
def _apply_cnot(a, p_ctrl, p_tgt):
    p_hi = p_ctrl if p_ctrl > p_tgt else p_tgt
    p_lo = p_ctrl if p_ctrl < p_tgt else p_tgt
    mc = 1 << p_ctrl
    mt = 1 << p_tgt
    for k in range(a.size >> 2):
        i0 = _insert_zero(_insert_zero(k, p_lo), p_hi) | mc
        i1 = i0 | mt
        x = a[i0]
        a[i0] = a[i1]
        a[i1] = x


@njit(cache=True, nogil=True)
def _apply_cswap(a, p_ctrl, p_a, p_b):
    p1, p2, p3 = p_ctrl, p_a, p_b  # sort descending
    if p1 < p2:
        p1, p2 = p2, p1
    if p2 < p3:
        p2, p3 = p3, p2
    if p1 < p2:
        p1, p2 = p2, p1
    mc = 1 << p_ctrl
    ma = 1 << p_a
    mb = 1 << p_b
    for k in range(a.size >> 3):
        z = _insert_zero(_insert_zero(_insert_zero(k, p3), p2), p1)
        i0 = z | mc | ma  # targets |10>
        i1 = z | mc | mb  # targets |01>
        x = a[i0]
        a[i0] = a[i1]
        a[i1] = x


@njit(cache=True, nogil=True)
def _accumulate_probs(a, out, shift):
    for z in range(a.size):
        v = a[z]
        out[z >> shift] += v.real * v.real + v.imag * v.imag


def apply_gate(
    state: StateVector, gate: GateOp, bound_angle: Optional[float] = None
) -> StateVector:
    """Apply one gate in place and return the (mutated) state.

    bound_angle is the concrete rotation in radians and must be supplied
    exactly when gate.kind == "ry".
    """
    n = state.n_qubits
    for q in gate.qubits:
        if q >= n:
            raise ValueError(f"qubit {q} out of range for a {n}-qubit state")
    if (bound_angle is not None) != (gate.kind == "ry"):
        raise ValueError("bound_angle is required for ry and forbidden otherwise")

    a = state.amplitudes
    pos = tuple(n - 1 - q for q in gate.qubits)  # bit positions, qubit 0 = MSB
    if gate.kind == "x":
        _apply_2x2(a, 1 << pos[0], 0.0, 1.0, 1.0, 0.0)
    elif gate.kind == "ry":
        c = math.cos(0.5 * bound_angle)
        s = math.sin(0.5 * bound_angle)
        _apply_2x2(a, 1 << pos[0], c, -s, s, c)
    elif gate.kind == "cz":
        _apply_cz(a, max(pos), min(pos))
    elif gate.kind == "cnot":
        _apply_cnot(a, pos[0], pos[1])
    else:
        _apply_cswap(a, pos[0], pos[1], pos[2])
    return state


def _run_in_place(
    circuit: Circuit, params: np.ndarray, state: StateVector
) -> StateVector:
    """Reset `state` to |0...0> and execute the circuit into it."""
    state.amplitudes.fill(0.0)
    state.amplitudes[0] = 1.0
    for op in circuit.ops:
        angle = op.angle.bind(params) if op.angle is not None else None
        apply_gate(state, op, angle)
    return state


def run(circuit: Circuit, params: Sequence[float] = ()) -> StateVector:
    """Simulate the circuit from |0...0> with every ParamExpr bound.

    Deterministic: the returned state depends only on (circuit, params).
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise ValueError(
            f"expected {circuit.n_params} parameters, got shape {params.shape}"
        )
    return _run_in_place(circuit, params, new_state(circuit.n_total))


def _marginal_into(state: StateVector, n_main: int, out: np.ndarray) -> np.ndarray:
    out.fill(0.0)
    _accumulate_probs(state.amplitudes, out, state.n_qubits - n_main)
    return out


def main_register_probabilities(state: StateVector, n_main: int) -> np.ndarray:
    """Probabilities over the first n_main qubits with ancillas summed out.

    Returns a length-2**n_main vector indexed by main-register basis
    index; it sums to the state norm (1 for any state produced by run).
    """
    if not 1 <= n_main <= state.n_qubits:
        raise ValueError(f"n_main must be in 1..{state.n_qubits}")
    return _marginal_into(state, n_main, np.zeros(1 << n_main))


def sample(
    probabilities: np.ndarray, shots: int, seed: Optional[int] = None
) -> np.ndarray:
    """Draw `shots` independent basis indices from a probability vector.

    The multiset of draws is identical for identical seeds. Inputs that
    deviate from unit total by more than 1e-8 are rejected.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1:
        raise ValueError("probabilities must be a flat vector")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")
    rng = np.random.default_rng(seed)
    return rng.choice(p.size, size=shots, p=p / total)
