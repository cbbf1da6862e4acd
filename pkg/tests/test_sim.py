import math

import numpy as np
import pytest

from pqcbench.sim import (
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

RNG = np.random.default_rng(20260810)


def basis_state(n, index):
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def random_state(n, rng):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    return StateVector(n, amps)


class TestNewState:
    def test_single_qubit(self):
        s = new_state(1)
        assert np.array_equal(s.amplitudes, [1.0, 0.0])

    def test_three_qubits(self):
        s = new_state(3)
        assert s.amplitudes[0] == 1.0
        assert abs(s.norm() - 1.0) < 1e-10

    def test_sixteen_qubits(self):
        s = new_state(16)
        assert s.amplitudes.size == 65536
        assert np.flatnonzero(s.amplitudes).tolist() == [0]

    def test_rejects_zero_qubits(self):
        with pytest.raises(ValueError):
            new_state(0)

    def test_rejects_above_ceiling(self):
        with pytest.raises(ValueError):
            new_state(MAX_QUBITS + 1)


class TestGateMatrices:
    def test_x_on_first_qubit(self):
        # X_0 |000> = |100>
        s = apply_gate(new_state(3), GateOp("x", (0,)))
        assert abs(s.amplitudes[0b100] - 1.0) < 1e-15
        assert np.count_nonzero(s.amplitudes) == 1

    def test_ry_matrix_columns(self):
        theta = 0.83
        c, si = math.cos(theta / 2), math.sin(theta / 2)
        g = GateOp("ry", (0,), ParamExpr(0))
        s0 = apply_gate(basis_state(1, 0), g, theta)
        assert abs(s0.amplitudes[0] - c) < 1e-15
        assert abs(s0.amplitudes[1] - si) < 1e-15
        s1 = apply_gate(basis_state(1, 1), g, theta)
        assert abs(s1.amplitudes[0] + si) < 1e-15
        assert abs(s1.amplitudes[1] - c) < 1e-15

    def test_ry_zero_angle_is_identity(self):
        rng = np.random.default_rng(5)
        s = random_state(3, rng)
        before = s.amplitudes.copy()
        apply_gate(s, GateOp("ry", (1,), ParamExpr(0)), 0.0)
        assert np.array_equal(s.amplitudes, before)

    def test_cz_flips_sign_only_on_11(self):
        for idx in range(4):
            s = apply_gate(basis_state(2, idx), GateOp("cz", (0, 1)))
            expected = -1.0 if idx == 0b11 else 1.0
            assert s.amplitudes[idx] == expected

    def test_cz_symmetric(self):
        rng = np.random.default_rng(6)
        s1 = random_state(3, rng)
        s2 = StateVector(3, s1.amplitudes.copy())
        apply_gate(s1, GateOp("cz", (0, 2)))
        apply_gate(s2, GateOp("cz", (2, 0)))
        assert np.array_equal(s1.amplitudes, s2.amplitudes)

    def test_cnot_columns(self):
        # basis |control target>: 00->00, 01->01, 10->11, 11->10
        expected = {0b00: 0b00, 0b01: 0b01, 0b10: 0b11, 0b11: 0b10}
        for src, dst in expected.items():
            s = apply_gate(basis_state(2, src), GateOp("cnot", (0, 1)))
            assert s.amplitudes[dst] == 1.0

    def test_cswap_exchanges_index_5_and_6(self):
        s = apply_gate(basis_state(3, 5), GateOp("cswap", (0, 1, 2)))
        assert s.amplitudes[6] == 1.0
        s = apply_gate(basis_state(3, 6), GateOp("cswap", (0, 1, 2)))
        assert s.amplitudes[5] == 1.0
        for idx in (0, 1, 2, 3, 4, 7):
            s = apply_gate(basis_state(3, idx), GateOp("cswap", (0, 1, 2)))
            assert s.amplitudes[idx] == 1.0

    def test_cswap_control_zero_is_identity(self):
        # control |0>, targets |10>: untouched
        s = apply_gate(basis_state(3, 0b010), GateOp("cswap", (0, 1, 2)))
        assert s.amplitudes[0b010] == 1.0

    def test_cswap_target_order_irrelevant(self):
        rng = np.random.default_rng(7)
        s1 = random_state(4, rng)
        s2 = StateVector(4, s1.amplitudes.copy())
        apply_gate(s1, GateOp("cswap", (3, 1, 2)))
        apply_gate(s2, GateOp("cswap", (3, 2, 1)))
        assert np.array_equal(s1.amplitudes, s2.amplitudes)


class TestUnitarity:
    def test_norm_preserved_over_random_applications(self):
        # 1000 random (state, gate, angle) combinations across all kinds
        rng = np.random.default_rng(99)
        kinds = ["x", "ry", "cz", "cnot", "cswap"]
        for i in range(1000):
            kind = kinds[i % 5]
            n = int(rng.integers(3, 7))
            s = random_state(n, rng)
            qubits = tuple(rng.choice(n, size={"x": 1, "ry": 1, "cz": 2, "cnot": 2, "cswap": 3}[kind], replace=False))
            angle = float(rng.uniform(-10, 10)) if kind == "ry" else None
            expr = ParamExpr(0) if kind == "ry" else None
            apply_gate(s, GateOp(kind, qubits, expr), angle)
            assert abs(s.norm() - 1.0) < 1e-12

    def test_ry_periodicity_4pi(self):
        rng = np.random.default_rng(123)
        for _ in range(20):
            theta = float(rng.uniform(-5, 5))
            s1 = random_state(4, np.random.default_rng(42))
            s2 = StateVector(4, s1.amplitudes.copy())
            apply_gate(s1, GateOp("ry", (2,), ParamExpr(0)), theta)
            apply_gate(s2, GateOp("ry", (2,), ParamExpr(0)), theta + 4 * math.pi)
            assert np.max(np.abs(s1.amplitudes - s2.amplitudes)) < 1e-12


class TestParamExpr:
    def test_binding(self):
        assert ParamExpr(1).bind([0.5, 2.0]) == 2.0
        assert ParamExpr(1, sign=-1).bind([0.5, 2.0]) == -2.0
        assert ParamExpr(0, scale=0.5).bind([3.0]) == 1.5

    def test_validation(self):
        with pytest.raises(ValueError):
            ParamExpr(-1)
        with pytest.raises(ValueError):
            ParamExpr(0, sign=2)
        with pytest.raises(ValueError):
            ParamExpr(0, scale=0.25)

    def test_shared_parameter_drives_all_referencing_gates(self):
        # W-chain style pair: d(state)/d(theta_0) by central differences must
        # match the analytic derivative of (cos t0, -sin t0 cos t1, sin t0 sin t1).
        from pqcbench.ansatz import w_chain_circuit

        circ = w_chain_circuit(3)
        t0, t1 = 0.73, 1.21
        h = 1e-6
        up = run(circ, [t0 + h, t1]).amplitudes
        down = run(circ, [t0 - h, t1]).amplitudes
        fd = (up - down) / (2 * h)
        analytic = np.zeros(8)
        analytic[0b100] = -math.sin(t0)
        analytic[0b010] = -math.cos(t0) * math.cos(t1)
        analytic[0b001] = math.cos(t0) * math.sin(t1)
        assert np.max(np.abs(fd - analytic)) < 1e-6

    def test_unreferenced_amplitude_untouched_by_perturbation(self):
        # the |100> amplitude is cos(theta_0) and does not reference theta_1
        from pqcbench.ansatz import w_chain_circuit

        circ = w_chain_circuit(3)
        a = run(circ, [0.73, 1.21]).amplitudes[0b100]
        b = run(circ, [0.73, 1.21 + 0.3]).amplitudes[0b100]
        assert a == b


class TestValidation:
    def test_gateop_rejects_duplicates(self):
        with pytest.raises(ValueError):
            GateOp("cnot", (1, 1))

    def test_gateop_rejects_wrong_arity(self):
        with pytest.raises(ValueError):
            GateOp("cz", (0,))

    def test_gateop_angle_rules(self):
        with pytest.raises(ValueError):
            GateOp("x", (0,), ParamExpr(0))
        with pytest.raises(ValueError):
            GateOp("ry", (0,))

    def test_gateop_unknown_kind(self):
        with pytest.raises(ValueError):
            GateOp("h", (0,))

    def test_circuit_rejects_out_of_range_qubit(self):
        with pytest.raises(ValueError):
            Circuit(2, 0, (GateOp("x", (2,)),), 0)

    def test_circuit_rejects_out_of_range_param(self):
        with pytest.raises(ValueError):
            Circuit(2, 0, (GateOp("ry", (0,), ParamExpr(1)),), 1)

    def test_circuit_allows_ancilla_qubits(self):
        Circuit(2, 1, (GateOp("x", (2,)),), 0)

    def test_apply_gate_range_check(self):
        with pytest.raises(ValueError):
            apply_gate(new_state(2), GateOp("x", (2,)))

    def test_apply_gate_angle_rules(self):
        with pytest.raises(ValueError):
            apply_gate(new_state(1), GateOp("ry", (0,), ParamExpr(0)))
        with pytest.raises(ValueError):
            apply_gate(new_state(1), GateOp("x", (0,)), 0.5)

    def test_statevector_shape_check(self):
        with pytest.raises(ValueError):
            StateVector(2, np.zeros(3))


class TestRun:
    def test_empty_circuit(self):
        s = run(Circuit(3), ())
        assert s.amplitudes[0] == 1.0

    def test_wrong_param_count(self):
        circ = Circuit(1, 0, (GateOp("ry", (0,), ParamExpr(0)),), 1)
        with pytest.raises(ValueError):
            run(circ, [0.1, 0.2])

    def test_deterministic(self):
        from pqcbench.ansatz import build_ry_baseline

        circ = build_ry_baseline(4, 2)
        theta = RNG.uniform(0, 2 * math.pi, circ.n_params)
        a = run(circ, theta).amplitudes
        b = run(circ, theta).amplitudes
        assert np.array_equal(a, b)


class TestMarginals:
    def test_no_ancillas_is_plain_probabilities(self):
        rng = np.random.default_rng(11)
        s = random_state(3, rng)
        p = main_register_probabilities(s, 3)
        assert np.allclose(p, np.abs(s.amplitudes) ** 2, atol=1e-15)

    def test_bell_like_marginal(self):
        amps = np.zeros(4, dtype=np.complex128)
        amps[0b00] = amps[0b11] = 1 / math.sqrt(2)
        p = main_register_probabilities(StateVector(2, amps), 1)
        assert np.allclose(p, [0.5, 0.5], atol=1e-12)

    def test_sums_to_one(self):
        rng = np.random.default_rng(12)
        s = random_state(6, rng)
        for n_main in (1, 3, 6):
            p = main_register_probabilities(s, n_main)
            assert abs(p.sum() - 1.0) < 1e-10

    def test_range_check(self):
        s = new_state(3)
        with pytest.raises(ValueError):
            main_register_probabilities(s, 4)
        with pytest.raises(ValueError):
            main_register_probabilities(s, 0)


class TestSample:
    def test_point_distribution(self):
        p = np.zeros(8)
        p[5] = 1.0
        draws = sample(p, 1024, seed=3)
        assert draws.shape == (1024,)
        assert np.all(draws == 5)

    def test_deterministic_for_fixed_seed(self):
        p = np.full(4, 0.25)
        assert np.array_equal(sample(p, 100, seed=9), sample(p, 100, seed=9))

    def test_uniform_two_outcome_frequency(self):
        draws = sample(np.array([0.5, 0.5]), 10**6, seed=1)
        freq = np.mean(draws == 0)
        assert abs(freq - 0.5) < 0.01

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            sample(np.array([0.5, 0.6]), 10, seed=0)

    def test_rejects_zero_shots(self):
        with pytest.raises(ValueError):
            sample(np.array([1.0]), 0, seed=0)
