"""The feedforward/kick/uncompute kernel: gradients, effective phase tables,
fast-path equivalence, and kicking-rate scaling."""

import numpy as np
import pytest

from baqprop.circuit import FeedforwardProgram, GateOp, apply_diagonal_phase
from baqprop.hilbert import (
    GaussianPointer,
    QubitSpec,
    QuditSpec,
    WaveState,
    product_gaussian_state,
)
from baqprop.qfb import (
    LossSpec,
    classical_value_indices,
    effective_phase_grid,
    pointer_prob_vectors,
    qfb_run,
    smoothed_cost,
    smoothed_cost_gradient,
    verify_eta_scaling,
    _attach_compute,
)

SPEC7 = QuditSpec(7, -3, 3)
SPEC5 = QuditSpec(5, -2, 2)
SPEC15 = QuditSpec(15, -4, 4)


def quadratic_program(spec=SPEC7):
    prog = FeedforwardProgram(
        gates=[GateOp("adder", src="p", dst="c")],
        param_regs=["p"], compute_regs=["c"],
        registers={"p": spec, "c": spec})
    loss = LossSpec(kind="diagonal_grid_function", targets=("c",),
                    table=spec.values**2)
    return prog, loss


class TestLossSpec:
    def test_hermiticity_enforced(self):
        with pytest.raises(ValueError):
            LossSpec(kind="hermitian_matrix", targets=("q",),
                     matrix=np.array([[0, 1], [0, 0]], dtype=complex))

    def test_projector_normalization_enforced(self):
        with pytest.raises(ValueError):
            LossSpec(kind="projector_onto_state", targets=("q",),
                     vector=np.array([1.0, 1.0]))

    def test_z_polynomial_table(self):
        loss = LossSpec(kind="pauli_Z_polynomial", targets=("a", "b"),
                        terms=((0.5, ("a", "b")), (-1.0, ()), (0.25, ("b",))))
        st = WaveState.from_basis(["a", "b"], [QubitSpec(), QubitSpec()])
        table = loss.diagonal_table(st)
        # z_a z_b / 2 - 1 + z_b / 4 on the four basis states
        za = np.array([1, -1])
        expect = 0.5 * np.multiply.outer(za, za) - 1.0 + 0.25 * za[None, :]
        assert np.allclose(table, expect)

    def test_expectations(self):
        psi = np.array([0.6, 0.8j], dtype=complex)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        proj = LossSpec(kind="projector_onto_state", targets=("q",),
                        vector=np.array([1.0, 0.0]), sign=-1.0)
        assert proj.expectation(st) == pytest.approx(-0.36)
        z = LossSpec(kind="hermitian_matrix", targets=("q",),
                     matrix=np.diag([1.0, -1.0]).astype(complex))
        assert z.expectation(st) == pytest.approx(0.36 - 0.64)


class TestQfbRun:
    def test_eta_zero_identity(self):
        prog, loss = quadratic_program()
        state = product_gaussian_state(["p"], [SPEC7],
                                       [GaussianPointer(1.0, 0.0, 1.0)])
        state = _attach_compute(state, prog, None)
        before = state.psi.copy()
        res = qfb_run(prog, loss, 0.0, state)
        assert np.allclose(res.post_state.psi, before)
        assert np.allclose(res.effective_gradient, 0.0)

    def test_quadratic_gradient_two(self):
        # analytic d(Phi^2) = 2*Phi at Phi0 = 1, grid-expectation oracle
        prog, loss = quadratic_program()
        pointers = [GaussianPointer(1.0, 0.0, 1.0)]
        state = product_gaussian_state(["p"], [SPEC7], pointers)
        state = _attach_compute(state, prog, None)
        res = qfb_run(prog, loss, 0.1, state)
        p = pointer_prob_vectors([SPEC7], pointers)[0]
        oracle = 2.0 * float(p @ SPEC7.values)
        assert res.effective_gradient[0] == pytest.approx(oracle, rel=0.05)
        assert res.effective_gradient[0] == pytest.approx(2.0, rel=0.05)

    def test_classical_embedding_returns_compute(self):
        prog, loss = quadratic_program()
        state = product_gaussian_state(["p"], [SPEC7],
                                       [GaussianPointer(0.5, 0.0, 0.9)])
        state = _attach_compute(state, prog, None)
        res = qfb_run(prog, loss, 0.3, state)
        assert res.compute_purity == pytest.approx(1.0, abs=1e-9)
        assert res.post_state.probabilities("c")[SPEC7.zero_index] == \
            pytest.approx(1.0, abs=1e-12)

    def test_loss_target_must_be_compute(self):
        prog, _ = quadratic_program()
        bad = LossSpec(kind="diagonal_grid_function", targets=("p",),
                       table=SPEC7.values)
        state = product_gaussian_state(["p"], [SPEC7],
                                       [GaussianPointer(0, 0, 1)])
        state = _attach_compute(state, prog, None)
        with pytest.raises(ValueError):
            qfb_run(prog, bad, 0.1, state)

    def test_result_json(self):
        prog, loss = quadratic_program()
        state = product_gaussian_state(["p"], [SPEC7],
                                       [GaussianPointer(1.0, 0.0, 1.0)])
        state = _attach_compute(state, prog, None)
        res = qfb_run(prog, loss, 0.1, state)
        import json
        doc = json.loads(res.to_json())
        assert set(doc) == {"momentum_before", "momentum_after",
                            "effective_gradient", "compute_purity"}


class TestEffectivePhaseGrid:
    def test_identity_circuit_projector_loss(self):
        # U = identity, loss -|psi0><psi0| on the input state: L = -1 everywhere
        prog = FeedforwardProgram(gates=[], param_regs=["p"],
                                  compute_regs=["q"],
                                  registers={"p": SPEC5, "q": QubitSpec()})
        loss = LossSpec(kind="projector_onto_state", targets=("q",),
                        vector=np.array([1.0, 0.0]), sign=-1.0)
        table = effective_phase_grid(prog, loss)
        assert np.allclose(table, -1.0)

    def test_xor_ideal_weights_zero_loss(self):
        # classical XOR feedforward oracle: correct classification has zero loss
        from baqprop.apps.xor import XorNetConfig, build_xor_program
        cfg = XorNetConfig()
        ideal = {"W1_00": 1, "W1_01": 1, "W1_10": 1, "W1_11": 1,
                 "b1_0": 0, "b1_1": -1, "W2_0": 1, "W2_1": -2, "b2": 0}
        for x, y in [((0, 0), 0), ((0, 1), 1), ((1, 0), 1), ((1, 1), 0)]:
            prog, loss = build_xor_program(cfg, x)
            table = effective_phase_grid(prog, loss, dtype=np.float32)
            idx = tuple(cfg.spec.index_of(ideal[n]) for n in cfg.param_names)
            assert table[idx] == 0.0

    def test_single_qubit_ansatz_overlap(self):
        # statevector overlap oracle: L(Phi) = -|<psi_o|U(Phi)|psi_i>|^2
        from baqprop.apps.unitary import (UnitaryLearnConfig, ansatz_matrix,
                                          build_unitary_program,
                                          completion_unitary,
                                          sample_bloch_state)
        rng = np.random.default_rng(12)
        psi_in = sample_bloch_state(rng)
        psi_out = completion_unitary(sample_bloch_state(rng)) @ psi_in
        prog = build_unitary_program(UnitaryLearnConfig(), psi_in)
        loss = LossSpec(kind="projector_onto_state", targets=("q",),
                        sign=-1.0, vector=psi_out)
        table = effective_phase_grid(prog, loss)
        spec = prog.registers["phi1"]
        for idx in ((0, 3, 5), (2, 2, 2), (6, 1, 0)):
            phis = [spec.values[i] for i in idx]
            overlap = abs(np.vdot(psi_out, ansatz_matrix(phis) @ psi_in)) ** 2
            assert table[idx] == pytest.approx(-overlap, abs=1e-10)

    def test_memory_budget(self):
        prog = FeedforwardProgram(
            gates=[GateOp("param_exponential", src="p", targets=("q",),
                          matrix=np.eye(2, dtype=complex))],
            param_regs=["p"], compute_regs=["q"],
            registers={"p": QuditSpec(100, 0, 99), "q": QubitSpec()})
        loss = LossSpec(kind="hermitian_matrix", targets=("q",),
                        matrix=np.diag([1.0, -1.0]).astype(complex))
        with pytest.raises(MemoryError):
            effective_phase_grid(prog, loss, max_points=50)


class TestFastPathEquivalence:
    def test_circuit_vs_diagonal_table(self):
        # small classical-embedding instance: full circuit-level QFB equals
        # the diagonal fast path on the parameter registers to 1e-8
        prog = FeedforwardProgram(
            gates=[GateOp("adder", src="w1", dst="c1"),
                   GateOp("multiplier_adder", src="c1", src2="w2", dst="c2",
                          func="relu"),
                   GateOp("adder", src="w3", dst="c2")],
            param_regs=["w1", "w2", "w3"], compute_regs=["c1", "c2"],
            registers={"w1": SPEC5, "w2": SPEC5, "w3": SPEC5,
                       "c1": SPEC5, "c2": SPEC5})
        loss = LossSpec(kind="diagonal_grid_function", targets=("c2",),
                        table=(SPEC5.values > 0).astype(float))
        pointers = [GaussianPointer(0.4, 0.1, 0.7),
                    GaussianPointer(-0.6, 0.0, 0.8),
                    GaussianPointer(1.0, -0.2, 0.7)]
        eta = 0.35

        # circuit path
        state = product_gaussian_state(["w1", "w2", "w3"], [SPEC5] * 3,
                                       pointers)
        param_psi = state.psi.copy()
        full = _attach_compute(state, prog, None)
        qfb_run(prog, loss, eta, full)
        sl = (slice(None),) * 3 + (SPEC5.zero_index, SPEC5.zero_index)
        circuit_params = full.psi[sl]

        # fast path: diagonal phase over the parameter grid
        table = effective_phase_grid(prog, loss)
        fast = param_psi * np.exp(-1j * eta * table)
        assert np.max(np.abs(circuit_params - fast)) < 1e-8


class TestEtaScaling:
    def test_diagonal_exactly_linear(self):
        # wide enough grid that the kicked momenta stay inside the window
        prog, loss = quadratic_program(SPEC15)
        report = verify_eta_scaling(prog, loss,
                                    [GaussianPointer(1.0, 0.0, 1.0)],
                                    [0.4, 0.2, 0.1])
        assert report.slope_variation < 0.01

    def test_zero_eta_zero_shift(self):
        prog, loss = quadratic_program()
        state = product_gaussian_state(["p"], [SPEC7],
                                       [GaussianPointer(1.0, 0.0, 1.0)])
        state = _attach_compute(state, prog, None)
        res = qfb_run(prog, loss, 0.0, state)
        assert np.allclose(res.momentum_before, res.momentum_after)

    def test_hermitian_remainder_quadratic(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        z = np.diag([1.0, -1.0]).astype(complex)
        prog = FeedforwardProgram(
            gates=[GateOp("param_exponential", src="p", targets=("q",),
                          matrix=x)],
            param_regs=["p"], compute_regs=["q"],
            registers={"p": SPEC7, "q": QubitSpec()})
        loss = LossSpec(kind="hermitian_matrix", targets=("q",),
                        matrix=0.5 * (z + x))
        report = verify_eta_scaling(prog, loss,
                                    [GaussianPointer(1.0, 0.0, 1.0)],
                                    [0.4, 0.2, 0.1, 0.05, 0.025])
        assert report.exponent >= 1.8

    def test_requires_geometric_progression(self):
        prog, loss = quadratic_program()
        with pytest.raises(ValueError):
            verify_eta_scaling(prog, loss, [GaussianPointer(0, 0, 1)],
                               [0.4, 0.3, 0.1])
        with pytest.raises(ValueError):
            verify_eta_scaling(prog, loss, [GaussianPointer(0, 0, 1)],
                               [0.4, 0.2])


class TestSmoothedCost:
    def test_contraction_matches_direct_sum(self):
        rng = np.random.default_rng(8)
        table = rng.normal(size=(7, 7))
        pointers = [GaussianPointer(0.5, 0, 0.9), GaussianPointer(-1.0, 0, 1.1)]
        probs = pointer_prob_vectors([SPEC7, SPEC7], pointers)
        direct = float(np.einsum("ab,a,b->", table, probs[0], probs[1]))
        assert smoothed_cost(table, [SPEC7, SPEC7], pointers) == \
            pytest.approx(direct, abs=1e-12)

    def test_score_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(9)
        table = rng.normal(size=(7, 7, 7))
        pointers = [GaussianPointer(0.3, 0, 0.8), GaussianPointer(-0.2, 0, 1.0),
                    GaussianPointer(1.1, 0, 1.2)]
        specs = [SPEC7] * 3
        grad = smoothed_cost_gradient(table, specs, pointers)
        h = 1e-5
        for n in range(3):
            up = list(pointers)
            dn = list(pointers)
            up[n] = GaussianPointer(pointers[n].phi0 + h, 0, pointers[n].sigma0)
            dn[n] = GaussianPointer(pointers[n].phi0 - h, 0, pointers[n].sigma0)
            fd = (smoothed_cost(table, specs, up)
                  - smoothed_cost(table, specs, dn)) / (2 * h)
            assert grad[n] == pytest.approx(fd, rel=1e-4, abs=1e-7)
