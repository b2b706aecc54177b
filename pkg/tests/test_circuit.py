"""Gate semantics against permutation/expm oracles, adjoint round trips,
phase kickback, and program serialization."""

import numpy as np
import pytest
import scipy.linalg

from baqprop.circuit import (
    FeedforwardProgram,
    GateOp,
    apply_adder,
    apply_diagonal_phase,
    apply_exp_swap,
    apply_gate,
    apply_multiplier_adder,
    apply_param_exponential,
    apply_phase_estimation,
    apply_program,
)
from baqprop.hilbert import (
    GaussianPointer,
    OverflowWarning,
    QubitSpec,
    QuditSpec,
    WaveState,
    delta_kernel,
    measure_momentum_expectation,
    measure_position_expectation,
    prepare_gaussian,
    product_gaussian_state,
)


def random_state(names, specs, seed=0):
    rng = np.random.default_rng(seed)
    shape = tuple(s.dim for s in specs)
    psi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    psi /= np.linalg.norm(psi.ravel())
    return WaveState(names, specs, psi)


class TestAdder:
    def test_gaussians_sum_to_three(self):
        specs = [QuditSpec(63, -8, 8)] * 2
        st = product_gaussian_state(["r1", "r2"], specs,
                                    [GaussianPointer(1, 0, 0.5),
                                     GaussianPointer(2, 0, 0.5)])
        apply_adder(st, "r1", "r2")
        assert measure_position_expectation(st, ["r2"])[0] == pytest.approx(3.0, abs=0.02)
        assert measure_position_expectation(st, ["r1"])[0] == pytest.approx(1.0, abs=0.02)

    def test_zero_source_leaves_target(self):
        spec = QuditSpec(7, -3, 3)
        st = WaveState.from_basis(["a", "b"], [spec, spec],
                                  (spec.zero_index, 5))
        apply_adder(st, "a", "b")
        assert st.probabilities("b")[5] == pytest.approx(1.0)

    def test_wraparound_permutation_oracle(self):
        # |3>,|1> on the d=7 signed grid follows ((j+k) mod d) index arithmetic
        import warnings as _warnings
        spec = QuditSpec(7, -3, 3)
        for j_src in range(7):
            st = WaveState.from_basis(["a", "b"], [spec, spec], (j_src, 1))
            shift = round(spec.values[j_src] / spec.delta)
            wraps = not (0 <= 1 + shift < 7)
            if wraps:
                with pytest.warns(OverflowWarning):
                    apply_adder(st, "a", "b")
            else:
                with _warnings.catch_warnings():
                    _warnings.simplefilter("error")
                    apply_adder(st, "a", "b")
            assert st.probabilities("b")[(1 + shift) % 7] == pytest.approx(1.0)

    def test_spacing_mismatch_rejected(self):
        st = WaveState.from_basis(["a", "b"], [QuditSpec(7, -3, 3),
                                               QuditSpec(7, 0, 12)])
        with pytest.raises(ValueError):
            apply_adder(st, "a", "b")


class TestMultiplierAdder:
    def test_product_lands_in_target(self):
        spec = QuditSpec(7, -3, 3)
        st = WaveState.from_basis(["a", "b", "c"], [spec] * 3,
                                  (spec.index_of(2), spec.index_of(-1),
                                   spec.zero_index))
        apply_multiplier_adder(st, "a", "b", "c")
        # 2 * (-1) = -2: index shift -2 mod 7 from the zero cell
        assert st.probabilities("c")[spec.index_of(-2)] == pytest.approx(1.0)

    def test_zero_factor_identity(self):
        spec = QuditSpec(7, -3, 3)
        st = WaveState.from_basis(["a", "b", "c"], [spec] * 3,
                                  (spec.zero_index, 2, 4))
        apply_multiplier_adder(st, "a", "b", "c")
        assert st.probabilities("c")[4] == pytest.approx(1.0)

    def test_permutation_oracle_full(self):
        spec = QuditSpec(7, -3, 3)
        for j1, j2 in ((0, 6), (5, 4), (2, 2)):
            st = WaveState.from_basis(["a", "b", "c"], [spec] * 3,
                                      (j1, j2, spec.zero_index))
            import warnings as _w
            with _w.catch_warnings():
                _w.simplefilter("ignore")
                apply_multiplier_adder(st, "a", "b", "c")
            shift = round(spec.values[j1] * spec.values[j2] / spec.delta)
            assert st.probabilities("c")[(spec.zero_index + shift) % 7] == \
                pytest.approx(1.0)


class TestPhaseEstimation:
    def test_scalar_control_centered_at_25(self):
        spec = QuditSpec(63, 0, 5)
        st = WaveState.from_basis(["ptr"], [spec])
        apply_phase_estimation(st, 2.0, "ptr")
        p = st.probabilities("ptr")
        oracle = np.abs(delta_kernel(2.0 * 12.4 - np.arange(63), 63)) ** 2
        assert np.argmax(p) == 25
        assert np.max(np.abs(p - oracle)) < 1e-8

    def test_zero_control_identity(self):
        spec = QuditSpec(63, 0, 5)
        st = WaveState.from_basis(["ptr"], [spec])
        apply_phase_estimation(st, 0.0, "ptr")
        assert st.probabilities("ptr")[0] == pytest.approx(1.0, abs=1e-12)

    def test_superposed_control_linearity(self):
        # two control eigenvalues give the weighted sum of Delta^2 profiles
        ctrl_spec = QuditSpec(5, 0, 4)
        ptr_spec = QuditSpec(31, 0, 4)
        psi_c = np.zeros(5, dtype=complex)
        psi_c[1], psi_c[3] = np.sqrt(0.3), np.sqrt(0.7)
        st = WaveState.from_factors(["c", "ptr"], [ctrl_spec, ptr_spec],
                                    [psi_c, np.eye(31)[0].astype(complex)])
        apply_phase_estimation(st, "c", "ptr")
        p = st.probabilities("ptr")
        kappa = 30 / 4
        oracle = (0.3 * np.abs(delta_kernel(1.0 * kappa - np.arange(31), 31)) ** 2
                  + 0.7 * np.abs(delta_kernel(3.0 * kappa - np.arange(31), 31)) ** 2)
        assert np.allclose(p, oracle, atol=1e-10)


class TestDiagonalPhase:
    def test_eta_zero_identity(self):
        spec = QuditSpec(7, -3, 3)
        st = random_state(["q"], [spec], 3)
        before = st.psi.copy()
        apply_diagonal_phase(st, ["q"], spec.values**3, 0.0)
        assert np.allclose(st.psi, before)

    def test_constant_is_global_phase(self):
        spec = QuditSpec(7, -3, 3)
        st = random_state(["q"], [spec], 4)
        probs = st.probabilities("q")
        pi_before = measure_momentum_expectation(st, ["q"])
        apply_diagonal_phase(st, ["q"], np.full(7, 2.5), 0.7)
        assert np.allclose(st.probabilities("q"), probs, atol=1e-12)
        assert np.allclose(measure_momentum_expectation(st, ["q"]), pi_before,
                           atol=1e-12)

    def test_cubic_momentum_shift(self):
        # finite-difference-of-eta oracle for d<J'> = -eta <3 Phi^2 + 2>
        spec = QuditSpec(63, -6, 6)
        st = prepare_gaussian(spec, GaussianPointer(0.0, 0.0, 1.0))
        p = st.probabilities("q0")
        expected_slope = -(p @ (3 * spec.values**2 + 2))
        eta = 0.02
        apply_diagonal_phase(st, ["q0"], spec.values**3 + 2 * spec.values, eta)
        shift = measure_momentum_expectation(st, ["q0"])[0]
        assert shift == pytest.approx(eta * expected_slope, rel=0.02)

    def test_nonfinite_rejected(self):
        spec = QuditSpec(5, -2, 2)
        st = WaveState.from_basis(["q"], [spec])
        with pytest.raises(ValueError):
            apply_diagonal_phase(st, ["q"], np.array([0, 1, np.inf, 0, 0]), 0.1)


class TestExpSwap:
    def test_eta_zero_identity(self):
        st = random_state(["a", "b"], [QubitSpec(), QubitSpec()], 5)
        before = st.psi.copy()
        apply_exp_swap(st, "a", "b", 0.0)
        assert np.allclose(st.psi, before)

    def test_half_pi_full_swap(self):
        st = random_state(["a", "b"], [QubitSpec(), QubitSpec()], 6)
        before = st.psi.copy()
        apply_exp_swap(st, "a", "b", np.pi / 2)
        assert np.allclose(st.psi, -1j * before.T)

    def test_matches_expm(self):
        rng = np.random.default_rng(7)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        st = WaveState(["a", "b"], [QubitSpec(), QubitSpec()],
                       v.reshape(2, 2).copy())
        s = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                s[i * 2 + j, j * 2 + i] = 1
        apply_exp_swap(st, "a", "b", 0.3)
        assert np.allclose(st.psi.ravel(),
                           scipy.linalg.expm(-1j * 0.3 * s) @ v, atol=1e-12)

    def test_dimension_mismatch(self):
        st = WaveState.from_basis(["a", "b"], [QubitSpec(), QuditSpec(3, 0, 2)])
        with pytest.raises(ValueError):
            apply_exp_swap(st, "a", "b", 0.1)


class TestParamExponential:
    def test_zero_eigenvalue_branch_unchanged(self):
        spec = QuditSpec(7, -3, 3)
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        st = WaveState.from_basis(["p", "q"], [spec, QubitSpec()],
                                  (spec.zero_index, 0))
        apply_param_exponential(st, "p", ["q"], x, scale=0.8)
        assert st.probabilities("q")[0] == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_action_phases(self):
        spec = QuditSpec(7, -3, 3)
        z = np.diag([1.0, -1.0]).astype(complex)
        plus = np.array([1, 1]) / np.sqrt(2)
        st = WaveState.from_factors(["p", "q"], [spec, QubitSpec()],
                                    [np.eye(7)[spec.index_of(2)].astype(complex),
                                     plus.astype(complex)])
        apply_param_exponential(st, "p", ["q"], z, scale=0.5)
        # relative phase e^{-i*scale*Phi*(+/-1)} on |0>/|1>
        expect = np.array([np.exp(-1j * 0.5 * 2 * 1), np.exp(+1j * 0.5 * 2)]) / np.sqrt(2)
        assert np.allclose(st.psi[spec.index_of(2)], expect)

    def test_per_branch_expm_oracle(self):
        spec = QuditSpec(5, -2, 2)
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        st = product_gaussian_state(["p"], [spec], [GaussianPointer(0.5, 0, 0.7)])
        qubit = np.array([1, 0], dtype=complex)
        joint = WaveState(["p", "q"], [spec, QubitSpec()],
                          np.multiply.outer(st.psi, qubit))
        apply_param_exponential(joint, "p", ["q"], x, scale=0.4)
        for j, phi in enumerate(spec.values):
            branch = scipy.linalg.expm(-1j * 0.4 * phi * x) @ qubit
            assert np.allclose(joint.psi[j], st.psi[j] * branch, atol=1e-12)

    def test_non_hermitian_rejected(self):
        spec = QuditSpec(5, -2, 2)
        st = WaveState.from_basis(["p", "q"], [spec, QubitSpec()])
        with pytest.raises(ValueError):
            apply_param_exponential(st, "p", ["q"],
                                    np.array([[0, 1], [0, 0]], dtype=complex))


class TestProgramStructure:
    def _random_program(self):
        spec = QuditSpec(5, -2, 2)
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        registers = {"p1": spec, "p2": spec, "c1": spec, "c2": spec,
                     "q": QubitSpec()}
        gates = [
            GateOp("adder", src="p1", dst="c1"),
            GateOp("multiplier_adder", src="c1", src2="p2", dst="c2",
                   func="relu"),
            GateOp("param_exponential", src="p2", targets=("q",), matrix=x,
                   scale=0.3),
            GateOp("diagonal_phase", targets=("c1",), poly=(0.0, 1.0, 0.5),
                   eta=0.2),
            GateOp("fixed_unitary", targets=("q",),
                   matrix=np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)),
        ]
        return FeedforwardProgram(gates=gates, param_regs=["p1", "p2"],
                                  compute_regs=["c1", "c2", "q"],
                                  registers=registers)

    def test_adjoint_round_trip(self):
        prog = self._random_program()
        names = ["p1", "p2", "c1", "c2", "q"]
        specs = [prog.registers[n] for n in names]
        st = random_state(names, specs, 11)
        before = st.psi.copy()
        apply_program(st, prog)
        apply_program(st, prog, adjoint=True)
        assert np.max(np.abs(st.psi - before)) < 1e-8

    def test_json_round_trip_bit_exact(self):
        prog = self._random_program()
        clone = FeedforwardProgram.from_json(prog.to_json())
        assert clone.param_regs == prog.param_regs
        assert clone.compute_regs == prog.compute_regs
        for g, h in zip(prog.gates, clone.gates):
            assert g.kind == h.kind and g.src == h.src and g.dst == h.dst
            assert g.scale == h.scale and g.eta == h.eta and g.poly == h.poly
            if g.matrix is not None:
                assert np.array_equal(g.matrix, h.matrix)
        # serialization is stable through a second round trip
        assert clone.to_json() == FeedforwardProgram.from_json(clone.to_json()).to_json()

    def test_gate_unitarity_small_supports(self):
        # every gate preserves the norm on a random joint state (dim <= 64)
        prog = self._random_program()
        names = ["p1", "p2", "c1", "c2", "q"]
        specs = [prog.registers[n] for n in names]
        st = random_state(names, specs, 13)
        for gate in prog.gates:
            apply_gate(st, gate)
            assert st.norm == pytest.approx(1.0, abs=1e-9)


class TestPhaseKickback:
    def test_adder_kicks_control_momentum(self):
        # Ad[adder](Pi_C) = Pi_C - Pi_T on Gaussian pairs
        specs = [QuditSpec(63, -8, 8)] * 2
        st = product_gaussian_state(["c", "t"], specs,
                                    [GaussianPointer(0.0, 0.2, 1.0),
                                     GaussianPointer(1.0, 0.5, 1.0)])
        before = measure_momentum_expectation(st, ["c", "t"])
        apply_adder(st, "c", "t")
        after = measure_momentum_expectation(st, ["c", "t"])
        assert after[0] == pytest.approx(before[0] - before[1], abs=0.03)
        assert after[1] == pytest.approx(before[1], abs=1e-9)

    def test_quantum_gradient_of_square(self):
        # f(Phi) = Phi^2 into a sharp pointer: ctrl momentum shift
        # approx -f'(Phi0) * <Pi_target>
        specs = [QuditSpec(63, -8, 8)] * 2
        st = product_gaussian_state(["c", "t"], specs,
                                    [GaussianPointer(1.2, 0.0, 0.7),
                                     GaussianPointer(0.0, 0.3, 1.2)])
        before = measure_momentum_expectation(st, ["c"])[0]
        apply_adder(st, "c", "t", func="square")
        after = measure_momentum_expectation(st, ["c"])[0]
        p = None
        expected = -2 * 1.2 * 0.3  # -f'(Phi0) * pi_target
        assert after - before == pytest.approx(expected, rel=0.05)
