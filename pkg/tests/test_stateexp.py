"""State exponentiation: exact projector exponentials, the copy-consuming
exponential-swap channel, and the Trotterized mixture exponential."""

import numpy as np
import pytest
import scipy.linalg

from baqprop.hilbert import QubitSpec, WaveState
from baqprop.stateexp import (
    ExpStateBudget,
    exponentiate_batched,
    exponentiate_exact,
    sequential_mixture_exponential,
    trace_distance,
)


def rand_qubit(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


class TestBudget:
    def test_delta_partition(self):
        b = ExpStateBudget(eta=0.6, n_copies=4)
        assert b.delta * b.n_copies == pytest.approx(0.6)
        with pytest.raises(ValueError):
            ExpStateBudget(eta=0.1, n_copies=0)


class TestExactExponential:
    def test_orthogonal_target_unchanged(self):
        st = WaveState(["q"], [QubitSpec()], np.array([0.0, 1.0], dtype=complex))
        exponentiate_exact(st, ["q"], np.array([1.0, 0.0]), eta=0.7)
        assert np.allclose(st.psi, [0.0, 1.0])

    def test_aligned_target_global_phase(self):
        psi = rand_qubit(1)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        exponentiate_exact(st, ["q"], psi, eta=0.7)
        assert np.allclose(st.psi, np.exp(-1j * 0.7) * psi)
        assert np.allclose(np.abs(st.psi) ** 2, np.abs(psi) ** 2)

    def test_matches_dense_expm(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        proj_vec = rng.normal(size=4) + 1j * rng.normal(size=4)
        proj_vec /= np.linalg.norm(proj_vec)
        st = WaveState(["a", "b"], [QubitSpec(), QubitSpec()],
                       v.reshape(2, 2).copy())
        exponentiate_exact(st, ["a", "b"], proj_vec, eta=0.7)
        u = scipy.linalg.expm(-1j * 0.7 * np.outer(proj_vec, proj_vec.conj()))
        assert np.max(np.abs(st.psi.ravel() - u @ v)) < 1e-12

    def test_unitary(self):
        psi = rand_qubit(4)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        exponentiate_exact(st, ["q"], rand_qubit(5), eta=1.3)
        assert st.norm == pytest.approx(1.0, abs=1e-9)


class TestBatchedExponentiation:
    def test_eta_zero_identity(self):
        psi = rand_qubit(6)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        out, report = exponentiate_batched(st, ["q"], [rand_qubit(7)], 0.0, n=3)
        assert report.trace_distance < 1e-12
        assert np.allclose(np.abs(out.psi), np.abs(psi))

    def test_single_small_step_error(self):
        delta = 0.05
        psi, copy = rand_qubit(8), rand_qubit(9)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        _, report = exponentiate_batched(st, ["q"], [copy], delta, n=1)
        assert report.trace_distance < 3 * delta**2

    def test_error_scales_inverse_n(self):
        psi, copy = rand_qubit(10), rand_qubit(11)
        errs = {}
        for n in (5, 10, 20, 40):
            st = WaveState(["q"], [QubitSpec()], psi.copy())
            _, report = exponentiate_batched(st, ["q"], [copy], 0.5, n=n,
                                             rng=np.random.default_rng(0))
            errs[n] = report.trace_distance
        for a, b in ((5, 10), (10, 20), (20, 40)):
            assert 1.0 < errs[a] / errs[b] < 4.0

    def test_monotone_error_statistics(self):
        # error non-increasing in n for >= 90% of 50 seeded trials
        hold = 0
        for trial in range(50):
            psi, copy = rand_qubit(100 + trial), rand_qubit(200 + trial)
            errs = []
            for n in (4, 8, 16):
                st = WaveState(["q"], [QubitSpec()], psi.copy())
                _, report = exponentiate_batched(st, ["q"], [copy], 0.4, n=n,
                                                 rng=np.random.default_rng(1))
                errs.append(report.trace_distance)
            if errs[0] >= errs[1] >= errs[2]:
                hold += 1
        assert hold >= 45

    def test_trajectory_state_is_normalized(self):
        psi, copy = rand_qubit(12), rand_qubit(13)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        out, _ = exponentiate_batched(st, ["q"], [copy], 0.5, n=7,
                                      rng=np.random.default_rng(2))
        assert out.norm == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch(self):
        st = WaveState(["q"], [QubitSpec()], np.array([1.0, 0.0], dtype=complex))
        with pytest.raises(ValueError):
            exponentiate_batched(st, ["q"], [np.ones(3) / np.sqrt(3)], 0.1)

    def test_report_json(self):
        import json
        psi, copy = rand_qubit(14), rand_qubit(15)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        _, report = exponentiate_batched(st, ["q"], [copy], 0.2, n=2)
        doc = json.loads(report.to_json())
        assert set(doc) == {"eta", "n", "trace_distance"}


class TestSequentialMixture:
    def test_single_state_exact(self):
        psi, proj = rand_qubit(16), rand_qubit(17)
        st1 = WaveState(["q"], [QubitSpec()], psi.copy())
        st2 = WaveState(["q"], [QubitSpec()], psi.copy())
        sequential_mixture_exponential(st1, ["q"], [proj], eta=0.8, sweeps=1)
        exponentiate_exact(st2, ["q"], proj, eta=0.8)
        assert np.allclose(st1.psi, st2.psi, atol=1e-12)

    def test_orthogonal_states_exact(self):
        e0 = np.array([1.0, 0.0], dtype=complex)
        e1 = np.array([0.0, 1.0], dtype=complex)
        psi = rand_qubit(18)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        sequential_mixture_exponential(st, ["q"], [e0, e1], eta=0.9, sweeps=1)
        mix = 0.5 * (np.outer(e0, e0.conj()) + np.outer(e1, e1.conj()))
        exact = scipy.linalg.expm(-1j * 0.9 * mix) @ psi
        assert np.max(np.abs(st.psi - exact)) < 1e-12

    def test_error_halves_with_sweeps(self):
        # expm-of-mixture oracle; two non-orthogonal qubit states
        a = np.array([1.0, 0.0], dtype=complex)
        b = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        mix = 0.5 * (np.outer(a, a.conj()) + np.outer(b, b.conj()))
        psi = rand_qubit(19)
        exact = scipy.linalg.expm(-1j * 1.2 * mix) @ psi
        errs = []
        for sweeps in (1, 2, 4):
            st = WaveState(["q"], [QubitSpec()], psi.copy())
            sequential_mixture_exponential(st, ["q"], [a, b], eta=1.2,
                                           sweeps=sweeps)
            errs.append(np.max(np.abs(st.psi - exact)))
        assert 1.0 < errs[0] / errs[1] < 4.0
        assert 1.0 < errs[1] / errs[2] < 4.0

    def test_unitarity(self):
        psi = rand_qubit(20)
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        sequential_mixture_exponential(st, ["q"], [rand_qubit(21),
                                                   rand_qubit(22)],
                                       eta=0.7, sweeps=3)
        assert st.norm == pytest.approx(1.0, abs=1e-9)


class TestTraceDistance:
    def test_orthogonal_pure_states(self):
        r0 = np.diag([1.0, 0.0]).astype(complex)
        r1 = np.diag([0.0, 1.0]).astype(complex)
        assert trace_distance(r0, r1) == pytest.approx(1.0)
        assert trace_distance(r0, r0) == pytest.approx(0.0)
