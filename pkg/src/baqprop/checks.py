"""Property/invariant checks behind the ``verify`` command.

Each check returns a CheckResult; the pytest suite asserts them and the CLI
prints one pass/fail line per check. Oracles here are independent of the
code paths they validate (direct sums, dense matrix exponentials, finite
differences of branch-evaluated phase tables).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .circuit import FeedforwardProgram, GateOp, apply_exp_swap, apply_program
from .hilbert import (
    GaussianPointer,
    QubitSpec,
    QuditSpec,
    WaveState,
    delta_kernel,
    delta_kernel_direct,
    measure_momentum_expectation,
    prepare_gaussian,
    product_gaussian_state,
)
from .optim import CircuitKick, camp_kick, sequential_minibatch_kick
from .qfb import (
    DiagonalCost,
    LossSpec,
    effective_phase_grid,
    pointer_prob_vectors,
    qfb_run,
    smoothed_cost,
    smoothed_cost_gradient,
    verify_eta_scaling,
    _attach_compute,
)
from .stateexp import exponentiate_batched, exponentiate_exact

__all__ = ["CheckResult", "all_checks", "run_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_fourier() -> CheckResult:
    """Unitarity of the register DFT and the F^2 parity identity."""
    rng = np.random.default_rng(7)
    worst = 0.0
    for d in (2, 3, 5, 7, 9):
        f = np.exp(-2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
        worst = max(worst, np.max(np.abs(f.conj().T @ f - np.eye(d))))
        spec = QuditSpec(d, 0, d - 1)
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        st = WaveState(["q"], [spec], psi.copy())
        from .hilbert import fourier, inverse_fourier
        fourier(st, "q")
        inverse_fourier(st, "q")
        worst = max(worst, np.max(np.abs(st.psi - psi)))
        # F^2 |j> = |(-j) mod d>
        f2 = f @ f
        for j in range(d):
            expect = np.zeros(d)
            expect[(-j) % d] = 1.0
            worst = max(worst, np.max(np.abs(np.abs(f2[:, j]) - expect)))
    return CheckResult("fourier unitarity and F^2 parity", worst < 1e-9,
                       f"max error {worst:.2e}")


def check_delta_kernel() -> CheckResult:
    """Closed form against the direct d-term sum, 100 random (gamma, d)."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 64))
        gamma = float(rng.uniform(-2 * d, 2 * d))
        worst = max(worst, abs(delta_kernel(gamma, d) - delta_kernel_direct(gamma, d)))
    return CheckResult("delta kernel closed form vs direct sum", worst < 1e-10,
                       f"max |difference| {worst:.2e} over 100 draws")


def check_momentum_calibration() -> CheckResult:
    """Linear phase exp(-i*g*pos) shifts <Pi> by -g within 5% over the
    stated g and sigma ranges, on two grids."""
    worst = 0.0
    for spec in (QuditSpec(7, -3, 3), QuditSpec(15, -4, 4), QuditSpec(63, -8, 8)):
        half = spec.d // 2
        window = spec.momentum_unit * half
        for sigma_cells in (0.7, 1.0, 1.5):
            sigma = sigma_cells * spec.delta
            if 3 * sigma > (spec.b - spec.a) / 2:  # pointer must fit the interval
                continue
            # the kicked momentum distribution must also stay inside the
            # folded window (3 sigma_Pi headroom)
            gmax = min(0.8 * window, window - 3.0 / (2.0 * sigma))
            if gmax <= 0:
                continue
            for g in np.linspace(-gmax, gmax, 7):
                if abs(g) < 1e-6:
                    continue
                st = prepare_gaussian(spec, GaussianPointer(0.0, 0.0, sigma))
                st.psi *= np.exp(-1j * g * spec.values)
                pi = measure_momentum_expectation(st, ["q0"])[0]
                worst = max(worst, abs(pi + g) / abs(g))
    return CheckResult("momentum calibration (-g within 5%)", worst < 0.05,
                       f"worst relative error {worst:.3f}")


def _xor_setup():
    from .apps.xor import XorNetConfig, XorTables
    cfg = XorNetConfig()
    tables = XorTables.build(cfg)
    return cfg, tables


def _gradient_fd_case(program, loss, specs, pointers, eta=0.005,
                      compute_inputs=None, table=None):
    """(quantum gradient, finite-difference oracle) at one pointer position."""
    params = list(program.param_regs)
    state = product_gaussian_state(params, specs, pointers)
    state = _attach_compute(state, program, compute_inputs)
    res = qfb_run(program, loss, eta, state)
    if table is None:
        table = effective_phase_grid(program, loss, compute_inputs,
                                     max_points=20000)
    fd = np.empty(len(params))
    h = 1e-4
    for n in range(len(params)):
        up = list(pointers)
        dn = list(pointers)
        up[n] = GaussianPointer(pointers[n].phi0 + h, pointers[n].pi0,
                                pointers[n].sigma0)
        dn[n] = GaussianPointer(pointers[n].phi0 - h, pointers[n].pi0,
                                pointers[n].sigma0)
        fd[n] = (smoothed_cost(table, specs, up)
                 - smoothed_cost(table, specs, dn)) / (2 * h)
    return res.effective_gradient, fd


def _grad_close(grad, oracle, rel=0.05, abs_floor=0.02):
    err = np.abs(grad - oracle)
    tol = np.maximum(rel * np.abs(oracle), abs_floor)
    return bool(np.all(err <= tol)), float(np.max(err - tol))


def _contained_mu(rng, sigma, half_width=3.0, spread=0.7):
    """Pointer mean with two-sigma containment inside the register.

    The momentum-kick/gradient identity presumes the pointer fits the
    interval (the same containment caveat the position invariants carry);
    a pointer clipped by the boundary measures a boundary-dominated object.
    """
    bound = max(half_width - 2.0 * sigma, 0.25)
    return float(np.clip(rng.normal(0, spread), -bound, bound))


def check_qfb_gradient_fd(positions: int = 5) -> CheckResult:
    """QFB gradient vs central differences of the effective phase grid on all
    four experiment programs, at random contained pointer positions."""
    rng = np.random.default_rng(23)
    failures = []

    # xor: diagonal fast path, gradient vs score oracle (exact lattice d/dmu)
    from .apps.xor import XorNetConfig, XorTables
    from .hilbert import measure_momenta_joint
    cfg, tables = XorNetConfig(), None
    tables = XorTables.build(cfg, dtype=np.float32)
    specs = [cfg.spec] * 9
    for _ in range(positions):
        sig = rng.uniform(0.7, 1.3)
        ptr = [GaussianPointer(_contained_mu(rng, sig), 0.0, sig)
               for _ in range(9)]
        state = product_gaussian_state(list(cfg.param_names), specs, ptr,
                                       dtype=np.complex64)
        eta = 0.05
        state.psi *= np.exp(np.complex64(-1j * eta) * tables.cost.table)
        pi, _ = measure_momenta_joint(state, list(cfg.param_names))
        grad = -pi / eta
        oracle = smoothed_cost_gradient(tables.cost.table, specs, ptr)
        ok, excess = _grad_close(grad, oracle)
        if not ok:
            failures.append(f"xor excess {excess:.4f}")

    # maxcut
    from .apps.maxcut import MaxCutProblem, build_maxcut_program
    program, loss = build_maxcut_program(MaxCutProblem())
    specs4 = [program.registers[p] for p in program.param_regs]
    table = effective_phase_grid(program, loss, max_points=5000)
    for _ in range(positions):
        sigs = [float(rng.uniform(0.7, 1.3)) for _ in range(4)]
        ptr = [GaussianPointer(_contained_mu(rng, s_), 0.0, s_) for s_ in sigs]
        grad, fd = _gradient_fd_case(program, loss, specs4, ptr, table=table)
        ok, excess = _grad_close(grad, fd)
        if not ok:
            failures.append(f"maxcut excess {excess:.4f}")

    # unitary (single datum)
    from .apps.unitary import (UnitaryLearnConfig, build_unitary_program,
                               completion_unitary, sample_bloch_state)
    ucfg = UnitaryLearnConfig()
    psi_in = sample_bloch_state(np.random.default_rng(5))
    v = completion_unitary(sample_bloch_state(np.random.default_rng(6)))
    uprog = build_unitary_program(ucfg, psi_in)
    uloss = LossSpec(kind="projector_onto_state", targets=("q",), sign=-1.0,
                     vector=v @ psi_in)
    specs3 = [uprog.registers[p] for p in uprog.param_regs]
    utable = effective_phase_grid(uprog, uloss, max_points=5000)
    for _ in range(positions):
        sigs = [float(rng.uniform(0.7, 1.3)) for _ in range(3)]
        ptr = [GaussianPointer(_contained_mu(rng, s_), 0.0, s_) for s_ in sigs]
        grad, fd = _gradient_fd_case(uprog, uloss, specs3, ptr, table=utable)
        ok, excess = _grad_close(grad, fd)
        if not ok:
            failures.append(f"unitary excess {excess:.4f}")

    # hybrid (single datum, fixed readout gradient)
    from .apps.hybrid import HybridConfig, build_hybrid_program
    hprog = build_hybrid_program(HybridConfig(), j=5)
    hloss = LossSpec(kind="pauli_Z_polynomial", targets=("q0", "q1", "q2"),
                     terms=((0.8, ("q0",)), (-0.5, ("q1",)), (0.3, ("q2",))))
    hspecs = [hprog.registers[p] for p in hprog.param_regs]
    htable = effective_phase_grid(hprog, hloss, max_points=5000)
    for _ in range(positions):
        sigs = [float(rng.uniform(0.7, 1.3)) for _ in range(3)]
        ptr = [GaussianPointer(_contained_mu(rng, s_), 0.0, s_) for s_ in sigs]
        grad, fd = _gradient_fd_case(hprog, hloss, hspecs, ptr, table=htable)
        ok, excess = _grad_close(grad, fd)
        if not ok:
            failures.append(f"hybrid excess {excess:.4f}")

    return CheckResult("qfb gradient vs finite differences (4 programs)",
                       not failures,
                       "all positions within max(5%, 0.02)" if not failures
                       else "; ".join(failures[:4]))


def check_xor_backprop(points: int = 10) -> CheckResult:
    """XOR weight kicks vs the layerwise score-backprop oracle at random
    parameter grid points (per-datum, 5% with a small absolute floor)."""
    from .apps.xor import XorNetConfig, XorTables
    from .hilbert import measure_momenta_joint
    cfg = XorNetConfig()
    tables = XorTables.build(cfg, dtype=np.float32)
    specs = [cfg.spec] * 9
    rng = np.random.default_rng(31)
    failures = []
    for _ in range(points):
        mu = rng.integers(-2, 3, size=9).astype(float)  # on-grid points
        sig = rng.uniform(0.8, 1.2)
        ptr = [GaussianPointer(m, 0.0, sig) for m in mu]
        state = product_gaussian_state(list(cfg.param_names), specs, ptr,
                                       dtype=np.complex64)
        eta = 0.05
        state.psi *= np.exp(np.complex64(-1j * eta) * tables.cost.table)
        pi, _ = measure_momenta_joint(state, list(cfg.param_names))
        grad = -pi / eta
        oracle = smoothed_cost_gradient(tables.cost.table, specs, ptr)
        ok, excess = _grad_close(grad, oracle, rel=0.05, abs_floor=0.02)
        if not ok:
            failures.append(f"excess {excess:.4f}")
    return CheckResult("xor classical-backprop equivalence",
                       not failures,
                       f"{points} grid points within max(5%, 0.02)"
                       if not failures else "; ".join(failures[:4]))


def check_eta_linearity() -> CheckResult:
    """Diagonal kicks: momentum shift exactly proportional to eta (1%)."""
    spec = QuditSpec(15, -4, 4)  # kicked momenta stay inside the folded window
    prog = FeedforwardProgram(
        gates=[GateOp("adder", src="p", dst="c")],
        param_regs=["p"], compute_regs=["c"],
        registers={"p": spec, "c": spec})
    loss = LossSpec(kind="diagonal_grid_function", targets=("c",),
                    table=spec.values**2)
    report = verify_eta_scaling(prog, loss, [GaussianPointer(1.0, 0.0, 1.0)],
                                [0.4, 0.2, 0.1])
    return CheckResult("exact eta-linearity of diagonal kicks",
                       report.slope_variation < 0.01,
                       f"slope variation {report.slope_variation:.5f}")


def check_eta_remainder() -> CheckResult:
    """Non-diagonal Hermitian loss: O(eta^2) momentum-shift remainder."""
    spec = QuditSpec(7, -3, 3)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    prog = FeedforwardProgram(
        gates=[GateOp("param_exponential", src="p", targets=("q",), matrix=x)],
        param_regs=["p"], compute_regs=["q"],
        registers={"p": spec, "q": QubitSpec()})
    loss = LossSpec(kind="hermitian_matrix", targets=("q",),
                    matrix=0.5 * (z + x))
    report = verify_eta_scaling(prog, loss, [GaussianPointer(1.0, 0.0, 1.0)],
                                [0.4, 0.2, 0.1, 0.05, 0.025])
    return CheckResult("O(eta^2) remainder exponent >= 1.8",
                       report.exponent >= 1.8,
                       f"fitted exponent {report.exponent:.3f}")


def check_camp() -> CheckResult:
    """CAMP server state equals the sequential batch kick to 1e-8."""
    spec = QuditSpec(5, -2, 2)
    pointer = prepare_gaussian(spec, GaussianPointer(0.5, 0.0, 0.8))
    state_seq = WaveState(["p"], [spec], pointer.psi.copy())
    server = WaveState(["p"], [spec], pointer.psi.copy())
    items = [
        DiagonalCost(param_regs=("p",), table=spec.values**2),
        DiagonalCost(param_regs=("p",), table=np.abs(spec.values)),
    ]
    sequential_minibatch_kick(state_seq, items, eta=0.3)
    out = camp_kick(server, items, eta=0.3)
    overlap_err = np.max(np.abs(out.psi.ravel() - state_seq.psi.ravel()))
    return CheckResult("CAMP equals sequential batching",
                       overlap_err < 1e-8, f"max amplitude diff {overlap_err:.2e}")


def check_exp_swap() -> CheckResult:
    """exp_swap against the dense matrix exponential on random two-qubit states."""
    rng = np.random.default_rng(3)
    s = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            s[i * 2 + j, j * 2 + i] = 1.0
    worst = 0.0
    for _ in range(20):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        eta = float(rng.uniform(-1.2, 1.2))
        st = WaveState(["a", "b"], [QubitSpec(), QubitSpec()],
                       v.reshape(2, 2).copy())
        apply_exp_swap(st, "a", "b", eta)
        exact = scipy.linalg.expm(-1j * eta * s) @ v
        worst = max(worst, np.max(np.abs(st.psi.ravel() - exact)))
    return CheckResult("exp-swap vs dense expm", worst < 1e-8,
                       f"max amplitude diff {worst:.2e}")


def check_batched_exponentiation() -> CheckResult:
    """Channel error vs exact exponential scales like 1/n within a factor 2."""
    rng = np.random.default_rng(17)
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    copy = rng.normal(size=2) + 1j * rng.normal(size=2)
    copy /= np.linalg.norm(copy)
    eta = 0.5
    errs = {}
    for n in (5, 10, 20, 40):
        st = WaveState(["q"], [QubitSpec()], psi.copy())
        _, report = exponentiate_batched(st, ["q"], [copy], eta, n=n,
                                         rng=np.random.default_rng(0))
        errs[n] = report.trace_distance
    ratios = [errs[5] / errs[10], errs[10] / errs[20], errs[20] / errs[40]]
    ok = all(1.0 < r < 4.0 for r in ratios) and errs[40] < errs[5]
    return CheckResult("batched state-exponentiation error ~ 1/n",
                       ok, "halving ratios " + ", ".join(f"{r:.2f}" for r in ratios))


def check_classical_embedding_purity() -> CheckResult:
    """Full circuit-level QFB on a small classical-embedding program leaves the
    compute registers pure and exactly restored."""
    from .apps.xor import XorNetConfig, build_xor_program
    spec = QuditSpec(5, -2, 2)
    prog = FeedforwardProgram(
        gates=[GateOp("adder", src="w1", dst="c1"),
               GateOp("multiplier_adder", src="c1", src2="w2", dst="c2",
                      func="relu")],
        param_regs=["w1", "w2"], compute_regs=["c1", "c2"],
        registers={"w1": spec, "w2": spec, "c1": spec, "c2": spec})
    loss = LossSpec(kind="diagonal_grid_function", targets=("c2",),
                    table=(spec.values > 0).astype(float))
    pointers = [GaussianPointer(0.5, 0.0, 0.8), GaussianPointer(-0.4, 0.0, 0.8)]
    state = product_gaussian_state(["w1", "w2"], [spec, spec], pointers)
    state = _attach_compute(state, prog, None)
    res = qfb_run(prog, loss, 0.3, state)
    pur = res.compute_purity
    # compute registers back at position zero exactly
    p1 = res.post_state.probabilities("c1")[spec.zero_index]
    p2 = res.post_state.probabilities("c2")[spec.zero_index]
    ok = abs(pur - 1.0) < 1e-9 and abs(p1 - 1.0) < 1e-9 and abs(p2 - 1.0) < 1e-9
    return CheckResult("classical-embedding QFB purity = 1",
                       ok, f"purity {pur:.12f}, restored mass {min(p1, p2):.12f}")


ALL_CHECKS = [
    check_fourier,
    check_delta_kernel,
    check_momentum_calibration,
    check_qfb_gradient_fd,
    check_xor_backprop,
    check_eta_linearity,
    check_eta_remainder,
    check_camp,
    check_exp_swap,
    check_batched_exponentiation,
    check_classical_embedding_purity,
]


def all_checks():
    return list(ALL_CHECKS)


def run_checks(verbose: bool = True):
    """Run every invariant check; returns the list of CheckResults."""
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for fn in ALL_CHECKS:
            res = fn()
            results.append(res)
            if verbose:
                mark = "PASS" if res.passed else "FAIL"
                print(f"[{mark}] {res.name}: {res.detail}", flush=True)
    return results
