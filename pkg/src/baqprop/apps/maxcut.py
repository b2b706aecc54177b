"""QAOA Max-Cut on the 6-vertex path graph with quantum-parametrized angles.

P=2 alternating cost/mixer exponentials on |+>^6 give four d=7 parameter
registers (153,664 amplitudes total). The loss is the negative cut-size
Hamiltonian; training maximizes the expected cut. A classical Nelder-Mead
run over the same exact-expectation feedforward serves as the baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..circuit import FeedforwardProgram, GateOp
from ..hilbert import GaussianPointer, QubitSpec, QuditSpec, WaveState, product_gaussian_state
from ..optim import CircuitKick, OptState, momgrad_step, nelder_mead, qdd_step
from ..qfb import LossSpec
from ..runtime import substream

__all__ = ["MaxCutProblem", "build_maxcut_program", "cut_sizes",
           "maxcut_feedforward", "prob_near_optimal", "run_maxcut"]

PATH_EDGES = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5))


@dataclass(frozen=True)
class MaxCutProblem:
    """Six vertices on a path; cut Hamiltonian sum over edges of (1 - Z Z)/2."""

    n_vertices: int = 6
    edges: tuple = PATH_EDGES
    p_layers: int = 2
    d: int = 7
    a: float = -3.0
    b: float = 3.0

    @property
    def max_cut(self) -> int:
        return len(self.edges)

    @property
    def n_params(self) -> int:
        return 2 * self.p_layers


def cut_sizes(problem: MaxCutProblem) -> np.ndarray:
    """Cut value of every bitstring (little-endian bit k = vertex k)."""
    n = problem.n_vertices
    bits = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    out = np.zeros(2**n)
    for j, k in problem.edges:
        out += bits[:, j] != bits[:, k]
    return out


def _hamiltonians(problem: MaxCutProblem):
    n = problem.n_vertices
    hc = np.diag(cut_sizes(problem)).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    hm = np.zeros((2**n, 2**n), dtype=complex)
    for q in range(n):
        op = 1
        for k in range(n):
            op = np.kron(x if k == q else np.eye(2), op)
        hm += op
    return hc, hm


def build_maxcut_program(problem: MaxCutProblem | None = None):
    """Parametrized QAOA circuit and the negative-cut loss.

    Qubit axes are little-endian (qubit k = vertex k = bit of weight 2^k) and
    the Hamiltonian matrices index bitstrings accordingly.
    """
    problem = problem or MaxCutProblem()
    spec = QuditSpec(problem.d, problem.a, problem.b)
    qubits = [f"q{k}" for k in range(problem.n_vertices)]
    params = [f"phi{i+1}" for i in range(problem.n_params)]
    registers = {p: spec for p in params}
    registers.update({q: QubitSpec() for q in qubits})

    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    hc, hm = _hamiltonians(problem)
    gates = [GateOp("fixed_unitary", targets=(q,), matrix=had) for q in qubits]
    for layer in range(problem.p_layers):
        gates.append(GateOp("param_exponential", src=params[2 * layer],
                            targets=tuple(qubits), matrix=hc))
        gates.append(GateOp("param_exponential", src=params[2 * layer + 1],
                            targets=tuple(qubits), matrix=hm))
    program = FeedforwardProgram(gates=gates, param_regs=params,
                                 compute_regs=qubits, registers=registers)
    # L = -H_C = -|E|/2 + sum over edges of Z_j Z_k / 2
    terms = [(-0.5 * len(problem.edges), ())]
    terms += [(0.5, (f"q{j}", f"q{k}")) for j, k in problem.edges]
    loss = LossSpec(kind="pauli_Z_polynomial", targets=tuple(qubits),
                    terms=tuple(terms))
    return program, loss


def maxcut_feedforward(problem: MaxCutProblem, params) -> np.ndarray:
    """Output statevector of the QAOA circuit at classical parameter values."""
    hc, hm = _hamiltonians(problem)
    n = problem.n_vertices
    psi = np.full(2**n, 1.0 / np.sqrt(2**n), dtype=complex)
    params = np.asarray(params, dtype=float)
    cut = cut_sizes(problem)
    for layer in range(problem.p_layers):
        psi = np.exp(-1j * params[2 * layer] * cut) * psi
        psi = scipy.linalg.expm(-1j * params[2 * layer + 1] * hm) @ psi
    return psi


def prob_near_optimal(problem: MaxCutProblem, params,
                      threshold: int | None = None) -> float:
    """Pr(cut size >= threshold) at the exact-expectation feedforward."""
    threshold = threshold if threshold is not None else problem.max_cut - 1
    psi = maxcut_feedforward(problem, params)
    return float(np.sum(np.abs(psi) ** 2 * (cut_sizes(problem) >= threshold)))


def expected_cut(problem: MaxCutProblem, params) -> float:
    psi = maxcut_feedforward(problem, params)
    return float(np.sum(np.abs(psi) ** 2 * cut_sizes(problem)))


def run_maxcut(optimizer: str, seed: int, iterations: int | None = None,
               eta: float | None = None, gamma: float | None = None,
               sigma: float | None = None, shots: int | None = None):
    """Train the P=2 QAOA angles; returns (trace records, result dict).

    Published schedules: eta = 0.35, kinetic rate 0.98^j / 4 for both
    optimizers, initial width 1 with MoMGrad width 0.98^j, means from
    N(0, 0.5^2). The Nelder-Mead baseline minimizes the same exact
    negative-cut expectation; its trace counts objective evaluations.
    """
    problem = MaxCutProblem()
    its = iterations or 25
    init_rng = substream(seed, "init")
    phi0 = init_rng.normal(0.0, 0.5, size=problem.n_params)

    if optimizer == "nelder-mead":
        evals = []

        def objective(x):
            return -expected_cut(problem, x)

        best, val, n_evals = nelder_mead(objective, phi0, step=0.5,
                                         max_evals=its, trace=evals)
        trace = []
        for rec in evals:
            trace.append({
                "iter": rec["eval"], "eta": None, "gamma": None, "sigma": None,
                "grad": None, "phi0": rec["params"], "pi0": None,
                "metric": prob_near_optimal(problem, rec["params"]),
            })
        result = {"final_phi0": [float(v) for v in best],
                  "final_prob_near_optimal": prob_near_optimal(problem, best),
                  "expected_cut": expected_cut(problem, best),
                  "evaluations": n_evals}
        return trace, result

    program, loss = build_maxcut_program(problem)
    spec = program.registers[program.param_regs[0]]
    specs = [spec] * problem.n_params
    etas = np.full(its, eta if eta is not None else 0.35)
    gammas = (np.full(its, gamma) if gamma is not None
              else 0.98 ** np.arange(its) / 4.0)
    sigmas = (np.full(its, sigma) if sigma is not None
              else (0.98 ** np.arange(its) if optimizer == "momgrad"
                    else np.ones(its)))

    opt = OptState(params=list(program.param_regs), specs=specs,
                   phi0=phi0.copy(), pi0=np.zeros(problem.n_params))
    items = [CircuitKick(program, loss)]
    if optimizer == "qdd":
        pointers = [GaussianPointer(p, 0.0, sigmas[0]) for p in phi0]
        state = product_gaussian_state(opt.params, specs, pointers)
        qnames = [f"q{k}" for k in range(problem.n_vertices)]
        qspecs = [QubitSpec()] * problem.n_vertices
        comp = WaveState.from_basis(qnames, qspecs)
        psi = np.multiply.outer(state.psi, comp.psi)
        opt.state = WaveState(opt.params + qnames, specs + qspecs, psi)

    shot_rng = substream(seed, "shots") if shots else None
    for k in range(its):
        if optimizer == "momgrad":
            momgrad_step(opt, items, etas[k], gammas[k], sigmas[k],
                         shots=shots, rng=shot_rng)
        elif optimizer == "qdd":
            qdd_step(opt, items, etas[k], gammas[k])
        else:
            raise ValueError(f"unknown optimizer {optimizer!r}")
        opt.trace[-1]["metric"] = prob_near_optimal(problem, opt.phi0)

    result = {"final_phi0": opt.phi0.tolist(),
              "final_prob_near_optimal": prob_near_optimal(problem, opt.phi0),
              "expected_cut": expected_cut(problem, opt.phi0)}
    return opt.trace, result
