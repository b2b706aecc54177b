"""Supervised single-qubit unitary learning via projector phase kicks.

A three-parameter rotation chain Rx(phi1) Ry(phi2) Rz(phi3) (full-angle
generators, three d=7 registers) is trained on Bloch-uniform input states
against outputs of a hidden unitary V; each datum's loss is the negative
projector onto its target state, exponentiated exactly, and minibatches of
ten fresh samples are kicked sequentially per iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import FeedforwardProgram, GateOp
from ..hilbert import GaussianPointer, QubitSpec, QuditSpec, WaveState, product_gaussian_state
from ..optim import CircuitKick, OptState, momgrad_step, qdd_step
from ..qfb import LossSpec
from ..runtime import substream

__all__ = ["UnitaryLearnConfig", "sample_bloch_state", "completion_unitary",
           "ansatz_matrix", "build_unitary_program", "run_unitary_learning"]

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# standard rotation convention: R_a(phi) = exp(-i*phi*sigma_a/2)
ROTATION_GENERATORS = {k: v / 2.0 for k, v in PAULI.items()}


@dataclass(frozen=True)
class UnitaryLearnConfig:
    d: int = 7
    a: float = -3.0
    b: float = 3.0
    minibatch: int = 10
    holdout: int = 32
    iterations: int = 40


def sample_bloch_state(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform pure qubit state (uniform on the Bloch sphere)."""
    u = rng.uniform(-1.0, 1.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    theta = np.arccos(u)
    return np.array([np.cos(theta / 2.0),
                     np.exp(1j * phase) * np.sin(theta / 2.0)])


def completion_unitary(target: np.ndarray) -> np.ndarray:
    """A unitary V with V|0> = target."""
    c, s = target
    return np.array([[c, -np.conj(s)], [s, np.conj(c)]])


def ansatz_matrix(params) -> np.ndarray:
    """Rz(p3) Ry(p2) Rx(p1) as an operator product (Rx applied first),
    with the standard half-angle generators exp(-i*phi*sigma/2)."""
    p1, p2, p3 = params
    u = np.eye(2, dtype=complex)
    for phi, axis in zip((p1, p2, p3), ("x", "y", "z")):
        w, v = np.linalg.eigh(ROTATION_GENERATORS[axis])
        u = (v * np.exp(-1j * phi * w)) @ v.conj().T @ u
    return u


def build_unitary_program(cfg: UnitaryLearnConfig,
                          psi_in: np.ndarray) -> FeedforwardProgram:
    """Input preparation followed by the three quantum-parametrized rotations."""
    spec = QuditSpec(cfg.d, cfg.a, cfg.b)
    registers = {"phi1": spec, "phi2": spec, "phi3": spec, "q": QubitSpec()}
    gates = [GateOp("fixed_unitary", targets=("q",),
                    matrix=completion_unitary(psi_in))]
    for name, axis in (("phi1", "x"), ("phi2", "y"), ("phi3", "z")):
        gates.append(GateOp("param_exponential", src=name, targets=("q",),
                            matrix=ROTATION_GENERATORS[axis]))
    return FeedforwardProgram(gates=gates, param_regs=["phi1", "phi2", "phi3"],
                              compute_regs=["q"], registers=registers)


def mean_fidelity(params, v_target: np.ndarray, holdout_states) -> float:
    u = ansatz_matrix(params)
    fids = [np.abs(np.vdot(v_target @ psi, u @ psi)) ** 2 for psi in holdout_states]
    return float(np.mean(fids))


def run_unitary_learning(optimizer: str, seed: int,
                         iterations: int | None = None,
                         eta: float | None = None, gamma: float | None = None,
                         sigma: float | None = None, shots: int | None = None):
    """Train toward a random hidden unitary; returns (trace, result).

    Published schedules: eta = 0.2 for both optimizers, initial width 0.9,
    means from N(0, 0.5^2), QDD kinetic rate 0.2 * 0.98^j. The MoMGrad
    kinetic rate, width schedule, and momentum policy are unstated in the
    source; this driver uses the classical-update-rule variant (momentum
    re-zeroed each iteration) with a constant kinetic rate 3 and width
    0.9 * 0.98^j, which reproduces the published convergence. The metric is
    mean fidelity over a held-out sample set.
    """
    cfg = UnitaryLearnConfig(iterations=iterations or 40)
    its = cfg.iterations
    init_rng = substream(seed, "init")
    data_rng = substream(seed, "data")
    shot_rng = substream(seed, "shots") if shots else None

    v_target = completion_unitary(sample_bloch_state(init_rng))
    holdout = [sample_bloch_state(data_rng) for _ in range(cfg.holdout)]
    phi0 = init_rng.normal(0.0, 0.5, size=3)

    spec = QuditSpec(cfg.d, cfg.a, cfg.b)
    specs = [spec] * 3
    etas = np.full(its, eta if eta is not None else 0.2)
    if gamma is not None:
        gammas = np.full(its, gamma)
    elif optimizer == "momgrad":
        gammas = np.full(its, 3.0)
    else:
        gammas = 0.2 * 0.98 ** np.arange(its)
    if sigma is not None:
        sigmas = np.full(its, sigma)
    elif optimizer == "momgrad":
        sigmas = 0.9 * 0.98 ** np.arange(its)
    else:
        sigmas = np.full(its, 0.9)

    opt = OptState(params=["phi1", "phi2", "phi3"], specs=specs,
                   phi0=phi0.copy(), pi0=np.zeros(3))
    if optimizer == "qdd":
        pointers = [GaussianPointer(p, 0.0, sigmas[0]) for p in phi0]
        pstate = product_gaussian_state(opt.params, specs, pointers)
        comp = WaveState.from_basis(["q"], [QubitSpec()])
        opt.state = WaveState(opt.params + ["q"], specs + [QubitSpec()],
                              np.multiply.outer(pstate.psi, comp.psi))

    for k in range(its):
        items = []
        for _ in range(cfg.minibatch):
            psi_in = sample_bloch_state(data_rng)
            psi_out = v_target @ psi_in
            program = build_unitary_program(cfg, psi_in)
            loss = LossSpec(kind="projector_onto_state", targets=("q",),
                            sign=-1.0, vector=psi_out)
            items.append(CircuitKick(program, loss))
        if optimizer == "momgrad":
            momgrad_step(opt, items, etas[k], gammas[k], sigmas[k],
                         shots=shots, rng=shot_rng, discard_momentum=True)
        elif optimizer == "qdd":
            qdd_step(opt, items, etas[k], gammas[k])
        else:
            raise ValueError(f"unknown optimizer {optimizer!r}")
        opt.trace[-1]["metric"] = mean_fidelity(opt.phi0, v_target, holdout)

    result = {"final_phi0": opt.phi0.tolist(),
              "final_fidelity": opt.trace[-1]["metric"]}
    return opt.trace, result
