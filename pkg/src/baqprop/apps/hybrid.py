"""Hybrid quantum-classical training: a parametrized inverse-QFT circuit on
the quantum side feeds Z-expectation readouts into a single-ReLU-neuron
classical network that decodes the Fourier-basis label.

Per datum, the classical net backpropagates the squared error to its inputs;
that input gradient g becomes a linear phase kick exp(-i*eta*g.z) on the
quantum side (first-order interface), driving MoMGrad on the three
controlled-phase parameters while the classical weights take an SGD step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import FeedforwardProgram, GateOp
from ..hilbert import QubitSpec, QuditSpec
from ..optim import CircuitKick, OptState, momgrad_step
from ..qfb import LossSpec
from ..runtime import substream
from .classical_net import ClassicalNet

__all__ = ["HybridConfig", "qft_matrix", "build_hybrid_program",
           "hybrid_readout", "exact_phase_targets", "exact_readout_net",
           "run_hybrid"]

HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SWAP2Q = np.array([[1, 0, 0, 0], [0, 0, 1, 0],
                   [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
SWAP02 = np.zeros((8, 8))
for _idx in range(8):
    _b0, _b2 = _idx & 1, (_idx >> 2) & 1
    SWAP02[(_idx & 0b010) | (_b0 << 2) | _b2, _idx] = 1

# controlled-phase generator: R(phi) = e^{+i phi pi/4} on the |11> subspace
P11 = np.diag([0.0, 0.0, 0.0, 1.0]).astype(complex)
CR_SCALE = -np.pi / 4.0


@dataclass(frozen=True)
class HybridConfig:
    d: int = 7
    a: float = -3.0
    b: float = 3.0
    iterations: int = 60
    eta: float = 0.15


CANONICAL_PHASES = np.array([-2.0, -2.0, -1.0])  # -pi/2, -pi/2, -pi/4 on the pi/4 scale


def exact_phase_targets() -> np.ndarray:
    """Residual controlled-phase parameters realizing the exact inverse QFT.

    The skeleton carries the canonical decomposition's phases (-pi/2, -pi/2,
    -pi/4) as fixed gates and each parameter multiplies its rotation by the
    residual R(phi); the exact circuit therefore sits at phi = 0, within
    reach of the N(0, 0.5^2) initialization.
    """
    return np.zeros(3)


def qft_matrix() -> np.ndarray:
    """3-qubit QFT, little-endian bits: F|j> = 8^-1/2 sum_m e^{2 pi i jm/8}|m>."""
    j = np.arange(8)
    return np.exp(2j * np.pi * np.outer(j, j) / 8.0) / np.sqrt(8.0)


def _prep_unitary(vec: np.ndarray) -> np.ndarray:
    """A unitary with first column vec (maps |000> to vec)."""
    a = np.eye(8, dtype=complex)
    a[:, 0] = vec
    q, _ = np.linalg.qr(a)
    corr = np.vdot(q[:, 0], vec)
    q[:, 0] = q[:, 0] * corr
    return q


def _cp_matrix(phi_quarter_pi: float) -> np.ndarray:
    """diag(1,1,1,e^{i*phi*pi/4}) on a control/target qubit pair."""
    return np.diag([1.0, 1.0, 1.0,
                    np.exp(1j * phi_quarter_pi * np.pi / 4.0)]).astype(complex)


def build_hybrid_program(cfg: HybridConfig, j: int) -> FeedforwardProgram:
    """Input prep to F|j> followed by the parametrized inverse-QFT skeleton.

    Skeleton (fixed Hadamards, bit-reversal swap, and the canonical
    controlled phases -pi/2, -pi/2, -pi/4, in canonical order): SWAP(q0,q2),
    H(q0), CP*R(h1) on (q0,q1), H(q1), CP*R(h3) on (q0,q2), CP*R(h2) on
    (q1,q2), H(q2). Each parameter multiplies its canonical rotation by the
    residual R(phi) = |0><0| + e^{i*phi*pi/4}|1><1|, so the exact inverse
    QFT sits at (h1,h2,h3) = 0.
    """
    spec = QuditSpec(cfg.d, cfg.a, cfg.b)
    registers = {"h1": spec, "h2": spec, "h3": spec,
                 "q0": QubitSpec(), "q1": QubitSpec(), "q2": QubitSpec()}
    psi_in = qft_matrix()[:, j]
    gates = [
        GateOp("fixed_unitary", targets=("q0", "q1", "q2"),
               matrix=_prep_unitary(psi_in)),
        GateOp("fixed_unitary", targets=("q0", "q2"), matrix=SWAP2Q),
        GateOp("fixed_unitary", targets=("q0",), matrix=HAD),
        GateOp("fixed_unitary", targets=("q0", "q1"),
               matrix=_cp_matrix(CANONICAL_PHASES[0])),
        GateOp("param_exponential", src="h1", targets=("q0", "q1"),
               matrix=P11, scale=CR_SCALE),
        GateOp("fixed_unitary", targets=("q1",), matrix=HAD),
        GateOp("fixed_unitary", targets=("q0", "q2"),
               matrix=_cp_matrix(CANONICAL_PHASES[2])),
        GateOp("param_exponential", src="h3", targets=("q0", "q2"),
               matrix=P11, scale=CR_SCALE),
        GateOp("fixed_unitary", targets=("q1", "q2"),
               matrix=_cp_matrix(CANONICAL_PHASES[1])),
        GateOp("param_exponential", src="h2", targets=("q1", "q2"),
               matrix=P11, scale=CR_SCALE),
        GateOp("fixed_unitary", targets=("q2",), matrix=HAD),
    ]
    return FeedforwardProgram(gates=gates, param_regs=["h1", "h2", "h3"],
                              compute_regs=["q0", "q1", "q2"],
                              registers=registers)


def _skeleton_unitary(params) -> np.ndarray:
    h1, h2, h3 = np.asarray(params) + CANONICAL_PHASES

    def kron_le(ops):
        out = np.array([[1.0 + 0j]])
        for op in ops:
            out = np.kron(op, out)
        return out

    def h_on(k):
        ops = [np.eye(2, dtype=complex)] * 3
        ops[k] = HAD
        return kron_le(ops)

    def cr(jq, kq, phi):
        u = np.eye(8, dtype=complex)
        for idx in range(8):
            if (idx >> jq) & 1 and (idx >> kq) & 1:
                u[idx, idx] = np.exp(1j * phi * np.pi / 4.0)
        return u

    u = np.eye(8, dtype=complex)
    for g in (SWAP02, h_on(0), cr(0, 1, h1), h_on(1), cr(0, 2, h3),
              cr(1, 2, h2), h_on(2)):
        u = g @ u
    return u


def hybrid_readout(params, j: int) -> np.ndarray:
    """(<Z0>, <Z1>, <Z2>) after feeding F|j> through the skeleton at the
    (classical) parameter values; exact expectations."""
    psi = _skeleton_unitary(params) @ qft_matrix()[:, j]
    probs = np.abs(psi) ** 2
    idx = np.arange(8)
    return np.array([probs @ (1.0 - 2.0 * ((idx >> k) & 1)) for k in range(3)])


def exact_readout_net() -> ClassicalNet:
    """Weights decoding j = sum_k 2^(k-1) (1 - <Z_k>): w_k = -2^(k-1), b = 3.5."""
    return ClassicalNet(weights=[-0.5, -1.0, -2.0], bias=3.5)


def hybrid_mse(params, net: ClassicalNet) -> float:
    """Mean squared error of the decoded label over all eight basis data."""
    errs = [(net.forward(hybrid_readout(params, j)) - j) ** 2 for j in range(8)]
    return float(np.mean(errs))


def run_hybrid(seed: int, iterations: int | None = None,
               eta: float | None = None, shots: int | None = None):
    """Stochastic per-datum hybrid training; returns (trace, result).

    Per step: exact Z readouts at the quantum pointer means feed the classical
    net; its input gradient becomes the linear kick for one MoMGrad update of
    the circuit parameters (eta = 0.15 both sides, width 0.65 * 0.98^j,
    means from N(0, 0.5^2)); the net itself takes an SGD step.
    """
    cfg = HybridConfig(iterations=iterations or 60,
                       eta=eta if eta is not None else 0.15)
    its = cfg.iterations
    init_rng = substream(seed, "init")
    data_rng = substream(seed, "data")
    shot_rng = substream(seed, "shots") if shots else None

    phi0 = init_rng.normal(0.0, 0.5, size=3)
    net = ClassicalNet(weights=init_rng.normal(0.0, 0.5, size=3), bias=0.0)

    spec = QuditSpec(cfg.d, cfg.a, cfg.b)
    specs = [spec] * 3
    opt = OptState(params=["h1", "h2", "h3"], specs=specs,
                   phi0=phi0.copy(), pi0=np.zeros(3))
    programs = [build_hybrid_program(cfg, j) for j in range(8)]

    order = []
    for k in range(its):
        if not order:
            order = list(data_rng.permutation(8))
        j = int(order.pop(0))
        z = hybrid_readout(opt.phi0, j)
        g = net.input_gradient(z, target=float(j))
        loss = LossSpec(kind="pauli_Z_polynomial", targets=("q0", "q1", "q2"),
                        terms=((float(g[0]), ("q0",)),
                               (float(g[1]), ("q1",)),
                               (float(g[2]), ("q2",))))
        momgrad_step(opt, [CircuitKick(programs[j], loss)], cfg.eta, 1.0,
                     0.65 * 0.98 ** k, shots=shots, rng=shot_rng,
                     discard_momentum=True)
        net.sgd_update(z, target=float(j), lr=cfg.eta)
        opt.trace[-1]["metric"] = hybrid_mse(opt.phi0, net)

    result = {"final_phi0": opt.phi0.tolist(),
              "final_weights": net.weights.tolist(),
              "final_bias": net.bias,
              "final_mse": opt.trace[-1]["metric"]}
    return opt.trace, result
