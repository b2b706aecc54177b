"""XOR on a 2-2-1 quantum-coherent ReLU network with in-situ activations.

Nine d=7 parameter registers (4 first-layer weights, 2 hidden biases, 2
second-layer weights, 1 output bias) feed two hidden neurons and one output
register. The first layer adds weights conditioned on the classical input
bits, the second layer shifts the output by relu(hidden) * weight, and the
loss compares the output's sign against the XOR label. All gates permute
basis states, so training runs on the diagonal fast path: one cost table
over the 7^9 parameter grid replaces explicit neuron registers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..circuit import FeedforwardProgram, GateOp
from ..hilbert import GaussianPointer, QuditSpec, product_gaussian_state
from ..optim import OptState, momgrad_step, qdd_step
from ..qfb import (
    DiagonalCost,
    LossSpec,
    classical_value_indices,
    contract_table,
    pointer_prob_vectors,
)
from ..runtime import substream

__all__ = ["XorNetConfig", "build_xor_program", "xor_output_value",
           "xor_decision_grid", "run_xor", "XOR_DATA"]

XOR_DATA = [((0, 0), 0), ((0, 1), 1), ((1, 0), 1), ((1, 1), 0)]

PARAM_ORDER = ("W1_00", "W1_01", "W1_10", "W1_11", "b1_0", "b1_1",
               "W2_0", "W2_1", "b2")


@dataclass(frozen=True)
class XorNetConfig:
    """2-2-1 architecture on d=7 signed unit grids; 9 parameters total."""

    d: int = 7
    a: float = -3.0
    b: float = 3.0
    iterations: int = 30

    @property
    def spec(self) -> QuditSpec:
        return QuditSpec(self.d, self.a, self.b)

    @property
    def param_names(self) -> tuple:
        return PARAM_ORDER


def build_xor_program(cfg: XorNetConfig, x) -> tuple[FeedforwardProgram, LossSpec]:
    """Feedforward program and per-datum loss for classical input bits x.

    Layer 1: classically-controlled weight adders plus bias adders into the
    hidden neurons; layer 2: relu-projected neuron values times the second
    layer weights into the output, plus the output bias. The loss is the
    squared difference between the output-positivity bit and the label.
    """
    if cfg.d % 2 == 0:
        raise ValueError("the positivity projector needs an odd grid (0 on-grid)")
    spec = cfg.spec
    registers = {n: spec for n in cfg.param_names}
    registers.update({"a1_0": spec, "a1_1": spec, "a2": spec})
    gates = []
    for k in (0, 1):
        for j in (0, 1):
            gates.append(GateOp("adder", src=f"W1_{j}{k}", dst=f"a1_{k}",
                                scale=float(x[j])))
        gates.append(GateOp("adder", src=f"b1_{k}", dst=f"a1_{k}"))
    for j in (0, 1):
        gates.append(GateOp("multiplier_adder", src=f"a1_{j}", src2=f"W2_{j}",
                            dst="a2", func="relu"))
    gates.append(GateOp("adder", src="b2", dst="a2"))
    program = FeedforwardProgram(
        gates=gates,
        param_regs=list(cfg.param_names),
        compute_regs=["a1_0", "a1_1", "a2"],
        registers=registers,
    )
    y = (x[0] + x[1]) % 2
    positive = (spec.values > 0).astype(float)
    loss = LossSpec(kind="diagonal_grid_function", targets=("a2",),
                    table=(positive - y) ** 2)
    return program, loss


def xor_output_value(cfg: XorNetConfig, params, x) -> float:
    """Output-register position after the feedforward, with the circuit's
    per-gate rounding and modular wraparound, for real parameter values and
    (possibly continuous) inputs."""
    spec = cfg.spec
    p = dict(zip(cfg.param_names, np.asarray(params, dtype=float)))

    def fold(total_shift):
        j = (spec.zero_index + int(total_shift)) % spec.d
        return spec.values[j]

    hidden = []
    for k in (0, 1):
        shift = 0
        for j in (0, 1):
            shift += round(float(x[j]) * p[f"W1_{j}{k}"] / spec.delta)
        shift += round(p[f"b1_{k}"] / spec.delta)
        hidden.append(fold(shift))
    shift = 0
    for j in (0, 1):
        shift += round(max(hidden[j], 0.0) * p[f"W2_{j}"] / spec.delta)
    shift += round(p["b2"] / spec.delta)
    return fold(shift)


def xor_accuracy(cfg: XorNetConfig, params) -> float:
    hits = sum((xor_output_value(cfg, params, x) > 0) == bool(y)
               for x, y in XOR_DATA)
    return hits / len(XOR_DATA)


def xor_decision_grid(cfg: XorNetConfig, params, resolution: int = 41):
    """0/1 decisions over [-0.5, 1.5]^2 at grid-rounded control values."""
    xs = np.linspace(-0.5, 1.5, resolution)
    grid = np.zeros((resolution, resolution), dtype=np.uint8)
    for i, x1 in enumerate(xs):
        for j, x2 in enumerate(xs):
            grid[i, j] = 1 if xor_output_value(cfg, params, (x1, x2)) > 0 else 0
    return xs, grid


@dataclass
class XorTables:
    """Cached per-datum positivity tables and the mean cost table."""

    cfg: XorNetConfig
    step_tables: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    cost: DiagonalCost | None = None

    @classmethod
    def build(cls, cfg: XorNetConfig, dtype=np.float32) -> "XorTables":
        self = cls(cfg)
        full = (cfg.d,) * len(cfg.param_names)
        mean_cost = np.zeros(full, dtype=dtype)
        for x, y in XOR_DATA:
            program, _ = build_xor_program(cfg, x)
            idx = classical_value_indices(program)
            pos = cfg.spec.values[idx["a2"]] > 0
            step = np.ascontiguousarray(np.broadcast_to(pos, full), dtype=dtype)
            self.step_tables.append(step)
            self.labels.append(y)
            mean_cost += (step - dtype(y)) ** 2 / len(XOR_DATA)
        self.cost = DiagonalCost(param_regs=tuple(cfg.param_names), table=mean_cost)
        return self

    def cross_entropy(self, prob_vectors) -> float:
        """Mean cross-entropy between labels and Pr(output > 0) under the
        product pointer distribution described by prob_vectors."""
        eps = 1e-12
        total = 0.0
        for step, y in zip(self.step_tables, self.labels):
            p1 = contract_table(step, prob_vectors)
            p1 = min(max(p1, eps), 1.0 - eps)
            total += -(y * np.log(p1) + (1 - y) * np.log(1.0 - p1))
        return total / len(self.step_tables)


def _xor_schedules(optimizer: str, iterations: int):
    if optimizer == "momgrad":
        etas = np.full(iterations, 0.5)
        gammas = np.full(iterations, 1.0)
        sigmas = 0.95 ** np.arange(iterations)
    elif optimizer == "qdd":
        etas = np.full(iterations, 0.5)
        gammas = 0.5 - 0.1 * (np.arange(iterations) // 5)
        gammas = np.maximum(gammas, 0.0)
        sigmas = np.full(iterations, 1.0)
    else:
        raise ValueError(f"unknown optimizer {optimizer!r} for xor")
    return etas, gammas, sigmas


def run_xor(optimizer: str, seed: int, iterations: int | None = None,
            eta: float | None = None, gamma: float | None = None,
            sigma: float | None = None, shots: int | None = None,
            tables: XorTables | None = None, dtype=np.complex64,
            grid_resolution: int = 41):
    """Train the XOR network; returns (trace records, result dict).

    Hyper-parameters default to the published schedules: eta = 0.5 for both
    optimizers; MoMGrad gamma = 1 with pointer width 0.95^j; QDD kinetic rate
    0.5 - 0.1*floor(j/5) with initial width 1. Initial means are drawn from
    N(0, 0.5^2), initial momenta are zero.
    """
    cfg = XorNetConfig(iterations=iterations or 30)
    if tables is None:
        tables = XorTables.build(cfg)
    its = cfg.iterations
    etas, gammas, sigmas = _xor_schedules(optimizer, its)
    if eta is not None:
        etas = np.full(its, eta)
    if gamma is not None:
        gammas = np.full(its, gamma)
    if sigma is not None:
        sigmas = np.full(its, sigma)

    init_rng = substream(seed, "init")
    shot_rng = substream(seed, "shots")
    phi0 = init_rng.normal(0.0, 0.5, size=len(cfg.param_names))
    specs = [cfg.spec] * len(cfg.param_names)
    opt = OptState(params=list(cfg.param_names), specs=specs,
                   phi0=phi0.copy(), pi0=np.zeros(len(cfg.param_names)))
    if optimizer == "qdd":
        pointers = [GaussianPointer(p, 0.0, sigmas[0]) for p in phi0]
        opt.state = product_gaussian_state(opt.params, specs, pointers, dtype=dtype)

    items = [tables.cost]
    eps_probs = None
    for k in range(its):
        if optimizer == "momgrad":
            momgrad_step(opt, items, etas[k], gammas[k], sigmas[k], dtype=dtype,
                         shots=shots, rng=shot_rng if shots else None)
            sig_rec = opt.trace[-1]["sigma"]
        else:
            qdd_step(opt, items, etas[k], gammas[k], dtype=dtype)
            sig_rec = opt.trace[-1]["sigma"]
        pointers = [GaussianPointer(p, 0.0, s)
                    for p, s in zip(opt.phi0, np.broadcast_to(sig_rec, (9,)))]
        eps_probs = pointer_prob_vectors(specs, pointers)
        opt.trace[-1]["metric"] = tables.cross_entropy(eps_probs)

    xs, grid = xor_decision_grid(cfg, opt.phi0, resolution=grid_resolution)
    result = {
        "final_phi0": opt.phi0.tolist(),
        "final_cross_entropy": opt.trace[-1]["metric"],
        "accuracy": xor_accuracy(cfg, opt.phi0),
        "decision_axis": xs.tolist(),
        "decision_grid": grid.tolist(),
    }
    return opt.trace, result
