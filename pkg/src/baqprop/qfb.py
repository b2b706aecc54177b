"""The feedforward / phase-kick / uncompute kernel and its diagnostics.

qfb_run conjugates an exponentiated loss by a feedforward program and reads
the parameter-register momentum shifts, which estimate the cost gradient to
first order in the kicking rate. For programs that embed a classical
computation (basis-permuting gates, diagonal loss) the whole kernel collapses
to a diagonal phase over the parameter grid; effective_phase_grid builds that
table so large parameter spaces never need explicit compute registers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .circuit import (
    VALUE_FUNCS,
    FeedforwardProgram,
    apply_diagonal_phase,
    apply_fixed_unitary,
    apply_program,
)
from .hilbert import (
    GaussianPointer,
    QuditSpec,
    WaveState,
    measure_momentum_expectation,
    product_gaussian_state,
)
from .stateexp import exponentiate_exact

__all__ = [
    "LossSpec",
    "QFBResult",
    "DiagonalCost",
    "qfb_apply",
    "qfb_run",
    "effective_phase_grid",
    "pointer_prob_vectors",
    "contract_table",
    "smoothed_cost",
    "smoothed_cost_gradient",
    "verify_eta_scaling",
    "EtaScalingReport",
]


@dataclass(frozen=True)
class LossSpec:
    """Descriptor of the exponentiated loss operator.

    kind selects the payload:
      diagonal_grid_function: ``table`` over the joint grid of ``targets``
      projector_onto_state:   ``vector`` on the joint targets (rank-1)
      hermitian_matrix:       dense ``matrix`` on the joint targets
      pauli_Z_polynomial:     ``terms`` = ((coeff, (qubit names...)), ...)
    ``sign`` multiplies the operator (-1 gives e.g. the negative projector
    used for fidelity ascent).
    """

    kind: str
    targets: tuple
    sign: float = 1.0
    table: np.ndarray | None = None
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None
    terms: tuple = ()

    def __post_init__(self):
        if self.kind == "hermitian_matrix":
            m = np.asarray(self.matrix)
            if np.max(np.abs(m - m.conj().T)) > 1e-9:
                raise ValueError("hermitian loss payload fails Hermiticity (1e-9)")
        if self.kind == "projector_onto_state":
            v = np.asarray(self.vector)
            if abs(np.linalg.norm(v.ravel()) - 1.0) > 1e-9:
                raise ValueError("projector payload must be normalized")

    def is_diagonal(self) -> bool:
        return self.kind in ("diagonal_grid_function", "pauli_Z_polynomial")

    def _z_table(self, state: WaveState) -> np.ndarray:
        dims = tuple(state.spec(n).dim for n in self.targets)
        out = np.zeros(dims)
        for coeff, regs in self.terms:
            factor = np.ones(dims)
            for r in regs:
                ax = self.targets.index(r)
                z = 1.0 - 2.0 * np.arange(2)
                sh = [1] * len(dims)
                sh[ax] = 2
                factor = factor * z.reshape(sh)
            out = out + coeff * factor
        return out

    def diagonal_table(self, state: WaveState) -> np.ndarray:
        if self.kind == "diagonal_grid_function":
            return self.sign * np.asarray(self.table)
        if self.kind == "pauli_Z_polynomial":
            return self.sign * self._z_table(state)
        raise ValueError(f"{self.kind} is not diagonal")

    def apply_exponential(self, state: WaveState, eta: float) -> WaveState:
        """Apply exp(-i*eta*sign*L) on the loss targets."""
        if eta == 0.0:
            return state
        if self.is_diagonal():
            return apply_diagonal_phase(state, self.targets,
                                        self.diagonal_table(state), eta)
        if self.kind == "projector_onto_state":
            return exponentiate_exact(state, self.targets, self.vector,
                                      eta * self.sign)
        if self.kind == "hermitian_matrix":
            u = scipy.linalg.expm(-1j * eta * self.sign * np.asarray(self.matrix))
            return apply_fixed_unitary(state, self.targets, u)
        raise ValueError(f"unknown loss kind {self.kind!r}")

    def expectation(self, state: WaveState) -> float:
        """Exact <L> on the current state."""
        axes = [state.axis(n) for n in self.targets]
        if self.is_diagonal():
            p = np.abs(state.psi) ** 2
            other = tuple(i for i in range(p.ndim) if i not in axes)
            marg = p.sum(axis=other)
            marg = np.transpose(marg, np.argsort(np.argsort(axes)))
            return float(np.sum(marg * self.diagonal_table(state)))
        if self.kind == "projector_onto_state":
            dim = int(np.prod([state.psi.shape[a] for a in axes]))
            mat = np.moveaxis(state.psi, axes, range(len(axes))).reshape(dim, -1)
            overlap = np.asarray(self.vector).ravel().conj() @ mat
            return float(self.sign * np.sum(np.abs(overlap) ** 2))
        if self.kind == "hermitian_matrix":
            work = WaveState(state.names, state.specs, state.psi.copy())
            apply_fixed_unitary(work, self.targets, np.asarray(self.matrix))
            return float(self.sign * np.real(np.vdot(state.psi, work.psi)))
        raise ValueError(f"unknown loss kind {self.kind!r}")


@dataclass
class QFBResult:
    post_state: WaveState
    momentum_before: np.ndarray
    momentum_after: np.ndarray
    effective_gradient: np.ndarray
    compute_purity: float

    def to_json(self) -> str:
        return json.dumps({
            "momentum_before": self.momentum_before.tolist(),
            "momentum_after": self.momentum_after.tolist(),
            "effective_gradient": self.effective_gradient.tolist(),
            "compute_purity": self.compute_purity,
        })


@dataclass
class DiagonalCost:
    """A loss already reduced to a table over the joint parameter grid."""

    param_regs: tuple
    table: np.ndarray
    _phase_cache: dict = field(default_factory=dict, repr=False)

    def phase(self, eta: float, dtype) -> np.ndarray:
        """exp(-i*eta*table), cached per (eta, dtype); large tables reuse it
        across iterations when the kicking rate is constant."""
        key = (float(eta), np.dtype(dtype).name)
        if key not in self._phase_cache:
            if np.dtype(dtype) == np.complex64:
                ph = np.exp(np.complex64(-1j * eta)
                            * np.asarray(self.table, dtype=np.float32))
            else:
                ph = np.exp(-1j * eta * np.asarray(self.table, dtype=np.float64))
            self._phase_cache.clear()  # keep at most one table in memory
            self._phase_cache[key] = ph
        return self._phase_cache[key]


def qfb_apply(program: FeedforwardProgram, loss: LossSpec, eta: float,
              state: WaveState) -> WaveState:
    """U^dag(params) . exp(-i*eta*L) . U(params), no readouts."""
    if not np.isfinite(eta):
        raise ValueError("kicking rate must be finite")
    for t in loss.targets:
        if t not in program.compute_regs:
            raise ValueError(f"loss target {t} is not a compute register")
    apply_program(state, program)
    loss.apply_exponential(state, eta)
    apply_program(state, program, adjoint=True)
    return state


def qfb_run(program: FeedforwardProgram, loss: LossSpec, eta: float,
            state: WaveState) -> QFBResult:
    """Run one QFB kernel and report momentum shifts and compute purity."""
    before = measure_momentum_expectation(state, program.param_regs)
    qfb_apply(program, loss, eta, state)
    after = measure_momentum_expectation(state, program.param_regs)
    grad = (before - after) / eta if eta != 0.0 else np.zeros_like(before)
    present = [n for n in program.compute_regs if n in state.names]
    purity = state.reduced_purity(present) if present else 1.0
    return QFBResult(post_state=state, momentum_before=before,
                     momentum_after=after, effective_gradient=grad,
                     compute_purity=purity)


# -- effective phase over the parameter grid --------------------------------


def classical_value_indices(program: FeedforwardProgram,
                            compute_inputs: dict | None = None) -> dict:
    """Track compute-register basis indices over the joint parameter grid.

    Every gate must be an adder/multiplier_adder; register contents stay
    computational-basis-valued, so each compute register is an integer index
    array broadcast over the parameter axes, updated with the same rounding
    and wraparound rules as the unitary gates. Returns name -> index array.
    """
    params = list(program.param_regs)
    specs = {n: program.registers[n] for n in program.registers}
    n_axes = len(params)
    grids = {}
    for i, p in enumerate(params):
        sh = [1] * n_axes
        sh[i] = specs[p].d
        grids[p] = specs[p].values.reshape(sh)

    compute_inputs = compute_inputs or {}
    idx = {}
    for c in program.compute_regs:
        start = compute_inputs.get(c, 0.0)
        idx[c] = np.array(specs[c].index_of(start), dtype=np.int64)

    def value_of(reg):
        if reg in grids:
            return grids[reg]
        spec = specs[reg]
        return spec.a + idx[reg] * spec.delta

    for g in program.gates:
        if g.kind == "adder":
            contrib = VALUE_FUNCS[g.func](value_of(g.src)) * g.scale
        elif g.kind == "multiplier_adder":
            contrib = VALUE_FUNCS[g.func](value_of(g.src)) * value_of(g.src2) * g.scale
        else:
            raise ValueError(f"gate kind {g.kind} is not classical-embedding")
        if g.dst in grids:
            raise ValueError("parameter registers cannot be gate targets")
        spec = specs[g.dst]
        shift = np.round(np.asarray(contrib) / spec.delta).astype(np.int64)
        idx[g.dst] = (idx[g.dst] + shift) % spec.d
    return idx


def _classical_phase_table(program: FeedforwardProgram, loss: LossSpec,
                           compute_inputs: dict | None,
                           dtype=np.float64) -> np.ndarray:
    idx = classical_value_indices(program, compute_inputs)
    if loss.kind != "diagonal_grid_function":
        raise ValueError("classical fast path requires a diagonal_grid_function loss")
    payload = np.asarray(loss.table)
    lookup = (idx[loss.targets[0]] if len(loss.targets) == 1
              else tuple(idx[t] for t in loss.targets))
    table = loss.sign * payload[lookup]
    specs = program.registers
    full = tuple(specs[p].d for p in program.param_regs)
    return np.broadcast_to(table, full).astype(dtype)


def effective_phase_grid(program: FeedforwardProgram, loss: LossSpec,
                         compute_inputs: dict | None = None,
                         max_points: int = 200_000,
                         dtype=np.float64) -> np.ndarray:
    """Effective loss value at every joint parameter grid point.

    Returns an array shaped (d_1, ..., d_N) over program.param_regs. For
    classical-embedding programs this is exact and the QFB kernel equals a
    diagonal phase with this table. Otherwise each branch is evaluated by
    running the compute-side circuit with the parameters fixed (bounded by
    ``max_points``).

    ``compute_inputs`` maps compute register names to starting position
    values (classical path) or supplies an input WaveState factor via the
    key "__state__" (quantum path).
    """
    if program.is_classical_embedding() and loss.is_diagonal():
        return _classical_phase_table(program, loss, compute_inputs, dtype)

    params = list(program.param_regs)
    specs = [program.registers[p] for p in params]
    shape = tuple(s.d for s in specs)
    if int(np.prod(shape)) > max_points:
        raise MemoryError(
            f"parameter grid {shape} exceeds the {max_points}-point budget"
        )
    compute_names = list(program.compute_regs)
    compute_specs = [program.registers[c] for c in compute_names]
    base = _compute_input_state(compute_names, compute_specs, compute_inputs)

    out = np.empty(shape, dtype=dtype)
    for idx in np.ndindex(*shape):
        values = {p: s.values[i] for p, s, i in zip(params, specs, idx)}
        cstate = base.copy()
        _apply_classically(cstate, program, values)
        out[idx] = loss.expectation(cstate)
    return out


def _compute_input_state(names, specs, compute_inputs) -> WaveState:
    """Blank compute registers sit at position 0 (qudits) or |0> (qubits)."""
    compute_inputs = compute_inputs or {}
    if "__state__" in compute_inputs:
        psi = np.asarray(compute_inputs["__state__"], dtype=complex)
        return WaveState(names, specs, psi.reshape([s.dim for s in specs]))
    indices = []
    for n, s in zip(names, specs):
        if n in compute_inputs:
            indices.append(s.index_of(compute_inputs[n]))
        else:
            indices.append(s.zero_index if isinstance(s, QuditSpec) else 0)
    return WaveState.from_basis(names, specs, indices)


_EIGH_CACHE: dict = {}


def _cached_eigh(matrix: np.ndarray):
    key = id(matrix)
    if key not in _EIGH_CACHE:
        if len(_EIGH_CACHE) > 64:
            _EIGH_CACHE.clear()
        _EIGH_CACHE[key] = np.linalg.eigh(np.asarray(matrix, dtype=complex))
    return _EIGH_CACHE[key]


def _apply_classically(cstate: WaveState, program: FeedforwardProgram,
                       param_values: dict) -> None:
    """Apply the program to compute registers with parameters fixed."""
    from .circuit import GateOp, apply_gate, apply_phase_estimation

    for g in program.gates:
        if g.kind == "adder":
            if g.src in param_values:
                v = VALUE_FUNCS[g.func](param_values[g.src]) * g.scale
                spec = cstate.spec(g.dst)
                _roll_axis(cstate, g.dst, int(round(v / spec.delta)))
            else:
                apply_gate(cstate, g)
        elif g.kind == "multiplier_adder":
            p1, p2 = g.src in param_values, g.src2 in param_values
            if p1 and p2:
                v = (VALUE_FUNCS[g.func](param_values[g.src])
                     * param_values[g.src2] * g.scale)
                spec = cstate.spec(g.dst)
                _roll_axis(cstate, g.dst, int(round(v / spec.delta)))
            elif p1:
                v = VALUE_FUNCS[g.func](param_values[g.src]) * g.scale
                apply_gate(cstate, GateOp("adder", src=g.src2, dst=g.dst, scale=v))
            elif p2:
                apply_gate(cstate, GateOp("adder", src=g.src, dst=g.dst,
                                          scale=param_values[g.src2] * g.scale,
                                          func=g.func))
            else:
                apply_gate(cstate, g)
        elif g.kind == "param_exponential" and g.src in param_values:
            w, v = _cached_eigh(g.matrix)
            theta = g.scale * param_values[g.src]
            u = (v * np.exp(-1j * theta * w)) @ v.conj().T
            apply_fixed_unitary(cstate, g.targets, u)
        elif g.kind == "phase_estimation" and g.src in param_values:
            apply_phase_estimation(cstate, param_values[g.src], g.dst, g.scale)
        else:
            apply_gate(cstate, g)


def _roll_axis(state: WaveState, reg: str, shift: int) -> None:
    if shift:
        ax = state.axis(reg)
        state.psi = np.roll(state.psi, shift % state.psi.shape[ax], axis=ax)


# -- pointer smoothing utilities ---------------------------------------------


def pointer_prob_vectors(specs, pointers) -> list:
    """Per-register Born distributions of grid-sampled Gaussian pointers."""
    out = []
    for spec, ptr in zip(specs, pointers):
        w = np.exp(-((spec.values - ptr.phi0) ** 2) / (2.0 * ptr.sigma0**2))
        if not np.any(w > 0):
            w = np.zeros(spec.d)
            w[np.argmin(np.abs(spec.values - ptr.phi0))] = 1.0
        out.append(w / w.sum())
    return out


def contract_table(table: np.ndarray, prob_vectors) -> float:
    """sum_Phi table(Phi) * prod_n p_n(Phi_n), contracted axis by axis."""
    acc = table
    vdtype = np.float32 if acc.dtype == np.float32 else np.float64
    for p in prob_vectors:
        acc = np.tensordot(np.asarray(p, dtype=vdtype), acc, axes=([0], [0]))
    return float(acc)


def smoothed_cost(table: np.ndarray, specs, pointers) -> float:
    """Pointer-distribution expectation of a parameter-grid cost table."""
    return contract_table(table, pointer_prob_vectors(specs, pointers))


def smoothed_cost_gradient(table: np.ndarray, specs, pointers) -> np.ndarray:
    """Exact gradient of smoothed_cost w.r.t. the pointer means.

    Uses the score identity d/dmu E[J] = E[J * (Phi_n - E[Phi_n])] / sigma_n^2,
    contracting the cost table layer by layer and reusing forward partials so
    the full table is swept once; this is the lattice version of
    backpropagating the loss through the sampled network.
    """
    probs = pointer_prob_vectors(specs, pointers)
    vdtype = np.float32 if table.dtype == np.float32 else np.float64
    probs = [np.asarray(p, dtype=vdtype) for p in probs]
    scores = []
    for spec, ptr, p in zip(specs, pointers, probs):
        mean = float(p @ spec.values)
        scores.append(((spec.values - mean) / ptr.sigma0**2).astype(vdtype))

    n = len(probs)
    grad = np.empty(n)
    partial = table  # axes n-1 ... contracted from the left as we advance
    for k in range(n):
        # finish the contraction for component k on the current partial
        acc = np.tensordot(probs[k] * scores[k], partial, axes=([0], [0]))
        for p in probs[k + 1:]:
            acc = np.tensordot(p, acc, axes=([0], [0]))
        grad[k] = float(acc)
        partial = np.tensordot(probs[k], partial, axes=([0], [0]))
    return grad


# -- eta scaling --------------------------------------------------------------


@dataclass
class EtaScalingReport:
    etas: np.ndarray
    gradients: np.ndarray
    extrapolated: np.ndarray
    remainders: np.ndarray
    exponent: float
    slope_variation: float

    def to_json(self) -> str:
        return json.dumps({
            "etas": self.etas.tolist(),
            "gradients": self.gradients.tolist(),
            "extrapolated": self.extrapolated.tolist(),
            "remainders": self.remainders.tolist(),
            "exponent": self.exponent,
            "slope_variation": self.slope_variation,
        })


def verify_eta_scaling(program: FeedforwardProgram, loss: LossSpec,
                       pointers, eta_list,
                       compute_inputs: dict | None = None) -> EtaScalingReport:
    """Scaling of the momentum-shift remainder with the kicking rate.

    Gradients are measured at every eta; the eta -> 0 gradient is Richardson-
    extrapolated from the two smallest rates, the shift remainder
    |eta*(g(eta) - g0)| is fit in log-log on the remaining rates, and the
    report carries both the fitted exponent (expected >= 2 for generic
    Hermitian losses) and the gradient's relative slope variation (zero for
    exactly diagonal effective phases, where the kick truncates at first
    order).
    """
    etas = np.sort(np.asarray(eta_list, dtype=float))[::-1]
    if len(etas) < 3:
        raise ValueError("need at least 3 kicking rates")
    ratios = etas[:-1] / etas[1:]
    if np.max(np.abs(ratios - ratios[0])) > 1e-9:
        raise ValueError("kicking rates must form a geometric progression")

    params = list(program.param_regs)
    specs = [program.registers[p] for p in params]
    grads = []
    for eta in etas:
        state = product_gaussian_state(params, specs, pointers)
        state = _attach_compute(state, program, compute_inputs)
        res = qfb_run(program, loss, eta, state)
        grads.append(res.effective_gradient)
    grads = np.asarray(grads)

    r = ratios[0]
    g_small, g_next = grads[-1], grads[-2]
    g0 = (r * g_small - g_next) / (r - 1.0)
    remainders = np.array([np.linalg.norm(e * (g - g0)) for e, g in zip(etas, grads)])
    # fit away from the rates consumed by the extrapolation when possible
    cut = -2 if len(etas) >= 4 else -1
    fit_etas, fit_rem = etas[:cut], remainders[:cut]
    mask = fit_rem > 1e-14
    if mask.sum() >= 2:
        slope = np.polyfit(np.log(fit_etas[mask]), np.log(fit_rem[mask]), 1)[0]
    else:
        slope = float("inf")  # remainder at machine zero: exactly first order
    norms = np.linalg.norm(grads, axis=1)
    mean = norms.mean()
    variation = float(np.max(np.abs(norms - mean)) / mean) if mean > 0 else 0.0
    return EtaScalingReport(etas=etas, gradients=grads, extrapolated=g0,
                            remainders=remainders, exponent=float(slope),
                            slope_variation=variation)


def _attach_compute(param_state: WaveState, program: FeedforwardProgram,
                    compute_inputs) -> WaveState:
    names = list(param_state.names)
    specs = list(param_state.specs)
    compute_names = [c for c in program.compute_regs]
    if not compute_names:
        return param_state
    compute_specs = [program.registers[c] for c in compute_names]
    cstate = _compute_input_state(compute_names, compute_specs, compute_inputs)
    psi = np.multiply.outer(param_state.psi, cstate.psi)
    return WaveState(names + compute_names, specs + compute_specs, psi)
