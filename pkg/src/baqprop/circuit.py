"""Gate application over WaveState: adders, phase estimation, diagonal phases,
exponential swap, fixed unitaries, and quantum-parametrized exponentials.

Gates are described by GateOp records so programs can be built, reversed
gate-by-gate into exact adjoints, and serialized to JSON bit-exactly.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .hilbert import OverflowWarning, QubitSpec, QuditSpec, WaveState, fourier, inverse_fourier

__all__ = [
    "GateOp",
    "FeedforwardProgram",
    "VALUE_FUNCS",
    "apply_adder",
    "apply_multiplier_adder",
    "apply_phase_estimation",
    "apply_diagonal_phase",
    "apply_exp_swap",
    "apply_param_exponential",
    "apply_fixed_unitary",
    "apply_gate",
    "apply_program",
]

# Transforms applicable to a source register's position value before it is
# added onto a target. "relu" is the positive-projected position generator.
VALUE_FUNCS = {
    "identity": lambda v: v,
    "relu": lambda v: np.maximum(v, 0.0),
    "square": lambda v: v * v,
    "cube": lambda v: v * v * v,
}

MAX_DENSE_SUPPORT = 1024  # dense unitaries limited to 2**10-dimensional supports


def _broadcast_multiply(psi: np.ndarray, arr: np.ndarray, axes) -> np.ndarray:
    """Multiply psi by ``arr`` whose i-th axis lives on psi axis ``axes[i]``."""
    order = np.argsort(axes)
    arr_t = np.transpose(arr, order) if arr.ndim > 1 else arr
    shape = [1] * psi.ndim
    for ax, n in zip(sorted(axes), range(arr_t.ndim)):
        shape[ax] = arr_t.shape[n]
    return psi * arr_t.reshape(tuple(shape))


@dataclass(frozen=True)
class GateOp:
    """One gate; ``kind`` selects which register/scalar fields are used.

    adder:             dst position += scale * func(src position)
    multiplier_adder:  dst position += scale * func(src) * src2
    diagonal_phase:    exp(-i*eta*f(positions)) on targets (poly or table)
    phase_estimation:  omega^(-scale * A * Pi_d(dst)); A = pos(src) or ``value``
    exp_swap:          exp(-i*eta*SWAP) between src and dst
    fixed_unitary:     dense matrix on targets
    param_exponential: exp(-i*scale*pos(src)*H) with Hermitian H on targets
    """

    kind: str
    src: str | None = None
    src2: str | None = None
    dst: str | None = None
    targets: tuple = ()
    scale: float = 1.0
    eta: float = 0.0
    value: float | None = None
    func: str = "identity"
    poly: tuple = ()
    table: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def adjoint(self) -> "GateOp":
        if self.kind in ("adder", "multiplier_adder", "param_exponential",
                         "phase_estimation"):
            return replace(self, scale=-self.scale)
        if self.kind in ("diagonal_phase", "exp_swap"):
            return replace(self, eta=-self.eta)
        if self.kind == "fixed_unitary":
            return replace(self, matrix=self.matrix.conj().T)
        raise ValueError(f"unknown gate kind {self.kind!r}")


@dataclass
class FeedforwardProgram:
    """Ordered gate list with declared parameter and compute registers.

    ``registers`` maps name -> spec for every register the gates touch.
    """

    gates: list
    param_regs: list
    compute_regs: list
    registers: dict

    def adjoint_gates(self) -> list:
        return [g.adjoint() for g in reversed(self.gates)]

    def is_classical_embedding(self) -> bool:
        """True when every gate permutes compute basis states, so the QFB
        collapses to a diagonal phase on the parameters (value tracking)."""
        return all(g.kind in ("adder", "multiplier_adder") for g in self.gates)

    # -- JSON round trip ----------------------------------------------------

    def to_json(self) -> str:
        def enc_spec(s):
            if isinstance(s, QubitSpec):
                return {"kind": "qubit"}
            return {"kind": "qudit", "d": s.d, "a": s.a, "b": s.b}

        def enc_arr(a):
            if a is None:
                return None
            a = np.asarray(a)
            if np.iscomplexobj(a):
                return {"shape": list(a.shape), "re": a.real.ravel().tolist(),
                        "im": a.imag.ravel().tolist()}
            return {"shape": list(a.shape), "re": a.ravel().tolist()}

        gates = [{
            "kind": g.kind, "src": g.src, "src2": g.src2, "dst": g.dst,
            "targets": list(g.targets), "scale": g.scale, "eta": g.eta,
            "value": g.value, "func": g.func, "poly": list(g.poly),
            "table": enc_arr(g.table), "matrix": enc_arr(g.matrix),
        } for g in self.gates]
        return json.dumps({
            "registers": {n: enc_spec(s) for n, s in self.registers.items()},
            "param_regs": list(self.param_regs),
            "compute_regs": list(self.compute_regs),
            "gates": gates,
        })

    @classmethod
    def from_json(cls, text: str) -> "FeedforwardProgram":
        def dec_spec(d):
            return QubitSpec() if d["kind"] == "qubit" else QuditSpec(d["d"], d["a"], d["b"])

        def dec_arr(d):
            if d is None:
                return None
            re = np.array(d["re"]).reshape(d["shape"])
            return re + 1j * np.array(d["im"]).reshape(d["shape"]) if "im" in d else re

        doc = json.loads(text)
        gates = [
            GateOp(kind=g["kind"], src=g["src"], src2=g["src2"], dst=g["dst"],
                   targets=tuple(g["targets"]), scale=g["scale"], eta=g["eta"],
                   value=g["value"], func=g["func"], poly=tuple(g["poly"]),
                   table=dec_arr(g["table"]), matrix=dec_arr(g["matrix"]))
            for g in doc["gates"]
        ]
        return cls(gates=gates, param_regs=list(doc["param_regs"]),
                   compute_regs=list(doc["compute_regs"]),
                   registers={n: dec_spec(s) for n, s in doc["registers"].items()})


# -- individual gate applications -------------------------------------------


def _apply_conditional_roll(state, cond_axes, shifts, dst, warn_label):
    """Roll the dst axis by a per-condition integer shift, tracking wraparound."""
    ax_dst = state.axis(dst)
    d = state.psi.shape[ax_dst]
    psi = state.psi
    wrap_mass = 0.0
    for idx in np.ndindex(*shifts.shape):
        s = int(shifts[idx])
        if s == 0:
            continue
        sl = [slice(None)] * psi.ndim
        for ax, i in zip(cond_axes, idx):
            sl[ax] = i
        sl_t = tuple(sl)
        block = psi[sl_t]
        axis_in_block = ax_dst - sum(1 for a in cond_axes if a < ax_dst)
        # mass leaving [0, d) under the unwrapped shift
        p = np.abs(block) ** 2
        pj = p.sum(axis=tuple(i for i in range(p.ndim) if i != axis_in_block))
        j = np.arange(d)
        wrapped = ((j + s) < 0) | ((j + s) >= d)
        wrap_mass += float(pj[wrapped].sum())
        psi[sl_t] = np.roll(block, s % d, axis=axis_in_block)
    if wrap_mass >= 0.05:
        warnings.warn(f"{warn_label}: wraparound probability {wrap_mass:.3f}",
                      OverflowWarning, stacklevel=3)
        if not hasattr(state, "overflow_events"):
            state.overflow_events = []
        state.overflow_events.append(warn_label)
    return state


def apply_adder(state: WaveState, src: str, dst: str, scale: float = 1.0,
                func: str = "identity") -> WaveState:
    """|p_src, p_dst> -> |p_src, p_dst + scale*func(p_src)> with index wraparound."""
    if src == dst:
        raise ValueError("adder control and target must be distinct registers")
    s_src, s_dst = state.spec(src), state.spec(dst)
    if func == "identity" and abs(s_src.delta - s_dst.delta) > 1e-12 * s_dst.delta:
        raise ValueError("adder requires identical grid spacing on src and dst")
    vals = VALUE_FUNCS[func](s_src.values) * scale
    shifts = np.round(vals / s_dst.delta).astype(int)
    return _apply_conditional_roll(state, (state.axis(src),), shifts, dst,
                                   f"adder {src}->{dst}")


def apply_multiplier_adder(state: WaveState, src1: str, src2: str, dst: str,
                           scale: float = 1.0, func: str = "identity") -> WaveState:
    """|p1, p2, p3> -> |p1, p2, p3 + scale*func(p1)*p2>, product rounded to grid."""
    if dst in (src1, src2):
        raise ValueError("multiplier-adder controls and target must be distinct")
    s1, s2, sd = state.spec(src1), state.spec(src2), state.spec(dst)
    prod = np.multiply.outer(VALUE_FUNCS[func](s1.values), s2.values) * scale
    shifts = np.round(prod / sd.delta).astype(int)
    return _apply_conditional_roll(state, (state.axis(src1), state.axis(src2)),
                                   shifts, dst, f"multiplier_adder {src1},{src2}->{dst}")


def apply_phase_estimation(state: WaveState, ctrl, pointer: str,
                           scale: float = 1.0) -> WaveState:
    """von Neumann measurement coupling omega_d^(-scale * A * Pi_d(pointer)).

    ``ctrl`` is a register name (the observable is its position) or a classical
    scalar. For control eigenvalue alpha the pointer states pick up the
    displacement profile Delta(scale*alpha*(d-1)/(b-a) - k).
    """
    spec_p = state.spec(pointer)
    d = spec_p.d
    kappa = (d - 1) / (spec_p.b - spec_p.a)
    k = np.arange(d)
    fourier(state, pointer)
    ax_p = state.axis(pointer)
    if isinstance(ctrl, str):
        expo = np.multiply.outer(state.spec(ctrl).values, k) * (scale * kappa)
        phase = np.exp(-2j * np.pi * expo / d)
        state.psi = _broadcast_multiply(state.psi, phase, [state.axis(ctrl), ax_p])
    else:
        phase = np.exp(-2j * np.pi * (scale * kappa * float(ctrl)) * k / d)
        state.psi = _broadcast_multiply(state.psi, phase, [ax_p])
    inverse_fourier(state, pointer)
    return state


def apply_diagonal_phase(state: WaveState, targets, values, eta: float) -> WaveState:
    """Multiply amplitudes by exp(-i*eta*f), f given on the joint grid of
    ``targets`` (array shaped like their dims, in target order)."""
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise ValueError("diagonal phase function has non-finite values")
    axes = [state.axis(n) for n in targets]
    state.psi = _broadcast_multiply(state.psi, np.exp(-1j * eta * values), axes)
    return state


def _diagonal_values(state: WaveState, gate: GateOp) -> np.ndarray:
    if gate.table is not None:
        return np.asarray(gate.table)
    if gate.poly:
        (target,) = gate.targets
        return np.polyval(list(reversed(gate.poly)), state.spec(target).values)
    raise ValueError("diagonal_phase gate needs a poly or a table")


def apply_exp_swap(state: WaveState, rega: str, regb: str, eta: float) -> WaveState:
    """exp(-i*eta*SWAP) = cos(eta)*I - i*sin(eta)*SWAP on two same-dim registers."""
    ax_a, ax_b = state.axis(rega), state.axis(regb)
    if state.psi.shape[ax_a] != state.psi.shape[ax_b]:
        raise ValueError("exp_swap requires registers of equal dimension")
    swapped = np.swapaxes(state.psi, ax_a, ax_b)
    state.psi = np.cos(eta) * state.psi - 1j * np.sin(eta) * swapped
    return state


def _tensor_apply(psi: np.ndarray, mat: np.ndarray, axes) -> np.ndarray:
    """Apply a dense matrix to the listed axes (joint dimension = mat side)."""
    dims = [psi.shape[a] for a in axes]
    mat = mat.reshape(dims + dims)
    out = np.tensordot(mat, psi, axes=(list(range(len(axes), 2 * len(axes))), axes))
    return np.moveaxis(out, range(len(axes)), axes)


def apply_fixed_unitary(state: WaveState, targets, matrix: np.ndarray) -> WaveState:
    dim = int(np.prod([state.spec(n).dim for n in targets]))
    if dim > MAX_DENSE_SUPPORT:
        raise ValueError(f"dense unitary support {dim} exceeds {MAX_DENSE_SUPPORT}")
    matrix = np.asarray(matrix)
    if matrix.shape != (dim, dim):
        raise ValueError("matrix shape does not match target dimensions")
    axes = [state.axis(n) for n in targets]
    state.psi = _tensor_apply(state.psi, matrix, axes)
    return state


def apply_param_exponential(state: WaveState, param: str, targets,
                            generator: np.ndarray, scale: float = 1.0) -> WaveState:
    """Evolve each parameter branch |pos> by exp(-i*scale*pos*H) on targets."""
    generator = np.asarray(generator, dtype=complex)
    if np.max(np.abs(generator - generator.conj().T)) > 1e-9:
        raise ValueError("generator must be Hermitian (to 1e-9)")
    dim = int(np.prod([state.spec(n).dim for n in targets]))
    if dim > MAX_DENSE_SUPPORT:
        raise ValueError(f"dense generator support {dim} exceeds {MAX_DENSE_SUPPORT}")
    w, v = np.linalg.eigh(generator)
    spec_p = state.spec(param)
    axes = [state.axis(n) for n in targets]
    dims = [state.psi.shape[a] for a in axes]

    psi = _tensor_apply(state.psi, v.conj().T, axes)
    phases = np.exp(-1j * scale * np.multiply.outer(spec_p.values, w))
    psi = _broadcast_multiply(psi, phases.reshape([spec_p.d] + dims),
                              [state.axis(param)] + axes)
    state.psi = _tensor_apply(psi, v, axes)
    return state


def apply_gate(state: WaveState, gate: GateOp) -> WaveState:
    if gate.kind == "adder":
        return apply_adder(state, gate.src, gate.dst, gate.scale, gate.func)
    if gate.kind == "multiplier_adder":
        return apply_multiplier_adder(state, gate.src, gate.src2, gate.dst,
                                      gate.scale, gate.func)
    if gate.kind == "diagonal_phase":
        return apply_diagonal_phase(state, gate.targets,
                                    _diagonal_values(state, gate), gate.eta)
    if gate.kind == "phase_estimation":
        ctrl = gate.src if gate.src is not None else gate.value
        return apply_phase_estimation(state, ctrl, gate.dst, gate.scale)
    if gate.kind == "exp_swap":
        return apply_exp_swap(state, gate.src, gate.dst, gate.eta)
    if gate.kind == "fixed_unitary":
        return apply_fixed_unitary(state, gate.targets, gate.matrix)
    if gate.kind == "param_exponential":
        return apply_param_exponential(state, gate.src, gate.targets, gate.matrix,
                                       gate.scale)
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def apply_program(state: WaveState, program: FeedforwardProgram,
                  adjoint: bool = False) -> WaveState:
    gates = program.adjoint_gates() if adjoint else program.gates
    for g in gates:
        apply_gate(state, g)
    return state
