"""The two phase-kick optimizers (MoMGrad, QDD), batching protocols
(sequential, CAMP), weight decay, and the classical Nelder-Mead baseline.

Kick items come in two encodings: a DiagonalCost table over the joint
parameter grid (exact for classical-embedding programs) or a CircuitKick
that runs the full feedforward / loss / uncompute kernel.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft

from .circuit import FeedforwardProgram, GateOp, apply_gate
from .hilbert import (
    GaussianPointer,
    OverflowWarning,
    QuditSpec,
    WaveState,
    folded_momentum_values,
    measure_momenta_joint,
    measure_momentum_expectation,
    product_gaussian_state,
)
from .qfb import DiagonalCost, LossSpec, _compute_input_state, qfb_apply

__all__ = [
    "Schedule",
    "OptState",
    "CircuitKick",
    "apply_kick",
    "sequential_minibatch_kick",
    "momgrad_step",
    "qdd_step",
    "camp_kick",
    "weight_decay_kick",
    "nelder_mead",
]


@dataclass(frozen=True)
class CircuitKick:
    """One datum's QFB kick: program + loss (+ compute input values)."""

    program: FeedforwardProgram
    loss: LossSpec
    compute_inputs: dict | None = None


@dataclass
class Schedule:
    """Per-iteration rates: kicking eta_k, kinetic gamma_k, pointer sigma_k."""

    etas: np.ndarray
    gammas: np.ndarray
    sigmas: np.ndarray
    batch_plan: str = "full"  # full | minibatch | stochastic
    minibatch_size: int = 0
    weight_decay: float = 0.0

    def __post_init__(self):
        self.etas = np.asarray(self.etas, dtype=float)
        self.gammas = np.asarray(self.gammas, dtype=float)
        self.sigmas = np.asarray(self.sigmas, dtype=float)
        if not (np.all(np.isfinite(self.etas)) and np.all(np.isfinite(self.gammas))):
            raise ValueError("rates must be finite")
        if np.any(self.sigmas <= 0):
            raise ValueError("pointer widths must be positive")

    @property
    def iterations(self) -> int:
        return len(self.etas)


@dataclass
class OptState:
    """Optimizer state over a set of parameter registers.

    MoMGrad keeps classical pointer parameters (phi0, pi0); QDD keeps the live
    wavefunction in ``state``. ``trace`` accumulates one record per iteration.
    """

    params: list
    specs: list
    phi0: np.ndarray
    pi0: np.ndarray
    k: int = 0
    state: WaveState | None = None
    trace: list = field(default_factory=list)

    def clamped_phi0(self) -> tuple[np.ndarray, bool]:
        lo = np.array([s.a for s in self.specs])
        hi = np.array([s.b for s in self.specs])
        clipped = np.clip(self.phi0, lo, hi)
        return clipped, bool(np.any(clipped != self.phi0))


def apply_kick(state: WaveState, item, eta: float, dtype=None) -> WaveState:
    """Apply one kick item at rate eta."""
    if isinstance(item, DiagonalCost):
        phase = item.phase(eta, dtype if dtype is not None else state.psi.dtype)
        # table spans the param axes in register order; broadcast over the rest
        axes = [state.axis(n) for n in item.param_regs]
        sh = [1] * state.psi.ndim
        for ax, n in zip(axes, range(phase.ndim)):
            sh[ax] = phase.shape[n]
        state.psi *= phase.reshape(tuple(sh))
        return state
    if isinstance(item, CircuitKick):
        return qfb_apply(item.program, item.loss, eta, state)
    raise TypeError(f"unknown kick item {type(item)!r}")


def sequential_minibatch_kick(state: WaveState, items, eta: float,
                              dtype=None) -> WaveState:
    """Per-datum kicks at rate eta/len(items), applied in sequence.

    Equals the single kick of the averaged cost exactly when all per-datum
    effective phases are diagonal.
    """
    if not items:
        raise ValueError("batch must be non-empty")
    bar_eta = eta / len(items)
    for item in items:
        apply_kick(state, item, bar_eta, dtype=dtype)
    return state


def _needs_compute(items) -> FeedforwardProgram | None:
    for item in items:
        if isinstance(item, CircuitKick):
            return item.program
    return None


def _prepare_state(opt: OptState, sigma, items, dtype) -> WaveState:
    phi0, clamped = opt.clamped_phi0()
    if clamped:
        warnings.warn("pointer mean clamped to the register interval",
                      OverflowWarning, stacklevel=3)
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (len(opt.params),))
    pointers = [GaussianPointer(p, q, s) for p, q, s in zip(phi0, opt.pi0, sig)]
    state = product_gaussian_state(opt.params, opt.specs, pointers, dtype=dtype)
    prog = _needs_compute(items)
    if prog is not None:
        cnames = list(prog.compute_regs)
        cspecs = [prog.registers[c] for c in cnames]
        cstate = _compute_input_state(cnames, cspecs, None)
        psi = np.multiply.outer(state.psi, cstate.psi)
        state = WaveState(opt.params + cnames, opt.specs + cspecs, psi)
    return state, clamped


def _momentum_readout(state: WaveState, params):
    vals, readouts = measure_momenta_joint(state, params)
    overflow = any(r.overflowed for r in readouts)
    if overflow:
        warnings.warn("momentum kick reached the folded window edge",
                      OverflowWarning, stacklevel=3)
    return vals, overflow


def momgrad_step(opt: OptState, items, eta: float, gamma: float, sigma,
                 dtype=np.complex128, shots: int | None = None,
                 rng: np.random.Generator | None = None,
                 discard_momentum: bool = False) -> OptState:
    """One pointer-preparation / kick / momentum-measurement iteration.

    Accumulates the batch at rate eta/len(items), reads the new momenta
    Pi' = Pi - eta*<grad J>, moves the means by gamma*Pi', and records the
    step in the trace. With ``discard_momentum`` the next pointer is
    re-prepared at zero momentum (the classical gradient-descent update
    rule); the measured momentum is still recorded.
    """
    state, clamped = _prepare_state(opt, sigma, items, dtype)
    sequential_minibatch_kick(state, items, eta, dtype=dtype)
    if shots is None:
        pi_new, overflow = _momentum_readout(state, opt.params)
    else:
        pi_new = measure_momentum_expectation(state, opt.params, shots=shots,
                                              rng=rng)
        overflow = False
    grad = (opt.pi0 - pi_new) / eta if eta != 0 else np.zeros_like(pi_new)
    phi_new = opt.phi0 + gamma * pi_new
    opt.pi0 = np.zeros_like(pi_new) if discard_momentum else pi_new
    opt.phi0 = phi_new
    opt.k += 1
    opt.trace.append({
        "iter": opt.k, "eta": float(eta), "gamma": float(gamma),
        "sigma": np.broadcast_to(np.asarray(sigma, float), (len(opt.params),)).tolist(),
        "grad": grad.tolist(), "phi0": opt.phi0.tolist(), "pi0": pi_new.tolist(),
        "overflow": bool(overflow), "clamped": bool(clamped),
    })
    return opt


def kinetic_pulse(state: WaveState, params, gamma: float, dtype=None) -> WaveState:
    """exp(-i*gamma*Pi^2) on each listed register via Fourier conjugation.

    Implemented as fftn over the parameter axes, per-axis quadratic phases in
    the folded calibrated momentum values, and the inverse transform. The
    induced position shift is 2*gamma*<Pi> per register.
    """
    axes = [state.axis(n) for n in params]
    dims = [state.psi.shape[a] for a in axes]
    psi = scipy.fft.fftn(state.psi, axes=axes, workers=-1)
    psi /= np.sqrt(np.prod(dims))
    cdtype = psi.dtype
    for n, ax in zip(params, axes):
        pv = folded_momentum_values(state.spec(n))
        ph = np.exp(-1j * gamma * pv**2).astype(cdtype)
        sh = [1] * psi.ndim
        sh[ax] = len(pv)
        psi *= ph.reshape(tuple(sh))
    psi = scipy.fft.ifftn(psi, axes=axes, workers=-1)
    psi *= np.sqrt(np.prod(dims))
    state.psi = psi.astype(state.psi.dtype, copy=False)
    return state


def _fourier_marginals(psi_tilde: np.ndarray, axes):
    p = np.abs(psi_tilde) ** 2
    out = []
    for ax in axes:
        other = tuple(i for i in range(p.ndim) if i != ax)
        m = p.sum(axis=other)
        out.append(m / m.sum())
    return out


def qdd_step(opt: OptState, items, eta: float, gamma: float,
             dtype=None) -> OptState:
    """One Schrodinger-descent iteration: batched kick then kinetic pulse.

    Momenta are read (exactly) from the Fourier-domain marginals between the
    kick and the pulse; position means are read after the pulse.
    """
    state = opt.state
    if state is None:
        raise ValueError("qdd_step requires a live wavefunction in opt.state")
    sequential_minibatch_kick(state, items, eta, dtype=dtype)

    axes = [state.axis(n) for n in opt.params]
    dims = [state.psi.shape[a] for a in axes]
    psi = scipy.fft.fftn(state.psi, axes=axes, workers=-1)
    psi /= np.sqrt(np.prod(dims))
    marginals = _fourier_marginals(psi, axes)
    pi_new, overflow = [], False
    for n, marg in zip(opt.params, marginals):
        spec = state.spec(n)
        vals = folded_momentum_values(spec)
        pi_new.append(float(marg @ vals))
        hi, lo = int(np.argmax(vals)), int(np.argmin(vals))
        if marg[hi] + marg[lo] >= 0.05:
            overflow = True
    pi_new = np.asarray(pi_new)
    if overflow:
        warnings.warn("momentum kick reached the folded window edge",
                      OverflowWarning, stacklevel=2)

    cdtype = psi.dtype
    for n, ax in zip(opt.params, axes):
        pv = folded_momentum_values(state.spec(n))
        ph = np.exp(-1j * gamma * pv**2).astype(cdtype)
        sh = [1] * psi.ndim
        sh[ax] = len(pv)
        psi *= ph.reshape(tuple(sh))
    psi = scipy.fft.ifftn(psi, axes=axes, workers=-1)
    psi *= np.sqrt(np.prod(dims))
    state.psi = psi.astype(state.psi.dtype, copy=False)

    phi_new, sigma_new = [], []
    for n in opt.params:
        p = state.probabilities(n)
        vals = state.spec(n).values
        mean = float(p @ vals)
        var = float(p @ (vals - mean) ** 2)
        phi_new.append(mean)
        sigma_new.append(np.sqrt(max(var, 0.0)))
    phi_new = np.asarray(phi_new)
    grad = (opt.pi0 - pi_new) / eta if eta != 0 else np.zeros_like(pi_new)
    opt.pi0 = pi_new
    opt.phi0 = phi_new
    opt.k += 1
    opt.trace.append({
        "iter": opt.k, "eta": float(eta), "gamma": float(gamma),
        "sigma": [float(s) for s in sigma_new],
        "grad": grad.tolist(), "phi0": opt.phi0.tolist(), "pi0": opt.pi0.tolist(),
        "overflow": bool(overflow), "clamped": False,
    })
    return opt


def weight_decay_kick(state: WaveState, params, lam: float, eta: float) -> WaveState:
    """Quadratic regularizer phase exp(-i*eta*lam*pos^2) on each register."""
    for n in params:
        apply_gate(state, GateOp("diagonal_phase", targets=(n,),
                                 poly=(0.0, 0.0, lam), eta=eta))
    return state


def camp_kick(server_state: WaveState, items, eta: float,
              atol: float = 1e-9) -> WaveState:
    """Coherently accumulated batch kick through parameter replication.

    Fans the server registers out to one replica per item with a tree of
    adders (built here as a sequential adder chain; the logical depth is
    logarithmic with a balanced tree), applies each item's kick to its own
    replica at rate eta/len(items), and uncomputes the fan-out. Replicas must
    start and end in the position-zero product state; the returned state is
    the server (plus any compute leakage), with replicas verified and sliced
    out.
    """
    if not items:
        raise ValueError("batch must be non-empty")
    n_rep = len(items)
    params = list(server_state.names)
    specs = list(server_state.specs)
    for s in specs:
        if abs(s.values[s.zero_index]) > 1e-12:
            raise ValueError("replica registers need an exact zero grid point")

    names = list(params)
    allspecs = list(specs)
    psi = server_state.psi
    rep_names = []

    def attach(name, spec, index):
        nonlocal psi
        names.append(name)
        allspecs.append(spec)
        vec = np.zeros(spec.dim, dtype=psi.dtype)
        vec[index] = 1.0
        psi = np.multiply.outer(psi, vec)

    for c in range(n_rep):
        row = [f"rep{c}:{p}" for p in params]
        rep_names.append(row)
        for rp, spec in zip(row, specs):
            attach(rp, spec, spec.zero_index)
    for c, item in enumerate(items):
        if isinstance(item, CircuitKick):
            for reg in item.program.compute_regs:
                spec = item.program.registers[reg]
                idx = spec.zero_index if isinstance(spec, QuditSpec) else 0
                attach(f"rep{c}:{reg}", spec, idx)
    big = WaveState(names, allspecs, psi)

    def tent(adjoint=False):
        scale = -1.0 if adjoint else 1.0
        for c in range(n_rep):
            for p, rp in zip(params, rep_names[c]):
                apply_gate(big, GateOp("adder", src=p, dst=rp, scale=scale))

    tent()
    bar_eta = eta / n_rep
    for c, item in enumerate(items):
        if isinstance(item, DiagonalCost):
            remapped = DiagonalCost(param_regs=tuple(rep_names[c]), table=item.table)
            apply_kick(big, remapped, bar_eta)
        else:
            prog, loss = item.program, item.loss
            mapping = {p: rp for p, rp in zip(params, rep_names[c])}
            mapping.update({reg: f"rep{c}:{reg}" for reg in prog.compute_regs})
            apply_kick(big, CircuitKick(_remap_program(prog, mapping),
                                        _remap_loss(loss, mapping)), bar_eta)
    tent(adjoint=True)

    # replicas must be back at position zero exactly
    for c in range(n_rep):
        for rp in rep_names[c]:
            probs = big.probabilities(rp)
            z = big.spec(rp).zero_index
            if abs(probs[z] - 1.0) > atol:
                raise RuntimeError(f"replica {rp} not returned to the null state "
                                   f"(p0={probs[z]:.12f})")

    sl = [slice(None)] * big.psi.ndim
    for c in range(n_rep):
        for rp in rep_names[c]:
            sl[big.axis(rp)] = big.spec(rp).zero_index
    keep_names = [n for n in names if n not in
                  {r for row in rep_names for r in row}]
    keep_specs = [allspecs[names.index(n)] for n in keep_names]
    out = WaveState(keep_names, keep_specs, np.ascontiguousarray(big.psi[tuple(sl)]))
    return out.normalize()


def _remap_program(prog: FeedforwardProgram, mapping: dict) -> FeedforwardProgram:
    def m(x):
        return mapping.get(x, x) if x is not None else None

    gates = [replace(g, src=m(g.src), src2=m(g.src2), dst=m(g.dst),
                     targets=tuple(m(t) for t in g.targets)) for g in prog.gates]
    return FeedforwardProgram(
        gates=gates,
        param_regs=[m(p) for p in prog.param_regs],
        compute_regs=[m(c) for c in prog.compute_regs],
        registers={m(n): s for n, s in prog.registers.items()},
    )


def _remap_loss(loss: LossSpec, mapping: dict) -> LossSpec:
    terms = tuple((c, tuple(mapping.get(r, r) for r in regs))
                  for c, regs in loss.terms)
    return replace(loss, targets=tuple(mapping.get(t, t) for t in loss.targets),
                   terms=terms)


# -- Nelder-Mead baseline -----------------------------------------------------


def nelder_mead(objective, init, step: float = 0.5, max_evals: int = 200,
                xtol: float = 1e-6, ftol: float = 1e-9, trace: list | None = None):
    """Classical simplex minimizer used as the hybrid-optimization baseline.

    ``objective`` maps a parameter vector to a scalar; every evaluation is
    appended to ``trace`` as (eval_index, params, value). Returns
    (best_params, best_value, evaluations).
    """
    init = np.asarray(init, dtype=float)
    n = len(init)
    evals = 0

    def f(x):
        nonlocal evals
        v = float(objective(np.asarray(x)))
        evals += 1
        if trace is not None:
            trace.append({"eval": evals, "params": [float(t) for t in x],
                          "value": v})
        return v

    simplex = [init.copy()]
    for i in range(n):
        x = init.copy()
        x[i] += step
        simplex.append(x)
    values = [f(x) for x in simplex]

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    while evals < max_evals:
        order = np.argsort(values)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        spread_x = max(np.max(np.abs(x - simplex[0])) for x in simplex[1:])
        if spread_x < xtol and (values[-1] - values[0]) < ftol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = f(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            xe = centroid + gamma * (centroid - simplex[-1])
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        xc = centroid + rho * (simplex[-1] - centroid)
        fc = f(xc)
        if fc < values[-1]:
            simplex[-1], values[-1] = xc, fc
            continue
        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = best + sigma * (simplex[i] - best)
            values[i] = f(simplex[i])

    order = np.argsort(values)
    return simplex[order[0]], values[order[0]], evals
