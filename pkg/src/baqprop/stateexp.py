"""Quantum state exponentiation: exact projector exponentials and the
copy-consuming exponential-swap protocol with its 1/n error scaling.

The batched protocol is a channel (each copy is discarded after its partial
swap), so its exact output is tracked as a density matrix on the protocol
subsystem; a seeded trajectory unraveling returns a pure WaveState whose
average reproduces the channel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hilbert import WaveState

__all__ = [
    "ExpStateBudget",
    "exponentiate_exact",
    "exponentiate_batched",
    "sequential_mixture_exponential",
    "BatchedExpReport",
    "trace_distance",
]

MAX_CHANNEL_DIM = 256  # density-matrix bookkeeping capped at protocol scale


@dataclass(frozen=True)
class ExpStateBudget:
    """Total phase angle eta split into n equal exp-swap steps."""

    eta: float
    n_copies: int

    def __post_init__(self):
        if self.n_copies < 1:
            raise ValueError("n_copies must be >= 1")

    @property
    def delta(self) -> float:
        return self.eta / self.n_copies


@dataclass
class BatchedExpReport:
    eta: float
    n: int
    trace_distance: float

    def to_json(self) -> str:
        return json.dumps({"eta": self.eta, "n": self.n,
                           "trace_distance": self.trace_distance})


def _flatten_targets(state: WaveState, targets):
    axes = [state.axis(n) for n in targets]
    dims = [state.psi.shape[a] for a in axes]
    return axes, int(np.prod(dims))


def exponentiate_exact(state: WaveState, targets, psi_vec: np.ndarray,
                       eta: float) -> WaveState:
    """Apply exp(-i*eta*|psi><psi|) = I + (e^(-i*eta)-1)|psi><psi| on targets."""
    psi_vec = np.asarray(psi_vec, dtype=complex).ravel()
    psi_vec = psi_vec / np.linalg.norm(psi_vec)
    axes, dim = _flatten_targets(state, targets)
    if dim != psi_vec.size:
        raise ValueError("projector vector does not match target dimensions")
    moved = np.moveaxis(state.psi, axes, range(len(axes)))
    shape = moved.shape
    mat = moved.reshape(dim, -1)
    overlap = psi_vec.conj() @ mat  # <psi | state>, per remaining index
    mat = mat + (np.exp(-1j * eta) - 1.0) * np.multiply.outer(psi_vec, overlap)
    state.psi = np.moveaxis(mat.reshape(shape), range(len(axes)), axes)
    return state


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2)||rho - sigma||_1 via eigenvalues of the Hermitian difference."""
    w = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * float(np.sum(np.abs(w)))


def _density(state: WaveState) -> np.ndarray:
    v = state.psi.ravel()
    return np.outer(v, v.conj())


def _exp_swap_channel_step(rho: np.ndarray, copy_rho: np.ndarray,
                           delta: float) -> np.ndarray:
    """rho -> tr_copy[ e^(-i*delta*S) (rho (x) copy) e^(+i*delta*S) ]."""
    d = rho.shape[0]
    c, s = np.cos(delta), np.sin(delta)
    # S (rho (x) tau) S^dag components without building the swap matrix:
    # e^(-i d S) = c*I - i*s*S;  S (A (x) B) S = B (x) A
    # tr_2[ (c*I - i s S)(A (x) B)(c*I + i s S) ]
    #   = c^2 A tr(B) + s^2 B tr(A) + i c s (tr_2[(A(x)B)S] - tr_2[S(A(x)B)])
    # with tr_2[(A (x) B) S] = A B and tr_2[ S (A (x) B) ] = B A.
    return (c * c) * rho + (s * s) * copy_rho + 1j * c * s * (rho @ copy_rho - copy_rho @ rho)


def exponentiate_batched(state: WaveState, targets, copies, eta: float,
                         n: int | None = None,
                         rng: np.random.Generator | None = None):
    """Copy-consuming approximation of exp(-i*eta*rho) on the target registers.

    Performs n exponential-swap steps at angle delta = eta/n, each against a
    fresh copy drawn cyclically from ``copies`` (pure-state vectors, all of
    the target dimension); every copy is discarded after its step, so the map
    on the target is a channel. Returns ``(state, report)`` where the state is
    a seeded measurement trajectory of the channel (exact channel average is
    used for the report) and the report carries the trace distance to
    exponentiate_exact applied with the mixture of the copies.

    The registers in ``targets`` must carry the whole pure state (the channel
    output on an entangled subsystem is not representable here).
    """
    copies = [np.asarray(c, dtype=complex).ravel() for c in copies]
    copies = [c / np.linalg.norm(c) for c in copies]
    budget = ExpStateBudget(eta=eta, n_copies=n if n is not None else len(copies))
    axes, dim = _flatten_targets(state, targets)
    if any(c.size != dim for c in copies):
        raise ValueError("copy dimension does not match target registers")
    if len(axes) != state.psi.ndim:
        raise ValueError("batched exponentiation acts on the full state")
    if dim > MAX_CHANNEL_DIM:
        raise ValueError(f"protocol dimension {dim} exceeds {MAX_CHANNEL_DIM}")
    if rng is None:
        rng = np.random.default_rng(0)

    delta = budget.delta
    # exact channel output for the error report
    rho = _density(state)
    for step in range(budget.n_copies):
        cvec = copies[step % len(copies)]
        rho = _exp_swap_channel_step(rho, np.outer(cvec, cvec.conj()), delta)

    # reference: exact exponential of the copy mixture applied to the input
    mix = sum(np.outer(c, c.conj()) for c in copies) / len(copies)
    u_exact = scipy.linalg.expm(-1j * eta * mix)
    rho_exact = u_exact @ _density(state) @ u_exact.conj().T
    report = BatchedExpReport(eta=eta, n=budget.n_copies,
                              trace_distance=trace_distance(rho, rho_exact))

    # trajectory unraveling: after each swap step, measure the copy register
    # in the computational basis and keep the (renormalized) target branch
    vec = np.moveaxis(state.psi, axes, range(len(axes))).reshape(dim)
    c, s = np.cos(delta), np.sin(delta)
    for step in range(budget.n_copies):
        cvec = copies[step % len(copies)]
        joint = c * np.multiply.outer(vec, cvec) - 1j * s * np.multiply.outer(cvec, vec)
        probs = (np.abs(joint) ** 2).sum(axis=0)
        outcome = rng.choice(dim, p=probs / probs.sum())
        vec = joint[:, outcome]
        vec = vec / np.linalg.norm(vec)
    state.psi = np.moveaxis(vec.reshape(state.psi.shape), range(len(axes)), axes)
    return state, report


def sequential_mixture_exponential(state: WaveState, targets, psi_list,
                                   eta: float, sweeps: int = 1) -> WaveState:
    """Trotterized mixture exponential: N sweeps of per-state projector kicks.

    Applies (prod_j exp(-i*(eta/|list|/N)*|psi_j><psi_j|))^N, approximating
    exp(-i*eta*rho_mix) with error O(eta^2/(|list|*N)).
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    step = eta / (len(psi_list) * sweeps)
    for _ in range(sweeps):
        for vec in psi_list:
            exponentiate_exact(state, targets, vec, step)
    return state
