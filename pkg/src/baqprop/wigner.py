"""Phase-space diagnostics: discrete and Gaussian Wigner functions.

The discrete Wigner function follows the odd-d displacement-operator
convention, normalized so the array sums to 1 and the p-marginal reproduces
the position Born distribution.
"""

from __future__ import annotations

import numpy as np

from .hilbert import GaussianPointer, QuditSpec, WaveState

__all__ = ["wigner_discrete", "wigner_continuous", "write_wigner_csv"]


def wigner_discrete(state: WaveState, register: str) -> np.ndarray:
    """Discrete Wigner array W[q, p] of one odd-dimension register.

    W(q, p) = (1/d) * sum_u psi*(q-u) psi(q+u) omega^(-2up), indices mod d.
    Requires the register to be unentangled from the rest of the state (the
    engine is pure-state only); callers pass single-register states.
    """
    ax = state.axis(register)
    d = state.psi.shape[ax]
    if d % 2 == 0:
        raise ValueError("discrete Wigner function requires odd dimension")
    if state.psi.ndim != 1:
        if state.reduced_purity([register]) < 1.0 - 1e-9:
            raise ValueError("register is entangled; reduce the state first")
        # collapse the pure factor
        mat = np.moveaxis(state.psi, ax, 0).reshape(d, -1)
        _, _, vh = np.linalg.svd(mat, full_matrices=False)
        psi = mat @ vh[0].conj()
        psi /= np.linalg.norm(psi)
    else:
        psi = state.psi

    j = np.arange(d)
    # g[q, u] = psi*(q-u) psi(q+u)
    g = psi.conj()[(j[:, None] - j[None, :]) % d] * psi[(j[:, None] + j[None, :]) % d]
    ghat = np.fft.fft(g, axis=1)  # ghat[q, m] = sum_u g[q,u] e^(-2pi i u m / d)
    w = ghat[:, (2 * j) % d].real / d
    return w


def wigner_continuous(
    pointer: GaussianPointer, x_grid: np.ndarray, p_grid: np.ndarray
) -> np.ndarray:
    """Analytic Gaussian Wigner function sampled on an (x, p) mesh.

    Normalized as a density: integrates to 1 over the full plane. Momentum
    spread is 1/(2*sigma0) as dictated by the minimum-uncertainty pointer.
    """
    x = np.asarray(x_grid)[:, None]
    p = np.asarray(p_grid)[None, :]
    s2 = pointer.sigma0**2
    return (
        np.exp(-((x - pointer.phi0) ** 2) / (2 * s2))
        * np.exp(-2 * s2 * (p - pointer.pi0) ** 2)
        / np.pi
    )


def write_wigner_csv(path, w: np.ndarray, q_values, p_values) -> None:
    """CSV export: header row of p-grid values, then one row per q value.

    First column holds the q grid value for that row; the header's first cell
    is the literal tag ``q\\p``.
    """
    q_values = np.asarray(q_values, dtype=float)
    p_values = np.asarray(p_values, dtype=float)
    with open(path, "w") as fh:
        fh.write("q\\p," + ",".join(repr(float(v)) for v in p_values) + "\n")
        for qv, row in zip(q_values, w):
            fh.write(repr(float(qv)) + "," + ",".join(repr(float(x)) for x in row) + "\n")
