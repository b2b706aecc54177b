"""Simulated continuous-variable registers and their operator algebra.

A qudit of dimension d stands in for a continuous quantum register on an
interval [a, b]: computational basis index j encodes the position value
a + j*(b-a)/(d-1), and the Fourier-conjugate basis encodes a (folded)
momentum. Everything downstream -- adders, phase kicks, kinetic pulses,
momentum readouts -- is built on the primitives in this module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

__all__ = [
    "QuditSpec",
    "QubitSpec",
    "GaussianPointer",
    "MomentumReadout",
    "WaveState",
    "OverflowWarning",
    "position_values",
    "fourier",
    "inverse_fourier",
    "delta_kernel",
    "delta_kernel_direct",
    "fractional_phase",
    "fractional_shift",
    "prepare_gaussian",
    "product_gaussian_state",
    "measure_position_expectation",
    "measure_momentum_expectation",
    "momentum_distribution",
    "folded_momentum_values",
]

NORM_TOL = 1e-9

# Probability mass on the two extreme folded momentum bins beyond which a
# kick is considered to have wrapped around (folding overflow).
OVERFLOW_EDGE_MASS = 0.05


class OverflowWarning(UserWarning):
    """A register value or momentum kick wrapped around the simulated interval."""


@dataclass(frozen=True)
class QuditSpec:
    """A d-level register simulating a continuous variable on [a, b].

    Basis index j has position eigenvalue a + j*delta with delta = (b-a)/(d-1).
    """

    d: int
    a: float
    b: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")
        if not self.b > self.a:
            raise ValueError(f"interval requires b > a, got [{self.a}, {self.b}]")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def delta(self) -> float:
        """Grid spacing between adjacent position eigenvalues."""
        return (self.b - self.a) / (self.d - 1)

    @property
    def values(self) -> np.ndarray:
        """Position eigenvalues, index j -> a + j*delta."""
        return self.a + np.arange(self.d) * self.delta

    @property
    def momentum_unit(self) -> float:
        """Calibration constant c: calibrated momentum = c * folded Fourier index.

        c = 2*pi*(d-1)/(d*(b-a)), chosen so that a linear phase exp(-i*g*pos)
        shifts the calibrated momentum expectation by -g.
        """
        return 2.0 * np.pi * (self.d - 1) / (self.d * (self.b - self.a))

    @property
    def zero_index(self) -> int:
        """Basis index whose position eigenvalue is closest to 0."""
        return int(round(-self.a / self.delta))

    def index_of(self, value: float) -> int:
        """Nearest basis index for a position value (no wraparound)."""
        return int(round((value - self.a) / self.delta))

    def fold_value(self, value: float) -> float:
        """Map a real value onto the grid by modular index arithmetic.

        This is the position a shift operator actually reaches: indices wrap
        mod d, so values wrap with period d*delta relative to the a-offset.
        """
        j = round((value - self.a) / self.delta) % self.d
        return self.a + j * self.delta


@dataclass(frozen=True)
class QubitSpec:
    """A plain two-level register with no position-grid semantics."""

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class GaussianPointer:
    """Classical description of a Gaussian pointer state of one parameter.

    phi0 / pi0 are the mean position and mean calibrated momentum; sigma0 is
    the position standard deviation.
    """

    phi0: float
    pi0: float = 0.0
    sigma0: float = 1.0

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")


@dataclass(frozen=True)
class MomentumReadout:
    """One register's momentum statistics after a (possible) kick.

    raw expectation is reported in calibrated units c*folded_index; edge_mass
    is the probability on the two extreme folded bins, used for overflow
    detection.
    """

    expectation: float
    edge_mass: float

    @property
    def overflowed(self) -> bool:
        return self.edge_mass >= OVERFLOW_EDGE_MASS


class WaveState:
    """Normalized complex amplitudes over a tensor product of registers.

    Amplitudes are held as an ndarray with one axis per register, in layout
    order. The state is exclusively owned during mutation: gate application
    functions may modify ``psi`` in place and return the same object.
    """

    def __init__(self, names, specs, psi: np.ndarray):
        if len(names) != len(specs):
            raise ValueError("names and specs must have equal length")
        if tuple(psi.shape) != tuple(s.dim for s in specs):
            raise ValueError(
                f"amplitude shape {psi.shape} does not match register dims "
                f"{tuple(s.dim for s in specs)}"
            )
        self.names = list(names)
        self.specs = list(specs)
        self.psi = psi
        self._axis = {n: i for i, n in enumerate(self.names)}
        if len(self._axis) != len(self.names):
            raise ValueError("register names must be unique")

    @classmethod
    def from_basis(cls, names, specs, indices=None, dtype=np.complex128) -> "WaveState":
        """Computational basis state; default is index 0 on every register."""
        specs = list(specs)
        psi = np.zeros(tuple(s.dim for s in specs), dtype=dtype)
        if indices is None:
            indices = (0,) * len(specs)
        psi[tuple(indices)] = 1.0
        return cls(names, specs, psi)

    @classmethod
    def from_factors(cls, names, specs, factors) -> "WaveState":
        """Product state from per-register amplitude vectors."""
        psi = None
        for f in factors:
            f = np.asarray(f)
            psi = f if psi is None else np.multiply.outer(psi, f)
        return cls(names, specs, psi)

    def axis(self, name: str) -> int:
        return self._axis[name]

    def spec(self, name: str):
        return self.specs[self._axis[name]]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.psi.ravel()))

    def normalize(self) -> "WaveState":
        self.psi /= self.norm
        return self

    def copy(self) -> "WaveState":
        return WaveState(self.names, self.specs, self.psi.copy())

    def probabilities(self, name: str) -> np.ndarray:
        """Marginal Born distribution over one register's basis indices."""
        ax = self.axis(name)
        other = tuple(i for i in range(self.psi.ndim) if i != ax)
        p = np.abs(self.psi) ** 2
        return p.sum(axis=other) if other else p

    def overlap(self, other: "WaveState") -> complex:
        return complex(np.vdot(other.psi, self.psi))

    def reduced_purity(self, names) -> float:
        """Purity tr(rho^2) of the reduced state on the given registers."""
        keep = [self.axis(n) for n in names]
        rest = [i for i in range(self.psi.ndim) if i not in keep]
        mat = np.transpose(self.psi, keep + rest).reshape(
            int(np.prod([self.psi.shape[i] for i in keep])), -1
        )
        s = np.linalg.svd(mat, compute_uv=False)
        return float(np.sum(s**4))


def position_values(spec: QuditSpec) -> np.ndarray:
    """Monotone position grid from a to b with spacing (b-a)/(d-1)."""
    return spec.values


def _fft_axis(psi: np.ndarray, axis: int, inverse: bool) -> np.ndarray:
    d = psi.shape[axis]
    if inverse:
        return scipy.fft.ifft(psi, axis=axis, workers=-1, norm=None) * np.sqrt(d)
    return scipy.fft.fft(psi, axis=axis, workers=-1, norm=None) / np.sqrt(d)


def fourier(state: WaveState, register: str) -> WaveState:
    """Apply the unitary DFT with kernel omega^(-jk)/sqrt(d) on one register."""
    ax = state.axis(register)
    state.psi = _fft_axis(state.psi, ax, inverse=False)
    return state


def inverse_fourier(state: WaveState, register: str) -> WaveState:
    ax = state.axis(register)
    state.psi = _fft_axis(state.psi, ax, inverse=True)
    return state


def delta_kernel(gamma, d: int):
    """Periodic interpolation kernel (1/d) * sum_j omega_d^(gamma*j).

    Equals the closed form (1/d)*omega^((d-1)*gamma/2)*sin(pi*gamma)/sin(pi*gamma/d),
    with the removable singularity at gamma = 0 (mod d) taking the value
    omega^((d-1)*gamma/2) * (+/-)1 there (1 at gamma = 0).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    gamma = np.asarray(gamma, dtype=float)
    phase = np.exp(1j * np.pi * (d - 1) * gamma / d)
    num = np.sin(np.pi * gamma)
    den = np.sin(np.pi * gamma / d)
    # L'Hopital limit at gamma = 0 (mod d), where num and den vanish together
    limit = d * np.cos(np.pi * gamma) / np.cos(np.pi * gamma / d)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.abs(den) < 1e-12, limit, num / den)
    out = phase * ratio / d
    return complex(out) if out.ndim == 0 else out


def delta_kernel_direct(gamma, d: int):
    """Brute-force d-term sum; the independent oracle for delta_kernel."""
    j = np.arange(d)
    return np.sum(np.exp(2j * np.pi * np.multiply.outer(np.asarray(gamma), j) / d), axis=-1) / d


def fractional_phase(state: WaveState, register: str, alpha: float) -> WaveState:
    """Apply Z_d^alpha = diag(omega^(-alpha*j)) on one register."""
    ax = state.axis(register)
    d = state.psi.shape[ax]
    ph = np.exp(-2j * np.pi * alpha * np.arange(d) / d)
    sl = [None] * state.psi.ndim
    sl[ax] = slice(None)
    state.psi = state.psi * ph[tuple(sl)]
    return state


def fractional_shift(state: WaveState, register: str, alpha: float) -> WaveState:
    """Apply the fractional shift X_d^alpha through Fourier conjugation.

    X_d^alpha = F^dag Z_d^alpha F; for non-integer alpha the register ends in
    a superposition of integer shifts weighted by the delta kernel, peaked at
    the integer nearest alpha.
    """
    fourier(state, register)
    fractional_phase(state, register, alpha)
    inverse_fourier(state, register)
    return state


def _gaussian_amplitudes(spec: QuditSpec, pointer: GaussianPointer) -> np.ndarray:
    phi = spec.values
    amp = np.exp(-((phi - pointer.phi0) ** 2) / (4.0 * pointer.sigma0**2))
    if not np.any(amp > 0):  # sigma far below the grid scale: delta limit
        amp[np.argmin(np.abs(phi - pointer.phi0))] = 1.0
    amp = amp.astype(np.complex128) * np.exp(1j * pointer.pi0 * phi)
    return amp / np.linalg.norm(amp)


def prepare_gaussian(spec: QuditSpec, pointer: GaussianPointer) -> WaveState:
    """Grid-sampled normalized Gaussian pointer state on a single register.

    The linear phase factor exp(i*pi0*pos) sets the calibrated momentum
    expectation to pi0. Warns when the +/-3 sigma support does not fit in the
    interval.
    """
    if 3.0 * pointer.sigma0 > (spec.b - spec.a) / 2.0:
        warnings.warn(
            f"pointer sigma0={pointer.sigma0} is wide for interval "
            f"[{spec.a}, {spec.b}]; support escapes the register",
            OverflowWarning,
            stacklevel=2,
        )
    return WaveState(["q0"], [spec], _gaussian_amplitudes(spec, pointer))


def product_gaussian_state(names, specs, pointers, dtype=np.complex128) -> WaveState:
    """Product of Gaussian pointer states over several qudit registers."""
    factors = [
        _gaussian_amplitudes(s, p).astype(dtype) for s, p in zip(specs, pointers)
    ]
    return WaveState.from_factors(names, specs, factors)


def folded_momentum_values(spec: QuditSpec) -> np.ndarray:
    """Calibrated momentum value for each raw Fourier index 0..d-1.

    Raw index k folds to the signed window [-floor(d/2), floor(d/2)] via
    ((k + floor(d/2)) mod d) - floor(d/2), then scales by the calibration
    constant c = 2*pi*(d-1)/(d*(b-a)).
    """
    d = spec.d
    k = np.arange(d)
    half = d // 2
    folded = ((k + half) % d) - half
    return spec.momentum_unit * folded


def measure_position_expectation(state: WaveState, registers) -> np.ndarray:
    """Exact <pos> per listed qudit register."""
    out = []
    for name in registers:
        p = state.probabilities(name)
        out.append(float(p @ state.spec(name).values))
    return np.asarray(out)


def momentum_distribution(state: WaveState, register: str) -> np.ndarray:
    """Born distribution over the raw Fourier indices of one register."""
    ax = state.axis(register)
    tilde = _fft_axis(state.psi, ax, inverse=False)
    p = np.abs(tilde) ** 2
    other = tuple(i for i in range(p.ndim) if i != ax)
    p = p.sum(axis=other) if other else p
    return p / p.sum()


def measure_momenta_joint(state: WaveState, registers):
    """Exact calibrated momentum expectations via one joint Fourier transform.

    Equivalent to measure_momentum_expectation in exact mode (summing the Born
    weights over a Fourier-transformed axis leaves every other marginal
    unchanged), but costs a single fftn over the listed axes.
    """
    axes = [state.axis(n) for n in registers]
    tilde = scipy.fft.fftn(state.psi, axes=axes, workers=-1)
    p = np.abs(tilde) ** 2
    values, readouts = [], []
    for name, ax in zip(registers, axes):
        other = tuple(i for i in range(p.ndim) if i != ax)
        marg = p.sum(axis=other)
        marg = marg / marg.sum()
        spec = state.spec(name)
        vals = folded_momentum_values(spec)
        edge = float(marg[int(np.argmax(vals))] + marg[int(np.argmin(vals))])
        exp = float(marg @ vals)
        values.append(exp)
        readouts.append(MomentumReadout(expectation=exp, edge_mass=edge))
    return np.asarray(values), readouts


def measure_momentum_expectation(
    state: WaveState,
    registers,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
    return_readouts: bool = False,
):
    """Calibrated folded momentum expectation per register.

    Default is the exact Born expectation. With ``shots`` set, draws that many
    samples per register from the momentum distribution and returns the sample
    mean of the calibrated values.
    """
    if shots is not None and shots <= 0:
        raise ValueError("shot mode requires a positive shot count")
    if shots is not None and rng is None:
        raise ValueError("shot mode requires an rng")
    values, readouts = [], []
    for name in registers:
        spec = state.spec(name)
        p = momentum_distribution(state, name)
        vals = folded_momentum_values(spec)
        half = spec.d // 2
        extremes = [int(np.argmax(vals)), int(np.argmin(vals))]
        edge = float(p[extremes[0]] + p[extremes[1]]) if half > 0 else 0.0
        if shots is None:
            exp = float(p @ vals)
        else:
            draws = rng.choice(spec.d, size=shots, p=p)
            exp = float(np.mean(vals[draws]))
        values.append(exp)
        readouts.append(MomentumReadout(expectation=exp, edge_mass=edge))
    values = np.asarray(values)
    if return_readouts:
        return values, readouts
    return values
