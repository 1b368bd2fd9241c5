"""Quantized sawtooth-map dynamics on the torus.

The environment lives in an N-dimensional Hilbert space obtained by closing
the phase space on the torus 0 <= theta < 2*pi, -pi <= P < pi.  States are
stored in the momentum eigenbasis with integer indices n = -N/2 .. N/2-1 and
rescaled momentum P_n = T*n, where T = 2*pi/N is the effective Planck
constant.  One period of the kicked dynamics is a quadratic phase in the
angle representation (the kick) followed by a quadratic phase in the momentum
representation (the kinetic term); the two are connected by unitary FFTs.

Grid conventions: theta_m = 2*pi*m/N for m = 0..N-1; momentum slots are in
ascending order, so array slot i holds index n = i - N//2.  The
time-reversal-breaking shifts enter as P -> P + T*phi0 inside the kinetic
phase and theta -> theta + T*theta0 inside the kick phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# sqrt(2)/5, the default symmetry-breaking shift for both phi0 and theta0
DEFAULT_SHIFT = math.sqrt(2.0) / 5.0

# 2*pi to extended precision; np.pi alone would truncate at float64 before
# the modular reduction of large quadratic phases.
_TWO_PI_LD = np.longdouble("6.2831853071795864769252867665590057684")


@dataclass(frozen=True)
class TorusSpec:
    """The quantized phase space: dimension and symmetry-breaking shifts.

    Attributes
    ----------
    dim : int
        Hilbert-space dimension N (>= 2, powers of 2 recommended so the
        spectral transforms hit the FFT fast path).
    phi0, theta0 : float
        Momentum and angle shift parameters; phi0 acts like an
        Aharonov-Bohm flux and both default to sqrt(2)/5.
    """

    dim: int
    phi0: float = DEFAULT_SHIFT
    theta0: float = DEFAULT_SHIFT

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"Hilbert-space dimension must be >= 2, got {self.dim}")

    @property
    def hbar_eff(self) -> float:
        """Effective Planck constant T = 2*pi/N."""
        return 2.0 * math.pi / self.dim

    def momentum_indices(self) -> np.ndarray:
        """Integer momentum indices n = -N/2 .. N/2-1 in slot order."""
        return np.arange(self.dim) - self.dim // 2

    def angle_grid(self) -> np.ndarray:
        """Angle grid theta_m = 2*pi*m/N."""
        return 2.0 * np.pi * np.arange(self.dim) / self.dim


@dataclass(frozen=True)
class EnvState:
    """A pure environment state in the momentum eigenbasis.

    Treated as immutable: every operation returns a new state and never
    writes into ``amplitudes``.
    """

    spec: TorusSpec
    amplitudes: np.ndarray = field(repr=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def momentum_expectation(self) -> float:
        """<P> on the torus branch P_n = T*n."""
        t = self.spec.hbar_eff
        prob = np.abs(self.amplitudes) ** 2
        return float(np.sum(prob * t * self.spec.momentum_indices()))


@dataclass(frozen=True)
class KickCoefficient:
    """Coefficient of (theta - pi)^2 / 2 in the kick phase.

    For the bare map this is k = K/T; a conditional qubit passage uses
    (K - eta*T*s)/T with s = +-1 the qubit's sigma_z eigenvalue.
    """

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("kick coefficient must be finite")


def make_spec(dim: int, phi0: float = DEFAULT_SHIFT, theta0: float = DEFAULT_SHIFT) -> TorusSpec:
    """Build a TorusSpec; rejects dim < 2."""
    return TorusSpec(dim=dim, phi0=phi0, theta0=theta0)


def momentum_eigenstate(spec: TorusSpec, index: int) -> EnvState:
    """Unit amplitude on momentum index n = ``index``, zero elsewhere."""
    n = spec.dim
    if not -(n // 2) <= index < n - n // 2:
        raise ValueError(f"momentum index {index} outside [-{n // 2}, {n - n // 2 - 1}]")
    amps = np.zeros(n, dtype=np.complex128)
    amps[index + n // 2] = 1.0
    return EnvState(spec, amps)


def haar_random_state(spec: TorusSpec, seed: int) -> EnvState:
    """Haar-uniform pure state: normalized i.i.d. complex Gaussians.

    Deterministic for a fixed seed (PCG64 stream).
    """
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(spec.dim) + 1j * rng.standard_normal(spec.dim)
    amps /= np.linalg.norm(amps)
    return EnvState(spec, amps)


# ---------------------------------------------------------------------------
# Phase vectors and spectral transforms.  These operate on raw arrays so the
# channel layer can batch them over many branches; the EnvState operations
# below are thin wrappers.
# ---------------------------------------------------------------------------

def _reduced_phase(arg_ld: np.ndarray) -> np.ndarray:
    """Reduce a longdouble phase array mod 2*pi and return float64."""
    return np.mod(arg_ld, _TWO_PI_LD).astype(np.float64)


def kinetic_phase(spec: TorusSpec) -> np.ndarray:
    """Diagonal factors exp(-i (P_n + T*phi0)^2 / (2T)) in slot order."""
    t_ld = _TWO_PI_LD / spec.dim
    n = spec.momentum_indices().astype(np.longdouble)
    arg = t_ld * (n + np.longdouble(spec.phi0)) ** 2 / 2
    return np.exp(-1j * _reduced_phase(arg))


def kick_phase(spec: TorusSpec, coeff: float) -> np.ndarray:
    """Diagonal factors exp(+i coeff (theta_m + T*theta0 - pi)^2 / 2) on the angle grid."""
    t_ld = _TWO_PI_LD / spec.dim
    m = np.arange(spec.dim, dtype=np.longdouble)
    theta = _TWO_PI_LD * m / spec.dim + t_ld * np.longdouble(spec.theta0) - _TWO_PI_LD / 2
    arg = np.longdouble(coeff) * theta**2 / 2
    return np.exp(1j * _reduced_phase(arg))


def coupling_phase(spec: TorusSpec, strength: float, s: int) -> np.ndarray:
    """Diagonal factors exp(+i s * strength * sin(p_n)) with p_n = P_n/T = n.

    ``strength`` is the phase amplitude accumulated over one qubit transit,
    i.e. the time-continuous coupling eta*sin(p) integrated over the transit
    and expressed per map iteration.
    """
    p = spec.momentum_indices().astype(np.float64)
    return np.exp(1j * s * strength * np.sin(p))


def to_angle(amplitudes: np.ndarray, axis: int = -1) -> np.ndarray:
    """Momentum-slot amplitudes -> angle-grid values, unitary normalization."""
    n = amplitudes.shape[axis]
    return math.sqrt(n) * np.fft.ifft(np.fft.ifftshift(amplitudes, axes=axis), axis=axis)


def from_angle(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Angle-grid values -> momentum-slot amplitudes, inverse of to_angle."""
    n = values.shape[axis]
    return np.fft.fftshift(np.fft.fft(values, axis=axis), axes=axis) / math.sqrt(n)


def apply_kinetic(state: EnvState) -> EnvState:
    """One free-propagation factor (diagonal in momentum)."""
    return EnvState(state.spec, state.amplitudes * kinetic_phase(state.spec))


def apply_kick(state: EnvState, coeff: KickCoefficient) -> EnvState:
    """One kick factor: transform to the angle grid, phase, transform back."""
    values = to_angle(state.amplitudes)
    values *= kick_phase(state.spec, coeff.value)
    return EnvState(state.spec, from_angle(values))


def floquet_step(state: EnvState, k_strength: float) -> EnvState:
    """One map iteration with effective kick strength K_eff = ``k_strength``.

    The kick acts first, then the kinetic factor, matching the one-period
    evolution operator of the quantized map.
    """
    t = state.spec.hbar_eff
    kicked = apply_kick(state, KickCoefficient(k_strength / t))
    return apply_kinetic(kicked)


def apply_momentum_coupling_phase(state: EnvState, strength: float, s: int) -> EnvState:
    """Momentum-diagonal coupling phase exp(+i s * strength * sin(p_n))."""
    return EnvState(state.spec, state.amplitudes * coupling_phase(state.spec, strength, s))


def overlap(a: EnvState, b: EnvState) -> complex:
    """<a|b> = sum_n conj(a_n) b_n; rejects dimension mismatch."""
    if a.spec.dim != b.spec.dim:
        raise ValueError("overlap of states with different dimensions")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
