"""The dephasing channel over a qubit train coupled to the torus environment.

Each qubit rides through the environment for one map iteration; its sigma_z
eigenvalue selects a conditional one-period evolution.  Because every
operator is diagonal in the computational basis of the train, the channel is
pure dephasing: populations are untouched and the off-diagonal element (j, l)
is multiplied by the overlap <omega_l|omega_j> of the conditional environment
states.  All entropies derive from that overlap family.

Two coupling realizations are supported: a rescaling of the quadratic kick
(conditional kick strength K -+ eta*T) and a momentum-diagonal phase
exp(+-i eta sin(p)) accumulated across one transit.

Branch propagation shares prefixes through a binary tree, so a train of
``n`` qubits costs 2*(2^n - 1) conditional map applications.  Beyond the
branch budget the same channel is iterated directly on the environment
density matrix, one use per step, which reaches arbitrary train lengths at
O(N^2 log N) per use.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .torus import (
    EnvState,
    TorusSpec,
    coupling_phase,
    from_angle,
    kick_phase,
    kinetic_phase,
    to_angle,
)

# eigenvalues below this are treated as exact zeros in entropy sums
EIGENVALUE_CLIP = 1e-12

# weighted Gram / environment spectra below -1e-8 signal numerical corruption
PSD_CORRUPTION_FLOOR = -1e-8

DEFAULT_MEMORY_BUDGET = 2 * 1024**3  # bytes of branch-state storage


class ResourceBudgetError(RuntimeError):
    """A computation would exceed its declared memory budget."""


class Coupling(enum.Enum):
    """How the qubit couples to the environment during its transit."""

    KICKED_QUADRATIC = "kicked_quadratic"
    CONTINUOUS_SIN_P = "continuous_sin_p"

    @classmethod
    def from_name(cls, name: str) -> "Coupling":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown coupling kind {name!r}; expected one of: {valid}")


@dataclass(frozen=True)
class ChannelConfig:
    """Qubit-train protocol parameters.

    Attributes
    ----------
    spec : TorusSpec
        Environment phase space.
    k_param : float
        Classical chaos parameter K of the bare map.
    coupling_strength : float
        eta >= 0; eta = 0 leaves every coherence untouched.
    n_qubits : int
        Number of channel uses in the train.
    spacing : int
        Ratio n0 = tau/tau_p between consecutive entries; n0 - 1 bare map
        iterations separate consecutive qubits.
    coupling : Coupling
        Realization of the qubit-environment interaction.
    """

    spec: TorusSpec
    k_param: float
    coupling_strength: float
    n_qubits: int
    spacing: int = 1
    coupling: Coupling = Coupling.KICKED_QUADRATIC

    def __post_init__(self):
        if self.coupling_strength < 0:
            raise ValueError("coupling strength must be nonnegative")
        if self.n_qubits < 1:
            raise ValueError("the train needs at least one qubit")
        if self.spacing < 1:
            raise ValueError("spacing ratio n0 must be a positive integer")

    @property
    def transit_time(self) -> float:
        """tau_p = T: each qubit rides for exactly one map iteration."""
        return self.spec.hbar_eff

    @property
    def entry_interval(self) -> float:
        """tau = n0 * T between consecutive qubit entries."""
        return self.spacing * self.spec.hbar_eff

    @property
    def train_time(self) -> float:
        """tau_N = ((N_q - 1) n0 + 1) * T for the whole train."""
        return ((self.n_qubits - 1) * self.spacing + 1) * self.spec.hbar_eff


def bit_eigenvalue(bit: int) -> int:
    """sigma_z eigenvalue convention: bit 0 -> +1, bit 1 -> -1."""
    return 1 - 2 * bit


def bitstring(index: int, n_qubits: int) -> tuple[int, ...]:
    """Bits (j_1, .., j_n) of a branch index, first qubit most significant."""
    return tuple((index >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits))


class _TrainPropagator:
    """Per-config phase tables for batched branch propagation.

    Operates on arrays of shape (..., N); a conditional step is one map
    iteration with the coupling folded in according to the coupling kind.
    """

    def __init__(self, config: ChannelConfig):
        spec = config.spec
        t = spec.hbar_eff
        eta = config.coupling_strength
        self.kin = kinetic_phase(spec)
        self.kick_bare = kick_phase(spec, config.k_param / t)
        if config.coupling is Coupling.KICKED_QUADRATIC:
            self.kick_cond = {
                +1: kick_phase(spec, config.k_param / t - eta),
                -1: kick_phase(spec, config.k_param / t + eta),
            }
            self.post = {+1: None, -1: None}
        else:
            self.kick_cond = {+1: self.kick_bare, -1: self.kick_bare}
            self.post = {
                +1: coupling_phase(spec, eta, +1),
                -1: coupling_phase(spec, eta, -1),
            }

    def bare_step(self, amps: np.ndarray) -> np.ndarray:
        return from_angle(to_angle(amps) * self.kick_bare) * self.kin

    def conditional_step(self, amps: np.ndarray, s: int) -> np.ndarray:
        out = from_angle(to_angle(amps) * self.kick_cond[s]) * self.kin
        post = self.post[s]
        return out if post is None else out * post


@dataclass(frozen=True)
class BranchStates:
    """The 2^Nq conditional environment states of a qubit train.

    ``states[j]`` is the environment amplitude vector conditioned on the
    train bit-string ``j`` (first qubit = most significant bit).
    """

    config: ChannelConfig
    omega0: EnvState
    states: np.ndarray = field(repr=False)

    @property
    def n_branches(self) -> int:
        return self.states.shape[0]

    def state(self, index: int) -> EnvState:
        return EnvState(self.config.spec, self.states[index])


def propagate_branches(
    config: ChannelConfig,
    omega0: EnvState,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> BranchStates:
    """Evolve the conditional environment states for every train bit-string.

    Branches share prefixes: each tree level doubles the current front and
    applies one conditional map iteration per child, followed by the n0 - 1
    bare iterations separating consecutive qubits.
    """
    if omega0.spec != config.spec:
        raise ValueError("initial state lives on a different torus")
    needed = (2**config.n_qubits) * config.spec.dim * 16
    if needed > memory_budget:
        raise ResourceBudgetError(
            f"branch storage needs {needed} bytes, budget is {memory_budget};"
            " reduce n_qubits or raise the budget"
        )
    prop = _TrainPropagator(config)
    states = omega0.amplitudes[np.newaxis, :]
    for n in range(config.n_qubits):
        grown = np.repeat(states, 2, axis=0)
        grown[0::2] = prop.conditional_step(grown[0::2], +1)
        grown[1::2] = prop.conditional_step(grown[1::2], -1)
        states = grown
        if n < config.n_qubits - 1:
            for _ in range(config.spacing - 1):
                states = prop.bare_step(states)
    return BranchStates(config, omega0, states)


@dataclass(frozen=True)
class GramMatrix:
    """Hermitian overlap matrix G[j, l] = <omega_l|omega_j>."""

    entries: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def gram_matrix(branches: BranchStates) -> GramMatrix:
    """Overlaps of all branch pairs; Hermitian by construction.

    The strict upper triangle is computed once and mirror-conjugated; the
    diagonal is the (real) squared norm of each branch.
    """
    s = branches.states
    product = s @ s.conj().T
    g = np.triu(product, 1)
    g = g + g.conj().T
    np.fill_diagonal(g, np.einsum("jn,jn->j", s, s.conj()).real)
    return GramMatrix(g)


def entropy_from_spectrum(eigenvalues: np.ndarray, clip: float = EIGENVALUE_CLIP) -> float:
    """-sum(lam * log2 lam) over eigenvalues above ``clip`` (0 log 0 := 0)."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.min(initial=0.0) < PSD_CORRUPTION_FLOOR:
        raise ArithmeticError(
            f"spectrum has eigenvalue {eigenvalues.min():.3e} below the PSD"
            " corruption floor; overlap matrix is numerically invalid"
        )
    kept = eigenvalues[eigenvalues > clip]
    value = float(-np.sum(kept * np.log2(kept)))
    if value < -1e-8:
        raise ArithmeticError(
            f"entropy {value:.3e} is negative beyond roundoff; spectrum is invalid"
        )
    # roundoff on eigenvalues ~1 can leave a few ulps of negative entropy
    return max(value, 0.0)


def entropy_exchange_gram(branches: BranchStates) -> float:
    """Entropy of the weighted Gram matrix 2^-Nq G (dimension 2^Nq)."""
    w = gram_matrix(branches).entries / branches.n_branches
    return entropy_from_spectrum(np.linalg.eigvalsh(w))


def entropy_exchange_env(branches: BranchStates) -> float:
    """Entropy of the environment state 2^-Nq sum_j |omega_j><omega_j| (dimension N)."""
    s = branches.states
    rho = (s.T @ s.conj()) / branches.n_branches
    return entropy_from_spectrum(np.linalg.eigvalsh(rho))


def entropy_exchange(branches: BranchStates) -> float:
    """Entropy exchange for the unpolarized train input, in bits.

    The weighted Gram matrix and the final environment density matrix share
    their nonzero spectra; the smaller eigenproblem is solved.
    """
    if branches.n_branches <= branches.config.spec.dim:
        return entropy_exchange_gram(branches)
    return entropy_exchange_env(branches)


def coherent_information(n_qubits: int, entropy: float) -> float:
    """I_c = Nq - S_e for the unpolarized input (whose output entropy is Nq)."""
    return n_qubits - entropy


@dataclass(frozen=True)
class QubitTrainOutput:
    """Summary of one train transmission with the unpolarized input."""

    entropy_exchange: float
    coherent_information: float
    rate: float
    gram: GramMatrix


def qubit_train_output(config: ChannelConfig, omega0: EnvState) -> QubitTrainOutput:
    """Propagate a train and collect entropy exchange, I_c and rate R = S_e/Nq."""
    branches = propagate_branches(config, omega0)
    if branches.n_branches <= config.spec.dim:
        g = gram_matrix(branches)
        se = entropy_from_spectrum(np.linalg.eigvalsh(g.entries / branches.n_branches))
    else:
        g = GramMatrix(np.empty((0, 0), dtype=np.complex128))
        se = entropy_exchange_env(branches)
    return QubitTrainOutput(
        entropy_exchange=se,
        coherent_information=coherent_information(config.n_qubits, se),
        rate=se / config.n_qubits,
        gram=g,
    )


def _check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")


def apply_channel(rho_in: np.ndarray, gram: GramMatrix) -> np.ndarray:
    """Entrywise product (rho')_{jl} = rho_{jl} G_{jl}; the diagonal is copied
    from the input untouched."""
    rho_in = np.asarray(rho_in, dtype=np.complex128)
    _check_density_matrix(rho_in)
    if rho_in.shape != gram.entries.shape:
        raise ValueError("density matrix and Gram matrix dimensions differ")
    out = rho_in * gram.entries
    np.fill_diagonal(out, np.diagonal(rho_in))
    return out


def entanglement_fidelity(rho_in: np.ndarray, gram: GramMatrix) -> float:
    """F_e = sum_{jl} p_j p_l G_{jl} with p the input populations.

    For a pure dephasing channel the entanglement fidelity depends on the
    input only through its diagonal: the Kraus operators are diagonal, so
    F_e = sum_k |Tr(rho A_k)|^2 collapses onto the populations.
    """
    p = np.real(np.diagonal(rho_in)).astype(float)
    value = float(np.real(p @ gram.entries @ p))
    return min(max(value, 0.0), 1.0)


def _xlog2x(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def stochastic_rate(g: float) -> float:
    """Entropy exchange rate R(g) of the single-parameter dephasing model.

    R = -((2-g)/2) log2((2-g)/2) - (g/2) log2(g/2), with 0 log 0 := 0.
    """
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"dephasing parameter must lie in [0, 1], got {g}")
    terms = _xlog2x(np.array([(2.0 - g) / 2.0, g / 2.0]))
    return float(-terms.sum())


def capacity_estimate(rate: float) -> float:
    """One-shot capacity estimate Q = 1 - R for the degradable dephasing model.

    Valid under the forgetfulness conjecture for this environment; it is the
    single-use coherent information per qubit, not a regularized capacity.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    return 1.0 - rate


# ---------------------------------------------------------------------------
# Environment-density-matrix route: iterate the conjugate channel directly,
# which reaches train lengths far beyond the 2^Nq branch budget.
# ---------------------------------------------------------------------------

def _sandwich_to_angle(rho: np.ndarray) -> np.ndarray:
    """F rho F^dagger via two batched spectral transforms."""
    x = to_angle(rho, axis=0)
    return to_angle(x.conj().T, axis=0).conj().T


def _sandwich_from_angle(rho: np.ndarray) -> np.ndarray:
    x = from_angle(rho, axis=0)
    return from_angle(x.conj().T, axis=0).conj().T


class _DensityPropagator:
    """One-channel-use update of the environment density matrix.

    Averaging the two conditional unitaries over the equal-weight qubit
    basis factorizes into the bare one-period map plus a dephasing mask
    cos(phi_m - phi_l) in the coupling eigenbasis, where phi is the
    conditional phase profile.  This is exact, not an approximation.
    """

    def __init__(self, config: ChannelConfig):
        spec = config.spec
        t = spec.hbar_eff
        eta = config.coupling_strength
        self.kin = kinetic_phase(spec)
        self.kick_bare = kick_phase(spec, config.k_param / t)
        if config.coupling is Coupling.KICKED_QUADRATIC:
            theta = spec.angle_grid() + t * spec.theta0 - np.pi
            phi = eta * theta**2 / 2.0
            self.mask_in_momentum = False
        else:
            phi = eta * np.sin(spec.momentum_indices().astype(float))
            self.mask_in_momentum = True
        self.mask = np.cos(phi[:, np.newaxis] - phi[np.newaxis, :])

    def _bare_sandwich(self, rho: np.ndarray, angle_mask: np.ndarray | None) -> np.ndarray:
        a = _sandwich_to_angle(rho)
        if angle_mask is not None:
            a *= angle_mask
        a *= self.kick_bare[:, np.newaxis]
        a *= self.kick_bare.conj()[np.newaxis, :]
        rho = _sandwich_from_angle(a)
        rho *= self.kin[:, np.newaxis]
        rho *= self.kin.conj()[np.newaxis, :]
        return rho

    def bare_map(self, rho: np.ndarray) -> np.ndarray:
        """U_K rho U_K^dagger."""
        return self._bare_sandwich(rho, None)

    def conditional_use(self, rho: np.ndarray) -> np.ndarray:
        """(1/2) sum_s U_s rho U_s^dagger for one qubit passage."""
        if self.mask_in_momentum:
            return self._bare_sandwich(rho, None) * self.mask
        return self._bare_sandwich(rho, self.mask)


def entropy_series(
    config: ChannelConfig,
    omega0: EnvState,
    nq_values: list[int] | np.ndarray,
    branch_limit: int | None = None,
) -> np.ndarray:
    """S_e after each requested prefix length of a single growing train.

    Prefixes short enough that 2^n <= min(N, branch_limit) run on the shared
    branch tree and diagonalize the weighted Gram matrix; longer prefixes
    switch to iterating the environment density matrix, whose nonzero
    spectrum is identical.  The spacing schedule matches propagate_branches.
    """
    nq_values = sorted(int(v) for v in nq_values)
    if not nq_values or nq_values[0] < 1:
        raise ValueError("prefix lengths must be positive")
    if nq_values[-1] > config.n_qubits:
        raise ValueError("requested prefix exceeds the configured train length")
    if omega0.spec != config.spec:
        raise ValueError("initial state lives on a different torus")
    limit = config.spec.dim if branch_limit is None else min(branch_limit, config.spec.dim)

    prop = _TrainPropagator(config)
    wanted = set(nq_values)
    out: dict[int, float] = {}
    states = omega0.amplitudes[np.newaxis, :]
    rho = None
    dens = None
    for n in range(1, nq_values[-1] + 1):
        if rho is None and 2 * states.shape[0] > limit:
            rho = (states.T @ states.conj()) / states.shape[0]
            states = None
            dens = _DensityPropagator(config)
        if rho is None:
            states = np.repeat(states, 2, axis=0)
            states[0::2] = prop.conditional_step(states[0::2], +1)
            states[1::2] = prop.conditional_step(states[1::2], -1)
            if n in wanted:
                g = states @ states.conj().T
                out[n] = entropy_from_spectrum(np.linalg.eigvalsh(g) / states.shape[0])
            if n < nq_values[-1]:
                for _ in range(config.spacing - 1):
                    states = prop.bare_step(states)
        else:
            rho = dens.conditional_use(rho)
            if n in wanted:
                out[n] = entropy_from_spectrum(np.linalg.eigvalsh(rho))
            if n < nq_values[-1]:
                for _ in range(config.spacing - 1):
                    rho = dens.bare_map(rho)
    return np.array([out[n] for n in nq_values])


def overlap_decay_curve(config: ChannelConfig, omega0: EnvState, n_uses: int) -> np.ndarray:
    """|<omega_-|omega_+>|^2 after 0..n_uses passages of opposite-bit qubits.

    The two extreme branches (all bits 0 vs all bits 1) diverge by one
    conditional kick per use; the squared overlap is the environment
    fidelity whose decay rate is the single-use dephasing rate.
    """
    prop = _TrainPropagator(config)
    plus = omega0.amplitudes.copy()
    minus = omega0.amplitudes.copy()
    fidelity = np.empty(n_uses + 1)
    fidelity[0] = abs(np.vdot(minus, plus)) ** 2
    for t in range(1, n_uses + 1):
        plus = prop.conditional_step(plus, +1)
        minus = prop.conditional_step(minus, -1)
        if t < n_uses:
            for _ in range(config.spacing - 1):
                plus = prop.bare_step(plus)
                minus = prop.bare_step(minus)
        fidelity[t] = abs(np.vdot(minus, plus)) ** 2
    return fidelity


def fit_overlap_decay_rate(fidelity: np.ndarray, dim: int) -> float:
    """Exponential rate of an overlap-fidelity curve, one value per map step.

    The fit is restricted to 0.2 <= F <= 0.9 and to times below half the
    Heisenberg time (N/2 steps): past it the discreteness of the
    quasi-energy spectrum freezes the decay and would bias the rate.
    """
    fidelity = np.asarray(fidelity, dtype=float)
    steps = np.arange(fidelity.size)
    mask = (fidelity >= 0.2) & (fidelity <= 0.9) & (steps <= dim // 2)
    if mask.sum() < 3:
        raise ValueError("fewer than three usable points in the decay window")
    return float(-np.polyfit(steps[mask], np.log(fidelity[mask]), 1)[0])


def fit_entropy_rate(nq_values: np.ndarray, entropies: np.ndarray, dim: int) -> float:
    """Rate R from the least-squares slope of S_e vs Nq, pre-saturation only.

    The window is Nq >= 2 (the first use carries transient weight) and
    S_e <= 0.8 log2(N) (the growth is linear only before the finite
    environment saturates); at least two points must survive.
    """
    nq_values = np.asarray(nq_values, dtype=float)
    entropies = np.asarray(entropies, dtype=float)
    keep = (entropies <= 0.8 * math.log2(dim)) & (nq_values >= 2)
    if keep.sum() < 2:
        raise ValueError("fewer than two pre-saturation points to fit")
    return float(np.polyfit(nq_values[keep], entropies[keep], 1)[0])


@dataclass(frozen=True)
class RateScanPoint:
    """One row of a rate-vs-coupling scan."""

    coupling_strength: float
    mean_rate: float
    stderr: float
    rates: tuple[float, ...]


def rate_vs_eta_scan(
    config: ChannelConfig,
    etas: list[float] | np.ndarray,
    seeds: list[int],
) -> list[RateScanPoint]:
    """Mean rate R = S_e/Nq over Haar seeds for each coupling strength.

    The template config fixes everything except ``coupling_strength``.
    """
    from dataclasses import replace

    from .torus import haar_random_state

    if not seeds:
        raise ValueError("seed list must not be empty")
    points = []
    for eta in etas:
        cfg = replace(config, coupling_strength=float(eta))
        rates = []
        for seed in seeds:
            omega0 = haar_random_state(config.spec, seed)
            rates.append(qubit_train_output(cfg, omega0).rate)
        rates_arr = np.array(rates)
        stderr = rates_arr.std(ddof=1) / math.sqrt(len(rates)) if len(rates) > 1 else 0.0
        points.append(
            RateScanPoint(float(eta), float(rates_arr.mean()), float(stderr), tuple(rates))
        )
    return points
