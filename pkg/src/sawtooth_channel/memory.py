"""Double-blocking memory experiments on the dephasing channel.

A block is Nq qubit passages followed by L idle map iterations.  Two blocks
are transmitted either through one continuously evolving environment (the
memoryful output) or through a fresh environment per block (the memoryless
reference, whose overlaps factorize into per-block products).  The channel
forgets when the two outputs are indistinguishable; the diagnostic is the
trace distance maximized over pure two-qubit inputs.

Idle iterations always run the bare map at ``k_idle`` (chaotic by default,
the reset that scrambles correlations built up during regular transmission),
while qubit passages run at ``k_transmit``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .channel import ChannelConfig, Coupling, GramMatrix, _TrainPropagator
from .torus import EnvState, TorusSpec, haar_random_state, momentum_eigenstate

CHAOTIC_K = math.sqrt(2.0)

# phase changes of the input amplitudes must not move the trace distance
PHASE_INVARIANCE_TOL = 1e-8


@dataclass(frozen=True)
class InitialStateSpec:
    """Recipe for the initial environment state.

    ``kind`` is "haar" (param = seed) or "momentum" (param = eigenstate
    index).
    """

    kind: str
    param: int = 0

    def __post_init__(self):
        if self.kind not in ("haar", "momentum"):
            raise ValueError(f"unknown initial-state kind {self.kind!r}")

    def realize(self, spec: TorusSpec) -> EnvState:
        if self.kind == "haar":
            return haar_random_state(spec, self.param)
        return momentum_eigenstate(spec, self.param)


def haar_initial(seed: int) -> InitialStateSpec:
    return InitialStateSpec("haar", seed)


def momentum_initial(index: int = 0) -> InitialStateSpec:
    return InitialStateSpec("momentum", index)


@dataclass(frozen=True)
class BlockProtocol:
    """Parameters of the double-blocking experiment.

    Only two blocks are supported: by the triangle inequality, forgetfulness
    over two blocks bounds the general case, so the certified test path never
    needs more.
    """

    spec: TorusSpec
    k_transmit: float
    coupling_strength: float
    idle_uses: int
    nq_per_block: int = 1
    n_blocks: int = 2
    k_idle: float = CHAOTIC_K
    coupling: Coupling = Coupling.KICKED_QUADRATIC
    omega0: InitialStateSpec = field(default_factory=lambda: haar_initial(0))

    def __post_init__(self):
        if self.n_blocks != 2:
            raise ValueError("the double-blocking test is defined for exactly two blocks")
        if self.nq_per_block < 1:
            raise ValueError("each block carries at least one qubit")
        if self.idle_uses < 0:
            raise ValueError("idle uses must be nonnegative")
        if self.coupling_strength < 0:
            raise ValueError("coupling strength must be nonnegative")

    @property
    def total_qubits(self) -> int:
        return self.n_blocks * self.nq_per_block

    def _transmit_config(self) -> ChannelConfig:
        return ChannelConfig(
            spec=self.spec,
            k_param=self.k_transmit,
            coupling_strength=self.coupling_strength,
            n_qubits=max(self.total_qubits, 1),
            spacing=1,
            coupling=self.coupling,
        )

    def _idle_config(self) -> ChannelConfig:
        return ChannelConfig(
            spec=self.spec,
            k_param=self.k_idle,
            coupling_strength=0.0,
            n_qubits=1,
            spacing=1,
            coupling=self.coupling,
        )


def _propagate_blocks(protocol: BlockProtocol, n_blocks: int) -> np.ndarray:
    """Branch states after ``n_blocks`` blocks through one environment."""
    transmit = _TrainPropagator(protocol._transmit_config())
    idle = _TrainPropagator(protocol._idle_config())
    states = protocol.omega0.realize(protocol.spec).amplitudes[np.newaxis, :]
    for _ in range(n_blocks):
        for _ in range(protocol.nq_per_block):
            states = np.repeat(states, 2, axis=0)
            states[0::2] = transmit.conditional_step(states[0::2], +1)
            states[1::2] = transmit.conditional_step(states[1::2], -1)
        for _ in range(protocol.idle_uses):
            states = idle.bare_step(states)
    return states


def _gram_of(states: np.ndarray) -> GramMatrix:
    g = states @ states.conj().T
    g = np.triu(g, 1)
    g = g + g.conj().T
    np.fill_diagonal(g, np.einsum("jn,jn->j", states, states.conj()).real)
    return GramMatrix(g)


def block_gram_with_memory(protocol: BlockProtocol) -> GramMatrix:
    """Overlap matrix when both blocks share one evolving environment."""
    return _gram_of(_propagate_blocks(protocol, protocol.n_blocks))


def block_gram_memoryless(protocol: BlockProtocol) -> GramMatrix:
    """Overlap matrix when the environment is reset before the second block.

    Each block sees an identical fresh channel, so the full overlap matrix is
    the Kronecker product of the single-block one with itself.
    """
    single = _gram_of(_propagate_blocks(protocol, 1)).entries
    return GramMatrix(np.kron(single, single))


@dataclass(frozen=True)
class InputStateParams:
    """Pure two-qubit input with zero phases, on the amplitude-square simplex.

    Three hyperspherical angles parameterize the four nonnegative
    computational-basis magnitudes; their squares sum to one by construction.
    Phases are provably irrelevant to the memory-vs-memoryless trace distance
    (they conjugate both outputs by the same diagonal unitary), which the
    optimizer re-verifies at every reported maximum.
    """

    angles: tuple[float, float, float]

    def amplitudes(self) -> np.ndarray:
        a, b, c = self.angles
        vec = np.array(
            [
                math.cos(a),
                math.sin(a) * math.cos(b),
                math.sin(a) * math.sin(b) * math.cos(c),
                math.sin(a) * math.sin(b) * math.sin(c),
            ]
        )
        return np.abs(vec)

    def density_matrix(self) -> np.ndarray:
        a = self.amplitudes()
        return np.outer(a, a).astype(np.complex128)


def _check_two_qubit_path(protocol: BlockProtocol) -> None:
    if protocol.total_qubits != 2:
        raise ValueError(
            "the parameterized input covers two channel uses; use"
            " nq_per_block=1 with two blocks"
        )


def block_output_with_memory(protocol: BlockProtocol, params: InputStateParams) -> np.ndarray:
    """Channel output for two blocks through one environment."""
    _check_two_qubit_path(protocol)
    rho = params.density_matrix()
    out = rho * block_gram_with_memory(protocol).entries
    np.fill_diagonal(out, np.diagonal(rho))
    return out


def block_output_memoryless(protocol: BlockProtocol, params: InputStateParams) -> np.ndarray:
    """Channel output with the environment reset between blocks."""
    _check_two_qubit_path(protocol)
    rho = params.density_matrix()
    out = rho * block_gram_memoryless(protocol).entries
    np.fill_diagonal(out, np.diagonal(rho))
    return out


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Tr|A - B|/2 for Hermitian A, B: half the sum of |eigenvalues| of A - B."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("trace distance of matrices with different shapes")
    if np.abs(a - a.conj().T).max() > 1e-10 or np.abs(b - b.conj().T).max() > 1e-10:
        raise ValueError("trace distance inputs must be Hermitian")
    return float(np.abs(np.linalg.eigvalsh(a - b)).sum() / 2.0)


@dataclass(frozen=True)
class MaximizeResult:
    value: float
    params: InputStateParams
    evaluations: int
    budget_exhausted: bool


def maximize_trace_distance(
    protocol: BlockProtocol,
    budget: int = 20_000,
    n_starts: int = 256,
    n_refine: int = 8,
    seed: int = 0,
) -> MaximizeResult:
    """Largest trace distance between memoryful and memoryless block outputs.

    Multistart random sampling over the input simplex followed by
    Nelder-Mead refinement of the best starts; deterministic for a fixed
    seed.  ``budget`` caps the total number of objective evaluations; when
    it runs out the best value so far is reported.
    """
    if n_starts < 1:
        raise ValueError("need at least one start")
    g_mem = block_gram_with_memory(protocol).entries
    g_free = block_gram_memoryless(protocol).entries
    difference = g_mem - g_free

    evaluations = 0

    def distance_at(angles: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        a = InputStateParams(tuple(angles)).amplitudes()
        delta = np.outer(a, a) * difference
        return float(np.abs(np.linalg.eigvalsh(delta)).sum() / 2.0)

    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, math.pi / 2.0, size=(n_starts, 3))
    sampled = min(n_starts, budget)
    values = np.array([distance_at(s) for s in starts[:sampled]])
    order = np.argsort(values)[::-1]
    best_angles = starts[order[0]]
    best_value = values[order[0]]

    exhausted = evaluations >= budget
    for idx in order[:n_refine]:
        remaining = budget - evaluations
        if remaining <= 4:
            exhausted = True
            break
        res = minimize(
            lambda x: -distance_at(x),
            starts[idx],
            method="Nelder-Mead",
            options={"maxfev": remaining, "xatol": 1e-7, "fatol": 1e-12},
        )
        if -res.fun > best_value:
            best_value = -res.fun
            best_angles = res.x

    params = InputStateParams(tuple(float(x) for x in best_angles))
    _verify_phase_irrelevance(difference, params, best_value, rng)
    return MaximizeResult(float(best_value), params, evaluations, exhausted)


def _verify_phase_irrelevance(
    difference: np.ndarray,
    params: InputStateParams,
    value: float,
    rng: np.random.Generator,
) -> None:
    """Perturb the argmax with random phases; the distance must not move."""
    a = params.amplitudes().astype(np.complex128)
    a *= np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=4))
    delta = np.outer(a, a.conj()) * difference
    perturbed = float(np.abs(np.linalg.eigvalsh(delta)).sum() / 2.0)
    if abs(perturbed - value) >= PHASE_INVARIANCE_TOL:
        raise ArithmeticError(
            "input phases moved the trace distance by"
            f" {abs(perturbed - value):.3e}; the zero-phase optimization"
            " domain would be insufficient"
        )


def forgetfulness_curve(
    protocol: BlockProtocol,
    idle_uses_list: list[int],
    seeds: list[int],
    budget: int = 20_000,
    n_starts: int = 256,
) -> list[dict]:
    """Maximized trace distance per number of idle uses, one row per seed.

    For a Haar initial state each seed draws its own environment state; for
    a momentum eigenstate the seed only steers the optimizer starts.
    """
    if not seeds:
        raise ValueError("seed list must not be empty")
    rows = []
    for idle_uses in idle_uses_list:
        for seed in seeds:
            omega0 = protocol.omega0
            if omega0.kind == "haar":
                omega0 = haar_initial(seed)
            proto = replace(protocol, idle_uses=int(idle_uses), omega0=omega0)
            result = maximize_trace_distance(proto, budget=budget, n_starts=n_starts, seed=seed)
            rows.append(
                {
                    "idle_uses": int(idle_uses),
                    "seed": int(seed),
                    "max_trace_distance": result.value,
                }
            )
    return rows
