"""Dephasing quantum channel with a kicked sawtooth-map environment.

The package provides the quantized torus dynamics (`torus`), the channel
itself with its entropy and capacity observables (`channel`), classical-map
diagnostics (`classical`), double-blocking memory experiments (`memory`),
and a reproducible experiment harness (`experiments`, `cli`).
"""

__version__ = "0.1.0"

from .channel import (
    ChannelConfig,
    Coupling,
    QubitTrainOutput,
    apply_channel,
    capacity_estimate,
    coherent_information,
    entanglement_fidelity,
    entropy_exchange,
    entropy_series,
    gram_matrix,
    propagate_branches,
    qubit_train_output,
    rate_vs_eta_scan,
    stochastic_rate,
)
from .classical import autocorrelation, diffusion_coefficient, step, uniform_phase_ensemble
from .memory import (
    BlockProtocol,
    InputStateParams,
    block_output_memoryless,
    block_output_with_memory,
    forgetfulness_curve,
    haar_initial,
    maximize_trace_distance,
    momentum_initial,
    trace_distance,
)
from .torus import (
    EnvState,
    TorusSpec,
    apply_kick,
    apply_kinetic,
    floquet_step,
    haar_random_state,
    make_spec,
    momentum_eigenstate,
    overlap,
)
