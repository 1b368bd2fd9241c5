"""Classical sawtooth-map dynamics and chaos diagnostics.

In rescaled variables the one-kick map is

    P <- P + K * (theta - pi)
    theta <- theta + P        (mod 2*pi)

and depends on the single parameter K.  The map is chaotic for K > 0 or
K < -4 and regular (non-chaotic) for -4 <= K <= 0.  Two diagnostics feed the
channel-memory analysis: the autocorrelation of the coupling observable
G(theta) = (theta - pi)^2, and the momentum diffusion coefficient on the
unbounded (cylinder) phase space.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

DEFAULT_PARTICLES = 1_000_000


def coupling_observable(theta: np.ndarray) -> np.ndarray:
    """The kick-potential profile (theta - pi)^2."""
    return (theta - np.pi) ** 2


@dataclass(frozen=True)
class ClassicalEnsemble:
    """Particle ensemble on the torus (or cylinder, if ``wrap_momentum`` is off)."""

    theta: np.ndarray
    momentum: np.ndarray
    k_param: float
    wrap_momentum: bool = True

    def __len__(self) -> int:
        return self.theta.size


def uniform_phase_ensemble(
    k_param: float,
    n_particles: int = DEFAULT_PARTICLES,
    p0: float = 0.0,
    seed: int = 0,
    wrap_momentum: bool = True,
) -> ClassicalEnsemble:
    """Random phases 0 <= theta < 2*pi at fixed momentum P0 (seeded)."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, n_particles)
    momentum = np.full(n_particles, float(p0))
    return ClassicalEnsemble(theta, momentum, k_param, wrap_momentum)


def step(ensemble: ClassicalEnsemble) -> ClassicalEnsemble:
    """One kick: momentum update, then free rotation, with wrapping."""
    p = ensemble.momentum + ensemble.k_param * (ensemble.theta - np.pi)
    if ensemble.wrap_momentum:
        p = np.mod(p + np.pi, 2.0 * np.pi) - np.pi
    theta = np.mod(ensemble.theta + p, 2.0 * np.pi)
    return replace(ensemble, theta=theta, momentum=p)


def autocorrelation(
    ensemble: ClassicalEnsemble,
    observable: Callable[[np.ndarray], np.ndarray] = coupling_observable,
    l_max: int = 50,
) -> np.ndarray:
    """C(L) = |<G(L) G(0)> - <G(L)><G(0)>| for L = 0 .. l_max.

    G(0) is taken from the initial condition (time-zero pairing, no time
    averaging); C(0) is the ensemble variance of the observable.
    """
    if len(ensemble) == 0:
        raise ValueError("autocorrelation of an empty ensemble")
    g0 = observable(ensemble.theta)
    g0_mean = g0.mean()
    out = np.empty(l_max + 1)
    current = ensemble
    for lag in range(l_max + 1):
        if lag > 0:
            current = step(current)
        g = observable(current.theta)
        out[lag] = abs(np.mean(g * g0) - g.mean() * g0_mean)
    return out


def diffusion_coefficient(
    k_param: float,
    steps: int = 200,
    n_particles: int = 100_000,
    p0: float = 0.0,
    seed: int = 0,
) -> float:
    """Least-squares slope of <(P(t) - P0)^2> vs t on the cylinder."""
    if steps < 10:
        raise ValueError("diffusion regression needs at least 10 steps")
    ens = uniform_phase_ensemble(k_param, n_particles, p0, seed, wrap_momentum=False)
    spread = np.empty(steps + 1)
    spread[0] = 0.0
    for t in range(1, steps + 1):
        ens = step(ens)
        spread[t] = np.mean((ens.momentum - p0) ** 2)
    t_axis = np.arange(steps + 1)
    slope = np.polyfit(t_axis, spread, 1)[0]
    return float(slope)
