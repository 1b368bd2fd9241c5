import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sawtooth_channel.torus import (
    EnvState,
    KickCoefficient,
    apply_kick,
    apply_kinetic,
    apply_momentum_coupling_phase,
    floquet_step,
    from_angle,
    haar_random_state,
    kick_phase,
    kinetic_phase,
    make_spec,
    momentum_eigenstate,
    overlap,
    to_angle,
)


def dense_matrix(op, spec):
    """Brute-force matrix of a linear state operation, column by column."""
    n = spec.dim
    cols = []
    for i in range(n):
        e = np.zeros(n, dtype=np.complex128)
        e[i] = 1.0
        cols.append(op(EnvState(spec, e)).amplitudes)
    return np.array(cols).T


class TestSpec:
    def test_planck_constant(self):
        assert make_spec(4096).hbar_eff == 2 * math.pi / 4096
        assert make_spec(2, 0.0, 0.0).hbar_eff == math.pi
        # direct evaluation of 2*pi/1024
        assert make_spec(1024).hbar_eff == pytest.approx(6.135923e-3, abs=1e-9)

    def test_default_shifts(self):
        spec = make_spec(64)
        assert spec.phi0 == pytest.approx(math.sqrt(2) / 5)
        assert spec.theta0 == pytest.approx(math.sqrt(2) / 5)

    def test_rejects_small_dim(self):
        with pytest.raises(ValueError):
            make_spec(1)
        with pytest.raises(ValueError):
            make_spec(0)

    def test_grids(self):
        spec = make_spec(8)
        assert list(spec.momentum_indices()) == [-4, -3, -2, -1, 0, 1, 2, 3]
        np.testing.assert_allclose(spec.angle_grid(), 2 * np.pi * np.arange(8) / 8)


class TestStates:
    def test_momentum_eigenstate(self):
        spec = make_spec(8)
        e0 = momentum_eigenstate(spec, 0)
        assert e0.amplitudes[4] == 1.0
        assert e0.norm() == 1.0
        lowest = momentum_eigenstate(spec, -4)
        assert lowest.amplitudes[0] == 1.0
        with pytest.raises(ValueError):
            momentum_eigenstate(spec, 4)
        with pytest.raises(ValueError):
            momentum_eigenstate(spec, -5)

    def test_haar_determinism(self):
        spec = make_spec(32)
        a = haar_random_state(spec, 7)
        b = haar_random_state(spec, 7)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
        assert abs(a.norm() - 1.0) < 1e-12

    def test_haar_mean_overlap(self):
        # E |<a|b>|^2 = 1/N for independent Haar pairs; Monte Carlo over
        # 200 disjoint seed pairs, tolerance 3 standard errors.
        spec = make_spec(32)
        vals = []
        for k in range(200):
            a = haar_random_state(spec, 2 * k)
            b = haar_random_state(spec, 2 * k + 1)
            vals.append(abs(overlap(a, b)) ** 2)
        vals = np.array(vals)
        stderr = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - 1.0 / 32) < 3 * stderr


class TestKinetic:
    def test_diagonal_phase_preserves_magnitudes(self):
        spec = make_spec(64)
        psi = haar_random_state(spec, 0)
        out = apply_kinetic(psi)
        np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes), atol=1e-12)
        assert abs(out.norm() - 1.0) < 1e-12

    def test_hand_evaluated_phase(self):
        # N=4, phi0=0: phase on n=1 is exp(-i (T*1)^2/(2T)) = exp(-i T/2)
        spec = make_spec(4, phi0=0.0, theta0=0.0)
        t = spec.hbar_eff
        phases = kinetic_phase(spec)
        assert phases[2 + 1] == pytest.approx(np.exp(-1j * t / 2), abs=1e-14)


class TestSpectralTransforms:
    def test_round_trip_identity(self):
        spec = make_spec(128)
        psi = haar_random_state(spec, 3)
        back = from_angle(to_angle(psi.amplitudes))
        np.testing.assert_allclose(back, psi.amplitudes, atol=1e-12)

    def test_momentum_eigenstate_is_plane_wave(self):
        # slot for index n holds exp(i n theta_m)/sqrt(N) on the angle grid
        spec = make_spec(16)
        psi = momentum_eigenstate(spec, 3)
        values = to_angle(psi.amplitudes)
        expected = np.exp(3j * spec.angle_grid()) / 4.0
        np.testing.assert_allclose(values, expected, atol=1e-12)


class TestKick:
    def test_zero_kick_is_identity(self):
        spec = make_spec(64)
        psi = haar_random_state(spec, 1)
        out = apply_kick(psi, KickCoefficient(0.0))
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-12)

    def test_inverse_kick(self):
        spec = make_spec(64)
        psi = haar_random_state(spec, 2)
        k = 37.5
        out = apply_kick(apply_kick(psi, KickCoefficient(k)), KickCoefficient(-k))
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(
        c1=st.floats(-200, 200, allow_nan=False),
        c2=st.floats(-200, 200, allow_nan=False),
        seed=st.integers(0, 100),
    )
    def test_kick_phases_are_additive(self, c1, c2, seed):
        spec = make_spec(32)
        psi = haar_random_state(spec, seed)
        a = apply_kick(apply_kick(psi, KickCoefficient(c1)), KickCoefficient(c2))
        b = apply_kick(psi, KickCoefficient(c1 + c2))
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-10)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            KickCoefficient(float("nan"))


class TestFloquet:
    def test_unitarity_single_state(self):
        spec = make_spec(256)
        psi = haar_random_state(spec, 5)
        out = floquet_step(psi, math.sqrt(2))
        assert abs(out.norm() - 1.0) < 1e-12

    @pytest.mark.parametrize("dim", [8, 16, 32])
    @pytest.mark.parametrize("k_strength", [math.sqrt(2), -1.64, 2.5])
    def test_dense_unitarity_oracle(self, dim, k_strength):
        spec = make_spec(dim)
        for op in (
            apply_kinetic,
            lambda s: apply_kick(s, KickCoefficient(k_strength / spec.hbar_eff)),
            lambda s: floquet_step(s, k_strength),
        ):
            u = dense_matrix(op, spec)
            np.testing.assert_allclose(u.conj().T @ u, np.eye(dim), atol=1e-10)

    def test_linearity(self):
        spec = make_spec(32)
        psi = haar_random_state(spec, 10)
        phi = haar_random_state(spec, 11)
        alpha, beta = 0.3 - 0.2j, 0.7 + 0.1j
        mixed = EnvState(spec, alpha * psi.amplitudes + beta * phi.amplitudes)
        lhs = floquet_step(mixed, 1.3).amplitudes
        rhs = alpha * floquet_step(psi, 1.3).amplitudes + beta * floquet_step(phi, 1.3).amplitudes
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_norm_drift_over_many_steps(self):
        spec = make_spec(64)
        psi = haar_random_state(spec, 4)
        for _ in range(10_000):
            psi = floquet_step(psi, math.sqrt(2))
        assert abs(psi.norm() - 1.0) < 1e-6

    def test_classical_correspondence_smoke(self):
        # a narrow wave packet's <P> moves by ~K*(theta0 - pi) in one step
        dim = 1024
        spec = make_spec(dim, phi0=0.0, theta0=0.0)
        t = spec.hbar_eff
        theta_c, p_c, k_classical = 1.2, 0.5, 1.0
        n = spec.momentum_indices()
        sigma_p = math.sqrt(t / 2)
        amps = np.exp(-((t * n - p_c) ** 2) / (4 * sigma_p**2) - 1j * n * theta_c)
        amps = amps.astype(np.complex128) / np.linalg.norm(amps)
        packet = EnvState(spec, amps)
        moved = floquet_step(packet, k_classical)
        expected = p_c + k_classical * (theta_c - math.pi)
        assert abs(moved.momentum_expectation() - expected) < 3 * math.sqrt(t)


class TestCouplingPhase:
    def test_zero_strength_identity(self):
        spec = make_spec(32)
        psi = haar_random_state(spec, 6)
        out = apply_momentum_coupling_phase(psi, 0.0, +1)
        np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)

    def test_magnitudes_unchanged(self):
        spec = make_spec(32)
        psi = haar_random_state(spec, 6)
        out = apply_momentum_coupling_phase(psi, 0.8, -1)
        np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes), atol=1e-14)

    def test_opposite_signs_cancel(self):
        spec = make_spec(32)
        psi = haar_random_state(spec, 6)
        out = apply_momentum_coupling_phase(
            apply_momentum_coupling_phase(psi, 0.8, +1), 0.8, -1
        )
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-12)


class TestOverlap:
    def test_self_overlap(self):
        psi = haar_random_state(make_spec(64), 8)
        assert overlap(psi, psi) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_momentum_eigenstates(self):
        spec = make_spec(16)
        assert overlap(momentum_eigenstate(spec, 0), momentum_eigenstate(spec, 3)) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            overlap(haar_random_state(make_spec(8), 0), haar_random_state(make_spec(16), 0))

    def test_conjugate_symmetry(self):
        spec = make_spec(32)
        a, b = haar_random_state(spec, 1), haar_random_state(spec, 2)
        assert overlap(a, b) == pytest.approx(np.conj(overlap(b, a)), abs=1e-14)
