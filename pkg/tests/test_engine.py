import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from fullspace import embed_sector_state, full_energy, full_qaoa_state
from pspin_qaoa.engine import (
    QaoaParams,
    apply_mixer_layer,
    apply_phase_layer,
    energy,
    energy_and_gradient,
    equivalent_annealing_time,
    evaluate,
    fidelity,
    qaoa_state,
    residual_energy,
)
from pspin_qaoa.optimizer import r_init
from pspin_qaoa.sector import (
    ProblemSpec,
    build_basis,
    diagonalize_target,
    hz_diagonal,
    plus_state,
    x_spectral_decomposition,
)


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    return psi / np.linalg.norm(psi)


def params_of(gammas, betas):
    return QaoaParams(gammas=np.atleast_1d(gammas), betas=np.atleast_1d(betas))


class TestPhaseLayer:
    def test_zero_angle_is_identity(self):
        psi = random_state(6, 1)
        hz = hz_diagonal(build_basis(6), 2)
        np.testing.assert_allclose(apply_phase_layer(psi, 0.0, hz), psi)

    def test_single_spin_global_phase(self):
        # N=1, p=3, gamma=pi: phases exp(+-i pi) are a common factor of -1
        psi = random_state(1, 2)
        hz = hz_diagonal(build_basis(1), 3)
        out = apply_phase_layer(psi, np.pi, hz)
        np.testing.assert_allclose(out, -psi, atol=1e-14)

    def test_norm_preserved(self):
        psi = random_state(9, 3)
        hz = hz_diagonal(build_basis(9), 3)
        out = apply_phase_layer(psi, 0.3, hz)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-14


class TestMixerLayer:
    def test_zero_angle_is_identity(self):
        psi = random_state(5, 4)
        out = apply_mixer_layer(psi, 0.0, x_spectral_decomposition(5))
        np.testing.assert_allclose(out, psi, atol=1e-12)

    @pytest.mark.parametrize("n", [3, 6])
    def test_pi_shift_is_global_phase(self, n):
        psi = random_state(n, 5)
        out = apply_mixer_layer(psi, np.pi, x_spectral_decomposition(n))
        assert abs(abs(np.vdot(psi, out)) - 1.0) < 1e-12

    def test_plus_state_is_eigenstate(self):
        basis = build_basis(8)
        plus = plus_state(basis)
        out = apply_mixer_layer(plus, 0.77, x_spectral_decomposition(8))
        assert abs(fidelity(out, plus) - 1.0) < 1e-12
        np.testing.assert_allclose(out, np.exp(1j * 0.77 * 8) * plus, atol=1e-12)


class TestQaoaState:
    def test_zero_angles_give_plus(self):
        spec = ProblemSpec(7, 2, 0.3)
        psi = qaoa_state(spec, params_of([0.0, 0.0], [0.0, 0.0]))
        np.testing.assert_allclose(psi, plus_state(build_basis(7)), atol=1e-12)

    def test_exact_depth1_odd_p(self):
        spec = ProblemSpec(5, 3, 0.0)
        psi = qaoa_state(spec, params_of(np.pi / 4, np.pi / 4))
        targ = diagonalize_target(spec).ground_state
        assert fidelity(psi, targ) > 1 - 1e-12

    def test_exact_depth1_even_p(self):
        spec = ProblemSpec(5, 2, 0.0)
        psi = qaoa_state(spec, params_of(np.pi / 8, np.pi / 4))
        targ = diagonalize_target(spec).ground_state
        assert fidelity(psi, targ) > 1 - 1e-12

    @given(st.integers(min_value=1, max_value=128), st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=20, deadline=None)
    def test_unitarity(self, n, seed):
        spec = ProblemSpec(n, 3, 0.5)
        params = r_init(5, seed)
        assert abs(np.linalg.norm(qaoa_state(spec, params)) - 1.0) < 1e-10

    def test_unitarity_deep_circuit(self):
        spec = ProblemSpec(16, 2, 1.0)
        params = r_init(200, 99)
        assert abs(np.linalg.norm(qaoa_state(spec, params)) - 1.0) < 1e-10


class TestBruteForceOracle:
    """Sector evolution must agree with explicit 2^N tensor-product simulation."""

    @pytest.mark.parametrize("n,p,h,depth,seed", [
        (2, 2, 0.0, 1, 11),
        (5, 3, 0.7, 2, 12),
        (7, 2, 1.3, 3, 13),
        (8, 4, 0.2, 2, 14),
        (10, 3, 2.0, 4, 15),
    ])
    def test_state_overlap(self, n, p, h, depth, seed):
        params = r_init(depth, seed)
        sector = qaoa_state(ProblemSpec(n, p, h), params)
        full = full_qaoa_state(n, p, params.gammas, params.betas)
        overlap = abs(np.vdot(embed_sector_state(sector, n), full)) ** 2
        assert overlap > 1 - 1e-10

    def test_energy_matches_full_space(self):
        n, p, h = 8, 3, 0.9
        params = r_init(3, 21)
        spec = ProblemSpec(n, p, h)
        sector = qaoa_state(spec, params)
        full = full_qaoa_state(n, p, params.gammas, params.betas)
        assert abs(energy(spec, sector) - full_energy(n, p, h, full)) < 1e-10


class TestEnergy:
    def test_plus_state_odd_p(self):
        # odd moments of the symmetric magnetization distribution vanish
        spec = ProblemSpec(8, 3, 0.5)
        assert abs(energy(spec, plus_state(build_basis(8))) + 4.0) < 1e-12

    @pytest.mark.parametrize("n", [3, 6, 9, 12])
    def test_plus_state_p2_brute_force(self, n):
        # <(sum sigma^z)^2> over all 2^N bitstrings equals N
        moment = sum(
            (n - 2 * bin(l).count("1")) ** 2 for l in range(2**n)
        ) / 2**n
        assert moment == n
        spec = ProblemSpec(n, 2, 0.0)
        assert abs(energy(spec, plus_state(build_basis(n))) + 1.0) < 1e-12

    def test_fully_polarized(self):
        spec = ProblemSpec(6, 3, 0.0)
        e0 = np.zeros(7, complex)
        e0[0] = 1.0
        assert abs(energy(spec, e0) + 6.0) < 1e-12


class TestResidualEnergy:
    def test_affine_map(self):
        spectrum = diagonalize_target(ProblemSpec(6, 2, 1.0))
        assert residual_energy(spectrum, spectrum.e_min) == 0.0
        assert residual_energy(spectrum, spectrum.e_max) == 1.0
        mid = 0.5 * (spectrum.e_min + spectrum.e_max)
        assert abs(residual_energy(spectrum, mid) - 0.5) < 1e-14

    def test_rejects_inconsistent_energy(self):
        spectrum = diagonalize_target(ProblemSpec(6, 2, 1.0))
        with pytest.raises(ValueError):
            residual_energy(spectrum, spectrum.e_min - 1.0)


class TestFidelity:
    def test_self_and_orthogonal(self):
        psi = random_state(5, 31)
        assert abs(fidelity(psi, psi) - 1.0) < 1e-12
        e0 = np.zeros(6, complex)
        e1 = np.zeros(6, complex)
        e0[0] = e1[1] = 1.0
        assert fidelity(e0, e1) == 0.0

    def test_exact_point_p5(self):
        spec = ProblemSpec(7, 5, 0.0)
        psi = qaoa_state(spec, params_of(np.pi / 4, np.pi / 4))
        assert fidelity(psi, diagonalize_target(spec).ground_state) > 1 - 1e-12


class TestGradient:
    @staticmethod
    def finite_difference(spec, params, step=1e-6):
        x = params.to_vector()
        grad = np.zeros_like(x)
        for i in range(x.size):
            xp, xm = x.copy(), x.copy()
            xp[i] += step
            xm[i] -= step
            ep = energy(spec, qaoa_state(spec, QaoaParams.from_vector(xp)))
            em = energy(spec, qaoa_state(spec, QaoaParams.from_vector(xm)))
            grad[i] = (ep - em) / (2 * step)
        return grad

    def test_against_finite_differences(self):
        spec = ProblemSpec(8, 2, 1.0)
        params = params_of(0.3, 0.7)
        _, grad = energy_and_gradient(spec, params)
        fd = self.finite_difference(spec, params)
        mask = np.abs(grad) > 1e-8
        assert np.all(np.abs(grad[mask] - fd[mask]) / np.abs(grad[mask]) < 1e-6)

    def test_vanishes_at_exact_minimum(self):
        spec = ProblemSpec(5, 3, 0.0)
        _, grad = energy_and_gradient(spec, params_of(np.pi / 4, np.pi / 4))
        assert np.max(np.abs(grad)) < 1e-10

    def test_beta_direction_flat_at_origin(self):
        # |+> is an eigenstate of the mixer, so the first beta is a pure phase
        spec = ProblemSpec(10, 2, 5.0)
        _, grad = energy_and_gradient(spec, params_of([0.0, 0.0], [0.0, 0.0]))
        assert abs(grad[2]) < 1e-12

    def test_energy_value_matches_plain_evaluation(self):
        spec = ProblemSpec(9, 3, 0.8)
        params = r_init(4, 77)
        e_grad, _ = energy_and_gradient(spec, params)
        e_plain = energy(spec, qaoa_state(spec, params))
        assert abs(e_grad - e_plain) < 1e-13


class TestSymmetries:
    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=25, deadline=None)
    def test_conjugation_symmetry(self, seed):
        # E(-gamma, -beta) = E(gamma, beta)
        spec = ProblemSpec(7, 3, 0.6)
        params = r_init(3, seed)
        flipped = QaoaParams(gammas=-params.gammas, betas=-params.betas)
        e1, _ = energy_and_gradient(spec, params)
        e2, _ = energy_and_gradient(spec, flipped)
        assert abs(e1 - e2) < 1e-12


class TestAnnealingTime:
    def test_direct_substitution(self):
        spec = ProblemSpec(5, 3, 0.0)
        tau = equivalent_annealing_time(spec, params_of(np.pi / 4, np.pi / 4))
        assert abs(tau - np.pi * 26 / 4) < 1e-12

    def test_h_one_leaves_only_beta(self):
        spec = ProblemSpec(9, 2, 1.0)
        tau = equivalent_annealing_time(spec, params_of([0.2, 0.4], [0.1, 0.3]))
        assert abs(tau - 0.4) < 1e-14

    def test_exact_solution_scales_with_system_size(self):
        # gamma N^(p-1) dominates: tau(N=9)/tau(N=3) -> (9/3)^2 at p=3
        taus = {}
        for n in (3, 9):
            spec = ProblemSpec(n, 3, 0.0)
            taus[n] = equivalent_annealing_time(spec, params_of(np.pi / 4, np.pi / 4))
        assert taus[9] / taus[3] == pytest.approx(8.2, abs=0.2)


class TestEvaluate:
    def test_record_consistency(self):
        spec = ProblemSpec(8, 2, 0.8)
        rec = evaluate(spec, r_init(3, 5))
        spectrum = diagonalize_target(spec)
        recomputed = (rec.energy - spectrum.e_min) / (spectrum.e_max - spectrum.e_min)
        assert abs(rec.residual - recomputed) < 1e-14
        assert 0.0 <= rec.fidelity <= 1.0 + 1e-12
