import numpy as np
import pytest

import rpolar as rp
from rpolar.errors import StepTooLarge

RNG = np.random.default_rng(1618)


def planar(alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s], [s, c]])


class TestGradient:
    def test_zero_at_identity_for_diagonal(self):
        a = rp.riemannian_gradient(np.eye(2), [3.0, 1.0])
        np.testing.assert_allclose(a, np.zeros((2, 2)), atol=1e-15)

    def test_zero_at_enumerated_points(self):
        d = [3.0, 1.9, 0.7]
        for p in rp.enumerate_critical(d):
            assert rp.frob_norm(rp.riemannian_gradient(p.rotation, d)) <= 1e-9

    def test_is_skew(self):
        r = rp.random_rotation(4, RNG)
        a = rp.riemannian_gradient(r, [2.0, 1.5, 1.0, 0.5])
        np.testing.assert_allclose(a + a.T, np.zeros((4, 4)), atol=1e-14)

    def test_matches_central_differences(self):
        # sign convention: d/dt W(R exp(tB))|_0 = 2 <A, B>
        h = 1e-5
        for n in range(2, 7):
            for _ in range(100):
                d = np.sort(RNG.uniform(0.2, 3.5, n))[::-1]
                r = rp.random_rotation(n, RNG)
                a = rp.riemannian_gradient(r, d)
                b = rp.skew(RNG.standard_normal((n, n)))
                fd = (
                    rp.energy(r @ rp.exp_skew(b, h), d)
                    - rp.energy(r @ rp.exp_skew(b, -h), d)
                ) / (2 * h)
                an = 2.0 * rp.frob_inner(a, b)
                assert fd == pytest.approx(an, rel=1e-6, abs=1e-8)


class TestDescend:
    def test_start_at_minimizer_returns_it(self):
        d = [4.0, 2.0, 1.0]
        r0 = rp.rpolar_diag(d).rotations[0]
        res = rp.descend(r0, d)
        assert res.converged
        assert res.iterations == 0
        np.testing.assert_allclose(res.rotation, r0, atol=1e-12)
        assert res.value == pytest.approx(2.0, rel=1e-12)

    def test_n2_multistart_reaches_global(self):
        # each limit sits at one of the enumerated critical values 2, 4, 20
        d = [3.0, 1.0]
        best = np.inf
        for seed in range(100):
            res = rp.descend(rp.random_rotation(2, seed), d)
            assert res.converged
            assert res.grad_norm <= 1e-9
            assert min(abs(res.value - v) for v in (2.0, 4.0, 20.0)) <= 1e-6
            best = min(best, res.value)
        assert best == pytest.approx(2.0, abs=1e-8)

    def test_n3_global_value(self):
        report = rp.brute_force_min([4.0, 2.0, 1.0], n_starts=200, seed=4)
        assert report.best_value == pytest.approx(2.0, abs=1e-8)

    def test_iterates_on_manifold(self):
        res = rp.descend(rp.random_rotation(4, 5), [3.0, 2.0, 1.5, 0.5])
        assert rp.frob_norm(res.rotation.T @ res.rotation - np.eye(4)) <= 1e-10


class TestBruteForce:
    def test_identity_parameters(self):
        # D = I sits on the bifurcation boundary (d_i + d_j = 2 for every
        # pair), where the energy is quartically flat in skew directions;
        # the value pins the minimizer, the rotation only loosely
        report = rp.brute_force_min(np.ones(3), n_starts=50, seed=1)
        assert report.best_value == pytest.approx(0.0, abs=1e-10)
        np.testing.assert_allclose(report.best_rotation, np.eye(3), atol=0.05)

    def test_worked_5x5(self):
        report = rp.brute_force_min([4, 2, 1, 0.5, 0.25], n_starts=500, seed=2)
        assert report.best_value == pytest.approx(45 / 16, abs=1e-7)

    def test_n3_closed_form_cross_check(self):
        report = rp.brute_force_min([3.0, 2.0, 0.5], n_starts=200, seed=3)
        assert report.best_value == pytest.approx(0.75, abs=1e-7)

    def test_report_internally_consistent(self):
        d = [3.0, 2.0, 0.5]
        report = rp.brute_force_min(d, n_starts=100, seed=8)
        assert abs(report.best_value - rp.energy(report.best_rotation, d)) <= 1e-12
        assert rp.is_rotation(report.best_rotation)
        assert report.n_converged == report.n_starts == 100

    def test_deterministic(self):
        a = rp.brute_force_min([3.0, 1.5], n_starts=40, seed=9)
        b = rp.brute_force_min([3.0, 1.5], n_starts=40, seed=9)
        assert a.best_value == b.best_value
        np.testing.assert_array_equal(a.best_rotation, b.best_rotation)

    def test_guard(self):
        with pytest.raises(ValueError):
            rp.brute_force_min(np.linspace(3, 1, 9))


class TestIntegrateFlow:
    def test_identity_start_is_constant(self):
        traj = rp.integrate_flow(np.eye(3), [4.0, 2.0, 1.0], step=0.05, t_end=2.0)
        for state in traj.states:
            np.testing.assert_allclose(state, np.eye(3), atol=1e-12)

    def test_n2_basin(self):
        traj = rp.integrate_flow(planar(0.1), [3.0, 1.0], step=0.02, t_end=200.0, gtol=1e-8)
        assert traj.energies[-1] == pytest.approx(2.0, abs=1e-9)
        final = traj.states[-1]
        assert final[0, 0] == pytest.approx(0.5, abs=1e-5)
        assert np.all(np.diff(traj.energies) <= 1e-9)

    def test_limit_is_enumerated_critical_point(self):
        d = [4.0, 2.0, 1.0]
        points = list(rp.enumerate_critical(d))
        r0 = rp.random_rotation(3, 17)
        traj = rp.integrate_flow(r0, d, step=0.02, t_end=500.0, gtol=1e-7)
        final = traj.states[-1]
        dist = min(rp.frob_norm(final - p.rotation) for p in points)
        assert dist <= 1e-5

    def test_states_stay_rotations(self):
        traj = rp.integrate_flow(rp.random_rotation(3, 2), [2.5, 1.5, 0.5], 0.05, 10.0)
        for state in traj.states[:: max(1, len(traj.states) // 10)]:
            assert rp.is_rotation(state, tol=1e-9)

    def test_step_too_large(self):
        with pytest.raises(StepTooLarge):
            rp.integrate_flow(planar(0.3), [3.0, 1.0], step=5.0, t_end=50.0)

    def test_bad_step_rejected(self):
        with pytest.raises(ValueError):
            rp.integrate_flow(np.eye(2), [3.0, 1.0], step=0.0, t_end=1.0)


class TestBiotFlow:
    def test_near_identity_converges_to_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            a = rp.skew(rng.standard_normal((3, 3)))
            r0 = rp.exp_skew(a, scale=0.2)
            traj = rp.biot_flow(r0, [4.0, 2.0, 1.0], step=0.02, t_end=40.0)
            assert rp.frob_norm(traj.states[-1] - np.eye(3)) <= 1e-6

    def test_identity_start_is_constant(self):
        traj = rp.biot_flow(np.eye(3), [4.0, 2.0, 1.0], step=0.05, t_end=2.0)
        np.testing.assert_allclose(traj.states[-1], np.eye(3), atol=1e-12)

    def test_energy_monotone(self):
        # recorded energy is ||R D - I||^2 / 2 and never increases
        r0 = rp.exp_skew(rp.skew(RNG.standard_normal((3, 3))), scale=0.3)
        traj = rp.biot_flow(r0, [4.0, 2.0, 1.0], step=0.02, t_end=30.0)
        assert traj.energies[0] == pytest.approx(
            0.5 * rp.frob_norm_sq(r0 @ np.diag([4.0, 2.0, 1.0]) - np.eye(3))
        )
        assert np.all(np.diff(traj.energies) <= 1e-9)
