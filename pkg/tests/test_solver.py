"""Unit tests for the integrators and the equilibrium sweep."""

import numpy as np
import pytest

from conftest import make_big_cloud_config, make_config

from eccsim.model import AllocationState, PopulationState
from eccsim.replicator import ReplicatorField, analytic_ess
from eccsim.solver import (
    BlowUp,
    Trajectory,
    convergence_time,
    costate_backward_grid,
    default_price_cap,
    integral_utility,
    integrate_dde,
    integrate_ode,
    replay_forward,
    solve_fixed,
    solve_open_loop,
    solve_ssec,
)

E_INV = 0.36787944117144233


def decay(t, y):
    return -y


class TestGrid:
    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError, match="dt"):
            integrate_ode(decay, [1.0], (0.0, 1.0), 0.0)

    def test_rejects_reversed_span(self):
        with pytest.raises(ValueError, match="t_span"):
            integrate_ode(decay, [1.0], (1.0, 0.0), 0.1)

    def test_rejects_indivisible_span(self):
        with pytest.raises(ValueError, match="integer number of steps"):
            integrate_ode(decay, [1.0], (0.0, 1.0), 0.3)

    def test_grid_is_uniform_and_exact(self):
        traj = integrate_ode(decay, [1.0], (0.0, 2.0), 0.1)
        assert traj.times.shape == (21,)
        assert traj.times[-1] == 2.0
        np.testing.assert_allclose(np.diff(traj.times), 0.1, rtol=1e-12)


class TestIntegrateOde:
    def test_exponential_oracle(self):
        traj = integrate_ode(decay, [1.0], (0.0, 1.0), 0.001)
        assert traj.shares[-1, 0] == pytest.approx(E_INV, abs=1e-12)

    def test_fourth_order_decay(self):
        errs = []
        for dt in (0.1, 0.05):
            traj = integrate_ode(decay, [1.0], (0.0, 1.0), dt)
            errs.append(abs(traj.shares[-1, 0] - E_INV))
        ratio = errs[0] / errs[1]
        assert 12.0 < ratio < 20.0

    def test_constant_field_is_exact(self):
        traj = integrate_ode(lambda t, y: np.array([2.0]), [0.0],
                             (0.0, 3.0), 0.5)
        assert traj.shares[-1, 0] == pytest.approx(6.0, abs=1e-12)

    def test_blowup_raises(self):
        # y' = y^2 from y(0)=2 blows up at t = 0.5.
        with pytest.raises(BlowUp):
            integrate_ode(lambda t, y: y * y, [2.0], (0.0, 1.0), 0.01)

    def test_non_finite_raises(self):
        with pytest.raises(BlowUp):
            integrate_ode(lambda t, y: np.array([np.nan]), [1.0],
                          (0.0, 1.0), 0.1)

    def test_simplex_projection_keeps_interior(self):
        drift = np.array([-10.0, 10.0, 0.0])
        traj = integrate_ode(lambda t, y: drift, [0.3, 0.3, 0.4],
                             (0.0, 1.0), 0.01, simplex=True)
        assert np.all(traj.shares > 0.0)
        np.testing.assert_allclose(traj.shares.sum(axis=1), 1.0, atol=1e-12)

    def test_replicator_preserves_simplex_unprojected(self, cfg, x0):
        field = ReplicatorField(cfg, lambda t: (AllocationState([0.0, 0.0]),
                                                0.0))
        traj = integrate_ode(field.rate, x0, (0.0, 10.0), 0.01)
        drift = np.max(np.abs(traj.shares.sum(axis=1) - 1.0))
        assert drift < 1e-12


class TestIntegrateDde:
    def test_zero_delay_matches_ode_bitwise(self, cfg, x0):
        field = ReplicatorField(cfg, lambda t: (AllocationState([0.1, 0.2]),
                                                0.0))
        ode = integrate_ode(field.rate, x0, (0.0, 5.0), 0.01, simplex=True)
        dde = integrate_dde(field.delayed_rate, x0, None, 0.0,
                            (0.0, 5.0), 0.01)
        np.testing.assert_array_equal(ode.shares, dde.shares)

    def test_rejects_sub_step_delay(self):
        with pytest.raises(ValueError, match="tau"):
            integrate_dde(lambda t, y, z: -z, [1.0], None, 0.005,
                          (0.0, 1.0), 0.01)

    def test_constant_prehistory_linear_segment(self):
        # y' = -y(t - 0.5) with y == 1 before t=0: y(t) = 1 - t on [0, 0.5].
        traj = integrate_dde(lambda t, y, z: -z, [1.0], None, 0.5,
                             (0.0, 0.5), 0.05, simplex=False)
        np.testing.assert_allclose(traj.shares[:, 0], 1.0 - traj.times,
                                   atol=1e-12)

    def test_history_callable(self):
        # Zero prehistory freezes the state across the first delay window.
        traj = integrate_dde(lambda t, y, z: -z, [1.0],
                             lambda t: np.array([0.0]), 0.5,
                             (0.0, 0.5), 0.05, simplex=False)
        np.testing.assert_allclose(traj.shares[:, 0], 1.0, atol=1e-15)

    def test_subcritical_delay_converges(self, cfg, x0):
        alloc = AllocationState([0.0, 0.0])
        field = ReplicatorField(cfg, lambda t: (alloc, 0.0))
        traj = integrate_dde(field.delayed_rate, x0, None, 0.7,
                             (0.0, 30.0), 0.01)
        ess = analytic_ess(cfg, alloc).shares.shares
        assert np.max(np.abs(traj.shares[-1] - ess)) < 1e-3
        np.testing.assert_allclose(traj.shares.sum(axis=1), 1.0, atol=1e-9)


class TestTrajectory:
    def test_accessors(self, cfg, x0):
        traj = solve_fixed(cfg, x0, [0.1, 0.2], (0.0, 1.0), 0.1)
        assert traj.n_ecps == 2
        assert isinstance(traj.state(0), PopulationState)
        snap = traj.snapshot(3)
        assert snap.time == pytest.approx(0.3)
        assert snap.price == 0.0
        np.testing.assert_array_equal(snap.allocation.requests, [0.1, 0.2])

    def test_index_at_rounds_to_nearest(self):
        traj = integrate_ode(decay, [1.0], (0.0, 1.0), 0.1)
        assert traj.index_at(0.74) == 7
        assert traj.index_at(0.76) == 8
        assert traj.index_at(5.0) == 10

    def test_upto_includes_endpoint(self):
        traj = integrate_ode(decay, [1.0], (0.0, 1.0), 0.1)
        head = traj.upto(0.5)
        assert head.times.shape == (6,)
        assert head.times[-1] == pytest.approx(0.5)

    def test_allocation_requires_schedule(self):
        traj = integrate_ode(decay, [1.0], (0.0, 1.0), 0.1)
        with pytest.raises(ValueError, match="no control schedule"):
            traj.allocation(0)


@pytest.fixture(scope="module")
def grids():
    cfg = make_config()
    times = np.round(np.arange(0.0, 50.0 + 1e-9, 0.01), 10)
    requests = np.zeros((times.shape[0], 2))
    return cfg, times, costate_backward_grid(cfg, times, requests)


class TestCostateBackward:
    # Closed form lam_nn(t) = (eta1 p_n K / a)(1 - e^{a(t-T)}), a = rho+Theta,
    # frozen for the duopoly at r == 0, rho=0.1, T=50.
    ORACLE = [
        (0.0, 94.73682951051154, 63.15788634034103),
        (25.0, 94.70229956633082, 63.134866377553884),
        (45.0, 75.28834822927176, 50.19223215284784),
        (49.0, 25.714082604183826, 17.14272173612255),
    ]

    def test_shapes_and_terminal(self, grids):
        _, times, (lam, mu, theta_mat) = grids
        m = times.shape[0]
        assert lam.shape == (m, 2, 2)
        assert mu.shape == (m, 2)
        assert theta_mat.shape == (m, 2, 2)
        assert not lam[-1].any() and not mu[-1].any()
        assert not theta_mat.any()

    @pytest.mark.parametrize("t,lam11,mu_val", ORACLE)
    def test_matches_closed_form(self, grids, t, lam11, mu_val):
        _, times, (lam, mu, _) = grids
        i = int(np.argmin(np.abs(times - t)))
        assert lam[i, 0, 0] == pytest.approx(lam11, rel=1e-6)
        assert mu[i, 0] == pytest.approx(mu_val, rel=1e-6)

    def test_off_diagonal_stays_zero(self, grids):
        _, _, (lam, _, _) = grids
        assert not lam[:, 0, 1].any() and not lam[:, 1, 0].any()

    def test_rows_scale_with_access_price(self, grids):
        # Source eta1*p_n*K makes lam22 = (p_2/p_1) * lam11 pointwise.
        _, _, (lam, _, _) = grids
        np.testing.assert_allclose(lam[:, 1, 1], lam[:, 0, 0] * (2.0 / 3.0),
                                   rtol=1e-12)


@pytest.fixture(scope="module")
def solved():
    cfg = make_config(horizon=10.0)
    traj, report = solve_open_loop(cfg, [0.3, 0.3, 0.4], dt=0.01)
    return cfg, traj, report


class TestSweep:
    def test_converges(self, solved):
        _, _, report = solved
        assert report.converged
        assert report.iterations <= 500
        assert report.state_residual < 1e-8

    def test_replay_is_bit_identical(self, solved):
        cfg, traj, _ = solved
        again = replay_forward(cfg, traj)
        np.testing.assert_array_equal(traj.shares, again.shares)
        np.testing.assert_array_equal(traj.requests, again.requests)
        np.testing.assert_array_equal(traj.prices, again.prices)

    def test_deterministic(self, solved):
        cfg, traj, _ = solved
        traj2, _ = solve_open_loop(cfg, [0.3, 0.3, 0.4], dt=0.01)
        np.testing.assert_array_equal(traj.shares, traj2.shares)
        np.testing.assert_array_equal(traj.prices, traj2.prices)

    def test_stored_controls_feasible(self, solved):
        _, traj, _ = solved
        assert np.all(traj.requests >= 0.0)
        assert np.all(traj.requests.sum(axis=1) <= 1.0)
        assert np.all(traj.prices >= 0.0)

    def test_costates_attached(self, solved):
        _, traj, _ = solved
        assert traj.ecp_costates is not None
        assert not traj.ecp_costates[-1].any()
        assert traj.utilities is not None
        assert traj.integral_utilities is not None

    def test_rejects_bad_relaxation(self, cfg):
        for w in (0.0, 1.5):
            with pytest.raises(ValueError, match="relaxation"):
                solve_open_loop(cfg, [0.3, 0.3, 0.4], dt=0.1, relaxation=w)

    def test_rejects_boundary_start(self, cfg):
        with pytest.raises(ValueError, match="x0"):
            solve_open_loop(cfg, [0.5, 0.5, 0.0], dt=0.1)

    def test_nonconvergence_reported_not_raised(self, cfg):
        _, report = solve_open_loop(cfg, [0.3, 0.3, 0.4], dt=0.1,
                                    t_span=(0.0, 5.0), max_iter=2)
        assert not report.converged
        assert report.iterations == 2


class TestMyopicAndFixed:
    def test_ssec_matches_static_oracle(self, x0):
        # Zero adjoints at t=0 reproduce the static game p*=0.45,
        # r*=[0.035, 0.235] for the big-cloud duopoly.
        cfg = make_big_cloud_config()
        traj = solve_ssec(cfg, x0, (0.0, 1.0), 0.01)
        assert traj.prices[0] == pytest.approx(0.45, abs=1e-14)
        np.testing.assert_allclose(traj.requests[0], [0.035, 0.235],
                                   atol=1e-14)
        assert traj.ecp_costates is None

    def test_open_loop_price_departs_from_myopic(self):
        cfg = make_big_cloud_config(horizon=10.0)
        traj, _ = solve_open_loop(cfg, [0.3, 0.3, 0.4], dt=0.01)
        myopic = solve_ssec(cfg, [0.3, 0.3, 0.4], (0.0, 10.0), 0.01)
        assert abs(traj.prices[0] - myopic.prices[0]) > 0.01

    def test_fixed_matches_plain_integration(self, cfg, x0):
        r0 = [0.1, 0.2]
        traj = solve_fixed(cfg, x0, r0, (0.0, 5.0), 0.01)
        field = ReplicatorField(cfg, lambda t: (AllocationState(r0), 0.0))
        plain = integrate_ode(field.rate, x0, (0.0, 5.0), 0.01, simplex=True)
        np.testing.assert_array_equal(traj.shares, plain.shares)
        np.testing.assert_array_equal(traj.requests[0], r0)
        assert not traj.prices.any()

    def test_fixed_dispatches_to_dde(self, x0):
        cfg = make_config(population_delay=0.5)
        traj = solve_fixed(cfg, x0, [0.0, 0.0], (0.0, 5.0), 0.01)
        field = ReplicatorField(cfg, lambda t: (AllocationState([0.0, 0.0]),
                                                0.0))
        manual = integrate_dde(field.delayed_rate, x0, None, 0.5,
                               (0.0, 5.0), 0.01)
        np.testing.assert_array_equal(traj.shares, manual.shares)

    def test_fixed_utility_start_oracle(self, cfg, x0):
        # At r=0 and zero price: u = [8.75, 5.75, 8.0] for the duopoly start.
        traj = solve_fixed(cfg, x0, [0.0, 0.0], (0.0, 1.0), 0.1)
        np.testing.assert_allclose(traj.utilities[0], [8.75, 5.75, 8.0],
                                   rtol=1e-14)
        assert not traj.integral_utilities[0].any()


class TestMeasures:
    def make_traj(self, errs):
        # Two-group shares drifting toward [0.5, 0.5] with given max errors.
        times = np.arange(float(len(errs)))
        shares = np.column_stack([0.5 + np.asarray(errs),
                                  0.5 - np.asarray(errs)])
        return Trajectory(times=times, shares=shares)

    def test_convergence_time_crossing(self):
        traj = self.make_traj([0.3, 0.2, 0.05, 0.01])
        assert convergence_time(traj, [0.5, 0.5], 0.1) == 2.0

    def test_convergence_time_immediate(self):
        traj = self.make_traj([0.01, 0.02, 0.01, 0.0])
        assert convergence_time(traj, [0.5, 0.5], 0.1) == 0.0

    def test_convergence_time_never(self):
        traj = self.make_traj([0.3, 0.01, 0.01, 0.2])
        assert convergence_time(traj, [0.5, 0.5], 0.1) is None

    def test_convergence_time_accepts_population_state(self):
        traj = self.make_traj([0.3, 0.05, 0.01, 0.01])
        tgt = PopulationState([0.5, 0.5])
        assert convergence_time(traj, tgt, 0.1) == 1.0

    def test_convergence_time_rejects_bad_eps(self):
        traj = self.make_traj([0.0])
        with pytest.raises(ValueError, match="eps"):
            convergence_time(traj, [0.5, 0.5], 0.0)

    def flat_utility_traj(self, value, t_end, dt):
        times = np.round(np.arange(0.0, t_end + 1e-12, dt), 12)
        shares = np.tile([0.5, 0.5], (times.shape[0], 1))
        traj = Trajectory(times=times, shares=shares)
        traj.utilities = np.full((times.shape[0], 2), value)
        return traj

    def test_integral_utility_undiscounted(self):
        traj = self.flat_utility_traj(3.0, 2.0, 0.01)
        assert integral_utility(traj, 1, 0.0) == pytest.approx(6.0, rel=1e-12)

    def test_integral_utility_discounted_oracle(self):
        # integral of e^{-t} over [0,1] = 1 - 1/e.
        traj = self.flat_utility_traj(1.0, 1.0, 0.001)
        want = 1.0 - E_INV
        assert integral_utility(traj, "ccp", 1.0) == pytest.approx(want,
                                                                   abs=1e-6)

    def test_integral_utility_validates_who(self):
        traj = self.flat_utility_traj(1.0, 1.0, 0.1)
        with pytest.raises(ValueError, match="who"):
            integral_utility(traj, 2, 0.0)
        with pytest.raises(ValueError, match="who"):
            integral_utility(traj, "leader", 0.0)

    def test_integral_utility_requires_utilities(self):
        traj = integrate_ode(decay, [1.0], (0.0, 1.0), 0.1)
        with pytest.raises(ValueError, match="no utilities"):
            integral_utility(traj, 1, 0.0)

    def test_running_integral_consistent(self, cfg, x0):
        traj = solve_fixed(cfg, x0, [0.1, 0.1], (0.0, 5.0), 0.01)
        for who, col in ((1, 0), (2, 1), ("ccp", 2)):
            total = integral_utility(traj, who, cfg.discount_rate)
            assert traj.integral_utilities[-1, col] == pytest.approx(
                total, rel=1e-12)

    def test_price_cap_default(self, cfg):
        assert default_price_cap(cfg) == pytest.approx(3.0)
        assert default_price_cap(make_big_cloud_config()) == pytest.approx(5.0)
