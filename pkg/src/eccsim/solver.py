"""Numerical machinery: integrators and the equilibrium sweep.

Everything runs on a fixed uniform grid with classical fourth-order
Runge-Kutta steps.  Fixed stepping keeps runs deterministic and lines the
grid up with the delay buffer, which matters more here than raw speed.

The open-loop equilibrium is found by forward-backward sweeping: integrate
the population forward under the current control schedule, integrate the
adjoints backward from their zero terminal conditions, refresh the controls
from the stationarity formulas, under-relax, repeat.  The adjoint equations
grow at rate rho+Theta forward in time, so backward is the stable
direction; sweeping with damping is the standard way to solve this kind of
two-point boundary value problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .model import (
    AllocationState,
    MarketSnapshot,
    PopulationState,
    SystemConfig,
)
from .replicator import ReplicatorField

__all__ = [
    "BlowUp",
    "Trajectory",
    "SweepReport",
    "integrate_ode",
    "integrate_dde",
    "solve_open_loop",
    "solve_ssec",
    "solve_fixed",
    "replay_forward",
    "costate_backward_grid",
    "convergence_time",
    "integral_utility",
    "default_price_cap",
]

# Hard ceiling on any integrated magnitude before the run is declared lost.
MAGNITUDE_LIMIT = 1e12
# Interior floor for population shares.
SHARE_FLOOR = 1e-12
# Renormalize the simplex only when the sum drifts past this.
DRIFT_TOL = 1e-12
# Requests are kept strictly inside [0, 1) with this margin.
CONTROL_CAP = 1.0 - 1e-6


class BlowUp(RuntimeError):
    """An integrated state left the finite range the model is meant for."""


@dataclass
class Trajectory:
    """Time-gridded run record.

    Only `times` and `shares` are always present; control, adjoint, and
    utility columns are filled by the solvers that produce them.  Shapes:
    times (M,), shares (M, N+1), requests (M, N), prices (M,),
    ecp_costates (M, N, N), ccp_mu (M, N), ccp_theta (M, N, N),
    utilities (M, N+1) ordered [u_1..u_N, u_c], integral_utilities ditto.
    """

    times: np.ndarray
    shares: np.ndarray
    requests: np.ndarray | None = None
    prices: np.ndarray | None = None
    ecp_costates: np.ndarray | None = None
    ccp_mu: np.ndarray | None = None
    ccp_theta: np.ndarray | None = None
    utilities: np.ndarray | None = None
    integral_utilities: np.ndarray | None = None

    @property
    def n_ecps(self) -> int:
        return self.shares.shape[1] - 1

    def state(self, i: int) -> PopulationState:
        return PopulationState(self.shares[i])

    def allocation(self, i: int) -> AllocationState:
        if self.requests is None:
            raise ValueError("trajectory stores no control schedule")
        return AllocationState(self.requests[i])

    def snapshot(self, i: int) -> MarketSnapshot:
        price = 0.0 if self.prices is None else float(self.prices[i])
        return MarketSnapshot(self.state(i), self.allocation(i),
                              price=price, time=float(self.times[i]))

    def index_at(self, t: float) -> int:
        """Grid index nearest to time t."""
        return int(np.argmin(np.abs(self.times - t)))

    def upto(self, t_end: float) -> "Trajectory":
        """View of the trajectory restricted to times <= t_end."""
        m = int(np.searchsorted(self.times, t_end + 1e-12, side="right"))

        def cut(a):
            return None if a is None else a[:m]

        return Trajectory(self.times[:m], self.shares[:m], cut(self.requests),
                          cut(self.prices), cut(self.ecp_costates),
                          cut(self.ccp_mu), cut(self.ccp_theta),
                          cut(self.utilities), cut(self.integral_utilities))


@dataclass(frozen=True)
class SweepReport:
    """Outcome of the forward-backward sweep.

    state_residual is the largest change in any share between the last two
    sweeps; costate_terminal_residual is the analogous change over the
    terminal-anchored adjoint paths (their values at T are pinned to zero
    by construction, so path change is the meaningful residual).
    Non-convergence is reported here, not raised.
    """

    iterations: int
    state_residual: float
    costate_terminal_residual: float
    converged: bool


def default_price_cap(cfg: SystemConfig) -> float:
    """Projection ceiling for the cloud price: ten times the dearest access price."""
    return 10.0 * float(max(np.max(cfg.ecp_access_price), cfg.cloud_access_price))


def _make_grid(t_span: tuple[float, float], dt: float) -> np.ndarray:
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not dt > 0.0:
        raise ValueError("dt: must be positive")
    if not t1 > t0:
        raise ValueError("t_span: end must exceed start")
    steps_exact = (t1 - t0) / dt
    steps = int(round(steps_exact))
    if steps < 1 or abs(steps_exact - steps) > 1e-9 * max(1.0, steps_exact):
        raise ValueError("dt: span must be an integer number of steps")
    times = t0 + dt * np.arange(steps + 1)
    times[-1] = t1
    return times


def _check_finite(y: np.ndarray) -> None:
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > MAGNITUDE_LIMIT:
        raise BlowUp("state magnitude left the finite range")


def _project_simplex(y: np.ndarray) -> np.ndarray:
    y = np.maximum(y, SHARE_FLOOR)
    s = y.sum()
    if abs(s - 1.0) > DRIFT_TOL:
        y = y / s
    return y


def integrate_ode(field: Callable[[float, np.ndarray], np.ndarray],
                  x0, t_span: tuple[float, float], dt: float,
                  *, simplex: bool = False) -> Trajectory:
    """Fixed-step RK4 integration of x' = field(t, x).

    With simplex=True each step is renormalized onto the simplex when the
    sum drifts past DRIFT_TOL and floored at SHARE_FLOOR to preserve
    interiority; population runs use this, generic test problems must not
    (a 1-d decay would be pinned to its initial value by renormalization).

    Raises:
        BlowUp: a state magnitude exceeded MAGNITUDE_LIMIT or went non-finite.
    """
    times = _make_grid(t_span, dt)
    y = np.asarray(x0, dtype=float).copy()
    out = np.empty((times.shape[0], y.shape[0]))
    out[0] = y
    for i in range(times.shape[0] - 1):
        t = times[i]
        k1 = field(t, y)
        k2 = field(t + 0.5 * dt, y + (0.5 * dt) * k1)
        k3 = field(t + 0.5 * dt, y + (0.5 * dt) * k2)
        k4 = field(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(y)
        if simplex:
            y = _project_simplex(y)
        out[i + 1] = y
    return Trajectory(times=times, shares=out)


def integrate_dde(field: Callable[[float, np.ndarray, np.ndarray], np.ndarray],
                  x0, history: Callable[[float], np.ndarray] | None,
                  tau: float, t_span: tuple[float, float], dt: float,
                  *, simplex: bool = True) -> Trajectory:
    """Method-of-steps RK4 for x'(t) = field(t, x(t), x(t - tau)).

    The delayed state is read from the already-integrated grid by linear
    interpolation; before the start it comes from `history` (constant x0
    when None).  tau = 0 degenerates to plain RK4 with the current state
    fed to both slots, bit-identical to integrate_ode on the same field.

    Raises:
        ValueError: 0 < tau < dt (one step would outrun the buffer).
        BlowUp: as for integrate_ode.
    """
    times = _make_grid(t_span, dt)
    t0 = times[0]
    y = np.asarray(x0, dtype=float).copy()
    out = np.empty((times.shape[0], y.shape[0]))
    out[0] = y

    if tau == 0.0:
        for i in range(times.shape[0] - 1):
            t = times[i]
            k1 = field(t, y, y)
            y2 = y + (0.5 * dt) * k1
            k2 = field(t + 0.5 * dt, y2, y2)
            y3 = y + (0.5 * dt) * k2
            k3 = field(t + 0.5 * dt, y3, y3)
            y4 = y + dt * k3
            k4 = field(t + dt, y4, y4)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            _check_finite(y)
            if simplex:
                y = _project_simplex(y)
            out[i + 1] = y
        return Trajectory(times=times, shares=out)

    if tau < dt:
        raise ValueError("tau: delay shorter than dt is not resolvable")
    x0_arr = y.copy()

    def delayed(tq: float, filled: int) -> np.ndarray:
        if tq <= t0:
            return x0_arr if history is None else np.asarray(history(tq), float)
        pos = (tq - t0) / dt
        j = int(pos)
        if j >= filled:
            return out[filled]
        frac = pos - j
        if frac <= 0.0:
            return out[j]
        return out[j] + frac * (out[j + 1] - out[j])

    for i in range(times.shape[0] - 1):
        t = times[i]
        k1 = field(t, y, delayed(t - tau, i))
        lag_mid = delayed(t + 0.5 * dt - tau, i)
        k2 = field(t + 0.5 * dt, y + (0.5 * dt) * k1, lag_mid)
        k3 = field(t + 0.5 * dt, y + (0.5 * dt) * k2, lag_mid)
        k4 = field(t + dt, y + dt * k3, delayed(t + dt - tau, i))
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(y)
        if simplex:
            y = _project_simplex(y)
        out[i + 1] = y
    return Trajectory(times=times, shares=out)


def _theta_grid(cfg: SystemConfig, requests: np.ndarray) -> np.ndarray:
    """Theta along a request schedule, vectorized over the grid."""
    supply = cfg.ecp_power[None, :] + cfg.cloud_power * requests
    mass = (supply / cfg.ecp_access_price[None, :]).sum(axis=1)
    mass = mass + cfg.cloud_power * (1.0 - requests.sum(axis=1)) / cfg.cloud_access_price
    return cfg.learning_rate * cfg.mapping_factor * mass / cfg.n_users


def _affine_rk4_back(y: np.ndarray | float, a: float, src, h: float):
    """One backward RK4 step of y' = a*y - src with constant coefficients."""
    k1 = a * y - src
    k2 = a * (y + (0.5 * h) * k1) - src
    k3 = a * (y + (0.5 * h) * k2) - src
    k4 = a * (y + h * k3) - src
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def costate_backward_grid(cfg: SystemConfig, times: np.ndarray,
                          requests: np.ndarray
                          ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backward-integrate all adjoints from zero terminal conditions.

    The adjoint equations depend on the state path only through
    Theta(r(t)), held piecewise constant per interval to match the forward
    pass's piecewise-constant controls.  Returns (lam, mu, theta_mat) grids
    of shapes (M, N, N), (M, N), (M, N, N).
    """
    n = cfg.n_ecps
    m = times.shape[0]
    th = _theta_grid(cfg, requests)
    eta1 = cfg.ecp_weights[0]
    xi1 = cfg.ccp_weights[0]
    lam_src = np.diag(eta1 * cfg.ecp_access_price * cfg.n_users)
    mu_src = xi1 * cfg.cloud_access_price * cfg.n_users
    lam = np.zeros((m, n, n))
    mu = np.zeros((m, n))
    theta_mat = np.zeros((m, n, n))
    h = float(times[0] - times[1]) if m > 1 else 0.0
    for i in range(m - 1, 0, -1):
        a = cfg.discount_rate + th[i - 1]
        lam[i - 1] = _affine_rk4_back(lam[i], a, lam_src, h)
        mu[i - 1] = _affine_rk4_back(mu[i], a, mu_src, h)
        theta_mat[i - 1] = _affine_rk4_back(theta_mat[i], th[i - 1], 0.0, h)
        _check_finite(lam[i - 1])
    return lam, mu, theta_mat


def _forward_pass(cfg: SystemConfig, x0: np.ndarray, times: np.ndarray,
                  lam_grid: np.ndarray, mu_grid: np.ndarray,
                  theta_mat_grid: np.ndarray, p_max: float,
                  prev_requests: np.ndarray | None,
                  prev_prices: np.ndarray | None,
                  relaxation: float
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate the population forward under stationary-point controls.

    At each grid node the leader price and follower requests are computed
    from the current adjoints, projected onto the feasible box, and (when a
    previous schedule is given) blended with it by the relaxation factor.
    The controls then stay frozen across the RK4 stages of the step.  The
    state advance uses the algebraically reduced linear field
    x' = delta*c - Theta*x (see ReplicatorField).
    """
    n = cfg.n_ecps
    m = times.shape[0]
    dt = float(times[1] - times[0]) if m > 1 else 0.0
    eta2, eta3 = cfg.ecp_weights[1], cfg.ecp_weights[2]
    xi2, xi3 = cfg.ccp_weights[1], cfg.ccp_weights[2]
    power_c = cfg.cloud_power
    inv_p = 1.0 / cfg.ecp_access_price
    gap = inv_p - 1.0 / cfg.cloud_access_price
    mix = float(-inv_p.sum() + n / cfg.cloud_access_price)
    b_slope = eta2 / (2.0 * eta3 * power_c)
    nb = n * b_slope
    price_den = 2.0 * nb * (xi2 + xi3 * power_c * nb)
    lam_q_scale = (cfg.learning_rate * cfg.mapping_factor
                   / (2.0 * eta3 * power_c * cfg.n_users))
    flow_scale = cfg.learning_rate * cfg.mapping_factor * b_slope / cfg.n_users
    kphi = cfg.n_users * cfg.nominal_rate
    prices_all = cfg.all_access_prices
    beta_k = cfg.mapping_factor / cfg.n_users
    delta = cfg.learning_rate

    shares = np.empty((m, n + 1))
    requests = np.empty((m, n))
    prices = np.empty(m)
    x = np.asarray(x0, dtype=float).copy()
    for i in range(m):
        shares[i] = x
        xe = x[:n]
        lam = lam_grid[i]
        lam_dot_q = np.diagonal(lam) * inv_p - gap * (lam @ xe)
        a_vec = (kphi * xe - cfg.ecp_power) / power_c + lam_q_scale * lam_dot_q
        sum_a = a_vec.sum()
        mu_term = float(np.dot(mu_grid[i], -inv_p - xe * mix))
        theta_term = float(np.einsum("nm,nm->", theta_mat_grid[i], lam)) * mix
        numerator = (xi2 * sum_a
                     + 2.0 * xi3 * nb * (kphi * (1.0 - xe.sum())
                                         - power_c * (1.0 - sum_a))
                     + flow_scale * (mu_term + theta_term))
        p_new = min(max(numerator / price_den, 0.0), p_max)
        r_new = np.clip(a_vec - b_slope * p_new, 0.0, CONTROL_CAP)
        total = r_new.sum()
        if total > CONTROL_CAP:
            r_new *= CONTROL_CAP / total
        if prev_requests is not None:
            r_new = relaxation * r_new + (1.0 - relaxation) * prev_requests[i]
            p_new = relaxation * p_new + (1.0 - relaxation) * prev_prices[i]
        requests[i] = r_new
        prices[i] = p_new
        if i == m - 1:
            break
        supply = np.append(cfg.ecp_power + power_c * r_new,
                           power_c * (1.0 - r_new.sum()))
        c_vec = beta_k * supply / prices_all
        th = delta * c_vec.sum()
        dc = delta * c_vec
        k1 = dc - th * x
        k2 = dc - th * (x + (0.5 * dt) * k1)
        k3 = dc - th * (x + (0.5 * dt) * k2)
        k4 = dc - th * (x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(x)
        x = _project_simplex(x)
    return shares, requests, prices


def _attach_utilities(cfg: SystemConfig, traj: Trajectory) -> None:
    """Fill the per-provider utility and discounted running-integral columns."""
    n = cfg.n_ecps
    eta1, eta2, eta3 = cfg.ecp_weights
    xi1, xi2, xi3 = cfg.ccp_weights
    xe = traj.shares[:, :n]
    xc = traj.shares[:, n]
    r = traj.requests
    p = traj.prices
    kphi = cfg.n_users * cfg.nominal_rate
    supply_e = cfg.ecp_power[None, :] + cfg.cloud_power * r
    u_e = (eta1 * cfg.ecp_access_price[None, :] * cfg.n_users * xe
           - eta2 * cfg.cloud_power * p[:, None] * r
           - eta3 * (kphi * xe - supply_e) ** 2)
    sold = r.sum(axis=1)
    u_c = (xi1 * cfg.cloud_access_price * cfg.n_users * xc
           + xi2 * cfg.cloud_power * p * sold
           - xi3 * (kphi * xc - cfg.cloud_power * (1.0 - sold)) ** 2)
    utilities = np.column_stack([u_e, u_c])
    weighted = np.exp(-cfg.discount_rate * traj.times)[:, None] * utilities
    running = cumulative_trapezoid(weighted, traj.times, axis=0, initial=0.0)
    traj.utilities = utilities
    traj.integral_utilities = running


def solve_open_loop(cfg: SystemConfig, x0, *, dt: float,
                    t_span: tuple[float, float] | None = None,
                    max_iter: int = 500, tol: float = 1e-8,
                    costate_tol: float = 1e-6, relaxation: float = 0.5,
                    p_max: float | None = None
                    ) -> tuple[Trajectory, SweepReport]:
    """Open-loop equilibrium of the full hierarchical game.

    Forward-backward sweep with under-relaxation of the control schedule;
    costates start at zero everywhere, so the first forward pass runs the
    myopic controls.  Converged means the largest share change between
    sweeps fell below tol and the largest adjoint change below costate_tol.
    The returned trajectory is a final relaxation-free forward pass under
    the converged adjoints, so replaying it with frozen costates reproduces
    it exactly.  A run that exhausts max_iter returns converged=False in
    the report rather than raising.

    Raises:
        BlowUp: integration left the finite range.
        ValueError: malformed grid or parameters.
    """
    if not 0.0 < relaxation <= 1.0:
        raise ValueError("relaxation: must lie in (0, 1]")
    if t_span is None:
        t_span = (0.0, cfg.horizon)
    if p_max is None:
        p_max = default_price_cap(cfg)
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0.0):
        raise ValueError("x0: initial shares must be interior")
    times = _make_grid(t_span, dt)
    m = times.shape[0]
    n = cfg.n_ecps
    lam_grid = np.zeros((m, n, n))
    mu_grid = np.zeros((m, n))
    theta_mat_grid = np.zeros((m, n, n))
    prev_shares = None
    prev_requests = None
    prev_prices = None
    state_res = np.inf
    costate_res = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        shares, requests, prices = _forward_pass(
            cfg, x0, times, lam_grid, mu_grid, theta_mat_grid, p_max,
            prev_requests, prev_prices, relaxation)
        if prev_shares is not None:
            state_res = float(np.max(np.abs(shares - prev_shares)))
        new_lam, new_mu, new_theta = costate_backward_grid(cfg, times, requests)
        costate_res = float(max(np.max(np.abs(new_lam - lam_grid)),
                                np.max(np.abs(new_mu - mu_grid)),
                                np.max(np.abs(new_theta - theta_mat_grid))))
        lam_grid, mu_grid, theta_mat_grid = new_lam, new_mu, new_theta
        prev_shares = shares
        prev_requests = requests
        prev_prices = prices
        if state_res < tol and costate_res < costate_tol:
            converged = True
            break
    report = SweepReport(iterations=iterations, state_residual=state_res,
                         costate_terminal_residual=costate_res,
                         converged=converged)
    shares, requests, prices = _forward_pass(
        cfg, x0, times, lam_grid, mu_grid, theta_mat_grid, p_max,
        None, None, 1.0)
    traj = Trajectory(times=times, shares=shares, requests=requests,
                      prices=prices, ecp_costates=lam_grid, ccp_mu=mu_grid,
                      ccp_theta=theta_mat_grid)
    _attach_utilities(cfg, traj)
    return traj, report


def replay_forward(cfg: SystemConfig, traj: Trajectory,
                   p_max: float | None = None) -> Trajectory:
    """Re-run the forward pass under a trajectory's frozen adjoints.

    On a converged solve the result matches the original bit for bit; used
    to certify that the stored schedule is self-consistent.
    """
    if traj.ecp_costates is None:
        raise ValueError("trajectory stores no adjoints to replay")
    if p_max is None:
        p_max = default_price_cap(cfg)
    shares, requests, prices = _forward_pass(
        cfg, traj.shares[0].copy(), traj.times, traj.ecp_costates,
        traj.ccp_mu, traj.ccp_theta, p_max, None, None, 1.0)
    out = Trajectory(times=traj.times, shares=shares, requests=requests,
                     prices=prices, ecp_costates=traj.ecp_costates,
                     ccp_mu=traj.ccp_mu, ccp_theta=traj.ccp_theta)
    _attach_utilities(cfg, out)
    return out


def solve_ssec(cfg: SystemConfig, x0, t_span: tuple[float, float],
               dt: float, *, p_max: float | None = None) -> Trajectory:
    """Myopic baseline: each instant's static game, then one population step.

    Identical to the sweep's forward pass with all adjoints pinned to zero,
    i.e. providers optimize instantaneous payoff only.
    """
    if p_max is None:
        p_max = default_price_cap(cfg)
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0.0):
        raise ValueError("x0: initial shares must be interior")
    times = _make_grid(t_span, dt)
    m = times.shape[0]
    n = cfg.n_ecps
    shares, requests, prices = _forward_pass(
        cfg, x0, times, np.zeros((m, n, n)), np.zeros((m, n)),
        np.zeros((m, n, n)), p_max, None, None, 1.0)
    traj = Trajectory(times=times, shares=shares, requests=requests,
                      prices=prices)
    _attach_utilities(cfg, traj)
    return traj


def solve_fixed(cfg: SystemConfig, x0, r0, t_span: tuple[float, float],
                dt: float) -> Trajectory:
    """Population run under a frozen allocation and zero cloud price.

    Honors cfg.population_delay: positive delay switches to the
    method-of-steps integrator with constant prehistory.
    """
    alloc = AllocationState(np.asarray(r0, dtype=float))
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0.0):
        raise ValueError("x0: initial shares must be interior")
    field = ReplicatorField(cfg, lambda t: (alloc, 0.0))
    if cfg.population_delay > 0.0:
        traj = integrate_dde(field.delayed_rate, x0, None,
                             cfg.population_delay, t_span, dt, simplex=True)
    else:
        traj = integrate_ode(field.rate, x0, t_span, dt, simplex=True)
    m = traj.times.shape[0]
    traj.requests = np.tile(alloc.requests, (m, 1))
    traj.prices = np.zeros(m)
    _attach_utilities(cfg, traj)
    return traj


def convergence_time(traj: Trajectory, target, eps: float) -> float | None:
    """First grid time after which the shares stay eps-close to target.

    Closeness is the max-norm against the target shares, required to hold
    from that time through the end of the stored horizon; None if the
    trajectory never locks on.
    """
    if not eps > 0.0:
        raise ValueError("eps: must be positive")
    tgt = target.shares if isinstance(target, PopulationState) else np.asarray(target, float)
    err = np.max(np.abs(traj.shares - tgt[None, :]), axis=1)
    bad = np.nonzero(err >= eps)[0]
    if bad.shape[0] == 0:
        return float(traj.times[0])
    last = int(bad[-1])
    if last == traj.times.shape[0] - 1:
        return None
    return float(traj.times[last + 1])


def integral_utility(traj: Trajectory, who, rho: float) -> float:
    """Discounted integral payoff over the stored horizon.

    `who` is an edge provider index 1..N or the string "ccp"; trapezoidal
    quadrature of exp(-rho*t) times the stored utility column.
    """
    if traj.utilities is None:
        raise ValueError("trajectory stores no utilities")
    n = traj.n_ecps
    if isinstance(who, str):
        if who.lower() != "ccp":
            raise ValueError('who: expected an index in 1..N or "ccp"')
        col = n
    else:
        if not 1 <= int(who) <= n:
            raise ValueError(f"who: must be in 1..{n}")
        col = int(who) - 1
    weighted = np.exp(-rho * traj.times) * traj.utilities[:, col]
    return float(np.trapezoid(weighted, traj.times))
