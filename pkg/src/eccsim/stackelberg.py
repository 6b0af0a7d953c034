"""Leader/follower optimal controls and their adjoint fields.

The cloud provider (leader) announces a compute price p(t); each edge
provider (follower) answers with a request share r_n(t).  Both sides
maximize a discounted integral payoff subject to the population dynamics,
which couples every decision through the user shares.  This module carries
the first-order machinery of that hierarchical game: per-player
Hamiltonians, the closed-form stationary controls, and the adjoint
(costate) vector fields integrated backward by the solver.

Controls returned here are unprojected stationary points; clamping to the
feasible box is the caller's job, because feasibility is a property of the
stored schedule, not of the optimality condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    AllocationState,
    MarketSnapshot,
    PopulationState,
    SystemConfig,
    _check_sizes,
    ccp_instant_utility,
    ecp_instant_utility,
    theta,
)
from .replicator import replicator_rhs

__all__ = [
    "EcpCostate",
    "CcpCostate",
    "q_vector",
    "decompose_request",
    "optimal_request",
    "optimal_price",
    "ecp_hamiltonian",
    "ecp_costate_rhs",
    "ccp_hamiltonian",
    "ccp_costate_rhs",
]


@dataclass(frozen=True)
class EcpCostate:
    """Edge-provider adjoints: lam[n, m] prices x_m in provider n's problem.

    The cloud share is eliminated through x_c = 1 - sum x_n, so each row
    covers only the N edge shares.  Terminal condition: lam(T) = 0.
    """

    lam: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.lam, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("lam: expected a square N x N matrix")
        object.__setattr__(self, "lam", arr)

    @classmethod
    def zero(cls, n_ecps: int) -> "EcpCostate":
        return cls(np.zeros((n_ecps, n_ecps)))


@dataclass(frozen=True)
class CcpCostate:
    """Cloud-provider adjoints.

    mu[n] prices the share x_n; theta_mat[n, m] prices the follower adjoint
    lam[n, m], which the leader treats as part of the controlled system.
    Terminal condition: both zero at T.
    """

    mu: np.ndarray
    theta_mat: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        th = np.asarray(self.theta_mat, dtype=float)
        if mu.ndim != 1:
            raise ValueError("mu: expected an N-vector")
        if th.shape != (mu.shape[0], mu.shape[0]):
            raise ValueError("theta_mat: expected an N x N matrix")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "theta_mat", th)

    @classmethod
    def zero(cls, n_ecps: int) -> "CcpCostate":
        return cls(np.zeros(n_ecps), np.zeros((n_ecps, n_ecps)))


def q_vector(cfg: SystemConfig, pop: PopulationState, n: int) -> np.ndarray:
    """Sensitivity direction of provider n's own-share velocity to r_n.

    q_n = (1/p_n) e_n - (1/p_n - 1/p_c) [x_1..x_N]; the derivative of the
    population flow with respect to provider n's request, up to the common
    factor delta*beta*R_c/K.
    """
    _check_sizes(cfg, pop)
    if not 1 <= n <= cfg.n_ecps:
        raise ValueError(f"n: must be in 1..{cfg.n_ecps}")
    p_n = float(cfg.ecp_access_price[n - 1])
    out = -(1.0 / p_n - 1.0 / cfg.cloud_access_price) * pop.ecp.copy()
    out[n - 1] += 1.0 / p_n
    return out


def _request_coeffs(cfg: SystemConfig, x_ecp: np.ndarray,
                    lam: np.ndarray) -> tuple[np.ndarray, float]:
    """Vector of A_n terms and the shared slope B for all providers at once."""
    eta1, eta2, eta3 = cfg.ecp_weights
    power_c = cfg.cloud_power
    inv_p = 1.0 / cfg.ecp_access_price
    gap = inv_p - 1.0 / cfg.cloud_access_price
    # lam_n . q_n(x) = lam_nn/p_n - gap_n * (lam_n . x)
    lam_dot_q = np.diagonal(lam) * inv_p - gap * (lam @ x_ecp)
    demand = cfg.n_users * cfg.nominal_rate * x_ecp
    scale = (cfg.learning_rate * cfg.mapping_factor
             / (2.0 * eta3 * power_c * cfg.n_users))
    a_vec = (demand - cfg.ecp_power) / power_c + scale * lam_dot_q
    b_slope = eta2 / (2.0 * eta3 * power_c)
    return a_vec, b_slope


def decompose_request(cfg: SystemConfig, pop: PopulationState,
                      costate: EcpCostate, n: int) -> tuple[float, float]:
    """Provider n's stationary request as intercept/slope (A_n, B) in price.

    The stationary request is exactly A_n - B*p for every price, so the
    leader can substitute the followers' reaction before optimizing.
    """
    _check_sizes(cfg, pop)
    if not 1 <= n <= cfg.n_ecps:
        raise ValueError(f"n: must be in 1..{cfg.n_ecps}")
    a_vec, b_slope = _request_coeffs(cfg, pop.ecp, costate.lam)
    return float(a_vec[n - 1]), b_slope


def optimal_request(cfg: SystemConfig, pop: PopulationState, price: float,
                    costate: EcpCostate, n: int) -> float:
    """Stationary point of provider n's Hamiltonian in r_n (unprojected)."""
    a_n, b_slope = decompose_request(cfg, pop, costate, n)
    return a_n - b_slope * price


def optimal_price(cfg: SystemConfig, pop: PopulationState,
                  ecp_costates: EcpCostate, ccp_costate: CcpCostate) -> float:
    """Stationary point of the leader's Hamiltonian in p (unprojected).

    Evaluated after substituting every follower's reaction r_n = A_n - B p,
    which makes the Hamiltonian strictly concave in p.
    """
    _check_sizes(cfg, pop)
    xi1, xi2, xi3 = cfg.ccp_weights
    n_ecps = cfg.n_ecps
    power_c = cfg.cloud_power
    x_ecp = pop.ecp
    a_vec, b_slope = _request_coeffs(cfg, x_ecp, ecp_costates.lam)
    sum_a = float(a_vec.sum())
    nb = n_ecps * b_slope
    inv_p = 1.0 / cfg.ecp_access_price
    # Common sensitivity of the cloud-bound utility mass to the price.
    mix = float(-inv_p.sum() + n_ecps / cfg.cloud_access_price)
    demand_c = cfg.n_users * cfg.nominal_rate * (1.0 - float(x_ecp.sum()))
    flow_scale = (cfg.learning_rate * cfg.mapping_factor * b_slope
                  / cfg.n_users)
    mu_term = float(np.dot(ccp_costate.mu, -inv_p - x_ecp * mix))
    theta_term = float(np.einsum("nm,nm->", ccp_costate.theta_mat,
                                 ecp_costates.lam)) * mix
    numerator = (xi2 * sum_a
                 + 2.0 * xi3 * nb * (demand_c - power_c * (1.0 - sum_a))
                 + flow_scale * (mu_term + theta_term))
    denominator = 2.0 * nb * (xi2 + xi3 * power_c * nb)
    return numerator / denominator


def ecp_hamiltonian(cfg: SystemConfig, snap: MarketSnapshot,
                    costate: EcpCostate, n: int) -> float:
    """Provider n's Hamiltonian: payoff plus adjoint-weighted share flow."""
    if not 1 <= n <= cfg.n_ecps:
        raise ValueError(f"n: must be in 1..{cfg.n_ecps}")
    flow = replicator_rhs(cfg, snap.population, snap.allocation)[: cfg.n_ecps]
    return (ecp_instant_utility(cfg, snap, n)
            + float(np.dot(costate.lam[n - 1], flow)))


def ecp_costate_rhs(cfg: SystemConfig, snap: MarketSnapshot,
                    costate: EcpCostate, n: int) -> np.ndarray:
    """Adjoint velocities for provider n's row of lam.

    lam_dot_nm = lam_nm*(rho + Theta) minus the access-revenue source
    eta1*p_n*K on the diagonal entry.  The off-diagonal equations are
    homogeneous, so rows started at zero stay diagonal.
    """
    if not 1 <= n <= cfg.n_ecps:
        raise ValueError(f"n: must be in 1..{cfg.n_ecps}")
    eta1 = cfg.ecp_weights[0]
    decay = cfg.discount_rate + theta(cfg, snap.allocation)
    out = costate.lam[n - 1] * decay
    out[n - 1] -= eta1 * float(cfg.ecp_access_price[n - 1]) * cfg.n_users
    return out


def ccp_hamiltonian(cfg: SystemConfig, snap: MarketSnapshot,
                    ecp_costates: EcpCostate, ccp_costate: CcpCostate) -> float:
    """Leader's Hamiltonian: payoff plus adjoint-weighted system flow.

    The controlled system seen by the leader is the share flow plus the
    followers' adjoint flow, hence the theta_mat-weighted lam velocities.
    """
    flow = replicator_rhs(cfg, snap.population, snap.allocation)[: cfg.n_ecps]
    lam_flow = np.stack([
        ecp_costate_rhs(cfg, snap, ecp_costates, n)
        for n in range(1, cfg.n_ecps + 1)
    ])
    return (ccp_instant_utility(cfg, snap)
            + float(np.dot(ccp_costate.mu, flow))
            + float(np.einsum("nm,nm->", ccp_costate.theta_mat, lam_flow)))


def ccp_costate_rhs(cfg: SystemConfig, snap: MarketSnapshot,
                    ccp_costate: CcpCostate) -> tuple[np.ndarray, np.ndarray]:
    """Adjoint velocities (mu_dot, theta_mat_dot) for the leader.

    mu_dot_n = mu_n*(rho + Theta) - xi1*p_c*K; the theta_mat equations are
    homogeneous with rate Theta (the discount cancels against the growth of
    the follower adjoints they track).
    """
    th = theta(cfg, snap.allocation)
    xi1 = cfg.ccp_weights[0]
    decay = cfg.discount_rate + th
    mu_dot = ccp_costate.mu * decay - xi1 * cfg.cloud_access_price * cfg.n_users
    theta_dot = ccp_costate.theta_mat * th
    return mu_dot, theta_dot
