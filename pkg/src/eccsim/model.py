"""Market primitives for a two-tier edge/cloud compute market.

A cloud provider (the leader) sells compute to N edge providers (the
followers) at a unit price p(t); each edge provider n resells access to a
population of K user devices at a fixed access price p_n.  Users split into
N+1 groups by provider choice; the group shares live on the simplex.  This
module holds the static parameter bundle, the state containers, and the
instantaneous quantities everything else is built from: per-user compute,
per-user utility, the population mean utility, the aggregate utility mass
Theta, and the providers' instantaneous payoffs.

All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

__all__ = [
    "ZeroShare",
    "SystemConfig",
    "PopulationState",
    "AllocationState",
    "MarketSnapshot",
    "per_user_power",
    "user_utility",
    "mean_utility",
    "theta",
    "ecp_instant_utility",
    "ccp_instant_utility",
]

# Sum-to-one slack for population states.
SIMPLEX_TOL = 1e-12
# Feasibility slack for allocation states (floating-point headroom only).
ALLOC_TOL = 1e-9


class ZeroShare(RuntimeError):
    """A provider with positive compute to hand out has an empty user group.

    The per-user quantities divide compute by group size; a zero share with
    nonzero compute behind it makes the division meaningless.  Raised instead
    of returning infinity so integrators can detect boundary exit.
    """


def _as_float_vector(value, name: str, length: int | None = None) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name}: expected a 1-d vector, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name}: expected length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: entries must be finite")
    return arr


@dataclass(frozen=True)
class SystemConfig:
    """Static parameters of the market.

    Attributes:
        n_ecps: number of edge providers N.
        n_users: population size K.
        ecp_power: own compute R_n of each edge provider, length N, kH/s.
        ecp_access_price: user access price p_n of each edge provider.
        cloud_power: cloud compute capacity R_c, kH/s.
        cloud_access_price: user access price p_c of the cloud provider.
        learning_rate: population adaptation speed delta.
        mapping_factor: compute-to-utility scale beta.
        discount_rate: provider discount rate rho.
        ecp_weights: payoff weights (eta1, eta2, eta3) of every edge provider.
        ccp_weights: payoff weights (xi1, xi2, xi3) of the cloud provider.
        nominal_rate: nominal per-user compute demand phi.
        horizon: planning horizon T.
        population_delay: user-side reaction delay tau_x, 0 means undelayed.
    """

    n_ecps: int
    n_users: int
    ecp_power: np.ndarray
    ecp_access_price: np.ndarray
    cloud_power: float
    cloud_access_price: float
    learning_rate: float
    mapping_factor: float
    discount_rate: float
    ecp_weights: tuple[float, float, float]
    ccp_weights: tuple[float, float, float]
    nominal_rate: float
    horizon: float
    population_delay: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.n_ecps, (int, np.integer)) or self.n_ecps < 1:
            raise ValueError("n_ecps: must be a positive integer")
        if not isinstance(self.n_users, (int, np.integer)) or self.n_users < 1:
            raise ValueError("n_users: must be a positive integer")
        power = _as_float_vector(self.ecp_power, "ecp_power", self.n_ecps)
        if np.any(power <= 0.0):
            raise ValueError("ecp_power: every entry must be positive")
        object.__setattr__(self, "ecp_power", power)
        price = _as_float_vector(self.ecp_access_price, "ecp_access_price", self.n_ecps)
        if np.any(price <= 0.0):
            raise ValueError("ecp_access_price: every entry must be positive")
        object.__setattr__(self, "ecp_access_price", price)
        if not np.isfinite(self.cloud_power) or self.cloud_power <= 0.0:
            raise ValueError("cloud_power: must be positive")
        # The model assumes the cloud dwarfs each edge provider; unit test
        # scenarios legitimately use equality, so only R_c < R_n is rejected.
        if self.cloud_power < float(np.max(power)):
            raise ValueError("cloud_power: must be at least max(ecp_power)")
        for name in ("cloud_access_price", "learning_rate", "mapping_factor",
                     "discount_rate", "nominal_rate", "horizon"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0.0:
                raise ValueError(f"{name}: must be positive")
        for name in ("ecp_weights", "ccp_weights"):
            w = tuple(float(v) for v in getattr(self, name))
            if len(w) != 3:
                raise ValueError(f"{name}: expected exactly 3 weights")
            if any((not np.isfinite(v)) or v <= 0.0 for v in w):
                raise ValueError(f"{name}: weights must be positive")
            object.__setattr__(self, name, w)
        if not np.isfinite(self.population_delay) or self.population_delay < 0.0:
            raise ValueError("population_delay: must be nonnegative")

    @property
    def all_access_prices(self) -> np.ndarray:
        """Access prices [p_1..p_N, p_c] in provider order."""
        return np.append(self.ecp_access_price, self.cloud_access_price)


@dataclass(frozen=True)
class PopulationState:
    """User distribution over providers, ordered [x_1..x_N, x_c].

    Shares must lie in [0, 1] and sum to one within SIMPLEX_TOL.  Zero
    entries are representable (boundary states appear in formal inputs);
    dynamics additionally require interior states at t=0.
    """

    shares: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_float_vector(self.shares, "shares")
        if arr.shape[0] < 2:
            raise ValueError("shares: need at least one edge provider plus the cloud")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("shares: entries must lie in [0, 1]")
        if abs(arr.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError("shares: must sum to 1")
        object.__setattr__(self, "shares", arr)

    @property
    def n_ecps(self) -> int:
        return self.shares.shape[0] - 1

    @property
    def ecp(self) -> np.ndarray:
        """Edge-provider shares [x_1..x_N]."""
        return self.shares[:-1]

    @property
    def cloud(self) -> float:
        """Cloud share x_c."""
        return float(self.shares[-1])

    def is_interior(self) -> bool:
        return bool(np.all(self.shares > 0.0))


@dataclass(frozen=True)
class AllocationState:
    """Cloud-compute request fractions r_n of the edge providers.

    Each r_n lies in [0, 1) and the requests sum to at most 1; whatever is
    not requested stays with the cloud as cloud_remainder.
    """

    requests: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_float_vector(self.requests, "requests")
        if arr.shape[0] < 1:
            raise ValueError("requests: need at least one edge provider")
        if np.any(arr < 0.0) or np.any(arr >= 1.0):
            raise ValueError("requests: entries must lie in [0, 1)")
        if arr.sum() > 1.0 + ALLOC_TOL:
            raise ValueError("requests: must sum to at most 1")
        object.__setattr__(self, "requests", arr)

    @property
    def cloud_remainder(self) -> float:
        """Fraction r_c = 1 - sum r_n retained by the cloud."""
        return max(0.0, 1.0 - float(self.requests.sum()))


@dataclass(frozen=True)
class MarketSnapshot:
    """One instant of the market: population, allocation, cloud price, time."""

    population: PopulationState
    allocation: AllocationState
    price: float = 0.0
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.population.n_ecps != self.allocation.requests.shape[0]:
            raise ValueError("allocation: length inconsistent with population")
        if not np.isfinite(self.price) or self.price < 0.0:
            raise ValueError("price: must be nonnegative")


def _check_sizes(cfg: SystemConfig, pop: PopulationState | None = None,
                 alloc: AllocationState | None = None) -> None:
    if pop is not None and pop.n_ecps != cfg.n_ecps:
        raise ValueError("shares: length inconsistent with n_ecps")
    if alloc is not None and alloc.requests.shape[0] != cfg.n_ecps:
        raise ValueError("requests: length inconsistent with n_ecps")


def provider_power(cfg: SystemConfig, alloc: AllocationState) -> np.ndarray:
    """Total compute per provider [R_1+R_c r_1, .., R_N+R_c r_N, R_c r_c]."""
    _check_sizes(cfg, alloc=alloc)
    return np.append(cfg.ecp_power + cfg.cloud_power * alloc.requests,
                     cfg.cloud_power * alloc.cloud_remainder)


def per_user_power(cfg: SystemConfig, snap: MarketSnapshot) -> np.ndarray:
    """Compute each user receives from its chosen provider.

    Entry n is (R_n + R_c r_n)/(K x_n); the last entry is the cloud's
    R_c r_c/(K x_c).  A provider whose compute and share are both zero
    contributes omega = 0.

    Raises:
        ZeroShare: some provider holds compute but has no users.
    """
    _check_sizes(cfg, snap.population, snap.allocation)
    supply = provider_power(cfg, snap.allocation)
    shares = snap.population.shares
    empty = shares <= 0.0
    if np.any(empty & (supply > 0.0)):
        idx = int(np.argmax(empty & (supply > 0.0)))
        label = "cloud" if idx == cfg.n_ecps else f"ecp {idx + 1}"
        raise ZeroShare(f"{label}: positive compute with zero user share")
    out = np.zeros_like(supply)
    busy = ~empty
    out[busy] = supply[busy] / (cfg.n_users * shares[busy])
    return out


def user_utility(cfg: SystemConfig, snap: MarketSnapshot) -> np.ndarray:
    """Per-user utility beta*omega_s/p_s for each provider choice s."""
    omega = per_user_power(cfg, snap)
    return cfg.mapping_factor * omega / cfg.all_access_prices


def mean_utility(pop: PopulationState, utils: np.ndarray) -> float:
    """Population-average utility sum_s x_s * pi_s."""
    utils = np.asarray(utils, dtype=float)
    if utils.shape != pop.shares.shape:
        raise ValueError("utils: length inconsistent with population")
    return float(np.dot(pop.shares, utils))


def theta(cfg: SystemConfig, alloc: AllocationState) -> float:
    """Aggregate utility mass Theta of the current allocation.

    Theta = (delta*beta/K) * [sum_n (R_n + R_c r_n)/p_n + R_c r_c/p_c].
    It is the uniform decay rate of the population dynamics around the
    evolutionary equilibrium and is strictly positive for every feasible
    allocation because each R_n is.
    """
    _check_sizes(cfg, alloc=alloc)
    supply = provider_power(cfg, alloc)
    mass = float(np.sum(supply / cfg.all_access_prices))
    return cfg.learning_rate * cfg.mapping_factor * mass / cfg.n_users


def ecp_instant_utility(cfg: SystemConfig, snap: MarketSnapshot, n: int) -> float:
    """Instantaneous payoff of edge provider n (1-based).

    Access revenue eta1*p_n*K*x_n, minus the cloud-compute bill
    eta2*R_c*p*r_n, minus the quadratic supply/demand mismatch penalty
    eta3*(K*phi*x_n - (R_n + R_c r_n))^2.
    """
    _check_sizes(cfg, snap.population, snap.allocation)
    if not 1 <= n <= cfg.n_ecps:
        raise ValueError(f"n: must be in 1..{cfg.n_ecps}")
    eta1, eta2, eta3 = cfg.ecp_weights
    i = n - 1
    x_n = float(snap.population.shares[i])
    r_n = float(snap.allocation.requests[i])
    p_n = float(cfg.ecp_access_price[i])
    supply = float(cfg.ecp_power[i]) + cfg.cloud_power * r_n
    demand = cfg.n_users * cfg.nominal_rate * x_n
    return (eta1 * p_n * cfg.n_users * x_n
            - eta2 * cfg.cloud_power * snap.price * r_n
            - eta3 * (demand - supply) ** 2)


def ccp_instant_utility(cfg: SystemConfig, snap: MarketSnapshot) -> float:
    """Instantaneous payoff of the cloud provider.

    Access revenue xi1*p_c*K*x_c, plus compute sales xi2*R_c*p*sum r_n,
    minus the mismatch penalty xi3*(K*phi*x_c - R_c r_c)^2.
    """
    _check_sizes(cfg, snap.population, snap.allocation)
    xi1, xi2, xi3 = cfg.ccp_weights
    x_c = snap.population.cloud
    sold = float(snap.allocation.requests.sum())
    supply = cfg.cloud_power * (1.0 - sold)
    demand = cfg.n_users * cfg.nominal_rate * x_c
    return (xi1 * cfg.cloud_access_price * cfg.n_users * x_c
            + xi2 * cfg.cloud_power * snap.price * sold
            - xi3 * (demand - supply) ** 2)
