"""Online budget pacing for one influencer by dual mirror descent.

At each campaign the influencer prices budget at ``theta_k``, buys the
per-individual argmax of ``reward - theta_k * b``, spends it only if the
remaining budget covers the whole purchase, and then moves ``theta`` with
a mirror-descent step on the dual subgradient ``alpha - sum(b)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .offline_single import solve_offline_single
from .scenario import Scenario, path_arrays, sample_path

ENTROPY = "entropy"
SQUARED = "squared"


class ConfigurationError(ValueError):
    pass


def theta_max(u_bar: float, alpha: float) -> float:
    return u_bar / alpha + 1.0


def convexity_constants(regularizer: str, th_max: float) -> tuple[float, float]:
    """``(sigma1, sigma2)`` of the regularizer on ``(0, theta_max]``."""
    if regularizer == ENTROPY:
        return 1.0 / th_max, 1.0 / th_max
    if regularizer == SQUARED:
        return 1.0, 1.0
    raise ConfigurationError(f"unknown regularizer {regularizer!r}")


@dataclass(frozen=True)
class DualState:
    theta: float
    eta: float
    regularizer: str = ENTROPY
    theta_max: float = math.inf

    @property
    def sigma(self) -> tuple[float, float]:
        return convexity_constants(self.regularizer, self.theta_max)


def online_stage_allocation(weights, x_row, theta: float, cap: float) -> np.ndarray:
    """Per-individual maximiser of ``rho b (1 - x) / (1 + b) - theta b`` on ``[0, cap]``."""
    rho = np.asarray(getattr(weights, "rho", weights), dtype=float)
    s = rho * (1.0 - np.asarray(x_row, dtype=float).reshape(rho.shape))
    if theta <= 0:
        return np.where(s > 0, float(cap), 0.0)
    return np.clip(np.sqrt(s / theta) - 1.0, 0.0, cap)


def budget_gate(b_tilde, remaining: float) -> np.ndarray:
    """All-or-nothing: keep the purchase only if the remaining budget covers it."""
    b_tilde = np.asarray(b_tilde, dtype=float)
    return b_tilde.copy() if b_tilde.sum() <= remaining else np.zeros_like(b_tilde)


def dual_subgradient(b_tilde, alpha: float) -> float:
    return float(alpha - np.sum(b_tilde))


def mirror_descent_update(state: DualState, g: float) -> DualState:
    if state.regularizer == ENTROPY:
        theta = state.theta * math.exp(-state.eta * g)
    elif state.regularizer == SQUARED:
        theta = max(0.0, state.theta - state.eta * g)
    else:
        raise ConfigurationError(f"unknown regularizer {state.regularizer!r}")
    return replace(state, theta=theta)


def default_eta(n: int, cap: float, alpha: float, K: int, u_bar: float, regularizer: str = ENTROPY) -> float:
    """Step size minimising the regret bound, capped at the admissible ``sigma2 / cap``."""
    th_max = theta_max(u_bar, alpha)
    sigma1, sigma2 = convexity_constants(regularizer, th_max)
    a = 2.0 * K / sigma1 * (n * cap**2 + alpha**2 / n)
    c = n * math.exp(-1) + u_bar * (math.log(u_bar / alpha + 1.0) + 1.0) / alpha
    return min(math.sqrt(c / a), sigma2 / cap)


def worst_case_u_bar(sc: Scenario) -> float:
    from .scenario import weights_for

    return max(float(weights_for(sc.network, t).rho.sum()) for t in sc.durations.support)


@dataclass
class StageRecord:
    k: int
    x: np.ndarray
    rho: np.ndarray
    b_tilde: np.ndarray
    b_hat: np.ndarray
    theta: float
    g: float
    remaining: float  # budget left after this stage
    utility: float
    utility_adjusted: float


@dataclass
class OnlineRunTrace:
    records: list[StageRecord] = field(default_factory=list)
    budget: float = 0.0
    cap: float = 0.0
    stop_time: int | None = None

    @property
    def spent(self) -> float:
        return self.budget - (self.records[-1].remaining if self.records else self.budget)

    @property
    def total_utility(self) -> float:
        return float(sum(r.utility for r in self.records))

    @property
    def total_adjusted(self) -> float:
        return float(sum(r.utility_adjusted for r in self.records))

    @property
    def allocations(self) -> np.ndarray:
        return np.stack([r.b_hat for r in self.records])

    @property
    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.records])

    def rows(self) -> Iterable[dict]:
        for r in self.records:
            yield {
                "k": r.k,
                "theta": r.theta,
                "g": r.g,
                "spent_k": float(r.b_hat.sum()),
                "remaining": r.remaining,
                "stage_utility_adjusted": r.utility_adjusted,
            }


def run_online_path(
    path,
    budget: float,
    cap: float,
    *,
    eta: float,
    theta0: float = math.exp(-1),
    regularizer: str = ENTROPY,
    th_max: float = math.inf,
    column: int = 0,
) -> OnlineRunTrace:
    """Run the pacing algorithm on an already realized path."""
    arr = path_arrays(path)
    K = arr.K
    alpha = budget / K
    state = DualState(theta=theta0, eta=eta, regularizer=regularizer, theta_max=th_max)
    trace = OnlineRunTrace(budget=float(budget), cap=float(cap))
    remaining = float(budget)
    spent = 0.0
    for k in range(K):
        rho, x = arr.rho[k], arr.x[k, :, column]
        b_tilde = online_stage_allocation(rho, x, state.theta, cap)
        b_hat = budget_gate(b_tilde, remaining)
        remaining -= float(b_hat.sum())
        spent += float(b_hat.sum())
        if trace.stop_time is None and spent + cap >= budget:
            trace.stop_time = k
        g = dual_subgradient(b_tilde, alpha)
        trace.records.append(
            StageRecord(
                k=k,
                x=x,
                rho=rho,
                b_tilde=b_tilde,
                b_hat=b_hat,
                theta=state.theta,
                g=g,
                remaining=remaining,
                utility=float(rho @ ((x + b_hat) / (1.0 + b_hat))),
                utility_adjusted=float(rho @ (b_hat * (1.0 - x) / (1.0 + b_hat))),
            )
        )
        state = mirror_descent_update(state, g)
    return trace


def resolve_eta(sc: Scenario, eta: float | None, regularizer: str, j: int = 0) -> tuple[float, float]:
    """Return ``(eta, theta_max)``; an explicit ``eta`` above ``sigma2 / cap`` is rejected."""
    alpha = float(sc.alpha[j])
    u_bar = worst_case_u_bar(sc)
    cap = float(sc.caps[j])
    if alpha <= 0:
        return (eta if eta is not None else 1.0), math.inf
    th_max = theta_max(u_bar, alpha)
    sigma2 = convexity_constants(regularizer, th_max)[1]
    if eta is None:
        return default_eta(sc.n, cap, alpha, sc.horizon, u_bar, regularizer), th_max
    if eta <= 0 or eta > sigma2 / cap:
        raise ConfigurationError(f"step size {eta} outside the admissible range (0, {sigma2 / cap:.6g}]")
    return float(eta), th_max


def run_online_single(
    sc: Scenario,
    seed: int | None = None,
    *,
    eta: float | None = None,
    theta0: float = math.exp(-1),
    regularizer: str = ENTROPY,
    stream=(),
) -> OnlineRunTrace:
    if sc.m != 1:
        raise ConfigurationError(f"single-influencer run needs m=1, got m={sc.m}")
    eta, th_max = resolve_eta(sc, eta, regularizer)
    if theta0 > th_max:
        raise ConfigurationError(f"theta0={theta0} exceeds theta_max={th_max}")
    path = sample_path(sc, seed, stream)
    return run_online_path(
        path, float(sc.budgets[0]), float(sc.caps[0]), eta=eta, theta0=theta0, regularizer=regularizer, th_max=th_max
    )


def path_regret(path, trace: OnlineRunTrace, budget: float, cap: float) -> float:
    return solve_offline_single(path, budget, cap).adjusted_objective - trace.total_adjusted


@dataclass(frozen=True)
class RegretEstimate:
    mean: float
    stderr: float
    per_k: dict  # K -> (mean regret, stderr)
    samples: np.ndarray


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


def _regret_trial(args):
    sc, seed, t, eta, regularizer = args
    path = sample_path(sc, seed, (t,))
    e, th_max = resolve_eta(sc, eta, regularizer)
    trace = run_online_path(path, float(sc.budgets[0]), float(sc.caps[0]), eta=e, regularizer=regularizer, th_max=th_max)
    return path_regret(path, trace, float(sc.budgets[0]), float(sc.caps[0]))


def estimate_regret(
    sc: Scenario,
    trials: int = 200,
    seed: int | None = None,
    horizons=None,
    *,
    eta: float | None = None,
    regularizer: str = ENTROPY,
    workers: int | None = None,
) -> RegretEstimate:
    """Monte Carlo regret against the hindsight optimum, one paired path per trial.

    ``horizons`` sweeps ``K`` at the scenario's average budget; trial ``t``
    uses stream ``(t,)`` at every horizon, so shorter paths are prefixes of
    longer ones.
    """
    from .parallel import pmap

    seed = sc.seed if seed is None else seed
    horizons = [sc.horizon] if horizons is None else list(horizons)
    per_k = {}
    last = None
    for K in horizons:
        sck = sc.with_horizon(K)
        jobs = [(sck, seed, t, eta, regularizer) for t in range(trials)]
        samples = np.array(pmap(_regret_trial, jobs, workers))
        per_k[K] = _mean_se(samples)
        last = samples
    mean, se = per_k[horizons[-1]]
    return RegretEstimate(mean, se, per_k, last)


def theorem1_bound(sc: Scenario, K: int | None = None, j: int = 0) -> float:
    """Regret ceiling of the entropy-regularised run started at ``theta0 = 1/e``."""
    K = sc.horizon if K is None else K
    alpha = float(sc.alpha[j])
    if alpha <= 0:
        raise ValueError("bound undefined for alpha = 0")
    n, cap = sc.n, float(sc.caps[j])
    u_bar = worst_case_u_bar(sc)
    return regret_bound(n, cap, alpha, u_bar, K)


def regret_bound(n: int, cap: float, alpha: float, u_bar: float, K: int) -> float:
    sigma1 = 1.0 / theta_max(u_bar, alpha)
    a = (2.0 / sigma1) * (n * cap**2 + alpha**2 / n)
    c = n * math.exp(-1) + u_bar * (math.log(u_bar / alpha + 1.0) + 1.0) / alpha
    return u_bar * cap / alpha + 2.0 * math.sqrt(K) * math.sqrt(a * c)
