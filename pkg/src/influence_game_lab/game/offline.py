"""Offline equilibria of the multi-influencer game.

With the whole path known, the ``K``-campaign game is a static game over
``n*K`` individuals.  Each player's problem, holding the others fixed, is
a shifted water-filling problem, which gives exact best responses.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..oracle import grid_maximize, shifted_reward_tables
from ..scenario import PathArrays, path_arrays
from ..waterfill import InfeasibleBudgetError, waterfill

log = logging.getLogger(__name__)


class NonConvergenceError(RuntimeError):
    pass


@dataclass
class StrategyProfile:
    b: np.ndarray  # (K, n, m)
    budgets: np.ndarray
    caps: np.ndarray
    thetas: np.ndarray | None = None

    @property
    def spent(self) -> np.ndarray:
        return self.b.sum(axis=(0, 1))

    def is_feasible(self, tol: float = 1e-9) -> bool:
        box = np.all(self.b >= -tol) and np.all(self.b <= self.caps + tol)
        return bool(box and np.all(self.spent <= self.budgets * (1 + tol) + tol))


@dataclass
class EquilibriumReport:
    profile: StrategyProfile
    epsilon: float
    gains: np.ndarray
    iterations: int
    converged: bool
    utilities: np.ndarray  # per-player totals over the path
    extra: dict = field(default_factory=dict)

    @property
    def average_utilities(self) -> np.ndarray:
        return self.utilities / self.profile.b.shape[0]


def stage_utilities(path, b) -> np.ndarray:
    """``(K, m)`` array of stage rewards for a whole profile."""
    arr = path_arrays(path)
    phi = (arr.x + b) / (1.0 + b.sum(axis=2, keepdims=True))
    return np.einsum("kn,knm->km", arr.rho, phi)


def total_utilities(path, b) -> np.ndarray:
    return stage_utilities(path, b).sum(axis=0)


def _opponents(b, j):
    return b.sum(axis=2) - b[:, :, j]


def best_response(path, b, j: int, budget: float, cap: float) -> tuple[np.ndarray, float]:
    """Exact best response of player ``j`` to the others' investments in ``b``.

    Player ``j`` faces rewards ``rho (x_j + b_j) / (1 + o + b_j)`` with
    ``o`` the opponents' total on each coordinate, i.e. water-filling with
    scores ``rho (1 - x_j + o)`` and shifts ``o``.
    """
    arr = path_arrays(path)
    if budget > arr.K * arr.n * cap:
        raise InfeasibleBudgetError(f"budget {budget} exceeds n*K*cap")
    o = _opponents(b, j)
    scores = arr.rho * (1.0 - arr.x[:, :, j] + o)
    level = waterfill(np.clip(scores, 0, None), o, cap, budget)
    return level.b, level.theta


def best_response_m2(path, b, j: int, budget: float, cap: float) -> tuple[np.ndarray, float]:
    if path_arrays(path).m != 2:
        raise ValueError("best_response_m2 needs exactly two influencers")
    return best_response(path, b, j, budget, cap)


def measure_epsilon(path, b, caps, budgets) -> np.ndarray:
    """Per-player gain, in average per-campaign reward, from the best unilateral deviation."""
    arr = path_arrays(path)
    base = total_utilities(arr, b)
    gains = np.zeros(arr.m)
    for j in range(arr.m):
        bj, _ = best_response(arr, b, j, float(budgets[j]), float(caps[j]))
        dev = b.copy()
        dev[:, :, j] = bj
        gains[j] = max(0.0, (total_utilities(arr, dev)[j] - base[j]) / arr.K)
    return gains


def grid_deviation(path, b, j: int, budget: float, cap: float, step: float = 0.005, max_coords: int = 6):
    """Grid-search best deviation of player ``j``; returns ``(b_j, average gain)``."""
    arr = path_arrays(path)
    if arr.K * arr.n > max_coords:
        raise ValueError(f"grid deviation limited to {max_coords} coordinates")
    o = _opponents(b, j)
    tables = shifted_reward_tables(arr.rho.ravel(), arr.x[:, :, j].ravel(), o.ravel(), cap, step)
    counts, best = grid_maximize(tables, int(np.floor(budget / step + 1e-9)))
    base = total_utilities(arr, b)[j]
    return (counts * step).reshape(arr.K, arr.n), (best - base) / arr.K


def _report(arr, b, budgets, caps, thetas, iterations, converged, **extra) -> EquilibriumReport:
    profile = StrategyProfile(b, np.asarray(budgets, float), np.asarray(caps, float), thetas)
    gains = measure_epsilon(arr, b, caps, budgets)
    return EquilibriumReport(
        profile=profile,
        epsilon=float(gains.max()),
        gains=gains,
        iterations=iterations,
        converged=converged,
        utilities=total_utilities(arr, b),
        extra=extra,
    )


def br_dynamics_m2(path, budgets, caps, tol: float = 1e-8, max_iters: int = 1000, init=None) -> EquilibriumReport:
    """Alternating best responses until a full sweep moves the profile by less than ``tol`` (L1)."""
    arr = path_arrays(path)
    if arr.m != 2:
        raise ValueError("best-response dynamics are implemented for two influencers")
    b = np.zeros((arr.K, arr.n, 2)) if init is None else np.array(init, dtype=float)
    thetas = np.zeros(2)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        prev = b.copy()
        for j in (0, 1):
            b[:, :, j], thetas[j] = best_response(arr, b, j, float(budgets[j]), float(caps[j]))
        if np.abs(b - prev).sum() < tol:
            converged = True
            break
    if not converged:
        log.warning("best-response dynamics did not converge in %d sweeps", max_iters)
    return _report(arr, b, budgets, caps, thetas, it, converged)


def random_profile(path, budgets, caps, rng: np.random.Generator) -> np.ndarray:
    """A random feasible profile (each player spends a random share of its budget)."""
    arr = path_arrays(path)
    b = rng.uniform(0, 1, size=(arr.K, arr.n, arr.m)) * np.asarray(caps, float)
    scale = np.minimum(1.0, rng.uniform(0, 1, arr.m) * np.asarray(budgets, float) / np.maximum(b.sum(axis=(0, 1)), 1e-300))
    return b * scale


def pseudo_gradient(arr: PathArrays, b: np.ndarray) -> np.ndarray:
    """Each player's reward gradient in its own investments, ``(K, n, m)``."""
    total = 1.0 + b.sum(axis=2, keepdims=True)
    others = total - 1.0 - b
    return arr.rho[:, :, None] * (1.0 - arr.x + others) / total**2


def priced_gradient_inner(arr: PathArrays, b, thetas, caps, eps2: float, step: float, max_iters: int = 200_000):
    """Simultaneous projected gradient ascent on the priced rewards ``u_j - theta_j * sum(b_j)``."""
    caps = np.broadcast_to(np.asarray(caps, float), (arr.m,))
    # same update as ``pseudo_gradient`` with the loop invariants hoisted
    rho = arr.rho[:, :, None]
    base = 1.0 - arr.x
    thetas = np.asarray(thetas, float)
    b = np.array(b, dtype=float)
    new = np.empty_like(b)
    for t in range(1, max_iters + 1):
        total = 1.0 + b.sum(axis=2, keepdims=True)
        np.subtract(total, b, out=new)
        new += base
        new -= 1.0
        new *= rho
        new /= total * total
        new -= thetas
        new *= step
        new += b
        np.maximum(new, 0.0, out=new)
        np.minimum(new, caps, out=new)
        delta = np.abs(new - b).sum(axis=(0, 1)).max()
        b, new = new, b
        if delta <= eps2:
            return b, t, True
    return b, max_iters, False


def algorithm2_epsilon_nash(
    path,
    budgets,
    caps,
    theta0=None,
    eta=None,
    eps_thr: float = 1e-3,
    eps_thr2: float = 1e-6,
    max_outer: int = 10_000,
    init=None,
) -> EquilibriumReport:
    """Priced gradient play with an outer loop pacing each player's spend.

    Inner loop: Jacobi projected gradient ascent with step ``1 / (2 Lip)``,
    ``Lip = 2 max(rho)``.  Outer loop: ``theta_j += eta_j (C_j/(Kn) - a_j)``
    with ``a_j = B_j/(Kn)`` the per-coordinate budget; an ``eta_j`` is halved
    whenever its residual changes sign.
    """
    arr = path_arrays(path)
    m = arr.m
    budgets = np.asarray(budgets, float)
    caps = np.broadcast_to(np.asarray(caps, float), (m,)).copy()
    kn = arr.K * arr.n
    target = budgets / kn
    thetas = np.full(m, 0.5) if theta0 is None else np.array(theta0, dtype=float)
    if np.any(thetas <= 0):
        raise ValueError("initial prices must be positive")
    etas = np.full(m, 0.5) if eta is None else np.broadcast_to(np.asarray(eta, float), (m,)).copy()
    step = 1.0 / (2.0 * 2.0 * float(arr.rho.max()))
    b = np.zeros((arr.K, arr.n, m)) if init is None else np.array(init, dtype=float)
    prev_res = np.zeros(m)
    inner_total = 0
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        b, used, _ = priced_gradient_inner(arr, b, thetas, caps, eps_thr2, step)
        inner_total += used
        res = b.sum(axis=(0, 1)) / kn - target
        if np.all(np.abs(res) <= eps_thr):
            converged = True
            break
        flipped = np.sign(res) * np.sign(prev_res) < 0
        etas[flipped] *= 0.5
        prev_res = res
        thetas = np.maximum(thetas + etas * res, 1e-12)
    if not converged:
        raise NonConvergenceError(f"outer loop did not meet the budget tolerance in {max_outer} rounds")
    # trim the slight overspend the tolerance allows so the profile is feasible
    spent = b.sum(axis=(0, 1))
    over = spent > budgets
    if np.any(over):
        b[:, :, over] *= budgets[over] / spent[over]
    return _report(
        arr, b, budgets, caps, thetas, outer, converged, inner_iterations=inner_total, budget_residual=res
    )
