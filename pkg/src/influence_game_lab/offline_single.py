"""Hindsight-optimal investments for a single influencer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import grid_maximize, shifted_reward_tables
from .scenario import path_arrays
from .waterfill import InfeasibleBudgetError, waterfill


class DegenerateInstanceError(ValueError):
    pass


@dataclass(frozen=True)
class OfflineSolution:
    b: np.ndarray  # (K, n)
    theta: float
    objective: float  # total stage reward
    adjusted_objective: float  # reward gained over not investing
    spent: float
    # budget left over because no coordinate has a positive marginal value
    unspendable: bool = False


def single_inputs(path):
    """``(rho, x)`` as ``(K, n)`` arrays for influencer 0 of a realized path."""
    arr = path_arrays(path)
    return arr.rho, arr.x[:, :, 0]


def offline_objectives(rho, x, b) -> tuple[float, float]:
    raw = float(np.sum(rho * (x + b) / (1.0 + b)))
    adjusted = float(np.sum(rho * b * (1.0 - x) / (1.0 + b)))
    return raw, adjusted


def solve_offline_single(path, budget: float, cap: float, *, strict: bool = False) -> OfflineSolution:
    """Exact optimum of the budgeted single-influencer program.

    Coordinates ``(k, i)`` are pooled with scores ``rho_ik (1 - x_ik)``;
    the common multiplier ``theta`` is the water level.  With every score
    zero nothing is worth buying: ``b = 0`` is returned and flagged
    (``strict=True`` raises instead when the budget is positive).
    """
    rho, x = single_inputs(path)
    if np.any(x < 0) or np.any(x > 1) or not np.all(np.isfinite(rho)):
        raise ValueError("opinions must lie in [0, 1] and weights must be finite")
    K, n = rho.shape
    if budget > n * K * cap:
        raise InfeasibleBudgetError(f"budget {budget} exceeds n*K*cap = {n * K * cap}")
    scores = rho * (1.0 - x)
    if not np.any(scores > 0):
        if strict and budget > 0:
            raise DegenerateInstanceError("every score is zero; the budget cannot be spent usefully")
        b = np.zeros_like(scores)
        raw, adj = offline_objectives(rho, x, b)
        return OfflineSolution(b, 0.0, raw, adj, 0.0, unspendable=budget > 0)
    level = waterfill(scores, 0.0, cap, budget)
    raw, adj = offline_objectives(rho, x, level.b)
    return OfflineSolution(level.b, level.theta, raw, adj, float(level.b.sum()), unspendable=level.saturated)


def kkt_residuals(path, sol: OfflineSolution, cap: float) -> dict:
    """Per-coordinate violations of the optimality conditions (all ~0 at an optimum)."""
    rho, x = single_inputs(path)
    s = rho * (1.0 - x)
    b, theta = sol.b, sol.theta
    interior = (b > 0) & (b < cap)
    out = {"interior": 0.0, "at_zero": 0.0, "at_cap": 0.0}
    if theta <= 0:
        return out
    root = np.sqrt(s / theta)
    if interior.any():
        out["interior"] = float(np.abs(b[interior] - (root[interior] - 1.0)).max())
    zero = b <= 0
    if zero.any():
        out["at_zero"] = float(np.clip(root[zero] - 1.0, 0, None).max())
    top = b >= cap
    if top.any():
        out["at_cap"] = float(np.clip(1.0 + cap - root[top], 0, None).max())
    return out


def brute_force_oracle(path, budget: float, cap: float, step: float = 0.005, max_coords: int = 6):
    """Best point of the feasible grid ``{0, h, 2h, ...}^{nK}``; returns ``(b, objective)``."""
    rho, x = single_inputs(path)
    if rho.size > max_coords:
        raise ValueError(f"oracle limited to {max_coords} coordinates, got {rho.size}")
    tables = shifted_reward_tables(rho.ravel(), x.ravel(), np.zeros(rho.size), cap, step)
    counts, best = grid_maximize(tables, int(np.floor(budget / step + 1e-9)))
    return (counts * step).reshape(rho.shape), best
