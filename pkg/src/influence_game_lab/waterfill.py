"""Shifted square-root water-filling.

Every budgeted response in this package has the same shape: maximise a sum
of concave rewards ``s_c (b_c + a_c) / (1 + o_c + b_c)`` over a box
``[0, cap]`` with a shared budget.  Stationarity gives

    b_c(theta) = clip(sqrt(s_c / theta) - 1 - o_c, 0, cap)

for a single multiplier ``theta``.  ``s_c`` is the score and ``o_c`` the
shift (the opponents' investment on that coordinate, zero for a lone
influencer).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InfeasibleBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class WaterLevel:
    b: np.ndarray
    theta: float
    # True when the budget cannot all be spent on coordinates with a positive score
    saturated: bool


def allocation_at(theta, scores, shifts, cap) -> np.ndarray:
    """Closed-form response for a given multiplier; ``theta = 0`` maps positive scores to the cap."""
    scores = np.asarray(scores, dtype=float)
    shifts = np.broadcast_to(np.asarray(shifts, dtype=float), scores.shape)
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.sqrt(scores / theta) - 1.0 - shifts
    raw = np.where(theta > 0, raw, np.where(scores > 0, np.inf, 0.0))
    raw = np.where(scores > 0, raw, 0.0)
    return np.clip(raw, 0.0, cap)


def waterfill(scores, shifts, cap, budget: float) -> WaterLevel:
    """Spend ``budget`` optimally; returns the allocation and its multiplier.

    The spend ``F(theta)`` is continuous and nonincreasing with kinks at
    ``s / (1 + o)^2`` (coordinate leaves zero) and ``s / (1 + o + cap)^2``
    (coordinate hits the cap).  We locate the kink interval holding the
    budget by bisection over the sorted kinks, then solve the active set in
    closed form.
    """
    scores = np.asarray(scores, dtype=float)
    shape = scores.shape
    s = scores.ravel()
    o = np.broadcast_to(np.asarray(shifts, dtype=float), shape).ravel()
    cap_arr = np.broadcast_to(np.asarray(cap, dtype=float), shape).ravel()
    if np.any(s < 0) or np.any(o < 0):
        raise ValueError("scores and shifts must be nonnegative")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if budget > cap_arr.sum() * (1 + 1e-12) + 1e-12:
        raise InfeasibleBudgetError(f"budget {budget} exceeds total capacity {cap_arr.sum()}")

    pos = s > 0
    full = cap_arr[pos].sum()
    if budget >= full:
        b = np.where(pos, cap_arr, 0.0)
        return WaterLevel(b.reshape(shape), 0.0, saturated=budget > full)

    zero_kink = np.where(pos, s / (1.0 + o) ** 2, 0.0)
    if budget == 0:
        return WaterLevel(np.zeros(shape), float(zero_kink.max()), saturated=False)
    cap_kink = np.where(pos, s / (1.0 + o + cap_arr) ** 2, 0.0)

    def spend(theta):
        return allocation_at(theta, s, o, cap_arr).sum()

    kinks = np.unique(np.concatenate([zero_kink[pos], cap_kink[pos]]))
    # spend is nonincreasing in theta: find the last kink whose spend still covers the budget
    lo, hi = 0, len(kinks) - 1
    if spend(kinks[0]) < budget:
        theta_lo, theta_hi = 0.0, kinks[0]
    else:
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if spend(kinks[mid]) >= budget:
                lo = mid
            else:
                hi = mid - 1
        theta_lo = kinks[lo]
        theta_hi = kinks[lo + 1] if lo + 1 < len(kinks) else zero_kink.max()

    probe = 0.5 * (theta_lo + theta_hi) if theta_lo > 0 else 0.5 * theta_hi
    capped = pos & (probe <= cap_kink)
    active = pos & (probe > cap_kink) & (probe < zero_kink)
    remaining = budget - cap_arr[capped].sum()
    root = np.sqrt(s[active]).sum()
    denom = remaining + (1.0 + o[active]).sum()
    if root > 0 and denom > 0:
        theta = float(np.clip((root / denom) ** 2, theta_lo, theta_hi))
    else:
        theta = float(theta_lo)
    b = allocation_at(theta, s, o, cap_arr)
    return WaterLevel(b.reshape(shape), theta, saturated=False)
