"""Grid search oracles used to cross-check the closed-form solvers.

Separable objectives over a grid of step ``h`` with a shared budget are
searched exactly by a max-plus recursion over coordinates: the result is
the best point of the full grid enumeration, without enumerating it.
"""
from __future__ import annotations

import numpy as np


def grid_maximize(values: list[np.ndarray], budget_units: int) -> tuple[np.ndarray, float]:
    """Best grid point of ``sum_c values[c][g_c]`` subject to ``sum_c g_c <= budget_units``.

    ``values[c][g]`` is coordinate ``c``'s reward at ``g`` grid steps.
    Returns the integer grid counts and the optimal total.
    """
    budget_units = int(budget_units)
    best = np.zeros(budget_units + 1)
    choices = []
    t = np.arange(budget_units + 1)
    for v in values:
        v = np.asarray(v, dtype=float)
        g = np.arange(len(v))
        prev = np.where(t[:, None] >= g[None, :], best[np.clip(t[:, None] - g[None, :], 0, None)], -np.inf)
        cand = prev + v[None, :]
        pick = np.argmax(cand, axis=1)
        choices.append(pick)
        best = cand[t, pick]
    counts = np.zeros(len(values), dtype=int)
    rem = budget_units
    for c in range(len(values) - 1, -1, -1):
        counts[c] = choices[c][rem]
        rem -= counts[c]
    return counts, float(best[budget_units])


def shifted_reward_tables(scores, offsets, shifts, cap, step):
    """Reward tables of ``s (a + b) / (1 + o + b)`` on the grid ``0, h, ..., <= cap``.

    The reward includes its zero-investment baseline ``s a / (1 + o)``.
    """
    tables = []
    for s, a, o, c in zip(scores, offsets, shifts, np.broadcast_to(cap, np.shape(scores))):
        grid = np.arange(int(np.floor(c / step + 1e-9)) + 1) * step
        tables.append(s * (a + grid) / (1.0 + o + grid))
    return tables
