import numpy as np
import pytest
from scipy.optimize import minimize

from influence_game_lab.offline_single import (
    DegenerateInstanceError,
    brute_force_oracle,
    kkt_residuals,
    solve_offline_single,
)
from influence_game_lab.oracle import grid_maximize, shifted_reward_tables
from influence_game_lab.scenario import PathArrays
from influence_game_lab.waterfill import InfeasibleBudgetError, allocation_at, waterfill

from conftest import random_path


def test_waterfill_hand_values():
    # scores 4 and 1, no shift, loose cap: theta = (3 / (B + 2))^2
    lvl = waterfill([4.0, 1.0], 0.0, 10.0, 4.0)
    assert lvl.theta == pytest.approx(0.25)
    np.testing.assert_allclose(lvl.b, [3.0, 1.0])
    lvl = waterfill([4.0, 1.0], 0.0, 10.0, 1.0)
    assert lvl.theta == pytest.approx(1.0)
    np.testing.assert_allclose(lvl.b, [1.0, 0.0], atol=1e-12)


def test_waterfill_with_cap_and_shift():
    # first coordinate capped at 0.5; second: sqrt(1/theta) - 1 - 1 = 0.3 -> theta = 1/2.3^2
    lvl = waterfill([9.0, 1.0], [0.0, 1.0], 0.5, 0.8)
    np.testing.assert_allclose(lvl.b, [0.5, 0.3])
    assert lvl.theta == pytest.approx(1 / 2.3**2)


def test_waterfill_spends_exactly(rng):
    for _ in range(200):
        d = rng.integers(1, 30)
        s = rng.uniform(0, 3, d) * (rng.uniform(size=d) < 0.8)
        o = rng.uniform(0, 1, d)
        cap = rng.uniform(0.1, 2)
        pos_cap = cap * np.count_nonzero(s)
        budget = rng.uniform(0, pos_cap) if pos_cap > 0 else 0.0
        lvl = waterfill(s, o, cap, budget)
        assert lvl.b.sum() == pytest.approx(budget, abs=1e-9)
        assert lvl.b.min() >= 0 and lvl.b.max() <= cap + 1e-15
        np.testing.assert_allclose(allocation_at(lvl.theta, s, o, cap), lvl.b, atol=1e-9)


def test_waterfill_saturation_and_infeasible():
    lvl = waterfill([1.0, 0.0], 0.0, 1.0, 1.5)
    assert lvl.saturated and lvl.theta == 0.0
    np.testing.assert_allclose(lvl.b, [1.0, 0.0])
    with pytest.raises(InfeasibleBudgetError):
        waterfill([1.0, 1.0], 0.0, 1.0, 2.5)


def test_grid_maximize_matches_enumeration(rng):
    import itertools

    tables = [rng.uniform(0, 1, 4) for _ in range(3)]
    tables = [np.cumsum(t) for t in tables]
    for units in range(0, 9):
        best = max(
            sum(t[g] for t, g in zip(tables, combo))
            for combo in itertools.product(range(4), repeat=3)
            if sum(combo) <= units
        )
        counts, val = grid_maximize(tables, units)
        assert val == pytest.approx(best)
        assert counts.sum() <= units
        assert sum(t[g] for t, g in zip(tables, counts)) == pytest.approx(best)


def test_shifted_tables_baseline():
    (t,) = shifted_reward_tables([2.0], [0.5], [1.0], 1.0, 0.5)
    np.testing.assert_allclose(t, [2 * 0.5 / 2, 2 * 1.0 / 2.5, 2 * 1.5 / 3])


def test_matches_general_nlp_solver(rng):
    path = random_path(rng, 3, 4, 1)
    budget, cap = 2.5, 0.8
    sol = solve_offline_single(path, budget, cap)
    rho, x = path.rho.ravel(), path.x[:, :, 0].ravel()

    def neg(b):
        return -np.sum(rho * (x + b) / (1 + b))

    res = minimize(
        neg,
        np.full(rho.size, budget / rho.size),
        bounds=[(0, cap)] * rho.size,
        constraints=[{"type": "ineq", "fun": lambda b: budget - b.sum()}],
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    assert sol.objective >= -res.fun - 1e-9
    assert sol.objective == pytest.approx(-res.fun, abs=1e-6)


def test_oracle_agreement_and_kkt(rng):
    for _ in range(10):
        path = random_path(rng, 2, 3, 1)
        cap = 0.6
        budget = rng.uniform(0.1, 6 * cap)
        sol = solve_offline_single(path, budget, cap)
        _, grid_best = brute_force_oracle(path, budget, cap)
        assert sol.objective >= grid_best - 1e-12
        assert sol.objective <= grid_best + path.rho.max() * 0.005 * 6
        assert max(kkt_residuals(path, sol, cap).values()) <= 1e-8


def test_degenerate_all_zero_scores():
    path = PathArrays(np.ones((2, 2)), np.ones((2, 2, 1)))
    sol = solve_offline_single(path, 1.0, 1.0)
    assert sol.unspendable and sol.spent == 0.0
    with pytest.raises(DegenerateInstanceError):
        solve_offline_single(path, 1.0, 1.0, strict=True)


def test_budget_above_capacity_rejected(rng):
    path = random_path(rng, 2, 2, 1)
    with pytest.raises(InfeasibleBudgetError):
        solve_offline_single(path, 5.0, 1.0)


def test_oracle_size_limit(rng):
    with pytest.raises(ValueError):
        brute_force_oracle(random_path(rng, 3, 3, 1), 1.0, 1.0)


def test_binding_cap_instance_matches_grid():
    rho = np.array([[2.0, 1.0, 0.5], [1.5, 0.8, 0.3]])
    x = np.array([[0.1, 0.4, 0.7], [0.2, 0.5, 0.9]])[:, :, None]
    path = PathArrays(rho, x)
    sol = solve_offline_single(path, 1.5, 0.6)
    assert np.isclose(sol.b.max(), 0.6)  # the cap binds
    _, grid = brute_force_oracle(path, 1.5, 0.6)
    assert abs(sol.objective - grid) <= 1e-4
