"""Pacing one influencer's budget without knowing the future.

The online player prices money at theta, buys wherever the marginal
return beats the price, and nudges theta up when it overspends its
per-campaign allowance.  We compare it with the hindsight optimum on the
same realized path and watch the per-campaign regret shrink as the
horizon grows.
"""
from influence_game_lab import estimate_regret, run_online_single, solve_offline_single, theorem1_bound
from influence_game_lab.experiments import resolve_scenario
from influence_game_lab.scenario import sample_path

sc, _ = resolve_scenario("fig2")
print(f"n={sc.n}, K={sc.horizon}, budget={sc.budgets[0]:.1f}, cap={sc.caps[0]}")

trace = run_online_single(sc, seed=1)
plan = solve_offline_single(sample_path(sc, 1), float(sc.budgets[0]), float(sc.caps[0]))
print(f"online spent {trace.spent:.2f}, adjusted utility {trace.total_adjusted:.3f}")
print(f"hindsight spent {plan.spent:.2f}, adjusted utility {plan.adjusted_objective:.3f}, water level {plan.theta:.3f}")
print("price path (every 10th campaign):", trace.thetas[::10].round(3))

est = estimate_regret(sc, trials=20, seed=7, horizons=[10, 25, 50, 100])
print("\n   K   regret/K   bound/K")
for K, (mean, se) in est.per_k.items():
    bound = theorem1_bound(sc.with_horizon(K))
    print(f"{K:>4}   {mean / K:.4f}    {bound / K:.1f}")
