"""Two influencers competing for the same population.

Offline, alternating exact best responses settle on a Nash profile in a
handful of sweeps, wherever they start.  Online, each influencer paces
itself against the other; its average utility approaches the Nash value
as the horizon grows.
"""
import numpy as np

from influence_game_lab.experiments import resolve_scenario
from influence_game_lab.game import algorithm2_epsilon_nash, br_dynamics_m2, online_game_m2
from influence_game_lab.game.offline import random_profile
from influence_game_lab.scenario import path_arrays, sample_path

sc, _ = resolve_scenario("fig3")
path = path_arrays(sample_path(sc, 7))
rng = np.random.default_rng(0)

reports = [br_dynamics_m2(path, sc.budgets, sc.caps, init=random_profile(path, sc.budgets, sc.caps, rng)) for _ in range(3)]
for r in reports:
    print(f"sweeps {r.iterations}, epsilon {r.epsilon:.1e}, average utilities {r.average_utilities.round(4)}")
print("max disagreement between starts:", max(np.abs(r.profile.b - reports[0].profile.b).max() for r in reports))

a2 = algorithm2_epsilon_nash(path, sc.budgets, sc.caps, eps_thr=1e-4)
print(f"\npriced gradient play: {a2.iterations} price rounds, utilities {a2.average_utilities.round(4)}")

print("\n   K   |u1 online - u1 Nash| / K   (mean of 20 seeds)")
for K in (10, 20, 40, 80):
    gaps = [online_game_m2(sc.with_horizon(K), seed)[1].extra["utility_gap"][0] for seed in range(20)]
    print(f"{K:>4}   {np.mean(gaps):.4f}")
