"""Three or more influencers, and what the coordinator needs to broadcast.

With full information each player solves the joint stationarity system
every campaign.  With partial information a coordinator only broadcasts
the sum of prices and each player uses a closed form.  Both are compared
with the offline equilibrium, then the first influencer's share is traced
as its rivals' budget grows.
"""

from influence_game_lab.experiments import ExperimentSpec, resolve_scenario, run_sweep
from influence_game_lab.game import FULL, PARTIAL, online_game_multi

sc, _ = resolve_scenario("fig4")
for mode in (FULL, PARTIAL):
    _, rep = online_game_multi(sc, seed=3, mode=mode)
    ref = rep.extra["reference_utilities"] / sc.horizon
    print(f"{mode:>7}: online {rep.average_utilities.round(4)}  offline {ref.round(4)}  epsilon {rep.epsilon:.3f}")

spec = ExperimentSpec("fig5", trials=3, sweep=[50, 200, 600], params={"m_values": [3]})
curves = run_sweep(spec)
print("\nrivals' budget   offline   full   partial   (u1, m=3)")
for i, total in enumerate(spec.sweep):
    row = [curves[f"m3_{mode}_u1"][i][1] for mode in ("offline", "full", "partial")]
    print(f"{total:>14}   " + "   ".join(f"{v:.3f}" for v in row))
