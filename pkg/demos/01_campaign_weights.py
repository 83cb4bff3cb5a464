"""How long a campaign lasts changes who matters.

Investments land at the start of a campaign and the network then relaxes
toward consensus.  An individual's weight is how much of the final
aggregate opinion traces back to them.  Short campaigns leave the weights
near one each; long campaigns concentrate them on well-listened-to nodes.
"""
import numpy as np

from influence_game_lab import Network, de_groot_weights
from influence_game_lab.experiments import resolve_scenario

sc, _ = resolve_scenario("fig2")
net = sc.network
print("Laplacian:\n", net.laplacian.round(3))

print("\nduration  weights                          sum")
for t in (0.1, 1, 2, 5, 10, 50):
    rho = de_groot_weights(net, t).rho
    print(f"{t:>8}  {np.array2string(rho, precision=3):<32} {rho.sum():.6f}")

# a star graph: everyone listens to the hub, so the hub's weight grows toward n
star = np.array([[0, 0, 0, 0], [-1, 1, 0, 0], [-1, 0, 1, 0], [-1, 0, 0, 1]], dtype=float)
print("\nstar graph, hub weight after T=5:", de_groot_weights(Network(star), 5).rho.round(3))
