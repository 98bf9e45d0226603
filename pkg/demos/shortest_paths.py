"""
Shortest paths and negative cycles
==================================

Both solvers return the same distances and the same predecessor tree on
non-negative graphs.  Bellman-Ford also handles negative weights and
refuses graphs with a reachable negative cycle.
"""

from routesim.graph import Graph, NegativeCycleDetected, bellman_ford, dijkstra, extract_path

# A triangle where the two-hop route beats the direct edge
g = Graph.from_edges([("A", "B", 4), ("A", "C", 1), ("C", "B", 2)])
for solver in (dijkstra, bellman_ford):
    r = solver(g, "A")
    print(f"{solver.__name__:>12}: dist={r.dist}  path A->B = {extract_path(r, 'B')}")

# Negative weights are fine for Bellman-Ford as long as no cycle goes negative
g = Graph.from_edges([("S", "X", 5), ("X", "Y", -3), ("S", "Y", 4)])
print("negative edge:", bellman_ford(g, "S").dist)

# Closing a loop of weight -1
g = Graph.from_edges([("S", "X", 1), ("X", "Y", -2), ("Y", "X", 1)])
try:
    bellman_ford(g, "S")
except NegativeCycleDetected as exc:
    print("rejected:", exc)
