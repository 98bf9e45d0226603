"""
Picking the faster, longer path
===============================

In figure2_fastpath the detour through R1..R5 and R6's Switch1 port run at
100 Mbps while R6's Switch2 port stays at 10 Mbps.  The bandwidth-aware
protocols send traffic round the detour.  RIP counts hops and stays on R6.

R6 receives PC1's first packets and sends them straight back out towards
R1, so it tells PC1 to use R1 directly with a redirect.
"""

from routesim import reference_scenarios
from routesim.kernel import Simulation

for name in ("figure2", "figure2_fastpath"):
    scenario = reference_scenarios()[name]
    print(name)
    for proto in ("rip", "ospf", "isis", "eigrp"):
        sim = Simulation(scenario.with_protocol(proto))
        s = sim.run().summary()
        route = sim.nodes["R6"].engine.fib["PC2"]
        print(f"  {proto:>5}: mean hops {s['mean_hops']}  delay {s['mean_delay_us']} us  "
              f"R6 -> PC2 via {route.next_hop}  PC1 redirects {sim.nodes['PC1'].redirects}")
