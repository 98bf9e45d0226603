"""
Counting to infinity on a three-router loop
===========================================

Three routers form a triangle and host D hangs off A.  When A loses D,
the other two keep advertising stale routes to each other.  Without split
horizon the metric climbs one step per exchange until it hits 16, RIP's
infinity.  With split horizon the poison spreads in a single round.

Triggered updates are off so each round is one periodic advertisement.
"""

from routesim.rip import (
    RipConfig,
    RipRouteEntry,
    rip_build_advertisements,
    rip_on_interface_down,
    rip_process_advertisement,
    rip_tick,
)

PEERS = {"A": {"A-B": "B", "A-C": "C"}, "B": {"B-A": "A", "B-C": "C"}, "C": {"C-A": "A", "C-B": "B"}}
# B advertises first, which is the unlucky order for the stale route
ORDER = ("B", "C", "A")


def simulate(split_horizon: bool):
    cfg = RipConfig(split_horizon=split_horizon, triggered_updates=False)
    tables = {r: {} for r in PEERS}
    tables["A"]["D"] = RipRouteEntry("D", 1, None, "A-D", 0)
    now = 0

    def one_round():
        nonlocal now
        now += cfg.advertise_interval
        for r in PEERS:
            rip_tick(tables[r], cfg, now)
        for r in ORDER:
            for iface, adv in rip_build_advertisements(tables[r], PEERS[r], cfg, r, (r,)).items():
                peer = PEERS[r][iface]
                rip_process_advertisement(tables[peer], adv, f"{peer}-{r}", cfg, now, peer)
        return {r: tables[r]["D"].metric for r in PEERS if "D" in tables[r]}

    for _ in range(3):
        one_round()
    rip_on_interface_down(tables["A"], "A-D", cfg, now)
    rows = []
    while True:
        row = one_round()
        rows.append(row)
        if all(m == 16 for m in row.values()):
            return rows


for sh in (False, True):
    rows = simulate(sh)
    print(f"split horizon {'on ' if sh else 'off'}: {len(rows)} rounds")
    for i, row in enumerate(rows, 1):
        print(f"  round {i:2d}: " + "  ".join(f"{r}={m:2d}" for r, m in sorted(row.items())))
