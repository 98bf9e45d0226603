"""Round-based driver for RIP tables (no kernel involved).

In one round every router, in a fixed activation order, builds its
advertisements from its current table and its neighbours process them at
once.  The clock advances by one advertisement interval per round and the
route timers run at the start of each round.
"""

from __future__ import annotations

import itertools

from routesim.rip import (
    RipConfig,
    RipRouteEntry,
    rip_build_advertisements,
    rip_on_interface_down,
    rip_process_advertisement,
    rip_tick,
)


class LockstepNet:
    def __init__(self, routers, links, hosts, cfg: RipConfig, order=None):
        # links: (a, b) router pairs; hosts: {host: router}
        self.cfg = cfg
        self.routers = sorted(routers)
        self.order = list(order) if order else self.routers
        self.ifaces = {r: {} for r in self.routers}  # r -> {iface: peer}
        for a, b in links:
            self.ifaces[a][f"{a}-{b}"] = b
            self.ifaces[b][f"{b}-{a}"] = a
        self.tables = {r: {} for r in self.routers}
        for h, r in hosts.items():
            self.tables[r][h] = RipRouteEntry(h, 1, None, f"{r}-{h}", 0)
        self.down = set()
        self.now = 0
        self.history = []  # per round: {router: {dest: metric}}
        self.max_metric_seen = 0

    def _snapshot(self):
        return {r: {d: (e.metric, e.next_hop) for d, e in t.items()} for r, t in self.tables.items()}

    def round(self):
        self.now += self.cfg.advertise_interval
        before = self._snapshot()
        for r in self.routers:
            rip_tick(self.tables[r], self.cfg, self.now)
        for r in self.order:
            live = [i for i in self.ifaces[r] if i not in self.down]
            advs = rip_build_advertisements(self.tables[r], live, self.cfg, r, (r,))
            for iface, adv in advs.items():
                peer = self.ifaces[r][iface]
                rip_process_advertisement(self.tables[peer], adv, f"{peer}-{r}", self.cfg, self.now, peer)
                for e in self.tables[peer].values():
                    self.max_metric_seen = max(self.max_metric_seen, e.metric)
        after = self._snapshot()
        self.history.append({r: {d: m for d, (m, _) in t.items()} for r, t in after.items()})
        return before != after

    def run_until_quiet(self, max_rounds=200):
        for n in range(1, max_rounds + 1):
            if not self.round():
                return n
        raise RuntimeError("did not quiesce")

    def withdraw(self, router, host):
        iface = self.tables[router][host].learned_interface
        self.down.add(iface)
        rip_on_interface_down(self.tables[router], iface, self.cfg, self.now)


TRIANGLE = (["A", "B", "C"], [("A", "B"), ("B", "C"), ("C", "A")], {"D": "A"})


def withdrawal_rounds(split_horizon: bool, order):
    """Withdraw host D behind A on a three-router loop.

    Returns ``(rounds, net)`` where ``rounds`` counts advertisement rounds
    until every router holds D at metric 16 (or has deleted it) and a further
    round changes nothing.
    """
    routers, links, hosts = TRIANGLE
    cfg = RipConfig(split_horizon=split_horizon, triggered_updates=False)
    net = LockstepNet(routers, links, hosts, cfg, order)
    net.run_until_quiet()
    net.withdraw("A", "D")
    rounds = 0
    while rounds < 500:
        rounds += 1
        changed = net.round()
        entries = [net.tables[r].get("D") for r in net.routers]
        if not changed and all(e is None or e.metric == 16 for e in entries):
            return rounds - 1, net
    raise RuntimeError("no quiescence")


def worst_case_rounds(split_horizon: bool):
    return max(withdrawal_rounds(split_horizon, o)[0] for o in itertools.permutations(TRIANGLE[0]))
