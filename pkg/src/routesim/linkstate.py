"""Link-state routing shared by the OSPF and IS-IS flavours.

Both flavours run the same machinery.  Hellos build two-way adjacencies;
sequence-numbered LSPs are flooded on every interface but the arrival one;
each router runs Dijkstra over the links both ends confirm.  The flavours
differ only in the timer defaults held by :class:`LsFlavorConfig`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .graph import Graph, dijkstra, extract_path
from .router import (
    BROADCAST,
    HELLO_BITS,
    LSP_ENTRY_BITS,
    LSP_HEADER_BITS,
    NodeId,
    Port,
    Route,
    RoutingEngine,
)


class Flavor(enum.Enum):
    OSPF = "ospf"
    ISIS = "isis"


@dataclass(frozen=True)
class LsFlavorConfig:
    flavor: Flavor
    hello_interval: int
    dead_interval: int
    spf_delay: int
    lsp_refresh: int
    cost_reference_bandwidth: int = 10**8

    def __post_init__(self):
        if self.dead_interval < 2 * self.hello_interval:
            raise ValueError("dead interval must be at least twice the hello interval")
        if self.spf_delay < 0:
            raise ValueError("spf_delay must be non-negative")

    @classmethod
    def ospf(cls, **overrides) -> LsFlavorConfig:
        base = dict(hello_interval=10, dead_interval=40, spf_delay=5, lsp_refresh=1800)
        return cls(Flavor.OSPF, **{**base, **overrides})

    @classmethod
    def isis(cls, **overrides) -> LsFlavorConfig:
        base = dict(hello_interval=10, dead_interval=30, spf_delay=1, lsp_refresh=900)
        return cls(Flavor.ISIS, **{**base, **overrides})

    def link_cost(self, bandwidth: int) -> int:
        return max(1, self.cost_reference_bandwidth // bandwidth)


@dataclass(frozen=True)
class Lsp:
    origin: NodeId
    seq: int
    links: tuple  # ((neighbor router, cost), ...)
    age_created: float
    stubs: tuple = ()  # ((attached host, cost), ...)

    @property
    def size_bits(self) -> int:
        return LSP_HEADER_BITS + LSP_ENTRY_BITS * (len(self.links) + len(self.stubs))


@dataclass(frozen=True)
class Hello:
    sender: NodeId
    heard: tuple  # neighbours heard on this interface
    size_bits: int = HELLO_BITS


class AdjState(enum.Enum):
    INIT = "init"
    UP = "up"
    DOWN = "down"


@dataclass
class Adjacency:
    neighbor: NodeId
    state: AdjState
    last_hello: float


class Lsdb(dict):
    """origin -> newest accepted :class:`Lsp`."""


def ls_process_hello_and_tick(adjacencies: dict, event, cfg: LsFlavorConfig, now, self_id=None, allowed=None):
    """Advance the adjacency state machine for one interface.

    ``event`` is either a :class:`Hello` or ``None`` for a clock tick.
    ``allowed`` is the set of nodes that can legitimately appear on the
    interface.  Returns ``(adjacencies, adjacency_change)`` where a change
    means some neighbour entered or left ``UP``.  Raises ``ValueError`` for a
    hello from a node that is not attached to the interface.
    """
    changed = False
    if event is None:
        for nbr in sorted(adjacencies):
            adj = adjacencies[nbr]
            if now - adj.last_hello >= cfg.dead_interval:
                changed |= adj.state is AdjState.UP
                adj.state = AdjState.DOWN
                del adjacencies[nbr]
        return adjacencies, changed
    if allowed is not None and event.sender not in allowed:
        raise ValueError(f"hello from {event.sender!r}, which is not attached to this interface")
    adj = adjacencies.get(event.sender)
    if adj is None:
        adj = adjacencies[event.sender] = Adjacency(event.sender, AdjState.INIT, now)
    adj.last_hello = now
    two_way = self_id in event.heard
    if two_way and adj.state is not AdjState.UP:
        adj.state = AdjState.UP
        changed = True
    elif not two_way and adj.state is AdjState.UP:
        adj.state = AdjState.INIT
        changed = True
    return adjacencies, changed


def ls_originate_lsp(origin: NodeId, previous: Lsp | None, links, now, stubs=()) -> Lsp:
    seq = 1 if previous is None else previous.seq + 1
    return Lsp(origin, seq, tuple(sorted(links)), now, tuple(sorted(stubs)))


def ls_flood_lsp(lsdb: Lsdb, lsp: Lsp, in_interface, interfaces):
    """Install ``lsp`` if it is newer than what is stored.

    Returns ``(accepted, forward_on)``; a newer LSP is forwarded on every
    interface in ``interfaces`` except the one it came in on.
    """
    stored = lsdb.get(lsp.origin)
    if stored is not None and lsp.seq <= stored.seq:
        return False, set()
    lsdb[lsp.origin] = lsp
    return True, {i for i in interfaces if i != in_interface}


def lsdb_graph(lsdb: Lsdb) -> Graph:
    """Graph of the links both ends advertise, plus one-way edges to stub hosts."""
    claimed = {}
    for origin, lsp in lsdb.items():
        for nbr, cost in lsp.links:
            key = (origin, nbr)
            claimed[key] = min(cost, claimed.get(key, cost))
    edges = {}
    for (u, v), cost in claimed.items():
        if (v, u) in claimed:
            edges[(u, v)] = cost
    routers = set(lsdb)
    for origin, lsp in lsdb.items():
        for host, cost in lsp.stubs:
            if host in routers:
                continue
            key = (origin, host)
            edges[key] = min(cost, edges.get(key, cost))
    nodes = set(routers)
    for u, v in edges:
        nodes.add(u)
        nodes.add(v)
    return Graph(frozenset(nodes), tuple((u, v, w) for (u, v), w in edges.items()))


def ls_compute_forwarding(lsdb: Lsdb, self_id: NodeId) -> dict:
    """SPF from ``self_id``; maps every reachable destination to a :class:`Route`.

    The returned routes carry ``interface=None``; the engine resolves the
    interface from its adjacency table.
    """
    if self_id not in lsdb:
        raise ValueError(f"LSDB has no LSP from {self_id!r}")
    g = lsdb_graph(lsdb)
    result = dijkstra(g, self_id)
    table = {}
    for dest in sorted(g.nodes):
        if dest == self_id or not result.reachable(dest):
            continue
        path = extract_path(result, dest)
        table[dest] = Route(dest, None, path[1], result.dist[dest])
    return table


class LinkStateRouter(RoutingEngine):
    def __init__(self, node_id, ports: list[Port], send, cfg: LsFlavorConfig, phase: int = 0):
        super().__init__(node_id, ports, send)
        self.cfg = cfg
        self.protocol = cfg.flavor.value
        self.phase = phase
        self.adj = {i: {} for i in self.ports}
        self.lsdb = Lsdb()
        self.spf_due: float | None = None
        self.last_origination = 0.0
        self.spf_runs = 0
        self.stale_lsps = 0
        self.accepted_seqs: dict = {}  # origin -> list of accepted seq numbers

    # -- origination -----------------------------------------------------
    def _current_links(self):
        links = {}
        for i, adjs in self.adj.items():
            port = self.ports[i]
            if not port.up:
                continue
            cost = self.cfg.link_cost(port.bandwidth)
            for nbr, a in adjs.items():
                if a.state is AdjState.UP:
                    links[nbr] = min(cost, links.get(nbr, cost))
        return links.items()

    def _current_stubs(self):
        stubs = {}
        for p in self.up_ports():
            cost = self.cfg.link_cost(p.bandwidth)
            for h in p.hosts:
                stubs[h] = min(cost, stubs.get(h, cost))
        return stubs.items()

    def originate(self, now):
        lsp = ls_originate_lsp(self.node_id, self.lsdb.get(self.node_id), self._current_links(), now,
                               self._current_stubs())
        self.lsdb[self.node_id] = lsp
        self.accepted_seqs.setdefault(self.node_id, []).append(lsp.seq)
        self.last_origination = now
        for p in self.up_ports():
            self._send(p.index, lsp, BROADCAST)
        self._schedule_spf(now)

    def _schedule_spf(self, now):
        if self.cfg.spf_delay == 0:
            self.run_spf()
        elif self.spf_due is None:
            self.spf_due = now + self.cfg.spf_delay

    def run_spf(self):
        self.spf_due = None
        self.spf_runs += 1
        if self.node_id not in self.lsdb:
            self.fib = {}
            return
        fib = {}
        for dest, route in ls_compute_forwarding(self.lsdb, self.node_id).items():
            iface = self._interface_for(route.next_hop)
            if iface is not None:
                fib[dest] = route._replace(interface=iface)
        self.fib = fib

    def _interface_for(self, nbr):
        best = None
        for i in sorted(self.adj):
            p = self.ports[i]
            if not p.up:
                continue
            a = self.adj[i].get(nbr)
            if (a is not None and a.state is AdjState.UP) or nbr in p.hosts:
                cost = self.cfg.link_cost(p.bandwidth)
                if best is None or cost < best[0]:
                    best = (cost, i)
        return None if best is None else best[1]

    # -- kernel callbacks ------------------------------------------------
    def start(self, now):
        self.originate(now)

    def tick(self, now):
        changed = False
        for i in sorted(self.adj):
            _, c = ls_process_hello_and_tick(self.adj[i], None, self.cfg, now)
            changed |= c
        if changed:
            self.originate(now)
        elif now - self.last_origination >= self.cfg.lsp_refresh:
            self.originate(now)
        if (now - self.phase) % self.cfg.hello_interval == 0:
            for p in self.up_ports():
                self._send_hello(p.index)
        if self.spf_due is not None and now >= self.spf_due:
            self.run_spf()

    def _send_hello(self, iface):
        heard = tuple(sorted(self.adj[iface]))
        self._send(iface, Hello(self.node_id, heard), BROADCAST)

    def receive(self, iface, msg, now):
        port = self.ports[iface]
        if isinstance(msg, Hello):
            if msg.sender == self.node_id:
                return
            try:
                _, changed = ls_process_hello_and_tick(
                    self.adj[iface], msg, self.cfg, now, self.node_id, set(port.routers)
                )
            except ValueError:
                self.malformed += 1
                return
            if changed:
                if self.adj[iface][msg.sender].state is AdjState.UP:
                    self._sync_database(iface)
                self.originate(now)
        elif isinstance(msg, Lsp):
            if msg.origin == self.node_id:
                return
            accepted, forward_on = ls_flood_lsp(self.lsdb, msg, iface, [p.index for p in self.up_ports()])
            if not accepted:
                self.stale_lsps += 1
                return
            self.accepted_seqs.setdefault(msg.origin, []).append(msg.seq)
            for i in sorted(forward_on):
                self._send(i, msg, BROADCAST)
            self._schedule_spf(now)

    def _sync_database(self, iface):
        for origin in sorted(self.lsdb):
            if origin != self.node_id:
                self._send(iface, self.lsdb[origin], BROADCAST)

    def interface_down(self, iface, now):
        super().interface_down(iface, now)
        had_up = any(a.state is AdjState.UP for a in self.adj[iface].values())
        self.adj[iface].clear()
        if had_up or self.ports[iface].hosts:
            self.originate(now)

    def interface_up(self, iface, now):
        super().interface_up(iface, now)
        self._send_hello(iface)
        if self.ports[iface].hosts:
            self.originate(now)
