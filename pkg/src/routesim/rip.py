"""RIP distance-vector engine.

The table operations are plain functions over ``dict[dest, RipRouteEntry]``
that mutate the table in place and also return it, so they can be exercised
without a kernel.  :class:`RipRouter` wires them to kernel callbacks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .router import (
    BROADCAST,
    RIP_ENTRY_BITS,
    RIP_HEADER_BITS,
    InterfaceId,
    NodeId,
    Port,
    Route,
    RoutingEngine,
)

INFINITY = 16
UDP_PORT = 520  # descriptive only


class MalformedAdvertisement(ValueError):
    pass


@dataclass(frozen=True)
class RipConfig:
    advertise_interval: int = 30
    timeout: int = 180
    gc_interval: int = 120
    infinity_metric: int = INFINITY
    split_horizon: bool = True
    triggered_updates: bool = True

    def __post_init__(self):
        if self.infinity_metric != INFINITY:
            raise ValueError("RIP infinity is fixed at 16")
        if self.timeout <= self.advertise_interval:
            raise ValueError("timeout must exceed the advertisement interval")


@dataclass
class RipRouteEntry:
    dest: NodeId
    metric: int
    next_hop: NodeId | None  # None: directly connected
    learned_interface: InterfaceId | None
    last_refresh: float
    gc_deadline: float | None = None

    @property
    def direct(self) -> bool:
        return self.next_hop is None


@dataclass(frozen=True)
class RipAdvertisement:
    sender: NodeId
    routes: tuple  # ((dest, metric), ...)

    @property
    def size_bits(self) -> int:
        return RIP_HEADER_BITS + RIP_ENTRY_BITS * len(self.routes)

    def check(self) -> None:
        dests = [d for d, _ in self.routes]
        if len(set(dests)) != len(dests):
            raise MalformedAdvertisement(f"duplicate destination in advertisement from {self.sender!r}")
        for d, m in self.routes:
            if not (isinstance(m, int) and 1 <= m <= INFINITY):
                raise MalformedAdvertisement(f"metric {m!r} for {d!r} outside 1..16")


def _poison(entry: RipRouteEntry, cfg: RipConfig, now: float) -> None:
    entry.metric = INFINITY
    entry.gc_deadline = now + cfg.gc_interval


def rip_process_advertisement(table, adv: RipAdvertisement, in_interface, cfg: RipConfig, now, self_id=None):
    """Merge a neighbour's advertisement; returns ``(table, changed)``.

    Raises :class:`MalformedAdvertisement` before touching the table if any
    metric is outside 1..16 or a destination repeats.
    """
    adv.check()
    changed = False
    sender = adv.sender
    for dest, adv_metric in adv.routes:
        if dest == self_id:
            continue
        cand = min(adv_metric + 1, INFINITY)
        entry = table.get(dest)
        if entry is None:
            if cand < INFINITY:
                table[dest] = RipRouteEntry(dest, cand, sender, in_interface, now)
                changed = True
            continue
        if entry.next_hop == sender and entry.learned_interface == in_interface:
            if cand == INFINITY:
                if entry.metric != INFINITY:
                    _poison(entry, cfg, now)
                    changed = True
                continue
            if cand != entry.metric:
                changed = True
            entry.metric = cand
            entry.last_refresh = now
            entry.gc_deadline = None
        elif cand < entry.metric:
            table[dest] = RipRouteEntry(dest, cand, sender, in_interface, now)
            changed = True
    return table, changed


def rip_build_advertisements(table, interfaces, cfg: RipConfig, sender=None, connected=()):
    """One advertisement per interface, honouring split horizon.

    ``connected`` lists destinations that are always advertised with metric 1
    (the router's own identity).
    """
    base = [(d, 1) for d in connected]
    entries = sorted(table.values(), key=lambda e: e.dest)
    out = {}
    for iface in interfaces:
        routes = list(base)
        for e in entries:
            if cfg.split_horizon and e.learned_interface == iface:
                continue
            routes.append((e.dest, e.metric))
        routes.sort()
        out[iface] = RipAdvertisement(sender, tuple(routes))
    return out


def rip_tick(table, cfg: RipConfig, now, phase: int = 0):
    """Advance route timers; returns ``(table, emit_periodic, expired_dests)``."""
    expired = []
    for dest in sorted(table):
        e = table[dest]
        if e.metric == INFINITY:
            if e.gc_deadline is not None and now >= e.gc_deadline:
                del table[dest]
            continue
        if not e.direct and now - e.last_refresh >= cfg.timeout:
            _poison(e, cfg, now)
            expired.append(dest)
    emit = (now - phase) % cfg.advertise_interval == 0
    return table, emit, expired


def rip_on_interface_down(table, iface, cfg: RipConfig, now):
    changed = False
    for e in table.values():
        if e.learned_interface == iface and e.metric != INFINITY:
            _poison(e, cfg, now)
            changed = True
    return table, changed and cfg.triggered_updates


class RipRouter(RoutingEngine):
    protocol = "rip"

    def __init__(self, node_id, ports: list[Port], send, cfg: RipConfig | None = None, phase: int = 0):
        super().__init__(node_id, ports, send)
        self.cfg = cfg or RipConfig()
        self.phase = phase
        self.table: dict[NodeId, RipRouteEntry] = {}
        for p in self.up_ports():
            self._install_direct(p, 0)
        self._rebuild_fib()

    def _install_direct(self, port: Port, now) -> bool:
        changed = False
        for h in port.hosts:
            cur = self.table.get(h)
            if cur is None or not (cur.direct and cur.metric == 1):
                self.table[h] = RipRouteEntry(h, 1, None, port.index, now)
                changed = True
        return changed

    def _rebuild_fib(self):
        self.fib = {
            d: Route(d, e.learned_interface, d if e.direct else e.next_hop, e.metric)
            for d, e in self.table.items()
            if e.metric < INFINITY
        }

    def _advertise(self, ifaces):
        advs = rip_build_advertisements(self.table, ifaces, self.cfg, self.node_id, (self.node_id,))
        for iface, adv in advs.items():
            self._send(iface, adv, BROADCAST)

    def _all_up(self):
        return [p.index for p in self.up_ports()]

    def tick(self, now):
        _, emit, expired = rip_tick(self.table, self.cfg, now, self.phase)
        self._rebuild_fib()
        if emit or (expired and self.cfg.triggered_updates):
            self._advertise(self._all_up())

    def receive(self, iface, msg, now):
        if not isinstance(msg, RipAdvertisement) or msg.sender == self.node_id:
            return
        port = self.ports[iface]
        if msg.sender not in port.routers:
            self.malformed += 1
            return
        try:
            _, changed = rip_process_advertisement(self.table, msg, iface, self.cfg, now, self.node_id)
        except MalformedAdvertisement:
            self.malformed += 1
            return
        if changed:
            self._rebuild_fib()
            if self.cfg.triggered_updates:
                self._advertise(self._all_up())

    def interface_down(self, iface, now):
        super().interface_down(iface, now)
        _, triggered = rip_on_interface_down(self.table, iface, self.cfg, now)
        self._rebuild_fib()
        if triggered:
            self._advertise(self._all_up())

    def interface_up(self, iface, now):
        super().interface_up(iface, now)
        changed = self._install_direct(self.ports[iface], now)
        self._rebuild_fib()
        if changed and self.cfg.triggered_updates:
            self._advertise(self._all_up())
        else:
            # stands in for a RIP request: neighbours learn our table at once
            self._advertise([iface])
