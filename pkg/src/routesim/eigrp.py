"""EIGRP engine: hello-based neighbour tracking and DUAL.

Distances are additive: the distance through a neighbour is the distance it
reports plus the composite metric of our interface towards it.  An
unreachable distance is ``math.inf``.

DUAL state per destination lives in :class:`DualTopologyEntry` and is
updated by the ``dual_*`` functions.  :class:`EigrpRouter` drives them from
kernel callbacks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .router import (
    BROADCAST,
    EIGRP_ENTRY_BITS,
    EIGRP_HEADER_BITS,
    HELLO_BITS,
    NodeId,
    Port,
    Route,
    RoutingEngine,
)

INF = math.inf
INTERFACE_DELAY_US = 100


class ContractViolation(RuntimeError):
    pass


def eigrp_composite_metric(min_bandwidth: int, total_delay: int) -> int:
    """``256 * (10**7 / kbps + delay_us / 10)`` with floor division (K1 = K3 = 1)."""
    if min_bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return 256 * (10**10 // min_bandwidth + total_delay // 10)


@dataclass(frozen=True)
class EigrpConfig:
    hello_interval: int = 5
    hold_time: int = 15
    interface_delay_us: int = INTERFACE_DELAY_US

    def __post_init__(self):
        if self.hold_time < 2 * self.hello_interval:
            raise ValueError("hold time must be at least twice the hello interval")

    def link_metric(self, port: Port) -> int:
        return eigrp_composite_metric(port.bandwidth, port.prop_delay + self.interface_delay_us)


class DualState(enum.Enum):
    PASSIVE = "passive"
    ACTIVE = "active"


class Action(enum.Enum):
    NONE = "none"
    INSTALL = "install"
    START_DIFFUSING = "start_diffusing"
    UNREACHABLE = "unreachable"
    INSTALL_AND_PASSIVE = "install_and_passive"


@dataclass
class DualTopologyEntry:
    dest: NodeId
    reported: dict = field(default_factory=dict)  # neighbour -> (reported distance, link metric)
    feasible_distance: float = INF
    successor: NodeId | None = None
    state: DualState = DualState.PASSIVE
    outstanding_replies: set = field(default_factory=set)
    owe_reply: set = field(default_factory=set)  # neighbours whose query we answer on going passive
    advertised: float = INF  # distance last announced to neighbours

    def distance_via(self, nbr) -> float:
        rd, lm = self.reported[nbr]
        return rd + lm

    @property
    def distance(self) -> float:
        if self.successor is None or self.successor not in self.reported:
            return INF
        return self.distance_via(self.successor)

    def best(self, candidates):
        """``(distance, neighbour)`` minimum over ``candidates``; lowest id breaks ties."""
        best = None
        for n in sorted(candidates):
            d = self.distance_via(n)
            if d < INF and (best is None or d < best[0]):
                best = (d, n)
        return best


def dual_feasibility_check(entry: DualTopologyEntry, neighbor) -> bool:
    if neighbor not in entry.reported:
        raise KeyError(f"{neighbor!r} has reported nothing for {entry.dest!r}")
    return entry.reported[neighbor][0] < entry.feasible_distance


def dual_route_computation(entry: DualTopologyEntry, neighbors):
    """Local computation for a passive destination.

    ``neighbors`` are the routers that could be queried.  Returns
    ``(entry, action, queried)``.
    """
    if entry.state is DualState.ACTIVE:
        raise ContractViolation(f"local computation for {entry.dest!r} while active")
    feasible = [n for n in entry.reported if entry.reported[n][0] < INF and dual_feasibility_check(entry, n)]
    best = entry.best(feasible)
    if best is not None:
        dist, nbr = best
        entry.successor = nbr
        entry.feasible_distance = min(entry.feasible_distance, dist)
        return entry, Action.INSTALL, set()
    if neighbors:
        entry.state = DualState.ACTIVE
        entry.outstanding_replies = set(neighbors)
        if entry.successor not in entry.reported:
            entry.successor = None
        return entry, Action.START_DIFFUSING, set(neighbors)
    entry.successor = None
    entry.feasible_distance = INF
    return entry, Action.UNREACHABLE, set()


def dual_process_reply(entry: DualTopologyEntry, neighbor, reply_rd, link_metric=None):
    """Record a reply; returns ``(entry, action)``.

    A reply for a passive destination, or from a neighbour that was not
    queried, is stale and changes nothing (``Action.NONE``).
    """
    if entry.state is DualState.PASSIVE or neighbor not in entry.outstanding_replies:
        return entry, Action.NONE
    if link_metric is None:
        link_metric = entry.reported[neighbor][1]
    entry.reported[neighbor] = (reply_rd, link_metric)
    entry.outstanding_replies.discard(neighbor)
    if entry.outstanding_replies:
        return entry, Action.NONE
    return _finish_active(entry), Action.INSTALL_AND_PASSIVE


def _finish_active(entry):
    best = entry.best(entry.reported)
    entry.state = DualState.PASSIVE
    if best is None:
        entry.successor = None
        entry.feasible_distance = INF
    else:
        entry.feasible_distance, entry.successor = best
    return entry


def dual_neighbor_lost(entry: DualTopologyEntry, neighbor):
    """Forget ``neighbor``; while active it counts as an infinite reply."""
    entry.reported.pop(neighbor, None)
    entry.owe_reply.discard(neighbor)
    if entry.state is DualState.ACTIVE and neighbor in entry.outstanding_replies:
        entry.outstanding_replies.discard(neighbor)
        if not entry.outstanding_replies:
            _finish_active(entry)
            return Action.INSTALL_AND_PASSIVE
    return Action.NONE


@dataclass(frozen=True)
class EigrpHello:
    sender: NodeId
    size_bits: int = HELLO_BITS


class Opcode(enum.Enum):
    UPDATE = "update"
    QUERY = "query"
    REPLY = "reply"


@dataclass(frozen=True)
class EigrpPacket:
    opcode: Opcode
    sender: NodeId
    routes: tuple  # ((dest, distance), ...)

    @property
    def size_bits(self) -> int:
        return EIGRP_HEADER_BITS + EIGRP_ENTRY_BITS * len(self.routes)


@dataclass
class NeighborEntry:
    neighbor: NodeId
    interface: int
    last_hello: float


def eigrp_neighbor_maintenance(neighbors: dict, event, cfg: EigrpConfig, now, iface=None):
    """Update the neighbour table; returns ``(neighbors, lost, found)``.

    ``event`` is an :class:`EigrpHello` (arriving on ``iface``), ``None`` for
    a clock tick, or ``("down", iface)`` for loss of carrier.
    """
    lost, found = [], []
    if event is None:
        for n in sorted(neighbors):
            if now - neighbors[n].last_hello >= cfg.hold_time:
                lost.append(n)
                del neighbors[n]
    elif isinstance(event, tuple) and event[0] == "down":
        for n in sorted(neighbors):
            if neighbors[n].interface == event[1]:
                lost.append(n)
                del neighbors[n]
    else:
        entry = neighbors.get(event.sender)
        if entry is None:
            neighbors[event.sender] = NeighborEntry(event.sender, iface, now)
            found.append(event.sender)
        elif entry.interface == iface:
            entry.last_hello = now
    return neighbors, lost, found


class EigrpRouter(RoutingEngine):
    protocol = "eigrp"

    def __init__(self, node_id, ports: list[Port], send, cfg: EigrpConfig | None = None, phase: int = 0):
        super().__init__(node_id, ports, send)
        self.cfg = cfg or EigrpConfig()
        self.phase = phase
        self.neighbors: dict[NodeId, NeighborEntry] = {}
        self.topology: dict[NodeId, DualTopologyEntry] = {}
        self.stale_replies = 0
        self.active_episodes = 0
        self._out = {}  # (opcode, iface, l2 dst) -> {dest: distance}

    # -- helpers ---------------------------------------------------------
    def _entry(self, dest):
        e = self.topology.get(dest)
        if e is None:
            e = self.topology[dest] = DualTopologyEntry(dest)
        return e

    def _link_metric(self, nbr):
        if nbr in self.neighbors:
            return self.cfg.link_metric(self.ports[self.neighbors[nbr].interface])
        for p in self.up_ports():
            if nbr in p.hosts:
                return self.cfg.link_metric(p)
        return None

    def _router_neighbors(self):
        return set(self.neighbors)

    def _queue(self, opcode, iface, l2_dst, dest, dist):
        self._out.setdefault((opcode, iface, l2_dst), {})[dest] = dist

    def _announce(self, dest, dist):
        for p in self.up_ports():
            if any(n.interface == p.index for n in self.neighbors.values()):
                self._queue(Opcode.UPDATE, p.index, BROADCAST, dest, dist)

    def _flush(self):
        out, self._out = self._out, {}
        for (opcode, iface, l2_dst), routes in sorted(out.items(), key=lambda kv: (kv[0][0].value, kv[0][1], str(kv[0][2]))):
            if not self.ports[iface].up:
                continue
            pkt = EigrpPacket(opcode, self.node_id, tuple(sorted(routes.items())))
            self._send(iface, pkt, l2_dst)

    def _reply(self, nbr, dest, dist):
        n = self.neighbors.get(nbr)
        if n is not None:
            self._queue(Opcode.REPLY, n.interface, nbr, dest, dist)

    def _rebuild_fib(self):
        fib = {}
        for dest, e in self.topology.items():
            s = e.successor
            if s is None or s not in e.reported or e.distance == INF:
                continue
            if s in self.neighbors:
                iface = self.neighbors[s].interface
            else:
                iface = next((p.index for p in self.up_ports() if s in p.hosts), None)
                if iface is None:
                    continue
            fib[dest] = Route(dest, iface, s, int(e.distance))
        self.fib = fib

    def _after_change(self, e: DualTopologyEntry):
        if e.state is DualState.PASSIVE:
            d = e.distance
            for n in sorted(e.owe_reply):
                self._reply(n, e.dest, d)
            e.owe_reply.clear()
            if d != e.advertised:
                e.advertised = d
                self._announce(e.dest, d)

    def _compute(self, e: DualTopologyEntry, querier=None):
        """Run DUAL's local computation on a passive entry."""
        old = e.successor
        _, action, queried = dual_route_computation(e, self._router_neighbors())
        if action is Action.START_DIFFUSING:
            self.active_episodes += 1
            if querier is not None:
                e.owe_reply.add(querier)
            d = e.distance
            e.advertised = d
            for p in self.up_ports():
                if any(self.neighbors[n].interface == p.index for n in queried):
                    self._queue(Opcode.QUERY, p.index, BROADCAST, e.dest, d)
        else:
            if querier is not None:
                e.owe_reply.add(querier)
            self._after_change(e)
        return old != e.successor

    # -- connected destinations -----------------------------------------
    def _attach_hosts(self, port: Port):
        lm = self.cfg.link_metric(port)
        for h in port.hosts:
            e = self._entry(h)
            e.reported[h] = (0, lm)
            if e.state is DualState.PASSIVE:
                self._compute(e)

    def _detach(self, nbr):
        for dest in sorted(self.topology):
            e = self.topology[dest]
            if nbr not in e.reported:
                continue
            was_successor = e.successor == nbr
            if e.state is DualState.ACTIVE:
                if dual_neighbor_lost(e, nbr) is Action.INSTALL_AND_PASSIVE:
                    self._after_change(e)
            else:
                dual_neighbor_lost(e, nbr)
                if was_successor:
                    e.successor = None
                    self._compute(e)

    # -- kernel callbacks ------------------------------------------------
    def start(self, now):
        for p in self.up_ports():
            self._attach_hosts(p)
            self._send(p.index, EigrpHello(self.node_id), BROADCAST)
        self._finish()

    def _finish(self):
        self._flush()
        self._rebuild_fib()

    def tick(self, now):
        _, lost, _ = eigrp_neighbor_maintenance(self.neighbors, None, self.cfg, now)
        for n in lost:
            self._detach(n)
        if (now - self.phase) % self.cfg.hello_interval == 0:
            for p in self.up_ports():
                self._send(p.index, EigrpHello(self.node_id), BROADCAST)
        self._finish()

    def receive(self, iface, msg, now):
        port = self.ports[iface]
        sender = getattr(msg, "sender", None)
        if sender == self.node_id:
            return
        if sender not in port.routers:
            self.malformed += 1
            return
        if isinstance(msg, EigrpHello):
            _, _, found = eigrp_neighbor_maintenance(self.neighbors, msg, self.cfg, now, iface)
            for n in found:
                self._full_update(n)
            self._finish()
            return
        if not isinstance(msg, EigrpPacket) or sender not in self.neighbors:
            return
        if self.neighbors[sender].interface != iface:
            return
        lm = self._link_metric(sender)
        for dest, rd in msg.routes:
            if dest == self.node_id:
                if msg.opcode is Opcode.QUERY:
                    self._reply(sender, dest, 0)
                continue
            e = self._entry(dest)
            if msg.opcode is Opcode.REPLY:
                if e.state is DualState.ACTIVE and sender in e.outstanding_replies:
                    _, action = dual_process_reply(e, sender, rd, lm)
                    if action is Action.INSTALL_AND_PASSIVE:
                        self._after_change(e)
                else:
                    self.stale_replies += 1
                    e.reported[sender] = (rd, lm)
                continue
            e.reported[sender] = (rd, lm)
            if e.state is DualState.ACTIVE:
                if msg.opcode is Opcode.QUERY:
                    self._reply(sender, dest, e.distance)
                continue
            self._compute(e, querier=sender if msg.opcode is Opcode.QUERY else None)
        self._finish()

    def _full_update(self, nbr):
        iface = self.neighbors[nbr].interface
        self._queue(Opcode.UPDATE, iface, nbr, self.node_id, 0)
        for dest in sorted(self.topology):
            e = self.topology[dest]
            if e.state is DualState.PASSIVE and e.distance < INF:
                self._queue(Opcode.UPDATE, iface, nbr, dest, e.distance)

    def interface_down(self, iface, now):
        super().interface_down(iface, now)
        _, lost, _ = eigrp_neighbor_maintenance(self.neighbors, ("down", iface), self.cfg, now)
        for n in lost:
            self._detach(n)
        for h in self.ports[iface].hosts:
            if not any(h in p.hosts for p in self.up_ports()):
                self._detach(h)
        self._finish()

    def interface_up(self, iface, now):
        super().interface_up(iface, now)
        self._attach_hosts(self.ports[iface])
        self._send(iface, EigrpHello(self.node_id), BROADCAST)
        self._finish()
