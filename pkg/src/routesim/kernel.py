"""Deterministic discrete-event kernel.

Time is kept in integer microseconds.  Events are ordered by ``(time, seq)``
where ``seq`` is a global insertion counter, so simultaneous events run in
the order they were scheduled.

Every transmission goes through :class:`Link`: a bounded FIFO per direction
feeding a wire with serialization and propagation delay.  Protocol messages
share the links with data.

Flooding by switches can turn one data packet into several frames.  The
kernel tracks live copies per packet so that each generated packet ends up
counted exactly once: delivered, dropped, or left in flight at the end.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .eigrp import EigrpConfig, EigrpRouter
from .linkstate import LinkStateRouter, LsFlavorConfig
from .metrics import MetricSeries, Report
from .rip import RipConfig, RipRouter
from .router import BROADCAST, Port
from .scenario import Scenario

US = 1_000_000
DEFAULT_TTL = 32
QUEUE_CAPACITY = 64
REDIRECT_BITS = 448

PACKET_ARRIVAL = "PacketArrival"
TIMER_TICK = "TimerTick"
LINK_STATUS_CHANGE = "LinkStatusChange"
PROTOCOL_MESSAGE_DELIVERY = "ProtocolMessageDelivery"
PACKET_GENERATION = "PacketGeneration"


class EndOfSimulation(IndexError):
    pass


class Event(NamedTuple):
    time: int
    seq: int
    kind: str
    payload: object = None


class EventQueue:
    def __init__(self):
        self._heap = []
        self._seq = 0

    def __len__(self):
        return len(self._heap)

    def push(self, time: int, kind: str, payload=None) -> int:
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._heap, (time, seq, kind, payload))
        return seq

    def pop(self) -> Event:
        if not self._heap:
            raise EndOfSimulation("event queue is empty")
        return Event(*heapq.heappop(self._heap))

    def peek_time(self):
        return self._heap[0][0] if self._heap else None


@dataclass(slots=True)
class Packet:
    uid: int
    flow_id: int
    src: str
    dst: str
    size: int
    created_at: int
    hops_traversed: int = 0
    ttl: int = DEFAULT_TTL


@dataclass(frozen=True)
class Redirect:
    """ICMP-style redirect telling ``host`` to use ``gateway`` for ``dest``."""

    sender: str
    host: str
    dest: str
    gateway: str
    size_bits: int = REDIRECT_BITS


@dataclass(slots=True)
class Frame:
    l2_src: str
    l2_dst: str
    size: int
    payload: object
    data: bool


class Link:
    """Full-duplex point-to-point link; direction 0 is a to b."""

    def __init__(self, a: str, b: str, bandwidth: int, prop_delay: int, capacity: int = QUEUE_CAPACITY):
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        self.a, self.b = a, b
        self.bandwidth = bandwidth
        self.prop_delay = prop_delay
        self.capacity = capacity
        self.up = True
        self.busy_until = [0, 0]
        self.backlog = (deque(), deque())  # serialization finish times still ahead
        self.pending: dict[int, tuple[Frame, int]] = {}  # token -> (frame, direction)

    def direction_from(self, node: str) -> int:
        return 0 if node == self.a else 1

    def far_end(self, node: str) -> str:
        return self.b if node == self.a else self.a

    def serialization_us(self, bits: int) -> int:
        return -(-bits * US // self.bandwidth)

    def transmit(self, direction: int, bits: int, now: int, start_at: int | None = None):
        """Queue ``bits`` for sending.  Returns ``(arrival_time, None)``, or ``(None, reason)`` on a drop."""
        if bits <= 0:
            raise ValueError("frame size must be positive")
        if not self.up:
            return None, "link_down"
        q = self.backlog[direction]
        while q and q[0] <= now:
            q.popleft()
        if len(q) >= self.capacity:
            return None, "queue_full"
        start = max(now if start_at is None else start_at, self.busy_until[direction])
        finish = start + self.serialization_us(bits)
        self.busy_until[direction] = finish
        q.append(finish)
        return finish + self.prop_delay, None

    def flush(self):
        """Forget everything queued or on the wire; returns the lost frames in send order."""
        lost = [frame for _, (frame, _) in sorted(self.pending.items())]
        self.pending.clear()
        for q in self.backlog:
            q.clear()
        self.busy_until = [0, 0]
        return lost


def transmit_on_link(link: Link, frame: Frame, from_node: str, now: int, start_at: int | None = None):
    return link.transmit(link.direction_from(from_node), frame.size, now, start_at)


@dataclass
class NodeState:
    id: str
    kind: str
    interfaces: list = field(default_factory=list)  # index -> Link
    engine: object = None
    processing_delay: int = 0
    mac: dict = field(default_factory=dict)  # switches: node -> interface
    gateway: str | None = None  # hosts
    redirects: dict = field(default_factory=dict)  # hosts: dest -> router
    segment_hosts: dict = field(default_factory=dict)  # interface -> hosts on that segment
    segment: frozenset = frozenset()  # hosts: every node on the own layer-2 domain


class Forward(NamedTuple):
    action: str  # deliver_local, enqueue, flood, discard, drop
    interfaces: tuple = ()
    next_hop: str | None = None
    reason: str | None = None


def forward_packet(node: NodeState, frame: Frame, in_interface: int) -> Forward:
    """Decide what ``node`` does with a frame that arrived on ``in_interface``.

    Switches learn the frame's source as a side effect.  ``discard`` means
    the frame was not addressed to this node; ``drop`` is a loss with a
    reason.  Router decisions do not touch the packet; the caller applies
    the TTL and hop updates on ``enqueue``.
    """
    if node.kind == "switch":
        node.mac[frame.l2_src] = in_interface
        out = node.mac.get(frame.l2_dst) if frame.l2_dst != BROADCAST else None
        if out is not None:
            if out == in_interface:
                return Forward("discard")
            return Forward("enqueue", (out,), frame.l2_dst)
        flood = tuple(i for i, link in enumerate(node.interfaces) if link.up and i != in_interface)
        return Forward("flood", flood) if flood else Forward("discard")
    if frame.l2_dst not in (node.id, BROADCAST):
        return Forward("discard")
    if node.kind == "host":
        if frame.data and frame.payload.dst != node.id:
            return Forward("discard")
        return Forward("deliver_local")
    if not frame.data:
        return Forward("deliver_local")
    pkt = frame.payload
    route = node.engine.fib.get(pkt.dst)
    if route is None:
        return Forward("drop", reason="no_route")
    if pkt.ttl <= 1:
        return Forward("drop", reason="ttl")
    return Forward("enqueue", (route.interface,), route.next_hop)


def make_engine(protocol: str, node_id, ports, send, phase: int = 0):
    if protocol == "rip":
        return RipRouter(node_id, ports, send, RipConfig(), phase)
    if protocol == "ospf":
        return LinkStateRouter(node_id, ports, send, LsFlavorConfig.ospf(), phase)
    if protocol == "isis":
        return LinkStateRouter(node_id, ports, send, LsFlavorConfig.isis(), phase)
    if protocol == "eigrp":
        return EigrpRouter(node_id, ports, send, EigrpConfig(), phase)
    raise ValueError(f"unknown protocol {protocol!r}")


TIMER_PERIOD = {"rip": 30, "ospf": 10, "isis": 10, "eigrp": 5}


@dataclass
class FlowCounters:
    generated: int = 0
    delivered: int = 0
    dropped: int = 0


class Simulation:
    def __init__(self, scenario: Scenario, keep_trace: bool = False, queue_capacity: int = QUEUE_CAPACITY):
        self.scenario = scenario
        self.end = scenario.duration * US
        self.queue = EventQueue()
        self.now = 0
        self.keep_trace = keep_trace
        self.trace: list[tuple[int, int, str]] = []
        self.link_log: list[tuple[int, str, str, str]] = []  # (time, a, b, "up"/"down")
        self.metrics = MetricSeries(scenario.duration, scenario.bucket)
        self.flows = [FlowCounters() for _ in scenario.flows]
        self.drop_reasons: dict[str, int] = {}
        self.control_dropped = 0
        self.status_warnings = 0
        self._copies: dict[int, int] = {}
        self._first_loss: dict[int, str] = {}
        self._delivered_uids: set[int] = set()
        self._live: dict[int, Packet] = {}
        self._next_uid = 0
        self._token = 0
        self.nodes: dict[str, NodeState] = {}
        self.links: dict[frozenset, Link] = {}
        self._build(queue_capacity)

    # -- construction ----------------------------------------------------
    def _build(self, capacity):
        s = self.scenario
        for n in s.nodes:
            self.nodes[n.id] = NodeState(n.id, n.kind, processing_delay=n.processing_us, gateway=n.gateway)
        for spec in s.links:
            link = Link(spec.a, spec.b, spec.bandwidth, spec.prop_delay, capacity)
            self.links[spec.key] = link
            self.nodes[spec.a].interfaces.append(link)
            self.nodes[spec.b].interfaces.append(link)
        for node in self.nodes.values():
            if node.kind == "host":
                node.segment = frozenset(self._domain(node.id))
                if node.gateway is None:
                    routers = sorted(x for x in node.segment if self.nodes[x].kind == "router")
                    node.gateway = routers[0] if routers else None
        phases = self._phases()
        for rid in sorted(x for x, n in self.nodes.items() if n.kind == "router"):
            node = self.nodes[rid]
            ports = []
            for i, link in enumerate(node.interfaces):
                seen = self._domain_via(rid, link)
                hosts = tuple(sorted(x for x in seen if self.nodes[x].kind == "host"))
                routers = tuple(sorted(x for x in seen if self.nodes[x].kind == "router"))
                node.segment_hosts[i] = frozenset(hosts)
                ports.append(Port(i, link.bandwidth, link.prop_delay, True, hosts, routers))
            node.engine = make_engine(s.protocol, rid, ports, self._sender(node), phases.get(rid, 0))
        for f in sorted(s.failures, key=lambda f: f.time):
            self.queue.push(f.time * US, LINK_STATUS_CHANGE, (frozenset((f.a, f.b)), f.status))
        if self.end > 0:
            self.queue.push(0, TIMER_TICK, 0)
        for idx, flow in enumerate(s.flows):
            if flow.start < flow.stop and flow.start < s.duration:
                self.queue.push(flow.start * US, PACKET_GENERATION, (idx, 0))

    def _phases(self):
        if not self.scenario.jitter:
            return {}
        rng = np.random.default_rng(self.scenario.seed)
        period = TIMER_PERIOD[self.scenario.protocol]
        routers = sorted(x for x, n in self.nodes.items() if n.kind == "router")
        return {r: int(p) for r, p in zip(routers, rng.integers(0, period, size=len(routers)))}

    def _domain_via(self, origin, link):
        """Non-switch nodes reachable from ``origin`` across ``link`` through switches only."""
        far = link.far_end(origin)
        if self.nodes[far].kind != "switch":
            return {far}
        found, seen, stack = set(), {far}, [far]
        while stack:
            sw = stack.pop()
            for l in self.nodes[sw].interfaces:
                x = l.far_end(sw)
                if x in seen or x == origin:
                    continue
                seen.add(x)
                if self.nodes[x].kind == "switch":
                    stack.append(x)
                else:
                    found.add(x)
        return found

    def _domain(self, host):
        out = set()
        for link in self.nodes[host].interfaces:
            out |= self._domain_via(host, link)
        return out

    def _sender(self, node):
        def send(iface, msg, l2_dst):
            self._transmit(node, iface, Frame(node.id, l2_dst, msg.size_bits, msg, False))
        return send

    # -- accounting -----------------------------------------------------
    def _copy_lost(self, pkt: Packet, reason: str | None):
        uid = pkt.uid
        if reason is not None:
            self._first_loss.setdefault(uid, reason)
        left = self._copies[uid] - 1
        if left:
            self._copies[uid] = left
            return
        del self._copies[uid]
        self._live.pop(uid, None)
        if uid in self._delivered_uids:
            self._delivered_uids.discard(uid)
            return
        why = self._first_loss.pop(uid, "unclaimed")
        self.drop_reasons[why] = self.drop_reasons.get(why, 0) + 1
        self.flows[pkt.flow_id].dropped += 1
        self.metrics.drop(self.now)

    def _drop(self, frame: Frame, reason: str):
        if frame.data:
            self._copy_lost(frame.payload, reason)
        else:
            self.control_dropped += 1
            self.metrics.drop(self.now)

    def _discard(self, frame: Frame):
        if frame.data:
            self._copy_lost(frame.payload, None)

    def _deliver(self, pkt: Packet):
        uid = pkt.uid
        if uid not in self._delivered_uids:
            self._delivered_uids.add(uid)
            self._first_loss.pop(uid, None)
            self.flows[pkt.flow_id].delivered += 1
            self.metrics.delivery(self.now, self.now - pkt.created_at, pkt.hops_traversed)
        left = self._copies[uid] - 1
        if left:
            self._copies[uid] = left
        else:
            del self._copies[uid]
            self._live.pop(uid, None)
            self._delivered_uids.discard(uid)

    # -- transmission ----------------------------------------------------
    def _transmit(self, node: NodeState, iface: int, frame: Frame, start_at: int | None = None):
        link = node.interfaces[iface]
        arrival, reason = transmit_on_link(link, frame, node.id, self.now, start_at)
        if arrival is None:
            self._drop(frame, reason)
            return
        if not frame.data:
            self.metrics.control(self.now, frame.size)
        token = self._token
        self._token += 1
        direction = link.direction_from(node.id)
        link.pending[token] = (frame, direction)
        kind = PACKET_ARRIVAL if frame.data else PROTOCOL_MESSAGE_DELIVERY
        self.queue.push(arrival, kind, (link, token))

    def _engine_call(self, node: NodeState, method: str, *args):
        eng = node.engine
        before = eng.fib
        getattr(eng, method)(*args)
        if eng.fib is not before and eng.fib != before:
            self.metrics.table_change(self.now)

    # -- event handlers ------------------------------------------------
    def _on_tick(self, second: int):
        routers = [n for _, n in sorted(self.nodes.items()) if n.kind == "router"]
        if second == 0:
            for n in routers:
                self._engine_call(n, "start", 0)
        else:
            for n in routers:
                self._engine_call(n, "tick", second)
        nxt = (second + 1) * US
        if nxt < self.end:
            self.queue.push(nxt, TIMER_TICK, second + 1)

    def apply_link_status_change(self, key, status: str):
        link = self.links[key]
        up = status == "recover"
        if link.up == up:
            self.status_warnings += 1
            return
        link.up = up
        self.link_log.append((self.now, link.a, link.b, "up" if up else "down"))
        if not up:
            for frame in link.flush():
                self._drop(frame, "link_down")
        for end in (link.a, link.b):
            node = self.nodes[end]
            iface = node.interfaces.index(link)
            if node.kind == "router":
                self._engine_call(node, "interface_up" if up else "interface_down", iface, self.now / US)
            elif node.kind == "switch" and not up:
                node.mac = {k: v for k, v in node.mac.items() if v != iface}

    def _on_generation(self, idx: int, k: int):
        flow = self.scenario.flows[idx]
        uid = self._next_uid
        self._next_uid += 1
        pkt = Packet(uid, idx, flow.src, flow.dst, flow.packet_bits, self.now)
        self.flows[idx].generated += 1
        self._copies[uid] = 1
        self._live[uid] = pkt
        self._host_send(self.nodes[flow.src], pkt)
        t = flow.start * US + (k + 1) * US // flow.rate_pps
        if t < flow.stop * US and t < self.end:
            self.queue.push(t, PACKET_GENERATION, (idx, k + 1))

    def _host_send(self, host: NodeState, pkt: Packet):
        frame = Frame(host.id, None, pkt.size, pkt, True)
        if not host.interfaces:
            self._drop(frame, "no_route")
            return
        if pkt.dst in host.segment:
            frame.l2_dst = pkt.dst
        else:
            frame.l2_dst = host.redirects.get(pkt.dst, host.gateway)
            if frame.l2_dst is None:
                self._drop(frame, "no_route")
                return
        self._transmit(host, 0, frame)

    def _on_arrival(self, link: Link, token: int):
        entry = link.pending.pop(token, None)
        if entry is None:
            return  # flushed by a link failure
        frame, direction = entry
        end = link.b if direction == 0 else link.a
        node = self.nodes[end]
        iface = node.interfaces.index(link)
        decision = forward_packet(node, frame, iface)
        act = decision.action
        if act == "discard":
            self._discard(frame)
        elif act == "drop":
            self._drop(frame, decision.reason)
        elif node.kind == "switch":
            outs = decision.interfaces
            if frame.data and len(outs) > 1:
                self._copies[frame.payload.uid] += len(outs) - 1
            for n, out in enumerate(outs):
                f = frame if n == 0 or not frame.data else Frame(
                    frame.l2_src, frame.l2_dst, frame.size, replace(frame.payload), True)
                self._transmit(node, out, f)
        elif act == "deliver_local":
            if node.kind == "host":
                if frame.data:
                    self._deliver(frame.payload)
                elif isinstance(frame.payload, Redirect) and frame.payload.host == node.id:
                    node.redirects[frame.payload.dest] = frame.payload.gateway
            elif not isinstance(frame.payload, Redirect):
                self._engine_call(node, "receive", iface, frame.payload, self.now / US)
        else:
            self._route(node, frame, iface, decision)

    def _route(self, node: NodeState, frame: Frame, in_iface: int, decision: Forward):
        pkt = frame.payload
        out = decision.interfaces[0]
        pkt.ttl -= 1
        pkt.hops_traversed += 1
        if out == in_iface and pkt.src in node.segment_hosts.get(in_iface, ()) and decision.next_hop != pkt.src:
            redirect = Redirect(node.id, pkt.src, pkt.dst, decision.next_hop)
            self._transmit(node, in_iface, Frame(node.id, pkt.src, REDIRECT_BITS, redirect, False))
        start = self.now + node.processing_delay if node.processing_delay else None
        self._transmit(node, out, Frame(node.id, decision.next_hop, frame.size, pkt, True), start)

    # -- main loop ---------------------------------------------------------
    def _dispatch(self, time, seq, kind, payload):
        self.now = time
        if self.keep_trace:
            self.trace.append((time, seq, kind))
        if kind == PACKET_ARRIVAL or kind == PROTOCOL_MESSAGE_DELIVERY:
            self._on_arrival(*payload)
        elif kind == PACKET_GENERATION:
            self._on_generation(*payload)
        elif kind == TIMER_TICK:
            self._on_tick(payload)
        else:
            self.apply_link_status_change(*payload)

    def step(self) -> bool:
        """Process one event; False once the queue is empty or the end is reached."""
        heap = self.queue._heap
        if not heap or heap[0][0] >= self.end:
            return False
        self._dispatch(*heapq.heappop(heap))
        return True

    def run(self, until_s: int | None = None) -> Report:
        stop = self.end if until_s is None else min(self.end, until_s * US)
        heap = self.queue._heap
        pop, dispatch = heapq.heappop, self._dispatch
        while heap and heap[0][0] < stop:
            dispatch(*pop(heap))
        return self.report()

    def in_flight(self) -> int:
        return sum(1 for uid in self._copies if uid not in self._delivered_uids)

    def in_flight_per_flow(self):
        out = [0] * len(self.flows)
        for uid, pkt in self._live.items():
            if uid not in self._delivered_uids:
                out[pkt.flow_id] += 1
        return out

    def report(self) -> Report:
        return Report(
            scenario=self.scenario.name,
            protocol=self.scenario.protocol,
            series=self.metrics,
            generated=sum(f.generated for f in self.flows),
            delivered=sum(f.delivered for f in self.flows),
            dropped_by_reason=dict(self.drop_reasons),
            control_dropped=self.control_dropped,
            in_flight=self.in_flight(),
            extra={"link_status_warnings": self.status_warnings},
        )
