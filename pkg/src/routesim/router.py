"""Interfaces shared by the routing engines and the simulation kernel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, NamedTuple

NodeId = Hashable
InterfaceId = int

BROADCAST = "*"

# Control message sizes in bits.
HELLO_BITS = 480
RIP_HEADER_BITS = 192
RIP_ENTRY_BITS = 160
LSP_HEADER_BITS = 256
LSP_ENTRY_BITS = 96
EIGRP_HEADER_BITS = 256
EIGRP_ENTRY_BITS = 128


class Route(NamedTuple):
    """One forwarding entry.

    ``next_hop`` is the neighbouring node the frame is addressed to at layer
    two; for a directly attached host it is the host itself.
    """

    dest: NodeId
    interface: InterfaceId | None
    next_hop: NodeId
    metric: int


@dataclass
class Port:
    """What a router knows about one of its interfaces."""

    index: InterfaceId
    bandwidth: int  # bits/s
    prop_delay: int  # microseconds
    up: bool = True
    hosts: tuple = ()  # hosts on the attached layer-2 segment
    routers: tuple = ()  # other routers on the attached layer-2 segment


# send(interface, message, l2_dst) -- message must expose ``size_bits``.
SendFn = Callable[[InterfaceId, object, NodeId], None]


class RoutingEngine:
    """Base class for the per-router protocol instances driven by the kernel.

    Times handed to the callbacks are in seconds; ``tick`` is called on every
    whole second.  ``fib`` holds the current forwarding table.
    """

    protocol = "base"

    def __init__(self, node_id: NodeId, ports: list[Port], send: SendFn):
        self.node_id = node_id
        self.ports = {p.index: p for p in ports}
        self._send = send
        self.fib: dict[NodeId, Route] = {}
        self.malformed = 0

    def up_ports(self):
        return [p for i, p in sorted(self.ports.items()) if p.up]

    def start(self, now: float) -> None:
        pass

    def tick(self, now: int) -> None:
        pass

    def receive(self, iface: InterfaceId, msg, now: float) -> None:
        raise NotImplementedError

    def interface_down(self, iface: InterfaceId, now: float) -> None:
        self.ports[iface].up = False

    def interface_up(self, iface: InterfaceId, now: float) -> None:
        self.ports[iface].up = True
