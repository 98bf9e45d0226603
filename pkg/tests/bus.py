"""Instant-delivery message bus for exercising routing engines without the kernel.

Messages sent by an engine are queued and delivered in FIFO order to every
router on the far end of the link.  Time only moves when ``advance`` runs the
per-second ticks.
"""

from __future__ import annotations

from collections import deque

from routesim.router import Port


class Bus:
    def __init__(self, routers, links, hosts=None, factory=None, bandwidth=10**7, prop=5):
        # links: (a, b) or (a, b, bandwidth) router pairs; hosts: {host: router}
        hosts = hosts or {}
        self.routers = sorted(routers)
        self.wires = {}  # (node, iface) -> (peer, peer_iface)
        ports = {r: [] for r in self.routers}
        for link in links:
            a, b = link[:2]
            bw = link[2] if len(link) > 2 else bandwidth
            ia, ib = len(ports[a]), len(ports[b])
            ports[a].append(Port(ia, bw, prop, routers=(b,)))
            ports[b].append(Port(ib, bw, prop, routers=(a,)))
            self.wires[(a, ia)] = (b, ib)
            self.wires[(b, ib)] = (a, ia)
        for h, r in sorted(hosts.items()):
            ports[r].append(Port(len(ports[r]), bandwidth, prop, hosts=(h,)))
        self.queue = deque()
        self.sent = []  # (sender, iface, msg)
        self.now = 0
        self.engines = {r: factory(r, ports[r], self._sender(r)) for r in self.routers}

    def _sender(self, node):
        def send(iface, msg, l2_dst):
            self.sent.append((node, iface, msg))
            peer = self.wires.get((node, iface))
            if peer is not None and self.engines_port_up(node, iface):
                self.queue.append((peer, msg))
        return send

    def engines_port_up(self, node, iface):
        eng = getattr(self, "engines", {}).get(node)
        return eng is None or eng.ports[iface].up

    def drain(self, limit=100_000):
        n = 0
        while self.queue:
            (node, iface), msg = self.queue.popleft()
            eng = self.engines[node]
            if eng.ports[iface].up:
                eng.receive(iface, msg, self.now)
            n += 1
            if n > limit:
                raise RuntimeError("message storm")
        return n

    def start(self):
        for r in self.routers:
            self.engines[r].start(self.now)
        self.drain()

    def advance(self, seconds):
        for _ in range(seconds):
            self.now += 1
            for r in self.routers:
                self.engines[r].tick(self.now)
            self.drain()

    def set_link(self, a, b, up):
        for (node, iface), (peer, _) in sorted(self.wires.items()):
            if node == a and peer == b or node == b and peer == a:
                eng = self.engines[node]
                if up:
                    eng.interface_up(iface, self.now)
                else:
                    eng.interface_down(iface, self.now)
        self.drain()

    def walk(self, src, dest):
        """Follow next hops from ``src``; returns the router path or None on a miss or loop."""
        path, node = [src], src
        while node != dest:
            eng = self.engines.get(node)
            if eng is None:
                return None
            route = eng.fib.get(dest)
            if route is None:
                return None
            node = route.next_hop
            if node in path:
                return None
            path.append(node)
            if len(path) > len(self.routers) + 1:
                return None
        return path
