"""Weighted directed graphs and single-source shortest paths.

Costs are plain Python integers restricted to the signed 64-bit range, so
every result is exact and identical across platforms.  Unreachable nodes
carry the :data:`UNREACHABLE` sentinel rather than a large number.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

NodeId = Hashable

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class _Unreachable:
    __slots__ = ()

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return "UNREACHABLE"


UNREACHABLE = _Unreachable()


class GraphError(ValueError):
    """Malformed graph or invalid query."""


class NegativeCycleDetected(Exception):
    """A negative-weight cycle is reachable from the source."""

    def __init__(self, source: NodeId, edge: tuple | None = None):
        self.source = source
        self.edge = edge
        super().__init__(f"negative cycle reachable from {source!r} (improvable edge {edge!r})")


@dataclass(frozen=True)
class Graph:
    nodes: frozenset
    edges: tuple  # ((u, v, w), ...) sorted
    _out: Mapping = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        seen = set()
        out: dict = {n: [] for n in nodes}
        edges = []
        for u, v, w in self.edges:
            if u not in nodes or v not in nodes:
                raise GraphError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u!r}, {v!r})")
            if not isinstance(w, int) or isinstance(w, bool):
                raise GraphError(f"weight of ({u!r}, {v!r}) must be an integer, got {w!r}")
            if not INT64_MIN <= w <= INT64_MAX:
                raise GraphError(f"weight {w} of ({u!r}, {v!r}) outside the 64-bit range")
            seen.add((u, v))
            edges.append((u, v, w))
        edges.sort(key=lambda e: (e[0], e[1]))
        for u, v, w in edges:
            out[u].append((v, w))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "_out", out)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], nodes: Iterable = ()) -> Graph:
        edges = list(edges)
        all_nodes = set(nodes)
        for u, v, _ in edges:
            all_nodes.add(u)
            all_nodes.add(v)
        return cls(frozenset(all_nodes), tuple(edges))

    def successors(self, u: NodeId) -> list[tuple]:
        return self._out[u]

    def weight(self, u: NodeId, v: NodeId) -> int:
        for x, w in self._out[u]:
            if x == v:
                return w
        raise KeyError((u, v))

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return any(x == v for x, _ in self._out.get(u, ()))


@dataclass(frozen=True)
class PathResult:
    source: NodeId
    dist: Mapping  # node -> int | UNREACHABLE
    pred: Mapping  # node -> predecessor; absent for the source and unreachable nodes

    def reachable(self, node: NodeId) -> bool:
        return self.dist[node] is not UNREACHABLE


def initialize_single_source(graph: Graph, source: NodeId) -> dict:
    """Zero for ``source``, :data:`UNREACHABLE` for every other node."""
    if source not in graph.nodes:
        raise GraphError(f"source {source!r} is not a node of the graph")
    dist = {n: UNREACHABLE for n in graph.nodes}
    dist[source] = 0
    return dist


def _shortest_path_tree(graph: Graph, source: NodeId, dist: Mapping) -> dict:
    # Predecessors are read off the tight edges (dist[u] + w == dist[v]) by a
    # traversal that expands nodes in (dist, id) order and claims each node
    # once.  Both algorithms share this so equal distances give equal trees,
    # and zero-weight cycles can never close a loop in ``pred``.
    pred = {}
    claimed = {source}
    heap = [(0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        for v, w in graph.successors(u):
            if v in claimed or dist[v] is UNREACHABLE:
                continue
            if du + w == dist[v]:
                pred[v] = u
                claimed.add(v)
                heapq.heappush(heap, (dist[v], v))
    return pred


def bellman_ford(graph: Graph, source: NodeId) -> PathResult:
    """Shortest paths allowing negative weights.

    Runs exactly ``|V| - 1`` relaxation passes over the sorted edge list and
    then one verification pass.  Raises :class:`NegativeCycleDetected` when the
    verification pass can still improve an edge, i.e. a negative cycle is
    reachable from ``source``.
    """
    dist = initialize_single_source(graph, source)
    edges = graph.edges
    for _ in range(len(graph.nodes) - 1):
        for u, v, w in edges:
            du = dist[u]
            if du is UNREACHABLE:
                continue
            dv = dist[v]
            if dv is UNREACHABLE or du + w < dv:
                dist[v] = du + w
    for u, v, w in edges:
        du = dist[u]
        if du is UNREACHABLE:
            continue
        dv = dist[v]
        if dv is UNREACHABLE or du + w < dv:
            raise NegativeCycleDetected(source, (u, v, w))
    return PathResult(source, dist, _shortest_path_tree(graph, source, dist))


def dijkstra(graph: Graph, source: NodeId, target: NodeId | None = None) -> PathResult:
    """Shortest paths over non-negative weights.

    The unvisited node with the smallest tentative distance is visited next;
    equal distances are broken by the lowest node id.  With ``target`` given
    the search stops as soon as the target is visited, leaving later nodes
    with tentative values.
    """
    for u, v, w in graph.edges:
        if w < 0:
            raise GraphError(f"dijkstra needs non-negative weights; ({u!r}, {v!r}) has {w}")
    dist = initialize_single_source(graph, source)
    visited = set()
    heap = [(0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if u in visited or du != dist[u]:
            continue
        visited.add(u)
        if u == target:
            break
        for v, w in graph.successors(u):
            if v in visited:
                continue
            dv = dist[v]
            cand = du + w
            if dv is UNREACHABLE or cand < dv:
                dist[v] = cand
                heapq.heappush(heap, (cand, v))
    return PathResult(source, dist, _shortest_path_tree(graph, source, dist))


def extract_path(result: PathResult, dest: NodeId) -> list | None:
    """Node list from the source to ``dest``, or ``None`` if unreachable."""
    if dest not in result.dist:
        raise GraphError(f"{dest!r} is not a node of the searched graph")
    if result.dist[dest] is UNREACHABLE:
        return None
    path = [dest]
    node = dest
    while node != result.source:
        node = result.pred[node]
        path.append(node)
    path.reverse()
    return path


def path_cost(graph: Graph, path: list) -> int:
    return sum(graph.weight(u, v) for u, v in zip(path, path[1:]))
