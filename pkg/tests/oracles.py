"""Brute-force reference computations used to check the library."""

from __future__ import annotations

import itertools

from routesim.graph import UNREACHABLE


def simple_path_distances(nodes, edges, source):
    """Minimum cost over every simple path from ``source``, by exhaustive DFS."""
    out = {n: [] for n in nodes}
    for u, v, w in edges:
        out[u].append((v, w))
    best = {n: UNREACHABLE for n in nodes}
    best[source] = 0

    def walk(u, cost, seen):
        for v, w in out[u]:
            if v in seen:
                continue
            c = cost + w
            if best[v] is UNREACHABLE or c < best[v]:
                best[v] = c
            seen.add(v)
            walk(v, c, seen)
            seen.remove(v)

    walk(source, 0, {source})
    return best


def reachable_from(nodes, edges, source):
    out = {n: [] for n in nodes}
    for u, v, _ in edges:
        out[u].append(v)
    seen = {source}
    stack = [source]
    while stack:
        for v in out[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def has_reachable_negative_cycle(nodes, edges, source):
    """Enumerate every simple cycle and test its weight."""
    w = {(u, v): c for u, v, c in edges}
    reach = reachable_from(nodes, edges, source)
    nodes = sorted(nodes)
    for k in range(1, len(nodes) + 1):
        for combo in itertools.permutations(nodes, k):
            # canonical rotation: smallest node first
            if combo[0] != min(combo):
                continue
            if not any(n in reach for n in combo):
                continue
            cyc = list(combo) + [combo[0]]
            total = 0
            ok = True
            for a, b in zip(cyc, cyc[1:]):
                if (a, b) not in w:
                    ok = False
                    break
                total += w[(a, b)]
            if ok and total < 0:
                return True
    return False


def all_simple_paths(adj, src, dst):
    """Yield every simple path (as a node list) in an undirected adjacency dict."""
    stack = [(src, [src])]
    while stack:
        node, path = stack.pop()
        if node == dst:
            yield path
            continue
        for nxt in adj.get(node, ()):
            if nxt not in path:
                stack.append((nxt, path + [nxt]))
