"""Label-correcting shortest-path primitives shared by the certificate modules.

All arithmetic here is exact: callers lift float weights to
:class:`fractions.Fraction` (every finite float is a dyadic rational) so that
negative-cycle verdicts are never an artifact of rounding.  ``None`` plays the
role of +inf for unreachable distances.
"""

from __future__ import annotations

from typing import Optional, Sequence


def find_negative_cycle(n: int, edges: Sequence[tuple]) -> Optional[list]:
    """Return a simple cycle of strictly negative total weight, or ``None``.

    ``edges`` is a sequence of ``(u, v, w)`` with finite exact weights.  The
    search runs Bellman-Ford from a virtual source connected to every node
    with weight 0, so cycles anywhere in the graph are found.  Edge order is
    respected, which makes the returned cycle deterministic; it is rotated so
    that the smallest node index comes first.
    """
    dist = [0] * n
    pred = [-1] * n
    target = -1
    for round_ in range(n + 1):
        relaxed = False
        for u, v, w in edges:
            nd = dist[u] + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                relaxed = True
                target = v
        if not relaxed:
            return None
    # A relaxation happened in round n+1, so a negative cycle exists.
    # Walk predecessors n times to guarantee we are standing inside it.
    v = target
    for _ in range(n):
        v = pred[v]
    cycle = [v]
    u = pred[v]
    while u != v:
        cycle.append(u)
        u = pred[u]
    cycle.reverse()  # pred-walk goes against edge direction
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


def shortest_paths(n: int, edges: Sequence[tuple], source: int) -> list:
    """Single-source shortest path values; ``None`` marks unreachable nodes.

    Assumes no negative cycle is reachable (callers certify this first with
    :func:`find_negative_cycle`).
    """
    dist: list = [None] * n
    dist[source] = 0
    for _ in range(n - 1):
        relaxed = False
        for u, v, w in edges:
            du = dist[u]
            if du is None:
                continue
            nd = du + w
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                relaxed = True
        if not relaxed:
            break
    return dist


def potentials_from_virtual_source(n: int, edges: Sequence[tuple]) -> list:
    """Shortest paths from a virtual source with 0-weight arcs to every node.

    The result ``d`` satisfies ``d[v] <= d[u] + w`` for every edge, which is
    exactly a feasible solution of the corresponding difference-constraint
    system.  Assumes no negative cycle.
    """
    dist = [0] * n
    for _ in range(n - 1):
        relaxed = False
        for u, v, w in edges:
            nd = dist[u] + w
            if nd < dist[v]:
                dist[v] = nd
                relaxed = True
        if not relaxed:
            break
    return dist


def strongly_connected_components(n: int, adjacency: Sequence[Sequence[int]]) -> list:
    """Kosaraju SCC with deterministic ordering; returns a list of index lists."""
    order = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        stack = [(start, iter(adjacency[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(adjacency[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    reverse = [[] for _ in range(n)]
    for u in range(n):
        for v in adjacency[u]:
            reverse[v].append(u)
    comp = [-1] * n
    components = []
    for start in reversed(order):
        if comp[start] != -1:
            continue
        current = [start]
        comp[start] = len(components)
        stack = [start]
        while stack:
            u = stack.pop()
            for v in reverse[u]:
                if comp[v] == -1:
                    comp[v] = len(components)
                    current.append(v)
                    stack.append(v)
        components.append(sorted(current))
    return components
