"""Maximum cardinality matching in general graphs.

Alternating-tree search with odd-cycle (blossom) contraction, the classical
O(V^3) scheme: repeatedly grow a BFS forest from each exposed vertex,
shrinking blossoms through their base vertex, until an augmenting path is
found or the vertex is proven inessential.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .graphs import Graph

__all__ = ["maximum_matching", "matching_size"]


def maximum_matching(g: Graph) -> set[tuple[int, int]]:
    """Edges of a maximum matching, each as (min, max)."""
    n = g.n
    match = [-1] * n
    parent = [-1] * n
    base = list(range(n))

    def lca(a: int, b: int) -> int:
        used = [False] * n
        cur = a
        while True:
            cur = base[cur]
            used[cur] = True
            if match[cur] == -1:
                break
            cur = parent[match[cur]]
        cur = b
        while True:
            cur = base[cur]
            if used[cur]:
                return cur
            cur = parent[match[cur]]

    def mark_path(v: int, b: int, child: int, in_blossom: list[bool]) -> None:
        while base[v] != b:
            in_blossom[base[v]] = True
            in_blossom[base[match[v]]] = True
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    def find_augmenting(root: int) -> bool:
        used = [False] * n
        for i in range(n):
            parent[i] = -1
            base[i] = i
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in g.adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    # odd cycle: contract the blossom through its base
                    cur_base = lca(v, to)
                    in_blossom = [False] * n
                    mark_path(v, cur_base, to, in_blossom)
                    mark_path(to, cur_base, v, in_blossom)
                    for i in range(n):
                        if in_blossom[base[i]]:
                            base[i] = cur_base
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        u = to
                        while u != -1:
                            pv = parent[u]
                            next_u = match[pv]
                            match[u] = pv
                            match[pv] = u
                            u = next_u
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for v in range(n):
        if match[v] == -1:
            find_augmenting(v)
    return {(u, match[u]) for u in range(n) if match[u] > u}


def matching_size(g: Graph) -> int:
    return len(maximum_matching(g))
