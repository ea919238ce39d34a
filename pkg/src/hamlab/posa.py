"""Rotation-extension machinery: oriented paths, rotation walks, endpoint
permutations, the Hamilton cycle search, and edge-disjoint packing.

A rotation replaces a path (v_0..v_l) plus chord {v_l, v_i} by the path
(v_0..v_i, v_l..v_{i+1}).  The search extends greedily, closes or reopens
cycles, and otherwise rotates at both endpoints under a step budget; a
returned cycle is always verified, so failures are only ever inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .graphs import EXACT_SK_CAP, Graph, KGraph, is_certificate_for_a_k
from .matching import maximum_matching
from .rng import stream

__all__ = [
    "OrientedPath",
    "rotate",
    "path_after_walk",
    "is_rotation_walk",
    "enumerate_rotation_walks",
    "rotation_targets",
    "rotation_extend",
    "tau_sequence",
    "tau_pair",
    "is_compatible_pair",
    "rotate_against",
    "HamiltonSearchResult",
    "posa_hamilton_search",
    "exact_hamilton_cycle",
    "EXACT_HAMILTON_CAP",
    "rotation_endpoint_closure",
    "PackResult",
    "pack_a_k",
    "cycle_edges",
]

EXACT_HAMILTON_CAP = 18

Bottom = None  # the degenerate tau value


class OrientedPath:
    """A directed simple path with the induced total vertex order.

    On-path vertices come first in path order; off-path vertices follow,
    ordered by vertex index (a fixed arbitrary completion).
    """

    def __init__(self, vertices: Sequence[int], n: int):
        verts = list(vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("path repeats a vertex")
        if any(not (0 <= v < n) for v in verts):
            raise ValueError("path vertex out of range")
        self.vertices = verts
        self.n = n
        self.position = {v: i for i, v in enumerate(verts)}

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def length(self) -> int:
        """Number of edges."""
        return len(self.vertices) - 1

    def contains(self, v: int) -> bool:
        return v in self.position

    def order_key(self, v: int) -> int:
        """Rank of v in the total order: path position, then off-path index."""
        pos = self.position.get(v)
        return pos if pos is not None else len(self.vertices) + v

    def edges(self) -> set[tuple[int, int]]:
        return {
            (min(a, b), max(a, b))
            for a, b in zip(self.vertices, self.vertices[1:])
        }

    def path_neighbors(self, vs: Iterable[int]) -> set[int]:
        """N_P(A): on-path neighbors of A, excluding A itself."""
        a = set(vs)
        out: set[int] = set()
        for v in a:
            pos = self.position.get(v)
            if pos is None:
                continue
            if pos > 0:
                out.add(self.vertices[pos - 1])
            if pos < len(self.vertices) - 1:
                out.add(self.vertices[pos + 1])
        return out - a

    def path_distance(self, v: int, targets: Iterable[int]) -> int:
        """min |pos(v) - pos(t)| over on-path targets; large when v off path."""
        pos = self.position.get(v)
        if pos is None:
            return len(self.vertices) + self.n
        best = len(self.vertices) + self.n
        for t in targets:
            tp = self.position.get(t)
            if tp is not None:
                best = min(best, abs(pos - tp))
        return best

    def __repr__(self) -> str:  # pragma: no cover
        return f"OrientedPath({self.vertices})"


def rotate(p: OrientedPath, pivot: tuple[int, int], ambient: Graph) -> OrientedPath:
    """Rotation with chord {end, v_i}: (v_0..v_i, v_l..v_{i+1}).

    Requires 0 < i < l-1 and the chord present in the ambient graph.
    """
    a, b = pivot
    if a == p.end:
        a, b = b, a
    if b != p.end:
        raise ValueError("pivot edge must touch the path endpoint")
    if not ambient.has_edge(a, b):
        raise ValueError("pivot edge is not in the ambient graph")
    i = p.position.get(a)
    if i is None:
        raise ValueError("pivot vertex must lie on the path")
    ell = p.length
    if not (0 < i < ell - 1):
        raise ValueError("pivot adjacent to an endpoint is a no-op rotation")
    verts = p.vertices[: i + 1] + p.vertices[: i: -1]
    return OrientedPath(verts, p.n)


def _walk_edges(walk: Sequence[int]) -> list[tuple[int, int]]:
    return [
        (min(a, b), max(a, b)) for a, b in zip(walk, walk[1:])
    ]


def path_after_walk(p: OrientedPath, walk: Sequence[int]) -> OrientedPath | None:
    """P (symmetric-difference) walk-edges, when the result is a path from
    P's start; None otherwise."""
    edges = set(p.edges())
    for e in _walk_edges(walk):
        if e in edges:
            edges.remove(e)
        else:
            edges.add(e)
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(len(nb) > 2 for nb in adj.values()):
        return None
    start = p.start
    if start not in adj or len(adj[start]) != 1:
        return None
    seq = [start]
    prev = None
    cur = start
    while True:
        nxts = [w for w in adj[cur] if w != prev]
        if not nxts:
            break
        if len(nxts) > 1:
            return None
        prev, cur = cur, nxts[0]
        if cur in set(seq):
            return None
        seq.append(cur)
    if len(seq) != len(adj):
        return None
    return OrientedPath(seq, p.n)


def is_rotation_walk(p: OrientedPath, walk: Sequence[int]) -> bool:
    """Even-length, non-repeating, strictly P-alternating, starts at P's end,
    avoids P's start, and the symmetric difference is again a path."""
    if len(walk) % 2 == 0:  # odd number of vertices = even edge count
        return False
    if walk[0] != p.end or p.start in walk:
        return False
    if len(set(walk)) != len(walk):
        return False
    pe = p.edges()
    for j, e in enumerate(_walk_edges(walk)):
        on_p = e in pe
        if j % 2 == 1 and not on_p:
            return False
        if j % 2 == 0 and on_p:
            return False
    return path_after_walk(p, walk) is not None


def enumerate_rotation_walks(
    p: OrientedPath,
    length: int,
    free_edge: Callable[[int, int], bool],
) -> list[tuple[int, ...]]:
    """All rotation walks of the given even length from P's end; free steps
    are restricted by the predicate (typically ambient-graph membership)."""
    if length % 2 != 0:
        raise ValueError("rotation walks have even length")
    pe = p.edges()
    out: list[tuple[int, ...]] = []

    def extend(walk: list[int]) -> None:
        if len(walk) - 1 == length:
            if path_after_walk(p, walk) is not None:
                out.append(tuple(walk))
            return
        step = len(walk) - 1  # index of the next edge
        cur = walk[-1]
        if step % 2 == 0:
            cands = [
                v
                for v in range(p.n)
                if v != cur
                and free_edge(cur, v)
                and (min(cur, v), max(cur, v)) not in pe
            ]
        else:
            pos = p.position.get(cur)
            cands = []
            if pos is not None:
                if pos > 0:
                    cands.append(p.vertices[pos - 1])
                if pos < len(p.vertices) - 1:
                    cands.append(p.vertices[pos + 1])
        for v in cands:
            if v in walk or v == p.start:
                continue
            # no prefix pruning: a rotation walk's even prefixes need not be
            # rotation walks themselves (wrong-side pivots can resolve later)
            walk.append(v)
            extend(walk)
            walk.pop()

    extend([p.end])
    return out


def rotation_targets(p: OrientedPath, walk: Sequence[int]) -> list[int]:
    """Vertices v that extend an even rotation walk to an odd one: on P, at
    P-distance > 1 from the walk and from P's start."""
    anchors = set(walk) | {p.start}
    out = []
    for v in p.vertices:
        if v in anchors:
            continue
        if p.path_distance(v, anchors) > 1:
            out.append(v)
    return out


def rotation_extend(p: OrientedPath, walk: Sequence[int]) -> tuple[int, ...]:
    """The unique completion of an odd rotation walk: append the successor of
    its final vertex along P-after-prefix, directed away from P's start."""
    if len(walk) % 2 != 0:  # odd edge count = even vertex count
        raise ValueError("rotation_extend needs an odd-length walk")
    prefix, u = list(walk[:-1]), walk[-1]
    q = path_after_walk(p, prefix)
    if q is None:
        raise ValueError("walk prefix is not a rotation walk")
    pos = q.position.get(u)
    if pos is None or pos >= len(q.vertices) - 1:
        raise ValueError("final vertex admits no successor away from the start")
    v = q.vertices[pos + 1]
    if v not in p.path_neighbors([u]):
        raise ValueError("successor is not a path neighbor; walk was degenerate")
    return tuple(walk) + (v,)


# -- endpoint permutations ----------------------------------------------------


def tau_sequence(seq: Sequence[int], p: OrientedPath) -> tuple[int, ...] | None:
    """Permutation of [len(seq)] reading the labels in path order, or the
    degenerate value when the sequence repeats or leaves the path."""
    if len(set(seq)) != len(seq):
        return Bottom
    if any(not p.contains(v) for v in seq):
        return Bottom
    order = sorted(range(len(seq)), key=lambda i: p.order_key(seq[i]))
    return tuple(i + 1 for i in order)


def tau_pair(
    x_walk: Sequence[int], y_walk: Sequence[int], p: OrientedPath
) -> tuple[int, ...] | None:
    """tau(X, Y) for walks anchored at P's two endpoints.

    Degenerate when any vertex repeats across the two walks (anchors
    included), when an interior vertex leaves P, or when X has odd length
    and its final vertex is a path neighbor of Y.
    """
    if x_walk[0] != p.start or y_walk[0] != p.end:
        raise ValueError("walks must be anchored at the path endpoints")
    combined = list(x_walk) + list(y_walk)
    if len(set(combined)) != len(combined):
        return Bottom
    if (len(x_walk) - 1) % 2 == 1 and x_walk[-1] in p.path_neighbors(y_walk):
        return Bottom
    return tau_sequence(list(y_walk[1:]) + list(x_walk[1:]), p)


def is_compatible_pair(
    x_walk: Sequence[int], y_walk: Sequence[int], p: OrientedPath
) -> bool:
    """X is a rotation walk of P-after-Y, the two walks share no vertex, and
    an odd-length X ends at P-distance > 1 from Y."""
    if not is_rotation_walk(p, y_walk):
        return False
    combined = list(x_walk) + list(y_walk)
    if len(set(combined)) != len(combined):
        return False
    q = path_after_walk(p, y_walk)
    if q is None:
        return False
    x_len = len(x_walk) - 1
    if x_len % 2 == 0:
        if not is_rotation_walk(_reverse_view(q), x_walk):
            return False
    else:
        if not is_rotation_walk(_reverse_view(q), list(x_walk[:-1])):
            return False
        u = x_walk[-1]
        if not q.contains(u) or u in x_walk[:-1]:
            return False
        if p.path_distance(u, y_walk) <= 1:
            return False
    return True


def _reverse_view(p: OrientedPath) -> OrientedPath:
    return OrientedPath(list(reversed(p.vertices)), p.n)


def rotate_against(
    x_walk: Sequence[int], y_walk: Sequence[int], p: OrientedPath
) -> tuple[int, ...]:
    """r_{P,Y}(X): extend the odd walk X by its successor along P-after-Y."""
    q = path_after_walk(p, y_walk)
    if q is None:
        raise ValueError("Y is not a rotation walk for P")
    return rotation_extend(_reverse_view(q), x_walk)


# -- Hamilton search ----------------------------------------------------------


@dataclass
class HamiltonSearchResult:
    cycle: list[int] | None
    best_path: list[int]
    rotations: int
    restarts: int
    steps: int

    @property
    def found(self) -> bool:
        return self.cycle is not None


def _verify_cycle(g: Graph, cycle: list[int]) -> bool:
    if len(cycle) != g.n or len(set(cycle)) != g.n:
        return False
    return all(
        g.has_edge(cycle[i], cycle[(i + 1) % g.n]) for i in range(g.n)
    )


def posa_hamilton_search(
    g: Graph,
    seed: int = 0,
    max_restarts: int = 50,
    steps_per_restart: int | None = None,
) -> HamiltonSearchResult:
    """Randomized rotation-extension search for a Hamilton cycle.

    Extension first, then cycle closing/reopening, then a rotation at the
    active endpoint; random path reversals keep both endpoints in play.  Any
    returned cycle is verified vertex by vertex.
    """
    n = g.n
    if n <= 2:
        return HamiltonSearchResult(None, list(range(n)), 0, 0, 0)
    if steps_per_restart is None:
        steps_per_restart = n * n
    adj_arr = [np.fromiter(sorted(g.adj[u]), dtype=np.int64) for u in range(n)]
    best_path: list[int] = []
    rotations = 0
    total_steps = 0

    for restart in range(max_restarts):
        rng = stream(seed, restart)
        buf = np.empty(n, dtype=np.int64)
        pos = np.full(n, -1, dtype=np.int64)
        start = int(rng.integers(n))
        buf[0] = start
        pos[start] = 0
        length = 1
        steps = 0
        while steps < steps_per_restart:
            steps += 1
            total_steps += 1
            tail = int(buf[length - 1])
            nbrs = adj_arr[tail]
            fresh = nbrs[pos[nbrs] < 0]
            if fresh.size:
                v = int(fresh[rng.integers(fresh.size)])
                buf[length] = v
                pos[v] = length
                length += 1
                continue
            head = int(buf[0])
            closes = g.has_edge(tail, head)
            if closes and length == n:
                cycle = buf[:n].tolist()
                if _verify_cycle(g, cycle):
                    return HamiltonSearchResult(
                        cycle, cycle, rotations, restart + 1, total_steps
                    )
            if closes and length < n:
                # reopen: any edge from the cycle to an unused vertex yields
                # a longer path
                reopened = False
                for j in range(length):
                    vj = int(buf[j])
                    out = adj_arr[vj][pos[adj_arr[vj]] < 0]
                    if out.size:
                        w = int(out[rng.integers(out.size)])
                        # new path: w, c_j, c_{j-1}, .., c_0, c_{L-1}, .., c_{j+1}
                        rolled = np.concatenate(
                            [buf[j + 1: length], buf[: j + 1]]
                        )[::-1]
                        buf[0] = w
                        buf[1: length + 1] = rolled
                        length += 1
                        pos[buf[:length]] = np.arange(length)
                        reopened = True
                        break
                if reopened:
                    continue
            if length >= 3 and rng.random() < 0.5:
                # reverse so the other endpoint becomes active
                buf[:length] = buf[:length][::-1]
                pos[buf[:length]] = np.arange(length)
                tail = int(buf[length - 1])
                nbrs = adj_arr[tail]
            on_path = nbrs[(pos[nbrs] >= 1) & (pos[nbrs] <= length - 3)]
            if on_path.size == 0:
                break  # endpoint is stuck; restart
            pivot = int(on_path[rng.integers(on_path.size)])
            i = int(pos[pivot])
            buf[i + 1: length] = buf[i + 1: length][::-1]
            pos[buf[i + 1: length]] = np.arange(i + 1, length)
            rotations += 1
        if length > len(best_path):
            best_path = buf[:length].tolist()
    return HamiltonSearchResult(None, best_path, rotations, max_restarts, total_steps)


def exact_hamilton_cycle(g: Graph) -> list[int] | None:
    """Backtracking Hamilton cycle decision, capped at n = 18.

    Anchored at vertex 0; prunes when an unvisited vertex loses all its
    available neighbors.
    """
    n = g.n
    if n > EXACT_HAMILTON_CAP:
        raise ValueError(f"exact search capped at n={EXACT_HAMILTON_CAP}")
    if n < 3:
        return None
    if g.min_degree() < 2 or not g.connected():
        return None
    adj_mask = [sum(1 << v for v in g.adj[u]) for u in range(n)]
    full = (1 << n) - 1
    path = [0]

    def dfs(v: int, visited: int) -> list[int] | None:
        if visited == full:
            return list(path) if (adj_mask[v] >> 0) & 1 else None
        free = ~visited & full
        # prune: any unvisited vertex with no available continuation
        rem = free
        while rem:
            u = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            if adj_mask[u] & (free | (1 << v) | 1) == 0:
                return None
        cand = adj_mask[v] & free
        while cand:
            w = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            path.append(w)
            res = dfs(w, visited | (1 << w))
            if res is not None:
                return res
            path.pop()
        return None

    return dfs(0, 1)


def rotation_endpoint_closure(
    g: Graph, path: Sequence[int], max_states: int = 200_000
) -> tuple[set[int], bool]:
    """Endpoints reachable from the path by iterated rotations with the first
    vertex fixed; (endpoints, truncated flag)."""
    start = tuple(path)
    seen = {start}
    endpoints = {start[-1]}
    queue = [start]
    truncated = False
    while queue:
        cur = queue.pop()
        ell = len(cur) - 1
        tail = cur[-1]
        pos = {v: i for i, v in enumerate(cur)}
        for v in g.adj[tail]:
            i = pos.get(v)
            if i is None or not (0 < i < ell - 1):
                continue
            new = cur[: i + 1] + cur[: i: -1]
            if new in seen:
                continue
            if len(seen) >= max_states:
                truncated = True
                continue
            seen.add(new)
            endpoints.add(new[-1])
            queue.append(new)
    return endpoints, truncated


# -- packing -------------------------------------------------------------------


@dataclass
class PackResult:
    certificate: KGraph | None
    failed_stage: str | None
    attempts: int

    @property
    def found(self) -> bool:
        return self.certificate is not None


def cycle_edges(cycle: Sequence[int]) -> frozenset[tuple[int, int]]:
    n = len(cycle)
    return frozenset(
        (min(cycle[i], cycle[(i + 1) % n]), max(cycle[i], cycle[(i + 1) % n]))
        for i in range(n)
    )


def pack_a_k(
    g: Graph,
    k: int,
    seed: int = 0,
    max_attempts: int = 5,
    max_restarts: int = 50,
    steps_per_restart: int | None = None,
) -> PackResult:
    """Greedy A_k certification: peel floor(k/2) Hamilton cycles, then a
    floor(n/2) matching for odd k; whole-pipeline restarts on failure.

    The certificate is validated before return, so a found result is always
    sound regardless of budget.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    failed_stage = None
    for attempt in range(max_attempts):
        work = g
        components: list[frozenset[tuple[int, int]]] = []
        ok = True
        for stage in range(k // 2):
            res = posa_hamilton_search(
                work,
                seed=stream(seed, attempt, stage).integers(2**62),
                max_restarts=max_restarts,
                steps_per_restart=steps_per_restart,
            )
            cycle = res.cycle
            if cycle is None and work.n <= EXACT_HAMILTON_CAP:
                cycle = exact_hamilton_cycle(work)
            if cycle is None:
                ok = False
                failed_stage = f"cycle {stage}"
                break
            components.append(cycle_edges(cycle))
            work = work.without_edges(components[-1])
        matching = None
        if ok and k % 2 == 1:
            m = maximum_matching(work)
            if len(m) < g.n // 2:
                ok = False
                failed_stage = "matching"
            else:
                matching = frozenset(m)
        if ok:
            cert = KGraph(k=k, components=tuple(components), matching=matching)
            accepted, problems = is_certificate_for_a_k(g, cert, k)
            if not accepted:  # pragma: no cover - guarded by construction
                raise AssertionError(f"internal packing error: {problems}")
            return PackResult(cert, None, attempt + 1)
    return PackResult(None, failed_stage, max_attempts)
