"""Graph snapshots, k-graph certificates, and sparse-expander checks.

A k-graph is an edge-disjoint union of floor(k/2) paths-or-cycles plus a
matching when k is odd; s_k(G) is the largest edge count of a k-graph inside
G, and G has property A_k exactly when s_k(G) = floor(k n / 2).  This module
provides the graph container, certificate validation, exact brute-force s_k
oracles for small n, and the expansion / light-tail checks that define the
sparse-expander class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ratematrix import RateMatrix

__all__ = [
    "Graph",
    "KGraph",
    "ExpansionReport",
    "classify_component",
    "is_certificate_for_a_k",
    "exact_s_k",
    "expansion_check",
    "light_tail_check",
    "s_theta",
    "se_class_check",
    "load_graph",
    "dump_graph",
    "load_kgraph",
    "dump_kgraph",
]

Edge = tuple[int, int]

EXACT_SK_CAP = 12
EXHAUSTIVE_EXPANSION_CAP = 22


def _canon(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph on vertices 0..n-1 with set adjacency.

    Treated as immutable once built; derive modified copies through
    ``with_edges`` / ``without_edges``.
    """

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.m = 0
        for u, v in edges:
            self._add(u, v)

    def _add(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError(f"self-loop at {u}")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u}, {v}) out of range")
        if v not in self.adj[u]:
            self.adj[u].add(v)
            self.adj[v].add(u)
            self.m += 1

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self.adj], dtype=int)

    def min_degree(self) -> int:
        return min(len(s) for s in self.adj)

    def max_degree(self) -> int:
        return max(len(s) for s in self.adj)

    def edges(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def neighborhood(self, vertices: Iterable[int]) -> set[int]:
        """N(A): neighbors of A outside A."""
        a = set(vertices)
        out: set[int] = set()
        for u in a:
            out.update(self.adj[u])
        return out - a

    def closed_neighborhood(self, vertices: Iterable[int]) -> set[int]:
        a = set(vertices)
        return a | self.neighborhood(a)

    def with_edges(self, edges: Iterable[Edge]) -> "Graph":
        return Graph(self.n, list(self.edges()) + list(edges))

    def without_edges(self, edges: Iterable[Edge]) -> "Graph":
        drop = {_canon(u, v) for u, v in edges}
        return Graph(self.n, [e for e in self.edges() if e not in drop])

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n != other.n:
            return False
        return all(other.has_edge(u, v) for u, v in self.edges())

    def connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def copy(self) -> "Graph":
        return Graph(self.n, self.edges())

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(n={self.n}, m={self.m})"


def classify_component(edges: Iterable[Edge]) -> str:
    """'empty', 'path' or 'cycle' if the edge set is one; raises otherwise."""
    es = [_canon(u, v) for u, v in edges]
    if not es:
        return "empty"
    if len(set(es)) != len(es):
        raise ValueError("repeated edge in component")
    deg: dict[int, int] = {}
    for u, v in es:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if any(d > 2 for d in deg.values()):
        raise ValueError("component has a vertex of degree > 2")
    verts = set(deg)
    # connectivity over the component's own vertices
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for u, v in es:
        adj[u].append(v)
        adj[v].append(u)
    start = next(iter(verts))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if seen != verts:
        raise ValueError("component is disconnected")
    ones = sum(1 for d in deg.values() if d == 1)
    if ones == 2 and len(es) == len(verts) - 1:
        return "path"
    if ones == 0 and len(es) == len(verts):
        return "cycle"
    raise ValueError("component is neither a path nor a cycle")


@dataclass(frozen=True)
class KGraph:
    """Candidate k-graph: floor(k/2) path/cycle edge sets plus a matching.

    The matching slot is present exactly when k is odd.
    """

    k: int
    components: tuple[frozenset[Edge], ...]
    matching: frozenset[Edge] | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if len(self.components) != self.k // 2:
            raise ValueError(f"expected {self.k // 2} path/cycle components")
        if (self.matching is not None) != (self.k % 2 == 1):
            raise ValueError("matching present iff k is odd")

    def all_edge_sets(self) -> list[frozenset[Edge]]:
        sets = list(self.components)
        if self.matching is not None:
            sets.append(self.matching)
        return sets

    def size(self) -> int:
        return sum(len(s) for s in self.all_edge_sets())

    def violations(self) -> list[str]:
        """Structural problems, empty when this is a valid k-graph."""
        problems: list[str] = []
        for i, comp in enumerate(self.components):
            try:
                classify_component(comp)
            except ValueError as exc:
                problems.append(f"component {i}: {exc}")
        if self.matching is not None:
            deg: dict[int, int] = {}
            for u, v in self.matching:
                if u == v:
                    problems.append("matching contains a self-loop")
                    continue
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
            if any(d > 1 for d in deg.values()):
                problems.append("matching has a vertex of degree > 1")
        sets = self.all_edge_sets()
        used: set[Edge] = set()
        for s in sets:
            canon = {_canon(u, v) for u, v in s}
            if canon & used:
                problems.append("edge sets are not pairwise disjoint")
                break
            used |= canon
        return problems

    def is_valid(self) -> bool:
        return not self.violations()


def is_certificate_for_a_k(g: Graph, f: KGraph, k: int) -> tuple[bool, list[str]]:
    """Accept f as an A_k certificate for g; itemize every violation.

    Accepted iff f is a valid k-graph inside g of full size floor(kn/2):
    every path/cycle component must then be a Hamilton cycle, and the
    matching (odd k) must have floor(n/2) edges.
    """
    problems = list(f.violations())
    if f.k != k:
        problems.append(f"certificate is for k={f.k}, not k={k}")
    for i, comp in enumerate(f.components):
        try:
            kind = classify_component(comp)
        except ValueError:
            continue  # already reported by violations()
        if kind != "cycle" or len(comp) != g.n:
            problems.append(f"component {i} is not a Hamilton cycle")
    if f.matching is not None and len(f.matching) != g.n // 2:
        problems.append(
            f"matching has {len(f.matching)} edges, needs {g.n // 2}"
        )
    for s in f.all_edge_sets():
        for u, v in s:
            if not g.has_edge(u, v):
                problems.append(f"edge ({u}, {v}) is not in the host graph")
    want = (k * g.n) // 2
    if f.size() != want:
        problems.append(f"certificate has {f.size()} edges, needs {want}")
    return (not problems, problems)


# -- exact s_k oracle (small n) ----------------------------------------------


def _path_cycle_dp(n: int, adj_mask: list[int]) -> tuple[int, int]:
    """(longest path edges, longest cycle edges) via subset DP.

    ends[mask] = bitmask of vertices that can end a simple path covering mask.
    Cycles are counted once by anchoring at the lowest vertex of the mask.
    """
    size = 1 << n
    ends = [0] * size
    cyc_ends = [0] * size  # paths forced to start at the lowest bit of mask
    for v in range(n):
        ends[1 << v] = 1 << v
        cyc_ends[1 << v] = 1 << v
    best_path = 0
    best_cycle = 0
    for mask in range(1, size):
        e = ends[mask]
        if e:
            popcnt = mask.bit_count()
            if popcnt - 1 > best_path:
                best_path = popcnt - 1
            rem = e
            while rem:
                v = (rem & -rem).bit_length() - 1
                rem &= rem - 1
                nxt = adj_mask[v] & ~mask
                while nxt:
                    w = (nxt & -nxt).bit_length() - 1
                    nxt &= nxt - 1
                    ends[mask | (1 << w)] |= 1 << w
        ce = cyc_ends[mask]
        if ce:
            popcnt = mask.bit_count()
            start = (mask & -mask).bit_length() - 1
            if popcnt >= 3 and (adj_mask[start] & ce) and popcnt > best_cycle:
                best_cycle = popcnt
            rem = ce
            while rem:
                v = (rem & -rem).bit_length() - 1
                rem &= rem - 1
                nxt = adj_mask[v] & ~mask & ~((1 << start) - 1)
                while nxt:
                    w = (nxt & -nxt).bit_length() - 1
                    nxt &= nxt - 1
                    cyc_ends[mask | (1 << w)] |= 1 << w
    return best_path, best_cycle


def _max_matching_bitmask(edges: Sequence[Edge], n: int) -> int:
    """Exact maximum matching size by branching on the lowest uncovered vertex."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)

    def rec(free_mask: int) -> int:
        while free_mask:
            u = (free_mask & -free_mask).bit_length() - 1
            cands = [v for v in adj[u] if free_mask >> v & 1]
            if not cands:
                free_mask &= ~(1 << u)
                continue
            best = rec(free_mask & ~(1 << u))  # leave u uncovered
            base = free_mask & ~(1 << u)
            for v in cands:
                best = max(best, 1 + rec(base & ~(1 << v)))
            return best
        return 0

    return rec((1 << n) - 1)


def _enumerate_paths_cycles(g: Graph) -> list[frozenset[Edge]]:
    """Every nonempty path and cycle edge set of g (tiny n only)."""
    out: list[frozenset[Edge]] = []
    n = g.n
    # paths: extend sequences, dedup by keeping first endpoint < last endpoint
    stack: list[list[int]] = [[v] for v in range(n)]
    while stack:
        seq = stack.pop()
        last = seq[-1]
        for w in sorted(g.adj[last]):
            if w in seq:
                continue
            ext = seq + [w]
            if ext[0] < ext[-1]:
                out.append(frozenset(_canon(a, b) for a, b in zip(ext, ext[1:])))
            stack.append(ext)
    # cycles: anchor at the minimum vertex, orient by second < last
    def cycles_from(start: int) -> None:
        path = [start]

        def extend() -> None:
            last = path[-1]
            for w in sorted(g.adj[last]):
                if w == start and len(path) >= 3 and path[1] < path[-1]:
                    cyc = path + [start]
                    out.append(frozenset(_canon(a, b) for a, b in zip(cyc, cyc[1:])))
                elif w not in path and w > start:
                    path.append(w)
                    extend()
                    path.pop()

        extend()

    for s in range(n):
        cycles_from(s)
    return out


def exact_s_k(g: Graph, k: int) -> int:
    """Brute-force s_k(G); hard-capped at n = 12.

    k=1 and k=2 run dedicated exact searches; larger k peels one path/cycle
    (even k) or reduces through matchings (odd k) with pruning.
    """
    if g.n > EXACT_SK_CAP:
        raise ValueError(f"exact_s_k capped at n={EXACT_SK_CAP}")
    if k < 1:
        raise ValueError("k must be at least 1")
    return _exact_s_k_rec(g, k, {})


def _matchings_upto(edges: list[Edge]) -> list[list[Edge]]:
    """All matchings of the edge list (including the empty one)."""
    out: list[list[Edge]] = []

    def rec(i: int, used: set[int], cur: list[Edge]) -> None:
        out.append(list(cur))
        for j in range(i, len(edges)):
            u, v = edges[j]
            if u in used or v in used:
                continue
            cur.append(edges[j])
            used |= {u, v}
            rec(j + 1, used, cur)
            cur.pop()
            used -= {u, v}

    rec(0, set(), [])
    return out


def _exact_s_k_rec(g: Graph, k: int, memo: dict) -> int:
    key = (frozenset(g.edges()), k)
    if key in memo:
        return memo[key]
    if k == 1:
        val = _max_matching_bitmask(g.edges(), g.n)
    elif k == 2:
        adj_mask = [sum(1 << v for v in g.adj[u]) for u in range(g.n)]
        best_path, best_cycle = _path_cycle_dp(g.n, adj_mask)
        val = max(best_path, best_cycle)
    elif k % 2 == 1:
        best = 0
        for matching in _matchings_upto(g.edges()):
            bound = len(matching) + min((k - 1) * g.n // 2, g.m - len(matching))
            if bound <= best:
                continue
            rest = g.without_edges(matching) if matching else g
            best = max(best, len(matching) + _exact_s_k_rec(rest, k - 1, memo))
        val = best
    else:
        candidates = _enumerate_paths_cycles(g)
        candidates.sort(key=len, reverse=True)
        best = _exact_s_k_rec(g, k - 2, memo)  # empty first component
        for comp in candidates:
            bound = len(comp) + min((k - 2) * g.n // 2, g.m - len(comp))
            if bound <= best:
                continue
            rest = g.without_edges(comp)
            best = max(best, len(comp) + _exact_s_k_rec(rest, k - 2, memo))
        val = best
    memo[key] = val
    return val


# -- expansion and light tail --------------------------------------------------


@dataclass(frozen=True)
class ExpansionReport:
    beta: float
    k: int
    witness: frozenset[int] | None
    method: str  # "exhaustive" | "sampled"

    @property
    def passed(self) -> bool:
        return self.witness is None


def _exhaustive_expansion(g: Graph, k: int, beta: float) -> frozenset[int] | None:
    n = g.n
    limit = beta * n
    adj_mask = [sum(1 << v for v in g.adj[u]) for u in range(n)]
    for mask in range(1, 1 << n):
        size = mask.bit_count()
        if size >= limit:
            continue
        nb = 0
        rem = mask
        while rem:
            v = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            nb |= adj_mask[v]
        nb &= ~mask
        if nb.bit_count() < k * size:
            return frozenset(v for v in range(n) if mask >> v & 1)
    return None


def _sampled_expansion(
    g: Graph, k: int, beta: float, trials: int, rng: np.random.Generator
) -> frozenset[int] | None:
    n = g.n
    limit = beta * n
    # singletons and pairs exactly: a failing set of size 1 or 2 forces every
    # member's degree below k|A|+|A|, so the degree prefilter loses nothing.
    if 1 < limit:
        for u in range(n):
            if g.degree(u) < k:
                return frozenset([u])
    if 2 < limit:
        small = [u for u in range(n) if g.degree(u) <= 2 * k]
        for i, u in enumerate(small):
            for v in small[i + 1:]:
                a = {u, v}
                if len(g.neighborhood(a)) < 2 * k:
                    return frozenset(a)
    max_size = int(np.ceil(limit)) - 1
    if max_size < 1:
        return None
    for _ in range(trials):
        target = int(rng.integers(1, max_size + 1))
        start = int(rng.integers(0, n))
        grown = {start}
        frontier = list(g.adj[start])
        while len(grown) < target and frontier:
            idx = int(rng.integers(0, len(frontier)))
            v = frontier.pop(idx)
            if v in grown:
                continue
            grown.add(v)
            frontier.extend(g.adj[v] - grown)
        if len(grown) < limit and len(g.neighborhood(grown)) < k * len(grown):
            return frozenset(grown)
    return None


def expansion_check(
    g: Graph,
    k: int,
    beta: float,
    trials: int = 100_000,
    seed: int = 0,
) -> ExpansionReport:
    """Does every A with |A| < beta n satisfy |N(A)| >= k |A|?

    Exhaustive over all subsets up to n=22, otherwise randomized search over
    BFS-grown connected sets (expansion failures concentrate on connected A)
    plus exact singleton and pair scans.
    """
    if g.n <= EXHAUSTIVE_EXPANSION_CAP:
        witness = _exhaustive_expansion(g, k, beta)
        method = "exhaustive"
    else:
        from .rng import stream

        witness = _sampled_expansion(g, k, beta, trials, stream(seed, 0))
        method = "sampled"
    return ExpansionReport(beta=beta, k=k, witness=witness, method=method)


def s_theta(g: Graph, r: RateMatrix, theta: float) -> set[int]:
    """Heavy set: vertices with d_G >= theta or d_R >= theta * min d_R."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    d = r.d_min
    return {
        u
        for u in range(g.n)
        if g.degree(u) >= theta or r.degree(u) >= theta * d
    }


def light_tail_check(g: Graph, r: RateMatrix, theta: float) -> tuple[set[int], float]:
    """(S_theta, |closed neighborhood of S_theta| / n)."""
    s = s_theta(g, r, theta)
    if not s:
        return s, 0.0
    return s, len(g.closed_neighborhood(s)) / g.n


def se_class_check(
    g: Graph,
    r: RateMatrix,
    k: int,
    beta: float,
    theta: float,
    light_tail_cap: float = 0.25,
    trials: int = 100_000,
    seed: int = 0,
) -> bool:
    """Sparse-expander verdict: expansion holds and the heavy tail is small.

    The light-tail condition is asymptotic (o(n)); at finite n it is cut at
    ``light_tail_cap``, an experiment knob.
    """
    report = expansion_check(g, k, beta, trials=trials, seed=seed)
    if not report.passed:
        return False
    _, frac = light_tail_check(g, r, theta)
    return frac <= light_tail_cap


# -- text I/O -----------------------------------------------------------------


def dump_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges())]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> Graph:
    lines = [ln for ln in (s.strip() for s in text.split("\n")) if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty graph file")
    n, m = (int(x) for x in lines[0].split())
    edges = []
    for ln in lines[1:]:
        u, v = (int(x) for x in ln.split())
        edges.append((u, v))
    if len(edges) != m:
        raise ValueError(f"header says {m} edges, found {len(edges)}")
    return Graph(n, edges)


def dump_kgraph(f: KGraph, n: int) -> str:
    lines = [f"kgraph k={f.k} n={n}"]
    for comp in f.components:
        kind = classify_component(comp) if comp else "empty"
        lines.append(f"component {kind} " + " ".join(f"{u}-{v}" for u, v in sorted(comp)))
    if f.matching is not None:
        lines.append("matching " + " ".join(f"{u}-{v}" for u, v in sorted(f.matching)))
    return "\n".join(lines) + "\n"


def load_kgraph(text: str) -> KGraph:
    lines = [ln for ln in (s.strip() for s in text.split("\n")) if ln]
    head = lines[0].split()
    if head[0] != "kgraph":
        raise ValueError("not a kgraph block")
    k = int(head[1].split("=")[1])
    comps: list[frozenset[Edge]] = []
    matching: frozenset[Edge] | None = None

    def parse_edges(tokens: list[str]) -> frozenset[Edge]:
        out = set()
        for tok in tokens:
            u, v = (int(x) for x in tok.split("-"))
            out.add(_canon(u, v))
        return frozenset(out)

    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "component":
            comps.append(parse_edges(parts[2:]))
        elif parts[0] == "matching":
            matching = parse_edges(parts[1:])
        else:
            raise ValueError(f"unknown block line: {ln}")
    return KGraph(k=k, components=tuple(comps), matching=matching)
