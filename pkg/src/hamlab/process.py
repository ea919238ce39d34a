"""The exponential-clock random graph process and its derived subgraphs.

Every pair {u, v} with R(u, v) > 0 receives an independent exponential
arrival time E(u, v) with rate R(u, v); the process at time t keeps the pairs
that have arrived.  On top of one clock assignment this module computes
hitting times of minimum degree k, the degree-truncated subgraph H (each
vertex keeps its first D incident arrivals), the small-vertex set S(t), the
sandwich graph between two times, the directed-clock coupling with the
weighted D-out graph, and static inhomogeneous graph sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .ratematrix import RateMatrix
from .rng import stream

__all__ = [
    "ClockAssignment",
    "DirectedClockAssignment",
    "sample_clocks",
    "sample_directed_clocks",
    "coupling_check",
    "sample_d_out",
    "sample_static",
    "sample_gnp_edges",
    "degree_cdf",
    "dump_trajectory",
    "load_trajectory",
]


class ClockAssignment:
    """One realized trajectory: arrival times on the support of R."""

    def __init__(self, n: int, us: np.ndarray, vs: np.ndarray, times: np.ndarray, seed: int):
        self.n = n
        self.us = us
        self.vs = vs
        self.times = times
        self.seed = seed
        self._incident: list[np.ndarray] | None = None

    # sorted incident arrival times per vertex, built once on demand
    def _incident_times(self) -> list[np.ndarray]:
        if self._incident is None:
            ends = np.concatenate([self.us, self.vs])
            ts = np.concatenate([self.times, self.times])
            order = np.argsort(ends, kind="stable")
            ends = ends[order]
            ts = ts[order]
            bounds = np.searchsorted(ends, np.arange(self.n + 1))
            self._incident = [
                np.sort(ts[bounds[u]: bounds[u + 1]]) for u in range(self.n)
            ]
        return self._incident

    def pair_time(self, u: int, v: int) -> float:
        """E(u, v); infinity off the support of R."""
        a, b = (u, v) if u < v else (v, u)
        mask = (self.us == a) & (self.vs == b)
        idx = np.flatnonzero(mask)
        return float(self.times[idx[0]]) if idx.size else math.inf

    def time_to_degree(self, u: int, d: int) -> float:
        """T_d(u): the time at which u attains degree d."""
        if d < 1:
            raise ValueError("degree target must be at least 1")
        inc = self._incident_times()[u]
        return float(inc[d - 1]) if inc.size >= d else math.inf

    def degree_times(self, d: int) -> np.ndarray:
        inc = self._incident_times()
        return np.array(
            [inc[u][d - 1] if inc[u].size >= d else math.inf for u in range(self.n)]
        )

    def deficient_vertices(self, k: int) -> list[int]:
        inc = self._incident_times()
        return [u for u in range(self.n) if inc[u].size < k]

    def tau(self, k: int) -> float:
        """Hitting time of minimum degree k: max over u of the k-th arrival.

        Infinity (with deficient_vertices naming the culprits) when some
        vertex has fewer than k finite clocks.
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        return float(self.degree_times(k).max())

    def graph_at(self, t: float) -> Graph:
        if t < 0:
            raise ValueError("time must be nonnegative")
        mask = self.times <= t
        return Graph(self.n, zip(self.us[mask].tolist(), self.vs[mask].tolist()))

    def build_h(self, d_cap: int, tau: float) -> Graph:
        """Keep {u, v} iff it arrived by tau and within the first d_cap
        arrivals of at least one endpoint."""
        td = self.degree_times(d_cap)
        mask = (self.times <= tau) & (
            self.times <= np.maximum(td[self.us], td[self.vs])
        )
        return Graph(self.n, zip(self.us[mask].tolist(), self.vs[mask].tolist()))

    def small_set(self, t: float, d_cap: int) -> set[int]:
        """S(t): vertices still below degree d_cap at time t."""
        td = self.degree_times(d_cap)
        return {u for u in range(self.n) if td[u] > t}

    def g_star(self, d_cap: int, t0: float, t1: float, tau_k: float) -> Graph:
        """Edges by t1, plus edges by tau_k touching the slow set S(t0)."""
        if not (0 <= t0 <= t1):
            raise ValueError("need 0 <= t0 <= t1")
        slow = self.small_set(t0, d_cap)
        in_slow = np.zeros(self.n, dtype=bool)
        in_slow[list(slow)] = True
        mask = (self.times <= t1) | (
            (self.times <= tau_k) & (in_slow[self.us] | in_slow[self.vs])
        )
        return Graph(self.n, zip(self.us[mask].tolist(), self.vs[mask].tolist()))


def sample_clocks(r: RateMatrix, seed: int) -> ClockAssignment:
    """Independent Exp(R(u, v)) arrivals on the support of R; deterministic per seed."""
    us, vs, rates = r.support_pairs()
    rng = stream(seed)
    times = rng.exponential(1.0 / rates)
    return ClockAssignment(r.n, us, vs, times, seed)


class DirectedClockAssignment:
    """Ordered-pair clocks X(u, v) ~ Exp(R(u, v)/2), independent per direction."""

    def __init__(self, x: np.ndarray, seed: int):
        self.x = x
        self.n = x.shape[0]
        self.seed = seed

    def to_undirected(self) -> ClockAssignment:
        """E(u, v) = min{X(u, v), X(v, u)}, distributed as the plain clocks."""
        e = np.minimum(self.x, self.x.T)
        iu, iv = np.triu_indices(self.n, k=1)
        times = e[iu, iv]
        keep = np.isfinite(times)
        return ClockAssignment(self.n, iu[keep], iv[keep], times[keep], self.seed)

    def d_out_graphs(self, d_cap: int) -> tuple[Graph, Graph]:
        """H_D^+ (each u keeps its first D out-clocks) and H_D^- (in-clocks)."""
        t_plus = np.sort(self.x, axis=1)[:, d_cap - 1]
        t_minus = np.sort(self.x, axis=0)[d_cap - 1, :]
        plus = self.x <= t_plus[:, None]
        minus = self.x <= t_minus[None, :]
        edges_plus = [(min(u, v), max(u, v)) for u, v in zip(*np.nonzero(plus))]
        edges_minus = [(min(u, v), max(u, v)) for u, v in zip(*np.nonzero(minus))]
        return Graph(self.n, edges_plus), Graph(self.n, edges_minus)


def sample_directed_clocks(r: RateMatrix, seed: int) -> DirectedClockAssignment:
    rng = stream(seed)
    x = np.full((r.n, r.n), math.inf)
    pos = r.entries > 0
    x[pos] = rng.exponential(2.0 / r.entries[pos])
    return DirectedClockAssignment(x, seed)


def coupling_check(dclocks: DirectedClockAssignment, d_cap: int, k: int) -> bool:
    """H built from E = min(X, X^T) must sit inside H_D^+ union H_D^-."""
    clocks = dclocks.to_undirected()
    tau = clocks.tau(k)
    h = clocks.build_h(d_cap, tau)
    h_plus, h_minus = dclocks.d_out_graphs(d_cap)
    return all(
        h_plus.has_edge(u, v) or h_minus.has_edge(u, v) for u, v in h.edges()
    )


def sample_d_out(
    r: RateMatrix, d_cap: int, seed: int
) -> tuple[Graph, list[tuple[int, ...]]]:
    """R-weighted D-out graph: each u draws d_cap distinct partners without
    replacement, proportional to R(u, .); returns the undirected merge and
    the per-vertex orientation record."""
    rng = stream(seed)
    n = r.n
    choices: list[tuple[int, ...]] = []
    for u in range(n):
        w = r.entries[u].copy()
        if np.count_nonzero(w) < d_cap:
            raise ValueError(f"vertex {u} has fewer than {d_cap} positive-rate partners")
        picked = []
        for _ in range(d_cap):
            cum = np.cumsum(w)
            draw = rng.uniform(0.0, cum[-1])
            v = int(np.searchsorted(cum, draw, side="right"))
            v = min(v, n - 1)
            while w[v] == 0:  # guard against boundary rounding
                v = (v + 1) % n
            picked.append(v)
            w[v] = 0.0
        choices.append(tuple(picked))
    edges = {(min(u, v), max(u, v)) for u, vs in enumerate(choices) for v in vs}
    return Graph(n, edges), choices


def sample_gnp_edges(
    n: int, p: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform G(n, p) edge list for constant p, by pair-count + rejection.

    Draws m ~ Bin(C(n,2), p), then the first m distinct uniform pairs from an
    i.i.d. pair stream, which is exactly a uniform m-subset.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p))
    if m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    codes = np.empty(0, dtype=np.int64)
    while True:
        # count distinct codes in stream order
        uniq, first = np.unique(codes, return_index=True)
        if uniq.size >= m:
            order = np.sort(first)[:m]
            chosen = codes[order]
            break
        need = m - uniq.size
        batch = max(2 * need + 16, 64)
        a = rng.integers(0, n, size=batch)
        b = rng.integers(0, n, size=batch)
        keep = a != b
        a, b = a[keep], b[keep]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        codes = np.concatenate([codes, lo * n + hi])
    return chosen // n, chosen % n


def sample_static(p_matrix: np.ndarray, seed: int) -> Graph:
    """Independent edges with probabilities P(u, v); symmetric P in [0, 1]."""
    p = np.asarray(p_matrix, dtype=float)
    n = p.shape[0]
    if p.ndim != 2 or p.shape[1] != n:
        raise ValueError("P must be square")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("P entries must lie in [0, 1]")
    if not np.allclose(p, p.T, atol=0, rtol=0):
        raise ValueError("P must be symmetric")
    rng = stream(seed)
    iu, iv = np.triu_indices(n, k=1)
    probs = p[iu, iv]
    mask = rng.random(probs.shape) < probs
    return Graph(n, zip(iu[mask].tolist(), iv[mask].tolist()))


def degree_cdf(r: RateMatrix, u: int, t: float, d_cap: int) -> float:
    """Exact P(d_t(u) < d_cap): the degree is an independent Bernoulli sum
    with success probabilities 1 - exp(-t R(u, v))."""
    probs = 1.0 - np.exp(-t * np.delete(r.entries[u], u))
    state = np.zeros(d_cap)
    state[0] = 1.0
    for q in probs:
        if q == 0.0:
            continue
        shifted = np.concatenate([[0.0], state[:-1]])
        state = state * (1.0 - q) + shifted * q
    return float(state.sum())


# -- trajectory dump ----------------------------------------------------------
#
# Header "n D seed", then one line "u v E(u,v)" per finite clock, sorted by
# arrival time, 17-significant-digit floats.


def dump_trajectory(clocks: ClockAssignment, d_cap: int) -> str:
    order = np.argsort(clocks.times, kind="stable")
    lines = [f"{clocks.n} {d_cap} {clocks.seed}"]
    for i in order:
        lines.append(f"{clocks.us[i]} {clocks.vs[i]} {clocks.times[i]:.17g}")
    return "\n".join(lines) + "\n"


def load_trajectory(text: str) -> tuple[ClockAssignment, int]:
    lines = [ln for ln in (s.strip() for s in text.split("\n")) if ln]
    n, d_cap, seed = (int(x) for x in lines[0].split())
    us, vs, ts = [], [], []
    for ln in lines[1:]:
        a, b, t = ln.split()
        us.append(int(a))
        vs.append(int(b))
        ts.append(float(t))
    clocks = ClockAssignment(
        n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64), np.array(ts), seed
    )
    return clocks, d_cap
