"""Rate matrices and their walk spectra.

A rate matrix R is a symmetric nonnegative matrix with zero diagonal; every
pair {u, v} carries an exponential clock of rate R(u, v).  The induced random
walk jumps from u to v with probability M(u, v) = R(u, v) / d_R(u), where
d_R(u) is the row sum.  This module holds the matrix types, the spectral
quantities (lambda, stationary distribution, mixing horizon), the row-sum
functionals gamma_k, and the rate-matrix-class membership report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RateMatrix",
    "TransitionMatrix",
    "SpectralSummary",
    "RMParams",
    "ConditionReport",
    "MembershipReport",
    "transition_matrix",
    "stationary",
    "spectral_gap",
    "mix_length",
    "gamma_k",
    "normalize_to_rm1",
    "check_rm_membership",
    "mu_sigma",
    "expander_mixing_residual",
    "load_rate_matrix",
    "dump_rate_matrix",
    "load_rate_triples",
    "dump_rate_triples",
]

_SYMMETRY_TOL = 1e-9


class RateMatrix:
    """Symmetric nonnegative pair weights with zero diagonal.

    Immutable after construction; the entries array is set read-only so the
    instance can be shared freely across workers.
    """

    def __init__(self, entries: np.ndarray | Sequence[Sequence[float]]):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("rate matrix must be square")
        n = a.shape[0]
        if n < 2:
            raise ValueError("rate matrix needs at least 2 vertices")
        if not np.all(np.isfinite(a)):
            raise ValueError("rate matrix entries must be finite")
        if np.any(a < 0):
            raise ValueError("rate matrix entries must be nonnegative")
        if np.any(np.diagonal(a) != 0):
            raise ValueError("rate matrix diagonal must be zero")
        if not np.array_equal(a, a.T):
            gap = float(np.max(np.abs(a - a.T)))
            if gap > _SYMMETRY_TOL:
                raise ValueError(f"rate matrix asymmetry {gap:g} exceeds {_SYMMETRY_TOL:g}")
            a = (a + a.T) / 2.0
        rows = a.sum(axis=1)
        if np.any(rows <= 0):
            bad = int(np.argmin(rows))
            raise ValueError(f"vertex {bad} has zero row sum")
        a.setflags(write=False)
        self.entries = a
        self.n = n
        self.row_sums = rows
        self.row_sums.setflags(write=False)

    @property
    def total(self) -> float:
        """d_R(V): sum of all row sums."""
        return float(self.row_sums.sum())

    @property
    def max_entry(self) -> float:
        """The norm ||R|| = max_{u,v} R(u, v)."""
        return float(self.entries.max())

    @property
    def d_min(self) -> float:
        return float(self.row_sums.min())

    def degree(self, u: int) -> float:
        return float(self.row_sums[u])

    def scaled(self, x: float) -> "RateMatrix":
        if x <= 0:
            raise ValueError("scale factor must be positive")
        return RateMatrix(self.entries * x)

    def support_pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u, v, rate) arrays over the upper-triangle support of R."""
        iu, iv = np.triu_indices(self.n, k=1)
        rates = self.entries[iu, iv]
        keep = rates > 0
        return iu[keep], iv[keep], rates[keep]

    def __repr__(self) -> str:  # pragma: no cover
        return f"RateMatrix(n={self.n}, total={self.total:.6g})"


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic walk matrix M(u, v) = R(u, v) / d_R(u)."""

    entries: np.ndarray
    max_entry: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SpectralSummary:
    """lambda(R), stationary sigma, minimum row sum, and the mixing horizon."""

    lam: float
    sigma: np.ndarray
    d_min: float
    mix_length: int | None
    degenerate: bool = False  # true when the walk has multiple unit eigenvalues


@dataclass(frozen=True)
class RMParams:
    """Constants (alpha, gamma, b) of the rate-matrix class definition."""

    alpha: float
    gamma: float
    b: float

    def __post_init__(self) -> None:
        if not (0 <= self.alpha < 0.5):
            raise ValueError("alpha must lie in [0, 1/2)")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.b <= 0:
            raise ValueError("b must be positive")


def transition_matrix(r: RateMatrix) -> TransitionMatrix:
    m = r.entries / r.row_sums[:, None]
    m.setflags(write=False)
    return TransitionMatrix(entries=m, max_entry=float(m.max()))


def stationary(r: RateMatrix) -> np.ndarray:
    """sigma(u) = d_R(u) / d_R(V), the reversible stationary distribution."""
    sigma = r.row_sums / r.total
    sigma.setflags(write=False)
    return sigma


def _symmetrized_eigenvalues(r: RateMatrix) -> np.ndarray:
    """Spectrum of M via the symmetric conjugate D^{1/2} M D^{-1/2}."""
    s = 1.0 / np.sqrt(r.row_sums)
    sym = r.entries * s[:, None] * s[None, :]
    return np.linalg.eigvalsh(sym)


def _iterative_extremes(r: RateMatrix, tol: float) -> tuple[float, float, float]:
    """(lambda_1, lambda_2, lambda_n) of M via Lanczos on the symmetrized matrix."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import eigsh

    s = 1.0 / np.sqrt(r.row_sums)
    sym = csr_matrix(r.entries * s[:, None] * s[None, :])
    try:
        top = eigsh(sym, k=2, which="LA", tol=tol, return_eigenvectors=False)
        bot = eigsh(sym, k=1, which="SA", tol=tol, return_eigenvectors=False)
    except Exception as exc:  # pragma: no cover - solver diagnostics
        raise ArithmeticError(f"eigensolver failed to converge: {exc}") from exc
    top = np.sort(top)
    return float(top[-1]), float(top[0]), float(bot[0])


_DENSE_LIMIT = 2000


def spectral_gap(r: RateMatrix, tol: float = 1e-8) -> SpectralSummary:
    """lambda(R) = max{|lambda_2|, |lambda_n|} plus sigma, d_min and mix(R).

    Dense symmetric eigendecomposition up to n=2000, Lanczos beyond.  A second
    unit eigenvalue (disconnected walk support) is flagged as degenerate.
    """
    if r.n <= _DENSE_LIMIT:
        eig = _symmetrized_eigenvalues(r)
        lam1, lam2, lamn = float(eig[-1]), float(eig[-2]), float(eig[0])
    else:
        lam1, lam2, lamn = _iterative_extremes(r, tol)
    lam = max(abs(lam2), abs(lamn))
    lam = min(lam, 1.0)
    degenerate = lam2 > 1.0 - 1e-9
    mix = mix_length_from(lam, r.n * transition_matrix(r).max_entry) if lam < 1.0 else None
    return SpectralSummary(
        lam=lam,
        sigma=stationary(r),
        d_min=r.d_min,
        mix_length=mix,
        degenerate=degenerate,
    )


def mix_length_from(lam: float, n_norm_m: float) -> int:
    """ceil(2 - 2 ln(n||M||) / ln lambda); the alternating-walk horizon."""
    if lam >= 1.0:
        raise ValueError("mixing horizon undefined for lambda >= 1")
    if lam <= 0.0:
        return 2
    if n_norm_m <= 0:
        raise ValueError("n * ||M|| must be positive")
    return int(math.ceil(2.0 - 2.0 * math.log(n_norm_m) / math.log(lam)))


def mix_length(r: RateMatrix, tol: float = 1e-8) -> int:
    summary = spectral_gap(r, tol=tol)
    if summary.mix_length is None:
        raise ValueError("mixing horizon undefined for lambda >= 1")
    return summary.mix_length


def gamma_k(r: RateMatrix, k: int) -> float:
    """gamma_k(R) = sum_u d_R(u)^(k-1) exp(-d_R(u)), in compensated arithmetic."""
    if k < 1:
        raise ValueError("k must be at least 1")
    d = r.row_sums
    return math.fsum(float(x) ** (k - 1) * math.exp(-float(x)) for x in d)


def _gamma1_of_scale(row_sums: np.ndarray, x: float) -> float:
    return math.fsum(math.exp(-x * float(d)) for d in row_sums)


def normalize_to_rm1(r: RateMatrix, tol: float = 1e-10) -> tuple[float, RateMatrix]:
    """Scale x with gamma_1(xR) = 1, found by bisection on the decreasing map.

    gamma_1(xR) = sum_u exp(-x d_R(u)) falls strictly from n at x=0 toward 0,
    so the root is unique.
    """
    d = r.row_sums
    lo, hi = 0.0, 1.0
    while _gamma1_of_scale(d, hi) > 1.0:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError(
                f"bisection bracket failure: gamma_1 in [{_gamma1_of_scale(d, hi):g}, {r.n}]"
            )
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if _gamma1_of_scale(d, mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if abs(_gamma1_of_scale(d, mid) - 1.0) <= tol:
            return mid, r.scaled(mid)
    x = (lo + hi) / 2.0
    if abs(_gamma1_of_scale(d, x) - 1.0) > tol:
        raise ArithmeticError("bisection failed to meet tolerance")
    return x, r.scaled(x)


@dataclass(frozen=True)
class ConditionReport:
    name: str
    passed: bool
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        """rhs - lhs; positive means the condition holds with room to spare."""
        return self.rhs - self.lhs


@dataclass(frozen=True)
class MembershipReport:
    """Per-condition margins for the rate-matrix class at this finite n.

    The class definition is asymptotic, so this is a report, not a verdict;
    `all_passed` only says every inequality holds at the tested size.
    """

    conditions: tuple[ConditionReport, ...]
    lam: float
    d: float
    degenerate: bool

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def check_rm_membership(r: RateMatrix, params: RMParams, tol: float = 1e-8) -> MembershipReport:
    """Margins for the eigenvalue condition and conditions (a)-(c).

    Condition (b) is checked on prefixes of the vertices sorted by descending
    d_R: those maximize sigma(A) at every cardinality, so prefix satisfaction
    implies satisfaction for every A.
    """
    n = r.n
    summary = spectral_gap(r, tol=tol)
    m = transition_matrix(r)
    d = summary.d_min

    lam_rhs = (n * m.max_entry) ** (-params.alpha - params.gamma)
    cond_lam = ConditionReport("lambda", summary.lam <= lam_rhs, summary.lam, lam_rhs)

    cond_a = ConditionReport("total_scale", r.total <= params.b * d * n, r.total, params.b * d * n)

    sigma_sorted = np.sort(summary.sigma)[::-1]
    prefix_sigma = np.cumsum(sigma_sorted)
    sizes = np.arange(1, n + 1)
    caps = params.b * (sizes / n) ** (1.0 - 2.0 * params.alpha)
    slack = caps - prefix_sigma
    worst = int(np.argmin(slack))
    cond_b = ConditionReport(
        "power_law", bool(np.all(prefix_sigma <= caps)), float(prefix_sigma[worst]), float(caps[worst])
    )

    norm_rhs = d * n ** (-params.gamma)
    cond_c = ConditionReport("max_rate", r.max_entry <= norm_rhs, r.max_entry, norm_rhs)

    return MembershipReport(
        conditions=(cond_lam, cond_a, cond_b, cond_c),
        lam=summary.lam,
        d=d,
        degenerate=summary.degenerate,
    )


def mu_sigma(pi: np.ndarray, sigma: np.ndarray, tol: float = 1e-8) -> float:
    """Chi-square style distance sqrt(sum pi(v)^2 / sigma(v) - 1) from sigma.

    Zero exactly when pi = sigma; contracts by lambda(R) under one M-step.
    """
    pi = np.asarray(pi, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if pi.shape != sigma.shape:
        raise ValueError("distribution shapes differ")
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive")
    if abs(pi.sum() - 1.0) > tol or abs(sigma.sum() - 1.0) > tol:
        raise ValueError("inputs must be probability distributions")
    val = float(np.sum(pi * pi / sigma)) - 1.0
    return math.sqrt(max(val, 0.0))


def expander_mixing_residual(
    r: RateMatrix,
    a: Iterable[int],
    b_set: Iterable[int],
    b_const: float | None = None,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """|M(A, B) - |A| sigma(B)| and the bound lambda sqrt(b n |A| sigma(B)).

    M(A, B) sums over ordered pairs, so pairs inside A∩B contribute twice.
    When ``b_const`` is omitted the minimal b with sigma(u) >= 1/(bn) is used,
    which makes the bound a consequence of Cauchy-Schwarz plus the one-step
    contraction, i.e. it can never be violated up to rounding.
    """
    a_idx = np.fromiter(a, dtype=int)
    b_idx = np.fromiter(b_set, dtype=int)
    if a_idx.size == 0 or b_idx.size == 0:
        raise ValueError("A and B must be nonempty")
    m = transition_matrix(r)
    sigma = stationary(r)
    m_ab = float(m.entries[np.ix_(a_idx, b_idx)].sum())
    sigma_b = float(sigma[b_idx].sum())
    residual = abs(m_ab - a_idx.size * sigma_b)
    if b_const is None:
        b_const = 1.0 / (r.n * float(sigma.min()))
    lam = spectral_gap(r, tol=tol).lam
    bound = lam * math.sqrt(b_const * r.n * a_idx.size * sigma_b)
    return residual, bound


# -- text I/O ---------------------------------------------------------------
#
# Dense format: first line "n", then n whitespace-separated rows.
# Sparse format: lines "u v weight", 0-indexed, one per pair.
# On load the upper triangle is authoritative; a mismatch above 1e-9 is
# rejected.


def dump_rate_matrix(r: RateMatrix) -> str:
    lines = [str(r.n)]
    for row in r.entries:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def load_rate_matrix(text: str) -> RateMatrix:
    tokens = text.split("\n")
    rows: list[list[float]] = []
    header: int | None = None
    for line in tokens:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 1:
                raise ValueError("dense format needs a single integer header line")
            header = int(parts[0])
            continue
        rows.append([float(x) for x in line.split()])
    if header is None:
        raise ValueError("empty rate matrix file")
    if len(rows) != header or any(len(row) != header for row in rows):
        raise ValueError(f"expected {header} rows of {header} entries")
    a = np.array(rows, dtype=float)
    gap = np.abs(a - a.T)
    if float(gap.max(initial=0.0)) > _SYMMETRY_TOL:
        iu = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise ValueError(f"symmetry mismatch {gap[iu]:g} at pair {iu}")
    upper = np.triu(a, k=1)
    return RateMatrix(upper + upper.T)


def dump_rate_triples(r: RateMatrix) -> str:
    iu, iv, rates = r.support_pairs()
    lines = [f"{int(u)} {int(v)} {w:.17g}" for u, v, w in zip(iu, iv, rates)]
    return "\n".join(lines) + "\n"


def load_rate_triples(text: str, n: int) -> RateMatrix:
    a = np.zeros((n, n))
    seen: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'u v weight'")
        u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        if u == v:
            raise ValueError(f"line {lineno}: self-loop not allowed")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"line {lineno}: vertex out of range")
        key = (min(u, v), max(u, v))
        if key in seen and abs(seen[key] - w) > _SYMMETRY_TOL:
            raise ValueError(f"line {lineno}: conflicting weight for pair {key}")
        seen[key] = w
        a[key[0], key[1]] = w
        a[key[1], key[0]] = w
    return RateMatrix(a)
