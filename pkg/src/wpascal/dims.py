"""Weighted path enumeration: dimensions, extended dimensions and Martin kernels.

Everything here runs in the graph's scalar mode.  In exact mode the arithmetic
is ``Fraction`` over Python integers, so tables are exact at any horizon (the
numbers grow fast; N <= 200 is comfortable for the catalog families).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import InvalidParameter, TooLarge, UnreachablePair
from .graph import GridPoint, WeightedPascalGraph, grid_point
from .sequences import EXACT, FLOAT

CONVERGED = "converged"
NOT_CONVERGED = "not-converged"
BUDGET_EXHAUSTED = "budget-exhausted"


def triangle_points(N: int):
    """Grid points with h+t <= N in level order."""
    for n in range(N + 1):
        for h in range(n + 1):
            yield h, n - h


@dataclass(frozen=True)
class DimensionTable:
    graph: WeightedPascalGraph
    N: int
    values: tuple  # values[h][t] for h+t <= N

    def __getitem__(self, p):
        h, t = p
        if h < 0 or t < 0 or h + t > self.N:
            raise IndexError(f"({h},{t}) outside the truncation h+t <= {self.N}")
        return self.values[h][t]

    def level(self, n: int) -> list:
        return [self.values[h][n - h] for h in range(n + 1)]

    def items(self):
        for h, t in triangle_points(self.N):
            yield (h, t), self.values[h][t]


def dimension_table(g: WeightedPascalGraph, N: int) -> DimensionTable:
    """d(h,t) by the backward recursion d(h,t) = w1(h-1,t) d(h-1,t) + w0(h,t-1) d(h,t-1)."""
    if N < 0:
        raise InvalidParameter("horizon must be >= 0")
    rows = [[None] * (N - h + 1) for h in range(N + 1)]
    rows[0][0] = g.one()
    for n in range(1, N + 1):
        for h in range(n + 1):
            t = n - h
            v = g.zero()
            if h > 0:
                v += g.w1(h - 1, t) * rows[h - 1][t]
            if t > 0:
                v += g.w0(h, t - 1) * rows[h][t - 1]
            rows[h][t] = v
    return DimensionTable(g, N, tuple(tuple(r) for r in rows))


def extended_dimension(g: WeightedPascalGraph, start, end):
    """Total weight of paths from ``start`` to ``end``."""
    (h0, t0), (h1, t1) = grid_point(start), grid_point(end)
    if h1 < h0 or t1 < t0:
        raise UnreachablePair(f"{tuple(end)} is not reachable from {tuple(start)}")
    H, T = h1 - h0, t1 - t0
    prev = None
    for dh in range(H + 1):
        row = [g.zero()] * (T + 1)
        for dt in range(T + 1):
            if dh == 0 and dt == 0:
                row[0] = g.one()
                continue
            v = g.zero()
            if dh > 0:
                v += g.w1(h0 + dh - 1, t0 + dt) * prev[dt]
            if dt > 0:
                v += g.w0(h0 + dh, t0 + dt - 1) * row[dt - 1]
            row[dt] = v
        prev = row
    return prev[T]


def dimension(g, p):
    return extended_dimension(g, (0, 0), p)


def martin_kernel(g: WeightedPascalGraph, query, terminal):
    """d(query; terminal) / d(terminal): the elementary measure Q_terminal's probability function at query."""
    query, terminal = grid_point(query), grid_point(terminal)
    if query.h > terminal.h or query.t > terminal.t:
        raise UnreachablePair(f"{tuple(terminal)} does not dominate {tuple(query)}")
    return extended_dimension(g, query, terminal) / dimension(g, terminal)


def kernel_grid(g: WeightedPascalGraph, terminal, N: int) -> list:
    """Martin kernel at every query point h+t <= N against one terminal.

    Returns ``K[h][t]``; points not dominated by the terminal get 0.  One backward
    sweep over the rectangle below the terminal computes all extended dimensions.
    In float mode each level is rescaled and the log-scale carried separately, so
    the huge dimensions of e.g. Stirling triangles never overflow.
    """
    H, T = grid_point(terminal)
    zero = g.zero()
    K = [[zero] * (N - h + 1) for h in range(N + 1)]
    row = {H: g.one()}  # level H+T
    logscale = 0.0
    kept = {}
    for k in range(H + T, -1, -1):
        if k < H + T:
            new = {}
            for h in range(max(0, k - T), min(H, k) + 1):
                t = k - h
                v = zero
                if h + 1 <= H:
                    v += g.w1(h, t) * row[h + 1]
                if t + 1 <= T:
                    v += g.w0(h, t) * row[h]
                new[h] = v
            row = new
            if not g.exact:
                top = max(row.values())
                if top > 0:
                    row = {h: v / top for h, v in row.items()}
                    logscale += math.log(top)
        if k <= N:
            kept[k] = (row, logscale)
    base_row, base_log = kept[0]
    base = base_row[0]
    for k, (r, ls) in kept.items():
        factor = 1 if g.exact else math.exp(ls - base_log)
        for h, v in r.items():
            K[h][k - h] = v * factor / base
    return K


class LatticePath:
    """A standard infinite path given by n -> (h_n, t_n) with h_n + t_n = n."""

    def __init__(self, fn: Callable[[int], tuple], description: str, start: int = 0):
        self.fn, self.description, self.start = fn, description, start

    def __call__(self, n: int) -> GridPoint:
        p = grid_point(self.fn(n))
        if p.n != n:
            raise InvalidParameter(f"path point {tuple(p)} is not on level {n}")
        return p

    def __repr__(self):
        return f"LatticePath({self.description})"


def fixed_heads_path(m: int) -> LatticePath:
    """(m, n-m): m heads, then only tails."""
    return LatticePath(lambda n: (m, n - m), f"(m, n-m), m={m}", start=m)


def fixed_tails_path(m: int) -> LatticePath:
    """(n-m, m): m tails, then only heads."""
    return LatticePath(lambda n: (n - m, m), f"(n-m, m), m={m}", start=m)


def diagonal_path() -> LatticePath:
    return LatticePath(lambda n: (n // 2, n - n // 2), "(floor(n/2), ceil(n/2))")


def ratio_path(pi) -> LatticePath:
    return LatticePath(lambda n: (round(pi * n), n - round(pi * n)), f"h_n = round({pi} n)")


@dataclass
class MartinLimitResult:
    status: str
    phi_estimates: list  # [h][t], h+t <= N
    path_descriptor: str
    N: int
    last_n: int
    diagnostics: list = field(default_factory=list)  # (n, max successive difference)
    residual: Optional[float] = None
    graph: Optional[WeightedPascalGraph] = None

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def __getitem__(self, p):
        h, t = p
        return self.phi_estimates[h][t]

    def to_phi(self):
        from .measures import ProbabilityFunction

        return ProbabilityFunction(
            self.graph, self.N, tuple(tuple(r) for r in self.phi_estimates),
            provenance=f"martin-limit {self.path_descriptor}",
        )


def martin_limit(
    g: WeightedPascalGraph,
    path: LatticePath,
    query_horizon: int,
    tol: float = 1e-10,
    budget: int = 2000,
    window: int = 5,
    growth: float = 1.0,
    mode: Optional[str] = None,
) -> MartinLimitResult:
    """Follow Martin kernels along ``path`` until they stabilize.

    Terminals path(n) are visited for n = n0, n0+1, ... (or geometrically,
    n -> max(n+1, ceil(growth*n)), when ``growth > 1``).  The run is declared
    converged once ``window`` consecutive visited terminals each changed the
    estimate by less than ``tol`` in max norm over the query grid.
    Exceeding ``budget`` yields status budget-exhausted, which is inconclusive.
    """
    if mode == FLOAT:
        g = g.as_float()
    elif mode not in (None, EXACT):
        raise InvalidParameter(f"unknown mode {mode!r}")
    N = query_horizon
    n = max(path.start, N, 1)
    prev = None
    streak = 0
    history = []
    status = BUDGET_EXHAUSTED
    K = None
    last = n
    while n <= budget:
        try:
            terminal = path(n)
        except (StopIteration, IndexError):
            status = NOT_CONVERGED
            break
        K = kernel_grid(g, terminal, N)
        last = n
        if prev is not None:
            diff = max(abs(K[h][t] - prev[h][t]) for h, t in triangle_points(N))
            history.append((n, float(diff)))
            streak = streak + 1 if diff < tol else 0
            if streak >= window:
                status = CONVERGED
                break
        prev = K
        n = n + 1 if growth <= 1 else max(n + 1, math.ceil(growth * n))
    residual = None
    if K is not None and N >= 1:
        residual = float(max(
            abs(K[h][t] - g.w0(h, t) * K[h][t + 1] - g.w1(h, t) * K[h + 1][t])
            for h, t in triangle_points(N - 1)
        ))
    return MartinLimitResult(status, K, path.description, N, last, history, residual, g)


# ---------------------------------------------------------------------------
# Combinatorial oracles (test-only helpers, shipped for the self-check command)


def _check_oracle_size(n: int):
    if n < 0:
        raise InvalidParameter("n must be >= 0")
    if n > 9:
        raise TooLarge(f"exhaustive enumeration of {n + 1}! permutations refused (n <= 9)")


def record_count_oracle(n: int) -> list:
    """counts[h] = #permutations of [n+1] with h+1 lower records."""
    _check_oracle_size(n)
    counts = [0] * (n + 1)
    for perm in itertools.permutations(range(n + 1)):
        records, low = 0, math.inf
        for x in perm:
            if x < low:
                records, low = records + 1, x
        counts[records - 1] += 1
    return counts


def descent_count_oracle(n: int) -> list:
    """counts[h] = #permutations of [n+1] with h descents."""
    _check_oracle_size(n)
    counts = [0] * (n + 1)
    for perm in itertools.permutations(range(n + 1)):
        counts[sum(perm[i] > perm[i + 1] for i in range(n))] += 1
    return counts


def stirling1_unsigned(n: int, k: int) -> int:
    """c(n,k) by c(n+1,k) = c(n,k-1) + n c(n,k)."""
    row = [1]  # c(0, .)
    for m in range(n):
        new = [0] * (m + 2)
        for j in range(m + 2):
            new[j] = (row[j - 1] if j >= 1 else 0) + (m * row[j] if j < len(row) else 0)
        row = new
    return row[k] if 0 <= k < len(row) else 0


def q_binomial(n: int, k: int, q) -> Fraction:
    """Gaussian binomial by [n,k] = [n-1,k-1] + q^k [n-1,k]."""
    if k < 0 or k > n:
        return Fraction(0) if not isinstance(q, float) else 0.0
    row = [q**0]
    for m in range(1, n + 1):
        new = [q**0] * (m + 1)
        for j in range(1, m):
            new[j] = row[j - 1] + q**j * row[j]
        row = new
    return row[k]


def brute_force_dimension(g: WeightedPascalGraph, h: int, t: int):
    """Sum over all C(h+t, h) explicit paths of their weight products."""
    total = g.zero()
    n = h + t
    for heads in itertools.combinations(range(n), h):
        hs = set(heads)
        total += g.path_weight([1 if i in hs else 0 for i in range(n)])
    return total


def all_paths(h: int, t: int):
    """Every 0/1 increment sequence with h heads and t tails."""
    n = h + t
    for heads in itertools.combinations(range(n), h):
        hs = set(heads)
        yield tuple(1 if i in hs else 0 for i in range(n))
