"""Weighted Pascal graphs, the named triangle catalog and admissible transformations.

A graph is the lattice Z_+^2 with a positive weight ``w1(h,t)`` on each head
edge (h,t)->(h+1,t) and ``w0(h,t)`` on each tail edge (h,t)->(h,t+1).
Graphs are immutable; weights are evaluated lazily and validated on access.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .errors import InvalidParameter, NonPositiveWeight
from .sequences import (
    EXACT,
    FLOAT,
    Const,
    GridTable,
    Linear,
    Scalar,
    Sequence,
    as_mode,
    format_scalar,
    is_exact,
    parse_sequence,
)


class GridPoint(NamedTuple):
    h: int
    t: int

    @property
    def n(self) -> int:
        return self.h + self.t


def grid_point(p) -> GridPoint:
    h, t = p
    h, t = int(h), int(t)
    if h < 0 or t < 0:
        raise InvalidParameter(f"grid point ({h},{t}) has a negative coordinate")
    return GridPoint(h, t)


# ---------------------------------------------------------------------------
# Family specs


@dataclass(frozen=True)
class Pascal:
    def describe(self):
        return {"family": "pascal"}


@dataclass(frozen=True)
class Stirling1:
    """w0 = h+t+1, w1 = 1."""

    def describe(self):
        return {"family": "stirling1"}


@dataclass(frozen=True)
class Stirling2:
    """w0 = h+1, w1 = 1 (a == 0, b_h = h+1)."""

    def describe(self):
        return {"family": "stirling2"}


@dataclass(frozen=True)
class GeneralizedStirling:
    """w0 = a_{h+t} + b_h, w1 = 1."""

    a: Sequence
    b: Sequence

    def __post_init__(self):
        object.__setattr__(self, "a", parse_sequence(self.a))
        object.__setattr__(self, "b", parse_sequence(self.b))

    def describe(self):
        return {"family": "gstirling", "a": self.a.spec(), "b": self.b.spec()}


@dataclass(frozen=True)
class QPascal:
    """w0 = q**h, w1 = 1."""

    q: Scalar

    def __post_init__(self):
        if not self.q > 0:
            raise InvalidParameter(f"q-Pascal needs q > 0, got {self.q}")

    def describe(self):
        return {"family": "qpascal", "q": format_scalar(self.q)}


@dataclass(frozen=True)
class Eulerian:
    """w1 = t+a, w0 = h+b."""

    a: Scalar = 1
    b: Scalar = 1

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParameter(f"Eulerian triangle needs a, b > 0, got a={self.a}, b={self.b}")

    def describe(self):
        return {"family": "eulerian", "a": format_scalar(self.a), "b": format_scalar(self.b)}


@dataclass(frozen=True)
class Custom:
    """Arbitrary weights given as callables (h, t) -> value, e.g. :class:`GridTable`."""

    w0: Callable = field(default=lambda h, t: 1)
    w1: Callable = field(default=lambda h, t: 1)
    name: str = "custom"

    def describe(self):
        d = {"family": "custom"}
        for key in ("w0", "w1"):
            fn = getattr(self, key)
            if hasattr(fn, "spec"):
                d[key] = fn.spec()
        return d


def _family_exact(spec) -> bool:
    if isinstance(spec, (Pascal, Stirling1, Stirling2)):
        return True
    if isinstance(spec, GeneralizedStirling):
        return spec.a.exact and spec.b.exact
    if isinstance(spec, QPascal):
        return is_exact(spec.q)
    if isinstance(spec, Eulerian):
        return is_exact(spec.a) and is_exact(spec.b)
    if isinstance(spec, Custom):
        return all(getattr(f, "exact", True) for f in (spec.w0, spec.w1))
    raise InvalidParameter(f"unknown family spec {spec!r}")


# ---------------------------------------------------------------------------
# The graph


@dataclass(frozen=True)
class WeightedPascalGraph:
    w0_fn: Callable[[int, int], Scalar]
    w1_fn: Callable[[int, int], Scalar]
    mode: str = EXACT
    family: dict = field(default_factory=lambda: {"family": "custom"}, compare=False)

    def w0(self, h: int, t: int) -> Scalar:
        v = as_mode(self.w0_fn(h, t), self.mode)
        if not v > 0:
            raise NonPositiveWeight(h, t, v, "w0")
        return v

    def w1(self, h: int, t: int) -> Scalar:
        v = as_mode(self.w1_fn(h, t), self.mode)
        if not v > 0:
            raise NonPositiveWeight(h, t, v, "w1")
        return v

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1.0

    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    def cast(self, x) -> Scalar:
        return as_mode(x, self.mode)

    def as_float(self) -> "WeightedPascalGraph":
        if not self.exact:
            return self
        return WeightedPascalGraph(self.w0_fn, self.w1_fn, FLOAT, self.family)

    def path_weight(self, path_bits, start=(0, 0)) -> Scalar:
        """Product of edge weights; ``path_bits`` is a sequence of 1 (head) / 0 (tail)."""
        h, t = start
        w = self.one()
        for bit in path_bits:
            if bit:
                w *= self.w1(h, t)
                h += 1
            else:
                w *= self.w0(h, t)
                t += 1
        return w


def make_graph(spec, mode: Optional[str] = None) -> WeightedPascalGraph:
    """Build the graph of a catalog family.

    ``mode=None`` picks exact mode whenever every parameter is rational.
    Asking for exact mode with irrational (float) parameters is an error.
    """
    exact_ok = _family_exact(spec)
    if mode is None:
        mode = EXACT if exact_ok else FLOAT
    if mode not in (EXACT, FLOAT):
        raise InvalidParameter(f"unknown scalar mode {mode!r}")
    if mode == EXACT and not exact_ok:
        raise InvalidParameter(f"{spec.describe()} has non-rational parameters; use float mode")

    if isinstance(spec, Pascal):
        w0, w1 = (lambda h, t: 1), (lambda h, t: 1)
    elif isinstance(spec, Stirling1):
        w0, w1 = (lambda h, t: h + t + 1), (lambda h, t: 1)
    elif isinstance(spec, Stirling2):
        w0, w1 = (lambda h, t: h + 1), (lambda h, t: 1)
    elif isinstance(spec, GeneralizedStirling):
        a, b = spec.a, spec.b
        w0, w1 = (lambda h, t: a(h + t) + b(h)), (lambda h, t: 1)
    elif isinstance(spec, QPascal):
        q = Fraction(spec.q) if mode == EXACT else float(spec.q)
        w0, w1 = (lambda h, t: q**h), (lambda h, t: 1)
    elif isinstance(spec, Eulerian):
        a, b = spec.a, spec.b
        w0, w1 = (lambda h, t: h + b), (lambda h, t: t + a)
    elif isinstance(spec, Custom):
        w0, w1 = spec.w0, spec.w1
    else:
        raise InvalidParameter(f"unknown family spec {spec!r}")
    return WeightedPascalGraph(w0, w1, mode, spec.describe())


def stirling_gs(a="linear:1,1", b="const:0") -> GeneralizedStirling:
    return GeneralizedStirling(parse_sequence(a), parse_sequence(b))


def crp_spec(alpha) -> GeneralizedStirling:
    """Generalized Stirling triangle behind the (alpha, theta) CRP: a_n = n+1, b_h = -alpha(h+1)."""
    return GeneralizedStirling(Linear(1, 1), Linear(-alpha, -alpha))


# ---------------------------------------------------------------------------
# Transformations


def gauge_transform(g: WeightedPascalGraph, f: Callable[[int, int], Scalar]) -> WeightedPascalGraph:
    """w'(s,s') = w(s,s') f(s)/f(s')."""

    def fpos(h, t):
        v = g.cast(f(h, t))
        if not v > 0:
            raise NonPositiveWeight(h, t, v, "f")
        return v

    return WeightedPascalGraph(
        lambda h, t: g.w0(h, t) * fpos(h, t) / fpos(h, t + 1),
        lambda h, t: g.w1(h, t) * fpos(h, t) / fpos(h + 1, t),
        g.mode,
        {"family": "gauge", "base": g.family},
    )


def family_transform(g, g0=None, g1=None, gn=None) -> WeightedPascalGraph:
    """w0' = g0(t) gn(h+t) w0,  w1' = g1(h) gn(h+t) w1  (missing functions are 1)."""
    one = lambda _: 1  # noqa: E731
    g0, g1, gn = g0 or one, g1 or one, gn or one
    return WeightedPascalGraph(
        lambda h, t: g.w0(h, t) * g.cast(g0(t)) * g.cast(gn(h + t)),
        lambda h, t: g.w1(h, t) * g.cast(g1(h)) * g.cast(gn(h + t)),
        g.mode,
        {"family": "transformed", "base": g.family},
    )


def transpose(g: WeightedPascalGraph) -> WeightedPascalGraph:
    """Reflect about the diagonal: heads become tails."""
    fam = g.family
    if fam.get("family") == "transpose":
        fam = fam["base"]
    else:
        fam = {"family": "transpose", "base": fam}
    return WeightedPascalGraph(
        lambda h, t: g.w1_fn(t, h),
        lambda h, t: g.w0_fn(t, h),
        g.mode,
        fam,
    )


def theta_transform(spec: GeneralizedStirling, theta, mode=None) -> WeightedPascalGraph:
    """Balanced version of a generalized Stirling graph: w1' = theta - b_h, w0' = a_n + b_h."""
    g = make_graph(spec, mode)
    th = g.cast(theta)
    return family_transform(g, g1=lambda h: th - spec.b(h))


def qpascal_inverse_equivalent(q, mode=None) -> WeightedPascalGraph:
    """For q-Pascal(q): gauge to w0'=1, w1'=q^{-t}, then transpose.

    The result has the weights of q-Pascal(1/q).
    """
    g = make_graph(QPascal(q), mode)
    qq = g.cast(q)
    gauged = family_transform(g, g0=lambda t: qq**t, g1=lambda h: qq**h, gn=lambda n: qq ** (-n))
    return transpose(gauged)


@dataclass(frozen=True)
class Balance:
    sigma: Optional[list]
    witness: Optional[tuple] = None

    @property
    def balanced(self) -> bool:
        return self.sigma is not None

    def __bool__(self):
        return self.balanced


def is_balanced(g: WeightedPascalGraph, N: int, rel_tol: float = 1e-12) -> Balance:
    """Return sigma(n) = w0 + w1 if it depends on n = h+t only, for all h+t <= N.

    Exact comparison in exact mode; relative tolerance ``rel_tol`` in float mode.
    """
    if N < 1:
        raise InvalidParameter("horizon must be >= 1")
    sigma = []
    for n in range(N + 1):
        ref = g.w0(0, n) + g.w1(0, n)
        for h in range(1, n + 1):
            s = g.w0(h, n - h) + g.w1(h, n - h)
            same = s == ref if g.exact else abs(s - ref) <= rel_tol * max(abs(s), abs(ref))
            if not same:
                return Balance(None, ((0, n), (h, n - h)))
        sigma.append(ref)
    return Balance(sigma)


def transposition_cocycle(g: WeightedPascalGraph, p) -> Scalar:
    """Factor by which a path probability changes when (h,t)->(h+1,t)->(h+1,t+1)
    is replaced by (h,t)->(h,t+1)->(h+1,t+1)."""
    h, t = grid_point(p)
    return g.w0(h, t) * g.w1(h, t + 1) / (g.w1(h, t) * g.w0(h + 1, t))


__all__ = [
    "GridPoint",
    "grid_point",
    "Pascal",
    "Stirling1",
    "Stirling2",
    "GeneralizedStirling",
    "QPascal",
    "Eulerian",
    "Custom",
    "GridTable",
    "WeightedPascalGraph",
    "make_graph",
    "stirling_gs",
    "crp_spec",
    "gauge_transform",
    "family_transform",
    "transpose",
    "theta_transform",
    "qpascal_inverse_equivalent",
    "Balance",
    "is_balanced",
    "transposition_cocycle",
    "Const",
]
