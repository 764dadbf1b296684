"""Probability functions, transition kernels and the catalog of explicit measures.

A probability function phi on a graph is a nonnegative solution of

    phi(h,t) = w0(h,t) phi(h,t+1) + w1(h,t) phi(h+1,t),   phi(0,0) = 1,

and the probability of a finite path ending at (h,t) is its weight times
phi(h,t).  Measure families below carry both their closed-form phi and the
closed-form transition kernel, so the two routes can be checked against each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .dims import dimension_table, kernel_grid, triangle_points
from .errors import (
    InvalidParameter,
    KernelOutOfSupport,
    LevelMismatch,
    NotBalanced,
    NotHarmonic,
)
from .graph import (
    Eulerian,
    GeneralizedStirling,
    Pascal,
    QPascal,
    WeightedPascalGraph,
    crp_spec,
    family_transform,
    grid_point,
    is_balanced,
    make_graph,
)
from .sequences import EXACT, FLOAT, Const, Linear, Sequence, format_scalar, is_exact, parse_sequence


@dataclass(frozen=True)
class ProbabilityFunction:
    graph: WeightedPascalGraph
    N: int
    values: tuple  # values[h][t], h+t <= N
    provenance: str = "user"
    support: Optional[Callable[[int, int], bool]] = field(default=None, compare=False)

    def __call__(self, h: int, t: int):
        if h < 0 or t < 0 or h + t > self.N:
            raise IndexError(f"({h},{t}) outside horizon {self.N}")
        return self.values[h][t]

    __getitem__ = lambda self, p: self(*p)  # noqa: E731

    def in_support(self, h: int, t: int) -> bool:
        if self.support is not None:
            return bool(self.support(h, t))
        return self(h, t) != 0

    def items(self):
        for h, t in triangle_points(self.N):
            yield (h, t), self.values[h][t]

    def level_row(self):
        """phi(., 0) as a list."""
        return [self.values[h][0] for h in range(self.N + 1)]


def table_from_function(fn, N):
    return tuple(tuple(fn(h, t) for t in range(N - h + 1)) for h in range(N + 1))


def _prefix_products(f, N, one):
    out = [one]
    for j in range(N):
        out.append(out[-1] * f(j))
    return out


def _cast(x, mode):
    return Fraction(x) if mode == EXACT else float(x)


class TransitionKernel:
    """Head/tail probabilities p(h,t), q(h,t) of a chain on Z_+^2.

    ``p`` and ``q`` are scalar callables (exact where the source is exact) that
    raise :class:`KernelOutOfSupport` outside the support.  ``head_prob`` is a
    vectorized float version used by the simulators; kernels built from a
    tabulated phi carry a lookup table with NaN outside the support.
    """

    def __init__(self, p, q, support=None, head_prob=None, horizon=None, name="kernel"):
        self._p, self._q = p, q
        self.support = support or (lambda h, t: True)
        self._vec = head_prob
        self.horizon = horizon
        self.name = name
        self._table = None

    def _check(self, h, t):
        if self.horizon is not None and h + t > self.horizon:
            raise KernelOutOfSupport(f"{self.name}: state ({h},{t}) beyond kernel horizon {self.horizon}")
        if not self.support(h, t):
            raise KernelOutOfSupport(f"{self.name}: state ({h},{t}) is outside the support")

    def p(self, h, t):
        self._check(h, t)
        return self._p(h, t)

    def q(self, h, t):
        self._check(h, t)
        return self._q(h, t)

    def head_prob(self, h, t) -> np.ndarray:
        h = np.asarray(h)
        t = np.asarray(t)
        if self._vec is not None:
            return np.broadcast_to(np.asarray(self._vec(h, t), dtype=float), h.shape)
        if self.horizon is None:
            raise KernelOutOfSupport(f"{self.name}: no vectorized form and no horizon")
        if self._table is None:
            H = self.horizon
            tab = np.full((H + 2, H + 2), np.nan)
            for hh, tt in triangle_points(H):
                if self.support(hh, tt):
                    tab[hh, tt] = float(self._p(hh, tt))
            self._table = tab
        if np.any(h + t > self.horizon):
            raise KernelOutOfSupport(f"{self.name}: chain ran past the kernel horizon {self.horizon}")
        return self._table[h, t]


# ---------------------------------------------------------------------------
# Measure families


class MeasureFamily:
    """A named measure with closed-form phi and transition kernel."""

    name = "measure"

    def params(self) -> dict:
        raise NotImplementedError

    @property
    def exact(self) -> bool:
        return all(is_exact(v) or (isinstance(v, Sequence) and v.exact) for v in self.params().values())

    def resolve_mode(self, mode):
        if mode is None:
            return EXACT if self.exact else FLOAT
        if mode == EXACT and not self.exact:
            raise InvalidParameter(f"{self.name}: parameters are not rational; use float mode")
        return mode

    def graph(self, mode=None) -> WeightedPascalGraph:
        raise NotImplementedError

    def validate(self, N: int):
        """Raise InvalidParameter if the parameters are inadmissible on the horizon."""

    def support(self, h, t) -> bool:
        return True

    def table(self, N: int, mode: str) -> tuple:
        raise NotImplementedError

    def p(self, h, t, mode=None):
        raise NotImplementedError

    def q(self, h, t, mode=None):
        return 1 - self.p(h, t, mode)

    def kernel(self, horizon: Optional[int] = None, mode=None) -> TransitionKernel:
        mode = self.resolve_mode(mode)
        vec = self._vectorized(horizon) if horizon is not None else None
        return TransitionKernel(
            lambda h, t: self.p(h, t, mode),
            lambda h, t: self.q(h, t, mode),
            support=self.support,
            head_prob=vec,
            horizon=None,
            name=self.name,
        )

    def _vectorized(self, horizon):
        return None

    def describe(self) -> dict:
        out = {"family": self.name}
        for k, v in self.params().items():
            out[k] = v.spec() if isinstance(v, Sequence) else format_scalar(v)
        return out


@dataclass(frozen=True)
class Bernoulli(MeasureFamily):
    """Homogeneous coin with head probability ``p`` on the Pascal triangle."""

    prob: object
    name = "bernoulli"

    def params(self):
        return {"p": self.prob}

    def validate(self, N):
        if not 0 <= self.prob <= 1:
            raise InvalidParameter(f"bernoulli: p must be in [0,1], got {self.prob}")

    def graph(self, mode=None):
        return make_graph(Pascal(), self.resolve_mode(mode))

    def support(self, h, t):
        if self.prob == 0:
            return h == 0
        if self.prob == 1:
            return t == 0
        return True

    def table(self, N, mode):
        p = _cast(self.prob, mode)
        return table_from_function(lambda h, t: p**h * (1 - p) ** t, N)

    def p(self, h, t, mode=None):
        return _cast(self.prob, self.resolve_mode(mode))

    def _vectorized(self, horizon):
        p = float(self.prob)
        return lambda h, t: np.full(np.shape(h), p)


@dataclass(frozen=True)
class Polya(MeasureFamily):
    """Polya urn started from (a, b): phi = (a)_h (b)_t / (a+b)_{h+t} on the Pascal triangle."""

    a: object
    b: object
    name = "polya"

    def params(self):
        return {"a": self.a, "b": self.b}

    def validate(self, N):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParameter(f"polya: need a, b > 0, got a={self.a}, b={self.b}")

    def graph(self, mode=None):
        """Plain Pascal weights; the closed-form phi is relative to these."""
        return make_graph(Pascal(), self.resolve_mode(mode))

    def urn_graph(self, mode=None):
        """The gauge-equivalent balanced urn weights w1 = h+a, w0 = t+b (phi there is 1/(a+b)_n)."""
        mode = self.resolve_mode(mode)
        a, b = _cast(self.a, mode), _cast(self.b, mode)
        return family_transform(make_graph(Pascal(), mode), g0=lambda t: t + b, g1=lambda h: h + a)

    def table(self, N, mode):
        a, b = _cast(self.a, mode), _cast(self.b, mode)
        one = _cast(1, mode)
        A = _prefix_products(lambda j: a + j, N, one)
        B = _prefix_products(lambda j: b + j, N, one)
        C = _prefix_products(lambda j: a + b + j, N, one)
        return table_from_function(lambda h, t: A[h] * B[t] / C[h + t], N)

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        a, b = _cast(self.a, mode), _cast(self.b, mode)
        return (h + a) / (h + t + a + b)

    def _vectorized(self, horizon):
        a, b = float(self.a), float(self.b)
        return lambda h, t: (h + a) / (h + t + a + b)


CAP_SEARCH = 512  # how far a strict running maximum b_m = theta is searched for


@dataclass(frozen=True)
class GStirlingTheta(MeasureFamily):
    """P_theta on the generalized Stirling triangle: phi = B_h(theta) / A_{h+t}(theta).

    Admissible when theta > sup b_h (fully supported) or theta = b_m for a
    strict running maximum b_m (then the measure is Q_{m,inf}, support h <= m).
    """

    a: Sequence
    b: Sequence
    theta: object
    name = "gstirling"

    def __post_init__(self):
        object.__setattr__(self, "a", parse_sequence(self.a))
        object.__setattr__(self, "b", parse_sequence(self.b))

    def params(self):
        return {"a": self.a, "b": self.b, "theta": self.theta}

    def spec(self):
        return GeneralizedStirling(self.a, self.b)

    def graph(self, mode=None):
        g = make_graph(self.spec(), self.resolve_mode(mode))
        return WeightedPascalGraph(g.w0_fn, g.w1_fn, g.mode, self.describe())

    def support_cap(self, N: int) -> Optional[int]:
        """m if theta = b_m is a strict running maximum (searched for m <= N), else None."""
        best = -math.inf
        for m in range(N + 1):
            try:
                bm = self.b(m)
            except IndexError:
                return None
            if bm == self.theta and bm > best:
                return m
            best = max(best, bm)
        return None

    def validate(self, N):
        th = self.theta
        cap = self.support_cap(max(N, CAP_SEARCH))
        if cap is None:
            for h in range(N + 1):
                if not th - self.b(h) > 0:
                    raise InvalidParameter(
                        f"{self.name}: theta={format_scalar(th)} must exceed sup b_h or equal a strict "
                        f"running maximum b_m (b_{h}={format_scalar(self.b(h))})"
                    )
            s = self.b.sup()
            if s is not None and not th > s:
                raise InvalidParameter(
                    f"{self.name}: theta={format_scalar(th)} must exceed sup b_h = {s} "
                    "unless it equals a strict running maximum b_m"
                )
        for n in range(N):
            if not th + self.a(n) > 0:
                raise InvalidParameter(f"{self.name}: theta + a_{n} must be > 0")

    def support(self, h, t):
        if "_cap" not in self.__dict__:
            cap = self.support_cap(CAP_SEARCH)
            object.__setattr__(self, "_cap", -1 if cap is None else cap)
        return self._cap < 0 or h <= self._cap

    def table(self, N, mode):
        th = _cast(self.theta, mode)
        one = _cast(1, mode)
        B = _prefix_products(lambda j: th - _cast(self.b(j), mode), N, one)
        A = _prefix_products(lambda j: th + _cast(self.a(j), mode), N, one)
        return table_from_function(lambda h, t: B[h] / A[h + t], N)

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        th = _cast(self.theta, mode)
        return (th - _cast(self.b(h), mode)) / (th + _cast(self.a(h + t), mode))

    def q(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        th = _cast(self.theta, mode)
        an = _cast(self.a(h + t), mode)
        return (an + _cast(self.b(h), mode)) / (th + an)

    def _vectorized(self, horizon):
        th = float(self.theta)
        a = np.array([float(self.a(n)) for n in range(horizon + 1)])
        b = np.array([float(self.b(h)) for h in range(horizon + 1)])
        return lambda h, t: (th - b[h]) / (th + a[h + t])


class CRP(GStirlingTheta):
    """(alpha, theta) Chinese restaurant process: a_n = n+1, b_h = -alpha(h+1)."""

    name = "crp"

    def __init__(self, alpha, theta):
        spec = crp_spec(alpha)
        object.__setattr__(self, "alpha", alpha)
        super().__init__(spec.a, spec.b, theta)

    def params(self):
        return {"alpha": self.alpha, "theta": self.theta}

    def __repr__(self):
        return f"CRP(alpha={self.alpha}, theta={self.theta})"

    def validate(self, N):
        al, th = self.alpha, self.theta
        if not al < 1:
            raise InvalidParameter(f"crp: alpha must be < 1, got {al}")
        if al >= 0:
            if not th >= 0:
                raise InvalidParameter(f"crp: theta must be >= 0 for 0 <= alpha < 1, got {th}")
            if al == 0 and th == 0:
                return
            return
        k = -th / al
        if is_exact(al) and is_exact(th):
            ok = Fraction(k).denominator == 1 and k >= 1
        else:
            ok = abs(k - round(k)) < 1e-9 and round(k) >= 1
        if not ok:
            raise InvalidParameter(
                f"crp: alpha < 0 requires -theta/alpha to be a positive integer, got {format_scalar(k) if is_exact(k) else k}"
            )

    def support_cap(self, N):
        if self.alpha < 0:
            return int(round(-self.theta / self.alpha)) - 1
        if self.alpha == 0 and self.theta == 0:
            return 0
        return None

    def support(self, h, t):
        cap = self.support_cap(0)
        return cap is None or h <= cap

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        al, th = _cast(self.alpha, mode), _cast(self.theta, mode)
        return (th + al * (h + 1)) / (h + t + 1 + th)

    def q(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        al, th = _cast(self.alpha, mode), _cast(self.theta, mode)
        return (h + t + 1 - al * (h + 1)) / (h + t + 1 + th)

    def _vectorized(self, horizon):
        al, th = float(self.alpha), float(self.theta)
        return lambda h, t: (th + al * (h + 1)) / (h + t + 1 + th)


def space_time(a, theta) -> GStirlingTheta:
    """Generalized Stirling-I (b == 0): inhomogeneous coin with p(n) = theta/(theta + a_n)."""
    fam = GStirlingTheta(parse_sequence(a), Const(0), theta)
    object.__setattr__(fam, "name", "spacetime")
    return fam


def stirling2_theta(b, theta) -> GStirlingTheta:
    """Generalized Stirling-II (a == 0): coupon-collector process."""
    fam = GStirlingTheta(Const(0), parse_sequence(b), theta)
    object.__setattr__(fam, "name", "stirling2")
    return fam


def stirling1_theta(theta) -> GStirlingTheta:
    fam = GStirlingTheta(Linear(1, 1), Const(0), theta)
    object.__setattr__(fam, "name", "stirling1")
    return fam


@dataclass(frozen=True)
class QPascalExtreme(MeasureFamily):
    """Finitely supported extremes of the q-Pascal triangle.

    For 0 < q < 1: phi(h,t) = q^{(m-t)h} prod_{j<t} (1 - q^{m-j}), supported on
    t <= m (at most m tails), first-head probability q^m.
    For q > 1 the mirror family supported on h <= m is used:
    phi(h,t) = q^{-mt} prod_{j<h} (1 - q^{j-m}), first-head probability 1 - q^{-m}.
    """

    qq: object
    m: int
    name = "qpascal"

    def params(self):
        return {"q": self.qq, "m": self.m}

    @property
    def heads_side(self) -> bool:
        return self.qq > 1

    @property
    def label(self) -> str:
        return f"Q_{{{self.m},inf}}" if self.heads_side else f"Q_{{inf,{self.m}}}"

    def validate(self, N):
        if not self.qq > 0 or self.qq == 1:
            raise InvalidParameter(f"qpascal: need q > 0, q != 1, got {self.qq}")
        if int(self.m) != self.m or self.m < 0:
            raise InvalidParameter(f"qpascal: m must be a nonnegative integer, got {self.m}")

    def graph(self, mode=None):
        g = make_graph(QPascal(self.qq), self.resolve_mode(mode))
        return WeightedPascalGraph(g.w0_fn, g.w1_fn, g.mode, self.describe())

    def support(self, h, t):
        return h <= self.m if self.heads_side else t <= self.m

    def phi(self, h, t, mode):
        q, m, one = _cast(self.qq, mode), self.m, _cast(1, mode)
        if not self.heads_side:
            prod = one
            for j in range(t):
                prod *= one - q ** (m - j)
            return q ** ((m - t) * h) * prod
        prod = one
        for j in range(h):
            prod *= one - q ** (j - m)
        return q ** (-m * t) * prod

    def table(self, N, mode):
        return table_from_function(lambda h, t: self.phi(h, t, mode), N)

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        return self.phi(h + 1, t, mode) / self.phi(h, t, mode)

    def q(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        return _cast(self.qq, mode) ** h * self.phi(h, t + 1, mode) / self.phi(h, t, mode)

    def _vectorized(self, horizon):
        q, m = float(self.qq), self.m
        if not self.heads_side:
            # head prob = q^{m-t}; tail prob 1 - q^{m-t} vanishes at t = m
            return lambda h, t: q ** (m - np.asarray(t, dtype=float))
        # head prob = 1 - q^{h-m}
        return lambda h, t: 1.0 - q ** (np.asarray(h, dtype=float) - m)


@dataclass(frozen=True)
class QPolya(MeasureFamily):
    """q-analogue of the Polya urn on the q-Pascal triangle.

    p(h,t) = [alpha+h]_q / [alpha+beta+h+t]_q with [x]_q = (1-q^x)/(1-q).
    """

    qq: object
    alpha: object
    beta: object
    name = "qpolya"

    def params(self):
        return {"q": self.qq, "alpha": self.alpha, "beta": self.beta}

    @property
    def exact(self):
        vals = (self.qq, self.alpha, self.beta)
        return all(is_exact(v) for v in vals) and all(Fraction(v).denominator == 1 for v in vals[1:])

    def validate(self, N):
        if not (self.qq > 0 and self.qq != 1 and self.alpha > 0 and self.beta > 0):
            raise InvalidParameter("qpolya: need q > 0, q != 1, alpha > 0, beta > 0")

    def graph(self, mode=None):
        g = make_graph(QPascal(self.qq), self.resolve_mode(mode))
        return WeightedPascalGraph(g.w0_fn, g.w1_fn, g.mode, self.describe())

    def _qnum(self, x, mode):
        q = _cast(self.qq, mode)
        if mode == EXACT:
            return (1 - q ** int(x)) / (1 - q)
        return (1 - q ** float(x)) / (1 - q)

    def _qpow(self, x, mode):
        q = _cast(self.qq, mode)
        return q ** int(x) if mode == EXACT else q ** float(x)

    def table(self, N, mode):
        one = _cast(1, mode)
        al, be = self.alpha, self.beta
        H = _prefix_products(lambda j: self._qnum(al + j, mode), N, one)
        T = _prefix_products(lambda j: self._qnum(be + j, mode), N, one)
        L = _prefix_products(lambda j: self._qnum(al + be + j, mode), N, one)
        qa = self._qpow(al, mode)
        return table_from_function(lambda h, t: H[h] * T[t] * qa**t / L[h + t], N)

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        return self._qnum(self.alpha + h, mode) / self._qnum(self.alpha + self.beta + h + t, mode)

    def q(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        return (
            self._qnum(self.beta + t, mode)
            * self._qpow(h + self.alpha, mode)
            / self._qnum(self.alpha + self.beta + h + t, mode)
        )

    def _vectorized(self, horizon):
        q, al, be = float(self.qq), float(self.alpha), float(self.beta)
        return lambda h, t: (1 - q ** (al + h)) / (1 - q ** (al + be + h + t))


@dataclass(frozen=True)
class EulerianStar(MeasureFamily):
    """The balanced (Friedman urn) measure of the generalized Eulerian triangle."""

    a: object = 1
    b: object = 1
    name = "friedman"

    def params(self):
        return {"a": self.a, "b": self.b}

    def validate(self, N):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParameter("eulerian: need a, b > 0")

    def graph(self, mode=None):
        g = make_graph(Eulerian(self.a, self.b), self.resolve_mode(mode))
        return g

    def table(self, N, mode):
        ab = _cast(self.a, mode) + _cast(self.b, mode)
        C = _prefix_products(lambda j: ab + j, N, _cast(1, mode))
        return table_from_function(lambda h, t: 1 / C[h + t], N)

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        a, b = _cast(self.a, mode), _cast(self.b, mode)
        return (t + a) / (h + t + a + b)

    def _vectorized(self, horizon):
        a, b = float(self.a), float(self.b)
        return lambda h, t: (t + a) / (h + t + a + b)


@dataclass(frozen=True)
class EulerianFinite(MeasureFamily):
    """Q_{m,inf} (side='heads') or Q_{inf,m} (side='tails') of the generalized Eulerian triangle.

    Heads side: p(h,t) = (m-h)(t+a) / ((m+b)(h+t+a+b)), vanishing at h = m, and
    phi(h,t) = m^(h falling) (m+a+b)_t / ((m+b)^{h+t} (a+b)_{h+t}).
    The tails side is the mirror image with a and b exchanged.
    """

    a: object
    b: object
    m: int
    side: str = "heads"
    name = "eulerian_finite"

    def params(self):
        return {"a": self.a, "b": self.b, "m": self.m}

    def describe(self):
        d = super().describe()
        d["side"] = self.side
        return d

    def validate(self, N):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParameter("eulerian: need a, b > 0")
        if int(self.m) != self.m or self.m < 0 or self.side not in ("heads", "tails"):
            raise InvalidParameter("eulerian_finite: m must be a nonnegative integer, side heads|tails")

    def graph(self, mode=None):
        return make_graph(Eulerian(self.a, self.b), self.resolve_mode(mode))

    def _oriented(self, h, t):
        # heads-side formulas in the (h, t, a, b) frame of the chosen side
        if self.side == "heads":
            return h, t, self.a, self.b
        return t, h, self.b, self.a

    def support(self, h, t):
        hh, _, _, _ = self._oriented(h, t)
        return hh <= self.m

    def phi(self, h, t, mode):
        hh, tt, a, b = self._oriented(h, t)
        a, b, m = _cast(a, mode), _cast(b, mode), self.m
        num = _cast(1, mode)
        for i in range(hh):
            num *= m - i
        for j in range(tt):
            num *= m + a + b + j
        den = _cast(1, mode)
        for k in range(hh + tt):
            den *= (m + b) * (a + b + k)
        return num / den

    def table(self, N, mode):
        return table_from_function(lambda h, t: self.phi(h, t, mode), N)

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        a, b, m = _cast(self.a, mode), _cast(self.b, mode), self.m
        if self.side == "heads":
            return (m - h) * (t + a) / ((m + b) * (h + t + a + b))
        # mirror: tail prob of the (b, a) heads-side family at (t, h)
        return 1 - (m - t) * (h + b) / ((m + a) * (h + t + a + b))

    def _vectorized(self, horizon):
        a, b, m = float(self.a), float(self.b), self.m
        if self.side == "heads":
            return lambda h, t: (m - h) * (t + a) / ((m + b) * (h + t + a + b))
        return lambda h, t: 1 - (m - t) * (h + b) / ((m + a) * (h + t + a + b))


@dataclass(frozen=True)
class CRPGamma(MeasureFamily):
    """The nonergodic gamma-variant for alpha = -1 (graph: a_n = n+1, b_h = h+1).

    Given by its kernel; phi is recovered as path probability / path weight.
    """

    gamma: object
    name = "crp_gamma"

    def params(self):
        return {"gamma": self.gamma}

    def validate(self, N):
        if not 0 < self.gamma < 1:
            raise InvalidParameter(f"crp_gamma: need 0 < gamma < 1, got {self.gamma}")

    def graph(self, mode=None):
        g = make_graph(crp_spec(-1), self.resolve_mode(mode))
        return WeightedPascalGraph(g.w0_fn, g.w1_fn, g.mode, self.describe())

    def p(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        gm = _cast(self.gamma, mode)
        n = h + t
        return (h + 1) * (h + 1 - gm) / ((n + 1) * (n + 1 + gm))

    def q(self, h, t, mode=None):
        mode = self.resolve_mode(mode)
        gm = _cast(self.gamma, mode)
        n = h + t
        return (2 * h + t + 2) * (t + gm) / ((n + 1) * (n + 1 + gm))

    def table(self, N, mode):
        g = self.graph(mode)
        return phi_from_kernel(g, self.kernel(mode=mode), N).values

    def _vectorized(self, horizon):
        gm = float(self.gamma)
        return lambda h, t: (h + 1) * (h + 1 - gm) / ((h + t + 1) * (h + t + 1 + gm))


def crp_gamma_closed_form(gamma, h, t):
    """h! (1-gamma)_h (gamma)_t / (n! (1+gamma)_n); an independent check of the kernel route."""
    n = h + t
    num = Fraction(math.factorial(h)) if is_exact(gamma) else float(math.factorial(h))
    for i in range(h):
        num *= 1 - gamma + i
    for j in range(t):
        num *= gamma + j
    den = math.factorial(n)
    for k in range(n):
        den *= 1 + gamma + k
    return num / den


# ---------------------------------------------------------------------------
# Operations


def phi_from_family(family: MeasureFamily, N: int, mode: Optional[str] = None) -> ProbabilityFunction:
    mode = family.resolve_mode(mode)
    family.validate(N)
    g = family.graph(mode)
    return ProbabilityFunction(g, N, family.table(N, mode), provenance=str(family.describe()),
                               support=family.support)


def phi_balanced(g: WeightedPascalGraph, N: int) -> ProbabilityFunction:
    """phi = 1 / prod_{j<n} sigma(j) for a balanced graph."""
    bal = is_balanced(g, max(N, 1))
    if not bal:
        raise NotBalanced(bal.witness)
    C = _prefix_products(lambda j: bal.sigma[j], N, g.one())
    return ProbabilityFunction(g, N, table_from_function(lambda h, t: 1 / C[h + t], N), "balanced")


def phi_from_kernel(g: WeightedPascalGraph, kernel: TransitionKernel, N: int) -> ProbabilityFunction:
    """Recover phi by dividing path probability by path weight along heads-then-tails paths."""
    rows = [[g.zero()] * (N - h + 1) for h in range(N + 1)]
    rows[0][0] = g.one()
    for h in range(N + 1):
        if h > 0:
            prev = rows[h - 1][0]
            rows[h][0] = prev * kernel.p(h - 1, 0) / g.w1(h - 1, 0) if prev != 0 else g.zero()
        for t in range(1, N - h + 1):
            prev = rows[h][t - 1]
            rows[h][t] = prev * kernel.q(h, t - 1) / g.w0(h, t - 1) if prev != 0 else g.zero()
    return ProbabilityFunction(g, N, tuple(tuple(r) for r in rows), provenance=f"kernel {kernel.name}")


@dataclass
class ProbabilityCheck:
    max_recursion_residual: object
    max_level_sum_error: object
    negativity_witness: Optional[tuple] = None
    origin_error: object = 0
    worst_point: Optional[tuple] = None

    def ok(self, tol=0) -> bool:
        return (
            self.negativity_witness is None
            and abs(self.max_recursion_residual) <= tol
            and abs(self.max_level_sum_error) <= tol
            and abs(self.origin_error) <= tol
        )


def check_probability_function(g: WeightedPascalGraph, phi: ProbabilityFunction) -> ProbabilityCheck:
    """Forward-recursion and level-sum residuals over the truncation (diagnostic only)."""
    N = phi.N
    if N < 1:
        raise InvalidParameter("phi must be defined on a horizon N >= 1")
    worst, worst_pt = g.zero(), None
    for h, t in triangle_points(N - 1):
        r = phi(h, t) - g.w0(h, t) * phi(h, t + 1) - g.w1(h, t) * phi(h + 1, t)
        if worst_pt is None or abs(r) > abs(worst):
            worst, worst_pt = r, (h, t)
    d = dimension_table(g, N)
    level_err = g.zero()
    for n in range(N + 1):
        s = sum((phi(h, n - h) * d[h, n - h] for h in range(n + 1)), g.zero())
        if abs(s - 1) > abs(level_err):
            level_err = s - 1
    neg = next(((h, t, v) for (h, t), v in phi.items() if v < 0), None)
    return ProbabilityCheck(abs(worst), abs(level_err), neg, abs(phi(0, 0) - 1), worst_pt)


def kernel_from_phi(g: WeightedPascalGraph, phi: ProbabilityFunction) -> TransitionKernel:
    """p = w1 phi(h+1,t)/phi(h,t), q = w0 phi(h,t+1)/phi(h,t) on h+t <= N-1."""

    def support(h, t):
        return h + t <= phi.N - 1 and phi(h, t) > 0

    return TransitionKernel(
        lambda h, t: g.w1(h, t) * phi(h + 1, t) / phi(h, t),
        lambda h, t: g.w0(h, t) * phi(h, t + 1) / phi(h, t),
        support=support,
        horizon=phi.N - 1,
        name=f"kernel[{phi.provenance}]",
    )


def kernel_from_balance(g: WeightedPascalGraph, N: int = 64) -> TransitionKernel:
    """p = w1/sigma, q = w0/sigma for a balanced graph (balance certified on h+t <= N)."""
    bal = is_balanced(g, N)
    if not bal:
        raise NotBalanced(bal.witness)

    def p(h, t):
        return g.w1(h, t) / (g.w0(h, t) + g.w1(h, t))

    def q(h, t):
        return g.w0(h, t) / (g.w0(h, t) + g.w1(h, t))

    return TransitionKernel(p, q, name="balanced")


def doob_transform(g, phi_star: ProbabilityFunction, psi, tol: float = 0.0) -> ProbabilityFunction:
    """phi = psi * phi_star for a phi_star-harmonic psi with psi(0,0) = 1."""
    N = phi_star.N
    psi_fn = psi if callable(psi) else (lambda h, t: psi[h][t])
    vals = {(h, t): g.cast(psi_fn(h, t)) for h, t in triangle_points(N)}
    if abs(vals[0, 0] - 1) > tol:
        raise NotHarmonic((0, 0), vals[0, 0] - 1)
    neg = next((p for p, v in vals.items() if v < 0), None)
    if neg is not None:
        raise NotHarmonic(neg, vals[neg])
    ker = kernel_from_phi(g, phi_star)
    worst, worst_pt = 0, None
    for h, t in triangle_points(N - 1):
        if phi_star(h, t) == 0:
            continue
        r = vals[h, t] - ker.p(h, t) * vals[h + 1, t] - ker.q(h, t) * vals[h, t + 1]
        if abs(r) > abs(worst):
            worst, worst_pt = r, (h, t)
    if abs(worst) > tol:
        raise NotHarmonic(worst_pt, worst)
    table = table_from_function(lambda h, t: vals[h, t] * phi_star(h, t), N)
    return ProbabilityFunction(g, N, table, provenance=f"doob[{phi_star.provenance}]")


def pi_first_head(g: WeightedPascalGraph, phi: ProbabilityFunction):
    return g.w1(0, 0) * phi(1, 0)


def elementary_level_law(g: WeightedPascalGraph, terminal) -> list:
    """law[m][h] = Q_terminal(S_m = (h, m-h)) for m <= |terminal|."""
    terminal = grid_point(terminal)
    n = terminal.n
    d = dimension_table(g, n)
    K = kernel_grid(g, terminal, n)
    return [[d[h, m - h] * K[h][m - h] for h in range(m + 1)] for m in range(n + 1)]


@dataclass
class StochasticOrder:
    dominates: bool  # A >= B everywhere
    dominated: bool  # B >= A everywhere
    strict_points: list  # (h, m) with P_A(H_m >= h) > P_B(H_m >= h)
    tail_a: list
    tail_b: list
    all_heads_a: list  # P_A(H_m = m)
    all_heads_b: list

    @property
    def equal(self):
        return self.dominates and self.dominated


def stochastic_compare(g: WeightedPascalGraph, terminal_a, terminal_b) -> StochasticOrder:
    """Compare Q_A and Q_B through P(H_m >= h), m <= n, computed exactly."""
    A, B = grid_point(terminal_a), grid_point(terminal_b)
    if A.n != B.n:
        raise LevelMismatch(f"terminals {tuple(A)} and {tuple(B)} are on different levels")
    la, lb = elementary_level_law(g, A), elementary_level_law(g, B)

    def tails(law):
        out = []
        for row in law:
            acc, col = g.zero(), [None] * len(row)
            for h in range(len(row) - 1, -1, -1):
                acc += row[h]
                col[h] = acc
            out.append(col)
        return out

    ta, tb = tails(la), tails(lb)
    dom = all(x >= y for ra, rb in zip(ta, tb) for x, y in zip(ra, rb))
    domd = all(y >= x for ra, rb in zip(ta, tb) for x, y in zip(ra, rb))
    strict = [(h, m) for m, (ra, rb) in enumerate(zip(ta, tb)) for h, (x, y) in enumerate(zip(ra, rb)) if x > y]
    return StochasticOrder(dom, domd, strict, ta, tb, [r[-1] for r in la], [r[-1] for r in lb])


def transposed_phi(phi: ProbabilityFunction, g_transposed: WeightedPascalGraph) -> ProbabilityFunction:
    """phi on transpose(g) from phi on g: phi'(h,t) = phi(t,h)."""
    return ProbabilityFunction(
        g_transposed, phi.N, table_from_function(lambda h, t: phi(t, h), phi.N),
        provenance=f"transpose[{phi.provenance}]",
    )


def path_probability_from_kernel(kernel: TransitionKernel, bits, start=(0, 0)):
    h, t = start
    prob = 1
    for bit in bits:
        if bit:
            prob *= kernel.p(h, t)
            h += 1
        else:
            prob *= kernel.q(h, t)
            t += 1
    return prob


FAMILIES = {
    "bernoulli": lambda p: Bernoulli(p),
    "polya": lambda a, b: Polya(a, b),
    "crp": lambda alpha, theta: CRP(alpha, theta),
    "crp_gamma": lambda gamma: CRPGamma(gamma),
    "gstirling": lambda a, b, theta: GStirlingTheta(a, b, theta),
    "spacetime": lambda a, theta: space_time(a, theta),
    "stirling1": lambda theta: stirling1_theta(theta),
    "stirling2": lambda b, theta: stirling2_theta(b, theta),
    "qpascal": lambda q, m: QPascalExtreme(q, m),
    "qpolya": lambda q, alpha, beta: QPolya(q, alpha, beta),
    "friedman": lambda a=1, b=1: EulerianStar(a, b),
    "eulerian_finite": lambda a, b, m, side="heads": EulerianFinite(a, b, m, side),
}


def make_family(name: str, **params) -> MeasureFamily:
    try:
        ctor = FAMILIES[name]
    except KeyError:
        raise InvalidParameter(f"unknown measure family {name!r}; known: {sorted(FAMILIES)}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise InvalidParameter(f"{name}: {exc}") from None
