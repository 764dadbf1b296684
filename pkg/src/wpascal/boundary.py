"""Boundary classification, decomposition weights and moment checks.

Covers the families whose extreme measures are known in closed form:
generalized Stirling triangles (space-time walks, Stirling-II, CRP), q-Pascal
and generalized Eulerian triangles.  Anything else is reported as
``inconclusive`` rather than guessed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from .dims import triangle_points
from .errors import (
    DivergentCase,
    InvalidParameter,
    NotAMixture,
    TruncationFailure,
    UnsupportedFamily,
)
from .graph import Eulerian, GeneralizedStirling, Pascal, QPascal, Stirling1, Stirling2, WeightedPascalGraph
from .sequences import Const, FileSequence, Geometric, Linear, Power, Sequence, format_scalar, is_exact, parse_sequence

CONTINUOUS = "continuous"
DISCRETE = "discrete"
MIXED = "mixed-endpoints"
INCONCLUSIVE = "inconclusive"


def _num(x):
    """JSON-friendly number: exact values as 'p/q' strings, floats as floats."""
    if x is None:
        return None
    if is_exact(x):
        return format_scalar(x)
    return float(x)


# ---------------------------------------------------------------------------
# Elementary symmetric functions


def elementary_symmetric_all(xs, kmax: Optional[int] = None) -> list:
    """[e_0, ..., e_K] of the finite sequence ``xs`` by the column recurrence (K = len or kmax)."""
    xs = list(xs)
    K = len(xs) if kmax is None else min(kmax, len(xs))
    e = [1] + [0] * K
    for i, x in enumerate(xs, start=1):
        for k in range(min(i, K), 0, -1):
            e[k] = e[k] + x * e[k - 1]
    return e


def elementary_symmetric(xs, k: int):
    if k < 0:
        raise InvalidParameter("degree must be >= 0")
    xs = list(xs)
    if k > len(xs):
        return 0
    return elementary_symmetric_all(xs)[k]


def complete_homogeneous_all(xs, m: int) -> list:
    """[h_0, ..., h_m] of ``xs`` (sums of all monomials of degree k)."""
    h = [1] + [0] * m
    for x in xs:
        for k in range(1, m + 1):
            h[k] = h[k] + x * h[k - 1]
    return h


# ---------------------------------------------------------------------------
# Generalized Stirling-I (space-time walk) classification


@dataclass
class Classification:
    classification: str
    evidence: dict = field(default_factory=dict)

    def __str__(self):
        return self.classification


def _series_terms(a: Sequence, N: int):
    out = []
    for n in range(N):
        v = a(n)
        if not v > 0:
            raise InvalidParameter(f"a_{n} = {v} must be > 0")
        out.append(float(1 / (v + 2 + 1 / v)))  # a/(1+a)^2 without overflow
    return out


def _preset_divergence(a: Sequence) -> Optional[tuple]:
    """(diverges, reason) for closed-form presets, None if undecidable."""
    if isinstance(a, Const):
        if not a.c > 0:
            raise InvalidParameter("const a_n must be > 0")
        return True, "constant terms: the series has constant positive terms"
    if isinstance(a, Linear):
        if a.c < 0:
            raise InvalidParameter("linear a_n with negative slope is eventually negative")
        if a.c == 0:
            return _preset_divergence(Const(a.d))
        return True, "a_n ~ c n: terms ~ 1/(c n), harmonic divergence"
    if isinstance(a, Power):
        b = float(a.beta)
        if abs(b) <= 1:
            return True, f"a_n = (n+1)^{b}: terms ~ n^(-|beta|) with |beta| <= 1 diverge"
        return False, f"a_n = (n+1)^{b}: terms ~ n^(-|beta|) with |beta| > 1 converge"
    if isinstance(a, Geometric):
        c, r, d = a.c, a.r, a.d
        if r == 1:
            return _preset_divergence(Const(c + d))
        if r < 1:
            if d > 0:
                return True, "a_n -> d > 0: terms tend to a positive constant"
            if d < 0 or not c > 0:
                raise InvalidParameter("geometric a_n must stay positive")
            return False, "a_n = c r^n, r < 1: terms ~ c r^n, geometric convergence"
        if not c > 0:
            raise InvalidParameter("geometric a_n with r > 1 needs c > 0")
        return False, "a_n ~ c r^n, r > 1: terms ~ r^(-n)/c, geometric convergence"
    if isinstance(a, FileSequence) and a.tail is not None:
        res = _preset_divergence(a.tail)
        if res is not None:
            return res[0], f"decided by the tail rule {a.tail.spec()}: " + res[1]
    return None


def classify_gstirling1(a, N_probe: int = 1000) -> Classification:
    """Continuous iff sum_n a_n/(1+a_n)^2 diverges.

    Decided analytically for presets; file-backed sequences without a tail rule
    are ``inconclusive`` and carry partial sums as evidence.
    """
    a = parse_sequence(a)
    probe = N_probe if not isinstance(a, FileSequence) or a.tail is not None else min(N_probe, len(a))
    terms = _series_terms(a, probe)
    partial, checkpoints, acc = {}, set(), 0.0
    k = 1
    while k <= probe:
        checkpoints.add(k)
        k *= 10
    checkpoints.add(probe)
    for n, x in enumerate(terms, start=1):
        acc += x
        if n in checkpoints:
            partial[n] = acc
    evidence = {"series": "sum a_n/(1+a_n)^2", "sequence": a.spec(), "partial_sums": partial}
    res = _preset_divergence(a)
    if res is None:
        evidence["reason"] = "divergence cannot be decided from finitely many values"
        return Classification(INCONCLUSIVE, evidence)
    diverges, reason = res
    evidence["reason"] = reason
    evidence["diverges"] = diverges
    return Classification(CONTINUOUS if diverges else DISCRETE, evidence)


# ---------------------------------------------------------------------------
# Finitely supported measures on generalized Stirling triangles


@dataclass
class QmExistence:
    exists: Optional[bool]  # None: float tie within 1e-12, ambiguous
    pi: object = None
    note: str = ""

    def __bool__(self):
        return bool(self.exists)


TIE_TOL = 1e-12


def qm_exists_gstirling(b, a, m: int, probe: int = 64) -> QmExistence:
    """Q_{m,inf} exists iff b_m is a strict maximum of b_0..b_m; then pi = (b_m - b_0)/(b_m + a_0)."""
    a, b = parse_sequence(a), parse_sequence(b)
    if int(m) != m or m < 0:
        raise InvalidParameter("m must be a nonnegative integer")
    bm = b(m)
    for h in range(m + 1):
        for n in range(h, m + probe + 1):
            if not a(n) + b(h) > 0:
                raise InvalidParameter(f"a_{n} + b_{h} must be > 0 on the support of Q_{{{m},inf}}")
    exact = is_exact(bm) and all(is_exact(b(h)) for h in range(m))
    for h in range(m):
        bh = b(h)
        if not exact and abs(float(bm) - float(bh)) <= TIE_TOL * max(1.0, abs(float(bm))):
            return QmExistence(None, None, f"b_{m} and b_{h} tie within {TIE_TOL}; strictness is ambiguous")
        if not bm > bh:
            return QmExistence(False, None, f"b_{m} = {format_scalar(bm)} <= b_{h} = {format_scalar(bh)}")
    pi = (bm - b(0)) / (bm + a(0))
    if exact and is_exact(a(0)):
        pi = Fraction(bm - b(0)) / Fraction(bm + a(0))
    return QmExistence(True, pi, f"b_{m} is a strict running maximum")


def running_maxima(b, limit: int) -> list:
    """Indices m < limit with b_m > b_h for all h < m."""
    b = parse_sequence(b)
    out, best = [], None
    for m in range(limit):
        v = b(m)
        if best is None or v > best:
            out.append(m)
            best = v
    return out


# ---------------------------------------------------------------------------
# The Z-decomposition for space-time walks with discrete boundary


@dataclass
class ZDistribution:
    support: tuple  # (zmin, zmax) of the computed weights
    weights: dict  # z -> probability
    truncation_error_bound: float
    theta: object = None
    steps: int = 0  # number of time steps treated exactly
    range_note: str = ""
    tol: Optional[float] = None  # tolerance the truncation was asked to meet

    def total(self):
        return sum(self.weights.values())

    def __getitem__(self, z):
        return self.weights.get(z, 0)

    def items(self):
        return sorted(self.weights.items())


def _tail_bound_preset(seq: Sequence, theta, N: int) -> Optional[float]:
    """Upper bound on sum_{n >= N} min(p(n), q(n)) with p = theta/(theta + a_n).

    Uses min(p, q) <= min(theta/a_n, a_n/theta).
    """
    th = float(theta)
    if isinstance(seq, FileSequence):
        if seq.tail is None or N < len(seq):
            return None
        return _tail_bound_preset(seq.tail, theta, N)
    if isinstance(seq, Geometric) and seq.d == 0 and seq.r != 1:
        c, r = float(seq.c), float(seq.r)
        if r > 1:
            return th / (c * r**N * (1 - 1 / r))
        return c * r**N / (th * (1 - r))
    if isinstance(seq, Power):
        beta = float(seq.beta)
        if N < 1:
            return None
        if beta > 1:
            return th * N ** (1 - beta) / (beta - 1)
        if beta < -1:
            return N ** (beta + 1) / ((-beta - 1) * th)
    return None


def _z_from_probs(ps, kmax=None) -> dict:
    """Law of Z = #heads at times in L - #tails at times in M for independent steps.

    With ``kmax`` only configurations with at most kmax exceptional steps on
    each side are kept; the lost mass is 1 minus the total.
    """
    L = [p for p in ps if p <= 1 - p]
    M = [p for p in ps if p > 1 - p]
    eL = elementary_symmetric_all([p / (1 - p) for p in L], kmax)
    eM = elementary_symmetric_all([(1 - p) / p for p in M], kmax)
    base = 1
    for p in L:
        base *= 1 - p
    for p in M:
        base *= p
    out = {}
    for i, x in enumerate(eL):
        if x == 0:
            continue
        for j, y in enumerate(eM):
            z = i - j
            out[z] = out.get(z, 0) + x * y * base
    return out


def _step_probs(a: Sequence, theta, N: int, exact: bool):
    th = Fraction(theta) if exact else float(theta)
    ps = []
    for n in range(N):
        an = a(n)
        if not an > 0:
            raise InvalidParameter(f"a_{n} = {an} must be > 0")
        an = Fraction(an) if exact else float(an)
        ps.append(th / (th + an))
    return ps


def _choose_horizon(a: Sequence, theta, tol: float, max_steps: int):
    start = len(a) if isinstance(a, FileSequence) else 1
    N = max(start, 1)
    while N <= max_steps:
        bound = _tail_bound_preset(a, theta, N)
        if bound is None:
            raise TruncationFailure(
                f"no analytic tail estimate for {a.spec()}; a file-backed sequence needs a tail rule"
            )
        if bound <= tol:
            return N, bound
        N = N + 1 if N < 64 else int(N * 1.25)
    raise TruncationFailure(f"tail bound for {a.spec()} does not reach tol={tol} within {max_steps} steps")


def z_distribution(a, theta=1, tol: float = 1e-9, max_steps: int = 100_000, exact: Optional[bool] = None,
                   kmax: Optional[int] = None) -> ZDistribution:
    """Law of Z under P_theta, from elementary symmetric functions of the odds ratios.

    Steps n < N are treated exactly; N is the first horizon at which the
    analytic bound on sum_{n >= N} min(p(n), q(n)) drops below ``tol``.  That
    sum bounds the total variation between the true law and the returned one.
    A degree cap ``kmax`` drops configurations with many exceptional steps and
    adds the dropped mass to the bound.
    """
    a = parse_sequence(a)
    if not float(theta) > 0:
        raise InvalidParameter("theta must be > 0")
    cls = classify_gstirling1(a, N_probe=min(max_steps, 1000))
    if cls.classification == CONTINUOUS:
        raise DivergentCase(f"boundary is continuous for {a.spec()}; no Z decomposition ({cls.evidence['reason']})")
    N, bound = _choose_horizon(a, theta, tol, max_steps)
    if exact is None:
        exact = is_exact(theta) and all(is_exact(a(n)) for n in range(N)) and N <= 64
    ps = _step_probs(a, theta, N, exact)
    w = _z_from_probs(ps, kmax)
    if kmax is not None:
        bound += max(0.0, float(1 - sum(w.values())))
    zs = sorted(w)
    nL = sum(1 for p in ps if p <= 1 - p)
    return ZDistribution((zs[0], zs[-1]), w, float(bound), theta, N,
                         f"{nL} of the first {N} times in L", tol)


TOL_LADDER = (1e-12, 1e-9, 1e-6, 1e-3)


def z_distribution_best_effort(a, theta=1, tols=TOL_LADDER, max_steps: int = 20000, kmax: int = 64) -> ZDistribution:
    """First tolerance in ``tols`` whose truncation fits in ``max_steps``; the
    achieved tolerance is stored on the result as ``tol``."""
    for tol in tols:
        try:
            zd = z_distribution(a, theta, tol=tol, max_steps=max_steps, kmax=kmax)
        except TruncationFailure:
            continue
        return zd
    raise TruncationFailure(f"Z truncation for {parse_sequence(a).spec()} misses every tolerance in {tols}")


def z_conditional_pi(a, z: int, theta=1, tol: float = 1e-12, max_steps: int = 100_000, kmax=None):
    """pi(P_z^*) = P_theta(first step is a head | Z = z)."""
    a = parse_sequence(a)
    N, _ = _choose_horizon(a, theta, tol, max_steps)
    exact = is_exact(theta) and all(is_exact(a(n)) for n in range(N)) and N <= 64
    ps = _step_probs(a, theta, N, exact)
    total = _z_from_probs(ps, kmax)
    rest = _z_from_probs(ps[1:], kmax)
    p0 = ps[0]
    shift = 1 if p0 <= 1 - p0 else 0  # a head at time 0 counts toward Z only if 0 is in L
    denom = total.get(z, 0)
    if denom == 0:
        raise InvalidParameter(f"P(Z={z}) = 0")
    return p0 * rest.get(z - shift, 0) / denom


def z_by_enumeration(ps) -> dict:
    """Oracle: law of Z by summing over all 2^len(ps) head/tail sequences."""
    import itertools

    out = {}
    for bits in itertools.product((0, 1), repeat=len(ps)):
        prob, z = 1, 0
        for p, x in zip(ps, bits):
            prob *= p if x else 1 - p
            if p <= 1 - p and x:
                z += 1
            elif p > 1 - p and not x:
                z -= 1
        out[z] = out.get(z, 0) + prob
    return out


# ---------------------------------------------------------------------------
# Boundary reports


@dataclass
class Extreme:
    kind: str  # Q_{m,inf} | Q_{inf,m} | P_theta | P* | P_z | trivial
    pi: object
    m: Optional[int] = None
    theta: object = None
    z: Optional[int] = None
    certificate: str = ""

    def to_dict(self):
        d = {"kind": self.kind, "pi": _num(self.pi)}
        for key in ("m", "z"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        if self.theta is not None:
            d["theta"] = self.theta if isinstance(self.theta, str) else _num(self.theta)
        if self.certificate:
            d["certificate"] = self.certificate
        return d


@dataclass
class BoundaryReport:
    family: dict
    classification: str
    extremes: list
    accumulation_points: list
    evidence: dict = field(default_factory=dict)
    intervals: list = field(default_factory=list)  # closed pi-intervals contained in the boundary

    def pis(self):
        return [e.pi for e in self.extremes if e.pi is not None]

    def to_dict(self):
        return {
            "family": self.family,
            "classification": self.classification,
            "extremes": [e.to_dict() for e in self.extremes],
            "accumulation_points": [_num(x) for x in self.accumulation_points],
            "intervals": [[_num(lo), _num(hi)] for lo, hi in self.intervals],
            "evidence": _jsonable(self.evidence),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _with_endpoints(extremes):
    """Make sure the trivial measures with pi = 0 and pi = 1 are listed."""
    pis = [e.pi for e in extremes]
    out = list(extremes)
    if not any(p == 0 for p in pis if p is not None):
        out.insert(0, Extreme("trivial", Fraction(0), certificate="all-tails path Q_{0,inf}"))
    if not any(p == 1 for p in pis if p is not None):
        out.append(Extreme("trivial", Fraction(1), certificate="all-heads path Q_{inf,0}"))
    return out


def boundary_report(spec, m_list: int = 8, z_window: int = 4) -> BoundaryReport:
    """Extreme measures with their pi values for the analyzed families.

    ``m_list`` bounds how many members of an infinite sequence of extremes are
    listed; the pattern is recorded in the evidence.
    """
    if isinstance(spec, Pascal):
        return BoundaryReport(
            {"family": "pascal"}, CONTINUOUS,
            _with_endpoints([Extreme("P_theta", None, theta="Bernoulli(pi), pi in [0,1]")]),
            [], {"reason": "homogeneous Bernoulli measures"}, [(Fraction(0), Fraction(1))],
        )
    if isinstance(spec, Stirling1):
        spec = GeneralizedStirling(Linear(1, 1), Const(0))
    if isinstance(spec, Stirling2):
        spec = GeneralizedStirling(Const(0), Linear(1, 1))
    if isinstance(spec, GeneralizedStirling):
        return _report_gstirling(spec, m_list, z_window)
    if isinstance(spec, QPascal):
        return _report_qpascal(spec, m_list)
    if isinstance(spec, Eulerian):
        return _report_eulerian(spec, m_list)
    raise UnsupportedFamily(f"no boundary analysis for {getattr(spec, 'describe', lambda: spec)()}")


def _is_zero(seq):
    return isinstance(seq, Const) and seq.c == 0


def _report_gstirling(spec: GeneralizedStirling, m_list, z_window) -> BoundaryReport:
    a, b = spec.a, spec.b
    fam = spec.describe()
    if _is_zero(b):
        return _report_spacetime(a, fam, z_window)
    s = b.sup()
    if s == math.inf:
        ms = running_maxima(b, 10 * m_list + 10)[:m_list]
        ext = []
        for m in ms:
            res = qm_exists_gstirling(b, a, m)
            ext.append(Extreme("Q_{m,inf}", res.pi, m=m, certificate=res.note))
        return BoundaryReport(
            fam, DISCRETE, _with_endpoints(ext), [Fraction(1)],
            {"reason": "sup b_h = inf: Q_{m,inf} over strict running maxima, accumulating at pi = 1",
             "listed": f"first {len(ms)} running maxima"},
        )
    if _is_zero(a):
        return _report_stirling2(b, fam, m_list)
    raise UnsupportedFamily(f"boundary of {fam} with bounded b_h and a != 0 is not analyzed")


def _report_stirling2(b: Sequence, fam, m_list) -> BoundaryReport:
    s = b.sup()
    if s is None:
        raise UnsupportedFamily(f"sup of {b.spec()} is unknown (file without tail rule)")
    b0 = b(0)
    ms = running_maxima(b, 10 * m_list + 10)[:m_list]
    ext = []
    for m in ms:
        res = qm_exists_gstirling(b, Const(0), m)
        ext.append(Extreme("Q_{m,inf}", res.pi, m=m, certificate=res.note))
    sup_val = _exact_sup(b, s)
    acc = 1 - b0 / sup_val
    summable = b.summable()
    if summable:
        for m in range(m_list):
            pi, note = _stirling2_tail_pi(b, m)
            ext.append(Extreme("Q_{inf,m}", pi, m=m, certificate=note))
        ext.sort(key=lambda e: float(e.pi) if e.pi is not None else 2.0)
        return BoundaryReport(
            fam, DISCRETE, _with_endpoints(ext), [acc],
            {"reason": "sum b_h < inf: Q_{m,inf} (running maxima) and Q_{inf,m}, m >= 0",
             "sup_b": _num(sup_val)},
        )
    if summable is None:
        raise UnsupportedFamily(f"summability of {b.spec()} undecided")
    ext.append(Extreme("P_theta", None, theta=f"theta > {format_scalar(sup_val) if is_exact(sup_val) else sup_val}",
                       certificate="pi = 1 - b_0/theta fills the interval"))
    return BoundaryReport(
        fam, MIXED, _with_endpoints(ext), [acc],
        {"reason": "sum b_h = inf with bounded b: Q_{m,inf} plus the P_theta interval", "sup_b": _num(sup_val)},
        [(acc, Fraction(1) if is_exact(acc) else 1.0)],
    )


def _exact_sup(b: Sequence, s):
    """sup b_h as an exact number when the preset allows it."""
    if not getattr(b, "exact", False):
        return s
    if isinstance(b, Const):
        return Fraction(b.c)
    if isinstance(b, Linear) and b.c <= 0:
        return Fraction(b.d)
    if isinstance(b, Geometric):
        c, r, d = Fraction(b.c), Fraction(b.r), Fraction(b.d)
        if r < 1 and c < 0:
            return d
        return c + d
    return s


def _stirling2_tail_pi(b: Sequence, m: int, terms: int = 20000):
    """pi(Q_{inf,m}) = h_m(b_1, b_2, ...)/h_m(b_0, b_1, ...)."""
    if isinstance(b, Geometric) and b.d == 0:
        return b.r**m, "geometric b: h_m(b_1,...) = r^m h_m(b_0,...)"
    xs = [float(b(h)) for h in range(terms)]
    top = max(xs)
    xs = [x / top for x in xs]
    num = complete_homogeneous_all(xs[1:], m)[m]
    den = complete_homogeneous_all(xs, m)[m]
    return num / den, f"complete symmetric functions truncated at {terms} terms"


def _report_spacetime(a: Sequence, fam, z_window) -> BoundaryReport:
    cls = classify_gstirling1(a)
    if cls.classification == CONTINUOUS:
        a0 = a(0)
        ext = [Extreme("P_theta", None, theta="theta in (0,inf)",
                       certificate=f"pi = theta/(theta + {format_scalar(a0)}) covers (0,1)")]
        return BoundaryReport(fam, CONTINUOUS, _with_endpoints(ext), [], cls.evidence,
                              [(Fraction(0), Fraction(1))])
    if cls.classification == INCONCLUSIVE:
        return BoundaryReport(fam, INCONCLUSIVE, _with_endpoints([]), [], cls.evidence)
    try:
        zd = z_distribution_best_effort(a, 1)
        tol = zd.tol
    except TruncationFailure:
        zd = None
    if zd is None:
        cls.evidence["reason"] += "; no computable Z truncation"
        return BoundaryReport(fam, DISCRETE, _with_endpoints([]), _spacetime_accumulation(a), cls.evidence)
    ranked = sorted(zd.weights, key=lambda z: -zd.weights[z])
    zs = sorted(ranked[: 2 * z_window + 1])
    ext = [Extreme("P_z", z_conditional_pi(a, z, 1, tol=tol, max_steps=20000, kmax=64), z=z,
                   certificate=f"P_1(Z={z}) = {float(zd[z]):.3e}") for z in zs]
    acc = _spacetime_accumulation(a)
    ev = dict(cls.evidence)
    ev["reference_theta"] = 1
    ev["z_truncation_bound"] = zd.truncation_error_bound
    return BoundaryReport(fam, DISCRETE, _with_endpoints(ext), acc, ev)


def _spacetime_accumulation(a: Sequence) -> list:
    """1 if sum p < inf (a_n -> inf summably), 0 if sum q < inf, else both."""
    seq = a.tail if isinstance(a, FileSequence) else a
    if isinstance(seq, Geometric):
        return [Fraction(1)] if seq.r > 1 else [Fraction(0)]
    if isinstance(seq, Power):
        return [Fraction(1)] if seq.beta > 0 else [Fraction(0)]
    return [Fraction(0), Fraction(1)]


def _report_qpascal(spec: QPascal, m_list) -> BoundaryReport:
    q = spec.q
    fam = spec.describe()
    if q == 1:
        return boundary_report(Pascal())
    ext = []
    if q < 1:
        for m in range(m_list):
            ext.append(Extreme("Q_{inf,m}", q**m, m=m, certificate="at most m tails; pi = q^m"))
        acc = [Fraction(0)]
    else:
        for m in range(m_list):
            ext.append(Extreme("Q_{m,inf}", 1 - Fraction(q) ** (-m) if is_exact(q) else 1 - q ** (-m), m=m,
                               certificate="at most m heads; pi = 1 - q^-m"))
        acc = [Fraction(1)]
    ext.sort(key=lambda e: float(e.pi))
    return BoundaryReport(fam, DISCRETE, _with_endpoints(ext), acc,
                          {"reason": "E = {q^m} u {0} for q < 1, mirrored for q > 1"})


def _report_eulerian(spec: Eulerian, m_list) -> BoundaryReport:
    a, b = spec.a, spec.b
    if is_exact(a) and is_exact(b):
        a, b = Fraction(a), Fraction(b)
    ext = [Extreme("P*", a / (a + b), certificate="balanced measure phi = 1/(a+b)_n")]
    for m in range(m_list):
        ext.append(Extreme("Q_{m,inf}", a * m / ((m + b) * (a + b)), m=m, theta=m + b,
                           certificate="at most m heads"))
        ext.append(Extreme("Q_{inf,m}", a * (m + a + b) / ((m + a) * (a + b)), m=m,
                           certificate="at most m tails"))
    ext.sort(key=lambda e: float(e.pi))
    return BoundaryReport(spec.describe(), DISCRETE, _with_endpoints(ext), [a / (a + b)],
                          {"reason": "Q_{m,inf}, Q_{inf,m} and P*, accumulating at a/(a+b)"})


# ---------------------------------------------------------------------------
# Moment problems


@dataclass
class HausdorffResult:
    ok: bool
    phi: Optional[dict] = None  # (h, t) -> value
    witness: Optional[tuple] = None  # (h, t, value), first in level order

    def __bool__(self):
        return self.ok

    def table(self, N):
        return [[self.phi[h, t] for t in range(N - h + 1)] for h in range(N + 1)]


def hausdorff_check(g: WeightedPascalGraph, seq, N: int, tol: float = 0.0) -> HausdorffResult:
    """Rebuild phi from phi(., 0) by weighted differencing
    phi(h,t+1) = (phi(h,t) - w1(h,t) phi(h+1,t)) / w0(h,t)
    and report the first negative entry in level order."""
    seq = list(seq)
    if len(seq) < N + 1:
        raise InvalidParameter(f"need {N + 1} values, got {len(seq)}")
    if seq[0] != 1 and abs(seq[0] - 1) > tol:
        raise InvalidParameter(f"seq[0] must be 1, got {seq[0]}")
    phi = {}
    for h in range(N + 1):
        phi[h, 0] = g.cast(seq[h])
    for t in range(N):
        for h in range(N - t):
            phi[h, t + 1] = (phi[h, t] - g.w1(h, t) * phi[h + 1, t]) / g.w0(h, t)
    lim = 0 if g.exact else -tol
    for h, t in triangle_points(N):
        if phi[h, t] < lim:
            return HausdorffResult(False, phi, (h, t, phi[h, t]))
    return HausdorffResult(True, phi)


def q_mixture_sequence(atoms: dict, q, length: int, zero_atom=None) -> list:
    """seq(n) = sum_m mu_m q^{mn} + mu_0atom [n == 0]; atoms maps m -> mu_m."""
    total = sum(atoms.values())
    if zero_atom is None:
        zero_atom = 1 - total
    return [sum(mu * q ** (m * n) for m, mu in atoms.items()) + (zero_atom if n == 0 else 0) for n in range(length)]


@dataclass
class AtomRecovery:
    atoms: dict  # m -> mu({q^m})
    zero_atom: object  # mu({0})
    residual: float


def q_atom_recovery(seq, q, M_max: int, tol: float = 1e-10) -> AtomRecovery:
    """Solve seq(n) = sum_{m <= M_max} mu_m q^{mn} (n >= 1) by peeling.

    Step k replaces s(n) by s(n+1) - q^k s(n), which annihilates the q^{kn}
    component; after M_max steps the last coefficient is read off and the rest
    follow by back-substitution.  The leftover mass 1 - sum mu sits at 0.
    Any values beyond n = M_max+1 are used as a residual check.
    """
    if not 0 < q < 1:
        raise InvalidParameter("q must be in (0,1)")
    if len(seq) < M_max + 2:
        raise InvalidParameter(f"need at least M_max+2 = {M_max + 2} values")
    float_out = not (is_exact(q) and all(is_exact(x) for x in seq))
    Q = Fraction(q)
    S = [Fraction(x) for x in seq]
    x = [Q**m for m in range(M_max + 1)]
    # layers[k][n-1] = s^(k)(n), n = 1..M_max+1-k
    layers = [S[1 : M_max + 2]]
    for k in range(M_max):
        s = layers[-1]
        layers.append([s[i + 1] - x[k] * s[i] for i in range(len(s) - 1)])
    mu = [Fraction(0)] * (M_max + 1)
    for k in range(M_max, -1, -1):
        # s^(k)(1) = sum_{m >= k} mu_m x_m prod_{j<k} (x_m - x_j)
        acc = layers[k][0]
        for m in range(k + 1, M_max + 1):
            acc -= mu[m] * x[m] * _prod(x[m] - x[j] for j in range(k))
        mu[k] = acc / (x[k] * _prod(x[k] - x[j] for j in range(k)))
    zero = S[0] - sum(mu)
    model = [sum(mu[m] * x[m] ** n for m in range(M_max + 1)) + (zero if n == 0 else 0) for n in range(len(S))]
    residual = max(abs(u - v) for u, v in zip(model, S))
    cast = float if float_out else (lambda v: v)
    out = AtomRecovery({m: cast(v) for m, v in enumerate(mu)}, cast(zero), float(residual))
    if abs(S[0] - 1) > tol:
        raise NotAMixture(f"seq(0) = {float(S[0])} must equal the total mass 1")
    bad = [m for m, v in enumerate(mu) if v < -tol]
    if bad or zero < -tol:
        raise NotAMixture(f"negative atom weights at m={bad}{' and at 0' if zero < -tol else ''}")
    if residual > tol:
        raise NotAMixture(f"residual {float(residual):.3e} exceeds tol on the check points")
    return out


def _prod(it):
    out = Fraction(1)
    for v in it:
        out *= v
    return out
