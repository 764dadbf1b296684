"""Built-in oracle suites run by ``wpascal self-check``.

Each check pairs an implementation route with an independent one
(enumeration, a textbook recurrence, or brute-force path sums).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .boundary import hausdorff_check, q_atom_recovery, q_mixture_sequence, z_by_enumeration, z_distribution
from .dims import (
    brute_force_dimension,
    descent_count_oracle,
    dimension_table,
    q_binomial,
    record_count_oracle,
    stirling1_unsigned,
)
from .graph import Eulerian, Pascal, QPascal, Stirling1, make_graph, transposition_cocycle
from .measures import FAMILIES, check_probability_function, make_family, phi_from_family
from .sequences import FileSequence, Geometric

SAMPLE_FAMILIES = {
    "bernoulli": dict(p=Fraction(1, 3)),
    "polya": dict(a=2, b=3),
    "crp": dict(alpha=Fraction(1, 2), theta=1),
    "gstirling": dict(a="linear:1,1", b="const:1", theta=2),
    "spacetime": dict(a="power:2", theta=1),
    "stirling1": dict(theta=3),
    "stirling2": dict(b="linear:1,1", theta=3),
    "qpascal": dict(q=Fraction(1, 2), m=2),
    "qpolya": dict(q=Fraction(1, 2), alpha=1, beta=2),
    "friedman": dict(a=1, b=2),
    "eulerian_finite": dict(a=1, b=1, m=2, side="tails"),
}


def check_dimensions():
    N = 7
    bad = []
    st = dimension_table(make_graph(Stirling1()), N)
    rec = record_count_oracle(N)
    bad += [("stirling1", h) for h in range(N + 1) if st[h, N - h] != rec[h]]
    bad += [("stirling1-rec", h) for h in range(N + 1) if st[h, N - h] != stirling1_unsigned(N + 1, h + 1)]
    eu = dimension_table(make_graph(Eulerian(1, 1)), N)
    des = descent_count_oracle(N)
    bad += [("eulerian", h) for h in range(N + 1) if eu[h, N - h] != des[h]]
    q = Fraction(1, 3)
    qp = dimension_table(make_graph(QPascal(q)), N)
    bad += [("qpascal", h) for h in range(N + 1) if qp[h, N - h] != q_binomial(N, h, q)]
    pa = dimension_table(make_graph(Pascal()), N)
    bad += [("pascal", h) for h in range(N + 1) if pa[h, N - h] != math.comb(N, h)]
    g = make_graph(Eulerian(Fraction(1, 2), 3))
    bad += [("brute", h) for h in range(6) if dimension_table(g, 5)[h, 5 - h] != brute_force_dimension(g, h, 5 - h)]
    return not bad, f"mismatches: {bad}" if bad else "stirling1, eulerian, q-pascal, pascal, brute force agree"


def check_probability_functions():
    worst = []
    for name, params in SAMPLE_FAMILIES.items():
        fam = make_family(name, **params)
        phi = phi_from_family(fam, 12)
        if not check_probability_function(phi.graph, phi).ok(0):
            worst.append(name)
    missing = sorted(set(FAMILIES) - set(SAMPLE_FAMILIES) - {"crp_gamma"})
    ok = not worst and not missing
    return ok, f"nonzero residuals: {worst}, untested: {missing}" if not ok else f"{len(SAMPLE_FAMILIES)} families exact"


def check_cocycle():
    bad = []
    for spec in (Pascal(), QPascal(Fraction(1, 2)), Stirling1()):
        g = make_graph(spec)
        for h in range(6):
            for t in range(6):
                w = g.w0(h, t) * g.w1(h, t + 1) / (g.w1(h, t) * g.w0(h + 1, t))
                path_a = g.w1(h, t) * g.w0(h + 1, t)
                path_b = g.w0(h, t) * g.w1(h, t + 1)
                if transposition_cocycle(g, (h, t)) != w or path_a * w != path_b:
                    bad.append((spec.describe()["family"], h, t))
    return not bad, f"failures: {bad[:5]}" if bad else "exact on a 6x6 grid"


def check_z():
    a = FileSequence(tuple(Fraction(3) ** (k % 3 - 1) for k in range(12)), tail=Geometric(10**9, 10))
    zd = z_distribution(a, theta=1, exact=True)
    ps = [Fraction(1) / (1 + a(n)) for n in range(12)]
    ref = z_by_enumeration(ps)
    diff = max(abs(zd[z] - ref.get(z, 0)) for z in set(ref) | set(zd.weights))
    return diff == 0, f"max |Z - enumeration| = {float(diff):.3g}"


def check_moments():
    atoms = {0: Fraction(1, 4), 1: Fraction(1, 3), 3: Fraction(1, 6)}
    q = Fraction(1, 2)
    seq = q_mixture_sequence(atoms, q, 10)
    rec = q_atom_recovery(seq, q, 4)
    ok_atoms = all(rec.atoms.get(m, 0) == atoms.get(m, 0) for m in range(5))
    haus = hausdorff_check(make_graph(QPascal(q)), seq, 8)
    pure = hausdorff_check(make_graph(Pascal()), [Fraction(1, 3) ** n for n in range(9)], 8)
    bad2 = hausdorff_check(make_graph(Pascal()), [1, Fraction(1, 2), Fraction(3, 4)], 2)
    ok = ok_atoms and haus.ok and pure.ok and not bad2.ok
    return ok, "atoms recovered exactly; mixture and non-mixture classified"


CHECKS = [
    ("dimensions", check_dimensions),
    ("probability-functions", check_probability_functions),
    ("transposition-cocycle", check_cocycle),
    ("z-distribution", check_z),
    ("moments", check_moments),
]


def run_all():
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, reported rather than raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
