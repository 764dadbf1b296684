"""Acceptance criteria 1-9, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the live
output) or ``python tests/test_acceptance.py`` for the summary alone.
"""

from __future__ import annotations

import json
import math
import time
from fractions import Fraction as F

import pytest

from wpascal.boundary import hausdorff_check, q_atom_recovery, q_mixture_sequence, z_by_enumeration, z_distribution
from wpascal.dims import (
    descent_count_oracle,
    dimension_table,
    fixed_heads_path,
    fixed_tails_path,
    martin_limit,
    record_count_oracle,
)
from wpascal.graph import Eulerian, GeneralizedStirling, Pascal, QPascal, Stirling1, crp_spec, make_graph
from wpascal.graph import transposition_cocycle
from wpascal.measures import (
    check_probability_function,
    make_family,
    phi_from_family,
    pi_first_head,
)
from wpascal.sequences import Const, FileSequence, Geometric, Linear
from wpascal.simulate import (
    SimulationJob,
    beta_ks,
    lln_diagnostic,
    run_job,
    sample_endpoints,
    z_estimate,
)


def report(num: int, ok: bool, detail: str, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


def q_binomial_product(n, k, q):
    """Gaussian binomial from the product formula (independent of any recurrence)."""
    num = den = F(1)
    for i in range(k):
        num *= 1 - q ** (n - i)
        den *= 1 - q ** (i + 1)
    return num / den


# --- 1 ------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    bad = []
    st = dimension_table(make_graph(Stirling1()), 8)
    eu = dimension_table(make_graph(Eulerian(1, 1)), 8)
    for n in range(9):
        rec, des = record_count_oracle(n), descent_count_oracle(n)
        bad += [("stirling1", n, h) for h in range(n + 1) if st[h, n - h] != rec[h]]
        bad += [("eulerian", n, h) for h in range(n + 1) if eu[h, n - h] != des[h]]
    q = F(1, 2)
    qp = dimension_table(make_graph(QPascal(q)), 20)
    bad += [("qpascal", h, t) for (h, t), v in qp.items() if v != q_binomial_product(h + t, h, q)]
    pa = dimension_table(make_graph(Pascal()), 30)
    bad += [("pascal", h, t) for (h, t), v in pa.items() if v != math.comb(h + t, h)]
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10
    return ok, f"dimension oracles, {len(bad)} mismatches, {dt:.2f}s (< 10s)"


# --- 2 ------------------------------------------------------------------

CATALOG = [
    ("polya", dict(a=2, b=3)),
    ("polya", dict(a=F(1, 2), b=F(7, 3))),
    ("crp", dict(alpha=F(1, 2), theta=F(3, 2))),
    ("crp", dict(alpha=0, theta=2)),
    ("crp", dict(alpha=-1, theta=3)),
    ("crp", dict(alpha=F(-1, 2), theta=2)),
    ("crp", dict(alpha=-6, theta=6)),
    ("gstirling", dict(a="linear:1,1", b="const:1", theta=3)),
    ("gstirling", dict(a="linear:1,1", b="linear:1,1", theta=4)),
    ("stirling2", dict(b="linear:1,1", theta=3)),
    ("stirling2", dict(b="geom:1,1/2", theta=2)),
    ("qpascal", dict(q=F(1, 2), m=0)),
    ("qpascal", dict(q=F(1, 2), m=3)),
    ("qpascal", dict(q=3, m=2)),
    ("spacetime", dict(a="power:2", theta=1)),
    ("spacetime", dict(a="geom:1,2", theta=F(1, 3))),
    ("stirling1", dict(theta=2)),
]


def criterion_2():
    failures = []
    for name, params in CATALOG:
        fam = make_family(name, **params)
        phi = phi_from_family(fam, 20, "exact")
        chk = check_probability_function(phi.graph, phi)
        exact = all(isinstance(v, F) for row in phi.values for v in row)
        if not (exact and chk.ok(0)):
            failures.append((name, params, chk))
    return not failures, f"{len(CATALOG)} catalog phi, exact zero residuals at h+t <= 20, failures {len(failures)}"


# --- 3 ------------------------------------------------------------------


def criterion_3():
    cases = [
        (Pascal(), lambda h, t: F(1)),
        (QPascal(F(1, 2)), lambda h, t: F(2)),
        (Stirling1(), lambda h, t: F(h + t + 1, h + t + 2)),
    ]
    bad = []
    for spec, expected in cases:
        g = make_graph(spec)
        # path probability = weight * phi(endpoint), so the ratio is a ratio of path weights
        for h in range(10):
            for t in range(10):
                prefix = [1] * h + [0] * t
                ht = prefix + [1, 0]  # (h,t)->(h+1,t)->(h+1,t+1)
                th = prefix + [0, 1]  # (h,t)->(h,t+1)->(h+1,t+1)
                ratio = g.path_weight(th) / g.path_weight(ht)
                if ratio != transposition_cocycle(g, (h, t)) or ratio != expected(h, t):
                    bad.append((spec.describe()["family"], h, t))
    return not bad, f"transposition cocycle on 10x10 grids (Pascal 1, q-Pascal 1/q, Stirling-I (n+1)/(n+2)), {len(bad)} mismatches"


# --- 4 ------------------------------------------------------------------


def criterion_4():
    q = F(1, 2)
    g = make_graph(QPascal(q))
    worst, pis, notes = 0.0, [], []
    converged = True
    for m in range(4):
        # the finitely supported extremes with pi = q^m live on paths with
        # at most m tails, so the Martin limit is taken along (n-m, m)
        res = martin_limit(g, fixed_tails_path(m), 8, tol=1e-10, budget=2000, mode="float")
        converged &= res.converged
        fam = make_family("qpascal", q=q, m=m)
        phi = phi_from_family(fam, 8)
        for h in range(9):
            for t in range(9 - h):
                worst = max(worst, abs(res[h, t] - float(phi(h, t))))
        pis.append(res[1, 0])
        # the literal (m, n-m) path collapses to the all-tails measure pi = 0
        lit = martin_limit(g, fixed_heads_path(m), 4, tol=1e-10, budget=400, mode="float")
        notes.append(lit[1, 0])
    order_ok = all(abs(p - 0.5**m) < 1e-9 for m, p in enumerate(pis)) and pis == sorted(pis, reverse=True)
    trivial = all(abs(x) < 1e-9 for x in notes)
    ok = converged and worst < 1e-9 and order_ok and trivial
    return ok, (f"q-Pascal(1/2) Martin limits m=0..3 converged={converged}, max |limit - closed form| = {worst:.1e}, "
                f"pi = {[round(p, 10) for p in pis]}")


# --- 5 ------------------------------------------------------------------


def criterion_5():
    rows = []
    # Stirling-II: a = 0, b_h = h+1; CRP(alpha=-6): a_n = n+1, b_h = 6(h+1)
    for label, spec in (("stirling2", GeneralizedStirling(Const(0), Linear(1, 1))), ("crp(-6)", crp_spec(-6))):
        g = make_graph(spec)
        for m in range(6):
            formula = F(spec.b(m) - spec.b(0)) / F(spec.b(m) + spec.a(0))
            res = martin_limit(g, fixed_heads_path(m), 2, tol=1e-12, budget=4000, mode="float")
            via_limit = pi_first_head(res.graph, res.to_phi())
            # the measure family built at theta = b_m gives the exact route
            fam = make_family("gstirling", a=spec.a, b=spec.b, theta=spec.b(m))
            phi = phi_from_family(fam, 2)
            exact = pi_first_head(phi.graph, phi)
            rows.append((label, m, res.converged, abs(via_limit - float(formula)), exact == formula))
    worst = max(r[3] for r in rows)
    ok = all(r[2] and r[4] for r in rows) and worst <= 1e-9
    return ok, f"pi(Q_(m,inf)) formula vs Martin-limit phi, Stirling-II and CRP(-6), m<=5: max diff {worst:.1e}"


# --- 6 ------------------------------------------------------------------


def toy_sequence():
    vals = tuple(F(3) ** (k % 3 - 1) for k in range(12))
    return FileSequence(vals, tail=Geometric(10**9, 10), source="toy12")


def criterion_6():
    t0 = time.perf_counter()
    a = toy_sequence()
    zd = z_distribution(a, theta=1, tol=1e-9)
    ps = [F(1) / (1 + a(n)) for n in range(12)]
    enum = z_by_enumeration(ps)
    diff = max(abs(float(enum.get(z, 0)) - float(zd[z])) for z in set(enum) | set(zd.weights))
    est = z_estimate(a, 1, 20, 100_000, seed=2024, workers=4)
    tv = est.tv_to(zd.weights)
    dt = time.perf_counter() - t0
    ok = diff <= max(zd.truncation_error_bound, 1e-15) + 1e-15 and zd.truncation_error_bound < 1e-6 \
        and tv < 0.02 and dt < 30
    return ok, (f"12-step Z: |exact - enumeration| = {diff:.1e} (bound {zd.truncation_error_bound:.1e}), "
                f"MC TV = {tv:.4f}, {dt:.1f}s")


# --- 7 ------------------------------------------------------------------


def criterion_7():
    out = []
    fr = lln_diagnostic(make_family("friedman", a=1, b=1), "n", 10_000, 1000, seed=7, workers=4)
    out.append(("friedman", abs(fr.mean - 0.5) < 0.02, f"|mean-1/2| = {abs(fr.mean - 0.5):.4f}"))
    polya = make_family("polya", a=2, b=3)
    H = sample_endpoints(polya.kernel(horizon=2000), 2000, 100_000, seed=11, workers=4)
    ks = beta_ks(H / 2000, 2, 3)
    out.append(("polya", ks < 0.02, f"KS = {ks:.4f}"))
    st = lln_diagnostic(make_family("stirling1", theta=2), "none", 100_000, 1000, seed=13, workers=4)
    exact = sum(2 / (2 + j + 1) for j in range(100_000))
    z = (st.mean - exact) / (st.sd / math.sqrt(1000))
    out.append(("stirling1", abs(z) < 5, f"mean {st.mean:.3f} vs {exact:.3f}, z = {z:.2f}"))
    return all(o[1] for o in out), "limit laws: " + "; ".join(f"{n} {d}" for n, _, d in out)


# --- 8 ------------------------------------------------------------------


def criterion_8():
    fails = []
    N = 10
    for name, params, spec in [
        ("polya", dict(a=2, b=3), Pascal()),
        ("bernoulli", dict(p=F(2, 7)), Pascal()),
        ("qpolya", dict(q=F(1, 2), alpha=1, beta=2), QPascal(F(1, 2))),
        ("qpascal", dict(q=F(1, 3), m=2), QPascal(F(1, 3))),
    ]:
        phi = phi_from_family(make_family(name, **params), N)
        res = hausdorff_check(make_graph(spec), [phi(h, 0) for h in range(N + 1)], N)
        if not res.ok or any(res.phi[h, t] != phi(h, t) for h in range(N + 1) for t in range(N + 1 - h)):
            fails.append(name)
    q = F(1, 2)
    atoms = {0: F(1, 10), 1: F(1, 5), 2: F(1, 20), 4: F(1, 4), 5: F(1, 8), 7: F(3, 40)}
    zero = 1 - sum(atoms.values())
    seq = q_mixture_sequence(atoms, q, 12, zero_atom=zero)
    rec = q_atom_recovery(seq, q, 8)
    err = max(abs(rec.atoms.get(m, 0) - atoms.get(m, 0)) for m in range(9))
    err = max(err, abs(rec.zero_atom - zero))
    if err > 1e-10:
        fails.append("atoms")
    viol = hausdorff_check(make_graph(Pascal()), [1, F(1, 2), F(3, 4), F(1, 2)], 3)
    if viol.ok or viol.witness[:2] != (1, 1):
        fails.append("witness")
    return not fails, f"moment round trips exact, 6-atom recovery error {float(err):.1e}, witness at {viol.witness[:2]}"


# --- 9 ------------------------------------------------------------------


def criterion_9():
    jobs = [
        SimulationJob("polya", {"a": "2", "b": "3"}, 50, 10_000, 99, ["endpoint", "scaled"]),
        SimulationJob("spacetime", {"a": "geom:1,2", "theta": "1"}, 40, 9000, 5, ["z"]),
        SimulationJob("crp", {"alpha": "1/2", "theta": "1"}, 60, 300, 3, ["blocks"]),
    ]
    same = True
    for job in jobs:
        a = json.dumps(run_job(job, workers=1), sort_keys=True)
        b = json.dumps(run_job(job, workers=1), sort_keys=True)
        c = json.dumps(run_job(job, workers=4), sort_keys=True)
        same &= a == b == c
    return same, f"{len(jobs)} jobs bit-identical across reruns and 1 vs 4 workers"


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, capsys):
    ok, detail = CRITERIA[num]()
    report(num, ok, detail, capsys)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num, fn in CRITERIA.items():
        ok, detail = fn()
        results.append(report(num, ok, detail))
    raise SystemExit(0 if all(results) else 1)
