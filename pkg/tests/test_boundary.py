import io
import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpascal.boundary import (
    CONTINUOUS,
    DISCRETE,
    INCONCLUSIVE,
    MIXED,
    boundary_report,
    classify_gstirling1,
    complete_homogeneous_all,
    elementary_symmetric,
    elementary_symmetric_all,
    hausdorff_check,
    q_atom_recovery,
    q_mixture_sequence,
    qm_exists_gstirling,
    running_maxima,
    z_by_enumeration,
    z_conditional_pi,
    z_distribution,
)
from wpascal.errors import DivergentCase, NotAMixture, TruncationFailure, UnsupportedFamily
from wpascal.graph import Eulerian, GeneralizedStirling, Pascal, QPascal, Stirling1, Stirling2, make_graph
from wpascal.io import read_z_csv, write_z_csv
from wpascal.measures import make_family, phi_from_family, pi_first_head
from wpascal.sequences import FileSequence, Geometric, parse_sequence

pos_rationals = st.fractions(min_value=F(1, 10), max_value=F(10), max_denominator=20)


def e_brute(xs, k):
    return sum(math.prod(c) for c in itertools.combinations(xs, k)) if k <= len(xs) else 0


def h_brute(xs, m):
    return sum(math.prod(c) for c in itertools.combinations_with_replacement(xs, m))


# --- symmetric functions ----------------------------------------------------


def test_elementary_examples():
    assert elementary_symmetric([1, 2, 3], 2) == 11
    assert elementary_symmetric([4, 5], 0) == 1 and elementary_symmetric([], 0) == 1
    assert elementary_symmetric([1, 2], 3) == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(pos_rationals, max_size=7))
def test_elementary_against_combinations(xs):
    assert elementary_symmetric_all(xs) == [e_brute(xs, k) for k in range(len(xs) + 1)]
    assert elementary_symmetric_all(xs, 2) == [e_brute(xs, k) for k in range(min(2, len(xs)) + 1)]


@settings(max_examples=30, deadline=None)
@given(st.lists(pos_rationals, min_size=1, max_size=5), st.integers(0, 4))
def test_complete_homogeneous_against_multisets(xs, m):
    assert complete_homogeneous_all(xs, m) == [h_brute(xs, k) for k in range(m + 1)]


# --- classification ---------------------------------------------------------


@pytest.mark.parametrize("beta", ["-2", "-1", "-1/2", "0", "1/2", "1", "2"])
def test_beta_dichotomy(beta):
    cls = classify_gstirling1(f"power:{beta}")
    expected = CONTINUOUS if abs(F(beta)) <= 1 else DISCRETE
    assert cls.classification == expected


def test_classification_examples():
    assert classify_gstirling1("const:1").classification == CONTINUOUS
    assert classify_gstirling1("geom:1,1/2").classification == DISCRETE
    fs = FileSequence((F(1), F(2), F(3)))
    res = classify_gstirling1(fs)
    assert res.classification == INCONCLUSIVE and res.evidence["partial_sums"][3] == pytest.approx(
        sum(a / (1 + a) ** 2 for a in (1, 2, 3)))
    tailed = FileSequence((F(1), F(2)), tail=Geometric(1, 2))
    assert classify_gstirling1(tailed).classification == DISCRETE


def test_partial_sums_grow_in_divergent_case():
    sums = classify_gstirling1("power:1", N_probe=1000).evidence["partial_sums"]
    assert sums[1000] > sums[100] > sums[10]


# --- finitely supported measures --------------------------------------------


def test_qm_exists_examples():
    res = qm_exists_gstirling("linear:1,1", "const:0", 3)
    assert res.exists and res.pi == F(3, 4)
    assert not qm_exists_gstirling("power:-1", "const:0", 1)
    crp = qm_exists_gstirling("linear:1,1", "linear:1,1", 2)  # b_h = -alpha(h+1), alpha = -1
    assert crp.pi == F(1, 2)
    assert qm_exists_gstirling("linear:1,1", "const:0", 0).pi == 0


@pytest.mark.parametrize("b,a", [("linear:1,1", "const:0"), ("linear:1,1", "linear:1,1"),
                                 ("linear:1/2,1", "linear:2,1"), ("geom:-1,1/2,2", "const:1")])
def test_qm_pi_matches_phi(b, a):
    for m in running_maxima(b, 6):
        res = qm_exists_gstirling(b, a, m)
        fam = make_family("gstirling", a=a, b=b, theta=parse_sequence(b)(m))
        phi = phi_from_family(fam, 4)
        assert res.pi == pi_first_head(phi.graph, phi)


def test_running_maxima():
    assert running_maxima("linear:1,1", 5) == [0, 1, 2, 3, 4]
    assert running_maxima("power:-1", 5) == [0]
    assert running_maxima(FileSequence((1, 3, 2, 3, 4)), 5) == [0, 1, 4]


# --- Z decomposition --------------------------------------------------------


def toy(values):
    return FileSequence(tuple(values), tail=Geometric(10**9, 10))


@settings(max_examples=25, deadline=None)
@given(st.lists(pos_rationals, min_size=1, max_size=9), st.sampled_from([F(1), F(1, 2), F(3)]))
def test_z_against_enumeration(values, theta):
    zd = z_distribution(toy(values), theta=theta, exact=True)
    ps = [theta / (theta + a) for a in values]
    ref = z_by_enumeration(ps)
    diff = sum(abs(zd[z] - ref.get(z, 0)) for z in set(ref) | set(zd.weights))
    assert diff <= zd.truncation_error_bound
    assert all(w >= 0 for w in zd.weights.values())


def test_z_twelve_step_toy():
    values = [F(3) ** (k % 3 - 1) for k in range(12)]
    zd = z_distribution(toy(values), exact=True)
    ref = z_by_enumeration([1 / (1 + a) for a in values])
    assert all(zd[z] == ref.get(z, 0) for z in set(ref) | set(zd.weights))
    assert zd.steps == 12


def test_z_normalization_fast_growth():
    zd = z_distribution("geom:1,4", theta=1, tol=1e-12)
    assert abs(float(zd.total()) - 1) <= zd.truncation_error_bound + 1e-15
    assert zd.truncation_error_bound <= 1e-12
    # a_n = 4^n gives p(n) <= 1/2 everywhere, so M is empty and Z is the total number of heads
    assert zd.support[0] == 0
    no_heads = math.prod(4.0**n / (1 + 4.0**n) for n in range(zd.steps))
    assert float(zd[0]) == pytest.approx(no_heads, rel=1e-12)


def test_z_degenerate_single_step():
    zd = z_distribution(toy([F(1)]), exact=True)
    assert zd[0] == pytest.approx(F(1, 2), abs=1e-8) and zd[1] == pytest.approx(F(1, 2), abs=1e-8)


def test_z_errors():
    with pytest.raises(DivergentCase):
        z_distribution("power:1")
    with pytest.raises(TruncationFailure):
        z_distribution(FileSequence((F(1), F(2))))


def test_z_conditional_pi_averages_to_pi():
    # P_theta = sum_z P(Z=z) P_z, so the first-head probabilities average back
    a = toy([F(1, 2), F(2), F(5), F(1, 3), F(7)])
    zd = z_distribution(a, exact=True)
    avg = sum(w * z_conditional_pi(a, z) for z, w in zd.items())
    assert float(avg) == pytest.approx(1 / (1 + 0.5), abs=1e-8)


def test_z_csv_round_trip():
    zd = z_distribution(toy([F(1, 2), F(3), F(2)]), exact=True)
    buf = io.StringIO()
    write_z_csv(zd, buf)
    buf.seek(0)
    weights, bound = read_z_csv(buf)
    assert weights == zd.weights and bound == zd.truncation_error_bound


# --- reports ----------------------------------------------------------------


def endpoints_present(rep):
    pis = rep.pis()
    assert 0 in pis and 1 in pis
    assert all(0 <= p <= 1 for p in pis)


def test_report_stirling2_bounded():
    b = "geom:-1,1/2,2"  # b_h = 2 - 2^-h
    rep = boundary_report(GeneralizedStirling("const:0", b))
    endpoints_present(rep)
    assert rep.classification == MIXED
    assert rep.accumulation_points == [F(1, 2)]
    seq = parse_sequence(b)
    qm = [e for e in rep.extremes if e.kind == "Q_{m,inf}"]
    for e in qm:
        assert e.pi == (seq(e.m) - seq(0)) / seq(e.m)
    assert all(e.pi < F(1, 2) for e in qm)
    assert rep.intervals == [(F(1, 2), F(1))]


def test_report_stirling2_unbounded():
    rep = boundary_report(Stirling2(), m_list=6)
    endpoints_present(rep)
    assert rep.classification == DISCRETE and rep.accumulation_points == [1]
    assert [e.pi for e in rep.extremes if e.kind == "Q_{m,inf}"] == [F(m, m + 1) for m in range(6)]


def test_report_stirling2_summable():
    rep = boundary_report(GeneralizedStirling("const:0", "geom:1,1/2"), m_list=4)
    endpoints_present(rep)
    tails = {e.m: e.pi for e in rep.extremes if e.kind == "Q_{inf,m}"}
    assert tails == {m: F(1, 2) ** m for m in range(4)}
    # accumulation at 1 - b_0/sup b = 0
    assert rep.accumulation_points == [0]


def test_report_qpascal():
    rep = boundary_report(QPascal(F(1, 2)), m_list=6)
    endpoints_present(rep)
    assert sorted(rep.pis()) == sorted({F(0)} | {F(1, 2) ** m for m in range(6)})
    assert rep.accumulation_points == [0]


def test_report_qpascal_pis_match_phi():
    q = F(1, 2)
    rep = boundary_report(QPascal(q), m_list=4)
    for e in rep.extremes:
        if e.kind == "Q_{inf,m}":
            phi = phi_from_family(make_family("qpascal", q=q, m=e.m), 3)
            assert e.pi == pi_first_head(phi.graph, phi)


def test_report_eulerian():
    rep = boundary_report(Eulerian(1, 1), m_list=5)
    endpoints_present(rep)
    star = [e for e in rep.extremes if e.kind == "P*"]
    assert len(star) == 1 and star[0].pi == F(1, 2)
    for e in rep.extremes:
        if e.kind in ("Q_{m,inf}", "Q_{inf,m}") and e.m:
            side = "heads" if e.kind == "Q_{m,inf}" else "tails"
            phi = phi_from_family(make_family("eulerian_finite", a=1, b=1, m=e.m, side=side), 3)
            assert e.pi == pi_first_head(phi.graph, phi)


def test_report_continuous_cases():
    for spec in (Pascal(), Stirling1(), GeneralizedStirling("power:1", "const:0")):
        rep = boundary_report(spec)
        endpoints_present(rep)
        assert rep.classification == CONTINUOUS and rep.intervals == [(0, 1)]


def test_report_spacetime_discrete():
    rep = boundary_report(GeneralizedStirling("power:2", "const:0"), z_window=2)
    endpoints_present(rep)
    assert rep.classification == DISCRETE
    assert any(e.kind == "P_z" for e in rep.extremes)
    assert rep.accumulation_points == [1]


def test_report_file_sequence_inconclusive():
    rep = boundary_report(GeneralizedStirling(FileSequence((F(1), F(2))), "const:0"))
    assert rep.classification == INCONCLUSIVE
    with pytest.raises(UnsupportedFamily):
        boundary_report(GeneralizedStirling("const:1", "const:1"))


def test_report_serializes():
    d = boundary_report(QPascal(F(1, 3)), m_list=3).to_dict()
    assert d["classification"] == DISCRETE and d["extremes"][0]["pi"] in (0, "0")


# --- moment problems --------------------------------------------------------


def binomial_differences(seq, h, t):
    return sum((-1) ** j * math.comb(t, j) * seq[h + j] for j in range(t + 1))


def test_hausdorff_bernoulli():
    seq = [F(1, 2) ** n for n in range(9)]
    res = hausdorff_check(make_graph(Pascal()), seq, 8)
    assert res.ok
    assert all(v == F(1, 2) ** (h + t) for (h, t), v in res.phi.items())


def test_hausdorff_witness():
    seq = [F(1), F(1), F(1), F(1, 2)]
    res = hausdorff_check(make_graph(Pascal()), seq, 3)
    assert not res.ok
    h, t, v = res.witness
    assert v == binomial_differences(seq, h, t) < 0
    # every earlier entry in level order is nonnegative
    for n in range(h + t + 1):
        for hh in range(n + 1):
            if (n, hh) < (h + t, h):
                assert binomial_differences(seq, hh, n - hh) >= 0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=12), min_size=1, max_size=3),
       st.integers(0, 6))
def test_hausdorff_pascal_matches_binomial_differences(ps, N):
    # moments of a discrete mixture of Bernoulli laws
    seq = [sum(p**n for p in ps) / len(ps) for n in range(N + 1)]
    res = hausdorff_check(make_graph(Pascal()), seq, N)
    assert res.ok
    assert all(v == binomial_differences(seq, h, t) for (h, t), v in res.phi.items())


@pytest.mark.parametrize("name,params", [
    ("polya", dict(a=2, b=3)), ("stirling1", dict(theta=F(3, 2))),
    ("qpascal", dict(q=F(1, 3), m=2)), ("friedman", dict(a=1, b=2)),
])
def test_hausdorff_reconstructs_phi(name, params):
    phi = phi_from_family(make_family(name, **params), 8)
    seq = [phi(n, 0) for n in range(9)]
    res = hausdorff_check(phi.graph, seq, 8)
    assert res.ok and all(res.phi[h, t] == v for (h, t), v in phi.items())


def test_hausdorff_q_mixture():
    q = F(1, 2)
    seq = q_mixture_sequence({m: F(1, 3) for m in range(3)}, q, 9)
    assert hausdorff_check(make_graph(QPascal(q)), seq, 8).ok


def test_atom_examples():
    rec = q_atom_recovery([F(1)] * 8, F(1, 2), 4)
    assert rec.atoms[0] == 1 and all(rec.atoms[m] == 0 for m in range(1, 5)) and rec.zero_atom == 0
    seq = [F(1, 2) + F(1, 2) ** (n + 1) for n in range(8)]
    rec = q_atom_recovery(seq, F(1, 2), 3)
    assert rec.atoms[0] == F(1, 2) and rec.atoms[1] == F(1, 2) and rec.zero_atom == 0
    with pytest.raises(NotAMixture):
        q_atom_recovery([F(1, 3) ** n for n in range(10)], F(1, 2), 6)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 10), min_size=8, max_size=8), st.sampled_from([F(1, 2), F(1, 3), F(2, 3)]))
def test_atom_round_trip(raw, q):
    total = sum(raw)
    if total == 0:
        raw[0] = total = 1
    weights = [F(x, total) for x in raw]
    atoms = dict(enumerate(weights[:7]))
    zero = weights[7]
    seq = q_mixture_sequence(atoms, q, 10, zero_atom=zero)
    rec = q_atom_recovery(seq, q, 6)
    assert rec.atoms == atoms and rec.zero_atom == zero and rec.residual == 0


def test_atom_float_mode():
    seq = q_mixture_sequence({0: 0.25, 2: 0.75}, 0.5, 8)
    rec = q_atom_recovery(seq, 0.5, 4, tol=1e-9)
    assert rec.atoms[2] == pytest.approx(0.75, abs=1e-9)
