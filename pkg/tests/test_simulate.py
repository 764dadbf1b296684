import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import stats

from wpascal.boundary import z_by_enumeration, z_distribution
from wpascal.errors import DivergentCase, HorizonMismatch, InvalidParameter
from wpascal.graph import Eulerian, make_graph, transposition_cocycle
from wpascal.measures import elementary_level_law, make_family, phi_from_family, stochastic_compare
from wpascal.sequences import FileSequence, Geometric
from wpascal.simulate import (
    BLOCK,
    SimulationJob,
    compare_counts,
    coupon_collector_endpoints,
    coupon_collector_sample,
    crp_gamma_new_block_prob,
    crp_gamma_sample,
    crp_sample,
    empirical_vs_exact,
    exact_endpoint_law,
    exchangeability_check,
    lln_diagnostic,
    run_job,
    sample_conditioned,
    sample_endpoints,
    sample_paths,
    z_estimate,
)

R5 = 100_000


def five_sigma(p, R):
    return 5 * math.sqrt(p * (1 - p) / R) + 1e-12


def assert_close_to_law(freqs, law, R):
    for f, p in zip(freqs, law):
        assert abs(f - p) <= five_sigma(p, R)


# --- determinism ------------------------------------------------------------


def test_determinism_and_worker_invariance():
    ker = make_family("polya", a=2, b=3).kernel(horizon=8)
    R = 2 * BLOCK + 17
    a = sample_paths(ker, 8, R, seed=7, keep_paths=True)
    b = sample_paths(ker, 8, R, seed=7, keep_paths=True, workers=3)
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.paths, b.paths)
    c = sample_paths(ker, 8, R, seed=8)
    assert not np.array_equal(a.counts, c.counts)
    assert a.counts.sum() == R


def test_run_job_worker_invariance():
    job = SimulationJob("spacetime", {"a": "power:2", "theta": "1"}, 30, 5000, 3, ["endpoint", "scaled", "z"])
    assert json.dumps(run_job(job, 1), sort_keys=True) == json.dumps(run_job(job, 4), sort_keys=True)


# --- endpoint laws ----------------------------------------------------------


def test_polya_uniform_endpoint():
    fam = make_family("polya", a=1, b=1)
    phi = phi_from_family(fam, 3)
    law = exact_endpoint_law(phi.graph, phi, 3)
    # (1)_h (1)_t / (2)_3 * C(3,h) = h! t! / 4! * 3!/(h! t!) = 1/4
    assert np.allclose(law, 0.25)
    hist = sample_paths(fam.kernel(horizon=3), 3, R5, seed=1)
    assert_close_to_law(hist.freqs(), law, R5)


def test_pascal_binomial_endpoint():
    hist = sample_paths(make_family("bernoulli", p=F(1, 2)).kernel(horizon=4), 4, R5, seed=2)
    assert abs(hist.freqs()[2] - 6 / 16) <= five_sigma(6 / 16, R5)


def test_finite_support_kernel_stays_in_support():
    # on the heads side of q-Pascal, Q_{1,inf} allows at most one head
    H = sample_endpoints(make_family("qpascal", q=2, m=1).kernel(horizon=40), 40, 20_000, seed=3)
    assert H.max() <= 1 and H.max() == 1


def test_polya_tv_seed_42():
    fam = make_family("polya", a=1, b=1)
    phi = phi_from_family(fam, 6)
    cmp = empirical_vs_exact(sample_paths(fam.kernel(horizon=6), 6, R5, seed=42), phi.graph, phi)
    assert cmp.total_variation < 0.01 and cmp.passed


def test_wrong_phi_is_rejected():
    fam = make_family("polya", a=2, b=3)
    phi = phi_from_family(fam, 6)
    hist = sample_paths(fam.kernel(horizon=6), 6, R5, seed=5)
    probs = exact_endpoint_law(phi.graph, phi, 6)
    probs[[0, 3]] = probs[[3, 0]]
    cmp = compare_counts(hist.counts, probs, R5)
    assert not cmp.passed and cmp.p_value < 1e-10


def test_single_replicate_reports_raw_tv():
    fam = make_family("polya", a=1, b=1)
    phi = phi_from_family(fam, 3)
    cmp = empirical_vs_exact(sample_paths(fam.kernel(horizon=3), 3, 1, seed=0), phi.graph, phi)
    assert cmp.passed is None and cmp.chi_square is None and cmp.total_variation == pytest.approx(0.75)


def test_horizon_mismatch():
    fam = make_family("polya", a=1, b=1)
    phi = phi_from_family(fam, 3)
    with pytest.raises(HorizonMismatch):
        exact_endpoint_law(phi.graph, phi, 5)


SIM_CATALOG = [
    ("bernoulli", dict(p=F(2, 7))),
    ("polya", dict(a=F(3, 2), b=F(2, 5))),
    ("crp", dict(alpha=F(1, 3), theta=F(1, 2))),
    ("crp", dict(alpha=-1, theta=4)),
    ("crp_gamma", dict(gamma=F(1, 3))),
    ("gstirling", dict(a="linear:1,1", b="geom:1,1/2,1", theta=3)),
    ("spacetime", dict(a="power:-1", theta=F(1, 2))),
    ("stirling1", dict(theta=F(5, 3))),
    ("stirling2", dict(b="linear:1,1", theta=4)),
    ("qpascal", dict(q=F(1, 2), m=1)),
    ("qpolya", dict(q=F(1, 3), alpha=2, beta=1)),
    ("friedman", dict(a=2, b=3)),
    ("eulerian_finite", dict(a=1, b=2, m=3, side="heads")),
    ("eulerian_finite", dict(a=F(1, 2), b=1, m=2, side="tails")),
]


@pytest.mark.parametrize("name,params", SIM_CATALOG, ids=[n for n, _ in SIM_CATALOG])
def test_catalog_kernels_reproduce_endpoint_law(name, params):
    fam = make_family(name, **params)
    phi = phi_from_family(fam, 6)
    cmp = empirical_vs_exact(sample_paths(fam.kernel(horizon=6), 6, R5, seed=11), phi.graph, phi)
    assert cmp.total_variation < 0.015 and cmp.passed


# --- LLN diagnostics --------------------------------------------------------


def test_stirling1_exact_mean():
    theta = 2
    res = lln_diagnostic(make_family("stirling1", theta=theta), "none", 2000, 400, seed=4)
    assert res.exact_mean == pytest.approx(sum(theta / (theta + j + 1) for j in range(2000)))
    assert abs(res.z_score) < 5


def test_friedman_concentration():
    res = lln_diagnostic(make_family("friedman", a=1, b=1), "n", 2000, 200, seed=5)
    assert abs(res.mean - 0.5) < 5 * res.stderr + 1e-3
    assert sum(res.histogram["counts"]) == 200


def test_scaler_errors():
    with pytest.raises(InvalidParameter):
        lln_diagnostic(make_family("polya", a=1, b=1), "cube", 10, 10, seed=0)


# --- Z estimation -----------------------------------------------------------


def test_z_estimate_toy():
    values = [F(3) ** (k % 3 - 1) for k in range(12)]
    a = FileSequence(tuple(values), tail=Geometric(10**9, 10))
    ref = z_by_enumeration([1 / (1 + float(x)) for x in values])
    est = z_estimate(a, 1, 12, R5, seed=6)
    assert est.tv_to(ref) < 0.02


def test_z_estimate_concentrates_when_heads_are_certain():
    a = Geometric(F(1, 10**9), F(1, 10))  # a_n -> 0, so p(n) -> 1 and every step is in M
    est = z_estimate(a, 1, 20, 5000, seed=7)
    assert est.counts == {0: 5000}


def test_z_estimate_fast_growth():
    zd = z_distribution("geom:1,4", theta=1, tol=1e-12)
    est = z_estimate("geom:1,4", 1, 40, R5, seed=8)
    assert est.tv_to(zd.weights) < zd.truncation_error_bound + 0.02


def test_z_estimate_continuous_case():
    with pytest.raises(DivergentCase):
        z_estimate("power:1", 1, 10, 10, seed=0)


# --- partitions -------------------------------------------------------------


def test_crp_block_count_mean():
    theta, n, R = 1, 40, 3000
    counts = [crp_sample(0, theta, n, seed=s).blocks for s in range(R)]
    expected = 1 + sum(theta / (j + theta) for j in range(1, n))
    sd = np.std(counts, ddof=1)
    assert abs(np.mean(counts) - expected) < 5 * sd / math.sqrt(R)


def test_crp_induced_walk_matches_kernel():
    # the new-block indicator of the (alpha, theta) CRP is the walk with the CRP kernel
    alpha, theta, n, R = F(1, 2), 1, 6, 20_000
    fam = make_family("crp", alpha=alpha, theta=theta)
    phi = phi_from_family(fam, n)
    law = exact_endpoint_law(phi.graph, phi, n)
    H = [sum(crp_sample(alpha, theta, n + 1, seed=s).new_block) for s in range(R)]
    counts = np.bincount(H, minlength=n + 1)
    assert compare_counts(counts, law, R).passed


def test_crp_gamma_new_block_probability():
    gamma = F(1, 3)
    ker = make_family("crp_gamma", gamma=gamma).kernel(mode="exact")
    for h in range(6):
        for t in range(6):
            n = h + t + 1
            sizes = [1] * h + [t + 1]  # any partition of n elements into h+1 blocks
            expected = F(h + 1) * (h + 1 - gamma) / (n * (n + gamma))
            assert crp_gamma_new_block_prob(gamma, sizes) == expected == ker.p(h, t)


def test_crp_gamma_sampler_matches_kernel():
    gamma, n, R = F(1, 3), 5, 20_000
    fam = make_family("crp_gamma", gamma=gamma)
    phi = phi_from_family(fam, n)
    law = exact_endpoint_law(phi.graph, phi, n)
    H = [sum(crp_gamma_sample(gamma, n + 1, seed=s).new_block) for s in range(R)]
    assert compare_counts(np.bincount(H, minlength=n + 1), law, R).passed


def test_single_element_partition():
    for run in (crp_sample(F(1, 2), 1, 1, seed=0), crp_gamma_sample(F(1, 2), 1, seed=0)):
        assert run.sizes == [1] and run.new_block == [] and run.walk() == [(0, 0)]


def test_partition_sizes_sum():
    run = crp_sample(F(1, 3), 2, 50, seed=9)
    assert sum(run.sizes) == 50 and run.walk()[-1] == (run.blocks - 1, 50 - run.blocks)


# --- coupon collector -------------------------------------------------------


def test_coupon_collector_finite_support():
    m = 3
    H = coupon_collector_endpoints("linear:1,1", m + 1, 60, 20_000, seed=10)
    assert H.max() == m
    path = coupon_collector_sample("linear:1,1", m + 1, 60, seed=10)
    assert len(path) == 61 and all(h <= m for h, _ in path)
    assert all(b[0] + b[1] == a[0] + a[1] + 1 for a, b in zip(path, path[1:]))


def test_coupon_collector_zero_steps():
    assert coupon_collector_sample("linear:1,1", 3, 0, seed=0) == [(0, 0)]


def test_coupon_collector_homogeneous_is_binomial():
    # lambda_h = 1/3 everywhere: each step is a new coupon with probability 2/3
    n, R = 30, R5
    H = coupon_collector_endpoints("const:1", 3, n, R, seed=12)
    cmp = compare_counts(np.bincount(H, minlength=n + 1), stats.binom.pmf(np.arange(n + 1), n, 2 / 3), R)
    assert cmp.passed


def test_coupon_collector_matches_stirling2_kernel():
    n, R = 30, R5
    fam = make_family("stirling2", b="linear:1,1", theta=6)
    phi = phi_from_family(fam, n, "float")
    law = exact_endpoint_law(phi.graph, phi, n)
    cc = np.bincount(coupon_collector_endpoints("linear:1,1", 6, n, R, seed=13), minlength=n + 1)
    walk = np.bincount(sample_endpoints(fam.kernel(horizon=n), n, R, seed=14), minlength=n + 1)
    assert compare_counts(cc, law, R).passed and compare_counts(walk, law, R).passed
    # two-sample chi-square between the samplers
    keep = (cc + walk) > 0
    _, pv, _, _ = stats.chi2_contingency(np.vstack([cc[keep], walk[keep]]))
    assert pv > 1e-6


# --- exchangeability and conditioning ---------------------------------------


def test_exchangeability_polya():
    rep = exchangeability_check(make_family("polya", a=1, b=1), 4, R5, seed=15)
    assert rep.passed and rep.exact_max_deviation == 0 and (2, 2) in rep.endpoints


def test_exchangeability_qpascal_transposition_ratio():
    q = F(1, 2)
    fam = make_family("qpascal", q=q, m=3)
    rep = exchangeability_check(fam, 4, R5, seed=16)
    assert rep.passed and rep.exact_max_deviation == 0
    hist = sample_paths(fam.kernel(horizon=2), 2, R5, seed=17, keep_paths=True)
    hs = [tuple(p) for p in hist.paths.tolist()]
    ratio = hs.count((0, 1)) / hs.count((1, 0))
    expected = float(transposition_cocycle(fam.graph(), (0, 0)))
    assert expected == pytest.approx(1 / float(q))
    assert ratio == pytest.approx(expected, rel=0.05)


def test_exchangeability_crp_gamma_exact():
    rep = exchangeability_check(make_family("crp_gamma", gamma=F(1, 4)), 4, 20_000, seed=18)
    assert rep.exact_max_deviation == 0


def test_exchangeability_bounds():
    with pytest.raises(InvalidParameter):
        exchangeability_check(make_family("polya", a=1, b=1), 11, 10, seed=0)


def test_conditioned_sampling_matches_elementary_law():
    g = make_graph(Eulerian(1, 2))
    T = (3, 2)
    law = elementary_level_law(g, T)
    paths = sample_conditioned(g, T, R5, seed=19)
    assert np.all(paths.sum(axis=1) == 3)
    H = np.cumsum(paths, axis=1)
    for m in range(1, 6):
        freqs = np.bincount(H[:, m - 1], minlength=m + 1) / R5
        assert_close_to_law(freqs, [float(law[m][h]) for h in range(m + 1)], R5)


def test_conditioned_coupling_order():
    g = make_graph(Eulerian(1, 2))
    order = stochastic_compare(g, (4, 1), (2, 3))
    assert order.dominates
    Ha = np.cumsum(sample_conditioned(g, (4, 1), R5, seed=20), axis=1)
    Hb = np.cumsum(sample_conditioned(g, (2, 3), R5, seed=21), axis=1)
    for m in range(1, 6):
        for h in range(m + 1):
            pa, pb = np.mean(Ha[:, m - 1] >= h), np.mean(Hb[:, m - 1] >= h)
            assert pa >= pb - five_sigma(0.5, R5)
            assert abs(pa - float(order.tail_a[m][h])) <= five_sigma(float(order.tail_a[m][h]), R5)


# --- jobs -------------------------------------------------------------------


def test_job_json_round_trip():
    job = SimulationJob("crp", {"alpha": "1/2", "theta": "1"}, 20, 100, 5, ["endpoint", "blocks"])
    assert SimulationJob.from_json(job.to_json()) == job
    out = run_job(job)
    assert sum(out["endpoint"]["counts"]) == 100 and sum(out["blocks"]["block_count_hist"]) == 100


@pytest.mark.parametrize("doc", [
    {"process": "nope", "n": 3, "replicates": 1, "seed": 0},
    {"process": "polya", "n": 0, "replicates": 1, "seed": 0},
    {"process": "polya", "n": 3, "replicates": 0, "seed": 0},
    {"process": "polya", "n": 3, "replicates": 1, "seed": 0, "statistics": ["median"]},
    {"process": "polya", "n": 3, "replicates": 1, "seed": 0, "colour": "red"},
    {"process": "polya", "n": 3, "seed": 0},
])
def test_invalid_jobs(doc):
    with pytest.raises(InvalidParameter):
        SimulationJob.from_dict(doc)


def test_job_statistic_family_mismatch():
    with pytest.raises(InvalidParameter):
        run_job(SimulationJob("polya", {"a": "1", "b": "1"}, 5, 10, 0, ["z"]))
    with pytest.raises(InvalidParameter):
        run_job(SimulationJob("polya", {"a": "1", "b": "1"}, 5, 10, 0, ["blocks"]))
