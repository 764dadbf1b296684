"""Seeded Monte Carlo for the chains on Z_+^2 and the related urn/partition schemes.

Randomness contract: replicates are cut into blocks of ``BLOCK`` consecutive
indices and block ``k`` draws from ``Philox(SeedSequence([seed, k]))``.
Blocks are independent, may run on any number of threads, and are merged in
block order, so results are bit-identical for every worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .boundary import CONTINUOUS, classify_gstirling1, z_distribution, z_distribution_best_effort
from .dims import dimension_table
from .errors import DivergentCase, HorizonMismatch, InvalidParameter, KernelOutOfSupport
from .graph import WeightedPascalGraph, grid_point
from .measures import FAMILIES, MeasureFamily, TransitionKernel, make_family, phi_from_family
from .sequences import parse_scalar, parse_sequence

BLOCK = 4096
# two-sided 5-sigma tail probability of a standard normal
FIVE_SIGMA_P = 5.733e-7


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def _run_blocks(R: int, seed: int, fn, workers: int = 1) -> list:
    """fn(rng, size, block_index) for each block; results in block order."""
    if R < 1:
        raise InvalidParameter("replicates must be >= 1")
    sizes = [min(BLOCK, R - k * BLOCK) for k in range(math.ceil(R / BLOCK))]
    tasks = [(k, s) for k, s in enumerate(sizes)]
    run = lambda ks: fn(block_rng(seed, ks[0]), ks[1], ks[0])  # noqa: E731
    if workers <= 1 or len(tasks) == 1:
        return [run(ks) for ks in tasks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(run, tasks))


# ---------------------------------------------------------------------------
# Chains driven by a transition kernel


@dataclass
class EndpointHistogram:
    n: int
    counts: np.ndarray  # counts[h] = #replicates with H_n = h
    R: int
    paths: Optional[np.ndarray] = None  # R x n array of 0/1 increments

    def __post_init__(self):
        if int(self.counts.sum()) != self.R:
            raise AssertionError("histogram counts do not sum to R")

    def freqs(self) -> np.ndarray:
        return self.counts / self.R

    def to_dict(self):
        return {"n": self.n, "R": self.R, "counts": self.counts.tolist()}


def _simulate_block(kernel: TransitionKernel, n: int, rng, size: int, keep_paths: bool, start=(0, 0)):
    h = np.full(size, start[0], dtype=np.int64)
    t = np.full(size, start[1], dtype=np.int64)
    paths = np.empty((size, n), dtype=np.uint8) if keep_paths else None
    for step in range(n):
        p = kernel.head_prob(h, t)
        bad = ~((p >= 0) & (p <= 1))
        if bad.any():
            i = int(np.argmax(bad))
            raise KernelOutOfSupport(
                f"{kernel.name}: head probability {p[i]} at state ({h[i]},{t[i]}) reached by a chain"
            )
        head = rng.random(size) < p
        h += head
        t += ~head
        if keep_paths:
            paths[:, step] = head
    return h, paths


def sample_paths(kernel: TransitionKernel, n: int, R: int, seed: int, keep_paths: bool = False,
                 workers: int = 1) -> EndpointHistogram:
    """R independent n-step chains from (0,0); histogram of H_n (and the paths if asked)."""
    if n < 0:
        raise InvalidParameter("n must be >= 0")
    parts = _run_blocks(R, seed, lambda rng, s, k: _simulate_block(kernel, n, rng, s, keep_paths), workers)
    H = np.concatenate([p[0] for p in parts])
    counts = np.bincount(H, minlength=n + 1)[: n + 1]
    paths = np.concatenate([p[1] for p in parts]) if keep_paths else None
    return EndpointHistogram(n, counts, R, paths)


def sample_endpoints(kernel: TransitionKernel, n: int, R: int, seed: int, workers: int = 1) -> np.ndarray:
    parts = _run_blocks(R, seed, lambda rng, s, k: _simulate_block(kernel, n, rng, s, False)[0], workers)
    return np.concatenate(parts)


def exact_endpoint_law(g: WeightedPascalGraph, phi, n: int) -> np.ndarray:
    """P(H_n = h) = phi(h, n-h) d(h, n-h) as floats."""
    if phi.N < n:
        raise HorizonMismatch(f"phi is tabulated to level {phi.N} < n = {n}")
    d = dimension_table(g, n)
    return np.array([float(phi(h, n - h) * d[h, n - h]) for h in range(n + 1)])


def tv_threshold(probs: np.ndarray, R: int, sigmas: float = 5.0) -> float:
    """Half the sum of per-cell sigma bands: a conservative bound on Monte Carlo TV."""
    return 0.5 * float(np.sum(sigmas * np.sqrt(probs * (1 - probs) / R)))


@dataclass
class Comparison:
    total_variation: float
    chi_square: Optional[float]
    p_value: Optional[float]
    tv_threshold: Optional[float]
    passed: Optional[bool]
    note: str = ""

    def to_dict(self):
        return asdict(self)


def compare_counts(counts: np.ndarray, probs: np.ndarray, R: int, sigmas: float = 5.0) -> Comparison:
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    m = max(len(counts), len(probs))
    counts = np.pad(counts, (0, m - len(counts)))
    probs = np.pad(probs, (0, m - len(probs)))
    tv = 0.5 * float(np.abs(counts / R - probs).sum())
    if R < 2:
        return Comparison(tv, None, None, None, None, "R < 2: only the raw TV is reported")
    if np.any((probs <= 0) & (counts > 0)):
        return Comparison(tv, math.inf, 0.0, tv_threshold(probs, R, sigmas), False,
                          "samples observed where the exact law vanishes")
    # pool cells with small expected counts so the chi-square approximation holds
    exp = probs * R
    keep = exp >= 5
    obs_c, exp_c = list(counts[keep]), list(exp[keep])
    if (~keep).any() and exp[~keep].sum() > 0:
        obs_c.append(counts[~keep].sum())
        exp_c.append(exp[~keep].sum())
    if len(exp_c) < 2:
        chi, pv = 0.0, 1.0
    else:
        chi, pv = stats.chisquare(obs_c, f_exp=np.array(exp_c) * (sum(obs_c) / sum(exp_c)))
        chi, pv = float(chi), float(pv)
    thr = tv_threshold(probs, R, sigmas)
    return Comparison(tv, chi, pv, thr, bool(tv <= thr and pv >= FIVE_SIGMA_P))


def empirical_vs_exact(hist: EndpointHistogram, g: WeightedPascalGraph, phi, sigmas: float = 5.0) -> Comparison:
    probs = exact_endpoint_law(g, phi, hist.n)
    return compare_counts(hist.counts, probs, hist.R, sigmas)


# ---------------------------------------------------------------------------
# Law-of-large-numbers diagnostics


def _scale(scaler: str, n: int) -> float:
    s = scaler.strip().lower()
    if s == "n":
        return float(n)
    if s in ("log", "log n", "logn"):
        return math.log(n)
    if s.startswith("pow:"):
        return float(n) ** float(parse_scalar(s[4:]))
    if s in ("1", "none"):
        return 1.0
    raise InvalidParameter(f"unknown scaler {scaler!r} (n | log | pow:alpha | none)")


@dataclass
class LLNResult:
    process: str
    n: int
    R: int
    scaler: str
    mean: float
    sd: float
    stderr: float
    histogram: dict
    exact_mean: Optional[float] = None  # of the scaled statistic
    z_score: Optional[float] = None
    values: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("values")
        return d


def spacetime_exact_mean(family: MeasureFamily, n: int) -> Optional[float]:
    """E H_n = sum_{j<n} p(j) for inhomogeneous coins (b == 0)."""
    from .sequences import Const

    b = getattr(family, "b", None)
    if not isinstance(b, Const) or b.c != 0:
        return None
    th = float(family.theta)
    return float(sum(th / (th + float(family.a(j))) for j in range(n)))


def lln_diagnostic(family: MeasureFamily, scaler: str, n: int, R: int, seed: int, workers: int = 1,
                   bins: int = 50) -> LLNResult:
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    family.validate(min(n, 512))
    scale = _scale(scaler, n)
    if not scale > 0:
        raise InvalidParameter(f"scaler {scaler!r} is not positive at n={n}")
    H = sample_endpoints(family.kernel(horizon=n), n, R, seed, workers)
    vals = H / scale
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) if R > 1 else 0.0
    se = sd / math.sqrt(R)
    counts, edges = np.histogram(vals, bins=bins)
    ex = spacetime_exact_mean(family, n)
    exs = None if ex is None else ex / scale
    z = None if exs is None or se == 0 else (mean - exs) / se
    return LLNResult(family.name, n, R, scaler, mean, sd, se,
                     {"edges": edges.tolist(), "counts": counts.tolist()}, exs, z, vals)


def beta_ks(values, a, b) -> float:
    """Kolmogorov-Smirnov distance between the sample and Beta(a, b)."""
    return float(stats.kstest(np.asarray(values, dtype=float), "beta", args=(float(a), float(b))).statistic)


# ---------------------------------------------------------------------------
# Tail variable Z of space-time walks


@dataclass
class ZEstimate:
    n: int
    R: int
    counts: dict  # z -> count

    def freqs(self):
        return {z: c / self.R for z, c in self.counts.items()}

    def tv_to(self, weights: dict) -> float:
        keys = set(self.counts) | set(weights)
        return 0.5 * sum(abs(self.counts.get(z, 0) / self.R - float(weights.get(z, 0))) for z in keys)


def z_estimate(a, theta, n: int, R: int, seed: int, workers: int = 1) -> ZEstimate:
    """Empirical law of H_n - #M_n, where M_n = {m < n: p(m) > q(m)}."""
    a = parse_sequence(a)
    if classify_gstirling1(a, N_probe=min(n, 1000)).classification == CONTINUOUS:
        raise DivergentCase(f"{a.spec()}: boundary is continuous, Z is not defined")
    th = float(theta)
    p = np.array([th / (th + float(a(j))) for j in range(n)])
    nM = int(np.sum(p > 1 - p))

    def block(rng, size, k):
        H = np.zeros(size, dtype=np.int64)
        for j in range(n):
            H += rng.random(size) < p[j]
        return H

    H = np.concatenate(_run_blocks(R, seed, block, workers))
    zs, cs = np.unique(H - nM, return_counts=True)
    return ZEstimate(n, R, {int(z): int(c) for z, c in zip(zs, cs)})


# ---------------------------------------------------------------------------
# Partition-valued processes


@dataclass
class PartitionRun:
    sizes: list  # final block sizes in order of creation
    new_block: list  # new_block[i] is True if element i+2 opened a block

    @property
    def blocks(self):
        return len(self.sizes)

    def walk(self):
        """(h, t) of the induced walk after each arrival."""
        h = t = 0
        out = [(0, 0)]
        for x in self.new_block:
            h, t = (h + 1, t) if x else (h, t + 1)
            out.append((h, t))
        return out


def _partition_rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0, 1])))


def crp_sample(alpha, theta, n: int, seed: int, rng=None) -> PartitionRun:
    """Chinese restaurant process with parameters (alpha, theta) on {1..n}.

    With k blocks among m elements, the next element opens a block with
    probability (theta + k alpha)/(m + theta) and joins block j with
    probability (n_j - alpha)/(m + theta).
    """
    make_family("crp", alpha=alpha, theta=theta).validate(1)
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    al, th = float(alpha), float(theta)
    rng = rng or _partition_rng(seed)
    sizes, new = [1], []
    for m in range(1, n):
        k = len(sizes)
        w = np.array([s - al for s in sizes] + [th + k * al]) / (m + th)
        j = int(rng.choice(k + 1, p=w / w.sum()))
        if j == k:
            sizes.append(1)
        else:
            sizes[j] += 1
        new.append(j == k)
    return PartitionRun(sizes, new)


def crp_gamma_sample(gamma, n: int, seed: int, rng=None) -> PartitionRun:
    """The gamma-variant: with k blocks among m elements the next element opens
    a block with probability k (k - gamma)/(m (m + gamma)) and joins block j
    with probability (n_j + 1)(m - k + gamma)/(m (m + gamma))."""
    make_family("crp_gamma", gamma=gamma).validate(1)
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    gm = float(gamma)
    rng = rng or _partition_rng(seed)
    sizes, new = [1], []
    for m in range(1, n):
        k = len(sizes)
        den = m * (m + gm)
        w = np.array([(s + 1) * (m - k + gm) for s in sizes] + [k * (k - gm)]) / den
        j = int(rng.choice(k + 1, p=w / w.sum()))
        if j == k:
            sizes.append(1)
        else:
            sizes[j] += 1
        new.append(j == k)
    return PartitionRun(sizes, new)


def crp_gamma_new_block_prob(gamma, sizes) -> float:
    m, k = sum(sizes), len(sizes)
    return k * (k - gamma) / (m * (m + gamma))


# ---------------------------------------------------------------------------
# Coupon collector (generalized Stirling-II via geometric waiting times)


def _lambdas(b, theta, upto):
    """lambda_h = b_h/theta for h < upto, cut after the first h with lambda_h = 1 (theta = b_m)."""
    th = theta
    lam = []
    for h in range(upto):
        x = b(h) / th
        if not x > 0 or x > 1:
            raise InvalidParameter(f"need 0 < b_{h} <= theta, got b_{h}/theta = {float(x)}")
        lam.append(float(x))
        if x == 1:
            break
    return np.array(lam)


def coupon_collector_sample(b, theta, n: int, seed: int) -> list:
    """One path S_0..S_n: at level h a tail (repeat coupon) has probability b_h/theta."""
    b = parse_sequence(b)
    if n < 0:
        raise InvalidParameter("n must be >= 0")
    rng = _partition_rng(seed)
    lam = _lambdas(b, theta, n + 1)
    path = [(0, 0)]
    h = t = 0
    while h + t < n:
        lh = lam[h]
        wait = math.inf if lh >= 1 else int(rng.geometric(1 - lh))  # steps until the next head
        tails = min(wait - 1, n - h - t) if wait != math.inf else n - h - t
        for _ in range(int(tails)):
            t += 1
            path.append((h, t))
        if h + t < n:
            h += 1
            path.append((h, t))
    return path


def coupon_collector_endpoints(b, theta, n: int, R: int, seed: int, workers: int = 1) -> np.ndarray:
    """H_n = max{h: xi_0 + ... + xi_{h-1} <= n} for R replicates (vectorized over levels)."""
    b = parse_sequence(b)
    lam = _lambdas(b, theta, n + 1)

    def block(rng, size, k):
        elapsed = np.zeros(size, dtype=np.int64)
        H = np.zeros(size, dtype=np.int64)
        alive = np.ones(size, dtype=bool)
        for h in range(min(n, len(lam))):
            if not alive.any() or lam[h] >= 1:
                break
            xi = rng.geometric(1 - lam[h], size=size)
            elapsed = np.where(alive, elapsed + xi, elapsed)
            alive &= elapsed <= n
            H += alive
        return H

    return np.concatenate(_run_blocks(R, seed, block, workers))


# ---------------------------------------------------------------------------
# Exchangeability and conditioned sampling


@dataclass
class ExchangeabilityReport:
    n: int
    R: int
    endpoints: dict  # (h,t) -> {"paths": k, "chi_square": x, "p_value": p}
    min_p_value: float
    passed: bool
    exact_max_deviation: Optional[float] = None  # kernel path prob / (weight * phi) - 1

    def to_dict(self):
        d = asdict(self)
        d["endpoints"] = {f"{h},{t}": v for (h, t), v in self.endpoints.items()}
        return d


def exchangeability_check(family: MeasureFamily, n: int, R: int, seed: int, workers: int = 1,
                          min_expected: float = 5.0) -> ExchangeabilityReport:
    """Within each endpoint, path frequencies should be proportional to path weights."""
    if not 1 <= n <= 10:
        raise InvalidParameter("exchangeability_check needs 1 <= n <= 10")
    mode = "float"
    g = family.graph(mode)
    hist = sample_paths(family.kernel(horizon=n), n, R, seed, keep_paths=True, workers=workers)
    codes = hist.paths.astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    uniq, cnt = np.unique(codes, return_counts=True)
    counts = dict(zip(uniq.tolist(), cnt.tolist()))
    import itertools

    out, pmin = {}, 1.0
    for h in range(n + 1):
        paths = [bits for bits in itertools.product((0, 1), repeat=n) if sum(bits) == h]
        weights = np.array([float(g.path_weight(bits)) for bits in paths])
        obs = np.array([counts.get(sum(b << i for i, b in enumerate(bits)), 0) for bits in paths], dtype=float)
        total = obs.sum()
        if len(paths) < 2 or total == 0:
            continue
        exp = weights / weights.sum() * total
        if exp.min() < min_expected:
            continue
        chi, pv = stats.chisquare(obs, f_exp=exp)
        out[(h, n - h)] = {"paths": len(paths), "chi_square": float(chi), "p_value": float(pv)}
        pmin = min(pmin, float(pv))
    dev = None
    if family.exact:
        dev = _exact_exchangeability(family, n)
    passed = pmin >= FIVE_SIGMA_P / max(1, len(out)) and (dev is None or dev == 0)
    return ExchangeabilityReport(n, R, out, pmin, passed, dev)


def _exact_exchangeability(family: MeasureFamily, n: int):
    """max |P_kernel(path) - weight(path) phi(end)| over all n-step paths (exact arithmetic)."""
    import itertools

    from .measures import path_probability_from_kernel

    phi = phi_from_family(family, n, "exact")
    g = phi.graph
    ker = family.kernel(mode="exact")
    worst = 0
    for bits in itertools.product((0, 1), repeat=n):
        h = sum(bits)
        target = g.path_weight(bits) * phi(h, n - h)
        try:
            prob = path_probability_from_kernel(ker, bits)
        except (KernelOutOfSupport, ZeroDivisionError):
            prob = 0
        worst = max(worst, abs(prob - target))
    return worst


def backward_table(g: WeightedPascalGraph, terminal):
    """back[h][t] = P(previous point is (h-1,t) | at (h,t)) under Q_terminal."""
    H, T = grid_point(terminal)
    d = dimension_table(g, H + T)
    back = np.zeros((H + 1, T + 1))
    for h in range(H + 1):
        for t in range(T + 1):
            if h == 0:
                back[h, t] = 0.0
            elif t == 0:
                back[h, t] = 1.0
            else:
                back[h, t] = float(g.w1(h - 1, t) * d[h - 1, t] / d[h, t])
    return back


def sample_conditioned(g: WeightedPascalGraph, terminal, R: int, seed: int, workers: int = 1) -> np.ndarray:
    """R paths of the elementary measure Q_terminal, drawn backward from the terminal.

    Returns an R x n array of 0/1 increments (1 = head), in forward time order.
    """
    H, T = grid_point(terminal)
    n = H + T
    back = backward_table(g, (H, T))

    def block(rng, size, k):
        h = np.full(size, H, dtype=np.int64)
        t = np.full(size, T, dtype=np.int64)
        out = np.empty((size, n), dtype=np.uint8)
        for step in range(n - 1, -1, -1):
            head = rng.random(size) < back[h, t]
            out[:, step] = head
            h -= head
            t -= ~head
        return out

    return np.concatenate(_run_blocks(R, seed, block, workers))


# ---------------------------------------------------------------------------
# Jobs


STATISTICS = ("endpoint", "scaled", "z", "blocks")


@dataclass
class SimulationJob:
    process: str
    params: dict
    n: int
    replicates: int
    seed: int
    statistics: list = field(default_factory=lambda: ["endpoint"])
    scaler: str = "n"

    def __post_init__(self):
        if self.process not in FAMILIES:
            raise InvalidParameter(f"unknown process {self.process!r}; known: {sorted(FAMILIES)}")
        if not (int(self.n) == self.n and self.n >= 1):
            raise InvalidParameter("n must be an integer >= 1")
        if not (int(self.replicates) == self.replicates and self.replicates >= 1):
            raise InvalidParameter("replicates must be an integer >= 1")
        bad = [s for s in self.statistics if s not in STATISTICS]
        if bad:
            raise InvalidParameter(f"unknown statistics {bad}; choose from {STATISTICS}")

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationJob":
        known = {"process", "params", "n", "replicates", "seed", "statistics", "scaler"}
        extra = set(d) - known
        if extra:
            raise InvalidParameter(f"unknown job fields {sorted(extra)}")
        try:
            return cls(d["process"], dict(d.get("params", {})), int(d["n"]), int(d["replicates"]),
                       int(d["seed"]), list(d.get("statistics", ["endpoint"])), d.get("scaler", "n"))
        except KeyError as exc:
            raise InvalidParameter(f"job is missing field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SimulationJob":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def family(self) -> MeasureFamily:
        params = {k: (v if k in ("a", "b") and isinstance(v, str) and ":" in v else
                      v if k == "side" else parse_scalar(v)) for k, v in self.params.items()}
        return make_family(self.process, **params)


def run_job(job: SimulationJob, workers: int = 1) -> dict:
    """Run every requested statistic; output depends only on the job (not on ``workers``)."""
    fam = job.family()
    fam.validate(min(job.n, 512))
    out = {"job": json.loads(job.to_json())}
    if "endpoint" in job.statistics or "scaled" in job.statistics:
        H = sample_endpoints(fam.kernel(horizon=job.n), job.n, job.replicates, job.seed, workers)
        counts = np.bincount(H, minlength=job.n + 1)
        if "endpoint" in job.statistics:
            hist = EndpointHistogram(job.n, counts, job.replicates)
            res = hist.to_dict()
            if job.n <= 200:
                phi = phi_from_family(fam, job.n)
                res["comparison"] = empirical_vs_exact(hist, phi.graph, phi).to_dict()
            out["endpoint"] = res
        if "scaled" in job.statistics:
            vals = H / _scale(job.scaler, job.n)
            ex = spacetime_exact_mean(fam, job.n)
            out["scaled"] = {
                "scaler": job.scaler,
                "mean": float(vals.mean()),
                "sd": float(vals.std(ddof=1)) if job.replicates > 1 else 0.0,
                "exact_mean": None if ex is None else ex / _scale(job.scaler, job.n),
            }
            if job.process == "polya" and job.scaler.strip().lower() == "n":
                out["scaled"]["beta_ks"] = beta_ks(vals, fam.a, fam.b)
    if "z" in job.statistics:
        if not hasattr(fam, "a") or getattr(fam, "name", "") != "spacetime":
            raise InvalidParameter("the z statistic needs process 'spacetime'")
        est = z_estimate(fam.a, fam.theta, job.n, job.replicates, job.seed, workers)
        zd = z_distribution_best_effort(fam.a, fam.theta, tols=(1e-6, 1e-4, 1e-3))
        out["z"] = {"counts": {str(k): v for k, v in sorted(est.counts.items())},
                    "tv_to_exact": est.tv_to(zd.weights), "truncation_bound": zd.truncation_error_bound}
    if "blocks" in job.statistics:
        if job.process not in ("crp", "crp_gamma"):
            raise InvalidParameter("the blocks statistic needs process 'crp' or 'crp_gamma'")
        nblocks = []
        largest = []
        for i in range(job.replicates):
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([job.seed, i, 2])))
            # the partition has n+1 elements after n walk steps
            if job.process == "crp":
                run = crp_sample(fam.alpha, fam.theta, job.n + 1, job.seed, rng=rng)
            else:
                run = crp_gamma_sample(fam.gamma, job.n + 1, job.seed, rng=rng)
            nblocks.append(run.blocks)
            largest.append(max(run.sizes))
        bc = np.bincount(nblocks)
        out["blocks"] = {"block_count_hist": bc.tolist(), "mean_blocks": float(np.mean(nblocks)),
                         "mean_largest_fraction": float(np.mean(largest) / (job.n + 1))}
    return out
