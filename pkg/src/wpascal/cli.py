"""Command-line front end: ``wpascal {dims,phi,boundary,simulate,moment-check,self-check}``.

Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 numerical non-convergence.
If ``WPASCAL_OUTPUT_DIR`` is set and no ``--output`` is given, results are
written to ``$WPASCAL_OUTPUT_DIR/<subcommand>.<format>`` instead of stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .boundary import (
    INCONCLUSIVE,
    BoundaryReport,
    boundary_report,
    hausdorff_check,
    q_atom_recovery,
)
from .dims import (
    BUDGET_EXHAUSTED,
    dimension_table,
    diagonal_path,
    fixed_heads_path,
    fixed_tails_path,
    martin_limit,
    ratio_path,
)
from .errors import (
    BudgetExhausted,
    DivergentCase,
    TruncationFailure,
    UnsupportedFamily,
    WPascalError,
)
from .graph import (
    Custom,
    Eulerian,
    GeneralizedStirling,
    Pascal,
    QPascal,
    Stirling1,
    Stirling2,
    crp_spec,
    make_graph,
)
from .io import (
    check_to_json,
    dims_to_json,
    grid_csv_string,
    phi_to_json,
    scalar_out,
    table_rows,
    write_text,
)
from .measures import check_probability_function, make_family, phi_from_family
from .sequences import (
    EXACT,
    FLOAT,
    Const,
    format_scalar,
    parse_scalar,
    parse_sequence,
    read_grid_csv,
    read_sequence_csv,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NONCONVERGENCE = 0, 1, 2, 3
OUTPUT_ENV = "WPASCAL_OUTPUT_DIR"
NEGATIVE_SCALAR = re.compile(r"^-(\d+|\d*\.\d+|\d+/\d+)([eE][-+]?\d+)?$")

GRAPH_FAMILIES = ("pascal", "stirling1", "stirling2", "gstirling", "gstirling1", "crp", "qpascal", "eulerian", "custom")
PHI_FAMILIES = ("bernoulli", "polya", "crp", "crp_gamma", "gstirling", "gstirling1", "spacetime", "stirling1",
                "stirling2", "qpascal", "qpolya", "friedman", "eulerian", "eulerian_finite")


@dataclass
class CliConfig:
    """Everything a subcommand needs; ``to_argv`` and ``parse_config`` are inverse."""

    subcommand: str
    family: Optional[str] = None
    a: Optional[str] = None
    b: Optional[str] = None
    a_file: Optional[str] = None
    b_file: Optional[str] = None
    a_tail: Optional[str] = None
    b_tail: Optional[str] = None
    w0_file: Optional[str] = None
    w1_file: Optional[str] = None
    theta: Optional[str] = None
    alpha: Optional[str] = None
    gamma: Optional[str] = None
    q: Optional[str] = None
    p: Optional[str] = None
    m: Optional[int] = None
    side: Optional[str] = None
    max_level: int = 10
    path: Optional[str] = None
    budget: int = 2000
    process: Optional[str] = None
    job: Optional[str] = None
    n: Optional[int] = None
    reps: int = 1000
    seed: int = 0
    stat: list = field(default_factory=list)
    scaler: str = "n"
    workers: int = 1
    phi_file: Optional[str] = None
    seq: Optional[str] = None
    atoms: bool = False
    m_max: int = 6
    output: Optional[str] = None
    format: str = "json"
    mode: Optional[str] = None
    exact: bool = False
    tol: Optional[float] = None

    def to_argv(self) -> list:
        argv = [self.subcommand]
        defaults = CliConfig(self.subcommand)
        for f in fields(self):
            if f.name == "subcommand":
                continue
            v, d = getattr(self, f.name), getattr(defaults, f.name)
            if v == d:
                continue
            flag = "--" + f.name.replace("_", "-")
            if isinstance(v, bool):
                argv.append(flag)
            elif isinstance(v, list):
                argv += [f"{flag}={item}" for item in v]
            else:
                argv.append(f"{flag}={repr(v) if isinstance(v, float) else v}")
        return argv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default stdout, or $%s/<cmd>.<fmt>)" % OUTPUT_ENV)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--mode", choices=(EXACT, FLOAT), help="scalar mode (default: exact if all inputs rational)")
    common.add_argument("--exact", action="store_true", help="rationalize decimal inputs exactly (0.1 -> 1/10)")
    common.add_argument("--tol", type=float, help="tolerance override")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family")
    for name in ("a", "b"):
        fam.add_argument(f"--{name}", help=f"scalar or sequence preset for {name}")
        fam.add_argument(f"--{name}-file", help=f"CSV file n,value for the sequence {name}")
        fam.add_argument(f"--{name}-tail", help=f"preset used beyond the end of --{name}-file")
    fam.add_argument("--w0-file", help="CSV h,t,value tail weights (custom family)")
    fam.add_argument("--w1-file", help="CSV h,t,value head weights (custom family)")
    for name in ("theta", "alpha", "gamma", "q", "p"):
        fam.add_argument(f"--{name}")
    fam.add_argument("--m", type=int)
    fam.add_argument("--side", choices=("heads", "tails"))
    fam.add_argument("--max-level", type=int, default=10)

    parser = argparse.ArgumentParser(prog="wpascal", description="Boundary computations on weighted Pascal graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("dims", parents=[common, fam], help="dimension table d(h,t)")
    p = sub.add_parser("phi", parents=[common, fam], help="probability function and its check report")
    p.add_argument("--path", help="compute phi as a Martin limit along heads:m | tails:m | diagonal | ratio:pi")
    p.add_argument("--budget", type=int, default=2000)
    sub.add_parser("boundary", parents=[common, fam], help="boundary classification and extremes")
    s = sub.add_parser("simulate", parents=[common, fam], help="seeded Monte Carlo")
    s.add_argument("--process")
    s.add_argument("--job", help="JSON job file")
    s.add_argument("--n", type=int)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stat", action="append", default=[], choices=("endpoint", "scaled", "z", "blocks"))
    s.add_argument("--scaler", default="n", help="n | log | pow:alpha | none")
    s.add_argument("--workers", type=int, default=1)
    mc = sub.add_parser("moment-check", parents=[common, fam], help="Hausdorff-type moment check / q-atom recovery")
    mc.add_argument("--phi-file", help="CSV n,value holding phi(n, 0)")
    mc.add_argument("--seq", help="comma-separated phi(n, 0) values")
    mc.add_argument("--atoms", action="store_true", help="recover atoms mu({q^m}) of a q-mixture")
    mc.add_argument("--m-max", type=int, default=6)
    sub.add_parser("self-check", parents=[common], help="run the built-in oracle suites")
    # let values such as "--alpha -1/2" through; argparse only knows negative ints and decimals
    for prs in (parser, *sub.choices.values()):
        prs._negative_number_matcher = NEGATIVE_SCALAR
    return parser


def parse_config(argv) -> CliConfig:
    ns = build_parser().parse_args(argv)
    names = {f.name for f in fields(CliConfig)}
    return CliConfig(**{k: v for k, v in vars(ns).items() if k in names})


# ---------------------------------------------------------------------------
# Building objects from flags


def _scalar(cfg: CliConfig, text, name):
    if text is None:
        raise _Missing(name)
    return parse_scalar(text, exact=cfg.exact)


class _Missing(WPascalError, ValueError):
    def __init__(self, name):
        super().__init__(f"missing required option --{name.replace('_', '-')}")


def _sequence(cfg: CliConfig, name: str, default: Optional[str] = None):
    file = getattr(cfg, f"{name}_file")
    tail = getattr(cfg, f"{name}_tail")
    if file:
        tail_seq = parse_sequence(tail, cfg.exact) if tail else None
        return read_sequence_csv(file, tail=tail_seq, exact=cfg.exact)
    text = getattr(cfg, name) or default
    if text is None:
        raise _Missing(name)
    if ":" not in text:
        return Const(parse_scalar(text, cfg.exact))
    return parse_sequence(text, cfg.exact)


def graph_spec(cfg: CliConfig):
    f = (cfg.family or "").lower()
    if f == "pascal":
        return Pascal()
    if f == "stirling1":
        return Stirling1()
    if f == "stirling2":
        return Stirling2()
    if f == "gstirling":
        return GeneralizedStirling(_sequence(cfg, "a"), _sequence(cfg, "b"))
    if f in ("gstirling1", "spacetime"):
        return GeneralizedStirling(_sequence(cfg, "a"), Const(0))
    if f == "crp":
        return crp_spec(_scalar(cfg, cfg.alpha, "alpha"))
    if f == "qpascal":
        return QPascal(_scalar(cfg, cfg.q, "q"))
    if f in ("eulerian", "friedman"):
        return Eulerian(_scalar(cfg, cfg.a or "1", "a"), _scalar(cfg, cfg.b or "1", "b"))
    if f == "custom":
        w0 = read_grid_csv(cfg.w0_file, cfg.exact, "w0") if cfg.w0_file else (lambda h, t: 1)
        w1 = read_grid_csv(cfg.w1_file, cfg.exact, "w1") if cfg.w1_file else (lambda h, t: 1)
        return Custom(w0, w1)
    raise UnsupportedFamily(f"unknown graph family {cfg.family!r}; choose from {', '.join(GRAPH_FAMILIES)}")


def measure_family(cfg: CliConfig):
    f = (cfg.family or cfg.process or "").lower()
    sc = lambda name, default=None: _scalar(cfg, getattr(cfg, name) or default, name)  # noqa: E731
    if f == "bernoulli":
        return make_family("bernoulli", p=sc("p"))
    if f == "polya":
        return make_family("polya", a=sc("a"), b=sc("b"))
    if f == "crp":
        return make_family("crp", alpha=sc("alpha"), theta=sc("theta"))
    if f == "crp_gamma":
        return make_family("crp_gamma", gamma=sc("gamma"))
    if f == "gstirling":
        return make_family("gstirling", a=_sequence(cfg, "a"), b=_sequence(cfg, "b"), theta=sc("theta"))
    if f in ("gstirling1", "spacetime"):
        return make_family("spacetime", a=_sequence(cfg, "a"), theta=sc("theta"))
    if f == "stirling1":
        return make_family("stirling1", theta=sc("theta"))
    if f == "stirling2":
        return make_family("stirling2", b=_sequence(cfg, "b", "linear:1,1"), theta=sc("theta"))
    if f == "qpascal":
        if cfg.m is None:
            raise _Missing("m")
        return make_family("qpascal", q=sc("q"), m=cfg.m)
    if f == "qpolya":
        return make_family("qpolya", q=sc("q"), alpha=sc("alpha"), beta=_scalar(cfg, cfg.b, "b"))
    if f in ("friedman", "eulerian"):
        return make_family("friedman", a=sc("a", "1"), b=sc("b", "1"))
    if f == "eulerian_finite":
        if cfg.m is None:
            raise _Missing("m")
        return make_family("eulerian_finite", a=sc("a", "1"), b=sc("b", "1"), m=cfg.m, side=cfg.side or "heads")
    raise UnsupportedFamily(f"unknown measure family {f!r}; choose from {', '.join(PHI_FAMILIES)}")


def _lattice_path(text: str):
    kind, _, arg = text.partition(":")
    if kind == "heads":
        return fixed_heads_path(int(arg))
    if kind == "tails":
        return fixed_tails_path(int(arg))
    if kind == "diagonal":
        return diagonal_path()
    if kind == "ratio":
        return ratio_path(float(parse_scalar(arg)))
    raise _Missing("path (heads:m | tails:m | diagonal | ratio:pi)")


# ---------------------------------------------------------------------------
# Subcommands


def _emit(cfg: CliConfig, text: str):
    out = cfg.output
    if out is None and os.environ.get(OUTPUT_ENV):
        out = str(Path(os.environ[OUTPUT_ENV]) / f"{cfg.subcommand}.{cfg.format}")
    if not text.endswith("\n"):
        text += "\n"
    write_text(text, out)


def _json(doc) -> str:
    return json.dumps(doc, indent=2)


def cmd_dims(cfg: CliConfig) -> int:
    spec = graph_spec(cfg)
    g = make_graph(spec, cfg.mode)
    table = dimension_table(g, cfg.max_level)
    if cfg.format == "csv":
        _emit(cfg, grid_csv_string(table_rows(table.values, cfg.max_level), "value"))
    else:
        _emit(cfg, _json(dims_to_json(table, g.family)))
    return EXIT_OK


def cmd_phi(cfg: CliConfig) -> int:
    N = cfg.max_level
    if cfg.path:
        g = make_graph(graph_spec(cfg), cfg.mode or FLOAT)
        res = martin_limit(g, _lattice_path(cfg.path), N, tol=cfg.tol or 1e-10, budget=cfg.budget)
        phi = res.to_phi()
        meta = {"status": res.status, "path": res.path_descriptor, "last_n": res.last_n,
                "residual": res.residual}
        family = dict(g.family, path=cfg.path)
        code = EXIT_OK if res.converged else EXIT_NONCONVERGENCE
    else:
        fam = measure_family(cfg)
        phi = phi_from_family(fam, N, cfg.mode)
        g, meta, family, code = phi.graph, None, fam.describe(), EXIT_OK
    check = check_probability_function(g, phi)
    tol = 0 if g.exact else (cfg.tol or 1e-9)
    if cfg.format == "csv":
        _emit(cfg, grid_csv_string(table_rows(phi.values, N), "phi"))
        print(json.dumps({"check": check_to_json(check), "martin": meta}), file=sys.stderr)
    else:
        doc = phi_to_json(phi, family, check)
        if meta:
            doc["martin"] = meta
        _emit(cfg, _json(doc))
    if code == EXIT_OK and not check.ok(tol):
        print(f"phi check failed: residual {check.max_recursion_residual}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    if code != EXIT_OK:
        print(f"martin limit: {meta['status']} after n={meta['last_n']}", file=sys.stderr)
    return code


def cmd_boundary(cfg: CliConfig) -> int:
    f = (cfg.family or "").lower()
    spec = graph_spec(cfg) if f not in ("polya", "bernoulli") else Pascal()
    try:
        report = boundary_report(spec)
    except (UnsupportedFamily, TruncationFailure) as exc:
        report = BoundaryReport(spec.describe(), INCONCLUSIVE, [], [], {"reason": str(exc)})
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "m", "z", "pi"])
        for e in report.extremes:
            w.writerow([e.kind, "" if e.m is None else e.m, "" if e.z is None else e.z,
                        "" if e.pi is None else scalar_out(e.pi)])
        _emit(cfg, buf.getvalue())
    else:
        _emit(cfg, _json(report.to_dict()))
    return EXIT_OK


JOB_PARAMS = {
    "bernoulli": ("p",),
    "polya": ("a", "b"),
    "crp": ("alpha", "theta"),
    "crp_gamma": ("gamma",),
    "gstirling": ("a", "b", "theta"),
    "spacetime": ("a", "theta"),
    "stirling1": ("theta",),
    "stirling2": ("b", "theta"),
    "qpascal": ("q", "m"),
    "qpolya": ("q", "alpha", "beta"),
    "friedman": ("a", "b"),
    "eulerian_finite": ("a", "b", "m", "side"),
}
PROCESS_ALIASES = {"gstirling1": "spacetime", "eulerian": "friedman"}
SEQUENCE_PARAMS = {("gstirling", "a"), ("gstirling", "b"), ("spacetime", "a"), ("stirling2", "b")}
PARAM_DEFAULTS = {("stirling2", "b"): "linear:1,1", ("friedman", "a"): "1", ("friedman", "b"): "1",
                  ("eulerian_finite", "a"): "1", ("eulerian_finite", "b"): "1"}


def job_from_config(cfg: CliConfig):
    from .simulate import SimulationJob

    if cfg.job:
        return SimulationJob.from_json(Path(cfg.job).read_text())
    if not cfg.process:
        raise _Missing("process")
    if cfg.n is None:
        raise _Missing("n")
    process = PROCESS_ALIASES.get(cfg.process, cfg.process)
    if process not in JOB_PARAMS:
        raise UnsupportedFamily(f"unknown process {cfg.process!r}; choose from {', '.join(JOB_PARAMS)}")
    params = {}
    for key in JOB_PARAMS[process]:
        flag = "b" if key == "beta" else key
        v = getattr(cfg, flag)
        if v is None:
            v = PARAM_DEFAULTS.get((process, key))
        if v is None:
            if key == "side":
                continue
            raise _Missing(flag)
        if (process, key) in SEQUENCE_PARAMS and ":" not in str(v):
            v = f"const:{v}"
        elif cfg.exact and isinstance(v, str) and "." in v and ":" not in v:
            v = format_scalar(parse_scalar(v, exact=True))
        params[key] = v
    return SimulationJob(process, params, cfg.n, cfg.reps, cfg.seed, cfg.stat or ["endpoint"], cfg.scaler)


def cmd_simulate(cfg: CliConfig) -> int:
    from .simulate import run_job

    result = run_job(job_from_config(cfg), workers=cfg.workers)
    if cfg.format == "csv":
        counts = result.get("endpoint", {}).get("counts")
        if counts is None:
            raise _Missing("stat endpoint (CSV output holds the endpoint histogram)")
        _emit(cfg, "h,count\n" + "\n".join(f"{h},{c}" for h, c in enumerate(counts)))
    else:
        _emit(cfg, _json(result))
    return EXIT_OK


def cmd_moment_check(cfg: CliConfig) -> int:
    if cfg.phi_file:
        seq = list(read_sequence_csv(cfg.phi_file, exact=cfg.exact).values)
    elif cfg.seq:
        seq = [parse_scalar(x, cfg.exact) for x in cfg.seq.split(",")]
    else:
        raise _Missing("phi-file or --seq")
    if cfg.atoms:
        q = _scalar(cfg, cfg.q, "q")
        rec = q_atom_recovery(seq, q, cfg.m_max, tol=cfg.tol or 1e-10)
        doc = {"ok": True, "atoms": {str(m): scalar_out(v) for m, v in rec.atoms.items()},
               "zero_atom": scalar_out(rec.zero_atom), "residual": rec.residual}
        _emit(cfg, _json(doc))
        return EXIT_OK
    if not cfg.family:
        cfg.family = "qpascal" if cfg.q else "pascal"
    g = make_graph(graph_spec(cfg), cfg.mode)
    N = min(cfg.max_level, len(seq) - 1)
    res = hausdorff_check(g, seq, N, tol=cfg.tol or 0.0)
    if cfg.format == "csv" and res.ok:
        _emit(cfg, grid_csv_string(((h, t, res.phi[h, t]) for n in range(N + 1) for h, t in
                                    [(h, n - h) for h in range(n + 1)]), "phi"))
        return EXIT_OK
    doc = {"ok": res.ok,
           "witness": None if res.ok else {"h": res.witness[0], "t": res.witness[1],
                                            "level": res.witness[0] + res.witness[1],
                                            "value": scalar_out(res.witness[2])}}
    if res.ok:
        doc["values"] = [[scalar_out(v) for v in row] for row in res.table(N)]
    _emit(cfg, _json(doc))
    return EXIT_OK


def cmd_self_check(cfg: CliConfig) -> int:
    from .selfcheck import run_all

    results = run_all()
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NONCONVERGENCE


COMMANDS = {
    "dims": cmd_dims,
    "phi": cmd_phi,
    "boundary": cmd_boundary,
    "simulate": cmd_simulate,
    "moment-check": cmd_moment_check,
    "self-check": cmd_self_check,
}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BudgetExhausted, TruncationFailure) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (WPascalError, ValueError, ZeroDivisionError) as exc:
        msg = str(exc)
        name = type(exc).__name__
        print(f"error: {msg if msg.startswith(name) else name + ': ' + msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
