"""``rangeprof`` command line.

Exit codes: 0 success, 1 verification failure, 2 invalid or infeasible
input, 3 design did not converge (artifacts are still written).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import figures
from .analysis import waveform_metrics
from .config import ConfigError, build_problem, load_config, tolerances
from .driver import design
from .errors import RangeProfError
from .model import spectral_interference_matrix
from .outputs import read_waveform, write_json, write_run
from .qpsolve import Spectral

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_BAD_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2, 3
VERIFY_SUITES = ("all", "appendixA", "appendixB", "appendixC", "appendixD", "lemma1", "prop1", "zcz", "solvers", "p1")

log = logging.getLogger("rangeprof")


def _err(msg: str) -> None:
    print(f"rangeprof: error: {msg}", file=sys.stderr)


def _overrides(args) -> dict:
    over = {"eps": args.eps, "output": getattr(args, "out", None)}
    if getattr(args, "seed", None) is not None:
        over["init"] = {"type": "random", "seed": args.seed}
    return over


def cmd_design(args) -> int:
    try:
        cfg = load_config(args.config, _overrides(args))
        if args.print_config:
            print(cfg.dumps())
            return EXIT_OK
        problem = build_problem(cfg)
        tol = tolerances(cfg)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_BAD_INPUT
    try:
        report = design(problem, tol, eps=cfg["eps"], max_outer_iters=cfg["max_outer_iters"])
    except RangeProfError as exc:
        _err(f"design failed: {exc}")
        return EXIT_BAD_INPUT
    out = Path(cfg["output"])
    extra = {"config": cfg.data}
    if isinstance(problem.constraint, Spectral):
        extra["admm_converged_every_step"] = all(c for _, _, c in report.admm_residuals)
    summary = write_run(out, report, extra)
    print(f"{summary['status']}: objective {summary['final_objective']:.10g} after "
          f"{summary['iterations']} iterations -> {out}")
    return EXIT_OK if report.status == "converged" else EXIT_NOT_CONVERGED


def _reproduce_one(fig: str, out: str, opts: figures.RunOptions) -> dict:
    return figures.reproduce(fig, Path(out) / fig, opts)


def cmd_reproduce(args) -> int:
    ids = list(args.figures or []) + list(args.figure or [])
    if not ids:
        _err("no figure id given; choose from " + ", ".join(sorted(figures.FIGURES)))
        return EXIT_BAD_INPUT
    unknown = [f for f in ids if f not in figures.FIGURES]
    if unknown:
        _err(f"unknown figure id {unknown[0]!r}; choose from " + ", ".join(sorted(figures.FIGURES)))
        return EXIT_BAD_INPUT
    opts = figures.RunOptions(eps=args.eps, seed=args.seed or 0,
                              starts=args.starts if args.starts is not None else figures.N_STARTS)
    out = args.out or "figures"
    if args.jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_reproduce_one, ids, [out] * len(ids), [opts] * len(ids)))
    else:
        results = [_reproduce_one(f, out, opts) for f in ids]
    for r in results:
        print(f"figure {r['figure']}: written to {Path(out) / r['figure']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    reports = run_suite(args.suite)
    for r in reports:
        print(r.row())
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} properties passed")
    return EXIT_OK if not failed else EXIT_VERIFY_FAILED


def cmd_analyze(args) -> int:
    try:
        cfg = load_config(args.config, {"eps": args.eps})
        problem = build_problem(cfg)
        s = read_waveform(args.waveform)
    except (ConfigError, OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_BAD_INPUT
    if s.size != problem.L:
        _err(f"waveform has length {s.size}, scenario expects L={problem.L}")
        return EXIT_BAD_INPUT
    R_I = spectral_interference_matrix(
        [(b["f1"], b["f2"], b.get("weight", 1.0)) for b in cfg["bands"]], problem.L) if cfg["bands"] else None
    dist_block = cfg["disturbance"]
    jam = tuple(dist_block.get("band", (0.1, 0.3))) if dist_block.get("type") == "jamming" else None
    metrics = waveform_metrics(s, problem.prior, problem.dist, R_I, jam)
    if args.out:
        write_json(Path(args.out) / "analysis.json", metrics)
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rangeprof", description="Constrained waveform design for range profiling.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="run one design from a scenario file")
    d.add_argument("--config", help="JSON scenario file (defaults used when omitted)")
    d.add_argument("--out", help="output directory (overrides the config)")
    d.add_argument("--seed", type=int, help="use a random-phase start with this seed")
    d.add_argument("--eps", type=float, help="relative stopping tolerance")
    d.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    d.set_defaults(func=cmd_design)

    r = sub.add_parser("reproduce", help="regenerate the data behind a figure")
    r.add_argument("figures", nargs="*", help="figure ids")
    r.add_argument("--figure", action="append", help="figure id (repeatable)")
    r.add_argument("--out", help="output root (default ./figures)")
    r.add_argument("--seed", type=int, help="first seed for random starts")
    r.add_argument("--eps", type=float)
    r.add_argument("--starts", type=int, help="random starts for 3_5a/3_5b (default 50)")
    r.add_argument("--jobs", type=int, default=1, help="figures reproduced in parallel")
    r.set_defaults(func=cmd_reproduce)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("suite", nargs="?", default="all", choices=VERIFY_SUITES)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="metrics of a waveform file (index,re,im)")
    a.add_argument("waveform")
    a.add_argument("--config")
    a.add_argument("--out")
    a.add_argument("--eps", type=float)
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
