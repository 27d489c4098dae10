#!/usr/bin/env python3
"""
CLI entry point for kiteratio.

Every subcommand writes JSON (or JSON lines) to stdout; logs go to stderr or
the configured log file, so the machine-readable output is byte-identical
between runs.
"""

import argparse
import csv
import json
import logging
import math
import re
import sys
import traceback
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__, config
from . import certifier
from .bounds_lemmas import LARGE_N, bound_report, k_window, lemma_checks
from .enumerate_verify import is_kite_graph, verify_conjecture
from .errors import ConvergenceError, GraphError, KiteratioError
from .graph_core import KiteSpec, build_graph, kite, parse_graph6
from .kite_analytic import best_kite, kite_sweep, solve_kite
from .spectral import perron

logger = logging.getLogger('kiteratio.cli')

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_ERROR = 2
EXIT_NO_CONVERGENCE = 3

# Kites up to this order are cross-checked against power iteration
CROSS_CHECK_LIMIT = 3000
LAMBDA_AGREEMENT = 1e-9
LOG_GAMMA_AGREEMENT = 1e-8

_FLOAT_MARK = re.compile(r'"@@f:([^@]*)@@"')


@dataclass
class RunConfig:
    """Resolved settings for one invocation: CLI flags over environment over defaults."""

    command: str
    perron_tol: float = config.PERRON_TOL
    perron_max_iter: int = config.PERRON_MAX_ITER
    kite_tol: float = config.KITE_TOL
    precision_bits: int = config.PRECISION_BITS
    threads: int = config.THREADS
    log_level: str = config.LOG_LEVEL
    log_file: Optional[str] = config.LOG_FILE
    graph6: Optional[str] = None
    edges: Optional[str] = None
    graph6_file: Optional[str] = None
    csv_path: Optional[str] = None
    n: Optional[int] = None
    r: Optional[int] = None
    s: Optional[int] = None
    j: Optional[int] = None
    k: Optional[int] = None
    best: Optional[int] = None
    target: Optional[str] = None
    n_values: List[int] = field(default_factory=list)
    prune: bool = True
    top_k: int = 10
    timing: bool = False

    @classmethod
    def from_args(cls, args):
        cfg = cls(command=args.command)
        for name in ("log_level", "log_file", "threads", "perron_tol", "perron_max_iter", "kite_tol"):
            value = getattr(args, name, None)
            if value is not None:
                setattr(cfg, name, value)
        for name in ("graph6", "edges", "graph6_file", "csv_path", "n", "r", "s", "j", "k", "best",
                     "target", "top_k", "timing"):
            if hasattr(args, name) and getattr(args, name) is not None:
                setattr(cfg, name, getattr(args, name))
        if getattr(args, "precision", None) is not None:
            cfg.precision_bits = args.precision
        if getattr(args, "no_prune", False):
            cfg.prune = False
        if args.command == "certify":
            if args.n_range is not None:
                start, stop, count = args.n_range
                cfg.n_values = certifier.log_spaced(start, stop, count)
            else:
                cfg.n_values = list(args.n_list or [])
        return cfg


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return None
        return f"@@f:{format(float(value), '.17g')}@@"
    return value


def dumps(obj, indent=2):
    """JSON with floats at 17 significant digits and non-finite values as null."""
    text = json.dumps(_plain(obj), indent=indent)
    return _FLOAT_MARK.sub(lambda m: m.group(1), text)


def emit(obj, indent=2):
    sys.stdout.write(dumps(obj, indent) + "\n")


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        csv.writer(f).writerows(rows)
    logger.info(f"wrote {len(rows) - 1} rows to {path}")


def parse_edges(text, n=None):
    """Graph from "0-1,1-2,..."; n defaults to one more than the largest label."""
    edges = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split("-")
        if len(parts) != 2:
            raise GraphError(f"Bad edge {item!r}; expected u-v")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"Bad edge {item!r}; vertices must be integers") from None
    if not edges and n is None:
        raise GraphError("Edge list is empty")
    order = n if n is not None else max(max(e) for e in edges) + 1
    return build_graph(order, edges)


def cmd_analyze(cfg):
    if (cfg.graph6 is None) == (cfg.edges is None):
        raise KiteratioError("analyze needs exactly one of --graph6 or --edges")
    g = parse_graph6(cfg.graph6) if cfg.graph6 is not None else parse_edges(cfg.edges, cfg.n)
    pd = perron(g, tol=cfg.perron_tol, max_iter=cfg.perron_max_iter)
    spec = is_kite_graph(g)
    emit({
        "graph": {"n": g.n, "edges": g.edge_count, "kite": spec.to_dict() if spec else None},
        "perron": pd.to_dict(),
        "bounds": bound_report(g, pd, cfg.j).to_dict(),
        "lemma_checks": [o.to_dict() for o in lemma_checks(g, pd)],
    })
    return EXIT_OK


def _cross_check(solution, cfg):
    pd = perron(kite(solution.spec), tol=cfg.perron_tol, max_iter=cfg.perron_max_iter)
    lambda_gap = abs(pd.lambda1 - solution.lambda1)
    scale = max(1.0, abs(solution.log_gamma))
    log_gamma_gap = abs(pd.log_gamma - solution.log_gamma) / scale
    agrees = lambda_gap <= LAMBDA_AGREEMENT and log_gamma_gap <= LOG_GAMMA_AGREEMENT
    if not agrees:
        logger.warning(f"kite {solution.spec} disagrees with power iteration: "
                       f"lambda gap {lambda_gap:.3e}, log gamma gap {log_gamma_gap:.3e}")
    return {"lambda1": pd.lambda1, "log_gamma": pd.log_gamma, "agrees": agrees}


def cmd_kite(cfg):
    if cfg.best is not None:
        solution = best_kite(cfg.best, cfg.kite_tol)
        if cfg.csv_path:
            r, lambdas, log_gammas = kite_sweep(cfg.best, cfg.kite_tol)
            rows = [["r", "s", "lambda1", "log_gamma"]]
            rows += [[int(ri), cfg.best - int(ri) + 1, format(lam, '.17g'), format(lg, '.17g')]
                     for ri, lam, lg in zip(r, lambdas, log_gammas)]
            _write_csv(cfg.csv_path, rows)
    elif cfg.r is not None and cfg.s is not None:
        solution = solve_kite(KiteSpec(cfg.r, cfg.s), cfg.kite_tol)
    else:
        raise KiteratioError("kite needs --r and --s, or --best N")

    report = {"kite": solution.to_dict()}
    if solution.spec.n <= CROSS_CHECK_LIMIT:
        report["spectral_check"] = _cross_check(solution, cfg)
    if cfg.best is not None and cfg.best >= LARGE_N:
        lower, upper = k_window(cfg.best)
        report["k_window"] = {"lower": lower, "upper": upper, "inside": lower < solution.spec.r < upper}
    emit(report)
    check = report.get("spectral_check")
    return EXIT_OK if check is None or check["agrees"] else EXIT_VERDICT_FAILED


def cmd_verify(cfg):
    if cfg.n is None:
        raise KiteratioError("verify needs --n")
    report = verify_conjecture(cfg.n, source=cfg.graph6_file, prune=cfg.prune,
                               threads=cfg.threads, top_k=cfg.top_k)
    if cfg.csv_path:
        _write_csv(cfg.csv_path, report.csv_rows())
    emit(report.to_dict(include_timing=cfg.timing))
    return EXIT_OK if report.is_kite else EXIT_VERDICT_FAILED


def cmd_certify(cfg):
    if not cfg.n_values:
        raise KiteratioError("certify needs --n or --n-range")
    if cfg.target == "inequality5":
        if cfg.k is None or cfg.j is None:
            raise KiteratioError("inequality5 needs --k and --j")
        certificates = [certifier.check_inequality5(n, cfg.k, cfg.j, bits=cfg.precision_bits)
                        for n in cfg.n_values]
        summary = certifier.summarize(cfg.target, len(cfg.n_values), certificates)
    else:
        certificates, summary = certifier.sweep(cfg.target, cfg.n_values, threads=cfg.threads,
                                                bits=cfg.precision_bits)
    for certificate in certificates:
        emit(certificate.to_dict(), indent=None)
    emit(summary.to_dict(), indent=None)
    return EXIT_OK if summary.all_hold else EXIT_VERDICT_FAILED


COMMANDS = {
    "analyze": cmd_analyze,
    "kite": cmd_kite,
    "verify": cmd_verify,
    "certify": cmd_certify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kiteratio",
        description="kiteratio - principal ratios, kite graphs and certified inequalities",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  kiteratio analyze --edges "0-1,1-2,1-3,2-3"
  kiteratio kite --r 2 --s 3
  kiteratio kite --best 5000 --csv sweep.csv
  kiteratio verify --n 6
  kiteratio certify --target appendixB --n-range 5000 100000000 100
        """
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help=f"logging level (default {config.LOG_LEVEL})")
    parser.add_argument("--log-file", help="also log to this rotating file")
    parser.add_argument("--threads", type=int, help=f"worker threads (default {config.THREADS})")
    parser.add_argument("--perron-tol", type=float, help=f"power-iteration tolerance (default {config.PERRON_TOL:g})")
    parser.add_argument("--perron-max-iter", type=int, help="power-iteration cap")
    parser.add_argument("--kite-tol", type=float, help=f"kite bisection tolerance (default {config.KITE_TOL:g})")

    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Perron data, bounds and lemma checks for one graph")
    analyze.add_argument("--graph6", help="graph in graph6 format")
    analyze.add_argument("--edges", help='edge list such as "0-1,1-2"')
    analyze.add_argument("--n", type=int, help="vertex count for --edges (default: largest label + 1)")
    analyze.add_argument("--j", type=int, help="index for the phi_j sandwich (default k)")

    kite_cmd = sub.add_parser("kite", help="analytic kite solution")
    kite_cmd.add_argument("--r", type=int, help="path order")
    kite_cmd.add_argument("--s", type=int, help="clique order")
    kite_cmd.add_argument("--best", type=int, metavar="N", help="best kite of order N")
    kite_cmd.add_argument("--csv", dest="csv_path", help="with --best, write the whole r sweep here")

    verify = sub.add_parser("verify", help="brute-force search for the graph of largest principal ratio")
    verify.add_argument("--n", type=int, required=True, help="graph order")
    verify.add_argument("--graph6-file", help="graph6 corpus instead of the built-in enumeration (n <= 7)")
    verify.add_argument("--no-prune", action="store_true", help="solve every graph")
    verify.add_argument("--top-k", type=int, help="rows in the top list (default 10)")
    verify.add_argument("--csv", dest="csv_path", help="write the top list as CSV")
    verify.add_argument("--timing", action="store_true", help="include wall_time in the JSON report")

    certify = sub.add_parser("certify", help="dual-precision certificates")
    certify.add_argument("--target", required=True, choices=sorted(certifier.TARGETS) + ["inequality5"])
    certify.add_argument("--n", dest="n_list", type=int, action="append", help="value of n (repeatable)")
    certify.add_argument("--n-range", type=int, nargs=3, metavar=("START", "STOP", "COUNT"),
                         help="COUNT log-spaced integers from START to STOP")
    certify.add_argument("--precision", type=int, help=f"extended precision in bits (default {config.PRECISION_BITS})")
    certify.add_argument("--k", type=int, help="k for inequality5")
    certify.add_argument("--j", type=int, help="j for inequality5")
    return parser


def run(argv=None):
    """Parse argv, run one subcommand and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        config.setup_logging(cfg.log_level, cfg.log_file)
        logger.debug(f"run config: {cfg}")
        return COMMANDS[cfg.command](cfg)
    except ConvergenceError as e:
        logger.error(f"No convergence after {e.iterations} iterations: {e}")
        return EXIT_NO_CONVERGENCE
    except (KiteratioError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug(traceback.format_exc())
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return EXIT_ERROR


def main():
    """Main entry point for the kiteratio command."""
    sys.exit(run())


if __name__ == "__main__":
    main()
