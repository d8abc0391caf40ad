"""Command-line entry point ``lel``"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

from lelsieve.config import FORMATS, Config
from lelsieve.entry import read_saps
from lelsieve.exceptions import LelError, UsageError
from lelsieve.lattice import Sap, count_anchored_saps, enumerate_polygons, parse_sap

logger = logging.getLogger(__name__)


def _emit(
    cfg: Config,
    payload: Any,
    columns: Optional[Sequence[str]] = None,
    rows: Optional[Sequence[Sequence[object]]] = None,
    out: Optional[str] = None,
    stream: Optional[TextIO] = None,
):
    """Write a result as JSON, or as CSV/text when it is tabular."""
    fmt = cfg.output_format
    buf = io.StringIO()
    if fmt == "json" or rows is None:
        json.dump(payload, buf, indent=None if out is None else 2)
        buf.write("\n")
    elif fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns or [])
        writer.writerows(rows)
    else:
        table = [list(map(str, columns or []))] + [[str(x) for x in r] for r in rows]
        widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
        for r in table:
            buf.write("  ".join(x.rjust(w) for x, w in zip(r, widths)) + "\n")
    if out is not None:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")
        logger.info("wrote %s", out)
    else:
        (stream or sys.stdout).write(buf.getvalue())


def _saps(ns: argparse.Namespace) -> List[Sap]:
    if getattr(ns, "file", None):
        return read_saps(ns.file)
    if getattr(ns, "sap", None) is None:
        raise UsageError("--sap or --file is required")
    return [parse_sap(ns.sap)]


def _one_sap(ns: argparse.Namespace) -> Sap:
    if ns.sap is None:
        raise UsageError("--sap is required")
    return parse_sap(ns.sap)


def cmd_fp(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.sieve import evaluate

    results = [evaluate(p, cfg.precision, ns.exact).to_dict() for p in _saps(ns)]
    payload: Any = results[0] if len(results) == 1 else results
    cols = ["sap", "ell", "patch_size", "exact", "numeric", "precision"]
    rows = [[r.get(c, "") for c in cols] for r in results]
    _emit(cfg, payload, cols, rows)
    return 0


def cmd_sweep(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.sieve import sweep
    from lelsieve.store import Store

    def run(store: Optional[Store]):
        return sweep(
            ns.max_len,
            ns.mode,
            cache=store,
            precision=cfg.precision,
            dedup=cfg.dedup,
            threads=cfg.threads,
        )

    if cfg.cache is not None:
        with Store(cfg.cache, lenient=cfg.lenient) as store:
            table = run(store)
    else:
        table = run(None)
    rows = list(table.to_csv_rows())
    payload = {
        "precision": cfg.precision,
        "computed": table.computed,
        "rows": [{"L": length, "count": c, "S": s} for length, c, s in rows],
    }
    if ns.out and cfg.output_format == "json" and not ns.out.endswith(".json"):
        cfg.output_format = "csv"
    _emit(cfg, payload, ["L", "count", "S"], rows, out=ns.out)
    return 0


def cmd_fit(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.sieve import fit_exponent

    rows: List[tuple[int, float]] = []
    with open(ns.table, newline="", encoding="utf-8") as f:
        for rec in csv.DictReader(f):
            rows.append((int(rec["L"]), float(rec["S"])))
    _emit(cfg, {"exponent": fit_exponent(rows), "rows": len(rows)})
    return 0


def cmd_series(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.series import rp_series_infinite, rp_series_torus, torus

    p = _one_sap(ns)
    if ns.torus:
        series = rp_series_torus(torus(ns.torus), p, cfg.order)
    else:
        series = rp_series_infinite(p, cfg.order)
    rows = [[k, str(c)] for k, c in enumerate(series)]
    _emit(cfg, {"sap": p.steps, "order": cfg.order, "coefficients": [str(c) for c in series]}, ["l", "coefficient"], rows)
    return 0


def cmd_ratio(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.series import ratio_convergence

    p = _one_sap(ns)
    table = ratio_convergence(p, cfg.order)
    rows = [[r.length, f"{float(r.ratio):.12g}", f"{r.scaled_error:.12g}"] for r in table]
    payload = {
        "sap": p.steps,
        "rows": [{"l": r.length, "ratio": str(r.ratio), "scaled_error": r.scaled_error} for r in table],
    }
    _emit(cfg, payload, ["l", "ratio", "scaled_error"], rows)
    return 0


def cmd_zeta_tilde(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.series import mu_tilde, zeta_tilde

    z, m = zeta_tilde(cfg.order), mu_tilde(cfg.order)
    rows = [[k, str(a), str(b)] for k, (a, b) in enumerate(zip(z, m))]
    _emit(cfg, {"zeta_tilde": [str(a) for a in z], "mu_tilde": [str(b) for b in m]}, ["l", "zeta_tilde", "mu_tilde"], rows)
    return 0


def cmd_alpha(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.series import alpha

    value = alpha(cfg.precision)
    _emit(cfg, {"alpha": value.to_decimal(), "precision": value.precision})
    return 0


def cmd_dump_c(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.green import C_TABLE

    rows = [[x, y, str(a), str(b)] for x, y, a, b in C_TABLE.as_rows(ns.radius)]
    if cfg.output_format == "json":
        cfg.output_format = "csv"
    _emit(cfg, rows, ["dx", "dy", "a", "b"], rows)
    return 0


def cmd_shapes(ns: argparse.Namespace, cfg: Config) -> int:
    anchored = count_anchored_saps(ns.max_len)
    classes = {length: sum(1 for _ in enumerate_polygons(length)) for length in anchored}
    rows = [[length, anchored[length], classes[length]] for length in anchored]
    _emit(cfg, {"anchored": anchored, "classes": classes}, ["length", "anchored", "classes"], rows)
    return 0


def _graph(ns: argparse.Namespace):
    from lelsieve.finite import Digraph, torus

    if ns.torus:
        return torus(ns.torus)
    if not ns.graph:
        raise UsageError("--graph or --torus is required")
    return Digraph.from_json(ns.graph)


def _support(ns: argparse.Namespace, g) -> tuple[list[int], int]:
    from lelsieve.finite import TorusGraph

    if ns.sap is not None:
        if not isinstance(g, TorusGraph):
            raise UsageError("--sap needs --torus")
        p = parse_sap(ns.sap)
        return list(g.embed(p)), p.length
    if ns.support is None or ns.len is None:
        raise UsageError("--support and --len are required")
    try:
        support = [int(v) for v in ns.support.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--support must be comma-separated integers, got {ns.support!r}") from None
    return support, ns.len


def cmd_finite(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.finite import (
        TorusGraph,
        lambda_series,
        sieve_check,
        viennot_series,
        walks_to_hikes_check,
        zeta_series,
    )

    g = _graph(ns)
    if ns.action == "zeta":
        z, lam = zeta_series(g, cfg.order), lambda_series(g, cfg.order)
        rows = [[k, str(a), str(b)] for k, (a, b) in enumerate(zip(z, lam))]
        _emit(cfg, {"zeta": [str(a) for a in z], "lambda": [str(b) for b in lam]}, ["l", "zeta", "lambda"], rows)
    elif ns.action == "viennot":
        support, p_len = _support(ns, g)
        series = viennot_series(g, support, p_len, cfg.order)
        rows = [[k, str(c)] for k, c in enumerate(series)]
        _emit(cfg, {"coefficients": [str(c) for c in series]}, ["l", "coefficient"], rows)
    elif ns.action == "sieve-check":
        support, p_len = _support(ns, g)
        lengths = [length for length in range(p_len, cfg.order + 1) if length >= 0]
        checks = []
        for length in lengths:
            try:
                checks.extend(sieve_check(g, support, p_len, [length], cfg.precision))
            except LelError as err:
                logger.info("skipping l=%d: %s", length, err)
        rows = [
            [c.length, f"{float(c.exact_ratio):.15g}", c.asymptote.to_decimal(15), c.error.to_decimal(15), f"{c.residual:.3g}"]
            for c in checks
        ]
        _emit(
            cfg,
            [dict(zip(["l", "ratio", "asymptote", "error", "residual"], r)) for r in rows],
            ["l", "ratio", "asymptote", "error", "residual"],
            rows,
        )
    else:
        if not isinstance(g, TorusGraph):
            raise UsageError("torus-check needs --torus")
        lhs, rhs = walks_to_hikes_check(g, cfg.precision)
        _emit(cfg, {"n": g.side, "lhs": lhs.to_decimal(), "rhs": rhs.to_decimal()})
    return 0


def cmd_oracle(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.oracle import count_last_loop, last_loop_histogram

    if ns.action == "count":
        p = _one_sap(ns)
        count = count_last_loop(p, ns.len)
        _emit(cfg, {"sap": p.steps, "length": ns.len, "count": count})
        return 0
    hist = last_loop_histogram(ns.len, threads=cfg.threads)
    rows = [[k, v] for k, v in hist.items()]
    if ns.out and cfg.output_format == "json":
        cfg.output_format = "csv"
    _emit(cfg, {"length": ns.len, "total": sum(hist.values()), "counts": hist}, ["sap", "count"], rows, out=ns.out)
    return 0


def cmd_mc(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.oracle import mc_first_return

    p = _one_sap(ns)
    result = mc_first_return(p, ns.samples, ns.max_len, ns.seed, threads=cfg.threads)
    _emit(cfg, {"sap": p.steps, **result.to_dict()})
    return 0


def cmd_verify(ns: argparse.Namespace, cfg: Config) -> int:
    from lelsieve.verify import run_verify

    checks = run_verify(ns.level, threads=cfg.threads)
    rows = [[c.name, c.expected, c.got, "pass" if c.passed else "FAIL"] for c in checks]
    if cfg.output_format == "json":
        _emit(cfg, [c.to_dict() for c in checks])
    else:
        _emit(cfg, None, ["check", "expected", "got", "result"], rows)
    return 0 if all(c.passed for c in checks) else 1


COMMANDS: Dict[str, Callable[[argparse.Namespace, Config], int]] = {
    "fp": cmd_fp,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "series": cmd_series,
    "ratio": cmd_ratio,
    "zeta-tilde": cmd_zeta_tilde,
    "alpha": cmd_alpha,
    "dump-c": cmd_dump_c,
    "shapes": cmd_shapes,
    "finite": cmd_finite,
    "oracle": cmd_oracle,
    "mc": cmd_mc,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--precision", type=int, default=256)
    common.add_argument("--order", type=int, default=40)
    common.add_argument("--cache", default=None)
    common.add_argument("--lenient", action="store_true")

    parser = _Parser(prog="lel", description="Last-erased-loop sieve engine")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("fp", parents=[common], help="fraction of walks ending on a polygon")
    p.add_argument("--sap")
    p.add_argument("--file")
    p.add_argument("--exact", action="store_true")

    p = sub.add_parser("sweep", parents=[common], help="partial sums S(L)")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "numeric"), default="numeric")
    p.add_argument("--out")
    p.add_argument("--no-dedup", action="store_true")

    p = sub.add_parser("fit", parents=[common], help="exponent fit of a sweep CSV")
    p.add_argument("--table", required=True)

    p = sub.add_parser("series", parents=[common], help="generating function of a polygon")
    p.add_argument("--sap")
    p.add_argument("--torus", type=int)

    p = sub.add_parser("ratio", parents=[common], help="coefficient ratios against R(z)")
    p.add_argument("--sap")

    sub.add_parser("zeta-tilde", parents=[common], help="rooted-hike zeta and Moebius series")
    sub.add_parser("alpha", parents=[common], help="the lattice constant alpha")

    p = sub.add_parser("dump-c", parents=[common], help="exact Green matrix entries")
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("shapes", parents=[common], help="polygon counts by length")
    p.add_argument("--max-len", type=int, required=True)

    p = sub.add_parser("finite", parents=[common], help="finite-graph sieve")
    p.add_argument("action", choices=("zeta", "viennot", "sieve-check", "torus-check"))
    p.add_argument("--graph")
    p.add_argument("--torus", type=int)
    p.add_argument("--support")
    p.add_argument("--len", type=int)
    p.add_argument("--sap")

    p = sub.add_parser("oracle", parents=[common], help="exhaustive walk enumeration")
    p.add_argument("action", choices=("count", "hist"))
    p.add_argument("--sap")
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo first-return estimate")
    p.add_argument("--sap")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--max-len", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", parents=[common], help="check the published golden values")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        _configure_logging(ns.verbose)
        cfg = Config.from_namespace(ns)
        return COMMANDS[ns.command](ns, cfg)
    except UsageError as err:
        print(f"lel: usage error: {err}", file=sys.stderr)
        return 2
    except LelError as err:
        print(f"lel: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
