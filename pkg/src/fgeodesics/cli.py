"""Command-line entry point: ``fgeo {katok,find,loopspace,theorem}``.

Exit status is 0 when every check passes, 1 when any check fails and 2 on
invalid input. ``FG_THREADS`` caps the number of worker processes used by
the closed-geodesic search.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from typing import Sequence

from . import dynamics, morse, topology, zermelo
from ._version import __version__
from .errors import DegenerateMetric, FGError, InvalidInput, InvalidMetric
from .report import VerificationReport

log = logging.getLogger("fgeodesics")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _weights(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be a comma-separated list of integers, got {text!r}")


def _m_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--m expects an integer or a range a..b, got {text!r}")


def _metric(args) -> zermelo.ZermeloMetric:
    weights = args.weights if args.weights is not None else _default_weights(args.m)
    if len(weights) != args.m:
        raise InvalidInput(f"--m {args.m} needs {args.m} weights, got {len(weights)}")
    return zermelo.katok_metric(weights, args.mu)


def _default_weights(m: int) -> tuple[int, ...]:
    if m == 2:
        return (1, 3)
    primes = [q for q in range(2, 10 * m) if topology.is_prime(q)][: m - 1]
    return (1, *primes)


def _metric_inputs(args, metric) -> dict:
    return {"m": metric.m, "weights": list(metric.field.weights), "mu": args.mu}


# --------------------------------------------------------------------------
# commands


def cmd_katok(args) -> VerificationReport:
    metric = _metric(args)
    records = dynamics.katok_closed_geodesics(metric)
    m = metric.m
    rep = VerificationReport("katok", inputs=_metric_inputs(args, metric) | {"resolution": args.resolution})
    rates = metric.field.rates
    indexed = []
    for rec in records:
        j, sign = int(rec.label[1:-1]), (1 if rec.label[-1] == "+" else -1)
        res = morse.closed_geodesic_index(metric, rec)
        indexed.append((rec, res, j, sign))
        formula = 2 * math.pi / (1 + sign * rates[j - 1])
        defect = dynamics.record_closure_defect(metric, rec)
        rep.check(f"{rec.label}:closure", "closure", defect <= 1e-8, defect, 0.0, 1e-8)
        rep.check(f"{rec.label}:length", "katok-lengths", abs(rec.length - formula) <= 1e-9, rec.length, formula, 1e-9)
        side = rec.length < 2 * math.pi if sign > 0 else rec.length > 2 * math.pi
        rep.check(f"{rec.label}:length-vs-2pi", "katok-lengths", side, rec.length,
                  "< 2 pi" if sign > 0 else "> 2 pi")
        expected = morse.katok_index_formula(metric, j, sign)
        observed = res.index if res.index is not None else list(res.index_range)
        rep.check(f"{rec.label}:index", "katok-indices", res.index == expected[0], observed, expected[0])
        rep.check(f"{rec.label}:nullity", "katok-bumpy", res.nullity == 0, res.nullity, 0, soft=True)
        rep.check(f"{rec.label}:symplectic", "morse-index-definition", res.return_data.symplectic_defect <= 1e-8,
                  res.return_data.symplectic_defect, 0.0, 1e-8)
        if sign > 0 and res.index is not None:
            rep.check(f"{rec.label}:positive-bound", "katok-positive-bound", res.index <= 4 * (m - 1),
                      res.index, f"<= {4 * (m - 1)}", soft=True)
    rep.check("geodesic-count", "katok-count", len(records) == 2 * m, len(records), 2 * m)

    if m == 2 and metric.field.weights == (1, 3):
        by = {rec.label: res for rec, res, _, _ in indexed}
        rep.check("s3:ind-c1+", "katok-indices", by["c1+"].index == 2, by["c1+"].index, 2)
        rep.check("s3:ind-c2+", "katok-indices", by["c2+"].index == 4, by["c2+"].index, 4)
        rep.check("s3:ind-c2-", "katok-indices", by["c2-"].index in (4, 6), by["c2-"].index, [4, 6])

    ordered = sorted(indexed, key=lambda t: t[0].length)
    bound = topology.index_bound(m)
    two = [t[1].index for t in ordered[:2]]
    rep.check("two-shortest-index-bound", "index-bound", all(i is not None and i <= bound for i in two),
              {"labels": [t[0].label for t in ordered[:2]], "indices": two}, f"<= {bound}")

    inv = zermelo.distortion(metric, args.resolution)
    rep.check("reversibility-closed-form", "reversibility-definition",
              abs(inv.reversibility - inv.reversibility_closed_form) <= 1e-6,
              inv.reversibility, inv.reversibility_closed_form, 1e-6)
    rep.check("distortion-closed-form", "distortion-definition",
              abs(inv.distortion - inv.distortion_closed_form) <= 1e-6,
              inv.distortion, inv.distortion_closed_form, 1e-6)
    rep.check("distortion-squared-vs-reversibility", "distortion-reversibility",
              inv.distortion ** 2 >= inv.reversibility, inv.distortion ** 2, f">= {inv.reversibility}")
    rep.check("distortion-vs-formula", "distortion-formula",
              abs(inv.distortion - inv.distortion_a_formula) <= 1e-6,
              inv.distortion, inv.distortion_a_formula, 1e-6, soft=True)
    rep.check("distortion-equals-reversibility", "distortion-formula",
              abs(inv.distortion - inv.reversibility) <= 1e-6, inv.distortion, inv.reversibility, 1e-6, soft=True)
    rep.attach("reversibility", inv.reversibility)
    rep.attach("reversibility_closed_form", inv.reversibility_closed_form)
    rep.attach("distortion", inv.distortion)
    rep.attach("distortion_closed_form", inv.distortion_closed_form)
    rep.attach("distortion_formula_1_over_1_minus_mu_a", inv.distortion_a_formula)
    rep.attach("sup_wind", metric.sup_wind)
    rep.attach("index_bound", bound)
    rep.set_table(["label", "length", "index", "nullity"],
                  [[rec.label, rec.length, res.index if res.index is not None else f"{res.index_range[0]}..{res.index_range[1]}",
                    res.nullity] for rec, res, _, _ in indexed])
    return rep


def cmd_find(args) -> VerificationReport:
    metric = _metric(args)
    workers = int(os.environ.get("FG_THREADS", "1") or 1)
    t0 = time.perf_counter()
    result = dynamics.find_closed_geodesics(metric, args.bound, seeds=args.seeds, tol=args.tol, seed=args.seed,
                                           workers=workers)
    elapsed = time.perf_counter() - t0
    expected = [r for r in dynamics.katok_closed_geodesics(metric) if r.length <= args.bound]
    rep = VerificationReport("find", inputs=_metric_inputs(args, metric) | {
        "bound": args.bound, "seeds": args.seeds, "tol": args.tol, "seed": args.seed, "workers": workers})

    matched: dict[str, str] = {}
    for exp in expected:
        for rec in result.records:
            if rec.label not in matched.values() and dynamics.same_orbit(metric, exp, rec, tol=max(1e-7, 10 * args.tol)):
                matched[exp.label] = rec.label
                break
    misses = [e.label for e in expected if e.label not in matched]
    extras = [r.label for r in result.records if r.label not in matched.values()]
    rep.check("recovered", "finder-recovery", not misses and not extras,
              {"recovered": len(matched), "misses": misses, "extras": extras},
              {"recovered": len(expected), "misses": [], "extras": []})
    for exp in expected:
        if exp.label in matched:
            rec = next(r for r in result.records if r.label == matched[exp.label])
            rep.check(f"{exp.label}:length", "katok-lengths", abs(rec.length - exp.length) <= 1e-6,
                      rec.length, exp.length, 1e-6)
    for rec in result.records:
        d = dynamics.record_closure_defect(metric, rec)
        rep.check(f"{rec.label}:closure", "closure", d <= args.tol, d, 0.0, args.tol)
    min_hits = min(result.hits.values()) if result.hits else 0
    rep.check("search-coverage", "finder-recovery", args.seeds >= 50 and min_hits >= 3,
              {"seeds": args.seeds, "min_hits": min_hits}, {"seeds": ">= 50", "min_hits": ">= 3"}, soft=True)
    rep.attach("recovered", f"{len(matched)}/{len(expected)}")
    rep.attach("candidates", result.candidates)
    rep.attach("dropped", result.dropped)
    rep.attach("merged", result.merged)
    rep.attach("out_of_bound", result.out_of_bound)
    rep.attach("elapsed_s", round(elapsed, 3))
    inverse = {v: k for k, v in matched.items()}
    rep.set_table(["label", "length", "closure_defect", "matched"],
                  [[r.label, r.length, r.closure_defect, inverse.get(r.label, "")] for r in result.records])
    return rep


def cmd_loopspace(args) -> VerificationReport:
    m = args.m
    if m < 2:
        raise InvalidInput("m must be >= 2")
    D = args.max_degree if args.max_degree is not None else topology.index_bound(m)
    if D < 0:
        raise InvalidInput("--max-degree must be non-negative")
    rep = VerificationReport("loopspace", inputs={"m": m, "max_degree": D})
    tables = {s: topology.betti_table(s, m, D) for s in topology.Space}
    rep.set_table(["degree", "free_loop", "quotient", "unit_tangent", "grassmannian"],
                  [[j] + [tables[s][j] for s in topology.Space] for j in range(D + 1)])
    rep.check("free-loop-degree-0", "betti-free-loop", tables[topology.Space.FREE_LOOP][0] == 0,
              tables[topology.Space.FREE_LOOP][0], 0)
    rep.check("quotient-degree-0", "betti-quotient", tables[topology.Space.QUOTIENT][0] == 0,
              tables[topology.Space.QUOTIENT][0], 0)
    if D >= 4 * m - 4:
        v = tables[topology.Space.QUOTIENT][4 * m - 4]
        rep.check("quotient-rank-4m-4", "quotient-top", v == 2, v, 2)
    if D >= 4 * m - 3:
        ut = tables[topology.Space.UNIT_TANGENT].nonzero()
        rep.check("unit-tangent-degrees", "betti-unit-tangent", sorted(ut) == [0, 2 * m - 2, 2 * m - 1, 4 * m - 3],
                  sorted(ut), [0, 2 * m - 2, 2 * m - 1, 4 * m - 3])
    if D >= 4 * m - 4:
        g = tables[topology.Space.GRASSMANNIAN].nonzero()
        rep.check("grassmannian-ranks", "betti-grassmannian", g == {0: 1, 2 * m - 2: 2, 4 * m - 4: 1},
                  g, {0: 1, 2 * m - 2: 2, 4 * m - 4: 1})
    for s in topology.Space:
        rep.attach(s.value, tables[s].nonzero())
    return rep


def cmd_theorem(args) -> VerificationReport:
    ms = args.m
    rep = VerificationReport("theorem", inputs={"m": [ms[0], ms[-1]] if len(ms) > 1 else ms[0], "p": args.p,
                                                "bound": args.bound})
    rows = []
    t0 = time.perf_counter()
    for m in ms:
        sub = topology.verify_theorem_skeleton(m, args.p, args.bound)
        rep.merge(sub, prefix=f"m={m}:")
        rows.append([m, sub.data["p"], sub.data["index_bound"], sub.status])
        if len(ms) == 1:
            for k, v in sub.data.items():
                rep.attach(k, v)
    rep.attach("elapsed_s", round(time.perf_counter() - t0, 3))
    rep.set_table(["m", "p", "index_bound", "status"], rows)
    return rep


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", metavar="FILE", help="write the report to FILE instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    metric = argparse.ArgumentParser(add_help=False)
    metric.add_argument("--m", type=int, default=2)
    metric.add_argument("--weights", type=_weights, default=None, help="comma list, e.g. 1,3")
    metric.add_argument("--mu", type=float, default=0.1)

    parser = argparse.ArgumentParser(prog="fgeo", description="Closed geodesics of Katok metrics and the "
                                     "loop-space bookkeeping of the second closed geodesic argument.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("katok", parents=[common, metric], help="closed-form Katok geodesics, indices, invariants")
    p.add_argument("--resolution", type=int, default=10_000, help="samples for the invariant maximizations")
    p.set_defaults(func=cmd_katok)

    p = sub.add_parser("find", parents=[common, metric], help="multi-start search for closed geodesics")
    p.add_argument("--bound", type=float, default=10.0, help="length bound")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0, help="RNG seed for the seed states")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("loopspace", parents=[common], help="rank tables of the loop-space pairs")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--max-degree", type=int, default=None)
    p.set_defaults(func=cmd_loopspace)

    p = sub.add_parser("theorem", parents=[common], help="run the exact proof skeleton for m or a range a..b")
    p.add_argument("--m", type=_m_range, default=[2])
    p.add_argument("--p", type=int, default=None, help="override the prime (must divide neither m nor m-1)")
    p.add_argument("--bound", type=int, default=1000, help="search box for the divisibility witness")
    p.set_defaults(func=cmd_theorem)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "seeds", 1) < 1 or getattr(args, "tol", 1.0) <= 0 or getattr(args, "bound", 1) <= 0:
            raise InvalidInput("--seeds, --tol and --bound must be positive")
        report = args.func(args)
    except (InvalidInput, InvalidMetric, DegenerateMetric) as exc:
        print(f"fgeo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FGError as exc:
        print(f"fgeo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = report.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
