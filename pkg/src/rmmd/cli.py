"""Command-line entry point: ``rmmd {test,multcomp,synth,power,kappa-sweep,are}``.

Exit codes: 0 success (a rejected H0 is a result, not an error), 1 runtime
error, 2 usage error.  Results go to ``--out`` or stdout; logs go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .bench import (AREError, NotAchievedError, are, estimate_power, kappa_sweep,
                    repeated_power, rows_to_csv, rows_to_json)
from .dataio import read_csv, read_libsvm, read_points, standardize, subsample_classes
from .kernel import parse_kernel, to_circle
from .multcomp import ComparisonPlan, run_plan
from .synthdata import parse_generator, sample
from .testing import METHODS, TestConfig, run_test

log = logging.getLogger("rmmd")
SCHEMA_VERSION = 1


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None, help="output path (default: stdout)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")


def _test_flags(p: argparse.ArgumentParser, method_flag: bool = True) -> None:
    if method_flag:
        p.add_argument("--method", choices=METHODS, default="rmmd")
    p.add_argument("--kernel", default="gaussian:median")
    p.add_argument("--kappa", type=float, default=None, help="sets kappa_p = kappa_q")
    p.add_argument("--kappa-p", type=float, default=1.0)
    p.add_argument("--kappa-q", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--null", choices=("normal", "permutation"), default=None,
                   help="default: normal for rmmd, permutation otherwise")
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--variance-mode", choices=("zeta1", "paper"), default="zeta1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmmd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="two-sample test on CSV point files")
    _common(p)
    _test_flags(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--header", action="store_true", help="point files have a header row")
    p.add_argument("--circle", action="store_true",
                   help="map unit-interval coordinates to angles before a periodic kernel")

    p = sub.add_parser("multcomp", help="Dunn-Sidak corrected multiclass comparisons")
    _common(p)
    _test_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--data-format", choices=("auto", "csv", "libsvm"), default="auto")
    p.add_argument("--label-column", default="-1")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--mode", choices=("pairwise", "one-vs-all"), default="pairwise")
    p.add_argument("--per-class", type=int, default=None)
    p.add_argument("--standardize", action="store_true")

    p = sub.add_parser("synth", help="draw a synthetic sample to CSV")
    _common(p)
    p.add_argument("--generator", required=True)
    p.add_argument("--n", type=int, required=True)

    for name, hlp in (("power", "Monte-Carlo power / type-I error"),
                      ("kappa-sweep", "power as a function of kappa")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        _test_flags(p)
        p.add_argument("--p", required=True, help="generator for the first sample")
        p.add_argument("--q", required=True, help="generator for the second sample")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--reps", type=int, default=1000)
        if name == "power":
            p.add_argument("--runs", type=int, default=1, help="repeat the harness and report mean/SD")
        else:
            p.add_argument("--kappas", default="0,0.2,0.4,0.6,0.8,1.0,1.2,1.4")

    p = sub.add_parser("are", help="relative efficiency N_V / N_T via minimal sample sizes")
    _common(p)
    _test_flags(p, method_flag=False)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--test-t", choices=METHODS, default="mmd")
    p.add_argument("--test-v", choices=METHODS, default="rmmd")
    p.add_argument("--target", type=float, default=0.95)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--n-max", type=int, default=3200)
    return parser


def _config(args, method: Optional[str] = None) -> TestConfig:
    method = method or args.method
    kp = args.kappa if args.kappa is not None else args.kappa_p
    kq = args.kappa if args.kappa is not None else args.kappa_q
    null = args.null or ("normal" if method == "rmmd" else "permutation")
    if method != "rmmd":
        null = "permutation"
    return TestConfig(
        method=method, kernel=None if method == "ks" else parse_kernel(args.kernel),
        kappa_p=kp, kappa_q=kq, gamma=args.gamma, alpha=args.alpha, null_mode=null,
        n_permutations=args.permutations, seed=args.seed, variance_mode=args.variance_mode,
    )


def _threads(args) -> int:
    if args.threads == 0:
        import os
        return os.cpu_count() or 1
    return max(1, args.threads)


def _emit(args, header: dict, rows: List[dict]) -> None:
    header = {"schema_version": SCHEMA_VERSION, "version": __version__, "command": args.command,
              **header}
    if args.format == "json":
        text = rows_to_json(rows, header) + "\n"
    else:
        lines = [f"# {k}: {json.dumps(v)}" for k, v in header.items()]
        text = "\n".join(lines) + "\n" + rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for k, v in header.items():
        log.info("%s = %s", k, v)


def _flat_outcome(out) -> dict:
    d = out.to_dict()
    cfg = d.pop("config")
    return {**d, **{f"cfg_{k}": v for k, v in cfg.items()}}


def _cmd_test(args) -> None:
    cfg = _config(args)
    x, y = read_points(args.x, args.header), read_points(args.y, args.header)
    if args.circle:
        x, y = to_circle(x), to_circle(y)
    out = run_test(x, y, cfg)
    _emit(args, {"config": cfg.to_dict(), "resolved_kernel": out.kernel,
                 "null_mode_used": out.null_mode}, [_flat_outcome(out)])


def _load_dataset(args):
    fmt = args.data_format
    if fmt == "auto":
        fmt = "csv" if args.data.lower().endswith(".csv") else "libsvm"
    if fmt == "csv":
        return read_csv(args.data, args.label_column, has_header=not args.no_header)
    return read_libsvm(args.data)


def _cmd_multcomp(args) -> None:
    ds = _load_dataset(args)
    if args.per_class:
        ds = subsample_classes(ds, args.per_class, args.seed)
    if args.standardize:
        ds = standardize(ds)
    cfg = _config(args)
    report = run_plan(ComparisonPlan(args.mode, ds.groups(), args.alpha), cfg)
    header = {"config": cfg.to_dict(), "mode": report.mode, "alpha_family": report.alpha_family,
              "alpha_per_test": report.alpha_per_test, "n_comparisons": len(report.comparisons),
              "rejected": report.rejected, "short_classes": list(ds.short_classes)}
    rows = [{"label": lab, "alpha_per_test": report.alpha_per_test, **_flat_outcome(o)}
            for lab, o in report.comparisons]
    _emit(args, header, rows)


def _cmd_synth(args) -> None:
    gen = parse_generator(args.generator)
    pts = sample(gen, args.n, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in pts:
        w.writerow([repr(float(v)) for v in row])
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    log.info("generator=%s n=%d seed=%d", gen, args.n, args.seed)


def _cmd_power(args) -> None:
    gp, gq = parse_generator(args.p), parse_generator(args.q)
    cfg = _config(args)
    header = {"config": cfg.to_dict(), "gen_p": str(gp), "gen_q": str(gq), "seed": args.seed}
    if args.runs > 1:
        mean, sd, ests = repeated_power(gp, gq, args.n, cfg, args.reps, args.seed, args.runs,
                                        _threads(args))
        header.update(power_mean=mean, power_sd=sd, runs=args.runs)
        rows = [dict(run=i, **e.to_dict()) for i, e in enumerate(ests)]
    else:
        rows = [estimate_power(gp, gq, args.n, cfg, args.reps, args.seed, _threads(args)).to_dict()]
    _emit(args, header, rows)


def _cmd_kappa_sweep(args) -> None:
    gp, gq = parse_generator(args.p), parse_generator(args.q)
    cfg = _config(args)
    kappas = [float(v) for v in args.kappas.split(",") if v.strip()]
    res = kappa_sweep(gp, gq, args.n, kappas, cfg, args.reps, args.seed, _threads(args))
    rows = [dict(kappa=k, **e.to_dict()) for k, e in res]
    best = max(res, key=lambda r: r[1].power)[0]
    _emit(args, {"config": cfg.to_dict(), "gen_p": str(gp), "gen_q": str(gq),
                 "seed": args.seed, "argmax_kappa": best}, rows)


def _cmd_are(args) -> None:
    gp, gq = parse_generator(args.p), parse_generator(args.q)
    cfg_t, cfg_v = _config(args, args.test_t), _config(args, args.test_v)
    res = are(gp, gq, cfg_t, cfg_v, args.target, args.reps, args.seed, args.n_max, _threads(args))
    rows = [{"test": t, "n": n, "power": p} for t, tr in (("T", res.trace_t), ("V", res.trace_v))
            for n, p in tr]
    _emit(args, {"config_t": cfg_t.to_dict(), "config_v": cfg_v.to_dict(), "gen_p": str(gp),
                 "gen_q": str(gq), "seed": args.seed, "n_t": res.n_t, "n_v": res.n_v,
                 "ratio": res.ratio, "target_power": res.target_power}, rows)


_COMMANDS = {"test": _cmd_test, "multcomp": _cmd_multcomp, "synth": _cmd_synth,
             "power": _cmd_power, "kappa-sweep": _cmd_kappa_sweep, "are": _cmd_are}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage error, 0 on --help/--version
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError, NotAchievedError, AREError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
