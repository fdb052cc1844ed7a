"""Command-line entry point: ``quasibasis {run, converge, dump, parse-check}``.

Exit status: 0 all checks pass, 1 some check failed, 2 configuration or
expression error, 3 numeric or singularity error (reports are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import config as cfgmod
from . import operators as ops
from . import polar, riesz
from .errors import ConfigurationError, ExprError, NumericError, SingularityError
from .opexpr import parse, to_source
from .suites import SUITES, Context, run_checks

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
CSV_COLUMNS = ("check_name", "model", "N", "residual", "tolerance", "pass")
MACHINE_FLOOR = 1e-12
DUMP_TARGETS = ("phi", "psi", "T", "polar_U", "polar_Pos", "gram")


def _common(p):
    p.add_argument("model_pos", nargs="?", metavar="MODEL", help="example1, example2 or example3")
    p.add_argument("--model", dest="model_opt", help="model name (same as the positional)")
    p.add_argument("--expr", help="custom constructing operator in the expression language")
    p.add_argument("-N", dest="N", help="truncation size(s), comma separated")
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--inverse-mode", choices=cfgmod.INVERSE_MODES)
    p.add_argument("--out", help="output directory (run) or file (converge, dump)")
    p.add_argument("--format", choices=cfgmod.FORMATS)


def build_parser():
    ap = argparse.ArgumentParser(prog="quasibasis",
                                 description="Check biorthogonal systems built from constructing operators.")
    sub = ap.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run check suites")
    _common(run)
    run.add_argument("--suite", default="all", choices=SUITES + ("all",))
    conv = sub.add_parser("converge", help="one check across several N with a decay fit")
    _common(conv)
    conv.add_argument("--check", required=True, help="check name, e.g. eigen_relations_phi")
    conv.add_argument("--suite", default="all", choices=SUITES + ("all",))
    dump = sub.add_parser("dump", help="write a matrix in the JSON dump format")
    _common(dump)
    dump.add_argument("--what", required=True, choices=DUMP_TARGETS)
    pc = sub.add_parser("parse-check", help="validate an expression")
    pc.add_argument("expr")
    return ap


def resolve_config(args):
    cfg = cfgmod.load(args.config) if args.config else cfgmod.RunConfig()
    model = args.model_opt or args.model_pos
    if args.expr:
        model = {"T_expr": args.expr}
    kw = dict(seed=args.seed, inverse_mode=args.inverse_mode, output_format=args.format)
    if model is not None:
        kw["model"] = model
    if args.N:
        kw["N"] = cfgmod.parse_N(args.N)
    if args.out and args.verb == "run":
        kw["output_path"] = args.out
    return cfg.with_overrides(**kw)


def _fmt(v):
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.3e}"


def _summary(reports, out):
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        out.write(f"[{status}] {r.check_name:<26} N={r.N:<4} max_residual={_fmt(r.max_residual)} "
                  f"tolerance={_fmt(r.tolerance)}\n")
        worst = r.worst_modes(5)
        if worst and not r.passed:
            rows = ", ".join(f"{w['mode']}:{_fmt(w['residual'])}" for w in worst)
            out.write(f"       worst modes {rows}\n")
        for note in r.notes:
            if r.check_name == "domain_growth" or "Error" in note:
                out.write(f"       note: {note}\n")


def _table(by_N, out):
    Ns = sorted(by_N)
    checks = []
    for N in Ns:
        for r in by_N[N]:
            if r.check_name not in checks:
                checks.append(r.check_name)
    out.write("\nconvergence table (max residual)\n")
    out.write(f"{'check':<26}" + "".join(f"{'N=' + str(N):>12}" for N in Ns) + "\n")
    for c in checks:
        cells = []
        for N in Ns:
            r = next((r for r in by_N[N] if r.check_name == c), None)
            cells.append(f"{_fmt(r.max_residual) if r else '-':>12}")
        out.write(f"{c:<26}" + "".join(cells) + "\n")


def _csv_rows(reports, model):
    for r in reports:
        yield [r.check_name, model, r.N, repr(float(r.max_residual)), repr(float(r.tolerance)),
               str(bool(r.passed)).lower()]


def _write_csv(path, rows, out=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    if path in (None, "-"):
        (out or sys.stdout).write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())


def _status(all_reports, numeric):
    if numeric:
        return EXIT_NUMERIC
    return EXIT_OK if all(r.passed for r in all_reports) else EXIT_FAIL


def cmd_run(cfg, args, out):
    prov = {"config_hash": cfgmod.config_hash(cfg), "seed": cfg.seed}
    os.makedirs(cfg.output_path, exist_ok=True)
    by_N, files, numeric = {}, [], False
    for N in cfg.N:
        res = run_checks(cfg, N, args.suite)
        numeric |= res.numeric_error
        reps = [r.with_context(cfg.model_name, prov) for r in res.reports]
        by_N[N] = reps
        _summary(reps, out)
        if cfg.output_format == "json":
            for r in reps:
                fn = os.path.join(cfg.output_path, f"{cfg.model_name}_{r.check_name}_N{N}.json")
                with open(fn, "w", encoding="utf-8") as fh:
                    fh.write(r.to_json())
                files.append(os.path.basename(fn))
    all_reps = [r for N in cfg.N for r in by_N[N]]
    if cfg.output_format == "csv":
        fn = os.path.join(cfg.output_path, f"{cfg.model_name}_summary.csv")
        _write_csv(fn, _csv_rows(all_reps, cfg.model_name))
        files.append(os.path.basename(fn))
    if len(cfg.N) > 1:
        _table(by_N, out)
    manifest = {"created": datetime.now(timezone.utc).isoformat(), "argv": sys.argv[1:],
                "config": cfgmod.to_dict(cfg), **prov, "files": files}
    with open(os.path.join(cfg.output_path, "run_manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    status = _status(all_reps, numeric)
    out.write(f"\n{sum(r.passed for r in all_reps)}/{len(all_reps)} checks passed; exit {status}\n")
    return status


def decay_fit(Ns, residuals):
    """Least-squares slope of log residual against log N, or a floor label."""
    r = np.asarray(residuals, dtype=float)
    if np.all(np.isfinite(r)) and np.all(r <= MACHINE_FLOOR):
        return None, "converged at machine precision"
    ok = np.isfinite(r) & (r > 0)
    if ok.sum() < 2:
        return None, "indeterminate"
    slope = float(np.polyfit(np.log(np.asarray(Ns, float)[ok]), np.log(r[ok]), 1)[0])
    return slope, "decaying" if slope < 0 else "not decaying"


def cmd_converge(cfg, args, out):
    if len(cfg.N) < 3:
        raise ConfigurationError("converge needs at least 3 values of N")
    reps, numeric = [], False
    for N in cfg.N:
        res = run_checks(cfg, N, args.suite)
        numeric |= res.numeric_error
        match = [r for r in res.reports if r.check_name == args.check]
        if not match:
            raise ConfigurationError(f"check {args.check!r} not produced by suite {args.suite!r} "
                                     f"for model {cfg.model_name} at N={N}")
        reps.append(match[0].with_context(cfg.model_name))
    _write_csv(args.out, _csv_rows(reps, cfg.model_name), out)
    slope, label = decay_fit(cfg.N, [r.max_residual for r in reps])
    stream = out if args.out not in (None, "-") else sys.stderr
    stream.write(f"{args.check}: slope {'n/a' if slope is None else f'{slope:.3f}'} ({label})\n")
    return _status(reps, numeric)


def dump_matrix(cfg, what, N):
    ctx = Context(cfg, N).load()
    sys_ = ctx.system
    if what == "T":
        return ctx.model.pair.T
    if what == "phi":
        return ops.TruncatedOperator(sys_.phi, sys_.basis)
    if what == "psi":
        return ops.TruncatedOperator(sys_.psi, sys_.basis)
    if what == "gram":
        return ops.TruncatedOperator(riesz.biorthogonality_gram(sys_).gram, sys_.basis)
    pp = polar.positive_constructing_pair(sys_, "phi").polar
    return pp.U if what == "polar_U" else pp.Pos


def cmd_dump(cfg, args, out):
    N = cfg.N[0]
    op = dump_matrix(cfg, args.what, N)
    doc = ops.operator_to_json(op, what=args.what, model=cfg.model_name,
                               provenance={"config_hash": cfgmod.config_hash(cfg), "seed": cfg.seed})
    text = json.dumps(doc, indent=2) + "\n"
    if args.out in (None, "-"):
        out.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_parse_check(src, out, err):
    try:
        node = parse(src)
    except ExprError as exc:
        err.write(f"{exc}\n  {src}\n  {' ' * exc.offset}^\n")
        return EXIT_CONFIG
    out.write(f"ok: {to_source(node)}\n{node!r}\n")
    return EXIT_OK


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors exit 2, --help exits 0
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    if args.verb == "parse-check":
        return cmd_parse_check(args.expr, out, err)
    try:
        cfg = resolve_config(args)
        if args.verb == "run":
            return cmd_run(cfg, args, out)
        if args.verb == "converge":
            return cmd_converge(cfg, args, out)
        return cmd_dump(cfg, args, out)
    except (ConfigurationError, ExprError) as exc:
        err.write(f"quasibasis: config error: {exc}\n")
        return EXIT_CONFIG
    except (NumericError, SingularityError) as exc:
        err.write(f"quasibasis: numeric error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
