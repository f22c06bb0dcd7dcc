"""Command-line interface.

Exit codes: 0 success, 1 input or usage error, 2 verification failure.
"""

import argparse
import csv
import io
import json
import sys
import time

from .exceptions import LowerFrameError, WeightOverflowError
from .family import (
    GENERATOR_KINDS,
    TAIL_MODES,
    GeneratorSpec,
    VectorFamily,
    family_to_dict,
    generate_family,
    load_family,
    save_family,
)
from .linalg import DEFAULT_RANK_TOL
from .pipeline import METHODS, MODES, PipelineConfig, effective_weights, run_pipeline
from .verify import VerificationReport, check_lower_frame

EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2

SWEEP_COLUMNS = ("d", "N", "mode", "T_norm", "min_frame_eig", "max_lambda", "runtime_s", "status")

SWEEP_HELP = """\
CSV columns: d, N, mode, T_norm, min_frame_eig, max_lambda, runtime_s, status.
runtime_s is blank unless --timing is given, so that output stays
byte-identical across runs. status is "ok", "overflow" or "error:<stage>".
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _family_args(p, required=True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--gen", choices=GENERATOR_KINDS, metavar="KIND",
                     help=f"built-in generator: {', '.join(GENERATOR_KINDS)}")
    src.add_argument("--input", metavar="PATH", help="family file (.json or .csv)")
    p.add_argument("--dim", type=int, metavar="D", help="ambient dimension for --gen")
    p.add_argument("--count", type=int, metavar="N", help="number of vectors for --gen")
    p.add_argument("--tail", choices=TAIL_MODES, help="override the tail rule")
    p.add_argument("--delta", type=float, help="damping factor for damped_tail (default 0.9)")
    p.add_argument("--field", choices=("real", "complex"), help="entry field for random_gaussian")


def _run_args(p):
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--method", choices=METHODS, default="direct")
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL, metavar="X")
    p.add_argument("--lambda-floor", type=float, default=0.0, metavar="X")
    p.add_argument("--samples", type=int, default=1000, metavar="M")


def _common_args(p):
    p.add_argument("--seed", type=int, default=0, metavar="S",
                   help="seed for every random choice (default 0)")
    p.add_argument("--out", metavar="PATH", help="output file (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = _Parser(prog="lowerframe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a built-in family to a file")
    _family_args(p)
    _common_args(p)

    p = sub.add_parser("analyze", help="compute and verify scaling weights for a family")
    _family_args(p)
    _run_args(p)
    _common_args(p)

    p = sub.add_parser("verify", help="re-check stored weights against a family")
    p.add_argument("--certificate", required=True, metavar="PATH")
    _family_args(p)
    p.add_argument("--samples", type=int, default=1000, metavar="M")
    _common_args(p)

    p = sub.add_parser(
        "sweep",
        help="run one generator over several dimensions",
        epilog=SWEEP_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--gen", choices=GENERATOR_KINDS, default="shifted_sum", metavar="KIND")
    p.add_argument("--dims", default="4,8,16,32,64", metavar="D1,D2,...")
    p.add_argument("--modes", metavar="M1,M2", help="comma-separated modes (default: --mode)")
    p.add_argument("--count", type=int, metavar="N")
    p.add_argument("--tail", choices=TAIL_MODES)
    p.add_argument("--delta", type=float)
    p.add_argument("--field", choices=("real", "complex"))
    p.add_argument("--timing", action="store_true", help="fill the runtime_s column")
    _run_args(p)
    _common_args(p)
    return parser


def _spec(args, dim=None):
    params = {"seed": args.seed}
    if getattr(args, "delta", None) is not None:
        params["delta"] = args.delta
    if getattr(args, "field", None) is not None:
        params["field"] = args.field
    d = args.dim if dim is None else dim
    if d is None:
        raise UsageError("--gen requires --dim")
    return GeneratorSpec(args.gen, d, args.count, args.tail, params)


def _family(args):
    if args.input:
        fam = load_family(args.input)
        source = {"input": args.input}
        if args.tail and args.tail != fam.tail_mode:
            fam = VectorFamily(fam.vectors, tail_mode=args.tail, field=fam.field)
        return fam, source
    spec = _spec(args)
    source = {"generator": spec.kind, "dim": spec.dim, "count": spec.count,
              "tail": spec.tail, "params": dict(sorted(spec.params.items()))}
    return generate_family(spec, getattr(args, "rank_tol", DEFAULT_RANK_TOL)), source


def _config(args):
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if not args.rank_tol > 0:
        raise UsageError("--rank-tol must be positive")
    if args.lambda_floor < 0:
        raise UsageError("--lambda-floor must be nonnegative")
    return PipelineConfig(mode=args.mode, method=args.method, rank_tol=args.rank_tol,
                          lambda_floor=args.lambda_floor, samples=args.samples, seed=args.seed)


def _emit(text, path, out):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


def _lambda_csv(cert):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "value", "log2"])
    for row in cert.to_dict()["lambda"]:
        w.writerow([row["k"], repr(row["value"]), "" if row["log2"] is None else repr(row["log2"])])
    return buf.getvalue()


def cmd_generate(args, out):
    fam, _ = _family(args)
    if args.out:
        save_family(fam, args.out, args.format)
    else:
        if args.format == "csv":
            raise UsageError("CSV output of a family needs --out")
        out.write(json.dumps(family_to_dict(fam)) + "\n")
    return EXIT_OK


def _summary(cert, out):
    d = cert.to_dict()
    lam = [r["value"] for r in d["lambda"]]
    report = cert.report
    n_pass = sum(c.passed for c in report.checks)
    print(f"family      dim={d['dim']} count={d['count']} tail={d['tail']}", file=out)
    print(f"run         mode={d['mode']} method={d['method']}", file=out)
    print(f"T_norm      {d['T_norm']!r}", file=out)
    print(f"identity    {d['identity_residual']!r}", file=out)
    print(f"min_eig     {d['min_frame_eig']!r}", file=out)
    if lam:
        print(f"lambda      min={min(lam)!r} max={max(lam)!r} ({len(lam)} weights)", file=out)
    if d["uniform_baseline"] is not None:
        print(f"baseline    {d['uniform_baseline']!r}", file=out)
    print(f"checks      {n_pass}/{len(report.checks)} passed", file=out)
    for c in report.failures:
        print(f"  FAIL {c.name}: lhs={c.lhs!r} rhs={c.rhs!r}", file=out)


def cmd_analyze(args, out):
    config = _config(args)
    fam, source = _family(args)
    cert = run_pipeline(fam, config)
    if args.out:
        text = cert.to_json({"source": source}) if args.format == "json" else _lambda_csv(cert)
        _emit(text, args.out, out)
    _summary(cert, out)
    return EXIT_OK if cert.passed else EXIT_FAILED


def _read_certificate(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    if not isinstance(doc, dict) or not isinstance(doc.get("lambda"), list):
        raise UsageError(f"{path}: not a certificate (missing 'lambda' array)")
    return doc


def cmd_verify(args, out):
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    doc = _read_certificate(args.certificate)
    fam, _ = _family(args)
    if doc.get("dim") != fam.dim:
        raise UsageError(f"certificate is for dimension {doc.get('dim')}, family has {fam.dim}")
    if "count" in doc and doc["count"] != fam.count:
        raise UsageError(f"certificate is for {doc['count']} vectors, family has {fam.count}")
    if "tail" in doc and doc["tail"] != fam.tail_mode:
        raise UsageError(f"certificate tail {doc['tail']!r} differs from family tail {fam.tail_mode!r}")
    try:
        lam = {int(r["k"]): float(r["value"]) for r in doc["lambda"]}
    except (KeyError, TypeError, ValueError):
        raise UsageError(f"{args.certificate}: malformed 'lambda' entries")
    eff = effective_weights(lam, fam)
    checks = check_lower_frame(fam, eff, samples=args.samples, seed=args.seed)
    report = VerificationReport(checks, seed=args.seed, sample_count=args.samples)
    if args.out:
        _emit(json.dumps({"passed": report.passed, "checks": report.to_list()}, indent=2) + "\n",
              args.out, out)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: lhs={c.lhs!r} rhs={c.rhs!r}", file=out)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_sweep(args, out):
    try:
        dims = [int(x) for x in args.dims.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--dims must be comma-separated integers, got {args.dims!r}")
    if not dims or any(d < 1 for d in dims):
        raise UsageError("--dims entries must be positive integers")
    modes = args.modes.split(",") if args.modes else [args.mode]
    for m in modes:
        if m not in MODES:
            raise UsageError(f"unknown mode {m!r}")
    base = _config(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    failed = False
    for d in dims:
        fam = generate_family(_spec(args, d), base.rank_tol)
        for mode in modes:
            cfg = PipelineConfig(**{**base.to_dict(), "mode": mode})
            t0 = time.perf_counter()
            try:
                cert = run_pipeline(fam, cfg)
            except WeightOverflowError:
                w.writerow([d, fam.count, mode, "", "", "", "", "overflow"])
                continue
            except LowerFrameError as exc:
                w.writerow([d, fam.count, mode, "", "", "", "", f"error:{exc.stage}"])
                failed = True
                continue
            elapsed = time.perf_counter() - t0
            failed |= not cert.passed
            w.writerow([
                d, fam.count, mode, repr(float(cert.T_norm)), repr(float(cert.min_frame_eig)),
                repr(float(max(cert.lambdas.values()))),
                f"{elapsed:.6f}" if args.timing else "",
                "ok" if cert.passed else "failed",
            ])
    _emit(buf.getvalue(), args.out, out)
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {"generate": cmd_generate, "analyze": cmd_analyze, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"lowerframe {args.command}: error: {exc}", file=err)
    except LowerFrameError as exc:
        print(f"lowerframe {args.command}: {type(exc).__name__}: {exc}", file=err)
    except OSError as exc:
        print(f"lowerframe {args.command}: error: {exc}", file=err)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
