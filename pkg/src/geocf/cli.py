"""Command-line front end.

Subcommands: run (the sweep), certify (excellence certificate at a given
scale), oracle best-approx / cf / minima (brute-force cross-checks) and
check (replay a trace file and verify it byte for byte).

All numeric input is parsed exactly: "2/5", "0.4" and "4e-1" denote the
same rational and never round-trip through binary floating point.  Output
rationals are serialized as "num/den" strings; traces are canonical JSON
so identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from . import geodesic, oracle
from .errors import GeoCFError
from .geodesic import Convergent, Event, RunConfig, Trace, run, verify_trace
from .qform import form_from_matrix
from .ratutil import decimal_str, fraction_str, nth_root_floor, parse_fraction
from .tform import DUAL, PRIMARY, AffineInT, make_setup


def _parse_rational(parser: argparse.ArgumentParser, flag: str, text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError):
        parser.error(f"{flag}: {text!r} is not an exact rational literal")


def _collect_alphas(parser: argparse.ArgumentParser, args) -> list:
    alphas = [_parse_rational(parser, "--alpha", a) for a in (args.alpha or [])]
    if getattr(args, "alpha_file", None):
        try:
            with open(args.alpha_file, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.split("#", 1)[0].strip()
                    if line:
                        alphas.append(_parse_rational(parser, "--alpha-file", line))
        except OSError as exc:
            parser.error(f"--alpha-file: {exc}")
    if not alphas:
        parser.error("--alpha: at least one target number is required")
    return alphas


def _add_alpha_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha", action="append", metavar="RAT",
                     help="target number as p/q or an exact decimal; repeatable")
    sub.add_argument("--alpha-file", metavar="PATH",
                     help="file with one target per line, # comments allowed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geocf",
        description="Simultaneous rational approximation by an exact parametric reduction sweep",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    runp = subs.add_parser("run", help="run the sweep and emit the trace")
    _add_alpha_options(runp)
    runp.add_argument("--omega", default="3/4", metavar="RAT", help="slack factor in [3/4, 1]")
    runp.add_argument("--variant", choices=("full", "partial", "dual"), default="full")
    runp.add_argument("--t-min", metavar="RAT",
                      help="stop once the sweep passes this t (upper bound in dual mode)")
    runp.add_argument("--max-events", type=int, metavar="N")
    runp.add_argument("--q-max", type=int, metavar="N",
                      help="stop after emitting a convergent with q beyond this")
    runp.add_argument("--format", choices=("table", "json", "csv"), default="table")
    runp.add_argument("--trace", choices=("events", "full"), default="events",
                      help="include per-event state snapshots with 'full'")
    runp.add_argument("--output", metavar="PATH", help="write to a file instead of stdout")

    certp = subs.add_parser("certify", help="excellence certificate at a given scale")
    _add_alpha_options(certp)
    certp.add_argument("--t", required=True, metavar="RAT", help="scale to certify at")
    certp.add_argument("--epsilon", required=True, metavar="RAT")
    certp.add_argument("--omega", default="3/4", metavar="RAT")
    certp.add_argument("--variant", choices=("full", "partial"), default="full")

    oraclep = subs.add_parser("oracle", help="brute-force cross-checks")
    osubs = oraclep.add_subparsers(dest="oracle_command", required=True)

    bap = osubs.add_parser("best-approx", help="exhaustive best approximations")
    _add_alpha_options(bap)
    bap.add_argument("--q-max", type=int, required=True, metavar="N")

    cfp = osubs.add_parser("cf", help="continued fraction convergents (one target)")
    _add_alpha_options(cfp)

    minp = osubs.add_parser("minima", help="successive minima of a form by enumeration")
    minp.add_argument("--form", required=True, metavar="JSON",
                      help='form matrix, e.g. "[[2,1],[1,3]]" (entries may be "p/q" strings)')
    minp.add_argument("--k", type=int, required=True, metavar="K")
    minp.add_argument("--bound", required=True, metavar="RAT",
                      help="enumeration bound, must be >= the true k-th minimum")

    checkp = subs.add_parser("check", help="replay a trace file and verify invariants")
    checkp.add_argument("trace_file", metavar="TRACE.json")

    return parser


# ---------------------------------------------------------------------------
# serialization

def _op_to_json(op: tuple) -> list:
    return list(op)


def _fr(x: Optional[Fraction]) -> Optional[str]:
    return None if x is None else fraction_str(x)


def _quality_decimal(conv: Convergent, mode: str, d: int) -> str:
    if conv.err2 == 0:
        return "0"
    if mode == PRIMARY:
        x = conv.err2 ** d * conv.q * conv.q  # (err2 * q^(2/d))^d
        if d == 1:
            return decimal_str(x)
        scale = 10 ** 18
        root = nth_root_floor(x.numerator * scale ** d // x.denominator, d)
        return decimal_str(Fraction(root, scale))
    height = max(abs(x) for x in conv.p)
    return decimal_str(conv.err2 * Fraction(height) ** (2 * d))


def _convergent_to_json(conv: Convergent, mode: str, d: int) -> dict:
    return {
        "p": list(conv.p),
        "q": conv.q,
        "err2": fraction_str(conv.err2),
        "quality": _quality_decimal(conv, mode, d),
        "t_interval": [_fr(conv.t_lo), _fr(conv.t_hi)],
    }


def _affine_to_json(f: AffineInT) -> list:
    return [fraction_str(f.u), fraction_str(f.v)]


def trace_to_doc(trace: Trace) -> dict:
    config = trace.config
    setup = config.setup
    doc = {
        "config": {
            "alpha": [fraction_str(a) for a in setup.raw_alpha()],
            "mode": setup.mode,
            "omega": fraction_str(config.omega),
            "variant": config.variant,
            "t_limit": _fr(config.t_limit),
            "max_events": config.max_events,
            "q_max": config.q_max,
            "trace_detail": config.trace_detail,
        },
        "events": [
            {
                "k": e.k,
                "t": fraction_str(e.t),
                "ops": [_op_to_json(op) for op in e.ops],
                "P": [list(row) for row in e.P_after],
            }
            for e in trace.events
        ],
        "convergents": [
            _convergent_to_json(c, setup.mode, setup.d) for c in trace.convergents
        ],
        "termination": trace.termination,
    }
    if trace.snapshots is not None:
        doc["snapshots"] = [
            {
                "B": {f"{i},{j}": _affine_to_json(f) for (i, j), f in sorted(snap[0].items())},
                "C": {str(i): _affine_to_json(f) for i, f in sorted(snap[1].items())},
            }
            for snap in trace.snapshots
        ]
    return doc


def emit_json(trace: Trace) -> str:
    return json.dumps(trace_to_doc(trace), sort_keys=True, separators=(",", ":")) + "\n"


def config_from_doc(doc: dict) -> RunConfig:
    cfg = doc["config"]
    setup = make_setup([Fraction(a) for a in cfg["alpha"]], cfg["mode"])
    return RunConfig(
        setup=setup,
        omega=Fraction(cfg["omega"]),
        variant=cfg["variant"],
        t_limit=None if cfg["t_limit"] is None else Fraction(cfg["t_limit"]),
        max_events=cfg["max_events"],
        q_max=cfg["q_max"],
        trace_detail=cfg["trace_detail"],
    )


def trace_from_doc(doc: dict) -> Trace:
    config = config_from_doc(doc)
    events = tuple(
        Event(
            e["k"],
            Fraction(e["t"]),
            tuple(tuple(op) for op in e["ops"]),
            tuple(tuple(row) for row in e["P"]),
        )
        for e in doc["events"]
    )
    convergents = tuple(
        Convergent(
            tuple(c["p"]),
            c["q"],
            Fraction(c["err2"]),
            None if c["t_interval"][0] is None else Fraction(c["t_interval"][0]),
            None if c["t_interval"][1] is None else Fraction(c["t_interval"][1]),
        )
        for c in doc["convergents"]
    )
    snapshots = None
    if "snapshots" in doc:
        snapshots = tuple(
            (
                {
                    tuple(int(x) for x in key.split(",")): AffineInT(
                        Fraction(u), Fraction(v)
                    )
                    for key, (u, v) in snap["B"].items()
                },
                {int(key): AffineInT(Fraction(u), Fraction(v)) for key, (u, v) in snap["C"].items()},
            )
            for snap in doc["snapshots"]
        )
    return Trace(config, events, convergents, doc["termination"], snapshots)


def emit_csv(trace: Trace) -> str:
    d = trace.config.setup.d
    mode = trace.config.setup.mode
    header = "q," + ",".join(f"p{i + 1}" for i in range(d)) + ",err2,quality,t_lo,t_hi"
    lines = [header]
    for c in trace.convergents:
        cells = [str(c.q)] + [str(x) for x in c.p] + [
            fraction_str(c.err2),
            _quality_decimal(c, mode, d),
            "" if c.t_lo is None else fraction_str(c.t_lo),
            "" if c.t_hi is None else fraction_str(c.t_hi),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_table(trace: Trace) -> str:
    setup = trace.config.setup
    d, mode = setup.d, setup.mode
    out = [
        f"mode: {mode}  variant: {trace.config.variant}  omega: {fraction_str(trace.config.omega)}",
        f"alpha: {', '.join(fraction_str(a) for a in setup.raw_alpha())}",
        f"events: {len(trace.events)}  termination: {trace.termination}",
        "",
    ]
    rows = [("q", "p", "err2", "quality", "window")]
    for c in trace.convergents:
        window = "({}, {}]".format(
            "0" if c.t_lo is None else fraction_str(c.t_lo),
            "inf" if c.t_hi is None else fraction_str(c.t_hi),
        )
        rows.append(
            (
                str(c.q),
                "(" + ", ".join(str(x) for x in c.p) + ")",
                fraction_str(c.err2),
                _quality_decimal(c, mode, d),
                window,
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    for r in rows:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def _cmd_run(parser: argparse.ArgumentParser, args) -> int:
    alphas = _collect_alphas(parser, args)
    omega = _parse_rational(parser, "--omega", args.omega)
    if not Fraction(3, 4) <= omega <= 1:
        parser.error(f"--omega: {args.omega} is outside [3/4, 1]")
    mode = DUAL if args.variant == "dual" else PRIMARY
    variant = geodesic.FULL if args.variant == "dual" else args.variant
    t_limit = _parse_rational(parser, "--t-min", args.t_min) if args.t_min else None
    if t_limit is not None and t_limit <= 0:
        parser.error("--t-min: must be positive")
    if args.max_events is not None and args.max_events < 1:
        parser.error("--max-events: must be >= 1")
    if args.q_max is not None and args.q_max < 1:
        parser.error("--q-max: must be >= 1")
    config = RunConfig(
        setup=make_setup(alphas, mode),
        omega=omega,
        variant=variant,
        t_limit=t_limit,
        max_events=args.max_events,
        q_max=args.q_max,
        trace_detail=args.trace,
    )
    trace = run(config)
    if args.format == "json":
        text = emit_json(trace)
    elif args.format == "csv":
        text = emit_csv(trace)
    else:
        text = emit_table(trace)
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"geocf: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_certify(parser: argparse.ArgumentParser, args) -> int:
    alphas = _collect_alphas(parser, args)
    omega = _parse_rational(parser, "--omega", args.omega)
    if not Fraction(3, 4) <= omega <= 1:
        parser.error(f"--omega: {args.omega} is outside [3/4, 1]")
    t = _parse_rational(parser, "--t", args.t)
    epsilon = _parse_rational(parser, "--epsilon", args.epsilon)
    if t <= 0:
        parser.error("--t: must be positive")
    if epsilon <= 0:
        parser.error("--epsilon: must be positive")
    setup = make_setup(alphas, PRIMARY)
    trace = run(RunConfig(setup=setup, omega=omega, variant=args.variant, t_limit=t))
    if trace.events:
        from .tform import recompute_state

        state = recompute_state(setup, trace.events[-1].P_after)
    else:
        from .tform import init_state

        state = init_state(setup, Fraction(1))
    result = geodesic.certify_excellent(state, t, epsilon)
    doc = {"verdict": result.verdict}
    if result.verdict == "certified":
        doc["p"] = list(result.p)
        doc["q"] = result.q
    sys.stdout.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    return 0


def _cmd_oracle_best(parser: argparse.ArgumentParser, args) -> int:
    alphas = _collect_alphas(parser, args)
    if args.q_max < 1:
        parser.error("--q-max: must be >= 1")
    records = oracle.best_approximations(alphas, args.q_max)
    doc = [{"q": r.q, "p": list(r.p), "err2": fraction_str(r.err2)} for r in records]
    sys.stdout.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    return 0


def _cmd_oracle_cf(parser: argparse.ArgumentParser, args) -> int:
    alphas = _collect_alphas(parser, args)
    if len(alphas) != 1:
        parser.error("--alpha: continued fractions take exactly one target")
    doc = [[p, q] for p, q in oracle.classical_cf(alphas[0])]
    sys.stdout.write(json.dumps(doc, separators=(",", ":")) + "\n")
    return 0


def _cmd_oracle_minima(parser: argparse.ArgumentParser, args) -> int:
    try:
        grid = json.loads(args.form)
        entries = [[parse_fraction(str(x)) for x in row] for row in grid]
    except (ValueError, TypeError) as exc:
        parser.error(f"--form: {exc}")
    bound = _parse_rational(parser, "--bound", args.bound)
    try:
        Q = form_from_matrix(entries)
        report = oracle.successive_minima(Q, args.k, bound)
    except GeoCFError as exc:
        print(f"geocf: {exc}", file=sys.stderr)
        return 1
    doc = {
        "values": [fraction_str(v) for v in report.values],
        "witnesses": [list(w) for w in report.witnesses],
    }
    sys.stdout.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    return 0


def _cmd_check(args) -> int:
    try:
        with open(args.trace_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"geocf: cannot read trace: {exc}", file=sys.stderr)
        return 1
    try:
        trace = trace_from_doc(json.loads(text))
    except (KeyError, ValueError, TypeError) as exc:
        print(f"geocf: malformed trace file: {exc!r}", file=sys.stderr)
        return 1
    problems = verify_trace(trace)
    replayed = run(trace.config)
    if emit_json(replayed) != text:
        problems.append("serialized trace is not byte-identical to its replay")
    if problems:
        for problem in problems:
            print(f"geocf: {problem}", file=sys.stderr)
        return 1
    print("trace verified")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(parser, args)
        if args.command == "certify":
            return _cmd_certify(parser, args)
        if args.command == "oracle":
            if args.oracle_command == "best-approx":
                return _cmd_oracle_best(parser, args)
            if args.oracle_command == "cf":
                return _cmd_oracle_cf(parser, args)
            return _cmd_oracle_minima(parser, args)
        return _cmd_check(args)
    except GeoCFError as exc:
        print(f"geocf: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
