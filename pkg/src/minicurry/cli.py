"""The `mcy` command: run, compile (with dumps), oracle, and bench.

Exit codes: 0 on natural exhaustion or a reached value limit, 1 on compile
errors (message on stderr), 2 when the step or time budget ran out before
the queue drained.  Values stream to stdout one per line as they are
emitted; traces and statistics go to stderr so stdout stays machine-readable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench, oracle, scheduler, syntax, trees
from .syntax import CompileError


def _read_source(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"mcy: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _prelude_text(args) -> str | None:
    override = os.environ.get("MCY_PRELUDE")
    if override:
        return _read_source(override)
    return None


def _compile(args, source: str):
    try:
        return trees.compile_program(source, use_prelude=not args.no_prelude,
                                     prelude_text=_prelude_text(args))
    except CompileError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        raise SystemExit(1)


def cmd_run(args) -> int:
    source = _read_source(args.file)
    ir = _compile(args, source)
    seen: set[str] = set()

    def sink(text: str) -> None:
        if args.dedup:
            if text in seen:
                return
            seen.add(text)
        print(text, flush=True)

    trace = None
    if args.trace:
        def trace(step, kind, serial, symbol):
            print(f"STEP {step}: {kind} at #{serial} ({symbol})",
                  file=sys.stderr, flush=True)

    try:
        result = scheduler.run(ir, max_values=args.max_values,
                               quantum=args.quantum, max_steps=args.max_steps,
                               sink=sink, trace=trace)
    except CompileError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return 1
    if args.stats:
        for line in result.stats.lines():
            print(line, file=sys.stderr)
    return 2 if result.status in (scheduler.FUEL, scheduler.TIMEOUT) else 0


def cmd_compile(args) -> int:
    source = _read_source(args.file)
    ir = _compile(args, source)
    if args.dump_dtree:
        sys.stdout.write(trees.dump_dtree(ir))
    if args.dump_icurry:
        sys.stdout.write(trees.dump_icurry(ir))
    if not args.dump_dtree and not args.dump_icurry:
        print(f"{args.file}: ok", flush=True)
    return 0


def cmd_oracle(args) -> int:
    source = _read_source(args.file)
    try:
        prelude = _prelude_text(args)
        program = syntax.load_program(source, use_prelude=not args.no_prelude,
                                      prelude_text=prelude)
        # reject programs the engine would reject, then enumerate independently
        trees.compile_program(source, use_prelude=not args.no_prelude,
                              prelude_text=prelude)
        values = oracle.enumerate_values(program, fuel=args.fuel)
    except CompileError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return 1
    except oracle.OracleFuelExhausted as exc:
        print(f"mcy oracle: {exc}", file=sys.stderr)
        return 2
    for text in sorted(values.elements()):
        print(text, flush=True)
    return 0


def cmd_bench(args) -> int:
    sizes = bench.parse_sizes(args.sizes)
    rows = bench.run_bench(args.corpus, sizes, repetitions=args.reps,
                           timeout=args.timeout, programs=args.programs,
                           quantum=args.quantum)
    bench.write_csv(rows)
    for fit in bench.compute_fits(rows):
        print(f"fit: program={fit.program} metric={fit.metric} "
              f"slope={fit.slope:.4f} r2={fit.r2:.4f}", file=sys.stderr)
    if args.plot:
        for path, _ in bench.render_figures(rows, args.plot):
            print(f"figure: {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcy", description="MiniCurry functional-logic evaluator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate main and print its values")
    p_run.add_argument("file")
    p_run.add_argument("-n", "--max-values", type=int, default=0,
                       help="stop after this many values (0 = all)")
    p_run.add_argument("--quantum", type=int, default=scheduler.DEFAULT_QUANTUM,
                       help="steps before the active computation rotates")
    p_run.add_argument("--max-steps", type=int, default=0,
                       help="total step budget (0 = unlimited)")
    p_run.add_argument("--trace", action="store_true",
                       help="log one line per engine action to stderr")
    p_run.add_argument("--stats", action="store_true",
                       help="print run statistics to stderr")
    p_run.add_argument("--dedup", action="store_true",
                       help="suppress duplicate values in the output")
    p_run.add_argument("--no-prelude", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_compile = sub.add_parser("compile", help="compile and optionally dump")
    p_compile.add_argument("file")
    p_compile.add_argument("--dump-dtree", action="store_true",
                           help="print definitional trees")
    p_compile.add_argument("--dump-icurry", action="store_true",
                           help="print the symbol table and lowered tables")
    p_compile.add_argument("--no-prelude", action="store_true")
    p_compile.set_defaults(fn=cmd_compile)

    p_oracle = sub.add_parser("oracle", help="brute-force reference enumeration")
    p_oracle.add_argument("file")
    p_oracle.add_argument("--fuel", type=int, default=oracle.DEFAULT_FUEL)
    p_oracle.add_argument("--no-prelude", action="store_true")
    p_oracle.set_defaults(fn=cmd_oracle)

    p_bench = sub.add_parser("bench", help="run the corpus, CSV on stdout")
    p_bench.add_argument("corpus", help="directory of .mcy programs")
    p_bench.add_argument("--sizes", default="4..8",
                         help="size sweep for benchSize programs, e.g. 4..9")
    p_bench.add_argument("--reps", type=int, default=1)
    p_bench.add_argument("--timeout", type=float, default=None,
                         help="per-run wall-clock limit in seconds")
    p_bench.add_argument("--programs", nargs="*", default=None,
                         help="only these program stems")
    p_bench.add_argument("--quantum", type=int, default=scheduler.DEFAULT_QUANTUM)
    p_bench.add_argument("--plot", default=None, metavar="DIR",
                         help="render per-program figures into DIR")
    p_bench.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
