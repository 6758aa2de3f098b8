"""mootc: command-line driver.

    mootc <input.moot> -o <out.c> [--dump-hierarchy <out.dot>] [--trace]
          [--promote] [--depth N] [--entry NAME] [--json-diagnostics]

Exit codes: 0 success, 1 type/check error, 2 parse error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diagnostics import EXIT_INTERNAL_ERROR
from .driver import CompileResult, DriverConfig, compile_file


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mootc", description=__doc__.splitlines()[0])
    p.add_argument("input", help="input source file (.moot)")
    p.add_argument("-o", "--output", help="output C file (default: input with .c suffix)")
    p.add_argument("--dump-hierarchy", metavar="FILE", help="write the inferred order as DOT")
    p.add_argument("--trace", action="store_true", help="log every flow application to stderr")
    p.add_argument("--promote", action="store_true", help="apply C promotion on literal call arguments")
    p.add_argument("--depth", type=int, default=3, metavar="N", help="syntactic comparison depth (default 3)")
    p.add_argument("--entry", default="main", metavar="NAME", help="entry point name (default main)")
    p.add_argument("--json-diagnostics", action="store_true", help="emit diagnostics as JSON objects")
    return p


def report(result: CompileResult, as_json: bool) -> None:
    for d in result.diagnostics:
        if as_json:
            print(json.dumps(d.to_json()), file=sys.stderr)
        else:
            print(d.render(), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.depth < 1:
        print("mootc: --depth must be at least 1", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    output = args.output or str(Path(args.input).with_suffix(".c"))
    config = DriverConfig(
        input_path=args.input,
        output_path=output,
        dump_hierarchy=args.dump_hierarchy,
        trace=args.trace,
        promote=args.promote,
        depth=args.depth,
        entry=args.entry,
        json_diagnostics=args.json_diagnostics,
    )
    result = compile_file(config)
    report(result, args.json_diagnostics)
    if result.dot is not None and args.dump_hierarchy:
        Path(args.dump_hierarchy).write_text(result.dot, encoding="utf-8")
    if result.ok and result.c_source is not None:
        Path(output).write_text(result.c_source, encoding="utf-8")
    return result.code


if __name__ == "__main__":
    sys.exit(main())
