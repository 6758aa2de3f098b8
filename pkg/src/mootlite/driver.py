"""The batch compilation pipeline.

Stages run in order and stop at the first failure: parse, typedef expansion,
universe construction, hierarchy inference, bound/check directives,
instantiation from the entry point, C emission. Diagnostics are reported in
source order within a stage; the exit code reflects the failing stage.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from . import __version__
from . import surface as S
from .antichains import Antichain
from .checks import check_parameter_bounds, distinct_pairs, run_check_directives
from .diagnostics import (
    EXIT_INTERNAL_ERROR,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    EXIT_TYPE_ERROR,
    CompileError,
    Diagnostic,
    InternalError,
    Stage,
)
from .emit import emit_c
from .expand import expand_param_typedefs
from .graphs import RelationCache
from .hierarchy import SubsumptionOrder, greatest_fixed_point, initial_approximation
from .mono import InstantiationTree, Monomorphizer, find_entry
from .parser import parse
from .typeflow import FlowMemo
from .universe import TypeUniverse, build_universe


@dataclass
class DriverConfig:
    input_path: str = "<input>"
    output_path: str | None = None
    dump_hierarchy: str | None = None
    trace: bool = False
    promote: bool = False
    depth: int = 3
    entry: str = "main"
    json_diagnostics: bool = False

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("comparison depth must be at least 1")


@dataclass
class CompileResult:
    code: int
    diagnostics: list[Diagnostic] = field(default_factory=list)
    program: S.SurfaceProgram | None = None
    universe: TypeUniverse | None = None
    order: SubsumptionOrder | None = None
    tree: InstantiationTree | None = None
    c_source: str | None = None
    dot: str | None = None

    @property
    def ok(self) -> bool:
        return self.code == EXIT_OK


def compile_source(
    source: str, config: DriverConfig | None = None, trace_out=None
) -> CompileResult:
    """Run the pipeline over source text; never raises for user errors."""
    config = config or DriverConfig()
    result = CompileResult(EXIT_OK)
    try:
        try:
            program = parse(source, config.input_path)
        except CompileError as e:
            result.diagnostics = e.diagnostics
            result.code = EXIT_PARSE_ERROR
            return result

        program, records = expand_param_typedefs(program)
        result.program = program

        u = build_universe(program)
        result.universe = u

        init = initial_approximation(u, depth=config.depth, distinct=distinct_pairs(program, u))
        order = greatest_fixed_point(u, init)
        result.order = order
        result.dot = order.to_dot()

        checks = check_parameter_bounds(records, u, order)
        checks.extend(run_check_directives(program, u, order))
        checks.sort(key=lambda d: (d.span.line, d.span.col) if d.span else (0, 0))
        if checks:
            result.diagnostics = checks
            result.code = EXIT_TYPE_ERROR
            return result

        entry = find_entry(u, config.entry)
        cache = RelationCache(u, order)
        memo = FlowMemo(order)
        trace = None
        if config.trace:
            sink = trace_out if trace_out is not None else sys.stderr
            trace = lambda line: print(line, file=sink)  # noqa: E731
        mono = Monomorphizer(u, order, cache, memo, promote=config.promote, trace=trace)
        tree = mono.run(entry)
        result.tree = tree
        result.diagnostics.extend(cache.warnings)

        result.c_source = emit_c(tree, program, u, config.input_path, __version__)
        return result
    except CompileError as e:
        result.diagnostics.extend(e.diagnostics)
        result.code = EXIT_TYPE_ERROR
        return result
    except InternalError as e:
        result.diagnostics.append(
            Diagnostic(Stage.DRIVER, "error", None, f"internal error: {e}")
        )
        result.code = EXIT_INTERNAL_ERROR
        return result


def compile_file(config: DriverConfig, trace_out=None) -> CompileResult:
    try:
        with open(config.input_path, "r", encoding="utf-8") as f:
            source = f.read()
    except OSError as e:
        result = CompileResult(EXIT_PARSE_ERROR)
        result.diagnostics.append(Diagnostic(Stage.DRIVER, "error", None, str(e)))
        return result
    return compile_source(source, config, trace_out=trace_out)
