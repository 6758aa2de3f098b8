"""Post-hierarchy checks: parameter bounds and explicit subsumption requests.

Both produce diagnostics built from counterexample paths through the simulation
graph; neither changes the inferred order.
"""

from __future__ import annotations

from . import surface as S
from .diagnostics import CompileError, Diagnostic, Stage, error
from .expand import InstantiationRecord
from .hierarchy import SubsumptionOrder, check_subsumption
from .universe import TypeUniverse


def check_parameter_bounds(
    records: list[InstantiationRecord], u: TypeUniverse, order: SubsumptionOrder
) -> list[Diagnostic]:
    """For every instantiation substituting C for parameter P, verify P subsumes C."""
    out: list[Diagnostic] = []
    for rec in records:
        for concrete_name, param_name in rec.substitutions:
            concrete = u.names.get(concrete_name, u.tags.get(concrete_name))
            param = u.names.get(param_name)
            if concrete is None or param is None:
                out.append(
                    error(Stage.CHECK, rec.span, f"unresolved name in instantiation '{rec.name}'")
                )
                continue
            cex = check_subsumption(order, concrete, param)
            if cex is not None:
                out.append(Diagnostic(Stage.CHECK, "error", rec.span, cex.rendered))
    return out


def run_check_directives(
    program: S.SurfaceProgram, u: TypeUniverse, order: SubsumptionOrder
) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for d in program.declarations:
        if not isinstance(d, S.CheckDirective):
            continue
        strong = u.names.get(d.strong, u.tags.get(d.strong))
        weak = u.names.get(d.weak, u.tags.get(d.weak))
        if strong is None:
            out.append(error(Stage.CHECK, d.span, f"unresolved type name '{d.strong}'"))
            continue
        if weak is None:
            out.append(error(Stage.CHECK, d.span, f"unresolved type name '{d.weak}'"))
            continue
        cex = check_subsumption(order, strong, weak)
        if cex is not None:
            out.append(Diagnostic(Stage.CHECK, "error", d.span, cex.rendered))
    return out


def distinct_pairs(program: S.SurfaceProgram, u: TypeUniverse) -> set[tuple[int, int]]:
    """Type pairs the user marked distinct before inference."""
    pairs: set[tuple[int, int]] = set()
    for d in program.declarations:
        if not isinstance(d, S.DistinctDirective):
            continue
        a = u.names.get(d.left, u.tags.get(d.left))
        b = u.names.get(d.right, u.tags.get(d.right))
        if a is None or b is None:
            missing = d.left if a is None else d.right
            raise CompileError(error(Stage.HIERARCHY, d.span, f"unresolved type name '{missing}'"))
        pairs.add((a, b))
    return pairs
