"""Purely lexical expansion of parameterized typedefs.

`typedef Base<Concrete Param, ...> New;` clones the definition of Base and,
transitively, every struct or typedef definition it depends on that mentions a
substituted parameter, substituting parameter names with the concrete names.
Cloned declarations are renamed by substituting the original type name with the
new one (falling back to a `New_` prefix when the original name does not occur
in a dependency's name). Protocol-bound checks on the substitutions are
deferred to the check phase, after hierarchy inference.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import surface as S
from .diagnostics import CompileError, Span, Stage, error


@dataclass
class InstantiationRecord:
    span: Span
    name: str
    base: str
    substitutions: list[tuple[str, str]]  # (concrete name, parameter name)


_BUILTIN = {"int", "char", "bool", "void", "any"}


def expand_param_typedefs(
    program: S.SurfaceProgram,
) -> tuple[S.SurfaceProgram, list[InstantiationRecord]]:
    out: list[S.Decl] = []
    records: list[InstantiationRecord] = []
    by_name: dict[str, S.Decl] = {}
    by_tag: dict[str, S.StructDecl] = {}

    def index(d: S.Decl) -> None:
        if isinstance(d, (S.ProtocolTypeDecl, S.ParameterTypeDecl)):
            by_name[d.name] = d
        elif isinstance(d, S.TypedefDecl):
            by_name[d.name] = d
        elif isinstance(d, S.StructDecl):
            by_tag[d.tag] = d

    def fail(span: Span, message: str) -> CompileError:
        return CompileError(error(Stage.EXPAND, span, message))

    def decl_for(name: str) -> S.Decl | None:
        return by_name.get(name, by_tag.get(name))

    def refs(d: S.Decl) -> list[str]:
        if isinstance(d, S.StructDecl):
            return [ftype.name for ftype, _ in d.fields]
        if isinstance(d, S.TypedefDecl):
            return [d.target.name]
        return []

    def expand_one(d: S.ParamTypedefDecl) -> list[S.Decl]:
        base_decl = by_name.get(d.base)
        if base_decl is None:
            raise fail(d.span, f"unresolved type name '{d.base}'")
        if not isinstance(base_decl, S.TypedefDecl):
            raise fail(d.span, f"'{d.base}' is not a typedef and cannot be instantiated")

        param_map: dict[str, str] = {}
        for concrete, param in d.substitutions:
            pdecl = by_name.get(param)
            if not isinstance(pdecl, S.ParameterTypeDecl):
                raise fail(d.span, f"unknown parameter type '{param}'")
            if concrete == d.name:
                raise fail(d.span, f"cyclic instantiation of '{d.name}'")
            if concrete not in _BUILTIN and decl_for(concrete) is None:
                raise fail(d.span, f"unresolved type name '{concrete}'")
            param_map[param] = concrete

        # Which declarations mention a substituted parameter, transitively.
        mentions: dict[str, bool] = {}

        def needs(name: str) -> bool:
            if name in param_map:
                return True
            if name in mentions:
                return mentions[name]
            mentions[name] = False  # cycle guard: recursive structs settle to False first
            target = decl_for(name)
            result = False
            if isinstance(target, (S.StructDecl, S.TypedefDecl)):
                result = any(needs(r) for r in refs(target))
            mentions[name] = result
            return result

        # Dependency closure from the base, in original declaration order.
        clone_names: list[str] = []
        seen: set[str] = set()

        def visit(name: str) -> None:
            if name in seen:
                return
            seen.add(name)
            target = decl_for(name)
            if not isinstance(target, (S.StructDecl, S.TypedefDecl)):
                return
            for r in refs(target):
                visit(r)
            if needs(name) or name == d.base:
                clone_names.append(name)

        visit(d.base)

        used_params = {p for p in param_map if needs(p)}
        for concrete, param in d.substitutions:
            if param not in used_params:
                raise fail(d.span, f"parameter '{param}' is not used by '{d.base}'")

        rename: dict[str, str] = dict(param_map)
        for name in clone_names:
            if d.base in name:
                rename[name] = name.replace(d.base, d.name)
            else:
                rename[name] = f"{d.name}_{name}"
        rename[d.base] = d.name

        def subst_type(te: S.TypeExpr) -> S.TypeExpr:
            new = rename.get(te.name)
            if new is None:
                return te
            return te.with_name(new)

        clones: list[S.Decl] = []
        for name in clone_names:
            target = decl_for(name)
            if isinstance(target, S.StructDecl):
                fields = [(subst_type(ftype), fname) for ftype, fname in target.fields]
                clones.append(S.StructDecl(d.span, rename[name], fields))
            elif isinstance(target, S.TypedefDecl):
                clones.append(S.TypedefDecl(d.span, subst_type(target.target), rename[name]))
        return clones

    for d in program.declarations:
        if not isinstance(d, S.ParamTypedefDecl):
            out.append(d)
            index(d)
            continue
        if d.name in by_name or d.name in by_tag:
            raise fail(d.span, f"redeclaration of type name '{d.name}'")
        clones = expand_one(d)
        for c in clones:
            out.append(c)
            index(c)
        records.append(InstantiationRecord(d.span, d.name, d.base, list(d.substitutions)))

    return S.SurfaceProgram(program.file, out), records
