"""C code emission for a fully instantiated program.

Emits the concrete struct/typedef declarations in source order, then one
function per live instantiation with its mangled name, callees before callers
(prototypes are hoisted only for recursion cycles). Statement and expression
structure is preserved; `+` qualifiers, protocol machinery, and weakening casts
are erased, and every call site is rewritten to the mangled callee.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import surface as S
from .diagnostics import InternalError
from .graphs import BuiltGraph
from .mono import Instantiation, InstantiationTree
from .typeflow import Typing
from .universe import TypeId, TypeKind, TypeUniverse


def _core_and_stars(u: TypeUniverse, tid: TypeId) -> tuple[TypeId, int]:
    stars = 0
    while u.kind(tid) == TypeKind.POINTER:
        tid = u.desc(tid).pointee
        stars += 1
    return tid, stars


def _cname(u: TypeUniverse, tid: TypeId) -> str:
    d = u.desc(tid)
    if d.kind == TypeKind.BUILTIN:
        return d.name
    if d.kind == TypeKind.STRUCT:
        alias = u.aliases.get(tid)
        return alias if alias else f"struct {d.name}"
    raise InternalError(f"type {u.display(tid)} has no C rendering")


def declarator(u: TypeUniverse, tid: TypeId, name: str, ref: bool = False) -> str:
    core, stars = _core_and_stars(u, tid)
    prefix = "*" * stars + ("&" if ref else "")
    base = _cname(u, core)
    if not name and not prefix:
        return base
    return f"{base} {prefix}{name}"


@dataclass
class _Ctx:
    u: TypeUniverse
    inst: Instantiation
    built: BuiltGraph
    typing: Typing


def _call_name(ctx: _Ctx, e: S.Call) -> str:
    idx = ctx.built.call_site_of.get(id(e))
    if idx is None:
        return e.name  # printf and other opaque builtins keep their names
    return ctx.inst.bindings[idx].mangled


def _expr(ctx: _Ctx, e: S.Expr, parent_prec: int = 0) -> str:
    if isinstance(e, S.Name):
        return e.name
    if isinstance(e, S.IntLit):
        return str(e.value)
    if isinstance(e, S.CharLit):
        return f"'{S.escape_char(e.value)}'"
    if isinstance(e, S.StrLit):
        return f'"{S.escape_string(e.value)}"'
    if isinstance(e, S.Field):
        return f"{_expr(ctx, e.obj, 10)}.{e.name}"
    if isinstance(e, S.Deref):
        return f"*{_expr(ctx, e.operand, 9)}"
    if isinstance(e, S.AddrOf):
        return f"&{_expr(ctx, e.operand, 9)}"
    if isinstance(e, S.Call):
        return f"{_call_name(ctx, e)}({','.join(_expr(ctx, a) for a in e.args)})"
    if isinstance(e, S.Unary):
        inner = _expr(ctx, e.operand, 9)
        return f"{inner}{e.op}" if e.postfix else f"{e.op}{inner}"
    if isinstance(e, S.Binary):
        prec = S._PRECEDENCE[e.op]
        text = f"{_expr(ctx, e.left, prec)} {e.op} {_expr(ctx, e.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(e, S.Ternary):
        return f"({_expr(ctx, e.cond)} ? {_expr(ctx, e.then)} : {_expr(ctx, e.other)})"
    if isinstance(e, S.Assign):
        text = f"{_expr(ctx, e.target, 1)} {e.op} {_expr(ctx, e.value)}"
        return f"({text})" if parent_prec > 0 else text
    if isinstance(e, S.WeakenCast):
        return _expr(ctx, e.operand, parent_prec)  # erased in emitted code
    raise InternalError(f"cannot emit expression {e!r}")


def _stmt_inline(ctx: _Ctx, s: S.Stmt) -> str:
    """Single-line rendering for for-init and simple if/else branches."""
    return _stmt(ctx, s, 0).strip()


def _stmt(ctx: _Ctx, s: S.Stmt, indent: int) -> str:
    pad = "  " * indent
    if isinstance(s, S.DeclStmt):
        node = ctx.built.decl_node_of[id(s)]
        tid = ctx.typing[node].members[0]
        decl = declarator(ctx.u, tid, s.name)
        init = f" = {_expr(ctx, s.init)}" if s.init is not None else ""
        return f"{pad}{decl}{init};"
    if isinstance(s, S.ExprStmt):
        return f"{pad}{_expr(ctx, s.expr)};"
    if isinstance(s, S.Return):
        if s.value is None:
            return f"{pad}return;"
        return f"{pad}return {_expr(ctx, s.value)};"
    if isinstance(s, S.Empty):
        return f"{pad};"
    if isinstance(s, S.Block):
        lines = [f"{pad}{{"]
        for inner in s.body:
            lines.append(_stmt(ctx, inner, indent + 1))
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    if isinstance(s, S.If):
        head = f"{pad}if ({_expr(ctx, s.cond)})"
        simple = not isinstance(s.then, S.Block) and (
            s.other is None or not isinstance(s.other, S.Block)
        )
        if simple:
            text = f"{head} {_stmt_inline(ctx, s.then)}"
            if s.other is not None:
                text += f" else {_stmt_inline(ctx, s.other)}"
            return text
        if isinstance(s.then, S.Block):
            text = head + " " + _stmt(ctx, s.then, indent).lstrip()
        else:
            text = head + "\n" + _stmt(ctx, s.then, indent + 1)
        if s.other is not None:
            if isinstance(s.other, S.Block):
                text += " else " + _stmt(ctx, s.other, indent).lstrip()
            else:
                text += f"\n{pad}else\n" + _stmt(ctx, s.other, indent + 1)
        return text
    if isinstance(s, S.While):
        head = f"{pad}while ({_expr(ctx, s.cond)})"
        if isinstance(s.body, S.Block):
            return head + " " + _stmt(ctx, s.body, indent).lstrip()
        return f"{head} {_stmt_inline(ctx, s.body)}"
    if isinstance(s, S.For):
        init = _stmt_inline(ctx, s.init) if s.init is not None else ";"
        cond = f" {_expr(ctx, s.cond)};" if s.cond is not None else ";"
        step = f" {_expr(ctx, s.step)}" if s.step is not None else ""
        head = f"{pad}for ( {init}{cond}{step} )"
        if isinstance(s.body, S.Block):
            return head + " " + _stmt(ctx, s.body, indent).lstrip()
        return f"{head} {_stmt_inline(ctx, s.body)}"
    raise InternalError(f"cannot emit statement {s!r}")


def _function(u: TypeUniverse, inst: Instantiation, proto_only: bool = False) -> str:
    built = inst.graph
    typing = inst.typing
    assert built is not None and typing is not None
    assert inst.ret_final is not None
    ctx = _Ctx(u, inst, built, typing)
    params = []
    for p, node in zip(built.fn.params, built.param_nodes):
        tid = typing[node].members[0]
        params.append(declarator(u, tid, p.name, p.is_ref))
    ret = declarator(u, inst.ret_final, "")
    head = f"{ret} {inst.mangled}( {', '.join(params)} )"
    if proto_only:
        return head + ";"
    lines = [head + " {"]
    for s in built.fn.body.body:
        lines.append(_stmt(ctx, s, 1))
    lines.append("}")
    return "\n".join(lines)


def _ordered(tree: InstantiationTree) -> tuple[list[Instantiation], list[Instantiation]]:
    """Post-order over final bindings (callees first) plus cycle members needing prototypes."""
    order: list[Instantiation] = []
    protos: list[Instantiation] = []
    state: dict[int, int] = {}

    def visit(inst: Instantiation) -> None:
        state[id(inst)] = 1
        for idx in sorted(inst.bindings):
            callee = inst.bindings[idx]
            st = state.get(id(callee))
            if st is None:
                visit(callee)
            elif st == 1 and callee not in protos:
                protos.append(callee)
        state[id(inst)] = 2
        order.append(inst)

    if tree.root is not None:
        visit(tree.root)
    return order, protos


def emit_c(
    tree: InstantiationTree,
    program: S.SurfaceProgram,
    u: TypeUniverse,
    source_name: str,
    version: str,
) -> str:
    lines = [f"/* generated by mootlite {version} from {source_name} */", "#include <stdio.h>", ""]

    for d in program.declarations:
        if isinstance(d, S.StructDecl):
            tid = u.tags[d.tag]
            if u.is_abstract(tid):
                continue
            lines.append(f"struct {d.tag} {{")
            for fname, ftid in u.desc(tid).fields:
                lines.append(f"  {declarator(u, ftid, fname)};")
            lines.append("};")
            lines.append("")
        elif isinstance(d, S.TypedefDecl):
            tid = u.names.get(d.name)
            if tid is None or u.is_abstract(tid):
                continue
            if u.kind(tid) == TypeKind.STRUCT:
                target = f"struct {u.desc(tid).name}"
            else:
                target = declarator(u, tid, "")
            lines.append(f"typedef {target} {d.name};")
            lines.append("")

    order, protos = _ordered(tree)
    for inst in protos:
        lines.append(_function(u, inst, proto_only=True))
    if protos:
        lines.append("")
    for inst in order:
        lines.append(_function(u, inst))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
