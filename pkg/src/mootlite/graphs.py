"""Syntax graph construction for function bodies.

One node per declaration, expression occurrence, and call signature slot;
identifier uses share their declaration's node. Call argument and return edges
carry the strongest-call matching relations, field selects and dereferences
carry the relations transferred from the simulation graph, assignments and
returns carry the subsumption relation itself, and weakening casts introduce a
node seeded with the cast bound. The result is a reusable template: the
monomorphizer copies its initial typing and overrides parameter/return seeds
per instantiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import surface as S
from .antichains import Antichain
from .calls import (
    ArgMatch,
    AssignMatch,
    CallRelations,
    DerefMatch,
    FieldMatch,
    PromoteMatch,
    RetMatch,
    assignment_relation,
    builtin_call_relations,
    derive_call_relations,
    promote_relation,
)
from .diagnostics import CompileError, Diagnostic, Span, Stage, error
from .hierarchy import SubsumptionOrder
from .typeflow import MatchRelation, NodeId, SyntaxGraph, Typing
from .universe import BUILTIN_OPS, POINTER_DEREF, TypeId, TypeKind, TypeUniverse, field_select

PRINTF = "printf"


class RelationCache:
    """Lazily derived matching relations, shared across all graphs of a program."""

    def __init__(self, u: TypeUniverse, order: SubsumptionOrder):
        self.u = u
        self.order = order
        self.registry: dict[object, MatchRelation] = {}
        self._calls: dict[tuple[str, int], CallRelations] = {}
        self.warnings: list[Diagnostic] = []
        self._register(assignment_relation(order))
        self._register(promote_relation(u, order))

    def _register(self, m: MatchRelation) -> MatchRelation:
        self.registry[m.label] = m
        return m

    def call(self, name: str, arity: int) -> CallRelations:
        key = (name, arity)
        rels = self._calls.get(key)
        if rels is None:
            if name in BUILTIN_OPS:
                rels = builtin_call_relations(self.u, self.order, name)
            else:
                rels = derive_call_relations(self.u, self.order, name, arity)
                self.warnings.extend(rels.warnings)
            for m in rels.args:
                self._register(m)
            self._register(rels.ret)
            self._calls[key] = rels
        return rels

    def field(self, name: str) -> MatchRelation:
        label = FieldMatch(name)
        m = self.registry.get(label)
        if m is None:
            rel = self.u.lookup_relation(field_select(name))
            m = self._register(MatchRelation.over(self.order, label, rel.pairs))
        return m

    def deref(self) -> MatchRelation:
        label = DerefMatch()
        m = self.registry.get(label)
        if m is None:
            rel = self.u.lookup_relation(POINTER_DEREF)
            m = self._register(MatchRelation.over(self.order, label, rel.pairs))
        return m

    def assign(self) -> MatchRelation:
        return self.registry[AssignMatch()]

    def promote(self) -> MatchRelation:
        return self.registry[PromoteMatch()]


@dataclass
class CallSite:
    op: str
    arity: int
    sig_node: NodeId
    result_node: NodeId
    arg_nodes: list[NodeId]
    actual_nodes: list[NodeId]
    span: Span
    builtin: bool
    expr: S.Call | None


@dataclass
class BuiltGraph:
    fn: S.FunctionDef
    graph: SyntaxGraph
    initial: Typing
    param_nodes: list[NodeId]
    ret_node: NodeId
    call_sites: list[CallSite] = field(default_factory=list)
    cond_nodes: list[tuple[NodeId, Span]] = field(default_factory=list)
    decl_nodes: list[tuple[NodeId, str]] = field(default_factory=list)
    decl_node_of: dict[int, NodeId] = field(default_factory=dict)  # id(DeclStmt) -> node
    call_site_of: dict[int, int] = field(default_factory=dict)  # id(S.Call) -> site index


def resolve_type(u: TypeUniverse, te: S.TypeExpr, stage: Stage = Stage.TYPING) -> TypeId:
    if te.struct_kw:
        tid = u.tags.get(te.name)
    else:
        tid = u.names.get(te.name, u.tags.get(te.name))
    if tid is None:
        raise CompileError(error(stage, te.span, f"unresolved type name '{te.name}'"))
    for _ in range(te.stars):
        tid = u.pointer_to(tid)
    return tid


def build_syntax_graph(
    fn: S.FunctionDef,
    u: TypeUniverse,
    order: SubsumptionOrder,
    cache: RelationCache,
    promote: bool = False,
) -> BuiltGraph:
    """Graph + initial typing for one function definition."""
    return _GraphBuilder(fn, u, order, cache, promote).build()


class _GraphBuilder:
    def __init__(
        self,
        fn: S.FunctionDef,
        u: TypeUniverse,
        order: SubsumptionOrder,
        cache: RelationCache,
        promote: bool,
    ):
        self.fn = fn
        self.u = u
        self.order = order
        self.cache = cache
        self.promote = promote
        self.graph = SyntaxGraph()
        self.initial: Typing = {}
        self.scopes: list[dict[str, NodeId]] = [{}]
        self.out = BuiltGraph(fn, self.graph, self.initial, [], -1)
        self.actual_of: dict[NodeId, NodeId] = {}

    def fail(self, span: Span | None, message: str) -> CompileError:
        return CompileError(error(Stage.TYPING, span, message))

    def top(self) -> Antichain:
        return Antichain.singleton(self.order, self.u.any_id)

    def seed_for(self, te: S.TypeExpr, tid: TypeId) -> Antichain:
        # `+`-qualified and any-typed declarations start unconstrained.
        if te.plus or tid == self.u.any_id:
            return self.top()
        return Antichain.singleton(self.order, tid)

    def node(self, role: str, text: str, span: Span | None, seed: Antichain) -> NodeId:
        n = self.graph.add_node(role, text, span)
        self.initial[n] = seed
        return n

    def lookup(self, name: str, span: Span) -> NodeId:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise self.fail(span, f"unbound identifier '{name}'")

    def build(self) -> BuiltGraph:
        fn = self.fn
        for p in fn.params:
            tid = resolve_type(self.u, p.type)
            n = self.node("parameter", p.name or "<param>", p.span, self.seed_for(p.type, tid))
            if p.name:
                self.scopes[0][p.name] = n
            self.out.param_nodes.append(n)
        ret_tid = resolve_type(self.u, fn.ret)
        self.out.ret_node = self.node("return", fn.name, fn.span, self.seed_for(fn.ret, ret_tid))
        for stmt in fn.body.body:
            self.stmt(stmt)
        return self.out

    # -- statements ----------------------------------------------------------

    def stmt(self, s: S.Stmt) -> None:
        if isinstance(s, S.DeclStmt):
            tid = resolve_type(self.u, s.type)
            n = self.node("declaration", s.name, s.span, self.seed_for(s.type, tid))
            self.scopes[-1][s.name] = n
            self.out.decl_nodes.append((n, s.name))
            self.out.decl_node_of[id(s)] = n
            if s.init is not None:
                init = self.expr(s.init)
                self.graph.add_edge(init, n, self.cache.assign().label)
        elif isinstance(s, S.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, S.Return):
            if s.value is not None:
                v = self.expr(s.value)
                self.graph.add_edge(v, self.out.ret_node, self.cache.assign().label)
        elif isinstance(s, S.If):
            self.cond(s.cond)
            self.stmt(s.then)
            if s.other is not None:
                self.stmt(s.other)
        elif isinstance(s, S.While):
            self.cond(s.cond)
            self.stmt(s.body)
        elif isinstance(s, S.For):
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.cond(s.cond)
            if s.step is not None:
                self.expr(s.step)
            self.stmt(s.body)
            self.scopes.pop()
        elif isinstance(s, S.Block):
            self.scopes.append({})
            for inner in s.body:
                self.stmt(inner)
            self.scopes.pop()
        elif isinstance(s, S.Empty):
            pass
        else:
            raise self.fail(s.span, f"unsupported statement {type(s).__name__}")

    def cond(self, e: S.Expr) -> None:
        n = self.expr(e)
        self.out.cond_nodes.append((n, e.span))

    # -- expressions -----------------------------------------------------------

    def expr(self, e: S.Expr) -> NodeId:
        if isinstance(e, S.Name):
            return self.lookup(e.name, e.span)
        if isinstance(e, S.IntLit):
            return self.node(
                "literal", str(e.value), e.span, Antichain.singleton(self.order, self.u.names["int"])
            )
        if isinstance(e, S.CharLit):
            return self.node(
                "literal", repr(e.value), e.span, Antichain.singleton(self.order, self.u.names["char"])
            )
        if isinstance(e, S.StrLit):
            charp = self.u.pointer_to(self.u.names["char"])
            return self.node("literal", "<string>", e.span, Antichain.singleton(self.order, charp))
        if isinstance(e, S.Field):
            obj = self.expr(e.obj)
            n = self.node("field", f".{e.name}", e.span, self.top())
            self.graph.add_edge(obj, n, self.cache.field(e.name).label)
            return n
        if isinstance(e, S.Deref):
            operand = self.expr(e.operand)
            n = self.node("deref", "*", e.span, self.top())
            self.graph.add_edge(operand, n, self.cache.deref().label)
            return n
        if isinstance(e, S.AddrOf):
            operand = self.expr(e.operand)
            n = self.node("addressof", "&", e.span, self.top())
            self.graph.add_edge(n, operand, self.cache.deref().label)
            return n
        if isinstance(e, S.Call):
            return self.call(e)
        if isinstance(e, S.Unary):
            sym = {"-": "u-"}.get(e.op, e.op)
            return self.builtin_call(sym, [self.expr(e.operand)], e.span, e.op)
        if isinstance(e, S.Binary):
            left = self.expr(e.left)
            right = self.expr(e.right)
            return self.builtin_call(e.op, [left, right], e.span, e.op)
        if isinstance(e, S.Ternary):
            self.cond(e.cond)
            a = self.expr(e.then)
            b = self.expr(e.other)
            n = self.node("ternary", "?:", e.span, self.top())
            self.graph.add_edge(a, n, self.cache.assign().label)
            self.graph.add_edge(b, n, self.cache.assign().label)
            return n
        if isinstance(e, S.Assign):
            value = self.expr(e.value)
            target = self.expr(e.target)
            if e.op == "=":
                self.graph.add_edge(value, target, self.cache.assign().label)
            else:
                res = self.builtin_call(e.op[0], [target, value], e.span, e.op)
                self.graph.add_edge(res, target, self.cache.assign().label)
            return target
        if isinstance(e, S.WeakenCast):
            inner = self.expr(e.operand)
            bound = self.u.names.get(e.bound, self.u.tags.get(e.bound))
            if bound is None:
                raise self.fail(e.span, f"unresolved type name '{e.bound}'")
            n = self.node(
                "weakened", f"[^{e.bound}]", e.span, Antichain.singleton(self.order, bound)
            )
            self.graph.add_edge(inner, n, self.cache.assign().label)
            self.actual_of[n] = self.actual_of.get(inner, inner)
            return n
        raise self.fail(e.span, f"unsupported expression {type(e).__name__}")

    def builtin_call(self, sym: str, arg_nodes: list[NodeId], span: Span, text: str) -> NodeId:
        rels = self.cache.call(sym, len(arg_nodes))
        sig = self.node("signature", text, span, self.top())
        result = self.node("result", text, span, self.top())
        for m, arg in zip(rels.args, arg_nodes):
            self.graph.add_edge(arg, sig, m.label)
        self.graph.add_edge(result, sig, rels.ret.label)
        return result

    def call(self, e: S.Call) -> NodeId:
        if e.name == PRINTF:
            for arg in e.args:
                self.expr(arg)
            return self.node("result", PRINTF, e.span, Antichain.singleton(self.order, self.u.names["int"]))
        arity = len(e.args)
        if not self.u.op_defs(e.name, arity):
            raise self.fail(e.span, f"no function '{e.name}' of arity {arity}")
        rels = self.cache.call(e.name, arity)
        sig = self.node("signature", e.name, e.span, self.top())
        result = self.node("result", f"{e.name}(...)", e.span, self.top())
        arg_nodes: list[NodeId] = []
        actual_nodes: list[NodeId] = []
        for i, arg in enumerate(e.args, start=1):
            n = self.expr(arg)
            attach = n
            actual = self.actual_of.get(n, n)
            # C promotion applies on literal int/char argument edges only.
            if self.promote and isinstance(arg, (S.IntLit, S.CharLit)):
                prom = self.node("promoted-argument", "promote", arg.span, self.top())
                self.graph.add_edge(n, prom, self.cache.promote().label)
                attach = prom
                actual = prom
            self.graph.add_edge(attach, sig, rels.args[i - 1].label)
            arg_nodes.append(attach)
            actual_nodes.append(actual)
        self.graph.add_edge(result, sig, rels.ret.label)
        site = CallSite(e.name, arity, sig, result, arg_nodes, actual_nodes, e.span, False, e)
        self.out.call_site_of[id(e)] = len(self.out.call_sites)
        self.out.call_sites.append(site)
        return result
