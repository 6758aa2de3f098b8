"""Demand-driven monomorphization from the entry point.

Each call site resolved by a valid typing triggers typing of the callee body on
a fresh copy of its syntax graph, seeded with the actual argument and return
types. Instantiations are memoized per (definition, actuals, return); recursive
encounters collapse onto the in-progress instantiation. If a callee typing
strengthens one of its parameters or its return beyond the caller's values, the
refinement is written back into the caller's nodes and the caller's typing is
resumed on the affected edges. The instantiation spanning tree supplies the
call-sequence context attached to every type error.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from . import surface as S
from .antichains import Antichain, leq as ac_leq
from .diagnostics import CompileError, Diagnostic, InternalError, Span, Stage
from .graphs import BuiltGraph, CallSite, RelationCache, build_syntax_graph, resolve_type
from .hierarchy import SubsumptionOrder
from .typeflow import FlowMemo, Typing, classify_typing, run_typing
from .universe import OpDef, TypeId, TypeKind, TypeUniverse

IN_PROGRESS = "in-progress"
DONE = "done"


@dataclass
class Instantiation:
    opdef: OpDef
    actuals: tuple[TypeId, ...]
    expected_ret: TypeId
    mangled: str
    parent: "Instantiation | None"
    span: Span | None
    graph: BuiltGraph | None = None
    typing: Typing | None = None
    bindings: dict[int, "Instantiation"] = dc_field(default_factory=dict)  # site idx -> callee
    params_final: tuple[TypeId, ...] | None = None
    ret_final: TypeId | None = None
    state: str = IN_PROGRESS

    def frames(self) -> list["Instantiation"]:
        chain: list[Instantiation] = []
        node: Instantiation | None = self
        while node is not None:
            chain.append(node)
            node = node.parent
        chain.reverse()
        return chain


@dataclass
class InstantiationTree:
    root: Instantiation | None = None
    all: list[Instantiation] = dc_field(default_factory=list)
    edges: list[tuple[Instantiation | None, Instantiation, Span | None]] = dc_field(
        default_factory=list
    )

    def live(self) -> list[Instantiation]:
        """Instantiations reachable through final call bindings, discovery order."""
        if self.root is None:
            return []
        out: list[Instantiation] = []
        seen: set[int] = set()

        def visit(inst: Instantiation) -> None:
            if id(inst) in seen:
                return
            seen.add(id(inst))
            out.append(inst)
            for idx in sorted(inst.bindings):
                visit(inst.bindings[idx])

        visit(self.root)
        return out


class TypeErrorWithContext(CompileError):
    """A typing failure wrapped with its instantiation call sequence."""

    def __init__(self, inst: Instantiation, u: TypeUniverse, details: list[str], span: Span | None):
        lines = ["type error after call sequence:"]
        for k, frame in enumerate(inst.frames(), start=1):
            lines.append(f"{k}: {render_frame(frame, u, root=frame.parent is None)}")
        lines.append("...")
        lines.extend(details)
        super().__init__(Diagnostic(Stage.TYPING, "error", span, "\n".join(lines)))


def render_frame(inst: Instantiation, u: TypeUniverse, root: bool) -> str:
    ret = u.display(inst.expected_ret)
    args = ", ".join(u.display(a) for a in inst.actuals)
    if root:
        return f"{ret} {inst.opdef.name}({args})"
    return f"{ret} {inst.opdef.name}( {args} )"


class Monomorphizer:
    def __init__(
        self,
        u: TypeUniverse,
        order: SubsumptionOrder,
        cache: RelationCache,
        memo: FlowMemo,
        promote: bool = False,
        trace=None,
    ):
        self.u = u
        self.order = order
        self.cache = cache
        self.memo = memo
        self.promote = promote
        self.trace = trace
        self.tree = InstantiationTree()
        self.by_key: dict[tuple, Instantiation] = {}
        self.templates: dict[int, BuiltGraph] = {}
        self.mangled_taken: dict[str, tuple] = {}

    # -- plumbing -------------------------------------------------------------

    def template(self, opdef: OpDef) -> BuiltGraph:
        built = self.templates.get(id(opdef.node))
        if built is None:
            assert isinstance(opdef.node, S.FunctionDef)
            built = build_syntax_graph(opdef.node, self.u, self.order, self.cache, self.promote)
            self.templates[id(opdef.node)] = built
        return built

    def mangle(self, opdef: OpDef, actuals: tuple[TypeId, ...], key: tuple, root: bool) -> str:
        if root:
            return opdef.name
        name = opdef.name + "".join("_" + self.u.mangle(t) for t in actuals)
        candidate = name
        serial = 1
        while candidate in self.mangled_taken and self.mangled_taken[candidate] != key:
            serial += 1
            candidate = f"{name}_{serial}"
        self.mangled_taken[candidate] = key
        return candidate

    def type_error(
        self, inst: Instantiation, details: list[str], span: Span | None
    ) -> TypeErrorWithContext:
        return TypeErrorWithContext(inst, self.u, details, span)

    # -- the driver ------------------------------------------------------------

    def run(self, entry: OpDef) -> InstantiationTree:
        desc = self.u.desc(entry.sig)
        for a in desc.args:
            if self.u.is_abstract(a):
                raise CompileError(
                    Diagnostic(
                        Stage.TYPING,
                        "error",
                        entry.span,
                        f"entry point '{entry.name}' must take concrete argument types",
                    )
                )
        root = self.instantiate(entry, tuple(desc.args), desc.ret, None, entry.span)
        self.tree.root = root
        return self.tree

    def instantiate(
        self,
        opdef: OpDef,
        actuals: tuple[TypeId, ...],
        expected_ret: TypeId,
        parent: Instantiation | None,
        span: Span | None,
    ) -> Instantiation:
        order = self.order
        actuals = tuple(order.rep[a] for a in actuals)
        expected_ret = order.rep[expected_ret]
        key = (opdef.index, actuals, expected_ret)
        existing = self.by_key.get(key)
        if existing is not None:
            self.tree.edges.append((parent, existing, span))
            return existing

        inst = Instantiation(opdef, actuals, expected_ret, "", parent, span)
        inst.mangled = self.mangle(opdef, actuals, key, root=parent is None)
        self.by_key[key] = inst
        self.tree.all.append(inst)
        self.tree.edges.append((parent, inst, span))

        if not opdef.has_body:
            sig = self.u.display(opdef.sig)
            raise self.type_error(
                inst, [f"{span}: no definition for {opdef.name} with signature {sig}"], span
            )

        built = self.template(opdef)
        inst.graph = built
        typing: Typing = dict(built.initial)
        for node, actual in zip(built.param_nodes, actuals):
            typing[node] = Antichain.singleton(order, actual)
        typing[built.ret_node] = Antichain.singleton(order, expected_ret)

        seed_edges = None
        while True:
            typing = run_typing(
                built.graph,
                typing,
                self.cache.registry,
                memo=self.memo,
                trace=self.trace,
                seed_edges=seed_edges,
            )
            self.check_consistent(inst, built, typing)
            changed: list[int] = []
            for idx, site in enumerate(built.call_sites):
                if site.builtin:
                    continue
                callee_changed = self.resolve_site(inst, built, typing, idx, site)
                changed.extend(callee_changed)
            if not changed:
                break
            incident = set()
            changed_set = set(changed)
            for e in built.graph.edges:
                if e[0] in changed_set or e[1] in changed_set:
                    incident.add(e)
            seed_edges = sorted(incident)

        inst.typing = typing
        inst.params_final = tuple(typing[n].members[0] for n in built.param_nodes)
        inst.ret_final = typing[built.ret_node].members[0]
        self.check_concrete_decls(inst, built, typing)
        inst.state = DONE
        return inst

    def resolve_site(
        self,
        inst: Instantiation,
        built: BuiltGraph,
        typing: Typing,
        idx: int,
        site: CallSite,
    ) -> list[int]:
        """Instantiate the callee selected at a site; return caller nodes refined."""
        sig_rep = typing[site.sig_node].members[0]
        callee_def = self.pick_def(inst, site, sig_rep)
        c_actuals = tuple(typing[n].members[0] for n in site.actual_nodes)
        c_ret = typing[site.result_node].members[0]
        callee = self.instantiate(callee_def, c_actuals, c_ret, inst, site.span)
        inst.bindings[idx] = callee
        if callee.state != DONE:
            return []  # collapsed recursive call: no refinement to propagate yet
        changed: list[int] = []
        assert callee.params_final is not None and callee.ret_final is not None
        for node, refined in zip(site.actual_nodes, callee.params_final):
            if typing[node].members != (refined,):
                if not ac_leq(self.order, Antichain.singleton(self.order, refined), typing[node]):
                    raise InternalError("callee refinement is not a strengthening")
                typing[node] = Antichain.singleton(self.order, refined)
                changed.append(node)
        if typing[site.result_node].members != (callee.ret_final,):
            typing[site.result_node] = Antichain.singleton(self.order, callee.ret_final)
            changed.append(site.result_node)
        return changed

    def pick_def(self, inst: Instantiation, site: CallSite, sig_rep: TypeId) -> OpDef:
        candidates = [
            d
            for d in self.u.op_defs(site.op, site.arity)
            if self.order.rep[d.sig] == sig_rep
        ]
        bodies = [d for d in candidates if d.has_body]
        if bodies:
            return min(bodies, key=lambda d: d.index)
        if candidates:
            return min(candidates, key=lambda d: d.index)
        raise InternalError(f"signature node does not name a known signature of {site.op}")

    # -- failure reporting -------------------------------------------------------

    def check_consistent(self, inst: Instantiation, built: BuiltGraph, typing: Typing) -> None:
        cls = classify_typing(typing)
        details: list[str] = []
        span: Span | None = None
        for n in cls.inconsistent:
            node = built.graph.nodes[n]
            span = span or node.span
            details.append(f"{node.span}: no admissible type for {node.role} '{node.text}'")
        for n in cls.ambiguous:
            node = built.graph.nodes[n]
            span = span or node.span
            rendered = typing[n].render(self.order)
            details.append(
                f"{node.span}: ambiguous type for {node.role} '{node.text}': {rendered}"
            )
        if details:
            raise self.type_error(inst, details, span)
        bool_id = self.order.rep[self.u.names["bool"]]
        bool_ac = Antichain((bool_id,))
        for n, cspan in built.cond_nodes:
            if not ac_leq(self.order, typing[n], bool_ac):
                raise self.type_error(
                    inst, [f"{cspan}: condition does not type as bool"], cspan
                )

    def check_concrete_decls(self, inst: Instantiation, built: BuiltGraph, typing: Typing) -> None:
        named = list(zip(built.param_nodes, [p.name for p in built.fn.params]))
        named.extend(built.decl_nodes)
        for node, name in named:
            t = typing[node].members[0]
            if self.u.is_abstract(t):
                span = built.graph.nodes[node].span
                raise self.type_error(
                    inst,
                    [
                        f"{span}: could not infer a concrete type for '{name}'"
                        f" (best bound: {self.u.display(t)})"
                    ],
                    span,
                )


def find_entry(u: TypeUniverse, entry: str) -> OpDef:
    """The entry definition; `main` must be int main(int, char**)."""
    candidates = [
        d for defs in u.ops.values() for d in defs if d.name == entry and d.has_body
    ]
    if not candidates:
        raise CompileError(
            Diagnostic(Stage.TYPING, "error", None, f"no entry point '{entry}'")
        )
    if len(candidates) > 1:
        raise CompileError(
            Diagnostic(Stage.TYPING, "error", candidates[1].span, f"multiple definitions of entry point '{entry}'")
        )
    opdef = candidates[0]
    if entry == "main":
        desc = u.desc(opdef.sig)
        int_id = u.names["int"]
        charpp = u.pointer_to(u.pointer_to(u.names["char"]))
        if desc.args != (int_id, charpp) or desc.ret != int_id:
            raise CompileError(
                Diagnostic(
                    Stage.TYPING,
                    "error",
                    opdef.span,
                    "entry point must have signature int main(int, char**)",
                )
            )
    return opdef
