"""The finite universe of relevant types and the indexed type relations over it.

Types are interned to dense integer ids. The universe always contains `any`
(id 0, the top of every inferred order) and the builtin scalar types; declared
structs, protocol/parameter types, function signature types, and 1-deep pointer
saturation of every type used in a struct field or signature are added by
build_universe. Relations are stored per label: field selects, pointer
dereference, per-position argument-to-signature relations (with their
strengthenable subsets mirroring `+` markers), argument/return selectors over
function types, and the C promotion relation used only during call typing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from . import surface as S
from .diagnostics import CompileError, Span, Stage, error

TypeId = int

BUILTIN_NAMES = ("int", "char", "bool", "void")


class TypeKind(Enum):
    ANY = "any"
    BUILTIN = "builtin"
    PROTOCOL = "protocol"
    PARAMETER = "parameter"
    STRUCT = "struct"
    POINTER = "pointer"
    FUNCTION = "function"


@dataclass(frozen=True)
class TypeDesc:
    kind: TypeKind
    name: str = ""  # builtin/protocol/parameter name or struct tag
    fields: tuple[tuple[str, TypeId], ...] = ()
    bounds: tuple[TypeId, ...] = ()  # parameter types only
    pointee: TypeId = -1
    args: tuple[TypeId, ...] = ()
    arg_plus: tuple[bool, ...] = ()
    ret: TypeId = -1
    ret_plus: bool = False


@dataclass(frozen=True)
class RelationLabel:
    """Index σ of a type relation: field select, argument-signature, deref, ..."""

    tag: str  # "field" | "argsig" | "deref" | "arg" | "ret" | "promote"
    field: str = ""
    op: str = ""
    i: int = 0
    j: int = 0

    def __post_init__(self) -> None:
        if self.tag in ("arg", "argsig") and not (1 <= self.i <= self.j):
            raise ValueError(f"argument position {self.i} out of range for arity {self.j}")

    def render(self) -> str:
        if self.tag == "field":
            return f".{self.field}"
        if self.tag == "argsig":
            return f"{self.op}_{self.i}/{self.j}"
        if self.tag == "deref":
            return "*"
        if self.tag == "arg":
            return f"arg_{self.i}/{self.j}"
        if self.tag == "ret":
            return f"ret_/{self.j}"
        return self.tag


def field_select(name: str) -> RelationLabel:
    return RelationLabel("field", field=name)


def arg_signature(op: str, i: int, j: int) -> RelationLabel:
    return RelationLabel("argsig", op=op, i=i, j=j)


def arg_label(i: int, j: int) -> RelationLabel:
    return RelationLabel("arg", i=i, j=j)


def ret_label(j: int) -> RelationLabel:
    return RelationLabel("ret", j=j)


POINTER_DEREF = RelationLabel("deref")
PROMOTE = RelationLabel("promote")


@dataclass
class TypeRelation:
    label: RelationLabel
    pairs: frozenset[tuple[TypeId, TypeId]]
    strengthenable: frozenset[tuple[TypeId, TypeId]] = frozenset()

    def __post_init__(self) -> None:
        if not self.strengthenable <= self.pairs:
            raise ValueError("strengthenable subset must be contained in the relation")
        if self.label.tag in ("field", "arg", "ret"):
            seen: dict[TypeId, TypeId] = {}
            for t, u in self.pairs:
                if seen.setdefault(t, u) != u:
                    raise ValueError(f"relation {self.label.render()} not functional at {t}")

    def succ(self, t: TypeId) -> list[TypeId]:
        return sorted(u for (a, u) in self.pairs if a == t)

    def dagger_succ(self, t: TypeId) -> list[TypeId]:
        return sorted(u for (a, u) in self.strengthenable if a == t)


@dataclass
class OpDef:
    """One declaration or definition of a named operation."""

    name: str
    arity: int
    sig: TypeId
    span: Span
    has_body: bool
    node: S.FunctionDecl | S.FunctionDef
    index: int
    source: str


# Builtin expression operators: symbol -> (argument types, result type).
# These contribute matching relations for expression typing; their signature
# types are interned into the universe so antichains over them are well formed.
BUILTIN_OPS: dict[str, tuple[tuple[str, ...], str]] = {
    "+": (("int", "int"), "int"),
    "-": (("int", "int"), "int"),
    "*": (("int", "int"), "int"),
    "/": (("int", "int"), "int"),
    "%": (("int", "int"), "int"),
    "<": (("int", "int"), "bool"),
    ">": (("int", "int"), "bool"),
    "<=": (("int", "int"), "bool"),
    ">=": (("int", "int"), "bool"),
    "==": (("int", "int"), "bool"),
    "!=": (("int", "int"), "bool"),
    "&&": (("bool", "bool"), "bool"),
    "||": (("bool", "bool"), "bool"),
    "!": (("bool",), "bool"),
    "u-": (("int",), "int"),
    "++": (("int",), "int"),
    "--": (("int",), "int"),
}


class TypeUniverse:
    """Interned set of relevant types with their indexed relations."""

    def __init__(self) -> None:
        self.descs: list[TypeDesc] = []
        self._intern: dict[object, TypeId] = {}
        self.names: dict[str, TypeId] = {}  # typedefs, protocols, parameters, builtins
        self.tags: dict[str, TypeId] = {}  # struct tag namespace
        self.aliases: dict[TypeId, str] = {}  # first typedef alias per struct
        self.relations: dict[RelationLabel, TypeRelation] = {}
        self.relation_order: list[RelationLabel] = []
        self.ops: dict[tuple[str, int], list[OpDef]] = {}
        self.builtin_sigs: dict[str, TypeId] = {}
        self.any_id: TypeId = -1
        self.file = "<input>"

    # -- construction ------------------------------------------------------

    def _add(self, key: object, desc: TypeDesc) -> TypeId:
        tid = self._intern.get(key)
        if tid is None:
            tid = len(self.descs)
            self.descs.append(desc)
            self._intern[key] = tid
        return tid

    def add_any(self) -> TypeId:
        self.any_id = self._add(("any",), TypeDesc(TypeKind.ANY, "any"))
        self.names["any"] = self.any_id
        return self.any_id

    def add_builtin(self, name: str) -> TypeId:
        tid = self._add(("builtin", name), TypeDesc(TypeKind.BUILTIN, name))
        self.names[name] = tid
        return tid

    def add_protocol(self, name: str) -> TypeId:
        tid = self._add(("protocol", name), TypeDesc(TypeKind.PROTOCOL, name))
        self.names[name] = tid
        return tid

    def add_parameter(self, name: str, bounds: tuple[TypeId, ...] = ()) -> TypeId:
        tid = self._add(("parameter", name), TypeDesc(TypeKind.PARAMETER, name, bounds=bounds))
        self.names[name] = tid
        return tid

    def add_struct_tag(self, tag: str) -> TypeId:
        tid = self._add(("struct", tag), TypeDesc(TypeKind.STRUCT, tag))
        self.tags[tag] = tid
        return tid

    def set_struct_fields(self, tid: TypeId, fields: tuple[tuple[str, TypeId], ...]) -> None:
        self.descs[tid] = replace(self.descs[tid], fields=fields)

    def pointer_to(self, pointee: TypeId) -> TypeId:
        return self._add(("ptr", pointee), TypeDesc(TypeKind.POINTER, pointee=pointee))

    def function_type(
        self,
        args: tuple[TypeId, ...],
        arg_plus: tuple[bool, ...],
        ret: TypeId,
        ret_plus: bool = False,
    ) -> TypeId:
        key = ("fn", args, arg_plus, ret, ret_plus)
        return self._add(
            key, TypeDesc(TypeKind.FUNCTION, args=args, arg_plus=arg_plus, ret=ret, ret_plus=ret_plus)
        )

    def set_relation(
        self,
        label: RelationLabel,
        pairs: set[tuple[TypeId, TypeId]],
        strengthenable: set[tuple[TypeId, TypeId]] | None = None,
    ) -> TypeRelation:
        rel = TypeRelation(label, frozenset(pairs), frozenset(strengthenable or ()))
        if label not in self.relations:
            self.relation_order.append(label)
        self.relations[label] = rel
        return rel

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.descs)

    def desc(self, tid: TypeId) -> TypeDesc:
        return self.descs[tid]

    def kind(self, tid: TypeId) -> TypeKind:
        return self.descs[tid].kind

    def simulation_labels(self) -> list[RelationLabel]:
        """Relation labels that constrain the subsumption order (promote excluded)."""
        return [lab for lab in self.relation_order if lab.tag != "promote"]

    def lookup_relation(self, label: RelationLabel) -> TypeRelation:
        """The relation for a label; empty if it was never populated."""
        rel = self.relations.get(label)
        if rel is None:
            rel = TypeRelation(label, frozenset())
        return rel

    def is_abstract(self, tid: TypeId) -> bool:
        """True for types with no concrete C rendering (any, protocol, parameter)."""
        kind = self.kind(tid)
        if kind in (TypeKind.ANY, TypeKind.PROTOCOL, TypeKind.PARAMETER):
            return True
        if kind == TypeKind.POINTER:
            return self.is_abstract(self.descs[tid].pointee)
        if kind == TypeKind.STRUCT:
            return any(self.is_abstract(ftid) for _, ftid in self.descs[tid].fields)
        if kind == TypeKind.FUNCTION:
            d = self.descs[tid]
            return self.is_abstract(d.ret) or any(self.is_abstract(a) for a in d.args)
        return False

    def display(self, tid: TypeId) -> str:
        d = self.descs[tid]
        if d.kind in (TypeKind.ANY, TypeKind.BUILTIN, TypeKind.PROTOCOL, TypeKind.PARAMETER):
            return d.name
        if d.kind == TypeKind.STRUCT:
            alias = self.aliases.get(tid)
            if alias:
                return alias
            return d.name[1:] if d.name.startswith("_") else d.name
        if d.kind == TypeKind.POINTER:
            return self.display(d.pointee) + "*"
        if d.kind == TypeKind.FUNCTION:
            args = ", ".join(
                self.display(a) + ("+" if plus else "") for a, plus in zip(d.args, d.arg_plus)
            )
            ret = self.display(d.ret) + ("+" if d.ret_plus else "")
            return f"{ret}(*)({args})"
        raise ValueError(f"no display for {d!r}")

    def mangle(self, tid: TypeId) -> str:
        d = self.descs[tid]
        if d.kind == TypeKind.POINTER:
            return self.mangle(d.pointee) + "p"
        if d.kind == TypeKind.FUNCTION:
            raise ValueError("function-typed arguments cannot be mangled")
        return self.display(tid)

    def op_defs(self, name: str, arity: int) -> list[OpDef]:
        return self.ops.get((name, arity), [])

    # -- test/driver scaffolding ---------------------------------------------

    @classmethod
    def abstract(
        cls,
        n: int,
        relations: dict[RelationLabel, tuple[set[tuple[int, int]], set[tuple[int, int]]]],
        include_any: bool = False,
    ) -> "TypeUniverse":
        """A universe of n opaque types t0..t{n-1} with injected relations.

        Used by oracle tests and synthetic benchmarks; build_universe is the
        production constructor.
        """
        u = cls()
        if include_any:
            u.add_any()
        for k in range(n):
            u.add_protocol(f"t{k}")
        for label, (pairs, dagger) in relations.items():
            u.set_relation(label, set(pairs), set(dagger))
        return u


# --- build_universe ---------------------------------------------------------


class _Builder:
    def __init__(self, program: S.SurfaceProgram):
        self.program = program
        self.u = TypeUniverse()
        self.u.file = program.file
        self.op_counter = 0

    def fail(self, span: Span | None, message: str) -> CompileError:
        return CompileError(error(Stage.UNIVERSE, span, message))

    def declare_name(self, name: str, span: Span | None) -> None:
        if name in self.u.names or name in BUILTIN_NAMES or name == "any":
            raise self.fail(span, f"redeclaration of type name '{name}'")

    def resolve_base(self, te: S.TypeExpr) -> TypeId:
        u = self.u
        if te.struct_kw:
            tid = u.tags.get(te.name)
            if tid is None:
                raise self.fail(te.span, f"unresolved struct tag '{te.name}'")
            return tid
        tid = u.names.get(te.name)
        if tid is None:
            tid = u.tags.get(te.name)
        if tid is None:
            raise self.fail(te.span, f"unresolved type name '{te.name}'")
        return tid

    def resolve(self, te: S.TypeExpr) -> TypeId:
        tid = self.resolve_base(te)
        for _ in range(te.stars):
            tid = self.u.pointer_to(tid)
        return tid

    def build(self) -> TypeUniverse:
        u = self.u
        u.add_any()
        for name in BUILTIN_NAMES:
            u.add_builtin(name)

        # Register every named type first so field/signature resolution and
        # recursive structs are order-insensitive.
        struct_decls: list[tuple[S.StructDecl, TypeId]] = []
        for d in self.program.declarations:
            if isinstance(d, S.ProtocolTypeDecl):
                self.declare_name(d.name, d.span)
                u.add_protocol(d.name)
            elif isinstance(d, S.StructDecl):
                if d.tag in u.tags:
                    raise self.fail(d.span, f"redeclaration of struct '{d.tag}'")
                struct_decls.append((d, u.add_struct_tag(d.tag)))
            elif isinstance(d, S.ParamTypedefDecl):
                raise self.fail(
                    d.span, "parameterized typedefs must be expanded before universe construction"
                )

        # Parameter types may be bounded by protocols declared earlier in the file.
        for d in self.program.declarations:
            if isinstance(d, S.ParameterTypeDecl):
                self.declare_name(d.name, d.span)
                bounds = []
                for bname in d.bounds:
                    btid = u.names.get(bname)
                    if btid is None:
                        raise self.fail(d.span, f"unresolved type name '{bname}'")
                    if u.kind(btid) != TypeKind.PROTOCOL:
                        raise self.fail(d.span, f"bound '{bname}' must name a protocoltype")
                    bounds.append(btid)
                u.add_parameter(d.name, tuple(bounds))

        # Typedef aliases; chains are resolved iteratively.
        pending = [d for d in self.program.declarations if isinstance(d, S.TypedefDecl)]
        while pending:
            progressed = False
            remaining = []
            for d in pending:
                try:
                    tid = self.resolve(d.target)
                except CompileError:
                    remaining.append(d)
                    continue
                self.declare_name(d.name, d.span)
                u.names[d.name] = tid
                if u.kind(tid) == TypeKind.STRUCT:
                    u.aliases.setdefault(tid, d.name)
                progressed = True
            if not progressed:
                bad = remaining[0]
                raise self.fail(bad.span, f"unresolved type name '{bad.target.name}'")
            pending = remaining

        # Struct fields.
        for d, tid in struct_decls:
            fields: list[tuple[str, TypeId]] = []
            seen: set[str] = set()
            for ftype, fname in d.fields:
                if fname in seen:
                    raise self.fail(d.span, f"duplicate field '{fname}' in struct '{d.tag}'")
                seen.add(fname)
                if ftype.plus:
                    raise self.fail(ftype.span, "'+' qualifier is not allowed on struct fields")
                fields.append((fname, self.resolve(ftype)))
            u.set_struct_fields(tid, tuple(fields))

        # Function declarations and definitions.
        for d in self.program.declarations:
            if not isinstance(d, (S.FunctionDecl, S.FunctionDef)):
                continue
            args = []
            plus = []
            for p in d.params:
                args.append(self.resolve(p.type))
                plus.append(p.type.plus)
            ret = self.resolve(d.ret)
            sig = u.function_type(tuple(args), tuple(plus), ret, d.ret.plus)
            has_body = isinstance(d, S.FunctionDef)
            key = (d.name, len(args))
            if has_body:
                for other in u.ops.get(key, []):
                    if other.has_body and other.sig == sig:
                        raise self.fail(d.span, f"duplicate definition of {d.name}/{len(args)}")
            opdef = OpDef(d.name, len(args), sig, d.span, has_body, d, self.op_counter, u.file)
            self.op_counter += 1
            u.ops.setdefault(key, []).append(opdef)

        # Builtin operator signatures.
        for sym, (argnames, retname) in BUILTIN_OPS.items():
            argids = tuple(u.names[a] for a in argnames)
            u.builtin_sigs[sym] = u.function_type(argids, (False,) * len(argids), u.names[retname])

        self.saturate_pointers()
        self.build_relations()
        return u

    def saturate_pointers(self) -> None:
        """1-deep pointer types for every non-pointer type used in a field or signature."""
        u = self.u
        used: set[TypeId] = set()
        for d in list(u.descs):
            if d.kind == TypeKind.STRUCT:
                used.update(ftid for _, ftid in d.fields)
            elif d.kind == TypeKind.FUNCTION:
                used.update(d.args)
                used.add(d.ret)
        for tid in sorted(used):
            if u.kind(tid) not in (TypeKind.POINTER, TypeKind.FUNCTION):
                u.pointer_to(tid)

    def build_relations(self) -> None:
        u = self.u
        field_pairs: dict[str, set[tuple[TypeId, TypeId]]] = {}
        field_order: list[str] = []
        deref_pairs: set[tuple[TypeId, TypeId]] = set()
        arg_pairs: dict[RelationLabel, set[tuple[TypeId, TypeId]]] = {}
        ret_pairs: dict[RelationLabel, set[tuple[TypeId, TypeId]]] = {}

        for tid, d in enumerate(u.descs):
            if d.kind == TypeKind.STRUCT:
                for fname, ftid in d.fields:
                    if fname not in field_pairs:
                        field_pairs[fname] = set()
                        field_order.append(fname)
                    field_pairs[fname].add((tid, ftid))
            elif d.kind == TypeKind.POINTER:
                deref_pairs.add((tid, d.pointee))
            elif d.kind == TypeKind.FUNCTION:
                j = len(d.args)
                for i, a in enumerate(d.args, start=1):
                    arg_pairs.setdefault(arg_label(i, j), set()).add((tid, a))
                ret_pairs.setdefault(ret_label(j), set()).add((tid, d.ret))

        argsig_pairs: dict[RelationLabel, tuple[set, set]] = {}
        argsig_order: list[RelationLabel] = []
        for (name, arity), defs in u.ops.items():
            for opdef in defs:
                sig = u.descs[opdef.sig]
                for i in range(1, arity + 1):
                    label = arg_signature(name, i, arity)
                    if label not in argsig_pairs:
                        argsig_pairs[label] = (set(), set())
                        argsig_order.append(label)
                    pairs, dagger = argsig_pairs[label]
                    pair = (sig.args[i - 1], opdef.sig)
                    pairs.add(pair)
                    if sig.arg_plus[i - 1]:
                        dagger.add(pair)

        # A bounded parameter type inherits every argument-signature edge of its
        # bounds: that is what makes the bound's protocol operations available.
        for tid, d in enumerate(u.descs):
            if d.kind != TypeKind.PARAMETER or not d.bounds:
                continue
            for label in argsig_order:
                pairs, dagger = argsig_pairs[label]
                for bound in d.bounds:
                    for (a, f) in list(pairs):
                        if a == bound:
                            pairs.add((tid, f))
                            if (a, f) in dagger:
                                dagger.add((tid, f))

        for fname in field_order:
            u.set_relation(field_select(fname), field_pairs[fname])
        if deref_pairs:
            u.set_relation(POINTER_DEREF, deref_pairs)
        # Deterministic op order: first declaration wins.
        first_index = {
            (name, arity): min(o.index for o in defs) for (name, arity), defs in u.ops.items()
        }
        argsig_order.sort(key=lambda lab: (first_index[(lab.op, lab.j)], lab.i))
        for label in argsig_order:
            pairs, dagger = argsig_pairs[label]
            u.set_relation(label, pairs, dagger)
        for label in sorted(arg_pairs, key=lambda lab: (lab.j, lab.i)):
            u.set_relation(label, arg_pairs[label])
        for label in sorted(ret_pairs, key=lambda lab: lab.j):
            u.set_relation(label, ret_pairs[label])

        char_id = u.names["char"]
        int_id = u.names["int"]
        u.set_relation(PROMOTE, {(char_id, int_id), (char_id, char_id), (int_id, int_id)})


def build_universe(program: S.SurfaceProgram) -> TypeUniverse:
    """Intern all relevant types of an expanded program and index its relations."""
    return _Builder(program).build()
