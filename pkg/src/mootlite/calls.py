"""Call matching relations under strongest-call semantics.

For an operation of a given arity, the matching relation for argument position
i is R ∪ (⪯ ; R†) over the declared argument-signature relation, with every
pair removed whose signature is not the pointwise-strongest declared match for
that argument type. The return relation maps declared return types to
signatures, strengthened through `+`-marked returns the same way. Relations
derived from a valid simulation order are monotone, hence cross-closed; this is
asserted on every derivation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, InternalError, Stage, warning
from .hierarchy import SubsumptionOrder
from .typeflow import MatchRelation, validate_cross_closed
from .universe import BUILTIN_OPS, PROMOTE, OpDef, TypeId, TypeUniverse


@dataclass(frozen=True)
class ArgMatch:
    op: str
    i: int
    j: int

    def __str__(self) -> str:
        return f"{self.op}^arg_{self.i}/{self.j}"


@dataclass(frozen=True)
class RetMatch:
    op: str
    j: int

    def __str__(self) -> str:
        return f"{self.op}^ret_/{self.j}"


@dataclass(frozen=True)
class FieldMatch:
    field: str

    def __str__(self) -> str:
        return f".{self.field}"


@dataclass(frozen=True)
class DerefMatch:
    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True)
class AssignMatch:
    def __str__(self) -> str:
        return "<:"


@dataclass(frozen=True)
class PromoteMatch:
    def __str__(self) -> str:
        return "promote"


@dataclass
class CallRelations:
    op: str
    arity: int
    args: list[MatchRelation]
    ret: MatchRelation
    defs: list[OpDef]
    warnings: list[Diagnostic]


def _down_members(order: SubsumptionOrder, t: TypeId) -> list[TypeId]:
    out = []
    mask = order.down_mask[order.rep[t]]
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def derive_call_relations(
    u: TypeUniverse, order: SubsumptionOrder, op: str, arity: int
) -> CallRelations:
    """Matching relations for args 1..arity and the return of `op`/arity."""
    defs = u.op_defs(op, arity)
    if not defs:
        raise InternalError(f"no signatures for {op}/{arity}")

    decl_arg: dict[TypeId, list[TypeId]] = {}  # sig rep -> declared arg reps
    for d in defs:
        desc = u.desc(d.sig)
        decl_arg[order.rep[d.sig]] = [order.rep[a] for a in desc.args]

    args: list[MatchRelation] = []
    for i in range(1, arity + 1):
        raw: set[tuple[TypeId, TypeId]] = set()
        for d in defs:
            desc = u.desc(d.sig)
            declared = order.rep[desc.args[i - 1]]
            sig = order.rep[d.sig]
            raw.add((declared, sig))
            if desc.arg_plus[i - 1]:
                for t in _down_members(order, declared):
                    raw.add((t, sig))
        # Strongest-call filter: drop (t, f) when another signature declares a
        # strictly stronger i-th parameter that still matches t.
        by_t: dict[TypeId, list[TypeId]] = {}
        for t, f in raw:
            by_t.setdefault(t, []).append(f)
        kept: set[tuple[TypeId, TypeId]] = set()
        for t, fs in by_t.items():
            for f in fs:
                df = decl_arg[f][i - 1]
                if any(order.strict(decl_arg[g][i - 1], df) for g in fs):
                    continue
                kept.add((t, f))
        m = MatchRelation.over(order, ArgMatch(op, i, arity), kept)
        bad = validate_cross_closed(order, m)
        if bad:
            raise InternalError(f"derived relation {m.label} is not cross-closed: {bad}")
        args.append(m)

    ret_raw: set[tuple[TypeId, TypeId]] = set()
    for d in defs:
        desc = u.desc(d.sig)
        declared = order.rep[desc.ret]
        sig = order.rep[d.sig]
        ret_raw.add((declared, sig))
        if desc.ret_plus:
            for t in _down_members(order, declared):
                ret_raw.add((t, sig))
    ret = MatchRelation.over(order, RetMatch(op, arity), ret_raw)
    bad = validate_cross_closed(order, ret)
    if bad:
        raise InternalError(f"derived relation {ret.label} is not cross-closed: {bad}")

    warnings_ = []
    bodies = [d for d in defs if d.has_body]
    for a in range(len(bodies)):
        for b in range(a + 1, len(bodies)):
            da, db = bodies[a], bodies[b]
            if da.source == db.source:
                continue
            if not order.leq(da.sig, db.sig) and not order.leq(db.sig, da.sig):
                warnings_.append(
                    warning(
                        Stage.TYPING,
                        db.span,
                        f"incomparable definitions of {op}/{arity} in different source files: "
                        f"{u.display(da.sig)} ({da.source}) and {u.display(db.sig)} ({db.source})",
                    )
                )
    return CallRelations(op, arity, args, ret, defs, warnings_)


def builtin_call_relations(u: TypeUniverse, order: SubsumptionOrder, sym: str) -> CallRelations:
    """Matching relations for a builtin expression operator."""
    sig = u.builtin_sigs[sym]
    desc = u.desc(sig)
    arity = len(desc.args)
    args = [
        MatchRelation.over(order, ArgMatch(sym, i, arity), {(desc.args[i - 1], sig)})
        for i in range(1, arity + 1)
    ]
    ret = MatchRelation.over(order, RetMatch(sym, arity), {(desc.ret, sig)})
    return CallRelations(sym, arity, args, ret, [], [])


def assignment_relation(order: SubsumptionOrder) -> MatchRelation:
    """Subsumption itself as a matching relation: {(t, u) | t ⪯ u}."""
    pairs = set()
    for b in order.reps:
        mask = order.down_mask[b]
        while mask:
            low = mask & -mask
            pairs.add((low.bit_length() - 1, b))
            mask ^= low
    return MatchRelation.over(order, AssignMatch(), pairs)


def promote_relation(u: TypeUniverse, order: SubsumptionOrder) -> MatchRelation:
    """Standard C promotion restricted to int and char (cross-closed, not monotone)."""
    return MatchRelation.over(order, PromoteMatch(), u.lookup_relation(PROMOTE).pairs)


def is_builtin_op(sym: str) -> bool:
    return sym in BUILTIN_OPS
