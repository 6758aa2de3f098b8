"""Inference of the static type-subsumption order.

The order is the largest relation R contained in a syntactic overapproximation
such that, for every relation label σ and every (t, t') in R, each σ-edge of t'
is matched by t, either directly or by composing the candidate order with the
strengthenable subset of σ. The fixed point is computed by worklist edge
elimination: each retained pair remembers the pairs its justification used, and
deleting a pair re-verifies exactly its dependents.

A pair (t, t') reads "t is stronger than t'": t' subsumes t.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .diagnostics import InternalError
from .universe import RelationLabel, TypeId, TypeKind, TypeUniverse


@dataclass
class CandidateSubsumption:
    """A preorder overapproximating the subsumption order."""

    n: int
    pairs: set[tuple[TypeId, TypeId]]

    @classmethod
    def full_preorder(cls, n: int) -> "CandidateSubsumption":
        return cls(n, {(a, b) for a in range(n) for b in range(n)})


# --- syntactic overapproximation ---------------------------------------------


def syntactic_leq(u: TypeUniverse, t: TypeId, t2: TypeId, depth: int) -> bool:
    """Could t be subsumed by t2, judging only by surface structure?

    Optimistic: structural recursion is cut off at `depth` (deeper disagreement
    is left for the fixed point to discover). Builtins are subsumed only by
    themselves, opaque types, and `any`; this is where the distinctness of the
    builtin operations enters the approximation.
    """
    if t == t2:
        return True
    d = u.desc(t)
    d2 = u.desc(t2)
    if d2.kind == TypeKind.ANY:
        return True
    if d.kind == TypeKind.ANY:
        # `any` can only coincide with types that support no operations at all.
        return d2.kind in (TypeKind.PROTOCOL, TypeKind.PARAMETER)
    if d2.kind == TypeKind.BUILTIN:
        return False
    if d2.kind in (TypeKind.PROTOCOL, TypeKind.PARAMETER):
        return True
    if d2.kind == TypeKind.STRUCT:
        if d.kind != TypeKind.STRUCT:
            return False
        mine = dict(d.fields)
        for fname, ftid2 in d2.fields:
            if fname not in mine:
                return False
            if depth > 0 and not syntactic_leq(u, mine[fname], ftid2, depth - 1):
                return False
        return True
    if d2.kind == TypeKind.POINTER:
        if d.kind != TypeKind.POINTER:
            return False
        if depth == 0:
            return True
        return syntactic_leq(u, d.pointee, d2.pointee, depth - 1)
    if d2.kind == TypeKind.FUNCTION:
        if d.kind != TypeKind.FUNCTION or len(d.args) != len(d2.args):
            return False
        # Every strengthenable position of the weaker signature must be
        # strengthenable in the stronger one.
        for p2, p in zip(d2.arg_plus, d.arg_plus):
            if p2 and not p:
                return False
        if d2.ret_plus and not d.ret_plus:
            return False
        if depth == 0:
            return True
        for a, a2 in zip(d.args, d2.args):
            if not syntactic_leq(u, a, a2, depth - 1):
                return False
        return syntactic_leq(u, d.ret, d2.ret, depth - 1)
    raise InternalError(f"unhandled kind {d2.kind}")


def initial_approximation(
    u: TypeUniverse,
    depth: int = 3,
    distinct: set[tuple[TypeId, TypeId]] | None = None,
    layered: bool = False,
) -> CandidateSubsumption:
    """Every pair not excluded by surface syntax; a preorder by construction.

    `distinct` pairs are withheld in both directions before inference, the
    pre-inference alternative to collapsing equivalent types afterwards.
    With `layered=True` comparisons are pruned by inserting types one at a time
    and exploiting preorder reachability (behavior-identical, fewer calls).
    """
    n = len(u)
    excluded: set[tuple[TypeId, TypeId]] = set()
    for a, b in distinct or ():
        excluded.add((a, b))
        excluded.add((b, a))

    pairs: set[tuple[TypeId, TypeId]] = set()
    if not layered:
        for t in range(n):
            for t2 in range(n):
                if (t, t2) not in excluded and syntactic_leq(u, t, t2, depth):
                    pairs.add((t, t2))
        return CandidateSubsumption(n, pairs)

    # Layered insertion: a failed comparison against x prunes everything on the
    # far side of x (syntactic_leq is transitive at fixed depth).
    up_mask = [0] * n
    down_mask = [0] * n
    for t in range(n):
        up_failed = 0
        down_failed = 0
        ups: list[int] = []
        downs: list[int] = []
        for x in range(t):
            if up_mask[x] & up_failed:
                up_failed |= 1 << x
            elif (t, x) not in excluded and syntactic_leq(u, t, x, depth):
                ups.append(x)
            else:
                up_failed |= 1 << x
            if down_mask[x] & down_failed:
                down_failed |= 1 << x
            elif (x, t) not in excluded and syntactic_leq(u, x, t, depth):
                downs.append(x)
            else:
                down_failed |= 1 << x
        up_mask[t] = (1 << t) | sum(1 << x for x in ups)
        down_mask[t] = (1 << t) | sum(1 << x for x in downs)
        for x in ups:
            down_mask[x] |= 1 << t
        for x in downs:
            up_mask[x] |= 1 << t
    for t in range(n):
        mask = up_mask[t]
        while mask:
            low = mask & -mask
            pairs.add((t, low.bit_length() - 1))
            mask ^= low
    return CandidateSubsumption(n, pairs)


# --- simulation --------------------------------------------------------------


def sigma_simulates(
    R: CandidateSubsumption,
    u: TypeUniverse,
    label: RelationLabel,
    t: TypeId,
    t2: TypeId,
) -> bool:
    """Does t match every σ-edge of t2 under candidate order R?

    True iff for every u2 with (t2, u2) in R_σ there is a u with (u, u2) in R
    and either (t, u) in R_σ or (t, u) in the composition R ; R†_σ.
    """
    rel = u.lookup_relation(label)
    succ_t = rel.succ(t)
    for u2 in rel.succ(t2):
        ok = any((v, u2) in R.pairs for v in succ_t)
        if not ok:
            for (a, w) in R.pairs:
                if a != t:
                    continue
                for v in rel.dagger_succ(w):
                    if (v, u2) in R.pairs:
                        ok = True
                        break
                if ok:
                    break
        if not ok:
            return False
    return True


# --- worklist greatest fixed point -------------------------------------------


def greatest_fixed_point(
    u: TypeUniverse,
    init: CandidateSubsumption,
    top: TypeId | None = None,
) -> "SubsumptionOrder":
    """Largest simulation contained in `init`, normalized to a partial order.

    `top` defaults to the universe's `any` (pairs (t, top) are never eliminated,
    keeping `any` the top of the order regardless of operations declared on it);
    pass None explicitly only for universes without `any`.
    """
    if top is None and u.any_id >= 0:
        top = u.any_id
    n = init.n
    pairs: set[tuple[TypeId, TypeId]] = set(init.pairs)
    for t in range(n):
        pairs.add((t, t))
        if top is not None:
            pairs.add((t, top))

    labels = u.simulation_labels()
    succ: dict[RelationLabel, dict[TypeId, list[TypeId]]] = {}
    dagger: dict[RelationLabel, dict[TypeId, list[TypeId]]] = {}
    for lab in labels:
        rel = u.lookup_relation(lab)
        s: dict[TypeId, list[TypeId]] = {}
        g: dict[TypeId, list[TypeId]] = {}
        for a, b in sorted(rel.pairs):
            s.setdefault(a, []).append(b)
        for a, b in sorted(rel.strengthenable):
            g.setdefault(a, []).append(b)
        succ[lab] = s
        dagger[lab] = g

    by_left: dict[TypeId, set[TypeId]] = {}
    for a, b in pairs:
        by_left.setdefault(a, set()).add(b)

    def permanent(p: tuple[TypeId, TypeId]) -> bool:
        return p[0] == p[1] or (top is not None and p[1] == top)

    def justify(t: TypeId, t2: TypeId) -> tuple[bool, set[tuple[TypeId, TypeId]]]:
        used: set[tuple[TypeId, TypeId]] = set()
        for lab in labels:
            lab_succ = succ[lab]
            edges = lab_succ.get(t2)
            if not edges:
                continue
            direct = lab_succ.get(t, ())
            lab_dagger = dagger[lab]
            for u2 in edges:
                witness = None
                for v in direct:
                    if (v, u2) in pairs:
                        witness = {(v, u2)}
                        break
                if witness is None:
                    for w in by_left.get(t, ()):
                        for v in lab_dagger.get(w, ()):
                            if (v, u2) in pairs:
                                witness = {(t, w), (v, u2)}
                                break
                        if witness is not None:
                            break
                if witness is None:
                    return False, set()
                used |= witness
        return True, used

    uses: dict[tuple[TypeId, TypeId], set[tuple[TypeId, TypeId]]] = {}
    used_by: dict[tuple[TypeId, TypeId], set[tuple[TypeId, TypeId]]] = {}

    queue: deque[tuple[TypeId, TypeId]] = deque(p for p in sorted(pairs) if not permanent(p))
    inqueue = set(queue)

    while queue:
        p = queue.popleft()
        inqueue.discard(p)
        if p not in pairs:
            continue
        ok, used = justify(*p)
        for q in uses.get(p, ()):
            dependents = used_by.get(q)
            if dependents is not None:
                dependents.discard(p)
        if ok:
            uses[p] = used
            for q in used:
                used_by.setdefault(q, set()).add(p)
            continue
        pairs.discard(p)
        by_left[p[0]].discard(p[1])
        uses.pop(p, None)
        for q in used_by.pop(p, ()):
            if q in pairs and q not in inqueue and not permanent(q):
                queue.append(q)
                inqueue.add(q)

    return SubsumptionOrder(u, frozenset(pairs))


# --- the inferred order -------------------------------------------------------


class SubsumptionOrder:
    """The inferred partial order with closure and query structures.

    Equivalence classes of the fixed-point preorder are collapsed to their
    first-declared member (lowest TypeId); queries accept any member and answer
    through the representatives.
    """

    def __init__(self, u: TypeUniverse, pairs: frozenset[tuple[TypeId, TypeId]]):
        self.u = u
        self.pairs = pairs
        n = len(u)
        self.n = n

        rep = list(range(n))
        for a, b in pairs:
            if a != b and (b, a) in pairs:
                r = min(rep[a], rep[b], a, b)
                rep[a] = min(rep[a], r)
                rep[b] = min(rep[b], r)
        # One more sweep settles chains created above (class reps are minima).
        changed = True
        while changed:
            changed = False
            for t in range(n):
                if rep[rep[t]] != rep[t]:
                    rep[t] = rep[rep[t]]
                    changed = True
        self.rep = rep
        self.reps = sorted(set(rep))

        members: dict[TypeId, list[TypeId]] = {}
        for t in range(n):
            members.setdefault(rep[t], []).append(t)
        self.equivalence_classes = [tuple(members[r]) for r in self.reps]

        self.down_mask = [0] * n
        self.up_mask = [0] * n
        for a, b in pairs:
            ra, rb = rep[a], rep[b]
            self.down_mask[rb] |= 1 << ra
            self.up_mask[ra] |= 1 << rb
        for t in range(n):
            if rep[t] != t:
                self.down_mask[t] = self.down_mask[rep[t]]
                self.up_mask[t] = self.up_mask[rep[t]]

    def leq(self, a: TypeId, b: TypeId) -> bool:
        """a ⪯ b: b subsumes a."""
        return bool(self.down_mask[self.rep[b]] >> self.rep[a] & 1)

    def strict(self, a: TypeId, b: TypeId) -> bool:
        return self.rep[a] != self.rep[b] and self.leq(a, b)

    def strict_down(self, t: TypeId) -> int:
        r = self.rep[t]
        return self.down_mask[r] & ~(1 << r)

    def strict_up(self, t: TypeId) -> int:
        r = self.rep[t]
        return self.up_mask[r] & ~(1 << r)

    def maximal(self, mask: int) -> tuple[TypeId, ...]:
        """Representatives in `mask` with no strictly weaker element also in it."""
        out = []
        m = mask
        while m:
            low = m & -m
            t = low.bit_length() - 1
            if not (self.strict_up(t) & mask):
                out.append(t)
            m ^= low
        return tuple(out)

    def covers(self) -> list[tuple[TypeId, TypeId]]:
        """Hasse edges (strong, weak) between representatives."""
        out = []
        for w in self.reps:
            below = self.strict_down(w)
            m = below
            while m:
                low = m & -m
                s = low.bit_length() - 1
                if not (self.strict_up(s) & below):
                    out.append((s, w))
                m ^= low
        return out

    def to_dot(self) -> str:
        """Hasse diagram; edges run from the subsuming type down to the stronger."""
        u = self.u
        names: dict[TypeId, str] = {}
        for r, cls in zip(self.reps, self.equivalence_classes):
            label = u.display(r)
            extra = [u.display(t) for t in cls if t != r]
            names[r] = label + ("".join(f" = {e}" for e in extra) if extra else "")
        lines = ["digraph subsumption {", "  rankdir=TB;", "  node [shape=box];"]
        for r in sorted(self.reps, key=lambda t: names[t]):
            lines.append(f'  "{names[r]}";')
        edges = sorted((names[w], names[s]) for s, w in self.covers())
        for wname, sname in edges:
            lines.append(f'  "{wname}" -> "{sname}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


# --- counterexamples ----------------------------------------------------------


@dataclass
class CounterexamplePath:
    """Why a requested subsumption fails: a path to a missing operation."""

    steps: list[tuple[tuple[TypeId, TypeId], RelationLabel | None]] = field(default_factory=list)
    rendered: str = ""


def _apply_step(expr: str, label: RelationLabel) -> str:
    if label.tag == "field":
        return f"{expr}.{label.field}"
    if label.tag == "deref":
        return f"(*{expr})"
    if label.tag == "argsig":
        slots = ["..."] * label.j
        slots[label.i - 1] = expr
        return f"{label.op}( {', '.join(slots)} )"
    if label.tag == "arg":
        return f"arg{label.i}/{label.j}({expr})"
    if label.tag == "ret":
        return f"ret/{label.j}({expr})"
    raise InternalError(f"no rendering step for {label}")


def _render_missing(expr: str, label: RelationLabel) -> str:
    if label.tag == "field":
        return f"{expr}.{label.field};"
    if label.tag == "deref":
        return f"*{expr};"
    if label.tag == "argsig":
        slots = ["..."] * label.j
        slots[label.i - 1] = expr
        return f"{label.op}( {', '.join(slots)} );"
    return f"{_apply_step(expr, label)};"


def _kind_reason(u: TypeUniverse, strong: TypeId, weak: TypeId) -> str:
    ds, dw = u.desc(strong), u.desc(weak)
    sn, wn = u.display(strong), u.display(weak)
    if dw.kind == TypeKind.BUILTIN or ds.kind == TypeKind.BUILTIN:
        return f"{sn} and {wn} are distinct builtin types"
    if ds.kind == TypeKind.FUNCTION and dw.kind == TypeKind.FUNCTION:
        if len(ds.args) != len(dw.args):
            return f"signatures {sn} and {wn} differ in arity"
        for i, (p, p2) in enumerate(zip(ds.arg_plus, dw.arg_plus), start=1):
            if p2 and not p:
                return f"missing: '+' qualifier on argument {i} of {sn}"
        if dw.ret_plus and not ds.ret_plus:
            return f"missing: '+' qualifier on the return type of {sn}"
    return f"{sn} has incompatible structure"


def check_subsumption(
    order: SubsumptionOrder, strong: TypeId, weak: TypeId
) -> CounterexamplePath | None:
    """None when weak subsumes strong; otherwise a counterexample path."""
    if order.leq(strong, weak):
        return None
    u = order.u
    pairs = order.pairs

    def outputs(t: TypeId, label: RelationLabel) -> list[TypeId]:
        rel = u.lookup_relation(label)
        outs = set(rel.succ(t))
        for (a, w) in pairs:
            if a == t:
                outs.update(rel.dagger_succ(w))
        return sorted(outs)

    def first_failure(t: TypeId, t2: TypeId) -> tuple[RelationLabel, TypeId] | None:
        allowed = pairs | {(t, t2)}
        for label in u.simulation_labels():
            rel = u.lookup_relation(label)
            for u2 in rel.succ(t2):
                if any((v, u2) in allowed for v in outputs(t, label)):
                    continue
                return label, u2
        return None

    path = CounterexamplePath()
    header = f"{u.display(weak)} does not subsume {u.display(strong)}"
    expr = f"({u.display(strong)})"
    t, t2 = strong, weak
    visited: set[tuple[TypeId, TypeId]] = set()
    while True:
        if (t, t2) in visited or len(path.steps) > 32:
            path.steps.append(((t, t2), None))
            path.rendered = f"{header}\nmissing: {expr};"
            return path
        visited.add((t, t2))
        failure = first_failure(t, t2)
        if failure is None:
            path.steps.append(((t, t2), None))
            path.rendered = f"{header}\n{_kind_reason(u, t, t2)}"
            return path
        label, u2 = failure
        path.steps.append(((t, t2), label))
        outs = outputs(t, label)
        if not outs:
            path.rendered = f"{header}\nmissing: {_render_missing(expr, label)}"
            return path
        expr = _apply_step(expr, label)
        t, t2 = outs[0], u2
