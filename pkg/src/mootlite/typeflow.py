"""Syntax graphs and the bidirectional antichain typing algorithm.

Nodes carry antichains; each edge is labeled with a cross-closed type matching
relation. One application of the bidirectional flow function restricts both
endpoint antichains to the weakest types of their downward closures that have
at least one matching edge into the opposing closure. The worklist loop applies
flows until nothing changes; the result is the greatest fixed point below the
initial typing, independent of scheduling.

The symbolic flow function evaluates the same map as the naive one but as a
join of singleton flows, which a FlowMemo precomputes and caches; this is what
makes typing cheap when the same antichain pairs recur across a program.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .antichains import Antichain, closure_mask
from .diagnostics import InternalError, Span
from .hierarchy import SubsumptionOrder
from .universe import TypeId

NodeId = int


@dataclass
class MatchRelation:
    """A cross-closed matching relation M over type representatives."""

    label: object  # hashable, rendered with str() in traces
    pairs: frozenset[tuple[TypeId, TypeId]]
    row_mask: dict[TypeId, int] = field(default_factory=dict)
    col_mask: dict[TypeId, int] = field(default_factory=dict)

    @classmethod
    def over(
        cls, order: SubsumptionOrder, label: object, pairs: Iterable[tuple[TypeId, TypeId]]
    ) -> "MatchRelation":
        canon = frozenset((order.rep[a], order.rep[b]) for a, b in pairs)
        rows: dict[TypeId, int] = {}
        cols: dict[TypeId, int] = {}
        for a, b in canon:
            rows[a] = rows.get(a, 0) | (1 << b)
            cols[b] = cols.get(b, 0) | (1 << a)
        return cls(label, canon, rows, cols)


def validate_cross_closed(
    order: SubsumptionOrder, m: MatchRelation
) -> list[tuple[TypeId, TypeId]]:
    """Missing pairs violating cross-closure; empty when the relation is sound.

    For crossing edges (t, u') and (t', u) with t' ⪯ t and u' ⪯ u the pair
    (t, u) must be present.
    """
    missing = []
    for (t, u2) in m.pairs:
        for (t2, v) in m.pairs:
            if order.leq(t2, t) and order.leq(u2, v) and (t, v) not in m.pairs:
                missing.append((t, v))
    return sorted(set(missing))


# --- flow functions -----------------------------------------------------------


def flow_naive(
    order: SubsumptionOrder, m: MatchRelation, a: Antichain, b: Antichain
) -> tuple[Antichain, Antichain]:
    """One bidirectional flow application, straight from the definition."""
    amask = closure_mask(order, a)
    bmask = closure_mask(order, b)
    left = 0
    right = 0
    mask = amask
    while mask:
        low = mask & -mask
        t = low.bit_length() - 1
        if m.row_mask.get(t, 0) & bmask:
            left |= low
        mask ^= low
    mask = bmask
    while mask:
        low = mask & -mask
        t = low.bit_length() - 1
        if m.col_mask.get(t, 0) & amask:
            right |= low
        mask ^= low
    return (
        Antichain(tuple(sorted(order.maximal(left)))),
        Antichain(tuple(sorted(order.maximal(right)))),
    )


def _join_pair(
    order: SubsumptionOrder,
    acc: tuple[int, int],
    res: tuple[Antichain, Antichain],
) -> tuple[int, int]:
    la, lb = acc
    for t in res[0].members:
        la |= 1 << t
    for t in res[1].members:
        lb |= 1 << t
    return la, lb


class FlowMemo:
    """Singleton-flow base table plus a cache of full flow results per label.

    Singleton pairs that are edges of M flow to themselves and are seeded
    eagerly; other singleton pairs are computed on first use. With
    `cache_enabled=False` every singleton flow is recomputed, which is the
    uninstrumented baseline the efficiency tests compare against: the
    `singleton_evals` counter counts actual singleton computations either way.
    """

    def __init__(self, order: SubsumptionOrder, cache_enabled: bool = True):
        self.order = order
        self.cache_enabled = cache_enabled
        self.singles: dict[tuple[object, TypeId, TypeId], tuple[Antichain, Antichain]] = {}
        self.results: dict[object, dict[tuple, tuple[Antichain, Antichain]]] = {}
        self.singleton_evals = 0
        self.flow_calls = 0

    def precompute(self, m: MatchRelation) -> None:
        """Seed the base table: F({t},{u}) = ({t},{u}) exactly when (t,u) ∈ M."""
        if not self.cache_enabled:
            return
        for t, u in m.pairs:
            self.singles[(m.label, t, u)] = (Antichain((t,)), Antichain((u,)))

    def singleton(self, m: MatchRelation, t: TypeId, u: TypeId) -> tuple[Antichain, Antichain]:
        key = (m.label, t, u)
        if self.cache_enabled:
            hit = self.singles.get(key)
            if hit is not None:
                return hit
        self.singleton_evals += 1
        res = flow_naive(self.order, m, Antichain((t,)), Antichain((u,)))
        if self.cache_enabled:
            self.singles[key] = res
        return res


def flow_symbolic(
    memo: FlowMemo, m: MatchRelation, a: Antichain, b: Antichain
) -> tuple[Antichain, Antichain]:
    """The flow as a join of singleton flows over members of A × B.

    Equal to flow_naive on every input; avoids walking the downward closures.
    """
    order = memo.order
    memo.flow_calls += 1
    cache = None
    key = (a.members, b.members)
    if memo.cache_enabled:
        cache = memo.results.setdefault(m.label, {})
        hit = cache.get(key)
        if hit is not None:
            return hit
    la = 0
    lb = 0
    for t in a.members:
        for u in b.members:
            la, lb = _join_pair(order, (la, lb), memo.singleton(m, t, u))
    res = (
        Antichain(tuple(sorted(order.maximal(la)))),
        Antichain(tuple(sorted(order.maximal(lb)))),
    )
    if cache is not None:
        cache[key] = res
    return res


# --- syntax graphs -------------------------------------------------------------


@dataclass
class GraphNode:
    role: str  # "declaration", "argument", "result", "signature", ...
    text: str = ""
    span: Span | None = None


@dataclass
class SyntaxGraph:
    """Nodes, edges, and the edge labeling into matching relations."""

    nodes: list[GraphNode] = field(default_factory=list)
    edges: list[tuple[NodeId, NodeId]] = field(default_factory=list)
    labels: dict[tuple[NodeId, NodeId], object] = field(default_factory=dict)

    def add_node(self, role: str, text: str = "", span: Span | None = None) -> NodeId:
        self.nodes.append(GraphNode(role, text, span))
        return len(self.nodes) - 1

    def add_edge(self, n: NodeId, m: NodeId, label: object) -> None:
        edge = (n, m)
        if edge in self.labels:
            raise InternalError(f"duplicate edge {edge}")
        self.edges.append(edge)
        self.labels[edge] = label


Typing = dict[NodeId, Antichain]


def run_typing(
    graph: SyntaxGraph,
    initial: Typing,
    relations: dict[object, MatchRelation],
    memo: FlowMemo | None = None,
    order: SubsumptionOrder | None = None,
    select: Callable[[list[tuple[NodeId, NodeId]]], tuple[NodeId, NodeId]] | None = None,
    trace: Callable[[str], None] | None = None,
    seed_edges: Iterable[tuple[NodeId, NodeId]] | None = None,
) -> Typing:
    """Worklist loop of the typing algorithm; returns the stabilized typing.

    Every edge starts on the waiting list; an edge application that changes a
    node re-enqueues all edges incident to that node except the edge just
    processed (the flow is idempotent). With `select` the next edge is chosen
    by the caller, used to exercise schedule independence; default is FIFO.
    `memo` enables the symbolic flow; without it every flow is naive (`order`
    must then be given).
    """
    if memo is None and order is None:
        raise InternalError("run_typing needs a FlowMemo or an explicit order")
    ordr = memo.order if memo is not None else order
    assert ordr is not None

    typing = dict(initial)
    incident: dict[NodeId, list[tuple[NodeId, NodeId]]] = {}
    for e in graph.edges:
        incident.setdefault(e[0], []).append(e)
        incident.setdefault(e[1], []).append(e)

    worklist = deque(graph.edges if seed_edges is None else seed_edges)
    inqueue = set(worklist)
    known = set(graph.edges)
    for e in worklist:
        if e not in known:
            raise InternalError(f"seed edge {e} not in graph")

    n_types = len(ordr.u)
    max_steps = len(graph.edges) * (2 * n_types + 3) + len(graph.edges) + 1
    steps = 0

    while worklist:
        if select is None:
            e = worklist.popleft()
        else:
            e = select(list(worklist))
            worklist.remove(e)
        inqueue.discard(e)
        steps += 1
        if steps > max_steps:
            raise InternalError("typing worklist exceeded its termination bound")
        n, m = e
        rel = relations[graph.labels[e]]
        a0, b0 = typing[n], typing[m]
        if memo is not None:
            a1, b1 = flow_symbolic(memo, rel, a0, b0)
        else:
            a1, b1 = flow_naive(ordr, rel, a0, b0)
        if trace is not None:
            trace(
                f"edge {n}->{m} [{rel.label}] "
                f"({a0.render(ordr)}, {b0.render(ordr)}) -> ({a1.render(ordr)}, {b1.render(ordr)})"
            )
        changed_nodes = []
        if a1 != a0:
            typing[n] = a1
            changed_nodes.append(n)
        if b1 != b0:
            typing[m] = b1
            changed_nodes.append(m)
        for node in changed_nodes:
            for other in incident[node]:
                if other != e and other not in inqueue:
                    worklist.append(other)
                    inqueue.add(other)
    return typing


@dataclass
class TypingClass:
    ambiguous: list[NodeId]
    inconsistent: list[NodeId]
    simple: dict[NodeId, TypeId] | None

    @property
    def verdict(self) -> str:
        if self.inconsistent:
            return "inconsistent"
        if self.ambiguous:
            return "ambiguous"
        return "valid"


def classify_typing(typing: Typing) -> TypingClass:
    """Valid simple typing when every node is a singleton; else the offenders."""
    ambiguous = sorted(n for n, a in typing.items() if len(a.members) > 1)
    inconsistent = sorted(n for n, a in typing.items() if not a.members)
    if ambiguous or inconsistent:
        return TypingClass(ambiguous, inconsistent, None)
    return TypingClass([], [], {n: a.members[0] for n, a in typing.items()})
