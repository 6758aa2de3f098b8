"""The complete lattice of antichains of types over a fixed subsumption order.

An antichain of pairwise-incomparable types stands in for its downward closure:
A ⊑ B iff every member of A is subsumed by some member of B, and A ⊔ B is the
restriction of A ∪ B to maximal elements. Members are kept sorted and collapsed
to class representatives so structural equality doubles as lattice equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .hierarchy import SubsumptionOrder
from .universe import TypeId


@dataclass(frozen=True)
class Antichain:
    members: tuple[TypeId, ...]

    @classmethod
    def of(cls, order: SubsumptionOrder, tids: Iterable[TypeId]) -> "Antichain":
        mask = 0
        for t in tids:
            mask |= 1 << order.rep[t]
        return cls(tuple(sorted(order.maximal(mask))))

    @classmethod
    def singleton(cls, order: SubsumptionOrder, t: TypeId) -> "Antichain":
        return cls((order.rep[t],))

    def is_empty(self) -> bool:
        return not self.members

    def is_singleton(self) -> bool:
        return len(self.members) == 1

    def render(self, order: SubsumptionOrder) -> str:
        return "{" + ", ".join(order.u.display(t) for t in self.members) + "}"


EMPTY = Antichain(())


def restrict_maximal(order: SubsumptionOrder, tids: Iterable[TypeId]) -> Antichain:
    """⌈U⌉: members of U not strictly below another member."""
    return Antichain.of(order, tids)


def closure_mask(order: SubsumptionOrder, a: Antichain) -> int:
    mask = 0
    for t in a.members:
        mask |= order.down_mask[t]
    return mask


def downward_closure(order: SubsumptionOrder, a: Antichain) -> frozenset[TypeId]:
    """A⁺: every type subsumed by some member (representatives only)."""
    out = set()
    mask = closure_mask(order, a)
    while mask:
        low = mask & -mask
        out.add(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def leq(order: SubsumptionOrder, a: Antichain, b: Antichain) -> bool:
    """A ⊑ B iff every member of A is ⪯ some member of B (iff A⁺ ⊆ B⁺)."""
    bmask = closure_mask(order, b)
    return all(bmask >> t & 1 for t in a.members)


def join(order: SubsumptionOrder, a: Antichain, b: Antichain) -> Antichain:
    """A ⊔ B = ⌈A ∪ B⌉, the least upper bound; (A ⊔ B)⁺ = A⁺ ∪ B⁺."""
    return Antichain.of(order, a.members + b.members)


def top(order: SubsumptionOrder) -> Antichain:
    if order.u.any_id >= 0:
        return Antichain.singleton(order, order.u.any_id)
    return Antichain.of(order, order.reps)
