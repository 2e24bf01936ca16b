"""Equivalence-relation machinery: extensions, bisimulation, refinement.

The central construction lifts an equivalence on states to behaviours:
two weight terms are related under a partition exactly when quotienting
their leaves by the partition's canonical map yields equal canonical
terms.  A partition is a bisimulation when related states have related
transition terms at every component and label, and the largest one is
computed by plain iterated signature splitting, which is deterministic
and, at desk scale, fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator

from .system import CarrierMap, Futs, is_homomorphism
from .weightfn import Term, leaves, quotient_term, term_equal, term_key


@dataclass(frozen=True)
class Partition:
    carrier: tuple[str, ...]
    blocks: tuple[tuple[str, ...], ...]

    @staticmethod
    def of_blocks(carrier: Iterable[str], blocks: Iterable[Iterable[str]]) -> "Partition":
        carrier = tuple(sorted(set(carrier)))
        canon = tuple(sorted(tuple(sorted(set(b))) for b in blocks if tuple(b)))
        seen: list[str] = [x for b in canon for x in b]
        if sorted(seen) != list(carrier) or len(seen) != len(set(seen)):
            raise ValueError("blocks must partition the carrier exactly")
        return Partition(carrier, canon)

    @staticmethod
    def identity(carrier: Iterable[str]) -> "Partition":
        carrier = tuple(sorted(set(carrier)))
        return Partition(carrier, tuple((x,) for x in carrier))

    @staticmethod
    def single(carrier: Iterable[str]) -> "Partition":
        carrier = tuple(sorted(set(carrier)))
        return Partition(carrier, (carrier,) if carrier else ())

    @staticmethod
    def group_by(carrier: Iterable[str], key: Callable[[str], object]) -> "Partition":
        groups: dict[object, list[str]] = {}
        for x in carrier:
            groups.setdefault(key(x), []).append(x)
        return Partition.of_blocks(carrier, groups.values())

    @cached_property
    def kappa(self) -> dict[str, str]:
        """Quotient map: state -> block id (the block's least member)."""
        return {x: block[0] for block in self.blocks for x in block}

    def block_of(self, state: str) -> str:
        return self.kappa[state]

    def same_block(self, x: str, y: str) -> bool:
        return self.kappa[x] == self.kappa[y]

    def block_ids(self) -> tuple[str, ...]:
        return tuple(b[0] for b in self.blocks)

    def refine_by(self, key: Callable[[str], object]) -> "Partition":
        new_blocks = []
        for block in self.blocks:
            groups: dict[object, list[str]] = {}
            for x in block:
                groups.setdefault(key(x), []).append(x)
            new_blocks.extend(groups.values())
        return Partition.of_blocks(self.carrier, new_blocks)

    def restrict(self, sub: Iterable[str]) -> "Partition":
        keep = set(sub)
        blocks = [tuple(x for x in b if x in keep) for b in self.blocks]
        return Partition.of_blocks(keep, [b for b in blocks if b])

    def render(self) -> str:
        inner = ", ".join("{" + ", ".join(b) + "}" for b in self.blocks)
        return "{ " + inner + " }"


def all_partitions(carrier: Iterable[str]) -> Iterator[Partition]:
    """Enumerate every partition of the carrier (Bell-number many)."""
    items = sorted(set(carrier))

    def go(i: int, blocks: list[list[str]]) -> Iterator[tuple[tuple[str, ...], ...]]:
        if i == len(items):
            yield tuple(tuple(b) for b in blocks)
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from go(i + 1, blocks)
            b.pop()
        blocks.append([x])
        yield from go(i + 1, blocks)
        blocks.pop()

    if not items:
        yield Partition((), ())
        return
    for raw in go(0, []):
        yield Partition.of_blocks(items, raw)


def ext_related(p: Partition, t: Term, t2: Term) -> bool:
    """Extension of the partition to behaviours: equal quotiented terms."""
    carrier = set(p.carrier)
    for term in (t, t2):
        extra = leaves(term) - carrier
        if extra:
            raise ValueError(f"term mentions states outside the carrier: {sorted(extra)}")
    return term_equal(quotient_term(t, p.kappa), quotient_term(t2, p.kappa))


def _state_signature(s: Futs, p: Partition, x: str) -> tuple[str, ...]:
    sig = []
    for i, comp in enumerate(s.sig.components):
        for a in comp.labels:
            sig.append(term_key(quotient_term(s.transition(i, x, a), p.kappa)))
    return tuple(sig)


def is_bisimulation(s: Futs, p: Partition) -> bool:
    """True iff states in a block have extension-related behaviours.

    The check decomposes over (component, label) pairs: all members of a
    block must share the quotiented transition term at each of them.
    """
    if set(p.carrier) != set(s.states):
        raise ValueError("partition carrier does not match the system's states")
    for block in p.blocks:
        if len(block) == 1:
            continue
        first = _state_signature(s, p, block[0])
        for x in block[1:]:
            if _state_signature(s, p, x) != first:
                return False
    return True


def largest_bisimulation(s: Futs) -> Partition:
    """Coarsest bisimulation, by iterated whole-partition splitting.

    Starts from the one-block partition and repeatedly splits every block
    by the canonical serialisation of its members' quotiented transition
    terms until stable.  The result is independent of split order and
    equals the union of all bisimulations.
    """
    p = Partition.single(s.states)
    while True:
        refined = p.refine_by(lambda x: _state_signature(s, p, x))
        if refined == p:
            return p
        p = refined


def quotient_system(s: Futs, p: Partition) -> Futs:
    """Quotient by a bisimulation; block ids become the new states."""
    if not is_bisimulation(s, p):
        raise ValueError("quotient_system needs a bisimulation partition")
    return _representative_quotient(s, p)


def _representative_quotient(s: Futs, p: Partition) -> Futs:
    trans = {}
    for i, comp in enumerate(s.sig.components):
        for block in p.blocks:
            rep = block[0]
            for a in comp.labels:
                trans[(i, rep, a)] = quotient_term(s.transition(i, rep, a), p.kappa)
    return Futs(s.sig, p.block_ids(), trans)


def is_kernel_bisimulation(s: Futs, p: Partition) -> bool:
    """Kernel characterisation: build the representative quotient and test
    whether the quotient map is a homomorphism into it.

    For every behaviour type in the catalog this coincides with
    is_bisimulation; both are kept as independent routes.
    """
    if set(p.carrier) != set(s.states):
        raise ValueError("partition carrier does not match the system's states")
    q = _representative_quotient(s, p)
    return is_homomorphism(CarrierMap(s, q, dict(p.kappa)))
