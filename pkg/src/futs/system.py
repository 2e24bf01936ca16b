"""Finite state-to-function transition systems.

A system is a signature (one row of labels and a monoid stack per
component), a finite carrier of state ids, and a total transition map
assigning to every (component, state, label) a weight term of the row's
depth; absent entries denote the zero term.  Systems are immutable after
construction and all operations here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

from . import monoid as mo
from .monoid import BOOL_OR, Hom, Monoid
from .weightfn import Leaf, Node, Term, leaves, node, pushforward, term_depth, zero_term


@dataclass(frozen=True)
class Component:
    labels: tuple[str, ...]
    monoids: tuple[Monoid, ...]

    def __post_init__(self):
        labels = tuple(sorted(set(self.labels)))
        if not labels:
            raise ValueError("component needs a non-empty label set")
        monoids = tuple(self.monoids)
        if not monoids:
            raise ValueError("component needs a non-empty monoid stack")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "monoids", monoids)

    @property
    def depth(self) -> int:
        return len(self.monoids)


@dataclass(frozen=True)
class Signature:
    components: tuple[Component, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("signature needs at least one component")

    @property
    def is_nested(self) -> bool:
        return len(self.components) == 1

    @property
    def is_combined(self) -> bool:
        return all(c.depth == 1 for c in self.components)

    @property
    def is_simple(self) -> bool:
        return self.is_nested and self.is_combined

    @property
    def is_tabular(self) -> bool:
        return len({c.depth for c in self.components}) == 1

    @property
    def is_homogeneous(self) -> bool:
        return len({m for c in self.components for m in c.monoids}) == 1

    @property
    def is_unlabelled(self) -> bool:
        return all(len(c.labels) == 1 for c in self.components)


class Futs:
    """A system over a signature; treat as read-only once built."""

    def __init__(self, sig: Signature, states, trans=None):
        self.sig = sig
        self.states = tuple(sorted(set(states)))
        stored: dict[tuple[int, str, str], Node] = {}
        for (i, x, a), term in (trans or {}).items():
            if not isinstance(term, Node) or term.entries:
                stored[(i, x, a)] = term
        self.trans = MappingProxyType(stored)
        self._zeros = {i: zero_term(c.monoids) for i, c in enumerate(sig.components)}

    def transition(self, i: int, state: str, label: str) -> Node:
        return self.trans.get((i, state, label), self._zeros[i])

    def nonzero_items(self):
        return sorted(self.trans.items(), key=lambda kv: kv[0])


def systems_equal(s1: Futs, s2: Futs) -> bool:
    return s1.sig == s2.sig and s1.states == s2.states and s1.trans == s2.trans


def validate(s: Futs) -> list[str]:
    """Check every invariant; returns diagnostics rather than raising."""
    out: list[str] = []
    if not s.states:
        out.append("empty carrier")
    state_set = set(s.states)
    n = len(s.sig.components)
    for (i, x, a), term in sorted(s.trans.items()):
        where = f"component {i}, state {x}, label {a}"
        if not 0 <= i < n:
            out.append(f"{where}: component index out of range")
            continue
        comp = s.sig.components[i]
        if x not in state_set:
            out.append(f"{where}: unknown source state")
        if a not in comp.labels:
            out.append(f"{where}: unknown label")
        if not isinstance(term, Node) or term_depth(term) != comp.depth:
            out.append(f"{where}: depth mismatch (expected {comp.depth})")
            continue
        if term.stack != comp.monoids:
            out.append(f"{where}: monoid stack mismatch")
            continue
        for leaf in sorted(leaves(term)):
            if leaf not in state_set:
                out.append(f"{where}: unknown state {leaf!r} in transition term")
    return out


@dataclass(frozen=True)
class CarrierMap:
    """A total map between the carriers of two systems."""

    source: Futs
    target: Futs
    mapping: dict

    def __post_init__(self):
        missing = [x for x in self.source.states if x not in self.mapping]
        if missing:
            raise ValueError(f"carrier map is not total: missing {missing}")
        bad = [y for y in self.mapping.values() if y not in set(self.target.states)]
        if bad:
            raise ValueError(f"carrier map hits unknown target states {bad}")

    def __call__(self, state: str) -> str:
        return self.mapping[state]

    @property
    def injective(self) -> bool:
        img = [self.mapping[x] for x in self.source.states]
        return len(set(img)) == len(img)

    @property
    def surjective(self) -> bool:
        return {self.mapping[x] for x in self.source.states} == set(self.target.states)


def compose_maps(first: CarrierMap, second: CarrierMap) -> CarrierMap:
    if first.target is not second.source and not systems_equal(first.target, second.source):
        raise ValueError("carrier maps do not compose")
    return CarrierMap(first.source, second.target,
                      {x: second.mapping[first.mapping[x]] for x in first.source.states})


def is_homomorphism(f: CarrierMap) -> bool:
    """True iff the target transition of f(x) is the pushforward of x's."""
    if f.source.sig != f.target.sig:
        raise ValueError("homomorphism check needs systems of the same signature")
    for i, comp in enumerate(f.source.sig.components):
        for x in f.source.states:
            for a in comp.labels:
                image = pushforward(f.mapping, f.source.transition(i, x, a))
                if image != f.target.transition(i, f.mapping[x], a):
                    return False
    return True


def identity_map(s: Futs) -> CarrierMap:
    return CarrierMap(s, s, {x: x for x in s.states})


def project_component(s: Futs, i: int) -> Futs:
    """The single-component system keeping only component ``i``."""
    comp = s.sig.components[i]
    trans = {(0, x, a): term for (j, x, a), term in s.trans.items() if j == i}
    return Futs(Signature((comp,)), s.states, trans)


def dirac_embed(w: Futs) -> Futs:
    """Embed a simple system into the boolean-outer two-level class.

    Every transition function phi becomes the singleton set {phi}, encoded
    as the boolean-weighted term {phi: tt}; this applies to the zero
    function too, which becomes { {}: tt } rather than the zero term.
    """
    if not w.sig.is_simple:
        raise ValueError("dirac_embed needs a simple (single component, depth 1) system")
    comp = w.sig.components[0]
    new_comp = Component(comp.labels, (BOOL_OR,) + comp.monoids)
    sig = Signature((new_comp,))
    trans = {}
    for x in w.states:
        for a in comp.labels:
            phi = w.transition(0, x, a)
            trans[(0, x, a)] = node(new_comp.monoids, [(phi, True)])
    return Futs(sig, w.states, trans)


def _map_term(term: Term, homs: tuple[Hom, ...], new_stack: tuple[Monoid, ...]) -> Term:
    if isinstance(term, Leaf):
        return term
    entries = [(_map_term(k, homs[1:], new_stack[1:]), homs[0](w)) for k, w in term.entries]
    return node(new_stack, entries)


def relabel_weights(s: Futs, homs) -> Futs:
    """Map every weight at level j of component i through homs[i][j].

    All homomorphisms must be injective: that is what guarantees the
    rewrite preserves and reflects bisimilarity.
    """
    rows = [tuple(row) for row in homs]
    if len(rows) != len(s.sig.components):
        raise ValueError("one homomorphism row per component expected")
    new_comps = []
    for comp, row in zip(s.sig.components, rows):
        if len(row) != comp.depth:
            raise ValueError("one homomorphism per monoid stack level expected")
        for h, m in zip(row, comp.monoids):
            if h.source != m:
                raise ValueError(f"homomorphism source {mo.format_monoid(h.source)} "
                                 f"does not match level monoid {mo.format_monoid(m)}")
            if not h.injective:
                raise ValueError("relabel_weights requires injective homomorphisms")
        new_comps.append(Component(comp.labels, tuple(h.target for h in row)))
    sig = Signature(tuple(new_comps))
    trans = {}
    for (i, x, a), term in s.trans.items():
        trans[(i, x, a)] = _map_term(term, rows[i], new_comps[i].monoids)
    return Futs(sig, s.states, trans)
