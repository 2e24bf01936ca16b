"""Finite-conjunction logic: model checking, translations, equivalence.

Formulas are top, binary conjunction, and diamonds decorated with a
component index, a label, and one weight lower bound per level of that
component's monoid stack.  A diamond holds at a state when its transition
term lies in the nested threshold sets: membership of a depth-d term
tests whether the class sum of its children that (recursively) qualify
dominates the level's bound in the natural order.

``translate`` rewrites formulas along each reduction stage so that
satisfaction is preserved on the reduced system, and
``bounded_logical_equiv`` partitions states by agreement on a finite,
level-wise generated formula family, which on positive cancellative
monoids coincides with bisimilarity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

from . import reduce as rd
from .bisim import Partition, largest_bisimulation
from .monoid import (
    Weight,
    add,
    add_all,
    cancellative,
    check_weight,
    hom_apply,
    is_zero,
    nat_leq,
    positive,
    power_dirac,
    weight_key,
    zero,
)
from .system import Futs, Signature
from .weightfn import Leaf, Node


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Diamond:
    component: int
    label: str
    bounds: tuple[Weight, ...]
    body: "Formula"


Formula = Union[Top, And, Diamond]

TOP = Top()


class FormulaError(ValueError):
    pass


def check_formula(phi: Formula, sig: Signature) -> Formula:
    """Validate against a signature; returns the bound-canonical form."""
    if isinstance(phi, Top):
        return phi
    if isinstance(phi, And):
        return And(check_formula(phi.left, sig), check_formula(phi.right, sig))
    if isinstance(phi, Diamond):
        if not 0 <= phi.component < len(sig.components):
            raise FormulaError(f"component index {phi.component} out of range")
        comp = sig.components[phi.component]
        if phi.label not in comp.labels:
            raise FormulaError(f"label {phi.label!r} not in component {phi.component}")
        if len(phi.bounds) != comp.depth:
            raise FormulaError(
                f"expected {comp.depth} bounds for component {phi.component}, "
                f"got {len(phi.bounds)}")
        bounds = tuple(check_weight(m, b) for m, b in zip(comp.monoids, phi.bounds))
        return Diamond(phi.component, phi.label, bounds, check_formula(phi.body, sig))
    raise FormulaError(f"not a formula: {phi!r}")


def modal_depth(phi: Formula) -> int:
    if isinstance(phi, Top):
        return 0
    if isinstance(phi, And):
        return max(modal_depth(phi.left), modal_depth(phi.right))
    return 1 + modal_depth(phi.body)


def conj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


class Evaluator:
    """Model checker with a satisfaction-set cache per system."""

    def __init__(self, s: Futs):
        self.system = s
        self._cache: dict[Formula, frozenset[str]] = {}

    def sat(self, phi: Formula) -> frozenset[str]:
        hit = self._cache.get(phi)
        if hit is not None:
            return hit
        if isinstance(phi, Top):
            out = frozenset(self.system.states)
        elif isinstance(phi, And):
            out = self.sat(phi.left) & self.sat(phi.right)
        elif isinstance(phi, Diamond):
            body = self.sat(phi.body)
            comp = self.system.sig.components[phi.component]
            out = frozenset(
                x for x in self.system.states
                if _member(self.system.transition(phi.component, x, phi.label),
                           phi.bounds, 0, body, comp.monoids))
        else:
            raise FormulaError(f"not a formula: {phi!r}")
        self._cache[phi] = out
        return out

    def holds(self, x: str, phi: Formula) -> bool:
        return x in self.sat(phi)


def _member(term: Node, bounds, idx: int, sat: frozenset[str], monoids) -> bool:
    """Membership of a depth-(len(bounds)-idx) term in the threshold chain."""
    m = monoids[idx]
    acc = zero(m)
    for k, w in term.entries:
        ok = k.state in sat if isinstance(k, Leaf) else _member(k, bounds, idx + 1, sat, monoids)
        if ok:
            acc = add(m, acc, w)
    return nat_leq(m, bounds[idx], acc)


def satisfies(s: Futs, x: str, phi: Formula) -> bool:
    if x not in set(s.states):
        raise ValueError(f"unknown state {x!r}")
    return Evaluator(s).holds(x, check_formula(phi, s.sig))


def sat_set(s: Futs, phi: Formula) -> frozenset[str]:
    return Evaluator(s).sat(check_formula(phi, s.sig))


# --- translations along the reduction stages --------------------------------

def translate(stage: str, sig: Signature, phi: Formula) -> Formula:
    """Rewrite a formula for the system reduced by ``stage`` from ``sig``.

    Satisfaction is preserved: a state satisfies the original formula iff
    its image satisfies the translated one on the reduced system.
    """
    phi = check_formula(phi, sig)
    if stage == "unlabel":
        def go(f):
            if isinstance(f, Top):
                return f
            if isinstance(f, And):
                return And(go(f.left), go(f.right))
            comp = sig.components[f.component]
            folded = power_dirac(f.label, f.bounds[0], comp.labels, comp.monoids[0])
            return Diamond(f.component, rd.UNLABEL_LABEL,
                           (folded,) + f.bounds[1:], go(f.body))
    elif stage == "tabularize":
        depth = max(c.depth for c in sig.components)

        def go(f):
            if isinstance(f, Top):
                return f
            if isinstance(f, And):
                return And(go(f.left), go(f.right))
            pad = depth - sig.components[f.component].depth
            return Diamond(f.component, f.label, (1,) * pad + f.bounds, go(f.body))
    elif stage == "homogenize":
        rows = rd.homog_sections(sig)

        def go(f):
            if isinstance(f, Top):
                return f
            if isinstance(f, And):
                return And(go(f.left), go(f.right))
            bounds = tuple(hom_apply(h, b) for h, b in zip(rows[f.component], f.bounds))
            return Diamond(f.component, f.label, bounds, go(f.body))
    elif stage == "nest":
        rd.sig_nest(sig)  # precondition check

        def go(f):
            if isinstance(f, Top):
                return f
            if isinstance(f, And):
                return And(go(f.left), go(f.right))
            return Diamond(0, rd.fused_label(f.component, f.label), f.bounds, go(f.body))
    elif stage == "flatten":
        rd.sig_flatten(sig)  # precondition check
        lab = sig.components[0].labels[0]

        def go(f):
            if isinstance(f, Top):
                return f
            if isinstance(f, And):
                return And(go(f.left), go(f.right))
            out = go(f.body)
            for m in reversed(f.bounds):
                out = Diamond(0, lab, (m,), out)
            return out
    else:
        raise ValueError(f"unknown stage {stage!r}")
    return go(phi)


def translate_to_wts(sig: Signature, phi: Formula) -> tuple[Formula, Signature]:
    """Composite translation mirroring the to_wts stage plan."""
    cur = sig
    for stage in rd.plan_wts_stages(sig):
        phi = translate(stage, cur, phi)
        cur = rd.SIG_FUNCS[stage](cur)
    return check_formula(phi, cur), cur


# --- bounded logical equivalence --------------------------------------------

def realizable_grid(s: Futs) -> dict[tuple[int, int], list[Weight]]:
    """Per (component, level): all subset sums of entry weights.

    Thresholds strictly between these sums cannot change any satisfaction
    value under the natural order, so this grid is what the bounded
    equivalence oracle draws diamond bounds from.  The empty-subset sum
    (the monoid zero) is included: a zero bound at an inner level leaves
    that level unconstrained, which is needed to tell apart, e.g., the
    zero behaviour from one giving mass to the zero inner function.
    """
    buckets: dict[tuple[int, int], dict[str, Weight]] = {}

    def visit(i: int, level: int, term: Node, monoids):
        m = monoids[level]
        weights = [w for _, w in term.entries]
        sums = buckets.setdefault((i, level), {})
        for r in range(1, len(weights) + 1):
            for combo in itertools.combinations(weights, r):
                total = add_all(m, combo)
                if not is_zero(m, total):
                    sums.setdefault(weight_key(m, total), total)
        for k, _ in term.entries:
            if isinstance(k, Node):
                visit(i, level + 1, k, monoids)

    for (i, _x, _a), term in s.trans.items():
        visit(i, 0, term, s.sig.components[i].monoids)

    grid: dict[tuple[int, int], list[Weight]] = {}
    for i, comp in enumerate(s.sig.components):
        for j, m in enumerate(comp.monoids):
            found = buckets.get((i, j), {})
            grid[(i, j)] = [zero(m)] + [found[k] for k in sorted(found)]
    return grid


def _oracle(s: Futs, depth: Optional[int], grid: Optional[dict]):
    """Level-wise refinement by satisfaction profiles.

    Returns the final partition, the accumulated distinguishing formulas,
    and the evaluator that knows all their satisfaction sets.
    """
    if depth is None:
        depth = len(s.states)
    if grid is None:
        grid = realizable_grid(s)
    for i, comp in enumerate(s.sig.components):
        for j in range(comp.depth):
            if not grid.get((i, j)):
                raise ValueError(f"empty bound grid for component {i}, level {j}")
    part = Partition.single(s.states)
    ev = Evaluator(s)
    distinguishers: list[Formula] = []
    if depth == 0 or len(s.states) <= 1:
        return part, distinguishers, ev
    known = set()
    for _level in range(depth):
        bodies: list[Formula] = []
        seen_sets = set()
        for block in part.blocks:
            chi = conj(f for f in distinguishers if block[0] in ev.sat(f))
            key = ev.sat(chi)
            if key not in seen_sets:
                seen_sets.add(key)
                bodies.append(chi)
        candidates: list[Formula] = []
        for i, comp in enumerate(s.sig.components):
            # a zero outermost bound makes the diamond a tautology; skip those
            vectors = [v for v in itertools.product(
                *(grid[(i, j)] for j in range(comp.depth)))
                if not is_zero(comp.monoids[0], v[0])]
            for a in comp.labels:
                for vec in vectors:
                    for chi in bodies:
                        candidates.append(Diamond(i, a, vec, chi))
        useful = []
        for f in candidates:
            sat = ev.sat(f)
            if sat and len(sat) < len(s.states):
                useful.append(f)
        refined = part.refine_by(lambda x: tuple(x in ev.sat(f) for f in useful))
        for f in useful:
            if f not in known:
                known.add(f)
                distinguishers.append(f)
        if refined == part:
            break
        part = refined
        if len(part.blocks) == len(s.states):
            break
    return part, distinguishers, ev


def bounded_logical_equiv(s: Futs, depth: Optional[int] = None,
                          grid: Optional[dict] = None) -> Partition:
    """Partition states by agreement on a level-wise formula family.

    At each level, candidate diamonds combine every label, every bound
    vector drawn from the grid, and one characteristic conjunction per
    current block; states are split by their satisfaction profile.  With
    the default depth (the carrier size) and default grid this coincides
    with bisimilarity on positive cancellative monoids.
    """
    part, _, _ = _oracle(s, depth, grid)
    return part


def witness_formula(s: Futs, x: str, y: str,
                    depth: Optional[int] = None) -> Optional[Formula]:
    """A formula from the bounded family separating two states, if any.

    Unlike distinguishing_formula this makes no completeness claim: the
    result is verified by evaluation, but None only means the bounded
    family does not separate the states, which outside cancellative
    monoids can happen for non-bisimilar pairs.
    """
    part, distinguishers, ev = _oracle(s, depth, None)
    if part.same_block(x, y):
        return None
    for f in distinguishers:
        if (x in ev.sat(f)) != (y in ev.sat(f)):
            return _shrink_witness(ev, f, x, y)
    raise RuntimeError("separated states without a separating formula")


def _conjuncts(phi: Formula) -> list[Formula]:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [] if isinstance(phi, Top) else [phi]


def _shrink_witness(ev: Evaluator, phi: Formula, x: str, y: str) -> Formula:
    """Greedily simplify subformulas while the whole formula still
    separates the two states; keeps reported witnesses readable."""

    def separates(f: Formula) -> bool:
        return (x in ev.sat(f)) != (y in ev.sat(f))

    def attempt(f: Formula, rebuild):
        if isinstance(f, Diamond) and not isinstance(f.body, Top):
            cand = rebuild(Diamond(f.component, f.label, f.bounds, TOP))
            if separates(cand):
                return cand
            parts = _conjuncts(f.body)
            if len(parts) > 1:
                for i in range(len(parts)):
                    smaller = conj(parts[:i] + parts[i + 1:])
                    cand = rebuild(Diamond(f.component, f.label, f.bounds, smaller))
                    if separates(cand):
                        return cand
            return attempt(f.body,
                           lambda g: rebuild(Diamond(f.component, f.label, f.bounds, g)))
        if isinstance(f, And):
            found = attempt(f.left, lambda g: rebuild(And(g, f.right)))
            if found is not None:
                return found
            return attempt(f.right, lambda g: rebuild(And(f.left, g)))
        return None

    while True:
        smaller = attempt(phi, lambda g: g)
        if smaller is None:
            return phi
        phi = smaller


def distinguishing_formula(s: Futs, x: str, y: str) -> Optional[Formula]:
    """A formula holding at exactly one of two states, or None if bisimilar.

    Restricted to simple systems over a positive cancellative monoid, where
    the bounded-equivalence family is guaranteed to separate non-bisimilar
    states; the returned bound is the satisfied side's own class sum.
    """
    if not s.sig.is_simple:
        raise ValueError("distinguishing_formula needs a simple system")
    comp = s.sig.components[0]
    m = comp.monoids[0]
    if not (positive(m) and cancellative(m)):
        raise ValueError("distinguishing_formula needs a positive cancellative monoid")
    for state in (x, y):
        if state not in set(s.states):
            raise ValueError(f"unknown state {state!r}")
    if largest_bisimulation(s).same_block(x, y):
        return None

    grid = realizable_grid(s)
    ev = Evaluator(s)
    part = Partition.single(s.states)
    distinguishers: list[Formula] = []
    for _level in range(len(s.states) + 1):
        bodies: list[Formula] = []
        seen_sets = set()
        for block in part.blocks:
            chi = conj(f for f in distinguishers if block[0] in ev.sat(f))
            key = ev.sat(chi)
            if key not in seen_sets:
                seen_sets.add(key)
                bodies.append(chi)
        found = _split_formula(s, ev, x, y, bodies)
        if found is not None:
            return found
        candidates = [Diamond(0, a, (b,), chi)
                      for a in comp.labels
                      for b in grid[(0, 0)] if not is_zero(m, b)
                      for chi in bodies]
        useful = [f for f in candidates
                  if ev.sat(f) and len(ev.sat(f)) < len(s.states)]
        refined = part.refine_by(lambda z: tuple(z in ev.sat(f) for f in useful))
        distinguishers.extend(f for f in useful if f not in distinguishers)
        if refined == part:
            break
        part = refined
    raise RuntimeError(
        f"states {x!r} and {y!r} are not bisimilar but no distinguishing formula "
        f"was found; the bounded family is incomplete here")


def _split_formula(s: Futs, ev: Evaluator, x: str, y: str, bodies) -> Optional[Formula]:
    """Scan (label, body) pairs for differing class sums over the body's
    satisfaction set; the larger (or incomparable own) sum is the bound."""
    comp = s.sig.components[0]
    m = comp.monoids[0]
    for a in comp.labels:
        tx = s.transition(0, x, a)
        ty = s.transition(0, y, a)
        for chi in bodies:
            target = ev.sat(chi)
            sum_x = add_all(m, (w for k, w in tx.entries if k.state in target))
            sum_y = add_all(m, (w for k, w in ty.entries if k.state in target))
            if sum_x == sum_y:
                continue
            bound = sum_x if not nat_leq(m, sum_x, sum_y) else sum_y
            f = Diamond(0, a, (bound,), chi)
            if ev.holds(x, f) != ev.holds(y, f):
                return f
    return None
