"""Shared fixtures: worked systems, a signature-spanning corpus, and
seeded random system/formula generators."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest

from futs.logic import TOP, And, Diamond, Formula
from futs.monoid import (
    BOOL_OR,
    NAT_PLUS,
    RAT_PLUS,
    BoolOr,
    Monoid,
    NatMax,
    NatPlus,
    Power,
    Product,
    RatPlus,
    check_weight,
    zero,
)
from futs.system import Component, Futs, Signature, validate
from futs.textio import parse_system
from futs.weightfn import Leaf, node

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load(name: str) -> Futs:
    return parse_system((DATA / name).read_text())


@pytest.fixture(scope="session")
def fig1() -> Futs:
    return load("fig1.futs")


@pytest.fixture(scope="session")
def w3() -> Futs:
    return load("w3.futs")


@pytest.fixture(scope="session")
def absence_pair() -> Futs:
    """One boolean system holding both processes of the negative control:
    p0 offers a to both a b-capable and a deadlocked state, q0 only to a
    b-capable one.  Not bisimilar, but conjunction-only logic cannot tell
    them apart (it cannot express the absence of the b step)."""
    return parse_system(
        "futs\n"
        "labels A0 = { a, b }\n"
        "monoids M0 = [ bool-or ]\n"
        "states { p0, p1, pd, q0, q1 }\n"
        "trans 0 p0 a -> { p1: tt, pd: tt }\n"
        "trans 0 p1 b -> { pd: tt }\n"
        "trans 0 q0 a -> { q1: tt }\n"
        "trans 0 q1 b -> { pd: tt }\n"
    )


# --- seeded random generation -------------------------------------------------


def random_weight(rng: random.Random, m: Monoid, nonzero: bool = False):
    if isinstance(m, BoolOr):
        w = True if nonzero else rng.random() < 0.7
    elif isinstance(m, (NatPlus, NatMax)):
        w = rng.randint(1 if nonzero else 0, 3)
    elif isinstance(m, RatPlus):
        w = Fraction(rng.randint(1 if nonzero else 0, 4), rng.randint(1, 3))
    elif isinstance(m, Product):
        while True:
            w = tuple(random_weight(rng, f) for f in m.factors)
            if not nonzero or w != zero(m):
                break
    elif isinstance(m, Power):
        while True:
            w = tuple((lab, random_weight(rng, m.base, nonzero=True))
                      for lab in m.labels if rng.random() < 0.5)
            if not nonzero or w:
                break
    else:
        raise TypeError(m)
    return check_weight(m, w)


def random_term(rng: random.Random, stack, states, max_entries: int = 3):
    if not stack:
        return Leaf(rng.choice(states))
    entries = []
    for _ in range(rng.randint(0, max_entries)):
        entries.append((random_term(rng, stack[1:], states, max_entries),
                        random_weight(rng, stack[0], nonzero=True)))
    return node(stack, entries)


def random_futs(rng: random.Random, sig: Signature, n_states: int,
                density: float = 0.8) -> Futs:
    states = [f"q{k}" for k in range(n_states)]
    trans = {}
    for i, comp in enumerate(sig.components):
        for x in states:
            for a in comp.labels:
                if rng.random() < density:
                    trans[(i, x, a)] = random_term(rng, comp.monoids, states)
    s = Futs(sig, states, trans)
    assert not validate(s)
    return s


WLTS_NAT = Signature((Component(("a", "b"), (NAT_PLUS,)),))
WLTS_RAT = Signature((Component(("a",), (RAT_PLUS,)),))
WLTS_PROD = Signature((Component(("a", "b"), (Product((NAT_PLUS, RAT_PLUS)),)),))
ULTRAS_RAT = Signature((Component(("a", "b"), (BOOL_OR, RAT_PLUS)),))
NESTED3 = Signature((Component(("a", "b"), (NAT_PLUS, BOOL_OR, RAT_PLUS)),))
TWO_COMP = Signature((
    Component(("a",), (NAT_PLUS,)),
    Component(("b", "c"), (BOOL_OR, NAT_PLUS)),
))
TWO_COMP_CANC = Signature((
    Component(("a",), (NAT_PLUS,)),
    Component(("b",), (RAT_PLUS, NAT_PLUS)),
))
NESTED2_CANC = Signature((Component(("a",), (RAT_PLUS, NAT_PLUS)),))


def corpus_systems() -> list[Futs]:
    """>= 30 systems with <= 5 states spanning the signature classes
    (WLTS, ULTraS, two-component FuTS, three-level nested FuTS) over
    bool-or / nat-plus / rat-plus / products."""
    out = [load("fig1.futs"), load("w3.futs")]
    out.append(parse_system(
        "futs\nlabels A0 = { a }\nmonoids M0 = [ bool-or ]\n"
        "states { p, q }\ntrans 0 p a -> { p: tt }\ntrans 0 q a -> { q: tt }\n"))
    out.append(parse_system(  # all-deadlock system
        "futs\nlabels A0 = { a }\nmonoids M0 = [ nat-plus ]\nstates { u, v }\n"))
    rng = random.Random(20240521)
    menu = [
        (WLTS_NAT, 4), (WLTS_RAT, 3), (WLTS_PROD, 4),
        (ULTRAS_RAT, 4), (NESTED3, 3), (TWO_COMP, 4),
        (WLTS_NAT, 5), (ULTRAS_RAT, 5), (TWO_COMP, 3), (NESTED3, 4),
    ]
    for k in range(3):
        for sig, n in menu:
            out.append(random_futs(rng, sig, n - (k % 2)))
    return out


def cancellative_corpus(count: int = 100) -> list[Futs]:
    rng = random.Random(987654)
    menu = [WLTS_NAT, WLTS_RAT, WLTS_PROD, NESTED2_CANC, TWO_COMP_CANC]
    out = []
    while len(out) < count:
        sig = menu[len(out) % len(menu)]
        out.append(random_futs(rng, sig, rng.randint(2, 5)))
    return out


def random_formula(rng: random.Random, sig: Signature, depth: int) -> Formula:
    roll = rng.random()
    if depth == 0 or roll < 0.2:
        return TOP
    if roll < 0.4:
        return And(random_formula(rng, sig, depth - 1),
                   random_formula(rng, sig, depth - 1))
    i = rng.randrange(len(sig.components))
    comp = sig.components[i]
    a = rng.choice(comp.labels)
    bounds = tuple(random_weight(rng, m) for m in comp.monoids)
    return Diamond(i, a, bounds, random_formula(rng, sig, depth - 1))
