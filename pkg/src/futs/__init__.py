"""Quantitative transition systems over abelian monoids.

Finite weighted/state-to-function transition systems, strong
bisimulation via partition refinement, bisimulation-coherent reductions
down to single-level weighted transition systems, and a fully abstract
finite-conjunction modal logic with formula translations along the
reductions.
"""

from .bisim import (
    Partition,
    all_partitions,
    ext_related,
    is_bisimulation,
    is_kernel_bisimulation,
    largest_bisimulation,
    quotient_system,
)
from .logic import (
    And,
    Diamond,
    Formula,
    Top,
    bounded_logical_equiv,
    distinguishing_formula,
    sat_set,
    satisfies,
    translate,
    translate_to_wts,
)
from .monoid import (
    BOOL_OR,
    NAT_MAX,
    NAT_PLUS,
    RAT_PLUS,
    Hom,
    Monoid,
    Power,
    Product,
    add,
    cancellative,
    hom_apply,
    monoid_section,
    nat_leq,
    positive,
    power_dirac,
    zero,
)
from .reduce import (
    Reduction,
    extend_bisim,
    flatten,
    homogenize,
    nest,
    plan_wts_stages,
    restrict_bisim,
    tabularize,
    to_wts,
    unlabel,
    verify_reduction,
)
from .system import (
    CarrierMap,
    Component,
    Futs,
    Signature,
    dirac_embed,
    is_homomorphism,
    project_component,
    relabel_weights,
    systems_equal,
    validate,
)
from .textio import ParseError, parse_formula, parse_system, write_formula, write_system
from .weightfn import (
    Leaf,
    Node,
    class_sum,
    leaves,
    node,
    pushforward,
    quotient_term,
    support,
    term_equal,
    zero_term,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
