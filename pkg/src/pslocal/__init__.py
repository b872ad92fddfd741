"""Exact-arithmetic toolkit for Bell local polytopes and their post-selected
enlargements under independent detection efficiencies."""

from .core import (
    CGVector,
    CHSH,
    Efficiencies,
    JointTable,
    Scenario,
    is_nonsignaling,
    lift,
    named_correlation,
    postselect,
    rational,
    to_cg,
    to_full,
)
from .inequalities import (
    Inequality,
    ch,
    ch_eta,
    ch_eta_lower,
    cglmp,
    cglmp_eta,
    symmetry_orbit,
    thresholds,
)
from .polytope import (
    PolytopeRep,
    enumerate_facets,
    enumerate_vertices,
    is_ps_local,
    local_polytope,
    membership,
    verify_facet,
)
from .psfacets import (
    Classification,
    DerivedInequality,
    classification_census,
    derive,
    lift_functional,
    ps_facet_check,
    region_classify,
    saturating_witnesses,
    verify_appendix_b,
    verify_decompositions,
)
from .quantum import (
    QubitSetup,
    bell_state_setup,
    circle_max,
    correlation,
    eberhard_scan,
    rationalize,
)

__all__ = [
    "CGVector",
    "CHSH",
    "Classification",
    "DerivedInequality",
    "Efficiencies",
    "Inequality",
    "JointTable",
    "PolytopeRep",
    "QubitSetup",
    "Scenario",
    "bell_state_setup",
    "ch",
    "ch_eta",
    "ch_eta_lower",
    "cglmp",
    "cglmp_eta",
    "circle_max",
    "classification_census",
    "correlation",
    "derive",
    "eberhard_scan",
    "enumerate_facets",
    "enumerate_vertices",
    "is_nonsignaling",
    "is_ps_local",
    "lift",
    "lift_functional",
    "local_polytope",
    "membership",
    "named_correlation",
    "postselect",
    "ps_facet_check",
    "rational",
    "rationalize",
    "region_classify",
    "saturating_witnesses",
    "symmetry_orbit",
    "thresholds",
    "to_cg",
    "to_full",
    "verify_appendix_b",
    "verify_decompositions",
    "verify_facet",
]

__version__ = "0.1.0"
