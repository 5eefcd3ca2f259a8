"""Inverse problem for hard-core Gibbs point processes."""

from ._gibbsinv import (
    Error,
    Inadmissible,
    NoConvergence,
    NonPhysical,
    RadialFunction,
    SmallnessGuard,
    exact_ring_density,
    exact_rod_density,
    forward,
    g_to_phi,
    integrate_ursell_a,
    packing_norm,
    phi_to_g,
    pure_hard_core,
    simulate,
    solve,
    ursell_direct,
    ursell_recurrence,
)

__all__ = [
    "Error",
    "Inadmissible",
    "NoConvergence",
    "NonPhysical",
    "RadialFunction",
    "SmallnessGuard",
    "exact_ring_density",
    "exact_rod_density",
    "forward",
    "g_to_phi",
    "integrate_ursell_a",
    "packing_norm",
    "phi_to_g",
    "pure_hard_core",
    "simulate",
    "solve",
    "ursell_direct",
    "ursell_recurrence",
]
