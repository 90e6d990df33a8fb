"""Germ algebra, interval-semigroup dynamics, heteroclinic sign invariants and flat periodic points."""
from .fixpoints import FixReport, count_fixed_points
from .flatpoint import (FlatPointCertificate, FlatPointError, construct_one_flat, identity_window,
                        orchestrate_two_flat, seed_attractors)
from .germs import (CancellationError, CancellationResult, commutator, commutator_cancel,
                    decompose_into_flows, next_order_cancel, two_flat_cancel)
from .invariants import (InvariantReport, RepellerAttractorPair, koenigs, power_model_check,
                         repeller_attractor_pairs, sign_condition_report, stability_probe,
                         transition_invariants)
from .jets import (GermFlow, Jet, compose, frac_iterate, invert, is_flat, nonlinearity, schwarzian,
                   vector_field_flow)
from .kernels import BACKEND
from .maps import (IntervalMap, MapError, compose_maps, flatten_at, make_local_diffeo, make_wiggle,
                   realize_germ_locally)
from .semigroup import (Semigroup, Word, WordError, check_blender_criterion, connect_exact, connect_with_germ,
                        empirical_blender_density,
                        find_connecting_word, growth_census, is_generic_point, membership_report,
                        random_word_experiment)

__version__ = "0.1.0"

__all__ = [
    "FixReport",
    "count_fixed_points",
    "FlatPointCertificate",
    "FlatPointError",
    "construct_one_flat",
    "identity_window",
    "orchestrate_two_flat",
    "seed_attractors",
    "CancellationError",
    "CancellationResult",
    "commutator",
    "commutator_cancel",
    "decompose_into_flows",
    "next_order_cancel",
    "two_flat_cancel",
    "InvariantReport",
    "RepellerAttractorPair",
    "koenigs",
    "power_model_check",
    "repeller_attractor_pairs",
    "sign_condition_report",
    "stability_probe",
    "transition_invariants",
    "GermFlow",
    "Jet",
    "compose",
    "frac_iterate",
    "invert",
    "is_flat",
    "nonlinearity",
    "schwarzian",
    "vector_field_flow",
    "BACKEND",
    "IntervalMap",
    "MapError",
    "compose_maps",
    "flatten_at",
    "make_local_diffeo",
    "make_wiggle",
    "realize_germ_locally",
    "Semigroup",
    "Word",
    "WordError",
    "check_blender_criterion",
    "connect_exact",
    "connect_with_germ",
    "empirical_blender_density",
    "find_connecting_word",
    "growth_census",
    "is_generic_point",
    "membership_report",
    "random_word_experiment",
]
