"""Reduced single-scattering map of a heavy particle off a point interaction,
its second-order expansion in the mass ratio, and certification of the
third-order remainder."""
from .scattering import ScatteringParams, s_coeff, s_coeff_taylor
from .states import make_state
from .observables import make_observable
from .rules import make_rules
from .exactmap import full_reduced_map
from .expansion import build_terms

__all__ = ["ScatteringParams", "s_coeff", "s_coeff_taylor", "make_state", "make_observable",
           "make_rules", "full_reduced_map", "build_terms"]
