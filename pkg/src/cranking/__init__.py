"""Cranked harmonic oscillator: spectra, quasi-boson transform and exceptional points."""

from .model import (
    CouplingSet,
    EigenmodePair,
    ModelParams,
    build_dynamical_matrix,
    build_quadratic_form,
    eigenmodes,
    instability_interval,
    map_couplings,
    quadratic_form_from_couplings,
    routhian_energy,
)
from .bogoliubov import (
    TransformPair,
    build_transform,
    check_bosonic,
    commutator_matrix,
    left_from_right,
    quantum_form_matrix,
    verify_normalization,
)
from .ep_analysis import (
    alignment_measure,
    coalescence_overlap,
    diabolic_check,
    encircle_ep,
    locate_eps,
    scaling_exponent,
)
from .dynamics import evolve, evolve_rk4, growth_rate, propagator

__version__ = "0.1.0"
