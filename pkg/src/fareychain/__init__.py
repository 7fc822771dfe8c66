"""Exact finite-size computations for the Farey fraction spin chain."""

from ._config import DEFAULT_K_MAX, SizeCapError, k_max, set_threads
from .chain_core import (
    SpinConfiguration,
    build_matrix,
    canonical_height,
    constrained_trace,
    grand_height,
    symmetry_action,
    trace_energy,
)
from .numtheory import height_multiplicities, totient_sieve, zeta
from .polymer import (
    cluster_series_interaction,
    disjoint_covers,
    enumerate_polymers,
    constrained_closed_form,
    trace_cover_sum,
    ursell_factor,
)
from .thermo import (
    conditional_expectation,
    event_probability_sum,
    free_energy_bounds,
    internal_energy,
    mean_square_magnetization,
    pair_correlation,
    partition_function,
)
from .walsh import forward_transform, interaction_coefficients, trace_transform

__version__ = "0.1.0"
