"""Secure sum-rate toolkit for the K-user Gaussian wiretap MAC.

The receiver decodes integer combinations of lattice codewords; aligning
the codewords at the eavesdropper buys secrecy whose sum rate keeps
scaling with log(SNR).  This package computes those rates, searches
coefficient vectors and cancellation orders, runs a desk-scale scalar
nested-lattice encoder, and verifies the quantizer-entropy bound behind
the secrecy argument.
"""

from .channel import (
    ChannelInstance,
    PowerPolicy,
    draw_gaussian_gains,
    instance_from_spec,
    make_instance,
    secrecy_power_policy,
    snr_db_to_power,
    uniform_power_policy,
)
from .effective_matrix import EffectiveMatrix, effective_matrix, inv_sqrt_spd
from .lattice import (
    CoefficientMatrix,
    brute_force_minima,
    lll_reduce,
    shortest_independent_vectors,
)
from .rates import (
    Permutation,
    RateReport,
    admissible_orders,
    allocate_user_rates,
    computation_rate,
    dof_slope,
    random_coding_baseline,
    rate_report,
    secure_sum_rate,
    sum_comb_lower_bound,
)

__version__ = "0.1.0"
