"""Certified lower bounds on local volume ratios for Lie group representations.

Structure computations live in :mod:`deleeuw.lie` and :mod:`deleeuw.reps`,
bounds in :mod:`deleeuw.bounds`, Monte Carlo estimates in
:mod:`deleeuw.oracle` and :mod:`deleeuw.neighborhoods`.
"""

from .errors import *  # noqa: F401,F403
from .lie import (LieAlgebra, Subspace, bracket, derived_series, direct_sum, generic_rank,
                  is_solvable, is_unimodular, jacobi_defect, killing_form, max_nilpotent_orbit_dim,
                  quotient_algebra, radical, subalgebra)
from .reps import (Character, Representation, WeightDecomposition, adjoint_representation,
                   determinant_character, induced_quotient_rep, invariance_leakage, operator_norm_sup,
                   rescale_det_one, twist_by_character, weight_decomposition)
from .bounds import (BoundCertificate, c_lower, certify, character_shift_bound, full_pipeline,
                     radical_root_product_bound, reduction_compose, rescaled_split_bound,
                     semisimple_bound, solvable_bound, trivial_bound)
from .neighborhoods import (Ball, Box, LogProduct, NeighborhoodSpec, OrbitCapped, SplitChain,
                            exact_log_product_volume, parse_family)
from .oracle import (McEstimate, group_level_delta, mc_delta, mc_volume, orbit_capped_delta,
                     shrink_set_delta)

__version__ = "0.1.0"
