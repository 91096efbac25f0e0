"""Numerical verification toolkit for special flows over irrational
rotations with logarithmic singularities: exact continued-fraction orbit
queries, Birkhoff-sum estimates, shearing diagnostics and Mobius
orthogonality statistics."""

from .contfrac import (ContinuedFraction, DiophantineReport, OstrowskiDigits,
                       cf_expand, check_diophantine, construct_alpha_in_D,
                       dist_qn_alpha, ostrowski_decode, ostrowski_encode)
from .orbit import (CirclePoint, ClosestReturn, closest_return, dist_to_int,
                    forward_backward_classify, good_set_membership,
                    sigma_membership, spacing_check)
from .roof import ConstantRoof, CosProbe, RoofSpec, TruncatedRoof, \
    shear_coefficient
from .birkhoff import (LemmaReport, birkhoff_sum, denjoy_koksma_check,
                       resonant_decomposition, verify_f_bound,
                       verify_fprime_far, verify_fprime_goodscale,
                       verify_higher_derivatives, verify_special_times)
from .specialflow import FlowPoint, evolve, hit_count, verify_hit_linearity, \
    verify_rescaling
from .shear import (DriftSeries, GoodTriple, StepFunction,
                    almost_linear_check, classify_case, combinatorial_search,
                    drift_sequence, splitting_time)
from .sl2 import Mat2, chi_eval, drift_quadratic_check, local_coords, \
    renorm_residual
from .mobius import (BandObservable, MobiusTable, kbsz_sum, mertens,
                     mobius_sieve, orthogonality_sum, usic_statistic)

__version__ = "0.1.0"
