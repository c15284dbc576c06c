"""Scattering matrix, Weyl-Titchmarsh function and pole analysis for
Schroedinger operators on the line with a nonlocal point interaction."""
from .errors import *  # noqa: F401,F403
from .innerfunc import BlaschkePow, One, Shift, eval_inner, psi_ratio, psi_star_exp
from .model import (INF, EvenBox, Model, NumericPair, OddBox, PairFn, PolyExp, Region, Zero,
                    boundary_jump, boundary_mean, model_from_json, model_to_json, region_of,
                    y_transform)
from .poles import (PoleClass, PoleConfig, PoleReport, SearchRect, classify_pole, count_zeros_rect,
                    find_poles, region_consistency, residue)
from .quad import QuadConfig, complex_derivative, integrate_finite, integrate_halfline
from .smatrix import (RTCoeffs, SMat2, rt_coefficients, s_matrix, s_matrix_closed, s_matrix_rt,
                      singular_values)
from .spectral import (c_coeff, eigenfunction_u, free_resolvent, krein_resolvent, weyl_titchmarsh,
                       weyl_titchmarsh_deriv)

__version__ = "0.1.0"
