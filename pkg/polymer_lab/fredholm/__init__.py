"""
Fredholm determinants: the semi-discrete Laplace transform, its rescaled
and crossover kernels, and the Tracy-Widom GUE distribution.
"""

from .contours import Contour, circle, gauss_legendre_panels, graded_line, rays, vertical
from .kernels import (
    FredholmResult,
    KernelParams,
    compute_u,
    critical_point,
    det_identity_plus,
    f_gue_via_crossover,
    fredholm_det,
    g_derivatives,
    g_function,
    kernel_Ku,
    kernel_limit,
    kernel_rescaled,
    laplace_oracle_single,
    laplace_oy,
    laplace_rescaled,
    rescaled_params,
)
from .special import airy, digamma, log_gamma, polygamma
from .tracy_widom import airy_kernel, default_grid, tracy_widom_gue, tw_mean, tw_moments, tw_table
