"""Multilayer Laplacian resizer: a learnable, few-parameter image downscaler."""

from .core import (
    FlopsReport,
    GammaCoeffs,
    MullerParams,
    derive_gamma,
    muller_flops,
    muller_forward,
    muller_forward_linear_form,
    preset,
)
from .filtering import FilterBank, GaussianKernel1D, filter_bank, gaussian_kernel, laplacian_subbands, separable_convolve
from .gradients import GradBuffer, finite_diff_grads, muller_vjp
from .image import ImageStats, image_stats, load_image, save_image
from .resize import ResizeSpec, resize_area, resize_bilinear, resize_bilinear_vjp, resize_nearest

__version__ = "0.1.0"
