"""Dead leaves targets, cross-power MTF, and texture acutance metrics."""

from .acutance import (
    CsfModel,
    ViewingConditions,
    acutance_loss,
    acutance_score,
    csf,
    csf_model,
    csf_quadrature_weights,
    digital_to_angular,
    nyquist_cpd,
    view_angle_deg,
)
from .batchloss import BatchItem, BatchLoss, batch_loss, l1_loss, l2_loss
from .deadleaves import DeadLeavesParams, generate, sample_radius
from .degrade import (
    NoiseSpec,
    Restorer,
    add_awgn,
    gaussian_blur,
    gaussian_kernel1d,
    median_filter,
    reference_denoiser,
    unsharp_mask,
)
from .image import GreyImage, Image, clip01, psnr, to_grey
from .rawpath import (
    RawImage,
    add_poisson_gaussian,
    mosaic_from_rgb,
    pack_rggb,
    raw_acutance,
    raw_to_grey,
    unpack_rggb,
)
from .spectrum import (
    MtfCurve,
    dft2,
    measure_mtf,
    mtf_cross_2d,
    radial_power_spectrum,
    ring_average,
    ring_counts,
)

__version__ = "0.1.0"
