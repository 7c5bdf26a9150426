"""Augmentations computed directly on DCT coefficients."""

from .geometric import cutout, flip, rotate, rotate90, shear, translate
from .photometric import (
    auto_contrast,
    auto_saturation,
    brightness,
    chroma_drop,
    color,
    contrast,
    equalize,
    freq_enhance,
    grayscale,
    invert,
    midfreq_aug,
    midfreq_gain,
    posterize,
    sharpness,
    sharpness_gain,
    solarize,
    solarize_add,
)
from .policy import (
    DCT_OPS,
    JPEG_S_SUBSET,
    JPEG_TI_SUBSET,
    MAGNITUDE_MAP,
    RGB_SUBSET,
    AugmentPolicy,
    apply_plan,
    apply_policy,
    canonical_name,
    sample_plan,
)
from .resize import legal_crop_sizes, random_resized_crop, resize
