"""Conditional density estimators and standardization."""

from .maf import MAF, made_degrees, made_masks
from .mdn import MDN
from .mog import MoGDist, single_gaussian_mog
from .standardize import Standardizer, standardize_fit

__all__ = [
    "MAF",
    "MDN",
    "MoGDist",
    "Standardizer",
    "made_degrees",
    "made_masks",
    "single_gaussian_mog",
    "standardize_fit",
]
