"""Potential-theoretic estimators of the spectral value of semigroups of the unit disk."""

from .disk import (
    BranchCutError,
    DomainError,
    automorphism,
    green_disk,
    hyperbolic_distance,
    koebe,
    koebe_hyperbolic_distance,
    koebe_inverse,
    pseudo_hyperbolic,
    sigma,
)
from .models import CATALOG, ConditioningError, KoenigsModel, ModelKind, classify, custom_model, get_model, phi
from .sets import Annulus, Disk, Polygon, PolarSetError, Segment, parse_set

__version__ = "0.1.0"
