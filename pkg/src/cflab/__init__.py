"""Correlation-filter tracking lab.

Update strategies for discriminative correlation filters (spatial, frequency,
dual-coefficient, feature-first, fractional and direct ratio), kernel
correlation over cyclic shifts, scalar simulations of the update rules and an
OTB-style benchmark harness.
"""

from .errors import (
    CflabError,
    DataError,
    DimensionError,
    InvalidInputError,
    NumericalConsistencyError,
    SingularDenominatorError,
)
from .kernels import KernelSpec, detect_response, gaussian_autocorr_factorization, kernel_correlation, train_alpha
from .spectral import cyclic_shift, fft2, gaussian_label, hann_window, ifft2
from .tracker import BoundingBox, TrackerConfig, TrackerState, extract_features, init_tracker, track_step
from .updates import (
    STRATEGIES,
    DualModel,
    FrequencyTemplate,
    RatioModel,
    SpatialTemplate,
    robustness,
    robustness_closed_forms,
    update_direct_ratio,
    update_dual,
    update_fractional,
    update_frequency,
    update_spatial,
)

__version__ = "0.1.0"
