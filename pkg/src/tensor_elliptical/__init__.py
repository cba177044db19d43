"""Tensor elliptical distributions with Kronecker-separable covariance."""

from .density import (
    Expectation,
    charfun,
    expect_via_mixture,
    logpdf,
    pdf,
    pdf_via_mixture,
    quadform_density,
    quadform_logdensity,
)
from .errors import DomainError, EstimationError, NotAScaleMixtureError, QuadratureError, TEError
from .generators import (
    Cauchy,
    Custom,
    EpsContaminated,
    GeneratorFamily,
    Normal,
    Quartic,
    StudentT,
    WeightingSpec,
    g_eval,
    log_g_eval,
    parse_family,
    psi_eval,
    radial_cdf,
    radial_pdf,
    sphere_cf,
    weighting,
    y_g_solve,
)
from .kron_cov import SeparableCovariance, normalize
from .mle import FitConfig, FitReport, fit, flipflop, joint_loglik, y_g_rescale
from .quadrature import QuadratureConfig
from .sampling import (
    RngStream,
    TEModel,
    affine_transform,
    radial_sample,
    sample_mixture,
    sample_te,
    sphere_sample,
)
from .tensor_core import (
    DataTensor,
    TensorShape,
    linear_index,
    mode_fold,
    mode_multiply,
    mode_unfold,
    unvec,
    vec,
)

__version__ = "0.1.0"
