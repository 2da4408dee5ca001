"""Numerical verification of conformal Hessian equations near isolated singularities."""
from .conformal import (DILATION, INVERSION, MobiusMap, TransformedField, conformal_hessian,
                        invariance_residual, mobius_image, operator_value, transform_jet)
from .errors import (BoundaryError, CfnlError, ConeViolation, ConfigError, DegenerateClosure,
                     DimensionError, DomainError, EstimationError, HypothesisError,
                     IntegrationError, InternalConsistencyError, PositivityError, SingularityError)
from .fields import (AffineField, AnalyticField, BubbleField, JetSample, PowerField,
                     fundamental_solution, linear_perturbed, singular_power)
from .gridcheck import (GridField, discrete_laplacian, superharmonic_check, two_plane_liminf)
from .movingsphere import (SampledDomain, SphereCheckResult, critical_lambda, ms_inequality,
                           ratio_estimate)
from .radial import (RadialProfile, RadialState, close_u2prime, exact_power, exponent_fit,
                     growth_bound, holder_exponent, holder_seminorm, radial_eigs, shoot,
                     xi_diagnostics)
from .symfunc import ConeSpec, f_k, in_gamma_k, sigma, sigma_gradient, sign_table

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
