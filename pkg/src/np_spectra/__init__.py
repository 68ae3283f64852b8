"""Spectra of the Neumann-Poincare operator on curves and surfaces of prescribed
Holder regularity, with probes of the kernel estimates that control their decay."""
from .analysis import (DecayFit, ProbeReport, critical_exponent, fit_decay, probe_convolution_bound,
                       probe_holder_difference, probe_kernel_singularity, probe_smoothing,
                       probe_sobolev_seminorm, probe_tangential_derivatives)
from .discretize import (DIAGONAL_LIMIT, ROW_SUM, OperatorMatrix, QuadratureGrid, assemble,
                         assemble_composed, make_grid)
from .estimators import NeumannPoincareSpectrum, PowerLawDecay, RefinementStudy
from .exceptions import (InsufficientDataError, InvalidArgumentError, NPSpectraError,
                         NumericFailureError, SingularPointError, UnsupportedOrderError)
from .geometry import (BoundaryGeometry, RegularityClass, evaluate, make_circle, make_ellipse,
                       make_lacunary_sphere, make_perturbed_sphere, make_weierstrass_curve)
from .kernels import (COMPOSED, NP, NP_STAR, KernelIdentity, diagonal_limit, np_kernel,
                      np_kernel_star, tangential_derivative_L1)
from .spectral import (Spectrum, eigen_spectrum, schatten_partial_sum, singular_spectrum,
                       spectrum, weyl_check)

__version__ = "0.1.0"

__all__ = [
    "BoundaryGeometry", "RegularityClass", "evaluate", "make_circle", "make_ellipse",
    "make_weierstrass_curve", "make_perturbed_sphere", "make_lacunary_sphere",
    "KernelIdentity", "NP", "NP_STAR", "COMPOSED", "np_kernel", "np_kernel_star",
    "diagonal_limit", "tangential_derivative_L1",
    "QuadratureGrid", "OperatorMatrix", "ROW_SUM", "DIAGONAL_LIMIT", "make_grid", "assemble",
    "assemble_composed",
    "Spectrum", "eigen_spectrum", "singular_spectrum", "spectrum", "schatten_partial_sum",
    "weyl_check",
    "DecayFit", "ProbeReport", "critical_exponent", "fit_decay", "probe_convolution_bound",
    "probe_kernel_singularity", "probe_holder_difference", "probe_sobolev_seminorm",
    "probe_tangential_derivatives", "probe_smoothing",
    "NeumannPoincareSpectrum", "RefinementStudy", "PowerLawDecay",
    "NPSpectraError", "InvalidArgumentError", "UnsupportedOrderError", "SingularPointError",
    "InsufficientDataError", "NumericFailureError",
]
