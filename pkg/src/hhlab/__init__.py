"""Numerical verification of Hardy-Hilbert type integral and series inequalities
with homogeneous kernels."""
from .constants import ExponentConfig, alternating_series_constant, kernel_constant
from .errors import (ConfigError, DegenerateInput, DivergentDeclared, HHLabError,
                     HypothesisViolated, InvalidEpsilon, InvalidParameter, NonConvergence,
                     NotIntegrable, NotSummable, SingularPoint)
from .functions import TestFunction, TestSequence, cumulative
from .kernels import BUILTIN_IDS, KernelId, KernelSpec, make_kernel
from .quadrature import integrate_halfline, integrate_interval, integrate_quadrant
from .sharpness import asymptotic_quantities, extremal_pair, lemma26_quantities, sharpness_sweep
from .verifier import (VerificationReport, check_hardy_discrete, check_hardy_integral,
                       check_monotonicity, verify_bilinear_discrete, verify_bilinear_integral,
                       verify_equivalent_form_discrete, verify_equivalent_form_integral)

__version__ = "0.1.0"
