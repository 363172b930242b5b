"""Numerical toolkit for two-weight Hankel operators on weighted Bergman spaces of the disc."""

from .errors import (BergmanError, ConvergenceError, DomainError, LatticeError, NumericalError,
                     PreconditionError, ResourceError, ToleranceError, TruncationError)
from .weights import (ExponentConfig, RadialWeight, WeightClassReport, ap_constant, classify,
                      parse_weight, power, powerlog, exponential, weight_W)
from .geometry import (BergmanDisc, Lattice, PartitionOfUnity, bergman_disc, beta_metric,
                       generate_lattice, partition_of_unity, pseudo_disc)
from .quadrature import DiscRule, disc_integral, disc_rule, lq_mean, radial_integral, unit_disc_rule
from .kernel import (AnalyticPoly, KernelSeries, SymbolField, atomic_function, hankel_apply,
                     kernel_deriv_norm_proxy, kernel_eval, kernel_norm, kernel_series, project)
from .symbols import parse_symbol
from .dbar import dbar_solve
from .carleson import (DiscMeasure, carleson_lp_norm, carleson_ratio, carleson_sup,
                       embedding_norm_estimate, vanishing_profile)
from .bda import (BdaProblem, Decomposition, bda_value, bda_weighted, criterion_pq, criterion_qp,
                  decompose, g_stability, m_r)

__version__ = "0.1.0"
