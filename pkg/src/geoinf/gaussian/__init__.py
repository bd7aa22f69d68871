"""Gaussian-space sets, functionals, semigroup tools, shifting and inequality checkers."""
from .checks import (alt_bound_terms, check_alt_bound, check_gaussian_bks, check_gaussian_talagrand,
                     compare_talagrand_bounds, inverse_bks_check)
from .functionals import (correlated_pair, covariance, exact_noise_var, gaussian_noise_var,
                          geometric_influence, geometric_influence_increasing, geometric_influences,
                          increasing_view, measure, noise_stability, noise_var)
from .intervals import Interval, IntervalUnion, minkowski_content
from .ou import (covariance_identity_check, gaussian_expectation, ou_apply, ou_derivative,
                 ou_derivative_indicator, ou_derivative_indicator_halfline, ou_scales, ou_time_from_rho,
                 pnorm_bound_check, semigroup_noise_identity)
from .sets import (FiberSet, GridSet, HalfSpace, IncreasingSet, Orthant, PredicateSet, SmoothFunction,
                   check_increasing, common_refinement, constant_function, exact_intersection_measure,
                   halfspace, linear, quadrant, random_grid_set, tanh_coordinate, threshold_pair)
from .shifting import ShiftedSet, monotonize, shift

__all__ = [name for name in dir() if not name.startswith("_")]
