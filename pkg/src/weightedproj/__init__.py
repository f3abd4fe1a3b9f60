"""Topology and Hamiltonian dynamics on weighted projective spaces CP^n(q)."""

__version__ = "0.1.0"

from .cohomology import CohomologyRing, complex_profile, l_value, real_profile, structure_constant  # noqa: E402
from .core import (  # noqa: E402
    ArgumentError,
    DomainError,
    WeightVector,
    circle_action,
    moment_map,
    normalize_to_sphere,
    orbifold_group_order,
    orbit_distance,
    weighted_scalar_action,
)
from .flow import detect_fixed_point, find_fixed_points, integrate, quadratic_fixed_points, time_one_map  # noqa: E402
from .hamiltonians import InvariantMonomial, LiftedHamiltonian, hamiltonian_bound, lift, quadratic  # noqa: E402
from .spectrum import counting_certificate, eigenvalues_in, minimax_bounds, mu  # noqa: E402
from .variational import FourierLoop, enumerate_solutions, gradient_phi, phi, solve_critical  # noqa: E402

__all__ = [
    "ArgumentError",
    "CohomologyRing",
    "DomainError",
    "FourierLoop",
    "InvariantMonomial",
    "LiftedHamiltonian",
    "WeightVector",
    "circle_action",
    "complex_profile",
    "counting_certificate",
    "detect_fixed_point",
    "eigenvalues_in",
    "enumerate_solutions",
    "find_fixed_points",
    "gradient_phi",
    "hamiltonian_bound",
    "integrate",
    "l_value",
    "lift",
    "minimax_bounds",
    "moment_map",
    "mu",
    "normalize_to_sphere",
    "orbifold_group_order",
    "orbit_distance",
    "phi",
    "quadratic",
    "quadratic_fixed_points",
    "real_profile",
    "solve_critical",
    "structure_constant",
    "time_one_map",
    "weighted_scalar_action",
]
