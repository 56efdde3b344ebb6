"""Twistor constructions over the Bochner-Kahler model space H^l x P^m.

Fiber points kappa = (x, y, L), the embedding maps phi/psi, the complexified
family of fibers with its solver and intersection classification, the flat
model, and a deterministic verification harness.
"""
from .complexification import (
    BalancingProblem,
    IntersectionTag,
    IntersectionType,
    ModuliQuadruple,
    Phi,
    Phi_tensor,
    Psi,
    balancing_solve,
    flag_correspondence,
    flag_to_fiber,
    intersection_predicate,
    intersection_type,
    member,
    member_residual,
    rank_stratum,
    schubert_witness,
    solve_fiber,
    solve_fiber_detailed,
)
from .errors import TwistorError
from .exterior import GradedTensor, plucker_of_subspace, plucker_residual
from .flat import FlatFiberPoint, FlatSection, flat_eval, flat_project
from .harness import Report, SuiteConfig, run_suite
from .indices import IndexSymbol, MultiIndex, normalize, reduced_length
from .kernels import BACKEND as KERNEL_BACKEND
from .linalg import GroupElement, SpacePair, Subspace, transport_to_base
from .sampling import sample_fiber_point, sample_plane, sample_quadruple
from .twistor import FiberPoint, PsiValue, chart_membership, phi_recursive, phi_tensor, psi

__version__ = "0.1.0"

__all__ = [
    "BalancingProblem", "FiberPoint", "FlatFiberPoint", "FlatSection", "GradedTensor",
    "GroupElement", "IndexSymbol", "IntersectionTag", "IntersectionType", "KERNEL_BACKEND",
    "ModuliQuadruple", "MultiIndex", "Phi", "Phi_tensor", "Psi", "PsiValue", "Report",
    "SpacePair", "Subspace", "SuiteConfig", "TwistorError", "balancing_solve",
    "chart_membership", "flag_correspondence", "flag_to_fiber", "flat_eval", "flat_project",
    "intersection_predicate", "intersection_type", "member", "member_residual", "normalize",
    "phi_recursive", "phi_tensor", "plucker_of_subspace", "plucker_residual", "psi",
    "rank_stratum", "reduced_length", "run_suite", "sample_fiber_point", "sample_plane", "sample_quadruple",
    "schubert_witness", "solve_fiber", "solve_fiber_detailed", "transport_to_base",
]
