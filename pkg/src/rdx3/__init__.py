"""rdx3: certificates, energy functionals and simulation for three-component
reaction-diffusion systems with polynomial nonlinearities."""

from .checker import (
    ConditionReport,
    IwscWeights,
    NonlinearityTriple,
    SamplerConfig,
    Verdict,
    check_all,
)
from .lyapunov import (
    DiffusionTriple,
    HpSpec,
    TheoremParams,
    build_energy,
    compute_p,
    find_theta_sigma,
    theorem_params,
    theta_sigma_feasible,
)
from .models import InteractionMatrix, ModelSpec, build_preset, preset_names
from .poly import Poly3, affine_weight, dominates
from .sim import BoundarySpec, DomainGrid, SimConfig, SpeciesBC, run

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec",
    "ConditionReport",
    "DiffusionTriple",
    "DomainGrid",
    "HpSpec",
    "InteractionMatrix",
    "IwscWeights",
    "ModelSpec",
    "NonlinearityTriple",
    "Poly3",
    "SamplerConfig",
    "SimConfig",
    "SpeciesBC",
    "TheoremParams",
    "Verdict",
    "affine_weight",
    "build_energy",
    "build_preset",
    "check_all",
    "compute_p",
    "dominates",
    "find_theta_sigma",
    "preset_names",
    "run",
    "theorem_params",
    "theta_sigma_feasible",
]
