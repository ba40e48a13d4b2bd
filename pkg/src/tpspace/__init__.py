"""Finite-dimensional transition probability spaces and the structures built on them."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .core import (
    PureStateSpace,
    Ray,
    TransitionKernel,
    check_tps_axioms,
    kernel_from_points,
    sectors,
    transition_probability,
)
from .cstar import (
    ComplexObservable,
    StateFunctional,
    check_cstar_axioms,
    cstar_product,
    mtp_infimum_check,
    opposite_product,
    pure_state_roundtrip,
    state_eval,
    tp_from_state_norm,
)
from .errors import (
    ChartError,
    EmptyKernelError,
    InputError,
    IntegrationError,
    PreconditionError,
    ReducibleBlockError,
    StructuralError,
    TPSError,
)
from .lattice import SubspaceElement, basis_check, join, meet, orthoplement, sasaki_project
from .poisson import chart_bracket, hamiltonian_flow, lie_bracket, poisson_bracket
from .reconstruct import ReconstructionConfig, reconstruct, reconstruct_sector
from .reports import CheckRecord, Report
from .spectral import ObservableFunction, jordan, spectral_resolution, square

__all__ = [
    "BACKEND", "ChartError", "CheckRecord", "ComplexObservable", "EmptyKernelError",
    "InputError", "IntegrationError", "ObservableFunction", "PreconditionError",
    "PureStateSpace", "Ray", "ReconstructionConfig", "ReducibleBlockError", "Report",
    "StateFunctional", "StructuralError", "SubspaceElement", "TPSError", "TransitionKernel",
    "basis_check", "chart_bracket", "check_cstar_axioms", "check_tps_axioms", "cstar_product",
    "hamiltonian_flow", "join", "jordan", "kernel_from_points", "lie_bracket", "meet",
    "mtp_infimum_check", "opposite_product", "orthoplement", "poisson_bracket",
    "pure_state_roundtrip", "reconstruct", "reconstruct_sector", "sasaki_project", "sectors",
    "spectral_resolution", "square", "state_eval", "tp_from_state_norm", "transition_probability",
]
