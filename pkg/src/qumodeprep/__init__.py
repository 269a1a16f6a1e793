"""Variational state preparation on a qubit-coupled bosonic mode, with an optimizer benchmark."""

from .ansatz import AnsatzConfig, LayerParams, apply_ansatz, rotation_gate, vp_gate
from .bench import ExperimentConfig, TrialResult, run_cell, run_sweep, run_trial
from .fock import FockCutoff, annihilation, expm_anti_hermitian, kron, partial_trace_qubit
from .objective import Objective, ObjectiveConfig, evaluate, fidelity, objective_from_p0, swap_test_p0
from .optimizers import OptimizerSpec, OptResult, minimize
from .targets import TargetSpec
from .wigner import WignerGrid, export_grid, wigner

__version__ = "0.1.0"

__all__ = [
    "AnsatzConfig",
    "LayerParams",
    "apply_ansatz",
    "rotation_gate",
    "vp_gate",
    "ExperimentConfig",
    "TrialResult",
    "run_cell",
    "run_sweep",
    "run_trial",
    "FockCutoff",
    "annihilation",
    "expm_anti_hermitian",
    "kron",
    "partial_trace_qubit",
    "Objective",
    "ObjectiveConfig",
    "evaluate",
    "fidelity",
    "objective_from_p0",
    "swap_test_p0",
    "OptimizerSpec",
    "OptResult",
    "minimize",
    "TargetSpec",
    "WignerGrid",
    "export_grid",
    "wigner",
]
