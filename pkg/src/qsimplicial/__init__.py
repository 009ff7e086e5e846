"""Statevector simulation and training stack for quantum simplicial networks.

Submodules: topology (complexes, Hodge operators), quantum (statevector
engine), qsn (layer compilation and models), training (gradients, Adam,
training loop), datasets (synthetic benchmarks), baselines (GSCN, MLP),
experiments (sweeps, entropy analysis, reports), cli.
"""

from .qsn import LayerVariant, QsnModel, compile_plan, forward, init_model, parameter_count
from .quantum import Axis, init_zero
from .topology import (
    SimplicialComplex2,
    build_incidence,
    build_laplacians,
    harmonic_projector,
    hodge_decompose,
)
from .training import GradientMode, LabeledDataset, TrainConfig

__all__ = [
    "Axis",
    "GradientMode",
    "LabeledDataset",
    "LayerVariant",
    "QsnModel",
    "SimplicialComplex2",
    "TrainConfig",
    "build_incidence",
    "build_laplacians",
    "compile_plan",
    "forward",
    "harmonic_projector",
    "hodge_decompose",
    "init_model",
    "init_zero",
    "parameter_count",
]

__version__ = "0.1.0"
