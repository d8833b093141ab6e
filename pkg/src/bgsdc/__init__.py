"""Arbitrary-order charged-particle tracking built on the Boris method.

The package provides plain Boris integrators, a collocation formulation
of the Lorentz-force equations of motion on Gauss-Lobatto nodes, and an
accelerated solver that combines one nonlinear Boris sweep, a few GMRES
iterations on a field-frozen linearization and Picard corrections.
"""

from .collocation import CollocationTables, NodeSet, lobatto_nodes
from .driver import (
    MethodConfig,
    RunRecord,
    WorkCounter,
    bgsdc_step,
    boris_sdc_step,
    predicted_work_parallel,
    predicted_work_serial,
    run_trajectory,
)
from .fields import (
    FieldModel,
    MirrorField,
    MirrorParams,
    SolovevField,
    SolovevParams,
    UniformField,
)
from .integrators import (
    ParticleState,
    StaggeredState,
    boris_rotation_solve,
    boris_trick,
    gyro_analytic,
    step_nonstaggered,
    step_staggered,
)

__all__ = [
    "CollocationTables",
    "NodeSet",
    "lobatto_nodes",
    "MethodConfig",
    "RunRecord",
    "WorkCounter",
    "bgsdc_step",
    "boris_sdc_step",
    "predicted_work_parallel",
    "predicted_work_serial",
    "run_trajectory",
    "FieldModel",
    "MirrorField",
    "MirrorParams",
    "SolovevField",
    "SolovevParams",
    "UniformField",
    "ParticleState",
    "StaggeredState",
    "boris_rotation_solve",
    "boris_trick",
    "gyro_analytic",
    "step_nonstaggered",
    "step_staggered",
]

__version__ = "0.1.0"
