"""Impact-force magnetic suturing needle: field model, dynamics, bench tools."""

from .config import RigConfig, build_default, load_config, save_config
from .design import NeedleDesign, ObjectiveConstant, optimal_magnet_length
from .dynamics import (ActuationSchedule, DynamicsParams, SimState, Simulator,
                       schedule_coefficient)
from .magnetics import (Coil, CoilArray, FieldSample, MagnetBody, coil_field,
                        currents_for_command, field_and_gradient,
                        magnetic_force, magnetic_torque, max_pull_force)
from .tissue import TissueField, TissueModel, TissueSegment, record_suture

__all__ = [
    "ActuationSchedule", "Coil", "CoilArray", "DynamicsParams", "FieldSample",
    "MagnetBody", "NeedleDesign", "ObjectiveConstant", "RigConfig", "SimState",
    "Simulator", "TissueField", "TissueModel", "TissueSegment", "build_default",
    "coil_field", "currents_for_command", "field_and_gradient", "load_config",
    "magnetic_force", "magnetic_torque", "max_pull_force",
    "optimal_magnet_length", "record_suture", "save_config",
    "schedule_coefficient",
]
