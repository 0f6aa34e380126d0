"""Relative localization of a tag robot from three on-board UWB anchors.

The main entry points are the scikit-learn style localizers
(:class:`DualMCLLocalizer`, :class:`ParticleFilterLocalizer`,
:class:`EKFLocalizer`), the scenario engine in :mod:`dualmcl.sim` and the
sweep harness in :mod:`dualmcl.bench`.
"""

from .bench import SweepResult, SweepSpec, rmse, run_sweep
from .control import FormationGoal, anchor_velocity_setpoint, formation_control
from .estimators import DualMCLLocalizer, EKFLocalizer, MeasurementConstructor, ParticleFilterLocalizer
from .geometry import AnchorLayout, ConstructedMeasurement, RangeTriple, construct_measurement, true_ranges
from .sensing import RangeCalibrator, RangeNoiseModel, calibrate, corrupt_ranges
from .sim import ScenarioConfig, ScenarioTrace, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AnchorLayout",
    "ConstructedMeasurement",
    "DualMCLLocalizer",
    "EKFLocalizer",
    "FormationGoal",
    "MeasurementConstructor",
    "ParticleFilterLocalizer",
    "RangeCalibrator",
    "RangeNoiseModel",
    "RangeTriple",
    "ScenarioConfig",
    "ScenarioTrace",
    "SweepResult",
    "SweepSpec",
    "anchor_velocity_setpoint",
    "calibrate",
    "construct_measurement",
    "corrupt_ranges",
    "formation_control",
    "rmse",
    "run_scenario",
    "run_sweep",
    "true_ranges",
]
