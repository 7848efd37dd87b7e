"""Simulation and gradient-descent compensation of RIS hardware imperfections
in wideband OFDM links."""

from .channel import ChannelRealization, ChannelSpec, RisGeometry
from .estimator import PhaseCompensator
from .harness import ScenarioSpec, run_scenario, run_trial, sweep
from .ofdm import OfdmSpec
from .optim import OptimizerOptions, optimize

__all__ = [
    "ChannelRealization",
    "ChannelSpec",
    "OfdmSpec",
    "OptimizerOptions",
    "PhaseCompensator",
    "RisGeometry",
    "ScenarioSpec",
    "optimize",
    "run_scenario",
    "run_trial",
    "sweep",
]
__version__ = "0.1.0"
