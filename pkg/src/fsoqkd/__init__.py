"""QBER and secret-key-rate models for free-space BB84, six-state, E91 and BBM92."""

from .bbm92 import EntangledSourceParams, SourcePlacement
from .channel import AlphaUnit, ChannelParams
from .config import RunConfig, parse_config, render_config
from .e91 import AnalyzerConfig, ArmSplit, ArmTransmittances
from .single_photon import DeviceParams, SingleProtocolKind
from .sweep import Protocol, ProtocolPoint, SweepSpec, find_threshold, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AlphaUnit",
    "AnalyzerConfig",
    "ArmSplit",
    "ArmTransmittances",
    "ChannelParams",
    "DeviceParams",
    "EntangledSourceParams",
    "Protocol",
    "ProtocolPoint",
    "RunConfig",
    "SingleProtocolKind",
    "SourcePlacement",
    "SweepSpec",
    "find_threshold",
    "parse_config",
    "render_config",
    "run_sweep",
]
