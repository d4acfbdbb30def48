"""Spiking content-addressable memory modelled on hippocampal CA3."""
from .cam import CamConfig, CamNetwork, CamParams, build_cam, inject, read_output
from .ops import (
    CamMemory,
    Learn,
    MemoryPattern,
    OperationError,
    OperationResult,
    RecallByContent,
    RecallByCue,
    TimingContract,
    compile_ops,
    decode,
)
from .oracle import OracleCam
from .snn import (
    NetworkError,
    NeuronParams,
    PopulationSpec,
    Raster,
    SpikeEvent,
    StdpRule,
    StimulusSchedule,
    build_network,
    get_weights,
    run,
    stdp_on_pre,
    step,
)

__all__ = [
    "CamConfig", "CamNetwork", "CamParams", "build_cam", "inject", "read_output",
    "CamMemory", "Learn", "MemoryPattern", "OperationError", "OperationResult",
    "RecallByContent", "RecallByCue", "TimingContract", "compile_ops", "decode",
    "OracleCam",
    "NetworkError", "NeuronParams", "PopulationSpec", "Raster", "SpikeEvent", "StdpRule",
    "StimulusSchedule", "build_network", "get_weights", "run", "stdp_on_pre", "step",
]
__version__ = "0.1.0"
