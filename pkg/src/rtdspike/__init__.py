"""rtdspike: excitable optoelectronic spiking-node simulator.

Simulates a photodetector-coupled tunnelling-diode circuit driving a
nanolaser: an N-shaped I-V nonlinearity biased near its peak makes the node
excitable, optical pulse inputs trigger all-or-nothing electrical/optical
spikes, and packaged experiments characterise threshold, refractoriness,
coincidence detection and XOR spike logic.
"""

__version__ = "0.1.0"

from .analysis import (
    DetectionConfig,
    RefractoryReport,
    SpikeEvent,
    SpikeTrain,
    ThresholdReport,
    calibrate_detection,
    detect_spikes,
    find_threshold,
    refractory_sweep,
    temporal_map,
    threshold_sweep,
)
from .config import ExperimentConfig, load_config, load_preset, serialize_config
from .dynamics import (
    CircuitParams,
    ConvergenceReport,
    LaserParams,
    SimConfig,
    State,
    System,
    Trace,
    bias_for_fraction,
    convergence_check,
    integrate,
    quiescent_point,
    step,
)
from .errors import (
    AmplitudeCalibrationError,
    BiasBeyondPeakError,
    ConfigError,
    ConfigParseError,
    IntegrationBlowUpError,
    InvariantViolationError,
    LaserSteadyStateError,
    NoNdcError,
    RtdSpikeError,
    SubThresholdPulseError,
    UnknownKeyError,
)
from .iv import IVMetadata, SchulmanIV, analyze_iv, schulman_conductance, schulman_current
from .stimulus import Branch, Stimulus, bipolar_pulse, combine, doublet, square_pulse
from .tasks import TaskResult, and_task, xor_task

__all__ = [
    "__version__",
    "SchulmanIV", "IVMetadata", "schulman_current", "schulman_conductance", "analyze_iv",
    "CircuitParams", "LaserParams", "System", "State", "Trace", "SimConfig",
    "ConvergenceReport", "quiescent_point", "step", "integrate", "convergence_check",
    "bias_for_fraction",
    "Stimulus", "Branch", "square_pulse", "doublet", "bipolar_pulse", "combine",
    "DetectionConfig", "SpikeEvent", "SpikeTrain", "ThresholdReport", "RefractoryReport",
    "calibrate_detection", "detect_spikes", "find_threshold", "threshold_sweep",
    "refractory_sweep", "temporal_map",
    "TaskResult", "and_task", "xor_task",
    "ExperimentConfig", "load_config", "load_preset", "serialize_config",
    "RtdSpikeError", "NoNdcError", "BiasBeyondPeakError", "LaserSteadyStateError",
    "IntegrationBlowUpError", "SubThresholdPulseError", "AmplitudeCalibrationError",
    "ConfigError", "ConfigParseError", "UnknownKeyError", "InvariantViolationError",
]
