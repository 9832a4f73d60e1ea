"""Age-threshold ON/OFF packet-drop control at an energy-harvesting receiver.

Seven receiver policies over slotted time with Bernoulli update and energy
arrivals, evaluated three independent ways: exact closed forms, brute-force
enumeration of the latent waits, and slot-level Monte Carlo simulation.
"""

from .core import (
    AoIEstimate,
    AoiError,
    Battery,
    InfeasibleThresholdError,
    OracleTruncationError,
    ParameterError,
    Provenance,
    RationalThreshold,
    RenewalStats,
    Scheme,
    SimulationError,
    SystemParams,
    aoi_from_moments,
    validate_params,
)
from .analytic import (
    Moments,
    battery_stationary,
    binf_min_threshold,
    closed_form_aoi,
    geometric_moments,
    mixed_threshold_aoi,
    renewal_moments,
    threshold_wait_moments,
    unmixed_threshold_aoi,
)
from .oracle import TruncatedMoments, enum_renewal_moments
from .optimizer import (
    MixingSchedule,
    OptimizationResult,
    mixing_schedule,
    optimal_threshold_binf,
    optimize_threshold,
    optimize_threshold_b1,
    rationalize,
)
from .simulator import SimConfig, SimResult, empirical_battery_occupancy, simulate

__version__ = "0.1.0"
