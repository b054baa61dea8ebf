"""Simulator and analysis toolkit for two-channel EPR-Bell polarization
experiments under a local hidden-variable model with setting-dependent
detection, plus the exact quadrature mirror of every Monte Carlo statistic."""

__version__ = "0.1.0"

from .angles import (
    circular_mean,
    circular_stddev,
    fold_distance,
    normalize_angle,
    sample_wrapped_normal,
)
from .errors import (
    BellsimError,
    ConvergenceError,
    DegenerateCountsError,
    FitFailureError,
    RangeError,
    StarvedSourceError,
    UsageError,
)
from .experiment import (
    KIND_ACTIVE,
    KIND_CORRELATION,
    KIND_MALUS,
    KIND_PASSIVE,
    ChshResult,
    CoincidenceCounts,
    CorrelationPoint,
    SweepSeries,
    active_sweep,
    chsh,
    chsh_s,
    correlation,
    correlation_point,
    correlation_stderr,
    correlation_sweep,
    malus_transmission,
    passive_sweep,
    point_rng,
    qm_reference,
    run_point,
    tally_outcomes,
    visibility_fit,
)
from .model import (
    CONTROLLED,
    DEFAULT_COLLAPSE_SIGMA,
    DEFAULT_MISALIGNMENT_SIGMA,
    DEFAULT_SHAKY_WIDTH,
    ENTANGLED_UNIFORM,
    MINUS,
    PLUS,
    UNDETECTED,
    AnalyzerSpec,
    ModelParams,
    PhotonPair,
    SourceSpec,
    apply_fair_loss,
    classify,
    collapse_plus_channel,
    sample_pair,
)
from .oracle import (
    OracleDistribution,
    channel_arcs,
    expected_sweep,
    joint_probabilities,
    malus_deviation_envelope,
    malus_plus_fraction,
    normal_arc_mass,
    sawtooth_correlation,
    sharp_pair_rejection_probability,
)
