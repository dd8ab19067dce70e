"""Seeded Monte Carlo bench for two-slit which-way experiments.

Two rendering policies, one apparatus: impacts draw either the interference
law or the structureless law depending on whether which-way data counts as
available, and every protocol, report, and CLI run is deterministic under
its seed.
"""

from .models import (
    OBJECTIVE_MEDIA,
    AvailabilityHorizon,
    AvailabilityRecord,
    Medium,
    RenderingModel,
    RenderingPolicy,
    availability_query_time,
    available_mask,
    select_pattern,
    which_way_available,
)
from .optics import (
    BINS_PER_FRINGE,
    MAX_HISTOGRAM_BINS,
    DomainError,
    IntervalSet,
    OpticsConfig,
    PatternDistribution,
    PatternKind,
    ValidationError,
    fringe_aligned_edges,
    fringe_visibility,
    particle_density,
    pattern_cdf,
    sample_impact,
    wave_density,
)
from .protocols import (
    DELTA_T_FAST,
    DELTA_T_SLOW,
    CoincidenceRecord,
    CoincidenceSummary,
    DetectNoRecordVariant,
    EventLog,
    ObservationSchedule,
    OutcomeHypothesis,
    PairingMode,
    PhotonPairEvent,
    PredictorStats,
    Protocol,
    ProtocolConfig,
    RecordingRule,
    RunResult,
    StrategyKind,
    SubsetResult,
    SwitchController,
    SwitchStage,
    SwitchStrategy,
    coincidence_match,
    run_delayed_choice,
    run_detect_no_record,
    run_double_slit,
    run_macroscopic_erasure,
    run_perishable_media,
    run_predictor,
    run_protocol,
    run_quantum_eraser,
    run_switch_experiment,
)
from .stats import (
    ClassificationResult,
    FeasibilityReport,
    PosteriorCurve,
    PosteriorMode,
    SampleSizePlan,
    Verdict,
    approx_posterior,
    bhattacharyya_coefficient,
    classify_pattern,
    contradiction_margin,
    delta_of_interval_set,
    exact_posterior,
    optimal_interval_set,
    required_sample_size,
    tv_distance,
    tv_distance_empirical,
)
from .cli import (
    ManifestError,
    ManifestRun,
    RunManifest,
    execute_manifest,
    parse_manifest,
    serialize_manifest,
)
from .acceptance import AcceptanceReport, CriterionResult, builtin_manifest, run_acceptance

__version__ = "0.1.0"

__all__ = [
    "AcceptanceReport",
    "AvailabilityHorizon",
    "AvailabilityRecord",
    "BINS_PER_FRINGE",
    "ClassificationResult",
    "CoincidenceRecord",
    "CoincidenceSummary",
    "CriterionResult",
    "DELTA_T_FAST",
    "DELTA_T_SLOW",
    "DetectNoRecordVariant",
    "DomainError",
    "EventLog",
    "FeasibilityReport",
    "IntervalSet",
    "ManifestError",
    "ManifestRun",
    "MAX_HISTOGRAM_BINS",
    "Medium",
    "OBJECTIVE_MEDIA",
    "ObservationSchedule",
    "OpticsConfig",
    "OutcomeHypothesis",
    "PairingMode",
    "PatternDistribution",
    "PatternKind",
    "PhotonPairEvent",
    "PosteriorCurve",
    "PosteriorMode",
    "PredictorStats",
    "Protocol",
    "ProtocolConfig",
    "RecordingRule",
    "RenderingModel",
    "RenderingPolicy",
    "RunManifest",
    "RunResult",
    "SampleSizePlan",
    "StrategyKind",
    "SubsetResult",
    "SwitchController",
    "SwitchStage",
    "SwitchStrategy",
    "ValidationError",
    "Verdict",
    "approx_posterior",
    "availability_query_time",
    "available_mask",
    "bhattacharyya_coefficient",
    "builtin_manifest",
    "classify_pattern",
    "coincidence_match",
    "contradiction_margin",
    "delta_of_interval_set",
    "exact_posterior",
    "execute_manifest",
    "fringe_aligned_edges",
    "fringe_visibility",
    "optimal_interval_set",
    "parse_manifest",
    "particle_density",
    "pattern_cdf",
    "required_sample_size",
    "run_acceptance",
    "run_delayed_choice",
    "run_detect_no_record",
    "run_double_slit",
    "run_macroscopic_erasure",
    "run_perishable_media",
    "run_predictor",
    "run_protocol",
    "run_quantum_eraser",
    "run_switch_experiment",
    "sample_impact",
    "select_pattern",
    "serialize_manifest",
    "tv_distance",
    "tv_distance_empirical",
    "wave_density",
    "which_way_available",
]
