"""Change-point detection in sequences of networks with trimmed spectral CUSUM scans."""

from .cusum import (
    PsiTriple,
    ThresholdSpec,
    cusum,
    epsilon_mu,
    gamma_count,
    phi,
    phi_inverse,
    psi_triple,
    scan_interval,
    threshold,
)
from .detectors import (
    Detection,
    DetectionReport,
    DetectorConfig,
    IntervalSet,
    build_grid,
    critical_theta,
    detect_wbs,
    detect_window,
    draw_wbs_intervals,
    merge_detections,
)
from .estimators import WildBinarySegmentation, WindowChangePointDetector
from .exceptions import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    DegenerateModelError,
    DomainError,
    FormatError,
    InvalidArgumentError,
    NetCPDError,
)
from .graphs import DegreeProfile, degree_profile, top_degree_vertices, trim
from .harness import (
    CalibrationResult,
    LocalizationResult,
    RiskEstimate,
    calibrate_theta,
    estimate_risk,
    localization_error,
    phase_sweep,
)
from .models import (
    GroundTruth,
    ProbabilitySequence,
    block_matrix,
    erdos_renyi_matrix,
    ground_truth,
    hard_instance_detect,
    hard_instance_localize,
    sample_mirgram,
)
from .spectral import spectral_norm

__version__ = "0.1.0"
