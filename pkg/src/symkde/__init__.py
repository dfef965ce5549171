"""symkde: multiple reflection-symmetry axis detection.

Pairs of wavelet edge features vote for the mirror axis that would map
one onto the other; the weighted votes are smoothed into a joint density
over (signed distance, normal angle) with a Gaussian x von Mises-Fisher
product kernel, and density modes become detected axes.
"""

from .density import (
    RHO_MAX,
    DensityGrid,
    GridSpec,
    KernelParams,
    bessel_i0,
    directional_density,
    embed_angle,
    evaluate_joint_density,
    gaussian_kernel,
    linear_density,
    rho_bin_centers,
    scaled_vmf_norm_const,
    theta_bin_centers,
    vmf_kernel,
    vmf_norm_const,
)
from .errors import (
    ConfigError,
    DegenerateExtentError,
    DegeneratePairError,
    InputError,
    NoEvidenceError,
    SymkdeError,
)
from .evaluation import (
    Detection,
    GtAxis,
    MatchReport,
    PrCurve,
    angular_distance_mod_pi,
    axis_match,
    cluster_detections,
    match_axes,
    pr_curve,
    report_at_threshold,
    segment_angle,
)
from .features import (
    FeaturePoint,
    FilterBank,
    FilterBankConfig,
    GrayImage,
    build_filter_bank,
    denormalize_point,
    extract_features,
    normalize_point,
)
from .io import (
    detections_from_dicts,
    load_gray,
    load_rgb,
    read_density_dump,
    read_detections,
    read_gt,
    read_manifest,
    write_density_dump,
    write_detections,
    write_gt,
    write_manifest,
)
from .peaks import (
    Peak,
    SymmetryAxis,
    axis_extent,
    find_peaks,
    support_hull,
    supporting_pairs,
)
from .pipeline import DetectionResult, PipelineConfig, detect, load_config, save_config
from .render import density_panel, render_overlay
from .voting import (
    AxisCandidate,
    CandidateSet,
    build_candidates,
    generate_pairs,
    normalize_weights,
    pair_weight,
    triangulate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "SymkdeError", "InputError", "ConfigError", "NoEvidenceError",
    "DegeneratePairError", "DegenerateExtentError",
    # features
    "GrayImage", "FilterBankConfig", "FilterBank", "FeaturePoint",
    "build_filter_bank", "extract_features", "normalize_point",
    "denormalize_point",
    # voting
    "AxisCandidate", "CandidateSet", "generate_pairs", "triangulate",
    "pair_weight", "build_candidates", "normalize_weights",
    # density
    "RHO_MAX", "KernelParams", "GridSpec", "DensityGrid", "gaussian_kernel",
    "bessel_i0", "vmf_kernel", "vmf_norm_const", "scaled_vmf_norm_const",
    "embed_angle", "rho_bin_centers", "theta_bin_centers",
    "evaluate_joint_density", "linear_density", "directional_density",
    # peaks
    "Peak", "SymmetryAxis", "find_peaks", "supporting_pairs", "axis_extent",
    "support_hull",
    # evaluation
    "GtAxis", "Detection", "MatchReport", "PrCurve", "segment_angle",
    "angular_distance_mod_pi", "axis_match",
    "match_axes", "cluster_detections", "report_at_threshold", "pr_curve",
    # pipeline
    "PipelineConfig", "DetectionResult", "detect", "load_config",
    "save_config",
    # file formats
    "load_gray", "load_rgb", "read_detections", "write_detections",
    "detections_from_dicts", "read_gt", "write_gt", "read_manifest",
    "write_manifest", "read_density_dump", "write_density_dump",
    # rendering
    "render_overlay", "density_panel",
]
