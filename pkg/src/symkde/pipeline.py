"""End-to-end detection pipeline and its configuration.

Configuration is grouped by stage and serializes to a flat key-value JSON
document (``density.g``, ``peaks.top_k``, ...). Unknown keys are
rejected, so a typo in a config file fails loudly instead of being
silently ignored.
"""

import json
from dataclasses import dataclass, field, fields, replace

from .density import GridSpec, KernelParams, evaluate_joint_density
from .errors import ConfigError, DegenerateExtentError
from .features import FilterBankConfig, GrayImage, extract_features
from .peaks import axis_extent, find_peaks, supporting_pairs
from .voting import build_candidates, normalize_weights

__all__ = [
    "FeatureStage",
    "VotingStage",
    "DensityStage",
    "PeakStage",
    "EvalStage",
    "RuntimeStage",
    "PipelineConfig",
    "DetectionResult",
    "load_config",
    "save_config",
    "detect",
]


def _optional_float(v):
    if v is None or (isinstance(v, str) and v.lower() in ("none", "null", "")):
        return None
    return float(v)


@dataclass(frozen=True)
class FeatureStage:
    num_scales: int = 4
    num_orientations: int = 8
    base_wavelength: float = 4.0
    grid_stride: float | None = None
    magnitude_threshold: float = 0.05

    def bank_config(self) -> FilterBankConfig:
        return FilterBankConfig(
            num_scales=self.num_scales,
            num_orientations=self.num_orientations,
            base_wavelength=self.base_wavelength,
            grid_stride=self.grid_stride,
        )


@dataclass(frozen=True)
class VotingStage:
    max_per_scale: int = 300

    def __post_init__(self):
        if self.max_per_scale < 2:
            raise ConfigError(
                f"voting.max_per_scale must be >= 2, got {self.max_per_scale}"
            )


@dataclass(frozen=True)
class DensityStage:
    g: float = 0.03
    k: float = 40.0
    n_rho: int = 800
    n_theta: int = 180

    def kernel_params(self) -> KernelParams:
        return KernelParams(g=self.g, k=self.k)

    def grid_spec(self) -> GridSpec:
        return GridSpec(n_rho=self.n_rho, n_theta=self.n_theta)


@dataclass(frozen=True)
class PeakStage:
    nms_rho_radius: int = 17
    nms_theta_radius: int = 5
    rel_threshold: float = 0.05
    top_k: int = 5


@dataclass(frozen=True)
class EvalStage:
    angle_tol_deg: float = 10.0
    center_tol: float = 0.2

    def __post_init__(self):
        if not (0.0 < self.angle_tol_deg < 90.0):
            raise ConfigError(
                f"eval.angle_tol_deg must be in (0, 90), got {self.angle_tol_deg}"
            )
        if not (0.0 < self.center_tol <= 1.0):
            raise ConfigError(
                f"eval.center_tol must be in (0, 1], got {self.center_tol}"
            )


@dataclass(frozen=True)
class RuntimeStage:
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError(f"runtime.workers must be >= 1, got {self.workers}")


_GROUPS = {
    "features": FeatureStage,
    "voting": VotingStage,
    "density": DensityStage,
    "peaks": PeakStage,
    "eval": EvalStage,
    "runtime": RuntimeStage,
}

# How to coerce raw JSON / command-line strings per leaf key.
_CONVERTERS = {
    ("features", "num_scales"): int,
    ("features", "num_orientations"): int,
    ("features", "base_wavelength"): float,
    ("features", "grid_stride"): _optional_float,
    ("features", "magnitude_threshold"): float,
    ("voting", "max_per_scale"): int,
    ("density", "g"): float,
    ("density", "k"): float,
    ("density", "n_rho"): int,
    ("density", "n_theta"): int,
    ("peaks", "nms_rho_radius"): int,
    ("peaks", "nms_theta_radius"): int,
    ("peaks", "rel_threshold"): float,
    ("peaks", "top_k"): int,
    ("eval", "angle_tol_deg"): float,
    ("eval", "center_tol"): float,
    ("runtime", "workers"): int,
}


@dataclass(frozen=True)
class PipelineConfig:
    features: FeatureStage = field(default_factory=FeatureStage)
    voting: VotingStage = field(default_factory=VotingStage)
    density: DensityStage = field(default_factory=DensityStage)
    peaks: PeakStage = field(default_factory=PeakStage)
    eval: EvalStage = field(default_factory=EvalStage)
    runtime: RuntimeStage = field(default_factory=RuntimeStage)

    def to_flat(self) -> dict:
        flat = {}
        for group, stage_cls in _GROUPS.items():
            stage = getattr(self, group)
            for f in fields(stage_cls):
                flat[f"{group}.{f.name}"] = getattr(stage, f.name)
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "PipelineConfig":
        return cls().with_overrides(flat)

    def with_overrides(self, flat: dict) -> "PipelineConfig":
        by_group: dict[str, dict] = {}
        for key, raw in flat.items():
            if not isinstance(key, str) or "." not in key:
                raise ConfigError(f"config keys look like 'group.name', got {key!r}")
            group, name = key.split(".", 1)
            if (group, name) not in _CONVERTERS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                by_group.setdefault(group, {})[name] = _CONVERTERS[(group, name)](raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
        updated = {}
        for group, changes in by_group.items():
            updated[group] = replace(getattr(self, group), **changes)
        return replace(self, **updated)


def load_config(path: str) -> PipelineConfig:
    """Read a flat key-value JSON config; unknown keys are an error."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path!r}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config JSON {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path!r} must hold a JSON object")
    return PipelineConfig.from_flat(data)


def save_config(config: PipelineConfig, path: str) -> None:
    from .io import atomic_write_text

    atomic_write_text(path, json.dumps(config.to_flat(), indent=2) + "\n")


@dataclass
class DetectionResult:
    """Everything one image produced, for output files and debug dumps."""

    axes: list
    features: list
    candidates: object
    grid: object
    peaks: list


def detect(
    image: GrayImage,
    config: PipelineConfig | None = None,
    workers: int | None = None,
) -> DetectionResult:
    """Full pipeline on one image: features -> votes -> density -> axes.

    Raises :class:`~symkde.errors.NoEvidenceError` when any stage comes up
    empty (no features, no usable votes, an all-zero density). Peaks whose
    support collapses to a point are dropped silently.
    """
    config = config or PipelineConfig()
    if workers is None:
        workers = config.runtime.workers

    from .errors import NoEvidenceError

    feats = extract_features(
        image,
        config.features.bank_config(),
        magnitude_threshold=config.features.magnitude_threshold,
    )
    if not feats:
        raise NoEvidenceError("no features above the magnitude threshold")

    cands = normalize_weights(
        build_candidates(feats, max_per_scale=config.voting.max_per_scale)
    )
    grid = evaluate_joint_density(
        cands,
        spec=config.density.grid_spec(),
        params=config.density.kernel_params(),
        workers=workers,
    )
    found = find_peaks(
        grid,
        nms_rho_radius=config.peaks.nms_rho_radius,
        nms_theta_radius=config.peaks.nms_theta_radius,
        rel_threshold=config.peaks.rel_threshold,
        top_k=config.peaks.top_k,
    )

    axes = []
    params = config.density.kernel_params()
    for peak in found:
        support = supporting_pairs(peak, cands, params)
        try:
            axes.append(
                axis_extent(
                    peak, support, cands, feats, image.width, image.height
                )
            )
        except DegenerateExtentError:
            continue

    return DetectionResult(
        axes=axes, features=feats, candidates=cands, grid=grid, peaks=found
    )
