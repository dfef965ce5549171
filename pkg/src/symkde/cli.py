"""Command-line front end.

Verbs:

* ``detect``     -- image(s) in, detection JSON out (plus debug dumps).
* ``render``     -- draw a detection file over its image.
* ``eval``       -- score detections against a ground-truth manifest.
* ``pr-curve``   -- write the precision-recall sweep as CSV.
* ``convert-gt`` -- normalize third-party ground-truth files.

Exit codes: 0 success, 2 unreadable/malformed input, 3 invalid
configuration, 4 no symmetry evidence found. Output files are written
atomically; a failing run leaves nothing partial behind.
"""

import argparse
import csv
import io as _stdio
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as kio
from .errors import ConfigError, InputError, NoEvidenceError, SymkdeError
from .evaluation import GtAxis, pr_curve, report_at_threshold
from .pipeline import PipelineConfig, detect, load_config
from .render import render_overlay

__all__ = [
    "main",
    "cmd_detect",
    "cmd_render",
    "cmd_eval",
    "cmd_pr_curve",
    "cmd_convert_gt",
]

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_BAD_CONFIG = 3
EXIT_NO_EVIDENCE = 4

_IMAGE_EXTS = (".png", ".jpg", ".jpeg")


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------

def cmd_detect(
    image_path: str,
    out_json: str,
    config: PipelineConfig | None = None,
    workers: int | None = None,
    dump_features: str | None = None,
    dump_candidates: str | None = None,
    dump_density: str | None = None,
) -> int:
    """Detect axes in one image and write the detection JSON."""
    config = config or PipelineConfig()
    gray = kio.load_gray(image_path)
    result = detect(gray, config, workers=workers)
    kio.write_detections(result.axes, out_json)
    if dump_features:
        kio.write_features_dump(result.features, gray.width, gray.height, dump_features)
    if dump_candidates:
        kio.write_candidates_csv(result.candidates, dump_candidates)
    if dump_density:
        kio.write_density_dump(result.grid, dump_density)
    print(f"{image_path}: {len(result.axes)} axes -> {out_json}")
    return EXIT_OK


def _collect_images(inputs: list[str]) -> list[str]:
    paths: list[str] = []
    for item in inputs:
        if os.path.isdir(item):
            for name in sorted(os.listdir(item)):
                if name.lower().endswith(_IMAGE_EXTS):
                    paths.append(os.path.join(item, name))
        else:
            paths.append(item)
    if not paths:
        raise InputError("no input images found")
    return paths


def _run_detect(args, config: PipelineConfig) -> int:
    images = _collect_images(args.images)
    if len(images) == 1 and args.out:
        return cmd_detect(
            images[0], args.out, config,
            dump_features=args.dump_features,
            dump_candidates=args.dump_candidates,
            dump_density=args.dump_density,
        )
    if args.out:
        raise InputError("--out needs exactly one input image; use --out-dir")
    if not args.out_dir:
        raise InputError(
            "missing output destination: use --out for one image "
            "or --out-dir for several"
        )

    os.makedirs(args.out_dir, exist_ok=True)

    def one(path: str) -> tuple[str, int, str]:
        stem = os.path.splitext(os.path.basename(path))[0]
        out = os.path.join(args.out_dir, stem + ".json")
        try:
            code = cmd_detect(
                path, out, config, workers=1,
                dump_features=(
                    os.path.join(args.out_dir, stem + ".features.json")
                    if args.dump_features else None
                ),
                dump_candidates=(
                    os.path.join(args.out_dir, stem + ".candidates.csv")
                    if args.dump_candidates else None
                ),
                dump_density=(
                    os.path.join(args.out_dir, stem + ".density")
                    if args.dump_density else None
                ),
            )
            return path, code, ""
        except SymkdeError as exc:
            return path, _exit_code_for(exc), str(exc)

    workers = config.runtime.workers
    if workers > 1 and len(images) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, images))
    else:
        outcomes = [one(p) for p in images]

    status = EXIT_OK
    for path, code, message in outcomes:
        if code != EXIT_OK:
            print(f"{path}: FAILED ({message})", file=sys.stderr)
            if status == EXIT_OK:
                status = code
    return status


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------

def cmd_render(
    image_path: str,
    detections_json: str,
    out_png: str,
    density_base: str | None = None,
) -> int:
    """Draw a detection file over its source image."""
    image = kio.load_rgb(image_path)
    records = kio.read_detections(detections_json)
    density = kio.read_density_dump(density_base).values if density_base else None
    canvas = render_overlay(image, records, density=density)
    buf = _stdio.BytesIO()
    canvas.save(buf, format="PNG")
    kio.atomic_write_bytes(out_png, buf.getvalue())
    print(f"{image_path} + {len(records)} axes -> {out_png}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval / pr-curve
# ---------------------------------------------------------------------------

def _load_benchmark(manifest_path: str, detections_dir: str):
    """Pair each manifest entry's ground truth with its detection file
    (missing detection files mean zero detections for that image)."""
    entries = kio.read_manifest(manifest_path)
    per_image = []
    total_gt = 0
    for entry in entries:
        gts = kio.read_gt(entry["ground_truth"])
        total_gt += len(gts)
        det_path = os.path.join(detections_dir, entry["stem"] + ".json")
        if os.path.exists(det_path):
            dets = kio.detections_from_dicts(kio.read_detections(det_path))
        else:
            dets = []
        per_image.append((dets, gts))
    if total_gt == 0:
        raise InputError("benchmark has no ground-truth axes at all")
    return per_image


def _curve_csv(curve) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "precision", "recall"])
    for t, p, r in zip(curve.thresholds, curve.precisions, curve.recalls):
        writer.writerow([repr(float(t)), repr(float(p)), repr(float(r))])
    return buf.getvalue()


def cmd_eval(
    manifest_path: str,
    detections_dir: str,
    report_out: str,
    pr_csv_out: str | None = None,
    angle_tol_deg: float = 10.0,
    center_tol: float = 0.2,
) -> int:
    """Score detections; report the max-F1 operating point."""
    per_image = _load_benchmark(manifest_path, detections_dir)
    curve = pr_curve(per_image, angle_tol_deg, center_tol)
    threshold = curve.max_f1_threshold
    report = report_at_threshold(per_image, threshold, angle_tol_deg, center_tol)
    payload = {
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
    }
    kio.atomic_write_text(report_out, json.dumps(payload, indent=2) + "\n")
    if pr_csv_out:
        kio.atomic_write_text(pr_csv_out, _curve_csv(curve))
    t_label = "-inf" if math.isinf(threshold) and threshold < 0 else f"{threshold:.6g}"
    print(
        f"max F1 {curve.max_f1:.4f} at threshold {t_label} "
        f"(tp={report.tp} fp={report.fp} fn={report.fn})"
    )
    return EXIT_OK


def cmd_pr_curve(
    manifest_path: str,
    detections_dir: str,
    out_csv: str,
    plot_png: str | None = None,
    angle_tol_deg: float = 10.0,
    center_tol: float = 0.2,
) -> int:
    """Write the precision-recall sweep; optionally plot it."""
    per_image = _load_benchmark(manifest_path, detections_dir)
    curve = pr_curve(per_image, angle_tol_deg, center_tol)
    kio.atomic_write_text(out_csv, _curve_csv(curve))
    if plot_png:
        try:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError as exc:
            raise InputError(
                "plotting needs matplotlib (pip install symkde[demos])"
            ) from exc
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot(curve.recalls, curve.precisions, marker="o")
        ax.set_xlabel("recall")
        ax.set_ylabel("precision")
        ax.set_xlim(0, 1.05)
        ax.set_ylim(0, 1.05)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        buf = _stdio.BytesIO()
        fig.savefig(buf, format="png")
        plt.close(fig)
        kio.atomic_write_bytes(plot_png, buf.getvalue())
    print(f"pr-curve with {len(curve.thresholds)} thresholds -> {out_csv}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# convert-gt
# ---------------------------------------------------------------------------

def _rows_from_text(path: str) -> list[list[float]]:
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        lines = fh.readlines()
    rows = []
    for line in lines:
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.replace(",", " ").replace(";", " ").split()
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            continue  # header or label line
        if len(nums) >= 4:
            rows.append(nums[:4])
    return rows


def _rows_from_mat(path: str) -> list[list[float]]:
    from scipy.io import loadmat

    try:
        data = loadmat(path, squeeze_me=True)
    except Exception as exc:  # scipy raises a zoo of types here
        raise InputError(f"cannot read .mat ground truth {path!r}: {exc}") from exc

    rows: list[list[float]] = []

    def walk(obj):
        if isinstance(obj, np.ndarray):
            if obj.dtype == object:
                for item in obj.ravel():
                    walk(item)
            elif np.issubdtype(obj.dtype, np.number):
                arr = np.atleast_2d(obj.astype(np.float64))
                if arr.shape[1] >= 4:
                    rows.extend(arr[:, :4].tolist())
                elif arr.size >= 4:
                    rows.append(arr.ravel()[:4].tolist())
        elif isinstance(obj, (list, tuple)):
            for item in obj:
                walk(item)

    for key, value in data.items():
        if not key.startswith("__"):
            walk(value)
    return rows


def cmd_convert_gt(
    inputs: list[str],
    fmt: str,
    out_dir: str,
    manifest_out: str | None = None,
    image_ext: str = ".png",
) -> int:
    """Convert third-party ground truth to canonical ``.gt.txt`` files.

    ``psu`` inputs (.mat or delimited text) carry 1-indexed pixel-center
    coordinates and are shifted by -0.5 into the continuous frame; ``ny``
    inputs (delimited text) pass through unchanged.
    """
    if fmt not in ("psu", "ny"):
        raise ConfigError(f"unknown ground-truth format {fmt!r} (use psu or ny)")
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for path in inputs:
        if not os.path.exists(path):
            raise InputError(f"ground-truth input not found: {path!r}")
        if path.lower().endswith(".mat"):
            rows = _rows_from_mat(path)
        else:
            rows = _rows_from_text(path)
        if not rows:
            raise InputError(f"no axis coordinates found in {path!r}")
        shift = -0.5 if fmt == "psu" else 0.0
        axes = []
        for x1, y1, x2, y2 in rows:
            ends = np.array([[x1, y1], [x2, y2]]) + shift
            axes.append(GtAxis(endpoints=ends))
        stem = os.path.splitext(os.path.basename(path))[0]
        if stem.endswith(".gt"):
            stem = stem[:-3]
        gt_path = os.path.join(out_dir, stem + ".gt.txt")
        kio.write_gt(axes, gt_path)
        entries.append({
            "image": os.path.join(out_dir, stem + image_ext),
            "ground_truth": gt_path,
        })
        print(f"{path}: {len(axes)} axes -> {gt_path}")
    if manifest_out:
        kio.write_manifest(entries, manifest_out)
        print(f"manifest with {len(entries)} images -> {manifest_out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _flat_key_flags(parser: argparse.ArgumentParser) -> None:
    for key in sorted(PipelineConfig().to_flat()):
        parser.add_argument(
            f"--{key}", dest=key.replace(".", "__"), metavar="V", default=None,
            help=f"override config key {key}",
        )


def _config_from_args(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for key in PipelineConfig().to_flat():
        value = getattr(args, key.replace(".", "__"), None)
        if value is not None:
            overrides[key] = value
    return config.with_overrides(overrides) if overrides else config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symkde",
        description="Detect mirror-symmetry axes via density voting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect axes in image(s)")
    p.add_argument("images", nargs="+", help="image file(s) or a directory")
    p.add_argument("--out", help="output detection JSON (single image)")
    p.add_argument("--out-dir", help="output directory (batch mode)")
    p.add_argument("--config", help="flat key-value JSON config file")
    p.add_argument("--dump-features", nargs="?", const=True, default=None,
                   metavar="PATH", help="also dump extracted features")
    p.add_argument("--dump-candidates", nargs="?", const=True, default=None,
                   metavar="PATH", help="also dump the vote table CSV")
    p.add_argument("--dump-density", nargs="?", const=True, default=None,
                   metavar="BASE", help="also dump the density grid")
    _flat_key_flags(p)

    p = sub.add_parser("render", help="draw detections over their image")
    p.add_argument("image")
    p.add_argument("detections")
    p.add_argument("--out", required=True, help="output PNG")
    p.add_argument("--density", default=None, metavar="BASE",
                   help="density dump base path for a heatmap side panel")

    p = sub.add_parser("eval", help="score detections against ground truth")
    p.add_argument("--manifest", required=True)
    p.add_argument("--detections", required=True, help="detection JSON directory")
    p.add_argument("--report", required=True, help="output report JSON")
    p.add_argument("--pr-csv", default=None, help="also write the PR sweep CSV")
    p.add_argument("--eval.angle_tol_deg", dest="eval__angle_tol_deg", default=None)
    p.add_argument("--eval.center_tol", dest="eval__center_tol", default=None)

    p = sub.add_parser("pr-curve", help="write the precision-recall sweep")
    p.add_argument("--manifest", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--plot", default=None, help="also plot to this PNG")
    p.add_argument("--eval.angle_tol_deg", dest="eval__angle_tol_deg", default=None)
    p.add_argument("--eval.center_tol", dest="eval__center_tol", default=None)

    p = sub.add_parser("convert-gt", help="convert PSU/NY ground truth")
    p.add_argument("inputs", nargs="+", help="ground-truth files to convert")
    p.add_argument("--format", required=True, choices=["psu", "ny"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--manifest", default=None, help="write a manifest here")
    p.add_argument("--image-ext", default=".png",
                   help="image extension used in manifest entries")

    return parser


def _eval_tols(args) -> tuple[float, float]:
    angle = float(args.eval__angle_tol_deg) if args.eval__angle_tol_deg else 10.0
    center = float(args.eval__center_tol) if args.eval__center_tol else 0.2
    return angle, center


def _exit_code_for(exc: SymkdeError) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_BAD_CONFIG
    if isinstance(exc, NoEvidenceError):
        return EXIT_NO_EVIDENCE
    return EXIT_BAD_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "detect":
            config = _config_from_args(args)
            if args.dump_features is True or args.dump_candidates is True \
                    or args.dump_density is True:
                # bare flags are only meaningful in batch mode, where names
                # derive from each image stem
                if args.out:
                    raise InputError(
                        "give explicit dump paths when using --out"
                    )
            return _run_detect(args, config)
        if args.command == "render":
            return cmd_render(args.image, args.detections, args.out,
                              density_base=args.density)
        if args.command == "eval":
            angle, center = _eval_tols(args)
            return cmd_eval(args.manifest, args.detections, args.report,
                            pr_csv_out=args.pr_csv,
                            angle_tol_deg=angle, center_tol=center)
        if args.command == "pr-curve":
            angle, center = _eval_tols(args)
            return cmd_pr_curve(args.manifest, args.detections, args.out,
                                plot_png=args.plot,
                                angle_tol_deg=angle, center_tol=center)
        if args.command == "convert-gt":
            return cmd_convert_gt(args.inputs, args.format, args.out_dir,
                                  manifest_out=args.manifest,
                                  image_ext=args.image_ext)
        raise ConfigError(f"unknown command {args.command!r}")
    except SymkdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
