"""File formats and robust I/O.

Formats:

* detections   -- JSON array of {x1, y1, x2, y2, theta, rho, score,
                  support_count} in pixel coordinates, strongest first.
* ground truth -- one axis per line, ``x1 y1 x2 y2`` in pixels, in a
                  ``<image>.gt.txt`` file next to a JSON manifest
                  ``{"images": [{"image": ..., "ground_truth": ...}]}``
                  whose paths are resolved relative to the manifest.
* feature dump -- JSON array of {x, y, scale, J, tau, hist} with pixel
                  positions (debug aid).
* vote dump    -- CSV with header theta,rho,m,c,d,omega,i,j.
* density dump -- ``<base>.csv`` matrix (row = rho bin, column = theta
                  bin) plus ``<base>.json`` header {n_rho, n_theta, g, k,
                  rho_min, rho_max}.

All writers go through an atomic temp-file + rename, so a failed run
never leaves a partial output file behind.
"""

import csv
import io as _stdio
import json
import os
import tempfile

import numpy as np
from PIL import Image, UnidentifiedImageError

from .density import RHO_MAX, DensityGrid, GridSpec, KernelParams
from .errors import InputError
from .evaluation import Detection, GtAxis
from .features import GrayImage, denormalize_point

__all__ = [
    "load_gray",
    "load_rgb",
    "atomic_write_text",
    "atomic_write_bytes",
    "axis_to_dict",
    "write_detections",
    "read_detections",
    "detections_from_dicts",
    "write_features_dump",
    "write_candidates_csv",
    "write_density_dump",
    "read_density_dump",
    "read_gt",
    "write_gt",
    "read_manifest",
    "write_manifest",
]

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_DETECTION_KEYS = ("x1", "y1", "x2", "y2", "theta", "rho", "score", "support_count")


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

def _open_image(path: str) -> Image.Image:
    try:
        return Image.open(path)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise InputError(f"cannot read image {path!r}: {exc}") from exc


def load_gray(path: str) -> GrayImage:
    """Load a PNG/JPEG as luminance in [0, 1] (ITU 601 weights for RGB)."""
    with _open_image(path) as img:
        if img.mode in ("L", "I;16", "I"):
            arr = np.asarray(img.convert("I")).astype(np.float64)
            peak = 65535.0 if img.mode != "L" else 255.0
            gray = arr / peak
        else:
            rgb = np.asarray(img.convert("RGB")).astype(np.float64)
            gray = (rgb @ LUMA_WEIGHTS) / 255.0
    return GrayImage(np.clip(gray, 0.0, 1.0))


def load_rgb(path: str) -> Image.Image:
    with _open_image(path) as img:
        return img.convert("RGB")


# ---------------------------------------------------------------------------
# atomic writers
# ---------------------------------------------------------------------------

def _atomic_write(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-symkde-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str, payload: bytes) -> None:
    _atomic_write(path, payload)


def atomic_write_text(path: str, text: str) -> None:
    _atomic_write(path, text.encode("utf-8"))


def _atomic_write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------
# detections
# ---------------------------------------------------------------------------

def axis_to_dict(axis) -> dict:
    (x1, y1), (x2, y2) = np.asarray(axis.endpoints, dtype=np.float64)
    return {
        "x1": float(x1), "y1": float(y1),
        "x2": float(x2), "y2": float(y2),
        "theta": float(axis.theta), "rho": float(axis.rho),
        "score": float(axis.score),
        "support_count": int(axis.support_count),
    }


def write_detections(axes, path: str) -> None:
    records = [a if isinstance(a, dict) else axis_to_dict(a) for a in axes]
    _atomic_write_json(path, records)


def read_detections(path: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"detections file not found: {path!r}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed detections JSON {path!r}: {exc}") from exc
    if not isinstance(data, list):
        raise InputError(f"detections file {path!r} must hold a JSON array")
    for rec in data:
        if not isinstance(rec, dict) or any(k not in rec for k in _DETECTION_KEYS):
            raise InputError(
                f"detection records in {path!r} need keys {_DETECTION_KEYS}"
            )
        for k in _DETECTION_KEYS:
            if not isinstance(rec[k], (int, float)) or not np.isfinite(rec[k]):
                raise InputError(f"non-numeric field {k!r} in {path!r}")
    return data


def detections_from_dicts(records) -> list[Detection]:
    return [
        Detection(
            endpoints=np.array([[r["x1"], r["y1"]], [r["x2"], r["y2"]]]),
            score=float(r["score"]),
        )
        for r in records
    ]


# ---------------------------------------------------------------------------
# debug dumps
# ---------------------------------------------------------------------------

def write_features_dump(features, width: int, height: int, path: str) -> None:
    records = []
    for f in features:
        px = denormalize_point(f.pos, width, height)
        records.append({
            "x": float(px[0]), "y": float(px[1]),
            "scale": int(f.scale),
            "J": float(f.magnitude),
            "tau": float(f.direction),
            "hist": [float(v) for v in f.texture],
        })
    _atomic_write_json(path, records)


def write_candidates_csv(cands, path: str) -> None:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "rho", "m", "c", "d", "omega", "i", "j"])
    for n in range(len(cands)):
        writer.writerow([
            repr(float(cands.theta[n])), repr(float(cands.rho[n])),
            repr(float(cands.m[n])), repr(float(cands.c[n])),
            repr(float(cands.d[n])), repr(float(cands.weight[n])),
            int(cands.pair_i[n]), int(cands.pair_j[n]),
        ])
    atomic_write_text(path, buf.getvalue())


def write_density_dump(grid: DensityGrid, base_path: str) -> None:
    header = {
        "n_rho": int(grid.spec.n_rho),
        "n_theta": int(grid.spec.n_theta),
        "g": float(grid.params.g),
        "k": float(grid.params.k),
        "rho_min": -RHO_MAX,
        "rho_max": RHO_MAX,
    }
    _atomic_write_json(base_path + ".json", header)
    buf = _stdio.StringIO()
    for row in grid.values:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    atomic_write_text(base_path + ".csv", buf.getvalue())


def read_density_dump(base_path: str) -> DensityGrid:
    try:
        with open(base_path + ".json", "r", encoding="utf-8") as fh:
            header = json.load(fh)
        values = np.loadtxt(base_path + ".csv", delimiter=",", ndmin=2)
    except FileNotFoundError as exc:
        raise InputError(f"density dump not found at {base_path!r}.csv/json") from exc
    except (json.JSONDecodeError, ValueError) as exc:
        raise InputError(f"malformed density dump at {base_path!r}: {exc}") from exc
    spec = GridSpec(n_rho=int(header["n_rho"]), n_theta=int(header["n_theta"]))
    if values.shape != (spec.n_rho, spec.n_theta):
        raise InputError(
            f"density matrix shape {values.shape} disagrees with header "
            f"{spec.n_rho}x{spec.n_theta}"
        )
    return DensityGrid(
        values=values,
        spec=spec,
        params=KernelParams(g=float(header["g"]), k=float(header["k"])),
    )


# ---------------------------------------------------------------------------
# ground truth and manifests
# ---------------------------------------------------------------------------

def read_gt(path: str) -> list[GtAxis]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except FileNotFoundError as exc:
        raise InputError(f"ground-truth file not found: {path!r}") from exc
    axes = []
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.replace(",", " ").split()
        if len(parts) != 4:
            raise InputError(
                f"{path}:{lineno}: expected 'x1 y1 x2 y2', got {line.strip()!r}"
            )
        try:
            x1, y1, x2, y2 = (float(p) for p in parts)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: non-numeric coordinate") from exc
        axes.append(GtAxis(endpoints=np.array([[x1, y1], [x2, y2]])))
    return axes


def write_gt(axes, path: str) -> None:
    lines = []
    for a in axes:
        (x1, y1), (x2, y2) = np.asarray(a.endpoints, dtype=np.float64)
        lines.append(" ".join(repr(float(v)) for v in (x1, y1, x2, y2)))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_manifest(path: str) -> list[dict]:
    """Entries with absolute ``image``/``ground_truth`` paths and the image
    ``stem`` used to pair detection files."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"manifest not found: {path!r}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed manifest JSON {path!r}: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("images"), list):
        raise InputError(f"manifest {path!r} must hold {{'images': [...]}}")
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for rec in data["images"]:
        if not isinstance(rec, dict) or "image" not in rec or "ground_truth" not in rec:
            raise InputError(
                f"manifest entries need 'image' and 'ground_truth' keys: {rec!r}"
            )
        image = os.path.normpath(os.path.join(base, rec["image"]))
        gt = os.path.normpath(os.path.join(base, rec["ground_truth"]))
        stem = os.path.splitext(os.path.basename(image))[0]
        entries.append({"image": image, "ground_truth": gt, "stem": stem})
    if not entries:
        raise InputError(f"manifest {path!r} lists no images")
    return entries


def write_manifest(entries, path: str) -> None:
    base = os.path.dirname(os.path.abspath(path))
    records = [
        {
            "image": os.path.relpath(e["image"], base),
            "ground_truth": os.path.relpath(e["ground_truth"], base),
        }
        for e in entries
    ]
    _atomic_write_json(path, {"images": records})
