"""Overlay rendering: detected axes drawn over the image.

Axes are drawn strongest-first in the conventional five-color order (red,
yellow, green, blue, magenta — repeating if needed) with small filled
squares capping the endpoints. An optional side panel shows the density
grid (rows = rho, columns = theta) through a fixed dark-to-bright
colormap. Rendering is fully deterministic.
"""

import numpy as np
from PIL import Image, ImageDraw

from .errors import InputError

__all__ = ["AXIS_COLORS", "render_overlay", "density_panel"]

AXIS_COLORS = [
    (255, 0, 0),      # red
    (255, 255, 0),    # yellow
    (0, 255, 0),      # green
    (0, 0, 255),      # blue
    (255, 0, 255),    # magenta
]

# Dark-to-bright anchor gradient for the density panel.
_HEAT_STOPS = [
    (0.00, (0, 0, 8)),
    (0.25, (64, 12, 118)),
    (0.50, (180, 54, 88)),
    (0.75, (250, 140, 40)),
    (1.00, (252, 252, 190)),
]


def _check_consistent(record: dict, width: int, height: int) -> None:
    """Detections must be geometrically plausible for this image: endpoints
    inside the reachable normalized band and on the (theta, rho) line."""
    max_dim = float(max(width, height))
    cx, cy = width / 2.0, height / 2.0
    n = np.array([np.cos(record["theta"]), np.sin(record["theta"])])
    for px, py in ((record["x1"], record["y1"]), (record["x2"], record["y2"])):
        ex = (px - cx) / max_dim
        ey = (py - cy) / max_dim
        if abs(ex) > 1.02 or abs(ey) > 1.02:
            raise InputError(
                "detection endpoint far outside the image frame -- detections "
                f"do not belong to a {width}x{height} image"
            )
        line_err = abs(ex * n[0] + ey * n[1] - record["rho"]) * max_dim
        if line_err > 0.5:
            raise InputError(
                "detection endpoints inconsistent with their (theta, rho) in "
                f"this {width}x{height} frame (off-line by {line_err:.2f} px)"
            )


def _heat_lut() -> np.ndarray:
    lut = np.zeros((256, 3), dtype=np.uint8)
    xs = np.arange(256) / 255.0
    pos = np.array([p for p, _ in _HEAT_STOPS])
    cols = np.array([c for _, c in _HEAT_STOPS], dtype=np.float64)
    for ch in range(3):
        lut[:, ch] = np.interp(xs, pos, cols[:, ch]).round().astype(np.uint8)
    return lut


def density_panel(values: np.ndarray, height: int, width: int | None = None) -> Image.Image:
    """Render a density matrix to a colormapped image of the given height."""
    v = np.asarray(values, dtype=np.float64)
    peak = v.max()
    norm = v / peak if peak > 0 else np.zeros_like(v)
    idx = np.clip((norm * 255.0).round().astype(np.int64), 0, 255)
    rgb = _heat_lut()[idx]
    panel = Image.fromarray(rgb.astype(np.uint8), mode="RGB")
    if width is None:
        width = max(96, height // 4)
    return panel.resize((width, height), resample=Image.NEAREST)


def render_overlay(
    image: Image.Image,
    detections: list[dict],
    density: np.ndarray | None = None,
) -> Image.Image:
    """Draw detections (strongest first) over an RGB image.

    With no detections the image pixels pass through unchanged. Raises
    :class:`InputError` when detection coordinates cannot belong to an
    image of these dimensions.
    """
    canvas = image.convert("RGB")
    width, height = canvas.size
    for rec in detections:
        _check_consistent(rec, width, height)

    ranked = sorted(range(len(detections)), key=lambda i: -detections[i]["score"])
    draw = ImageDraw.Draw(canvas)
    line_w = max(2, round(min(width, height) / 160))
    cap = 1.5 * line_w
    for rank, i in enumerate(ranked):
        rec = detections[i]
        color = AXIS_COLORS[rank % len(AXIS_COLORS)]
        draw.line(
            [(rec["x1"], rec["y1"]), (rec["x2"], rec["y2"])],
            fill=color,
            width=line_w,
        )
        for px, py in ((rec["x1"], rec["y1"]), (rec["x2"], rec["y2"])):
            draw.rectangle([px - cap, py - cap, px + cap, py + cap], fill=color)

    if density is None:
        return canvas
    panel = density_panel(density, height)
    gap = 8
    out = Image.new("RGB", (width + gap + panel.width, height), (24, 24, 24))
    out.paste(canvas, (0, 0))
    out.paste(panel, (width + gap, 0))
    return out
