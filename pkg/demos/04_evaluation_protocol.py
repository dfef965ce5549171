"""Evaluation protocol: from detections to a precision-recall curve.

Scoring detected axes against ground truth needs three rules, each easy
to get subtly wrong:

* **Matching.** A detection matches a truth segment when their angles
  (compared modulo a half turn) differ by less than 10 degrees AND their
  centers sit closer than 20% of the shorter segment's length. Several
  detections may legitimately match the same truth -- each counts as a
  true positive -- but one detection never counts twice.
* **Clustering.** Before matching, near-duplicate detections are merged
  greedily by score so a detector cannot farm true positives by emitting
  the same axis five times.
* **Sweeping.** One global score threshold sweeps across all images,
  giving a precision-recall curve; the operating point reported is the
  threshold maximizing F1.

This script builds a small synthetic benchmark with known outcomes (an
exact hit, a near-duplicate, an impostor just outside the angle
tolerance, a pair of detections sharing one truth, and an undetected
image), prints the hand-checkable count table, and plots the PR curve.

Run from the repository root:

    python3 demos/04_evaluation_protocol.py
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from symkde import Detection, GtAxis, pr_curve, report_at_threshold


OUT_DIR = os.path.join(os.path.dirname(__file__), "output")


def segment(cx, cy, angle_deg, length):
    phi = np.radians(angle_deg)
    half = 0.5 * length * np.array([np.cos(phi), np.sin(phi)])
    center = np.array([cx, cy], dtype=np.float64)
    return np.array([center - half, center + half])


def build_benchmark():
    """Three images; every detection's fate is decided by hand first."""
    img1 = (
        [
            # exact hit on the vertical truth
            Detection(endpoints=segment(100, 100, 90, 160), score=0.95),
            # near-duplicate 3 px away: clustering folds it into the hit
            Detection(endpoints=segment(103, 100, 90, 150), score=0.90),
            # 10.1 degrees off: just outside the angle tolerance -> FP
            Detection(endpoints=segment(100, 100, 79.9, 160), score=0.70),
        ],
        [
            GtAxis(endpoints=segment(100, 100, 90, 160)),   # found
            GtAxis(endpoints=segment(100, 100, 0, 160)),    # missed -> FN
        ],
    )
    img2 = (
        [
            # 9.9 degrees off either way: both inside the tolerance, and
            # 19.8 degrees apart so clustering keeps both -> two TPs on
            # one truth
            Detection(endpoints=segment(60, 100, 80.1, 160), score=0.85),
            Detection(endpoints=segment(60, 100, 99.9, 160), score=0.80),
        ],
        [
            GtAxis(endpoints=segment(60, 100, 90, 160)),    # found twice
            GtAxis(endpoints=segment(160, 100, 90, 140)),   # missed -> FN
        ],
    )
    img3 = ([], [GtAxis(endpoints=segment(50, 50, 0, 80)),
                 GtAxis(endpoints=segment(50, 50, 90, 80))])  # 2 FN
    return [img1, img2, img3]


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    bench = build_benchmark()

    print("threshold sweep (hand-checkable):")
    print("  thresh   tp fp fn   precision recall f1")
    curve = pr_curve(bench)
    for t in curve.thresholds:
        r = report_at_threshold(bench, t)
        label = "  inf " if np.isinf(t) else f"  {t:.2f} "
        print(f"{label}    {r.tp}  {r.fp}  {r.fn}   "
              f"{r.precision:9.3f} {r.recall:6.3f} {r.f1:.3f}")

    best_t = curve.max_f1_threshold
    best = report_at_threshold(bench, best_t)
    print(f"\nbest operating point: threshold {best_t:.2f} "
          f"(F1 {curve.max_f1:.3f}; tp={best.tp} fp={best.fp} fn={best.fn})")

    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(curve.recalls, curve.precisions, marker="o", lw=1.2)
    for t, p, r in zip(curve.thresholds, curve.precisions, curve.recalls):
        label = "inf" if np.isinf(t) else f"{t:.2f}"
        ax.annotate(label, (r, p), textcoords="offset points",
                    xytext=(8, -4), fontsize=8)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.set_title("PR sweep over the synthetic benchmark\n"
                 "(point labels = score threshold)")
    fig.tight_layout()
    fig.savefig(os.path.join(OUT_DIR, "04_pr_curve.png"), dpi=110)
    plt.close(fig)
    print(f"figure written to {OUT_DIR}/04_pr_curve.png")


if __name__ == "__main__":
    main()
