"""Rendering of maps and comparison figures.

Raw heatmap PNGs use the fixed lookup table below (linear interpolation
between anchors) so golden-image tests stay stable across library versions;
matplotlib is used for the summary figures that accompany CSV output, saved
with pinned metadata so reruns are byte-identical.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import hsv_to_rgb

from .imgcore import RgbImage

# anchor table for error/disparity heatmaps: position in [0, 1] -> RGB
HEAT_ANCHORS = (
    (0.00, (0.05, 0.05, 0.30)),
    (0.25, (0.00, 0.30, 0.95)),
    (0.50, (0.00, 0.85, 0.60)),
    (0.75, (0.95, 0.90, 0.10)),
    (1.00, (0.90, 0.10, 0.10)),
)

_SAVEFIG_KW = {"dpi": 110, "metadata": {"Software": "phasespeckle"}}


def apply_heat_lut(values: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] through the anchor table; NaN renders black."""
    v = np.clip(np.nan_to_num(values, nan=0.0), 0.0, 1.0)
    pos = np.array([a[0] for a in HEAT_ANCHORS])
    cols = np.array([a[1] for a in HEAT_ANCHORS])
    out = np.empty(v.shape + (3,), dtype=np.float64)
    for c in range(3):
        out[..., c] = np.interp(v, pos, cols[:, c])
    out[~np.isfinite(values)] = 0.0
    return out


def heatmap_image(plane: np.ndarray, vmax: float) -> RgbImage:
    """Fixed-LUT rendering of a nonnegative plane scaled by vmax."""
    if vmax <= 0:
        raise ValueError("vmax must be positive")
    return RgbImage.from_stack(apply_heat_lut(plane / vmax))


def phase_hue_image(phase: np.ndarray, valid: np.ndarray | None = None) -> RgbImage:
    """Wrapped phase as hue (full saturation); invalid pixels render black."""
    h = (phase + np.pi) / (2.0 * np.pi)
    hsv = np.stack([np.clip(h, 0.0, 1.0), np.ones_like(h), np.ones_like(h)], axis=-1)
    rgb = hsv_to_rgb(hsv)
    if valid is not None:
        rgb[~valid] = 0.0
    return RgbImage.from_stack(rgb)


def disparity_color_image(disp: np.ndarray, d_max: float) -> RgbImage:
    """Disparity rendered through the fixed LUT; NaN renders black."""
    return heatmap_image(np.where(np.isfinite(disp), disp, np.nan), d_max)


def save_compare_figure(reports: list, path: str) -> None:
    """Bar chart of EPE and D1 per labeled run, alongside the CSV table."""
    items = sorted(reports, key=lambda t: t[0])
    labels = [label for label, _ in items]
    epes = [rep.epe for _, rep in items]
    d1s = [rep.d1 * 100.0 for _, rep in items]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    xs = np.arange(len(labels))
    ax1.bar(xs, epes, color="#33658a")
    ax1.set_xticks(xs)
    ax1.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax1.set_ylabel("EPE [px]")
    ax2.bar(xs, d1s, color="#f26419")
    ax2.set_xticks(xs)
    ax2.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax2.set_ylabel("D1 [%]")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)


def save_error_histogram(error_map: np.ndarray, path: str, threshold: float) -> None:
    """Distribution of absolute disparity errors over the evaluated set."""
    errs = error_map[np.isfinite(error_map)]
    fig, ax = plt.subplots(figsize=(6, 4))
    if errs.size:
        ax.hist(errs, bins=64, color="#33658a")
    ax.axvline(threshold, color="#f26419", linestyle="--", label=f"threshold {threshold:g}px")
    ax.set_xlabel("|disparity error| [px]")
    ax.set_ylabel("pixels")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)
