"""Local stereo matcher over raw RGB or decoded-phase features.

Deliberately plain: per-pixel SSD over a square window, winner-take-all over
the disparity range, optional parabola subpixel refinement, optional
left-right consistency check.  The point is a controlled instrument for the
photometric-robustness experiments, not matching sophistication.

Phase inputs are embedded as (cos phi, sin phi) before SSD: the squared
distance between two embeddings is 2 - 2*cos(delta phi), a proper circular
distance with no seam at the wrap point.  Invalid pixels embed to (0, 0),
which penalizes any window overlapping masked regions.

Set PHASESPECKLE_THREADS to parallelize the cost volume over disparities;
results are bit-identical at any thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .imgcore import DisparityMap, RgbImage
from .ppn import PpnResult


@dataclass
class MatchParams:
    d_min: int = 0
    d_max: int = 64
    window: int = 5          # window radius; full window is (2r+1)^2
    mode: str = "phase"      # "phase" or "rgb"
    lr_threshold: float = 1.0
    subpixel: bool = True

    def __post_init__(self):
        if not (0 <= self.d_min < self.d_max):
            raise ValueError("need 0 <= d_min < d_max")
        if not (1 <= self.window <= 15):
            raise ValueError("window radius must be in [1, 15]")
        if self.mode not in ("phase", "rgb"):
            raise ValueError(f"unknown matcher mode {self.mode!r}")

    def to_dict(self) -> dict:
        return {
            "d_min": self.d_min,
            "d_max": self.d_max,
            "window": self.window,
            "mode": self.mode,
            "lr_threshold": self.lr_threshold,
            "subpixel": self.subpixel,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MatchParams":
        return cls(**d)


def embed_phase(p: PpnResult) -> np.ndarray:
    """(H, W, 2) circular embedding (cos phi, sin phi); (0, 0) where invalid."""
    phi = p.phase.data
    emb = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    emb[~p.valid.data] = 0.0
    return emb


def features_rgb(img: RgbImage) -> np.ndarray:
    """(H, W, 3) raw channel features."""
    return img.stack()


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PHASESPECKLE_THREADS", "1")))
    except ValueError:
        return 1


def _box_sum(a: np.ndarray, r: int) -> np.ndarray:
    """Sum over (2r+1)^2 windows; only pixels with a full window are meaningful."""
    h, w = a.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    out = np.full((h, w), np.inf, dtype=np.float64)
    if h >= 2 * r + 1 and w >= 2 * r + 1:
        out[r : h - r, r : w - r] = (
            ii[2 * r + 1 :, 2 * r + 1 :]
            - ii[: h - 2 * r, 2 * r + 1 :]
            - ii[2 * r + 1 :, : w - 2 * r]
            + ii[: h - 2 * r, : w - 2 * r]
        )
    return out


def _cost_slice(left: np.ndarray, right: np.ndarray, d: int, r: int) -> np.ndarray:
    """Window SSD for one disparity; +inf where the shifted window leaves the image."""
    h, w = left.shape[:2]
    cost = np.full((h, w), np.inf, dtype=np.float64)
    if d >= w:
        return cost
    diff = left[:, d:] - right[:, : w - d]
    sq = np.einsum("hwc,hwc->hw", diff, diff)
    box = _box_sum(sq, r)
    cost[:, d:] = box
    return cost


def match(left: np.ndarray, right: np.ndarray, params: MatchParams) -> DisparityMap:
    """SSD winner-take-all disparity of `left` against `right` feature images.

    Inputs are (H, W, C) feature arrays from features_rgb or embed_phase.
    Border pixels without a full window (or with no feasible disparity) are
    invalid (NaN).
    """
    if left.shape != right.shape:
        raise ValueError(f"feature shapes differ: {left.shape} vs {right.shape}")
    h, w = left.shape[:2]
    if params.d_max >= w:
        raise ValueError(f"d_max {params.d_max} must be below image width {w}")
    r = params.window
    disparities = list(range(params.d_min, params.d_max + 1))
    volume = np.empty((len(disparities), h, w), dtype=np.float64)

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, c in enumerate(
                pool.map(lambda d: _cost_slice(left, right, d, r), disparities)
            ):
                volume[i] = c
    else:
        for i, d in enumerate(disparities):
            volume[i] = _cost_slice(left, right, d, r)

    best = np.argmin(volume, axis=0)
    best_cost = np.take_along_axis(volume, best[None], axis=0)[0]
    disp = (params.d_min + best).astype(np.float64)

    if params.subpixel:
        interior = (best > 0) & (best < len(disparities) - 1)
        c0 = best_cost
        cm = np.take_along_axis(volume, np.maximum(best - 1, 0)[None], axis=0)[0]
        cp = np.take_along_axis(
            volume, np.minimum(best + 1, len(disparities) - 1)[None], axis=0
        )[0]
        with np.errstate(invalid="ignore"):
            denom = cm - 2.0 * c0 + cp
            # c0 == 0 is already an exact minimum; the fitted vertex would
            # only add noise there
            ok = interior & np.isfinite(cm) & np.isfinite(cp) & (denom > 0) & (c0 > 0)
        delta = np.zeros_like(disp)
        delta[ok] = 0.5 * (cm[ok] - cp[ok]) / denom[ok]
        disp += np.clip(delta, -0.5, 0.5)

    disp[~np.isfinite(best_cost)] = np.nan
    yy, xx = np.mgrid[0:h, 0:w]
    border = (yy < r) | (yy >= h - r) | (xx < r) | (xx >= w - r)
    disp[border] = np.nan
    return DisparityMap(disp)


def match_right(left: np.ndarray, right: np.ndarray, params: MatchParams) -> DisparityMap:
    """Disparity map of the right view (x_l = x_r + d), via the mirror trick."""
    flipped = match(right[:, ::-1], left[:, ::-1], params)
    return DisparityMap(flipped.data[:, ::-1].copy())


def lr_check(
    d_left: DisparityMap, d_right: DisparityMap, lr_threshold: float
) -> DisparityMap:
    """Invalidate left pixels whose right-view counterpart disagrees.

    A pixel survives when |d_L(x) - d_R(x - round(d_L(x)))| <= lr_threshold
    and the target column is inside the right image.
    """
    if d_left.data.shape != d_right.data.shape:
        raise ValueError("disparity maps must share dimensions")
    h, w = d_left.data.shape
    out = d_left.data.copy()
    yy, xx = np.mgrid[0:h, 0:w]
    dl = d_left.data
    finite = np.isfinite(dl)
    target = np.where(finite, xx - np.round(np.where(finite, dl, 0.0)), -1).astype(np.int64)
    inb = finite & (target >= 0) & (target < w)
    dr = np.full((h, w), np.nan)
    dr[inb] = d_right.data[yy[inb], target[inb]]
    consistent = inb & np.isfinite(dr) & (np.abs(dl - dr) <= lr_threshold)
    out[finite & ~consistent] = np.nan
    return DisparityMap(out)


def match_pair(
    left: np.ndarray,
    right: np.ndarray,
    params: MatchParams,
    check: bool = True,
) -> DisparityMap:
    """Left disparity map, optionally filtered by left-right consistency."""
    d_left = match(left, right, params)
    if not check:
        return d_left
    d_right = match_right(left, right, params)
    return lr_check(d_left, d_right, params.lr_threshold)
