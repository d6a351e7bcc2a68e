"""Synthetic rectified active-stereo renderer with exact ground truth.

Scenes are ordered stacks of planar-disparity layers (front to back, cardboard
cutouts over left-view regions; the last layer must cover the full frame so
ground truth is total).  The projector sits on the stereo axis at a fraction
kappa = proj_baseline / baseline of the camera baseline, so the pattern
coordinate of the surface point seen at left pixel (x, y) is

    x_p = x - kappa * d(x, y)

and the right camera sees the same point at x_r = x - d.  Both views sample
the same radiance

    I_c = crosstalk . (albedo_c * pattern_c(x_p, y) + ambient_c)

which makes photometric consistency exact for noise-free integer-disparity
surfaces.  Occlusion is computed per scanline by exact interval coverage:
a pixel is hidden in the right view when its right-view coordinate falls
inside the right-view interval of any strictly-in-front layer (or outside
the right image entirely).

Projector shadows are modeled the same way: a surface point whose projector
ray is intercepted by a strictly-in-front layer receives ambient light only
(the shadow strip next to a foreground edge is always contained in that
edge's right-view occlusion band when kappa <= 1).  Samples outside the
projector frustum (x_p outside the pattern) are likewise unlit.  Sensor
noise is counter-based per (seed, view, pixel, channel), so renders are
bit-identical regardless of how work is chunked.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .imgcore import DisparityMap, GrayImage, RgbImage, ValidityMask

_IDENTITY3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


@dataclass
class RigSpec:
    """Rectified pinhole stereo pair plus on-axis projector."""

    focal: float = 1200.0        # pixels
    baseline: float = 165.0      # mm between cameras
    proj_baseline: float = 82.5  # mm, projector offset from left camera
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if self.focal <= 0 or self.baseline <= 0:
            raise ValueError("focal and baseline must be positive")
        if self.proj_baseline < 0:
            raise ValueError("projector baseline must be >= 0")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")

    @property
    def kappa(self) -> float:
        """Disparity-to-projector-shift ratio."""
        return self.proj_baseline / self.baseline

    def to_dict(self) -> dict:
        return {
            "focal": self.focal,
            "baseline": self.baseline,
            "proj_baseline": self.proj_baseline,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RigSpec":
        return cls(**d)


@dataclass
class Layer:
    """One planar surface: left-view region, disparity plane, per-channel albedo.

    region is (x0, y0, x1, y1) half-open, or None for the full frame.
    disparity is (d0, dx, dy) meaning d(x, y) = d0 + dx*x + dy*y.
    """

    region: tuple | None
    disparity: tuple
    reflectance: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.region is not None:
            x0, y0, x1, y1 = self.region
            if not (x0 < x1 and y0 < y1):
                raise ValueError(f"empty layer region {self.region}")
        d0, dx, dy = self.disparity
        if dx >= 1.0:
            raise ValueError("disparity x-gradient must be < 1 (no self-occlusion)")
        for rho in self.reflectance:
            if not (0.0 <= rho <= 1.5):
                raise ValueError("reflectance must lie in [0, 1.5]")

    def d_at(self, x, y):
        d0, dx, dy = self.disparity
        return d0 + dx * np.asarray(x, dtype=np.float64) + dy * np.asarray(y, dtype=np.float64)

    def to_dict(self) -> dict:
        return {
            "region": list(self.region) if self.region is not None else None,
            "disparity": list(self.disparity),
            "reflectance": list(self.reflectance),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Layer":
        region = tuple(d["region"]) if d.get("region") is not None else None
        return cls(region, tuple(d["disparity"]), tuple(d.get("reflectance", (1.0, 1.0, 1.0))))


@dataclass
class SceneSpec:
    """Layered scene plus capture conditions."""

    layers: list
    ambient: tuple = (0.0, 0.0, 0.0)
    crosstalk: tuple = _IDENTITY3
    noise_sigma: float = 0.0
    quantize8: bool = False

    def __post_init__(self):
        if not self.layers:
            raise ValueError("scene needs at least one layer")
        if self.layers[-1].region is not None:
            raise ValueError("backmost layer must cover the full frame")
        m = np.asarray(self.crosstalk, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("crosstalk must be a 3x3 matrix")
        if np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-6):
            raise ValueError("crosstalk matrix must be row-stochastic")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be >= 0")

    def to_dict(self) -> dict:
        return {
            "layers": [l.to_dict() for l in self.layers],
            "ambient": list(self.ambient),
            "crosstalk": [list(row) for row in self.crosstalk],
            "noise_sigma": self.noise_sigma,
            "quantize8": self.quantize8,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        return cls(
            layers=[Layer.from_dict(l) for l in d["layers"]],
            ambient=tuple(d.get("ambient", (0.0, 0.0, 0.0))),
            crosstalk=tuple(tuple(r) for r in d.get("crosstalk", _IDENTITY3)),
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            quantize8=bool(d.get("quantize8", False)),
        )


@dataclass
class RenderOutput:
    left: RgbImage
    right: RgbImage
    gt_disparity: DisparityMap
    occlusion: ValidityMask        # True = visible in both views
    proj_coord: GrayImage          # ground-truth projector x per left pixel


def _scene_d_max(scene: SceneSpec, width: int, height: int) -> float:
    """Largest disparity over the left view; planar layers peak at region corners."""
    d_max = 0.0
    for layer in scene.layers:
        x0, y0, x1, y1 = layer.region if layer.region is not None else (0, 0, width, height)
        x0, x1 = max(x0, 0), min(x1, width)
        y0, y1 = max(y0, 0), min(y1, height)
        if x0 >= x1 or y0 >= y1:
            continue
        corners = [(x0, y0), (x1 - 1, y0), (x0, y1 - 1), (x1 - 1, y1 - 1)]
        for cx, cy in corners:
            d = float(layer.d_at(cx, cy))
            if d < 0:
                raise ValueError(f"layer disparity {d:.3f} < 0 at ({cx}, {cy})")
            d_max = max(d_max, d)
    return d_max


def _sample_pattern(pat: np.ndarray, ys, xs) -> np.ndarray:
    """Linear interpolation of pattern rows at fractional x; 0 outside the frustum.

    pat is (Hp, Wp, 3); a height-1 pattern broadcasts its single row (column
    codes are constant in y).
    """
    hp, wp = pat.shape[:2]
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.zeros_like(xs, dtype=np.int64) if hp == 1 else np.broadcast_to(ys, xs.shape)
    inb = (xs >= 0.0) & (xs <= wp - 1.0)
    xc = np.clip(xs, 0.0, wp - 1.0)
    if wp == 1:
        out = pat[ys, 0].copy()
    else:
        x0 = np.minimum(np.floor(xc).astype(np.int64), wp - 2)
        t = (xc - x0)[..., None]
        out = (1.0 - t) * pat[ys, x0] + t * pat[ys, x0 + 1]
    out[~inb] = 0.0
    return out


def _layer_interval(layer: Layer, y: int, width: int, extend: float):
    """Half-open x-interval this layer spans on scanline y, or None."""
    if layer.region is None:
        return (0.0, float(width) + extend)
    x0, y0, x1, y1 = layer.region
    if not (y0 <= y < y1):
        return None
    return (float(x0), float(x1))


def render(scene: SceneSpec, rig: RigSpec, pattern: RgbImage, seed: int = 0) -> RenderOutput:
    """Render a rectified stereo pair with analytic GT, occlusion, and projector coords."""
    w, h = rig.width, rig.height
    kappa = rig.kappa
    pat = pattern.stack()
    if pat.shape[0] != 1 and pat.shape[0] < h:
        raise ValueError(f"pattern height {pat.shape[0]} < render height {h}")

    d_max = _scene_d_max(scene, w, h)
    if d_max >= w:
        raise ValueError(f"disparity {d_max:.1f} out of range (must stay below width {w})")
    if pattern.width < w + kappa * d_max:
        raise ValueError(
            f"pattern too narrow: width {pattern.width} < {w} + kappa*d_max = "
            f"{w + kappa * d_max:.1f}"
        )
    extend = math.ceil(d_max) + 2.0

    albedos = np.asarray([l.reflectance for l in scene.layers], dtype=np.float64)
    ambient = np.asarray(scene.ambient, dtype=np.float64)
    mix = np.asarray(scene.crosstalk, dtype=np.float64)

    # --- left view: front-most layer per pixel -------------------------------
    yy, xx = np.mgrid[0:h, 0:w]
    layer_idx = np.full((h, w), -1, dtype=np.int64)
    for li, layer in enumerate(scene.layers):
        if layer.region is None:
            inside = layer_idx < 0
        else:
            x0, y0, x1, y1 = layer.region
            inside = (layer_idx < 0) & (xx >= x0) & (xx < x1) & (yy >= y0) & (yy < y1)
        layer_idx[inside] = li

    d0s = np.asarray([l.disparity[0] for l in scene.layers])
    dxs = np.asarray([l.disparity[1] for l in scene.layers])
    dys = np.asarray([l.disparity[2] for l in scene.layers])
    gt = d0s[layer_idx] + dxs[layer_idx] * xx + dys[layer_idx] * yy
    proj = xx - kappa * gt

    def _row_intervals(y):
        """Per-layer (right-view interval, projector interval) on scanline y."""
        out = []
        for layer in scene.layers:
            iv = _layer_interval(layer, y, w, extend)
            if iv is None:
                out.append(None)
                continue
            x0, x1 = iv
            d0r, dxr, dyr = layer.disparity
            d0y = d0r + dyr * y
            u = (x0 - (d0y + dxr * x0), x1 - (d0y + dxr * x1))
            p = (x0 - kappa * (d0y + dxr * x0), x1 - kappa * (d0y + dxr * x1))
            out.append((u, p))
        return out

    def _in_front_shadow(xp, intervals, li):
        """Projector rays blocked by any layer strictly in front of layer li."""
        shadow = np.zeros(xp.shape, dtype=bool)
        for front in intervals[:li]:
            if front is not None:
                s, e = front[1]
                shadow |= (xp >= s) & (xp < e)
        return shadow

    # --- occlusion + projector shadow: exact interval coverage ---------------
    visible = np.zeros((h, w), dtype=bool)
    lit = np.ones((h, w), dtype=bool)
    for y in range(h):
        intervals = _row_intervals(y)
        row_idx = layer_idx[y]
        for li, layer in enumerate(scene.layers):
            if intervals[li] is None:
                continue
            own = row_idx == li
            if not own.any():
                continue
            xs = np.nonzero(own)[0]
            u = xs - layer.d_at(xs, y)
            vis = (u >= 0.0) & (u <= w - 1.0)
            for front in intervals[:li]:
                if front is not None:
                    s, e = front[0]
                    vis &= ~((u >= s) & (u < e))
            visible[y, xs] = vis
            lit[y, xs] = ~_in_front_shadow(proj[y, xs], intervals, li)

    radiance = albedos[layer_idx] * _sample_pattern(pat, yy, proj)
    radiance[~lit] = 0.0
    left = (radiance + ambient) @ mix.T

    # --- right view: painter's order over full layer intervals ---------------
    right = np.zeros((h, w, 3), dtype=np.float64)
    for y in range(h):
        intervals = _row_intervals(y)
        for li in range(len(scene.layers) - 1, -1, -1):
            if intervals[li] is None:
                continue
            u0, u1 = intervals[li][0]
            lo = max(0, math.ceil(u0))
            hi = min(w, math.ceil(u1))
            if lo >= hi:
                continue
            d0r, dxr, dyr = scene.layers[li].disparity
            d0y = d0r + dyr * y
            us = np.arange(lo, hi, dtype=np.float64)
            xl = (us + d0y) / (1.0 - dxr)
            xp = xl - kappa * (d0y + dxr * xl)
            rad = albedos[li] * _sample_pattern(pat, np.full(us.shape, y, dtype=np.int64), xp)
            rad[_in_front_shadow(xp, intervals, li)] = 0.0
            right[y, lo:hi] = (rad + ambient) @ mix.T

    # --- sensor model ---------------------------------------------------------
    if scene.noise_sigma > 0:
        left = left + rng.gaussian_field(seed, left.shape, scene.noise_sigma, stream=0)
        right = right + rng.gaussian_field(seed, right.shape, scene.noise_sigma, stream=1)
    if scene.quantize8:
        left = _quantize8(left)
        right = _quantize8(right)

    return RenderOutput(
        left=RgbImage.from_stack(left),
        right=RgbImage.from_stack(right),
        gt_disparity=DisparityMap(gt),
        occlusion=ValidityMask(visible),
        proj_coord=GrayImage(proj),
    )


def _quantize8(arr: np.ndarray) -> np.ndarray:
    return np.floor(np.clip(arr, 0.0, 1.0) * 255.0 + 0.5) / 255.0


def perturb(
    img: RgbImage,
    gains=(1.0, 1.0, 1.0),
    offsets=(0.0, 0.0, 0.0),
    crosstalk=_IDENTITY3,
    noise_sigma: float = 0.0,
    seed: int = 0,
    quantize8: bool = False,
) -> RgbImage:
    """Photometric domain-shift generator: I' = M.(gains*I + offsets) + noise.

    Values are clamped to [0, 1] only when quantize8 is set (the float path
    keeps full headroom so invariance tests see no clipping).
    """
    gains = np.asarray(gains, dtype=np.float64)
    if np.any(gains < 0):
        raise ValueError("gains must be >= 0")
    offsets = np.asarray(offsets, dtype=np.float64)
    mix = np.asarray(crosstalk, dtype=np.float64)
    if mix.shape != (3, 3):
        raise ValueError("crosstalk must be a 3x3 matrix")
    arr = img.stack() * gains + offsets
    arr = arr @ mix.T
    if noise_sigma > 0:
        arr = arr + rng.gaussian_field(seed, arr.shape, noise_sigma, stream=0)
    if quantize8:
        arr = _quantize8(arr)
    return RgbImage.from_stack(arr)


PRESET_NAMES = ("flat", "steps", "ramp", "boxes", "lowalbedo")


def preset_scene(name: str, width: int = 640, height: int = 480) -> SceneSpec:
    """Deterministic desk-scale test scenes; all layer disparities are constant
    even integers (with the default kappa = 0.5 rig this keeps Gray-code
    ground truth free of half-integer rounding ambiguity)."""
    w, h = width, height

    def rect(fx0, fy0, fx1, fy1):
        return (int(fx0 * w), int(fy0 * h), int(fx1 * w), int(fy1 * h))

    if name == "flat":
        layers = [Layer(None, (16.0, 0.0, 0.0))]
        ambient = (0.02, 0.02, 0.02)
    elif name == "steps":
        layers = [
            Layer(rect(0.375, 0.375, 0.625, 0.625), (50.0, 0.0, 0.0)),
            Layer(rect(0.25, 0.25, 0.75, 0.75), (30.0, 0.0, 0.0)),
            Layer(None, (10.0, 0.0, 0.0)),
        ]
        ambient = (0.02, 0.02, 0.02)
    elif name == "ramp":
        # vertical staircase of even disparities: the honest rendering of a
        # ramp under the even-integer constraint above
        bands = 15
        band_h = h / bands
        layers = [
            Layer((0, int(i * band_h), w, int((i + 1) * band_h)), (8.0 + 2.0 * i, 0.0, 0.0))
            for i in range(1, bands)
        ]
        layers.append(Layer(None, (8.0, 0.0, 0.0)))
        ambient = (0.02, 0.02, 0.02)
    elif name == "boxes":
        layers = [
            Layer(rect(0.15, 0.55, 0.40, 0.85), (56.0, 0.0, 0.0)),
            Layer(rect(0.55, 0.15, 0.85, 0.45), (40.0, 0.0, 0.0)),
            Layer(rect(0.60, 0.60, 0.90, 0.90), (32.0, 0.0, 0.0)),
            Layer(rect(0.10, 0.10, 0.35, 0.40), (24.0, 0.0, 0.0)),
            Layer(None, (8.0, 0.0, 0.0)),
        ]
        ambient = (0.02, 0.02, 0.02)
    elif name == "lowalbedo":
        # albedo patchwork on a flat background plane (reflectance boundaries
        # without depth edges) plus two well-lit boxes; spans albedo 0.11-1.2
        layers = [
            Layer(rect(0.10, 0.12, 0.34, 0.44), (28.0, 0.0, 0.0), (0.95, 0.90, 0.85)),
            Layer(rect(0.62, 0.52, 0.90, 0.88), (40.0, 0.0, 0.0), (0.70, 0.65, 0.60)),
            Layer(rect(0.0, 0.0, 0.333, 1.0), (12.0, 0.0, 0.0), (0.15, 0.13, 0.11)),
            Layer(rect(0.333, 0.0, 0.667, 1.0), (12.0, 0.0, 0.0), (1.20, 1.15, 1.10)),
            Layer(rect(0.667, 0.0, 1.0, 0.5), (12.0, 0.0, 0.0), (0.30, 0.26, 0.22)),
            Layer(None, (12.0, 0.0, 0.0), (0.55, 0.50, 0.45)),
        ]
        ambient = (0.05, 0.04, 0.06)
    else:
        raise ValueError(f"unknown preset scene {name!r} (choose from {PRESET_NAMES})")
    return SceneSpec(layers=layers, ambient=ambient)
