"""Image containers, masks, and bit-exact file I/O used by every other module.

All pixel data lives in row-major float64 numpy arrays in a nominal [0, 1]
range; 8-bit happens only at the PNG boundary.  Disparity maps mark invalid
pixels with quiet NaN so the PFM interchange format carries validity natively.

File formats:
  PNG  8- or 16-bit RGB/grayscale in, 8-bit RGB out (values clamped then
       quantized with round-half-up).
  PFM  single channel "Pf", little-endian (scale -1.0), bottom-up rows,
       NaN preserved bit-for-bit.
  PLY  ASCII point cloud, one "x y z red green blue" vertex per line.
"""

import os
from dataclasses import dataclass

import cv2
import numpy as np


class PngDecodeError(ValueError):
    """Raised when a PNG cannot be decoded into a supported image."""


class PfmFormatError(ValueError):
    """Raised on malformed PFM headers or truncated pixel data."""


def _as_plane(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a 2-D plane with positive size, got shape {arr.shape}")
    return arr


@dataclass
class GrayImage:
    """Single-channel float image, row-major, nominal range [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_plane(self.data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass
class RgbImage:
    """Three aligned float planes (r, g, b)."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.r = _as_plane(self.r)
        self.g = _as_plane(self.g)
        self.b = _as_plane(self.b)
        if not (self.r.shape == self.g.shape == self.b.shape):
            raise ValueError(
                f"plane shapes differ: r{self.r.shape} g{self.g.shape} b{self.b.shape}"
            )

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def width(self) -> int:
        return self.r.shape[1]

    def stack(self) -> np.ndarray:
        """(H, W, 3) view-copy in r, g, b channel order."""
        return np.stack([self.r, self.g, self.b], axis=-1)

    @classmethod
    def from_stack(cls, arr: np.ndarray) -> "RgbImage":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3), got {arr.shape}")
        return cls(arr[..., 0].copy(), arr[..., 1].copy(), arr[..., 2].copy())

    @classmethod
    def from_gray(cls, plane: np.ndarray) -> "RgbImage":
        plane = _as_plane(plane)
        return cls(plane.copy(), plane.copy(), plane.copy())


@dataclass
class DisparityMap:
    """Per-pixel disparity in pixels; NaN marks invalid. Finite values must be >= 0."""

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_plane(self.data)
        if np.isinf(self.data).any():
            raise ValueError("disparity values must be finite or NaN")
        finite = self.data[np.isfinite(self.data)]
        if finite.size and finite.min() < 0:
            raise ValueError("disparity values must be >= 0 (use NaN for invalid)")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def valid(self) -> np.ndarray:
        return np.isfinite(self.data)


@dataclass
class ValidityMask:
    """Boolean companion mask; True = usable pixel."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype != np.bool_:
            arr = arr.astype(bool)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


# ---------------------------------------------------------------------------
# PNG
# ---------------------------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
# IHDR color types we accept: 0 grayscale, 2 truecolor
_PNG_COLOR_NAMES = {0: "grayscale", 2: "rgb", 3: "palette", 4: "gray+alpha", 6: "rgba"}


def _read_ihdr(path: str):
    with open(path, "rb") as f:
        head = f.read(33)
    if len(head) < 33 or head[:8] != _PNG_MAGIC:
        raise PngDecodeError(f"{path}: not a PNG file (bad signature)")
    if head[12:16] != b"IHDR":
        raise PngDecodeError(f"{path}: first chunk is not IHDR")
    bit_depth = head[24]
    color_type = head[25]
    return bit_depth, color_type


def read_png(path: str) -> RgbImage:
    """Read an 8/16-bit RGB or grayscale PNG into float planes in [0, 1].

    Samples are divided by the channel maximum (255 or 65535); grayscale is
    replicated to all three planes.  Unsupported bit depths or color types
    raise PngDecodeError naming the offending property.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"PNG not found: {path}")
    bit_depth, color_type = _read_ihdr(path)
    if bit_depth not in (8, 16):
        raise PngDecodeError(f"{path}: unsupported bit depth {bit_depth} (need 8 or 16)")
    if color_type not in (0, 2):
        name = _PNG_COLOR_NAMES.get(color_type, str(color_type))
        raise PngDecodeError(f"{path}: unsupported color type '{name}' (need grayscale or rgb)")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise PngDecodeError(f"{path}: decoder failed")
    maxval = 255.0 if raw.dtype == np.uint8 else 65535.0
    scaled = raw.astype(np.float64) / maxval
    if scaled.ndim == 2:
        return RgbImage.from_gray(scaled)
    # OpenCV loads BGR
    return RgbImage(scaled[..., 2].copy(), scaled[..., 1].copy(), scaled[..., 0].copy())


def quantize_to_u8(plane: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize with round-half-up (0.5 -> 128)."""
    clipped = np.clip(plane, 0.0, 1.0)
    return np.floor(clipped * 255.0 + 0.5).astype(np.uint8)


def write_png(img: RgbImage, path: str) -> None:
    """Write an 8-bit RGB PNG; samples are clamped to [0, 1] before quantizing."""
    if not (np.all(np.isfinite(img.r)) and np.all(np.isfinite(img.g)) and np.all(np.isfinite(img.b))):
        raise ValueError("write_png requires finite samples")
    bgr = np.stack(
        [quantize_to_u8(img.b), quantize_to_u8(img.g), quantize_to_u8(img.r)], axis=-1
    )
    if not cv2.imwrite(path, bgr):
        raise OSError(f"could not write PNG: {path}")


def write_gray_png(plane: np.ndarray, path: str) -> None:
    """Convenience: write a single plane as 8-bit RGB (replicated channels)."""
    write_png(RgbImage.from_gray(plane), path)


# ---------------------------------------------------------------------------
# PFM
# ---------------------------------------------------------------------------


def write_pfm(disp: DisparityMap, path: str) -> None:
    """Write a single-channel PFM: "Pf", scale -1.0 (little-endian), bottom-up rows."""
    data = disp.data.astype("<f4")
    header = f"Pf\n{disp.width} {disp.height}\n-1.0\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.flipud(data).tobytes())


def read_mask_png(path: str) -> ValidityMask:
    """Read a mask PNG: any channel value above half scale counts as True."""
    img = read_png(path)
    return ValidityMask(img.g > 0.5)


def write_mask_png(mask: ValidityMask, path: str) -> None:
    write_gray_png(mask.data.astype(np.float64), path)


def read_float_pfm(path: str) -> np.ndarray:
    """Read a single-channel PFM into a float64 plane (no range constraint)."""
    with open(path, "rb") as f:
        ident = f.readline().strip()
        if ident != b"Pf":
            raise PfmFormatError(f"{path}: expected 'Pf' header, got {ident!r}")
        dims = f.readline().split()
        if len(dims) != 2:
            raise PfmFormatError(f"{path}: malformed dimensions line")
        width, height = int(dims[0]), int(dims[1])
        try:
            scale = float(f.readline().strip())
        except ValueError as exc:
            raise PfmFormatError(f"{path}: malformed scale line") from exc
        endian = "<f4" if scale < 0 else ">f4"
        payload = f.read(width * height * 4)
    if len(payload) != width * height * 4:
        raise PfmFormatError(
            f"{path}: expected {width * height * 4} data bytes, got {len(payload)}"
        )
    rows = np.frombuffer(payload, dtype=endian).reshape(height, width)
    return np.flipud(rows).astype(np.float64)


def read_pfm(path: str) -> DisparityMap:
    """Read a disparity PFM; finite values must be >= 0, NaN marks invalid."""
    return DisparityMap(read_float_pfm(path))


def write_float_pfm(plane: np.ndarray, path: str) -> None:
    """Write an arbitrary float plane (e.g. phase, coordinates) as PFM."""
    plane = _as_plane(plane)
    data = plane.astype("<f4")
    header = f"Pf\n{plane.shape[1]} {plane.shape[0]}\n-1.0\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.flipud(data).tobytes())


# ---------------------------------------------------------------------------
# PLY
# ---------------------------------------------------------------------------


def write_ply(points, path: str) -> None:
    """Write an ASCII PLY point cloud.

    `points` is an iterable of (x, y, z, r, g, b) with metric coordinates and
    8-bit colors.  Coordinates must be finite.
    """
    rows = []
    for p in points:
        x, y, z, r, g, b = p
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            raise ValueError("PLY points must have finite coordinates")
        rows.append(f"{x:.6f} {y:.6f} {z:.6f} {int(r)} {int(g)} {int(b)}")
    header = (
        "ply\n"
        "format ascii 1.0\n"
        "comment exported by phasespeckle (principal point at image center)\n"
        f"element vertex {len(rows)}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )
    with open(path, "w", encoding="ascii") as f:
        f.write(header)
        for line in rows:
            f.write(line + "\n")
