"""Gray-code stacks: generation, decoding, and stereo ground truth.

Column positions are encoded as reflected binary (v XOR v>>1) bit planes;
each code frame ships with its inverse so binarization is a per-pixel
comparison (code > inverse) that needs no global threshold and tolerates
albedo variation.  All-white and all-black frames provide the contrast
validity test.  Frame i carries bit i of the code (LSB first); the stack
layout is [code_0, inv_0, code_1, inv_1, ..., white, black].

Subpixel refinement: along each row, runs of equal integer column are
replaced by evenly spaced coordinates centered on the integer, which makes
the decoded sweep monotone.  Ground-truth disparity then comes from
intersecting the two cameras' coordinate sweeps: for a left pixel with
coordinate c, the right row is searched for the unique adjacent valid pair
bracketing c and the crossing is interpolated linearly.  No bracket (the
point is occluded) or several brackets (depth discontinuity) invalidate the
pixel instead of guessing.
"""

from dataclasses import dataclass

import numpy as np

from .imgcore import DisparityMap, GrayImage, RgbImage, ValidityMask

DEFAULT_CONTRAST_THRESHOLD = 0.05


def gray_encode(v: int) -> int:
    """Reflected binary code: adjacent integers differ in exactly one bit."""
    if v < 0:
        raise ValueError("gray_encode needs v >= 0")
    return v ^ (v >> 1)


def gray_decode(g: int) -> int:
    """Inverse of gray_encode via prefix XOR."""
    if g < 0:
        raise ValueError("gray_decode needs g >= 0")
    v = 0
    while g:
        v ^= g
        g >>= 1
    return v


def _gray_decode_array(g: np.ndarray, n_bits: int) -> np.ndarray:
    v = g.copy()
    shift = 1
    while shift < n_bits:
        v ^= v >> shift
        shift <<= 1
    return v


@dataclass
class GraycodeStack:
    """2*n_bits code/inverse frames plus white and black reference frames."""

    n_bits: int
    frames: list

    def __post_init__(self):
        if len(self.frames) != 2 * self.n_bits + 2:
            raise ValueError(
                f"stack needs {2 * self.n_bits + 2} frames, got {len(self.frames)}"
            )
        shape = self.frames[0].data.shape
        for f in self.frames:
            if f.data.shape != shape:
                raise ValueError("all stack frames must share dimensions")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def code_frame(self, i: int) -> GrayImage:
        return self.frames[2 * i]

    def inverse_frame(self, i: int) -> GrayImage:
        return self.frames[2 * i + 1]

    @property
    def white(self) -> GrayImage:
        return self.frames[-2]

    @property
    def black(self) -> GrayImage:
        return self.frames[-1]


@dataclass
class CoordMap:
    """Float projector x-coordinate per camera pixel plus validity."""

    data: np.ndarray
    valid: ValidityMask

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != self.valid.data.shape:
            raise ValueError("coordinate plane and validity mask dimensions differ")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def gen_stack(proj_width: int, n_bits: int, proj_height: int = 1) -> GraycodeStack:
    """Build the projector frame stack encoding column indices.

    Frames are proj_height tall; height 1 is enough for rendering since
    column codes are constant in y.
    """
    if 2**n_bits < proj_width:
        raise ValueError(f"{n_bits} bits cannot encode {proj_width} columns")
    cols = np.arange(proj_width)
    gray = cols ^ (cols >> 1)
    frames = []
    for bit in range(n_bits):
        row = ((gray >> bit) & 1).astype(np.float64)
        plane = np.tile(row, (proj_height, 1))
        frames.append(GrayImage(plane))
        frames.append(GrayImage(1.0 - plane))
    frames.append(GrayImage(np.ones((proj_height, proj_width))))
    frames.append(GrayImage(np.zeros((proj_height, proj_width))))
    return GraycodeStack(n_bits=n_bits, frames=frames)


def _run_interpolate(codes: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Spread each run of a constant integer code evenly across its pixels.

    A run of length m at integer c becomes c + (j + 0.5)/m - 0.5 for
    j = 0..m-1, so single-pixel runs keep the integer and longer runs sweep
    the unit cell monotonically.  Runs are bounded by invalid pixels.
    """
    h, w = codes.shape
    out = np.full((h, w), np.nan, dtype=np.float64)
    for y in range(h):
        row = codes[y]
        v = valid[y]
        x = 0
        while x < w:
            if not v[x]:
                x += 1
                continue
            start = x
            c = row[x]
            while x < w and v[x] and row[x] == c:
                x += 1
            m = x - start
            j = np.arange(m, dtype=np.float64)
            out[y, start:x] = c + (j + 0.5) / m - 0.5
    return out


def decode_stack(
    captured: GraycodeStack, contrast_threshold: float = DEFAULT_CONTRAST_THRESHOLD
) -> CoordMap:
    """Decode captured frames to subpixel projector x-coordinates."""
    white = captured.white.data
    black = captured.black.data
    valid = (white - black) > contrast_threshold

    code = np.zeros(white.shape, dtype=np.int64)
    for bit in range(captured.n_bits):
        on = captured.code_frame(bit).data > captured.inverse_frame(bit).data
        code |= on.astype(np.int64) << bit
    cols = _gray_decode_array(code, captured.n_bits)

    coords = _run_interpolate(cols, valid)
    return CoordMap(data=np.where(valid, coords, 0.0), valid=ValidityMask(valid))


def capture_to_gray(img: RgbImage) -> GrayImage:
    """Collapse a rendered RGB capture of a monochrome frame to one plane."""
    return GrayImage((img.r + img.g + img.b) / 3.0)


def gt_from_stereo(left_coords: CoordMap, right_coords: CoordMap, max_step: float = 2.0):
    """Derive left-view disparity by matching projector coordinates along rows.

    Returns (DisparityMap, ValidityMask); pixels without exactly one monotone
    bracketing crossing in the right row are invalid (NaN).  Adjacent samples
    more than max_step apart are depth discontinuities, not sweep brackets,
    and never produce a crossing (a smooth surface advances the coordinate by
    about 1/(1 - kappa*slope) per pixel, well under the default cap of 2).
    """
    if left_coords.height != right_coords.height:
        raise ValueError("coordinate maps must share height")
    h, wl = left_coords.data.shape
    disp = np.full((h, wl), np.nan, dtype=np.float64)

    for y in range(h):
        lv = left_coords.valid.data[y]
        if not lv.any():
            continue
        rv = right_coords.valid.data[y]
        rc = right_coords.data[y]
        pair_ok = rv[:-1] & rv[1:]
        lo = rc[:-1]
        hi = rc[1:]
        seg = pair_ok & (hi > lo) & (hi - lo <= max_step)  # monotone sweep segments
        if not seg.any():
            continue
        seg_idx = np.nonzero(seg)[0]
        seg_lo = lo[seg_idx]
        seg_hi = hi[seg_idx]

        xs = np.nonzero(lv)[0]
        c = left_coords.data[y][xs]
        # half-open bracket [lo, hi) so a coordinate equal to a sample value
        # matches exactly one segment
        inside = (c[:, None] >= seg_lo[None, :]) & (c[:, None] < seg_hi[None, :])
        counts = inside.sum(axis=1)
        good = counts == 1
        if not good.any():
            continue
        which = np.argmax(inside[good], axis=1)
        s = seg_idx[which]
        frac = (c[good] - lo[s]) / (hi[s] - lo[s])
        xr = s + frac
        d = xs[good] - xr
        ok = d >= 0
        disp[y, xs[good][ok]] = d[ok]

    valid = np.isfinite(disp)
    return DisparityMap(np.where(valid, disp, np.nan)), ValidityMask(valid)
