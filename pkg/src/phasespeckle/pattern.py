"""RGB phase-speckle pattern generation.

The projector pattern starts as a vertical sinusoidal fringe phase field on a
low-resolution grid, gets spatially scrambled by a seeded full-frame
permutation (the same permutation for all three conceptual phase-shift
frames, so per-pixel phase relationships survive), is block-upsampled so the
speckle cells stay above sensor noise, and is finally composed into one RGB
image whose channels carry the three phase shifts:

    B = a + b * cos(phi - 2*pi/3)
    G = a + b * cos(phi)
    R = a + b * cos(phi + 2*pi/3)

Every stage is a pure function of its parameters; the scramble PRNG is the
documented SplitMix64 recurrence in rng.py.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .imgcore import RgbImage

CHANNEL_SHIFT = 2.0 * np.pi / 3.0


def wrap_phase(theta: np.ndarray) -> np.ndarray:
    """Fold angles into (-pi, pi]; -pi maps to +pi."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=np.float64), 2.0 * np.pi)


@dataclass
class PhaseField:
    """Row-major wrapped phase samples in (-pi, pi]."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError(f"phase field must be 2-D, got shape {self.data.shape}")
        if self.data.size and not np.all((self.data > -np.pi) & (self.data <= np.pi)):
            raise ValueError("phase values must lie in (-pi, pi]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass
class Permutation:
    """Bijection on {0, ..., n-1} stored as the source index for each slot."""

    map: np.ndarray

    def __post_init__(self):
        self.map = np.asarray(self.map, dtype=np.int64)
        if self.map.ndim != 1:
            raise ValueError("permutation map must be 1-D")
        if not np.array_equal(np.sort(self.map), np.arange(self.map.size)):
            raise ValueError("permutation map is not a bijection")

    @property
    def n(self) -> int:
        return self.map.size

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.map.size)
        return Permutation(inv)


@dataclass
class PatternParams:
    """Knobs for gen_speckle_pattern.

    a, b       background intensity and amplitude; a+b <= 1 and a-b >= 0 keep
               the composed channels inside [0, 1]
    period     fringe period in low-res pixels, >= 3
    lo_width, lo_height   low-resolution grid before upsampling
    upsample   integer block replication factor k >= 1
    seed       64-bit scramble seed
    """

    a: float = 0.5
    b: float = 0.45
    period: float = 8.0
    lo_width: int = 320
    lo_height: int = 180
    upsample: int = 4
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0 and 0.0 <= self.b <= 1.0):
            raise ValueError("a and b must be in [0, 1]")
        if self.a + self.b > 1.0 or self.a - self.b < 0.0:
            raise ValueError("need a+b <= 1 and a-b >= 0 to keep channels in [0, 1]")
        if self.period < 3:
            raise ValueError("fringe period must be >= 3 pixels")
        if self.lo_width < 1 or self.lo_height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.upsample < 1:
            raise ValueError("upsample factor must be >= 1")

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "period": self.period,
            "lo_width": self.lo_width,
            "lo_height": self.lo_height,
            "upsample": self.upsample,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PatternParams":
        return cls(**d)


def gen_base_phase(lo_width: int, lo_height: int, period: float) -> PhaseField:
    """Column-constant vertical fringe: phi(x) = wrap(2*pi*x / period)."""
    if period < 3:
        raise ValueError("fringe period must be >= 3 pixels (undersampled otherwise)")
    x = np.arange(lo_width, dtype=np.float64)
    row = wrap_phase(2.0 * np.pi * x / period)
    return PhaseField(np.tile(row, (lo_height, 1)))


def gen_permutation(n: int, seed: int) -> Permutation:
    """Deterministic Fisher-Yates permutation; see rng.py for the PRNG spec."""
    return Permutation(rng.permutation(n, seed))


def scramble(phase: PhaseField, perm: Permutation) -> PhaseField:
    """Rearrange pixels: out.flat[i] = in.flat[perm.map[i]] (row-major)."""
    if perm.n != phase.width * phase.height:
        raise ValueError(
            f"permutation size {perm.n} != pixel count {phase.width * phase.height}"
        )
    flat = phase.data.reshape(-1)[perm.map]
    return PhaseField(flat.reshape(phase.height, phase.width))


def upsample_block(phase: PhaseField, k: int) -> PhaseField:
    """Nearest-neighbor block replication: out[y, x] = in[y//k, x//k]."""
    if k < 1:
        raise ValueError("block factor must be >= 1")
    if k == 1:
        return PhaseField(phase.data.copy())
    return PhaseField(np.repeat(np.repeat(phase.data, k, axis=0), k, axis=1))


def compose_rgb(phase: PhaseField, a: float, b: float) -> RgbImage:
    """Fold one phase field into three RGB channels 2*pi/3 apart."""
    if a + b > 1.0 or a - b < 0.0:
        raise ValueError("need a+b <= 1 and a-b >= 0 to keep channels in [0, 1]")
    phi = phase.data
    return RgbImage(
        r=a + b * np.cos(phi + CHANNEL_SHIFT),
        g=a + b * np.cos(phi),
        b=a + b * np.cos(phi - CHANNEL_SHIFT),
    )


def gen_speckle_pattern(params: PatternParams) -> RgbImage:
    """Full pipeline: base fringe -> scramble -> block upsample -> RGB compose."""
    base = gen_base_phase(params.lo_width, params.lo_height, params.period)
    perm = gen_permutation(params.lo_width * params.lo_height, params.seed)
    scrambled = scramble(base, perm)
    hi = upsample_block(scrambled, params.upsample)
    return compose_rgb(hi, params.a, params.b)
