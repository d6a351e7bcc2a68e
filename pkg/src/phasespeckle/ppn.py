"""Phase pre-normalization: RGB capture -> wrapped phase + modulation mask.

Per pixel the decode computes

    num   = 2*G - R - B
    den   = R - B
    phase = atan2(num, den)          in (-pi, pi]
    mod   = sqrt(num^2 + den^2)

Any transform I_c -> alpha*I_c + beta applied uniformly to all channels
cancels: beta drops out of both num and den, alpha > 0 cancels in atan2.
That is what makes the decoded phase illumination-invariant.  Pixels whose
modulation falls below the threshold (flat gray, no projection) are masked
out; a degenerate num = den = 0 pixel decodes to phase 0 and invalid, so
downstream consumers never see NaN.

Note the four-quadrant atan2 is deliberate: a one-argument arctan of the
ratio would fold the result into (-pi/2, pi/2) and lose half the range.
"""

from dataclasses import dataclass

import numpy as np

from .imgcore import GrayImage, RgbImage, ValidityMask
from .pattern import PhaseField

DEFAULT_MOD_THRESHOLD = 0.05

# the six channel reorderings; each string names the source plane feeding
# destination slots (r, g, b) in order
CHANNEL_ORDERS = ("rgb", "rbg", "grb", "gbr", "brg", "bgr")


@dataclass
class PpnResult:
    phase: PhaseField
    modulation: GrayImage
    valid: ValidityMask


def decode(img: RgbImage, mod_threshold: float = DEFAULT_MOD_THRESHOLD) -> PpnResult:
    """Decode one RGB capture into wrapped phase, modulation, and validity."""
    if mod_threshold < 0:
        raise ValueError("modulation threshold must be >= 0")
    num = 2.0 * img.g - img.r - img.b
    den = img.r - img.b
    phase = np.arctan2(num, den)
    # atan2 can emit exactly -pi (negative-zero numerator); fold to +pi
    phase[phase == -np.pi] = np.pi
    modulation = np.hypot(num, den)
    valid = modulation > mod_threshold
    return PpnResult(
        phase=PhaseField(phase),
        modulation=GrayImage(modulation),
        valid=ValidityMask(valid),
    )


def decode_pair(
    left: RgbImage, right: RgbImage, mod_threshold: float = DEFAULT_MOD_THRESHOLD
) -> tuple[PpnResult, PpnResult]:
    """Decode both views independently; there is no cross-view coupling."""
    return decode(left, mod_threshold), decode(right, mod_threshold)


def permute_channels(img: RgbImage, order: str) -> RgbImage:
    """Reorder planes: destination (r, g, b) takes source planes named by `order`."""
    if sorted(order) != ["b", "g", "r"]:
        raise ValueError(f"channel order must be a permutation of 'rgb', got {order!r}")
    planes = {"r": img.r, "g": img.g, "b": img.b}
    return RgbImage(planes[order[0]].copy(), planes[order[1]].copy(), planes[order[2]].copy())


def channel_permute_decode(
    img: RgbImage, order: str, mod_threshold: float = DEFAULT_MOD_THRESHOLD
) -> PpnResult:
    """Decode after reordering the channels; harness for permutation-robustness tests."""
    return decode(permute_channels(img, order), mod_threshold)
