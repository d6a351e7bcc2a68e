"""Disparity-to-metric triangulation and colored point-cloud export.

Rectified pinhole geometry with the principal point at the image center:

    Z = focal * baseline / d
    X = (x - cx) * Z / focal
    Y = (y - cy) * Z / focal

Z is in the baseline's units (millimeters for the default rig).  Pixels with
d below min_disp are skipped so depth cannot blow up near d -> 0.
"""

from dataclasses import dataclass

import numpy as np

from .imgcore import DisparityMap, RgbImage, quantize_to_u8, write_ply
from .simulate import RigSpec


@dataclass
class PointCloud:
    """(N, 6) array of x, y, z [mm] and r, g, b byte colors; all z > 0."""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 6)
        if self.points.shape[0] and self.points[:, 2].min() <= 0:
            raise ValueError("point cloud must have z > 0 everywhere")

    def __len__(self) -> int:
        return self.points.shape[0]

    def save_ply(self, path: str) -> None:
        write_ply([tuple(row) for row in self.points], path)


def triangulate(
    disp: DisparityMap, rig: RigSpec, color: RgbImage, min_disp: float = 1.0
) -> PointCloud:
    """One colored 3-D point per valid pixel with disparity >= min_disp.

    Points are emitted in row-major pixel order for determinism.
    """
    if disp.data.shape != (color.height, color.width):
        raise ValueError("disparity and color image dimensions differ")
    if min_disp <= 0:
        raise ValueError("min_disp must be positive")

    h, w = disp.data.shape
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w]
    keep = np.isfinite(disp.data) & (disp.data >= min_disp)

    d = disp.data[keep]
    z = rig.focal * rig.baseline / d
    x = (xx[keep] - cx) * z / rig.focal
    y = (yy[keep] - cy) * z / rig.focal
    pts = np.column_stack(
        [
            x,
            y,
            z,
            quantize_to_u8(color.r[keep]).astype(np.float64),
            quantize_to_u8(color.g[keep]).astype(np.float64),
            quantize_to_u8(color.b[keep]).astype(np.float64),
        ]
    )
    return PointCloud(pts)
