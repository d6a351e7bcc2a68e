"""Disparity accuracy metrics: end-point error and D1 outlier rate.

EPE is the mean absolute disparity error over evaluated pixels; D1 is the
fraction of evaluated pixels whose error exceeds a threshold (plain
threshold, 3 px by default, not the KITTI compound rule).  Pixels the
predictor left invalid while ground truth knows the answer can optionally be
counted as D1 outliers (penalize_invalid, default on); EPE always averages
over the jointly valid set since a non-answer has no finite error magnitude.

JSON reports carry d1 as a fraction; tables show percent, labeled as such.
"""

import io
import csv
from dataclasses import dataclass

import numpy as np

from .imgcore import DisparityMap, ValidityMask


class EmptyEvaluationError(ValueError):
    """No jointly valid pixels to evaluate."""


@dataclass
class EvalReport:
    epe: float
    d1: float                 # fraction in [0, 1]
    n_evaluated: int          # pixels valid in prediction, GT, and mask
    threshold: float
    error_map: DisparityMap   # |pred - gt|, NaN outside the evaluated set
    penalize_invalid: bool = True
    n_missing: int = 0        # GT-valid pixels with no prediction

    def to_dict(self) -> dict:
        return {
            "epe": self.epe,
            "d1": self.d1,
            "d1_percent": self.d1 * 100.0,
            "n_evaluated": self.n_evaluated,
            "n_missing": self.n_missing,
            "threshold": self.threshold,
            "penalize_invalid": self.penalize_invalid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        """Rebuild the scalar part of a report (error map not persisted in JSON)."""
        return cls(
            epe=float(d["epe"]),
            d1=float(d["d1"]),
            n_evaluated=int(d["n_evaluated"]),
            threshold=float(d["threshold"]),
            error_map=DisparityMap(np.full((1, 1), np.nan)),
            penalize_invalid=bool(d.get("penalize_invalid", True)),
            n_missing=int(d.get("n_missing", 0)),
        )


def evaluate(
    pred: DisparityMap,
    gt: DisparityMap,
    mask: ValidityMask | None = None,
    threshold: float = 3.0,
    penalize_invalid: bool = True,
) -> EvalReport:
    """Compare predicted and ground-truth disparity over the masked region."""
    if pred.data.shape != gt.data.shape:
        raise ValueError("prediction and ground truth dimensions differ")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if mask is not None and mask.data.shape != gt.data.shape:
        raise ValueError("mask dimensions differ from maps")

    core = gt.valid() if mask is None else gt.valid() & mask.data
    joint = core & pred.valid()
    n = int(joint.sum())
    if n == 0:
        raise EmptyEvaluationError("no jointly valid pixels under the given mask")

    err = np.full(gt.data.shape, np.nan)
    err[joint] = np.abs(pred.data[joint] - gt.data[joint])
    over = int((err[joint] > threshold).sum())
    n_missing = int((core & ~pred.valid()).sum())

    if penalize_invalid:
        d1 = (over + n_missing) / (n + n_missing)
    else:
        d1 = over / n
    return EvalReport(
        epe=float(err[joint].mean()),
        d1=float(d1),
        n_evaluated=n,
        threshold=float(threshold),
        error_map=DisparityMap(err),
        penalize_invalid=penalize_invalid,
        n_missing=n_missing,
    )


_CSV_COLUMNS = ("label", "epe", "d1", "d1_percent", "n_evaluated", "n_missing", "threshold")


def compare_csv(reports: list) -> str:
    """CSV table of (label, EvalReport) pairs, sorted by label.

    Floats are written with repr so a re-parse recovers them exactly.
    """
    if not reports:
        raise ValueError("need at least one report to compare")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for label, rep in sorted(reports, key=lambda t: t[0]):
        writer.writerow(
            [
                label,
                repr(rep.epe),
                repr(rep.d1),
                repr(rep.d1 * 100.0),
                rep.n_evaluated,
                rep.n_missing,
                repr(rep.threshold),
            ]
        )
    return buf.getvalue()


def compare_table(reports: list) -> str:
    """Aligned text table (EPE in px, D1 in percent), sorted by label."""
    if not reports:
        raise ValueError("need at least one report to compare")
    rows = [("label", "EPE [px]", "D1 [%]", "n")]
    for label, rep in sorted(reports, key=lambda t: t[0]):
        rows.append((label, f"{rep.epe:.4f}", f"{rep.d1 * 100.0:.3f}", str(rep.n_evaluated)))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = []
    for i, r in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(r)))
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(4)))
    return "\n".join(lines) + "\n"
