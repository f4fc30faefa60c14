"""Map-accuracy evaluation: cell classification against ground truth and summary metrics.

Wall cells (by convention, the Occupied cells of the pre-obstacle base map)
are excluded from the tallies. Classification is keyed on the ground-truth
state first: a ground-truth Occupied cell is either found (drawn Occupied,
TP) or missed (FN); any other ground-truth state is either falsely restricted
(drawn Occupied, FP) or correctly left open (TN). Undefined ratios are
reported as None, never coerced to 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .grid import GridIndex, OCCUPIED_BYTE, OccupancyGrid, same_geometry


class GridMismatchError(ValueError):
    """Grids being compared do not share dimensions, resolution, and origin."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int
    excluded_wall_cells: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn", "excluded_wall_cells"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn + self.excluded_wall_cells


@dataclass(frozen=True)
class MetricReport:
    """The five summary ratios; None marks an undefined (0/0) value."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    specificity: float | None
    f1: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "specificity": self.specificity,
            "f1": self.f1,
        }


def wall_mask_from_base(base: OccupancyGrid) -> frozenset[GridIndex]:
    """Occupied cells of the pre-obstacle base map; excluded from classification."""
    flat = np.flatnonzero(base.data == OCCUPIED_BYTE)
    width = base.width
    return frozenset(GridIndex(int(i) % width, int(i) // width) for i in flat)


def classify_cells(
    ground_truth: OccupancyGrid,
    drawn: OccupancyGrid,
    wall_mask: Iterable[GridIndex] = (),
) -> ConfusionCounts:
    """Tally TP/FP/FN/TN over all non-wall cells of two compatible grids."""
    if not same_geometry(ground_truth, drawn):
        raise GridMismatchError(
            f"grid geometry differs: {ground_truth!r} vs {drawn!r}"
        )
    width, height = ground_truth.width, ground_truth.height
    wall = np.zeros(width * height, dtype=bool)
    for col, row in wall_mask:
        if not ground_truth.in_bounds(col, row):
            raise ValueError(f"wall mask cell ({col},{row}) outside grid")
        wall[row * width + col] = True

    gt_occ = ground_truth.data == OCCUPIED_BYTE
    dr_occ = drawn.data == OCCUPIED_BYTE
    keep = ~wall
    tp = int(np.count_nonzero(gt_occ & dr_occ & keep))
    fn = int(np.count_nonzero(gt_occ & ~dr_occ & keep))
    fp = int(np.count_nonzero(~gt_occ & dr_occ & keep))
    tn = int(np.count_nonzero(~gt_occ & ~dr_occ & keep))
    return ConfusionCounts(tp, fp, fn, tn, int(np.count_nonzero(wall)))


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_metrics(c: ConfusionCounts) -> MetricReport:
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return MetricReport(
        accuracy=_ratio(c.tp + c.tn, c.tp + c.fp + c.fn + c.tn),
        precision=precision,
        recall=recall,
        specificity=_ratio(c.tn, c.tn + c.fp),
        f1=f1,
    )


def format_report(counts: ConfusionCounts, report: MetricReport) -> str:
    """Flat key/value text block; undefined metrics print as n/a."""
    lines = [
        f"tp: {counts.tp}",
        f"fp: {counts.fp}",
        f"fn: {counts.fn}",
        f"tn: {counts.tn}",
        f"excluded_wall_cells: {counts.excluded_wall_cells}",
    ]
    for name, value in report.as_dict().items():
        lines.append(f"{name}: {'n/a' if value is None else format(value, '.6f')}")
    return "\n".join(lines) + "\n"
