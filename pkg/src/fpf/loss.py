"""Loss functions l(b, x) over a finite state alphabet.

Four variants are supported: an explicit |B| x m matrix, 0-1 loss, log loss
(strategies are distributions, natural log) and squared Euclidean distance to
a set of m points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import DimensionError, UnsupportedError

MATRIX, ZERO_ONE, LOG, SQUARED_L2 = "matrix", "zero_one", "log", "squared_l2"
_KINDS = (MATRIX, ZERO_ONE, LOG, SQUARED_L2)


@dataclass(frozen=True, eq=False)
class LossSpec:
    kind: str
    m: int
    rows: Optional[np.ndarray] = None
    points: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.m < 2:
            raise ValueError("loss needs an alphabet of size >= 2")

    # constructors

    @classmethod
    def matrix(cls, rows) -> "LossSpec":
        rows = np.array(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise DimensionError("loss matrix must be 2-D with at least one row")
        if not np.all(np.isfinite(rows)):
            raise ValueError("loss matrix entries must be finite")
        rows.setflags(write=False)
        return cls(MATRIX, rows.shape[1], rows=rows)

    @classmethod
    def zero_one(cls, m: int) -> "LossSpec":
        rows = 1.0 - np.eye(m)
        rows.setflags(write=False)
        return cls(ZERO_ONE, m, rows=rows)

    @classmethod
    def log(cls, m: int) -> "LossSpec":
        return cls(LOG, m)

    @classmethod
    def squared_l2(cls, points) -> "LossSpec":
        points = np.array(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or not np.all(np.isfinite(points)):
            raise DimensionError("points must be an (m, d) array of finite reals")
        points.setflags(write=False)
        return cls(SQUARED_L2, points.shape[0], points=points)

    @classmethod
    def from_json(cls, path) -> "LossSpec":
        """Load a matrix loss from ``{"rows": [[...], ...]}``."""
        data = json.loads(Path(path).read_text())
        return cls.matrix(data["rows"])

    # metadata

    @property
    def finite_strategies(self) -> bool:
        return self.kind in (MATRIX, ZERO_ONE)

    @property
    def n_strategies(self) -> int:
        if not self.finite_strategies:
            raise UnsupportedError(f"{self.kind} loss has a continuous strategy space")
        return self.rows.shape[0]

    @property
    def bound_R(self) -> float:
        """Bound on |l| over the relevant strategies; ``inf`` for log loss."""
        if self.kind == ZERO_ONE:
            return 1.0
        if self.kind == MATRIX:
            return float(np.max(np.abs(self.rows)))
        if self.kind == SQUARED_L2:
            diff = self.points[:, None, :] - self.points[None, :, :]
            return float(np.max(np.sum(diff * diff, axis=-1)))
        return math.inf

    def describe(self) -> str:
        return self.kind


def sq_dist(b: np.ndarray, p: np.ndarray) -> float:
    s = 0.0
    for d in range(len(p)):
        diff = b[d] - p[d]
        s = s + diff * diff
    return s


def loss_eval(l: LossSpec, b, x: int) -> float:
    if not 0 <= x < l.m:
        raise ValueError(f"state {x} outside alphabet of size {l.m}")
    if l.finite_strategies:
        return float(l.rows[int(b), x])
    if l.kind == LOG:
        p = float(np.asarray(b, dtype=np.float64)[x])
        if p <= 0.0:
            return math.inf
        return -math.log(p)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (l.points.shape[1],):
        raise DimensionError(f"strategy has shape {b.shape}, points live in R^{l.points.shape[1]}")
    return sq_dist(b, l.points[x])


def expected_loss(l: LossSpec, b, p) -> float:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (l.m,):
        raise DimensionError(f"distribution has shape {p.shape}, alphabet size is {l.m}")
    total = 0.0
    for x in range(l.m):
        if p[x] == 0.0:
            continue
        total += p[x] * loss_eval(l, b, x)
    return float(total)


def weighted_scores(rows: np.ndarray, weights) -> np.ndarray:
    """sum_x rows[b, x] * weights[..., x], accumulated over x in index order.

    Works for a single weight vector or a batch with trailing axis m; the
    result has the batch shape plus a trailing strategy axis.
    """
    weights = np.asarray(weights, dtype=np.float64)
    out = rows[:, 0] * weights[..., 0, None]
    for x in range(1, rows.shape[1]):
        out = out + rows[:, x] * weights[..., x, None]
    return out


def weighted_mean(points: np.ndarray, probs) -> np.ndarray:
    """sum_x probs[..., x] * points[x], accumulated over x in index order."""
    probs = np.asarray(probs, dtype=np.float64)
    out = probs[..., 0, None] * points[0]
    for x in range(1, points.shape[0]):
        out = out + probs[..., x, None] * points[x]
    return out
