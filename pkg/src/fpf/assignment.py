"""Sequential probability assignments over a finite alphabet."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CountVector,
    DimensionError,
    DitherSchedule,
    UndefinedHistoryError,
    schedule_eval,
    seq_sum,
)


@dataclass(frozen=True)
class PerturbedDistribution:
    """One realisation of the dithered-frequency assignment.

    ``raw_weights[x] = N_{t-1}(x) + h_t u_t(x)`` and
    ``normalizer = (t - 1) + h_t * sum(u)``.
    """

    probs: np.ndarray
    raw_weights: np.ndarray
    normalizer: float


def _check_history(counts: CountVector, t: int) -> None:
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if counts.total != t - 1:
        raise ValueError(f"counts cover {counts.total} states, expected t-1 = {t - 1}")


def perturbed_weights(counts: np.ndarray, t: int, h: float, u: np.ndarray):
    """Raw dithered weights and normaliser, in the exact float order used everywhere."""
    raw = counts + h * u
    normalizer = (t - 1) + h * seq_sum(u)
    return raw, normalizer


def perturbed_assignment(
    counts: CountVector, t: int, s: DitherSchedule, u
) -> PerturbedDistribution:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (counts.m,):
        raise DimensionError(f"dither has shape {u.shape}, alphabet size is {counts.m}")
    _check_history(counts, t)
    raw, normalizer = perturbed_weights(counts.as_array(), t, schedule_eval(s, t), u)
    return PerturbedDistribution(raw / normalizer, raw, float(normalizer))


def laplace_assignment(counts: CountVector, t: int) -> np.ndarray:
    _check_history(counts, t)
    return (counts.as_array() + 1.0) / ((t - 1) + counts.m)


def kt_assignment(counts: CountVector, t: int) -> np.ndarray:
    """Add-one-half (Krichevsky-Trofimov) estimator."""
    _check_history(counts, t)
    return (counts.as_array() + 0.5) / ((t - 1) + counts.m / 2.0)


def empirical_assignment(counts: CountVector, t: int) -> np.ndarray:
    _check_history(counts, t)
    if t == 1:
        raise UndefinedHistoryError("empirical frequencies are undefined on an empty history")
    return counts.as_array() / (t - 1)
