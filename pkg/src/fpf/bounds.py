"""Closed-form regret and variance bounds, evaluated as exact finite sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .core import Constant, CountVector, DitherSchedule, StateSequence, derive_seed, schedule_values, uniform_block

BOUNDED_LOSS = "bounded_loss"
BOUNDED_LOSS_SQRT = "bounded_loss_sqrt"
LOG_LOSS_RAW = "log_loss_raw"
LOG_LOSS_CONST_H = "log_loss_const_h"
THEOREMS = (BOUNDED_LOSS, BOUNDED_LOSS_SQRT, LOG_LOSS_RAW, LOG_LOSS_CONST_H)


@dataclass(frozen=True)
class BoundQuery:
    theorem: str
    n: int
    m: int
    R: Optional[float] = None
    schedule: Optional[DitherSchedule] = None

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem {self.theorem!r}")
        if self.n < 1 or self.m < 2:
            raise ValueError("need n >= 1 and m >= 2")
        if self.theorem in (BOUNDED_LOSS, BOUNDED_LOSS_SQRT):
            if self.R is None or not math.isfinite(self.R) or self.R < 0:
                raise ValueError("bounded-loss bounds need a finite R >= 0")
        if self.theorem in (BOUNDED_LOSS, LOG_LOSS_RAW) and self.schedule is None:
            raise ValueError(f"{self.theorem} needs a schedule")


def bounded_loss_bound(n: int, m: int, R: float, schedule: DitherSchedule) -> float:
    """2R sum_t 1/h_t + 2R m h_n."""
    h = schedule_values(schedule, n)
    return 2.0 * R * math.fsum(1.0 / h) + 2.0 * R * m * float(h[-1])


def sqrt_schedule_closed_form(n: int, m: int, R: float) -> float:
    """4R sqrt(2m/n) * n, the relaxed bound for h_t = sqrt(2t/m) (un-normalised)."""
    return 4.0 * R * math.sqrt(2.0 * m / n) * n


def log_loss_bound(n: int, m: int, schedule: DitherSchedule) -> float:
    """sum_t (m h_t - 1)/t + sum_t 1/(floor((t-1)/m) + h_t)."""
    h = schedule_values(schedule, n)
    t = np.arange(1, n + 1, dtype=np.float64)
    first = (m * h - 1.0) / t
    second = 1.0 / (np.floor((t - 1.0) / m) + h)
    return math.fsum(first) + math.fsum(second)


def log_loss_cap(n: int, m: int) -> float:
    """m ln n, the cap for constant h = 1/m."""
    return m * math.log(n)


def evaluate(q: BoundQuery) -> float:
    if q.theorem == BOUNDED_LOSS:
        return bounded_loss_bound(q.n, q.m, q.R, q.schedule)
    if q.theorem == BOUNDED_LOSS_SQRT:
        return sqrt_schedule_closed_form(q.n, q.m, q.R)
    if q.theorem == LOG_LOSS_RAW:
        return log_loss_bound(q.n, q.m, q.schedule)
    return log_loss_bound(q.n, q.m, Constant(1.0 / q.m))


def variance_bound(t, schedule: DitherSchedule, m: int):
    """8 + 4 ln^2((t-1)/h_t + m); accepts a scalar t or an array of t >= 1."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.int64))
    if np.any(t_arr < 1):
        raise ValueError("t must be >= 1")
    h = schedule_values(schedule, int(t_arr.max()))[t_arr - 1]
    out = 8.0 + 4.0 * np.log((t_arr - 1.0) / h + m) ** 2
    return float(out[0]) if np.ndim(t) == 0 else out


def kolmogorov_partial_sum(schedule: DitherSchedule, m: int, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.arange(1, n + 1)
    return math.fsum(variance_bound(t, schedule, m) / (t.astype(np.float64) ** 2))


def step_log_losses(
    schedule: DitherSchedule, seq: StateSequence, t: int, trials: int, seed: int
) -> np.ndarray:
    """ln(1/P_t(x_t)) for FPF under log loss, one value per trial.

    Trial k uses the stream derived from (seed, k), at the same stream
    position a full iid episode would reach at step t.
    """
    if not 1 <= t <= len(seq):
        raise ValueError(f"t = {t} outside 1..{len(seq)}")
    m = seq.m
    counts = seq.prefix_counts()[t - 1].astype(np.float64)
    x = seq.states[t - 1]
    h = float(schedule_values(schedule, t)[-1])
    seeds = derive_seed(seed, np.arange(trials))
    u = uniform_block(seeds, (t - 1) * m, m)
    usum = u[:, 0]
    for j in range(1, m):
        usum = usum + u[:, j]
    p = (counts[x] + h * u[:, x]) / ((t - 1) + h * usum)
    return -np.log(p)


def empirical_step_variance(
    schedule: DitherSchedule, seq: StateSequence, t: int, trials: int, seed: int
) -> float:
    """Sample variance (ddof=1) of the step-t log loss over ``trials`` dithers."""
    if trials < 2:
        raise ValueError("need at least two trials for a sample variance")
    return float(np.var(step_log_losses(schedule, seq, t, trials, seed), ddof=1))


def variance_interval(sample_var: float, trials: int, sigmas: float = 3.0):
    """Chi-square interval for the true variance at the given two-sided sigma level."""
    dof = trials - 1
    tail = stats.norm.sf(sigmas)
    lo = sample_var * dof / stats.chi2.isf(tail, dof)
    hi = sample_var * dof / stats.chi2.ppf(tail, dof)
    return lo, hi


def log_factorial(k: int) -> float:
    return math.fsum(math.log(j) for j in range(2, k + 1))


def type_class_check(counts_full: CountVector):
    """(ln of the multinomial coefficient, n times the empirical entropy)."""
    n = counts_full.total
    lhs = log_factorial(n) - math.fsum(log_factorial(c) for c in counts_full.counts)
    rhs = math.fsum(c * math.log(n / c) for c in counts_full.counts if c > 0)
    return lhs, rhs
