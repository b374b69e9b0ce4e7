"""Forecasters: FPF, Follow-the-Leader, FPL, the clairvoyant device and smoothed FPF.

All argmins over a finite strategy set break ties toward the lowest index
(``np.argmin`` returns the first minimum).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .assignment import PerturbedDistribution, perturbed_assignment
from .core import (
    CountVector,
    DitherSchedule,
    PowerLaw,
    RandomStream,
    UnsupportedError,
    draw_dither,
    schedule_eval,
)
from .loss import LOG, SQUARED_L2, LossSpec, weighted_mean, weighted_scores

FPF, FL, FPL, CLAIRVOYANT, SMOOTHED_FPF, FIXED = (
    "fpf",
    "fl",
    "fpl",
    "clairvoyant",
    "smoothed_fpf",
    "fixed",
)
IID, SHARED = "iid", "shared"


@dataclass(frozen=True)
class PredictorConfig:
    kind: str
    schedule: Optional[DitherSchedule] = None
    dither_mode: str = IID
    inner_samples: int = 256
    strategy: Optional[int] = None  # FIXED only

    def __post_init__(self):
        if self.kind not in (FPF, FL, FPL, CLAIRVOYANT, SMOOTHED_FPF, FIXED):
            raise ValueError(f"unknown predictor kind {self.kind!r}")
        if self.kind in (FPF, FPL, CLAIRVOYANT, SMOOTHED_FPF) and self.schedule is None:
            raise ValueError(f"{self.kind} needs a dither schedule")
        if self.dither_mode not in (IID, SHARED):
            raise ValueError(f"dither_mode must be 'iid' or 'shared', got {self.dither_mode!r}")
        if self.kind == CLAIRVOYANT and self.dither_mode != SHARED:
            object.__setattr__(self, "dither_mode", SHARED)
        if self.kind == SMOOTHED_FPF and self.inner_samples < 1:
            raise ValueError("inner_samples must be >= 1")
        if self.kind == FIXED and self.strategy is None:
            raise ValueError("fixed predictor needs a strategy index")

    @property
    def randomized(self) -> bool:
        return self.kind in (FPF, FPL, SMOOTHED_FPF)

    # shorthands

    @classmethod
    def fpf(cls, schedule: DitherSchedule, dither_mode: str = IID) -> "PredictorConfig":
        return cls(FPF, schedule, dither_mode)

    @classmethod
    def fl(cls) -> "PredictorConfig":
        return cls(FL)

    @classmethod
    def fpl(cls, schedule: DitherSchedule) -> "PredictorConfig":
        return cls(FPL, schedule)

    @classmethod
    def clairvoyant(cls, schedule: DitherSchedule) -> "PredictorConfig":
        return cls(CLAIRVOYANT, schedule, SHARED)

    @classmethod
    def smoothed(cls, schedule: DitherSchedule, inner_samples: int = 256) -> "PredictorConfig":
        return cls(SMOOTHED_FPF, schedule, IID, inner_samples)

    @classmethod
    def fixed(cls, strategy: int) -> "PredictorConfig":
        return cls(FIXED, strategy=strategy)


def check_compatible(cfg: PredictorConfig, l: LossSpec) -> None:
    """Reject predictor/loss pairs outside the supported theory."""
    s = cfg.schedule
    if (
        cfg.kind in (FPF, CLAIRVOYANT, SMOOTHED_FPF)
        and isinstance(s, PowerLaw)
        and s.alpha == 0
        and l.kind != LOG
    ):
        raise ValueError("alpha = 0 power-law dither is only accepted with log loss; use alpha in (0, 1)")
    if cfg.kind == SMOOTHED_FPF and l.kind != SQUARED_L2:
        raise UnsupportedError("smoothed FPF requires a convex loss (squared_l2)")
    if cfg.kind in (FPL, FIXED) and not l.finite_strategies:
        raise UnsupportedError(f"{cfg.kind} needs a finite strategy set (matrix or zero_one loss)")
    if cfg.kind == FIXED and not 0 <= cfg.strategy < l.n_strategies:
        raise ValueError(f"fixed strategy {cfg.strategy} out of range")


def decide(l: LossSpec, weights: np.ndarray, normalizer: float):
    """Minimiser of sum_x weights[x] l(b, x) for nonnegative weights.

    Finite strategies are scored on the raw weights (the positive normaliser
    does not move the argmin); log and squared-L2 use the normalised weights.
    """
    if l.finite_strategies:
        return int(np.argmin(weighted_scores(l.rows, weights)))
    probs = weights / normalizer
    if l.kind == LOG:
        return probs
    return weighted_mean(l.points, probs)


def decide_from(l: LossSpec, pd: PerturbedDistribution):
    return decide(l, pd.raw_weights, pd.normalizer)


def fpf_step(
    cfg: PredictorConfig,
    counts: CountVector,
    t: int,
    l: LossSpec,
    rng: RandomStream,
    u: Optional[np.ndarray] = None,
):
    """One FPF decision. Draws a fresh dither from ``rng`` unless ``u`` is given."""
    if u is None:
        u = draw_dither(rng, counts.m)
    pd = perturbed_assignment(counts, t, cfg.schedule, u)
    return decide_from(l, pd)


def fl_step(counts: CountVector, t: int, l: LossSpec):
    if counts.total != t - 1:
        raise ValueError(f"counts cover {counts.total} states, expected {t - 1}")
    n = counts.as_array()
    if t == 1:
        # empty history: tie-break strategy
        if l.finite_strategies:
            return 0
        n = np.ones(l.m)
    return decide(l, n, float(n.sum()))


def clairvoyant_step(
    cfg: PredictorConfig,
    counts_including_xt: CountVector,
    t: int,
    l: LossSpec,
    shared_u: np.ndarray,
):
    """argmin_b sum_x l(b, x) (N_t(x) + h_t u(x)); sees x_t. Test oracle only."""
    if counts_including_xt.total != t:
        raise ValueError("clairvoyant counts must include x_t")
    h = schedule_eval(cfg.schedule, t)
    w = counts_including_xt.as_array() + h * np.asarray(shared_u, dtype=np.float64)
    return decide(l, w, float(w.sum()))


def smoothed_fpf_step(
    cfg: PredictorConfig, counts: CountVector, t: int, l: LossSpec, rng: RandomStream
) -> np.ndarray:
    """Average of ``inner_samples`` independent FPF decisions (deterministic given rng)."""
    if l.kind != SQUARED_L2:
        raise UnsupportedError("smoothed FPF requires squared_l2 loss")
    total = None
    for _ in range(cfg.inner_samples):
        b = fpf_step(cfg, counts, t, l, rng)
        total = b if total is None else total + b
    return total / cfg.inner_samples


def fpl_step(
    counts: CountVector, t: int, l: LossSpec, rng: RandomStream, scale: float
) -> int:
    """argmin_b [cumulative loss of b - scale * u(b)], one uniform per strategy."""
    if not l.finite_strategies:
        raise UnsupportedError("FPL needs a finite strategy set")
    if counts.total != t - 1:
        raise ValueError(f"counts cover {counts.total} states, expected {t - 1}")
    cum = weighted_scores(l.rows, counts.as_array())
    u = rng.uniform(l.n_strategies)
    return int(np.argmin(cum - scale * u))


class Predictor:
    """A configured forecaster bound to one random stream.

    ``act(counts, t)`` sees only the first t-1 states.  The clairvoyant
    device is the exception: it is driven through ``act_hindsight``.
    """

    def __init__(self, cfg: PredictorConfig, l: LossSpec, seed: int = 0):
        check_compatible(cfg, l)
        self.cfg = cfg
        self.loss = l
        self.rng = RandomStream(seed)
        self._u1: Optional[np.ndarray] = None

    def _shared_u(self) -> np.ndarray:
        if self._u1 is None:
            self._u1 = draw_dither(self.rng, self.loss.m)
        return self._u1

    def act(self, counts: CountVector, t: int):
        cfg, l = self.cfg, self.loss
        if cfg.kind == FPF:
            u = self._shared_u() if cfg.dither_mode == SHARED else None
            return fpf_step(cfg, counts, t, l, self.rng, u)
        if cfg.kind == FL:
            return fl_step(counts, t, l)
        if cfg.kind == FPL:
            return fpl_step(counts, t, l, self.rng, schedule_eval(cfg.schedule, t))
        if cfg.kind == SMOOTHED_FPF:
            return smoothed_fpf_step(cfg, counts, t, l, self.rng)
        if cfg.kind == FIXED:
            return cfg.strategy
        raise UnsupportedError("the clairvoyant predictor needs x_t; use act_hindsight")

    def act_hindsight(self, counts_including_xt: CountVector, t: int):
        return clairvoyant_step(self.cfg, counts_including_xt, t, self.loss, self._shared_u())

