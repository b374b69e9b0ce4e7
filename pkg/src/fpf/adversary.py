"""Sequence generators: fixed, i.i.d., round-robin and the anti-deterministic adversary."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    CountVector,
    DitherSchedule,
    RandomStream,
    StateSequence,
    UnsupportedError,
    schedule_eval,
)
from .loss import ZERO_ONE, LossSpec
from .predict import FIXED, FL, Predictor, PredictorConfig

FIXED_SEQ, IID_SEQ, ROUND_ROBIN, ANTI_DETERMINISTIC = (
    "fixed",
    "iid",
    "round_robin",
    "anti_deterministic",
)


def round_robin(m: int, n: int) -> StateSequence:
    if m < 2 or n < 1:
        raise ValueError("round_robin needs m >= 2 and n >= 1")
    return StateSequence([t % m for t in range(n)], m)


def iid_sequence(probs: Sequence[float], n: int, seed: int) -> StateSequence:
    """Inverse-CDF sampling driven by the package's own stream."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or len(probs) < 2 or np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-9):
        raise ValueError("probs must be a distribution over at least two states")
    u = RandomStream(seed).uniform(n)
    cdf = np.cumsum(probs)
    states = np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)
    return StateSequence(states.tolist(), len(probs))


def anti_deterministic(target: PredictorConfig, l: LossSpec, n: int) -> StateSequence:
    """x_t is the opposite of the deterministic target's choice b_t.

    The target therefore errs on every step of a binary 0-1 game.
    """
    if l.kind != ZERO_ONE or l.m != 2:
        raise UnsupportedError("the anti-deterministic adversary is defined for binary 0-1 loss only")
    if target.kind not in (FL, FIXED):
        raise UnsupportedError(f"target must be deterministic (fl or fixed), got {target.kind}")
    pred = Predictor(target, l)
    counts = CountVector.zeros(2)
    states = []
    for t in range(1, n + 1):
        b = pred.act(counts, t)
        x = 1 - int(b)
        states.append(x)
        counts = counts.add(x)
    return StateSequence(states, 2)


@dataclass(frozen=True)
class AdversarySpec:
    kind: str
    sequence: Optional[tuple] = None
    probs: Optional[tuple] = None
    seed: int = 0
    target: Optional[PredictorConfig] = None

    def __post_init__(self):
        if self.kind not in (FIXED_SEQ, IID_SEQ, ROUND_ROBIN, ANTI_DETERMINISTIC):
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.kind == FIXED_SEQ and self.sequence is None:
            raise ValueError("fixed adversary needs a sequence")
        if self.kind == IID_SEQ and self.probs is None:
            raise ValueError("iid adversary needs probs")
        if self.kind == ANTI_DETERMINISTIC:
            if self.target is None:
                raise ValueError("anti-deterministic adversary needs a target predictor")
            if self.target.kind not in (FL, FIXED):
                raise UnsupportedError("anti-deterministic target must be deterministic (fl or fixed)")

    @property
    def adaptive(self) -> bool:
        return self.kind == ANTI_DETERMINISTIC

    def generate(self, m: int, n: int, l: Optional[LossSpec] = None) -> StateSequence:
        if self.kind == FIXED_SEQ:
            seq = StateSequence(self.sequence, m)
            if n is not None and len(seq) != n:
                raise ValueError(f"fixed sequence has length {len(seq)}, horizon is {n}")
            return seq
        if self.kind == IID_SEQ:
            if len(self.probs) != m:
                raise ValueError("probs length does not match alphabet size")
            return iid_sequence(self.probs, n, self.seed)
        if self.kind == ROUND_ROBIN:
            return round_robin(m, n)
        if l is None:
            l = LossSpec.zero_one(m)
        return anti_deterministic(self.target, l, n)


def second_sum_value(seq: StateSequence, schedule: DitherSchedule) -> float:
    """sum_t 1 / (N_{t-1}(x_t) + h_t), summed with correct rounding."""
    counts = [0] * seq.m
    terms = []
    for t, x in enumerate(seq.states, start=1):
        terms.append(1.0 / (counts[x] + schedule_eval(schedule, t)))
        counts[x] += 1
    return math.fsum(terms)


def write_sequence(path, seq: StateSequence) -> None:
    Path(path).write_text("".join(f"{x}\n" for x in seq.states))


def read_sequence(path, m: Optional[int] = None) -> StateSequence:
    states = [int(line) for line in Path(path).read_text().split()]
    if m is None:
        m = max(2, max(states, default=0) + 1)
    return StateSequence(states, m)
