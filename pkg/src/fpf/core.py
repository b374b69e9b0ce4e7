"""Alphabets, state sequences, counts, dither schedules and the random stream.

The random stream is SplitMix64 written in counter form: draw ``i`` of the
stream with seed ``s`` is ``mix64(s + (i + 1) * GAMMA)`` (mod 2**64).  That is
bit-for-bit the classic sequential SplitMix64, but it lets a whole block of
trials be generated with one vectorised numpy call while every trial still
reproduces from its own printed 64-bit seed.

Uniforms are built from the top 52 bits as ``(k + 0.5) / 2**52`` so they lie
strictly inside (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1
_INV_2_52 = 2.0**-52


class DimensionError(ValueError):
    """Vector lengths do not match the alphabet."""


class UnsupportedError(ValueError):
    """Combination of inputs that the operation does not handle."""


class UndefinedHistoryError(ValueError):
    """An estimator was asked for a value on an empty history."""


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.size!r}")


@dataclass(frozen=True)
class StateSequence:
    """A finite sequence of dense state indices ``0..m-1``."""

    states: tuple
    alphabet: Alphabet

    def __init__(self, states: Iterable[int], alphabet: Union[Alphabet, int]):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(int(alphabet))
        states = tuple(int(x) for x in states)
        for x in states:
            if not 0 <= x < alphabet.size:
                raise ValueError(f"state {x} outside alphabet of size {alphabet.size}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)

    @property
    def m(self) -> int:
        return self.alphabet.size

    def as_array(self) -> np.ndarray:
        return np.asarray(self.states, dtype=np.int64)

    def prefix_counts(self) -> np.ndarray:
        """Row ``t`` (0-based) holds N_t, the counts of the first ``t`` states.

        Shape ``(n + 1, m)``.
        """
        n, m = len(self), self.m
        out = np.zeros((n + 1, m), dtype=np.int64)
        if n:
            onehot = np.zeros((n, m), dtype=np.int64)
            onehot[np.arange(n), self.as_array()] = 1
            np.cumsum(onehot, axis=0, out=out[1:])
        return out


@dataclass(frozen=True)
class CountVector:
    counts: tuple
    total: int

    def __init__(self, counts: Iterable[int], total: int | None = None):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        s = sum(counts)
        if total is None:
            total = s
        elif total != s:
            raise ValueError(f"counts sum to {s}, total given as {total}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", int(total))

    @property
    def m(self) -> int:
        return len(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64)

    def add(self, x: int) -> "CountVector":
        c = list(self.counts)
        c[x] += 1
        return CountVector(c, self.total + 1)

    @classmethod
    def zeros(cls, m: int) -> "CountVector":
        return cls((0,) * m, 0)


def ingest(seq: StateSequence, t: int) -> CountVector:
    """Counts N_t(x) of the first ``t`` states of ``seq``."""
    if not 0 <= t <= len(seq):
        raise IndexError(f"prefix length {t} outside [0, {len(seq)}]")
    counts = [0] * seq.m
    for x in seq.states[:t]:
        counts[x] += 1
    return CountVector(counts, t)


@dataclass(frozen=True)
class PowerLaw:
    """h_t = h1 * t**alpha."""

    h1: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.h1) and self.h1 > 0):
            raise ValueError(f"h1 must be positive, got {self.h1}")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")


@dataclass(frozen=True)
class Constant:
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"h must be positive, got {self.h}")


DitherSchedule = Union[PowerLaw, Constant]


def schedule_eval(s: DitherSchedule, t: int) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    if isinstance(s, PowerLaw):
        return float(s.h1 * float(t) ** s.alpha)
    if isinstance(s, Constant):
        return float(s.h)
    raise TypeError(f"not a dither schedule: {s!r}")


def schedule_values(s: DitherSchedule, n: int) -> np.ndarray:
    """h_1..h_n as an array; element ``t-1`` equals ``schedule_eval(s, t)`` bitwise."""
    return np.array([schedule_eval(s, t) for t in range(1, n + 1)], dtype=np.float64)


def sqrt_schedule(m: int) -> PowerLaw:
    """The horizon-free choice h_t = sqrt(2t/m) for bounded losses."""
    return PowerLaw(math.sqrt(2.0 / m), 0.5)


# --- SplitMix64 -----------------------------------------------------------


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def splitmix64_block(seeds, start: int, count: int) -> np.ndarray:
    """Raw draws ``start .. start+count-1`` for each seed; shape ``(len(seeds), count)``."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = seeds[:, None] + idx[None, :] * _GAMMA
        return _mix64(state)


def bits_to_uniform(bits: np.ndarray) -> np.ndarray:
    return ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * _INV_2_52


def uniform_block(seeds, start: int, count: int) -> np.ndarray:
    return bits_to_uniform(splitmix64_block(seeds, start, count))


def derive_seed(master_seed: int, index) -> np.ndarray | int:
    """Seed for trial ``index``: draw ``index`` of the stream seeded by mix64(master_seed).

    Accepts an int or an integer array for ``index``.
    """
    master = np.array([master_seed & _U64_MASK], dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix64(master)[0]
        idx = np.asarray(index, dtype=np.uint64)
        out = _mix64(base + (idx + np.uint64(1)) * _GAMMA)
    if out.ndim == 0:
        return int(out)
    return out


@dataclass
class RandomStream:
    """Single-owner uniform stream on (0, 1); equal seeds give identical draws."""

    seed: int
    position: int = field(default=0)

    def __post_init__(self):
        self.seed = int(self.seed) & _U64_MASK

    def uniform(self, k: int) -> np.ndarray:
        out = uniform_block([self.seed], self.position, k)[0]
        self.position += k
        return out

    def next_raw(self, k: int) -> np.ndarray:
        out = splitmix64_block([self.seed], self.position, k)[0]
        self.position += k
        return out


def draw_dither(rng: RandomStream, m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("m must be >= 1")
    return rng.uniform(m)


def seq_sum(values: Sequence[float]) -> float:
    """Left-to-right float sum; the batched kernels reproduce this order exactly."""
    s = 0.0
    for v in values:
        s = s + float(v)
    return s
