"""Episodes, hindsight-optimal losses, Monte Carlo regret and the quadrature oracle.

FPF episodes over a fixed sequence run through a batched kernel that
evaluates many trials at once.  It performs exactly the same float
operations, in the same order, as the step-by-step ``Predictor`` path, so a
trial re-run from its printed seed with ``run_episode`` reproduces its
cumulative loss bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import bounds
from .adversary import AdversarySpec
from .core import (
    CountVector,
    StateSequence,
    UnsupportedError,
    derive_seed,
    schedule_values,
    uniform_block,
)
from .loss import LOG, SQUARED_L2, LossSpec, loss_eval, weighted_mean, weighted_scores
from .predict import CLAIRVOYANT, FPF, IID, SHARED, Predictor, PredictorConfig, check_compatible

# dithered weights held in memory at once by the batched kernel
_BATCH_ELEMENTS = 1 << 22


@dataclass
class EpisodeResult:
    cum_loss: float
    per_step_losses: np.ndarray
    lstar: float
    regret: float
    seed: int = 0


@dataclass
class RegretReport:
    trials: int
    mean_regret: float
    ci95_halfwidth: float
    max_regret: float
    bound_value: Optional[float]
    seeds: np.ndarray = field(repr=False)
    cum_losses: np.ndarray = field(repr=False)
    lstars: np.ndarray = field(repr=False)
    regrets: np.ndarray = field(repr=False)
    n: int = 0
    per_t_mean_regret_curve: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def mean_normalized_regret(self) -> float:
        return self.mean_regret / self.n


def summarize(regrets) -> tuple[float, float, float]:
    """(mean, 1.96 * sample std / sqrt(k), max); order-independent via fsum."""
    r = [float(v) for v in regrets]
    k = len(r)
    if any(math.isinf(v) for v in r):
        return math.inf, math.inf, math.inf
    mean = math.fsum(r) / k
    if k == 1:
        return mean, 0.0, r[0]
    var = math.fsum((v - mean) ** 2 for v in r) / (k - 1)
    return mean, 1.96 * math.sqrt(var) / math.sqrt(k), max(r)


# --- hindsight ------------------------------------------------------------


def _lstar_from_counts(counts: np.ndarray, l: LossSpec, seq: StateSequence | None = None):
    n = int(counts.sum())
    if l.finite_strategies:
        scores = weighted_scores(l.rows, counts.astype(np.float64))
        b = int(np.argmin(scores))
        return b, float(scores[b])
    if l.kind == LOG:
        p = counts / n if n else np.full(l.m, 1.0 / l.m)
        return p, math.fsum(c * math.log(n / c) for c in counts.tolist() if c > 0)
    if n == 0:
        return l.points.mean(axis=0), 0.0
    mean = weighted_mean(l.points, counts / n)
    diffs = l.points - mean
    per_state = np.sum(diffs * diffs, axis=1)
    return mean, math.fsum((counts * per_state).tolist())


def best_fixed_loss(seq: StateSequence, l: LossSpec):
    """(optimal fixed strategy, L*_n) for the whole sequence."""
    return _lstar_from_counts(seq.prefix_counts()[-1], l, seq)


def prefix_lstar(seq: StateSequence, l: LossSpec) -> np.ndarray:
    """L*_t for t = 1..n."""
    pc = seq.prefix_counts()
    return np.array([_lstar_from_counts(pc[t], l)[1] for t in range(1, len(seq) + 1)])


# --- single episode -------------------------------------------------------


def run_episode(
    pred: PredictorConfig, seq: StateSequence, l: LossSpec, seed: int = 0
) -> EpisodeResult:
    """Play ``pred`` against ``seq``; b_t is formed from x_1..x_{t-1} only."""
    if len(seq) == 0:
        raise ValueError("sequence must be nonempty")
    if seq.m != l.m:
        raise ValueError(f"sequence alphabet {seq.m} != loss alphabet {l.m}")
    agent = Predictor(pred, l, seed)
    counts = CountVector.zeros(seq.m)
    losses = np.empty(len(seq))
    for t, x in enumerate(seq.states, start=1):
        if pred.kind == CLAIRVOYANT:
            b = agent.act_hindsight(counts.add(x), t)
        else:
            b = agent.act(counts, t)
        losses[t - 1] = loss_eval(l, b, x)
        counts = counts.add(x)
    cum = math.fsum(losses.tolist())
    _, lstar = best_fixed_loss(seq, l)
    return EpisodeResult(cum, losses, lstar, cum - lstar, int(seed))


# --- batched FPF kernel ---------------------------------------------------


def _neg_log(p: np.ndarray) -> np.ndarray:
    flat = [(-math.log(v) if v > 0.0 else math.inf) for v in p.ravel().tolist()]
    return np.array(flat, dtype=np.float64).reshape(p.shape)


def fpf_step_losses(
    cfg: PredictorConfig, seq: StateSequence, l: LossSpec, seeds
) -> np.ndarray:
    """Per-step FPF losses for every seed; shape ``(len(seeds), n)``."""
    if cfg.kind != FPF:
        raise UnsupportedError("the batched kernel handles FPF only")
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    n, m = len(seq), seq.m
    xs = seq.as_array()
    counts = seq.prefix_counts()[:-1].astype(np.float64)  # N_{t-1}, shape (n, m)
    h = schedule_values(cfg.schedule, n)
    tm1 = np.arange(n, dtype=np.float64)
    steps = np.arange(n)

    if cfg.dither_mode == IID:
        u = uniform_block(seeds, 0, n * m).reshape(len(seeds), n, m)
    else:
        u = np.broadcast_to(uniform_block(seeds, 0, m)[:, None, :], (len(seeds), n, m))

    raw = counts[None] + h[None, :, None] * u
    if l.finite_strategies:
        picks = np.argmin(weighted_scores(l.rows, raw), axis=-1)
        return l.rows[picks, xs[None, :]]

    usum = u[..., 0]
    for j in range(1, m):
        usum = usum + u[..., j]
    normalizer = tm1[None] + h[None] * usum
    probs = raw / normalizer[..., None]
    if l.kind == LOG:
        return _neg_log(probs[:, steps, xs])
    b = weighted_mean(l.points, probs)
    target = l.points[xs]
    out = np.zeros(b.shape[:-1])
    for d in range(b.shape[-1]):
        diff = b[..., d] - target[None, :, d]
        out = out + diff * diff
    return out


def _trial_rows(cfg, seq, l, seeds, want_curve):
    """cum_loss per trial plus (optionally) the per-step cumulative-loss sum."""
    if cfg.kind == FPF:
        n, m = len(seq), seq.m
        chunk = max(1, _BATCH_ELEMENTS // max(1, n * m))
        cums, curve = [], None
        for i in range(0, len(seeds), chunk):
            losses = fpf_step_losses(cfg, seq, l, seeds[i : i + chunk])
            cums.extend(math.fsum(row) for row in losses.tolist())
            if want_curve:
                c = np.cumsum(losses, axis=1).sum(axis=0)
                curve = c if curve is None else curve + c
        return np.array(cums), curve
    cums, curve = [], None
    for s in seeds.tolist():
        ep = run_episode(cfg, seq, l, s)
        cums.append(ep.cum_loss)
        if want_curve:
            c = np.cumsum(ep.per_step_losses)
            curve = c if curve is None else curve + c
    return np.array(cums), curve


def theorem_bound(cfg: PredictorConfig, n: int, l: LossSpec) -> Optional[float]:
    """The applicable regret bound for FPF, or None."""
    if cfg.kind != FPF:
        return None
    if l.kind == LOG:
        return bounds.log_loss_bound(n, l.m, cfg.schedule)
    return bounds.bounded_loss_bound(n, l.m, l.bound_R, cfg.schedule)


def monte_carlo_regret(
    pred: PredictorConfig,
    source: Union[StateSequence, AdversarySpec],
    l: LossSpec,
    trials: int,
    master_seed: int = 0,
    *,
    n: Optional[int] = None,
    threads: int = 1,
    curve: bool = False,
) -> RegretReport:
    """Estimate expected regret over the predictor's randomisation.

    Trial k plays with the stream seeded by ``derive_seed(master_seed, k)``.
    Work is split across ``threads`` by contiguous trial blocks; per-trial
    values do not depend on the split.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    check_compatible(pred, l)
    if isinstance(source, AdversarySpec):
        if n is None:
            if source.sequence is None:
                raise ValueError("horizon n is required for generated sequences")
            n = len(source.sequence)
        # every supported adversary is deterministic given its spec (the
        # anti-deterministic target is itself deterministic), so regenerating
        # per trial yields the same sequence
        seq = source.generate(l.m, n, l)
    else:
        seq = source
    if seq.m != l.m:
        raise ValueError(f"sequence alphabet {seq.m} != loss alphabet {l.m}")
    n = len(seq)

    seeds = derive_seed(master_seed, np.arange(trials))
    blocks = np.array_split(seeds, max(1, min(threads, trials)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda b: _trial_rows(pred, seq, l, b, curve), blocks))
    else:
        parts = [_trial_rows(pred, seq, l, b, curve) for b in blocks]
    cums = np.concatenate([p[0] for p in parts])
    _, lstar = best_fixed_loss(seq, l)
    lstars = np.full(trials, lstar)
    regrets = cums - lstar
    mean, ci, mx = summarize(regrets)

    per_t = None
    if curve:
        total = sum(p[1] for p in parts)
        per_t = total / trials - prefix_lstar(seq, l)

    return RegretReport(
        trials=trials,
        mean_regret=mean,
        ci95_halfwidth=ci,
        max_regret=mx,
        bound_value=theorem_bound(pred, n, l),
        seeds=seeds,
        cum_losses=cums,
        lstars=lstars,
        regrets=regrets,
        n=n,
        per_t_mean_regret_curve=per_t,
    )


# --- quadrature oracle ----------------------------------------------------


def quadrature_pick_probabilities(
    counts: np.ndarray, h: float, l: LossSpec, grid_points_per_dim: int = 400
) -> np.ndarray:
    """P(FPF picks b) for one step, by midpoint rule over the dither cube [0,1]^m."""
    m = l.m
    g = grid_points_per_dim
    mid = (np.arange(g) + 0.5) / g
    rows = l.rows
    hits = np.zeros(rows.shape[0])
    # slab over the first coordinate to bound memory at g^(m-1) points
    rest = np.stack(np.meshgrid(*([mid] * (m - 1)), indexing="ij"), axis=-1).reshape(-1, m - 1)
    for u0 in mid:
        u = np.empty((rest.shape[0], m))
        u[:, 0] = u0
        u[:, 1:] = rest
        w = counts[None, :] + h * u
        scores = w @ rows.T
        # Exact ties sit on a measure-zero set of the continuous cube but the
        # symmetric midpoint grid hits them; share such cells among the tied
        # strategies instead of handing them all to the lowest index.
        tied = scores <= scores.min(axis=1, keepdims=True) + 1e-12 * (1.0 + np.abs(scores).max(axis=1, keepdims=True))
        hits += (tied / tied.sum(axis=1, keepdims=True)).sum(axis=0)
    return hits / float(g**m)


def quadrature_expected_regret(
    pred: PredictorConfig,
    seq: StateSequence,
    l: LossSpec,
    grid_points_per_dim: int = 400,
) -> float:
    """Expected FPF regret on a short sequence, integrating each step's dither.

    With i.i.d. dither each decision depends only on its own u_t, so the
    expected loss is a sum of per-step integrals over [0,1]^m.
    """
    if pred.kind != FPF or pred.dither_mode != IID:
        raise UnsupportedError("quadrature oracle covers iid-dither FPF only")
    if not l.finite_strategies:
        raise UnsupportedError("quadrature oracle needs a finite strategy set")
    if l.m > 3 or len(seq) > 8:
        raise UnsupportedError("quadrature oracle limited to m <= 3 and n <= 8")
    pc = seq.prefix_counts().astype(np.float64)
    h = schedule_values(pred.schedule, len(seq))
    expected = 0.0
    for t, x in enumerate(seq.states, start=1):
        p = quadrature_pick_probabilities(pc[t - 1], float(h[t - 1]), l, grid_points_per_dim)
        expected += float(p @ l.rows[:, x])
    _, lstar = best_fixed_loss(seq, l)
    return expected - lstar
