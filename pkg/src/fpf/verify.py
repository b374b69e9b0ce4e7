"""Invariant suites shared by the ``verify`` subcommand and the acceptance tests.

Each check returns a list of ``Check`` records; a suite passes when every
record is ok.  Defaults are sized for an interactive run; the acceptance
tests call the same functions at full scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import bounds
from .adversary import anti_deterministic, iid_sequence, round_robin, second_sum_value
from .core import Constant, CountVector, PowerLaw, RandomStream, StateSequence, sqrt_schedule
from .harness import best_fixed_loss, monte_carlo_regret, quadrature_expected_regret, run_episode
from .loss import LossSpec
from .predict import PredictorConfig

ASYMMETRIC_ROWS = [[0.0, 2.0], [1.0, 0.0]]


@dataclass
class Check:
    name: str
    ok: bool
    observed: float
    limit: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{tag} {self.name}: observed={self.observed:.6g} limit={self.limit:.6g}{extra}"


def bounded_suite_sequences(n: int, n_random: int, seed: int = 2024) -> dict[str, StateSequence]:
    seqs = {
        "round_robin": round_robin(2, n),
        "all_zeros": StateSequence([0] * n, 2),
        "iid_0.5": iid_sequence([0.5, 0.5], n, seed),
    }
    rng = RandomStream(seed + 1)
    for k in range(n_random):
        p = float(rng.uniform(1)[0])
        seqs[f"random_{k}"] = iid_sequence([p, 1 - p], n, seed + 100 + k)
    return seqs


def check_bounded_dominance(n=512, trials=200, n_random=3, master_seed=1):
    """0-1 loss, m=2, h_t = sqrt(2t/m): mean regret <= exact bound + 3 ci95."""
    m = 2
    l = LossSpec.zero_one(m)
    cfg = PredictorConfig.fpf(sqrt_schedule(m))
    out = []
    cap = 4.0 * math.sqrt(2.0 * m / n)
    for name, seq in bounded_suite_sequences(n, n_random).items():
        rep = monte_carlo_regret(cfg, seq, l, trials, master_seed)
        limit = bounds.bounded_loss_bound(n, m, 1.0, cfg.schedule)
        out.append(Check(f"bounded[{name}] regret<=bound", rep.mean_regret <= limit + 3 * rep.ci95_halfwidth,
                         rep.mean_regret, limit, f"ci95={rep.ci95_halfwidth:.4g}"))
        norm = rep.mean_regret / n
        out.append(Check(f"bounded[{name}] normalized<=4R*sqrt(2m/n)", norm <= cap + 3 * rep.ci95_halfwidth / n,
                         norm, cap))
    return out


def check_log_redundancy(n=2000, trials=100, ms=(2, 4), master_seed=2):
    """Log loss, constant h = 1/m, round-robin: mean regret <= m ln n + 3 ci95."""
    out = []
    for m in ms:
        cfg = PredictorConfig.fpf(Constant(1.0 / m))
        rep = monte_carlo_regret(cfg, round_robin(m, n), LossSpec.log(m), trials, master_seed)
        cap = bounds.log_loss_cap(n, m)
        out.append(Check(f"log[m={m}] regret<=m*ln(n)", rep.mean_regret <= cap + 3 * rep.ci95_halfwidth,
                         rep.mean_regret, cap, f"ci95={rep.ci95_halfwidth:.4g}"))
    return out


def check_log_cap_chain(ns=(10, 100, 1000, 10**4, 10**5, 10**6), ms=(2, 3, 4)):
    """Exact log-loss bound with h = 1/m against the cap m ln n + m^2.

    The first m steps each contribute m to the second sum, so the plain
    m ln n cap does not hold for the exact sum; grouping the remaining terms
    by floor((t-1)/m) and comparing with an integral gives the extra m^2.
    """
    out = []
    for m in ms:
        for n in ns:
            v = bounds.log_loss_bound(n, m, Constant(1.0 / m))
            cap = bounds.log_loss_cap(n, m) + m * m
            out.append(Check(f"log-cap[m={m},n={n}] exact<=m*ln(n)+m^2", v <= cap, v, cap))
    return out


def check_sqrt_closed_form(ns=tuple(2**k for k in range(7, 15)), m=2, rel_tol=0.05):
    out = []
    for n in ns:
        exact = bounds.bounded_loss_bound(n, m, 1.0, sqrt_schedule(m))
        closed = bounds.sqrt_schedule_closed_form(n, m, 1.0)
        rel = abs(exact - closed) / closed
        out.append(Check(f"sqrt-closed-form[n={n}] rel-gap", rel <= rel_tol and exact <= closed, rel, rel_tol))
    return out


def oracle_grid(ns=(1, 2, 4), hs=(0.5, 1.0, 2.0)):
    seqs = {1: [0], 2: [0, 1], 4: [0, 0, 1, 0]}
    losses = {"zero_one": LossSpec.zero_one(2), "asymmetric": LossSpec.matrix(ASYMMETRIC_ROWS)}
    for lname, l in losses.items():
        for n in ns:
            for h in hs:
                yield lname, l, StateSequence(seqs[n], 2), h


def check_oracle(trials=20000, grid=400, master_seed=3):
    """Monte Carlo mean regret agrees with the quadrature oracle within 3 ci95."""
    out = []
    for lname, l, seq, h in oracle_grid():
        cfg = PredictorConfig.fpf(Constant(h))
        q = quadrature_expected_regret(cfg, seq, l, grid)
        rep = monte_carlo_regret(cfg, seq, l, trials, master_seed)
        gap = abs(rep.mean_regret - q)
        out.append(Check(f"oracle[{lname},n={len(seq)},h={h}] |mc-quad|", gap <= 3 * rep.ci95_halfwidth,
                         gap, 3 * rep.ci95_halfwidth, f"mc={rep.mean_regret:.5f} quad={q:.5f}"))
    return out


def check_variance(ts=(1, 10, 100, 1000), trials=10**4, seed=4):
    m = 2
    sched = PowerLaw(1.0, 0.5)
    seq = round_robin(m, max(ts))
    out = []
    for t in ts:
        v = bounds.empirical_step_variance(sched, seq, t, trials, seed)
        b = bounds.variance_bound(t, sched, m)
        out.append(Check(f"variance[t={t}] sample<=bound", v <= b, v, b))
    return out


def check_kolmogorov(n=2**20, tol=1e-4):
    sched = PowerLaw(1.0, 0.5)
    a = bounds.kolmogorov_partial_sum(sched, 2, n)
    b = bounds.kolmogorov_partial_sum(sched, 2, 2 * n)
    return [Check(f"kolmogorov[{n}->{2 * n}] increment", 0.0 <= b - a < tol, b - a, tol)]


def check_anti_deterministic(n=1000, trials=500, master_seed=5):
    l = LossSpec.zero_one(2)
    fl = PredictorConfig.fl()
    seq = anti_deterministic(fl, l, n)
    ep = run_episode(fl, seq, l)
    out = [
        Check("adversary FL cum_loss==n", ep.cum_loss == n, ep.cum_loss, n),
        Check("adversary FL regret>=n/2", ep.regret >= n // 2, ep.regret, n // 2),
    ]
    cfg = PredictorConfig.fpf(sqrt_schedule(2))
    rep = monte_carlo_regret(cfg, seq, l, trials, master_seed)
    limit = bounds.bounded_loss_bound(n, 2, 1.0, cfg.schedule)
    out.append(Check("adversary replay FPF regret<=bound", rep.mean_regret <= limit, rep.mean_regret, limit,
                     f"ci95={rep.ci95_halfwidth:.4g}"))
    return out


def check_round_robin_maximality(cases=((2, 8), (3, 6)), schedules=(Constant(1.0), PowerLaw(1.0, 0.5))):
    out = []
    for m, n in cases:
        for s in schedules:
            rr = second_sum_value(round_robin(m, n), s)
            worst = -math.inf
            violations = 0
            for states in itertools.product(range(m), repeat=n):
                v = second_sum_value(StateSequence(states, m), s)
                worst = max(worst, v)
                violations += v > rr
            out.append(Check(f"round-robin-max[m={m},n={n},{s}] violations", violations == 0, violations, 0,
                             f"max={worst:.12g} rr={rr:.12g}"))
    return out


def check_type_class(max_n=12, ms=(2, 3)):
    violations = 0
    worst = -math.inf
    for m in ms:
        for n in range(0, max_n + 1):
            for counts in itertools.product(range(n + 1), repeat=m):
                if sum(counts) != n:
                    continue
                lhs, rhs = bounds.type_class_check(CountVector(counts))
                worst = max(worst, lhs - rhs)
                violations += lhs > rhs + 1e-12
    return [Check("type-class lhs<=rhs violations", violations == 0, violations, 0, f"max lhs-rhs={worst:.3g}")]


def check_telescoping(pairs=100, n=256, ms=(2, 3), seed=6):
    """Clairvoyant loss <= L* + 2 R m h_n on random (sequence, shared dither) pairs."""
    out = []
    for m in ms:
        l = LossSpec.zero_one(m)
        sched = sqrt_schedule(m)
        cfg = PredictorConfig.clairvoyant(sched)
        slack = 2.0 * l.bound_R * m * math.sqrt(2.0 * n / m)
        rng = RandomStream(seed + m)
        violations, worst = 0, -math.inf
        for k in range(pairs):
            p = rng.uniform(m)
            seq = iid_sequence(p / p.sum() if k % 2 else np.full(m, 1.0 / m), n, seed * 1000 + m * 100 + k)
            ep = run_episode(cfg, seq, l, int(rng.next_raw(1)[0]))
            _, lstar = best_fixed_loss(seq, l)
            worst = max(worst, ep.cum_loss - lstar - slack)
            violations += ep.cum_loss > lstar + slack
        out.append(Check(f"telescoping[m={m}] violations", violations == 0, violations, 0,
                         f"max excess over slack={worst:.4g}"))
    return out


SUITES = {
    "bounds": lambda: check_bounded_dominance() + check_log_redundancy() + check_log_cap_chain()
    + check_sqrt_closed_form(),
    "oracle": lambda: check_oracle(),
    "variance": lambda: check_variance() + check_kolmogorov(),
    "adversary": lambda: check_anti_deterministic() + check_round_robin_maximality(),
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for key in SUITES for c in SUITES[key]()]
    return SUITES[name]()
