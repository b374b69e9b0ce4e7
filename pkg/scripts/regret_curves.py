#!/usr/bin/env python3
"""Normalized regret against horizon for FPF, FPL and FL under 0-1 loss.

Writes one CSV row per (predictor, adversary, n) with the Monte Carlo mean
regret, its 95% half-width and the bounded-loss bound when one applies.

    python scripts/regret_curves.py --out curves.csv --trials 200
"""

import argparse
import csv
import sys

from fpf.adversary import anti_deterministic, iid_sequence, round_robin
from fpf.core import Constant, sqrt_schedule
from fpf.harness import monte_carlo_regret
from fpf.loss import LossSpec
from fpf.predict import PredictorConfig


def adversaries(m, n, seed):
    l = LossSpec.zero_one(m)
    out = {"round_robin": round_robin(m, n), "iid_uniform": iid_sequence([1.0 / m] * m, n, seed)}
    if m == 2:
        out["anti_fl"] = anti_deterministic(PredictorConfig.fl(), l, n)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--log2-n", type=int, nargs="+", default=[6, 8, 10, 12])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    m = args.m
    l = LossSpec.zero_one(m)
    predictors = {
        "fpf_sqrt": PredictorConfig.fpf(sqrt_schedule(m)),
        "fpl_sqrt": PredictorConfig.fpl(sqrt_schedule(m)),
        "fpf_const1": PredictorConfig.fpf(Constant(1.0)),
        "fl": PredictorConfig.fl(),
    }
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["predictor", "adversary", "n", "trials", "mean_regret", "ci95_halfwidth", "normalized", "bound_value"])
    for k in args.log2_n:
        n = 2**k
        for aname, seq in adversaries(m, n, args.seed).items():
            for pname, cfg in predictors.items():
                trials = 1 if not cfg.randomized else args.trials
                rep = monte_carlo_regret(cfg, seq, l, trials, args.seed, threads=args.threads)
                w.writerow([pname, aname, n, trials, repr(rep.mean_regret), repr(rep.ci95_halfwidth),
                            repr(rep.mean_regret / n), "" if rep.bound_value is None else repr(rep.bound_value)])
        fh.flush()
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
