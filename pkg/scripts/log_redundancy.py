#!/usr/bin/env python3
"""Log-loss regret of FPF with h = 1/m next to the Laplace and add-half estimators.

For each horizon the script prints the FPF Monte Carlo mean regret, the
deterministic regret of the two classical estimators on the same sequence,
the exact bound sum and the m ln n reference.
"""

import argparse
import math

import numpy as np

from fpf.adversary import iid_sequence, round_robin
from fpf.assignment import kt_assignment, laplace_assignment
from fpf.bounds import log_loss_bound, log_loss_cap
from fpf.core import Constant, CountVector
from fpf.harness import best_fixed_loss, monte_carlo_regret
from fpf.loss import LossSpec
from fpf.predict import PredictorConfig


def estimator_regret(assign, seq, l):
    c = CountVector.zeros(seq.m)
    total = []
    for t, x in enumerate(seq, start=1):
        total.append(-math.log(assign(c, t)[x]))
        c = c.add(x)
    return math.fsum(total) - best_fixed_loss(seq, l)[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--ns", type=int, nargs="+", default=[100, 1000, 10000])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sequence", choices=("round_robin", "iid"), default="round_robin")
    args = ap.parse_args(argv)

    m = args.m
    l = LossSpec.log(m)
    cfg = PredictorConfig.fpf(Constant(1.0 / m))
    print(f"{'n':>7} {'fpf':>10} {'ci95':>7} {'laplace':>10} {'add-half':>10} {'bound':>10} {'m ln n':>10}")
    for n in args.ns:
        if args.sequence == "round_robin":
            seq = round_robin(m, n)
        else:
            seq = iid_sequence(np.full(m, 1.0 / m), n, args.seed)
        rep = monte_carlo_regret(cfg, seq, l, args.trials, args.seed)
        print(f"{n:>7} {rep.mean_regret:>10.4f} {rep.ci95_halfwidth:>7.3f} "
              f"{estimator_regret(laplace_assignment, seq, l):>10.4f} {estimator_regret(kt_assignment, seq, l):>10.4f} "
              f"{log_loss_bound(n, m, Constant(1.0 / m)):>10.4f} {log_loss_cap(n, m):>10.4f}")


if __name__ == "__main__":
    main()
