"""Command line entry point: ``fpf run|bound|verify|gen-adversary|oracle``.

Exit codes: 0 success, 1 usage or configuration error, 2 a verification
check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from . import bounds, verify
from .adversary import (
    ANTI_DETERMINISTIC,
    FIXED_SEQ,
    IID_SEQ,
    ROUND_ROBIN,
    AdversarySpec,
    read_sequence,
    write_sequence,
)
from .core import Constant, PowerLaw, UnsupportedError, sqrt_schedule
from .harness import monte_carlo_regret, quadrature_expected_regret, run_episode
from .loss import LossSpec
from .predict import FIXED, PredictorConfig, check_compatible

log = logging.getLogger("fpf")

CSV_COLUMNS = [
    "row_type",
    "trial_id",
    "seed",
    "cum_loss",
    "lstar",
    "regret",
    "mean_regret",
    "ci95_halfwidth",
    "max_regret",
    "bound_value",
]


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass
class ExperimentConfig:
    alphabet_size: int
    horizon: int
    loss: LossSpec
    predictor: PredictorConfig
    adversary: AdversarySpec
    trials: int = 1
    master_seed: int = 0
    output_path: Optional[str] = None


def _get(d: dict, key: str, path: str, typ=None, default: Any = ...):
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "missing field")
        return default
    v = d[key]
    if typ is not None and (not isinstance(v, typ) or isinstance(v, bool)):
        name = "number" if isinstance(typ, tuple) else typ.__name__
        raise ConfigError(f"{path}.{key}", f"expected {name}, got {type(v).__name__}")
    return v


def _num(d, key, path, default: Any = ...):
    return _get(d, key, path, (int, float), default)


def parse_schedule(d: dict, m: int, path: str = "schedule"):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    kind = _get(d, "kind", path, str)
    try:
        if kind == "power_law":
            return PowerLaw(float(_num(d, "h1", path)), float(_num(d, "alpha", path)))
        if kind == "constant":
            return Constant(float(_num(d, "h", path)))
        if kind == "sqrt":
            return sqrt_schedule(m)
    except ValueError as e:
        raise ConfigError(path, str(e)) from None
    raise ConfigError(f"{path}.kind", f"unknown schedule kind {kind!r} (power_law, constant, sqrt)")


def parse_loss(d: dict, m: int, base: Path, path: str = "loss") -> LossSpec:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    kind = _get(d, "kind", path, str)
    try:
        if kind == "zero_one":
            return LossSpec.zero_one(m)
        if kind == "log":
            return LossSpec.log(m)
        if kind == "matrix":
            l = LossSpec.from_json(base / d["path"]) if "path" in d else LossSpec.matrix(_get(d, "rows", path, list))
        elif kind == "squared_l2":
            l = LossSpec.squared_l2(_get(d, "points", path, list))
        else:
            raise ConfigError(f"{path}.kind", f"unknown loss kind {kind!r} (zero_one, log, matrix, squared_l2)")
    except (ValueError, OSError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(path, str(e)) from None
    if l.m != m:
        raise ConfigError(path, f"loss covers {l.m} states, alphabet_size is {m}")
    return l


def parse_predictor(d: dict, m: int, schedule, path: str = "predictor") -> PredictorConfig:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    kind = _get(d, "kind", path, str)
    try:
        if kind == "fpf":
            return PredictorConfig.fpf(_need(schedule, path), _get(d, "dither_mode", path, str, "iid"))
        if kind == "fl":
            return PredictorConfig.fl()
        if kind == "fpl":
            return PredictorConfig.fpl(_need(schedule, path))
        if kind == "clairvoyant":
            return PredictorConfig.clairvoyant(_need(schedule, path))
        if kind == "smoothed_fpf":
            return PredictorConfig.smoothed(_need(schedule, path), _get(d, "inner_samples", path, int, 256))
        if kind == FIXED:
            return PredictorConfig.fixed(_get(d, "strategy", path, int))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(path, str(e)) from None
    raise ConfigError(f"{path}.kind", f"unknown predictor kind {kind!r}")


def _need(schedule, path):
    if schedule is None:
        raise ConfigError("schedule", f"required by {path}")
    return schedule


def parse_adversary(d: dict, m: int, base: Path, path: str = "adversary") -> AdversarySpec:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    kind = _get(d, "kind", path, str)
    try:
        if kind == FIXED_SEQ:
            if "path" in d:
                states = read_sequence(base / d["path"], m).states
            else:
                states = tuple(_get(d, "sequence", path, list))
            return AdversarySpec(FIXED_SEQ, sequence=tuple(states))
        if kind == IID_SEQ:
            return AdversarySpec(IID_SEQ, probs=tuple(_get(d, "probs", path, list)), seed=_get(d, "seed", path, int, 0))
        if kind == ROUND_ROBIN:
            return AdversarySpec(ROUND_ROBIN)
        if kind == ANTI_DETERMINISTIC:
            target = parse_predictor(_get(d, "target", path, dict, {"kind": "fl"}), m, None, f"{path}.target")
            return AdversarySpec(ANTI_DETERMINISTIC, target=target)
    except (ValueError, OSError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(path, str(e)) from None
    raise ConfigError(f"{path}.kind", f"unknown adversary kind {kind!r}")


def parse_config(raw: dict, base: Path = Path(".")) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")
    m = _get(raw, "alphabet_size", "$", int)
    if m < 2:
        raise ConfigError("$.alphabet_size", "must be >= 2")
    n = _get(raw, "horizon", "$", int)
    if n < 1:
        raise ConfigError("$.horizon", "must be >= 1")
    l = parse_loss(_get(raw, "loss", "$", dict), m, base, "$.loss")
    sched = parse_schedule(raw["schedule"], m, "$.schedule") if "schedule" in raw else None
    pred = parse_predictor(_get(raw, "predictor", "$", dict), m, sched, "$.predictor")
    adv = parse_adversary(_get(raw, "adversary", "$", dict), m, base, "$.adversary")
    trials = _get(raw, "trials", "$", int, 1)
    if trials < 1:
        raise ConfigError("$.trials", "must be >= 1")
    seed = _get(raw, "master_seed", "$", int, 0)
    if not 0 <= seed < 2**64:
        raise ConfigError("$.master_seed", "must be an unsigned 64-bit integer")

    if adv.kind == ANTI_DETERMINISTIC and (l.kind != "zero_one" or m != 2):
        raise ConfigError("$.adversary", f"unsupported combination: anti_deterministic adversary with {l.kind} loss "
                          "(binary zero_one only)")
    if adv.kind == FIXED_SEQ and len(adv.sequence) != n:
        raise ConfigError("$.adversary.sequence", f"length {len(adv.sequence)} != horizon {n}")
    if adv.kind == FIXED_SEQ and any(not 0 <= x < m for x in adv.sequence):
        raise ConfigError("$.adversary.sequence", "state outside alphabet")
    try:
        check_compatible(pred, l)
    except ValueError as e:
        raise ConfigError("$.predictor", f"unsupported combination: {e}") from None
    return ExperimentConfig(m, n, l, pred, adv, trials, seed, raw.get("output_path"))


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from None
    return parse_config(raw, p.parent)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for k in range(report.trials):
        w.writerow(["trial", k, int(report.seeds[k]), fmt(float(report.cum_losses[k])),
                    fmt(float(report.lstars[k])), fmt(float(report.regrets[k])), "", "", "", ""])
    w.writerow(["summary", "", "", "", "", "", fmt(report.mean_regret), fmt(report.ci95_halfwidth),
                fmt(report.max_regret), fmt(report.bound_value)])
    return buf.getvalue()


def _write(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.master_seed = args.seed
    out = args.out if args.out is not None else cfg.output_path
    seq = cfg.adversary.generate(cfg.alphabet_size, cfg.horizon, cfg.loss)

    if args.replay_seed is not None:
        ep = run_episode(cfg.predictor, seq, cfg.loss, args.replay_seed)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerow(["replay", "", args.replay_seed, fmt(ep.cum_loss), fmt(ep.lstar), fmt(ep.regret), "", "", "", ""])
        _write(buf.getvalue(), out)
        return 0

    rep = monte_carlo_regret(cfg.predictor, seq, cfg.loss, cfg.trials, cfg.master_seed, threads=args.threads)
    _write(report_csv(rep), out)
    bound = "n/a" if rep.bound_value is None else f"{rep.bound_value:.6g}"
    print(
        f"trials={rep.trials} n={rep.n} mean_regret={rep.mean_regret:.6g} "
        f"ci95={rep.ci95_halfwidth:.3g} max_regret={rep.max_regret:.6g} bound={bound}",
        file=sys.stderr,
    )
    return 0


def _schedule_from_args(args, m: int):
    if args.schedule is None:
        return None
    if args.schedule == "constant":
        if args.h is None:
            raise ConfigError("--h", "required for a constant schedule")
        return Constant(args.h)
    if args.schedule == "power_law":
        if args.h1 is None or args.alpha is None:
            raise ConfigError("--h1/--alpha", "required for a power-law schedule")
        return PowerLaw(args.h1, args.alpha)
    return sqrt_schedule(m)


def cmd_bound(args) -> int:
    try:
        sched = _schedule_from_args(args, args.m)
        q = bounds.BoundQuery(args.theorem, args.n, args.m, args.R, sched)
    except ValueError as e:
        raise ConfigError("bound", str(e)) from None
    value = bounds.evaluate(q)
    cap = bounds.log_loss_cap(q.n, q.m) if q.theorem == bounds.LOG_LOSS_CONST_H else None
    if q.theorem == bounds.LOG_LOSS_CONST_H:
        sched = Constant(1.0 / q.m)
    if q.theorem == bounds.BOUNDED_LOSS_SQRT:
        sched = sqrt_schedule(q.m)
    h1 = alpha = h = ""
    kind = ""
    if isinstance(sched, PowerLaw):
        kind, h1, alpha = "power_law", f"{sched.h1:.12g}", f"{sched.alpha:.12g}"
    elif isinstance(sched, Constant):
        kind, h = "constant", f"{sched.h:.12g}"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.header:
        w.writerow(["theorem", "n", "m", "R", "schedule", "h1", "alpha", "h", "bound_value", "cap"])
    w.writerow([q.theorem, q.n, q.m, "" if q.R is None else f"{q.R:.12g}", kind, h1, alpha, h,
                f"{value:.12g}", "" if cap is None else f"{cap:.12g}"])
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_verify(args) -> int:
    checks = verify.run_suite(args.suite)
    failed = [c for c in checks if not c.ok]
    for c in checks:
        if not c.ok or args.verbose:
            print(c.line())
    print(f"{args.suite}: {len(checks) - len(failed)}/{len(checks)} checks passed")
    return 2 if failed else 0


def cmd_gen_adversary(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        seq = cfg.adversary.generate(cfg.alphabet_size, cfg.horizon, cfg.loss)
    else:
        if args.kind is None or args.n is None:
            raise ConfigError("gen-adversary", "either --config or --kind with --n is required")
        try:
            if args.kind == IID_SEQ:
                if not args.probs:
                    raise ConfigError("--probs", "required for iid")
                probs = tuple(float(p) for p in args.probs.split(","))
                spec = AdversarySpec(IID_SEQ, probs=probs, seed=args.seed)
                m = len(probs)
            elif args.kind == ANTI_DETERMINISTIC:
                target = PredictorConfig.fl() if args.target == "fl" else PredictorConfig.fixed(int(args.target))
                spec = AdversarySpec(ANTI_DETERMINISTIC, target=target)
                m = 2
            elif args.kind == ROUND_ROBIN:
                spec, m = AdversarySpec(ROUND_ROBIN), args.m
            else:
                raise ConfigError("--kind", f"cannot generate {args.kind!r} without a config")
            seq = spec.generate(m, args.n)
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError("gen-adversary", str(e)) from None
    if args.out in (None, "-"):
        sys.stdout.write("".join(f"{x}\n" for x in seq.states))
    else:
        write_sequence(args.out, seq)
    return 0


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    seq = cfg.adversary.generate(cfg.alphabet_size, cfg.horizon, cfg.loss)
    try:
        v = quadrature_expected_regret(cfg.predictor, seq, cfg.loss, args.grid)
    except UnsupportedError as e:
        raise ConfigError("oracle", str(e)) from None
    print(f"{v:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpf", description="Follow-the-Perturbed-Frequency experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="Monte Carlo regret experiment from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int, help="master seed (u64)")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--replay-seed", type=int, help="re-run a single trial from its printed seed")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bound", help="evaluate a regret bound")
    b.add_argument("--theorem", required=True, choices=bounds.THEOREMS)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--R", type=float)
    b.add_argument("--schedule", choices=("constant", "power_law", "sqrt"))
    b.add_argument("--h", type=float)
    b.add_argument("--h1", type=float)
    b.add_argument("--alpha", type=float)
    b.add_argument("--header", action="store_true")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=("bounds", "oracle", "variance", "adversary", "all"))
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen-adversary", help="write a sequence file")
    g.add_argument("--config")
    g.add_argument("--kind", choices=(ROUND_ROBIN, IID_SEQ, ANTI_DETERMINISTIC))
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--n", type=int)
    g.add_argument("--probs")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--target", default="fl", help="'fl' or a fixed strategy index")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_adversary)

    o = sub.add_parser("oracle", help="quadrature expected regret for a small FPF config")
    o.add_argument("--config", required=True)
    o.add_argument("--grid", type=int, default=400)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
