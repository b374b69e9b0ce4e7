import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpf.adversary import AdversarySpec, round_robin
from fpf.core import Constant, PowerLaw, StateSequence, UnsupportedError, derive_seed, sqrt_schedule
from fpf.harness import (
    best_fixed_loss,
    fpf_step_losses,
    monte_carlo_regret,
    prefix_lstar,
    quadrature_expected_regret,
    quadrature_pick_probabilities,
    run_episode,
)
from fpf.loss import LossSpec
from fpf.predict import Predictor, PredictorConfig

ZO = LossSpec.zero_one(2)


def test_episode_invariants():
    seq = StateSequence([0, 1, 1, 0, 1], 2)
    ep = run_episode(PredictorConfig.fpf(Constant(1.0)), seq, ZO, 5)
    assert ep.cum_loss == pytest.approx(ep.per_step_losses.sum(), rel=1e-9)
    assert ep.regret == ep.cum_loss - ep.lstar


def test_episode_rejects_empty():
    with pytest.raises(ValueError):
        run_episode(PredictorConfig.fl(), StateSequence([], 2), ZO)


def test_first_step_symmetric_over_seeds():
    seq = StateSequence([0], 2)
    cfg = PredictorConfig.fpf(Constant(1.0))
    losses = [run_episode(cfg, seq, ZO, s).cum_loss for s in derive_seed(1, np.arange(10**4)).tolist()]
    assert abs(np.mean(losses) - 0.5) < 0.01 + 1e-12


def test_fl_constant_sequence():
    ep = run_episode(PredictorConfig.fl(), StateSequence([0, 0, 0, 0], 2), ZO)
    assert ep.cum_loss == 0


def test_fpf_log_cum_loss_finite_and_matches_assignment():
    seq = StateSequence([0, 2, 2, 1, 0, 0], 3)
    cfg = PredictorConfig.fpf(Constant(0.3))
    ep = run_episode(cfg, seq, LossSpec.log(3), 77)
    assert math.isfinite(ep.cum_loss)
    pred = Predictor(cfg, LossSpec.log(3), 77)
    from fpf.core import CountVector

    c, total = CountVector.zeros(3), []
    for t, x in enumerate(seq, start=1):
        total.append(-math.log(pred.act(c, t)[x]))
        c = c.add(x)
    assert ep.cum_loss == math.fsum(total)


def test_fl_log_loss_infinite_is_propagated():
    ep = run_episode(PredictorConfig.fl(), StateSequence([0, 1], 2), LossSpec.log(2))
    assert ep.cum_loss == math.inf


def test_best_fixed_examples():
    b, v = best_fixed_loss(StateSequence([0, 1, 0, 0], 2), ZO)
    assert (b, v) == (0, 1.0)
    # brute force over both strategies
    assert min(sum(b != x for x in [0, 1, 0, 0]) for b in (0, 1)) == 1
    _, v = best_fixed_loss(StateSequence([0, 0, 1, 1], 2), LossSpec.log(2))
    assert v == pytest.approx(4 * math.log(2), abs=1e-12)
    assert v == pytest.approx(2.772589, abs=1e-6)
    _, v = best_fixed_loss(StateSequence([0, 0, 0], 2), LossSpec.log(2))
    assert v == 0.0


def test_best_fixed_squared_l2():
    pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]
    seq = StateSequence([0, 1, 1, 2], 3)
    b, v = best_fixed_loss(seq, LossSpec.squared_l2(pts))
    p = np.array(pts)[list(seq)]
    np.testing.assert_allclose(b, p.mean(axis=0))
    assert v == pytest.approx(((p - p.mean(axis=0)) ** 2).sum())


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=30), st.integers(0, 2**32))
def test_lstar_is_optimal(states, seed):
    rng = np.random.default_rng(seed)
    l = LossSpec.matrix(rng.uniform(-1, 2, size=(4, 3)))
    seq = StateSequence(states, 3)
    _, lstar = best_fixed_loss(seq, l)
    for b in range(4):
        assert sum(l.rows[b, x] for x in states) >= lstar - 1e-9


def test_prefix_lstar_last_equals_best_fixed():
    seq = StateSequence([0, 1, 1, 0, 1, 1], 2)
    assert prefix_lstar(seq, ZO)[-1] == best_fixed_loss(seq, ZO)[1]


@pytest.mark.parametrize(
    "loss",
    [ZO, LossSpec.matrix([[0, 2, 1], [1, 0, 0.5]]), LossSpec.log(3), LossSpec.squared_l2([[0, 0], [1, 0], [0, 1]])],
    ids=["zero_one", "matrix", "log", "l2"],
)
@pytest.mark.parametrize("mode", ["iid", "shared"])
def test_batched_kernel_is_bitwise_stepwise(loss, mode):
    m = loss.m
    seq = StateSequence([(3 * t * t + t) % m for t in range(40)], m)
    cfg = PredictorConfig.fpf(PowerLaw(0.8, 0.5), mode)
    seeds = derive_seed(31, np.arange(6))
    batch = fpf_step_losses(cfg, seq, loss, seeds)
    for k, s in enumerate(seeds.tolist()):
        ep = run_episode(cfg, seq, loss, s)
        assert np.array_equal(ep.per_step_losses, batch[k])


def test_causality_future_states_do_not_matter():
    cfg = PredictorConfig.fpf(sqrt_schedule(3))
    l = LossSpec.zero_one(3)
    base = [0, 2, 1, 1, 0, 2, 2, 1]
    t = 4

    def decisions(states):
        p = Predictor(cfg, l, 99)
        from fpf.core import CountVector

        c, out = CountVector.zeros(3), []
        for i, x in enumerate(states, start=1):
            out.append(p.act(c, i))
            c = c.add(x)
        return out

    ref = decisions(base)[:t]
    for perm in ([2, 2, 2, 2], [1, 0, 1, 0], [0, 0, 0, 0]):
        assert decisions(base[:t] + perm)[:t] == ref


def test_monte_carlo_single_trial():
    seq = StateSequence([0, 1, 1], 2)
    cfg = PredictorConfig.fpf(Constant(1.0))
    rep = monte_carlo_regret(cfg, seq, ZO, 1, 4)
    ep = run_episode(cfg, seq, ZO, int(rep.seeds[0]))
    assert rep.mean_regret == ep.regret
    assert rep.ci95_halfwidth == 0.0


def test_monte_carlo_first_step():
    rep = monte_carlo_regret(PredictorConfig.fpf(Constant(1.0)), StateSequence([0], 2), ZO, 10**4, 8)
    assert abs(rep.mean_regret - 0.5) < 0.02


def test_monte_carlo_ci_definition():
    rep = monte_carlo_regret(PredictorConfig.fpf(Constant(1.0)), round_robin(2, 20), ZO, 300, 2)
    assert rep.ci95_halfwidth == pytest.approx(1.96 * np.std(rep.regrets, ddof=1) / math.sqrt(300), rel=1e-9)
    assert rep.max_regret == rep.regrets.max()


def test_monte_carlo_non_fpf_predictor():
    cfg = PredictorConfig.fpl(Constant(2.0))
    rep = monte_carlo_regret(cfg, round_robin(2, 12), ZO, 20, 3)
    for k in (0, 7, 19):
        assert rep.cum_losses[k] == run_episode(cfg, round_robin(2, 12), ZO, int(rep.seeds[k])).cum_loss


def test_monte_carlo_with_adversary_spec():
    rep = monte_carlo_regret(PredictorConfig.fl(), AdversarySpec("anti_deterministic", target=PredictorConfig.fl()),
                             ZO, 2, 0, n=50)
    assert np.all(rep.cum_losses == 50)
    assert rep.bound_value is None


def test_parallel_matches_serial():
    cfg = PredictorConfig.fpf(sqrt_schedule(2))
    seq = round_robin(2, 300)
    a = monte_carlo_regret(cfg, seq, ZO, 101, 5, threads=1)
    b = monte_carlo_regret(cfg, seq, ZO, 101, 5, threads=4)
    assert np.array_equal(np.sort(a.regrets), np.sort(b.regrets))
    assert np.array_equal(a.cum_losses, b.cum_losses)
    assert a.mean_regret == b.mean_regret and a.ci95_halfwidth == b.ci95_halfwidth


def test_regret_curve_endpoint():
    cfg = PredictorConfig.fpf(Constant(1.0))
    seq = round_robin(2, 30)
    rep = monte_carlo_regret(cfg, seq, ZO, 50, 1, curve=True)
    assert rep.per_t_mean_regret_curve[-1] == pytest.approx(rep.mean_regret, abs=1e-9)


def _triangular_pick0(n0, n1, h):
    # pick 0 iff n1 + h u1 <= n0 + h u0  <=>  u0 - u1 >= (n1 - n0)/h; u0-u1 is triangular on [-1, 1]
    d = (n1 - n0) / h
    if d <= -1:
        return 1.0
    if d >= 1:
        return 0.0
    return (1 - d) ** 2 / 2 if d >= 0 else 1 - (1 + d) ** 2 / 2


@pytest.mark.parametrize("n0, n1, h", [(0, 0, 1.0), (1, 0, 2.0), (0, 1, 0.5), (2, 1, 4.0), (2, 0, 1.0)])
def test_quadrature_pick_probabilities_closed_form(n0, n1, h):
    p = quadrature_pick_probabilities(np.array([n0, n1], float), h, ZO, 400)
    assert abs(p[0] - _triangular_pick0(n0, n1, h)) < 5e-3
    assert p.sum() == pytest.approx(1.0)


def test_quadrature_examples():
    cfg = PredictorConfig.fpf(Constant(1.0))
    assert quadrature_expected_regret(cfg, StateSequence([0], 2), ZO) == pytest.approx(0.5)
    p = quadrature_pick_probabilities(np.array([2.0, 0.0]), 1.0, ZO)
    assert p[0] == 1.0


def test_quadrature_matches_monte_carlo_small():
    cfg = PredictorConfig.fpf(Constant(1.0))
    seq = StateSequence([0, 1], 2)
    q = quadrature_expected_regret(cfg, seq, ZO)
    rep = monte_carlo_regret(cfg, seq, ZO, 40000, 12)
    assert abs(rep.mean_regret - q) <= 3 * rep.ci95_halfwidth


def test_quadrature_three_states():
    cfg = PredictorConfig.fpf(Constant(1.0))
    l = LossSpec.zero_one(3)
    seq = StateSequence([0, 1], 3)
    q = quadrature_expected_regret(cfg, seq, l, 120)
    rep = monte_carlo_regret(cfg, seq, l, 40000, 12)
    assert abs(rep.mean_regret - q) <= 3 * rep.ci95_halfwidth + 5e-3


def test_quadrature_limits():
    cfg = PredictorConfig.fpf(Constant(1.0))
    with pytest.raises(UnsupportedError):
        quadrature_expected_regret(cfg, round_robin(2, 9), ZO)
    with pytest.raises(UnsupportedError):
        quadrature_expected_regret(cfg, StateSequence([0], 4), LossSpec.zero_one(4))
    with pytest.raises(UnsupportedError):
        quadrature_expected_regret(PredictorConfig.fpf(Constant(1.0), "shared"), StateSequence([0], 2), ZO)
    with pytest.raises(UnsupportedError):
        quadrature_expected_regret(cfg, StateSequence([0], 2), LossSpec.log(2))
