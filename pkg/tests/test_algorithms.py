import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopavg.algorithms import (KINDS, AlgorithmConfig, cha_schedule_init, init_baseline,
                               initialize, step_a2, step_cha, step_cp, step_drg, step_icha,
                               step_pa)
from hopavg.graph import build_family, build_random_geometric, path_graph
from hopavg.hopwise import compute_weights, init_state, lyapunov

from conftest import fixture_graphs

SMALL = fixture_graphs(small_only=True)


class ScriptedRng:
    """Stands in for a Generator where a test needs a specific draw."""

    def __init__(self, ints, reals=()):
        self.ints = list(ints)
        self.reals = list(reals)

    def integers(self, high):
        v = self.ints.pop(0)
        assert 0 <= v < high
        return v

    def random(self):
        return self.reals.pop(0)


@pytest.mark.parametrize("kw", [
    dict(kind="gossip"), dict(kind="cha", cha_c=0), dict(kind="cha", cha_eps=-1),
    dict(kind="cp", cp_beta=0), dict(kind="a2", a2_gamma=1.0), dict(kind="a2", a2_phi=0.5),
])
def test_config_rejects_out_of_range(kw):
    with pytest.raises(ValueError):
        AlgorithmConfig(**kw)


def test_config_accepts_infinite_beta():
    assert AlgorithmConfig("cp", cp_beta=math.inf).cp_beta == math.inf


def test_phi_and_inverse():
    cfg = AlgorithmConfig("cha", cha_c=2.0)
    assert cfg.phi(4.0) == 0.5
    assert cfg.phi(0.0) == math.inf
    assert cfg.phi_inverse(cfg.phi(3.0)) == pytest.approx(3.0)


# ----------------------------------------------------------------- hopwise

def test_icha_three_path_finishes_in_one_step():
    g = path_graph(3)
    w = compute_weights(g)
    s = init_state(g, w, [0, 1, 2])
    out = step_icha(s, w)
    assert (out.initiator, out.transmissions, out.terminated) == (1, 1, True)
    again = step_icha(s, w)
    assert again.terminated and again.transmissions == 0


def test_icha_breaks_ties_by_lowest_id():
    g = build_family("cycle", 6)
    w = compute_weights(g)
    s = init_state(g, w, [1, 0, 0, 1, 0, 0])  # nodes 1, 2, 4, 5 share the largest drop
    assert s.delta_v[0] == s.delta_v[3] == 0
    assert s.delta_v[1] == s.delta_v[2] == s.delta_v[4] == s.delta_v[5] > 0
    assert step_icha(s, w).initiator == 1


@given(seed=st.integers(0, 2**32 - 1), gi=st.integers(0, len(SMALL) - 1))
@settings(max_examples=40, deadline=None)
def test_icha_always_takes_the_largest_drop(seed, gi):
    g = SMALL[gi]
    w = compute_weights(g)
    s = init_state(g, w, np.random.default_rng(seed).random(g.n))
    for _ in range(30):
        best = max(s.delta_v)
        if best <= 0:
            break
        v = lyapunov(s, w)
        out = step_icha(s, w)
        assert out.v_drop == best
        assert lyapunov(s, w) < v


def test_cha_event_times_and_firing_rules():
    g = build_random_geometric(25, 60, np.random.default_rng(4))
    w = compute_weights(g)
    cfg = AlgorithmConfig("cha", cha_eps=0.0)
    rng = np.random.default_rng(9)
    s = init_state(g, w, np.random.default_rng(10).random(g.n))
    sched = cha_schedule_init(s, cfg, rng)
    assert sched.tau == [cfg.phi(v) for v in s.delta_v]
    t_prev = 0.0
    for _ in range(200):
        t_min = min(sched.tau)
        out = step_cha(s, w, sched, cfg, rng)
        assert out.event_time == t_min >= t_prev
        assert sched.tau[out.initiator] == math.inf
        for j in g.neighbors(out.initiator):
            want = cfg.phi(s.delta_v[j])
            assert sched.tau[j] == (max(want, t_min) if want < math.inf else math.inf)
        assert sched.finite == sum(t < math.inf for t in sched.tau)
        t_prev = t_min
        if out.terminated:
            break


def test_cha_jitter_is_bounded_by_eps():
    g = build_family("cycle", 8)
    w = compute_weights(g)
    cfg = AlgorithmConfig("cha", cha_eps=0.01)
    s = init_state(g, w, np.linspace(0, 1, 8))
    sched = cha_schedule_init(s, cfg, np.random.default_rng(0))
    for t, v in zip(sched.tau, s.delta_v):
        if v > 0:
            assert cfg.phi(v) < t < cfg.phi(v) + 0.01


def test_cha_without_jitter_breaks_ties_at_random():
    g = build_family("cycle", 6)
    w = compute_weights(g)
    cfg = AlgorithmConfig("cha", cha_eps=0.0)
    first = set()
    for seed in range(30):
        s = init_state(g, w, [1, 0, 0, 1, 0, 0])
        rng = np.random.default_rng(seed)
        first.add(step_cha(s, w, cha_schedule_init(s, cfg, rng), cfg, rng).initiator)
    assert len(first) > 2


def test_cha_terminates_when_no_drop_remains():
    g = path_graph(3)
    w = compute_weights(g)
    cfg = AlgorithmConfig("cha", cha_eps=0.0)
    s = init_state(g, w, [0, 1, 2])
    rng = np.random.default_rng(0)
    sched = cha_schedule_init(s, cfg, rng)
    out = step_cha(s, w, sched, cfg, rng)
    assert out.initiator == 1 and out.terminated
    with pytest.raises(RuntimeError):
        step_cha(s, w, sched, cfg, rng)


# ---------------------------------------------------------------- baselines

def test_pa_pair_mean_is_exact():
    g = path_graph(2)
    st_ = init_baseline(g, [0.0, 2.0], "pa")
    out = step_pa(st_, g, np.random.default_rng(0))
    assert st_.x_hat.tolist() == [1.0, 1.0]
    assert out.transmissions == 2


def test_cp_first_activation_by_hand():
    g = path_graph(3)
    y = [0.2, 0.5, 0.9]
    st_ = init_baseline(g, y, "cp")
    # directed id 0 is 0 -> 1 on link (0, 1)
    step_cp(st_, g, 1e6, ScriptedRng([0]))
    k = 1 / (1 + 1e-6)
    assert st_.k[0] == pytest.approx(k, rel=1e-15)
    assert st_.mu[0] == 0.2
    assert st_.x_hat[1] == pytest.approx((0.5 + k * 0.2) / (1 + k), rel=1e-14)
    assert st_.x_hat[0] == 0.2 and st_.x_hat[2] == 0.9


def test_cp_infinite_beta_is_exact_on_a_tree():
    g = build_family("path", 6)
    y = [0.3, 0.1, 0.8, 0.6, 0.2, 0.9]
    st_ = init_baseline(g, y, "cp")
    rng = np.random.default_rng(1)
    for _ in range(600):
        step_cp(st_, g, math.inf, rng)
    assert np.allclose(st_.x_hat, np.mean(y), atol=1e-12)


def test_a2_first_activation_by_hand():
    g = path_graph(2)
    st_ = init_baseline(g, [0.0, 1.0], "a2")
    step_a2(st_, g, 0.3, 0.49, ScriptedRng([0]))
    assert st_.x_hat == pytest.approx([0.0735, 0.9265], abs=1e-15)
    assert st_.delta.tolist() == [-0.49, 0.49]


@given(seed=st.integers(0, 2**32 - 1), gi=st.integers(0, len(SMALL) - 1))
@settings(max_examples=30, deadline=None)
def test_a2_corrections_cancel(seed, gi):
    g = SMALL[gi]
    rng = np.random.default_rng(seed)
    st_ = init_baseline(g, rng.random(g.n), "a2")
    for _ in range(50):
        step_a2(st_, g, 0.3, 0.49, rng)
    assert abs(st_.delta.sum()) < 1e-12
    assert np.allclose(st_.delta_sum, [sum(st_.delta[_in] for _in in
                       [2 * e + (0 if g.links[e][1] == i else 1) for _, e in g.adjacency[i]])
                       for i in range(g.n)], atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), gi=st.integers(0, len(SMALL) - 1))
@settings(max_examples=30, deadline=None)
def test_pa_and_drg_conserve_the_sum(seed, gi):
    g = SMALL[gi]
    rng = np.random.default_rng(seed)
    y = rng.random(g.n)
    for kind, step in (("pa", step_pa), ("drg", step_drg)):
        st_ = init_baseline(g, y, kind)
        for _ in range(40):
            step(st_, g, rng)
        assert math.fsum(st_.x_hat) == pytest.approx(math.fsum(y), rel=1e-12)


def test_drg_group_mean_and_cost():
    g = build_family("path", 4)
    st_ = init_baseline(g, [0.0, 3.0, 6.0, 9.0], "drg")
    out = step_drg(st_, g, None, leader=1)
    assert out.transmissions == 3
    assert st_.x_hat.tolist() == [3.0, 3.0, 3.0, 9.0]


# -------------------------------------------------------------- run wrapper

@pytest.mark.parametrize("kind", KINDS)
def test_run_is_reproducible(kind):
    g = build_random_geometric(15, 30, np.random.default_rng(0))
    y = np.random.default_rng(1).random(15)

    def go():
        run = initialize(g, y, AlgorithmConfig(kind), 123)
        costs = []
        for _ in range(50):
            if run.terminated:
                break
            peek = run.peek_cost()
            costs.append((peek, run.step().transmissions))
        return run.snapshot(), costs

    (a, ca), (b, cb) = go(), go()
    assert np.array_equal(a, b) and ca == cb
    assert all(p == t for p, t in ca)


def test_terminated_run_refuses_to_step():
    run = initialize(path_graph(2), [0.1, 0.3], AlgorithmConfig("icha"), 0)
    assert run.terminated
    with pytest.raises(RuntimeError):
        run.step()
