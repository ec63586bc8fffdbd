import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopavg.algorithms import step_icha
from hopavg.bounds import (GammaBound, Unavailable, error_envelope, gamma_closed, gamma_general,
                           gamma_pa_complete, gamma_two_iteration, general_range)
from hopavg.graph import (build_family, build_random_geometric, circulant_regular, graph_invariants,
                          path_graph)
from hopavg.hopwise import compute_weights, init_state, lyapunov


def general_for(g):
    return gamma_general(graph_invariants(g), compute_weights(g)).value


def test_general_bound_on_three_path_by_hand():
    # n/2 + alpha + (n^2 - beta)(3(n-1) - D)(D+1)/(2n) with alpha=3/2, beta=63/8, D=2
    want = Fraction(3, 2) + Fraction(3, 2) + (9 - Fraction(63, 8)) * 4 * 3 / 6
    assert want == Fraction(21, 4)
    assert general_for(path_graph(3)) == pytest.approx(5.25, rel=1e-14)


@pytest.mark.parametrize("family,n,k,want_cor,want_thm", [
    ("path", 5, None, 48.75, 13.0),
    ("cycle", 4, None, None, 4.0),
    ("complete", 4, None, 5.0, None),
    ("strongly-regular", 10, 3, None, 62.0),
    ("cycle", 3, None, None, 4 / 3),
])
def test_closed_forms_by_hand(family, n, k, want_cor, want_thm):
    g = build_family(family, n, k)
    cor, thm = gamma_closed(family, n, k, graph_invariants(g).diameter, mu=1)
    if want_cor is not None:
        assert cor.value == pytest.approx(want_cor, rel=1e-12)
    if want_thm is not None:
        assert thm.value == pytest.approx(want_thm, rel=1e-12)


def test_out_of_range_slots_explain_themselves():
    cor, thm = gamma_closed("path", 3)
    assert isinstance(cor, Unavailable) and "n >= 5" in cor.reason
    assert isinstance(thm, Unavailable)
    _, thm = gamma_closed("complete", 6)
    assert isinstance(thm, Unavailable)


@pytest.mark.parametrize("n", range(3, 11))
def test_general_equals_complete_closed_form(n):
    assert general_for(build_family("complete", n)) == pytest.approx(1.5 * n - 1, rel=1e-12)


@pytest.mark.parametrize("family,ns", [("path", range(5, 16)), ("cycle", range(3, 16))])
def test_general_matches_closed_form(family, ns):
    for n in ns:
        g = build_family(family, n)
        cor, _ = gamma_closed(family, n)
        assert general_for(g) == pytest.approx(cor.value, rel=1e-9)


@pytest.mark.parametrize("n,k", [(10, 4), (12, 3), (16, 6), (9, 2), (20, 5)])
def test_general_matches_closed_form_on_regular(n, k):
    g = circulant_regular(n, k)
    inv = graph_invariants(g)
    cor, thm = gamma_closed("k-regular", n, k, inv.diameter)
    assert general_for(g) == pytest.approx(cor.value, rel=1e-9)
    assert thm.value <= cor.value


def test_petersen_general_matches_regular_closed_form():
    g = build_family("strongly-regular")
    cor, thm = gamma_closed("strongly-regular", 10, 3, 2, mu=1)
    assert general_for(g) == pytest.approx(cor.value, rel=1e-9)
    assert thm.value < cor.value


@pytest.mark.parametrize("n", range(4, 40))
def test_graph_specific_is_tighter(n):
    if n >= 5:
        cor, thm = gamma_closed("path", n)
        assert thm.value <= cor.value
    cor, thm = gamma_closed("cycle", n)
    assert thm.value <= cor.value


@given(n=st.integers(3, 50), extra=st.integers(0, 100), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_general_bound_within_global_range(n, extra, seed):
    target = min(2 * n + extra, n * (n - 1) // 2)
    g = build_random_geometric(n, target, np.random.default_rng(seed))
    lo, hi = general_range(n)
    assert lo <= general_for(g) <= hi


def test_two_iteration():
    assert gamma_two_iteration(5) == pytest.approx(25 / 9, rel=1e-15)
    g = 48.75
    assert 1 - 1 / gamma_two_iteration(g) == pytest.approx((1 - 1 / g) ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        gamma_two_iteration(1.0)


def test_pa_on_complete_graphs():
    assert gamma_pa_complete(10) == 9
    assert gamma_pa_complete(2) == 1
    ratios = [gamma_two_iteration(1.5 * n - 1) / gamma_pa_complete(n) for n in (10, 100, 1000)]
    assert ratios[0] > ratios[1] > ratios[2]
    assert 0.74 <= ratios[2] <= 0.76


def test_error_envelope_three_path():
    g = path_graph(3)
    inv = graph_invariants(g)
    w = compute_weights(g)
    s = init_state(g, w, [0, 1, 2])
    v0 = lyapunov(s, w)
    link, est = error_envelope(v0, inv, 5.25, 0)
    assert link == pytest.approx(math.sqrt(4 / 3), rel=1e-14)
    assert est == pytest.approx(4 / 3, rel=1e-14)
    actual_link = np.linalg.norm(np.array(s.x_lo) - 1.0)
    actual_est = np.linalg.norm(np.array(s.x_hat) - 1.0)
    assert actual_link == pytest.approx(0.9428, abs=1e-4) and actual_link <= link
    assert actual_est == pytest.approx(0.9428, abs=1e-4) and actual_est <= est


def test_error_envelope_scaling():
    inv = graph_invariants(build_family("cycle", 7))
    assert error_envelope(0.0, inv, 3.0, 5) == (0.0, 0.0)
    for k in range(6):
        a, b = error_envelope(2.0, inv, 3.0, k)
        c, d = error_envelope(2.0, inv, 3.0, k + 2)
        assert c == pytest.approx(a * (2 / 3), rel=1e-12)
        assert d == pytest.approx(b * (2 / 3), rel=1e-12)


def test_triangle_graph_specific_bound_holds_for_icha():
    g = build_family("cycle", 3)
    _, thm = gamma_closed("cycle", 3)
    w = compute_weights(g)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(300):
        s = init_state(g, w, rng.random(3))
        v0 = lyapunov(s, w)
        if v0 == 0:
            continue
        step_icha(s, w)
        worst = max(worst, lyapunov(s, w) / v0)
    assert worst <= thm.contraction_factor + 1e-12


def test_gamma_bound_contraction_factor():
    assert GammaBound(4.0, "general").contraction_factor == 0.75
