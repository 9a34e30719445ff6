import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perclab.models import (
    DIR_D,
    DIR_U,
    MAX_CONFIGS,
    ModelSpec,
    Window,
    column_coin_distribution,
    edge_probability,
    edges_from_states,
    exact_window_distribution,
    lower_bound_combination,
    dfh_bound,
    one_independence_gap,
    sample_masks,
    sample_window,
    states_from_draws,
    theta_for_edge_prob,
    verify_distribution,
    verify_one_independence,
)

MODELS = ["udlra:0.592746", "direction:0.3013", "direction:0.5", "signs:0.3", "signs:1"]
WINDOWS = [(1, 2), (2, 1), (2, 2), (3, 1), (1, 3), (2, 3), (3, 2)]


def test_parse_and_validate():
    spec = ModelSpec.parse("direction:0.3013")
    assert spec.kind == "direction" and spec.parameter == 0.3013
    assert str(spec) == "direction:0.3013"
    for bad in ("direction", "torus:0.5", "signs:1.5"):
        with pytest.raises(ValueError):
            ModelSpec.parse(bad)


def test_edge_probability_values():
    assert edge_probability(ModelSpec("udlra", 0.592746)) == pytest.approx(0.555440, abs=1e-6)
    assert edge_probability(ModelSpec("udlra", 0)) == 1
    assert edge_probability(ModelSpec("direction", 0.5)) == 0.5625
    assert edge_probability(ModelSpec("direction", 0)) == 0.75
    assert edge_probability(ModelSpec("signs", 0.5)) == 0.5


def test_theta_for_edge_prob():
    assert theta_for_edge_prob(0.5625) == (0.5, 0.5)
    lo, hi = theta_for_edge_prob(0.5921)
    assert lo == pytest.approx(0.30134, abs=1e-5) and hi == pytest.approx(0.69866, abs=1e-5)
    assert edge_probability(ModelSpec("direction", lo)) == pytest.approx(0.5921, abs=1e-12)
    assert theta_for_edge_prob(0.5) is None
    assert theta_for_edge_prob(0.8) is None


def test_lower_bound_combination():
    r = lower_bound_combination()
    assert r["value"] == pytest.approx(0.555197, abs=1e-6)
    assert r["udlra_side"] == pytest.approx(r["dfh_side"], abs=1e-15)
    assert r["value"] == pytest.approx((35 - 3 * math.sqrt(33)) / 32, abs=1e-15)
    assert dfh_bound(0.556) == pytest.approx(0.531136, abs=1e-6)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("w, h", WINDOWS)
def test_window_law_normalised_with_exact_marginals(model, w, h):
    spec = ModelSpec.parse(model)
    dist = exact_window_distribution(spec, Window(w, h))
    assert dist.total() == pytest.approx(1, abs=1e-12)
    assert np.abs(dist.marginals() - edge_probability(spec)).max() < 1e-12
    assert verify_distribution(dist, 1e-12)


def test_direction_marginal_at_point_three():
    # (3/4)(0.09 - 0.3 + 1) = 0.5925.
    dist = exact_window_distribution(ModelSpec("direction", 0.3), Window(3, 3))
    assert np.abs(dist.marginals() - 0.5925).max() < 1e-12


@pytest.mark.parametrize("x0, y0", [(0, 0), (1, 0), (0, 1)])
def test_udlra_three_by_three_all_parities(x0, y0):
    spec = ModelSpec("udlra", 0.4)
    dist = exact_window_distribution(spec, Window(3, 3, x0, y0))
    assert np.abs(dist.marginals() - 0.7).max() < 1e-12
    assert verify_distribution(dist, 1e-12)


@pytest.mark.parametrize("model", ["signs:0.3", "direction:0.3013"])
def test_three_by_three_one_independent(model):
    assert verify_one_independence(ModelSpec.parse(model), Window(3, 3))


def test_single_edge_signs_half():
    dist = exact_window_distribution(ModelSpec("signs", 0.5), Window(2, 1))
    assert dist.support == {0: 0.5, 1: 0.5}


def test_oversize_window_rejected():
    with pytest.raises(ValueError):
        exact_window_distribution(ModelSpec("direction", 0.3), Window(4, 4))
    assert 4**16 > MAX_CONFIGS


@pytest.mark.parametrize("w, h", [(2, 3), (3, 2), (3, 3)])
def test_column_coin_fixture_rejected(w, h):
    dist = column_coin_distribution(Window(w, h))
    assert dist.total() == pytest.approx(1)
    assert not verify_distribution(dist)
    assert one_independence_gap(dist) == pytest.approx(0.25)


def test_signs_theta_one_all_open():
    dist = exact_window_distribution(ModelSpec("signs", 1), Window(2, 3))
    assert dist.support == {dist.graph.full_mask: 1.0}
    assert verify_distribution(dist)


def test_sample_window_examples():
    w = Window(4, 3)
    plus = sample_window(ModelSpec("signs", 0.7), w, iter([0] * 12))
    assert plus.horizontal.all() and plus.vertical.all()
    allA = sample_window(ModelSpec("udlra", 0.6), w, iter([0] * 12))
    assert allA.horizontal.all() and allA.vertical.all()
    with pytest.raises(ValueError):
        sample_window(ModelSpec("signs", 0.7), w, iter([0] * 11))


def test_direction_checkerboard():
    xs, ys = np.meshgrid(np.arange(5), np.arange(4), indexing="ij")
    states = np.where((xs + ys) % 2 == 0, DIR_U, DIR_D)
    e = edges_from_states(ModelSpec("direction", 0.3), states)
    assert not e.horizontal.any()
    assert (e.vertical == (states[:, :-1] == DIR_U)).all()


def test_sample_window_row_major():
    spec = ModelSpec("signs", 0.5)
    # Row-major: draw k lands at (k % 3, k // 3); only (1, 0) is '-'.
    draws = [0] * 6
    draws[1] = 2**32 - 1
    e = sample_window(spec, Window(3, 2), iter(draws))
    assert not e.horizontal[0, 0] and not e.horizontal[1, 0] and not e.vertical[1, 0]
    assert e.horizontal[:, 1].all()


def test_threshold_mapping():
    spec = ModelSpec("direction", 0.3)
    thr = spec.thresholds()
    assert list(states_from_draws(spec, [0, int(thr[0]) - 1, int(thr[0]), 2**32 - 1])) == [0, 0, 1, 3]
    probs = np.diff(np.concatenate([[0], thr, [2**32]])) / 2**32
    assert np.allclose(probs, spec.state_probs(), atol=1e-9)


@pytest.mark.parametrize("model", ["udlra:0.592746", "direction:0.3013", "signs:0.3"])
def test_sampler_matches_exact_marginals(model):
    spec = ModelSpec.parse(model)
    win = Window(2, 3)
    n = 10**6
    masks = sample_masks(spec, win, np.random.default_rng(12345), n)
    exact = exact_window_distribution(spec, win).marginals()
    freq = np.array([((masks >> e) & 1).mean() for e in range(win.graph().n_edges)])
    se = np.sqrt(exact * (1 - exact) / n)
    assert (np.abs(freq - exact) <= 4 * se).all()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["udlra", "direction", "signs"]), st.floats(0, 1), st.integers(1, 3), st.integers(1, 2))
def test_random_models_are_one_independent(kind, t, w, h):
    spec = ModelSpec(kind, t)
    dist = exact_window_distribution(spec, Window(w, h))
    if dist.graph.n_edges:
        assert verify_distribution(dist, 1e-12)
        assert np.abs(dist.marginals() - edge_probability(spec)).max() < 1e-12
