import tracemalloc

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from perclab.models import KIND_CODE, ModelSpec, theta_for_edge_prob
from perclab.montecarlo import get_kernels, trial_key
from perclab.montecarlo.prng import ARC4_DROP

BACKENDS = ["python"]
try:
    get_kernels("cython")
    BACKENDS.append("cython")
except ImportError:
    pass

MODELS = ["direction:0.3013", "udlra:0.592746", "signs:0.5"]
TRIALS = 150


def _spec(model):
    spec = ModelSpec.parse(model)
    return spec, KIND_CODE[spec.kind], spec.thresholds()


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("N", [4, 8, 16])
def test_dual_matches_oracle(backend, N):
    k = get_kernels(backend)
    spec, kind, thr = _spec(MODELS[0])
    hits = 0
    for t in range(TRIALS):
        key = trial_key("dual_components", 7, t)
        states = oracles.arc4_states(spec, key, N, ARC4_DROP)
        want = oracles.dual_event(spec, states)
        assert bool(k.dual_trial_states(states, kind)) == want, t
        if t < 20:
            assert bool(k.dual_trial_key(key, N, kind, thr, ARC4_DROP)) == want, t
        hits += want
    assert 0 < hits < TRIALS


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("N", [8, 16, 64])
def test_crossing_matches_oracle(backend, N):
    k = get_kernels(backend)
    spec, kind, thr = _spec(MODELS[0])
    hits = 0
    for t in range(TRIALS):
        key = trial_key("crossings", 7, t)
        states = oracles.chacha_states(spec, key, 2 * N, N)
        want = oracles.crossing_event(spec, states)
        assert bool(k.crossing_trial_key(key, N, kind, thr)) == want, t
        assert bool(k.crossing_trial_states(states, kind)) == want, t
        hits += want
    assert 0 < hits < TRIALS


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("model", MODELS[1:])
def test_other_models_match_oracle(backend, model):
    k = get_kernels(backend)
    spec, kind, _ = _spec(model)
    rng = np.random.default_rng(99)
    for _ in range(100):
        states = oracles.states_from_draws(spec, rng.integers(0, 2**32, size=(16, 8), dtype=np.uint64))
        assert bool(k.dual_trial_states(states, kind)) == oracles.dual_event(spec, states)
        assert bool(k.crossing_trial_states(states, kind)) == oracles.crossing_event(spec, states)


def _checkerboard(N):
    x, y = np.meshgrid(np.arange(2 * N), np.arange(N), indexing="ij")
    return ((x + y) % 2).astype(np.uint8)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("N", [4, 9])
def test_extreme_configurations(backend, N):
    k = get_kernels(backend)
    signs = KIND_CODE["signs"]
    closed = _checkerboard(N)
    opened = np.zeros((2 * N, N), dtype=np.uint8)
    # All primal edges closed: the dual is one block-spanning component.
    assert k.dual_trial_states(closed, signs) == 1
    assert k.crossing_trial_states(closed, signs) == 1
    # All open: every dual face is a singleton, so the largest is tied.
    assert k.dual_trial_states(opened, signs) == 0
    assert k.crossing_trial_states(opened, signs) == 0


@pytest.mark.parametrize("backend", BACKENDS)
def test_signs_theta_one_crosses(backend):
    k = get_kernels(backend)
    spec, kind, thr = _spec("signs:1")
    assert k.crossing_trial_key(trial_key("crossings", 0, 0), 32, kind, thr) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 9), st.sampled_from(MODELS), st.integers(0, 2**32 - 1))
def test_backends_agree_on_random_states(N, model, seed):
    spec, kind, _ = _spec(model)
    rng = np.random.default_rng(seed)
    states = oracles.states_from_draws(spec, rng.integers(0, 2**32, size=(2 * N, N), dtype=np.uint64))
    want_d = oracles.dual_event(spec, states)
    want_c = oracles.crossing_event(spec, states)
    for b in BACKENDS:
        k = get_kernels(b)
        assert bool(k.dual_trial_states(states, kind)) == want_d
        assert bool(k.crossing_trial_states(states, kind)) == want_c


def _peak(k, N, kind, thr):
    tracemalloc.start()
    tracemalloc.reset_peak()
    k.dual_trial_key(trial_key("mem", 0, 0), N, kind, thr, 0, columns=3)
    peak = tracemalloc.get_traced_memory()[1]
    tracemalloc.stop()
    return peak


@pytest.mark.parametrize("backend", BACKENDS)
def test_dual_sweep_memory_is_linear(backend):
    k = get_kernels(backend)
    _, kind, thr = _spec(MODELS[0])
    a = _peak(k, 100_000, kind, thr)
    b = _peak(k, 200_000, kind, thr)
    assert 1.6 < b / a < 2.4


def test_far_supercritical_crosses_more_often():
    k = get_kernels()
    kind = KIND_CODE["direction"]
    freq = {}
    for p in (0.70, 0.57):
        thr = ModelSpec("direction", theta_for_edge_prob(p)[0]).thresholds()
        freq[p] = sum(k.crossing_trial_key(trial_key("sanity", 1, t), 256, kind, thr) for t in range(200)) / 200
    assert freq[0.70] < freq[0.57]
