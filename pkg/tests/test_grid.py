import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perclab.grid import (
    CROSS,
    INTRA,
    EdgeSubset,
    TargetPair,
    build_hypercube,
    build_rectangle,
    build_rectangle_4x2,
    components,
    config_target_pairs,
    connected_indicator,
    enumeration_fixture,
    good_pair_event,
    good_pair_indicators,
    is_connected_spanning,
    reflect_rectangle_mask,
    reflect_target_pair,
    square_minus,
    three_of_four_event,
    ten_pattern_masks,
    verify_ten_pattern_cover,
)

RECT = build_rectangle_4x2()
Q3 = build_hypercube(3)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_hypercube_shape(k):
    g = build_hypercube(k)
    assert g.n_vertices == 2**k
    assert g.n_edges == k * 2 ** (k - 1)
    assert set(g.degrees()) == {k}


@pytest.mark.parametrize("k", [0, 5, 2.0])
def test_hypercube_rejects_bad_dimension(k):
    with pytest.raises(ValueError):
        build_hypercube(k)


def test_edge_order_is_deterministic():
    assert build_hypercube(3) == build_hypercube(3)
    assert build_rectangle_4x2().edges == RECT.edges
    coords = [RECT.edge_coords(i) for i in range(RECT.n_edges)]
    assert coords == sorted(coords)


def test_rectangle_4x2():
    assert RECT.n_edges == 10
    assert sorted(RECT.degrees()) == [2, 2, 2, 2, 3, 3, 3, 3]
    cross = {RECT.edge_coords(i) for i, lab in enumerate(RECT.edge_labels) if lab == CROSS}
    assert cross == {((1, 0), (2, 0)), ((1, 1), (2, 1))}
    assert RECT.edge_labels.count(INTRA) == 8


def test_graph_rejects_too_many_edges():
    with pytest.raises(ValueError):
        build_rectangle(6, 4)  # 38 edges


def test_edge_subset():
    s = EdgeSubset(0b1011)
    assert list(s) == [0, 1, 3]
    assert len(s) == 3 and 3 in s and 2 not in s
    assert s.valid_for(Q3)
    assert not EdgeSubset(1 << 12).valid_for(Q3)
    with pytest.raises(ValueError):
        EdgeSubset(-1)


def test_connected_spanning_extremes():
    assert is_connected_spanning(Q3, Q3.full_mask)
    assert not is_connected_spanning(Q3, 0)


def _nx_connected(g, s):
    h = nx.Graph()
    h.add_nodes_from(range(g.n_vertices))
    h.add_edges_from(e for i, e in enumerate(g.edges) if s >> i & 1)
    return nx.is_connected(h)


def test_connected_counts_match_networkx():
    for g in (build_hypercube(2), Q3):
        ours = connected_indicator(g)
        ref = [_nx_connected(g, s) for s in range(1 << g.n_edges)]
        assert ours.tolist() == ref


def test_enumeration_fixture_frozen():
    # Counts from the networkx route above, frozen for regression.
    fx = enumeration_fixture()
    assert fx["Q3_connected_spanning"] == 1083
    assert fx["Q2_connected_spanning"] == 5
    assert fx["rect_three_of_four"] == int(sum(three_of_four_event(RECT, s) for s in range(1024)))
    assert len(fx["rect_good_pair"]) == 4


def test_target_pairs():
    c0, c1, c2, c3 = config_target_pairs()
    allv = set(RECT.vertices)
    assert allv - c0.a - c0.b == {(0, 1), (3, 1)}
    assert allv - c3.a - c3.b == {(1, 0), (2, 0)}
    assert c1.a == square_minus(0, 1, 0) and c1.b == square_minus(1, 1, 1)
    assert c2.a == square_minus(0, 0, 1) and c2.b == square_minus(1, 0, 0)
    with pytest.raises(ValueError):
        TargetPair(frozenset({(0, 0), (0, 1)}), c0.b)
    with pytest.raises(ValueError):
        TargetPair(c0.b, c0.a)


def test_good_pair_examples():
    bottom = RECT.mask_of([((0, 0), (1, 0)), ((1, 0), (2, 0)), ((2, 0), (3, 0))])
    assert good_pair_event(RECT, bottom, config_target_pairs()[0])
    for tp in config_target_pairs():
        assert not good_pair_event(RECT, 0, tp)
        assert good_pair_event(RECT, RECT.full_mask, tp)


def test_ten_pattern_cover():
    assert verify_ten_pattern_cover()
    assert three_of_four_event(RECT, RECT.full_mask)
    assert len(set(ten_pattern_masks())) == 10


def test_three_of_four_implies_every_good_pair():
    pairs = good_pair_indicators(RECT)
    for s in range(1024):
        if three_of_four_event(RECT, s):
            assert pairs[:, s].all()


def test_reflection_permutes_configurations():
    tps = config_target_pairs()
    images = [tps.index(reflect_target_pair(tp)) for tp in tps]
    assert images == [0, 2, 1, 3]
    pairs = good_pair_indicators(RECT)
    for s in range(1024):
        r = reflect_rectangle_mask(RECT, s)
        for i, j in enumerate(images):
            assert pairs[i, s] == pairs[j, r]


masks = st.integers(0, (1 << 12) - 1)


@given(masks, masks)
def test_connectivity_monotone(a, b):
    if is_connected_spanning(Q3, a):
        assert is_connected_spanning(Q3, a | b)


@given(st.integers(0, 1023), st.integers(0, 1023), st.integers(0, 3))
def test_good_pair_monotone(a, b, i):
    tp = config_target_pairs()[i]
    if good_pair_event(RECT, a, tp):
        assert good_pair_event(RECT, a | b, tp)


@given(masks)
def test_components_partition_vertices(s):
    comps = components(Q3, s)
    assert sorted(v for c in comps for v in c) == list(range(8))
