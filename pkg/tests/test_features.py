import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from oracles import harmonic_oracle
from sdgnet.exceptions import DomainError
from sdgnet.features import (
    NetworkFeatureExtractor,
    direct_effect,
    feature_table,
    harmonic_centrality,
    read_features,
    write_features,
)
from sdgnet.ingest import clean_panel, parse_long_csv
from sdgnet.network import IndicatorNetwork, StrongGraph, Node, strong_subgraph


def graph(n, edges):
    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        adj[i, j] = adj[j, i] = True
    return StrongGraph(tuple(Node(f"n{i}", 1) for i in range(n)), adj, 0.8)


def network(w):
    w = np.asarray(w, dtype=float)
    return IndicatorNetwork("T", [(f"n{i}", 1 + i % 17) for i in range(len(w))], w)


def test_direct_effect_max():
    assert direct_effect(network(np.full((4, 4), 0.3)), 0) == 1.0


def test_direct_effect_fraction():
    n = 80
    w = np.full((n, n), -0.1)
    w[0, 1:41] = w[1:41, 0] = 0.2
    assert direct_effect(network(w), 0) == pytest.approx(40 / 79)
    assert direct_effect(network(w), 0) == pytest.approx(0.5063, abs=1e-4)


def test_direct_effect_none_positive():
    w = np.full((3, 3), -0.4)
    w[0, 1] = w[1, 0] = 0.0
    assert direct_effect(network(w), 0) == 0.0


def test_harmonic_isolated():
    assert harmonic_centrality(graph(4, [(1, 2)]), 0) == 0.0


def test_harmonic_complete():
    g = graph(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    assert all(harmonic_centrality(g, i) == 1.0 for i in range(5))


def test_harmonic_path():
    assert harmonic_centrality(graph(3, [(0, 1), (1, 2)]), 0) == 0.75


def test_harmonic_bad_index():
    with pytest.raises(DomainError):
        harmonic_centrality(graph(2, []), 5)


random_graphs = st.integers(2, 25).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                .filter(lambda e: e[0] < e[1]), max_size=n * 2),
    )
)


@settings(max_examples=60)
@given(random_graphs)
def test_harmonic_matches_all_pairs_oracle(ng):
    n, edges = ng
    g = graph(n, edges)
    assert [harmonic_centrality(g, i) for i in range(n)] == harmonic_oracle(n, edges)


def test_feature_table_positive_pair():
    rows = feature_table(network([[1, 0.9], [0.9, 1]]))
    for r in rows:
        assert (r.x_d, r.x_h, r.y_label) == (1.0, 1.0, 1)


def test_feature_table_negative_pair():
    rows = feature_table(network([[1, -0.9], [-0.9, 1]]))
    for r in rows:
        assert (r.x_d, r.x_h, r.y_label) == (0.0, 0.0, 0)


def test_feature_table_eighty_rows():
    rng = np.random.default_rng(2)
    w = rng.uniform(-1, 1, (80, 80))
    w = np.triu(w, 1) + np.triu(w, 1).T
    rows = feature_table(network(w))
    assert len(rows) == 80
    assert [r.indicator_id for r in rows] == [f"n{i}" for i in range(80)]


def random_network(n, seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1, 1, (n, n))
    return network(np.triu(w, 1) + np.triu(w, 1).T)


@settings(max_examples=40)
@given(st.integers(2, 20), st.integers(0, 2 ** 31))
def test_features_in_unit_interval(n, seed):
    for r in feature_table(random_network(n, seed)):
        assert 0.0 <= r.x_d <= 1.0
        assert 0.0 <= r.x_h <= 1.0


@settings(max_examples=40)
@given(st.integers(2, 15), st.integers(0, 2 ** 31), st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_harmonic_non_increasing_in_threshold(n, seed, t1, t2):
    t1, t2 = sorted((t1, t2))
    net = random_network(n, seed)
    low = feature_table(net, t1)
    high = feature_table(net, t2)
    assert all(h.x_h <= l.x_h for l, h in zip(low, high))


@settings(max_examples=40)
@given(st.integers(3, 12), st.integers(0, 2 ** 31))
def test_direct_effect_edge_changes(n, seed):
    net = random_network(n, seed)
    w = np.array(net.weights)
    w[0, 1] = w[1, 0] = 0.0
    base = direct_effect(network(w), 0)
    w[0, 1] = w[1, 0] = 0.5
    assert direct_effect(network(w), 0) >= base
    w[0, 1] = w[1, 0] = -0.5
    assert direct_effect(network(w), 0) == base


def test_extractor_sklearn_contract(panel_text):
    panels = list(clean_panel(parse_long_csv(panel_text)).panels.values())
    ext = NetworkFeatureExtractor(strong_threshold=0.7)
    X = ext.fit_transform(panels)
    assert X.shape == (sum(p.retained_count for p in panels), 2)
    assert len(ext.records_) == X.shape[0]
    assert clone(ext).get_params() == {"strong_threshold": 0.7}
    assert list(ext.get_feature_names_out()) == ["x_d", "x_h"]
    assert ext.labels(panels).shape == (X.shape[0],)


def test_extractor_validates_threshold():
    with pytest.raises(DomainError):
        NetworkFeatureExtractor(strong_threshold=1.5).fit(None)


def test_features_csv_round_trip():
    rows = feature_table(random_network(6, 1))
    buf = io.StringIO()
    write_features(rows, buf)
    header = buf.getvalue().splitlines()[0]
    assert header == "country_code,indicator_id,sdg_goal,x_d,x_h,s_plus,s_minus,y_label,degenerate"
    buf.seek(0)
    back = read_features(buf)
    for a, b in zip(rows, back):
        assert a.indicator_id == b.indicator_id and a.y_label == b.y_label
        assert a.x_h == pytest.approx(b.x_h, abs=1e-11)
