"""Per-indicator predictors: direct effect and strong-graph harmonic centrality."""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import astuple, dataclass
from typing import IO, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DomainError
from .ingest import CountryPanel
from .network import (
    DEFAULT_STRONG_THRESHOLD,
    IndicatorNetwork,
    StrongGraph,
    _check_index,
    build_network,
    strengths,
    strong_subgraph,
)

FEATURE_COLUMNS = (
    "country_code", "indicator_id", "sdg_goal", "x_d", "x_h",
    "s_plus", "s_minus", "y_label", "degenerate",
)


@dataclass(frozen=True)
class NodeFeatures:
    country_code: str
    indicator_id: str
    sdg_goal: int
    x_d: float
    x_h: float
    s_plus: float
    s_minus: float
    y_label: int
    degenerate: bool


def direct_effect(network: IndicatorNetwork, node: int) -> float:
    """Share of the node's n-1 edges with strictly positive weight."""
    incident = network.incident(node)
    return int(np.count_nonzero(incident > 0)) / (network.n - 1)


def bfs_distances(neighbors: Sequence[Sequence[int]], source: int) -> list[float]:
    dist = [math.inf] * len(neighbors)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in neighbors[u]:
            if dist[v] == math.inf:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _harmonic_from_distances(dist: Sequence[float], node: int) -> float:
    n = len(dist)
    total = math.fsum(1.0 / d for j, d in enumerate(dist) if j != node and d != math.inf)
    return total / (n - 1)


def harmonic_centrality(graph: StrongGraph, node: int) -> float:
    """Mean of 1/d(node, j) over the other n-1 nodes; unreachable nodes add 0."""
    _check_index(graph, node)
    if graph.n < 2:
        raise DomainError("harmonic centrality needs at least two nodes")
    return _harmonic_from_distances(bfs_distances(graph.neighbors(), node), node)


def harmonic_centralities(graph: StrongGraph) -> list[float]:
    nbrs = graph.neighbors()
    return [_harmonic_from_distances(bfs_distances(nbrs, i), i) for i in range(graph.n)]


def feature_table(
    network: IndicatorNetwork, threshold: float = DEFAULT_STRONG_THRESHOLD
) -> list[NodeFeatures]:
    strong = strong_subgraph(network, threshold)
    x_h = harmonic_centralities(strong)
    rows = []
    for i, nd in enumerate(network.nodes):
        st = strengths(network, i)
        rows.append(NodeFeatures(
            network.country_code, nd.indicator_id, nd.sdg_goal,
            direct_effect(network, i), x_h[i],
            st.s_plus, st.s_minus, st.y_label, st.degenerate,
        ))
    return rows


def design_matrix(rows: Iterable[NodeFeatures]) -> tuple[np.ndarray, np.ndarray]:
    """Stack rows into ``X`` (columns x_d, x_h) and label vector ``y``."""
    rows = list(rows)
    X = np.array([[r.x_d, r.x_h] for r in rows], dtype=float).reshape(-1, 2)
    y = np.array([r.y_label for r in rows], dtype=int)
    return X, y


class NetworkFeatureExtractor(TransformerMixin, BaseEstimator):
    """Turn country panels (or prebuilt networks) into the two-column predictor matrix.

    Stateless: ``fit`` only validates parameters. After ``transform`` the
    full per-node records of the last call are kept in ``records_``, and
    labels can be had through :meth:`labels`.

    Parameters
    ----------
    strong_threshold : float, default=0.8
        Minimum correlation for an edge to enter the strong subgraph used
        for harmonic centrality.
    """

    def __init__(self, strong_threshold=DEFAULT_STRONG_THRESHOLD):
        self.strong_threshold = strong_threshold

    def fit(self, X, y=None):
        if not 0.0 < self.strong_threshold <= 1.0:
            raise DomainError(f"strong_threshold {self.strong_threshold} outside (0, 1]")
        self.n_features_out_ = 2
        return self

    def _records(self, X) -> list[NodeFeatures]:
        if isinstance(X, (CountryPanel, IndicatorNetwork)):
            X = [X]
        rows = []
        for item in X:
            net = build_network(item) if isinstance(item, CountryPanel) else item
            rows.extend(feature_table(net, self.strong_threshold))
        return rows

    def transform(self, X):
        self.records_ = self._records(X)
        return design_matrix(self.records_)[0]

    def labels(self, X) -> np.ndarray:
        return design_matrix(self._records(X))[1]

    def get_feature_names_out(self, input_features=None):
        return np.array(["x_d", "x_h"], dtype=object)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_features(rows: Iterable[NodeFeatures], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FEATURE_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in astuple(r)])


def read_features(fh: IO[str]) -> list[NodeFeatures]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != FEATURE_COLUMNS:
        raise DomainError(f"expected feature columns {','.join(FEATURE_COLUMNS)}")
    out = []
    for r in reader:
        out.append(NodeFeatures(
            r["country_code"], r["indicator_id"], int(r["sdg_goal"]),
            float(r["x_d"]), float(r["x_h"]), float(r["s_plus"]), float(r["s_minus"]),
            int(r["y_label"]), r["degenerate"] == "1",
        ))
    return out
