"""Signed Spearman correlation networks over indicator panels."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

from .exceptions import DomainError, ParseError
from .ingest import CountryPanel

DEFAULT_STRONG_THRESHOLD = 0.8


def _centered_ranks(x: np.ndarray) -> tuple[np.ndarray, float]:
    r = rankdata(x, method="average")
    r = r - r.mean()
    return r, float(np.dot(r, r))


def _rank_corr(a: np.ndarray, ssa: float, b: np.ndarray, ssb: float) -> float:
    # sqrt of the product (not product of sqrts) keeps rho exactly +-1 for equal ranks
    rho = float(np.dot(a, b)) / math.sqrt(ssa * ssb)
    return min(1.0, max(-1.0, rho))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho as the Pearson correlation of average ranks.

    Ties get the mean of the ranks they span, so the result stays exact
    for tie-bearing series where the ``1 - 6*sum(d^2)/...`` shortcut is
    biased.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise DomainError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DomainError("need at least two observations")
    a, na = _centered_ranks(x)
    b, nb = _centered_ranks(y)
    if na == 0.0 or nb == 0.0:
        raise DomainError("spearman undefined for a constant sequence")
    return _rank_corr(a, na, b, nb)


class Node(NamedTuple):
    indicator_id: str
    sdg_goal: int


@dataclass(frozen=True, eq=False)
class IndicatorNetwork:
    """Complete weighted graph; ``weights[i, j]`` is rho between nodes i and j.

    The diagonal carries no meaning and is stored as 1.0.
    """

    country_code: str
    nodes: tuple[Node, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        n = len(self.nodes)
        if w.shape != (n, n):
            raise DomainError(f"weight matrix shape {w.shape} does not match {n} nodes")
        if n < 2:
            raise DomainError("a network needs at least two nodes")
        if not np.all(np.isfinite(w)):
            raise DomainError("non-finite weight")
        off = ~np.eye(n, dtype=bool)
        if not np.array_equal(w[off], w.T[off]):
            raise DomainError("weight matrix is not symmetric")
        if np.any(np.abs(w[off]) > 1.0):
            raise DomainError("weights must lie in [-1, 1]")
        np.fill_diagonal(w, 1.0)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "nodes", tuple(Node(*nd) for nd in self.nodes))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def incident(self, node: int) -> np.ndarray:
        """Weights of the star around ``node`` (the other n-1 edges)."""
        _check_index(self, node)
        return np.delete(self.weights[node], node)

    def index_of(self, indicator_id: str) -> int:
        for i, nd in enumerate(self.nodes):
            if nd.indicator_id == indicator_id:
                return i
        raise KeyError(indicator_id)


def _check_index(network, node) -> None:
    if not isinstance(node, (int, np.integer)) or not 0 <= node < network.n:
        raise DomainError(f"node index {node!r} out of range for {network.n} nodes")


def build_network(panel: CountryPanel) -> IndicatorNetwork:
    """Correlate every pair of retained series of one country."""
    if panel.retained_count < 2:
        raise DomainError(f"{panel.country_code}: need at least two indicators")
    ranked = []
    for s in panel.series:
        r, norm = _centered_ranks(np.asarray(s.values, dtype=float))
        if norm == 0.0:
            raise DomainError(f"{panel.country_code}/{s.indicator_id}: constant series")
        ranked.append((r, norm))
    n = len(ranked)
    w = np.eye(n)
    # per-pair dot products: each entry is independent of node order
    for i in range(n):
        a, na = ranked[i]
        for j in range(i + 1, n):
            b, nb = ranked[j]
            w[i, j] = w[j, i] = _rank_corr(a, na, b, nb)
    nodes = tuple(Node(s.indicator_id, s.sdg_goal) for s in panel.series)
    return IndicatorNetwork(panel.country_code, nodes, w)


class StrengthRecord(NamedTuple):
    indicator_id: str
    s_plus: float
    s_minus: float
    y_label: int
    degenerate: bool


def label(s_plus: float, s_minus: float) -> int:
    """1 (synergy-dominated) iff ``s_plus >= s_minus``."""
    return int(s_plus >= s_minus)


def star_strengths(incident: Sequence[float]) -> tuple[float, float, bool]:
    """Positive/negative share of absolute incident weight.

    Zero weights fall in neither part. A star with no nonzero weight is
    degenerate and gets (0.5, 0.5).
    """
    pos = math.fsum(w for w in incident if w > 0)
    neg = math.fsum(-w for w in incident if w < 0)
    total = pos + neg
    if total == 0.0:
        return 0.5, 0.5, True
    return pos / total, neg / total, False


def strengths(network: IndicatorNetwork, node: int) -> StrengthRecord:
    s_plus, s_minus, degenerate = star_strengths(network.incident(node).tolist())
    return StrengthRecord(
        network.nodes[node].indicator_id, s_plus, s_minus, label(s_plus, s_minus), degenerate
    )


@dataclass(frozen=True, eq=False)
class StrongGraph:
    nodes: tuple[Node, ...]
    adjacency: np.ndarray  # boolean, symmetric, False diagonal
    threshold: float

    @property
    def n(self) -> int:
        return len(self.nodes)

    def edges(self) -> set[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return set(zip(i.tolist(), j.tolist()))

    def neighbors(self) -> list[list[int]]:
        return [np.flatnonzero(row).tolist() for row in self.adjacency]


def strong_subgraph(network: IndicatorNetwork, threshold: float = DEFAULT_STRONG_THRESHOLD) -> StrongGraph:
    """Unweighted graph on all nodes keeping edges with ``rho >= threshold``."""
    if not 0.0 < threshold <= 1.0:
        raise DomainError(f"threshold {threshold} outside (0, 1]")
    adj = network.weights >= threshold
    np.fill_diagonal(adj, False)
    adj.setflags(write=False)
    return StrongGraph(network.nodes, adj, float(threshold))


def write_nodes(network: IndicatorNetwork, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "indicator_id", "sdg_goal"])
    for i, nd in enumerate(network.nodes):
        w.writerow([i, nd.indicator_id, nd.sdg_goal])


def write_network(network: IndicatorNetwork, nodes_fh: IO[str], matrix_fh: IO[str]) -> None:
    """Node list (``index,indicator_id,sdg_goal``) plus an n x n matrix, 6 decimals."""
    write_nodes(network, nodes_fh)
    write_matrix(network.weights, matrix_fh)


def write_matrix(weights: np.ndarray, fh: IO[str]) -> None:
    for row in weights:
        # +0.0 folds "-0.000000" into "0.000000"
        fh.write(",".join(f"{round(v, 6) + 0.0:.6f}" for v in row) + "\n")


def read_matrix(fh: IO[str]) -> np.ndarray:
    rows = [line.strip() for line in fh if line.strip()]
    try:
        m = np.array([[float(c) for c in r.split(",")] for r in rows])
    except ValueError as exc:
        raise ParseError(f"bad matrix cell: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParseError(f"matrix is not square: {m.shape}")
    return m


def read_network(nodes_fh: IO[str], matrix_fh: IO[str], country_code: str = "") -> IndicatorNetwork:
    reader = csv.DictReader(nodes_fh)
    nodes = [Node(r["indicator_id"], int(r["sdg_goal"])) for r in reader]
    return IndicatorNetwork(country_code, tuple(nodes), read_matrix(matrix_fh))
