"""Logistic classifier of synergy- vs trade-off-dominated indicators.

Fitting is plain Newton/IRLS on the Bernoulli log-likelihood; inference
uses the inverse observed information at the optimum (Wald).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import IO, Hashable, Mapping, Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import norm
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import (
    CollinearityError,
    DegenerateDataError,
    DomainError,
    SeparationError,
    ValidationError,
)
from .ingest import PerformanceCategory

logger = logging.getLogger(__name__)

Z_975 = 1.959964
LL_TOL = 1e-10
MAX_ITER = 100
SEPARATION_BOUND = 1e3

# Published pooled fit: intercept, direct effect, harmonic centrality.
PAPER_BETA = (-19.2031, 39.0684, 2.1742)
PAPER_SE = (0.71, 1.47, 0.93)
PAPER_VIF = (1.55, 1.55)


def _design(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def log_likelihood(beta, X, y) -> float:
    """Bernoulli log-likelihood; ``X`` already carries the intercept column."""
    z = X @ np.asarray(beta, dtype=float)
    return float(np.sum(y * z - np.logaddexp(0.0, z)))


def score(beta, X, y) -> np.ndarray:
    """Gradient of :func:`log_likelihood`."""
    return X.T @ (y - expit(X @ np.asarray(beta, dtype=float)))


def information(beta, X) -> np.ndarray:
    p = expit(X @ np.asarray(beta, dtype=float))
    return (X * (p * (1.0 - p))[:, None]).T @ X


@dataclass
class FittedModel:
    beta: list[float]
    covariance: list[list[float]]
    standard_errors: list[float]
    ci95: list[tuple[float, float]]
    p_values: list[float]
    vif: list[float]
    log_likelihood: float | None
    iterations: int
    converged: bool
    unstable: list[bool] = field(default_factory=list)
    source: str = "fit"
    seed: int | None = None
    train_fraction: float | None = None

    def to_json(self, fh: IO[str]) -> None:
        d = asdict(self)
        d["ci95"] = [list(c) for c in self.ci95]
        json.dump(d, fh, indent=2, sort_keys=True)
        fh.write("\n")

    @classmethod
    def from_json(cls, fh: IO[str]) -> "FittedModel":
        d = json.load(fh)
        d["ci95"] = [tuple(c) for c in d["ci95"]]
        return cls(**d)


@dataclass
class WaldResult:
    standard_errors: np.ndarray
    ci95: np.ndarray  # shape (k, 2)
    p_values: np.ndarray
    unstable: np.ndarray


def wald_inference(beta, covariance) -> WaldResult:
    """Standard errors, 95% intervals and two-sided normal p-values.

    A zero standard error with a nonzero coefficient gives p = 0 and sets
    the ``unstable`` flag for that entry.
    """
    beta = np.asarray(beta, dtype=float)
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    diag = np.diag(cov)
    if np.any(diag < 0) or not np.allclose(cov, cov.T):
        raise DomainError("covariance must be symmetric with a non-negative diagonal")
    se = np.sqrt(diag)
    ci = np.column_stack([beta - Z_975 * se, beta + Z_975 * se])
    p = np.ones_like(beta)
    unstable = np.zeros(beta.shape, dtype=bool)
    for i, (b, s) in enumerate(zip(beta, se)):
        if b == 0.0:
            p[i] = 1.0
        elif s == 0.0:
            p[i] = 0.0
            unstable[i] = True
        else:
            p[i] = 2.0 * norm.sf(abs(b) / s)
    return WaldResult(se, ci, p, unstable)


def vif(*columns: Sequence[float]) -> np.ndarray:
    """Variance inflation factor of each predictor column.

    ``1 / (1 - R^2_j)`` with ``R^2_j`` from regressing column j on the
    others plus an intercept. For exactly two columns this is
    ``1 / (1 - r^2)`` and both entries are identical.
    """
    X = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    n, k = X.shape
    if k < 2:
        raise DomainError("VIF needs at least two predictors")
    if n < 3:
        raise DomainError("VIF needs at least three observations")
    Xc = X - X.mean(axis=0)
    ss = np.einsum("ij,ij->j", Xc, Xc)
    if np.any(ss == 0.0):
        raise DomainError("constant predictor column")
    if k == 2:
        r = float(Xc[:, 0] @ Xc[:, 1]) / math.sqrt(ss[0] * ss[1])
        r2 = np.full(2, min(r * r, 1.0))
    else:
        r2 = np.empty(k)
        for j in range(k):
            others = np.delete(Xc, j, axis=1)
            coef, *_ = np.linalg.lstsq(others, Xc[:, j], rcond=None)
            resid = Xc[:, j] - others @ coef
            r2[j] = 1.0 - float(resid @ resid) / ss[j]
    if np.any(r2 >= 1.0 - 1e-12):
        raise CollinearityError("perfectly collinear predictors (R^2 = 1)")
    return 1.0 / (1.0 - r2)


def fit_logistic(features, labels, *, tol: float = LL_TOL, max_iter: int = MAX_ITER) -> FittedModel:
    """Maximum-likelihood logistic regression by Newton/IRLS.

    ``features`` is an (n, k) array; k = 0 fits an intercept-only model.
    The iteration stops once the log-likelihood changes by less than
    ``tol``.

    Raises
    ------
    DegenerateDataError
        Fewer than three observations or a single label class.
    SeparationError
        A coefficient exceeds 1e3 in magnitude, the classes are completely
        separated by the linear predictor, or ``max_iter`` is reached.
    """
    y = np.asarray(labels, dtype=float).ravel()
    F = np.asarray(features, dtype=float).reshape(len(y), -1)
    X = _design(F)
    n, p = X.shape
    if n < 3:
        raise DegenerateDataError("need at least three observations")
    if not np.all((y == 0) | (y == 1)):
        raise DomainError("labels must be 0/1")
    if y.min() == y.max():
        raise DegenerateDataError("labels contain a single class")

    beta = np.zeros(p)
    ll = log_likelihood(beta, X, y)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        info = information(beta, X)
        grad = score(beta, X, y)
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(info, grad, rcond=None)[0]
        # halve the step while it lowers the likelihood
        for _ in range(30):
            cand = beta + step
            ll_new = log_likelihood(cand, X, y)
            if ll_new >= ll - 1e-12:
                break
            step /= 2.0
        beta = cand
        if not np.all(np.isfinite(beta)) or np.max(np.abs(beta)) > SEPARATION_BOUND:
            raise SeparationError(
                f"coefficient magnitude exceeded {SEPARATION_BOUND:g} (separation)", beta, it
            )
        change = abs(ll_new - ll)
        ll = ll_new
        if change < tol:
            converged = True
            break
    if not converged:
        raise SeparationError(f"no convergence within {max_iter} iterations", beta, it)

    z = X @ beta
    if z[y == 1].min() > z[y == 0].max():
        raise SeparationError("classes are completely separated", beta, it)

    info = information(beta, X)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise SeparationError("singular information matrix", beta, it) from None
    cov = (cov + cov.T) / 2.0
    wald = wald_inference(beta, cov)
    vifs = vif(*F.T).tolist() if F.shape[1] >= 2 else []
    return FittedModel(
        beta=beta.tolist(),
        covariance=cov.tolist(),
        standard_errors=wald.standard_errors.tolist(),
        ci95=[tuple(c) for c in wald.ci95.tolist()],
        p_values=wald.p_values.tolist(),
        vif=vifs,
        log_likelihood=ll,
        iterations=it,
        converged=converged,
        unstable=wald.unstable.tolist(),
    )


def paper_model() -> FittedModel:
    """The published pooled model as a fixture (covariance diagonal only)."""
    cov = np.diag(np.square(PAPER_SE))
    wald = wald_inference(PAPER_BETA, cov)
    return FittedModel(
        beta=list(PAPER_BETA),
        covariance=cov.tolist(),
        standard_errors=list(PAPER_SE),
        ci95=[tuple(c) for c in wald.ci95.tolist()],
        p_values=wald.p_values.tolist(),
        vif=list(PAPER_VIF),
        log_likelihood=None,
        iterations=0,
        converged=True,
        unstable=wald.unstable.tolist(),
        source="paper",
    )


def predict_probability(beta, x_d, x_h):
    """P(synergy-dominated) for scalar or array predictors."""
    b0, b1, b2 = beta
    z = b0 + b1 * np.asarray(x_d, dtype=float) + b2 * np.asarray(x_h, dtype=float)
    p = expit(z)
    return float(p) if np.ndim(p) == 0 else p


def classify(p, threshold: float = 0.5):
    out = (np.asarray(p) >= threshold).astype(int)
    return int(out) if out.ndim == 0 else out


@dataclass
class EvalReport:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn,
                "accuracy": self.accuracy}

    def to_json(self, fh: IO[str]) -> None:
        json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def confusion(y_true, y_pred) -> EvalReport:
    """Tally with synergy-dominated (1) as the positive class."""
    t = np.asarray(y_true, dtype=int)
    p = np.asarray(y_pred, dtype=int)
    if t.size == 0:
        raise DomainError("empty evaluation set")
    return EvalReport(
        tp=int(np.sum((t == 1) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
        fp=int(np.sum((t == 0) & (p == 1))),
        tn=int(np.sum((t == 0) & (p == 0))),
    )


def evaluate(model, X, y, threshold: float = 0.5) -> EvalReport:
    beta = model.beta if isinstance(model, FittedModel) else model
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    pred = classify(predict_probability(beta, X[:, 0], X[:, 1]), threshold)
    return confusion(y, np.atleast_1d(pred))


@dataclass
class SplitPlan:
    seed: int
    train_fraction: float
    assignment: dict[Hashable, str]  # key -> "train" | "test"
    strata: dict[str, PerformanceCategory]
    warnings: list[str] = field(default_factory=list)

    def indices(self, keys: Sequence[Hashable], side: str) -> list[int]:
        return [i for i, k in enumerate(keys) if self.assignment[k] == side]


def stratified_split(
    points: Sequence[tuple[Hashable, str]],
    strata: Mapping[str, PerformanceCategory],
    train_fraction: float = 0.8,
    seed: int = 42,
) -> SplitPlan:
    """Split ``(key, country)`` points 80/20 within each performance category.

    Each category sends ``round(train_fraction * size)`` uniformly chosen
    points (half rounds up) to train. Category order is fixed and the
    point order within a category follows ``points``, so the plan depends
    only on the inputs and ``seed``.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction {train_fraction} outside (0, 1)")
    groups: dict[PerformanceCategory, list[Hashable]] = {c: [] for c in PerformanceCategory}
    for key, country in points:
        if country not in strata:
            raise DomainError(f"country {country!r} has no performance category")
        groups[strata[country]].append(key)

    rng = np.random.default_rng(seed)
    assignment = {}
    warnings = []
    for cat, keys in groups.items():
        if not keys:
            warnings.append(f"category {cat.value} is empty; skipped")
            logger.warning(warnings[-1])
            continue
        n_train = int(math.floor(train_fraction * len(keys) + 0.5))
        order = rng.permutation(len(keys))
        train = set(order[:n_train].tolist())
        for i, k in enumerate(keys):
            assignment[k] = "train" if i in train else "test"
    used = {c for _, c in points}
    return SplitPlan(seed, train_fraction, assignment,
                     {c: s for c, s in strata.items() if c in used}, warnings)


class SynergyClassifier(ClassifierMixin, BaseEstimator):
    """Unpenalized logistic regression on (x_d, x_h) with a probability cut.

    Parameters
    ----------
    threshold : float, default=0.5
        Predicted probability at or above which an indicator is labeled
        synergy-dominated.
    tol, max_iter :
        Newton/IRLS stopping rule.
    """

    def __init__(self, threshold=0.5, tol=LL_TOL, max_iter=MAX_ITER):
        self.threshold = threshold
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.array([0, 1])
        self.result_ = fit_logistic(X, y, tol=self.tol, max_iter=self.max_iter)
        self._set_coef(self.result_.beta)
        return self

    def _set_coef(self, beta):
        beta = np.asarray(beta, dtype=float)
        self.intercept_ = np.array([beta[0]])
        self.coef_ = beta[1:].reshape(1, -1)
        self.n_features_in_ = self.coef_.shape[1]

    @classmethod
    def from_model(cls, model: FittedModel, **params) -> "SynergyClassifier":
        est = cls(**params)
        est.classes_ = np.array([0, 1])
        est.result_ = model
        est._set_coef(model.beta)
        return est

    @classmethod
    def from_paper(cls, **params) -> "SynergyClassifier":
        return cls.from_model(paper_model(), **params)

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return self.intercept_[0] + X @ self.coef_[0]

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return classify(self.predict_proba(X)[:, 1], self.threshold)
