"""L1-penalized linear regression with nested cross-validated shrinkage search.

The solver is cyclic coordinate descent with soft-thresholding on the
objective

    (1 / 2n) * ||y - b0 - X b||^2 + lam * ||b||_1

with an unpenalized intercept.  Features are standardized to zero mean and
unit (population) variance before fitting; the target stays on its raw
scale, so the intercept of a standardized fit equals mean(y).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin


@dataclass
class Standardization:
    means: np.ndarray
    sds: np.ndarray           # population standard deviations
    constant: np.ndarray      # mask of zero-variance columns (mapped to 0)


@dataclass
class FeatureMatrix:
    values: np.ndarray
    col_names: list[str]
    standardization: Standardization | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if self.values.shape[1] != len(self.col_names):
            raise ValueError("column count does not match column names")


class ColumnStandardizer(BaseEstimator, TransformerMixin):
    """Zero-mean unit-variance scaling with explicit constant-column handling.

    Constant columns are mapped to all zeros and flagged instead of dividing
    by zero; ``inverse_transform`` restores the original scale.
    """

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] < 2:
            raise ValueError("standardization needs at least 2 rows")
        self.means_ = X.mean(axis=0)
        self.sds_ = X.std(axis=0)  # population variance
        self.constant_ = self.sds_ == 0.0
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        safe = np.where(self.constant_, 1.0, self.sds_)
        out = (X - self.means_) / safe
        out[:, self.constant_] = 0.0
        return out

    def inverse_transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        safe = np.where(self.constant_, 1.0, self.sds_)
        return X * safe + self.means_

    def standardization(self) -> Standardization:
        return Standardization(self.means_.copy(), self.sds_.copy(), self.constant_.copy())


def standardize(fm: FeatureMatrix) -> FeatureMatrix:
    """Standardize a feature matrix, recording the transform for inversion."""
    scaler = ColumnStandardizer().fit(fm.values)
    return FeatureMatrix(scaler.transform(fm.values), list(fm.col_names),
                         scaler.standardization())


@dataclass
class LassoModel:
    coefficients: np.ndarray
    intercept: float
    lam: float
    n_iter: int
    converged: bool
    objective_trace: np.ndarray | None = None


def _soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def lasso_objective(X: np.ndarray, y: np.ndarray, coef: np.ndarray,
                    intercept: float, lam: float) -> float:
    resid = y - intercept - X @ coef
    n = len(y)
    return float(resid @ resid) / (2.0 * n) + lam * float(np.abs(coef).sum())


@dataclass
class _GramProblem:
    """Sufficient statistics for coordinate descent: X'X/n, X'y/n, column means."""

    gram: np.ndarray
    xty: np.ndarray
    col_means: np.ndarray
    y_mean: float
    diag: np.ndarray

    @classmethod
    def build(cls, X: np.ndarray, y: np.ndarray) -> "_GramProblem":
        n = len(y)
        gram = (X.T @ X) / n
        return cls(gram, (X.T @ y) / n, X.mean(axis=0), float(y.mean()),
                   np.diag(gram).copy())

    def lambda_max(self) -> float:
        return float(np.max(np.abs(self.xty - self.y_mean * self.col_means)))


def _cd_solve(
    prob: _GramProblem,
    lam: float,
    tol: float,
    max_sweeps: int,
    coef: np.ndarray,
    trace: list | None = None,
    objective=None,
) -> tuple[np.ndarray, int, bool]:
    """Cyclic coordinate sweeps on a Gram problem; ``coef`` updated in place.

    The gradient ``gram @ coef`` is maintained incrementally: a coordinate
    that does not move costs a few scalar operations only.
    """
    gram, xty, col_means, y_mean, diag = (
        prob.gram, prob.xty, prob.col_means, prob.y_mean, prob.diag,
    )
    p = len(xty)
    grad = gram @ coef
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        intercept = y_mean - float(col_means @ coef)
        max_delta = 0.0
        for j in range(p):
            old = coef[j]
            if diag[j] == 0.0:
                new = 0.0
            else:
                rho = xty[j] - intercept * col_means[j] - grad[j] + diag[j] * old
                new = _soft_threshold(rho, lam) / diag[j]
            step = new - old
            if step != 0.0:
                coef[j] = new
                grad += gram[j] * step
                delta = abs(step)
                if delta > max_delta:
                    max_delta = delta
        if trace is not None:
            trace.append(objective(coef, y_mean - float(col_means @ coef)))
        if max_delta < tol:
            converged = True
            break
    return coef, sweeps, converged


def lasso_fit(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = 1e-8,
    max_sweeps: int = 10000,
    warm_start: np.ndarray | None = None,
    track_objective: bool = False,
) -> LassoModel:
    """Cyclic coordinate descent with soft-thresholding.

    ``X`` is expected standardized (zero-mean columns); slight decentering is
    tolerated by re-solving the intercept every sweep.  Convergence is
    declared when no coefficient moves more than ``tol`` in a full sweep.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("non-finite data")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n, p = X.shape

    prob = _GramProblem.build(X, y)
    coef = np.zeros(p) if warm_start is None else np.asarray(warm_start, dtype=np.float64).copy()
    trace = [] if track_objective else None
    objective = (lambda c, b0: lasso_objective(X, y, c, b0, lam)) if track_objective else None

    coef, sweeps, converged = _cd_solve(prob, lam, tol, max_sweeps, coef, trace, objective)
    intercept = prob.y_mean - float(prob.col_means @ coef)
    return LassoModel(
        coefficients=coef,
        intercept=intercept,
        lam=lam,
        n_iter=sweeps,
        converged=converged,
        objective_trace=None if trace is None else np.asarray(trace),
    )


def lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty that zeroes every coefficient: max_j |x_j'(y - ybar)|/n.

    Computed with the solver's own arithmetic so that fitting at exactly
    this value yields the exact zero vector.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    return _GramProblem.build(X, y).lambda_max()


def kkt_violation(X: np.ndarray, y: np.ndarray, model: LassoModel) -> float:
    """Largest violation of the subgradient optimality conditions.

    At the optimum, g = X'(y - b0 - Xb)/n satisfies |g_j| <= lam where
    b_j = 0 and g_j = lam * sign(b_j) elsewhere.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    resid = y - model.intercept - X @ model.coefficients
    g = (X.T @ resid) / len(y)
    zero = model.coefficients == 0.0
    viol_zero = np.maximum(np.abs(g[zero]) - model.lam, 0.0)
    viol_active = np.abs(g[~zero] - model.lam * np.sign(model.coefficients[~zero]))
    worst = 0.0
    if viol_zero.size:
        worst = max(worst, float(viol_zero.max()))
    if viol_active.size:
        worst = max(worst, float(viol_active.max()))
    return worst


class LassoCoordinateDescent(BaseEstimator, RegressorMixin):
    """Estimator wrapper around :func:`lasso_fit` (expects standardized X)."""

    def __init__(self, lam: float = 1.0, tol: float = 1e-8, max_sweeps: int = 10000):
        self.lam = lam
        self.tol = tol
        self.max_sweeps = max_sweeps

    def fit(self, X, y):
        model = lasso_fit(X, y, self.lam, self.tol, self.max_sweeps)
        self.coef_ = model.coefficients
        self.intercept_ = model.intercept
        self.n_iter_ = model.n_iter
        self.converged_ = model.converged
        return self

    def predict(self, X):
        return self.intercept_ + np.asarray(X, dtype=np.float64) @ self.coef_


@dataclass
class Metrics:
    mae: float
    rmse: float
    r2: float | None


def metrics(y_true: np.ndarray, y_pred: np.ndarray) -> Metrics:
    """MAE, RMSE, and R^2 (None when y_true has zero variance)."""
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if y_true.shape != y_pred.shape:
        raise ValueError("length mismatch")
    if len(y_true) < 2:
        raise ValueError("need at least 2 observations")
    errs = y_pred - y_true
    mae = float(np.mean(np.abs(errs)))
    rmse = float(np.sqrt(np.mean(errs**2)))
    sst = float(np.sum((y_true - y_true.mean()) ** 2))
    if sst == 0.0:
        return Metrics(mae, rmse, None)
    sse = float(np.sum(errs**2))
    return Metrics(mae, rmse, 1.0 - sse / sst)


def average_coefficients(per_fold: Sequence[np.ndarray]) -> np.ndarray:
    """Elementwise mean of per-fold coefficient vectors."""
    arrays = [np.asarray(c, dtype=np.float64) for c in per_fold]
    width = {a.shape for a in arrays}
    if len(width) != 1 or arrays[0].ndim != 1:
        raise ValueError("coefficient vectors must share one length")
    return np.mean(arrays, axis=0)


def _inner_folds(n: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    if n < k:
        raise ValueError(f"need at least {k} rows for {k}-fold CV, got {n}")
    return np.array_split(rng.permutation(n), k)


def lambda_search(
    X_train: np.ndarray,
    y_train: np.ndarray,
    k_inner: int = 3,
    n_draws: int = 500,
    lam_range: tuple[float, float] = (0.0, 5.0),
    rng: np.random.Generator | int | None = 0,
    selection: str = "mse",
) -> float:
    """Random shrinkage search: uniform draws scored by k-fold CV error.

    Every draw is evaluated on the same folds; the pooled validation error
    (squared by default, absolute with ``selection="mae"``) decides, ties
    break to the smaller draw.  Fits walk the draws in decreasing order so
    warm starts carry over.
    """
    if selection not in ("mse", "mae"):
        raise ValueError(f"unknown selection metric {selection!r}")
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64).ravel()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    lo, hi = lam_range
    draws = rng.uniform(lo, hi, n_draws)
    folds = _inner_folds(len(y_train), k_inner, rng)

    order = np.argsort(-draws)  # descending: heaviest shrinkage first
    total_err = np.zeros(n_draws)
    for v, val_idx in enumerate(folds):
        fit_idx = np.concatenate([f for i, f in enumerate(folds) if i != v])
        scaler = ColumnStandardizer().fit(X_train[fit_idx])
        Xs_fit = scaler.transform(X_train[fit_idx])
        Xs_val = scaler.transform(X_train[val_idx])
        y_fit = y_train[fit_idx]
        y_val = y_train[val_idx]
        prob = _GramProblem.build(Xs_fit, y_fit)
        fold_lmax = prob.lambda_max()
        coef = np.zeros(Xs_fit.shape[1])
        for i in order:
            lam = float(draws[i])
            if lam >= fold_lmax:
                coef[:] = 0.0  # null model, no sweeps needed
            else:
                _cd_solve(prob, lam, 1e-8, 10000, coef)
            intercept = prob.y_mean - float(prob.col_means @ coef)
            resid = y_val - (intercept + Xs_val @ coef)
            total_err[i] += float(np.abs(resid).sum() if selection == "mae"
                                  else (resid @ resid))
    scores = total_err / len(y_train)
    best = int(np.lexsort((draws, scores))[0])
    return float(draws[best])


@dataclass
class NestedCvReport:
    outer_fold_assignments: list[list[int]]
    per_fold_lambda: list[float]
    per_fold_coefficients: list[list[float]]
    per_fold_intercepts: list[float]
    per_fold_standardization: list[dict]
    out_of_fold_predictions: list[float]
    mae: float
    rmse: float
    r2: float | None
    avg_coefficients: list[float]
    avg_intercept: float
    feature_names: list[str]
    seed: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "feature_names": self.feature_names,
            "outer_fold_assignments": self.outer_fold_assignments,
            "per_fold_lambda": self.per_fold_lambda,
            "per_fold_coefficients": self.per_fold_coefficients,
            "per_fold_intercepts": self.per_fold_intercepts,
            "per_fold_standardization": self.per_fold_standardization,
            "out_of_fold_predictions": self.out_of_fold_predictions,
            "metrics": {"mae": self.mae, "rmse": self.rmse, "r2": self.r2},
            "avg_coefficients": self.avg_coefficients,
            "avg_intercept": self.avg_intercept,
        }


def nested_cv(
    X: np.ndarray,
    y: np.ndarray,
    feature_names: Sequence[str] | None = None,
    k_outer: int = 5,
    k_inner: int = 3,
    n_draws: int = 500,
    lam_range: tuple[float, float] = (0.0, 5.0),
    seed: int = 0,
    selection: str = "mse",
) -> NestedCvReport:
    """Nested cross-validation: outer folds estimate error, inner folds pick lam.

    Rows are shuffled by the seed and split into near-equal outer folds.
    Standardization and the shrinkage search for a fold use only that fold's
    training rows; each row is predicted exactly once out-of-fold.  All
    randomness flows from the seed through named sub-streams, so reports are
    bit-reproducible.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n, p = X.shape
    if n < k_outer:
        raise ValueError(f"need at least {k_outer} rows, got {n}")
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(p)]

    shuffle_rng = np.random.default_rng([seed, 0])
    folds = np.array_split(shuffle_rng.permutation(n), k_outer)

    predictions = np.empty(n)
    per_fold_lambda: list[float] = []
    per_fold_coefficients: list[list[float]] = []
    per_fold_intercepts: list[float] = []
    per_fold_standardization: list[dict] = []

    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        lam = lambda_search(
            X[train_idx], y[train_idx],
            k_inner=k_inner, n_draws=n_draws, lam_range=lam_range,
            rng=np.random.default_rng([seed, 1, i]), selection=selection,
        )
        scaler = ColumnStandardizer().fit(X[train_idx])
        model = lasso_fit(scaler.transform(X[train_idx]), y[train_idx], lam)
        predictions[test_idx] = model.intercept + scaler.transform(X[test_idx]) @ model.coefficients

        per_fold_lambda.append(lam)
        per_fold_coefficients.append([float(c) for c in model.coefficients])
        per_fold_intercepts.append(float(model.intercept))
        per_fold_standardization.append({
            "means": [float(v) for v in scaler.means_],
            "sds": [float(v) for v in scaler.sds_],
        })

    scores = metrics(y, predictions)
    avg_coef = average_coefficients([np.asarray(c) for c in per_fold_coefficients])
    return NestedCvReport(
        outer_fold_assignments=[[int(r) for r in f] for f in folds],
        per_fold_lambda=per_fold_lambda,
        per_fold_coefficients=per_fold_coefficients,
        per_fold_intercepts=per_fold_intercepts,
        per_fold_standardization=per_fold_standardization,
        out_of_fold_predictions=[float(v) for v in predictions],
        mae=scores.mae,
        rmse=scores.rmse,
        r2=scores.r2,
        avg_coefficients=[float(c) for c in avg_coef],
        avg_intercept=float(np.mean(per_fold_intercepts)),
        feature_names=list(feature_names),
        seed=seed,
        config={
            "k_outer": k_outer,
            "k_inner": k_inner,
            "n_draws": n_draws,
            "lam_range": list(lam_range),
            "selection": selection,
        },
    )
