"""Gain-score OLS estimation on sibling-pair data.

The estimator regresses the within-pair outcome difference on both siblings'
exposures (plus optional covariates) and reports the spillover coefficient,
the sum of the two exposure coefficients, with a t-based confidence interval
in the style of post-estimation linear-combination commands.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import (
    DataError,
    DimensionMismatchError,
    InsufficientDataError,
    RankDeficiencyError,
    SchemaError,
)

log = logging.getLogger(__name__)

RANK_TOL = 1e-10


@dataclass
class PairDataset:
    """One row per sibling pair: ids, exposures, outcomes, optional covariates."""

    family_id: tuple[str, ...]
    t1: np.ndarray
    t2: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    covariates: np.ndarray | None = None
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self):
        self.family_id = tuple(str(f) for f in self.family_id)
        n = len(self.family_id)
        for name in ("t1", "t2", "y1", "y2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise SchemaError(f"column {name} has {arr.shape} values for {n} pairs")
            setattr(self, name, arr)
        if self.covariates is None:
            self.covariates = np.empty((n, 0))
        self.covariates = np.asarray(self.covariates, dtype=float)
        if self.covariates.ndim != 2 or self.covariates.shape[0] != n:
            raise SchemaError("covariates must be a (n_pairs, k) array")
        k = self.covariates.shape[1]
        if not self.covariate_names:
            self.covariate_names = tuple(f"cov_{i + 1}" for i in range(k))
        self.covariate_names = tuple(self.covariate_names)
        if len(self.covariate_names) != k:
            raise SchemaError(f"{k} covariate columns but {len(self.covariate_names)} names")
        if len(set(self.family_id)) != n:
            dupes = sorted({f for f in self.family_id if self.family_id.count(f) > 1})
            raise SchemaError(f"duplicate family_id values: {dupes[:5]}")
        for name in ("t1", "t2", "y1", "y2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise SchemaError(f"non-finite values in column {name}")
        if not np.all(np.isfinite(self.covariates)):
            raise SchemaError("non-finite values in covariates")

    @property
    def n(self) -> int:
        return len(self.family_id)


def gain_scores(dataset: PairDataset) -> np.ndarray:
    """Within-pair outcome difference y2 - y1."""
    return dataset.y2 - dataset.y1


@dataclass
class RegressionFit:
    """OLS coefficients with their covariance and residual summary."""

    term_names: tuple[str, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    residual_variance: float
    n: int
    df: int
    robust: bool = False

    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


@dataclass(frozen=True)
class Contrast:
    """A weighted coefficient sum with its t-interval."""

    estimate: float
    se: float
    ci_low: float
    ci_high: float
    confidence: float
    df: int


def fit_gain_score(
    dataset: PairDataset,
    adjust_covariates: bool = False,
    robust: bool = False,
) -> RegressionFit:
    """OLS of the gain score on an intercept and both exposures.

    With adjust_covariates=True the dataset's covariate columns enter the
    design as additional controls.  The closed-form pieces come from a QR
    factorization; a near-zero R diagonal raises RankDeficiencyError.
    """
    d = gain_scores(dataset)
    columns = [np.ones(dataset.n), dataset.t1, dataset.t2]
    names = ["intercept", "t1", "t2"]
    if adjust_covariates:
        for j, cname in enumerate(dataset.covariate_names):
            columns.append(dataset.covariates[:, j])
            names.append(cname)
    x = np.column_stack(columns)
    n, p = x.shape
    if n < p:
        raise InsufficientDataError(f"{n} pairs cannot support {p} parameters")

    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.min() < RANK_TOL * max(diag.max(), 1.0):
        small = [names[i] for i in np.flatnonzero(diag < RANK_TOL * max(diag.max(), 1.0))]
        raise RankDeficiencyError(f"design matrix is rank deficient (columns {small})")

    beta = np.linalg.solve(r, q.T @ d)
    resid = d - x @ beta
    df = n - p
    rss = float(resid @ resid)
    sigma2 = rss / df if df > 0 else 0.0
    r_inv = np.linalg.solve(r, np.eye(p))
    bread = r_inv @ r_inv.T  # (X'X)^{-1}
    if robust:
        meat = (x * (resid**2)[:, None]).T @ x
        cov = bread @ meat @ bread
        if df > 0:
            cov *= n / df  # small-sample degrees-of-freedom correction
    else:
        cov = sigma2 * bread
    return RegressionFit(
        term_names=tuple(names),
        coefficients=beta,
        covariance=cov,
        residual_variance=sigma2,
        n=n,
        df=df,
        robust=robust,
    )


def linear_contrast(fit: RegressionFit, weights: Sequence[float], confidence: float = 0.95) -> Contrast:
    """Weighted coefficient sum with a t-distribution confidence interval."""
    w = np.asarray(weights, dtype=float)
    p = len(fit.coefficients)
    if w.shape != (p,):
        raise DimensionMismatchError(f"{w.shape[0] if w.ndim == 1 else w.shape} weights for {p} coefficients")
    if not 0.0 < confidence < 1.0:
        raise DataError(f"confidence level {confidence} outside (0, 1)")
    if fit.df <= 0:
        raise InsufficientDataError("no residual degrees of freedom for an interval")
    estimate = float(w @ fit.coefficients)
    variance = float(w @ fit.covariance @ w)
    se = math.sqrt(max(variance, 0.0))
    t_crit = float(stats.t.ppf(0.5 + confidence / 2.0, fit.df))
    return Contrast(
        estimate=estimate,
        se=se,
        ci_low=estimate - t_crit * se,
        ci_high=estimate + t_crit * se,
        confidence=confidence,
        df=fit.df,
    )


@dataclass(frozen=True)
class SpilloverReport:
    """Spillover coefficient b1 + b2 with both component coefficients."""

    sc: float
    se: float
    ci_low: float
    ci_high: float
    b1: float
    b1_se: float
    b1_ci_low: float
    b1_ci_high: float
    b2: float
    b2_se: float
    b2_ci_low: float
    b2_ci_high: float
    confidence: float
    n: int
    df: int
    adjusted: bool
    fit: RegressionFit = field(repr=False)


def spillover_estimate(
    dataset: PairDataset,
    adjust_covariates: bool = False,
    confidence: float = 0.95,
    robust: bool = False,
) -> SpilloverReport:
    """Fit the gain-score regression and sum the two exposure coefficients."""
    fit = fit_gain_score(dataset, adjust_covariates=adjust_covariates, robust=robust)
    p = len(fit.coefficients)
    w_sc = np.zeros(p)
    w_sc[1] = w_sc[2] = 1.0
    sc = linear_contrast(fit, w_sc, confidence)
    singles = []
    for j in (1, 2):
        w = np.zeros(p)
        w[j] = 1.0
        singles.append(linear_contrast(fit, w, confidence))
    b1, b2 = singles
    return SpilloverReport(
        sc=sc.estimate, se=sc.se, ci_low=sc.ci_low, ci_high=sc.ci_high,
        b1=b1.estimate, b1_se=b1.se, b1_ci_low=b1.ci_low, b1_ci_high=b1.ci_high,
        b2=b2.estimate, b2_se=b2.se, b2_ci_low=b2.ci_low, b2_ci_high=b2.ci_high,
        confidence=confidence, n=fit.n, df=fit.df, adjusted=adjust_covariates,
        fit=fit,
    )
