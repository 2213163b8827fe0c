"""Standardization, least squares, correlation intervals and FDR adjustment."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import stats

from .errors import ConstantColumn, DomainError, SingularDesign

Z_975 = stats.norm.ppf(0.975)


def _fsum_mean(x: np.ndarray) -> float:
    return math.fsum(x.tolist()) / x.size


def standardize(values) -> np.ndarray:
    """z-scores using the sample (n - 1) standard deviation."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("standardize needs a vector of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("standardize needs finite values")
    mean = _fsum_mean(x)
    centered = x - mean
    var = math.fsum((centered * centered).tolist()) / (x.size - 1)
    sd = math.sqrt(var)
    if sd == 0.0 or sd <= 1e-14 * max(1.0, abs(mean)):
        raise ConstantColumn("cannot standardize a constant column")
    return centered / sd


@dataclass
class OLSResult:
    names: list[str]
    coef: np.ndarray
    se: np.ndarray
    tvalues: np.ndarray
    pvalues: np.ndarray
    residuals: np.ndarray
    df_resid: int
    sigma2: float

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def conf_int(self, name: str, level: float = 0.95) -> tuple[float, float]:
        i = self.index(name)
        q = stats.t.ppf(0.5 + level / 2, self.df_resid)
        return float(self.coef[i] - q * self.se[i]), float(self.coef[i] + q * self.se[i])


def ols(X, y, names=None, *, intercept: bool = True, rank_tol: float = 1e-10) -> OLSResult:
    """Least squares fit with classical standard errors.

    Solved through a column-pivoted QR factorization; standard errors are
    sigma^2 (X'X)^-1 with sigma^2 = RSS / (n - k), and p-values are two-sided
    from the t distribution with n - k degrees of freedom. With ``intercept``
    a leading ``const`` column is added.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValueError("names must match the number of columns")
    if intercept:
        X = np.column_stack([np.ones(n), X])
        names = ["const", *names]
    k = X.shape[1]
    if y.shape != (n,):
        raise ValueError("y must be a vector with one entry per row")
    if n <= k:
        raise SingularDesign(f"{n} rows for {k} columns", names)
    q, r, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rank_tol * diag[0])) if diag.size and diag[0] > 0 else 0
    if rank < k:
        dependent = [names[j] for j in piv[rank:]]
        raise SingularDesign(f"design is rank deficient; dependent column(s): {', '.join(dependent)}", dependent)
    coef_p = scipy.linalg.solve_triangular(r, q.T @ y)
    coef = np.empty(k)
    coef[piv] = coef_p
    resid = y - X @ coef
    df = n - k
    sigma2 = float(resid @ resid) / df
    r_inv = scipy.linalg.solve_triangular(r, np.eye(k))
    cov_p = sigma2 * (r_inv @ r_inv.T)
    cov = np.empty_like(cov_p)
    cov[np.ix_(piv, piv)] = cov_p
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = np.where(se > 0, coef / se, np.sign(coef) * np.inf)
    pvals = 2 * stats.t.sf(np.abs(tvals), df)
    pvals = np.where(np.isnan(tvals), 1.0, pvals)
    return OLSResult(names, coef, se, tvals, pvals, resid, df, sigma2)


@dataclass(frozen=True)
class Correlation:
    r: float
    ci: tuple[float, float]
    p: float
    n: int


def fisher_ci(r: float, n: int, level: float = 0.95) -> tuple[float, float]:
    if n < 4:
        raise ValueError("Fisher interval needs n >= 4")
    if abs(r) >= 1.0:
        return (float(r), float(r))
    z = math.atanh(r)
    half = stats.norm.ppf(0.5 + level / 2) / math.sqrt(n - 3)
    return (math.tanh(z - half), math.tanh(z + half))


def pearson_r(x, y) -> Correlation:
    """Product-moment correlation with a Fisher-z 95% interval and a t-test p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be vectors of equal length")
    n = x.size
    if n < 4:
        raise ValueError("pearson_r needs at least 4 observations")
    zx, zy = standardize(x), standardize(y)
    r = math.fsum((zx * zy).tolist()) / (n - 1)
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = float(2 * stats.t.sf(abs(t), n - 2))
    return Correlation(r, fisher_ci(r, n), p, n)


def bh_adjust(p_values) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, in input order."""
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1:
        raise DomainError("p-values must be a vector")
    if p.size == 0:
        return p.copy()
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise DomainError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * (m / np.arange(1, m + 1))
    adj_sorted = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adj_sorted, 1.0)
    return out
