"""Binomial logit GLM fit by iteratively reweighted least squares."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


class SeparationError(ValueError):
    """Raised when IRLS diverges, typically from perfect separation."""


@dataclass
class GlmFit:
    columns: list[str]                    # includes "intercept" first
    coefficients: np.ndarray
    std_errors: np.ndarray
    p_values: np.ndarray
    loglik: float
    aic: float
    tjur_r2: float
    accuracy: float
    weighted_f1: float
    n_obs: int
    n_iter: int
    fitted: np.ndarray = field(repr=False, default=None)

    def coef_table(self) -> list[dict]:
        return [
            {
                "term": c,
                "coef": float(b),
                "se": float(s),
                "p": float(p),
            }
            for c, b, s, p in zip(
                self.columns, self.coefficients, self.std_errors, self.p_values
            )
        ]


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def weighted_f1_score(y: np.ndarray, pred: np.ndarray) -> float:
    """Support-weighted mean of per-class F1 over the classes present in y."""
    total = 0.0
    for cls in (0, 1):
        support = int((y == cls).sum())
        if support == 0:
            continue
        tp = float(((pred == cls) & (y == cls)).sum())
        fp = float(((pred == cls) & (y != cls)).sum())
        fn = float(((pred != cls) & (y == cls)).sum())
        denom = 2 * tp + fp + fn
        f1 = 0.0 if denom == 0 else 2 * tp / denom
        total += support * f1
    return total / len(y)


def fit_logit(
    X: np.ndarray,
    y: np.ndarray,
    columns: list[str],
    max_iter: int = 100,
    tol: float = 1e-10,
) -> GlmFit:
    """Newton/IRLS fit of P(y=1) = logistic(b0 + X b).

    Raises SeparationError when coefficients diverge or the working
    weights collapse, which signals (quasi-)perfect separation.
    """
    A = _design(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, k = A.shape
    beta = np.zeros(k)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        eta = A @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        if np.max(np.abs(beta)) > 1e3 or np.min(w) < 1e-12:
            raise SeparationError(
                "IRLS diverged: perfect or quasi-perfect separation suspected"
            )
        # weighted least squares step on the working response
        z = eta + (y - mu) / w
        Aw = A * w[:, None]
        try:
            new_beta = np.linalg.solve(A.T @ Aw, A.T @ (w * z))
        except np.linalg.LinAlgError as exc:
            raise SeparationError(f"IRLS normal equations singular: {exc}") from exc
        step = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        if step < tol:
            break
    else:
        raise SeparationError(f"IRLS failed to converge in {max_iter} iterations")

    eta = A @ beta
    mu = 1.0 / (1.0 + np.exp(-eta))
    w = mu * (1.0 - mu)
    cov = np.linalg.inv(A.T @ (A * w[:, None]))
    se = np.sqrt(np.diag(cov))
    zstat = beta / se
    pvals = 2.0 * stats.norm.sf(np.abs(zstat))
    eps = 1e-300
    loglik = float(np.sum(y * np.log(mu + eps) + (1 - y) * np.log(1 - mu + eps)))
    aic = 2.0 * k - 2.0 * loglik
    ones = y == 1
    tjur = float(mu[ones].mean() - mu[~ones].mean()) if ones.any() and (~ones).any() else math.nan
    pred = (mu >= 0.5).astype(float)
    accuracy = float((pred == y).mean())
    return GlmFit(
        columns=["intercept"] + list(columns),
        coefficients=beta,
        std_errors=se,
        p_values=pvals,
        loglik=loglik,
        aic=aic,
        tjur_r2=tjur,
        accuracy=accuracy,
        weighted_f1=weighted_f1_score(y, pred),
        n_obs=n,
        n_iter=n_iter,
        fitted=mu,
    )


def fit_nested_models(
    X: np.ndarray,
    y: np.ndarray,
    columns: list[str],
    groups: dict[str, list[str]],
) -> dict[str, GlmFit]:
    """Fit the nested model ladder M1..M4.

    M1: covariates only.  M2: + activity counts.  M3: + internalization.
    M4: all three groups.  Group membership comes from ``groups`` with
    keys "covariate", "activity", "internalization"; predictors absent
    from the design matrix are silently dropped.
    """
    idx = {c: i for i, c in enumerate(columns)}

    def cols(names: list[str]) -> list[str]:
        return [c for c in names if c in idx]

    cov = cols(groups.get("covariate", []))
    act = cols(groups.get("activity", []))
    intern = cols(groups.get("internalization", []))
    ladder = {
        "M1": cov,
        "M2": cov + act,
        "M3": cov + intern,
        "M4": cov + act + intern,
    }
    out: dict[str, GlmFit] = {}
    for name, members in ladder.items():
        sub = X[:, [idx[c] for c in members]]
        out[name] = fit_logit(sub, y, members)
    return out
