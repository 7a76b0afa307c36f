"""Regression diagnostics: influence and linearity-of-logit checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glm import GlmFit, SeparationError, fit_logit


@dataclass
class DiagnosticsReport:
    cooks_distance: np.ndarray
    influential: list[int]                  # row indices above threshold
    cooks_threshold: float
    box_tidwell: dict[str, float]           # predictor -> interaction p-value
    box_tidwell_skipped: dict[str, str]     # predictor -> reason


def cooks_distance(fit: GlmFit, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Approximate Cook's distance from IRLS leverage.

    D_i = r_i^2 h_i / (k (1-h_i)^2) with standardized Pearson residuals
    r_i and hat values h_i of the weighted design.
    """
    A = np.column_stack([np.ones(X.shape[0]), X])
    mu = fit.fitted
    w = mu * (1.0 - mu)
    Aw = A * np.sqrt(w)[:, None]
    H = Aw @ np.linalg.inv(Aw.T @ Aw) @ Aw.T
    h = np.clip(np.diag(H), 0.0, 1.0 - 1e-12)
    pearson = (y - mu) / np.sqrt(w)
    r_std = pearson / np.sqrt(1.0 - h)
    k = len(fit.coefficients)
    return (r_std**2) * h / (k * (1.0 - h))


def box_tidwell(
    X: np.ndarray, y: np.ndarray, columns: list[str]
) -> tuple[dict[str, float], dict[str, str]]:
    """Box-Tidwell linearity check: add x*ln(x) one predictor at a time.

    Only strictly positive predictors qualify; others are reported as
    skipped with the reason.  Returned p-values belong to the augmented
    x*ln(x) term.
    """
    pvals: dict[str, float] = {}
    skipped: dict[str, str] = {}
    for j, name in enumerate(columns):
        col = X[:, j]
        if np.min(col) <= 0.0:
            skipped[name] = "not strictly positive"
            continue
        aug = np.column_stack([X, col * np.log(col)])
        try:
            fit = fit_logit(aug, y, columns + [f"{name}:lnx"])
        except SeparationError as exc:
            skipped[name] = f"augmented fit failed: {exc}"
            continue
        pvals[name] = float(fit.p_values[-1])
    return pvals, skipped


def run_diagnostics(
    fit: GlmFit,
    X: np.ndarray,
    y: np.ndarray,
    columns: list[str],
    cooks_threshold: float | None = None,
) -> DiagnosticsReport:
    y = np.asarray(y, dtype=float)
    d = cooks_distance(fit, np.asarray(X, dtype=float), y)
    threshold = cooks_threshold if cooks_threshold is not None else 4.0 / len(y)
    bt_p, bt_skip = box_tidwell(np.asarray(X, dtype=float), y, list(columns))
    return DiagnosticsReport(
        cooks_distance=d,
        influential=[int(i) for i in np.flatnonzero(d > threshold)],
        cooks_threshold=threshold,
        box_tidwell=bt_p,
        box_tidwell_skipped=bt_skip,
    )
