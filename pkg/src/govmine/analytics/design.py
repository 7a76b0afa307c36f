"""Design-matrix plumbing: imputation, scaling, collinearity pruning."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

KIND_LOG_COUNT = "log_count"       # log10(1+x) then z-score
KIND_STANDARDIZE = "standardize"   # z-score only


@dataclass
class DesignMatrix:
    columns: list[str]
    data: np.ndarray                       # (n, p), np.nan marks missing
    kinds: dict[str, str]
    row_ids: list[str]
    transforms: dict[str, list[str]] = field(default_factory=dict)

    def copy(self) -> "DesignMatrix":
        return replace(
            self,
            columns=list(self.columns),
            data=self.data.copy(),
            kinds=dict(self.kinds),
            row_ids=list(self.row_ids),
            transforms={k: list(v) for k, v in self.transforms.items()},
        )

    def col(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def drop(self, names: list[str]) -> "DesignMatrix":
        keep = [i for i, c in enumerate(self.columns) if c not in names]
        return replace(
            self,
            columns=[self.columns[i] for i in keep],
            data=self.data[:, keep],
            kinds={c: k for c, k in self.kinds.items() if c not in names},
            row_ids=list(self.row_ids),
            transforms={c: v for c, v in self.transforms.items() if c not in names},
        )


def impute_missing(dm: DesignMatrix, max_iter: int = 20, tol: float = 1e-8) -> DesignMatrix:
    """Deterministic round-robin imputation.

    Missing cells start at column means; each incomplete column is then
    repeatedly regressed (OLS) on all other columns and its missing
    cells overwritten, until the largest cell change drops below tol.
    """
    out = dm.copy()
    X = out.data
    n, p = X.shape
    missing = np.isnan(X)
    if not missing.any():
        return out
    incomplete = [j for j in range(p) if missing[:, j].any()]
    for j in incomplete:
        if missing[:, j].all():
            raise ValueError(f"column {out.columns[j]} is entirely missing")
        X[missing[:, j], j] = np.nanmean(dm.data[:, j])
    for _ in range(max_iter):
        max_change = 0.0
        for j in incomplete:
            rows = missing[:, j]
            others = [k for k in range(p) if k != j]
            A = np.column_stack([np.ones(n), X[:, others]])
            obs = ~rows
            coef, *_ = np.linalg.lstsq(A[obs], X[obs, j], rcond=None)
            pred = A[rows] @ coef
            max_change = max(max_change, float(np.max(np.abs(pred - X[rows, j]), initial=0.0)))
            X[rows, j] = pred
        if max_change < tol:
            break
    out.transforms = {**out.transforms}
    for j in incomplete:
        out.transforms.setdefault(out.columns[j], []).append("imputed")
    return out


def transform_standardize(dm: DesignMatrix) -> DesignMatrix:
    """log10(1+x) on count-like columns, then z-score everything."""
    out = dm.copy()
    for j, name in enumerate(out.columns):
        col = out.data[:, j]
        kind = out.kinds[name]
        applied = out.transforms.setdefault(name, [])
        if kind == KIND_LOG_COUNT:
            if np.nanmin(col) < 0:
                raise ValueError(f"count column {name} has negative values")
            col = np.log10(1.0 + col)
            applied.append("log10")
        mean = np.nanmean(col)
        sd = np.nanstd(col, ddof=0)
        if sd == 0.0:
            raise ValueError(f"zero-variance column: {name}")
        out.data[:, j] = (col - mean) / sd
        applied.append("z")
    return out


def vif_scores(dm: DesignMatrix) -> dict[str, float]:
    """Variance inflation factor 1/(1-R^2) per column."""
    X = dm.data
    n, p = X.shape
    out = {}
    for j in range(p):
        others = [k for k in range(p) if k != j]
        A = np.column_stack([np.ones(n), X[:, others]])
        y = X[:, j]
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        ss_res = float(resid @ resid)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        out[dm.columns[j]] = np.inf if r2 >= 1.0 else max(1.0, 1.0 / (1.0 - r2))
    return out


def prune_collinear(
    dm: DesignMatrix, threshold: float = 5.0
) -> tuple[DesignMatrix, dict[str, float], list[str]]:
    """Iteratively drop the highest-VIF column while any VIF > threshold.

    Returns (pruned matrix, pre-pruning VIFs, dropped column names).
    """
    initial_vif = vif_scores(dm)
    current = dm
    dropped: list[str] = []
    for _ in range(len(dm.columns)):
        if len(current.columns) < 2:
            raise ValueError("fewer than 2 columns remain after pruning")
        scores = vif_scores(current)
        worst = max(scores.items(), key=lambda kv: (kv[1], kv[0]))
        if worst[1] <= threshold:
            break
        current = current.drop([worst[0]])
        dropped.append(worst[0])
    return current, initial_vif, dropped
