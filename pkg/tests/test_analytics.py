import math

import numpy as np
import pytest

from govmine.analytics.correlation import pearson, topic_activity_correlation
from govmine.analytics.design import (
    KIND_LOG_COUNT,
    KIND_STANDARDIZE,
    DesignMatrix,
    impute_missing,
    prune_collinear,
    transform_standardize,
    vif_scores,
)
from govmine.analytics.diagnostics import box_tidwell, cooks_distance, run_diagnostics
from govmine.analytics.glm import (
    SeparationError,
    fit_logit,
    fit_nested_models,
    weighted_f1_score,
)
from govmine.analytics.lasso import select_predictors


def _dm(columns, data, kinds=None):
    data = np.asarray(data, dtype=float)
    kinds = kinds or {c: KIND_STANDARDIZE for c in columns}
    return DesignMatrix(columns=list(columns), data=data, kinds=kinds,
                       row_ids=[f"p{i}" for i in range(data.shape[0])])


def _logit_data(seed=0, n=200, beta=(0.8, -0.5), intercept=0.2, p_extra=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, len(beta) + p_extra))
    eta = intercept + X[:, : len(beta)] @ np.asarray(beta)
    y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return X, y


class TestImputation:
    def test_complete_matrix_untouched(self):
        dm = _dm(["a", "b"], [[1, 2], [3, 4], [5, 6]])
        out = impute_missing(dm)
        assert np.array_equal(out.data, dm.data)
        assert out.transforms == {}

    def test_linear_relationship_recovered(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=40)
        b = 2.0 * a + 1.0
        data = np.column_stack([a, b])
        truth = data[3, 1]
        data[3, 1] = np.nan
        out = impute_missing(_dm(["a", "b"], data), max_iter=50, tol=1e-12)
        assert out.data[3, 1] == pytest.approx(truth, abs=1e-6)
        assert "imputed" in out.transforms["b"]

    def test_uninformative_column_gets_mean(self):
        # the other column is constant, so regression cannot improve on the mean
        data = np.array([[1.0, 1.0], [2.0, 1.0], [np.nan, 1.0], [5.0, 1.0]])
        out = impute_missing(_dm(["a", "c"], data), max_iter=5)
        assert out.data[2, 0] == pytest.approx(np.nanmean(data[:, 0]), abs=1e-9)

    def test_entirely_missing_column_error(self):
        data = np.array([[1.0, np.nan], [2.0, np.nan]])
        with pytest.raises(ValueError):
            impute_missing(_dm(["a", "b"], data))


class TestStandardize:
    def test_log_count_closed_form(self):
        col = np.array([0.0, 9.0, 99.0])
        dm = _dm(["n"], col[:, None], kinds={"n": KIND_LOG_COUNT})
        # log10(1+x) gives [0, 1, 2]; z-scoring maps to [-sqrt(3/2), 0, sqrt(3/2)]
        out = transform_standardize(dm)
        expect = np.array([-1.0, 0.0, 1.0]) * math.sqrt(1.5)
        assert np.allclose(out.data[:, 0], expect, atol=1e-12)
        assert out.transforms["n"] == ["log10", "z"]

    def test_mean_sd_invariants(self):
        rng = np.random.default_rng(1)
        data = np.abs(rng.normal(size=(50, 3))) * 10
        kinds = {"a": KIND_LOG_COUNT, "b": KIND_STANDARDIZE, "c": KIND_LOG_COUNT}
        out = transform_standardize(_dm(["a", "b", "c"], data, kinds))
        for j in range(3):
            assert abs(out.data[:, j].mean()) < 1e-9
            assert abs(out.data[:, j].std(ddof=0) - 1.0) < 1e-9

    def test_z_only_idempotent(self):
        rng = np.random.default_rng(2)
        dm = _dm(["a"], rng.normal(size=(30, 1)))
        once = transform_standardize(dm)
        twice = transform_standardize(once)
        assert np.allclose(once.data, twice.data, atol=1e-9)

    def test_constant_column_error(self):
        with pytest.raises(ValueError, match="flat"):
            transform_standardize(_dm(["flat"], np.ones((5, 1))))

    def test_negative_count_error(self):
        dm = _dm(["n"], np.array([[-1.0], [2.0]]), kinds={"n": KIND_LOG_COUNT})
        with pytest.raises(ValueError):
            transform_standardize(dm)


class TestVif:
    def test_duplicate_column_infinite(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=30)
        dm = _dm(["a", "dup"], np.column_stack([a, a]))
        scores = vif_scores(dm)
        assert scores["a"] > 1e6 and scores["dup"] > 1e6

    def test_orthogonal_columns_near_one(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(500, 3))
        scores = vif_scores(_dm(["a", "b", "c"], X))
        for v in scores.values():
            assert 1.0 <= v < 1.1

    def test_constructed_dependence(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=200)
        b = rng.normal(size=200)
        x3 = a + b + rng.normal(scale=0.1, size=200)
        scores = vif_scores(_dm(["a", "b", "x3"], np.column_stack([a, b, x3])))
        assert scores["x3"] > 5.0

    def test_prune_removes_worst_until_under_threshold(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=100)
        b = rng.normal(size=100)
        dup = a + rng.normal(scale=1e-6, size=100)
        dm = _dm(["a", "b", "dup"], np.column_stack([a, b, dup]))
        pruned, initial, dropped = prune_collinear(dm, threshold=5.0)
        assert len(dropped) == 1 and dropped[0] in ("a", "dup")
        assert max(vif_scores(pruned).values()) <= 5.0
        assert initial["b"] < 5.0 < initial["dup"]


class TestLasso:
    def test_huge_lambda_zeroes_everything(self):
        X, y = _logit_data(seed=1, n=120)
        res = select_predictors(X, y, ["a", "b"], n_lambdas=2,
                                lambda_min_ratio=1.0)
        assert np.allclose(res.coefficients, 0.0)
        assert res.selected == []

    def test_tiny_lambda_keeps_strong_predictors(self):
        X, y = _logit_data(seed=2, n=300, beta=(2.0, -2.0))
        res = select_predictors(X, y, ["a", "b"], n_lambdas=30,
                                lambda_min_ratio=1e-4)
        assert {"a", "b"} <= set(res.selected)

    def test_planted_predictor_recovered(self):
        X, y = _logit_data(seed=3, n=250, beta=(1.5,), p_extra=4)
        cols = ["signal", "n1", "n2", "n3", "n4"]
        res = select_predictors(X, y, cols)
        assert "signal" in res.selected

    def test_grouped_variant_selects_whole_groups(self):
        X, y = _logit_data(seed=4, n=250, beta=(1.2, 1.2), p_extra=2)
        cols = ["g1a", "g1b", "g2a", "g2b"]
        groups = {"g1": ["g1a", "g1b"], "g2": ["g2a", "g2b"]}
        res = select_predictors(X, y, cols, groups=groups)
        sel = set(res.selected)
        # group lasso keeps or kills blocks jointly
        assert ("g1a" in sel) == ("g1b" in sel)

    def test_too_few_rows_error(self):
        X, y = _logit_data(seed=0, n=4)
        with pytest.raises(ValueError):
            select_predictors(X, y, ["a", "b"], folds=5)

    def test_orthogonal_outcome_error(self):
        X = np.zeros((20, 2))
        y = np.tile([0.0, 1.0], 10)
        with pytest.raises(ValueError):
            select_predictors(X, y, ["a", "b"])


class TestGlm:
    @pytest.mark.parametrize("n", [50, 208])
    def test_matches_statsmodels(self, n):
        sm = pytest.importorskip("statsmodels.api")
        X, y = _logit_data(seed=10, n=n)
        fit = fit_logit(X, y, ["a", "b"])
        ref = sm.GLM(y, sm.add_constant(X), family=sm.families.Binomial()).fit()
        assert np.allclose(fit.coefficients, ref.params, atol=1e-6)
        assert np.allclose(fit.std_errors, ref.bse, atol=1e-6)
        assert fit.loglik == pytest.approx(ref.llf, abs=1e-6)
        assert fit.aic == pytest.approx(ref.aic, abs=1e-6)

    def test_tiny_balanced_fixture(self):
        sm = pytest.importorskip("statsmodels.api")
        X = np.array([[-1.0], [-0.5], [0.1], [-0.2], [0.6], [1.1]])
        y = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        fit = fit_logit(X, y, ["x"])
        ref = sm.GLM(y, sm.add_constant(X), family=sm.families.Binomial()).fit()
        assert np.allclose(fit.coefficients, ref.params, atol=1e-6)

    def test_independent_predictor_null_effect(self):
        rng = np.random.default_rng(6)
        n = 4000
        X = rng.normal(size=(n, 1))
        y = rng.integers(0, 2, size=n).astype(float)
        fit = fit_logit(X, y, ["noise"])
        assert abs(fit.coefficients[1]) < 0.1
        assert fit.p_values[1] > 0.01

    def test_perfect_separation_raises(self):
        X = np.linspace(-1, 1, 20)[:, None]
        y = (X[:, 0] > 0).astype(float)
        with pytest.raises(SeparationError):
            fit_logit(X, y, ["x"])

    def test_weighted_f1_matches_sklearn(self):
        sk = pytest.importorskip("sklearn.metrics")
        rng = np.random.default_rng(7)
        y = rng.integers(0, 2, size=100)
        pred = rng.integers(0, 2, size=100)
        ours = weighted_f1_score(y, pred)
        ref = sk.f1_score(y, pred, average="weighted")
        assert ours == pytest.approx(ref, abs=1e-12)

    def test_standardization_invariance_of_fit_quality(self):
        X, y = _logit_data(seed=8, n=150)
        fit = fit_logit(X, y, ["a", "b"])
        scaled = X.copy()
        scaled[:, 0] *= 10.0
        fit2 = fit_logit(scaled, y, ["a", "b"])
        assert fit2.aic == pytest.approx(fit.aic, abs=1e-6)
        assert fit2.tjur_r2 == pytest.approx(fit.tjur_r2, abs=1e-8)
        assert np.allclose(fit2.p_values, fit.p_values, atol=1e-6)
        assert fit2.coefficients[1] == pytest.approx(fit.coefficients[1] / 10.0,
                                                     abs=1e-8)

    def test_nested_models_loglik_monotone(self):
        X, y = _logit_data(seed=9, n=200, beta=(0.7, 0.4), p_extra=1)
        cols = ["cov1", "act_t0", "int_t0"]
        groups = {"covariate": ["cov1"], "activity": ["act_t0"],
                  "internalization": ["int_t0"]}
        fits = fit_nested_models(X, y, cols, groups)
        assert set(fits) == {"M1", "M2", "M3", "M4"}
        # richer nested models can only improve in-sample log likelihood
        assert fits["M2"].loglik >= fits["M1"].loglik - 1e-9
        assert fits["M3"].loglik >= fits["M1"].loglik - 1e-9
        assert fits["M4"].loglik >= max(fits["M2"].loglik, fits["M3"].loglik) - 1e-9


class TestDiagnostics:
    def test_cooks_nonnegative_and_flags_planted_outlier(self):
        X, y = _logit_data(seed=11, n=120, beta=(1.0,))
        X[0, 0] = 6.0
        y[0] = 0.0 if (1.0 / (1.0 + np.exp(-X[0, 0]))) > 0.5 else 1.0
        fit = fit_logit(X, y, ["x"])
        d = cooks_distance(fit, X, y)
        assert np.all(d >= 0.0)
        assert d[0] > np.median(d) * 5

    def test_run_diagnostics_threshold(self):
        X, y = _logit_data(seed=12, n=100)
        fit = fit_logit(X, y, ["a", "b"])
        rep = run_diagnostics(fit, X, y, ["a", "b"])
        assert rep.cooks_threshold == pytest.approx(4.0 / 100)
        assert all(rep.cooks_distance[i] > rep.cooks_threshold
                   for i in rep.influential)

    def test_box_tidwell_skips_nonpositive(self):
        X, y = _logit_data(seed=13, n=100)
        pvals, skipped = box_tidwell(X, y, ["a", "b"])
        assert set(skipped) == {"a", "b"}
        assert pvals == {}

    def test_box_tidwell_linear_fixture_insignificant(self):
        rng = np.random.default_rng(14)
        n = 400
        x = rng.uniform(0.5, 3.0, size=n)
        eta = -1.0 + 0.8 * x
        y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
        pvals, skipped = box_tidwell(x[:, None], y, ["x"])
        assert skipped == {}
        assert pvals["x"] > 0.05


class TestPearson:
    def test_closed_form_fixture(self):
        res = pearson([1, 2, 3, 4, 5], [5, 4, 3, 1, 0])
        assert res.r == pytest.approx(-13.0 / math.sqrt(172.0), abs=1e-12)
        assert res.n == 5
        assert 0.0 <= res.p_value <= 1.0

    def test_self_correlation(self):
        res = pearson([1, 2, 3, 7], [1, 2, 3, 7])
        assert res.r == pytest.approx(1.0, abs=1e-12)
        assert res.p_value == 0.0

    def test_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(15)
        x = rng.normal(size=40)
        y = 0.4 * x + rng.normal(size=40)
        res = pearson(x, y)
        ref_r, ref_p = scipy_stats.pearsonr(x, y)
        assert res.r == pytest.approx(ref_r, abs=1e-12)
        assert res.p_value == pytest.approx(ref_p, abs=1e-12)

    def test_too_few_points_error(self):
        with pytest.raises(ValueError):
            pearson([1, 2], [3, 4])

    def test_constant_input_error(self):
        with pytest.raises(ValueError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_topic_correlation_intersects_keys(self):
        res = topic_activity_correlation(
            {0: 3, 1: 5, 2: 9, 99: 1}, {0: 10, 1: 20, 2: 40})
        assert res.n == 3
        assert res.r > 0.9
