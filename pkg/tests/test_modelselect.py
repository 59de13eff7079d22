import numpy as np
import pytest

from l0path.cdsolver import FitOptions, Model
from l0path.data import DataError, DataMatrix, SyntheticSpec, generate_synthetic
from l0path.modelselect import (cross_validate, mean_validation_loss, predict,
                                prediction_error, support_metrics,
                                tune_on_validation)

from conftest import random_instance


def _model(beta0, pairs, lam=1.0, gamma=0.0):
    if pairs:
        idx, vals = zip(*pairs)
    else:
        idx, vals = (), ()
    return Model(beta0, np.asarray(idx, dtype=np.int64), np.asarray(vals, float),
                 lam, gamma, 0.0)


class TestPredict:
    def test_empty_model_constant(self, rng):
        X = DataMatrix(dense=rng.standard_normal((10, 3)))
        out = predict(_model(0.7, []), X)
        assert np.allclose(out.eta, 0.7)
        assert out.labels is None

    def test_identity_rows(self):
        X = DataMatrix(dense=np.eye(4))
        out = predict(_model(0.5, [(1, 2.0)]), X)
        assert out.eta.tolist() == [0.5, 2.5, 0.5, 0.5]

    def test_logistic_zero_eta_half_prob(self):
        X = DataMatrix(dense=np.zeros((3, 2)) + np.eye(3, 2))
        out = predict(_model(0.0, []), X, loss="logistic")
        assert np.allclose(out.proba, 0.5)
        assert np.all(out.labels == 1.0)

    def test_dimension_mismatch(self, rng):
        X = DataMatrix(dense=rng.standard_normal((5, 2)))
        with pytest.raises(ValueError):
            predict(_model(0.0, [(3, 1.0)]), X)


class TestPredictionError:
    def test_exact_recovery_zero(self, rng):
        X = DataMatrix(dense=rng.standard_normal((20, 5)))
        b = np.array([1.0, 0, 0, -2.0, 0])
        assert prediction_error(X, b, b) == 0.0

    def test_zero_estimate_is_one(self, rng):
        X = DataMatrix(dense=rng.standard_normal((20, 5)))
        b = np.array([1.0, 0, 0, -2.0, 0])
        assert prediction_error(X, np.zeros(5), b) == pytest.approx(1.0, rel=1e-14)

    def test_scaling_identity(self, rng):
        # PE(c * beta*) = |c - 1| exactly, by linearity
        X = DataMatrix(dense=rng.standard_normal((20, 5)))
        b = np.array([0.5, 0, 1.0, 0, 0])
        for c in (2.0, 0.25, -1.0):
            assert prediction_error(X, c * b, b) == pytest.approx(abs(c - 1.0),
                                                                  rel=1e-12)

    def test_zero_signal_errors(self, rng):
        X = DataMatrix(dense=rng.standard_normal((10, 3)))
        with pytest.raises(ValueError):
            prediction_error(X, np.ones(3), np.zeros(3))


class TestSupportMetrics:
    def test_exact(self):
        b = np.array([1.0, 0, -2.0, 0])
        assert support_metrics(b, b) == (0, 2)

    def test_disjoint(self):
        bh = np.array([1.0, 1.0, 1.0, 0, 0, 0])
        bs = np.array([0, 0, 0, 1.0, 1.0, 0])
        assert support_metrics(bh, bs) == (3, 3)

    def test_fp_plus_tp_equals_ss(self, rng):
        for _ in range(20):
            bh = rng.standard_normal(10) * (rng.random(10) < 0.4)
            bs = rng.standard_normal(10) * (rng.random(10) < 0.3)
            fp, ss = support_metrics(bh, bs)
            tp = len(set(np.flatnonzero(bh)) & set(np.flatnonzero(bs)))
            assert fp + tp == ss


class TestCrossValidate:
    def test_partition_properties(self):
        X, y, _ = random_instance(0, n=23, p=6, k=2)
        cv = cross_validate(X, y, "squared", "L0", n_folds=5, seed=3,
                            opts=FitOptions(n_lambda=6, local_search=False))
        from l0path.modelselect import _make_folds
        folds = _make_folds(23, 5, 3)
        sizes = [f.size for f in folds]
        assert max(sizes) - min(sizes) <= 1
        assert np.array_equal(np.sort(np.concatenate(folds)), np.arange(23))
        # deterministic given seed
        folds2 = _make_folds(23, 5, 3)
        assert all(np.array_equal(a, b) for a, b in zip(folds, folds2))
        assert cv.best_lambda in {l for g in cv.lambda_grids for l in g}

    def test_leave_one_out_runs(self):
        X, y, _ = random_instance(1, n=10, p=4, k=1)
        cv = cross_validate(X, y, "squared", "L0", n_folds=10, seed=0,
                            opts=FitOptions(n_lambda=4, local_search=False))
        assert cv.n_folds == 10

    def test_folds_bounds(self):
        X, y, _ = random_instance(2, n=10, p=4)
        with pytest.raises(ValueError):
            cross_validate(X, y, n_folds=1)
        with pytest.raises(ValueError):
            cross_validate(X, y, n_folds=11)

    def test_pure_noise_selects_sparse(self):
        hits = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            X = DataMatrix(dense=rng.standard_normal((200, 100)))
            y = rng.standard_normal(200)
            cv = cross_validate(X, y, "squared", "L0", n_folds=5, seed=seed,
                                opts=FitOptions(n_lambda=30, local_search=False))
            if cv.best_model.support_size <= 5:
                hits += 1
        assert hits >= 8

    def test_tie_break_prefers_larger_lambda(self):
        X, y, _ = random_instance(3, n=30, p=5, k=1)
        cv = cross_validate(X, y, "squared", "L0", n_folds=5, seed=1,
                            opts=FitOptions(n_lambda=8, local_search=False))
        g = int(np.flatnonzero(cv.gammas == cv.best_gamma)[0])
        lams = cv.lambda_grids[g]
        losses = cv.mean_loss[g]
        best_t = int(np.flatnonzero(lams == cv.best_lambda)[0])
        earlier = losses[:best_t]
        assert np.all(earlier > losses[best_t])

    def test_constant_label_fold_rerandomized(self):
        # 12 samples, one +1: some 3-fold shuffles strand the positives
        rng = np.random.default_rng(0)
        X = DataMatrix(dense=rng.standard_normal((12, 3)))
        y = -np.ones(12)
        y[0] = 1.0
        with pytest.raises(DataError):
            # every training fold of size 8 misses class +1 in at least one
            # arrangement eventually; with a single positive, the fold holding
            # it yields a constant-label training set for the others
            cross_validate(X, y, "logistic", "L0", n_folds=12, seed=0,
                           opts=FitOptions(n_lambda=3, local_search=False))


class TestTuneOnValidation:
    def test_overfit_direction_with_train_as_validation(self):
        X, y, _ = random_instance(4, n=60, p=10, k=2, noise=0.8)
        opts = FitOptions(n_lambda=30, local_search=False)
        best, rows, path = tune_on_validation((X, y), (X, y), "squared", "L0",
                                              opts=opts)
        # validating on the training set rewards dense models
        max_ss = max(r["support_size"] for r in rows)
        assert best.support_size >= max_ss - 1

    def test_single_model_path(self):
        X, y, _ = random_instance(5, n=30, p=5)
        from l0path.path import fit_path, lambda_max
        lmax = lambda_max(X, y, "squared", 0.0, "L0")
        path = fit_path(X, y, "squared", "L0", lambda_grid=[1.2 * lmax])
        best, rows, _ = tune_on_validation((X, y), (X, y), "squared", "L0",
                                           path=path)
        assert len(rows) == 1
        assert best is path.models[0][0]

    def test_recovers_planted_support(self):
        spec_tr = SyntheticSpec(300, 40, 5, 0.3, 5.0, 7)
        spec_va = SyntheticSpec(300, 40, 5, 0.3, 5.0, 8)
        X_tr, y_tr, bstar, _ = generate_synthetic(spec_tr)
        X_va, y_va, _, _ = generate_synthetic(spec_va)
        best, rows, _ = tune_on_validation((X_tr, y_tr), (X_va, y_va),
                                           "squared", "L0",
                                           opts=FitOptions(n_lambda=40,
                                                           local_search=False))
        fp, ss = support_metrics(best.to_dense(40), bstar)
        assert fp <= 1 and abs(ss - 5) <= 1

    def test_mean_validation_loss_matches_manual(self, rng):
        X = DataMatrix(dense=rng.standard_normal((15, 4)))
        y = rng.standard_normal(15)
        m = _model(0.3, [(2, 1.5)])
        eta = 0.3 + X.dense[:, 2] * 1.5
        assert mean_validation_loss(m, X, y, "squared") == \
            pytest.approx(np.mean((y - eta) ** 2), rel=1e-12)
