import numpy as np
import pytest

from l0path.cdsolver import FitOptions, check_stationarity, fit_fixed
from l0path.objective import PenaltyConfig, objective_value
from l0path.oracle import brute_force_subset
from l0path.path import lambda_max
from l0path.swaps import best_swap, local_search

from conftest import random_classification, random_instance


def decoy_instance():
    """Correlated instance where descent from zero settles on a support
    containing a proxy coordinate (index 2) of the true feature (index 3);
    the best swap replaces the proxy with the true feature and local search
    then reaches the exhaustive-enumeration optimum (3, 4).

    Frozen from a scan over the correlated family in conftest."""
    X, y, _ = random_instance(131, n=30, p=12, k=3, correlated=0.5)
    return X, y, 11.39498


class TestBestSwap:
    def test_empty_support_none(self):
        X, y, _ = random_instance(0, n=30, p=5)
        m = fit_fixed(X, y, "squared", PenaltyConfig("L0", 1e9))
        assert best_swap(X, y, m, "squared", PenaltyConfig("L0", 1e9)) is None

    def test_global_optimum_has_no_swap(self):
        X, y, _ = random_instance(1, n=25, p=6, k=2)
        lam = 0.4
        obj, supp, beta, beta0 = brute_force_subset(X, y, lam, 0.0, "L0")
        from l0path.cdsolver import Model
        idx = np.flatnonzero(beta)
        m = Model(beta0, idx, beta[idx], lam, 0.0, obj)
        # the global optimum is in particular swap-optimal
        assert best_swap(X, y, m, "squared", PenaltyConfig("L0", lam)) is None

    def test_decoy_swap_found_and_delta_exact(self):
        X, y, lam = decoy_instance()
        pen = PenaltyConfig("L0", lam)
        m = fit_fixed(X, y, "squared", pen)
        assert m.indices.tolist() == [2, 4]   # proxy support
        cand = best_swap(X, y, m, "squared", pen)
        assert cand is not None and cand.remove == 2 and cand.add == 3
        # verify the reported delta by direct objective evaluation
        beta = m.to_dense(X.p)
        beta[cand.remove] = 0.0
        beta[cand.add] = cand.new_value
        after = objective_value(X, y, m.beta0, beta, "squared", pen)
        assert after - m.objective == pytest.approx(cand.objective_delta,
                                                    rel=1e-9, abs=1e-10)
        assert cand.objective_delta < -1e-10

    def test_tie_break_deterministic(self):
        X, y, lam = decoy_instance()
        pen = PenaltyConfig("L0", lam)
        m = fit_fixed(X, y, "squared", pen)
        c1 = best_swap(X, y, m, "squared", pen)
        c2 = best_swap(X, y, m, "squared", pen)
        assert (c1.remove, c1.add, c1.new_value) == (c2.remove, c2.add, c2.new_value)


class TestLocalSearch:
    def test_fixed_point_untouched(self):
        X, y, _ = random_instance(2, n=30, p=6, k=2)
        pen = PenaltyConfig("L0", 0.5)
        m = fit_fixed(X, y, "squared", pen)
        if best_swap(X, y, m, "squared", pen) is None:
            out = local_search(X, y, m, "squared", pen)
            assert out is m

    def test_decoy_recovers_global_optimum(self):
        X, y, lam = decoy_instance()
        pen = PenaltyConfig("L0", lam)
        m = fit_fixed(X, y, "squared", pen)
        out = local_search(X, y, m, "squared", pen)
        obj, supp, beta, beta0 = brute_force_subset(X, y, lam, 0.0, "L0")
        assert tuple(out.indices.tolist()) == supp == (3, 4)
        assert out.objective == pytest.approx(obj, rel=1e-8)
        assert out.objective < m.objective - 1e-10

    def test_never_worse_and_stationary(self):
        for seed in range(12):
            X, y, _ = random_instance(100 + seed, n=30, p=12, k=3,
                                      correlated=0.5)
            lmax = lambda_max(X, y, "squared", 0.0, "L0")
            lam = float(np.random.default_rng(seed).uniform(0.05, 0.4)) * lmax
            pen = PenaltyConfig("L0", lam)
            m = fit_fixed(X, y, "squared", pen)
            out = local_search(X, y, m, "squared", pen)
            assert out.objective <= m.objective + 1e-12
            assert check_stationarity(X, y, out, "squared", pen).size == 0
            assert best_swap(X, y, out, "squared", pen) is None

    def test_classification_swaps_never_hurt(self):
        X, y, _ = random_classification(5, n=60, p=10, k=3)
        pen = PenaltyConfig("L0L2", 0.15, 0.05)
        opts = FitOptions(tol=1e-10)
        m = fit_fixed(X, y, "logistic", pen, opts=opts)
        out = local_search(X, y, m, "logistic", pen, opts=opts)
        assert out.objective <= m.objective + 1e-12
