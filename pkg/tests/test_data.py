import numpy as np
import pytest
import scipy.sparse as sp

from l0path.data import (DataError, DataMatrix, SyntheticSpec, column_dot,
                         generate_synthetic, load_csv, load_matrix_market,
                         load_response, validate_response,
                         write_matrix_market)


class TestLoadCsv:
    def test_basic_with_response(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("1,2\n3,4\n5,6\n")
        X, y = load_csv(f, response_column=1)
        assert X.dense.tolist() == [[1.0], [3.0], [5.0]]
        assert y.tolist() == [2.0, 4.0, 6.0]

    def test_empty_file(self, tmp_path):
        f = tmp_path / "e.csv"
        f.write_text("")
        with pytest.raises(DataError, match="no rows"):
            load_csv(f)

    def test_nan_cell_named(self, tmp_path):
        f = tmp_path / "n.csv"
        f.write_text("1,2\n3,NaN\n")
        with pytest.raises(DataError, match=r"line 2, column 2"):
            load_csv(f)

    def test_ragged_row(self, tmp_path):
        f = tmp_path / "r.csv"
        f.write_text("1,2\n3\n")
        with pytest.raises(DataError, match="ragged"):
            load_csv(f)

    def test_garbage_cell(self, tmp_path):
        f = tmp_path / "g.csv"
        f.write_text("1,x\n")
        with pytest.raises(DataError, match=r"line 1, column 2"):
            load_csv(f)

    def test_header_and_scientific(self, tmp_path):
        f = tmp_path / "h.csv"
        f.write_text("a,b\n1e-3,2E4\n-5,6\n")
        X, _ = load_csv(f, has_header=True)
        assert X.dense[0, 0] == 1e-3 and X.dense[0, 1] == 2e4

    def test_response_file(self, tmp_path):
        f = tmp_path / "y.csv"
        f.write_text("1.5\n-2\n")
        assert load_response(f).tolist() == [1.5, -2.0]


class TestMatrixMarket:
    def test_identity(self, tmp_path):
        f = tmp_path / "i.mtx"
        f.write_text("%%MatrixMarket matrix coordinate real general\n"
                     "2 2 2\n1 1 1.0\n2 2 1.0\n")
        X = load_matrix_market(f)
        assert X.is_sparse
        assert np.array_equal(X.to_dense().dense, np.eye(2))

    def test_out_of_bounds(self, tmp_path):
        f = tmp_path / "o.mtx"
        f.write_text("%%MatrixMarket matrix coordinate real general\n"
                     "3 3 1\n4 1 1.0\n")
        with pytest.raises(DataError, match="out of declared bounds"):
            load_matrix_market(f)

    def test_duplicates_summed(self, tmp_path):
        f = tmp_path / "d.mtx"
        f.write_text("%%MatrixMarket matrix coordinate real general\n"
                     "2 2 2\n1 1 0.5\n1 1 0.5\n")
        X = load_matrix_market(f)
        assert X.to_dense().dense[0, 0] == 1.0

    def test_bad_header(self, tmp_path):
        f = tmp_path / "b.mtx"
        f.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
        with pytest.raises(DataError, match="header"):
            load_matrix_market(f)

    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        m = sp.random(7, 5, density=0.4, random_state=3, format="csc")
        X = DataMatrix(csc=m)
        f = tmp_path / "rt.mtx"
        write_matrix_market(f, X)
        X2 = load_matrix_market(f)
        assert np.allclose(X.to_dense().dense, X2.to_dense().dense, rtol=0, atol=0)


class TestDataMatrix:
    def test_column_dot_matches_naive(self, rng):
        X = DataMatrix(dense=rng.standard_normal((10, 4)))
        v = rng.standard_normal(10)
        for i in range(4):
            naive = sum(X.dense[s, i] * v[s] for s in range(10))
            assert column_dot(X, i, v) == pytest.approx(naive, rel=1e-14)

    def test_column_dot_basis(self):
        X = DataMatrix(dense=np.eye(3))
        assert column_dot(X, 0, np.array([3.0, 0.0, 0.0])) == 3.0

    def test_zero_column_dot(self):
        with pytest.warns(UserWarning, match="zero-norm"):
            X = DataMatrix(dense=np.array([[0.0, 1.0], [0.0, 2.0]]))
        assert column_dot(X, 0, np.array([1.0, 1.0])) == 0.0

    def test_index_out_of_range(self, rng):
        X = DataMatrix(dense=rng.standard_normal((5, 2)))
        with pytest.raises(IndexError):
            column_dot(X, 2, np.zeros(5))

    def test_dense_sparse_stats_bit_identical(self, rng):
        A = rng.standard_normal((20, 8))
        A[A < 0.3] = 0.0
        Xd = DataMatrix(dense=A)
        Xs = DataMatrix(csc=sp.csc_matrix(A))
        assert np.array_equal(Xd.col_sq_norms, Xs.col_sq_norms)
        assert np.array_equal(Xd.col_means, Xs.col_means)
        v = rng.standard_normal(20)
        for i in range(8):
            assert Xd.column_dot(i, v) == Xs.column_dot(i, v)

    def test_col_stats_verify(self, rng):
        X = DataMatrix(dense=rng.standard_normal((30, 5)))
        assert X.verify_col_stats()

    def test_take_rows(self, rng):
        A = rng.standard_normal((10, 3))
        X = DataMatrix(dense=A)
        sub = X.take_rows(np.array([1, 4, 7]))
        assert np.array_equal(sub.dense, A[[1, 4, 7]])
        Xs = DataMatrix(csc=sp.csc_matrix(A))
        subs = Xs.take_rows(np.array([1, 4, 7]))
        assert np.array_equal(subs.to_dense().dense, A[[1, 4, 7]])

    def test_nonfinite_rejected(self):
        with pytest.raises(DataError):
            DataMatrix(dense=np.array([[1.0, np.nan]]))


class TestValidateResponse:
    def test_classification_requires_pm1(self):
        with pytest.raises(DataError, match=r"\{-1, \+1\}"):
            validate_response(np.array([0.0, 1.0]), 2, True)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            validate_response(np.ones(3), 2, False)


class TestSynthetic:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(10, 5, 6, 0.3, 5.0, 0)       # k > p
        with pytest.raises(ValueError):
            SyntheticSpec(10, 5, 2, 1.0, 5.0, 0)       # rho out of range
        with pytest.raises(ValueError):
            SyntheticSpec(10, 5, 2, 0.3, 0.0, 0)       # snr <= 0

    def test_beta_star_pattern(self):
        spec = SyntheticSpec(10, 1000, 50, 0.3, 5.0, 0)
        idx = spec.beta_star_indices()
        assert idx.shape == (50,)
        assert idx[0] == 0 and idx[1] == 20 and idx[-1] == 980
        _, _, beta, _ = generate_synthetic(SyntheticSpec(5, 20, 4, 0.0, 5.0, 0))
        assert np.count_nonzero(beta) == 4
        assert set(np.flatnonzero(beta)) == {0, 5, 10, 15}

    def test_deterministic(self):
        spec = SyntheticSpec(50, 30, 5, 0.3, 5.0, 9)
        X1, y1, b1, s1 = generate_synthetic(spec)
        X2, y2, b2, s2 = generate_synthetic(spec)
        assert np.array_equal(X1.dense, X2.dense)
        assert np.array_equal(y1, y2)
        assert s1 == s2

    def test_rho_zero_near_independent(self):
        spec = SyntheticSpec(1000, 20, 3, 0.0, 5.0, 11)
        X, _, _, _ = generate_synthetic(spec)
        C = np.corrcoef(X.dense, rowvar=False)
        off = np.abs(C[np.triu_indices(20, k=1)])
        assert off.mean() < 0.1

    def test_ar1_correlation_within_3se(self):
        rho = 0.3
        spec = SyntheticSpec(1000, 12, 3, rho, 5.0, 21)
        X, _, _, _ = generate_synthetic(spec)
        C = np.corrcoef(X.dense, rowvar=False)
        n = spec.n
        for d in (1, 2, 3):
            target = rho ** d
            se = (1 - target ** 2) / np.sqrt(n - 3)   # Fisher-approx se
            vals = np.array([C[i, i + d] for i in range(12 - d)])
            assert np.all(np.abs(vals - target) < 3 * se + 3 * vals.std())

    def test_snr_monte_carlo(self):
        spec = SyntheticSpec(1000, 100, 10, 0.3, 5.0, 33)
        X, y, beta, sigma = generate_synthetic(spec)
        emp = np.var(X.dense @ beta) / sigma ** 2
        assert 4.0 < emp < 6.0

    def test_population_variance_formula(self):
        spec = SyntheticSpec(10, 60, 3, 0.5, 5.0, 0)
        idx = spec.beta_star_indices()
        direct = sum(0.5 ** abs(int(a) - int(b)) for a in idx for b in idx)
        assert spec.population_signal_variance() == pytest.approx(direct, rel=1e-12)

    def test_classification_mode(self):
        spec = SyntheticSpec(200, 20, 3, 0.3, 5.0, 5)
        _, y, _, _ = generate_synthetic(spec, task="classification")
        assert set(np.unique(y)) <= {-1.0, 1.0}
