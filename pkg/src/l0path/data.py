"""Feature-matrix abstraction (dense and CSC sparse), file loading, and the
correlated-Gaussian synthetic data generator."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels as K


class DataError(ValueError):
    """Raised for malformed or out-of-contract input data; the CLI maps it
    to exit code 3."""


class DataMatrix:
    """An immutable n x p feature matrix with cached column statistics.

    Storage is either a column-major float64 array or a CSC triplet
    (column pointers, row indices, values). Both storages expose identical
    numerics: column reductions accumulate in row order in either case, so
    the same matrix produces the same fits regardless of representation.
    """

    def __init__(self, *, dense=None, csc=None):
        if (dense is None) == (csc is None):
            raise ValueError("provide exactly one of dense= or csc=")
        if dense is not None:
            arr = np.asfortranarray(np.asarray(dense, dtype=np.float64))
            if arr.ndim != 2:
                raise DataError("dense matrix must be 2-D")
            if arr.shape[0] < 1 or arr.shape[1] < 1:
                raise DataError("matrix must have at least one row and one column")
            if not np.all(np.isfinite(arr)):
                raise DataError("dense matrix contains non-finite values")
            self._dense = arr
            self._csc = None
            self.n, self.p = arr.shape
        else:
            m = sp.csc_matrix(csc).astype(np.float64)
            m.sum_duplicates()
            m.sort_indices()
            if m.shape[0] < 1 or m.shape[1] < 1:
                raise DataError("matrix must have at least one row and one column")
            if not np.all(np.isfinite(m.data)):
                raise DataError("sparse matrix contains non-finite values")
            self._dense = None
            self._csc = m
            self.n, self.p = m.shape
            self._check_csc_structure()
        self.col_sq_norms = np.empty(self.p)
        self.col_means = np.empty(self.p)
        if self._dense is not None:
            K.dense_col_stats(self._dense, self.col_sq_norms, self.col_means)
        else:
            K.sparse_col_stats(self._csc.data, self._csc.indices,
                               self._csc.indptr, self.n,
                               self.col_sq_norms, self.col_means)
        n_zero = int(np.count_nonzero(self.col_sq_norms == 0.0))
        if n_zero:
            warnings.warn(
                f"{n_zero} zero-norm column(s); their coefficients are fixed at 0",
                stacklevel=2)

    def _check_csc_structure(self):
        m = self._csc
        if m.indptr[0] != 0 or m.indptr[-1] != m.nnz:
            raise DataError("CSC column pointers do not span the value array")
        if np.any(np.diff(m.indptr) < 0):
            raise DataError("CSC column pointers must be nondecreasing")
        for j in range(self.p):
            rows = m.indices[m.indptr[j]:m.indptr[j + 1]]
            if rows.size and (np.any(np.diff(rows) <= 0) or rows[-1] >= self.n or rows[0] < 0):
                raise DataError(f"CSC row indices invalid in column {j}")

    @classmethod
    def from_dense(cls, arr) -> "DataMatrix":
        return cls(dense=arr)

    @classmethod
    def from_sparse(cls, m) -> "DataMatrix":
        return cls(csc=m)

    @property
    def is_sparse(self) -> bool:
        return self._csc is not None

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            raise ValueError("matrix is stored sparse; use to_dense()")
        return self._dense

    @property
    def csc(self) -> sp.csc_matrix:
        if self._csc is None:
            raise ValueError("matrix is stored dense; use to_sparse()")
        return self._csc

    def to_dense(self) -> "DataMatrix":
        if self._dense is not None:
            return self
        return DataMatrix(dense=self._csc.toarray())

    def to_sparse(self) -> "DataMatrix":
        if self._csc is not None:
            return self
        return DataMatrix(csc=sp.csc_matrix(self._dense))

    def column_dot(self, i: int, v: np.ndarray) -> float:
        """Exact <x_i, v>, identical for both storages of the same matrix."""
        if not 0 <= i < self.p:
            raise IndexError(f"column index {i} out of range [0, {self.p})")
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise ValueError("vector length does not match sample count")
        out = np.empty(1)
        cand = np.array([i], dtype=np.int64)
        if self._dense is not None:
            K.dense_batch_dot(self._dense, v, cand, out)
        else:
            K.sparse_batch_dot(self._csc.data, self._csc.indices,
                               self._csc.indptr, v, cand, out)
        return float(out[0])

    def batch_dot(self, w: np.ndarray, cand: np.ndarray, out: np.ndarray) -> None:
        """<x_i, w> for every i in cand, written into out (solver hot path)."""
        if self._dense is not None:
            K.dense_batch_dot(self._dense, w, cand, out)
        else:
            K.sparse_batch_dot(self._csc.data, self._csc.indices,
                               self._csc.indptr, w, cand, out)

    def add_column_to(self, i: int, a: float, out: np.ndarray) -> None:
        """out += a * x_i, in place."""
        if self._dense is not None:
            K.dense_axpy(self._dense, i, a, out)
        else:
            K.sparse_axpy(self._csc.data, self._csc.indices,
                          self._csc.indptr, i, a, out)

    def predict_linear(self, beta0: float, indices: np.ndarray,
                       values: np.ndarray) -> np.ndarray:
        """beta0 + X beta for a sparse coefficient vector."""
        eta = np.full(self.n, float(beta0))
        for i, v in zip(indices, values):
            self.add_column_to(int(i), float(v), eta)
        return eta

    def take_rows(self, idx: np.ndarray) -> "DataMatrix":
        """Row-subset copy in the same storage kind (for CV splits)."""
        idx = np.asarray(idx, dtype=np.int64)
        if self._dense is not None:
            return DataMatrix(dense=self._dense[idx])
        return DataMatrix(csc=self._csc[idx, :])

    def verify_col_stats(self, rtol: float = 1e-12) -> bool:
        """Recompute column statistics from raw storage and compare."""
        if self._dense is not None:
            sq = np.einsum("ij,ij->j", self._dense, self._dense)
            mu = self._dense.mean(axis=0)
        else:
            sq = np.asarray(self._csc.multiply(self._csc).sum(axis=0)).ravel()
            mu = np.asarray(self._csc.sum(axis=0)).ravel() / self.n
        scale = np.maximum(1.0, np.abs(sq))
        ok_sq = np.all(np.abs(sq - self.col_sq_norms) <= rtol * scale)
        ok_mu = np.allclose(mu, self.col_means, rtol=rtol, atol=1e-15)
        return bool(ok_sq and ok_mu)


def column_dot(X: DataMatrix, i: int, v: np.ndarray) -> float:
    return X.column_dot(i, v)


def validate_response(y, n: int, classification: bool) -> np.ndarray:
    y = np.ascontiguousarray(np.asarray(y, dtype=np.float64).ravel())
    if y.shape[0] != n:
        raise DataError(f"response length {y.shape[0]} != sample count {n}")
    if not np.all(np.isfinite(y)):
        raise DataError("response contains non-finite values")
    if classification:
        bad = np.setdiff1d(np.unique(y), [-1.0, 1.0])
        if bad.size:
            raise DataError(
                f"classification response must lie in {{-1, +1}}; found {bad[:5]}")
    return y


def _parse_cell(tok: str, line_no: int, col_no: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise DataError(f"cannot parse '{tok.strip()}' as a number "
                        f"(line {line_no}, column {col_no})") from None
    if not np.isfinite(v):
        raise DataError(f"non-finite value '{tok.strip()}' "
                        f"(line {line_no}, column {col_no})")
    return v


def load_csv(path, has_header: bool = False, response_column: int | None = None):
    """Read a dense comma-separated matrix.

    Returns (DataMatrix, y) where y is the extracted response column, or
    (DataMatrix, None) when response_column is None. Line and column numbers
    in error messages are 1-based positions in the file.
    """
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if has_header and line_no == 1:
                continue
            line = line.strip()
            if not line:
                continue
            toks = line.split(",")
            if width is None:
                width = len(toks)
            elif len(toks) != width:
                raise DataError(f"ragged row: line {line_no} has {len(toks)} "
                                f"fields, expected {width}")
            rows.append([_parse_cell(t, line_no, c + 1)
                         for c, t in enumerate(toks)])
    if not rows:
        raise DataError(f"no rows in {path}")
    arr = np.asarray(rows, dtype=np.float64)
    if response_column is None:
        return DataMatrix(dense=arr), None
    if not 0 <= response_column < arr.shape[1]:
        raise DataError(f"response column {response_column} out of range "
                        f"[0, {arr.shape[1]})")
    y = arr[:, response_column].copy()
    Xarr = np.delete(arr, response_column, axis=1)
    if Xarr.shape[1] == 0:
        raise DataError("no feature columns left after extracting the response")
    return DataMatrix(dense=Xarr), y


def load_response(path) -> np.ndarray:
    """Read a single-column response file (one value per line)."""
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if "," in line:
                raise DataError(f"response file must have one column "
                                f"(line {line_no})")
            vals.append(_parse_cell(line, line_no, 1))
    if not vals:
        raise DataError(f"no rows in {path}")
    return np.asarray(vals, dtype=np.float64)


def load_matrix_market(path) -> DataMatrix:
    """Read a MatrixMarket 'coordinate real general' file into sparse storage.

    Duplicate (row, col) entries are summed; indices are converted from the
    file's 1-based convention.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        toks = header.split()
        expected = ["%%matrixmarket", "matrix", "coordinate", "real", "general"]
        if [t.lower() for t in toks] != expected:
            raise DataError(f"unsupported MatrixMarket header: {header.strip()!r} "
                            "(need 'matrix coordinate real general')")
        dims = None
        entries_i: list[int] = []
        entries_j: list[int] = []
        entries_v: list[float] = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            toks = line.split()
            if dims is None:
                if len(toks) != 3:
                    raise DataError(f"malformed size line (line {line_no})")
                try:
                    nrows, ncols, nnz = (int(t) for t in toks)
                except ValueError:
                    raise DataError(f"malformed size line (line {line_no})") from None
                if nrows < 1 or ncols < 1 or nnz < 0:
                    raise DataError(f"invalid dimensions on line {line_no}")
                dims = (nrows, ncols, nnz)
                continue
            if len(toks) != 3:
                raise DataError(f"malformed entry (line {line_no})")
            i = int(toks[0])
            j = int(toks[1])
            v = _parse_cell(toks[2], line_no, 3)
            if not (1 <= i <= dims[0]) or not (1 <= j <= dims[1]):
                raise DataError(f"entry ({i}, {j}) out of declared bounds "
                                f"{dims[0]}x{dims[1]} (line {line_no})")
            entries_i.append(i - 1)
            entries_j.append(j - 1)
            entries_v.append(v)
    if dims is None:
        raise DataError(f"no size line in {path}")
    if len(entries_v) != dims[2]:
        raise DataError(f"declared {dims[2]} entries, found {len(entries_v)}")
    coo = sp.coo_matrix((entries_v, (entries_i, entries_j)),
                        shape=(dims[0], dims[1]))
    return DataMatrix(csc=coo.tocsc())


def write_matrix_market(path, X: DataMatrix) -> None:
    m = X.csc if X.is_sparse else sp.csc_matrix(X.dense)
    coo = m.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{X.n} {X.p} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the correlated-Gaussian benchmark generator: rows are
    N(0, S) with S_ij = rho^|i-j|, the true coefficient vector has k unit
    entries at equispaced indices floor(t*p/k), and the noise level sigma is
    set from the population Var(X beta*) so that Var(X beta*)/sigma^2 = snr.
    """
    n: int
    p: int
    k: int
    rho: float
    snr: float
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or self.k < 1:
            raise ValueError("n, p, k must be positive")
        if self.k > self.p:
            raise ValueError("k must not exceed p")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.snr <= 0.0:
            raise ValueError("snr must be positive")

    def beta_star_indices(self) -> np.ndarray:
        return (np.arange(self.k, dtype=np.int64) * self.p) // self.k

    def population_signal_variance(self) -> float:
        """beta*' S beta* under S_ij = rho^|i-j| (exact, O(k^2))."""
        idx = self.beta_star_indices()
        diff = np.abs(idx[:, None] - idx[None, :])
        return float(np.sum(self.rho ** diff))


def generate_synthetic(spec: SyntheticSpec, task: str = "regression"):
    """Draw (X, y, beta_star, sigma) from the benchmark model.

    X rows follow the AR(1) recurrence x_j = rho*x_{j-1} + sqrt(1-rho^2)*e_j,
    which realizes the exponential covariance exactly. Deterministic given
    spec.seed: equal specs yield bit-identical outputs.
    """
    if task not in ("regression", "classification"):
        raise ValueError(f"unknown task {task!r}")
    rng = np.random.default_rng(spec.seed)
    # (p, n) C-order transposed view is (n, p) F-order: columns contiguous
    X = rng.standard_normal((spec.p, spec.n)).T
    c = np.sqrt(1.0 - spec.rho ** 2)
    for j in range(1, spec.p):
        X[:, j] *= c
        X[:, j] += spec.rho * X[:, j - 1]
    beta_star = np.zeros(spec.p)
    beta_star[spec.beta_star_indices()] = 1.0
    signal_var = spec.population_signal_variance()
    sigma = float(np.sqrt(signal_var / spec.snr))
    eta = X @ beta_star
    if task == "regression":
        y = eta + sigma * rng.standard_normal(spec.n)
    else:
        prob = 1.0 / (1.0 + np.exp(-eta))
        y = np.where(rng.random(spec.n) < prob, 1.0, -1.0)
    return DataMatrix(dense=X), y, beta_star, sigma
