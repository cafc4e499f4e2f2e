"""Sparse matrices and vectors over a scalar field.

Numeric operators wrap ``scipy.sparse.csr_matrix``; exact operators use
:class:`ExactMatrix`, a row-major dictionary of :class:`LaurentPoly`
entries.  Both are hidden behind :class:`TensorOperator` and
:class:`StateVector`, which also carry the lattice size and the particle
sectors of their row and column spaces.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np
import scipy.sparse as sps

from .scalar import ExactField, Field, LaurentPoly, NumericField
from .statespace import SectorBasis, basis

__all__ = ["ExactMatrix", "TensorOperator", "StateVector", "assemble"]

_ZERO = LaurentPoly()


class ExactMatrix:
    """Sparse matrix with exact entries, stored as ``{row: {col: value}}``."""

    __slots__ = ("shape", "rows")

    def __init__(self, shape: tuple[int, int], rows: dict | None = None):
        self.shape = (int(shape[0]), int(shape[1]))
        self.rows: dict[int, dict[int, LaurentPoly]] = rows if rows is not None else {}

    @classmethod
    def from_triplets(cls, shape, triplets: Iterable) -> "ExactMatrix":
        rows: dict[int, dict[int, LaurentPoly]] = {}
        for i, j, v in triplets:
            if not isinstance(v, LaurentPoly):
                v = LaurentPoly.const(v)
            if v.is_zero():
                continue
            row = rows.setdefault(int(i), {})
            old = row.get(int(j))
            if old is not None:
                v = old + v
            if v.is_zero():
                row.pop(int(j), None)
                if not row:
                    del rows[int(i)]
            else:
                row[int(j)] = v
        return cls(shape, rows)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        one = LaurentPoly.const(1)
        return cls((n, n), {i: {i: one} for i in range(n)})

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def triplets(self) -> list[tuple[int, int, LaurentPoly]]:
        return [(i, j, self.rows[i][j]) for i in sorted(self.rows) for j in sorted(self.rows[i])]

    def copy(self) -> "ExactMatrix":
        return ExactMatrix(self.shape, {i: dict(r) for i, r in self.rows.items()})

    def _combine(self, other: "ExactMatrix", sign: int) -> "ExactMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            orow = out.setdefault(i, {})
            for j, v in r.items():
                old = orow.get(j)
                s = (old + v if sign > 0 else old - v) if old is not None else (v if sign > 0 else -v)
                if s.is_zero():
                    orow.pop(j, None)
                else:
                    orow[j] = s
            if not orow:
                del out[i]
        return ExactMatrix(self.shape, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return ExactMatrix(self.shape, {i: {j: -v for j, v in r.items()} for i, r in self.rows.items()})

    def scale(self, c: LaurentPoly) -> "ExactMatrix":
        if not isinstance(c, LaurentPoly):
            c = LaurentPoly.const(c)
        if c.is_zero():
            return ExactMatrix(self.shape)
        return ExactMatrix(self.shape, {i: {j: v * c for j, v in r.items()} for i, r in self.rows.items()})

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        orows = other.rows
        out: dict[int, dict[int, LaurentPoly]] = {}
        for i, r in self.rows.items():
            acc: dict[int, LaurentPoly] = {}
            for k, a in r.items():
                br = orows.get(k)
                if not br:
                    continue
                for j, b in br.items():
                    p = a * b
                    old = acc.get(j)
                    acc[j] = p if old is None else old + p
            acc = {j: v for j, v in acc.items() if not v.is_zero()}
            if acc:
                out[i] = acc
        return ExactMatrix((self.shape[0], other.shape[1]), out)

    def matvec(self, vec: list) -> list:
        if len(vec) != self.shape[1]:
            raise ValueError("dimension mismatch in matvec")
        out = [_ZERO] * self.shape[0]
        for i, r in self.rows.items():
            acc = _ZERO
            for j, a in r.items():
                x = vec[j]
                if x:
                    acc = acc + a * x
            out[i] = acc
        return out

    def rmatvec(self, vec: list) -> list:
        """Row vector times matrix."""
        if len(vec) != self.shape[0]:
            raise ValueError("dimension mismatch in rmatvec")
        out = [_ZERO] * self.shape[1]
        for i, r in self.rows.items():
            x = vec[i]
            if not x:
                continue
            for j, a in r.items():
                out[j] = out[j] + x * a
        return out

    @property
    def T(self) -> "ExactMatrix":
        out: dict[int, dict[int, LaurentPoly]] = {}
        for i, r in self.rows.items():
            for j, v in r.items():
                out.setdefault(j, {})[i] = v
        return ExactMatrix((self.shape[1], self.shape[0]), out)

    def submatrix(self, row_idx: list[int], col_idx: list[int]) -> "ExactMatrix":
        rmap = {int(r): a for a, r in enumerate(row_idx)}
        cmap = {int(c): b for b, c in enumerate(col_idx)}
        out = {}
        for i, r in self.rows.items():
            a = rmap.get(i)
            if a is None:
                continue
            sub = {cmap[j]: v for j, v in r.items() if j in cmap}
            if sub:
                out[a] = sub
        return ExactMatrix((len(row_idx), len(col_idx)), out)

    def is_zero(self) -> bool:
        return not self.rows

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def evaluate(self, unit: float) -> sps.csr_matrix:
        trip = self.triplets()
        if not trip:
            return sps.csr_matrix(self.shape)
        i, j, v = zip(*trip)
        return sps.csr_matrix(([x.evaluate(unit) for x in v], (i, j)), shape=self.shape)


def _field_kind(field: Field) -> str:
    return "exact" if field.exact else "numeric"


def assemble(field: Field, shape, rows, cols, values):
    """Build a backend matrix from coordinate data (duplicates are summed)."""
    if field.exact:
        return ExactMatrix.from_triplets(shape, zip(rows, cols, values))
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(values, dtype=np.float64)
    m = sps.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


class TensorOperator:
    """Linear operator on the configuration space of ``L`` sites.

    ``row_N``/``col_N`` name the particle sectors of the output and input
    spaces; ``None`` means the full ``2**L``-dimensional space.
    """

    __slots__ = ("matrix", "field", "L", "row_N", "col_N")

    def __init__(self, matrix, field: Field, L: int, row_N: int | None = None, col_N: int | None = None):
        self.matrix = matrix
        self.field = field
        self.L = L
        self.row_N = row_N
        self.col_N = col_N
        if self.shape != (self.row_basis.size, self.col_basis.size):
            raise ValueError(
                f"matrix shape {self.shape} does not match sectors ({row_N}, {col_N}) of L={L}"
            )

    # -- bookkeeping ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.matrix.shape)

    @property
    def row_basis(self) -> SectorBasis:
        return basis(self.L, self.row_N)

    @property
    def col_basis(self) -> SectorBasis:
        return basis(self.L, self.col_N)

    @property
    def exact(self) -> bool:
        return self.field.exact

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __repr__(self):
        return (
            f"TensorOperator(L={self.L}, rows={self.row_N}, cols={self.col_N}, "
            f"{_field_kind(self.field)}, nnz={self.nnz})"
        )

    def with_field(self, field: Field) -> "TensorOperator":
        """Same matrix, re-labelled with an equivalent field (e.g. after building with ``field.inverted()``)."""
        if field.exact != self.field.exact:
            raise ValueError("cannot relabel between exact and numeric fields")
        return TensorOperator(self.matrix, field, self.L, self.row_N, self.col_N)

    def _like(self, matrix, row_N=None, col_N=None, keep=True) -> "TensorOperator":
        if keep:
            row_N, col_N = self.row_N, self.col_N
        return TensorOperator(matrix, self.field, self.L, row_N, col_N)

    def _check_compatible(self, other: "TensorOperator"):
        if self.L != other.L or self.field.exact != other.field.exact:
            raise ValueError("operators live on different spaces or fields")

    # -- algebra -------------------------------------------------------
    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_compatible(other)
        if (self.row_N, self.col_N) != (other.row_N, other.col_N):
            raise ValueError("cannot add operators between different sectors")
        return self._like(self.matrix + other.matrix)

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_compatible(other)
        if (self.row_N, self.col_N) != (other.row_N, other.col_N):
            raise ValueError("cannot subtract operators between different sectors")
        return self._like(self.matrix - other.matrix)

    def __neg__(self):
        return self._like(-self.matrix)

    def __mul__(self, c) -> "TensorOperator":
        if isinstance(c, TensorOperator):
            raise TypeError("use @ for operator products")
        if self.field.exact:
            return self._like(self.matrix.scale(self.field.coerce(c)))
        return self._like(self.matrix * float(c))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return self.apply(other)
        if not isinstance(other, TensorOperator):
            return NotImplemented
        self._check_compatible(other)
        if self.col_N != other.row_N:
            raise ValueError(f"sector mismatch: {self.col_N} vs {other.row_N}")
        if self.field.exact:
            m = self.matrix.matmul(other.matrix)
        else:
            m = (self.matrix @ other.matrix).tocsr()
            m.eliminate_zeros()
            m.sort_indices()
        return TensorOperator(m, self.field, self.L, self.row_N, other.col_N)

    def __pow__(self, n: int) -> "TensorOperator":
        if self.row_N != self.col_N:
            raise ValueError("only square operators can be raised to a power")
        if n < 0:
            raise ValueError("negative operator power")
        result = identity(self.field, self.L, self.row_N)
        for _ in range(n):
            result = result @ self
        return result

    @property
    def T(self) -> "TensorOperator":
        m = self.matrix.T
        if not self.field.exact:
            m = m.tocsr()
            m.sort_indices()
        return TensorOperator(m, self.field, self.L, self.col_N, self.row_N)

    def apply(self, v: "StateVector") -> "StateVector":
        if v.L != self.L or v.N != self.col_N:
            raise ValueError(f"vector in sector {v.N} cannot feed operator with input sector {self.col_N}")
        if self.field.exact:
            coeffs = self.matrix.matvec(list(v.coeffs))
        else:
            coeffs = self.matrix @ np.asarray(v.coeffs, dtype=float)
        return StateVector(coeffs, self.field, self.L, self.row_N)

    def rapply(self, v: "StateVector") -> "StateVector":
        """Row-vector action ``<v| A``."""
        if v.L != self.L or v.N != self.row_N:
            raise ValueError("row vector lives in the wrong sector")
        if self.field.exact:
            coeffs = self.matrix.rmatvec(list(v.coeffs))
        else:
            coeffs = self.matrix.T @ np.asarray(v.coeffs, dtype=float)
        return StateVector(coeffs, self.field, self.L, self.col_N)

    def restrict(self, row_N: int, col_N: int | None = None) -> "TensorOperator":
        """Block between sectors ``col_N -> row_N`` of a full-space operator."""
        if self.row_N is not None or self.col_N is not None:
            raise ValueError("restrict expects a full-space operator")
        col_N = row_N if col_N is None else col_N
        rb, cb = basis(self.L, row_N), basis(self.L, col_N)
        if self.field.exact:
            m = self.matrix.submatrix(list(map(int, rb.states)), list(map(int, cb.states)))
        else:
            m = self.matrix[rb.states][:, cb.states].tocsr()
            m.sort_indices()
        return TensorOperator(m, self.field, self.L, row_N, col_N)

    # -- inspection ----------------------------------------------------
    def triplets(self) -> list[tuple[int, int, object]]:
        if self.field.exact:
            return self.matrix.triplets()
        m = self.matrix.tocoo()
        order = np.lexsort((m.col, m.row))
        return [(int(m.row[k]), int(m.col[k]), float(m.data[k])) for k in order]

    def is_zero(self) -> bool:
        if self.field.exact:
            return self.matrix.is_zero()
        return self.matrix.count_nonzero() == 0

    def max_abs(self, q: float | None = None) -> float:
        """Largest absolute entry (exact operators are evaluated at ``q``)."""
        if self.field.exact:
            if self.matrix.is_zero():
                return 0.0
            q = self.field.q_value if q is None else q
            if q is None:
                raise ValueError("need a numeric q to evaluate an exact operator")
            unit = self.field.unit_value(q)
            return max(abs(v.evaluate(unit)) for _, _, v in self.matrix.triplets())
        if self.matrix.nnz == 0:
            return 0.0
        return float(abs(self.matrix).max())

    def evaluate(self, q: float) -> "TensorOperator":
        """Numeric copy of an exact operator at asymmetry ``q``."""
        if not self.field.exact:
            return self
        m = self.matrix.evaluate(self.field.unit_value(q))
        m.sort_indices()
        return TensorOperator(m, NumericField(q), self.L, self.row_N, self.col_N)

    def to_dense(self, q: float | None = None) -> np.ndarray:
        op = self.evaluate(q if q is not None else self.field.q_value) if self.field.exact else self
        return op.matrix.toarray()

    def entry(self, row_mask: int, col_mask: int):
        """Matrix element ``<row| A |col>`` addressed by configuration masks."""
        i = self.row_basis.index(row_mask)
        j = self.col_basis.index(col_mask)
        if self.field.exact:
            return self.matrix.rows.get(i, {}).get(j, self.field.zero)
        return float(self.matrix[i, j])

    def equals(self, other: "TensorOperator", tol: float = 0.0) -> bool:
        self._check_compatible(other)
        if (self.row_N, self.col_N) != (other.row_N, other.col_N):
            return False
        diff = self - other
        if self.field.exact:
            return diff.is_zero()
        return diff.max_abs() <= tol


def identity(field: Field, L: int, N: int | None = None) -> TensorOperator:
    n = basis(L, N).size
    if field.exact:
        m = ExactMatrix.identity(n)
    else:
        m = sps.identity(n, format="csr", dtype=float)
    return TensorOperator(m, field, L, N, N)


def zero_operator(field: Field, L: int, row_N: int | None = None, col_N: int | None = None) -> TensorOperator:
    shape = (basis(L, row_N).size, basis(L, col_N).size)
    m = ExactMatrix(shape) if field.exact else sps.csr_matrix(shape, dtype=float)
    return TensorOperator(m, field, L, row_N, col_N)


class StateVector:
    """Dense coefficient vector over a sector (``N=None``: full space).

    Vectors are unnormalised unless ``normalized`` is set.
    """

    __slots__ = ("coeffs", "field", "L", "N", "normalized")

    def __init__(self, coeffs, field: Field, L: int, N: int | None = None, normalized: bool = False):
        if field.exact:
            coeffs = [c if isinstance(c, LaurentPoly) else field.coerce(c) for c in coeffs]
        else:
            coeffs = np.asarray(coeffs, dtype=float)
        if len(coeffs) != basis(L, N).size:
            raise ValueError(f"{len(coeffs)} coefficients for a space of dimension {basis(L, N).size}")
        self.coeffs = coeffs
        self.field = field
        self.L = L
        self.N = N
        self.normalized = normalized

    def __repr__(self):
        return f"StateVector(L={self.L}, N={self.N}, {_field_kind(self.field)})"

    def __len__(self):
        return len(self.coeffs)

    @property
    def basis(self) -> SectorBasis:
        return basis(self.L, self.N)

    def with_field(self, field: Field) -> "StateVector":
        if field.exact != self.field.exact:
            raise ValueError("cannot relabel between exact and numeric fields")
        return StateVector(self.coeffs, field, self.L, self.N, self.normalized)

    def coefficient(self, mask: int):
        if mask not in self.basis:
            return self.field.zero
        return self.coeffs[self.basis.index(mask)]

    def _binary(self, other: "StateVector", sign: int) -> "StateVector":
        if (self.L, self.N) != (other.L, other.N) or self.field.exact != other.field.exact:
            raise ValueError("vectors live in different spaces")
        if self.field.exact:
            c = [a + b if sign > 0 else a - b for a, b in zip(self.coeffs, other.coeffs)]
        else:
            c = self.coeffs + sign * other.coeffs
        return StateVector(c, self.field, self.L, self.N)

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __mul__(self, c) -> "StateVector":
        if self.field.exact:
            c = self.field.coerce(c)
            return StateVector([x * c for x in self.coeffs], self.field, self.L, self.N)
        return StateVector(self.coeffs * float(c), self.field, self.L, self.N)

    __rmul__ = __mul__

    def divexact(self, c) -> "StateVector":
        """Divide every coefficient by ``c`` (exact mode: checked polynomial division)."""
        if self.field.exact:
            c = self.field.coerce(c)
            return StateVector([x.divexact(c) for x in self.coeffs], self.field, self.L, self.N)
        return StateVector(self.coeffs / float(c), self.field, self.L, self.N)

    def dot(self, other: "StateVector"):
        if (self.L, self.N) != (other.L, other.N):
            raise ValueError("vectors live in different spaces")
        if self.field.exact:
            acc = self.field.zero
            for a, b in zip(self.coeffs, other.coeffs):
                if a and b:
                    acc = acc + a * b
            return acc
        return float(np.dot(self.coeffs, other.coeffs))

    def total(self):
        """``<s|v>``, the sum of all coefficients."""
        if self.field.exact:
            acc = self.field.zero
            for a in self.coeffs:
                acc = acc + a
            return acc
        return float(np.sum(self.coeffs))

    def is_zero(self) -> bool:
        if self.field.exact:
            return all(c.is_zero() for c in self.coeffs)
        return not np.any(self.coeffs)

    def max_abs(self, q: float | None = None) -> float:
        arr = self.to_array(q)
        return float(np.max(np.abs(arr))) if arr.size else 0.0

    def to_array(self, q: float | None = None) -> np.ndarray:
        if self.field.exact:
            q = self.field.q_value if q is None else q
            if q is None:
                raise ValueError("need a numeric q to evaluate an exact vector")
            unit = self.field.unit_value(q)
            return np.array([c.evaluate(unit) for c in self.coeffs], dtype=float)
        return np.asarray(self.coeffs, dtype=float)

    def evaluate(self, q: float) -> "StateVector":
        if not self.field.exact:
            return self
        return StateVector(self.to_array(q), NumericField(q), self.L, self.N, self.normalized)

    def restrict(self, N: int) -> "StateVector":
        """Projection onto the ``N``-particle sector (in sector coordinates)."""
        if not 0 <= N <= self.L:
            raise ValueError(f"particle number {N} outside 0..{self.L}")
        target = basis(self.L, N)
        if self.N is not None:
            if self.N == N:
                return self
            zero = self.field.zero
            return StateVector(
                [zero] * target.size if self.field.exact else np.zeros(target.size),
                self.field, self.L, N,
            )
        if self.field.exact:
            coeffs = [self.coeffs[int(s)] for s in target.states]
        else:
            coeffs = np.asarray(self.coeffs)[target.states]
        return StateVector(coeffs, self.field, self.L, N)

    def embed(self) -> "StateVector":
        """Re-embed a sector vector into the full space."""
        if self.N is None:
            return self
        full = basis(self.L, None).size
        if self.field.exact:
            coeffs = [self.field.zero] * full
            for s, c in zip(self.basis.states, self.coeffs):
                coeffs[int(s)] = c
        else:
            coeffs = np.zeros(full)
            coeffs[self.basis.states] = self.coeffs
        return StateVector(coeffs, self.field, self.L, None)

    def normalize(self) -> "StateVector":
        """Divide by ``<s|v>`` (numeric mode only)."""
        if self.field.exact:
            raise ValueError("exact vectors are kept unnormalised")
        tot = self.total()
        if tot == 0:
            raise ZeroDivisionError("vector has zero total weight")
        return StateVector(self.coeffs / tot, self.field, self.L, self.N, normalized=True)

    def equals(self, other: "StateVector", tol: float = 0.0) -> bool:
        diff = self - other
        if self.field.exact:
            return diff.is_zero()
        return diff.max_abs() <= tol
