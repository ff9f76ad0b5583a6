"""Dense exact-rational matrices.

Just enough linear algebra for bit-exact verification: products, Kronecker
products, fraction-free (Bareiss) elimination for determinants and inverses,
and a square-root-free LDL^T test for positive semidefiniteness.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

__all__ = ["RationalMatrix", "SingularMatrixError"]


class SingularMatrixError(ArithmeticError):
    pass


class RationalMatrix:
    """Immutable dense matrix of ``Fraction`` entries stored row-major."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, entries: Iterable[Sequence]):
        data = tuple(tuple(Fraction(x) for x in row) for row in entries)
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0
        if any(len(r) != self.cols for r in data):
            raise ValueError("ragged rows")
        self._data = data

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "RationalMatrix":
        cols = rows if cols is None else cols
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def from_integer_array(cls, a: np.ndarray, scale: Fraction | int = 1) -> "RationalMatrix":
        scale = Fraction(scale)
        return cls([[scale * int(x) for x in row] for row in np.asarray(a)])

    @classmethod
    def block_diag(cls, blocks: Sequence["RationalMatrix"]) -> "RationalMatrix":
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        out = [[Fraction(0)] * m for _ in range(n)]
        r = c = 0
        for b in blocks:
            for i in range(b.rows):
                out[r + i][c:c + b.cols] = b._data[i]
            r += b.rows
            c += b.cols
        return cls(out)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx):
        i, j = idx
        return self._data[i][j]

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self._data], dtype=float)

    def __eq__(self, other):
        if isinstance(other, RationalMatrix):
            return self._data == other._data
        return NotImplemented

    def __hash__(self):
        return hash(self._data)

    def __repr__(self):
        if self.rows * self.cols <= 16:
            body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
            return f"RationalMatrix([{body}])"
        return f"RationalMatrix(<{self.rows}x{self.cols}>)"

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._same_shape(other)
        return RationalMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._same_shape(other)
        return RationalMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __rmul__(self, scalar) -> "RationalMatrix":
        s = Fraction(scalar)
        return RationalMatrix([[s * a for a in r] for r in self._data])

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other._data))
        return RationalMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self._data])

    def _same_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self._data)) if self.rows else self

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self._data[i][j] == self._data[j][i] for i in range(self.rows) for j in range(i)
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def kron(self, other: "RationalMatrix") -> "RationalMatrix":
        out = []
        for r in self._data:
            for s in other._data:
                out.append([a * b for a in r for b in s])
        return RationalMatrix(out)

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "RationalMatrix":
        return RationalMatrix([row[c0:c1] for row in self._data[r0:r1]])

    def common_denominator(self) -> int:
        den = 1
        for r in self._data:
            for x in r:
                den = lcm(den, x.denominator)
        return den

    def scaled_integers(self) -> tuple[int, list[list[int]]]:
        """Return ``(L, A)`` with integer ``A`` such that ``self == A / L``."""
        L = self.common_denominator()
        return L, [[int(x * L) for x in r] for r in self._data]

    def _bareiss(self, rhs: list[list[int]] | None = None):
        """Fraction-free elimination on the integer-scaled matrix.

        Returns the determinant of the scaled matrix and, if ``rhs`` is given,
        the solution of ``A X = rhs`` with ``A`` the scaled integer matrix.
        """
        n = self.rows
        if n != self.cols:
            raise ValueError("matrix must be square")
        L, A = self.scaled_integers()
        m = len(rhs[0]) if rhs else 0
        aug = [A[i] + (list(rhs[i]) if rhs else []) for i in range(n)]
        sign = 1
        prev = 1
        for k in range(n):
            piv = next((i for i in range(k, n) if aug[i][k] != 0), None)
            if piv is None:
                return L, 0, None
            if piv != k:
                aug[k], aug[piv] = aug[piv], aug[k]
                sign = -sign
            akk = aug[k][k]
            for i in range(k + 1, n):
                aik = aug[i][k]
                row_i, row_k = aug[i], aug[k]
                for j in range(k + 1, n + m):
                    row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
                row_i[k] = 0
            prev = akk
        det = sign * aug[n - 1][n - 1]
        if not rhs:
            return L, det, None
        # back substitution over the rationals on the triangular system
        X = [[Fraction(0)] * m for _ in range(n)]
        for i in range(n - 1, -1, -1):
            row = aug[i]
            for j in range(m):
                acc = Fraction(row[n + j])
                for t in range(i + 1, n):
                    if row[t]:
                        acc -= row[t] * X[t][j]
                X[i][j] = acc / row[i]
        return L, det, X

    def det(self) -> Fraction:
        L, det, _ = self._bareiss()
        return Fraction(det, L**self.rows)

    def inverse(self) -> "RationalMatrix":
        n = self.rows
        eye = [[int(i == j) for j in range(n)] for i in range(n)]
        L, det, X = self._bareiss(eye)
        if det == 0:
            raise SingularMatrixError("matrix is singular")
        # (A/L)^{-1} = L * A^{-1}
        return RationalMatrix([[L * x for x in r] for r in X])

    def is_psd(self) -> bool:
        """Exact positive-semidefiniteness via symmetric pivoted LDL^T."""
        if not self.is_symmetric():
            return False
        A = self.tolist()
        n = self.rows
        active = list(range(n))
        while active:
            k = max(active, key=lambda i: A[i][i])
            piv = A[k][k]
            if piv < 0:
                return False
            if piv == 0:
                # all remaining diagonals are <= 0; PSD only if the rest is zero
                return all(A[i][j] == 0 for i in active for j in active)
            active.remove(k)
            for i in active:
                f = A[i][k] / piv
                if f:
                    for j in active:
                        A[i][j] -= f * A[k][j]
        return True
