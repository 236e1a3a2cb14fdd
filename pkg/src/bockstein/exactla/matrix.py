"""Sparse exact matrices in coordinate form."""
from .coefficients import Coefficients


class ExactMatrix:
    """An ``nrows x ncols`` matrix over a :class:`Coefficients` context.

    Only nonzero entries are stored, already reduced to canonical form.
    Vectors multiply on the left: a map R^m -> R^n is an m x n matrix.
    """

    __slots__ = ("nrows", "ncols", "coeffs", "_entries")

    def __init__(self, nrows, ncols, coeffs, entries=None):
        if not isinstance(coeffs, Coefficients):
            raise TypeError("coeffs must be a Coefficients instance")
        self.nrows = nrows
        self.ncols = ncols
        self.coeffs = coeffs
        self._entries = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError((i, j))
            v = coeffs.reduce(v)
            if v:
                self._entries[i, j] = v

    @classmethod
    def from_rows(cls, rows, coeffs, ncols=None):
        rows = list(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                if v:
                    entries[i, j] = v
        return cls(len(rows), ncols, coeffs, entries)

    @classmethod
    def zeros(cls, nrows, ncols, coeffs):
        return cls(nrows, ncols, coeffs)

    @classmethod
    def identity(cls, n, coeffs):
        return cls(n, n, coeffs, {(i, i): 1 for i in range(n)})

    @property
    def shape(self):
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        return self._entries.get(ij, 0)

    def items(self):
        return self._entries.items()

    def nnz(self):
        return len(self._entries)

    def rows(self):
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def row(self, i):
        out = [0] * self.ncols
        for (a, j), v in self._entries.items():
            if a == i:
                out[j] = v
        return out

    def transpose(self):
        return ExactMatrix(self.ncols, self.nrows, self.coeffs,
                           {(j, i): v for (i, j), v in self._entries.items()})

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row = {}
        for (k, j), v in other._entries.items():
            by_row.setdefault(k, []).append((j, v))
        acc = {}
        for (i, k), a in self._entries.items():
            for j, b in by_row.get(k, ()):
                acc[i, j] = acc.get((i, j), 0) + a * b
        return ExactMatrix(self.nrows, other.ncols, self.coeffs, acc)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        acc = dict(self._entries)
        for ij, v in other._entries.items():
            acc[ij] = acc.get(ij, 0) + v
        return ExactMatrix(self.nrows, self.ncols, self.coeffs, acc)

    def __neg__(self):
        return ExactMatrix(self.nrows, self.ncols, self.coeffs,
                           {ij: -v for ij, v in self._entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return ExactMatrix(self.nrows, self.ncols, self.coeffs,
                           {ij: c * v for ij, v in self._entries.items()})

    def is_zero(self):
        return not self._entries

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.shape == other.shape and self.coeffs == other.coeffs
                and self._entries == other._entries)

    def __hash__(self):
        return hash((self.shape, frozenset(self._entries.items())))

    def __repr__(self):
        return f"ExactMatrix({self.rows()!r}, {self.coeffs.describe()})"
