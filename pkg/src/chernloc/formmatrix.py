"""Matrices with FormElement entries.

Used for curvature matrices (even entries, which commute) and for
matrix-valued forms such as idempotents over a form algebra.  Entries are
kept as a tuple of row tuples; all operations return new matrices.
"""

from __future__ import annotations

from .multiform import FormElement


class FormMatrix:
    __slots__ = ("table", "rows", "shape")

    def __init__(self, table, rows):
        self.table = table
        self.rows = tuple(tuple(r) for r in rows)
        n = len(self.rows)
        m = len(self.rows[0]) if n else 0
        for r in self.rows:
            if len(r) != m:
                raise ValueError("ragged matrix")
            for e in r:
                if not isinstance(e, FormElement) or e.table is not table:
                    raise ValueError("entries must be FormElements over the table")
        self.shape = (n, m)

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, table, n, m=None):
        m = n if m is None else m
        z = table.zero()
        return cls(table, [[z] * m for _ in range(n)])

    @classmethod
    def identity(cls, table, n, scale=1):
        z = table.zero()
        s = table.scalar(scale)
        return cls(table, [[s if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_scalars(cls, table, rows):
        return cls(table, [[table.scalar(x) for x in r] for r in rows])

    @classmethod
    def parse(cls, table, rows):
        """Rows of expression strings (or numbers)."""
        out = []
        for r in rows:
            row = []
            for x in r:
                if isinstance(x, str):
                    row.append(table.parse(x))
                elif isinstance(x, FormElement):
                    row.append(x)
                else:
                    row.append(table.scalar(x))
            out.append(row)
        return cls(table, out)

    # -- access ------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def is_zero(self):
        return all(e.is_zero() for r in self.rows for e in r)

    def is_antisymmetric(self):
        n, m = self.shape
        if n != m:
            return False
        return all((self.rows[i][j] + self.rows[j][i]).is_zero()
                   for i in range(n) for j in range(n))

    # -- algebra --------------------------------------------------------------
    def __add__(self, other):
        self._compat(other)
        return FormMatrix(self.table,
                          [[a + b for a, b in zip(ra, rb)]
                           for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FormMatrix(self.table, [[-e for e in r] for r in self.rows])

    def scale(self, c):
        return FormMatrix(self.table, [[e.scale(c) for e in r] for r in self.rows])

    def scale_form(self, f):
        """Left multiplication of every entry by a form (used for sigma*p)."""
        return FormMatrix(self.table, [[f * e for e in r] for r in self.rows])

    def __matmul__(self, other):
        self._compat(other, mul=True)
        n, k = self.shape
        _, m = other.shape
        z = self.table.zero()
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = z
                for t in range(k):
                    acc = acc + self.rows[i][t] * other.rows[t][j]
                row.append(acc)
            out.append(row)
        return FormMatrix(self.table, out)

    def transpose(self):
        n, m = self.shape
        return FormMatrix(self.table,
                          [[self.rows[i][j] for i in range(n)] for j in range(m)])

    def trace(self):
        n, m = self.shape
        if n != m:
            raise ValueError("trace of a non-square matrix")
        acc = self.table.zero()
        for i in range(n):
            acc = acc + self.rows[i][i]
        return acc

    def map_entries(self, fn):
        return FormMatrix(self.table, [[fn(e) for e in r] for r in self.rows])

    def d(self):
        return self.map_entries(lambda e: e.d())

    def split_sigma(self):
        primes, seconds = [], []
        for r in self.rows:
            rp, rs = [], []
            for e in r:
                p, s = e.split_sigma()
                rp.append(p)
                rs.append(s)
            primes.append(rp)
            seconds.append(rs)
        return FormMatrix(self.table, primes), FormMatrix(self.table, seconds)

    def homogeneous_parts(self):
        """Decompose entrywise by integer degree into degree -> matrix."""
        degs = set()
        for r in self.rows:
            for e in r:
                degs.update(e.homogeneous_parts())
        out = {}
        for deg in sorted(degs):
            out[deg] = self.map_entries(
                lambda e, d=deg: e.homogeneous_parts().get(d, self.table.zero()))
        return out

    def __eq__(self, other):
        if not isinstance(other, FormMatrix):
            return NotImplemented
        return self.table is other.table and self.rows == other.rows

    def __hash__(self):
        return hash((id(self.table), self.rows))

    def _compat(self, other, mul=False):
        if not isinstance(other, FormMatrix) or other.table is not self.table:
            raise ValueError("incompatible matrices")
        if mul:
            if self.shape[1] != other.shape[0]:
                raise ValueError("shape mismatch in product")
        elif self.shape != other.shape:
            raise ValueError("shape mismatch")

    def __str__(self):
        return "[" + "; ".join(
            ", ".join(e.canonical_str() for e in r) for r in self.rows) + "]"

    __repr__ = __str__


def mat_power_series(mat, coeffs):
    """sum coeffs[k] * mat^k, truncated by nilpotency of the entries.

    ``coeffs`` maps powers to scalars; iteration stops when the running
    matrix power vanishes, so the dict may be generous.
    """
    table = mat.table
    n = mat.shape[0]
    out = FormMatrix.zero(table, n)
    if 0 in coeffs:
        out = out + FormMatrix.identity(table, n, coeffs[0])
    power = FormMatrix.identity(table, n)
    k = 0
    max_pow = max(coeffs)
    while k < max_pow:
        power = power @ mat
        k += 1
        if power.is_zero():
            break
        if k in coeffs:
            out = out + power.scale(coeffs[k])
    return out


def mat_exp_nilpotent(mat):
    """exp of a matrix whose entries all have positive form degree."""
    from fractions import Fraction
    table = mat.table
    n = mat.shape[0]
    out = FormMatrix.identity(table, n)
    power = FormMatrix.identity(table, n)
    k = 1
    fact = 1
    while True:
        power = power @ mat
        if power.is_zero():
            return out
        fact *= k
        out = out + power.scale(Fraction(1, fact))
        k += 1


def det_leibniz(mat):
    """Determinant over the commutative subalgebra spanned by the entries.

    Only valid when all entries commute (even forms), which holds for the
    quadratic-form and curvature matrices used here.
    """
    from itertools import permutations
    n, m = mat.shape
    if n != m:
        raise ValueError("determinant of a non-square matrix")
    table = mat.table
    acc = table.zero()
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        term = table.one()
        for i in range(n):
            term = term * mat.rows[i][perm[i]]
            if term.is_zero():
                break
        acc = acc + (term if sign > 0 else -term)
    return acc


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign
