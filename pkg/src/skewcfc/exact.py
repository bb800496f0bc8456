"""Exact arithmetic over the Gaussian rationals Q(i) and dense matrices on top of it.

A :class:`GaussianRational` is stored as ``(a + b*i) / d`` with integers
``a, b`` and ``d > 0`` and ``gcd(a, b, d) == 1``, which keeps the
representation unique and the arithmetic a handful of integer operations.

:class:`Matrix` is an immutable dense matrix.  Products skip zero entries,
which matters because almost every matrix built by the solver is a
permutation-like witness.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class DimensionError(ValueError):
    """Operand shapes do not match."""


class SingularMatrixError(ValueError):
    """Inverse requested for a singular matrix."""


_SCALAR_RE = re.compile(
    r"(?P<re>[+-]?\d+(?:/\d+)?)?"
    r"(?:(?P<isign>[+-])?(?P<im>\d+(?:/\d+)?)?(?P<unit>i))?"
)


class GaussianRational:
    """An exact complex number with rational real and imaginary parts."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, re=0, im=0):
        if isinstance(re, str):
            if im != 0:
                raise TypeError("string input takes no imaginary argument")
            parsed = GaussianRational.parse(re)
            self._a, self._b, self._d = parsed._a, parsed._b, parsed._d
            return
        if isinstance(re, GaussianRational):
            re_part, im_part = re.re, re.im
        else:
            re_part, im_part = Fraction(re), Fraction(0)
        if isinstance(im, GaussianRational):
            # (x + yi) * i = -y + xi
            re_part -= im.im
            im_part += im.re
        else:
            im_part += Fraction(im)
        d = re_part.denominator * im_part.denominator // gcd(
            re_part.denominator, im_part.denominator
        )
        a = re_part.numerator * (d // re_part.denominator)
        b = im_part.numerator * (d // im_part.denominator)
        self._a, self._b, self._d = a, b, d

    @classmethod
    def _raw(cls, a: int, b: int, d: int) -> GaussianRational:
        if d < 0:
            a, b, d = -a, -b, -d
        g = gcd(a, b, d)
        if g != 1:
            a //= g
            b //= g
            d //= g
        obj = object.__new__(cls)
        obj._a, obj._b, obj._d = a, b, d
        return obj

    @classmethod
    def parse(cls, text: str) -> GaussianRational:
        """Parse literals such as ``2``, ``-1/2``, ``3/4i``, ``1/2+3/4i``, ``-i``."""
        s = "".join(text.split())
        m = _SCALAR_RE.fullmatch(s)
        if not s or m is None:
            raise ValueError(f"malformed scalar literal {text!r}")
        re_txt, isign, im_txt, unit = m.group("re", "isign", "im", "unit")
        if unit is None:
            if re_txt is None:
                raise ValueError(f"malformed scalar literal {text!r}")
            return cls(Fraction(re_txt))
        if re_txt is not None and isign is None:
            # "2i" is matched as re="2", unit="i"; re-read it as pure imaginary
            if im_txt is None:
                return cls(0, Fraction(re_txt))
            raise ValueError(f"malformed scalar literal {text!r}")
        im = Fraction(im_txt) if im_txt is not None else Fraction(1)
        if isign == "-":
            im = -im
        return cls(Fraction(re_txt) if re_txt is not None else 0, im)

    @property
    def re(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def im(self) -> Fraction:
        return Fraction(self._b, self._d)

    def conjugate(self) -> GaussianRational:
        return GaussianRational._raw(self._a, -self._b, self._d)

    def abs2(self) -> Fraction:
        """Squared modulus, exact."""
        return Fraction(self._a * self._a + self._b * self._b, self._d * self._d)

    def is_real(self) -> bool:
        return self._b == 0

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

    def __neg__(self) -> GaussianRational:
        obj = object.__new__(GaussianRational)
        obj._a, obj._b, obj._d = -self._a, -self._b, self._d
        return obj

    def __pos__(self) -> GaussianRational:
        return self

    def __add__(self, other) -> GaussianRational:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self._d == other._d:
            return GaussianRational._raw(self._a + other._a, self._b + other._b, self._d)
        return GaussianRational._raw(
            self._a * other._d + other._a * self._d,
            self._b * other._d + other._b * self._d,
            self._d * other._d,
        )

    __radd__ = __add__

    def __sub__(self, other) -> GaussianRational:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> GaussianRational:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> GaussianRational:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a1, b1, a2, b2 = self._a, self._b, other._a, other._b
        return GaussianRational._raw(a1 * a2 - b1 * b2, a1 * b2 + a2 * b1, self._d * other._d)

    __rmul__ = __mul__

    def inverse(self) -> GaussianRational:
        if not self:
            raise ZeroDivisionError("division by zero in Q(i)")
        n = self._a * self._a + self._b * self._b
        return GaussianRational._raw(self._d * self._a, -self._d * self._b, n)

    def __truediv__(self, other) -> GaussianRational:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> GaussianRational:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int) -> GaussianRational:
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        result = ONE
        for _ in range(abs(n)):
            result = result * base
        return result

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._a == other._a and self._b == other._b and self._d == other._d

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(Fraction(self._a, self._d))
        return hash((self._a, self._b, self._d))

    def __str__(self) -> str:
        re_part, im_part = self.re, self.im
        if im_part == 0:
            return str(re_part)
        if im_part == 1:
            im_txt = "i"
        elif im_part == -1:
            im_txt = "-i"
        else:
            im_txt = f"{im_part}i"
        if re_part == 0:
            return im_txt
        sign = "" if im_txt.startswith("-") else "+"
        return f"{re_part}{sign}{im_txt}"

    def __repr__(self) -> str:
        return f"GaussianRational({str(self)!r})"


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, int):
        return GaussianRational._raw(x, 0, 1)
    if isinstance(x, Fraction):
        return GaussianRational._raw(x.numerator, 0, x.denominator)
    return NotImplemented


def gq(x) -> GaussianRational:
    """Coerce ints, Fractions, strings and Gaussian rationals to a GaussianRational."""
    if isinstance(x, GaussianRational):
        return x
    return GaussianRational(x)


ZERO = GaussianRational._raw(0, 0, 1)
ONE = GaussianRational._raw(1, 0, 1)
I = GaussianRational._raw(0, 1, 1)


def field_ops(a: GaussianRational, b: GaussianRational, op: str) -> GaussianRational:
    """Dispatch one of ``+ - * /`` on two scalars."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown field operation {op!r}")


class Matrix:
    """Immutable dense matrix over Q(i).

    ``rows``/``cols`` may be zero; empty matrices behave as neutral elements
    for direct sums and yield zero matrices under products.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable] | None = None):
        if rows < 0 or cols < 0:
            raise DimensionError("negative matrix dimension")
        self.rows = rows
        self.cols = cols
        if data is None:
            self._data = tuple((ZERO,) * cols for _ in range(rows))
            return
        table = tuple(tuple(gq(x) for x in row) for row in data)
        if len(table) != rows or any(len(r) != cols for r in table):
            raise DimensionError(f"data does not have shape {rows}x{cols}")
        self._data = table

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> Matrix:
        """Build from a nested list; a ``[]`` input is the 0x0 matrix."""
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        return cls(nrows, ncols, rows)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Sequence) -> Matrix:
        """Build from a flat row-major sequence."""
        if len(entries) != rows * cols:
            raise DimensionError("entries length must equal rows*cols")
        return cls(rows, cols, [entries[i * cols:(i + 1) * cols] for i in range(rows)])

    @classmethod
    def _wrap(cls, rows: int, cols: int, table) -> Matrix:
        obj = object.__new__(cls)
        obj.rows, obj.cols, obj._data = rows, cols, tuple(tuple(r) for r in table)
        return obj

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Matrix:
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> Matrix:
        return cls._wrap(n, n, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence) -> Matrix:
        n = len(values)
        vals = [gq(v) for v in values]
        return cls._wrap(n, n, [[vals[i] if i == j else ZERO for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def entries(self) -> tuple[GaussianRational, ...]:
        """Row-major flat view."""
        return tuple(x for row in self._data for x in row)

    def row(self, i: int) -> tuple[GaussianRational, ...]:
        return self._data[i]

    def tolist(self) -> list[list[GaussianRational]]:
        return [list(r) for r in self._data]

    def __getitem__(self, idx: tuple[int, int]) -> GaussianRational:
        i, j = idx
        return self._data[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"Matrix({self.rows}x{self.cols}: [{body}])"

    def __str__(self) -> str:
        if not self.rows or not self.cols:
            return f"[empty {self.rows}x{self.cols}]"
        cells = [[str(x) for x in r] for r in self._data]
        width = max(len(c) for r in cells for c in r)
        return "\n".join("[" + " ".join(c.rjust(width) for c in r) + "]" for r in cells)

    @property
    def T(self) -> Matrix:
        return mat_transpose(self)

    def __matmul__(self, other: Matrix) -> Matrix:
        return mat_mul(self, other)

    def __add__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return Matrix._wrap(
            self.rows, self.cols,
            [[x + y for x, y in zip(r, s)] for r, s in zip(self._data, other._data)],
        )

    def __neg__(self) -> Matrix:
        return Matrix._wrap(self.rows, self.cols, [[-x for x in r] for r in self._data])

    def __sub__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> Matrix:
        c = gq(c)
        return Matrix._wrap(self.rows, self.cols, [[c * x for x in r] for r in self._data])

    def is_zero(self) -> bool:
        return not any(x for r in self._data for x in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
        return Matrix._wrap(len(rows), len(cols), [[self._data[i][j] for j in cols] for i in rows])

    def to_json(self) -> dict:
        return matrix_to_json(self)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    n = b.cols
    b_sparse = [[(j, x) for j, x in enumerate(r) if x] for r in b._data]
    out = []
    for arow in a._data:
        acc = [ZERO] * n
        for k, aik in enumerate(arow):
            if not aik:
                continue
            for j, bkj in b_sparse[k]:
                acc[j] = acc[j] + aik * bkj
        out.append(acc)
    return Matrix._wrap(a.rows, n, out)


def mat_transpose(a: Matrix) -> Matrix:
    return Matrix._wrap(a.cols, a.rows, [[a._data[i][j] for i in range(a.rows)] for j in range(a.cols)])


def mat_direct_sum(parts: Iterable[Matrix]) -> Matrix:
    parts = list(parts)
    rows = sum(p.rows for p in parts)
    cols = sum(p.cols for p in parts)
    out = []
    col_off = 0
    for p in parts:
        left = (ZERO,) * col_off
        right = (ZERO,) * (cols - col_off - p.cols)
        for r in p._data:
            out.append(left + r + right)
        col_off += p.cols
    return Matrix._wrap(rows, cols, out)


def congruence(x: Matrix, a: Matrix) -> Matrix:
    """``x^T a x``."""
    return mat_mul(mat_transpose(x), mat_mul(a, x))


def _row_echelon(rows: list[list[GaussianRational]], ncols: int) -> int:
    """In-place elimination; pivot is the first nonzero entry of each column.  Returns rank."""
    rank = 0
    nrows = len(rows)
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        prow = rows[rank]
        inv = prow[col].inverse()
        for r in range(rank + 1, nrows):
            f = rows[r][col]
            if not f:
                continue
            f = f * inv
            cur = rows[r]
            for j in range(col, ncols):
                if prow[j]:
                    cur[j] = cur[j] - f * prow[j]
        rank += 1
        if rank == nrows:
            break
    return rank


def mat_rank(a: Matrix) -> int:
    """Exact rank by Gaussian elimination; no tolerance is involved."""
    return _row_echelon(a.tolist(), a.cols)


def mat_inverse(a: Matrix) -> Matrix:
    """Exact inverse via Gauss-Jordan on ``[a | I]``."""
    if a.rows != a.cols:
        raise DimensionError("inverse of a non-square matrix")
    n = a.rows
    work = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(a._data)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        work[col], work[piv] = work[piv], work[col]
        inv = work[col][col].inverse()
        work[col] = [x * inv for x in work[col]]
        prow = work[col]
        for r in range(n):
            if r == col or not work[r][col]:
                continue
            f = work[r][col]
            work[r] = [x - f * y if y else x for x, y in zip(work[r], prow)]
    return Matrix._wrap(n, n, [r[n:] for r in work])


def mat_from_permutation(perm: Sequence[int]) -> Matrix:
    """Permutation matrix ``P`` with ``P[perm[j], j] = 1``.

    As a congruence, ``P^T A P`` has ``(i, j)`` entry ``A[perm[i], perm[j]]``,
    i.e. coordinate ``j`` of the result is coordinate ``perm[j]`` of ``A``.
    """
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(perm)} is not a permutation of 0..{n - 1}")
    out = [[ZERO] * n for _ in range(n)]
    for j, p in enumerate(perm):
        out[p][j] = ONE
    return Matrix._wrap(n, n, out)


# -- JSON interchange -------------------------------------------------------

def _frac_text(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def matrix_to_json(m: Matrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[_frac_text(x.re), _frac_text(x.im)] for x in m.entries],
    }


def matrix_from_json(obj: dict | str) -> Matrix:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if len(entries) != rows * cols:
        raise DimensionError("entries length must equal rows*cols")
    vals = []
    for pair in entries:
        if len(pair) != 2:
            raise ValueError("each entry must be a [re, im] pair")
        vals.append(GaussianRational(Fraction(pair[0]), Fraction(pair[1])))
    return Matrix.from_entries(rows, cols, vals)
