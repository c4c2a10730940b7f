"""GF(2^q) arithmetic and dense linear algebra over binary extension fields.

Field elements are integers in [0, 2^q - 1]; bit i is the coefficient of
x^i in the polynomial basis.  Addition is XOR.  Multiplication uses
log/antilog tables for q <= 16 and a vectorized shift-and-reduce loop for
larger q (tables for q > 16 would need hundreds of MB).

One canonical primitive polynomial is fixed per q so that every run and
every machine produces bit-identical matrices.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .errors import ContractError

# Primitive polynomial per bit width, full integer including the x^q term.
# Standard minimal-weight primitive polynomials (Zierler/Watson tables, the
# same choices made by zfec/pyfinite-style libraries).
PRIMITIVE_POLY = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
    17: 0x20009,
    18: 0x40081,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x1000087,
    25: 0x2000009,
    26: 0x4000047,
    27: 0x8000027,
    28: 0x10000009,
    29: 0x20000005,
    30: 0x40800007,
    31: 0x80000009,
    32: 0x100400007,
}

_TABLE_LIMIT = 16  # build log/exp tables up to this q

ArrayLike = Union[int, np.ndarray, Sequence[int]]


class Field:
    """Arithmetic in GF(2^q) for 1 <= q <= 32, vectorized over numpy arrays."""

    def __init__(self, q: int):
        if not 1 <= q <= 32:
            raise ContractError(f"field bit width must be in [1, 32], got {q}")
        self.q = q
        self.order = 1 << q
        self.poly = PRIMITIVE_POLY[q]
        self._mask = self.order - 1
        if q <= _TABLE_LIMIT:
            self._build_tables()
        else:
            self._exp = None
            self._log = None

    def _build_tables(self) -> None:
        n = self.order - 1
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.poly
        if x != 1:
            raise AssertionError(f"polynomial {self.poly:#x} is not primitive for q={self.q}")
        exp[n:] = exp[:n]  # avoid the mod in mul
        self._exp = exp
        self._log = log

    # -- scalar/array ops ---------------------------------------------------

    def add(self, a: ArrayLike, b: ArrayLike):
        return np.bitwise_xor(a, b)

    def mul(self, a: ArrayLike, b: ArrayLike):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._exp is not None:
            out = self._exp[self._log[a] + self._log[b]]
            out = np.where((a == 0) | (b == 0), 0, out)
        else:
            out = self._mul_shift_reduce(a, b)
        return out if out.ndim else int(out)

    def _mul_shift_reduce(self, a: np.ndarray, b: np.ndarray):
        a = a.astype(np.uint64)
        b = b.astype(np.uint64)
        acc = np.zeros(np.broadcast(a, b).shape, dtype=np.uint64)
        for i in range(self.q):
            bit = (b >> np.uint64(i)) & np.uint64(1)
            acc ^= bit * (a << np.uint64(i))
        poly = np.uint64(self.poly)
        for i in range(2 * self.q - 2, self.q - 1, -1):
            bit = (acc >> np.uint64(i)) & np.uint64(1)
            acc ^= bit * (poly << np.uint64(i - self.q))
        return acc.astype(np.int64)

    def inv(self, a: ArrayLike):
        arr = np.asarray(a, dtype=np.int64)
        if np.any(arr == 0):
            raise ContractError("inversion of 0 in a finite field")
        if self._exp is not None:
            n = self.order - 1
            out = self._exp[(n - self._log[arr]) % n]
        else:
            out = self._pow(arr, self.order - 2)
        return out if out.ndim else int(out)

    def _pow(self, a: np.ndarray, e: int):
        result = np.ones_like(a)
        base = a
        while e:
            if e & 1:
                result = np.asarray(self.mul(result, base))
            base = np.asarray(self.mul(base, base))
            e >>= 1
        return result

    def random_nonzero(self, shape, rng: np.random.Generator) -> np.ndarray:
        """Uniform draws over the nonzero field elements."""
        return rng.integers(1, self.order, size=shape, dtype=np.int64)


def field_arithmetic(field: Field, a: int, b: int, op: str) -> int:
    """Single dispatch point for {add, mul, inv} (inv ignores b)."""
    if op == "add":
        return int(field.add(a, b))
    if op == "mul":
        return int(field.mul(a, b))
    if op == "inv":
        return int(field.inv(a))
    raise ContractError(f"unknown op {op!r}")


def random_matrix(field: Field, rows: int, cols: int, seed) -> np.ndarray:
    """(rows x cols) matrix of uniform nonzero entries, deterministic in seed."""
    if rows < 1 or cols < 1:
        raise ContractError("matrix dimensions must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return field.random_nonzero((rows, cols), rng)


class IncrementalRref(object):
    """Row-reduced basis maintained incrementally, for rank and row-space queries.

    Rows are XOR-combined under `field`; pivots use the first nonzero column
    (there is no pivot magnitude in a finite field).  `ops` may be any object
    with mul/inv/add quacking like Field, so the same eliminator serves the
    prime-field baseline codes.
    """

    def __init__(self, ncols: int, field):
        self.ncols = ncols
        self.field = field
        self.rows: dict[int, np.ndarray] = {}  # pivot col -> monic row

    def _reduce(self, row: np.ndarray) -> np.ndarray:
        f = self.field
        row = row.copy()
        while True:
            nz = np.nonzero(row)[0]
            if nz.size == 0:
                return row
            lead = int(nz[0])
            pivot_row = self.rows.get(lead)
            if pivot_row is None:
                return row
            coeff = row[lead]
            row = f.sub(row, f.mul(coeff, pivot_row)) if hasattr(f, "sub") \
                else np.bitwise_xor(row, f.mul(coeff, pivot_row))

    def add_row(self, row: np.ndarray):
        """Insert a row; returns its pivot column or None if dependent."""
        f = self.field
        row = self._reduce(np.asarray(row, dtype=np.int64))
        nz = np.nonzero(row)[0]
        if nz.size == 0:
            return None
        lead = int(nz[0])
        row = np.asarray(f.mul(f.inv(row[lead]), row))
        for col, other in self.rows.items():
            c = other[lead]
            if c:
                self.rows[col] = f.sub(other, f.mul(c, row)) if hasattr(f, "sub") \
                    else np.bitwise_xor(other, f.mul(c, row))
        self.rows[lead] = row
        return lead

    @property
    def rank(self) -> int:
        return len(self.rows)

    def contains(self, vec: np.ndarray) -> bool:
        """True iff vec lies in the span of the inserted rows."""
        return not np.any(self._reduce(np.asarray(vec, dtype=np.int64)))


def matrix_rank(field: Field, m: np.ndarray) -> int:
    """Rank over GF(2^q) by forward Gaussian elimination (first-nonzero
    pivoting; the elimination of each column is one vectorized row update)."""
    m = np.array(m, dtype=np.int64)
    rows, cols = m.shape if m.ndim == 2 else (0, 0)
    if rows == 0 or cols == 0:
        return 0
    r = 0
    for c in range(cols):
        pivots = np.nonzero(m[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + int(pivots[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        below = m[r + 1:]
        nz = np.nonzero(below[:, c])[0]
        if nz.size:
            factors = np.asarray(field.mul(below[nz, c], field.inv(m[r, c])))
            below[nz] = np.bitwise_xor(below[nz],
                                       np.asarray(field.mul(factors[:, None],
                                                            m[r][None, :])))
        r += 1
        if r == rows:
            break
    return r


def row_space_contains(field: Field, m: np.ndarray, v: np.ndarray) -> bool:
    """True iff v is a linear combination of the rows of m."""
    m = np.asarray(m, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if v.shape[0] != m.shape[1]:
        raise ContractError(f"vector length {v.shape[0]} != matrix cols {m.shape[1]}")
    rref = IncrementalRref(m.shape[1], field)
    for row in m:
        rref.add_row(row)
    return rref.contains(v)
