"""Dense linear algebra over GF(2^e).

Matrices are immutable (tuple-of-tuples storage) and carry their field.
Row reduction uses lowest-index pivot selection so every reduced form,
rank, kernel basis, and sampled solution is reproducible bit for bit.
These are reference-grade dense routines; the few hot loops elsewhere in
the package pack GF(2) rows into ints instead of going through here.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .gf import Field

Vector = tuple  # length-n tuple of field elements (ints)


class DimensionMismatch(ValueError):
    pass


class InconsistentSystem(ValueError):
    pass


class Matrix:
    """Immutable dense matrix over a GF(2^e) field."""

    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field: Field, rows: Iterable[Sequence[int]],
                 ncols: int | None = None):
        rows = tuple(tuple(field.check(a) for a in row) for row in rows)
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise DimensionMismatch("ragged rows")
            if ncols is not None and ncols != width:
                raise DimensionMismatch("ncols hint does not match rows")
        else:
            width = 0 if ncols is None else ncols
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nrows", len(rows))
        object.__setattr__(self, "ncols", width)
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # -- constructors ----------------------------------------------------

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        return cls(field, tuple(tuple(1 if i == j else 0 for j in range(n))
                                for i in range(n)))

    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int) -> "Matrix":
        return cls(field, tuple((0,) * ncols for _ in range(nrows)),
                   ncols=ncols)

    @classmethod
    def from_columns(cls, field: Field, cols: Sequence[Sequence[int]]) -> "Matrix":
        return cls(field, tuple(zip(*cols))) if cols else cls(field, ())

    # -- basic ops -------------------------------------------------------

    def row(self, i: int) -> Vector:
        return self.rows[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def transpose(self) -> "Matrix":
        return Matrix(self.field, tuple(zip(*self.rows)) if self.rows else (),
                      ncols=self.nrows)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.field != other.field:
            raise DimensionMismatch("field mismatch")
        if self.ncols != other.nrows:
            raise DimensionMismatch(
                f"cannot multiply {self.nrows}x{self.ncols} by "
                f"{other.nrows}x{other.ncols}")
        f = self.field
        ocols = other.transpose().rows
        return Matrix(f, tuple(tuple(f.dot(r, c) for c in ocols)
                               for r in self.rows))

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.field != other.field:
            raise DimensionMismatch("field mismatch")
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise DimensionMismatch("shape mismatch in addition")
        return Matrix(self.field,
                      tuple(tuple(a ^ b for a, b in zip(r1, r2))
                            for r1, r2 in zip(self.rows, other.rows)))

    def scale(self, c: int) -> "Matrix":
        f = self.field
        f.check(c)
        return Matrix(f, tuple(tuple(f.mul(c, a) for a in r) for r in self.rows))

    def apply(self, v: Sequence[int]) -> Vector:
        """Matrix-vector product A v."""
        if len(v) != self.ncols:
            raise DimensionMismatch(f"expected length {self.ncols}, got {len(v)}")
        f = self.field
        return tuple(f.dot(r, v) for r in self.rows)

    def left_apply(self, v: Sequence[int]) -> Vector:
        """Vector-matrix product v A."""
        if len(v) != self.nrows:
            raise DimensionMismatch(f"expected length {self.nrows}, got {len(v)}")
        f = self.field
        return tuple(f.dot(v, col) for col in zip(*self.rows))

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.field != other.field or (self.nrows and other.nrows
                                         and self.ncols != other.ncols):
            raise DimensionMismatch("vstack shape mismatch")
        width = self.ncols if self.nrows else other.ncols
        return Matrix(self.field, self.rows + other.rows, ncols=width)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.field != other.field or self.nrows != other.nrows:
            raise DimensionMismatch("hstack shape mismatch")
        return Matrix(self.field, tuple(a + b for a, b in
                                        zip(self.rows, other.rows)))

    def drop_columns(self, positions: Iterable[int]) -> "Matrix":
        drop = set(positions)
        keep = [j for j in range(self.ncols) if j not in drop]
        return Matrix(self.field,
                      tuple(tuple(r[j] for j in keep) for r in self.rows),
                      ncols=len(keep))

    def is_zero(self) -> bool:
        return all(all(a == 0 for a in r) for r in self.rows)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix) and self.field == other.field
                and self.rows == other.rows
                and self.ncols == other.ncols)

    def __hash__(self) -> int:
        return hash((self.field, self.nrows, self.ncols, self.rows))

    def __reduce__(self):
        # __slots__ plus the immutability guard break the default pickle
        # path, and worker pools need to ship matrices across processes.
        return (Matrix, (self.field, self.rows, self.ncols))

    def __repr__(self) -> str:
        return f"Matrix({self.field}, {self.nrows}x{self.ncols})"

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "field_degree": self.field.degree,
            "rows": self.nrows,
            "cols": self.ncols,
            "entries": [a for row in self.rows for a in row],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Matrix":
        from .gf import GF
        field = GF(int(obj["field_degree"]))
        nrows, ncols = int(obj["rows"]), int(obj["cols"])
        entries = list(obj["entries"])
        if len(entries) != nrows * ncols:
            raise DimensionMismatch("entry count does not match rows*cols")
        it = iter(entries)
        return cls(field, tuple(tuple(next(it) for _ in range(ncols))
                                for _ in range(nrows)))


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form with lowest-index pivot selection.

    Returns (reduced matrix, pivot column indices).  Deterministic: for
    each column, the first not-yet-used row with a nonzero entry becomes
    the pivot row.
    """
    f = m.field
    rows = [list(r) for r in m.rows]
    pivots = []
    pr = 0
    for col in range(m.ncols):
        sel = None
        for i in range(pr, len(rows)):
            if rows[i][col]:
                sel = i
                break
        if sel is None:
            continue
        rows[pr], rows[sel] = rows[sel], rows[pr]
        inv = f.inv(rows[pr][col])
        rows[pr] = [f.mul(inv, a) for a in rows[pr]]
        for i in range(len(rows)):
            if i != pr and rows[i][col]:
                c = rows[i][col]
                rows[i] = [a ^ f.mul(c, b) for a, b in zip(rows[i], rows[pr])]
        pivots.append(col)
        pr += 1
        if pr == len(rows):
            break
    return Matrix(f, tuple(tuple(r) for r in rows), ncols=m.ncols), tuple(pivots)


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def rank_and_kernel(m: Matrix) -> tuple[int, tuple[Vector, ...]]:
    """Rank and a deterministic kernel basis of {v : M v = 0}.

    One basis vector per free column, in ascending free-column order: the
    vector has 1 at its free column and the matching reduced-form entry at
    each pivot column (char 2, so no sign fix-up).
    """
    red, pivots = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivot_set:
            continue
        v = [0] * m.ncols
        v[free] = 1
        for i, p in enumerate(pivots):
            v[p] = red.rows[i][free]
        basis.append(tuple(v))
    return len(pivots), tuple(basis)


def row_span_basis(field: Field, rows: Iterable[Sequence[int]]) -> tuple[Vector, ...]:
    """Reduced basis (nonzero RREF rows) of the span of the given rows."""
    m = Matrix(field, tuple(tuple(r) for r in rows))
    if m.nrows == 0:
        return ()
    red, pivots = rref(m)
    return red.rows[: len(pivots)]


def solve_affine(m: Matrix, b: Sequence[int], rng: np.random.Generator) -> Vector:
    """A uniform sample from {v : M v = b}.

    Raises DimensionMismatch when b has the wrong length and
    InconsistentSystem when the system has no solution.  Sampling is the
    deterministic particular solution (free variables zero) plus a
    uniformly random kernel combination drawn from rng, which makes the
    output uniform over the full solution coset.
    """
    if len(b) != m.nrows:
        raise DimensionMismatch(f"expected length {m.nrows}, got {len(b)}")
    f = m.field
    particular = [0] * m.ncols
    if m.nrows:
        aug = Matrix(f, tuple(row + (f.check(bi),)
                              for row, bi in zip(m.rows, b)))
        red, pivots = rref(aug)
        if m.ncols in pivots:
            raise InconsistentSystem("no solution: contradictory row")
        for i, p in enumerate(pivots):
            particular[p] = red.rows[i][m.ncols]
    _, kernel = rank_and_kernel(m)
    if kernel:
        coeffs = rng.integers(0, f.order, size=len(kernel))
        for c, kv in zip(coeffs, kernel):
            c = int(c)
            if c:
                for i, a in enumerate(kv):
                    particular[i] ^= f.mul(c, a)
    return tuple(particular)


# -- packed GF(2) helpers used by the enumeration-heavy callers ----------

def pack_bits(bits: Sequence[int]) -> int:
    """Pack a 0/1 sequence into an int, bit i = bits[i]."""
    acc = 0
    for i, b in enumerate(bits):
        if b:
            acc |= 1 << i
    return acc


def unpack_bits(x: int, n: int) -> tuple:
    return tuple((x >> i) & 1 for i in range(n))


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank of packed GF(2) rows."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead in basis:
                r ^= basis[lead]
            else:
                basis[lead] = r
                break
    return len(basis)
