"""Linear codes over GF(2^e) and the audits the protocols depend on.

A LinearCode wraps a full-row-rank generator matrix and lazily caches the
expensive audits: minimum distance d (exhaustive enumeration up to a
budget), the componentwise-product span ("square") of the code, and the
square's distance d-hat.  The square governs how much an adversarial
request mask can correlate rounds, so d and d-hat together are the
security dial the outer protocols read.

Also here: puncturing, the inductive construction of an orthonormal row
basis (self-orthogonal rows scaled to unit self-product, puncturing at
most one position per row), Reed-Solomon style evaluation codes at genus
zero, and samplers for the dual of the square.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .gf import GF, Field
from .linalg import (Matrix, Vector, pack_bits, rank_and_kernel, rref,
                     row_span_basis, unpack_bits)

DEFAULT_ENUM_LIMIT = 1 << 24


class EnumerationLimit(RuntimeError):
    """Raised when an exhaustive audit would exceed its codeword budget.

    Callers can raise the limit explicitly or fall back to
    sampled_distance_audit, which reports an estimate instead of a proof.
    """


def schur(field: Field, u: Sequence[int], v: Sequence[int]) -> Vector:
    """Componentwise product of two words."""
    if len(u) != len(v):
        raise ValueError("length mismatch in componentwise product")
    return tuple(field.mul(a, b) for a, b in zip(u, v))


class LinearCode:
    """An [n, k] linear code given by a full-row-rank generator matrix."""

    def __init__(self, generator: Matrix):
        k, n = generator.nrows, generator.ncols
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        red, pivots = rref(generator)
        if len(pivots) != k:
            raise ValueError("generator must have full row rank")
        self._generator = generator
        self._rref = Matrix(generator.field, red.rows[:k])
        self._min_distance: Optional[int] = None
        self._square: Optional["LinearCode"] = None

    @classmethod
    def from_rows(cls, field: Field, rows: Iterable[Sequence[int]]) -> "LinearCode":
        return cls(Matrix(field, tuple(tuple(r) for r in rows)))

    @property
    def field(self) -> Field:
        return self._generator.field

    @property
    def length(self) -> int:
        return self._generator.ncols

    @property
    def dimension(self) -> int:
        return self._generator.nrows

    @property
    def generator(self) -> Matrix:
        return self._generator

    def __repr__(self) -> str:
        return f"LinearCode([{self.length},{self.dimension}] over {self.field})"

    def encode(self, message: Sequence[int]) -> Vector:
        return self._generator.left_apply(message)

    def subcode(self, r: int) -> "LinearCode":
        """The subcode spanned by the first r rows of the reduced generator."""
        if not 1 <= r <= self.dimension:
            raise ValueError(f"need 1 <= r <= k, got {r}")
        return LinearCode(Matrix(self.field, self._rref.rows[:r]))

    def iter_codewords(self, limit: int = DEFAULT_ENUM_LIMIT):
        """Yield every codeword once (tuples), cheapest-change order."""
        q, k = self.field.order, self.dimension
        if q ** k > limit:
            raise EnumerationLimit(
                f"{q}^{k} codewords exceed the enumeration budget {limit}")
        f = self.field
        rows = self._generator.rows
        word = [0] * self.length
        digits = [0] * k
        yield tuple(word)
        total = q ** k
        for _ in range(total - 1):
            pos = 0
            while True:
                old = digits[pos]
                new = (old + 1) % q
                digits[pos] = new
                delta = old ^ new
                row = rows[pos]
                for i in range(self.length):
                    if row[i]:
                        word[i] ^= f.mul(delta, row[i])
                if new != 0:
                    break
                pos += 1
            yield tuple(word)

    def min_distance(self, limit: int = DEFAULT_ENUM_LIMIT) -> int:
        """Exact minimum distance by codeword enumeration (cached).

        Binary codes walk messages in Gray-code order over packed rows;
        the general case uses the incremental odometer of iter_codewords.
        Raises EnumerationLimit when q^k exceeds the budget.
        """
        if self._min_distance is not None:
            return self._min_distance
        q, k, n = self.field.order, self.dimension, self.length
        if q ** k > limit:
            raise EnumerationLimit(
                f"{q}^{k} codewords exceed the enumeration budget {limit}; "
                "raise the limit or use sampled_distance_audit")
        if q == 2:
            rows = [pack_bits(r) for r in self._generator.rows]
            best = n
            word = 0
            for m in range(1, 1 << k):
                word ^= rows[(m & -m).bit_length() - 1]
                w = word.bit_count()
                if w < best:
                    best = w
        else:
            best = n
            for word in self.iter_codewords(limit):
                w = sum(1 for a in word if a)
                if 0 < w < best:
                    best = w
        self._min_distance = best
        return best

    def schur_square(self) -> "LinearCode":
        """The span of all componentwise products of codeword pairs (cached).

        Computed from the generator: products of generator-row pairs
        (i <= j) span the same space by bilinearity, and the result is
        row-reduced to a canonical basis.
        """
        if self._square is not None:
            return self._square
        f = self.field
        rows = self._generator.rows
        prods = [schur(f, rows[i], rows[j])
                 for i in range(len(rows)) for j in range(i, len(rows))]
        basis = row_span_basis(f, prods)
        self._square = LinearCode(Matrix(f, basis))
        return self._square

    def square_distance(self, limit: int = DEFAULT_ENUM_LIMIT) -> int:
        return self.schur_square().min_distance(limit)

    def dual_basis(self) -> tuple[Vector, ...]:
        """Deterministic basis of the dual code {v : G v = 0}."""
        _, kernel = rank_and_kernel(self._generator)
        return kernel

    def audit(self, limit: int = DEFAULT_ENUM_LIMIT) -> "CodeAudit":
        sq = self.schur_square()
        return CodeAudit(d=self.min_distance(limit),
                         d_hat=sq.min_distance(limit),
                         square_dim=sq.dimension)

    def _adopt_distance(self, d: int) -> None:
        """Install a distance known exactly by construction (write-once)."""
        if self._min_distance is None:
            self._min_distance = d


@dataclass(frozen=True)
class CodeAudit:
    d: int
    d_hat: int
    square_dim: int


@dataclass(frozen=True)
class DistanceEstimate:
    """Result of a sampling audit: an upper bound on d, not a proof.

    smallest_weight is the lightest nonzero codeword seen among `samples`
    uniform draws.  coverage is the chance that any one fixed nonzero
    codeword shows up at least once in that many draws; when the code is
    far larger than the sample budget, coverage is small and the estimate
    is correspondingly weak.
    """
    smallest_weight: int
    samples: int
    coverage: float


def sampled_distance_audit(code: LinearCode, samples: int,
                           rng: np.random.Generator) -> DistanceEstimate:
    f, k, n = code.field, code.dimension, code.length
    best = n
    for _ in range(samples):
        while True:
            msg = tuple(int(a) for a in rng.integers(0, f.order, size=k))
            if any(msg):
                break
        w = sum(1 for a in code.encode(msg) if a)
        best = min(best, w)
    total = float(f.order) ** k - 1
    coverage = 1.0 - (1.0 - 1.0 / total) ** samples
    return DistanceEstimate(best, samples, coverage)


def min_distance(code: LinearCode, limit: int = DEFAULT_ENUM_LIMIT) -> int:
    return code.min_distance(limit)


def schur_square(code: LinearCode) -> LinearCode:
    return code.schur_square()


def puncture(code: LinearCode, positions: Iterable[int],
             limit: int = DEFAULT_ENUM_LIMIT) -> LinearCode:
    """Delete the given coordinates.

    Requires |positions| < d so the projection is injective on the code
    and the dimension is preserved (checked: d is enumerated if not
    already cached).
    """
    pos = sorted(set(positions))
    n = code.length
    for p in pos:
        if not 0 <= p < n:
            raise ValueError(f"position {p} out of range for length {n}")
    d = code.min_distance(limit)
    if len(pos) >= d:
        raise ValueError(
            f"cannot puncture {len(pos)} positions: minimum distance is {d}")
    return LinearCode(code.generator.drop_columns(pos))


class OrthonormalCode:
    """A code together with a spanning row basis H satisfying H H^T = I."""

    def __init__(self, rows: Matrix):
        f = rows.field
        r = rows.nrows
        for i in range(r):
            for j in range(i, r):
                want = 1 if i == j else 0
                if f.dot(rows.rows[i], rows.rows[j]) != want:
                    raise ValueError("rows are not orthonormal")
        self.rows = rows
        self.base = LinearCode(rows)

    @property
    def field(self) -> Field:
        return self.rows.field

    @property
    def length(self) -> int:
        return self.rows.ncols

    @property
    def dimension(self) -> int:
        return self.rows.nrows

    def __repr__(self) -> str:
        return (f"OrthonormalCode([{self.length},{self.dimension}] "
                f"over {self.field})")


def orthonormalize(code: LinearCode) -> tuple[OrthonormalCode, tuple[int, ...]]:
    """Build an orthonormal spanning basis, puncturing where forced.

    Inductive construction over the reduced generator's rows: each new row
    is made orthogonal to the settled ones via inner products on the
    surviving positions; a zero self-product is repaired by puncturing
    that row's pivot column (the candidate always has a 1 there, and the
    settled rows have 0, so nothing established is disturbed); the row is
    then scaled by the inverse square root of its self-product.  At most
    one position is punctured per row, so at most r = dim(code) in total.
    A minimum distance d > r guarantees a priori that puncturing cannot
    cost dimension; the postcondition (exact orthonormality, which forces
    independence) is checked unconditionally on the result.

    Returns (orthonormal code on the surviving positions, punctured
    positions in the original indexing, ascending).
    """
    f = code.field
    red, pivots = rref(code.generator)
    brows = [list(r) for r in red.rows[:code.dimension]]
    n = code.length
    dropped: set[int] = set()
    settled: list[list[int]] = []

    def kept_dot(u: Sequence[int], v: Sequence[int]) -> int:
        acc = 0
        for i in range(n):
            if i not in dropped:
                acc ^= f.mul(u[i], v[i])
        return acc

    for step, brow in enumerate(brows):
        cand = list(brow)
        for h in settled:
            lam = kept_dot(cand, h)
            if lam:
                for i in range(n):
                    cand[i] ^= f.mul(lam, h[i])
        nrm = kept_dot(cand, cand)
        if nrm == 0:
            dropped.add(pivots[step])
            nrm = kept_dot(cand, cand)
            if nrm == 0:
                raise AssertionError("pivot puncture failed to fix self-product")
        scale = f.inv(f.sqrt(nrm))
        settled.append([f.mul(scale, a) for a in cand])

    punctured = tuple(sorted(dropped))
    hmat = Matrix(f, tuple(tuple(r) for r in settled)).drop_columns(punctured)
    return OrthonormalCode(hmat), punctured


def rs_code(field: Field, deg_g: int,
            points: Optional[Sequence[int]] = None) -> LinearCode:
    """Evaluation code of polynomials of degree <= deg_g at distinct points.

    Default evaluation points are all q - 1 nonzero field elements in
    discrete-log order.  k = deg_g + 1, and d = n - deg_g exactly (the
    code is MDS), which is installed into the distance cache.
    """
    if points is None:
        points = [field.alpha_power(i) for i in range(field.order - 1)]
    points = [field.check(p) for p in points]
    n = len(points)
    if len(set(points)) != n:
        raise ValueError("evaluation points must be distinct")
    if not 0 <= deg_g < n:
        raise ValueError(f"need 0 <= deg_g < n, got deg_g={deg_g}, n={n}")
    rows = tuple(tuple(field.pow(p, j) for p in points)
                 for j in range(deg_g + 1))
    code = LinearCode(Matrix(field, rows))
    code._adopt_distance(n - deg_g)
    return code


def square_dual_sample(code: LinearCode, rng: np.random.Generator) -> Vector:
    """A uniform element of the dual of the code's square.

    Raises ValueError when the square is the full space (trivial dual):
    the request mask would then be constant zero and the outer protocol
    degenerates.
    """
    sq = code.schur_square()
    _, kernel = rank_and_kernel(sq.generator)
    if not kernel:
        raise ValueError(
            "the square spans the full space; its dual is trivial")
    f = code.field
    coeffs = rng.integers(0, f.order, size=len(kernel))
    acc = [0] * code.length
    for c, kv in zip(coeffs, kernel):
        c = int(c)
        if c:
            for i, a in enumerate(kv):
                acc[i] ^= f.mul(c, a)
    return tuple(acc)


@dataclass(frozen=True)
class UniformityCheck:
    statistic: float
    dof: int
    samples: int
    cells: int


def projection_uniformity_check(code: LinearCode, positions: Sequence[int],
                                samples: int,
                                rng: np.random.Generator) -> UniformityCheck:
    """Chi-square statistic of dual-of-square samples projected on positions.

    Under the uniform hypothesis the statistic is chi-square with
    q^|positions| - 1 degrees of freedom.  Projection cells are capped at
    2^20 and |positions| at 20.
    """
    q = code.field.order
    if len(positions) > 20 or q ** len(positions) > 1 << 20:
        raise ValueError("projection too wide to tabulate")
    for p in positions:
        if not 0 <= p < code.length:
            raise ValueError(f"position {p} out of range")
    cells = q ** len(positions)
    counts = np.zeros(cells, dtype=np.int64)
    for _ in range(samples):
        u = square_dual_sample(code, rng)
        idx = 0
        for p in positions:
            idx = idx * q + u[p]
        counts[idx] += 1
    expected = samples / cells
    stat = float(((counts - expected) ** 2 / expected).sum()) if samples else 0.0
    return UniformityCheck(statistic=stat, dof=cells - 1,
                           samples=samples, cells=cells)


def random_code(field: Field, n: int, k: int,
                rng: np.random.Generator) -> LinearCode:
    """A uniformly random [n, k] code (full-rank generator by rejection)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    while True:
        rows = tuple(tuple(int(a) for a in rng.integers(0, field.order, size=n))
                     for _ in range(k))
        m = Matrix(field, rows)
        if len(rref(m)[1]) == k:
            return LinearCode(m)


@dataclass(frozen=True)
class SearchHit:
    code: LinearCode
    d: int
    d_hat: int


def search_codes(field: Field, n: int, k: int, tries: int,
                 rng: np.random.Generator,
                 limit: int = DEFAULT_ENUM_LIMIT) -> list[SearchHit]:
    """Sample random [n, k] codes and audit (d, d_hat) for each.

    Returns hits sorted by d_hat then d, best first.  This is the
    pragmatic search loop for finding codes whose square keeps a usable
    distance; no structure is imposed on the draws.
    """
    hits = []
    for _ in range(tries):
        c = random_code(field, n, k, rng)
        hits.append(SearchHit(c, c.min_distance(limit), c.square_distance(limit)))
    hits.sort(key=lambda h: (h.d_hat, h.d), reverse=True)
    return hits


def cyclic_code(field: Field, n: int, gen_coeffs: Sequence[int]) -> LinearCode:
    """Cyclic code of length n from generator polynomial coefficients.

    gen_coeffs[i] is the coefficient of x^i; the generator matrix rows are
    the first n - deg shifts of the polynomial.  The polynomial must
    divide x^n - 1 is not checked here; rank is.
    """
    coeffs = [field.check(c) for c in gen_coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        raise ValueError("zero generator polynomial")
    deg = len(coeffs) - 1
    if deg >= n:
        raise ValueError("generator polynomial degree must be below n")
    k = n - deg
    rows = []
    for s in range(k):
        row = [0] * n
        for i, c in enumerate(coeffs):
            row[s + i] = c
        rows.append(tuple(row))
    return LinearCode(Matrix(field, tuple(rows)))


def code_to_json(code: LinearCode,
                 audit: Optional[CodeAudit] = None) -> dict:
    obj = {
        "field_degree": code.field.degree,
        "n": code.length,
        "k": code.dimension,
        "generator": [a for row in code.generator.rows for a in row],
    }
    if audit is not None:
        obj["audit"] = {"d": audit.d, "d_hat": audit.d_hat,
                        "square_dim": audit.square_dim}
    return obj


def code_from_json(obj: dict) -> tuple[LinearCode, Optional[CodeAudit]]:
    field = GF(int(obj["field_degree"]))
    n, k = int(obj["n"]), int(obj["k"])
    entries = list(obj["generator"])
    if len(entries) != n * k:
        raise ValueError("generator entry count does not match n*k")
    it = iter(entries)
    rows = tuple(tuple(next(it) for _ in range(n)) for _ in range(k))
    code = LinearCode(Matrix(field, rows))
    audit = None
    if "audit" in obj and obj["audit"] is not None:
        a = obj["audit"]
        audit = CodeAudit(d=int(a["d"]), d_hat=int(a["d_hat"]),
                          square_dim=int(a["square_dim"]))
    return code, audit
