"""Rate formulas and exact entropy oracles at enumerable sizes.

The rate of the duplication-based transfer is
rate_p0(phi) = phi(1-phi) (1 - h(phi^2 / (1 - 2 phi (1 - phi)))),
maximized near phi = 0.198.  Outer constructions multiply it by the outer
code rate, divide by q - 1 in the q-ary chaining, and halve it again in
the compressed ("private") variants.

The oracles enumerate every erasure pattern and every channel output of a
small binary code and compute exact posteriors: min-entropy of the
codeword given the view (against the linear-programming style bound
n[R - (1 - e/n)(1 - h(p)) - alpha]), the fixed-flip-weight variant with
its bipartite edge-degree bound, and the Shannon entropy of a hashed
secret given the view.  They exist to crosscheck the protocol-side
security accounting at desk scale, so they are deliberately independent
of the protocol implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .codes import EnumerationLimit, LinearCode
from .linalg import Matrix, pack_bits

ORACLE_VIEW_LIMIT = 1 << 24


def binary_entropy(p: float) -> float:
    """h(p) in bits; h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"entropy argument must be in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def rate_p0(phi: float) -> float:
    """Secret bits per channel bit of the duplication protocol at crossover phi."""
    if not 0.0 <= phi < 0.5:
        raise ValueError(f"crossover must be in [0, 1/2), got {phi}")
    if phi == 0.0:
        return 0.0
    eps = 2.0 * phi * (1.0 - phi)
    p = phi * phi / (1.0 - eps)
    return phi * (1.0 - phi) * (1.0 - binary_entropy(p))


def optimize_rate_p0(tol: float = 1e-6) -> tuple[float, float]:
    """Golden-section maximization of rate_p0 on (1e-4, 1/2 - 1e-4).

    Returns (phi_star, rate_star).  The rate is unimodal on the interval;
    the search is deterministic.
    """
    lo, hi = 1e-4, 0.5 - 1e-4
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = rate_p0(c), rate_p0(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = rate_p0(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = rate_p0(d)
    phi_star = (a + b) / 2.0
    return phi_star, rate_p0(phi_star)


@dataclass(frozen=True)
class RateBreakdown:
    """One outer-protocol rate chain evaluated end to end."""

    crossover: float
    erasure_rate: float
    residual_error: float
    inner_rate: float
    code_rate: float
    q: int
    outer_rate: float
    private_rate: float

    def to_json(self) -> dict:
        return {
            "crossover": self.crossover,
            "erasure_rate": self.erasure_rate,
            "residual_error": self.residual_error,
            "inner_rate": self.inner_rate,
            "code_rate": self.code_rate,
            "q": self.q,
            "outer_rate": self.outer_rate,
            "private_rate": self.private_rate,
        }


def rate_chain(code_rate: float, q: int, phi: Optional[float] = None,
               inner_rate: Optional[float] = None) -> RateBreakdown:
    """Chain the inner rate through an outer code of rate code_rate.

    The outer construction spends (q - 1) inner transfers per q-ary round,
    so outer_rate = code_rate * inner_rate / (q - 1); the compressed
    variant halves it.  With phi omitted, the optimized crossover is used.
    """
    if not 0.0 < code_rate <= 1.0:
        raise ValueError(f"code rate must be in (0, 1], got {code_rate}")
    if q < 2 or (q & (q - 1)) != 0:
        raise ValueError(f"q must be a power of two >= 2, got {q}")
    if phi is None:
        phi, r0 = optimize_rate_p0()
    else:
        r0 = rate_p0(phi)
    if inner_rate is not None:
        r0 = inner_rate
    eps = 2.0 * phi * (1.0 - phi)
    p = phi * phi / (1.0 - eps) if phi else 0.0
    outer = code_rate * r0 / (q - 1)
    return RateBreakdown(crossover=phi, erasure_rate=eps, residual_error=p,
                         inner_rate=r0, code_rate=code_rate, q=q,
                         outer_rate=outer, private_rate=outer / 2.0)


def rate_curve(phis: Sequence[float]) -> list[tuple[float, float, float]]:
    """Rows of (phi, erasure_rate, rate) for curve export."""
    rows = []
    for phi in phis:
        rows.append((phi, 2.0 * phi * (1.0 - phi), rate_p0(phi)))
    return rows


def min_entropy_bound(n: int, k: int, erasures: int, error_rate: float,
                      alpha: float) -> float:
    """n [R - (1 - e/n)(1 - h(p)) - alpha] in bits."""
    rate = k / n
    return n * (rate - (1.0 - erasures / n)
                * (1.0 - binary_entropy(error_rate)) - alpha)


def _packed_codewords(code: LinearCode, limit: int) -> np.ndarray:
    if code.field.degree != 1:
        raise ValueError("entropy oracles require a binary code")
    k = code.dimension
    if 1 << k > limit:
        raise EnumerationLimit(f"2^{k} codewords exceed the budget {limit}")
    rows = [pack_bits(r) for r in code.generator.rows]
    words = np.zeros(1 << k, dtype=np.int64)
    for i in range(k):
        step = 1 << i
        words[step: 2 * step] = words[:step] ^ rows[i]
    return words


def _popcount_table(bits: int) -> np.ndarray:
    table = np.zeros(1 << bits, dtype=np.uint8)
    for i in range(bits):
        step = 1 << i
        table[step: 2 * step] = table[:step] + 1
    return table


def _project(words: np.ndarray, kept: Sequence[int]) -> np.ndarray:
    proj = np.zeros_like(words)
    for t, pos in enumerate(kept):
        proj |= ((words >> pos) & 1) << t
    return proj


@dataclass(frozen=True)
class EntropyReport:
    """Exact conditional min-entropy census over all views of a code."""

    n: int
    k: int
    erasures: int
    error_rate: float
    alpha: float
    bound_bits: float
    violating_mass: float
    views: int
    avg_min_entropy: float
    histogram: tuple  # (lo, hi, mass) buckets over H_inf values

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "erasures": self.erasures,
            "error_rate": self.error_rate, "alpha": self.alpha,
            "bound_bits": self.bound_bits,
            "violating_mass": self.violating_mass,
            "views": self.views,
            "avg_min_entropy": self.avg_min_entropy,
            "histogram": [list(b) for b in self.histogram],
        }


def min_entropy_oracle(code: LinearCode, erasures: int, error_rate: float,
                       alpha: float,
                       limit: int = ORACLE_VIEW_LIMIT) -> EntropyReport:
    """Exhaustive H_inf(codeword | view) census for a uniform codeword.

    The view is the channel output: a uniform set of `erasures` erased
    positions and the remaining positions flipped independently with
    probability error_rate.  For every (pattern, output) pair the exact
    posterior over codewords gives H_inf = -log2 max posterior; the report
    carries the probability mass of views falling below the bound
    n[R - (1 - e/n)(1 - h(p)) - alpha], the view-average of H_inf, and a
    bucketed histogram.
    """
    n, k = code.length, code.dimension
    if not 0 <= erasures <= n:
        raise ValueError("erasure count out of range")
    if not 0.0 <= error_rate < 0.5:
        raise ValueError("error rate must be in [0, 1/2)")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    kept_count = n - erasures
    pattern_count = math.comb(n, erasures)
    if pattern_count * (1 << kept_count) > limit or 1 << k > limit:
        raise EnumerationLimit(
            f"{pattern_count} patterns x 2^{kept_count} outputs exceed the "
            f"oracle budget {limit}")
    words = _packed_codewords(code, limit)
    pop = _popcount_table(kept_count)
    bound = min_entropy_bound(n, k, erasures, error_rate, alpha)
    rho = error_rate / (1.0 - error_rate)
    pattern_w = 1.0 / pattern_count
    prior = 1.0 / (1 << k)
    keep_scale = (1.0 - error_rate) ** kept_count

    z = np.arange(1 << kept_count, dtype=np.int64)
    total_mass = 0.0
    violating = 0.0
    avg = 0.0
    bucket = 0.25
    hist: dict[int, float] = {}
    for kept in combinations(range(n), kept_count):
        proj = _project(words, kept)
        dist = pop[(proj[:, None] ^ z[None, :]) & ((1 << kept_count) - 1)]
        like = np.power(rho, dist.astype(np.float64))
        colsum = like.sum(axis=0)
        reachable = colsum > 0.0
        view_p = colsum * keep_scale * prior * pattern_w
        maxpost = np.zeros_like(colsum)
        maxpost[reachable] = like.max(axis=0)[reachable] / colsum[reachable]
        hinf = np.full_like(colsum, np.inf)
        hinf[reachable] = -np.log2(maxpost[reachable])
        total_mass += float(view_p.sum())
        violating += float(view_p[reachable & (hinf < bound)].sum())
        avg += float((view_p[reachable] * hinf[reachable]).sum())
        for b, m in zip((hinf[reachable] / bucket).astype(np.int64),
                        view_p[reachable]):
            hist[int(b)] = hist.get(int(b), 0.0) + float(m)
    if not math.isclose(total_mass, 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise AssertionError(f"posterior masses sum to {total_mass}, not 1")
    histogram = tuple(sorted((b * bucket, (b + 1) * bucket, m)
                             for b, m in hist.items()))
    # Erasure patterns with their binomial weights all share the same
    # output alphabet size, so the view count is exact.
    views = pattern_count * (1 << kept_count)
    return EntropyReport(n=n, k=k, erasures=erasures, error_rate=error_rate,
                         alpha=alpha, bound_bits=bound,
                         violating_mass=violating, views=views,
                         avg_min_entropy=avg, histogram=histogram)


@dataclass(frozen=True)
class FixedWeightBound:
    alpha: float
    threshold: float
    max_fraction: float
    aggregate_fraction: float
    bound: float


@dataclass(frozen=True)
class FixedWeightReport:
    """Census of the exact-flip-weight bipartite view graph."""

    n: int
    k: int
    erasures: int
    weight: int
    r_bits: float
    r_positive: bool
    total_edges: int
    min_degree: int
    max_degree: int
    avg_min_entropy: float
    bounds: tuple  # FixedWeightBound per alpha

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "erasures": self.erasures,
            "weight": self.weight, "r_bits": self.r_bits,
            "r_positive": self.r_positive, "total_edges": self.total_edges,
            "min_degree": self.min_degree, "max_degree": self.max_degree,
            "avg_min_entropy": self.avg_min_entropy,
            "bounds": [{"alpha": b.alpha, "threshold": b.threshold,
                        "max_fraction": b.max_fraction,
                        "aggregate_fraction": b.aggregate_fraction,
                        "bound": b.bound} for b in self.bounds],
        }


def fixed_weight_oracle(code: LinearCode, erasures: int, weight: int,
                        alphas: Sequence[float] = (1.0, 2.0, 3.0),
                        limit: int = 1 << 20) -> FixedWeightReport:
    """Exact audit of the fixed-flip-weight view graph.

    For each erasure pattern, left nodes are the 2^k codewords, right
    nodes the 2^(n-e) outputs, with an edge when the output sits at
    Hamming distance exactly `weight` from the codeword on the kept
    positions.  The posterior given an output is uniform over its degree,
    so H_inf(view) = log2 deg(view).  With
    r = k - (n - e) + log2 C(n - e, weight), the mass of edges into views
    of degree < 2^(r - alpha) is at most 2^(-alpha); the report carries
    the measured fractions (worst pattern and aggregate) per alpha.
    r <= 0 is flagged via r_positive rather than rejected.
    """
    n, k = code.length, code.dimension
    if not 0 <= erasures <= n:
        raise ValueError("erasure count out of range")
    kept_count = n - erasures
    if not 0 <= weight <= kept_count:
        raise ValueError("flip weight out of range")
    pattern_count = math.comb(n, erasures)
    per_pattern_edges = (1 << k) * math.comb(kept_count, weight)
    total_edges = pattern_count * per_pattern_edges
    if total_edges > limit:
        raise EnumerationLimit(
            f"{total_edges} edges exceed the audit budget {limit}")
    words = _packed_codewords(code, limit)
    pop = _popcount_table(kept_count)
    r_bits = k - kept_count + math.log2(math.comb(kept_count, weight))

    z = np.arange(1 << kept_count, dtype=np.int64)
    agg_bad = {float(a): 0 for a in alphas}
    max_frac = {float(a): 0.0 for a in alphas}
    min_deg, max_deg = per_pattern_edges, 0
    entropy_sum = 0.0
    for kept in combinations(range(n), kept_count):
        proj = _project(words, kept)
        dist = pop[(proj[:, None] ^ z[None, :]) & ((1 << kept_count) - 1)]
        deg = (dist == weight).sum(axis=0)
        if int(deg.sum()) != per_pattern_edges:
            raise AssertionError("edge count mismatch against C(n-e, w) 2^k")
        reachable = deg > 0
        min_deg = min(min_deg, int(deg[reachable].min()))
        max_deg = max(max_deg, int(deg.max()))
        entropy_sum += float((deg[reachable] * np.log2(deg[reachable])).sum())
        for a in alphas:
            thr = 2.0 ** (r_bits - a)
            bad = int(deg[(deg > 0) & (deg < thr)].sum())
            agg_bad[float(a)] += bad
            max_frac[float(a)] = max(max_frac[float(a)],
                                     bad / per_pattern_edges)
    bounds = tuple(FixedWeightBound(alpha=float(a),
                                    threshold=2.0 ** (r_bits - a),
                                    max_fraction=max_frac[float(a)],
                                    aggregate_fraction=agg_bad[float(a)]
                                    / total_edges,
                                    bound=2.0 ** (-float(a)))
                   for a in alphas)
    return FixedWeightReport(n=n, k=k, erasures=erasures, weight=weight,
                             r_bits=r_bits, r_positive=r_bits > 0.0,
                             total_edges=total_edges, min_degree=min_deg,
                             max_degree=max_deg,
                             avg_min_entropy=entropy_sum / total_edges,
                             bounds=bounds)


@dataclass(frozen=True)
class HashedEntropyReport:
    """Exact Shannon entropy of a hashed secret given the channel view."""

    secret_bits: int
    avg_entropy: float
    min_entropy_view: float
    mass_below: float
    tolerance: float

    def to_json(self) -> dict:
        return {
            "secret_bits": self.secret_bits,
            "avg_entropy": self.avg_entropy,
            "min_entropy_view": self.min_entropy_view,
            "mass_below": self.mass_below,
            "tolerance": self.tolerance,
        }


def hashed_secret_entropy(code: LinearCode, erasures: int, error_rate: float,
                          hash_matrix: Matrix, tolerance: float,
                          limit: int = ORACLE_VIEW_LIMIT) -> HashedEntropyReport:
    """H(hash . codeword | view), exactly, over all views.

    Reports the view-average and worst-view entropy of the m-bit hashed
    secret and the probability mass of views whose entropy falls below
    m - tolerance.  Same channel model as min_entropy_oracle.
    """
    n, k = code.length, code.dimension
    m = hash_matrix.nrows
    if hash_matrix.ncols != n:
        raise ValueError("hash width must match the code length")
    kept_count = n - erasures
    pattern_count = math.comb(n, erasures)
    if pattern_count * (1 << kept_count) * (1 << k) > limit:
        raise EnumerationLimit("hashed-entropy census exceeds the budget")
    words = _packed_codewords(code, limit)
    pop = _popcount_table(kept_count)
    hash_rows = [pack_bits(r) for r in hash_matrix.rows]
    classes = np.zeros(1 << k, dtype=np.int64)
    for c in range(1 << k):
        x = 0
        for t, hr in enumerate(hash_rows):
            x |= ((int(words[c]) & hr).bit_count() & 1) << t
        classes[c] = x
    ind = np.zeros((1 << m, 1 << k))
    ind[classes, np.arange(1 << k)] = 1.0

    rho = error_rate / (1.0 - error_rate)
    z = np.arange(1 << kept_count, dtype=np.int64)
    pattern_w = 1.0 / pattern_count
    prior = 1.0 / (1 << k)
    keep_scale = (1.0 - error_rate) ** kept_count
    avg = 0.0
    worst = float(m)
    mass_below = 0.0
    for kept in combinations(range(n), kept_count):
        proj = _project(words, kept)
        dist = pop[(proj[:, None] ^ z[None, :]) & ((1 << kept_count) - 1)]
        like = np.power(rho, dist.astype(np.float64))
        colsum = like.sum(axis=0)
        reachable = colsum > 0.0
        post = np.zeros_like(like)
        post[:, reachable] = like[:, reachable] / colsum[reachable]
        class_mass = ind @ post
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(class_mass > 0.0,
                             -class_mass * np.log2(class_mass), 0.0)
        ent = terms.sum(axis=0)
        view_p = colsum * keep_scale * prior * pattern_w
        avg += float((view_p[reachable] * ent[reachable]).sum())
        if reachable.any():
            worst = min(worst, float(ent[reachable].min()))
        mass_below += float(view_p[reachable & (ent < m - tolerance)].sum())
    return HashedEntropyReport(secret_bits=m, avg_entropy=avg,
                               min_entropy_view=worst, mass_below=mass_below,
                               tolerance=tolerance)
