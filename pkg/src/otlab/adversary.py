"""Cheating strategies and the audits that bound them.

Three threat surfaces:

* Alice corrupts pair slots (sends a value and its complement instead of
  a duplicate).  A false pair survives the channel unerased only when
  the two noisy copies happen to agree, probability eps, against 1 - eps
  for an honest pair; each corruption therefore drags the expected
  unerased count down by 1 - 2 eps, and Bob accuses whenever the count
  falls below a threshold placed eta under the honest mean.

* Alice uses the same corruptions as a tracker: erased slots land in
  Bob's unchosen set, so the labels of her corrupt slots leak his
  choice.  At the string level the leak turns into a noisy view of the
  per-round request indices, and the Bayes rule counts mask candidates
  consistent with either choice; when fewer rounds are corrupted than
  the distance of the square of the outer code, the projections are
  uniform and the rule is a coin flip.

* Bob picks an arbitrary request mask u instead of a dual-of-square
  element.  His harvest then collapses to z = U s + V t with
  V_ij = u . (H_i * H_j) and U = I + V, and the compressed variants
  survive because one side of (M_s s, M_t t) stays near-uniform given z
  for every u.  The audit enumerates the posterior exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channels import BscParams, TernaryWord, bsc_transmit
from .codes import LinearCode, OrthonormalCode
from .gf import GF
from .linalg import Matrix, gf2_rank
from .proto_outer import OuterParams, cheat_matrix_V, compressed_length, run_session


# -- detection of corrupted pairs -----------------------------------------


@dataclass(frozen=True)
class AccusationRule:
    """Bob's unerased-count test over a whole session batch.

    slots is the number of duplicated pairs observed (2 n n0 for n rounds
    of block length n0); the threshold sits eta below the honest survival
    rate 1 - eps, with eta = c (1 - 2 eps) / (4 n0) so that c corruptions
    per round move the mean by twice the margin.
    """

    slots: int
    crossover: float
    confidence: float
    eta: float
    threshold: float
    false_accusation_bound: float

    def accuse(self, unerased_count: int) -> bool:
        return unerased_count < self.threshold


def detection_rule(rounds: int, block_len: int, phi: float,
                   c: float = 1.0) -> AccusationRule:
    ch = BscParams(phi)
    eps = ch.erasure_rate
    slots = 2 * rounds * block_len
    eta = c * (1.0 - 2.0 * eps) / (4.0 * block_len)
    threshold = slots * (1.0 - eps - eta)
    bound = math.exp(-2.0 * eta * eta * slots)
    return AccusationRule(slots=slots, crossover=phi, confidence=c, eta=eta,
                          threshold=threshold, false_accusation_bound=bound)


def expected_unerased(rounds: int, block_len: int, phi: float,
                      corrupted: int) -> float:
    """Mean surviving pairs when `corrupted` of the slots are false."""
    eps = BscParams(phi).erasure_rate
    slots = 2 * rounds * block_len
    return slots * (1.0 - eps) - corrupted * (1.0 - 2.0 * eps)


def simulate_unerased_counts(rounds: int, block_len: int, phi: float,
                             corrupted: int, trials: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Unerased-count draws; false pairs survive w.p. eps, honest 1 - eps.

    Slot outcomes are independent, so the count is the sum of two
    binomials; sampling them directly is exact and keeps large campaigns
    cheap.
    """
    eps = BscParams(phi).erasure_rate
    slots = 2 * rounds * block_len
    if not 0 <= corrupted <= slots:
        raise ValueError(f"corrupted must be in 0..{slots}")
    honest = rng.binomial(slots - corrupted, 1.0 - eps, size=trials)
    false = rng.binomial(corrupted, eps, size=trials)
    return honest + false


def transmit_with_false_pairs(bits: Sequence[int], corrupt: Sequence[int],
                              phi: float, rng: np.random.Generator) -> TernaryWord:
    """Channel-level reference for the binomial model.

    Honest positions go through the duplicating channel; positions in
    `corrupt` carry (1 - b, b) instead of (b, b), which after noise is
    read as a value only when the copies collide.
    """
    corrupt_set = set(corrupt)
    n = len(bits)
    doubled = []
    for i, b in enumerate(bits):
        if i in corrupt_set:
            doubled.extend((b ^ 1, b))
        else:
            doubled.extend((b, b))
    received = bsc_transmit(tuple(doubled), phi, rng)
    symbols = []
    for i in range(n):
        a, b = received[2 * i], received[2 * i + 1]
        symbols.append(a if a == b else 2)
    return TernaryWord(tuple(symbols))


@dataclass(frozen=True)
class DetectionReport:
    rule: AccusationRule
    corrupted: int
    trials: int
    accusation_rate: float
    mean_unerased: float
    expected_mean: float
    ci_95: tuple[float, float]


def detection_campaign(rounds: int, block_len: int, phi: float,
                       corrupted: int, trials: int, rng: np.random.Generator,
                       c: float = 1.0) -> DetectionReport:
    rule = detection_rule(rounds, block_len, phi, c)
    counts = simulate_unerased_counts(rounds, block_len, phi, corrupted,
                                      trials, rng)
    accused = counts < rule.threshold
    rate = float(np.mean(accused))
    half = 1.96 * math.sqrt(max(rate * (1.0 - rate), 1e-12) / trials)
    return DetectionReport(
        rule=rule, corrupted=corrupted, trials=trials, accusation_rate=rate,
        mean_unerased=float(np.mean(counts)),
        expected_mean=expected_unerased(rounds, block_len, phi, corrupted),
        ci_95=(max(0.0, rate - half), min(1.0, rate + half)))


@dataclass(frozen=True)
class SweepReport:
    corrupted_grid: tuple
    means: tuple
    slope: float
    expected_slope: float


def detection_sweep(rounds: int, block_len: int, phi: float,
                    corrupted_grid: Sequence[int], trials: int,
                    rng: np.random.Generator) -> SweepReport:
    """Mean unerased count against the corruption count; the least-squares
    slope should sit at -(1 - 2 eps)."""
    means = []
    for m in corrupted_grid:
        counts = simulate_unerased_counts(rounds, block_len, phi, m, trials,
                                          rng)
        means.append(float(np.mean(counts)))
    xs = np.asarray(corrupted_grid, dtype=float)
    slope = float(np.polyfit(xs, np.asarray(means), 1)[0])
    eps = BscParams(phi).erasure_rate
    return SweepReport(corrupted_grid=tuple(int(m) for m in corrupted_grid),
                       means=tuple(means), slope=slope,
                       expected_slope=-(1.0 - 2.0 * eps))


# -- choice tracking by a corrupting Alice ---------------------------------


@dataclass(frozen=True)
class AdvantageReport:
    trials: int
    advantage: float
    std_error: float
    tie_rate: float


def tracker_advantage_p0(block_len: int, phi: float, corrupted: int,
                         trials: int, rng: np.random.Generator) -> AdvantageReport:
    """Alice's edge at guessing Bob's choice from corrupt-slot labels.

    She plants `corrupted` false pairs among the 2 n0 slots of one
    session and later sees which announced set each one landed in; the
    erasure-heavy set is the unchosen one, so she guesses against the
    set holding the majority of her corruptions (coin on a tie).
    Vectorized over trials; the first-fit partition matches the honest
    procedure exactly.
    """
    slots = 2 * block_len
    if not 0 <= corrupted <= slots:
        raise ValueError(f"corrupted must be in 0..{slots}")
    eps = BscParams(phi).erasure_rate
    # erasure per slot: honest slots (first slots-corrupted) w.p. eps,
    # corrupt slots (placed last; positions are exchangeable as honest
    # Bob never sees which is which before erasing) w.p. 1 - eps.
    u = rng.random(size=(trials, slots))
    erased = np.empty((trials, slots), dtype=bool)
    erased[:, :slots - corrupted] = u[:, :slots - corrupted] < eps
    erased[:, slots - corrupted:] = u[:, slots - corrupted:] < 1.0 - eps
    # shuffle slot positions per trial so corrupt slots sit anywhere
    perm = np.argsort(rng.random(size=(trials, slots)), axis=1)
    corrupt_mask = np.zeros((trials, slots), dtype=bool)
    corrupt_mask[perm >= slots - corrupted] = True
    erased = np.take_along_axis(erased, perm, axis=1)
    clean = ~erased
    enough = clean.sum(axis=1) >= block_len
    # chosen set = first block_len clean positions
    order = np.cumsum(clean, axis=1)
    in_chosen = clean & (order <= block_len)
    corrupt_in_chosen = (in_chosen & corrupt_mask).sum(axis=1)
    rest = corrupted - corrupt_in_chosen
    # guess: the set with more corruptions is the unchosen one
    correct = np.where(corrupt_in_chosen < rest, 1.0,
                       np.where(corrupt_in_chosen == rest, 0.5, 0.0))
    correct = correct[enough]
    ties = float(np.mean(corrupt_in_chosen[enough] == rest[enough])) \
        if enough.any() else 0.0
    n = int(enough.sum())
    adv = float(np.mean(correct)) - 0.5 if n else 0.0
    se = float(np.std(correct) / math.sqrt(n)) if n else 0.0
    return AdvantageReport(trials=n, advantage=adv, std_error=se,
                           tie_rate=ties)


def _dual_square_elements(code: LinearCode, limit: int = 1 << 22) -> list[tuple]:
    from .linalg import rank_and_kernel

    sq = code.schur_square()
    _, kernel = rank_and_kernel(sq.generator)
    dim = len(kernel)
    f = code.field
    if f.order ** dim > limit:
        raise ValueError(f"dual of the square has {f.order}^{dim} elements; "
                         "too many to enumerate")
    elems = []
    for coeffs in itertools.product(range(f.order), repeat=dim):
        acc = [0] * code.length
        for c, kv in zip(coeffs, kernel):
            if c:
                for i, a in enumerate(kv):
                    acc[i] ^= f.mul(c, a)
        elems.append(tuple(acc))
    return elems


def tracker_advantage_masks(code: LinearCode,
                            corrupt_rounds: Sequence[int]) -> AdvantageReport:
    """Exact Bayes advantage at the string level.

    Grant Alice the exact request indices at the corrupted rounds.  If
    Bob wants the first secret his indices restrict his mask u there; if
    the second, the all-ones shift of it.  The optimal rule compares the
    number of dual-of-square masks consistent with either reading and
    the advantage averages the rule over all masks and both choices.
    Exact, no sampling; raises when the dual is too large to enumerate.
    """
    pos = tuple(sorted(set(corrupt_rounds)))
    if any(not 0 <= p < code.length for p in pos):
        raise ValueError("corrupt rounds out of range")
    elems = _dual_square_elements(code)
    counts: dict[tuple, int] = {}
    for u in elems:
        proj = tuple(u[p] for p in pos)
        counts[proj] = counts.get(proj, 0) + 1
    shift = tuple(1 for _ in pos)

    def shifted(proj: tuple) -> tuple:
        return tuple(a ^ b for a, b in zip(proj, shift))

    total = 0.0
    ties = 0
    for u in elems:
        proj = tuple(u[p] for p in pos)
        # Bob wants the first secret: observed = proj
        n_s = counts.get(proj, 0)
        n_t = counts.get(shifted(proj), 0)
        total += 1.0 if n_s > n_t else (0.5 if n_s == n_t else 0.0)
        ties += n_s == n_t
        # Bob wants the second: observed = proj + 1
        obs = shifted(proj)
        n_s2 = counts.get(obs, 0)
        n_t2 = counts.get(shifted(obs), 0)  # back to proj
        total += 1.0 if n_t2 > n_s2 else (0.5 if n_t2 == n_s2 else 0.0)
        ties += n_t2 == n_s2
    n = 2 * len(elems)
    return AdvantageReport(trials=n, advantage=total / n - 0.5, std_error=0.0,
                           tie_rate=ties / n)


# -- full-rank survival of stacked random matrices -------------------------


def rank_deficiency_bound(width: int, fixed_rows: int, random_rows: int) -> float:
    """Union bound on a uniform stack missing full rank: 2^(b + c - a)."""
    return 2.0 ** (fixed_rows + random_rows - width)


def rank_deficiency_rate(width: int, fixed_rows: int, random_rows: int,
                         trials: int, rng: np.random.Generator) -> float:
    """Monte-Carlo rate at which [I 0; C] drops below full rank.

    The fixed part is the worst-case full-rank block in reduced form;
    C is uniform.  Used to sanity-check the resample-until-full-rank
    loops in the hash and compression draws.
    """
    if fixed_rows + random_rows > width:
        raise ValueError("stack taller than wide is always deficient")
    base = [1 << (width - 1 - i) for i in range(fixed_rows)]
    deficient = 0
    for _ in range(trials):
        rows = base + [int(x) for x in
                       rng.integers(0, 1 << width, size=random_rows,
                                    dtype=np.int64)]
        if gf2_rank(rows) < fixed_rows + random_rows:
            deficient += 1
    return deficient / trials


# -- cheating Bob against the compressed variants --------------------------


_POP = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)


def _parity_lut(row_masks: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Packed GF(2) matrix-vector products: bit i = parity(rows[i] & x)."""
    bits = _POP[states[:, None] & row_masks[None, :]] & 1
    return (bits << np.arange(len(row_masks))[None, :]).sum(axis=1)


def _pack_rows(m: Matrix) -> np.ndarray:
    return np.array([sum(a << j for j, a in enumerate(row)) for row in m.rows],
                    dtype=np.int64)


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class PosteriorCell:
    """Exact posterior entropies for one realized compression pair.

    entropy_first is H(s~ | t~, z) and entropy_second is H(t~ | s~, z),
    in bits per block column (columns are independent, so m columns
    scale both by m).  rank_v / rank_u are the ranks of V and U = I + V.
    """

    rank_v: int
    rank_u: int
    entropy_first: float
    entropy_second: float

    @property
    def protected(self) -> float:
        return max(self.entropy_first, self.entropy_second)


def posterior_cell(v: Matrix, m_first: Matrix, m_second: Matrix) -> PosteriorCell:
    """Enumerate (s, t) and measure both conditional entropies exactly."""
    r = v.nrows
    if v.field.degree != 1:
        raise ValueError("posterior audit is binary only")
    if r > 14:
        raise ValueError("posterior audit enumerates 4^r states; r too large")
    u_len = m_first.nrows
    eye = Matrix.identity(v.field, r)
    vrows = _pack_rows(v)
    urows = _pack_rows(v + eye)
    ms = _pack_rows(m_first)
    mt = _pack_rows(m_second)
    states = np.arange(1 << r, dtype=np.int64)
    z_s = _parity_lut(urows, states)     # U s as s runs over states
    z_t = _parity_lut(vrows, states)     # V t
    s_tilde = _parity_lut(ms, states)
    t_tilde = _parity_lut(mt, states)
    z = z_s[:, None] ^ z_t[None, :]
    joint = ((s_tilde[:, None] << (r + u_len)) | (t_tilde[None, :] << r) | z)
    counts = np.bincount(joint.ravel(), minlength=1 << (r + 2 * u_len))
    cube = counts.reshape(1 << u_len, 1 << u_len, 1 << r)
    h_stz = _entropy_bits(counts)
    h_sz = _entropy_bits(cube.sum(axis=1).ravel())
    h_tz = _entropy_bits(cube.sum(axis=0).ravel())
    return PosteriorCell(rank_v=gf2_rank([int(x) for x in vrows]),
                         rank_u=gf2_rank([int(x) for x in urows]),
                         entropy_first=h_stz - h_tz,
                         entropy_second=h_stz - h_sz)


def _full_rank_row_sets(r: int, u_len: int) -> list[np.ndarray]:
    """All full-rank u_len x r binary matrices as packed row arrays."""
    out = []
    for rows in itertools.product(range(1, 1 << r), repeat=u_len):
        if gf2_rank(list(rows)) == u_len:
            out.append(np.array(rows, dtype=np.int64))
    return out


@dataclass(frozen=True)
class MaskAudit:
    """Pair-averaged posterior entropies for one request mask.

    mean_first / mean_second average H(s~|t~,z) and H(t~|s~,z) over the
    compression-pair ensemble (the reveal happens after Bob commits to
    the mask, so the ensemble average is the operative quantity);
    worst_cell is the smallest max-side entropy any single pair gives.
    """

    mask: tuple
    rank_v: int
    rank_u: int
    mean_first: float
    mean_second: float
    worst_cell: float

    def predicted_side(self, outer_dim: int) -> str:
        """Low-rank V starves z of t, high-rank starves it of s."""
        return "second" if 2 * self.rank_v <= outer_dim else "first"

    def predicted_entropy(self, outer_dim: int) -> float:
        return (self.mean_second if self.predicted_side(outer_dim) == "second"
                else self.mean_first)


@dataclass(frozen=True)
class DichotomyReport:
    outer_dim: int
    compressed_len: int
    margin: float
    cells: tuple
    worst_predicted: float
    slack_bits: float
    rank_histogram: dict
    prediction_mismatches: int


def _row_entropies(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    p = counts / totals
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log2(p), 0.0)
    return -plogp.sum(axis=1)


def audit_bob_strategies(basis: OrthonormalCode, margin: float,
                         masks: Optional[Sequence[Sequence[int]]] = None,
                         pair_samples: Optional[int] = None,
                         rng: Optional[np.random.Generator] = None,
                         tolerance: float = 1e-9) -> DichotomyReport:
    """Exhaust Bob's request masks against the compression-pair ensemble.

    For each mask u (all 2^n by default) the audit enumerates the
    posterior of (s~, t~, z) for every full-rank compression pair (all
    of them when the compressed length is 1 and pair_samples is None,
    else pair_samples random ones) and averages H(s~|t~,z) and
    H(t~|s~,z) over pairs.  The report's slack is how far the worst
    mask's rank-predicted side falls below the full compressed_len bits;
    mismatches count masks whose better-protected side differs from the
    rank prediction.
    """
    f = basis.field
    if f.degree != 1:
        raise ValueError("strategy audit is binary only")
    r, n = basis.dimension, basis.length
    if r > 14:
        raise ValueError("the audit enumerates 4^r secret pairs; r too large")
    u_len = compressed_length(r, margin)
    if masks is None:
        if n > 16:
            raise ValueError("exhausting 2^n masks needs n <= 16")
        masks = [tuple((x >> i) & 1 for i in range(n)) for x in range(1 << n)]
    else:
        masks = [tuple(int(a) & 1 for a in m) for m in masks]
    if pair_samples is None:
        pairs = _full_rank_row_sets(r, u_len)
        if len(pairs) > 64:
            raise ValueError(
                f"{len(pairs)}^2 compression pairs; pass pair_samples")
        pair_list = [(a, b) for a in pairs for b in pairs]
    else:
        if rng is None:
            raise ValueError("pair_samples needs an rng")

        def draw() -> np.ndarray:
            while True:
                rows = rng.integers(1, 1 << r, size=u_len, dtype=np.int64)
                if gf2_rank([int(x) for x in rows]) == u_len:
                    return rows
        pair_list = [(draw(), draw()) for _ in range(pair_samples)]

    states = np.arange(1 << r, dtype=np.int64)
    lut_cache: dict[bytes, np.ndarray] = {}
    for a, b in pair_list:
        for arr in (a, b):
            key = arr.tobytes()
            if key not in lut_cache:
                lut_cache[key] = _parity_lut(arr, states)
    # one packed (pair, s, t) -> joint-bin index array, reused per mask
    n_pairs = len(pair_list)
    bins = 1 << (r + 2 * u_len)
    s_part = np.stack([lut_cache[a.tobytes()] for a, _ in pair_list])
    t_part = np.stack([lut_cache[b.tobytes()] for _, b in pair_list])
    high = (s_part[:, :, None] << (r + u_len)) | (t_part[:, None, :] << r)
    offsets = (np.arange(n_pairs, dtype=np.int64) * bins)[:, None, None]

    cells = []
    mismatches = 0
    hist: dict[int, int] = {}
    eye = Matrix.identity(f, r)
    for mask in masks:
        v = cheat_matrix_V(basis.rows, mask)
        vrows = _pack_rows(v)
        urows = _pack_rows(v + eye)
        rank_v = gf2_rank([int(x) for x in vrows])
        rank_u = gf2_rank([int(x) for x in urows])
        hist[rank_v] = hist.get(rank_v, 0) + 1
        z_s = _parity_lut(urows, states)
        z_t = _parity_lut(vrows, states)
        z = z_s[:, None] ^ z_t[None, :]
        flat = (offsets + (high | z[None, :, :])).ravel()
        counts = np.bincount(flat, minlength=n_pairs * bins)
        cube = counts.reshape(n_pairs, 1 << u_len, 1 << u_len, 1 << r)
        h_stz = _row_entropies(cube.reshape(n_pairs, bins))
        h_sz = _row_entropies(cube.sum(axis=2).reshape(n_pairs, -1))
        h_tz = _row_entropies(cube.sum(axis=1).reshape(n_pairs, -1))
        h_first = h_stz - h_tz
        h_second = h_stz - h_sz
        cell = MaskAudit(
            mask=mask, rank_v=rank_v, rank_u=rank_u,
            mean_first=float(h_first.mean()),
            mean_second=float(h_second.mean()),
            worst_cell=float(np.maximum(h_first, h_second).min()))
        cells.append(cell)
        observed = ("second" if cell.mean_second >= cell.mean_first - tolerance
                    else "first")
        if cell.predicted_side(r) != observed and \
                abs(cell.mean_first - cell.mean_second) > tolerance:
            mismatches += 1
    worst = min(c.predicted_entropy(r) for c in cells)
    return DichotomyReport(
        outer_dim=r, compressed_len=u_len, margin=margin, cells=tuple(cells),
        worst_predicted=worst, slack_bits=u_len - worst,
        rank_histogram=dict(sorted(hist.items())),
        prediction_mismatches=mismatches)


def audit_arbitrary_v(outer_dim: int, margin: float, samples: int,
                      pairs_per_v: int, rng: np.random.Generator) -> DichotomyReport:
    """Same posterior audit over uniform symmetric V, realizable or not.

    Probes the dichotomy beyond masks of the form V(u): draws random
    symmetric binary matrices and averages the posterior over
    pairs_per_v random full-rank compression pairs each.
    """
    r = outer_dim
    u_len = compressed_length(r, margin)
    f2 = GF(1)

    def draw_m() -> Matrix:
        while True:
            rows = [int(x) for x in
                    rng.integers(1, 1 << r, size=u_len, dtype=np.int64)]
            if gf2_rank(rows) == u_len:
                return Matrix(f2, tuple(
                    tuple((m >> j) & 1 for j in range(r)) for m in rows))

    cells = []
    hist: dict[int, int] = {}
    mismatches = 0
    for _ in range(samples):
        sym = np.zeros((r, r), dtype=np.int64)
        for i in range(r):
            for j in range(i, r):
                bit = int(rng.integers(0, 2))
                sym[i, j] = bit
                sym[j, i] = bit
        v = Matrix(f2, tuple(tuple(int(x) for x in row) for row in sym))
        sub = [posterior_cell(v, draw_m(), draw_m())
               for _ in range(pairs_per_v)]
        mean_first = sum(c.entropy_first for c in sub) / len(sub)
        mean_second = sum(c.entropy_second for c in sub) / len(sub)
        cell = MaskAudit(mask=(), rank_v=sub[0].rank_v, rank_u=sub[0].rank_u,
                         mean_first=mean_first, mean_second=mean_second,
                         worst_cell=min(c.protected for c in sub))
        hist[cell.rank_v] = hist.get(cell.rank_v, 0) + 1
        cells.append(cell)
        observed = ("second" if mean_second >= mean_first - 1e-9 else "first")
        if cell.predicted_side(r) != observed and \
                abs(mean_first - mean_second) > 1e-9:
            mismatches += 1
    worst = min(c.predicted_entropy(r) for c in cells)
    return DichotomyReport(
        outer_dim=r, compressed_len=u_len, margin=margin, cells=tuple(cells),
        worst_predicted=worst, slack_bits=u_len - worst,
        rank_histogram=dict(sorted(hist.items())),
        prediction_mismatches=mismatches)


def bob_attack_run(params: OuterParams, request_mask: Sequence[int],
                   rng: np.random.Generator) -> dict:
    """Run one compressed session under a forced mask and audit it.

    Returns the session plus the exact posterior of the realized
    compression pair against that mask's V.
    """
    f = params.field
    if f.degree != 1:
        raise ValueError("attack audit is binary only")
    u_len = compressed_length(params.outer_dim, params.margin)
    cs = Matrix(f, tuple(
        tuple(int(b) for b in rng.integers(0, 2, size=params.block_syms))
        for _ in range(u_len)))
    ct = Matrix(f, tuple(
        tuple(int(b) for b in rng.integers(0, 2, size=params.block_syms))
        for _ in range(u_len)))
    session = run_session(params, cs, ct, True, rng, compressed=True,
                          request_mask=request_mask)
    pair = session.transcript.compression
    cell = posterior_cell(session.transcript.v_matrix,
                          pair.m_first, pair.m_second)
    return {"session": session, "cell": cell}
