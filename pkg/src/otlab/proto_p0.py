"""The duplication-based 1-of-2 transfer and its 1-of-q chaining.

One session moves one of two m-bit secrets from Alice to Bob over a
BSC(phi), spending 4*n0 channel bits:

1. Alice draws 2*n0 random bits and sends each twice; Bob folds the
   received pairs into a ternary word (value or erasure).
2. Bob splits the indices into two n0-sized sets and announces (I, J):
   his chosen set holds the first n0 positions he received cleanly, the
   other set gets everything else.  Too few clean positions aborts.
3. Alice draws a random codeword of the session code whose hash is the
   first secret (a uniform solution of the stacked parity/hash system),
   another for the second secret, permutes each announced set with a
   fresh uniform permutation, and sends each codeword masked by her sent
   bits at the permuted positions.
4. Bob unmasks on his chosen set (he knows those bits), decodes the
   residual-noise codeword, and hashes it down to the secret.

The unchosen mask looks to Bob like a codeword through the
erasure-plus-error analysis channel; the random permutation is what makes
the erasure pattern uniform.  The 1-of-q variant chains q - 1 sessions
with one-time pads so that asking for the first element of a pair burns
every later pad.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .analysis import binary_entropy
from .channels import ERASED, BscParams, TernaryWord, duplicate_round_trip
from .codes import LinearCode
from .gf import GF
from .linalg import Matrix, Vector, pack_bits, rank, solve_affine


class ChannelAbort(Exception):
    """Too few cleanly received positions to fill the chosen set."""


def p0_secret_length(block_len: int, phi: float, slack: float) -> int:
    """Largest safe secret length floor(n0 eps (1 - h(p) - slack)).

    slack is the security margin eaten by privacy amplification; the
    result must come out >= 1 or the parameters are rejected.
    """
    if slack <= 0.0:
        raise ValueError(f"slack must be positive, got {slack}")
    params = BscParams(phi)
    eps, p = params.erasure_rate, params.residual_error
    m = math.floor(block_len * eps * (1.0 - binary_entropy(p) - slack))
    if m < 1:
        raise ValueError(
            f"no positive secret length at n0={block_len}, phi={phi}, "
            f"slack={slack}")
    return m


class MLDecoder:
    """Exact maximum-likelihood decoding by codeword enumeration.

    Minimizes Hamming distance over the non-erased positions; a tie for
    the minimum is a decoding failure (None).  Intended for k <= 20.
    """

    def __init__(self, code: LinearCode, enum_limit: int = 1 << 20):
        if code.field.degree != 1:
            raise ValueError("decoder expects a binary code")
        self.code = code
        self.words = []
        for w in code.iter_codewords(enum_limit):
            self.words.append(pack_bits(w))
        self.length = code.length

    def decode(self, symbols: Sequence[int]) -> Optional[Vector]:
        if len(symbols) != self.length:
            raise ValueError("received word has the wrong length")
        mask = 0
        target = 0
        for i, s in enumerate(symbols):
            if s != ERASED:
                mask |= 1 << i
                if s:
                    target |= 1 << i
        best = None
        best_dist = self.length + 1
        tie = False
        for w in self.words:
            d = ((w & mask) ^ target).bit_count()
            if d < best_dist:
                best, best_dist, tie = w, d, False
            elif d == best_dist:
                tie = True
        if tie or best is None:
            return None
        return tuple((best >> i) & 1 for i in range(self.length))

    def failure_bound(self, p: float) -> float:
        """Union bound on ML failure over BSC(p), ties counted as failures."""
        if not 0.0 <= p < 0.5:
            raise ValueError("error rate must be in [0, 1/2)")
        counts: dict[int, int] = {}
        for w in self.words:
            wt = w.bit_count()
            if wt:
                counts[wt] = counts.get(wt, 0) + 1
        total = 0.0
        for wt, a in counts.items():
            half = (wt + 1) // 2 if wt % 2 else wt // 2
            pw = sum(math.comb(wt, j) * p ** j * (1.0 - p) ** (wt - j)
                     for j in range(half, wt + 1))
            total += a * pw
        return min(total, 1.0)


@dataclass(frozen=True)
class P0Params:
    """Session parameters for the 1-of-2 transfer.

    hash_matrix = None draws a fresh uniform hash per session (resampled
    until the stacked parity/hash matrix has full rank); pinning one makes
    sessions reproducible at fixed rng.  security_slack, when set, turns
    on the sizing invariant m <= n0 eps (1 - h(p) - slack); leave it None
    for correctness-only runs (for instance phi = 0 demos, where no m
    satisfies the bound).
    """

    block_len: int
    channel: BscParams
    code: LinearCode
    secret_bits: int
    hash_matrix: Optional[Matrix] = None
    security_slack: Optional[float] = None
    decoder: object = None
    parity_check: Matrix = dc_field(init=False)

    def __post_init__(self):
        code = self.code
        if code.field.degree != 1:
            raise ValueError("session code must be binary")
        if code.length != self.block_len:
            raise ValueError("code length must equal the block length")
        if not 1 <= self.secret_bits <= code.dimension:
            raise ValueError(
                f"secret length must be in 1..k={code.dimension}, "
                f"got {self.secret_bits}")
        dual = code.dual_basis()
        parity = Matrix(code.field, dual, ncols=code.length)
        object.__setattr__(self, "parity_check", parity)
        if self.hash_matrix is not None:
            self._check_hash(self.hash_matrix)
        if self.security_slack is not None:
            cap = p0_secret_length(self.block_len, self.channel.crossover,
                                   self.security_slack)
            if self.secret_bits > cap:
                raise ValueError(
                    f"secret length {self.secret_bits} exceeds the safe "
                    f"cap {cap} at this slack")
        if self.decoder is None:
            object.__setattr__(self, "decoder", MLDecoder(code))

    def _check_hash(self, hm: Matrix) -> None:
        if (hm.nrows, hm.ncols) != (self.secret_bits, self.block_len):
            raise ValueError("hash matrix must be m x n0")
        stacked = self.parity_check.vstack(hm)
        want = self.block_len - self.code.dimension + self.secret_bits
        if rank(stacked) != want:
            raise ValueError("stacked parity/hash matrix must have full rank")

    def draw_hash(self, rng: np.random.Generator) -> Matrix:
        """The session hash: pinned if configured, else fresh full-rank."""
        if self.hash_matrix is not None:
            return self.hash_matrix
        f = GF(1)
        while True:
            hm = Matrix(f, tuple(
                tuple(int(b) for b in rng.integers(0, 2, size=self.block_len))
                for _ in range(self.secret_bits)))
            stacked = self.parity_check.vstack(hm)
            if rank(stacked) == (self.block_len - self.code.dimension
                                 + self.secret_bits):
                return hm


def p0_partition(word: TernaryWord, block_len: int,
                 want_first: bool) -> tuple[tuple, tuple]:
    """Honest Bob's announcement (I, J).

    The chosen set gets the first block_len cleanly received indices; the
    other set gets all remaining indices (erasures plus clean surplus).
    Raises ChannelAbort when fewer than block_len positions survived.
    Both sets come back ascending; I is always the first-secret mask.
    """
    if len(word) != 2 * block_len:
        raise ValueError("word must have length 2 n0")
    clean = word.non_erased_indices()
    if len(clean) < block_len:
        raise ChannelAbort(
            f"only {len(clean)} of {block_len} clean positions")
    good = clean[:block_len]
    good_set = set(good)
    rest = tuple(i for i in range(2 * block_len) if i not in good_set)
    return (good, rest) if want_first else (rest, good)


@dataclass(frozen=True)
class AliceEncoding:
    perm_first: tuple
    perm_second: tuple
    masked_first: tuple
    masked_second: tuple
    codeword_first: tuple
    codeword_second: tuple


def p0_alice_encode(first_secret: Sequence[int], second_secret: Sequence[int],
                    set_first: Sequence[int], set_second: Sequence[int],
                    sent_bits: Sequence[int], params: P0Params,
                    hash_matrix: Matrix,
                    rng: np.random.Generator) -> AliceEncoding:
    """Alice's response to the announced partition.

    Each secret is embedded as a uniform codeword with that hash (uniform
    coset sampling of the stacked system), then masked by the sent bits
    at freshly permuted positions of the announced set.
    """
    n0, m = params.block_len, params.secret_bits
    if len(set_first) != n0 or len(set_second) != n0:
        raise ValueError("both announced sets must have size n0")
    if set(set_first) & set(set_second):
        raise ValueError("announced sets overlap")
    if len(first_secret) != m or len(second_secret) != m:
        raise ValueError("secrets must have length m")
    stacked = params.parity_check.vstack(hash_matrix)
    zeros = (0,) * params.parity_check.nrows

    out = []
    for secret, positions in ((first_secret, set_first),
                              (second_secret, set_second)):
        cw = solve_affine(stacked, zeros + tuple(secret), rng)
        perm = tuple(int(t) for t in rng.permutation(n0))
        masked = tuple(cw[t] ^ sent_bits[positions[perm[t]]]
                       for t in range(n0))
        out.append((perm, masked, cw))
    (perm_f, masked_f, cw_f), (perm_s, masked_s, cw_s) = out
    return AliceEncoding(perm_first=perm_f, perm_second=perm_s,
                         masked_first=masked_f, masked_second=masked_s,
                         codeword_first=cw_f, codeword_second=cw_s)


def p0_bob_decode(masked: Sequence[int], word: TernaryWord,
                  positions: Sequence[int], perm: Sequence[int],
                  decoder: MLDecoder,
                  hash_matrix: Matrix) -> tuple[Optional[tuple], Optional[tuple]]:
    """Unmask on the chosen set and decode; returns (secret, codeword)."""
    symbols = []
    for t in range(len(masked)):
        s = word.symbols[positions[perm[t]]]
        symbols.append(ERASED if s == ERASED else masked[t] ^ s)
    cw = decoder.decode(symbols)
    if cw is None:
        return None, None
    return hash_matrix.apply(cw), cw


@dataclass
class P0Transcript:
    block_len: int
    crossover: float
    secret_bits: int
    channel_bits: int
    unerased_count: int
    status: str
    alice_view: dict
    bob_view: dict

    def to_json(self) -> dict:
        return {
            "params": {
                "block_len": self.block_len,
                "crossover": self.crossover,
                "secret_bits": self.secret_bits,
                "channel_bits": self.channel_bits,
            },
            "alice_view": self.alice_view,
            "bob_view": self.bob_view,
            "outcome": {
                "status": self.status,
                "unerased_count": self.unerased_count,
            },
        }


@dataclass
class P0Session:
    status: str  # "ok" | "abort" | "decode_failure"
    output: Optional[tuple]
    transcript: P0Transcript


def p0_run(first_secret: Sequence[int], second_secret: Sequence[int],
           want_first: bool, params: P0Params,
           rng: np.random.Generator) -> P0Session:
    """One full honest session; spends 4 n0 channel bits regardless."""
    n0 = params.block_len
    phi = params.channel.crossover
    hash_matrix = params.draw_hash(rng)
    sent = tuple(int(b) for b in rng.integers(0, 2, size=2 * n0))
    word = duplicate_round_trip(sent, phi, rng)
    base = P0Transcript(
        block_len=n0, crossover=phi, secret_bits=params.secret_bits,
        channel_bits=4 * n0, unerased_count=word.unerased_count,
        status="", alice_view={"sent_bits": list(sent)},
        bob_view={"received": word.trace(), "want_first": want_first})
    try:
        set_first, set_second = p0_partition(word, n0, want_first)
    except ChannelAbort as exc:
        base.status = "abort"
        base.bob_view["abort_reason"] = str(exc)
        return P0Session(status="abort", output=None, transcript=base)
    enc = p0_alice_encode(first_secret, second_secret, set_first, set_second,
                          sent, params, hash_matrix, rng)
    base.alice_view.update({
        "set_first": list(set_first), "set_second": list(set_second),
        "perm_first": list(enc.perm_first),
        "perm_second": list(enc.perm_second),
        "masked_first": list(enc.masked_first),
        "masked_second": list(enc.masked_second),
        "codeword_first": list(enc.codeword_first),
        "codeword_second": list(enc.codeword_second),
        "hash_matrix": hash_matrix.to_json(),
    })
    masked, positions, perm = (
        (enc.masked_first, set_first, enc.perm_first) if want_first
        else (enc.masked_second, set_second, enc.perm_second))
    secret, cw = p0_bob_decode(masked, word, positions, perm,
                               params.decoder, hash_matrix)
    base.bob_view.update({
        "masked_first": list(enc.masked_first),
        "masked_second": list(enc.masked_second),
        "decoded": None if cw is None else list(cw),
    })
    if secret is None:
        base.status = "decode_failure"
        return P0Session(status="decode_failure", output=None, transcript=base)
    base.status = "ok"
    base.bob_view["secret"] = list(secret)
    return P0Session(status="ok", output=secret, transcript=base)


def chain_1_of_q(secrets: Sequence[Sequence[int]],
                 rng: np.random.Generator) -> list[tuple[tuple, tuple]]:
    """Pair list for the 1-of-q chaining of q secrets of equal length.

    Pads r_0 .. r_{q-2} are uniform subject to their sum being the last
    secret; pair j is (secret_j xor pads_before_j, pad_j).  Learning the
    first element of pair j costs the pad r_j and with it every later
    secret.
    """
    q = len(secrets)
    if q < 2 or (q & (q - 1)) != 0:
        raise ValueError(f"need a power-of-two count of secrets, got {q}")
    m = len(secrets[0])
    if any(len(s) != m for s in secrets):
        raise ValueError("secrets must share one length")
    pads = [tuple(int(b) for b in rng.integers(0, 2, size=m))
            for _ in range(q - 2)]
    last = list(secrets[q - 1])
    for pad in pads:
        for i, b in enumerate(pad):
            last[i] ^= b
    pads.append(tuple(last))
    pairs = []
    prefix = (0,) * m
    for j in range(q - 1):
        first = tuple(a ^ b for a, b in zip(secrets[j], prefix))
        pairs.append((first, pads[j]))
        prefix = tuple(a ^ b for a, b in zip(prefix, pads[j]))
    return pairs


def chain_access_audit(q: int, m: int) -> dict[tuple, tuple]:
    """Which secrets each access pattern can pin down, exhaustively.

    A pattern chooses the first (0) or second (1) element of each of the
    q - 1 chained pairs.  Enumerating every assignment of secrets and
    free pads, a secret index counts as recoverable under a pattern only
    when its value is constant on every equivalence class of views.
    Returns pattern -> ascending tuple of recoverable secret indices.
    The honest pattern for index i (first at pair i, second elsewhere)
    recovers exactly {i}; no pattern recovers two.
    """
    if q < 2 or (q & (q - 1)) != 0:
        raise ValueError(f"need a power-of-two secret count, got {q}")
    if (2 * q - 2) * m > 24:
        raise ValueError("audit enumerates 2^((2q-2)m) worlds; too large")
    space = 1 << m
    results: dict[tuple, tuple] = {}
    worlds = []
    for secrets in itertools.product(range(space), repeat=q):
        for free in itertools.product(range(space), repeat=q - 2):
            acc = secrets[q - 1]
            for pad in free:
                acc ^= pad
            pads = free + (acc,)
            firsts = []
            prefix = 0
            for j in range(q - 1):
                firsts.append(secrets[j] ^ prefix)
                prefix ^= pads[j]
            worlds.append((secrets, tuple(firsts), pads))
    for pattern in itertools.product((0, 1), repeat=q - 1):
        classes: dict[tuple, list] = {}
        for secrets, firsts, pads in worlds:
            view = tuple(pads[j] if pattern[j] else firsts[j]
                         for j in range(q - 1))
            classes.setdefault(view, []).append(secrets)
        recoverable = []
        for i in range(q):
            if all(len({s[i] for s in group}) == 1
                   for group in classes.values()):
                recoverable.append(i)
        results[pattern] = tuple(recoverable)
    return results


@dataclass
class P0QSession:
    status: str
    output: Optional[tuple]
    channel_bits: int
    transcripts: list


def p0q_run(secrets: Sequence[Sequence[int]], index: int, params: P0Params,
            rng: np.random.Generator) -> P0QSession:
    """1-of-q transfer: q - 1 chained sessions, honest access pattern.

    Bob asks for the first element only at pair `index` (never, when he
    wants the last secret) and recombines with the pads he collected.
    """
    q = len(secrets)
    if not 0 <= index < q:
        raise ValueError(f"index must be in 0..{q - 1}")
    pairs = chain_1_of_q(secrets, rng)
    outputs = []
    transcripts = []
    worst = "ok"
    for j, (first, second) in enumerate(pairs):
        want_first = j == index
        session = p0_run(first, second, want_first, params, rng)
        transcripts.append(session.transcript)
        outputs.append(session.output)
        if session.status != "ok" and worst == "ok":
            worst = session.status
    channel_bits = (q - 1) * 4 * params.block_len
    needed = range(index + 1) if index < q - 1 else range(q - 1)
    if any(outputs[j] is None for j in needed):
        return P0QSession(status=worst if worst != "ok" else "decode_failure",
                          output=None, channel_bits=channel_bits,
                          transcripts=transcripts)
    m = params.secret_bits
    acc = [0] * m
    for j in needed:
        for i, b in enumerate(outputs[j]):
            acc[i] ^= b
    return P0QSession(status=worst, output=tuple(acc),
                      channel_bits=channel_bits, transcripts=transcripts)
