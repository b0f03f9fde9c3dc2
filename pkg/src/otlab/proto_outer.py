"""String transfer built on top of the bit-level sessions.

Alice holds two secrets s and t, each an outer_dim x block_syms matrix
over GF(q).  She samples x uniform with H x = s (H is an orthonormal
spanning basis of the outer code) and offsets it: the round-l candidates
are x_l and x_l + lambda_i * D_l, where D = H^T (s + t) and lambda_i runs
over the nonzero field elements in discrete-log order.  Bob draws a mask
u from the dual of the square of the outer code and requests, in round l,
the candidate indexed by mu_l = u_l (wanting s) or u_l + 1 (wanting t);
each request rides one 1-of-q inner transfer.  His harvest is
v = x + diag(mu) D, so H v^T = s + V(u)(s + t) with V(u)_{ij} =
u . (H_i * H_j): the mask's membership in the dual of the square kills V
and yields s, and the +1 shift flips it to t, while any single round
looks like a uniform block either way.

The compressed ("private") variants publish compression matrices M_s and
M_t only after the last round; the halved secrets M_s s, M_t t are what
the rank dichotomy of the cheating analysis protects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .codes import OrthonormalCode, square_dual_sample
from .gf import Field
from .linalg import Matrix, Vector, rank, solve_affine
from .proto_p0 import P0Params, p0q_run


def block_to_bits(block: Sequence[int], degree: int) -> tuple:
    """Serialize a block of GF(2^degree) symbols as degree bit-planes.

    Plane b holds bit b of every symbol; planes are concatenated in
    ascending order, so the result has len(block) * degree bits and
    XOR of serialized blocks matches field addition of the blocks.
    """
    m = len(block)
    out = [0] * (m * degree)
    for b in range(degree):
        for i, sym in enumerate(block):
            out[b * m + i] = (sym >> b) & 1
    return tuple(out)


def bits_to_block(bits: Sequence[int], degree: int) -> tuple:
    if len(bits) % degree:
        raise ValueError("bit length is not a multiple of the degree")
    m = len(bits) // degree
    block = [0] * m
    for b in range(degree):
        for i in range(m):
            if bits[b * m + i]:
                block[i] |= 1 << b
    return tuple(block)


def outer_offset(basis: OrthonormalCode, first_secret: Matrix,
                 second_secret: Matrix) -> Matrix:
    """D = H^T (s + t): the row-l offset between adjacent candidates."""
    return basis.rows.transpose() @ (first_secret + second_secret)


def p1_alice_setup(first_secret: Matrix, second_secret: Matrix,
                   basis: OrthonormalCode,
                   rng: np.random.Generator) -> tuple[Matrix, Matrix]:
    """Binary setup: x uniform with H x = s, and y = x + H^T(s + t)."""
    x, ys = p2_alice_setup(first_secret, second_secret, basis, rng)
    return x, ys[0]


def p2_alice_setup(first_secret: Matrix, second_secret: Matrix,
                   basis: OrthonormalCode,
                   rng: np.random.Generator) -> tuple[Matrix, list[Matrix]]:
    """q-ary setup: x plus the q - 1 offsets lambda_i H^T(s + t).

    lambda_i runs over nonzero elements in discrete-log order (so
    lambda_1 = 1 and the q = 2 case collapses to the binary setup).
    """
    f = basis.field
    r, n = basis.dimension, basis.length
    for s in (first_secret, second_secret):
        if s.field != f or s.nrows != r:
            raise ValueError("secrets must be outer_dim-row matrices "
                             "over the basis field")
    if first_secret.ncols != second_secret.ncols:
        raise ValueError("secrets must share a block width")
    cols = []
    for j in range(first_secret.ncols):
        cols.append(solve_affine(basis.rows, first_secret.column(j), rng))
    x = Matrix.from_columns(f, cols)
    if x.nrows != n:
        x = Matrix(f, x.rows, ncols=first_secret.ncols)
    offset = outer_offset(basis, first_secret, second_secret)
    ys = [x + offset.scale(f.alpha_power(i)) for i in range(f.order - 1)]
    return x, ys


def request_indices(mask: Sequence[int], want_first: bool,
                    field: Field) -> tuple:
    """Per-round candidate indices: mu_l = u_l (+1 for the second secret).

    Candidate 0 is x itself; candidate i >= 1 is the lambda_i offset, so
    the index of a nonzero mu is dlog(mu) + 1.
    """
    out = []
    for u in mask:
        mu = field.check(u) if want_first else field.check(u) ^ 1
        out.append(0 if mu == 0 else field.dlog(mu) + 1)
    return tuple(out)


def reconstruct(basis: OrthonormalCode, harvest: Matrix) -> Matrix:
    """H v: collapses the harvested rounds back to one secret."""
    return basis.rows @ harvest


def cheat_matrix_V(rows: Matrix, mask: Sequence[int]) -> Matrix:
    """V(u) with V_ij = u . (H_i * H_j); zero iff u is dual to the square."""
    f = rows.field
    if len(mask) != rows.ncols:
        raise ValueError("mask length must match the basis length")
    masked = Matrix(f, tuple(
        tuple(f.mul(a, u) for a, u in zip(row, mask)) for row in rows.rows))
    return rows @ masked.transpose()


@dataclass(frozen=True)
class CompressionPair:
    m_first: Matrix
    m_second: Matrix
    margin: float


def compressed_length(outer_dim: int, margin: float) -> int:
    """u = outer_dim (1/2 - margin); must be a positive integer."""
    if not 0.0 < margin < 0.5:
        raise ValueError(f"margin must be in (0, 1/2), got {margin}")
    val = outer_dim * (0.5 - margin)
    u_len = round(val)
    if abs(val - u_len) > 1e-9 or u_len < 1:
        raise ValueError(
            f"outer_dim {outer_dim} and margin {margin} give compressed "
            f"length {val}, not a positive integer")
    return u_len


def compress_setup(compressed_first: Matrix, compressed_second: Matrix,
                   outer_dim: int, margin: float,
                   rng: np.random.Generator) -> tuple[CompressionPair,
                                                      Matrix, Matrix]:
    """Lift compressed secrets to full ones under fresh full-rank maps.

    Draws M_first, M_second uniform u x outer_dim (resampled until full
    rank), then samples s, t uniform with M_first s = compressed_first,
    M_second t = compressed_second.
    """
    f = compressed_first.field
    u_len = compressed_length(outer_dim, margin)
    for c in (compressed_first, compressed_second):
        if c.nrows != u_len or c.field != f:
            raise ValueError("compressed secrets must have u rows")
    if compressed_first.ncols != compressed_second.ncols:
        raise ValueError("compressed secrets must share a block width")

    def draw() -> Matrix:
        while True:
            m = Matrix(f, tuple(
                tuple(int(a) for a in rng.integers(0, f.order, size=outer_dim))
                for _ in range(u_len)))
            if rank(m) == u_len:
                return m

    m_first, m_second = draw(), draw()

    def lift(mat: Matrix, target: Matrix) -> Matrix:
        cols = [solve_affine(mat, target.column(j), rng)
                for j in range(target.ncols)]
        lifted = Matrix.from_columns(f, cols)
        if lifted.nrows != outer_dim:
            lifted = Matrix(f, lifted.rows, ncols=target.ncols)
        return lifted

    return (CompressionPair(m_first, m_second, margin),
            lift(m_first, compressed_first), lift(m_second, compressed_second))


@dataclass(frozen=True)
class OuterParams:
    """Parameters shared by the string protocols.

    The round count equals the basis length; block_syms is the number of
    field symbols moved per round, so the inner sessions must carry
    block_syms * degree bits.  square_distance is the audited distance of
    the square of the outer code (how many rounds a request tracker must
    corrupt before masks stop looking uniform); it is bookkeeping here,
    enforced by the audits, not by the run.
    """

    basis: OrthonormalCode
    inner: P0Params
    block_syms: int = 1
    margin: Optional[float] = None
    square_distance: Optional[int] = None

    def __post_init__(self):
        need = self.block_syms * self.basis.field.degree
        if self.inner.secret_bits != need:
            raise ValueError(
                f"inner sessions carry {self.inner.secret_bits} bits but "
                f"blocks need {need}")
        if self.block_syms < 1:
            raise ValueError("block_syms must be positive")
        if self.margin is not None:
            compressed_length(self.basis.dimension, self.margin)

    @property
    def rounds(self) -> int:
        return self.basis.length

    @property
    def outer_dim(self) -> int:
        return self.basis.dimension

    @property
    def field(self) -> Field:
        return self.basis.field

    def rate_pair(self) -> tuple[float, float]:
        """(outer code rate r/n, audited square distance ratio or nan)."""
        ratio = (self.square_distance / self.rounds
                 if self.square_distance is not None else float("nan"))
        return self.outer_dim / self.rounds, ratio


@dataclass
class OuterTranscript:
    events: list
    mask: tuple
    harvest: Optional[Matrix]
    v_matrix: Matrix
    compression: Optional[CompressionPair]
    channel_bits: int
    observed_rate: float
    inner_transcripts: list
    want_first: bool
    statuses: list
    block_syms: int = 1

    def to_json(self, include_inner: bool = False) -> dict:
        out = {
            "params": {
                "events": list(self.events),
                "channel_bits": self.channel_bits,
                "observed_rate": self.observed_rate,
            },
            "alice_view": {
                "announced_sets": len(self.inner_transcripts),
            },
            "bob_view": {
                "want_first": self.want_first,
            },
            "outcome": {"statuses": list(self.statuses)},
            "outer_params": {
                "rounds": len(self.mask),
                "block_syms": self.block_syms,
            },
            "u": list(self.mask),
            "v": (None if self.harvest is None
                  else [list(r) for r in self.harvest.rows]),
            "V_matrix": [list(r) for r in self.v_matrix.rows],
            "compression": (None if self.compression is None else {
                "M_s": self.compression.m_first.to_json(),
                "M_t": self.compression.m_second.to_json(),
            }),
        }
        if include_inner:
            out["inner_transcripts"] = [t.to_json()
                                        for t in self.inner_transcripts]
        return out


@dataclass
class OuterSession:
    status: str
    output: Optional[Matrix]
    transcript: OuterTranscript


def run_session(params: OuterParams, first_secret: Matrix,
                second_secret: Matrix, want_first: bool,
                rng: np.random.Generator, compressed: bool = False,
                request_mask: Optional[Sequence[int]] = None) -> OuterSession:
    """One full outer session (honest parties unless a mask is forced).

    With compressed=True the given secrets are the compressed ones; the
    compression pair is generated up front but revealed in the transcript
    event order strictly after the last inner round, which is what the
    cheating analysis relies on.
    """
    f = params.field
    basis = params.basis
    if first_secret.ncols != params.block_syms:
        raise ValueError(
            f"secrets must have block_syms={params.block_syms} columns, "
            f"got {first_secret.ncols}")
    events = ["mask_drawn"]
    if compressed:
        if params.margin is None:
            raise ValueError("compressed run needs a margin")
        pair, s, t = compress_setup(first_secret, second_secret,
                                    params.outer_dim, params.margin, rng)
    else:
        pair, s, t = None, first_secret, second_secret
    x, ys = p2_alice_setup(s, t, basis, rng)
    if request_mask is None:
        mask = square_dual_sample(basis.base, rng)
    else:
        mask = tuple(f.check(u) for u in request_mask)
        if len(mask) != params.rounds:
            raise ValueError("request mask length must match the rounds")
    requests = request_indices(mask, want_first, f)

    harvest_rows = []
    statuses = []
    transcripts = []
    degree = f.degree
    channel_bits = 0
    for ell in range(params.rounds):
        candidates = [x.row(ell)] + [y.row(ell) for y in ys]
        blocks_bits = [block_to_bits(c, degree) for c in candidates]
        inner = p0q_run(blocks_bits, requests[ell], params.inner, rng)
        channel_bits += inner.channel_bits
        statuses.append(inner.status)
        transcripts.append(inner.transcripts)
        harvest_rows.append(None if inner.output is None
                            else bits_to_block(inner.output, degree))
    events.append("rounds_complete")

    failed = any(r is None for r in harvest_rows)
    harvest = None
    output = None
    if not failed:
        harvest = Matrix(f, tuple(harvest_rows))
        output = reconstruct(basis, harvest)
        if compressed:
            output = (pair.m_first if want_first else pair.m_second) @ output
    if compressed:
        events.append("compression_revealed")
    secret_syms = (params.outer_dim if not compressed
                   else compressed_length(params.outer_dim, params.margin))
    secret_bits = secret_syms * params.block_syms * degree
    transcript = OuterTranscript(
        events=events, mask=mask, harvest=harvest,
        v_matrix=cheat_matrix_V(basis.rows, mask), compression=pair,
        channel_bits=channel_bits,
        observed_rate=2.0 * secret_bits / channel_bits,
        inner_transcripts=[t for ts in transcripts for t in ts],
        want_first=want_first, statuses=statuses,
        block_syms=params.block_syms)
    status = next((s for s in statuses if s != "ok"), "ok")
    return OuterSession(status=status, output=output, transcript=transcript)


def p1_run(params: OuterParams, first_secret: Matrix, second_secret: Matrix,
           want_first: bool, rng: np.random.Generator) -> OuterSession:
    if params.field.degree != 1:
        raise ValueError("binary variant needs a binary outer code")
    return run_session(params, first_secret, second_secret, want_first, rng)


def p1prime_run(params: OuterParams, compressed_first: Matrix,
                compressed_second: Matrix, want_first: bool,
                rng: np.random.Generator) -> OuterSession:
    if params.field.degree != 1:
        raise ValueError("binary variant needs a binary outer code")
    return run_session(params, compressed_first, compressed_second,
                       want_first, rng, compressed=True)


def p2_run(params: OuterParams, first_secret: Matrix, second_secret: Matrix,
           want_first: bool, rng: np.random.Generator) -> OuterSession:
    return run_session(params, first_secret, second_secret, want_first, rng)


def p2prime_run(params: OuterParams, compressed_first: Matrix,
                compressed_second: Matrix, want_first: bool,
                rng: np.random.Generator) -> OuterSession:
    return run_session(params, compressed_first, compressed_second,
                       want_first, rng, compressed=True)
