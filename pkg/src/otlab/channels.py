"""Binary symmetric channel simulation and the duplication reduction.

Sending each bit twice through a BSC(phi) and post-processing the pair
(mismatch means "erased", match keeps the common value) turns the channel
into an erasure-plus-error channel: erasure probability
eps = 2*phi*(1 - phi), and a surviving symbol is wrong with probability
p = phi^2 / (1 - eps).  The pair (eps, p) is derived from phi everywhere;
only the synthetic channel bsc_with_erasures takes them directly, for the
oracles that need a channel with an exact erasure count.

All randomness flows through numpy Generators.  derive_rng builds
independent, reproducible streams from a master seed and an index path,
so per-trial and per-round streams never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

ERASED = 2


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic child stream for (master_seed, key path)."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class BscParams:
    """Crossover probability and the derived duplication-channel numbers."""

    crossover: float

    def __post_init__(self):
        if not 0.0 <= self.crossover < 0.5:
            raise ValueError(
                f"crossover must be in [0, 1/2), got {self.crossover}")

    @property
    def erasure_rate(self) -> float:
        """eps = 2 phi (1 - phi): chance a duplicated bit erases."""
        phi = self.crossover
        return 2.0 * phi * (1.0 - phi)

    @property
    def residual_error(self) -> float:
        """p = phi^2 / (1 - eps): error rate of surviving symbols."""
        phi = self.crossover
        return phi * phi / (1.0 - self.erasure_rate)


@dataclass(frozen=True)
class TernaryWord:
    """A received word over {0, 1, erased}."""

    symbols: tuple

    def __post_init__(self):
        for s in self.symbols:
            if s not in (0, 1, ERASED):
                raise ValueError(f"bad ternary symbol {s!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def erased_count(self) -> int:
        return sum(1 for s in self.symbols if s == ERASED)

    @property
    def unerased_count(self) -> int:
        return len(self.symbols) - self.erased_count

    def non_erased_indices(self) -> tuple:
        return tuple(i for i, s in enumerate(self.symbols) if s != ERASED)

    def trace(self) -> str:
        return "".join("*" if s == ERASED else str(s) for s in self.symbols)

    @classmethod
    def from_trace(cls, text: str) -> "TernaryWord":
        return cls(tuple(ERASED if ch == "*" else int(ch) for ch in text))


def bsc_transmit(bits: Sequence[int], phi: float,
                 rng: np.random.Generator) -> tuple:
    """Each bit flips independently with probability phi."""
    if not 0.0 <= phi < 0.5:
        raise ValueError(f"crossover must be in [0, 1/2), got {phi}")
    flips = rng.random(len(bits)) < phi
    return tuple(int(b) ^ int(f) for b, f in zip(bits, flips))


def duplicate_round_trip(bits: Sequence[int], phi: float,
                         rng: np.random.Generator) -> TernaryWord:
    """Send every bit twice through BSC(phi) and fold pairs to ternary.

    Matching received pairs keep their common value; mismatching pairs
    become erasures.  Flip draws are a single (len, 2) block so the
    consumption order is fixed.
    """
    if not 0.0 <= phi < 0.5:
        raise ValueError(f"crossover must be in [0, 1/2), got {phi}")
    flips = rng.random((len(bits), 2)) < phi
    out = []
    for b, (f1, f2) in zip(bits, flips):
        if f1 == f2:
            out.append(int(b) ^ int(f1))
        else:
            out.append(ERASED)
    return TernaryWord(tuple(out))


@dataclass(frozen=True)
class ErasureChannelParams:
    """Synthetic channel: exactly `erasures` erasures, then BSC(error_rate)."""

    length: int
    erasures: int
    error_rate: float

    def __post_init__(self):
        if not 0 <= self.erasures <= self.length:
            raise ValueError("erasure count out of range")
        if not 0.0 <= self.error_rate < 0.5:
            raise ValueError(
                f"error rate must be in [0, 1/2), got {self.error_rate}")


def bsc_with_erasures(bits: Sequence[int], erasures: int, error_rate: float,
                      rng: np.random.Generator) -> TernaryWord:
    """Erase a uniform subset of positions, flip survivors independently.

    This is the analysis channel: the erasure pattern is exactly uniform
    over subsets of the given size, unlike the binomial pattern the
    duplication trick produces.
    """
    params = ErasureChannelParams(len(bits), erasures, error_rate)
    pattern = set(int(i) for i in
                  rng.choice(params.length, size=erasures, replace=False))
    flips = rng.random(params.length) < error_rate
    out = []
    for i, b in enumerate(bits):
        if i in pattern:
            out.append(ERASED)
        else:
            out.append(int(b) ^ int(flips[i]))
    return TernaryWord(tuple(out))


def false_duplicate_transmit(value: int, phi: float,
                             rng: np.random.Generator) -> int:
    """Outcome of sending the mismatched pair (1 - v, v) through BSC(phi).

    A cheating sender who pairs complementary bits gets an erasure with
    probability 1 - eps (the pair survives as a mismatch unless exactly
    one flip lands), and otherwise delivers v or 1 - v with probability
    phi(1 - phi) each.
    """
    if value not in (0, 1):
        raise ValueError("value must be a bit")
    if not 0.0 <= phi < 0.5:
        raise ValueError(f"crossover must be in [0, 1/2), got {phi}")
    f1, f2 = (bool(x) for x in rng.random(2) < phi)
    first = (1 - value) ^ int(f1)
    second = value ^ int(f2)
    if first != second:
        return ERASED
    return second
