"""Rate formulas and the exhaustive entropy oracles."""

import math
from itertools import combinations

import numpy as np
import pytest

from otlab.analysis import (EntropyReport, FixedWeightReport,
                            HashedEntropyReport, binary_entropy,
                            fixed_weight_oracle, hashed_secret_entropy,
                            min_entropy_bound, min_entropy_oracle,
                            optimize_rate_p0, rate_chain, rate_curve, rate_p0)
from otlab.codes import EnumerationLimit, LinearCode, random_code
from otlab.gf import GF
from otlab.linalg import Matrix


def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.25) == pytest.approx(0.8112781244591328)
    for p in np.linspace(0.01, 0.99, 33):
        assert binary_entropy(float(p)) == pytest.approx(
            binary_entropy(float(1 - p)))
    with pytest.raises(ValueError):
        binary_entropy(-0.1)
    with pytest.raises(ValueError):
        binary_entropy(1.1)


def test_rate_p0_endpoints_and_frozen_value():
    assert rate_p0(0.0) == 0.0
    assert rate_p0(0.198) == pytest.approx(0.10842018099476232, rel=1e-12)
    with pytest.raises(ValueError):
        rate_p0(0.5)
    with pytest.raises(ValueError):
        rate_p0(-0.01)


def test_rate_p0_two_formula_forms_agree():
    """phi(1-phi)(1-h(p)) and eps(1-h(p))/2 are the same number."""
    for phi in np.linspace(0.001, 0.499, 1000):
        phi = float(phi)
        eps = 2.0 * phi * (1.0 - phi)
        p = phi * phi / (1.0 - eps)
        via_eps = eps * (1.0 - binary_entropy(p)) / 2.0
        assert rate_p0(phi) == pytest.approx(via_eps, abs=1e-12)


def test_optimize_rate_p0_frozen_and_beats_grid():
    phi_star, rate_star = optimize_rate_p0()
    assert phi_star == pytest.approx(0.19385297824369357, abs=1e-5)
    assert rate_star == pytest.approx(0.10847152648944172, rel=1e-9)
    grid_best = max(rate_p0(float(p))
                    for p in np.linspace(0.001, 0.499, 20000))
    assert rate_star >= grid_best - 1e-9
    # tighter tolerance narrows the bracket, never changes the optimum
    phi_fine, rate_fine = optimize_rate_p0(tol=1e-9)
    assert rate_fine == pytest.approx(rate_star, rel=1e-9)


def test_rate_chain_identity_at_unit_code_rate():
    rb = rate_chain(1.0, 2, phi=0.198)
    assert rb.inner_rate == pytest.approx(rate_p0(0.198), rel=1e-12)
    assert rb.outer_rate == pytest.approx(rb.inner_rate, rel=1e-12)
    assert rb.private_rate == pytest.approx(rb.outer_rate / 2.0, rel=1e-12)
    assert rb.q == 2
    assert rb.erasure_rate == pytest.approx(0.317592)


def test_rate_chain_frozen_defaults():
    rb = rate_chain(1.0 / 1575.0, 2)
    assert rb.crossover == pytest.approx(0.19385297824369357, abs=1e-5)
    assert rb.outer_rate == pytest.approx(6.887081046948681e-05, rel=1e-9)
    assert rb.private_rate == pytest.approx(3.4435405234743404e-05, rel=1e-9)
    rb16 = rate_chain(1.0 / 9.0, 16)
    assert rb16.outer_rate == pytest.approx(8.034927888106794e-04, rel=1e-9)
    assert rb16.private_rate == pytest.approx(4.017463944053397e-04, rel=1e-9)


def test_rate_chain_q_scaling_and_overrides():
    base = rate_chain(0.5, 2, phi=0.2)
    for q in (4, 8, 16, 32):
        rb = rate_chain(0.5, q, phi=0.2)
        assert rb.outer_rate == pytest.approx(base.outer_rate / (q - 1),
                                              rel=1e-12)
    forced = rate_chain(0.5, 2, phi=0.2, inner_rate=0.25)
    assert forced.outer_rate == pytest.approx(0.125, rel=1e-12)


def test_rate_chain_validation():
    with pytest.raises(ValueError):
        rate_chain(0.0, 2)
    with pytest.raises(ValueError):
        rate_chain(1.5, 2)
    with pytest.raises(ValueError):
        rate_chain(0.5, 3)
    with pytest.raises(ValueError):
        rate_chain(0.5, 1)


def test_rate_curve_rows():
    phis = [0.0, 0.1, 0.198, 0.3]
    rows = rate_curve(phis)
    assert len(rows) == 4
    for (phi, eps, rate), want in zip(rows, phis):
        assert phi == want
        assert eps == pytest.approx(2 * want * (1 - want))
        assert rate == pytest.approx(rate_p0(want))


def test_min_entropy_bound_formula():
    got = min_entropy_bound(10, 4, 3, 0.1, 0.5)
    want = 10 * (0.4 - 0.7 * (1 - binary_entropy(0.1)) - 0.5)
    assert got == pytest.approx(want, rel=1e-12)


def _posterior_census(code, erasures, error_rate):
    """Definitional Bayes census: avg H_inf weighted by view probability.

    Walks every erasure pattern and every kept-position output, scoring
    codewords with per-position match probabilities instead of the
    likelihood-ratio shortcut used by the implementation.
    """
    n, k = code.length, code.dimension
    words = list(code.iter_codewords())
    kept_count = n - erasures
    patterns = list(combinations(range(n), kept_count))
    avg = 0.0
    total = 0.0
    for kept in patterns:
        for out in range(1 << kept_count):
            y = [(out >> t) & 1 for t in range(kept_count)]
            joint = []
            for w in words:
                pr = 1.0
                for t, pos in enumerate(kept):
                    pr *= (1 - error_rate) if w[pos] == y[t] else error_rate
                joint.append(pr / len(words) / len(patterns))
            mass = sum(joint)
            if mass == 0.0:
                continue
            total += mass
            h = -math.log2(max(joint) / mass)
            avg += mass * h
    assert total == pytest.approx(1.0, abs=1e-9)
    return avg


def test_min_entropy_oracle_matches_definitional_census():
    rng = np.random.default_rng(30)
    for _ in range(6):
        k = int(rng.integers(1, 3))
        n = int(rng.integers(k, 5))
        code = random_code(GF(1), n, k, rng)
        for erasures in (0, 1):
            if erasures > n:
                continue
            rep = min_entropy_oracle(code, erasures, 0.2, alpha=0.5)
            want = _posterior_census(code, erasures, 0.2)
            assert rep.avg_min_entropy == pytest.approx(want, abs=1e-9)


def test_min_entropy_oracle_noiseless_is_zero():
    code = LinearCode.from_rows(GF(1), ((1, 0, 1), (0, 1, 1)))
    rep = min_entropy_oracle(code, 0, 0.0, alpha=0.5)
    assert rep.avg_min_entropy == pytest.approx(0.0, abs=1e-12)
    assert rep.views == 8
    assert rep.violating_mass == 0.0


def test_min_entropy_oracle_full_erasure_gives_k_bits():
    code = LinearCode.from_rows(GF(1), ((1, 1, 1, 1),))
    rep = min_entropy_oracle(code, 4, 0.1, alpha=0.1)
    assert rep.avg_min_entropy == pytest.approx(1.0, abs=1e-12)
    assert rep.views == 1


def test_min_entropy_oracle_erasure_ladder():
    """More erasures leak less, comparing like parities of kept positions.

    The raw sequence is not monotone: an even number of kept repetition
    bits can tie (forcing a full bit of entropy) while an odd number
    never does, so adjacent erasure counts seesaw.  Within each parity
    class the average entropy climbs, and full erasure tops the ladder.
    """
    code = LinearCode.from_rows(GF(1), ((1, 1, 1, 1, 1),))
    vals = [min_entropy_oracle(code, e, 0.1, alpha=0.5).avg_min_entropy
            for e in range(6)]
    assert vals[5] == pytest.approx(1.0, abs=1e-12)
    assert max(vals) == vals[5]
    for lo, hi in ((0, 2), (2, 4), (1, 3), (3, 5)):
        assert vals[lo] < vals[hi]


def test_min_entropy_oracle_single_bit_closed_form():
    code = LinearCode.from_rows(GF(1), ((1,),))
    for p in (0.1, 0.25, 0.4):
        rep = min_entropy_oracle(code, 0, p, alpha=0.1)
        assert rep.avg_min_entropy == pytest.approx(-math.log2(1 - p),
                                                    abs=1e-12)


def test_min_entropy_oracle_histogram_masses_sum_to_one():
    code = LinearCode.from_rows(GF(1), ((1, 0, 1), (0, 1, 1)))
    rep = min_entropy_oracle(code, 1, 0.2, alpha=0.5)
    mass = sum(m for (_, _, m) in rep.histogram)
    assert mass == pytest.approx(1.0, abs=1e-9)
    for lo, hi, m in rep.histogram:
        assert hi == pytest.approx(lo + 0.25)
        assert m > 0.0


def test_min_entropy_oracle_limits_and_validation():
    big = LinearCode(Matrix.identity(GF(1), 26))
    with pytest.raises(EnumerationLimit):
        min_entropy_oracle(big, 0, 0.1, alpha=0.5)
    code = LinearCode.from_rows(GF(1), ((1, 1),))
    with pytest.raises(ValueError):
        min_entropy_oracle(code, 3, 0.1, alpha=0.5)
    with pytest.raises(ValueError):
        min_entropy_oracle(code, 0, 0.6, alpha=0.5)
    with pytest.raises(ValueError):
        min_entropy_oracle(code, 0, 0.1, alpha=0.0)


def test_fixed_weight_oracle_repetition_code():
    code = LinearCode.from_rows(GF(1), ((1, 1, 1),))
    rep = fixed_weight_oracle(code, 0, 1)
    assert rep.total_edges == 6
    assert rep.min_degree == 1
    assert rep.max_degree == 1
    assert rep.avg_min_entropy == 0.0
    assert not rep.r_positive
    for b in rep.bounds:
        assert b.max_fraction == 0.0
        assert b.aggregate_fraction == 0.0


def test_fixed_weight_oracle_identity_code():
    code = LinearCode(Matrix.identity(GF(1), 2))
    rep = fixed_weight_oracle(code, 0, 1)
    assert rep.total_edges == 8
    assert rep.min_degree == 2
    assert rep.max_degree == 2
    assert rep.avg_min_entropy == pytest.approx(1.0)
    assert rep.r_bits == pytest.approx(1.0)
    assert rep.r_positive


def test_fixed_weight_oracle_fractions_below_bound():
    """Low-degree views can carry at most 2^-alpha of the edge mass."""
    rng = np.random.default_rng(31)
    for _ in range(12):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(k, 7))
        code = random_code(GF(1), n, k, rng)
        e = int(rng.integers(0, n - k + 1)) if n > k else 0
        w = int(rng.integers(0, n - e + 1))
        rep = fixed_weight_oracle(code, e, w, alphas=(1.0, 2.0, 3.0))
        for b in rep.bounds:
            assert b.max_fraction <= b.bound + 1e-12
            assert b.aggregate_fraction <= b.max_fraction + 1e-12


def test_fixed_weight_oracle_validation():
    code = LinearCode.from_rows(GF(1), ((1, 1, 1),))
    with pytest.raises(ValueError):
        fixed_weight_oracle(code, 0, 4)
    with pytest.raises(ValueError):
        fixed_weight_oracle(code, 4, 0)
    big = LinearCode(Matrix.identity(GF(1), 24))
    with pytest.raises(EnumerationLimit):
        fixed_weight_oracle(big, 0, 12)


def test_hashed_entropy_noiseless_view_pins_secret():
    code = LinearCode.from_rows(GF(1), ((1, 0, 1), (0, 1, 1)))
    h = Matrix(GF(1), ((1, 0, 0),))
    rep = hashed_secret_entropy(code, 0, 0.0, h, tolerance=0.1)
    assert rep.secret_bits == 1
    assert rep.avg_entropy == pytest.approx(0.0, abs=1e-12)
    assert rep.min_entropy_view == pytest.approx(0.0, abs=1e-12)
    assert rep.mass_below == pytest.approx(1.0, abs=1e-12)


def test_hashed_entropy_full_erasure_keeps_secret_uniform():
    code = LinearCode(Matrix.identity(GF(1), 3))
    h = Matrix(GF(1), ((1, 0, 0), (0, 1, 0)))
    rep = hashed_secret_entropy(code, 3, 0.1, h, tolerance=0.05)
    assert rep.secret_bits == 2
    assert rep.avg_entropy == pytest.approx(2.0, abs=1e-12)
    assert rep.min_entropy_view == pytest.approx(2.0, abs=1e-12)
    assert rep.mass_below == 0.0


def test_hashed_entropy_constant_hash_is_zero():
    code = LinearCode(Matrix.identity(GF(1), 3))
    h = Matrix(GF(1), ((0, 0, 0),), ncols=3)
    rep = hashed_secret_entropy(code, 1, 0.2, h, tolerance=0.5)
    assert rep.avg_entropy == pytest.approx(0.0, abs=1e-12)
    assert rep.mass_below == pytest.approx(1.0, abs=1e-9)


def test_hashed_entropy_dominates_min_entropy():
    """Shannon entropy of the identity hash is at least avg H_inf."""
    code = LinearCode.from_rows(GF(1), ((1, 0, 1), (0, 1, 1)))
    h = Matrix.identity(GF(1), 3)
    shannon = hashed_secret_entropy(code, 1, 0.2, h, tolerance=0.1)
    minent = min_entropy_oracle(code, 1, 0.2, alpha=0.5)
    assert shannon.avg_entropy >= minent.avg_min_entropy - 1e-12


def test_hashed_entropy_validation_and_limit():
    code = LinearCode.from_rows(GF(1), ((1, 0, 1), (0, 1, 1)))
    with pytest.raises(ValueError):
        hashed_secret_entropy(code, 0, 0.0, Matrix(GF(1), ((1, 0),)),
                              tolerance=0.1)
    big = LinearCode(Matrix.identity(GF(1), 22))
    with pytest.raises(EnumerationLimit):
        hashed_secret_entropy(big, 0, 0.1, Matrix.identity(GF(1), 22),
                              tolerance=0.1)
