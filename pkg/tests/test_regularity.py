from fractions import Fraction

import numpy as np
import pytest

from tritile.constructions import sidon_bipartite
from tritile.regularity import (
    as_fraction,
    eps_regular_exhaustive,
    eps_regular_sampled,
    slicing_property_test,
    super_regular_check,
    validate_irregular_witness,
)

from .oracles import naive_regular, naive_super_regular


def block_union():
    m = np.zeros((8, 8), dtype=bool)
    m[:4, :4] = True
    m[4:, 4:] = True
    return m


def test_trivial_pairs_regular():
    for eps in (0.05, 0.3, 0.9):
        assert eps_regular_exhaustive(np.ones((6, 5), bool), eps).regular
        assert eps_regular_exhaustive(np.zeros((6, 5), bool), eps).regular
        assert eps_regular_sampled(np.ones((6, 5), bool), eps, 100, 0).regular


def test_block_union_irregular():
    v = eps_regular_exhaustive(block_union(), 0.4)
    assert not v.regular
    assert v.witness.X == (0, 1, 2, 3) and v.witness.Y == (0, 1, 2, 3)
    assert v.witness.density == 1 and v.witness.base_density == Fraction(1, 2)
    assert validate_irregular_witness(block_union(), 0.4, v.witness.X, v.witness.Y)


def test_block_union_sampled():
    v = eps_regular_sampled(block_union(), 0.4, 10**4, 7)
    assert not v.regular
    assert validate_irregular_witness(block_union(), 0.4, v.witness.X, v.witness.Y)
    assert v.to_json()["seed"] == 7 and v.to_json()["trials"] == 10**4


def test_strict_size_threshold():
    # |X| must exceed eps|A|: with eps = 1/2 and |A| = 4, X needs 3 vertices
    m = np.zeros((4, 4), dtype=bool)
    m[:2, :2] = True
    assert eps_regular_exhaustive(m, Fraction(1, 2)).regular
    assert not naive_regular(m, Fraction(49, 100)) and not eps_regular_exhaustive(m, Fraction(49, 100)).regular


@pytest.mark.parametrize("seed", range(40))
def test_exhaustive_matches_naive(seed):
    rng = np.random.default_rng(seed)
    na, nb = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    m = rng.random((na, nb)) < rng.random()
    eps = Fraction(int(rng.integers(1, 10)), 10)
    v = eps_regular_exhaustive(m, eps)
    assert v.regular == naive_regular(m, eps)
    if not v.regular:
        assert validate_irregular_witness(m, eps, v.witness.X, v.witness.Y)


@pytest.mark.parametrize("seed", range(30))
def test_sampled_never_contradicts_exhaustive(seed):
    rng = np.random.default_rng(100 + seed)
    m = rng.random((10, 12)) < 0.5
    eps = Fraction(int(rng.integers(2, 6)), 10)
    ex = eps_regular_exhaustive(m, eps)
    sa = eps_regular_sampled(m, eps, 500, seed)
    if ex.regular:
        assert sa.regular
    if not sa.regular:
        assert validate_irregular_witness(m, eps, sa.witness.X, sa.witness.Y)


def test_witness_orientation_when_transposed():
    m = np.zeros((10, 4), dtype=bool)
    m[:5, :2] = True
    m[5:, 2:] = True
    v = eps_regular_exhaustive(m, 0.3)
    assert not v.regular
    assert validate_irregular_witness(m, 0.3, v.witness.X, v.witness.Y)


def test_cap():
    with pytest.raises(ValueError, match="cap"):
        eps_regular_exhaustive(np.ones((17, 3), bool), 0.2)
    assert eps_regular_exhaustive(np.ones((17, 3), bool), 0.2, cap=17).regular


def test_as_fraction():
    assert as_fraction(0.4) == Fraction(2, 5)
    assert as_fraction("3/7") == Fraction(3, 7)
    with pytest.raises(ValueError):
        as_fraction(Fraction(1, 10**10))


def test_validate_witness_rejects_small_sets():
    assert not validate_irregular_witness(block_union(), 0.4, (0,), (0,))
    assert not validate_irregular_witness(block_union(), 0.4, (0, 0, 1, 2), (0, 1, 2, 3))


# -- super-regularity


def test_super_regular_complete():
    assert super_regular_check(np.ones((5, 5), bool), 0.2, 0.9) is None


def test_super_regular_isolated_vertex():
    m = np.ones((4, 4), bool)
    m[2] = False
    v = super_regular_check(m, 0.2, 0.1)
    assert v.reason == "degree floor" and v.witness == ("A", 2, 0)


def test_super_regular_sidon():
    # fixed by the all-subsets oracle
    B = sidon_bipartite(7, [0, 1, 3])
    assert naive_super_regular(B.adj, Fraction(45, 100), Fraction(3, 10))
    assert super_regular_check(B, 0.45, 0.3) is None
    assert super_regular_check(B, 0.45, 0.3) is None


def test_super_regular_density_floor():
    m = np.ones((6, 6), bool)
    m[:3, :3] = False
    v = super_regular_check(m, 0.4, 0.3)
    assert v.reason == "density floor"
    X, Y, d = v.witness
    assert d <= Fraction(3, 10)
    assert not naive_super_regular(m, 0.4, 0.3)


@pytest.mark.parametrize("seed", range(25))
def test_super_regular_matches_naive(seed):
    rng = np.random.default_rng(300 + seed)
    m = rng.random((5, 5)) < 0.7
    eps = Fraction(int(rng.integers(1, 6)), 10)
    delta = Fraction(int(rng.integers(1, 6)), 10)
    assert (super_regular_check(m, eps, delta) is None) == naive_super_regular(m, eps, delta)
    if super_regular_check(m, eps, delta, method="sampled", trials=200, seed=seed) is not None:
        assert super_regular_check(m, eps, delta) is not None


# -- slicing


def test_slicing_complete_pair():
    rep = slicing_property_test(np.ones((10, 10), bool), 0.2, 0.5, 50, 0)
    assert rep.violations == 0
    assert rep.epsilon_prime == Fraction(2, 5)


def test_slicing_requires_alpha_above_eps():
    with pytest.raises(ValueError):
        slicing_property_test(np.ones((4, 4), bool), 0.3, 0.3)


def test_slicing_on_certified_pairs():
    found = 0
    for seed in range(40):
        m = np.random.default_rng(seed).random((12, 12)) < 0.5
        if not eps_regular_exhaustive(m, Fraction(2, 5)).regular:
            continue
        rep = slicing_property_test(m, Fraction(2, 5), Fraction(1, 2), 200, seed)
        assert rep.violations == 0, rep.first_violation
        found += 1
    assert found >= 5


def test_slicing_reports_violations_on_irregular_pair():
    rep = slicing_property_test(block_union(), 0.1, 0.5, 100, 0)
    assert rep.violations > 0 and rep.first_violation is not None
