import pytest

from heron_descent.arith import primes_in
from heron_descent.errors import InvalidArgument
from heron_descent.family import FamilyPair, RejectReason, Rejection, curve_of, scan, validate
from tests.test_arith import trial_division

TABLE_PRIMES = [409, 449, 521, 569, 641]


def brute_family(lo, hi):
    """Oracle: check the three hypotheses directly with trial division."""
    return [p for p in range(lo, hi + 1)
            if trial_division(p) and p % 8 == 1 and trial_division((p * p + 1) // 2)]


# frozen from brute_family before the scanner was written
FROZEN = {(2, 100): [], (410, 440): [], (2, 408): [], (2, 700): TABLE_PRIMES}


@pytest.mark.parametrize("rng", list(FROZEN))
def test_scan_matches_frozen_fixture(rng):
    assert [fp.p for fp in scan(*rng)] == FROZEN[rng]


@pytest.mark.parametrize("rng", [(2, 100), (410, 440), (2, 700), (700, 1500)])
def test_scan_matches_oracle(rng):
    assert [fp.p for fp in scan(*rng)] == brute_family(*rng)


def test_validate_examples():
    assert validate(409) == FamilyPair(409, 83641)
    assert validate(17) == Rejection(17, RejectReason.Q_NOT_PRIME)
    assert 145 == 5 * 29
    assert validate(11) == Rejection(11, RejectReason.WRONG_RESIDUE)
    assert validate(9).reason is RejectReason.NOT_PRIME


def test_scan_rejects_empty_range():
    with pytest.raises(InvalidArgument):
        scan(10, 5)


def test_scan_and_validate_agree():
    got = {fp.p for fp in scan(2, 3000)}
    for p in primes_in(2, 3000):
        assert (p in got) == isinstance(validate(p), FamilyPair)


@pytest.mark.parametrize("p", TABLE_PRIMES + [881, 929, 1129])
def test_family_congruences(p):
    fp = validate(p)
    assert fp.p**2 % fp.q == fp.q - 1  # p^2 = -1 mod q
    assert 2 * fp.q % fp.p == 1
    assert fp.q % 8 == 1


@pytest.mark.parametrize("p,root", [(409, -167281), (449, -201601), (521, -271441)])
def test_curve_of(p, root):
    c = curve_of(validate(p))
    assert c.roots == (0, 1, root)
    disc = c.discriminant
    for f in (2, p, (p * p + 1) // 2):
        while disc % f == 0:
            disc //= f
    assert disc == 1


def test_family_pair_invariant():
    with pytest.raises(InvalidArgument):
        FamilyPair(17, 100)
