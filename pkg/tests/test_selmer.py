import itertools
import json
import math
from fractions import Fraction

import pytest

from heron_descent.homspace import ONE, P_CLASS, Q_CLASS, TORSION_IMAGE, DescentPair, SquareClass
from heron_descent.selmer import (
    DescentReport,
    admissible_images,
    count_points_E,
    descent_image,
    expected_selmer,
    is_subgroup,
    mw_point_search,
    normalize_pair,
    square_class_group,
    torsion_image,
    torsion_subgroup,
)

from .conftest import TABLE_PRIMES, report_for, selmer_for


def dp(b1, b2):
    return DescentPair.parse(b1, b2)


def test_square_class_group_is_elementary_abelian(pair409):
    g = square_class_group(pair409)
    assert len(g) == 16
    assert all(a * a == SquareClass() for a in g)
    assert all(a * b == b * a for a, b in itertools.product(g, g))


def test_torsion_image(pair409):
    A = torsion_image(pair409)
    assert len(set(A.members)) == 4 and is_subgroup(A.members)
    assert dp("1", "2q") in A and dp("-1", "-1") in A and dp("p", "1") not in A


@pytest.mark.parametrize("a,b", [(("1", "2q"), ("1", "1")), (("-p", "-q"), ("p", "q")), (("p", "2pq"), ("p", "p"))])
def test_normalize_pair_examples(a, b):
    assert normalize_pair(dp(*a)) == dp(*b)


def test_normalize_pair_on_all_pairs():
    for x in DescentPair.all():
        r = normalize_pair(x)
        assert normalize_pair(r) == r
        assert all(normalize_pair(x * t) == r for t in TORSION_IMAGE)
    assert len({normalize_pair(x) for x in DescentPair.all()}) == 64


def test_descent_image(pair409):
    p, q = pair409.p, pair409.q
    assert descent_image(pair409, Fraction(-p * p)) == TORSION_IMAGE[3]
    assert descent_image(pair409, Fraction(2 * q)) == dp("2q", "1")  # 2q - 1 = p^2


def test_torsion_subgroup(pair409):
    t = torsion_subgroup(pair409)
    assert t.gcd == 4 and len(t.points) == 4
    assert {3: 4, 5: 8, 7: 12, 11: 16, 13: 16}.items() <= t.counts.items()


def test_point_counts_against_enumeration(pair409):
    for l in (3, 5, 7, 11, 13, 17):
        n = 1 + sum(1 for x in range(l) for y in range(l)
                    if (y * y - x * (x - 1) * (x + 409**2)) % l == 0)
        assert count_points_E(pair409, l) == n


def test_mw_search_sees_torsion(pair409):
    pts = mw_point_search(pair409, 1, include_torsion=True)
    assert (Fraction(0), Fraction(0)) in pts and (Fraction(1), Fraction(0)) in pts
    assert mw_point_search(pair409, 1) == []


def test_mw_search_finds_non_torsion_points():
    class Small:  # outside the family; (2, 6) lies on y^2 = x(x-1)(x+16)
        p = 4
    pts = mw_point_search(Small, 20)
    assert (Fraction(2), Fraction(6)) in pts
    for x, y in pts:
        assert y > 0 and y * y == x * (x - 1) * (x + 16)


def test_admissible_images_without_exclusions():
    sel = expected_selmer(None)
    hs = admissible_images(sel, [], [])
    assert [len(h) for h in hs] == [4, 8, 8, 8, 16]
    hs = admissible_images(sel, [dp("p", "1"), dp("1", "q")], [])
    assert [len(h) for h in hs] == [4, 8]  # only <A, (p,q)> survives besides A


@pytest.mark.slow
@pytest.mark.parametrize("p", TABLE_PRIMES)
def test_selmer_group_matches(p):
    sel = selmer_for(p)
    assert sel.members == expected_selmer(None) and sel.rank == 2
    assert {normalize_pair(m) for m in sel.members} == {dp("1", "1"), dp("p", "1"), dp("1", "q"), dp("p", "q")}


@pytest.mark.slow
@pytest.mark.parametrize("p", TABLE_PRIMES)
def test_report_invariants(p):
    r = report_for(p)
    assert r.confirmed and not r.violations
    assert (r.rank, r.selmer_rank, r.sha2_dim, r.torsion_order) == (0, 2, 2, 4)
    assert r.rank + r.sha2_dim == r.selmer_rank and r.sha2_dim % 2 == 0
    assert len(r.selmer_members) == 2 ** (r.selmer_rank + 2)
    assert r.certificates["lemma3"]["certified"]
    assert r.certificates["rank_argument"]["admissible_image_orders"] == [4]
    assert len(r.witnesses) == 256
    for label, row in r.witnesses.items():
        assert row["sanity_sweep"]["all_solvable"]
        solvable = all(row[str(pl)]["verdict"] == "solvable" for pl in ("inf", 2, 3, p, r.q))
        assert solvable == (label in r.selmer_members)


@pytest.mark.slow
def test_report_json_round_trip():
    r = report_for(409)
    text = json.dumps(r.to_dict(), sort_keys=True)
    back = DescentReport.from_dict(json.loads(text))
    assert back == r
    assert json.dumps(back.to_dict(), sort_keys=True) == text
