import math

import pytest

from heron_descent.arith import jacobi, squarefree_part
from heron_descent.errors import CertificateFailed, InvalidArgument
from heron_descent.family import scan, validate
from heron_descent.quadfield import (
    class_number,
    fundamental_unit,
    is_reduced,
    lemma3_certificate,
    reduced_forms,
    rho,
)

from .conftest import TABLE_PRIMES


def kronecker(D, n):
    """(D/n) for a fundamental discriminant D and n >= 1."""
    out = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        out *= 1 if D % 8 in (1, 7) else -1
    return out * (jacobi(D, n) if n > 1 else 1)


def analytic_class_number(d):
    """Dirichlet's formula with eps from the smallest solution of x^2 - D y^2 = +-4."""
    D = d if d % 4 == 1 else 4 * d
    y = 1
    while True:
        for s in (-4, 4):
            x2 = D * y * y + s
            x = math.isqrt(x2)
            if x * x == x2:
                eps = (x + y * math.sqrt(D)) / 2
                total = sum(kronecker(D, a) * math.log(math.sin(math.pi * a / D)) for a in range(1, D))
                return round(-total / (2 * math.log(eps)))
        y += 1


@pytest.mark.parametrize("d,x,y,n", [(2, 1, 1, -1), (5, 2, 1, -1), (3, 2, 1, 1), (7, 8, 3, 1)])
def test_fundamental_unit_small(d, x, y, n):
    assert fundamental_unit(d) == (x, y, n)


def test_fundamental_unit_409():
    x, y, n = fundamental_unit(409)
    assert (x, y, n) == (111921796968, 5534176685, -1)
    assert x * x - 409 * y * y == -1


@pytest.mark.parametrize("d,h", [(2, 1), (10, 2), (15, 2), (79, 3), (82, 4), (226, 8), (399, 8)])
def test_class_number_examples(d, h):
    assert class_number(d).h == h


def test_against_analytic_formula():
    for d in range(2, 100):
        if squarefree_part(d) == d:
            assert class_number(d).h == analytic_class_number(d), d


def test_reduced_forms_are_reduced_and_rho_permutes_them():
    for disc in (8, 40, 60, 316, 1636):
        forms = reduced_forms(disc)
        assert forms and all(is_reduced(f, disc) for f in forms)
        assert all(b * b - 4 * a * c == disc for a, b, c in forms)
        assert sorted(rho(f, disc) for f in forms) == forms


def test_narrow_vs_wide():
    c = class_number(3)  # eps = 2 + sqrt 3 has norm +1
    assert c.h_narrow == 2 * c.h and c.fundamental_unit_norm == 1
    c = class_number(409)
    assert c.h_narrow == c.h and c.fundamental_unit_norm == -1


def test_odd_class_number_for_primes_1_mod_4():
    for fp in scan(2, 3000):
        assert class_number(fp.p).h % 2 == 1


@pytest.mark.parametrize("p", TABLE_PRIMES)
def test_lemma3_certificates(p):
    cert = lemma3_certificate(validate(p))
    assert cert.certified and cert.sqrt2.h == 1
    assert cert.to_dict()["h_Q_sqrtp"]["h"] == 1


def test_certificate_failure_is_loud():
    from heron_descent import quadfield

    class Fake:
        p = 79  # h(79) = 3 is odd, so force a failure through h(2)
    orig = quadfield.class_number
    try:
        quadfield.class_number = lambda d: orig(10) if d == 2 else orig(d)
        with pytest.raises(CertificateFailed):
            quadfield.lemma3_certificate(Fake)
    finally:
        quadfield.class_number = orig


@pytest.mark.parametrize("d", [1, 4, 12, 0, 10**6 + 1])
def test_bad_inputs(d):
    with pytest.raises(InvalidArgument):
        class_number(d)
