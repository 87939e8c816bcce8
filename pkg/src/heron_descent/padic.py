"""l-adic valuations, local square classes and certified Hensel lifting.

Places are either a prime ``l`` (an int) or the string ``"inf"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .arith import jacobi, sqrt_mod_prime
from .errors import InternalInconsistency, InvalidArgument, PreconditionFailed

INF = "inf"
PRECISION_CAP = 64

Place = Union[int, str]
Rational = Union[int, Fraction]


def valuation(l: int, x: Rational) -> int:
    x = Fraction(x)
    if x == 0:
        raise InvalidArgument("valuation of zero is undefined")
    v = 0
    num, den = x.numerator, x.denominator
    while num % l == 0:
        num //= l
        v += 1
    while den % l == 0:
        den //= l
        v -= 1
    return v


def unit_part(l: int, x: Rational) -> Fraction:
    x = Fraction(x)
    return x / Fraction(l) ** valuation(l, x)


def _check_precision(n: int) -> None:
    if n > PRECISION_CAP:
        raise InternalInconsistency(f"precision {n} exceeds cap {PRECISION_CAP}")


def residue_of(x: Rational, modulus: int) -> int:
    """Image of an l-integral rational in Z/modulus."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


@dataclass(frozen=True)
class ValuedRational:
    l: int
    valuation: int
    unit_residue: int
    precision: int

    def reconstruct(self) -> Fraction:
        return Fraction(self.l) ** self.valuation * self.unit_residue


def decompose(l: int, x: Rational, precision: int) -> ValuedRational:
    _check_precision(precision)
    v = valuation(l, x)
    return ValuedRational(l, v, residue_of(unit_part(l, x), l**precision), precision)


def local_class(place: Place, x: Rational) -> tuple[int, ...]:
    """Square class of x in Q_place^*/(Q_place^*)^2 as a vector over F_2.

    Multiplication of classes is componentwise xor.
    """
    x = Fraction(x)
    if x == 0:
        raise InvalidArgument("zero has no square class")
    if place == INF:
        return (int(x < 0),)
    v = valuation(place, x)
    u = unit_part(place, x)
    if place == 2:
        r = residue_of(u, 8)
        minus = int(r % 4 == 3)
        if minus:
            r = -r % 8
        return (v % 2, minus, int(r == 5))
    return (v % 2, int(jacobi(residue_of(u, place), place) == -1))


def class_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(i ^ j for i, j in zip(a, b))


def is_square_in_Ql(place: Place, x: Rational) -> bool:
    return not any(local_class(place, x))


def _poly_eval(coeffs, x, modulus):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % modulus
    return acc


def _poly_deriv(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def hensel_lift_root(coeffs: list[int], l: int, x1: int, precision: int) -> int:
    """Lift a simple root of f mod l to a root mod l**precision.

    ``coeffs`` are listed from the constant term upward.
    """
    _check_precision(precision)
    if _poly_eval(coeffs, x1, l) != 0:
        raise PreconditionFailed(f"f({x1}) != 0 mod {l}")
    d = _poly_deriv(coeffs)
    if _poly_eval(d, x1, l) == 0:
        raise PreconditionFailed(f"f'({x1}) == 0 mod {l}")
    x, n = x1 % l, 1
    while n < precision:
        n = min(2 * n, precision)
        m = l**n
        x = (x - _poly_eval(coeffs, x, m) * pow(_poly_eval(d, x, m), -1, m)) % m
    return x


def sqrt_unit(u: Rational, l: int, precision: int) -> int:
    """A square root mod l**precision of an l-adic unit that is a square in Q_l."""
    _check_precision(precision)
    if l == 2:
        r0 = residue_of(u, 2 ** (precision + 1))
        if r0 % 8 != 1:
            raise PreconditionFailed(f"{u} is not a 2-adic square")
        r, n = 1, 3
        while n < precision + 1:
            if (r * r - r0) % 2 ** (n + 1):
                r += 2 ** (n - 1)
            n += 1
        return r % 2**precision
    ur = residue_of(u, l)
    r0 = sqrt_mod_prime(ur, l)
    if r0 is None or r0 == 0:
        raise PreconditionFailed(f"{u} is not a square unit mod {l}")
    return hensel_lift_root([-residue_of(u, l**precision), 0, 1], l, r0, precision)


def sqrt_Ql(x: Rational, l: int, precision: int) -> tuple[int, int]:
    """Square root of a square x in Q_l as (valuation, unit residue mod l**precision).

    x = 0 gives (precision, 0), i.e. zero to the working precision.
    """
    x = Fraction(x)
    if x == 0:
        return precision, 0
    v = valuation(l, x)
    if v % 2 or not is_square_in_Ql(l, x):
        raise PreconditionFailed(f"{x} is not a square in Q_{l}")
    return v // 2, sqrt_unit(unit_part(l, x), l, precision)


@dataclass(frozen=True)
class QuadricSystem:
    """Two diagonal quadrics: sum(coeffs[i][j] * w_j^2) = rhs[i] for i = 0, 1."""

    coeffs: tuple[tuple[int, int, int], tuple[int, int, int]]
    rhs: tuple[int, int]

    def residuals(self, w) -> tuple[int, int]:
        return tuple(
            sum(c * x * x for c, x in zip(row, w)) - r for row, r in zip(self.coeffs, self.rhs)
        )

    def primitive_at(self, l: int) -> "QuadricSystem":
        """Divide each equation by its l-content; same Z_l solutions."""
        rows, rhs = [], []
        for row, r in zip(self.coeffs, self.rhs):
            content = min(valuation(l, c) for c in (*row, r) if c)
            rows.append(tuple(c // l**content for c in row))
            rhs.append(r // l**content)
        return QuadricSystem(tuple(rows), tuple(rhs))

    def minors(self, w) -> dict[tuple[int, int], int]:
        """2x2 minors of the Jacobian, keyed by the variable pair they involve."""
        (c1, c2, c3), (d1, d2, d3) = self.coeffs
        c, d = (c1, c2, c3), (d1, d2, d3)
        return {
            (i, j): 4 * w[i] * w[j] * (c[i] * d[j] - c[j] * d[i])
            for i, j in ((0, 1), (0, 2), (1, 2))
        }


def _val_or_inf(l: int, n: int, cap: int) -> int:
    return cap if n == 0 else min(valuation(l, n), cap)


@dataclass(frozen=True)
class LiftCertificate:
    l: int
    precision: int
    jacobian_valuation: int
    minor: tuple[int, int]
    liftable: bool

    @property
    def conclusion(self) -> str:
        return "liftable" if self.liftable else "not-yet-decidable"


def hensel_lift_system(system: QuadricSystem, l: int, approx, precision: int) -> LiftCertificate:
    """Quantitative Hensel test for a two-quadric system at a primitive triple.

    With k the smallest valuation of a Jacobian 2x2 minor, a solution mod
    l^N with N >= 2k + 1 lifts to a Z_l solution congruent mod l^(k+1).
    """
    _check_precision(precision)
    system = system.primitive_at(l)
    modulus = l**precision
    if all(x % l == 0 for x in approx):
        raise PreconditionFailed(f"triple {approx} is not primitive at {l}")
    bad = [r for r in system.residuals(approx) if r % modulus]
    if bad:
        raise PreconditionFailed(f"triple {approx} fails the system mod {l}^{precision}")
    minors = system.minors(approx)
    vals = {key: _val_or_inf(l, m % l ** (precision + 1) or 0, precision + 1) for key, m in minors.items()}
    key = min(vals, key=lambda kk: (vals[kk], kk))
    k = vals[key]
    return LiftCertificate(l, precision, k, key, precision >= 2 * k + 1)


def refine(system: QuadricSystem, l: int, approx, precision: int, target: int) -> tuple[int, int, int]:
    """Newton-refine a certified triple to a solution mod l**target.

    The coordinate outside the certificate's minor stays fixed.
    """
    _check_precision(target)
    cert = hensel_lift_system(system, l, approx, precision)
    if not cert.liftable:
        raise PreconditionFailed("refine needs a liftable certificate")
    system = system.primitive_at(l)
    i, j = cert.minor
    w = list(approx)
    modulus = l**target
    for _ in range(4 * PRECISION_CAP):
        f = system.residuals(w)
        if all(r % modulus == 0 for r in f):
            return tuple(x % modulus for x in w)
        (c, d) = system.coeffs
        a11, a12 = 2 * c[i] * w[i], 2 * c[j] * w[j]
        a21, a22 = 2 * d[i] * w[i], 2 * d[j] * w[j]
        det = a11 * a22 - a12 * a21
        kd = valuation(l, det)
        unit_inv = pow(residue_of(unit_part(l, det), modulus), -1, modulus)
        # delta = -adj(J) f / det, exact in Z_l since v(f) > 2 v(det)
        n1 = a22 * f[0] - a12 * f[1]
        n2 = -a21 * f[0] + a11 * f[1]
        if n1 % l**kd or n2 % l**kd:
            raise InternalInconsistency("Newton step left Z_l")
        w[i] = (w[i] - (n1 // l**kd) * unit_inv) % modulus
        w[j] = (w[j] - (n2 // l**kd) * unit_inv) % modulus
    raise InternalInconsistency("Newton refinement did not converge")
