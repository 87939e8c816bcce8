"""Class numbers of real quadratic fields via cycles of reduced indefinite forms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .arith import squarefree_part
from .errors import CertificateFailed, InvalidArgument
from .family import FamilyPair

MAX_D = 10**6


@dataclass(frozen=True)
class RealQuadraticField:
    d: int

    def __post_init__(self):
        if self.d <= 1 or squarefree_part(self.d) != self.d:
            raise InvalidArgument(f"{self.d} is not a squarefree integer > 1")

    @property
    def discriminant(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d


@dataclass(frozen=True)
class ClassNumberCertificate:
    d: int
    h: int
    h_narrow: int
    fundamental_unit_norm: int
    method: str = "forms-enumeration"

    def to_dict(self) -> dict:
        return asdict(self)


def fundamental_unit(d: int) -> tuple[int, int, int]:
    """Smallest x + y*sqrt(d) > 1 with x^2 - d y^2 = +-1, from the continued fraction of sqrt(d)."""
    RealQuadraticField(d)
    a0 = math.isqrt(d)
    m, den, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while True:
        norm = p * p - d * q * q
        if norm in (1, -1):
            return p, q, norm
        m = den * a - m
        den = (d - m * m) // den
        a = (a0 + m) // den
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev


def is_reduced(form: tuple[int, int, int], disc: int) -> bool:
    """Indefinite reduction: 0 < b < sqrt(D) and sqrt(D) - b < 2|a| < sqrt(D) + b.

    All comparisons are done in integers; D is never a square here.
    """
    a, b, _ = form
    if b <= 0 or b * b >= disc:
        return False
    t = 2 * abs(a)
    return (t + b) ** 2 > disc and (t - b < 0 or (t - b) ** 2 < disc)


def reduced_forms(disc: int) -> list[tuple[int, int, int]]:
    out = []
    for b in range(disc % 2 or 2, math.isqrt(disc) + 1, 2):
        n = (disc - b * b) // 4  # = -a c > 0
        if (disc - b * b) % 4:
            continue
        for a in range(1, n + 1):
            if n % a:
                continue
            for sa in (a, -a):
                form = (sa, b, -n // sa)
                if math.gcd(math.gcd(*form[:2]), form[2]) == 1 and is_reduced(form, disc):
                    out.append(form)
    return sorted(out)


def rho(form: tuple[int, int, int], disc: int) -> tuple[int, int, int]:
    """(a, b, c) -> (c, b', (b'^2 - D)/4c) with b' = -b mod 2|c| in (sqrt(D) - 2|c|, sqrt(D))."""
    _, b, c = form
    s = math.isqrt(disc)
    two_c = 2 * abs(c)
    b2 = s - (s + b) % two_c
    return c, b2, (b2 * b2 - disc) // (4 * c)


def narrow_class_number(disc: int) -> int:
    remaining = set(reduced_forms(disc))
    cycles = 0
    while remaining:
        start = min(remaining)
        f = start
        while True:
            remaining.discard(f)
            f = rho(f, disc)
            if f == start:
                break
            if f not in remaining:
                raise CertificateFailed(f"rho left the reduced set at {f} for D={disc}")
        cycles += 1
    return cycles


def class_number(d: int) -> ClassNumberCertificate:
    if not 1 < d <= MAX_D:
        raise InvalidArgument(f"d={d} outside (1, {MAX_D}]")
    field = RealQuadraticField(d)
    hn = narrow_class_number(field.discriminant)
    _, _, norm = fundamental_unit(d)
    h = hn if norm == -1 else hn // 2
    return ClassNumberCertificate(d, h, hn, norm)


@dataclass(frozen=True)
class Lemma3Certificate:
    p: int
    sqrt2: ClassNumberCertificate
    sqrtp: ClassNumberCertificate

    @property
    def certified(self) -> bool:
        return self.sqrt2.h == 1 and self.sqrtp.h % 2 == 1

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "h_Q_sqrt2": self.sqrt2.to_dict(),
            "h_Q_sqrtp": self.sqrtp.to_dict(),
            "certified": self.certified,
            "conclusion": "no rational points on the (p,1) and (1,q) spaces",
        }


def lemma3_certificate(pair: FamilyPair) -> Lemma3Certificate:
    """Class-number inputs to the non-existence argument for the (p,1) and (1,q) spaces."""
    cert = Lemma3Certificate(pair.p, class_number(2), class_number(pair.p))
    if not cert.certified:
        raise CertificateFailed(f"class number hypotheses fail for p={pair.p}: {cert.to_dict()}")
    return cert
