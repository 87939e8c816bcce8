"""The curve family y^2 = x(x-1)(x+p^2) with p = 1 mod 8 and q = (p^2+1)/2 prime."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .arith import is_prime
from .errors import InvalidArgument


class RejectReason(str, Enum):
    NOT_PRIME = "not-prime"
    WRONG_RESIDUE = "wrong-residue-mod-8"
    Q_NOT_PRIME = "q-not-prime"


@dataclass(frozen=True)
class FamilyPair:
    p: int
    q: int

    def __post_init__(self):
        if 2 * self.q != self.p * self.p + 1 or self.p % 8 != 1:
            raise InvalidArgument(f"({self.p}, {self.q}) is not a family pair")

    @property
    def places(self) -> tuple:
        """Places where a descent verdict can differ from the good-prime default."""
        return ("inf", 2, 3, self.p, self.q)


@dataclass(frozen=True)
class Rejection:
    p: int
    reason: RejectReason


@dataclass(frozen=True)
class CurveParams:
    p: int
    roots: tuple[int, int, int]

    def f(self, x):
        e1, e2, e3 = self.roots
        return (x - e1) * (x - e2) * (x - e3)

    @property
    def discriminant(self) -> int:
        e1, e2, e3 = self.roots
        return 16 * ((e1 - e2) * (e1 - e3) * (e2 - e3)) ** 2


def validate(p: int) -> FamilyPair | Rejection:
    if not is_prime(p):
        return Rejection(p, RejectReason.NOT_PRIME)
    if p % 8 != 1:
        return Rejection(p, RejectReason.WRONG_RESIDUE)
    q = (p * p + 1) // 2
    if not is_prime(q):
        return Rejection(p, RejectReason.Q_NOT_PRIME)
    return FamilyPair(p, q)


def scan(lo: int, hi: int) -> list[FamilyPair]:
    if lo > hi:
        raise InvalidArgument(f"empty range [{lo}, {hi}]")
    start = lo + (1 - lo) % 8
    out = []
    for p in range(start, hi + 1, 8):
        # p-primality first: q ~ p^2/2 is the expensive test
        if is_prime(p) and is_prime((p * p + 1) // 2):
            out.append(FamilyPair(p, (p * p + 1) // 2))
    return out


def curve_of(pair: FamilyPair) -> CurveParams:
    return CurveParams(pair.p, (0, 1, -pair.p * pair.p))
