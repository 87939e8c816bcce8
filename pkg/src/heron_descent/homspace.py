"""Homogeneous spaces of the 2-descent and their local/global solvability.

For a pair (b1, b2) of square classes the space is

    b1 z1^2 - b2 z2^2 = 1,    b1 z1^2 - b1 b2 z3^2 = -p^2,

equivalently x = b1 z1^2, x - 1 = b2 z2^2, x + p^2 = b1 b2 z3^2 on
y^2 = x(x-1)(x+p^2). Two independent deciders exist for every place:

* ``locally_solvable_generic`` computes the image of the local Kummer map
  E(Q_l) -> (Q_l^*/Q_l^*2)^2 by sampling points until the image reaches its
  known order |E(Q_l)[2]| / |2|_l, then tests membership. Solvable answers
  carry a Hensel-certified triple.
* ``locally_solvable_rules`` applies the hand-derived case analysis for
  this family and answers ``None`` where that analysis is silent.
"""

from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import is_prime, primes_in
from .errors import InternalInconsistency, InvalidArgument
from .family import FamilyPair
from .padic import (
    INF,
    PRECISION_CAP,
    LiftCertificate,
    Place,
    QuadricSystem,
    class_mul,
    hensel_lift_system,
    local_class,
    sqrt_Ql,
    valuation,
)

log = logging.getLogger(__name__)

WORKING_PRECISION = 24

Rational = Fraction | int


@dataclass(frozen=True, order=True)
class SquareClass:
    """An element of Q(S,2) for S = {-1, 2, p, q}, stored as exponent bits."""

    sign: int = 0
    e2: int = 0
    ep: int = 0
    eq: int = 0

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return SquareClass(self.sign ^ other.sign, self.e2 ^ other.e2, self.ep ^ other.ep, self.eq ^ other.eq)

    def value(self, pair: FamilyPair) -> int:
        return (-1) ** self.sign * 2**self.e2 * pair.p**self.ep * pair.q**self.eq

    def label(self) -> str:
        body = "2" * self.e2 + "p" * self.ep + "q" * self.eq
        return ("-" if self.sign else "") + (body or "1")

    @classmethod
    def parse(cls, text: str, pair: FamilyPair | None = None) -> "SquareClass":
        text = text.strip()
        m = re.fullmatch(r"(-?)(?:1|(2?)(p?)(q?))", text)
        if m and text not in ("", "-"):
            sign, e2, ep, eq = m.groups()
            return cls(int(bool(sign)), int(bool(e2)), int(bool(ep)), int(bool(eq)))
        if pair is not None and re.fullmatch(r"-?\d+", text):
            return cls.from_int(int(text), pair)
        raise InvalidArgument(f"cannot parse square class {text!r}")

    @classmethod
    def from_int(cls, n: int, pair: FamilyPair) -> "SquareClass":
        if n == 0:
            raise InvalidArgument("zero is not a square class")
        bits = [int(n < 0)]
        n = abs(n)
        for prime in (2, pair.p, pair.q):
            e = 0
            while n % prime == 0:
                n //= prime
                e += 1
            bits.append(e % 2)
        if math.isqrt(n) ** 2 != n:
            raise InvalidArgument(f"{n} is not supported on {{2, p, q}} up to squares")
        return cls(*bits)

    @classmethod
    def all(cls) -> list["SquareClass"]:
        return [cls(*bits) for bits in itertools.product((0, 1), repeat=4)]


ONE = SquareClass()
MINUS_ONE = SquareClass(sign=1)
P_CLASS = SquareClass(ep=1)
Q_CLASS = SquareClass(eq=1)
TWO_Q = SquareClass(e2=1, eq=1)


@dataclass(frozen=True, order=True)
class DescentPair:
    b1: SquareClass
    b2: SquareClass

    def __mul__(self, other: "DescentPair") -> "DescentPair":
        return DescentPair(self.b1 * other.b1, self.b2 * other.b2)

    def label(self) -> str:
        return f"({self.b1.label()},{self.b2.label()})"

    @classmethod
    def parse(cls, b1: str, b2: str, pair: FamilyPair | None = None) -> "DescentPair":
        return cls(SquareClass.parse(b1, pair), SquareClass.parse(b2, pair))

    @classmethod
    def all(cls) -> list["DescentPair"]:
        return [cls(a, b) for a in SquareClass.all() for b in SquareClass.all()]


# Images of O, (0,0), (1,0), (-p^2,0) under the descent map.
TORSION_IMAGE = (
    DescentPair(ONE, ONE),
    DescentPair(MINUS_ONE, MINUS_ONE),
    DescentPair(ONE, TWO_Q),
    DescentPair(MINUS_ONE, MINUS_ONE * TWO_Q),
)


def canonical_rep(dp: DescentPair) -> DescentPair:
    """Representative of the torsion coset with b2 odd and b1 positive."""
    for t in TORSION_IMAGE:
        cand = dp * t
        if cand.b2.e2 == 0 and cand.b1.sign == 0:
            return cand
    raise InternalInconsistency(f"no canonical representative for {dp.label()}")


@dataclass(frozen=True)
class HomogeneousSpace:
    b1: int
    b2: int
    pair: FamilyPair
    classes: DescentPair | None = None

    @classmethod
    def of(cls, dp: DescentPair, pair: FamilyPair) -> "HomogeneousSpace":
        return cls(dp.b1.value(pair), dp.b2.value(pair), pair, dp)

    def label(self) -> str:
        return self.classes.label() if self.classes else f"({self.b1},{self.b2})"


def normalize_valuations(space: HomogeneousSpace, l: int, k: int) -> QuadricSystem:
    """Integral system for solutions whose coordinates all have valuation -k.

    With z_i = w_i / l^k the equations become
    b1 w1^2 - b2 w2^2 = l^2k and b1 w1^2 - b1 b2 w3^2 = -p^2 l^2k.
    """
    s = l ** (2 * k)
    return QuadricSystem(
        ((space.b1, -space.b2, 0), (space.b1, 0, -space.b1 * space.b2)),
        (s, -space.pair.p ** 2 * s),
    )


@dataclass
class LocalWitness:
    place: Place
    solvable: bool
    method: str
    evidence: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "solvable" if self.solvable else "unsolvable"

    def to_dict(self) -> dict:
        return {"place": str(self.place), "verdict": self.verdict, "method": self.method, "evidence": self.evidence}


def real_solvable(space: HomogeneousSpace) -> bool:
    return (space.b1 > 0) == (space.b2 > 0)


# ---------------------------------------------------------------- triples


@dataclass(frozen=True)
class LocalPoint:
    x: Fraction
    depth: int
    triple: tuple[int, int, int]
    certificate: LiftCertificate

    def to_dict(self) -> dict:
        c = self.certificate
        return {
            "x": str(self.x),
            "depth": self.depth,
            "triple": list(self.triple),
            "precision": c.precision,
            "jacobian_valuation": c.jacobian_valuation,
            "minor": list(c.minor),
        }


def triple_from_x(space: HomogeneousSpace, l: int, x: Rational, precision: int = WORKING_PRECISION):
    """Turn an x-coordinate into a certified primitive triple on the space over Z_l.

    Returns None when x does not lift to the space (some coordinate is not a
    square in Q_l) or the certificate is not conclusive.
    """
    x = Fraction(x)
    p2 = space.pair.p ** 2
    ys = (x / space.b1, (x - 1) / space.b2, (x + p2) / (space.b1 * space.b2))
    roots = []
    for y in ys:
        if y == 0:
            roots.append(None)
            continue
        if valuation(l, y) % 2 or any(local_class(l, y)):
            return None
        roots.append(sqrt_Ql(y, l, precision))
    k = max(0, -min(v for v, _ in filter(None, roots)))
    modulus = l**precision
    w = tuple(0 if r is None else l ** (r[0] + k) * r[1] % modulus for r in roots)
    system = normalize_valuations(space, l, k)
    res = system.primitive_at(l).residuals(w)
    good = min((valuation(l, r) for r in res if r), default=PRECISION_CAP)
    n = min(good, precision)
    cert = hensel_lift_system(system, l, w, n)
    if not cert.liftable:
        return None
    n = min(n, 2 * cert.jacobian_valuation + 3)
    w = tuple(c % l**n for c in w)
    return LocalPoint(x, k, w, hensel_lift_system(system, l, w, n))





# ---------------------------------------------------------------- generic decider


def _x_candidates(pair: FamilyPair, place: Place):
    roots = (0, 1, -pair.p ** 2)
    yield from roots  # 2-torsion first
    if place == INF:
        for e in roots:
            for m in (1, 2, 3):
                yield e + m
                yield e - m
        return
    for j in (0, 1, -1, 2, -2, 3, 4, 5, 6, -3, -4, 7, 8):
        step = Fraction(place) ** j
        for m in range(1, 65):
            for e in roots:
                yield e + m * step
                yield e - m * step


def _image_of_x(pair: FamilyPair, place: Place, x: Fraction):
    p2 = pair.p ** 2
    if x == 0:
        return local_class(place, -p2), local_class(place, -1)
    if x == 1:
        return local_class(place, 1), local_class(place, 1 + p2)
    if x == -p2:
        return local_class(place, -p2), local_class(place, -p2 - 1)
    c1, c2, c3 = (local_class(place, v) for v in (x, x - 1, x + p2))
    if any(class_mul(class_mul(c1, c2), c3)):
        return None  # x is not the abscissa of a local point
    return c1, c2


@dataclass(frozen=True)
class LocalImage:
    place: Place
    order: int
    samples: dict  # (class(b1), class(b2)) -> list of x

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "classes": [
                {"b1": list(k[0]), "b2": list(k[1]), "x": [str(x) for x in v]} for k, v in sorted(self.samples.items())
            ],
        }


def image_order(place: Place) -> int:
    """|E(Q_v)/2E(Q_v)| for a curve with full rational 2-torsion."""
    if place == INF:
        return 2
    return 8 if place == 2 else 4


@lru_cache(maxsize=None)
def local_image(pair: FamilyPair, place: Place, per_class: int = 3) -> LocalImage:
    target = image_order(place)
    samples: dict = {}
    for x in _x_candidates(pair, place):
        x = Fraction(x)
        key = _image_of_x(pair, place, x)
        if key is None:
            continue
        bucket = samples.setdefault(key, [])
        if len(bucket) < per_class:
            bucket.append(x)
        if len(samples) == target and all(len(b) >= per_class for b in samples.values()):
            break
    if len(samples) != target:
        raise InternalInconsistency(f"local image at {place} has {len(samples)} classes, expected {target}")
    keys = list(samples)
    for a, b in itertools.product(keys, keys):
        prod = (class_mul(a[0], b[0]), class_mul(a[1], b[1]))
        if prod not in samples:
            raise InternalInconsistency(f"local image at {place} is not a group")
    return LocalImage(place, target, samples)


def _class_key(space: HomogeneousSpace, place: Place):
    return local_class(place, space.b1), local_class(place, space.b2)


def locally_solvable_generic(space: HomogeneousSpace, place: Place) -> LocalWitness:
    if place != INF and not is_prime(place):
        raise InvalidArgument(f"{place} is not a prime")
    image = local_image(space.pair, place)
    key = _class_key(space, place)
    if key not in image.samples:
        return LocalWitness(
            place,
            False,
            "generic",
            {"kind": "image-exhaustion", "target": [list(key[0]), list(key[1])], "image_order": image.order},
        )
    if place == INF:
        x = image.samples[key][0]
        return LocalWitness(place, True, "generic", {"kind": "real-point", "x": str(x)})
    for x in image.samples[key]:
        pt = triple_from_x(space, place, x)
        if pt is not None:
            return LocalWitness(place, True, "generic", {"kind": "lift", **pt.to_dict()})
    raise InternalInconsistency(f"no certifiable triple for {space.label()} at {place}")


# ---------------------------------------------------------------- rule-based decider

# x-coordinates realising the explicit local constructions for (p,1) and (1,q);
# each entry: place -> (x as a function of p, depth, seed triple mod l).
def _constructions(pair: FamilyPair):
    p, q = pair.p, pair.q
    pc = {
        p: (Fraction(p), 0, (1, "sqrt(-1)", 1)),
        2: (Fraction(p, 16), 2, (1, 1, 1)),
    }
    if p % 3 == 1:
        pc[3] = (Fraction(p, 9), 1, (1, 1, 1))
    else:
        pc[3] = (Fraction(-p * p), 0, (1, 1, 0))
    qc = {
        q: (Fraction(1), 0, (1, 0, 0)),
        p: (Fraction(1), 0, (1, 0, "sqrt(2)")),
        3: (Fraction(1, 9), 1, (1, 1, 1)),
        2: (Fraction(1, 16), 2, (1, 1, 1)),
    }
    return {DescentPair(P_CLASS, ONE): pc, DescentPair(ONE, Q_CLASS): qc}


def locally_solvable_rules(space: HomogeneousSpace, place: Place) -> LocalWitness | None:
    """Decide from the family's case analysis; None where it says nothing."""
    if place == INF:
        ok = real_solvable(space)
        return LocalWitness(place, ok, "rules", {"kind": "real-sign", "b1_sign": int(space.b1 < 0), "b2_sign": int(space.b2 < 0)})
    if space.classes is None:
        return None
    pair = space.pair
    rep = canonical_rep(space.classes)
    cite = {"representative": rep.label()}
    if rep == TORSION_IMAGE[0]:
        return LocalWitness(place, True, "rules", {"kind": "torsion-image", **cite})
    if place == pair.p and rep.b2.ep:
        reason = "p divides gcd(b1,b2)" if rep.b1.ep else "p divides b2"
        return LocalWitness(place, False, "rules", {"kind": "rule", "rule": reason, **cite})
    if place == pair.q and rep.b1.eq:
        return LocalWitness(place, False, "rules", {"kind": "rule", "rule": "q divides b1", **cite})
    if place == 2 and rep.b1.e2:
        return LocalWitness(place, False, "rules", {"kind": "rule", "rule": "b1 even", **cite})
    table = _constructions(pair).get(rep)
    if table and place in table:
        x, depth, seed = table[place]
        pt = triple_from_x(HomogeneousSpace.of(rep, pair), place, x)
        if pt is None or pt.depth != depth:
            raise InternalInconsistency(f"construction for {rep.label()} at {place} does not certify")
        return LocalWitness(
            place, True, "rules", {"kind": "construction", "seed": [str(s) for s in seed], **cite, **pt.to_dict()}
        )
    return None


# ---------------------------------------------------------------- everywhere


def sanity_primes(pair: FamilyPair, bound: int) -> list[int]:
    return [l for l in primes_in(5, bound) if l not in (pair.p, pair.q)]


def everywhere_locally_solvable(space: HomogeneousSpace, sanity_bound: int = 100):
    """Solvability at every place, with both deciders cross-checked.

    Returns (verdict, witnesses) where witnesses maps each place to the
    generic witness (with the rule witness attached when one applies).
    """
    pair = space.pair
    witnesses = {}
    is_torsion = space.classes is not None and space.classes in TORSION_IMAGE
    for place in pair.places:
        gen = locally_solvable_generic(space, place)
        rule = locally_solvable_rules(space, place)
        if rule is not None and rule.solvable != gen.solvable:
            raise InternalInconsistency(
                f"{space.label()} at {place}: rules say {rule.verdict}, generic says {gen.verdict}"
            )
        if is_torsion and not gen.solvable:
            raise InternalInconsistency(f"torsion class {space.label()} unsolvable at {place}")
        if rule is not None:
            gen.evidence["rule"] = rule.evidence
        witnesses[place] = gen
    for l in sanity_primes(pair, sanity_bound):
        witnesses[l] = locally_solvable_generic(space, l)
    return all(w.solvable for w in witnesses.values()), witnesses


# ---------------------------------------------------------------- finite fields


def count_points_Fl(space: HomogeneousSpace, l: int) -> int:
    """Projective F_l-points of b1 z1^2 - b2 z2^2 = z0^2, b1 z1^2 - b1b2 z3^2 = -p^2 z0^2."""
    pair = space.pair
    if l < 5 or not is_prime(l) or (2 * pair.p * pair.q * space.b1 * space.b2) % l == 0:
        raise InvalidArgument(f"{l} is a bad prime for {space.label()}")
    b1, b2, p2 = space.b1 % l, space.b2 % l, pair.p ** 2 % l
    squares = np.zeros(l, dtype=np.int64)
    np.add.at(squares, (np.arange(l, dtype=np.int64) ** 2) % l, 1)
    z = np.arange(l, dtype=np.int64)
    z0, z1 = np.meshgrid(z, z, indexing="ij")
    s = (b1 * z1 * z1) % l
    # b2 z2^2 = b1 z1^2 - z0^2 and b1 b2 z3^2 = b1 z1^2 + p^2 z0^2
    t2 = (s - z0 * z0) * pow(b2, -1, l) % l
    t3 = (s + p2 * z0 * z0) * pow(b1 * b2, -1, l) % l
    cone = int((squares[t2] * squares[t3]).sum())
    return (cone - 1) // (l - 1)


# ---------------------------------------------------------------- rational points


@dataclass(frozen=True)
class RationalSearchResult:
    bound: int
    hit: tuple[int, int, int, int] | None = None

    def to_dict(self) -> dict:
        return {"bound": self.bound, "hit": list(self.hit) if self.hit else None}


def _isqrt_vec(t):
    r = np.floor(np.sqrt(t.astype(np.float64))).astype(np.int64)
    r -= (r * r > t).astype(np.int64)
    r += ((r + 1) * (r + 1) <= t).astype(np.int64)
    return r


def _check_hit(space, a1, a2, a3, d):
    b1, b2, p = space.b1, space.b2, space.pair.p
    return (
        b1 * a1 * a1 - b2 * a2 * a2 == d * d
        and b1 * a1 * a1 - b1 * b2 * a3 * a3 == -p * p * d * d
        and b1 * b2 * a3 * a3 - b2 * a2 * a2 == 2 * space.pair.q * d * d
    )


def rational_point_search(space: HomogeneousSpace, bound: int, block: int = 256) -> RationalSearchResult:
    """Exhaustive search for b1 a1^2 - b2 a2^2 = d^2, b1 a1^2 - b1 b2 a3^2 = -p^2 d^2.

    Ranges: 0 <= a1 <= H, 1 <= d <= H, |a2|, |a3| <= H; hits are reduced to
    lowest terms. Returns the first hit in (d, a1) order.
    """
    if bound < 1:
        raise InvalidArgument("bound must be positive")
    b1, b2, p = space.b1, space.b2, space.pair.p
    top = max(abs(b1), 1) * bound**2 + bound**2 + p * p * bound**2 + abs(b1 * b2) * bound**2
    if top >= 2**62:
        raise InvalidArgument("bound too large for the vectorised search")
    a1 = np.arange(0, bound + 1, dtype=np.int64)
    a1sq = b1 * a1 * a1
    for d0 in range(1, bound + 1, block):
        d = np.arange(d0, min(d0 + block, bound + 1), dtype=np.int64)[:, None]
        t2 = a1sq[None, :] - d * d  # = b2 a2^2
        ok = (t2 % b2 == 0) & (t2 // b2 >= 0)
        s2 = np.where(ok, t2 // b2, 0)
        r2 = _isqrt_vec(s2)
        ok &= (r2 * r2 == s2) & (r2 <= bound)
        if not ok.any():
            continue
        t3 = a1sq[None, :] + p * p * d * d  # = b1 b2 a3^2
        b12 = b1 * b2
        ok &= (t3 % b12 == 0) & (t3 // b12 >= 0)
        s3 = np.where(ok, t3 // b12, 0)
        r3 = _isqrt_vec(s3)
        ok &= (r3 * r3 == s3) & (r3 <= bound)
        for i, j in zip(*np.nonzero(ok)):
            dd, aa1, aa2, aa3 = int(d[i, 0]), int(a1[j]), int(r2[i, j]), int(r3[i, j])
            g = math.gcd(math.gcd(aa1, aa2), math.gcd(aa3, dd))
            hit = (aa1 // g, aa2 // g, aa3 // g, dd // g)
            if not _check_hit(space, *hit):
                raise InternalInconsistency(f"search hit {hit} fails exact check")
            _check_family_identities(space, hit)
            return RationalSearchResult(bound, hit)
    return RationalSearchResult(bound, None)


def _check_family_identities(space: HomogeneousSpace, hit) -> None:
    if space.classes not in (DescentPair(P_CLASS, ONE), DescentPair(ONE, Q_CLASS)):
        return
    a1, a2, a3, d = hit
    if d % 4 or abs(a3) % 4 != 1:
        raise InternalInconsistency(f"hit {hit} violates d = 0 mod 4, a3 = 1 mod 4")
