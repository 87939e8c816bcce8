"""2-Selmer group, torsion, naive point search and the rank / Sha[2] conclusion."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import code_version, __version__
from .arith import primes_in
from .errors import CertificateFailed, InternalInconsistency
from .family import FamilyPair, curve_of
from .homspace import (
    ONE,
    P_CLASS,
    Q_CLASS,
    TORSION_IMAGE,
    DescentPair,
    HomogeneousSpace,
    SquareClass,
    canonical_rep,
    everywhere_locally_solvable,
    local_image,
    rational_point_search,
)
from .quadfield import lemma3_certificate

log = logging.getLogger(__name__)


def square_class_group(pair: FamilyPair) -> list[SquareClass]:
    """The 16 elements of Q(S,2); the group law is SquareClass.__mul__."""
    return SquareClass.all()


@dataclass(frozen=True)
class TorsionImage:
    members: tuple[DescentPair, ...]

    def __contains__(self, dp: DescentPair) -> bool:
        return dp in self.members


def torsion_image(pair: FamilyPair) -> TorsionImage:
    return TorsionImage(TORSION_IMAGE)


def normalize_pair(dp: DescentPair, A: TorsionImage | None = None) -> DescentPair:
    """Coset representative with b2 odd and b1 > 0 (so both positive when b1 b2 > 0)."""
    return canonical_rep(dp)


def is_subgroup(members) -> bool:
    members = set(members)
    return DescentPair(ONE, ONE) in members and all(a * b in members for a in members for b in members)


@dataclass
class SelmerGroup:
    members: frozenset
    rank: int
    witnesses: dict = field(default_factory=dict, repr=False)

    def __contains__(self, dp: DescentPair) -> bool:
        return dp in self.members


def compute_selmer(pair: FamilyPair, sanity_bound: int = 100) -> SelmerGroup:
    members, witnesses = [], {}
    for dp in DescentPair.all():
        ok, wit = everywhere_locally_solvable(HomogeneousSpace.of(dp, pair), sanity_bound)
        witnesses[dp] = wit
        if ok:
            members.append(dp)
    if not is_subgroup(members) or not all(t in members for t in TORSION_IMAGE):
        raise InternalInconsistency(f"Selmer set for p={pair.p} is not a subgroup containing A")
    s = int(math.log2(len(members))) - 2
    return SelmerGroup(frozenset(members), s, witnesses)


def expected_selmer(pair: FamilyPair) -> frozenset:
    gens = (*TORSION_IMAGE, DescentPair(P_CLASS, ONE), DescentPair(ONE, Q_CLASS))
    out = {DescentPair(ONE, ONE)}
    for g in gens:
        out |= {g * m for m in out}
    return frozenset(out)


# ---------------------------------------------------------------- the curve itself


def count_points_E(pair: FamilyPair, l: int) -> int:
    """#E(F_l) for an odd prime of good reduction."""
    x = np.arange(l, dtype=np.int64)
    fx = x * ((x - 1) % l) % l * ((x + pair.p**2) % l) % l
    leg = np.zeros(l, dtype=np.int64)
    leg[(x * x) % l] = 1
    chi = np.where(fx == 0, 0, np.where(leg[fx] == 1, 1, -1))
    return int(l + 1 + chi.sum())


@dataclass(frozen=True)
class TorsionInfo:
    points: tuple
    counts: dict
    gcd: int


def torsion_subgroup(pair: FamilyPair, min_primes: int = 5, max_primes: int = 40) -> TorsionInfo:
    """Rational torsion {O, (0,0), (1,0), (-p^2,0)}, bounded above by gcd of #E(F_l)."""
    e1, e2, e3 = curve_of(pair).roots
    points = (None, (e1, 0), (e2, 0), (e3, 0))
    counts, g = {}, 0
    for l in primes_in(3, 10**4):
        if l in (pair.p, pair.q):
            continue
        counts[l] = count_points_E(pair, l)
        g = math.gcd(g, counts[l])
        if g % 4:
            raise InternalInconsistency(f"#E(F_{l}) = {counts[l]} not divisible by 4")
        if len(counts) >= min_primes and g == 4:
            return TorsionInfo(points, counts, g)
        if len(counts) >= max_primes:
            break
    raise InternalInconsistency(f"torsion bound stuck at {g}")


_QR_MODULI = (64, 63, 65, 11)


def mw_point_search(pair: FamilyPair, bound: int, include_torsion: bool = False) -> list[tuple[Fraction, Fraction]]:
    """Points (m/e^2, y) with |m|, e <= bound and y >= 0, found by exact square tests."""
    p2 = pair.p**2
    if p2 * bound * bound >= 2**62:
        raise ValueError("bound too large for the vectorised search")
    m = np.arange(-bound, bound + 1, dtype=np.int64)
    qr = {M: np.isin(np.arange(M), (np.arange(M) ** 2) % M) for M in _QR_MODULI}
    found = []
    for e in range(1, bound + 1):
        e2 = e * e
        f1, f2, f3 = m, m - e2, m + p2 * e2
        sign = np.sign(f1) * np.sign(f2) * np.sign(f3)
        mask = (sign >= 0) & (np.gcd(m, e) == 1)
        for M, table in qr.items():
            r = (f1 % M) * (f2 % M) % M * (f3 % M) % M
            mask &= table[r]
        for mm in m[mask].tolist():
            n = mm * (mm - e2) * (mm + p2 * e2)
            r = math.isqrt(n)
            if r * r != n:
                continue
            if r == 0 and not include_torsion:
                continue  # every rational torsion point here has y = 0
            found.append((Fraction(mm, e2), Fraction(r, e2 * e)))
    return found


def descent_image(pair: FamilyPair, x: Fraction) -> DescentPair:
    return DescentPair(SquareClass.from_int(x.numerator * x.denominator, pair),
                       SquareClass.from_int((x - 1).numerator * (x - 1).denominator, pair))


# ---------------------------------------------------------------- conclusion


def _span(gens) -> frozenset:
    out = {DescentPair(ONE, ONE)}
    for g in gens:
        out |= {g * m for m in out}
    return frozenset(out)


def admissible_images(selmer: frozenset, excluded, known) -> list[frozenset]:
    """Subgroups A <= H <= Sel containing `known` and none of `excluded`."""
    quotient = sorted({canonical_rep(m) for m in selmer} - {DescentPair(ONE, ONE)})
    out = set()
    for r in range(len(quotient) + 1):
        for gens in itertools.combinations(quotient, r):
            h = _span((*TORSION_IMAGE, *known, *gens))
            if h <= selmer and not any(e in h for e in excluded):
                out.add(h)
    return sorted(out, key=len)


@dataclass
class DescentReport:
    p: int
    q: int
    status: str
    selmer_rank: int
    rank: int | None
    sha2_dim: int | None
    torsion_order: int
    selmer_members: list
    mw_points_found: list
    witnesses: dict
    certificates: dict
    searches: dict
    violations: list
    versions: dict
    metadata: dict

    @property
    def confirmed(self) -> bool:
        return self.status == "theorem-confirmed"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DescentReport":
        return cls(**data)


def _witness_table(selmer: SelmerGroup, decisive) -> dict:
    table = {}
    for dp, wit in sorted(selmer.witnesses.items()):
        row = {str(pl): wit[pl].to_dict() for pl in decisive}
        sweep = sorted(pl for pl in wit if pl not in decisive)
        row["sanity_sweep"] = {"primes": sweep, "all_solvable": all(wit[pl].solvable for pl in sweep)}
        table[dp.label()] = row
    return table


def conclude(pair: FamilyPair, curve_bound: int = 1000, space_bound: int = 10**4, sanity_bound: int = 100) -> DescentReport:
    violations = []
    selmer = compute_selmer(pair, sanity_bound)
    if selmer.members != expected_selmer(pair):
        violations.append({"kind": "selmer-mismatch", "members": sorted(m.label() for m in selmer.members)})

    try:
        l3 = lemma3_certificate(pair)
        certs = {"lemma3": l3.to_dict()}
        excluded = [DescentPair(P_CLASS, ONE), DescentPair(ONE, Q_CLASS)]
    except CertificateFailed as exc:
        certs = {"lemma3": {"certified": False, "error": str(exc)}}
        excluded = []
        violations.append({"kind": "class-number-hypothesis"})

    torsion = torsion_subgroup(pair)
    certs["torsion"] = {"order": 4, "gcd_point_counts": torsion.gcd, "counts": {str(k): v for k, v in torsion.counts.items()}}

    searches = {}
    for dp in (DescentPair(P_CLASS, ONE), DescentPair(ONE, Q_CLASS)):
        res = rational_point_search(HomogeneousSpace.of(dp, pair), space_bound)
        searches[dp.label()] = res.to_dict()
        if res.hit:
            violations.append({"kind": "rational-point", "space": dp.label(), "hit": list(res.hit)})

    points = mw_point_search(pair, curve_bound)
    known = []
    for x, y in points:
        img = descent_image(pair, x)
        known.append(img)
        violations.append({"kind": "non-torsion-point", "x": str(x), "y": str(y), "image": img.label()})
    searches["curve"] = {"bound": curve_bound, "non_torsion_points": len(points)}

    s = selmer.rank
    # dim Sha[2] is even (Cassels-Tate pairing); keep only images compatible with that
    candidates = [h for h in admissible_images(selmer.members, excluded, known)
                  if (s - (int(math.log2(len(h))) - 2)) % 2 == 0]
    ranks = sorted({int(math.log2(len(h))) - 2 for h in candidates})
    rank = ranks[0] if len(ranks) == 1 else None
    sha2 = s - rank if rank is not None else None
    certs["rank_argument"] = {
        "excluded_from_image": [e.label() for e in excluded],
        "known_in_image": [k.label() for k in known],
        "parity": "dim Sha[2] even (Cassels-Tate)",
        "admissible_image_orders": [len(h) for h in candidates],
    }
    if (s, rank, sha2) != (2, 0, 2):
        violations.append({"kind": "rank-conclusion", "selmer_rank": s, "rank": rank, "sha2_dim": sha2})

    # unsolvable witnesses refer to these by place
    certs["local_images"] = {str(pl): local_image(pair, pl).to_dict() for pl in pair.places}
    decisive = [str(pl) for pl in pair.places]
    return DescentReport(
        p=pair.p,
        q=pair.q,
        status="theorem-violation" if violations else "theorem-confirmed",
        selmer_rank=s,
        rank=rank,
        sha2_dim=sha2,
        torsion_order=len(torsion.points),
        selmer_members=sorted(m.label() for m in sorted(selmer.members)),
        mw_points_found=[[str(x), str(y)] for x, y in points],
        witnesses=_witness_table(selmer, pair.places),
        certificates=certs,
        searches=searches,
        violations=violations,
        versions={"package": __version__, "code": code_version()},
        metadata={"curve": f"y^2 = x(x-1)(x+{pair.p**2})", "heron_area": pair.p, "tan_half_angle": f"1/{pair.p}",
                  "decisive_places": decisive, "sanity_bound": sanity_bound},
    )
