"""Integer and modular arithmetic primitives.

Every function takes Python ints (arbitrary precision) and returns fully
reduced residues as plain ints; the modulus is always the one passed in.
"""

from __future__ import annotations

import math

from .errors import InvalidArgument

# Deterministic Miller-Rabin for n < 3.317e24 (Sorenson & Webster 2015).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981
# 64 extra rounds beyond the deterministic range: error < 4**-64 = 2**-128.
_MR_EXTRA_ROUNDS = 64

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    if modulus < 2:
        raise InvalidArgument(f"modulus must be >= 2, got {modulus}")
    if exponent < 0:
        raise InvalidArgument(f"exponent must be nonnegative, got {exponent}")
    return pow(base, exponent, modulus)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 3, by quadratic reciprocity."""
    if n < 3 or n % 2 == 0:
        raise InvalidArgument(f"jacobi needs odd n >= 3, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _miller_rabin_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = [a for a in _MR_BASES if a < n]
    if n >= _MR_DETERMINISTIC_LIMIT:
        # fixed pseudo-random bases so the answer is reproducible
        bases += [2 + (0x9E3779B97F4A7C15 * (i + 1)) % (n - 3) for i in range(_MR_EXTRA_ROUNDS)]
    return all(_miller_rabin_round(n, d, s, a) for a in bases)


def sqrt_mod_prime(a: int, l: int) -> int | None:
    """Square root of a modulo the odd prime l (Tonelli-Shanks).

    Returns the root in [1, (l-1)/2], 0 when l divides a, and None when a
    is a non-residue.
    """
    if l < 3 or not is_prime(l):
        raise InvalidArgument(f"sqrt_mod_prime needs an odd prime, got {l}")
    a %= l
    if a == 0:
        return 0
    if jacobi(a, l) != 1:
        return None
    if l % 4 == 3:
        r = pow(a, (l + 1) // 4, l)
    else:
        q, s = l - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while jacobi(z, l) != -1:
            z += 1
        m, c, t, r = s, pow(z, q, l), pow(a, q, l), pow(a, (q + 1) // 2, l)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % l
                i += 1
            b = pow(c, 1 << (m - i - 1), l)
            m, c = i, b * b % l
            t, r = t * c % l, r * b % l
    return min(r, l - r)


def primes_in(lo: int, hi: int) -> list[int]:
    """Primes in [lo, hi] by a plain sieve; hi is expected to be modest."""
    if hi < 2 or hi < lo:
        return []
    sieve = bytearray([1]) * (hi + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(hi) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, hi + 1, i)))
    return [i for i in range(max(lo, 2), hi + 1) if sieve[i]]


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def squarefree_part(n: int) -> int:
    """Signed squarefree kernel by trial division (small inputs only)."""
    if n == 0:
        raise InvalidArgument("zero has no squarefree part")
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    f = 2
    while f * f <= n:
        e = 0
        while n % f == 0:
            n //= f
            e += 1
        if e % 2:
            out *= f
        f += 1 if f == 2 else 2
    return sign * out * n
