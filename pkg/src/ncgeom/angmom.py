"""Exact angular-momentum coupling coefficients.

Clebsch-Gordan, Wigner 3j and Wigner 6j symbols with exact big-integer
arithmetic.  Every coefficient is returned as an :class:`ExactCoupling`,
i.e. a rational number times the square root of a square-free positive
integer, so products of couplings (as they appear in the fuzzy-harmonic
product formula) can be combined without any rounding.

Conventions: Condon-Shortley phase throughout; angular momenta are
half-integers stored as ``2j``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "HalfInt",
    "ExactCoupling",
    "CouplingRangeError",
    "clebsch_gordan",
    "wigner_3j",
    "wigner_6j",
]

# Largest 2j accepted; factorial arguments stay comfortably below 4*200+2.
MAX_TWO_J = 400


class CouplingRangeError(ValueError):
    """Raised when an angular momentum exceeds the supported range."""


@dataclass(frozen=True)
class HalfInt:
    """A half-integer j stored exactly as ``twice = 2j``."""

    twice: int

    @staticmethod
    def of(x) -> "HalfInt":
        """Coerce an int, float multiple of 1/2, Fraction or HalfInt."""
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, int):
            return HalfInt(2 * x)
        if isinstance(x, Fraction):
            t = 2 * x
            if t.denominator != 1:
                raise ValueError(f"{x} is not a half-integer")
            return HalfInt(int(t))
        t = 2 * x
        if t != int(t):
            raise ValueError(f"{x} is not a half-integer")
        return HalfInt(int(t))

    def __float__(self):
        return self.twice / 2.0

    def __repr__(self):
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def is_valid_projection_of(self, j: "HalfInt") -> bool:
        return abs(self.twice) <= j.twice and (self.twice - j.twice) % 2 == 0


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    if n < 0:
        raise ValueError("factorial of negative argument")
    return math.factorial(n)


def _sieve_primes(limit: int):
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [p for p in range(limit + 1) if sieve[p]]


_PRIMES = _sieve_primes(1024)


def _square_free_split(n: int):
    """Return (s, r) with n = s^2 * r and r square-free.

    Inputs here are always products/quotients of factorials, so all prime
    factors are small; trial division over a fixed sieve is enough.
    """
    if n <= 0:
        raise ValueError("radicand must be positive")
    s, r = 1, 1
    for p in _PRIMES:
        if p * p > n:
            break
        if n % p:
            continue
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            r *= p
    # leftover n is prime (or 1): factorial-product radicands cannot hold a
    # prime square beyond the sieve
    return s, r * n


@dataclass(frozen=True)
class ExactCoupling:
    """Exact value ``rat * sqrt(root)`` of a coupling coefficient.

    ``rat`` is an exact rational and ``root`` a square-free positive
    integer (1 for rational values, and for exact zero).
    """

    rat: Fraction
    root: int

    @staticmethod
    def zero() -> "ExactCoupling":
        return ExactCoupling(Fraction(0), 1)

    @staticmethod
    def make(rat, root=Fraction(1)) -> "ExactCoupling":
        """Normalize ``rat * sqrt(root)`` with rational ``root >= 0``."""
        rat = Fraction(rat)
        root = Fraction(root)
        if rat == 0 or root == 0:
            return ExactCoupling(Fraction(0), 1)
        if root < 0:
            raise ValueError("radicand must be nonnegative")
        # sqrt(p/q) = sqrt(p*q)/q
        radicand = root.numerator * root.denominator
        s, r = _square_free_split(radicand)
        return ExactCoupling(rat * Fraction(s, root.denominator), r)

    @property
    def is_zero(self) -> bool:
        return self.rat == 0

    @property
    def float_view(self) -> float:
        if self.rat == 0:
            return 0.0
        try:
            return float(self.rat) * math.sqrt(self.root)
        except OverflowError:
            ln = (
                math.log(abs(self.rat.numerator))
                - math.log(self.rat.denominator)
                + 0.5 * math.log(self.root)
            )
            return math.copysign(math.exp(ln), self.rat)

    def __float__(self):
        return self.float_view

    def __mul__(self, other):
        if isinstance(other, ExactCoupling):
            return ExactCoupling.make(
                self.rat * other.rat, Fraction(self.root * other.root)
            )
        return ExactCoupling.make(self.rat * Fraction(other), Fraction(self.root))

    __rmul__ = __mul__

    def __neg__(self):
        return ExactCoupling(-self.rat, self.root)

    def square(self) -> Fraction:
        return self.rat * self.rat * self.root


def _check_range(*js):
    for j in js:
        if abs(j.twice) > MAX_TWO_J:
            raise CouplingRangeError(
                f"2j = {j.twice} exceeds the supported maximum {MAX_TWO_J}"
            )


def _triangle_ok(a: int, b: int, c: int) -> bool:
    # args are 2j; parity condition makes a+b+c an even integer
    return abs(a - b) <= c <= a + b and (a + b + c) % 2 == 0


def _delta_sq(a: int, b: int, c: int) -> Fraction:
    # triangle coefficient Delta(abc)^2, args are 2j
    return Fraction(
        _fact((a + b - c) // 2)
        * _fact((a - b + c) // 2)
        * _fact((-a + b + c) // 2),
        _fact((a + b + c) // 2 + 1),
    )


def clebsch_gordan(j1, m1, j2, m2, j, m) -> ExactCoupling:
    """Clebsch-Gordan coefficient <j1 m1 j2 m2 | j m>, Condon-Shortley phase.

    Selection-rule violations give exact zero rather than an error.
    """
    j1, m1, j2, m2, j, m = (HalfInt.of(x) for x in (j1, m1, j2, m2, j, m))
    _check_range(j1, j2, j)
    if not (
        m1.is_valid_projection_of(j1)
        and m2.is_valid_projection_of(j2)
        and m.is_valid_projection_of(j)
    ):
        return ExactCoupling.zero()
    if m1.twice + m2.twice != m.twice:
        return ExactCoupling.zero()
    if not _triangle_ok(j1.twice, j2.twice, j.twice):
        return ExactCoupling.zero()

    tj1, tm1, tj2, tm2, tj, tm = (
        j1.twice, m1.twice, j2.twice, m2.twice, j.twice, m.twice,
    )
    kmin = max(0, (tj2 - tj - tm1) // 2, (tj1 + tm2 - tj) // 2)
    kmax = min((tj1 + tj2 - tj) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    if kmin > kmax:
        return ExactCoupling.zero()
    ssum = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            _fact(k)
            * _fact((tj1 + tj2 - tj) // 2 - k)
            * _fact((tj1 - tm1) // 2 - k)
            * _fact((tj2 + tm2) // 2 - k)
            * _fact((tj - tj2 + tm1) // 2 + k)
            * _fact((tj - tj1 - tm2) // 2 + k)
        )
        ssum += Fraction((-1) ** k, den)
    if ssum == 0:
        return ExactCoupling.zero()
    pref = (
        Fraction(tj + 1)
        * _delta_sq(tj1, tj2, tj)
        * _fact((tj1 + tm1) // 2)
        * _fact((tj1 - tm1) // 2)
        * _fact((tj2 + tm2) // 2)
        * _fact((tj2 - tm2) // 2)
        * _fact((tj + tm) // 2)
        * _fact((tj - tm) // 2)
    )
    return ExactCoupling.make(ssum, pref)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> ExactCoupling:
    """Wigner 3j symbol, related to clebsch_gordan by the standard phase."""
    j1, j2, j3, m1, m2, m3 = (HalfInt.of(x) for x in (j1, j2, j3, m1, m2, m3))
    cg = clebsch_gordan(j1, m1, j2, m2, j3, HalfInt(-m3.twice))
    if cg.is_zero:
        return cg
    # phase (-1)^(j1-j2-m3); the exponent is an integer whenever cg != 0
    phase = (-1) ** ((j1.twice - j2.twice - m3.twice) // 2)
    norm = ExactCoupling.make(Fraction(1), Fraction(1, j3.twice + 1))
    return (phase * cg) * norm


def wigner_6j(j1, j2, j3, j4, j5, j6) -> ExactCoupling:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6} via the Racah single-sum formula.

    Returns exact zero when any of the four triads violates the triangle
    rules.
    """
    js = tuple(HalfInt.of(x) for x in (j1, j2, j3, j4, j5, j6))
    _check_range(*js)
    a, b, c, d, e, f = (j.twice for j in js)
    if min(a, b, c, d, e, f) < 0:
        return ExactCoupling.zero()
    triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)]
    for x, y, z in triads:
        if not _triangle_ok(x, y, z):
            return ExactCoupling.zero()
    kmin = max((a + b + c) // 2, (a + e + f) // 2, (d + b + f) // 2, (d + e + c) // 2)
    kmax = min((a + b + d + e) // 2, (b + c + e + f) // 2, (a + c + d + f) // 2)
    ssum = Fraction(0)
    for k in range(kmin, kmax + 1):
        num = (-1) ** k * _fact(k + 1)
        den = (
            _fact(k - (a + b + c) // 2)
            * _fact(k - (a + e + f) // 2)
            * _fact(k - (d + b + f) // 2)
            * _fact(k - (d + e + c) // 2)
            * _fact((a + b + d + e) // 2 - k)
            * _fact((b + c + e + f) // 2 - k)
            * _fact((a + c + d + f) // 2 - k)
        )
        ssum += Fraction(num, den)
    if ssum == 0:
        return ExactCoupling.zero()
    pref = (
        _delta_sq(a, b, c) * _delta_sq(a, e, f) * _delta_sq(d, b, f) * _delta_sq(d, e, c)
    )
    return ExactCoupling.make(ssum, pref)
