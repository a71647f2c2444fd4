"""Exact formal algebra of the Heisenberg plane with [p, q] = i*eps.

Elements are finite sums  sum_{a,b,r} c_{abr} eps^r B(a, b)  where B is one
of three bases:

* ``normal``       N(a,b) = p^a q^b  (all p's to the left),
* ``wick``         S(a,b) = symmetrized average of all orderings of p^a q^b,
* ``commutative``  plain monomials of the classical limit.

Coefficients are exact complex rationals, so products, basis conversions,
the two star products and all identity checks hold to exact equality.
"""

import math
import re
from fractions import Fraction

from ._qrat import QRat

__all__ = [
    "NORMAL",
    "WICK",
    "COMMUTATIVE",
    "Element",
    "basis_element",
    "monomial",
    "one",
    "zero",
    "normal_mul",
    "wick_mul",
    "wick_to_normal",
    "normal_to_wick",
    "order_normal",
    "order_wick",
    "unorder",
    "commutative_mul",
    "star_vey",
    "star_normal",
    "poisson_bracket",
    "poisson_leading",
    "serialize_element",
    "parse_element",
    "format_element",
    "parse_expr",
]

NORMAL = "normal"
WICK = "wick"
COMMUTATIVE = "commutative"
_BASES = (NORMAL, WICK, COMMUTATIVE)


def _clean(terms):
    out = {}
    for key, poly in terms.items():
        inner = {r: c for r, c in poly.items() if not c.is_zero}
        if inner:
            out[key] = inner
    return out


class Element:
    """A finite sum of basis terms with eps-polynomial coefficients.

    ``terms`` maps (a, b) -> {eps_power: QRat}.  Instances are treated as
    immutable; all operations return new elements.
    """

    __slots__ = ("basis", "terms")

    def __init__(self, basis, terms=None):
        if basis not in _BASES:
            raise ValueError(f"unknown basis {basis!r}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "terms", _clean(terms or {}))

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.basis == other.basis
            and self.terms == other.terms
        )

    def __hash__(self):
        frozen = tuple(
            (key, tuple(sorted(poly.items())))
            for key, poly in sorted(self.terms.items())
        )
        return hash((self.basis, frozen))

    @property
    def is_zero(self):
        return not self.terms

    def coeff(self, a, b, r=0) -> QRat:
        return self.terms.get((a, b), {}).get(r, QRat())

    def scaled(self, c) -> "Element":
        c = QRat.of(c)
        return Element(
            self.basis,
            {k: {r: c * v for r, v in poly.items()} for k, poly in self.terms.items()},
        )

    def times_eps(self, k=1) -> "Element":
        return Element(
            self.basis,
            {k2: {r + k: v for r, v in poly.items()} for k2, poly in self.terms.items()},
        )

    def __add__(self, other):
        if self.basis != other.basis:
            raise ValueError("cannot add elements in different bases")
        out = {k: dict(p) for k, p in self.terms.items()}
        for key, poly in other.terms.items():
            dest = out.setdefault(key, {})
            for r, c in poly.items():
                dest[r] = dest.get(r, QRat()) + c
        return Element(self.basis, out)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __neg__(self):
        return self.scaled(-1)

    def conjugated(self) -> "Element":
        """Complex-conjugate all coefficients (leaves the basis labels)."""
        return Element(
            self.basis,
            {k: {r: v.conjugate() for r, v in p.items()} for k, p in self.terms.items()},
        )

    def total_degree(self):
        return max((a + b for a, b in self.terms), default=0)

    def __repr__(self):
        return f"<{self.basis}: {format_element(self)}>"


def basis_element(basis, a, b, coeff=1, eps_power=0) -> Element:
    if a < 0 or b < 0 or eps_power < 0:
        raise ValueError("powers must be nonnegative")
    return Element(basis, {(a, b): {eps_power: QRat.of(coeff)}})


def monomial(a, b, coeff=1, eps_power=0) -> Element:
    """Commutative monomial coeff * eps^r * p^a q^b."""
    return basis_element(COMMUTATIVE, a, b, coeff, eps_power)


def one(basis=COMMUTATIVE) -> Element:
    return basis_element(basis, 0, 0)


def zero(basis=COMMUTATIVE) -> Element:
    return Element(basis)


def _add_into(dest, key, r, c):
    if c.is_zero:
        return
    poly = dest.setdefault(key, {})
    poly[r] = poly.get(r, QRat()) + c


def _require(el, basis, name):
    if el.basis != basis:
        raise ValueError(f"{name} expects a {basis} element, got {el.basis}")


def normal_mul(u: Element, v: Element) -> Element:
    """Product in the normal basis:

    N(a,b) N(c,d) = sum_r (-i eps)^r / r! * b!/(b-r)! * c!/(c-r)!
                    * N(a+c-r, b+d-r),   r <= min(b, c).
    """
    _require(u, NORMAL, "normal_mul")
    _require(v, NORMAL, "normal_mul")
    out = {}
    for (a, b), pu in u.terms.items():
        for (c, d), pv in v.terms.items():
            for r in range(min(b, c) + 1):
                frac = Fraction(
                    math.factorial(b) // math.factorial(b - r)
                    * (math.factorial(c) // math.factorial(c - r)),
                    math.factorial(r),
                )
                coef = QRat.i_power(r) * QRat.of(Fraction((-1) ** r) * frac)
                for r1, c1 in pu.items():
                    for r2, c2 in pv.items():
                        _add_into(out, (a + c - r, b + d - r), r1 + r2 + r, coef * c1 * c2)
    return Element(NORMAL, out)


def wick_mul(u: Element, v: Element) -> Element:
    """Product in the Wick (symmetric) basis.

    S(a,b) S(c,d) = sum_r (i eps / 2)^r  sum_s (-1)^(r-s) / (s!(r-s)!)
                    * a!/(a-s)! * b!/(b-r+s)! * c!/(c-r+s)! * d!/(d-s)!
                    * S(a+c-r, b+d-r)
    with s running over max(0, r-b, r-c) .. min(r, a, d).  The inner bounds
    are fixed by the factorial constraints; the double sum is validated
    against the normal-basis route in the test suite.
    """
    _require(u, WICK, "wick_mul")
    _require(v, WICK, "wick_mul")
    fact = math.factorial
    out = {}
    for (a, b), pu in u.terms.items():
        for (c, d), pv in v.terms.items():
            for r in range(min(a + c, b + d) + 1):
                s_lo = max(0, r - b, r - c)
                s_hi = min(r, a, d)
                if s_lo > s_hi:
                    continue
                inner = Fraction(0)
                for s in range(s_lo, s_hi + 1):
                    num = (
                        (fact(a) // fact(a - s))
                        * (fact(b) // fact(b - r + s))
                        * (fact(c) // fact(c - r + s))
                        * (fact(d) // fact(d - s))
                    )
                    inner += Fraction((-1) ** (r - s) * num, fact(s) * fact(r - s))
                if inner == 0:
                    continue
                coef = QRat.i_power(r) * QRat.of(inner / Fraction(2) ** r)
                for r1, c1 in pu.items():
                    for r2, c2 in pv.items():
                        _add_into(out, (a + c - r, b + d - r), r1 + r2 + r, coef * c1 * c2)
    return Element(WICK, out)


def wick_to_normal(u: Element) -> Element:
    """S(a,b) = sum_r (-i eps/2)^r / r! * a!/(a-r)! * b!/(b-r)! N(a-r, b-r)."""
    _require(u, WICK, "wick_to_normal")
    return _convert(u, NORMAL, -1)


def normal_to_wick(u: Element) -> Element:
    """N(a,b) = sum_r (+i eps/2)^r / r! * a!/(a-r)! * b!/(b-r)! S(a-r, b-r)."""
    _require(u, NORMAL, "normal_to_wick")
    return _convert(u, WICK, +1)


def _convert(u, target, sign):
    fact = math.factorial
    out = {}
    for (a, b), poly in u.terms.items():
        for r in range(min(a, b) + 1):
            frac = Fraction(
                (fact(a) // fact(a - r)) * (fact(b) // fact(b - r)),
                fact(r) * 2**r,
            )
            coef = QRat.i_power(r) * QRat.of(Fraction(sign) ** r * frac)
            for r1, c1 in poly.items():
                _add_into(out, (a - r, b - r), r1 + r, coef * c1)
    return Element(target, out)


def order_normal(u: Element) -> Element:
    """Normal ordering: relabel each commutative monomial p^a q^b as N(a,b)."""
    _require(u, COMMUTATIVE, "order_normal")
    return Element(NORMAL, u.terms)


def order_wick(u: Element) -> Element:
    """Wick (symmetric) ordering: relabel p^a q^b as S(a,b)."""
    _require(u, COMMUTATIVE, "order_wick")
    return Element(WICK, u.terms)


def unorder(u: Element) -> Element:
    """Inverse of the ordering maps: collect eps-power coefficients.

    For an element written in the normal (resp. Wick) basis this is the
    exact inverse of order_normal (resp. order_wick).
    """
    if u.basis == COMMUTATIVE:
        return u
    return Element(COMMUTATIVE, u.terms)


def commutative_mul(u: Element, v: Element) -> Element:
    _require(u, COMMUTATIVE, "commutative_mul")
    _require(v, COMMUTATIVE, "commutative_mul")
    out = {}
    for (a, b), pu in u.terms.items():
        for (c, d), pv in v.terms.items():
            for r1, c1 in pu.items():
                for r2, c2 in pv.items():
                    _add_into(out, (a + c, b + d), r1 + r2, c1 * c2)
    return Element(COMMUTATIVE, out)


def diff_p(u: Element) -> Element:
    out = {}
    for (a, b), poly in u.terms.items():
        if a == 0:
            continue
        for r, c in poly.items():
            _add_into(out, (a - 1, b), r, c * a)
    return Element(u.basis, out)


def diff_q(u: Element) -> Element:
    out = {}
    for (a, b), poly in u.terms.items():
        if b == 0:
            continue
        for r, c in poly.items():
            _add_into(out, (a, b - 1), r, c * b)
    return Element(u.basis, out)


def poisson_bracket(u: Element, v: Element) -> Element:
    """Classical bracket {u,v} = du/dp dv/dq - du/dq dv/dp."""
    return commutative_mul(diff_p(u), diff_q(v)) - commutative_mul(diff_q(u), diff_p(v))


def star_vey(u: Element, v: Element) -> Element:
    """Vey star product u *_W v = exp(i eps P / 2)(u, v).

    P is the Poisson bidifferential; the series is applied operator by
    operator and terminates because u, v are polynomials.
    """
    _require(u, COMMUTATIVE, "star_vey")
    _require(v, COMMUTATIVE, "star_vey")
    result = commutative_mul(u, v)
    pairs = [(u, v)]
    r = 0
    while pairs:
        r += 1
        nxt = []
        for left, right in pairs:
            t1 = (diff_p(left), diff_q(right))
            t2 = (diff_q(left).scaled(-1), diff_p(right))
            for pair in (t1, t2):
                if not (pair[0].is_zero or pair[1].is_zero):
                    nxt.append(pair)
        pairs = nxt
        if not pairs:
            break
        coef = QRat.i_power(r) * QRat.of(Fraction(1, 2**r * math.factorial(r)))
        term = zero()
        for left, right in pairs:
            term = term + commutative_mul(left, right)
        result = result + term.scaled(coef).times_eps(r)
    return result


def star_normal(u: Element, v: Element) -> Element:
    """Normal star product u *_N v = exp(-i eps N)(u, v), N = d2/dp d1/dq."""
    _require(u, COMMUTATIVE, "star_normal")
    _require(v, COMMUTATIVE, "star_normal")
    result = commutative_mul(u, v)
    left, right = u, v
    r = 0
    while True:
        r += 1
        left = diff_q(left)
        right = diff_p(right)
        if left.is_zero or right.is_zero:
            break
        coef = QRat.i_power(r) * QRat.of(Fraction((-1) ** r, math.factorial(r)))
        result = result + commutative_mul(left, right).scaled(coef).times_eps(r)
    return result


_STAR = {"vey": star_vey, "wick": star_vey, "normal": star_normal}


def poisson_leading(u: Element, v: Element, star="vey") -> Element:
    """eps^1 coefficient of (1/i)(u*v - v*u); equals {u, v} for both stars."""
    try:
        product = _STAR[star]
    except KeyError:
        raise ValueError(f"unknown star product {star!r}") from None
    diff = product(u, v) - product(v, u)
    out = {}
    minus_i = QRat.i_power(3)
    for key, poly in diff.terms.items():
        if 1 in poly:
            _add_into(out, key, 0, minus_i * poly[1])
    return Element(COMMUTATIVE, out)


# ---------------------------------------------------------------------------
# textual round-trip format
#
#   basis: normal
#   (1/1 + 0/1 i) eps^0 p^1 q^1
#   (0/1 + -1/1 i) eps^1 p^0 q^0

_TERM_RE = re.compile(
    r"^\(\s*(-?\d+)/(\d+)\s*\+\s*(-?\d+)/(\d+)\s*i\s*\)"
    r"\s*eps\^(\d+)\s*p\^(\d+)\s*q\^(\d+)\s*$"
)


def serialize_element(u: Element) -> str:
    lines = [f"basis: {u.basis}"]
    flat = []
    for (a, b), poly in u.terms.items():
        for r, c in poly.items():
            flat.append((r, a, b, c))
    for r, a, b, c in sorted(flat, key=lambda t: t[:3]):
        den = math.lcm(c.re.denominator, c.im.denominator)
        re_num = c.re.numerator * (den // c.re.denominator)
        im_num = c.im.numerator * (den // c.im.denominator)
        lines.append(f"({re_num}/{den} + {im_num}/{den} i) eps^{r} p^{a} q^{b}")
    return "\n".join(lines) + "\n"


def parse_element(text: str) -> Element:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("basis:"):
        raise ValueError("missing 'basis:' header")
    basis = lines[0].split(":", 1)[1].strip()
    if basis not in _BASES:
        raise ValueError(f"unknown basis {basis!r}")
    terms = {}
    for ln in lines[1:]:
        m = _TERM_RE.match(ln)
        if not m:
            raise ValueError(f"malformed term line: {ln!r}")
        re_num, den1, im_num, den2, r, a, b = (int(g) for g in m.groups())
        c = QRat(Fraction(re_num, den1), Fraction(im_num, den2))
        _add_into(terms, (int(a), int(b)), int(r), c)
    return Element(basis, terms)


# ---------------------------------------------------------------------------
# human-readable form used by the CLI, e.g.  "p q + (1/2) i eps"


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"({f.numerator}/{f.denominator})"


def _coeff_str(c: QRat, has_monomial: bool):
    """Return (sign, body); body '' means an implicit coefficient of 1."""
    if c.im == 0:
        sign = "-" if c.re < 0 else "+"
        mag = abs(c.re)
        if mag == 1 and has_monomial:
            return sign, ""
        return sign, _frac_str(mag)
    if c.re == 0:
        sign = "-" if c.im < 0 else "+"
        mag = abs(c.im)
        body = "i" if mag == 1 else f"{_frac_str(mag)} i"
        return sign, body
    return "+", f"({_frac_str(c.re)} + {_frac_str(c.im)} i)"


def format_element(u: Element) -> str:
    flat = []
    for (a, b), poly in u.terms.items():
        for r, c in poly.items():
            flat.append((r, a, b, c))
    if not flat:
        return "0"
    pieces = []
    for idx, (r, a, b, c) in enumerate(sorted(flat, key=lambda t: t[:3])):
        mono = []
        if r:
            mono.append("eps" if r == 1 else f"eps^{r}")
        if a:
            mono.append("p" if a == 1 else f"p^{a}")
        if b:
            mono.append("q" if b == 1 else f"q^{b}")
        sign, body = _coeff_str(c, bool(mono))
        words = ([body] if body else []) + mono
        term = " ".join(words) if words else "1"
        if idx == 0:
            pieces.append(term if sign == "+" else f"-{term}")
        else:
            pieces.append(f"{sign} {term}")
    return " ".join(pieces)


_SIMPLE_TERM_RE = re.compile(
    r"^\s*(?:\(\s*(?P<pnum>-?\d+)\s*(?:/\s*(?P<pden>\d+))?\s*\)"
    r"|(?P<num>-?\d+)(?:\s*/\s*(?P<den>\d+))?)?"
    r"\s*(?P<i>i)?\s*(?:(?P<eps>eps)(?:\^(?P<epow>\d+))?)?"
    r"\s*(?:(?P<p>p)(?:\^(?P<apow>\d+))?)?\s*(?:(?P<q>q)(?:\^(?P<bpow>\d+))?)?\s*$"
)


def _split_terms(text: str):
    """Split on top-level + and - (not inside parentheses)."""
    terms, depth, cur, sign = [], 0, "", 1
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and cur.strip():
            terms.append((sign, cur))
            sign = 1 if ch == "+" else -1
            cur = ""
        elif depth == 0 and ch in "+-" and not cur.strip():
            sign *= 1 if ch == "+" else -1
        else:
            cur += ch
    if cur.strip():
        terms.append((sign, cur))
    return terms


def parse_expr(text: str, basis=COMMUTATIVE) -> Element:
    """Parse a human-form expression like  'p q + (1/2) i eps'  exactly."""
    text = text.strip()
    if not text or text == "0":
        return zero(basis)
    result = zero(basis)
    for sign, chunk in _split_terms(text):
        m = _SIMPLE_TERM_RE.match(chunk)
        if not m or not chunk.strip():
            raise ValueError(f"cannot parse term {chunk!r}")
        g = m.groupdict()
        if all(v is None for v in g.values()):
            raise ValueError(f"cannot parse term {chunk!r}")
        num = g["pnum"] if g["pnum"] is not None else g["num"]
        den = g["pden"] if g["pnum"] is not None else g["den"]
        frac = Fraction(int(num), int(den or 1)) if num is not None else Fraction(1)
        c = QRat(im=frac) if g["i"] else QRat(frac)
        r = int(g["epow"]) if g["epow"] else (1 if g["eps"] else 0)
        a = int(g["apow"]) if g["apow"] else (1 if g["p"] else 0)
        b = int(g["bpow"]) if g["bpow"] else (1 if g["q"] else 0)
        result = result + basis_element(basis, a, b, c * sign, r)
    return result
