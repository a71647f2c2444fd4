"""Exact complex rationals (Gaussian rationals) for formal algebra work."""

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["QRat"]


@dataclass(frozen=True)
class QRat:
    """A complex number with exact rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(x) -> "QRat":
        if isinstance(x, QRat):
            return x
        if isinstance(x, complex):
            return QRat(Fraction(x.real), Fraction(x.imag))
        return QRat(Fraction(x))

    @staticmethod
    def i_power(k: int) -> "QRat":
        """i**k for integer k."""
        return (QRat(Fraction(1)), QRat(im=Fraction(1)),
                QRat(Fraction(-1)), QRat(im=Fraction(-1)))[k % 4]

    def __add__(self, other):
        other = QRat.of(other)
        return QRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QRat(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-QRat.of(other))

    def __rsub__(self, other):
        return QRat.of(other) + (-self)

    def __mul__(self, other):
        other = QRat.of(other)
        return QRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QRat.of(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero QRat")
        return QRat(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def conjugate(self) -> "QRat":
        return QRat(self.re, -self.im)

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"({self.re}{'+' if self.im >= 0 else ''}{self.im}i)"
