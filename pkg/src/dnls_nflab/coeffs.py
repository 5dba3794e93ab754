"""Exact coefficients: Gaussian rationals times a nonnegative power of 1/pi.

Every polynomial coefficient in the normal-form constructions has the shape
(a + i*b) * pi**(-p) with a, b rational and p a small nonnegative integer.
Keeping the pi power symbolic makes cancellation checks exact: a residual is
zero iff its rational parts are zero, with no floating arithmetic involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    raise TypeError(f"expected a rational number, got {type(x).__name__}")


@dataclass(frozen=True)
class ExactCoeff:
    """Value (re + i*im) / pi**pi_power, with exact equality.

    Addition requires matching pi powers (or a zero operand): distinct powers
    never meet on one monomial in any construction here, and merging them
    would silently break exactness since pi is transcendental.
    """

    re: Fraction
    im: Fraction
    pi_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))
        if self.pi_power < 0:
            raise ValueError("pi_power must be nonnegative")
        if self.re == 0 and self.im == 0:
            object.__setattr__(self, "pi_power", 0)

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls) -> "ExactCoeff":
        return cls(Fraction(0), Fraction(0), 0)

    @classmethod
    def real(cls, value, pi_power: int = 0) -> "ExactCoeff":
        return cls(_as_fraction(value), Fraction(0), pi_power)

    @classmethod
    def imag(cls, value, pi_power: int = 0) -> "ExactCoeff":
        return cls(Fraction(0), _as_fraction(value), pi_power)

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "ExactCoeff") -> "ExactCoeff":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.pi_power != other.pi_power:
            raise ValueError(
                f"cannot add coefficients with pi powers {self.pi_power} and "
                f"{other.pi_power}; a monomial collected terms of mixed origin"
            )
        return ExactCoeff(self.re + other.re, self.im + other.im, self.pi_power)

    def __neg__(self) -> "ExactCoeff":
        return ExactCoeff(-self.re, -self.im, self.pi_power)

    def __sub__(self, other: "ExactCoeff") -> "ExactCoeff":
        return self + (-other)

    def __mul__(self, other: "ExactCoeff") -> "ExactCoeff":
        return ExactCoeff(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
            self.pi_power + other.pi_power,
        )

    def scaled(self, factor) -> "ExactCoeff":
        """Multiply by an exact rational scalar."""
        f = _as_fraction(factor)
        return ExactCoeff(self.re * f, self.im * f, self.pi_power)

    def mul_imag_int(self, n: int) -> "ExactCoeff":
        """Multiply by i*n for integer n (the bracket's weight factor)."""
        return ExactCoeff(-self.im * n, self.re * n, self.pi_power)

    def conjugate(self) -> "ExactCoeff":
        return ExactCoeff(self.re, -self.im, self.pi_power)

    # -- numeric views -------------------------------------------------------

    def to_complex(self) -> complex:
        scale = math.pi ** (-self.pi_power)
        return complex(float(self.re) * scale, float(self.im) * scale)

    def abs_squared_rational(self) -> Fraction:
        """|re + i*im|**2, without the pi factor."""
        return self.re * self.re + self.im * self.im

    def abs_float(self) -> float:
        return math.sqrt(float(self.abs_squared_rational())) * math.pi ** (-self.pi_power)

    def __str__(self) -> str:
        core = f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"
        if self.pi_power == 0:
            return core
        if self.pi_power == 1:
            return core + "/pi"
        return core + f"/pi^{self.pi_power}"


ZERO = ExactCoeff.zero()
