"""Exact dyadic rotation angles.

Every rotation in this package turns by an angle of the form

    theta = pi * numerator / 2**log2_denom

with integer numerator and non-negative integer log2_denom. Angles are kept
exact end to end; floating point enters only inside the simulation engines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class DyadicAngle:
    """Angle pi * numerator / 2**log2_denom, stored in canonical form.

    Canonical means the numerator is odd, or zero, or log2_denom is zero.
    Construct via :meth:`make` (or the module helpers) so reduction happens;
    the raw constructor trusts its arguments.
    """

    numerator: int
    log2_denom: int

    @staticmethod
    def make(numerator: int, log2_denom: int) -> "DyadicAngle":
        if log2_denom < 0:
            raise ValueError(f"log2_denom must be >= 0, got {log2_denom}")
        if numerator == 0:
            return DyadicAngle(0, 0)
        while numerator % 2 == 0 and log2_denom > 0:
            numerator //= 2
            log2_denom -= 1
        return DyadicAngle(numerator, log2_denom)

    @staticmethod
    def zero() -> "DyadicAngle":
        return DyadicAngle(0, 0)

    @staticmethod
    def pi_over(log2_denom: int, sign: int = 1) -> "DyadicAngle":
        """sign * pi / 2**log2_denom with sign in {+1, -1}."""
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        return DyadicAngle.make(sign, log2_denom)

    @staticmethod
    def from_binary_fraction(bits: str) -> "DyadicAngle":
        """Angle pi * (x0 . x1 x2 ... xl)_2 from a string like ``"1.01"``.

        The integer part may hold several bits ("10.1" is fine); a lone
        fractional part like ".101" and a bare integer like "11" also parse.
        At least one bit must be set.
        """
        s = bits.strip()
        neg = s.startswith("-")
        if neg:
            s = s[1:]
        if s.startswith("."):
            s = "0" + s
        head, _, tail = s.partition(".")
        if not head and not tail:
            raise ValueError(f"empty binary fraction {bits!r}")
        for ch in head + tail:
            if ch not in "01":
                raise ValueError(f"bad binary fraction {bits!r}")
        l = len(tail)
        num = int(head + tail, 2) if head + tail else 0
        if num == 0:
            raise ValueError(f"binary fraction {bits!r} has no set bit")
        return DyadicAngle.make(-num if neg else num, l)

    def __post_init__(self) -> None:
        if self.log2_denom < 0:
            raise ValueError("log2_denom must be >= 0")
        if self.numerator % 2 == 0 and self.numerator != 0 and self.log2_denom != 0:
            raise ValueError(
                f"non-canonical dyadic angle {self.numerator}/2^{self.log2_denom};"
                " use DyadicAngle.make"
            )
        if self.numerator == 0 and self.log2_denom != 0:
            raise ValueError("zero angle must have log2_denom == 0")

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    @property
    def turns_of_pi(self) -> Fraction:
        """The exact coefficient of pi."""
        return Fraction(self.numerator, 2**self.log2_denom)

    def radians(self) -> float:
        return math.pi * self.numerator / 2.0**self.log2_denom

    def __neg__(self) -> "DyadicAngle":
        return DyadicAngle(-self.numerator, self.log2_denom)

    def doubled(self) -> "DyadicAngle":
        if self.log2_denom > 0:
            return DyadicAngle(self.numerator, self.log2_denom - 1)
        return DyadicAngle(2 * self.numerator, 0)

    def halved(self) -> "DyadicAngle":
        return DyadicAngle.make(self.numerator, self.log2_denom + 1)

    def __add__(self, other: "DyadicAngle") -> "DyadicAngle":
        l = max(self.log2_denom, other.log2_denom)
        num = self.numerator * 2 ** (l - self.log2_denom) + other.numerator * 2 ** (
            l - other.log2_denom
        )
        return DyadicAngle.make(num, l)

    def __sub__(self, other: "DyadicAngle") -> "DyadicAngle":
        return self + (-other)

    def __str__(self) -> str:
        return f"{self.numerator}/{2 ** self.log2_denom}"

    @staticmethod
    def parse(text: str) -> "DyadicAngle":
        """Inverse of ``str``: ``"n/d"`` with d a power of two, or a bare integer."""
        s = text.strip()
        if "/" in s:
            num_s, den_s = s.split("/", 1)
            num = int(num_s)
            den = int(den_s)
            if den <= 0 or den & (den - 1):
                raise ValueError(f"denominator of {text!r} is not a power of two")
            return DyadicAngle.make(num, den.bit_length() - 1)
        return DyadicAngle.make(int(s), 0)
