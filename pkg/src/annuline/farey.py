"""Exact Farey-interval arithmetic and the rigid-rotation cyclic-order oracle.

Rationals are plain ``fractions.Fraction`` values (always reduced, positive
denominator). A Farey interval is an open interval ]p/q, p'/q'[ whose
endpoints satisfy the determinant condition q*p' - p*q' = 1; such intervals
are exactly the nodes of the Stern-Brocot tree, refined by taking mediants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Fraction

RationalLike = Union[Fraction, int, float, str]


class RhoIsMediant(ValueError):
    """The target value coincides with an exact endpoint or mediant of the descent."""


class Collision(ValueError):
    """Two orbit points of the rigid rotation share a fractional part."""


def as_rational(value: RationalLike) -> Fraction:
    """Convert to an exact Fraction.

    Floats are converted exactly (binary expansion), never rounded; irrational
    targets must be supplied by the caller as high-precision rationals.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(value: Fraction) -> str:
    """Render as the canonical "p/q" string used by all JSON schemas."""
    return f"{value.numerator}/{value.denominator}"


def is_farey_interval(a: RationalLike, b: RationalLike) -> bool:
    """True iff ]a, b[ with a = p/q < b = p'/q' satisfies q*p' - p*q' = 1."""
    a = as_rational(a)
    b = as_rational(b)
    return a.denominator * b.numerator - a.numerator * b.denominator == 1


@dataclass(frozen=True)
class FareyInterval:
    """Open interval ]left, right[ with the Farey determinant condition."""

    left: Fraction
    right: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", as_rational(self.left))
        object.__setattr__(self, "right", as_rational(self.right))
        if not self.left < self.right:
            raise ValueError(f"left endpoint {self.left} must be < right endpoint {self.right}")
        if not is_farey_interval(self.left, self.right):
            raise ValueError(f"]{self.left}, {self.right}[ fails the determinant condition")

    @property
    def mediant(self) -> Fraction:
        p, q = self.left.numerator, self.left.denominator
        pp, qp = self.right.numerator, self.right.denominator
        return Fraction(p + pp, q + qp)

    def contains(self, rho: RationalLike) -> bool:
        rho = as_rational(rho)
        return self.left < rho < self.right

    def split(self) -> tuple["FareyInterval", "FareyInterval"]:
        """Split at the mediant; both halves are again Farey intervals."""
        m = self.mediant
        return FareyInterval(self.left, m), FareyInterval(m, self.right)

    def __str__(self) -> str:
        return f"]{self.left}, {self.right}["


def stern_brocot_enclose(rho: RationalLike, depth: int) -> FareyInterval:
    """Enclose rho in a Farey interval by `depth` mediant-descent steps.

    Starts from ]floor(rho), floor(rho)+1[ and refines at the mediant `depth`
    times, keeping the half that contains rho.

    Raises RhoIsMediant if rho equals an integer (an endpoint of the base
    interval) or any mediant encountered during the descent.
    """
    if depth < 1:
        raise ValueError("depth must be a positive integer")
    rho = as_rational(rho)
    base = math.floor(rho)
    if rho == base:
        raise RhoIsMediant(f"{rho} is an endpoint of the base interval")
    interval = FareyInterval(Fraction(base), Fraction(base + 1))
    for _ in range(depth):
        m = interval.mediant
        if rho == m:
            raise RhoIsMediant(f"{rho} is a mediant reached during descent")
        lo, hi = interval.split()
        interval = lo if rho < m else hi
    return interval


@dataclass(frozen=True)
class CyclicOrder:
    """A cyclic arrangement of the indices 0..n, canonically rotated to start at 0."""

    permutation: tuple[int, ...]

    def __post_init__(self) -> None:
        perm = tuple(int(i) for i in self.permutation)
        object.__setattr__(self, "permutation", perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        if perm and perm[0] != 0:
            raise ValueError("canonical cyclic order must start at index 0")

    def __len__(self) -> int:
        return len(self.permutation)

    def __iter__(self):
        return iter(self.permutation)

    @staticmethod
    def from_cycle(indices) -> "CyclicOrder":
        """Canonicalize an arbitrary rotation of the cycle to start at 0."""
        indices = list(indices)
        k = indices.index(0)
        return CyclicOrder(tuple(indices[k:] + indices[:k]))


def rotation_cyclic_order(rho: RationalLike, n: int) -> CyclicOrder:
    """Cyclic order of 0, rho, 2*rho, ..., n*rho on the circle R/Z.

    This is the order in which the n first iterates of a vertical line under
    the rigid rotation of angle rho sit in the annulus. Indices are sorted by
    the fractional part of i*rho and rotated to start at 0.

    Raises Collision if two fractional parts coincide.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    rho = as_rational(rho)
    fracs = [(i, (i * rho) % 1) for i in range(n + 1)]
    seen: dict[Fraction, int] = {}
    for i, f in fracs:
        if f in seen:
            raise Collision(f"indices {seen[f]} and {i} both have fractional part {f}")
        seen[f] = i
    order = [i for i, _ in sorted(fracs, key=lambda pair: pair[1])]
    return CyclicOrder.from_cycle(order)
