"""Lifted annulus homeomorphisms: descriptors, exact evaluation, action on lines.

A LiftedMap is a homeomorphism F of the plane commuting with the deck
translation T(x, y) = (x+1, y), built from primitives that keep everything
finitely representable and exactly invertible:

  RigidRotation(rho)    (x, y) -> (x + rho, y)
  DeckShift(k)          (x, y) -> (x + k, y)          (= T^k)
  HorizontalTwist(tau)  (x, y) -> (x + tau(y), y)     tau PL, eventually constant
  VerticalShear(sigma)  (x, y) -> (x, y + sigma(x))   sigma PL, deck-periodic
  Compose([...])        components applied in listed order (first entry first)
  Power(base, k)        k-th iterate; k = -1 is the exact structural inverse

PL maps carry PL lines to PL lines once segments are subdivided at the
breakpoints, so images of essential lines are exact. Outside a bounded band
(|y| >= rigidity_threshold) the horizontal displacement is the constant c-
(below) / c+ (above), which is what keeps line tails vertical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .farey import as_rational, format_rational
from .lines import EssentialLine, Point, compare, OrderVerdict

MAX_LINE_VERTICES = 50_000


class MapSpecError(ValueError):
    """Malformed map descriptor."""


class NotEventuallyRigid(MapSpecError):
    """Twist data does not define an eventually constant PL function."""


class NotInvertible(MapSpecError):
    """Shear data does not define a deck-periodic homeomorphism."""


class SubdivisionOverflow(RuntimeError):
    """Exact image of a line would exceed the vertex budget."""


# -- PL profile functions -------------------------------------------------------


@dataclass(frozen=True)
class PLFunction:
    """PL function of one variable, constant outside its breakpoint range."""

    breaks: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        bs = tuple((as_rational(a), as_rational(v)) for a, v in self.breaks)
        object.__setattr__(self, "breaks", bs)
        if not bs:
            raise NotEventuallyRigid("twist needs at least one breakpoint")
        if any(bs[i][0] >= bs[i + 1][0] for i in range(len(bs) - 1)):
            raise NotEventuallyRigid("breakpoints must have strictly increasing arguments")

    def __call__(self, y) -> Fraction:
        y = as_rational(y)
        bs = self.breaks
        if y <= bs[0][0]:
            return bs[0][1]
        if y >= bs[-1][0]:
            return bs[-1][1]
        for (a0, v0), (a1, v1) in zip(bs, bs[1:]):
            if a0 <= y <= a1:
                return v0 + (y - a0) * (v1 - v0) / (a1 - a0)
        raise AssertionError("unreachable")

    @property
    def low_value(self) -> Fraction:
        return self.breaks[0][1]

    @property
    def high_value(self) -> Fraction:
        return self.breaks[-1][1]

    @property
    def max_abs(self) -> Fraction:
        return max(abs(v) for _, v in self.breaks)

    @property
    def arg_radius(self) -> Fraction:
        return max(abs(self.breaks[0][0]), abs(self.breaks[-1][0]))

    def negate(self) -> "PLFunction":
        return PLFunction(tuple((a, -v) for a, v in self.breaks))


@dataclass(frozen=True)
class PeriodicPLFunction:
    """PL function of x mod 1: breakpoints in [0, 1), wrap-around interpolation."""

    breaks: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        bs = tuple((as_rational(a), as_rational(v)) for a, v in self.breaks)
        object.__setattr__(self, "breaks", bs)
        if not bs:
            raise NotInvertible("shear needs at least one breakpoint")
        if any(not (0 <= a < 1) for a, _ in bs):
            raise NotInvertible("shear breakpoints must lie in [0, 1)")
        if any(bs[i][0] >= bs[i + 1][0] for i in range(len(bs) - 1)):
            raise NotInvertible("breakpoints must have strictly increasing arguments")

    def __call__(self, x) -> Fraction:
        u = as_rational(x) % 1
        bs = self.breaks
        if u < bs[0][0]:
            u += 1
        ext = list(bs) + [(bs[0][0] + 1, bs[0][1])]
        for (a0, v0), (a1, v1) in zip(ext, ext[1:]):
            if a0 <= u <= a1:
                if a0 == a1:
                    return v0
                return v0 + (u - a0) * (v1 - v0) / (a1 - a0)
        raise AssertionError("unreachable")

    @property
    def max_abs(self) -> Fraction:
        return max(abs(v) for _, v in self.breaks)

    def negate(self) -> "PeriodicPLFunction":
        return PeriodicPLFunction(tuple((a, -v) for a, v in self.breaks))


# -- map rules (descriptor tree) -----------------------------------------------


@dataclass(frozen=True)
class RigidRotation:
    rho: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rho", as_rational(self.rho))


@dataclass(frozen=True)
class DeckShift:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int):
            raise MapSpecError("deck shift exponent must be an integer")


@dataclass(frozen=True)
class HorizontalTwist:
    tau: PLFunction


@dataclass(frozen=True)
class VerticalShear:
    sigma: PeriodicPLFunction


@dataclass(frozen=True)
class Compose:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Power:
    base: object
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int):
            raise MapSpecError("power exponent must be an integer")


MapRule = Union[RigidRotation, DeckShift, HorizontalTwist, VerticalShear, Compose, Power]

# atoms: ("h", c) horizontal shift | ("twist", PLFunction) | ("shear", PeriodicPLFunction)


def _rule_atoms(rule: MapRule) -> list[tuple]:
    if isinstance(rule, RigidRotation):
        return [("h", rule.rho)]
    if isinstance(rule, DeckShift):
        return [("h", Fraction(rule.k))]
    if isinstance(rule, HorizontalTwist):
        return [("twist", rule.tau)]
    if isinstance(rule, VerticalShear):
        return [("shear", rule.sigma)]
    if isinstance(rule, Compose):
        out: list[tuple] = []
        for part in rule.parts:
            out.extend(_rule_atoms(part))
        return out
    if isinstance(rule, Power):
        base = _rule_atoms(rule.base)
        if rule.k >= 0:
            return base * rule.k
        return _invert_atoms(base) * (-rule.k)
    raise MapSpecError(f"unknown map rule {rule!r}")


def _invert_atoms(atoms: Sequence[tuple]) -> list[tuple]:
    out = []
    for kind, data in reversed(atoms):
        if kind == "h":
            out.append(("h", -data))
        elif kind == "twist":
            out.append(("twist", data.negate()))
        else:
            out.append(("shear", data.negate()))
    return out


def _merge_shifts(atoms: Iterable[tuple]) -> tuple[tuple, ...]:
    out: list[tuple] = []
    for atom in atoms:
        if atom[0] == "h" and out and out[-1][0] == "h":
            out[-1] = ("h", out[-1][1] + atom[1])
        else:
            out.append(atom)
    return tuple(a for a in out if not (a[0] == "h" and a[1] == 0)) or (("h", Fraction(0)),)


def _probe_points(n: int = 24) -> list[Point]:
    # deterministic rationals spread over a few periods and the twist band
    pts = []
    for i in range(n):
        x = Fraction((7 * i + 3) % 29, 29) + (i % 5) - 2
        y = Fraction((11 * i + 5) % 23, 23) * 6 - 3
        pts.append((x, y))
    return pts


class LiftedMap:
    """Validated lift of an annulus homeomorphism; immutable, exact."""

    __slots__ = ("rule", "atoms", "displacement_bound", "horizontal_bound",
                 "vertical_bound", "rigidity_threshold", "shift_below", "shift_above")

    def __init__(self, rule: MapRule, _validate: bool = True):
        self.rule = rule
        self.atoms = _merge_shifts(_rule_atoms(rule))
        dh = Fraction(0)
        dv = Fraction(0)
        c_lo = Fraction(0)
        c_hi = Fraction(0)
        y0 = Fraction(0)
        for kind, data in self.atoms:
            if kind == "h":
                dh += abs(data)
                c_lo += data
                c_hi += data
            elif kind == "twist":
                dh += data.max_abs
                c_lo += data.low_value
                c_hi += data.high_value
                y0 = max(y0, data.arg_radius + dv)
            else:
                dv += data.max_abs
        self.horizontal_bound = dh
        self.vertical_bound = dv
        self.displacement_bound = max(dh, dv)
        self.rigidity_threshold = y0
        self.shift_below = c_lo
        self.shift_above = c_hi
        if _validate:
            self._spot_check()

    # -- evaluation ------------------------------------------------------

    def apply(self, p) -> Point:
        x, y = as_rational(p[0]), as_rational(p[1])
        for kind, data in self.atoms:
            if kind == "h":
                x += data
            elif kind == "twist":
                x += data(y)
            else:
                y += data(x)
        return (x, y)

    def apply_inverse(self, p) -> Point:
        x, y = as_rational(p[0]), as_rational(p[1])
        for kind, data in reversed(self.atoms):
            if kind == "h":
                x -= data
            elif kind == "twist":
                x -= data(y)
            else:
                y -= data(x)
        return (x, y)

    def inverse(self) -> "LiftedMap":
        return LiftedMap(Power(self.rule, -1), _validate=False)

    def power(self, k: int) -> "LiftedMap":
        return LiftedMap(Power(self.rule, k), _validate=False)

    def then(self, other: "LiftedMap") -> "LiftedMap":
        """Composite map applying self first, then other."""
        return LiftedMap(Compose((self.rule, other.rule)), _validate=False)

    def orbit(self, seed, n: int) -> list[Point]:
        """[z, F(z), ..., F^n(z)] computed exactly."""
        z = (as_rational(seed[0]), as_rational(seed[1]))
        out = [z]
        for _ in range(n):
            z = self.apply(z)
            out.append(z)
        return out

    # -- action on lines ---------------------------------------------------

    def apply_to_line(self, line: EssentialLine, budget: int = MAX_LINE_VERTICES,
                      inverse: bool = False) -> EssentialLine:
        """Exact image of an essential line (or its preimage with inverse=True).

        Each segment is subdivided at the breakpoints of every PL atom it
        meets, so the image is again exactly PL; tails stay vertical because
        the far field acts as (x, y) -> (x + c±, y + s(x)).
        """
        atoms = _invert_atoms(self.atoms) if inverse else self.atoms
        verts = list(line.vertices)
        for kind, data in atoms:
            if kind == "h":
                verts = [(x + data, y) for x, y in verts]
            elif kind == "twist":
                verts = _twist_vertices(data, verts, budget)
            else:
                verts = _shear_vertices(data, verts, budget)
        return EssentialLine(verts, validate=False)

    # -- validation --------------------------------------------------------

    def _spot_check(self) -> None:
        for p in _probe_points():
            q = self.apply(p)
            q_shift = self.apply((p[0] + 1, p[1]))
            if q_shift != (q[0] + 1, q[1]):
                raise MapSpecError(f"deck commutation fails at {p}")
            if self.apply_inverse(q) != p:
                raise MapSpecError(f"inverse round trip fails at {p}")

    def __repr__(self) -> str:
        return f"LiftedMap({self.rule!r})"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return _rule_to_json(self.rule)

    @staticmethod
    def from_json(data: dict) -> "LiftedMap":
        return make_map(_rule_from_json(data))


def _twist_vertices(tau: PLFunction, verts: list[Point], budget: int) -> list[Point]:
    first_y, last_y = verts[0][1], verts[-1][1]
    x0, xn = verts[0][0], verts[-1][0]
    below = sorted(by for by, _ in tau.breaks if by < first_y)
    above = sorted(by for by, _ in tau.breaks if by > last_y)
    ext = [(x0, by) for by in below] + verts + [(xn, by) for by in above]
    out = [ext[0]]
    for a, b in zip(ext, ext[1:]):
        y1, y2 = a[1], b[1]
        if y1 != y2:
            lo, hi = min(y1, y2), max(y1, y2)
            cuts = [by for by, _ in tau.breaks if lo < by < hi]
            cuts.sort(reverse=y1 > y2)
            for by in cuts:
                t = (by - y1) / (y2 - y1)
                out.append((a[0] + t * (b[0] - a[0]), by))
        out.append(b)
        if len(out) > budget:
            raise SubdivisionOverflow(f"line image exceeds {budget} vertices")
    return [(x + tau(y), y) for x, y in out]


def _shear_vertices(sigma: PeriodicPLFunction, verts: list[Point], budget: int) -> list[Point]:
    out = [verts[0]]
    xs = [xb for xb, _ in sigma.breaks]
    for a, b in zip(verts, verts[1:]):
        x1, x2 = a[0], b[0]
        if x1 != x2:
            lo, hi = min(x1, x2), max(x1, x2)
            cuts = []
            for xb in xs:
                k = math.floor(lo - xb) + 1
                while xb + k < hi:
                    if xb + k > lo:
                        cuts.append(xb + k)
                    k += 1
            cuts.sort(reverse=x1 > x2)
            for xc in cuts:
                t = (xc - x1) / (x2 - x1)
                out.append((xc, a[1] + t * (b[1] - a[1])))
        out.append(b)
        if len(out) > budget:
            raise SubdivisionOverflow(f"line image exceeds {budget} vertices")
    return [(x, y + sigma(x)) for x, y in out]


def map_polyline(map_: LiftedMap, points: Sequence[Point], budget: int = MAX_LINE_VERTICES,
                 inverse: bool = False) -> list[Point]:
    """Exact image of a finite polyline chain (used for polygon images)."""
    atoms = _invert_atoms(map_.atoms) if inverse else map_.atoms
    verts = [(as_rational(x), as_rational(y)) for x, y in points]
    for kind, data in atoms:
        if kind == "h":
            verts = [(x + data, y) for x, y in verts]
        elif kind == "twist":
            out = [verts[0]]
            for a, b in zip(verts, verts[1:]):
                y1, y2 = a[1], b[1]
                if y1 != y2:
                    lo, hi = min(y1, y2), max(y1, y2)
                    cuts = [by for by, _ in data.breaks if lo < by < hi]
                    cuts.sort(reverse=y1 > y2)
                    for by in cuts:
                        t = (by - y1) / (y2 - y1)
                        out.append((a[0] + t * (b[0] - a[0]), by))
                out.append(b)
                if len(out) > budget:
                    raise SubdivisionOverflow(f"polyline image exceeds {budget} vertices")
            verts = [(x + data(y), y) for x, y in out]
        else:
            out = [verts[0]]
            xs = [xb for xb, _ in data.breaks]
            for a, b in zip(verts, verts[1:]):
                x1, x2 = a[0], b[0]
                if x1 != x2:
                    lo, hi = min(x1, x2), max(x1, x2)
                    cuts = []
                    for xb in xs:
                        k = math.floor(lo - xb) + 1
                        while xb + k < hi:
                            if xb + k > lo:
                                cuts.append(xb + k)
                            k += 1
                    cuts.sort(reverse=x1 > x2)
                    for xc in cuts:
                        t = (xc - x1) / (x2 - x1)
                        out.append((xc, a[1] + t * (b[1] - a[1])))
                out.append(b)
                if len(out) > budget:
                    raise SubdivisionOverflow(f"polyline image exceeds {budget} vertices")
            verts = [(x, y + data(x)) for x, y in out]
    return verts


# -- construction helpers --------------------------------------------------------


def make_map(spec) -> LiftedMap:
    """Build and validate a LiftedMap from a rule or a JSON descriptor."""
    if isinstance(spec, LiftedMap):
        return spec
    if isinstance(spec, dict):
        spec = _rule_from_json(spec)
    return LiftedMap(spec)


def rotation(rho) -> LiftedMap:
    return make_map(RigidRotation(as_rational(rho)))


def deck(k: int) -> LiftedMap:
    return make_map(DeckShift(k))


def twist(breaks) -> LiftedMap:
    return make_map(HorizontalTwist(PLFunction(tuple(breaks))))


def shear(breaks) -> LiftedMap:
    return make_map(VerticalShear(PeriodicPLFunction(tuple(breaks))))


def compose(*maps: LiftedMap) -> LiftedMap:
    """Composite applying the given maps in listed order (first one first)."""
    return make_map(Compose(tuple(m.rule if isinstance(m, LiftedMap) else m for m in maps)))


def is_brouwer_line(map_: LiftedMap, line: EssentialLine) -> OrderVerdict:
    """compare(Γ, F(Γ)); StrictlyLess certifies the oriented Brouwer property Γ < F(Γ).

    When the verdict is StrictlyLess the dual inequality F⁻¹(Γ) < Γ is also
    verified (it must hold for a homeomorphism; a mismatch is an internal bug).
    """
    verdict = compare(line, map_.apply_to_line(line))
    if verdict is OrderVerdict.STRICTLY_LESS:
        back = compare(map_.apply_to_line(line, inverse=True), line)
        if back is not OrderVerdict.STRICTLY_LESS:
            raise RuntimeError("Brouwer duality failed: F^-1(L) < L does not hold")
    return verdict


# -- JSON descriptors -------------------------------------------------------------


def _breaks_to_json(breaks) -> list:
    return [[format_rational(a), format_rational(v)] for a, v in breaks]


def _breaks_from_json(data) -> tuple:
    return tuple((as_rational(a), as_rational(v)) for a, v in data)


def _rule_to_json(rule: MapRule) -> dict:
    if isinstance(rule, RigidRotation):
        return {"rotation": format_rational(rule.rho)}
    if isinstance(rule, DeckShift):
        return {"deck": rule.k}
    if isinstance(rule, HorizontalTwist):
        return {"twist": {"breaks": _breaks_to_json(rule.tau.breaks)}}
    if isinstance(rule, VerticalShear):
        return {"shear": {"breaks": _breaks_to_json(rule.sigma.breaks)}}
    if isinstance(rule, Compose):
        return {"compose": [_rule_to_json(p) for p in rule.parts]}
    if isinstance(rule, Power):
        return {"power": {"base": _rule_to_json(rule.base), "k": rule.k}}
    raise MapSpecError(f"unknown rule {rule!r}")


def _rule_from_json(data: dict) -> MapRule:
    if not isinstance(data, dict) or len(data) != 1:
        raise MapSpecError(f"map descriptor must be a single-key object, got {data!r}")
    key, value = next(iter(data.items()))
    if key == "rotation":
        return RigidRotation(as_rational(value))
    if key == "deck":
        return DeckShift(int(value))
    if key == "twist":
        return HorizontalTwist(PLFunction(_breaks_from_json(value["breaks"])))
    if key == "shear":
        return VerticalShear(PeriodicPLFunction(_breaks_from_json(value["breaks"])))
    if key == "compose":
        return Compose(tuple(_rule_from_json(p) for p in value))
    if key == "power":
        return Power(_rule_from_json(value["base"]), int(value["k"]))
    raise MapSpecError(f"unknown map descriptor key {key!r}")
