"""Orbit sampling, recurrence detection, rotation numbers, weak rotation sets.

Recurrence is certified at finite epsilon and finite horizon: the library
reports evidence (detected recurrence times with exact distances), never
asymptotic truth. All orbit arithmetic is exact, so rigid-family results are
exact rationals; twist-family estimates converge at O(1/n).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .farey import as_rational, format_rational
from .lines import Point
from .maps import LiftedMap

DEFAULT_EPS = Fraction(1, 1000)
DEFAULT_TOL = Fraction(1, 10**9)
DEFAULT_N_MAX = 10_000

Extended = Union[Fraction, float]  # float only for the ±inf markers


class NoRecurrenceDetected(RuntimeError):
    """No epsilon-recurrence time found within the horizon (a signal, not a failure)."""


class EmptyReturns(RuntimeError):
    """No sampled orbit ever revisits the band (flags failure of Prop 5.1(2))."""


def _quotient_dist_sq(dx: Fraction, dy: Fraction, modulus: int) -> Fraction:
    """Squared distance in the annulus R^2 / T^modulus (Euclidean, exact)."""
    j = (dx / modulus).__floor__()
    best = None
    for jj in (j, j + 1):
        d = (dx - jj * modulus) ** 2 + dy ** 2
        if best is None or d < best:
            best = d
    return best


@dataclass
class OrbitSample:
    """Exact orbit with horizontal displacements and epsilon-recurrence times."""

    seed: Point
    length: int
    displacements: list[Fraction]          # d_n = p1(F^n(z)) - p1(z), n = 1..length
    recurrence_times: list[int]            # n with dist_A(f^n(z), z) < eps
    eps: Fraction
    cover_modulus: int = 1

    def average(self, n: int) -> Fraction:
        return self.displacements[n - 1] / n


def orbit_with_recurrence(map_: LiftedMap, seed, n: int, eps=DEFAULT_EPS,
                          cover_modulus: int = 1) -> OrbitSample:
    """Exact orbit of length n with all eps-recurrence times in the chosen cover."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if cover_modulus < 1:
        raise ValueError("cover modulus must be >= 1")
    z0 = (as_rational(seed[0]), as_rational(seed[1]))
    eps_sq = eps * eps
    z = z0
    displacements = []
    times = []
    for k in range(1, n + 1):
        z = map_.apply(z)
        displacements.append(z[0] - z0[0])
        if _quotient_dist_sq(z[0] - z0[0], z[1] - z0[1], cover_modulus) < eps_sq:
            times.append(k)
    return OrbitSample(seed=z0, length=n, displacements=displacements,
                       recurrence_times=times, eps=eps, cover_modulus=cover_modulus)


@dataclass(frozen=True)
class RotationNumber:
    """Certified-at-finite-horizon rotation number estimate."""

    value: Fraction        # d_m / m at the largest detected recurrence time m
    spread: Fraction       # max - min of d_m/m over all detected recurrence times
    time: int              # the recurrence time used for value


def rotation_number(map_: LiftedMap, seed, n: int = 1000, eps=DEFAULT_EPS,
                    cover_modulus: int = 1) -> Optional[RotationNumber]:
    """Rotation number evidence for a (hopefully) recurrent seed.

    Returns None when no recurrence is detected: the point is not certified
    recurrent, so no rotation number is claimed.
    """
    sample = orbit_with_recurrence(map_, seed, n, eps, cover_modulus)
    if not sample.recurrence_times:
        return None
    avgs = [sample.average(m) for m in sample.recurrence_times]
    return RotationNumber(value=avgs[-1], spread=max(avgs) - min(avgs),
                          time=sample.recurrence_times[-1])


@dataclass(frozen=True)
class RhoBounds:
    """inf/sup of displacement averages over detected recurrence subsequences."""

    lo: Extended
    hi: Extended

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"lo {self.lo} must be <= hi {self.hi}")


def rho_bounds(map_: LiftedMap, seed, n: int = 1000, eps=DEFAULT_EPS,
               cover_modulus: int = 1, allow_divergence: bool = False,
               divergence_threshold=None) -> RhoBounds:
    """rho-(F;z) and rho+(F;z) evidence: inf and sup of d_m/m over recurrence times.

    With allow_divergence, a recurrence-free orbit whose tail averages grow
    monotonically past divergence_threshold yields the ±inf markers; otherwise
    NoRecurrenceDetected is raised.
    """
    sample = orbit_with_recurrence(map_, seed, n, eps, cover_modulus)
    if sample.recurrence_times:
        avgs = [sample.average(m) for m in sample.recurrence_times]
        return RhoBounds(lo=min(avgs), hi=max(avgs))
    if allow_divergence and divergence_threshold is not None:
        threshold = as_rational(divergence_threshold)
        tail = [sample.average(m) for m in range(max(1, n // 2), n + 1)]
        if len(tail) >= 2:
            if all(a < b for a, b in zip(tail, tail[1:])) and tail[-1] > threshold:
                return RhoBounds(lo=math.inf, hi=math.inf)
            if all(a > b for a, b in zip(tail, tail[1:])) and tail[-1] < -threshold:
                return RhoBounds(lo=-math.inf, hi=-math.inf)
    raise NoRecurrenceDetected(f"no eps-recurrence within {n} iterates (eps={sample.eps})")


@dataclass(frozen=True)
class SampleBounds:
    seed: Point
    bounds: RhoBounds
    revisit_count: int
    last_revisit: int


@dataclass
class RotationEstimate:
    """Interval estimate of Rot_weak,K (band K) or Rot (recurrent points)."""

    interval: tuple[Extended, Extended]        # outer hull (tail window)
    inner: tuple[Extended, Extended]           # achieved hull (last revisit values)
    samples: list[SampleBounds]
    compact_set: Union[tuple[Fraction, Fraction], str]
    n_max: int

    def to_json(self) -> dict:
        band = (list(map(float, self.compact_set))
                if not isinstance(self.compact_set, str) else self.compact_set)
        return {
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "interval_exact": [_fmt_ext(self.interval[0]), _fmt_ext(self.interval[1])],
            "inner": [float(self.inner[0]), float(self.inner[1])],
            "samples": [
                {
                    "seed": [format_rational(s.seed[0]), format_rational(s.seed[1])],
                    "rho_lo": float(s.bounds.lo),
                    "rho_hi": float(s.bounds.hi),
                    "revisits": s.revisit_count,
                    "last_revisit": s.last_revisit,
                }
                for s in self.samples
            ],
            "band": band,
            "n_max": self.n_max,
        }


def _fmt_ext(v: Extended) -> str:
    if isinstance(v, Fraction):
        return format_rational(v)
    return repr(v)


def _band_seeds(band: tuple[Fraction, Fraction], grid: int) -> list[Point]:
    a, b = band
    xs = [Fraction(i, grid) for i in range(grid)]
    if grid == 1:
        ys = [(a + b) / 2]
    else:
        ys = [a + (b - a) * Fraction(j, grid - 1) for j in range(grid)]
    return [(x, y) for x in xs for y in ys]


def _weak_sample(map_: LiftedMap, seed: Point, band, n_max: int) -> Optional[SampleBounds]:
    a, b = band
    z0 = seed
    z = z0
    window_lo = max(1, n_max // 2)
    window_vals: list[Fraction] = []
    last_val = None
    last_time = 0
    revisits = 0
    for k in range(1, n_max + 1):
        z = map_.apply(z)
        if a <= z[1] <= b:
            revisits += 1
            val = (z[0] - z0[0]) / k
            last_val = val
            last_time = k
            if k >= window_lo:
                window_vals.append(val)
    if revisits == 0:
        return None
    vals = window_vals if window_vals else [last_val]
    return SampleBounds(seed=z0, bounds=RhoBounds(lo=min(vals), hi=max(vals)),
                        revisit_count=revisits, last_revisit=last_time)


def weak_rotation_set(map_: LiftedMap, band, n_max: int = DEFAULT_N_MAX,
                      grid: int = 5, workers: int = 1) -> RotationEstimate:
    """Estimate Rot_weak,K(F) for K the full band [0,1] x [a,b].

    Seeds a grid x grid lattice over one period of the band, records d_n/n at
    every band-revisit time n <= n_max, and hulls the values in the tail
    window n >= n_max/2 (falling back to a seed's last revisit when its tail
    window is empty). Raises EmptyReturns if no orbit ever revisits the band,
    which would contradict Prop 5.1(2) / the intersection property.
    """
    a, b = as_rational(band[0]), as_rational(band[1])
    if not a < b:
        raise ValueError("band must satisfy a < b")
    if grid < 1:
        raise ValueError("grid must be >= 1")
    seeds = _band_seeds((a, b), grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _weak_sample(map_, s, (a, b), n_max), seeds))
    else:
        results = [_weak_sample(map_, s, (a, b), n_max) for s in seeds]
    samples = [r for r in results if r is not None]
    if not samples:
        raise EmptyReturns(f"no orbit revisits the band [{a}, {b}] within {n_max} iterates")
    outer = (min(s.bounds.lo for s in samples), max(s.bounds.hi for s in samples))
    inner_vals = []
    for s, r in zip(seeds, results):
        if r is not None:
            inner_vals.append(r.bounds)
    inner = (min(b_.lo for b_ in inner_vals), max(b_.hi for b_ in inner_vals))
    return RotationEstimate(interval=outer, inner=inner, samples=samples,
                            compact_set=(a, b), n_max=n_max)


def rotation_set_estimate(map_: LiftedMap, band, n: int = 1000, eps=DEFAULT_EPS,
                          grid: int = 5) -> RotationEstimate:
    """Hull of certified rotation numbers over recurrent seeds in the band.

    Seeds without detected recurrence are skipped; compact_set carries the
    "recurrent points" marker to distinguish this from a weak-rotation band
    estimate.
    """
    a, b = as_rational(band[0]), as_rational(band[1])
    samples = []
    for seed in _band_seeds((a, b), grid):
        rn = rotation_number(map_, seed, n, eps)
        if rn is None:
            continue
        samples.append(SampleBounds(seed=seed,
                                    bounds=RhoBounds(rn.value - rn.spread, rn.value + rn.spread),
                                    revisit_count=1, last_revisit=rn.time))
    if not samples:
        raise NoRecurrenceDetected("no seed in the band certified recurrent")
    hull = (min(s.bounds.lo for s in samples), max(s.bounds.hi for s in samples))
    return RotationEstimate(interval=hull, inner=hull, samples=samples,
                            compact_set="recurrent points", n_max=n)


def find_periodic_point(map_: LiftedMap, target, window, tol=DEFAULT_TOL,
                        grid: int = 16, max_bisect: int = 80) -> Optional[Point]:
    """Search for z with ||F^q(z) - T^p(z)||_inf <= tol, target = p/q reduced.

    Grid scan of the residual displacement over the window followed by
    bisection in y on sign changes of its x-component along each x-fiber
    (exact for twist-type maps, whose residual is independent of x). Absence
    of a sign change is a result (None), not an error.
    """
    target = as_rational(target)
    p, q = target.numerator, target.denominator
    tol = as_rational(tol)
    (wx0, wy0), (wx1, wy1) = window
    wx0, wy0, wx1, wy1 = map(as_rational, (wx0, wy0, wx1, wy1))
    fq = map_.power(q)

    def residual(z: Point) -> Point:
        w = fq.apply(z)
        return (w[0] - z[0] - p, w[1] - z[1])

    def good(z: Point) -> bool:
        rx, ry = residual(z)
        return max(abs(rx), abs(ry)) <= tol

    xs = [wx0 + (wx1 - wx0) * Fraction(i, grid) for i in range(grid + 1)]
    ys = [wy0 + (wy1 - wy0) * Fraction(j, grid) for j in range(grid + 1)]
    for x in xs:
        fiber = [(y, residual((x, y))[0]) for y in ys]
        for (y, rx) in fiber:
            if good((x, y)):
                return (x, y)
        for (y0, r0), (y1, r1) in zip(fiber, fiber[1:]):
            if r0 == 0 or r1 == 0 or (r0 < 0) == (r1 < 0):
                continue
            lo_y, hi_y, lo_r = (y0, y1, r0)
            for _ in range(max_bisect):
                mid = (lo_y + hi_y) / 2
                z = (x, mid)
                if good(z):
                    return z
                rm = residual(z)[0]
                if rm == 0:
                    break  # rx vanished but ry > tol on this fiber
                if (rm < 0) == (lo_r < 0):
                    lo_y, lo_r = mid, rm
                else:
                    hi_y = mid
    return None
