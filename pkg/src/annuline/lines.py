"""Exact PL essential lines in the plane: side tests, order relations, join, midline.

An essential line is a simple proper PL curve oriented upward: a downward
vertical ray from the first vertex, a polyline through the vertices, and an
upward vertical ray from the last vertex. All coordinates are exact rationals,
so every predicate here (side, intersection, order) is exact; the order
relations are topological and must not be corrupted by rounding.

L(Γ) and R(Γ) are the left/right complementary components for the upward
orientation. ``a ≤ b`` means L(a) ⊂ L(b); ``a < b`` means Cl(L(a)) ⊂ L(b),
i.e. the curves are disjoint and a lies left of b.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Iterable, Sequence

from .farey import as_rational, format_rational

Point = tuple[Fraction, Fraction]


class SideLabel(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    ON = "on"


class OrderVerdict(enum.Enum):
    STRICTLY_LESS = "strictly-less"
    LESS_OR_EQUAL = "less-or-equal"
    EQUAL = "equal"
    GREATER_OR_EQUAL = "greater-or-equal"
    STRICTLY_GREATER = "strictly-greater"
    CROSSING = "crossing"

    @property
    def disjoint(self) -> bool:
        return self in (OrderVerdict.STRICTLY_LESS, OrderVerdict.STRICTLY_GREATER)


class NotSimple(ValueError):
    """The vertex data does not describe a simple curve."""


class DegenerateOverlap(ValueError):
    """The two lines share a segment of positive length; caller must perturb."""


class NotNested(ValueError):
    """midline requires compare(a, b) = StrictlyLess."""


def pt(x, y) -> Point:
    return (as_rational(x), as_rational(y))


def _cross(u: Point, v: Point) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _orient(o: Point, a: Point, b: Point) -> Fraction:
    return _cross(_sub(a, o), _sub(b, o))


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """Exact test: p lies on the closed segment [a, b]."""
    if _orient(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segment_intersection(p1: Point, p2: Point, q1: Point, q2: Point):
    """Exact segment intersection.

    Returns None, ("point", P), or ("overlap", A, B) with A != B for a shared
    sub-segment of positive length.
    """
    d1 = _sub(p2, p1)
    d2 = _sub(q2, q1)
    denom = _cross(d1, d2)
    w = _sub(q1, p1)
    if denom == 0:
        if _cross(w, d1) != 0:
            return None
        # collinear: parametrize q1, q2 on the p-line
        if d1 == (0, 0):
            return ("point", p1) if _on_segment(p1, q1, q2) else None
        axis = 0 if d1[0] != 0 else 1
        t1 = (q1[axis] - p1[axis]) / d1[axis]
        t2 = (q2[axis] - p1[axis]) / d1[axis]
        lo, hi = min(t1, t2), max(t1, t2)
        lo = max(lo, Fraction(0))
        hi = min(hi, Fraction(1))
        if lo > hi:
            return None
        pa = (p1[0] + lo * d1[0], p1[1] + lo * d1[1])
        pb = (p1[0] + hi * d1[0], p1[1] + hi * d1[1])
        if pa == pb:
            return ("point", pa)
        return ("overlap", pa, pb)
    t = _cross(w, d2) / denom
    u = _cross(w, d1) / denom
    if 0 <= t <= 1 and 0 <= u <= 1:
        return ("point", (p1[0] + t * d1[0], p1[1] + t * d1[1]))
    return None


def _canonical_vertices(raw: Sequence[Point]) -> tuple[Point, ...]:
    vs = [raw[0]]
    for v in raw[1:]:
        if v != vs[-1]:
            vs.append(v)
    # merge collinear runs; a reversal inside a run means the curve backtracks
    changed = True
    while changed:
        changed = False
        i = 1
        while i < len(vs) - 1:
            a, b, c = vs[i - 1], vs[i], vs[i + 1]
            if _orient(a, b, c) == 0:
                d1 = _sub(b, a)
                d2 = _sub(c, b)
                if d1[0] * d2[0] + d1[1] * d2[1] <= 0:
                    raise NotSimple(f"curve backtracks at vertex {b}")
                del vs[i]
                changed = True
            else:
                i += 1
        # absorb leading/trailing vertical runs into the tails
        while len(vs) >= 2 and vs[0][0] == vs[1][0]:
            if vs[1][1] > vs[0][1]:
                del vs[0]
                changed = True
            else:
                raise NotSimple("first segment heads down into the down-tail")
        while len(vs) >= 2 and vs[-1][0] == vs[-2][0]:
            if vs[-1][1] > vs[-2][1]:
                del vs[-1]
                changed = True
            else:
                raise NotSimple("last segment heads down away from the up-tail")
    if len(vs) == 1:
        vs[0] = (vs[0][0], Fraction(0))
    return tuple(vs)


class EssentialLine:
    """Oriented PL essential line: down-ray + polyline + up-ray, exact rationals.

    Vertices are stored canonically (no repeated or collinear-interior points;
    vertical end runs absorbed into the tails; a pure vertical line is a single
    vertex at height 0), so equality of point sets is equality of vertices.
    """

    __slots__ = ("vertices", "_is_graph")

    def __init__(self, vertices: Iterable, validate: bool = True):
        raw = [pt(*v) for v in vertices]
        if not raw:
            raise ValueError("an essential line needs at least one vertex")
        self.vertices: tuple[Point, ...] = _canonical_vertices(raw)
        ys = [v[1] for v in self.vertices]
        self._is_graph = all(ys[i] < ys[i + 1] for i in range(len(ys) - 1))
        if validate and not self._is_graph:
            self._validate_simple()

    # -- basic geometry --------------------------------------------------

    @property
    def tail_down(self) -> Fraction:
        """x-coordinate of the downward vertical ray (at the first vertex)."""
        return self.vertices[0][0]

    @property
    def tail_up(self) -> Fraction:
        return self.vertices[-1][0]

    @property
    def is_graph(self) -> bool:
        """True if x is a PL function of y (vertex heights strictly increase)."""
        return self._is_graph

    @property
    def min_y(self) -> Fraction:
        return min(v[1] for v in self.vertices)

    @property
    def max_y(self) -> Fraction:
        return max(v[1] for v in self.vertices)

    @property
    def min_x(self) -> Fraction:
        return min(v[0] for v in self.vertices)

    @property
    def max_x(self) -> Fraction:
        return max(v[0] for v in self.vertices)

    def extended_chain(self, lo: Fraction, hi: Fraction) -> list[Point]:
        """Vertex chain with the tails clipped at heights lo < min_y, hi > max_y."""
        if not (lo < self.min_y and hi > self.max_y):
            raise ValueError("clip heights must lie strictly beyond the vertex range")
        return [(self.tail_down, lo), *self.vertices, (self.tail_up, hi)]

    def translate(self, dx, dy=0) -> "EssentialLine":
        dx = as_rational(dx)
        dy = as_rational(dy)
        return EssentialLine([(x + dx, y + dy) for x, y in self.vertices], validate=False)

    def contains_point(self, p) -> bool:
        p = pt(*p)
        v0, vn = self.vertices[0], self.vertices[-1]
        if p[0] == v0[0] and p[1] <= v0[1]:
            return True
        if p[0] == vn[0] and p[1] >= vn[1]:
            return True
        for a, b in zip(self.vertices, self.vertices[1:]):
            if _on_segment(p, a, b):
                return True
        return False

    def x_at(self, y) -> Fraction:
        """Evaluate the graph x(y); only valid for graph-class lines."""
        if not self._is_graph:
            raise ValueError("x_at is only defined for graph-class lines")
        y = as_rational(y)
        vs = self.vertices
        if y <= vs[0][1]:
            return vs[0][0]
        if y >= vs[-1][1]:
            return vs[-1][0]
        for a, b in zip(vs, vs[1:]):
            if a[1] <= y <= b[1]:
                return a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
        raise AssertionError("unreachable")

    def _validate_simple(self) -> None:
        lo = self.min_y - 1
        hi = self.max_y + 1
        chain = self.extended_chain(lo, hi)
        segs = list(zip(chain, chain[1:]))
        n = len(segs)
        for i in range(n):
            for j in range(i + 1, n):
                hit = _segment_intersection(*segs[i], *segs[j])
                if hit is None:
                    continue
                if j == i + 1 and hit[0] == "point" and hit[1] == segs[i][1]:
                    continue
                raise NotSimple(f"segments {i} and {j} intersect at {hit[1:]}")

    # -- value semantics ---------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, EssentialLine) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        pts = ", ".join(f"({format_rational(x)}, {format_rational(y)})" for x, y in self.vertices)
        return f"EssentialLine([{pts}])"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "tail_down": format_rational(self.tail_down),
            "vertices": [[format_rational(x), format_rational(y)] for x, y in self.vertices],
            "tail_up": format_rational(self.tail_up),
        }

    @staticmethod
    def from_json(data: dict) -> "EssentialLine":
        line = EssentialLine([(as_rational(x), as_rational(y)) for x, y in data["vertices"]])
        if "tail_down" in data and as_rational(data["tail_down"]) != line.tail_down:
            raise ValueError("tail_down does not match the first vertex")
        if "tail_up" in data and as_rational(data["tail_up"]) != line.tail_up:
            raise ValueError("tail_up does not match the last vertex")
        return line


def vertical_line(x) -> EssentialLine:
    """The upward-oriented vertical line {x} × R."""
    return EssentialLine([(x, 0)])


# -- side test ---------------------------------------------------------------


def side_of(line: EssentialLine, p) -> SideLabel:
    """Which side of the line the point is on (Left = the L(Γ) component).

    Crossing parity of the horizontal leftward ray from p against the curve;
    the whole half-plane left of every vertex is inside L(Γ) because below the
    vertex range the curve is a single vertical ray, so even parity means Left.
    """
    p = pt(*p)
    if line.contains_point(p):
        return SideLabel.ON
    px, py = p
    lo = min(line.min_y, py) - 1
    hi = max(line.max_y, py) + 1
    chain = line.extended_chain(lo, hi)
    crossings = 0
    for a, b in zip(chain, chain[1:]):
        if (a[1] <= py) == (b[1] <= py):
            continue
        xc = a[0] + (py - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
        if xc < px:
            crossings += 1
    return SideLabel.LEFT if crossings % 2 == 0 else SideLabel.RIGHT


# -- order comparison ---------------------------------------------------------


def _off_curve_pieces(a: EssentialLine, b: EssentialLine):
    """Representative interior points of the maximal sub-arcs of a not lying on b.

    Returns (representatives, contact) where contact is True iff the curves
    share at least one point. The two infinite tail residues of a are
    represented by probe points beyond the clip heights.
    """
    lo = min(a.min_y, b.min_y) - 1
    hi = max(a.max_y, b.max_y) + 1
    chain_a = a.extended_chain(lo, hi)
    chain_b = b.extended_chain(lo, hi)
    segs_b = list(zip(chain_b, chain_b[1:]))
    reps: list[Point] = []
    contact = False
    for p1, p2 in zip(chain_a, chain_a[1:]):
        d = _sub(p2, p1)
        axis = 0 if d[0] != 0 else 1
        cuts = {Fraction(0), Fraction(1)}
        for q1, q2 in segs_b:
            hit = _segment_intersection(p1, p2, q1, q2)
            if hit is None:
                continue
            contact = True
            for q in hit[1:]:
                cuts.add((q[axis] - p1[axis]) / d[axis])
        ts = sorted(cuts)
        for t0, t1 in zip(ts, ts[1:]):
            tm = (t0 + t1) / 2
            m = (p1[0] + tm * d[0], p1[1] + tm * d[1])
            if not b.contains_point(m):
                reps.append(m)
    # infinite tail residues beyond the clip window
    if a.tail_down == b.tail_down:
        contact = True
    else:
        reps.append((a.tail_down, lo - 1))
    if a.tail_up == b.tail_up:
        contact = True
    else:
        reps.append((a.tail_up, hi + 1))
    return reps, contact


def compare(a: EssentialLine, b: EssentialLine) -> OrderVerdict:
    """Order verdict for two essential lines.

    StrictlyLess iff the curves are disjoint and a lies in L(b) (equivalently
    Cl(L(a)) ⊂ L(b)); Crossing iff a has points strictly on both sides of b;
    tangential touching yields LessOrEqual / GreaterOrEqual; Equal iff the
    point sets coincide. Total: never raises.
    """
    if a == b:
        return OrderVerdict.EQUAL
    reps, contact = _off_curve_pieces(a, b)
    sides = {side_of(b, p) for p in reps}
    if not sides:
        return OrderVerdict.EQUAL
    if sides == {SideLabel.LEFT}:
        return OrderVerdict.LESS_OR_EQUAL if contact else OrderVerdict.STRICTLY_LESS
    if sides == {SideLabel.RIGHT}:
        return OrderVerdict.GREATER_OR_EQUAL if contact else OrderVerdict.STRICTLY_GREATER
    return OrderVerdict.CROSSING


# -- join ----------------------------------------------------------------------


def _join_graphs(a: EssentialLine, b: EssentialLine) -> EssentialLine:
    """Pointwise-min join for graph-class lines."""
    ys = sorted({v[1] for v in a.vertices} | {v[1] for v in b.vertices})
    diff = [a.x_at(y) - b.x_at(y) for y in ys]
    if a.tail_down == b.tail_down and diff[0] == 0:
        raise DegenerateOverlap("down-tails coincide")
    if a.tail_up == b.tail_up and diff[-1] == 0:
        raise DegenerateOverlap("up-tails coincide")
    for i in range(len(ys) - 1):
        if diff[i] == 0 and diff[i + 1] == 0:
            raise DegenerateOverlap(f"graphs coincide on [{ys[i]}, {ys[i + 1]}]")
    heights = list(ys)
    for i in range(len(ys) - 1):
        if (diff[i] < 0 < diff[i + 1]) or (diff[i] > 0 > diff[i + 1]):
            # exact crossing height of the two linear pieces
            y0, y1 = ys[i], ys[i + 1]
            yc = y0 + (y1 - y0) * (-diff[i]) / (diff[i + 1] - diff[i])
            heights.append(yc)
    heights = sorted(set(heights))
    verts = [(min(a.x_at(y), b.x_at(y)), y) for y in heights]
    return EssentialLine(verts, validate=False)


def _forward_dir(chain: list[Point], seg: int, t: Fraction) -> Point:
    """Direction of travel at parameter t of segment seg (next segment at t=1)."""
    if t == 1:
        seg += 1
    a, b = chain[seg], chain[seg + 1]
    return _sub(b, a)


def _cw_before(ref: Point, d1: Point, d2: Point) -> bool:
    """True if d1 comes strictly before d2 when rotating clockwise from ref.

    All three directions are assumed pairwise non-parallel except that d1 or
    d2 may be exactly opposite to ref.
    """
    def half(v: Point) -> int:
        c = _cross(ref, v)
        if c < 0:
            return 0
        if c == 0:
            return 1
        return 2

    h1, h2 = half(d1), half(d2)
    if h1 != h2:
        return h1 < h2
    return _cross(d1, d2) < 0


def _join_trace(a: EssentialLine, b: EssentialLine) -> EssentialLine:
    """Trace the boundary of the far-left component of L(a) ∩ L(b).

    Both curves are split at their pairwise intersections; the walk ascends
    the curve with the smaller down-tail and, at every intersection, leaves
    along the outgoing arc that keeps the far-left region on its left (the
    first forward direction clockwise from the reversed incoming direction).
    """
    if a.tail_down == b.tail_down:
        raise DegenerateOverlap("down-tails coincide")
    if a.tail_up == b.tail_up:
        raise DegenerateOverlap("up-tails coincide")
    lo = min(a.min_y, b.min_y) - 1
    hi = max(a.max_y, b.max_y) + 1
    chains = [a.extended_chain(lo, hi), b.extended_chain(lo, hi)]
    # events[c][i] = sorted list of (t, point, other_seg, other_t)
    events: list[dict[int, list]] = [dict(), dict()]

    def add_event(c: int, seg: int, t: Fraction, p: Point, oseg: int, ot: Fraction):
        if t == 0:
            return  # recorded as t=1 of the previous segment
        bucket = events[c].setdefault(seg, [])
        if any(e[0] == t for e in bucket):
            return
        bucket.append((t, p, oseg, ot))

    segs_a = list(zip(chains[0], chains[0][1:]))
    segs_b = list(zip(chains[1], chains[1][1:]))
    for i, (p1, p2) in enumerate(segs_a):
        da = _sub(p2, p1)
        ax = 0 if da[0] != 0 else 1
        for j, (q1, q2) in enumerate(segs_b):
            hit = _segment_intersection(p1, p2, q1, q2)
            if hit is None:
                continue
            if hit[0] == "overlap":
                raise DegenerateOverlap(f"shared segment {hit[1]}..{hit[2]}")
            p = hit[1]
            db = _sub(q2, q1)
            bx = 0 if db[0] != 0 else 1
            ta = (p[ax] - p1[ax]) / da[ax]
            tb = (p[bx] - q1[bx]) / db[bx]
            add_event(0, i, ta, p, j, tb)
            add_event(1, j, tb, p, i, ta)
    for buckets in events:
        for bucket in buckets.values():
            bucket.sort(key=lambda e: e[0])

    cur = 0 if a.tail_down < b.tail_down else 1
    seg, t = 0, Fraction(0)
    out: list[Point] = [chains[cur][0]]

    def emit(p: Point):
        if out[-1] != p:
            out.append(p)

    n_events = sum(len(v) for d in events for v in d.values())
    budget = 4 * (len(chains[0]) + len(chains[1]) + n_events) + 64
    while budget > 0:
        budget -= 1
        nxt = None
        for e in events[cur].get(seg, []):
            if e[0] > t:
                nxt = e
                break
        if nxt is None:
            # advance to the end of this segment
            emit(chains[cur][seg + 1])
            seg += 1
            t = Fraction(0)
            if seg >= len(chains[cur]) - 1:
                return EssentialLine(out)
            continue
        te, p, oseg, ot = nxt
        d_in = _sub(chains[cur][seg + 1], chains[cur][seg])
        d_cont = _forward_dir(chains[cur], seg, te)
        other = 1 - cur
        d_other = _forward_dir(chains[other], oseg, ot)
        ref = (-d_in[0], -d_in[1])
        if _cw_before(ref, d_other, d_cont):
            emit(p)
            cur, seg, t = other, oseg, ot
            if t == 1:
                seg, t = seg + 1, Fraction(0)
        else:
            emit(p)
            t = te
            if t == 1:
                seg, t = seg + 1, Fraction(0)
    raise RuntimeError("join trace exceeded its step budget (tracing bug)")


def join(a: EssentialLine, b: EssentialLine, method: str = "auto") -> EssentialLine:
    """The line Γ₁∨Γ₂: boundary of the far-left component of L(a) ∩ L(b).

    Despite the name (kept from the ∨ notation), the result is a lower bound:
    it is contained in a ∪ b and satisfies join(a,b) ≤ a and join(a,b) ≤ b.

    method: "auto" picks the pointwise-min fast path when both lines are
    graphs, otherwise the general arrangement tracer; "graph" / "trace" force
    one algorithm (they agree on graph-class inputs).

    Raises DegenerateOverlap when a and b share a segment of positive length
    (no symbolic perturbation is applied; the caller must perturb).
    """
    if a == b:
        return a
    if method == "auto":
        method = "graph" if (a.is_graph and b.is_graph) else "trace"
    if method == "graph":
        if not (a.is_graph and b.is_graph):
            raise ValueError("graph join requires graph-class lines")
        return _join_graphs(a, b)
    if method == "trace":
        return _join_trace(a, b)
    raise ValueError(f"unknown join method {method!r}")


def join_all(lines: Sequence[EssentialLine], method: str = "auto") -> EssentialLine:
    """Fold join over a nonempty sequence."""
    if not lines:
        raise ValueError("join_all needs at least one line")
    acc = lines[0]
    for other in lines[1:]:
        acc = join(acc, other, method=method)
    return acc


# -- strict interpolation -------------------------------------------------------


def _subtract_blocks(lo: Fraction, hi: Fraction, blocks: list[tuple[Fraction, Fraction]]):
    """Open interval (lo, hi) minus closed blocks; returns open sub-intervals."""
    pieces = []
    cur = lo
    for bl, bh in sorted(blocks):
        if bh <= cur:
            continue
        if bl >= hi:
            break
        if bl > cur:
            pieces.append((cur, bl))
        cur = max(cur, bh)
    if cur < hi:
        pieces.append((cur, hi))
    return pieces


def _midline_general(a: EssentialLine, b: EssentialLine,
                     w: Fraction = Fraction(1, 2)) -> EssentialLine:
    """Spine through the strip R(a) ∩ L(b) via horizontal trapezoid decomposition.

    Cut heights are all vertex heights of both curves; between consecutive
    cuts every wall is a straight sub-segment spanning the band, so each cell
    is a convex trapezoid. BFS over the cell adjacency graph links the bottom
    tail gap to the top tail gap; the spine passes through doorway points and
    one interior point per visited cell (at fraction w across each gap), which
    keeps it simple and strictly inside the strip.
    """
    heights = sorted({v[1] for v in a.vertices} | {v[1] for v in b.vertices})
    y_lo = heights[0] - 1
    y_hi = heights[-1] + 1
    cuts = [y_lo, *heights, y_hi]
    chain_a = a.extended_chain(y_lo - 1, y_hi + 1)
    chain_b = b.extended_chain(y_lo - 1, y_hi + 1)
    all_segs = list(zip(chain_a, chain_a[1:])) + list(zip(chain_b, chain_b[1:]))

    def x_on_seg(seg, y):
        (x1, y1), (x2, y2) = seg
        return x1 + (y - y1) * (x2 - x1) / (y2 - y1)

    # cells[band] = list of (x_lo_bot, x_lo_top, x_hi_bot, x_hi_top) strip gaps
    bands = []
    for lo_h, hi_h in zip(cuts, cuts[1:]):
        walls = []
        for seg in all_segs:
            ys = sorted((seg[0][1], seg[1][1]))
            if ys[0] <= lo_h and ys[1] >= hi_h and ys[0] != ys[1]:
                walls.append((x_on_seg(seg, lo_h), x_on_seg(seg, hi_h)))
        walls.sort(key=lambda wall: wall[0] + wall[1])
        ym = (lo_h + hi_h) / 2
        cells = []
        for wl, wr in zip(walls, walls[1:]):
            xl = (wl[0] + wl[1]) / 2
            xr = (wr[0] + wr[1]) / 2
            m = (xl + w * (xr - xl), ym)
            if side_of(a, m) is SideLabel.RIGHT and side_of(b, m) is SideLabel.LEFT:
                cells.append({"bot": (wl[0], wr[0]), "top": (wl[1], wr[1]),
                              "mid": m, "band": len(bands)})
        bands.append(cells)

    # matter on each cut line blocks doorways: horizontal segments and vertices
    def blocks_at(y: Fraction) -> list[tuple[Fraction, Fraction]]:
        blocks = []
        for seg in all_segs:
            if seg[0][1] == y and seg[1][1] == y:
                xs = sorted((seg[0][0], seg[1][0]))
                blocks.append((xs[0], xs[1]))
        for v in (*a.vertices, *b.vertices):
            if v[1] == y:
                blocks.append((v[0], v[0]))
        return blocks

    # adjacency edges between vertically neighboring cells
    doors: dict[tuple[int, int], list[tuple[int, int, Point]]] = {}
    nodes: list[dict] = []
    for band in bands:
        for cell in band:
            cell["id"] = len(nodes)
            nodes.append(cell)
    for bi in range(len(bands) - 1):
        y = cuts[bi + 1]
        blocked = blocks_at(y)
        for c_low in bands[bi]:
            for c_high in bands[bi + 1]:
                lo_x = max(c_low["top"][0], c_high["bot"][0])
                hi_x = min(c_low["top"][1], c_high["bot"][1])
                if lo_x >= hi_x:
                    continue
                pieces = _subtract_blocks(lo_x, hi_x, blocked)
                if not pieces:
                    continue
                px0, px1 = max(pieces, key=lambda piece: piece[1] - piece[0])
                door = (px0 + w * (px1 - px0), y)
                doors.setdefault((c_low["id"], c_high["id"]), []).append(
                    (c_low["id"], c_high["id"], door))

    if not bands[0] or not bands[-1]:
        raise RuntimeError("strip has no tail gap (midline bug)")
    start = bands[0][0]["id"]
    goal = bands[-1][0]["id"]
    adj: dict[int, list[tuple[int, Point]]] = {}
    for (u, v), ds in doors.items():
        _, _, door = ds[0]
        adj.setdefault(u, []).append((v, door))
        adj.setdefault(v, []).append((u, door))
    parent: dict[int, tuple[int, Point]] = {start: (-1, (Fraction(0), Fraction(0)))}
    queue = [start]
    while queue:
        u = queue.pop(0)
        if u == goal:
            break
        for v, door in adj.get(u, []):
            if v not in parent:
                parent[v] = (u, door)
                queue.append(v)
    if goal not in parent:
        raise RuntimeError("strip cells are disconnected (midline bug)")
    path_doors: list[Point] = []
    path_cells: list[int] = []
    node = goal
    while node != start:
        path_cells.append(node)
        u, door = parent[node]
        path_doors.append(door)
        node = u
    path_cells.append(start)
    path_cells.reverse()
    path_doors.reverse()

    spine: list[Point] = [nodes[start]["mid"]]
    for cell_id, door in zip(path_cells[1:], path_doors):
        spine.append(door)
        spine.append(nodes[cell_id]["mid"])
    return EssentialLine(spine)


def midline(a: EssentialLine, b: EssentialLine, weight=Fraction(1, 2)) -> EssentialLine:
    """A line strictly between a and b: compare(a, c) = compare(c, b) = StrictlyLess.

    Graph-class inputs use the pointwise weighted average (the plain average
    at the default weight 1/2); general nested inputs use a trapezoid spine
    through the open strip between the curves. Any weight in (0, 1) yields a
    valid interpolant; callers perturb it to dodge degenerate tail collisions
    in later joins.

    Raises NotNested unless compare(a, b) = StrictlyLess.
    """
    w = as_rational(weight)
    if not 0 < w < 1:
        raise ValueError("weight must lie strictly between 0 and 1")
    if compare(a, b) is not OrderVerdict.STRICTLY_LESS:
        raise NotNested("midline requires a < b (StrictlyLess)")
    if a.is_graph and b.is_graph:
        ys = sorted({v[1] for v in a.vertices} | {v[1] for v in b.vertices})
        c = EssentialLine([(a.x_at(y) + w * (b.x_at(y) - a.x_at(y)), y) for y in ys],
                          validate=False)
    else:
        c = _midline_general(a, b, w)
    if compare(a, c) is not OrderVerdict.STRICTLY_LESS or \
            compare(c, b) is not OrderVerdict.STRICTLY_LESS:
        raise RuntimeError("midline postcondition failed (interpolation bug)")
    return c
