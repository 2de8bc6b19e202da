"""2-D convex geometry over power setpoints.

Finite real-power codebooks, convex hulls, Minkowski sums, diameters,
Euclidean projections onto finite sets / segments / polygons / triangles,
and the corner-cone machinery used to build projection-translation-invariant
supersets.

All point-identity and distance comparisons use an absolute tolerance of
``POINT_TOL`` (coordinates are watt-scale, so double precision leaves ample
guard digits); sign tests on unit-normalized quantities use ``SIGN_TOL``.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence, Union

import numpy as np

from .errors import GeometryError

POINT_TOL = 1e-9
SIGN_TOL = 1e-12


class Setpoint(NamedTuple):
    """A (real power P, reactive power Q) operating point in W / var.

    Consumption is negative P by convention.
    """

    p: float
    q: float

    def norm(self) -> float:
        return math.hypot(self.p, self.q)

    def is_finite(self) -> bool:
        return math.isfinite(self.p) and math.isfinite(self.q)


ORIGIN = Setpoint(0.0, 0.0)


def _require_finite_point(pt: Setpoint) -> None:
    if not (math.isfinite(pt[0]) and math.isfinite(pt[1])):
        raise GeometryError(f"non-finite setpoint {pt}")


class FiniteSet1D:
    """A non-empty, strictly increasing, finite set of real-power values (W).

    Values closer than ``POINT_TOL`` are merged on construction.
    """

    __slots__ = ("values",)

    def __init__(self, values: Iterable[float]):
        vals = sorted(float(v) for v in values)
        if not vals:
            raise GeometryError("finite set must be non-empty")
        merged = [vals[0]]
        for v in vals[1:]:
            if v - merged[-1] > POINT_TOL:
                merged.append(v)
        for v in merged:
            if not math.isfinite(v):
                raise GeometryError("finite set values must be finite")
        self.values = tuple(merged)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteSet1D) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"FiniteSet1D({list(self.values)})"

    @property
    def lo(self) -> float:
        return self.values[0]

    @property
    def hi(self) -> float:
        return self.values[-1]


def project_finite(s: FiniteSet1D, x: float, tie_toward: float | None = None) -> float:
    """Nearest element of ``s`` to ``x``.

    When two elements are equidistant (within ``POINT_TOL``), prefers the one
    closest to ``tie_toward`` if supplied; any remaining tie resolves to the
    larger value (less consumption), so the rule is total and deterministic.
    """
    vals = s.values
    j = bisect_left(vals, x)
    if j == 0:
        return vals[0]
    if j == len(vals):
        return vals[-1]
    lo, hi = vals[j - 1], vals[j]
    d_lo = x - lo
    d_hi = hi - x
    if d_lo < d_hi - POINT_TOL:
        return lo
    if d_hi < d_lo - POINT_TOL:
        return hi
    if tie_toward is not None:
        t_lo = abs(lo - tie_toward)
        t_hi = abs(hi - tie_toward)
        if t_lo < t_hi - POINT_TOL:
            return lo
        if t_hi < t_lo - POINT_TOL:
            return hi
    return hi


def max_stepsize(s: FiniteSet1D) -> float:
    """Largest gap between adjacent values; 0 for singletons."""
    v = s.values
    if len(v) == 1:
        return 0.0
    return max(v[i + 1] - v[i] for i in range(len(v) - 1))


def max_stepsize_collection(ss: Sequence[FiniteSet1D]) -> float:
    """Largest gap over a collection of finite sets."""
    ss = list(ss)
    if not ss:
        raise GeometryError("empty collection")
    return max(max_stepsize(s) for s in ss)


# ---------------------------------------------------------------------------
# Convex polygons


def _hull_chain(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone-chain hull, CCW, strictly convex (collinear points dropped)."""
    pts = sorted(set(points))
    if len(pts) == 1:
        return pts

    def build(seq):
        chain: list[tuple[float, float]] = []
        for px, py in seq:
            while len(chain) >= 2:
                ox, oy = chain[-2]
                ax, ay = chain[-1]
                cross = (ax - ox) * (py - oy) - (ay - oy) * (px - ox)
                lim = SIGN_TOL * max(1.0, math.hypot(ax - ox, ay - oy) * math.hypot(px - ox, py - oy))
                if cross <= lim:
                    chain.pop()
                else:
                    break
            chain.append((px, py))
        return chain

    lower = build(pts)
    upper = build(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        # all points collinear: keep the two extremes
        hull = [pts[0], pts[-1]] if pts[0] != pts[-1] else [pts[0]]
    # merge vertices that coincide within tolerance (wrap-around included)
    out: list[tuple[float, float]] = []
    for p in hull:
        if out and math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) <= POINT_TOL:
            continue
        out.append(p)
    if len(out) > 1 and math.hypot(out[0][0] - out[-1][0], out[0][1] - out[-1][1]) <= POINT_TOL:
        out.pop()
    return out


class ConvexPolygon:
    """Convex polygon stored as a CCW tuple of Setpoints.

    Degenerate sets are first-class: a single point is a 1-vertex polygon and
    a segment a 2-vertex polygon. Construction normalizes any point set
    through a convex hull, so ``ConvexPolygon(points)`` is always valid.
    """

    __slots__ = ("vertices", "_arr")

    def __init__(self, points: Iterable[Sequence[float]]):
        pts = [(float(p[0]), float(p[1])) for p in points]
        if not pts:
            raise GeometryError("empty point set")
        for x, y in pts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise GeometryError("non-finite point")
        hull = _hull_chain(pts)
        self.vertices = tuple(Setpoint(x, y) for x, y in hull)
        self._arr = np.asarray(hull, dtype=float)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "ConvexPolygon":
        """Real-power interval [lo, hi] x {0} as a (possibly degenerate) polygon."""
        return cls([(lo, 0.0), (hi, 0.0)])

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    @property
    def is_segment(self) -> bool:
        return len(self.vertices) == 2

    def as_array(self) -> np.ndarray:
        return self._arr

    def bbox(self) -> tuple[float, float, float, float]:
        a = self._arr
        return float(a[:, 0].min()), float(a[:, 0].max()), float(a[:, 1].min()), float(a[:, 1].max())

    def support(self, dx: float, dy: float) -> float:
        """Support value max over vertices of <(dx,dy), v>."""
        a = self._arr
        return float((a[:, 0] * dx + a[:, 1] * dy).max())

    def translate(self, d: Sequence[float]) -> "ConvexPolygon":
        return ConvexPolygon([(v.p + d[0], v.q + d[1]) for v in self.vertices])

    def contains(self, pt: Sequence[float], tol: float = POINT_TOL) -> bool:
        """Membership within absolute distance ``tol``."""
        x, y = float(pt[0]), float(pt[1])
        v = self.vertices
        if len(v) == 1:
            return math.hypot(x - v[0].p, y - v[0].q) <= tol
        if len(v) == 2:
            return _dist_to_segment(x, y, v[0], v[1]) <= tol
        n = len(v)
        for i in range(n):
            ax, ay = v[i]
            bx, by = v[(i + 1) % n]
            ex, ey = bx - ax, by - ay
            elen = math.hypot(ex, ey)
            # signed perpendicular distance; negative = outside this edge
            if ex * (y - ay) - ey * (x - ax) < -tol * elen:
                return False
        return True

    def contains_many(self, pts: np.ndarray, tol: float = POINT_TOL) -> np.ndarray:
        """Vectorized membership test for an (m, 2) array of points."""
        pts = np.asarray(pts, dtype=float)
        v = self._arr
        if len(v) == 1:
            return np.hypot(pts[:, 0] - v[0, 0], pts[:, 1] - v[0, 1]) <= tol
        if len(v) == 2:
            return _dist_to_segment_many(pts, v[0], v[1]) <= tol
        ok = np.ones(len(pts), dtype=bool)
        n = len(v)
        for i in range(n):
            a = v[i]
            b = v[(i + 1) % n]
            e = b - a
            elen = math.hypot(e[0], e[1])
            cross = e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])
            ok &= cross >= -tol * elen
        return ok

    def approx_equals(self, other: "ConvexPolygon", tol: float = POINT_TOL) -> bool:
        if len(self.vertices) != len(other.vertices):
            return False
        # vertex lists may start anywhere; try all rotations
        n = len(self.vertices)
        a = self.vertices
        b = other.vertices
        for shift in range(n):
            if all(
                math.hypot(a[i].p - b[(i + shift) % n].p, a[i].q - b[(i + shift) % n].q) <= tol
                for i in range(n)
            ):
                return True
        return False

    def __repr__(self) -> str:
        return f"ConvexPolygon({[(v.p, v.q) for v in self.vertices]})"


def convex_hull(points: Iterable[Sequence[float]]) -> ConvexPolygon:
    """Minimal convex polygon containing all points (collinear inputs collapse)."""
    return ConvexPolygon(points)


def _dist_to_segment(x: float, y: float, a: Sequence[float], b: Sequence[float]) -> float:
    ax, ay = a[0], a[1]
    bx, by = b[0], b[1]
    ex, ey = bx - ax, by - ay
    L2 = ex * ex + ey * ey
    if L2 == 0.0:
        return math.hypot(x - ax, y - ay)
    t = ((x - ax) * ex + (y - ay) * ey) / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(x - (ax + t * ex), y - (ay + t * ey))


def _dist_to_segment_many(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    e = b - a
    L2 = float(e[0] * e[0] + e[1] * e[1])
    if L2 == 0.0:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    t = ((pts[:, 0] - a[0]) * e[0] + (pts[:, 1] - a[1]) * e[1]) / L2
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(pts[:, 0] - (a[0] + t * e[0]), pts[:, 1] - (a[1] + t * e[1]))


@dataclass(frozen=True)
class TriangleSet:
    """Isosceles triangle {(P,Q): 0 <= P <= x, |Q| <= P tan(phi)} in the PQ plane.

    ``x`` is the apex-to-base height (W) and ``phi`` the half-angle in
    [0, pi/2). Degenerates to a segment for phi = 0 and a point for x = 0.
    """

    x: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and self.x >= 0.0):
            raise GeometryError("triangle height must be finite and non-negative")
        if not (0.0 <= self.phi < math.pi / 2):
            raise GeometryError("half-angle must lie in [0, pi/2)")

    def to_polygon(self) -> ConvexPolygon:
        q = self.x * math.tan(self.phi)
        if self.x <= POINT_TOL:
            return ConvexPolygon([(0.0, 0.0)])
        if q <= POINT_TOL:
            return ConvexPolygon([(0.0, 0.0), (self.x, 0.0)])
        return ConvexPolygon([(0.0, 0.0), (self.x, -q), (self.x, q)])

    def contains(self, pt: Sequence[float], tol: float = POINT_TOL) -> bool:
        return self.to_polygon().contains(pt, tol)


ConvexShape = Union[ConvexPolygon, TriangleSet]


def _as_polygon(shape: ConvexShape) -> ConvexPolygon:
    return shape.to_polygon() if isinstance(shape, TriangleSet) else shape


def minkowski_sum(a: ConvexShape, b: ConvexShape) -> ConvexPolygon:
    """Minkowski sum of two convex polygons (hull of pairwise vertex sums)."""
    va = _as_polygon(a).as_array()
    vb = _as_polygon(b).as_array()
    sums = (va[:, None, :] + vb[None, :, :]).reshape(-1, 2)
    return ConvexPolygon(sums)


def diameter(a: ConvexShape) -> float:
    """Maximum pairwise vertex distance (equals the set diameter for convex sets)."""
    v = _as_polygon(a).as_array()
    if len(v) == 1:
        return 0.0
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d * d).sum(axis=2)).max())


def project_convex(shape: ConvexShape, x: Sequence[float]) -> Setpoint:
    """Euclidean projection of ``x`` onto a convex polygon/triangle/segment.

    Interior points map to themselves. Exterior points are clamped onto each
    edge segment and the closest candidate wins; on exact ties the first edge
    in CCW order wins.
    """
    poly = _as_polygon(shape)
    v = poly.vertices
    px, py = float(x[0]), float(x[1])
    if len(v) == 1:
        return v[0]
    if len(v) == 2:
        edges = [(v[0], v[1])]
    else:
        if poly.contains((px, py), tol=0.0):
            return Setpoint(px, py)
        n = len(v)
        edges = [(v[i], v[(i + 1) % n]) for i in range(n)]
    best = None
    best_d2 = math.inf
    for a, b in edges:
        ex, ey = b.p - a.p, b.q - a.q
        L2 = ex * ex + ey * ey
        if L2 == 0.0:
            cx, cy = a.p, a.q
        else:
            t = ((px - a.p) * ex + (py - a.q) * ey) / L2
            t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
            cx, cy = a.p + t * ex, a.q + t * ey
        d2 = (px - cx) ** 2 + (py - cy) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best = (cx, cy)
    return Setpoint(best[0], best[1])


def project_convex_many(shape: ConvexShape, pts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`project_convex` for an (m, 2) array of points."""
    poly = _as_polygon(shape)
    v = poly._arr
    pts = np.asarray(pts, dtype=float)
    m = len(pts)
    if len(v) == 1:
        return np.tile(v[0], (m, 1))
    if len(v) == 2:
        edge_list = [(v[0], v[1])]
        inside = np.zeros(m, dtype=bool)
    else:
        inside = poly.contains_many(pts, tol=0.0)
        n = len(v)
        edge_list = [(v[i], v[(i + 1) % n]) for i in range(n)]
    out = np.where(inside[:, None], pts, 0.0)
    todo = ~inside
    if todo.any():
        sub = pts[todo]
        best = np.empty_like(sub)
        best_d2 = np.full(len(sub), np.inf)
        for a, b in edge_list:
            e = b - a
            L2 = float(e[0] * e[0] + e[1] * e[1])
            if L2 == 0.0:
                cand = np.tile(a, (len(sub), 1))
            else:
                t = ((sub[:, 0] - a[0]) * e[0] + (sub[:, 1] - a[1]) * e[1]) / L2
                t = np.clip(t, 0.0, 1.0)
                cand = np.stack([a[0] + t * e[0], a[1] + t * e[1]], axis=1)
            d2 = ((sub - cand) ** 2).sum(axis=1)
            better = d2 < best_d2
            best_d2[better] = d2[better]
            best[better] = cand[better]
        out[todo] = best
    return out


# ---------------------------------------------------------------------------
# Cones and corner machinery


@dataclass(frozen=True)
class Cone:
    """Convex cone {a*v + b*w : a, b >= 0} spanned by two nonzero generators."""

    v: tuple[float, float]
    w: tuple[float, float]

    def __post_init__(self):
        if math.hypot(*self.v) == 0.0 or math.hypot(*self.w) == 0.0:
            raise GeometryError("cone generators must be nonzero")


def _unit(x: float, y: float) -> tuple[float, float]:
    L = math.hypot(x, y)
    return (x / L, y / L)


def _in_cone(ux: float, uy: float, wx: float, wy: float, x: float, y: float) -> bool:
    """Membership of (x, y) in cone(u, w), generators and point unit-normalized."""
    L = math.hypot(x, y)
    if L == 0.0:
        return True
    x, y = x / L, y / L
    det = ux * wy - uy * wx
    if abs(det) <= SIGN_TOL:
        # generators (anti)parallel: cone is a ray or half-plane
        if ux * wx + uy * wy > 0.0:
            return abs(x * uy - y * ux) <= SIGN_TOL and x * ux + y * uy >= -SIGN_TOL
        return True  # opposite generators span a half-plane boundary; accept
    a = (x * wy - y * wx) / det
    b = (ux * y - uy * x) / det
    return a >= -SIGN_TOL and b >= -SIGN_TOL


class CornerCones:
    """Corner cone at a polygon vertex plus its polar-cone membership tests."""

    __slots__ = ("cone", "_u1", "_u2")

    def __init__(self, cone: Cone):
        self.cone = cone
        self._u1 = _unit(*cone.v)
        self._u2 = _unit(*cone.w)

    def polar_contains(self, y: Sequence[float]) -> bool:
        """Membership in the polar cone {y : <y, x> <= 0 for all x in cone}."""
        yx, yy = float(y[0]), float(y[1])
        L = math.hypot(yx, yy)
        if L == 0.0:
            return True
        yx, yy = yx / L, yy / L
        return (yx * self._u1[0] + yy * self._u1[1] <= SIGN_TOL) and (
            yx * self._u2[0] + yy * self._u2[1] <= SIGN_TOL
        )

    def reflected_wedge_contains(self, y: Sequence[float]) -> bool:
        """Membership in (-cone) intersected with the polar cone."""
        yx, yy = float(y[0]), float(y[1])
        return self.polar_contains(y) and _in_cone(
            -self._u1[0], -self._u1[1], -self._u2[0], -self._u2[1], yx, yy
        )


def corner_cones(a: ConvexPolygon, i: int) -> CornerCones:
    """Cone of outgoing edge directions at vertex ``i`` and its polar tests."""
    v = a.vertices
    if len(v) < 3:
        raise GeometryError("corner cones require a polygon with at least 3 vertices")
    if not (0 <= i < len(v)):
        raise GeometryError(f"vertex index {i} out of range for {len(v)}-gon")
    n = len(v)
    vi = v[i]
    nxt = v[(i + 1) % n]
    prv = v[(i - 1) % n]
    return CornerCones(Cone((nxt.p - vi.p, nxt.q - vi.q), (prv.p - vi.p, prv.q - vi.q)))


def clip_halfplane(poly: ConvexPolygon, normal: Sequence[float], offset: float,
                   tol: float = POINT_TOL) -> ConvexPolygon | None:
    """Clip a convex polygon by the half-plane {x : <normal, x> <= offset}.

    Returns None when the intersection is empty.
    """
    nx, ny = float(normal[0]), float(normal[1])
    verts = list(poly.vertices)
    if len(verts) == 1:
        x, y = verts[0]
        return poly if nx * x + ny * y <= offset + tol else None
    kept: list[tuple[float, float]] = []
    m = len(verts)
    closed = m > 2
    pairs = [(verts[i], verts[(i + 1) % m]) for i in range(m)] if closed else [(verts[0], verts[1])]
    for a, b in pairs:
        da = nx * a.p + ny * a.q - offset
        db = nx * b.p + ny * b.q - offset
        if da <= tol:
            kept.append((a.p, a.q))
        if (da > tol and db < -tol) or (da < -tol and db > tol):
            t = da / (da - db)
            kept.append((a.p + t * (b.p - a.p), a.q + t * (b.q - a.q)))
    if not closed:
        b = verts[1]
        if nx * b.p + ny * b.q - offset <= tol:
            kept.append((b.p, b.q))
    if not kept:
        return None
    return ConvexPolygon(kept)


def sample_in(shape: ConvexShape, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples in a convex set (rejection sampling in the bounding box).

    Degenerate sets sample the segment parameter / repeat the point.
    """
    poly = _as_polygon(shape)
    v = poly._arr
    if len(v) == 1:
        return np.tile(v[0], (n, 1))
    if len(v) == 2:
        t = rng.uniform(0.0, 1.0, size=n)
        return v[0][None, :] + t[:, None] * (v[1] - v[0])[None, :]
    x0, x1, y0, y1 = poly.bbox()
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        batch = max(2 * (n - filled), 16)
        cand = np.stack(
            [rng.uniform(x0, x1, size=batch), rng.uniform(y0, y1, size=batch)], axis=1
        )
        ok = poly.contains_many(cand, tol=0.0)
        take = cand[ok][: n - filled]
        out[filled : filled + len(take)] = take
        filled += len(take)
    return out
