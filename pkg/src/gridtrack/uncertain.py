"""Agents whose implementable set is unknown when the profile is advertised.

The agent advertises yesterday's implementable set (persistent predictor)
and implements the projection of ``request - accumulated error`` onto
today's actual set. Whenever every realizable set is a
projection-translation-invariant (PTI) subset of one fixed convex superset
D — translating the subset along any projection residual of a point of D
keeps it inside D — the accumulated error stays within diam(D).

This module provides the randomized PTI verifier, the corner-cone superset
construction for convex polygons, a heuristic common superset for
collections, and the PV-panel agent whose triangular feasible sets make the
superset explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diffusion import ErrorState
from .errors import AgentContractError, GeometryError, PtiError, PtiVerificationError
from .geometry import (
    POINT_TOL,
    ConvexPolygon,
    ConvexShape,
    Setpoint,
    TriangleSet,
    _as_polygon,
    clip_halfplane,
    corner_cones,
    diameter,
    minkowski_sum,
    project_convex,
    project_convex_many,
    sample_in,
)


@dataclass(frozen=True)
class PtiCheckResult:
    """Outcome of a randomized invariance check; falsy iff a witness was found."""

    ok: bool
    witness: tuple[Setpoint, Setpoint] | None
    checked: int

    def __bool__(self) -> bool:
        return self.ok


def is_pti_subset(
    i: ConvexShape,
    d: ConvexShape,
    n_samples: int = 2000,
    seed: int = 0,
    tol: float = 1e-9,
) -> PtiCheckResult:
    """Randomized check that ``i`` is a projection-translation-invariant subset of ``d``.

    Verifies u + v - proj_i(v) in d for all vertex-vertex pairs plus
    ``n_samples`` uniformly sampled pairs (v in d, u in i). A pass is
    probabilistic; a failure is definite and returns the violating (u, v).
    """
    ip = _as_polygon(i)
    dp = _as_polygon(d)
    for v in ip.vertices:
        if not dp.contains(v, POINT_TOL):
            raise PtiError("not a subset")

    checked = 0

    def scan(us: np.ndarray, taus: np.ndarray, vs: np.ndarray, paired: bool):
        nonlocal checked
        if paired:
            pts = us + taus
            ok = dp.contains_many(pts, tol)
            checked += len(pts)
            if not ok.all():
                j = int(np.argmin(ok))
                return Setpoint(*us[j]), Setpoint(*vs[j])
        else:
            for a, (vx, vy) in zip(taus, vs):
                pts = us + a
                ok = dp.contains_many(pts, tol)
                checked += len(pts)
                if not ok.all():
                    j = int(np.argmin(ok))
                    return Setpoint(*us[j]), Setpoint(vx, vy)
        return None

    v_vertex = dp.as_array()
    u_vertex = ip.as_array()
    taus_vertex = v_vertex - project_convex_many(ip, v_vertex)
    w = scan(u_vertex, taus_vertex, v_vertex, paired=False)
    if w is None and n_samples > 0:
        rng = np.random.default_rng(seed)
        v_samp = sample_in(dp, n_samples, rng)
        u_samp = sample_in(ip, n_samples, rng)
        taus_samp = v_samp - project_convex_many(ip, v_samp)
        w = scan(u_samp, taus_samp, v_samp, paired=True)
    return PtiCheckResult(w is None, w, checked)


@dataclass(frozen=True)
class ConstructionRegions:
    """Per-vertex translation regions of the polygon superset construction.

    For each vertex (CCW order): ``p_min[i]`` is the region any valid
    translation set must cover, ``p_max[i]`` the region it must not exceed;
    ``outer`` is the polygon through the offset-line corner points and
    ``g_default`` the convex hull of all minimal regions.
    """

    offsets: tuple[float, ...]
    outer: ConvexPolygon
    p_min: tuple[ConvexPolygon, ...]
    p_max: tuple[ConvexPolygon, ...]
    g_default: ConvexPolygon


def _edge_normals(poly: ConvexPolygon) -> np.ndarray:
    """Unit outward normals of the CCW polygon's edges."""
    v = poly.as_array()
    n = len(v)
    e = v[(np.arange(n) + 1) % n] - v
    L = np.hypot(e[:, 0], e[:, 1])
    return np.stack([e[:, 1] / L, -e[:, 0] / L], axis=1)


def construction_regions(
    poly: ConvexPolygon, offsets: float | Sequence[float]
) -> ConstructionRegions:
    """Corner-cone construction data for a strictly convex polygon.

    ``offsets`` gives the outward perpendicular offset of each edge's
    supporting line (a scalar is broadcast). Each vertex's corner point is
    the intersection of its two adjacent offset lines; the corner vector
    must stay inside the vertex's admissible wedge (the intersection of the
    negated corner cone with its polar cone), which bounds how unequal
    adjacent offsets may be.
    """
    v = poly.as_array()
    n = len(v)
    if n < 3:
        raise GeometryError("degenerate polygon")
    if np.isscalar(offsets):
        deltas = np.full(n, float(offsets))
    else:
        deltas = np.asarray(list(offsets), dtype=float)
        if deltas.shape != (n,):
            raise GeometryError(f"need one offset per edge ({n}), got {deltas.shape}")
    if (deltas < -POINT_TOL).any():
        raise GeometryError("offsets must be non-negative")
    deltas = np.maximum(deltas, 0.0)
    normals = _edge_normals(poly)

    corners = np.empty((n, 2))
    pis = np.empty((n, 2))
    for i in range(n):
        jm = (i - 1) % n  # edge arriving at vertex i
        A = np.stack([normals[jm], normals[i]])
        try:
            s = np.linalg.solve(A, np.array([deltas[jm], deltas[i]]))
        except np.linalg.LinAlgError:
            raise GeometryError(f"parallel adjacent edges at vertex {i}")
        pis[i] = s
        corners[i] = v[i] + s

    scale = max(1.0, float(np.abs(deltas).max()))
    for i in range(n):
        if math.hypot(*pis[i]) <= POINT_TOL * scale:
            continue
        cc = corner_cones(poly, i)
        if not cc.reflected_wedge_contains(pis[i]):
            raise GeometryError(
                f"offset choice leaves the admissible corner wedge at vertex {i}"
            )

    outer = ConvexPolygon(corners)
    p_min = []
    p_max = []
    for i in range(n):
        jm = (i - 1) % n
        feet = [(0.0, 0.0), tuple(deltas[jm] * normals[jm]), tuple(deltas[i] * normals[i])]
        p_min.append(ConvexPolygon(feet))
        region = outer.translate((-v[i, 0], -v[i, 1]))
        nm, ni = normals[jm], normals[i]
        # clip to the normal cone cone(nm, ni): cross(nm, y) >= 0 and cross(y, ni) >= 0
        region = clip_halfplane(region, (nm[1], -nm[0]), 0.0)
        if region is not None:
            region = clip_halfplane(region, (-ni[1], ni[0]), 0.0)
        if region is None:
            region = ConvexPolygon([(0.0, 0.0)])
        p_max.append(region)

    g_pts = [(0.0, 0.0)] + [tuple(deltas[i] * normals[i]) for i in range(n)]
    g_default = ConvexPolygon(g_pts)
    return ConstructionRegions(
        tuple(float(x) for x in deltas), outer, tuple(p_min), tuple(p_max), g_default
    )


def _in_region_union(regions: ConstructionRegions, poly: ConvexPolygon,
                     pt: np.ndarray, tol: float) -> bool:
    """Membership of a translation vector in the union of the maximal regions."""
    if math.hypot(pt[0], pt[1]) <= tol:
        return True
    normals = _edge_normals(poly)
    n = len(normals)
    for i in range(n):
        jm = (i - 1) % n
        nm, ni = normals[jm], normals[i]
        if nm[0] * pt[1] - nm[1] * pt[0] < -tol:
            continue
        if pt[0] * ni[1] - pt[1] * ni[0] < -tol:
            continue
        if regions.p_max[i].contains(pt, tol):
            return True
    return False


def _check_envelope(regions: ConstructionRegions, poly: ConvexPolygon,
                    g: ConvexPolygon, samples_per_edge: int = 8) -> None:
    """Require g to lie within the union of maximal regions (boundary sampling)."""
    tol = POINT_TOL * max(1.0, max(regions.offsets, default=0.0))
    pts = [np.asarray(v, dtype=float) for v in g.vertices]
    verts = g.as_array()
    m = len(verts)
    if m >= 2:
        for i in range(m):
            a, b = verts[i], verts[(i + 1) % m]
            for t in np.linspace(0.0, 1.0, samples_per_edge, endpoint=False)[1:]:
                pts.append(a + t * (b - a))
    for pt in pts:
        if not _in_region_union(regions, poly, pt, tol):
            raise PtiError("convexification exceeded the maximal-region envelope")


def construct_pti_superset(
    i: ConvexPolygon,
    offsets: float | Sequence[float] | None = None,
    g: ConvexPolygon | None = None,
    n_samples: int = 2000,
    seed: int = 0,
) -> ConvexPolygon:
    """Superset D = I + G such that I is a PTI subset of D, by corner cones.

    With ``offsets`` unset, every edge line is offset by 10% of the polygon
    diameter and G defaults to the hull of the minimal translation regions.
    A caller-supplied convex ``g`` is used instead (its per-edge support
    values become the offsets) after validation against the minimal and
    maximal regions. The result is always re-verified by the randomized
    invariance check and construction failure raises rather than returning
    an unverified set.
    """
    ip = _as_polygon(i)
    if len(ip.vertices) < 3:
        raise GeometryError("degenerate polygon")
    if g is not None:
        normals = _edge_normals(ip)
        deltas = [g.support(nx, ny) for nx, ny in normals]
        if min(deltas) < -POINT_TOL:
            raise PtiError("supplied translation set must contain the origin")
        regions = construction_regions(ip, [max(0.0, d) for d in deltas])
        for pm in regions.p_min:
            for vv in pm.vertices:
                if not g.contains(vv, POINT_TOL * max(1.0, max(regions.offsets))):
                    raise PtiError("supplied translation set misses a minimal region")
    else:
        if offsets is None:
            offsets = 0.1 * diameter(ip)
        regions = construction_regions(ip, offsets)
        g = regions.g_default
    _check_envelope(regions, ip, g)
    d = minkowski_sum(ip, g)
    res = is_pti_subset(ip, d, n_samples=n_samples, seed=seed)
    if not res.ok:
        raise PtiVerificationError(res.witness)
    return d


def minimal_superset(
    sets: Sequence[ConvexShape],
    n_samples: int = 2000,
    seed: int = 0,
    max_rounds: int = 10,
) -> ConvexPolygon:
    """A common superset every input is a PTI subset of (heuristic, not minimal).

    Tries the convex hull of all inputs first (exact for nested intervals
    and for families closed under scaling toward a common apex), then
    inflates: hull of the per-member corner-cone supersets with growing
    offsets, re-verifying after each round.
    """
    polys = [_as_polygon(s) for s in sets]
    if not polys:
        raise GeometryError("at least one input set required")

    def verify(d: ConvexPolygon) -> bool:
        return all(
            is_pti_subset(p, d, n_samples=n_samples, seed=seed + 17 * j).ok
            for j, p in enumerate(polys)
        )

    all_vertices = [tuple(v) for p in polys for v in p.vertices]
    candidate = ConvexPolygon(all_vertices)
    if verify(candidate):
        return candidate
    base = max(diameter(candidate), POINT_TOL)
    for round_no in range(1, max_rounds + 1):
        delta = 0.05 * round_no * base
        pts: list[tuple[float, float]] = []
        for p in polys:
            if len(p.vertices) >= 3:
                d_p = construct_pti_superset(p, offsets=delta, n_samples=0, seed=seed)
                pts.extend(tuple(v) for v in d_p.vertices)
            else:
                pts.extend(tuple(v) for v in p.vertices)
        candidate = ConvexPolygon(pts)
        if verify(candidate):
            return candidate
    raise PtiError(f"no verified common superset after {max_rounds} inflation rounds")


# ---------------------------------------------------------------------------
# Agents


class UncertainAgent:
    """Persistent-predictor agent: advertise the previous implementable set.

    ``superset`` is the declared envelope D; with ``check_pti=True`` every
    realized set is verified against it before implementing (slow, meant
    for debugging broken resource models).
    """

    def __init__(
        self,
        initial_set: ConvexShape,
        superset: ConvexShape | None = None,
        check_pti: bool = False,
        pti_samples: int = 256,
        seed: int = 0,
    ):
        self.prev_set: ConvexShape = initial_set
        self.superset_d = superset
        self.check_pti = check_pti
        self.pti_samples = pti_samples
        self._seed = seed
        self.error = ErrorState()

    def advertised(self) -> ConvexShape:
        return self.prev_set

    def tracking_bound(self) -> float:
        if self.superset_d is None:
            raise GeometryError("no superset declared")
        return diameter(self.superset_d)

    def step(self, u_req: Setpoint, i_now: ConvexShape, diffuse: bool = True) -> Setpoint:
        if not self.prev_set.contains(u_req, POINT_TOL):
            raise AgentContractError(
                f"request {tuple(u_req)} outside the advertised profile"
            )
        if self.check_pti and self.superset_d is not None:
            res = is_pti_subset(
                i_now, self.superset_d, self.pti_samples, seed=self._seed + self.error.k
            )
            if not res.ok:
                raise PtiVerificationError(
                    res.witness, "implementable set violates the declared superset"
                )
        x = Setpoint(u_req[0] - self.error.e.p, u_req[1] - self.error.e.q)
        u_imp = project_convex(i_now, x if diffuse else Setpoint(float(u_req[0]), float(u_req[1])))
        self.error = self.error.update(u_req, u_imp)
        self.prev_set = i_now
        return u_imp


@dataclass(frozen=True)
class PvParams:
    """PV converter limits: cap on real power and half-angle of the PQ triangle.

    When the rated apparent power is supplied, p_max must not exceed
    s_rated * cos(phi).
    """

    p_max: float
    phi: float
    s_rated: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.p_max) and self.p_max >= 0.0):
            raise GeometryError("p_max must be finite and non-negative")
        if not (0.0 <= self.phi < math.pi / 2):
            raise GeometryError("phi must lie in [0, pi/2)")
        if self.s_rated is not None:
            if self.p_max > self.s_rated * math.cos(self.phi) + POINT_TOL:
                raise GeometryError("p_max exceeds s_rated * cos(phi)")


def pv_feasible_set(params: PvParams, p_avail: float) -> TriangleSet:
    """Feasible PQ triangle given the currently available real power."""
    if not (math.isfinite(p_avail) and p_avail >= 0.0):
        raise GeometryError("available power must be finite and non-negative")
    return TriangleSet(min(p_avail, params.p_max), params.phi)


def pv_error_bound(params: PvParams) -> float:
    """Accumulated-error bound for the PV agent: diameter of the largest triangle.

    Equals p_max / cos(phi) (a leg) for phi <= pi/6 and 2 p_max tan(phi)
    (the base) otherwise.
    """
    return max(params.p_max / math.cos(params.phi), 2.0 * params.p_max * math.tan(params.phi))


class PvAgent:
    """PV panel agent: triangular feasible sets driven by available power."""

    def __init__(self, params: PvParams, p_avail_init: float = 0.0, check_pti: bool = False):
        self.params = params
        self.inner = UncertainAgent(
            pv_feasible_set(params, p_avail_init),
            superset=TriangleSet(params.p_max, params.phi),
            check_pti=check_pti,
        )

    @property
    def error(self) -> ErrorState:
        return self.inner.error

    def advertised(self) -> ConvexShape:
        return self.inner.advertised()

    def tracking_bound(self) -> float:
        return pv_error_bound(self.params)

    def step(self, u_req: Setpoint, p_avail: float, diffuse: bool = True) -> Setpoint:
        return self.inner.step(u_req, pv_feasible_set(self.params, p_avail), diffuse)
