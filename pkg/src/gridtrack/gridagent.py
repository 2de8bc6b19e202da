"""Central controller: projected gradient steering of a quadratic objective.

The controller iterates x_{k+1} = proj_U(y_k - alpha * (G y_k + g)) where y_k
is the vector of implemented setpoints, U the product of the resources'
advertised profiles (identity when unconstrained), and J the quadratic
objective with curvature matrix G and linear term g. When every follower
keeps its accumulated error bounded and the projection stays inactive, the
running mean of y converges to the steering fixed point -G^{-1} g at rate
O(1/k), with the explicit envelope computed by :func:`theorem_bound`.

Note on conventions: the steering law uses the gradient map x -> G x + g, so
its fixed point is -G^{-1} g; the reported objective value is
x^T G x + g^T x + a. The two are consistent up to a factor of 2 on the
curvature term, which only rescales the displayed objective, never the
steering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GeometryError, SpectralConditionError
from .geometry import ConvexPolygon, Setpoint, TriangleSet, project_convex

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuadraticObjective:
    """Quadratic objective with SPD curvature matrix, linear term, and offset."""

    gamma_mat: np.ndarray
    gamma_vec: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        G = np.asarray(self.gamma_mat, dtype=float)
        g = np.asarray(self.gamma_vec, dtype=float).reshape(-1)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise GeometryError("curvature matrix must be square")
        if g.shape[0] != G.shape[0]:
            raise GeometryError("linear term dimension mismatch")
        scale = max(1.0, float(np.abs(G).max()))
        if float(np.abs(G - G.T).max()) > SYMMETRY_TOL * scale:
            raise GeometryError("curvature matrix must be symmetric")
        eigs = np.linalg.eigvalsh(G)
        if eigs.min() <= 0.0:
            raise GeometryError("curvature matrix must be positive definite")
        object.__setattr__(self, "gamma_mat", G)
        object.__setattr__(self, "gamma_vec", g)
        object.__setattr__(self, "_eigs", eigs)

    @property
    def dim(self) -> int:
        return self.gamma_mat.shape[0]

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.gamma_mat @ x + self.gamma_vec @ x + self.offset)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gamma_mat @ np.asarray(x, dtype=float) + self.gamma_vec

    def spectral_radius(self) -> float:
        return float(np.abs(self._eigs).max())

    def eigenvalues(self) -> np.ndarray:
        return np.array(self._eigs)


@dataclass
class GridAgentConfig:
    """Step size plus the admissible set U as one 2-D profile per resource.

    ``admissible=None`` means the whole space; an entry of None leaves just
    that resource unconstrained.
    """

    alpha: float
    admissible: Sequence[ConvexPolygon | TriangleSet | None] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise GeometryError("step size must be finite and positive")


def gradient_step(
    j: QuadraticObjective, cfg: GridAgentConfig, y_hat: np.ndarray
) -> tuple[np.ndarray, bool]:
    """One steering step from the estimated implemented vector.

    Returns (next request vector, projection-active flag). The projection is
    applied per resource on consecutive (P, Q) pairs; the flag records
    whether any resource's raw target fell outside its profile.
    """
    y = np.asarray(y_hat, dtype=float).reshape(-1)
    if y.shape[0] != j.dim:
        raise GeometryError(f"state dimension {y.shape[0]} != objective dimension {j.dim}")
    x = y - cfg.alpha * (j.gamma_mat @ y + j.gamma_vec)
    if cfg.admissible is None:
        return x, False
    if 2 * len(cfg.admissible) != j.dim:
        raise GeometryError("admissible set must supply one 2-D profile per resource")
    active = False
    out = x.copy()
    for i, shape in enumerate(cfg.admissible):
        if shape is None:
            continue
        pt = Setpoint(x[2 * i], x[2 * i + 1])
        if shape.contains(pt, tol=0.0):
            continue
        proj = project_convex(shape, pt)
        out[2 * i] = proj.p
        out[2 * i + 1] = proj.q
        active = True
    return out, active


def optimum(j: QuadraticObjective) -> np.ndarray:
    """Steering fixed point -G^{-1} g, with a residual check on the solve."""
    x = np.linalg.solve(j.gamma_mat, -j.gamma_vec)
    residual = float(np.linalg.norm(j.gamma_mat @ x + j.gamma_vec))
    lim = 1e-9 * max(1.0, float(np.linalg.norm(j.gamma_vec)))
    if residual > lim:
        raise GeometryError(f"optimum solve residual {residual:g} exceeds {lim:g}")
    return x


def contraction_radius(j: QuadraticObjective, alpha: float) -> float:
    """Spectral radius of I - alpha*G."""
    return float(np.abs(1.0 - alpha * j.eigenvalues()).max())


def theorem_bound(
    j: QuadraticObjective,
    cfg: GridAgentConfig,
    x1: np.ndarray,
    c_norm: float,
    k: int,
) -> float:
    """Envelope on ||running mean of y up to k  -  optimum||.

    Evaluates (1 - r^k) / (k (1 - r)) * (||psi|| + ||G^{-1}|| ||g|| r^2 + c)
    with r the contraction radius and psi = x1 + 2*alpha*g - alpha^2*G*g.
    Requires r < 1, i.e. alpha <= 1/rho(G).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    r = contraction_radius(j, cfg.alpha)
    if r >= 1.0:
        raise SpectralConditionError(
            f"step size violates spectral condition: rho(I - alpha*G) = {r:g} >= 1"
        )
    a = cfg.alpha
    g = j.gamma_vec
    psi = np.asarray(x1, dtype=float) + 2.0 * a * g - (a * a) * (j.gamma_mat @ g)
    inv_norm = 1.0 / float(j.eigenvalues().min())
    lead = (1.0 - r**k) / (k * (1.0 - r))
    return lead * (float(np.linalg.norm(psi)) + inv_norm * float(np.linalg.norm(g)) * r * r + c_norm)


def theorem_bound_curve(
    j: QuadraticObjective,
    cfg: GridAgentConfig,
    x1: np.ndarray,
    c_norm: float,
    k_max: int,
) -> np.ndarray:
    """Vectorized :func:`theorem_bound` for k = 1..k_max."""
    r = contraction_radius(j, cfg.alpha)
    if r >= 1.0:
        raise SpectralConditionError(
            f"step size violates spectral condition: rho(I - alpha*G) = {r:g} >= 1"
        )
    a = cfg.alpha
    g = j.gamma_vec
    psi = np.asarray(x1, dtype=float) + 2.0 * a * g - (a * a) * (j.gamma_mat @ g)
    inv_norm = 1.0 / float(j.eigenvalues().min())
    ks = np.arange(1, k_max + 1, dtype=float)
    lead = (1.0 - r**ks) / (ks * (1.0 - r))
    return lead * (float(np.linalg.norm(psi)) + inv_norm * float(np.linalg.norm(g)) * r * r + c_norm)


def closed_form_y(
    j: QuadraticObjective,
    cfg: GridAgentConfig,
    x1: np.ndarray,
    eps: Sequence[np.ndarray],
    k: int,
) -> np.ndarray:
    """Implemented vector y_k evaluated directly from its explicit form.

    y_k = M^{k-1} psi + sum_{i=0}^{k} M^{k-i} eps_i - G^{-1}(I - M^{k+1}) g
    with M = I - alpha*G. Serves as the independent oracle against the
    recursion y_{k+1} = M y_k - alpha*g + eps_{k+1} (with y_1 = x_1 + eps_1).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(eps) < k + 1:
        raise ValueError("need instantaneous errors eps_0..eps_k")
    e0 = np.asarray(eps[0], dtype=float)
    if float(np.abs(e0).max(initial=0.0)) != 0.0:
        raise ValueError("eps_0 must be the zero vector")
    d = j.dim
    a = cfg.alpha
    M = np.eye(d) - a * j.gamma_mat
    g = j.gamma_vec
    psi = np.asarray(x1, dtype=float) + 2.0 * a * g - (a * a) * (j.gamma_mat @ g)
    powers = [np.eye(d)]
    for _ in range(k + 1):
        powers.append(powers[-1] @ M)
    acc = powers[k - 1] @ psi
    for i in range(k + 1):
        acc = acc + powers[k - i] @ np.asarray(eps[i], dtype=float)
    acc = acc - np.linalg.solve(j.gamma_mat, (np.eye(d) - powers[k + 1]) @ g)
    return acc


def recursion_y(
    j: QuadraticObjective,
    cfg: GridAgentConfig,
    x1: np.ndarray,
    eps: Sequence[np.ndarray],
    k: int,
) -> np.ndarray:
    """y_k by stepping the recursion; the route checked against closed_form_y."""
    if k < 1:
        raise ValueError("k must be >= 1")
    a = cfg.alpha
    M = np.eye(j.dim) - a * j.gamma_mat
    y = np.asarray(x1, dtype=float) + np.asarray(eps[1], dtype=float)
    for i in range(2, k + 1):
        y = M @ y - a * j.gamma_vec + np.asarray(eps[i], dtype=float)
    return y
