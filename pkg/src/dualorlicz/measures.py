"""The dual Orlicz quermassintegral and the dual Orlicz curvature measure.

For a body K with radial function rho and a density phi,

* ``V_phi(K) = int_{S^(n-1)} Phi(rho(u), u) du`` (the phi-weighted volume of
  the complement of K), and
* the curvature measure of a Borel set E is the integral of
  ``phi(rho(u) u) rho(u)^n`` over the directions whose boundary point has its
  outer normal in E.

For a polytope the curvature measure is carried by the facet normals, so it is
returned as one mass per facet.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .density import Density
from .geometry import HPolytope, StarBody, face_assign, radial_function, unit
from .quadrature import DEFAULT_GAUSS_ORDER, ArcPartition, SphericalRule, arc_partition, make_rule


class DegenerateFacetWarning(UserWarning):
    """A facet with zero length or area contributed nothing to a boundary integral."""


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """``sum_i weights[i] * delta_{directions[i]}``."""

    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dirs = unit(np.array(self.directions, dtype=float, ndmin=2))
        w = np.array(self.weights, dtype=float).reshape(-1)
        if len(w) != len(dirs):
            raise ValueError("directions and weights differ in length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return len(self.weights)

    def scaled(self, c: float) -> DiscreteMeasure:
        return DiscreteMeasure(self.directions, c * self.weights)


@dataclass(frozen=True)
class CurvatureResult:
    per_face: np.ndarray
    total: float


def default_rule(K, resolution=None, gauss_order: int = DEFAULT_GAUSS_ORDER) -> SphericalRule:
    """Exact arc partition for polygons, the product rule otherwise."""
    if isinstance(K, HPolytope):
        if K.dim == 2 and resolution is None:
            return arc_partition(K, gauss_order)
        return make_rule(K.dim, resolution)
    return make_rule(K.dim, resolution)


def _rule_for(K, rule):
    if rule is None:
        return default_rule(K)
    if isinstance(rule, ArcPartition) and isinstance(K, HPolytope) and not rule.matches(K):
        # arc partitions are scale invariant but tied to one normal set
        if rule.normals.shape == K.normals.shape and np.array_equal(rule.normals, K.normals):
            return arc_partition(K, rule.gauss_order)
        raise ValueError("arc partition was built for a different polytope")
    return rule


def quermass(K, d: Density, rule: SphericalRule | None = None) -> float:
    """``V_phi(K) = sum_j w_j Phi(rho_K(u_j), u_j)``."""
    rule = _rule_for(K, rule)
    rho = radial_function(K, rule.nodes)
    return float(rule.weights @ d.tail(rho, rule.nodes))


def _owners(P: HPolytope, rule) -> np.ndarray:
    if isinstance(rule, ArcPartition):
        return rule.node_owner
    return face_assign(P, rule.nodes)


def curvature_measure(P: HPolytope, d: Density, rule: SphericalRule | None = None) -> CurvatureResult:
    """Per-facet masses ``int_{alpha*({u_i})} phi(rho u) rho^n du``."""
    rule = _rule_for(P, rule)
    rho = radial_function(P, rule.nodes)
    vals = rule.weights * d.curvature_density(rho, rule.nodes)
    per_face = np.bincount(_owners(P, rule), weights=vals, minlength=P.m)
    return CurvatureResult(per_face=per_face, total=float(per_face.sum()))


def star_normal(K: StarBody, u, step: float = 1e-5) -> np.ndarray:
    """Outer unit normal of a smooth star body at ``rho(u) u``.

    The normal is parallel to ``rho(u) u - grad_S rho(u)``; the spherical
    gradient comes from central differences along an orthonormal tangent frame.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    rho = K.radial_function(u)
    grad = np.zeros_like(u)
    for t in _tangent_frame(u):
        plus = K.radial_function(unit(u + step * t))
        minus = K.radial_function(unit(u - step * t))
        grad += ((plus - minus) / (2 * step))[:, None] * t
    return unit(rho[:, None] * u - grad)


def _tangent_frame(u: np.ndarray) -> list[np.ndarray]:
    if u.shape[1] == 2:
        return [np.stack([-u[:, 1], u[:, 0]], axis=1)]
    helper = np.eye(3)[np.argmin(np.abs(u), axis=1)]
    e1 = unit(np.cross(u, helper))
    return [e1, np.cross(u, e1)]


def integrate_spherical_form(K, d: Density, g, rule: SphericalRule | None = None) -> float:
    """``int g(alpha_K(u)) phi(rho u) rho^n du``, i.e. ``int g dC``.

    For polytopes g is only evaluated at the facet normals.
    """
    if isinstance(K, HPolytope):
        cm = curvature_measure(K, d, rule)
        return float(np.asarray(g(K.normals), dtype=float) @ cm.per_face)
    rule = rule or make_rule(K.dim)
    rho = K.radial_function(rule.nodes)
    normals = star_normal(K, rule.nodes)
    return float(rule.weights @ (np.asarray(g(normals), dtype=float) * d.curvature_density(rho, rule.nodes)))


def _segment_nodes(a: np.ndarray, b: np.ndarray, foot: np.ndarray, order: int):
    """Gauss nodes on segment [a, b], graded away from the foot point.

    Panels break at the foot and at distances ``dist * 2^k`` from it, where
    ``dist`` is the distance of the line from the origin; radial densities vary
    on that scale along the segment.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    L = np.linalg.norm(b - a)
    s_foot = (foot - a) @ (b - a) / L**2
    dist = np.linalg.norm(foot)
    offsets = dist * 2.0 ** np.arange(0, 64) / L
    offsets = offsets[offsets < 1.0]
    cuts = np.concatenate([[0.0, 1.0, s_foot], s_foot - offsets, s_foot + offsets])
    cuts = np.unique(cuts[(cuts >= 0.0) & (cuts <= 1.0)])
    cuts = cuts[np.append(True, np.diff(cuts) > 1e-12)]
    if cuts[-1] < 1.0:
        cuts[-1] = 1.0
    pts, wts = [], []
    for s0, s1 in zip(cuts[:-1], cuts[1:]):
        s = s0 + 0.5 * (s1 - s0) * (x + 1)
        pts.append(a + s[:, None] * (b - a))
        wts.append(0.5 * (s1 - s0) * L * w)
    return np.vstack(pts), np.concatenate(wts)


def _triangle_rule(order: int):
    """Collapsed (conical product) Gauss rule on the reference triangle, degree 2*order-1."""
    xa, wa = roots_jacobi(order, 1.0, 0.0)
    xb, wb = np.polynomial.legendre.leggauss(order)
    a = 0.5 * (1 + xa)
    b = 0.5 * (1 + xb)
    A, B = np.meshgrid(a, b, indexing="ij")
    W = np.outer(wa, wb) / 8.0  # 1/4 from the Jacobi map, 1/2 from the Legendre map
    return np.stack([A.ravel(), ((1 - A) * B).ravel()], axis=1), W.ravel()


def facet_integral(P: HPolytope, d: Density, i: int, order: int = 32) -> float:
    """``int_{F_i} phi(x) dH^(n-1)(x)``; zero for empty facets."""
    loop = P.facet_vertices(i)
    foot = P.supports[i] * P.normals[i]
    if P.dim == 2:
        if len(loop) < 2 or np.linalg.norm(loop[-1] - loop[0]) <= 1e-14 * P.supports.max():
            return 0.0
        pts, wts = _segment_nodes(loop[0], loop[-1], foot, order)
    else:
        if P.facet_measure(i) <= 1e-14 * P.supports.max() ** 2:
            return 0.0
        ref, rw = _triangle_rule(order)
        c = loop.mean(axis=0)
        pts, wts = [], []
        for p1, p2 in zip(loop, np.roll(loop, -1, axis=0)):
            e1, e2 = p1 - c, p2 - c
            area2 = np.linalg.norm(np.cross(e1, e2))
            pts.append(c + ref[:, :1] * e1 + ref[:, 1:] * e2)
            wts.append(area2 * rw)
        pts, wts = np.vstack(pts), np.concatenate(wts)
    r = np.linalg.norm(pts, axis=1)
    return float(wts @ d.phi(r, pts / r[:, None]))


def integrate_boundary_form(P: HPolytope, d: Density, g, facet_gauss_order: int = 32) -> float:
    """``int_{bd P} <x, nu(x)> g(nu(x)) phi(x) dH^(n-1)``, facet by facet.

    On facet i the support ``<x, nu> = h_i`` and ``g(nu) = g(u_i)`` are constant.
    Segments (2-D) are split into panels graded away from the foot of the
    perpendicular from the origin;
    facets in 3-D are fanned from their centroid into triangles.
    """
    gv = np.asarray(g(P.normals), dtype=float)
    total = 0.0
    empty = []
    for i in range(P.m):
        if gv[i] == 0.0:
            continue
        value = facet_integral(P, d, i, facet_gauss_order)
        if value == 0.0:
            empty.append(i)
        total += P.supports[i] * gv[i] * value
    if empty:
        warnings.warn(f"skipped facets with zero measure: {empty}", DegenerateFacetWarning, stacklevel=2)
    return float(total)


def surface_area_measure(P: HPolytope) -> DiscreteMeasure:
    """Facet lengths (2-D) or areas (3-D) placed at the facet normals."""
    return DiscreteMeasure(P.normals, [P.facet_measure(i) for i in range(P.m)])
