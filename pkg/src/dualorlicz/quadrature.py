"""Quadrature on S^1 and S^2.

``make_rule`` gives a uniform trapezoid rule on the circle and a
Gauss-Legendre (in cos theta) times uniform-azimuth product rule on the
sphere.  For polygons, ``arc_partition`` splits the circle at the vertex
directions so that each arc maps to a single facet; Gauss-Legendre on each arc
then integrates the piecewise smooth curvature integrands to high order.
Arcs are further split into panels graded towards the directions parallel to
their facet, where power-law integrands lose smoothness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVertex, UnsupportedDimension
from .geometry import HPolytope, angle_direction, face_assign

DEFAULT_RESOLUTION_2D = 2048
DEFAULT_RESOLUTION_3D = (64, 128)
DEFAULT_GAUSS_ORDER = 16


@dataclass(frozen=True, eq=False)
class SphericalRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return len(self.weights)

    def integrate(self, f) -> float:
        """Apply the rule to a vectorized function of directions."""
        return float(self.weights @ np.asarray(f(self.nodes), dtype=float))


@dataclass(frozen=True, eq=False)
class ArcPartition(SphericalRule):
    """Arcs ``[breakpoints[j], breakpoints[j+1])`` of the circle, each owned by one facet.

    ``node_owner`` labels every Gauss node with the facet owning its arc.  Each
    arc is split into panels graded towards 90 degrees from its facet normal.
    """

    breakpoints: np.ndarray = None
    owners: np.ndarray = None
    node_owner: np.ndarray = None
    normals: np.ndarray = None
    supports: np.ndarray = None
    gauss_order: int = DEFAULT_GAUSS_ORDER

    def matches(self, P: HPolytope) -> bool:
        return (P.normals.shape == self.normals.shape
                and np.array_equal(P.normals, self.normals)
                and np.array_equal(P.supports, self.supports))

    def arc_lengths(self) -> np.ndarray:
        b = self.breakpoints
        return np.diff(np.append(b, b[0] + 2 * np.pi))


def make_rule(n: int, resolution=None) -> SphericalRule:
    """Spherical rule with positive weights summing to |S^(n-1)|.

    ``resolution`` is the number of angles in 2-D, and either ``(n_theta, n_phi)``
    or a single int ``k`` meaning ``(k, 2k)`` in 3-D.
    """
    if n == 2:
        N = int(resolution or DEFAULT_RESOLUTION_2D)
        theta = 2.0 * np.pi * np.arange(N) / N
        return SphericalRule(angle_direction(theta), np.full(N, 2.0 * np.pi / N))
    if n == 3:
        if resolution is None:
            resolution = DEFAULT_RESOLUTION_3D
        if np.ndim(resolution) == 0:
            resolution = (int(resolution), 2 * int(resolution))
        nt, nphi = (int(r) for r in resolution)
        c, wc = np.polynomial.legendre.leggauss(nt)
        phi = 2.0 * np.pi * (np.arange(nphi) + 0.5) / nphi
        s = np.sqrt(1.0 - c**2)
        nodes = np.stack(
            [np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)), np.outer(c, np.ones(nphi))],
            axis=-1,
        ).reshape(-1, 3)
        weights = np.repeat(wc, nphi) * (2.0 * np.pi / nphi)
        return SphericalRule(nodes, weights)
    raise UnsupportedDimension(f"no spherical rule for dimension {n}")


def arc_partition(P: HPolytope, gauss_order: int = DEFAULT_GAUSS_ORDER) -> ArcPartition:
    """Exact partition of S^1 into the radial preimages of the facets of a polygon."""
    if P.dim != 2:
        raise UnsupportedDimension("arc partitions exist only in 2-D")
    _check_parallel_facets(P)
    verts = P.vertices
    b = np.sort(np.mod(np.arctan2(verts[:, 1], verts[:, 0]), 2.0 * np.pi))
    # drop breakpoints that coincide (vertices on the same ray cannot happen, but guard rounding)
    keep = np.append(True, np.diff(b) > 1e-14)
    b = b[keep]
    ends = np.append(b[1:], b[0] + 2.0 * np.pi)
    mids = 0.5 * (b + ends)
    owners = face_assign(P, angle_direction(mids))

    x, w = np.polynomial.legendre.leggauss(gauss_order)
    normal_angle = np.arctan2(P.normals[:, 1], P.normals[:, 0])
    theta, weights, node_owner = [], [], []
    for a, e, i in zip(b, ends, owners):
        cuts = _graded_cuts(a, e, normal_angle[i])
        half = 0.5 * np.diff(cuts)
        mid = 0.5 * (cuts[:-1] + cuts[1:])
        theta.append((mid[:, None] + half[:, None] * x[None, :]).reshape(-1))
        weights.append((half[:, None] * w[None, :]).reshape(-1))
        node_owner.append(np.full(len(half) * gauss_order, i))
    return ArcPartition(
        nodes=angle_direction(np.concatenate(theta)),
        weights=np.concatenate(weights),
        breakpoints=b,
        owners=owners,
        node_owner=np.concatenate(node_owner),
        normals=P.normals,
        supports=P.supports,
        gauss_order=gauss_order,
    )


# panel breaks at atan(2^k) from the facet normal: the angular image of points
# at distance h 2^k from the foot of the perpendicular along the facet line
_GRADING = np.arctan(2.0 ** np.arange(0, 53))


def _graded_cuts(a: float, e: float, normal_angle: float) -> np.ndarray:
    """Split arc [a, e] so integrands singular at 90 degrees from the normal stay resolved."""
    c = normal_angle + 2 * np.pi * np.round((0.5 * (a + e) - normal_angle) / (2 * np.pi))
    cand = np.concatenate([[a, e, c], c - _GRADING, c + _GRADING])
    cuts = np.unique(cand[(cand >= a) & (cand <= e)])
    cuts = cuts[np.append(True, np.diff(cuts) > 1e-13)]
    cuts[-1] = e
    return cuts


def _check_parallel_facets(P: HPolytope):
    N, h = P.normals, P.supports
    tol = 1e-12 * float(h.max())
    for i in range(P.m):
        for j in range(i + 1, P.m):
            if N[i] @ N[j] > 1.0 - 1e-14 and abs(h[i] - h[j]) <= tol:
                raise DegenerateVertex(f"facets {i} and {j} coincide")
