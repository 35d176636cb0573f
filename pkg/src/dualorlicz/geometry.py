"""Convex bodies that contain the origin in their interior.

Polytopes are stored in halfspace form, ``{x : <x, u_i> <= h_i}``, which is
exactly the Wulff shape of the discrete function ``u_i -> h_i``.  Star bodies
are given by a radial function and are used for balls, ellipsoids and other
smooth oracles.

All direction arguments accept either a single vector of shape ``(n,)`` or a
stack of shape ``(k, n)``; results follow the same leading shape.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import InvalidPolytope, NoBoundingFacet, Unbounded, UnsupportedDimension

SUPPORTED_DIMS = (2, 3)

# relative tolerance for incidence tests during vertex enumeration
_INCIDENCE_RTOL = 1e-9


def unit(v) -> np.ndarray:
    """Normalize vectors along the last axis."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("zero vector has no direction")
    return v / norm


def angle_direction(theta) -> np.ndarray:
    """Unit vectors in the plane at the given angles (radians)."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def normals_surround_origin(normals, tol: float = 1e-12) -> bool:
    """True when the directions are not contained in any closed hemisphere.

    Equivalent to the origin lying in the interior of the convex hull of the
    directions, which is what qhull checks here.
    """
    normals = np.asarray(normals, dtype=float)
    m, n = normals.shape
    if m < n + 1:
        return False
    try:
        hull = ConvexHull(normals)
    except QhullError:
        return False
    # equations are (a, b) with a.x + b <= 0 inside; origin interior iff b < 0
    return bool(np.all(hull.equations[:, -1] < -tol))


def direction_grid(dim: int, count: int | None = None) -> np.ndarray:
    """Near-uniform directions: equispaced angles in 2-D, a Fibonacci lattice in 3-D."""
    if dim == 2:
        count = count or 4096
        return angle_direction(2.0 * np.pi * np.arange(count) / count)
    if dim == 3:
        count = count or 16384
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        r = np.sqrt(1.0 - z * z)
        az = np.pi * (1.0 + np.sqrt(5.0)) * k
        return np.stack([r * np.cos(az), r * np.sin(az), z], axis=-1)
    raise UnsupportedDimension(f"dimension {dim} not supported")


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Polytope ``{x : <x, normals[i]> <= supports[i]}`` with the origin inside.

    Redundant halfspaces are allowed; their facets are simply empty.
    """

    normals: np.ndarray
    supports: np.ndarray

    def __post_init__(self):
        normals = np.array(self.normals, dtype=float, ndmin=2)
        supports = np.array(self.supports, dtype=float).reshape(-1)
        if normals.shape[1] not in SUPPORTED_DIMS:
            raise UnsupportedDimension(f"dimension {normals.shape[1]} not supported")
        if normals.shape[0] != supports.shape[0]:
            raise InvalidPolytope("normals and supports differ in length")
        if not np.all(np.isfinite(supports)) or np.any(supports <= 0):
            raise InvalidPolytope("support numbers must be finite and positive")
        normals = unit(normals)
        if not normals_surround_origin(normals):
            raise InvalidPolytope("normals are contained in a closed hemisphere")
        normals.setflags(write=False)
        supports.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "supports", supports)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def m(self) -> int:
        return self.normals.shape[0]

    def __len__(self):
        return self.m

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, m={self.m}, supports={self.supports.tolist()})"

    def with_supports(self, supports) -> HPolytope:
        return HPolytope(self.normals, supports)

    def scaled(self, factor: float) -> HPolytope:
        return HPolytope(self.normals, self.supports * factor)

    @cached_property
    def vertices(self) -> np.ndarray:
        """Vertices from all n-subsets of facets, filtered for feasibility."""
        n, m = self.dim, self.m
        combos = np.array(list(itertools.combinations(range(m), n)), dtype=int)
        A = self.normals[combos]
        b = self.supports[combos]
        ok = np.abs(np.linalg.det(A)) > 1e-12
        if not np.any(ok):
            raise Unbounded("no vertex found; halfspaces do not bound a polytope")
        x = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
        scale = float(self.supports.max())
        slack = x @ self.normals.T - self.supports
        feasible = np.all(slack <= _INCIDENCE_RTOL * scale, axis=1)
        x = x[feasible]
        if x.shape[0] < n + 1:
            raise Unbounded("too few feasible vertices")
        # merge coincident solutions (simple vertices repeat for degenerate ones)
        key = np.round(x / (scale * 1e-8)).astype(np.int64)
        _, first = np.unique(key, axis=0, return_index=True)
        verts = x[np.sort(first)]
        verts.setflags(write=False)
        return verts

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean (m, k) matrix: vertex j lies on the supporting hyperplane of facet i."""
        scale = float(self.supports.max())
        gap = np.abs(self.normals @ self.vertices.T - self.supports[:, None])
        return gap <= 1e2 * _INCIDENCE_RTOL * scale

    def facet_vertices(self, i: int) -> np.ndarray:
        """Vertices of facet ``i`` as an ordered loop (a segment in 2-D).

        Empty facets (the hyperplane only touches a lower-dimensional face)
        return whatever touching vertices exist, possibly none.
        """
        pts = self.vertices[self.incidence[i]]
        if len(pts) < 2:
            return pts
        u = self.normals[i]
        if self.dim == 2:
            t = np.array([-u[1], u[0]])
            return pts[np.argsort(pts @ t)]
        e1, e2 = _plane_basis(u)
        c = pts.mean(axis=0)
        ang = np.arctan2((pts - c) @ e2, (pts - c) @ e1)
        return pts[np.argsort(ang)]

    def facet_measure(self, i: int) -> float:
        """(n-1)-volume of facet i: a length in 2-D, an area in 3-D."""
        loop = self.facet_vertices(i)
        if self.dim == 2:
            if len(loop) < 2:
                return 0.0
            return float(np.linalg.norm(loop[-1] - loop[0]))
        if len(loop) < 3:
            return 0.0
        c = loop.mean(axis=0)
        a = loop - c
        b = np.roll(a, -1, axis=0)
        return float(0.5 * np.abs(np.cross(a, b) @ self.normals[i]).sum())


def _plane_basis(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the plane orthogonal to the unit vector u (3-D)."""
    helper = np.eye(3)[int(np.argmin(np.abs(u)))]
    e1 = unit(np.cross(u, helper))
    e2 = np.cross(u, e1)
    return e1, e2


@dataclass(frozen=True, eq=False)
class StarBody:
    """Star body given by a positive continuous radial function.

    ``radial`` maps an ``(k, n)`` array of unit vectors to ``(k,)`` radii.
    """

    radial: Callable[[np.ndarray], np.ndarray]
    dim: int

    def __post_init__(self):
        if self.dim not in SUPPORTED_DIMS:
            raise UnsupportedDimension(f"dimension {self.dim} not supported")

    def radial_function(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        rho = np.asarray(self.radial(np.atleast_2d(u)), dtype=float)
        if np.any(~np.isfinite(rho)) or np.any(rho <= 0):
            raise ValueError("radial function must be finite and positive")
        return rho.reshape(u.shape[:-1])

    def scaled(self, factor: float) -> StarBody:
        return StarBody(lambda u, f=self.radial: factor * f(u), self.dim)


# constructors --------------------------------------------------------------


def ball(radius: float = 1.0, dim: int = 2) -> StarBody:
    return StarBody(lambda u: np.full(len(u), float(radius)), dim)


def ellipsoid(axes) -> StarBody:
    axes = np.asarray(axes, dtype=float)
    return StarBody(lambda u: 1.0 / np.sqrt(((u / axes) ** 2).sum(axis=-1)), len(axes))


def box(half_widths) -> HPolytope:
    """Axis-aligned box, facets ordered e1, e2, (e3,) -e1, -e2, (-e3)."""
    half_widths = np.asarray(half_widths, dtype=float)
    n = len(half_widths)
    eye = np.eye(n)
    return HPolytope(np.vstack([eye, -eye]), np.concatenate([half_widths, half_widths]))


def square(half_width: float = 1.0) -> HPolytope:
    return box([half_width, half_width])


def cube(half_width: float = 1.0) -> HPolytope:
    return box([half_width] * 3)


def octahedron(support: float = 1.0) -> HPolytope:
    signs = np.array(list(itertools.product([1.0, -1.0], repeat=3)))
    return HPolytope(signs / np.sqrt(3.0), np.full(8, support))


def regular_polygon(m: int, support: float = 1.0, phase: float = 0.0) -> HPolytope:
    """Polygon circumscribed about the circle of radius ``support``."""
    return HPolytope(angle_direction(phase + 2.0 * np.pi * np.arange(m) / m), np.full(m, support))


def random_polygon(rng: np.random.Generator, m: int, spread: float = 0.5) -> HPolytope:
    """Random polygon with m jittered facet normals and log-uniform supports."""
    while True:
        base = 2.0 * np.pi * np.arange(m) / m
        theta = np.sort(base + rng.uniform(-0.35, 0.35, m) * 2.0 * np.pi / m)
        normals = angle_direction(theta)
        if normals_surround_origin(normals):
            break
    supports = np.exp(rng.uniform(-spread, spread, m))
    return HPolytope(normals, supports)


def random_polytope3(rng: np.random.Generator, m: int, spread: float = 0.3) -> HPolytope:
    while True:
        normals = unit(rng.normal(size=(m, 3)))
        if normals_surround_origin(normals):
            break
    return HPolytope(normals, np.exp(rng.uniform(-spread, spread, m)))


# evaluation ----------------------------------------------------------------


def _ratios(P: HPolytope, u: np.ndarray) -> np.ndarray:
    dots = u @ P.normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(dots > 1e-15, P.supports / dots, np.inf)
    return r


def wulff_radial(P: HPolytope, u) -> np.ndarray | float:
    """Radial function of the Wulff shape: ``min h_i / <u, u_i>`` over positive dots."""
    u = np.asarray(u, dtype=float)
    r = _ratios(P, np.atleast_2d(u)).min(axis=-1)
    if np.any(~np.isfinite(r)):
        raise NoBoundingFacet("direction has no facet with positive inner product")
    return r.reshape(u.shape[:-1]) if u.ndim > 1 else float(r[0])


def face_assign(P: HPolytope, u) -> np.ndarray | int:
    """Index of the facet hit by the ray through u; ties go to the lowest index."""
    u = np.asarray(u, dtype=float)
    r = _ratios(P, np.atleast_2d(u))
    rmin = r.min(axis=-1, keepdims=True)
    if np.any(~np.isfinite(rmin)):
        raise NoBoundingFacet("direction has no facet with positive inner product")
    idx = np.argmax(r <= rmin * (1.0 + 1e-12), axis=-1)
    return idx.reshape(u.shape[:-1]) if u.ndim > 1 else int(idx[0])


def support_eval(P: HPolytope, v) -> np.ndarray | float:
    """Support function ``max_{x in P} <x, v>`` by maximizing over the vertex set."""
    v = np.asarray(v, dtype=float)
    h = (np.atleast_2d(v) @ P.vertices.T).max(axis=-1)
    return h.reshape(v.shape[:-1]) if v.ndim > 1 else float(h[0])


def polar_radial(P: HPolytope, u) -> np.ndarray | float:
    """Radial function of the polar body, ``1 / h_P``."""
    return 1.0 / support_eval(P, u)


def hull_radial(normals, scales, u) -> np.ndarray | float:
    """Radial function of ``conv{f(u_i) u_i}`` via the polar of the Wulff shape of 1/f."""
    wulff = HPolytope(normals, 1.0 / np.asarray(scales, dtype=float))
    return 1.0 / support_eval(wulff, u)


def radial_function(K, u) -> np.ndarray | float:
    """Radial function of either a polytope or a star body."""
    if isinstance(K, HPolytope):
        return wulff_radial(K, u)
    return K.radial_function(u)


def hausdorff_distance(P: HPolytope, Q: HPolytope, count: int | None = None) -> float:
    """Sup-norm of ``h_P - h_Q`` over a direction grid (a lower bound of the true metric)."""
    if P.dim != Q.dim:
        raise ValueError("polytopes live in different dimensions")
    grid = direction_grid(P.dim, count)
    return float(np.max(np.abs(support_eval(P, grid) - support_eval(Q, grid))))
