"""Weight functions phi on R^n \\ {0} and their radial tail integrals.

The tail integral is ``Phi(t, u) = int_t^inf phi(r u) r^(n-1) dr``; the
quermassintegral of a body K is the spherical integral of ``Phi(rho_K(u), u)``.

Three kinds are provided:

* :class:`PowerLawDensity` -- ``phi(x) = |x|^(q-n) phi2(x/|x|)`` with ``q < 0``,
  with the closed form ``Phi(t, u) = phi2(u) (-t^q / q)``;
* :class:`RadialDensity` -- ``phi(x) = psi(|x|)``;
* :class:`GeneralDensity` -- any positive continuous ``phi(t, u)``.

The last two integrate numerically and need :class:`TailBounds` to truncate the
radial integral with a certified remainder.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import TailNotIntegrable, ToleranceNotMet, UnsupportedDimension
from .geometry import SUPPORTED_DIMS, angle_direction, direction_grid, unit

DEFAULT_REL_TOL = 1e-10

_GL_LO = np.polynomial.legendre.leggauss(16)
_GL_HI = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class TailBounds:
    """Constants of the sufficient condition for C1/C2.

    ``phi(x) |x|^(n - alpha1 - 1) <= c1`` for ``|x| > r1`` and
    ``phi(x) |x|^(n - alpha2 - 1) >= c2`` for ``|x| < r1``.  The lower pair may
    be omitted when only tail truncation is needed.
    """

    r1: float
    c1: float
    alpha1: float
    c2: float | None = None
    alpha2: float | None = None

    def __post_init__(self):
        if not (self.r1 > 0 and self.c1 > 0):
            raise ValueError("r1 and c1 must be positive")
        if not self.alpha1 < -1:
            raise ValueError("alpha1 must be below -1")
        if (self.c2 is None) != (self.alpha2 is None):
            raise ValueError("c2 and alpha2 go together")
        if self.c2 is not None and not (self.c2 > 0 and self.alpha2 < -1):
            raise ValueError("c2 must be positive and alpha2 below -1")

    @property
    def has_lower(self) -> bool:
        return self.c2 is not None

    def remainder(self, T):
        """Upper bound on ``int_T^inf phi(r u) r^(n-1) dr`` valid for ``T >= r1``."""
        a = self.alpha1 + 1.0
        return self.c1 * np.power(T, a) / (-a)


@dataclass(frozen=True)
class DensityClaims:
    c2_claimed: bool = False
    strictly_decreasing_phixn: bool = False


def _as_direction_function(phi2) -> Callable[[np.ndarray], np.ndarray]:
    if callable(phi2):
        return phi2
    value = float(phi2)
    if value <= 0:
        raise ValueError("phi2 must be positive")
    return lambda u: np.full(np.shape(u)[0], value)


@dataclass(frozen=True, eq=False)
class Density:
    """Base class; subclasses implement :meth:`phi` and possibly :meth:`tail`."""

    dim: int

    def __post_init__(self):
        if self.dim not in SUPPORTED_DIMS:
            raise UnsupportedDimension(f"dimension {self.dim} not supported")
        if self.claims.strictly_decreasing_phixn:
            _spot_check_decreasing(self)

    # subclasses define these as dataclass fields
    claims: DensityClaims = field(default_factory=DensityClaims, kw_only=True)

    @property
    def tail_bounds(self) -> TailBounds | None:
        return None

    def phi(self, t, u) -> np.ndarray:
        """Evaluate ``phi(t u)`` for radii ``t`` of shape (k,) and directions (k, n)."""
        raise NotImplementedError

    def curvature_density(self, rho, u) -> np.ndarray:
        """``phi(rho u) rho^n``, the integrand of the curvature measure."""
        rho = np.asarray(rho, dtype=float)
        return self.phi(rho, u) * rho**self.dim

    def tail(self, t, u) -> np.ndarray:
        return numeric_tail(self, t, u)

    @property
    def homogeneity(self) -> float | None:
        """Degree q when ``phi(x)|x|^n`` is q-homogeneous, else None."""
        return None


@dataclass(frozen=True, eq=False)
class PowerLawDensity(Density):
    q: float = -1.0
    phi2: Callable[[np.ndarray], np.ndarray] | float = 1.0
    claims: DensityClaims = field(
        default_factory=lambda: DensityClaims(c2_claimed=True, strictly_decreasing_phixn=True),
        kw_only=True,
    )

    def __post_init__(self):
        if not self.q < 0:
            raise ValueError("power-law densities need q < 0")
        object.__setattr__(self, "phi2", _as_direction_function(self.phi2))
        super().__post_init__()

    @property
    def homogeneity(self) -> float:
        return self.q

    @property
    def tail_bounds(self) -> TailBounds:
        # phi |x|^(n - alpha - 1) = phi2 |x|^(q - alpha - 1) is constant for alpha = q - 1
        vals = self.phi2(direction_grid(self.dim, 4096 if self.dim == 2 else 8192))
        a = self.q - 1.0
        return TailBounds(r1=1.0, c1=float(vals.max()) * (1 + 1e-9), alpha1=a,
                          c2=float(vals.min()) * (1 - 1e-9), alpha2=a)

    def phi(self, t, u):
        t = np.asarray(t, dtype=float)
        return t ** (self.q - self.dim) * self.phi2(np.atleast_2d(u))

    def curvature_density(self, rho, u):
        return np.asarray(rho, dtype=float) ** self.q * self.phi2(np.atleast_2d(u))

    def tail(self, t, u):
        t = np.asarray(t, dtype=float)
        return self.phi2(np.atleast_2d(u)) * (-(t**self.q) / self.q)


@dataclass(frozen=True, eq=False)
class RadialDensity(Density):
    """``phi(x) = psi(|x|)`` with a vectorized ``psi``."""

    psi: Callable[[np.ndarray], np.ndarray] = None
    bounds: TailBounds | None = None

    @property
    def tail_bounds(self):
        return self.bounds

    def phi(self, t, u):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.psi(t), np.shape(t)).astype(float)


@dataclass(frozen=True, eq=False)
class GeneralDensity(Density):
    """Arbitrary positive ``phi(t, u)``; ``t`` has shape (k,), ``u`` shape (k, n)."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = None
    bounds: TailBounds | None = None

    @property
    def tail_bounds(self):
        return self.bounds

    def phi(self, t, u):
        return np.asarray(self.func(np.asarray(t, dtype=float), np.atleast_2d(u)), dtype=float)


def radial_exp_density(dim: int, a: float = 1.0, b: float = 1.0, p: float = 0.0,
                       bounds: TailBounds | None = None, **kw) -> RadialDensity:
    """``psi(r) = a r^p exp(-b r)``.

    Without explicit bounds, tail constants are derived on ``r1 = 1`` with
    ``alpha1 = -12`` (the maximum of ``a r^(p+n+11) e^(-b r)`` is analytic).  The
    lower pair ``alpha2 = p + n - 1``, ``c2 = a e^(-b)`` exists only for
    ``p < -n``; otherwise C2 genuinely fails and none is recorded.
    """
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if bounds is None:
        alpha1 = -12.0
        k = p + dim - alpha1 - 1.0
        rstar = max(k / b, 1.0)
        c1 = float(a * rstar**k * np.exp(-b * rstar)) * (1 + 1e-9)
        if p + dim - 1.0 < -1.0:
            bounds = TailBounds(r1=1.0, c1=c1, alpha1=alpha1,
                                c2=float(a * np.exp(-b)) * (1 - 1e-9), alpha2=p + dim - 1.0)
        else:
            bounds = TailBounds(r1=1.0, c1=c1, alpha1=alpha1)
    return RadialDensity(dim, psi=lambda r: a * r**p * np.exp(-b * r), bounds=bounds, **kw)


def numeric_tail(d: Density, t, u, bounds: TailBounds | None = None,
                 rel_tol: float = DEFAULT_REL_TOL, max_levels: int = 5,
                 max_pieces: int = 400) -> np.ndarray:
    """Tail integral by composite Gauss-Legendre on dyadic pieces ``[t 2^j, t 2^(j+1)]``.

    Pieces are added until ``T = t 2^J >= r1`` and the analytic remainder bound
    ``c1 T^(alpha1+1) / (-alpha1-1)`` drops below ``rel_tol`` times the partial
    sum.  Each piece is checked against a half-order rule; if that estimate
    exceeds the tolerance, every piece is split uniformly and the sum redone.
    """
    bounds = bounds or d.tail_bounds
    if bounds is None:
        raise TailNotIntegrable(f"{type(d).__name__} has no tail bounds")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    k = max(len(t), len(u))
    t, u = np.broadcast_to(t, (k,)), np.broadcast_to(u, (k, d.dim))
    if np.any(t <= 0):
        raise ValueError("tail integral needs t > 0")
    n = d.dim

    for level in range(max_levels + 1):
        splits = 2**level
        total = np.zeros(len(t))
        err = np.zeros(len(t))
        active = np.ones(len(t), dtype=bool)
        for j in range(max_pieces):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            lo = t[idx] * 2.0**j
            width = lo / splits
            hi_sum = np.zeros(idx.size)
            lo_sum = np.zeros(idx.size)
            for s in range(splits):
                a = lo + s * width
                for (x, w), acc in ((_GL_HI, hi_sum), (_GL_LO, lo_sum)):
                    r = a[:, None] + 0.5 * width[:, None] * (x[None, :] + 1.0)
                    rr = r.reshape(-1)
                    uu = np.repeat(u[idx], len(x), axis=0)
                    f = d.phi(rr, uu).reshape(r.shape) * r ** (n - 1)
                    acc += 0.5 * width * (f @ w)
            total[idx] += hi_sum
            err[idx] += np.abs(hi_sum - lo_sum)
            T = lo * 2.0
            done = (T >= bounds.r1) & (bounds.remainder(T) < rel_tol * total[idx])
            active[idx[done]] = False
        if np.any(active):
            raise ToleranceNotMet("remainder bound not reached within the piece budget")
        if np.all(err <= rel_tol * total):
            break
    else:
        raise ToleranceNotMet("quadrature refinement budget exhausted")
    return total


def tail_integral(d: Density, t, u) -> np.ndarray | float:
    """``Phi(t, u)``; scalar in, scalar out."""
    scalar = np.ndim(t) == 0 and np.ndim(u) == 1
    out = d.tail(np.atleast_1d(np.asarray(t, dtype=float)), np.atleast_2d(u))
    return float(out[0]) if scalar else out


@dataclass
class C1Report:
    samples: int
    sup_ratio: float | None
    inf_ratio: float | None
    sup_pass: bool
    inf_pass: bool

    @property
    def passed(self) -> bool:
        return self.sup_pass and self.inf_pass


def verify_c1_bounds(d: Density, samples: int = 64, bounds: TailBounds | None = None,
                     rays: int = 32, decades: float = 4.0) -> C1Report:
    """Sample ``phi |x|^(n-alpha-1)`` outside and inside ``r1`` against c1 and c2."""
    bounds = bounds or d.tail_bounds
    if bounds is None:
        raise TailNotIntegrable("no tail bounds to verify")
    if samples <= 0:
        return C1Report(0, None, None, True, True)
    n = d.dim
    dirs = direction_grid(n, rays)
    steps = decades * np.arange(1, samples + 1) / samples
    outer = bounds.r1 * 10.0**steps
    inner = bounds.r1 * 10.0 ** (-steps)

    def ratios(radii, alpha):
        tt = np.repeat(radii, len(dirs))
        uu = np.tile(dirs, (len(radii), 1))
        return d.phi(tt, uu) * tt ** (n - alpha - 1.0)

    sup_ratio = float(ratios(outer, bounds.alpha1).max())
    if not bounds.has_lower:
        return C1Report(samples, sup_ratio, None, sup_ratio <= bounds.c1 * (1 + 1e-12), False)
    inf_ratio = float(ratios(inner, bounds.alpha2).min())
    return C1Report(
        samples=samples,
        sup_ratio=sup_ratio,
        inf_ratio=inf_ratio,
        sup_pass=sup_ratio <= bounds.c1 * (1 + 1e-12),
        inf_pass=inf_ratio >= bounds.c2 * (1 - 1e-12),
    )


def c2_probe(d: Density, u0, b0: float, a_sequence, order: int = 64) -> np.ndarray:
    """Cap integrals ``int_{<u,u0> >= b0} Phi(a, u) du`` for each a.

    Their growth as ``a -> 0`` is the quantity whose divergence is condition C2.
    """
    a_sequence = np.asarray(a_sequence, dtype=float)
    if np.any(np.diff(a_sequence) >= 0):
        raise ValueError("a_sequence must be strictly decreasing")
    if not 0 < b0 < 1:
        raise ValueError("b0 must lie in (0, 1)")
    u0 = unit(u0)
    x, w = np.polynomial.legendre.leggauss(order)
    if d.dim == 2:
        half = np.arccos(b0)
        base = np.arctan2(u0[1], u0[0])
        nodes = angle_direction(base + half * x)
        weights = half * w
    else:
        # Gauss in cos(theta) over [b0, 1] times uniform azimuth around u0
        c = 0.5 * (1 - b0) * x + 0.5 * (1 + b0)
        wc = 0.5 * (1 - b0) * w
        az = 2 * np.pi * np.arange(order) / order
        e1 = unit(np.cross(u0, np.eye(3)[int(np.argmin(np.abs(u0)))]))
        e2 = np.cross(u0, e1)
        s = np.sqrt(1 - c**2)
        nodes = (c[:, None, None] * u0
                 + s[:, None, None] * (np.cos(az)[None, :, None] * e1 + np.sin(az)[None, :, None] * e2))
        nodes = nodes.reshape(-1, 3)
        weights = np.repeat(wc, order) * (2 * np.pi / order)
    out = []
    for a in a_sequence:
        out.append(float(weights @ d.tail(np.full(len(nodes), a), nodes)))
    return np.array(out)


def _spot_check_decreasing(d: Density, rays: int = 32, points: int = 64) -> bool:
    dirs = direction_grid(d.dim, rays)
    t = np.logspace(-3, 3, points)
    tt = np.repeat(t, rays)
    uu = np.tile(dirs, (points, 1))
    vals = (d.phi(tt, uu) * tt**d.dim).reshape(points, rays)
    ok = bool(np.all(np.diff(vals, axis=0) < 0))
    if not ok:
        warnings.warn("phi(x)|x|^n is not strictly decreasing on the sampled rays; "
                      "uniqueness claims do not apply", stacklevel=3)
    return ok
