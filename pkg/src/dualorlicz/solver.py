"""Discrete dual Orlicz-Minkowski problem.

Given ``mu = sum_i lambda_i delta_{u_i}`` and a density phi, find a polytope P
with facet normals ``u_i`` and ``tau > 0`` such that ``mu = tau * C(P, .)``,
where C is the dual Orlicz curvature measure.

The polytope is found by maximizing ``F(h) = -(1/|mu|) sum_i lambda_i log h_i``
over support vectors with ``V_phi([h]) = |mu|``.  In the variables
``x = log h`` the constraint set is reached from any point by a uniform shift
(a dilation of the body), so the solver alternates a gradient step in x with a
one-dimensional rescaling back onto the constraint.  Writing ``s(x)`` for that
shift, the reduced objective ``G(x) = F(x + s(x))`` has gradient

    dG/dx_i = -lambda_i / |mu| + C_i / C_total,

which vanishes exactly when ``mu / |mu| = C / C_total``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .density import Density
from .errors import (
    BisectionBracketFailure,
    MeasureConcentrated,
    NonIntegrableDensity,
    NonPositiveSupport,
    TailNotIntegrable,
)
from .geometry import HPolytope, direction_grid, hausdorff_distance
from .measures import CurvatureResult, DiscreteMeasure, curvature_measure, quermass
from .quadrature import DEFAULT_GAUSS_ORDER, arc_partition, make_rule

log = logging.getLogger(__name__)

# a facet whose mass drops below this fraction of the total counts as vanished
FACET_DEATH = 1e-14
# backtracking depth (relative to the trial step) after which a facet may vanish
DEATH_FLOOR = 1e-6
# objective decrease tolerated by the line search; keeps the trace monotone within 1e-12
ROUNDING_SLACK = 1e-13


@dataclass
class SolverConfig:
    tol_kkt: float = 1e-8
    max_iters: int = 500
    step_init: float = 1.0
    backtrack_ratio: float = 0.5
    armijo: float = 1e-4
    constraint_tol: float = 1e-10
    gauss_order: int = DEFAULT_GAUSS_ORDER
    # None: exact arc partition in 2-D, default product rule in 3-D
    resolution: object = None
    multistart_count: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (self.tol_kkt > 0 and self.step_init > 0 and self.constraint_tol > 0 and self.armijo > 0):
            raise ValueError("tolerances and step sizes must be positive")
        if not 0 < self.backtrack_ratio < 1:
            raise ValueError("backtrack_ratio must lie in (0, 1)")
        if self.max_iters < 0 or self.multistart_count < 1 or self.gauss_order < 1:
            raise ValueError("iteration counts must be positive")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    objective: float
    constraint: float
    residual: float
    step: float


@dataclass(frozen=True)
class SolverResult:
    """Outcome of :func:`solve`.

    ``polytope`` is the reported solution (rescaled so that ``tau = 1`` for
    q-homogeneous densities); ``feasible`` is the optimizer on the constraint
    ``V_phi = |mu|`` before that rescaling.
    """

    polytope: HPolytope
    tau: float
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    feasible: HPolytope
    masses: np.ndarray
    trace: list = field(default_factory=list)


def _rule(P: HPolytope, cfg: SolverConfig):
    if P.dim == 2 and cfg.resolution is None:
        return arc_partition(P, cfg.gauss_order)
    return make_rule(P.dim, cfg.resolution)


def check_not_concentrated(mu: DiscreteMeasure, grid=None, threshold: float | None = None):
    """Minimum over a direction grid of ``sum_i lambda_i <xi, u_i>_+``.

    Returns ``(ok, worst, witness)``.  Among grid points at the minimum the
    witness is the one furthest from every atom, i.e. the deepest direction of
    an empty open hemisphere when the measure is concentrated.
    """
    if mu.total <= 0:
        raise ValueError("measure is zero")
    xi = direction_grid(mu.dim) if grid is None else np.asarray(getattr(grid, "nodes", grid))
    dots = xi @ mu.directions.T
    vals = np.clip(dots, 0.0, None) @ mu.weights
    worst = float(vals.min())
    threshold = 1e-10 * mu.total if threshold is None else threshold
    near = np.nonzero(vals <= worst + 1e-12 * mu.total)[0]
    depth = -dots[near].max(axis=1)
    witness = xi[near[np.argmax(depth)]]
    return worst > threshold, worst, witness


def objective_F(h, mu: DiscreteMeasure) -> float:
    """``-(1/|mu|) sum_i lambda_i log h_i``."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise NonPositiveSupport("support numbers must be positive")
    return float(-(mu.weights @ np.log(h)) / mu.total)


def _reduced_gradient(masses: CurvatureResult, mu: DiscreteMeasure) -> np.ndarray:
    return -mu.weights / mu.total + masses.per_face / masses.total


def kkt_residual(masses: CurvatureResult, mu: DiscreteMeasure) -> float:
    """``max_i |lambda_i/|mu| - C_i/C_total|``."""
    return float(np.max(np.abs(_reduced_gradient(masses, mu))))


def gradient_logspace(P: HPolytope, d: Density, mu: DiscreteMeasure, rule=None) -> np.ndarray:
    """Ascent direction in ``log h`` tangent to the constraint ``V_phi = const``.

    The Lagrangian gradient ``-lambda/|mu| + tau * C/V`` with multiplier
    ``tau = V/C_total`` is shifted along the dilation direction (1, ..., 1),
    which leaves the reduced objective unchanged, until the first-order change
    of ``log V`` vanishes.  It is zero exactly at a KKT point.
    """
    rule = rule if rule is not None else _rule(P, SolverConfig())
    masses = curvature_measure(P, d, rule)
    g = _reduced_gradient(masses, mu)
    # d log V / d x_i = -C_i / V, so the correction uses the masses only
    c = -(masses.per_face @ g) / masses.total
    return g + c


def project_to_constraint(P: HPolytope, d: Density, target: float, rule=None,
                          tol: float = 1e-12, max_doublings: int = 200) -> HPolytope:
    """Dilate P so that ``V_phi(lam P) = target``.

    Closed form ``lam = (V/target)^(-1/q)`` for q-homogeneous densities,
    otherwise a bracketed root search in ``log lam`` (V is strictly
    decreasing in lam).
    """
    if not target > 0:
        raise ValueError("target must be positive")
    rule = rule if rule is not None else _rule(P, SolverConfig())
    V = quermass(P, d, rule)
    q = d.homogeneity
    if q is not None:
        return P.scaled((V / target) ** (-1.0 / q))

    def f(s):
        return math.log(quermass(P.scaled(math.exp(s)), d, rule)) - math.log(target)

    lo, hi = 0.0, 0.0
    f0 = math.log(V) - math.log(target)
    if f0 == 0.0:
        return P
    step = 1.0
    for _ in range(max_doublings):
        if f0 > 0:
            hi = lo + step
            if f(hi) < 0:
                break
            lo = hi
        else:
            lo = hi - step
            if f(lo) > 0:
                break
            hi = lo
        step *= 2.0
    else:
        raise BisectionBracketFailure("could not bracket the constraint")
    s = brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return P.scaled(math.exp(s))


def _check_density(d: Density, dim: int):
    if d.dim != dim:
        raise ValueError(f"density dimension {d.dim} differs from measure dimension {dim}")
    probe = direction_grid(dim, 8)
    try:
        d.tail(np.ones(len(probe)), probe)
    except TailNotIntegrable as exc:
        raise NonIntegrableDensity(str(exc)) from exc
    if not d.claims.c2_claimed:
        warnings.warn("density does not claim condition C2 (divergence of the tail integral near the origin); a solution may not exist", stacklevel=3)


def solve(mu: DiscreteMeasure, d: Density, cfg: SolverConfig | None = None,
          initial_supports=None) -> SolverResult:
    """Maximize ``F`` on ``V_phi = |mu|`` by projected gradient ascent in ``log h``.

    Steps use a Barzilai-Borwein trial length followed by Armijo backtracking on
    the reduced objective.  Steps that make a live facet vanish are rejected.
    """
    cfg = cfg or SolverConfig()
    ok, worst, witness = check_not_concentrated(mu)
    if not ok:
        raise MeasureConcentrated(
            f"measure is concentrated on a closed hemisphere (worst {worst:.3e})", worst, witness)
    _check_density(d, mu.dim)
    if np.any(mu.weights <= 0):
        raise ValueError("solver needs strictly positive weights")

    target = mu.total
    h0 = np.ones(len(mu)) if initial_supports is None else np.asarray(initial_supports, dtype=float)
    P = HPolytope(mu.directions, h0)
    P = project_to_constraint(P, d, target, _rule(P, cfg), tol=cfg.constraint_tol * 1e-2)

    def state(P):
        rule = _rule(P, cfg)
        masses = curvature_measure(P, d, rule)
        V = quermass(P, d, rule)
        return masses, V

    masses, V = state(P)
    x = np.log(P.supports)
    G = objective_F(P.supports, mu)
    grad = _reduced_gradient(masses, mu)
    res = float(np.max(np.abs(grad)))
    trace = [TraceRow(0, G, V / target - 1.0, res, 0.0)]
    alpha = cfg.step_init
    converged = res <= cfg.tol_kkt
    it = 0
    while not converged and it < cfg.max_iters:
        it += 1
        # tangent correction: shifting along (1,...,1) leaves G unchanged
        direction = grad - (masses.per_face @ grad) / masses.total
        slope = float(grad @ grad)
        alive = masses.per_face > FACET_DEATH * masses.total
        step = alpha
        fallback = None
        while True:
            x_try = x + step * direction
            P_try = project_to_constraint(HPolytope(mu.directions, np.exp(x_try)), d, target,
                                          _rule(P, cfg), tol=cfg.constraint_tol * 1e-2)
            m_try, V_try = state(P_try)
            died = np.any(alive & (m_try.per_face <= FACET_DEATH * m_try.total))
            G_try = objective_F(P_try.supports, mu)
            # rounding slack: near the optimum the Armijo increase is below float resolution
            increased = G_try >= G + cfg.armijo * step * slope - ROUNDING_SLACK * (1.0 + abs(G))
            if increased and not died:
                break
            if increased and fallback is None:
                fallback = (P_try, m_try, V_try, G_try, step)
            step *= cfg.backtrack_ratio
            if step < DEATH_FLOOR * alpha and fallback is not None:
                # the ascent path passes through a vanished facet; its gradient
                # component is then -lambda_i < 0, so it regrows later
                P_try, m_try, V_try, G_try, step = fallback
                break
            if step < 1e-14:
                break
        if step < 1e-14:
            log.info("line search stalled at iteration %d", it)
            break
        x_new = np.log(P_try.supports)
        grad_new = _reduced_gradient(m_try, mu)
        s, y = x_new - x, grad_new - grad
        sy = float(s @ y)
        # Barzilai-Borwein length for the next trial (ascent: curvature sy < 0)
        alpha = float(np.clip((s @ s) / -sy, 1e-6, 1e6)) if sy < 0 else cfg.step_init
        x, P, masses, V, G, grad = x_new, P_try, m_try, V_try, G_try, grad_new
        res = float(np.max(np.abs(grad)))
        trace.append(TraceRow(it, G, V / target - 1.0, res, step))
        converged = res <= cfg.tol_kkt

    tau = target / masses.total
    solution, out_masses, out_tau = P, masses.per_face, tau
    q = d.homogeneity
    if q is not None:
        # dilate so that mu = C(P, .) exactly: C(cP) = c^q C(P)
        c = tau ** (1.0 / q)
        solution = P.scaled(c)
        out_masses = masses.per_face * tau
        out_tau = 1.0
    return SolverResult(
        polytope=solution,
        tau=float(out_tau),
        objective=G,
        kkt_residual=res,
        iterations=it,
        converged=bool(converged),
        feasible=P,
        masses=out_masses,
        trace=trace,
    )


@dataclass
class UniquenessReport:
    max_distance: float
    distances: np.ndarray
    residuals: list
    results: list
    informational: bool

    def summary(self) -> str:
        note = " (informational: uniqueness not claimed for this density)" if self.informational else ""
        return (f"multistart starts={len(self.results)} max_pairwise_distance={self.max_distance:.3e} "
                f"max_residual={max(self.residuals):.3e}{note}")


def multistart_uniqueness_probe(mu: DiscreteMeasure, d: Density, cfg: SolverConfig | None = None,
                                rng: np.random.Generator | None = None) -> UniquenessReport:
    """Solve from log-uniform random supports in [0.25, 4] and compare the solutions."""
    cfg = cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    results = []
    for k in range(cfg.multistart_count):
        h0 = None if cfg.multistart_count == 1 else np.exp(rng.uniform(np.log(0.25), np.log(4.0), len(mu)))
        results.append(solve(mu, d, cfg, initial_supports=h0))
    count = len(results)
    dist = np.zeros((count, count))
    for i in range(count):
        for j in range(i + 1, count):
            dist[i, j] = dist[j, i] = hausdorff_distance(results[i].polytope, results[j].polytope)
    return UniquenessReport(
        max_distance=float(dist.max()),
        distances=dist,
        residuals=[r.kkt_residual for r in results],
        results=results,
        informational=not d.claims.strictly_decreasing_phixn,
    )
