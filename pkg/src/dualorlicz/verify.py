"""Numerical checks of the structural identities behind the solver.

Each check returns a :class:`CheckReport` whose ``passed`` flag can be
recomputed from its numeric fields alone.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .density import Density
from .geometry import HPolytope
from .measures import (
    DegenerateFacetWarning,
    DiscreteMeasure,
    curvature_measure,
    integrate_boundary_form,
    integrate_spherical_form,
    quermass,
)
from .quadrature import make_rule
from .solver import SolverConfig, multistart_uniqueness_probe

VARIATIONAL_TOL = 1e-6
FORMS_TOL_2D = 1e-6
FORMS_TOL_3D = 1e-3
HOMOGENEITY_TOL = 1e-10
CONVERGENCE_TOL = 1e-6
UNIQUENESS_TOL = 1e-4

CHECK_NAMES = ("convergence", "forms", "homogeneity", "uniqueness", "variational")


@dataclass
class CheckReport:
    """Outcome of one check.

    ``passed`` holds iff ``|measured - expected| <= tolerance * scale``
    entrywise; ``scale`` is all ones for absolute checks.
    """

    name: str
    measured: np.ndarray
    expected: np.ndarray
    tolerance: float
    passed: bool
    details: str = ""
    scale: np.ndarray = None
    relative: bool = True

    def __post_init__(self):
        self.measured = np.atleast_1d(np.asarray(self.measured, dtype=float))
        self.expected = np.atleast_1d(np.asarray(self.expected, dtype=float))
        if self.scale is None:
            self.scale = np.ones_like(self.expected)
        self.scale = np.atleast_1d(np.asarray(self.scale, dtype=float))

    @property
    def error(self) -> float:
        if self.measured.size == 0:
            return 0.0
        return float(np.max(np.abs(self.measured - self.expected) / self.scale))

    def recompute(self) -> bool:
        return bool(np.all(np.abs(self.measured - self.expected) <= self.tolerance * self.scale))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        kind = "rel" if self.relative else "abs"
        return f"{status} {self.name}: err={self.error:.3e} tol={self.tolerance:.1e} ({kind}) {self.details}".rstrip()

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "relative": self.relative,
            "error": self.error,
            "measured": self.measured.tolist(),
            "expected": self.expected.tolist(),
            "scale": self.scale.tolist(),
            "details": self.details,
        }


def _report(name, measured, expected, tolerance, scale=None, details="", relative=True):
    rep = CheckReport(name, measured, expected, tolerance, False, details, scale, relative)
    rep.passed = rep.recompute()
    return rep


def _rel_scale(*values) -> np.ndarray:
    scale = np.max(np.abs(np.vstack([np.atleast_1d(v) for v in values])), axis=0)
    return np.where(scale > 0, scale, 1.0)


def _rule(P: HPolytope, resolution):
    return None if resolution is None else make_rule(P.dim, resolution)


def variational_check(P: HPolytope, d: Density, g, t_values=(1e-2, 1e-3, 1e-4),
                      resolution=None, tolerance: float = VARIATIONAL_TOL) -> CheckReport:
    """Central differences of ``t -> V_phi([h exp(t g)])`` at 0 against ``-sum g_i C_i``.

    The two smallest steps are combined by Richardson extrapolation (central
    differences have an even error expansion).  The observed order over the
    ladder is reported for information.
    """
    g = np.asarray(g, dtype=float)
    t_values = np.asarray(t_values, dtype=float)
    if len(t_values) < 2 or np.any(np.diff(t_values) >= 0) or np.any(t_values <= 0):
        raise ValueError("t_values must be positive and strictly decreasing, at least two")
    rule = _rule(P, resolution)
    cm = curvature_measure(P, d, rule)
    expected = -float(g @ cm.per_face)
    scale = max(abs(expected), float(np.abs(g) @ cm.per_face))
    if scale == 0.0:
        scale = 1.0

    def V(t):
        return quermass(P.with_supports(P.supports * np.exp(t * g)), d, rule)

    D = np.array([(V(t) - V(-t)) / (2 * t) for t in t_values])
    r2 = (t_values[-2] / t_values[-1]) ** 2
    extrapolated = (r2 * D[-1] - D[-2]) / (r2 - 1.0)
    errs = np.abs(D - expected)
    orders = [math.log(errs[k] / errs[k + 1]) / math.log(t_values[k] / t_values[k + 1])
              for k in range(len(D) - 1) if errs[k] > 0 and errs[k + 1] > 0]
    details = "fd=" + ",".join(f"{x:.10g}" for x in D) + f" extrapolated={extrapolated:.12g}"
    if orders:
        details += " observed_order=" + ",".join(f"{o:.2f}" for o in orders)
    return _report("variational", [extrapolated], [expected], tolerance, [scale], details)


def default_g_suite(dim: int):
    """Smooth bounded test functions on the sphere."""
    last = dim - 1
    return [
        ("one", lambda u: np.ones(len(u))),
        ("first_coordinate", lambda u: u[:, 0]),
        ("last_coordinate_squared", lambda u: u[:, last] ** 2),
        ("exp_first", lambda u: np.exp(u[:, 0])),
    ]


def forms_crosscheck(P: HPolytope, d: Density, g_suite=None, resolution=None,
                       facet_gauss_order: int = 32, tolerance: float | None = None) -> CheckReport:
    """Spherical form ``int g dC`` against the boundary form facet by facet.

    The relative gap uses ``max(|value|, int |g| dC)`` as denominator so that
    functions with vanishing integral are still measured meaningfully.
    """
    if g_suite is None:
        g_suite = default_g_suite(P.dim)
    if tolerance is None:
        tolerance = FORMS_TOL_2D if P.dim == 2 else FORMS_TOL_3D
    rule = _rule(P, resolution)
    cm = curvature_measure(P, d, rule)
    measured, expected, scale, names = [], [], [], []
    for name, g in g_suite:
        sph = integrate_spherical_form(P, d, g, rule)
        with warnings.catch_warnings():
            # empty facets are expected here and contribute zero on both sides
            warnings.simplefilter("ignore", DegenerateFacetWarning)
            bnd = integrate_boundary_form(P, d, g, facet_gauss_order)
        gabs = float(np.abs(np.asarray(g(P.normals), dtype=float)) @ cm.per_face)
        measured.append(sph)
        expected.append(bnd)
        scale.append(max(abs(bnd), gabs) or 1.0)
        names.append(name)
    empty = int(np.sum(cm.per_face == 0.0))
    return _report("forms", measured, expected, tolerance, scale,
                   "g=" + ",".join(names) + (f" empty_facets={empty}" if empty else ""))


def homogeneity_check(P: HPolytope, d: Density, lambdas=(0.5, 2.0, 10.0),
                      resolution=None, tolerance: float = HOMOGENEITY_TOL) -> CheckReport:
    """Per-facet masses and ``V_phi`` of ``lam P`` against ``lam^q`` times those of P."""
    q = d.homogeneity
    if q is None:
        raise ValueError("homogeneity check needs a q-homogeneous density")
    rule = _rule(P, resolution)
    base = curvature_measure(P, d, rule).per_face
    V0 = quermass(P, d, rule)
    measured, expected = [], []
    for lam in lambdas:
        Q = P.scaled(lam)
        measured.extend(curvature_measure(Q, d, rule).per_face)
        measured.append(quermass(Q, d, rule))
        expected.extend(lam**q * base)
        expected.append(lam**q * V0)
    expected = np.asarray(expected)
    return _report("homogeneity", measured, expected, tolerance, _rel_scale(expected),
                   f"q={q:g} lambdas=" + ",".join(f"{x:g}" for x in lambdas))


def convergence_check(P: HPolytope, d: Density, eps_values=(1e-2, 1e-4, 1e-6, 1e-8),
                      pattern: str = "uniform", g=None, resolution=None,
                      tolerance: float = CONVERGENCE_TOL) -> CheckReport:
    """Continuity of ``V_phi`` and of ``int g dC`` under support perturbations.

    ``P_eps`` has supports ``h_i (1 + eps s_i)`` with ``s_i = 1`` (uniform) or
    ``(-1)^i`` (alternating).  The check passes when the discrepancy at the
    smallest eps is within tolerance; the log-log slope between consecutive
    eps is reported as an empirical rate (no rate is guaranteed in general).
    """
    eps_values = np.asarray(eps_values, dtype=float)
    if np.any(np.diff(eps_values) >= 0) or np.any(eps_values < 0):
        raise ValueError("eps_values must be nonnegative and strictly decreasing")
    if pattern == "uniform":
        s = np.ones(P.m)
    elif pattern == "alternating":
        s = (-1.0) ** np.arange(P.m)
    else:
        raise ValueError(f"unknown perturbation pattern {pattern!r}")
    if g is None:
        g = lambda u: np.exp(u[:, 0])  # noqa: E731
    rule = _rule(P, resolution)
    V0 = quermass(P, d, rule)
    I0 = integrate_spherical_form(P, d, g, rule)
    gaps = []
    for eps in eps_values:
        Q = P.with_supports(P.supports * (1.0 + eps * s))
        dv = abs(quermass(Q, d, rule) - V0) / abs(V0)
        di = abs(integrate_spherical_form(Q, d, g, rule) - I0) / max(abs(I0), 1e-300)
        gaps.append(max(dv, di))
    gaps = np.asarray(gaps)
    slopes = [math.log(gaps[k] / gaps[k + 1]) / math.log(eps_values[k] / eps_values[k + 1])
              for k in range(len(gaps) - 1) if gaps[k] > 0 and gaps[k + 1] > 0 and eps_values[k + 1] > 0]
    details = f"pattern={pattern} gaps=" + ",".join(f"{x:.3e}" for x in gaps)
    if slopes:
        details += " empirical_slope=" + ",".join(f"{x:.2f}" for x in slopes)
    return _report("convergence", [gaps[-1]], [0.0], tolerance, None, details)


def uniqueness_check(mu: DiscreteMeasure, d: Density, cfg: SolverConfig | None = None,
                     tolerance: float = UNIQUENESS_TOL) -> CheckReport:
    """Multistart solves compared in the support sup-norm."""
    rep = multistart_uniqueness_probe(mu, d, cfg)
    return _report("uniqueness", [rep.max_distance], [0.0], tolerance, None, rep.summary(), relative=False)


def run_suite(P: HPolytope, d: Density, mu: DiscreteMeasure | None = None, checks=None,
              resolution=None, solver_cfg: SolverConfig | None = None, seed: int = 0) -> list[CheckReport]:
    """Run the selected checks and return reports ordered by name.

    Checks that do not apply (homogeneity without a q-homogeneous density,
    uniqueness without a target measure) are skipped.
    """
    selected = CHECK_NAMES if checks is None else tuple(checks)
    unknown = set(selected) - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    reports = []
    for name in sorted(set(selected)):
        if name == "variational":
            g = np.random.default_rng(seed).uniform(-1.0, 1.0, P.m)
            reports.append(variational_check(P, d, g, resolution=resolution))
        elif name == "forms":
            reports.append(forms_crosscheck(P, d, resolution=resolution))
        elif name == "homogeneity" and d.homogeneity is not None:
            reports.append(homogeneity_check(P, d, resolution=resolution))
        elif name == "convergence":
            reports.append(convergence_check(P, d, resolution=resolution))
        elif name == "uniqueness" and mu is not None:
            reports.append(uniqueness_check(mu, d, solver_cfg))
    return reports


def reports_to_json(reports) -> str:
    return json.dumps([r.to_record() for r in reports], indent=2, sort_keys=True) + "\n"
