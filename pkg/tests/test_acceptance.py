"""Acceptance criteria 1-12, each at its stated tolerance and time budget.

Run with pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly: ``python tests/test_acceptance.py``.
"""

import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

sys.path.insert(0, str(Path(__file__).resolve().parent))

from dualorlicz import geometry as geo  # noqa: E402
from dualorlicz.cli import main as cli_main  # noqa: E402
from dualorlicz.density import PowerLawDensity, radial_exp_density  # noqa: E402
from dualorlicz.measures import DiscreteMeasure, curvature_measure, quermass  # noqa: E402
from dualorlicz.solver import SolverConfig, check_not_concentrated, multistart_uniqueness_probe, solve  # noqa: E402
from dualorlicz.verify import homogeneity_check, forms_crosscheck, variational_check  # noqa: E402

S2 = np.sqrt(2.0)
RESULTS = {}


def _square_measure():
    return DiscreteMeasure([[1, 0], [0, 1], [-1, 0], [0, -1]], [S2] * 4)


def _random_measure(rng, m):
    while True:
        theta = np.sort(rng.uniform(0, 2 * np.pi, m))
        mu = DiscreteMeasure(np.c_[np.cos(theta), np.sin(theta)], np.exp(rng.uniform(-1, 1, m)))
        if check_not_concentrated(mu)[0]:
            return mu


def _rel(a, b):
    return abs(a - b) / abs(b)


def criterion_1():
    t = time.perf_counter()
    d = PowerLawDensity(2, q=-1)
    errs = [_rel(quermass(geo.ball(r), d), 2 * np.pi / r) for r in (1.0, 0.5, 3.0)]
    dt = time.perf_counter() - t
    return max(errs) <= 1e-8 and dt < 1, f"max rel err {max(errs):.2e} (tol 1e-8), {dt:.2f}s (<1s)"


def criterion_2():
    t = time.perf_counter()
    d = PowerLawDensity(2, q=-1)
    P = geo.square()
    e_v = _rel(quermass(P, d), 4 * S2)
    e_c = np.max(np.abs(curvature_measure(P, d).per_face - S2)) / S2
    dt = time.perf_counter() - t
    err = max(e_v, e_c)
    return err <= 1e-8 and dt < 1, f"quermass err {e_v:.2e}, per-face err {e_c:.2e} (tol 1e-8), {dt:.2f}s (<1s)"


def criterion_3():
    t = time.perf_counter()
    mu = _square_measure()
    d = PowerLawDensity(2, q=-1)
    res = solve(mu, d, SolverConfig(tol_kkt=1e-8, max_iters=200))
    e_h = np.max(np.abs(res.polytope.supports - 1.0))
    masses = curvature_measure(res.polytope, d).per_face
    e_m = np.max(np.abs(masses - mu.weights) / mu.weights)
    dt = time.perf_counter() - t
    ok = e_h <= 1e-3 and res.kkt_residual <= 1e-8 and res.iterations <= 200 and e_m <= 1e-6 and dt < 10
    return ok, (f"support err {e_h:.2e} (1e-3), residual {res.kkt_residual:.2e} (1e-8), "
                f"{res.iterations} iterations (<=200), mass err {e_m:.2e} (1e-6), tau {res.tau:g}, {dt:.2f}s (<10s)")


def criterion_4():
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    qs = (-0.5, -1.0, -2.0)
    good = 0
    for k in range(20):
        mu = _random_measure(rng, int(rng.integers(5, 13)))
        res = solve(mu, PowerLawDensity(2, q=qs[k % 3]), SolverConfig(tol_kkt=1e-6))
        good += res.kkt_residual <= 1e-6
    dt = time.perf_counter() - t
    return good >= 19 and dt < 120, f"{good}/20 reached residual <= 1e-6 (need 19), {dt:.1f}s (<120s)"


def criterion_5():
    t = time.perf_counter()
    rng = np.random.default_rng(5)
    worst, fails = 0.0, 0
    for k in range(10):
        P = geo.random_polygon(rng, int(rng.integers(4, 10)))
        d = PowerLawDensity(2, q=float(rng.choice([-0.5, -1.0, -2.0]))) if k % 2 == 0 else \
            radial_exp_density(2, a=1.0, b=float(rng.uniform(0.5, 2.0)), p=-3.5)
        rep = variational_check(P, d, rng.uniform(-1, 1, P.m))
        worst = max(worst, rep.error)
        fails += not rep.passed
    dt = time.perf_counter() - t
    return fails == 0 and dt < 30, f"max rel err {worst:.2e} over 10 triples (tol 1e-6), {dt:.1f}s (<30s)"


def criterion_6():
    t = time.perf_counter()
    rng = np.random.default_rng(6)
    worst2 = 0.0
    ok = True
    for k in range(10):
        P = geo.random_polygon(rng, int(rng.integers(3, 12)))
        d = PowerLawDensity(2, q=float(rng.choice([-0.5, -1.0, -2.0])))
        rep = forms_crosscheck(P, d, tolerance=1e-6)
        worst2 = max(worst2, rep.error)
        ok &= rep.passed
    worst3 = 0.0
    for P in (geo.cube(), geo.octahedron()):
        rep = forms_crosscheck(P, PowerLawDensity(3, q=-1), tolerance=1e-3)
        worst3 = max(worst3, rep.error)
        ok &= rep.passed
    dt = time.perf_counter() - t
    return ok and dt < 60, f"2-D max gap {worst2:.2e} (1e-6), 3-D max gap {worst3:.2e} (1e-3), {dt:.1f}s (<60s)"


def criterion_7():
    t = time.perf_counter()
    rng = np.random.default_rng(7)
    bodies = [geo.square(), geo.random_polygon(rng, 7), geo.cube(), geo.random_polytope3(rng, 10)]
    worst, ok = 0.0, True
    for P in bodies:
        for q in (-0.5, -1.0, -2.0):
            rep = homogeneity_check(P, PowerLawDensity(P.dim, q=q), (0.5, 2.0, 10.0), tolerance=1e-10)
            worst = max(worst, rep.error)
            ok &= rep.passed
    dt = time.perf_counter() - t
    return ok and dt < 10, f"max rel err {worst:.2e} (tol 1e-10), {dt:.2f}s (<10s)"


def criterion_8():
    t = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for k in range(10):
        P = geo.random_polygon(rng, int(rng.integers(3, 12))) if k < 6 else geo.random_polytope3(rng, int(rng.integers(6, 14)))
        q = float(rng.choice([-0.5, -1.0, -2.0]))
        d = PowerLawDensity(P.dim, q=q)
        worst = max(worst, _rel(curvature_measure(P, d).total, -q * quermass(P, d)))
    dt = time.perf_counter() - t
    return worst <= 1e-8 and dt < 10, f"max rel err {worst:.2e} over 10 polytopes (tol 1e-8), {dt:.2f}s (<10s)"


def criterion_9():
    t = time.perf_counter()
    rng = np.random.default_rng(9)
    instances = [(_square_measure(), PowerLawDensity(2, q=-1)),
                 (_random_measure(rng, 6), PowerLawDensity(2, q=-2)),
                 (_random_measure(rng, 8), PowerLawDensity(2, q=-0.5))]
    worst = 0.0
    for mu, d in instances:
        rep = multistart_uniqueness_probe(mu, d, SolverConfig(multistart_count=5, seed=9))
        worst = max(worst, rep.max_distance)
    dt = time.perf_counter() - t
    return worst <= 1e-4 and dt < 120, f"max pairwise distance {worst:.2e} (tol 1e-4), {dt:.1f}s (<120s)"


def criterion_10():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "c.yaml"
        cfg.write_text(yaml.safe_dump({"density": {"kind": "power", "q": -1},
                                       "measure": {"directions": [[1, 0], [0, 1], [1, 1]], "weights": [1, 2, 1]}}))
        code = cli_main(["solve", "--config", str(cfg), "--out", str(Path(tmp) / "o")])
        untouched = not (Path(tmp) / "o" / "result.json").exists()
    return code == 4 and untouched, f"exit code {code} (expected 4), no result written: {untouched}"


def criterion_11():
    rng = np.random.default_rng(11)
    worst = 0.0
    for q in (-0.5, -1.0, -2.0):
        mu = _random_measure(rng, 7)
        d = PowerLawDensity(2, q=q)
        base = solve(mu, d).polytope.supports
        for c in (0.1, 10.0):
            scaled = solve(mu.scaled(c), d).polytope.supports
            worst = max(worst, np.max(np.abs(scaled / (c ** (1 / q) * base) - 1)))
    return worst <= 1e-6, f"max rel support err {worst:.2e} (tol 1e-6)"


def criterion_12():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "c.yaml"
        cfg.write_text(yaml.safe_dump({"density": {"kind": "power", "q": -1.5},
                                       "measure": {"kind": "random", "count": 9}}))
        outs = [Path(tmp) / name for name in ("a", "b")]
        codes = [cli_main(["solve", "--config", str(cfg), "--out", str(o), "--seed", "3", "--multistart", "3"])
                 for o in outs]
        files = sorted(p.name for p in outs[0].iterdir())
        same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files)
        converged = json.loads((outs[0] / "result.json").read_text())["converged"]
    return codes == [0, 0] and same, f"{len(files)} files byte-identical: {same}, exit codes {codes}, converged {converged}"


CRITERIA = {
    1: ("ball closed forms", criterion_1),
    2: ("square closed forms", criterion_2),
    3: ("Minkowski problem recovery", criterion_3),
    4: ("random-instance KKT", criterion_4),
    5: ("variational formula", criterion_5),
    6: ("spherical vs boundary forms", criterion_6),
    7: ("homogeneity", criterion_7),
    8: ("mass identity", criterion_8),
    9: ("uniqueness", criterion_9),
    10: ("concentrated measure rejected", criterion_10),
    11: ("scaling equivariance", criterion_11),
    12: ("determinism", criterion_12),
}


def _line(n, title, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {n:2d} ({title}): {detail}"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    title, fn = CRITERIA[number]
    ok, detail = fn()
    line = _line(number, title, ok, detail)
    RESULTS[number] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for n, (title, fn) in sorted(CRITERIA.items()):
        ok, detail = fn()
        failed += not ok
        print(_line(n, title, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
