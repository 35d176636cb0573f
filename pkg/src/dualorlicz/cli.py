"""Command-line front end.

Usage::

    dualorlicz compute --config run.yaml --out out/
    dualorlicz solve   --config run.yaml --out out/ [--multistart K] [--allow-soft]
    dualorlicz verify  --config run.yaml --out out/
    dualorlicz export  --config run.yaml --out out/

Exit codes: 0 success, 1 failed verification, 2 bad config, 3 numerical
failure, 4 measure concentrated on a closed hemisphere, 5 solver did not
converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import geometry as geo
from .density import DensityClaims, PowerLawDensity, TailBounds, radial_exp_density
from .errors import DualOrliczError, InvalidPolytope, MeasureConcentrated
from .io import (
    dump_json,
    fmt,
    polytope_from_dict,
    polytope_to_dict,
    result_to_dict,
    write_masses_csv,
    write_off,
    write_trace_csv,
)
from .measures import DiscreteMeasure, curvature_measure, quermass, surface_area_measure
from .quadrature import make_rule
from .solver import SolverConfig, check_not_concentrated, multistart_uniqueness_probe, solve
from .verify import CHECK_NAMES, reports_to_json, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CONCENTRATED = 4
EXIT_NOT_CONVERGED = 5


class ConfigError(ValueError):
    """Raised for malformed or incomplete configuration files."""


# ---------------------------------------------------------------- config

def load_config(path) -> dict:
    """Read a YAML config; an ``instance:`` key names a file merged underneath."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    if "instance" in cfg:
        inst = path.parent / cfg.pop("instance")
        base = load_config(inst)
        base.update(cfg)
        cfg = base
    return cfg


def _require(cfg: dict, key: str, where: str = "config"):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"{where} lacks required block {key!r}")
    return cfg[key]


def _phi2_from_config(block, dim):
    if isinstance(block, (int, float)):
        return float(block)
    if isinstance(block, dict) and "angles" in block:
        if dim != 2:
            raise ConfigError("tabulated phi2 is only supported in 2-D")
        ang = np.asarray(block["angles"], dtype=float)
        val = np.asarray(block["values"], dtype=float)
        if ang.shape != val.shape or np.any(val <= 0) or np.any(np.diff(ang) <= 0):
            raise ConfigError("phi2 table needs increasing angles and positive values")
        return lambda u: np.interp(np.arctan2(u[:, 1], u[:, 0]), ang, val, period=2 * np.pi)
    raise ConfigError(f"unrecognized phi2 specification: {block!r}")


def _density_from_config(block: dict, dim: int):
    kind = block.get("kind", "power")
    claims = block.get("claims")
    kw = {"claims": DensityClaims(**claims)} if claims else {}
    if kind == "power":
        return PowerLawDensity(dim, q=float(block.get("q", -1.0)), phi2=_phi2_from_config(block.get("phi2", 1.0), dim), **kw)
    if kind == "radial-exp":
        bounds = TailBounds(**block["tail_bounds"]) if "tail_bounds" in block else None
        return radial_exp_density(dim, a=float(block.get("a", 1.0)), b=float(block.get("b", 1.0)),
                                  p=float(block.get("p", 0.0)), bounds=bounds, **kw)
    raise ConfigError(f"unknown density kind {kind!r}")


_SHAPES = {
    "square": lambda s: geo.square(s.get("half_width", 1.0)),
    "cube": lambda s: geo.cube(s.get("half_width", 1.0)),
    "box": lambda s: geo.box(s["half_widths"]),
    "octahedron": lambda s: geo.octahedron(s.get("support", 1.0)),
    "regular_polygon": lambda s: geo.regular_polygon(int(s["m"]), s.get("support", 1.0), s.get("phase", 0.0)),
    "ball": lambda s: geo.ball(s.get("radius", 1.0), int(s.get("dim", 2))),
    "ellipsoid": lambda s: geo.ellipsoid(s["axes"]),
}


def _body_from_config(block: dict):
    if "normals" in block:
        return polytope_from_dict(block)
    kind = block.get("kind")
    if kind not in _SHAPES:
        raise ConfigError(f"unknown body kind {kind!r}")
    return _SHAPES[kind](block)


def _measure_from_config(block: dict, rng: np.random.Generator) -> DiscreteMeasure:
    if "directions" in block:
        return DiscreteMeasure(np.asarray(block["directions"], dtype=float), np.asarray(block["weights"], dtype=float))
    kind = block.get("kind")
    if kind == "uniform":
        count = int(block["count"])
        theta = float(block.get("phase", 0.0)) + 2 * np.pi * np.arange(count) / count
        return DiscreteMeasure(geo.angle_direction(theta), np.full(count, float(block.get("total", 2 * np.pi)) / count))
    if kind == "random":
        count, dim = int(block["count"]), int(block.get("dim", 2))
        dirs = geo.unit(rng.standard_normal((count, dim)))
        lo, hi = block.get("log_weight_range", [-1.0, 1.0])
        return DiscreteMeasure(dirs, np.exp(rng.uniform(lo, hi, count)))
    if kind == "surface_area":
        return surface_area_measure(body_from_config(_require(block, "body", "measure")))
    raise ConfigError(f"unknown measure kind {kind!r}")


def solver_config(cfg: dict, args) -> SolverConfig:
    block = dict(cfg.get("solver") or {})
    quad = cfg.get("quadrature") or {}
    block.setdefault("resolution", quad.get("resolution"))
    block.setdefault("gauss_order", quad.get("gauss_order", 16))
    if args.multistart is not None:
        block["multistart_count"] = args.multistart
    block["seed"] = _seed(cfg, args)
    try:
        return SolverConfig(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver block: {exc}") from None


def _seed(cfg: dict, args) -> int:
    return int(args.seed if args.seed is not None else cfg.get("seed", 0))


def _rule(cfg: dict, dim: int):
    res = (cfg.get("quadrature") or {}).get("resolution")
    return None if res is None else make_rule(dim, res)


def _resolution(cfg: dict):
    return (cfg.get("quadrature") or {}).get("resolution")


def _as_config_error(parse):
    def wrapped(*a):
        try:
            return parse(*a)
        except ConfigError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{parse.__name__.lstrip('_')}: {type(exc).__name__}: {exc}") from None
    return wrapped


density_from_config = _as_config_error(_density_from_config)
body_from_config = _as_config_error(_body_from_config)
measure_from_config = _as_config_error(_measure_from_config)


# ---------------------------------------------------------------- commands

def cmd_compute(cfg: dict, args, out: Path) -> int:
    K = body_from_config(_require(cfg, "body"))
    d = density_from_config(_require(cfg, "density"), K.dim)
    rule = _rule(cfg, K.dim)
    V = quermass(K, d, rule)
    (out / "quermass.txt").write_text(fmt(V) + "\n")
    print(f"quermass {fmt(V)}")
    if isinstance(K, geo.HPolytope):
        cm = curvature_measure(K, d, rule)
        write_masses_csv(out / "masses.csv", K, cm.per_face)
        print(f"curvature total {fmt(cm.total)} over {K.m} facets")
    return EXIT_OK


def cmd_solve(cfg: dict, args, out: Path) -> int:
    rng = np.random.default_rng(_seed(cfg, args))
    mu = measure_from_config(_require(cfg, "measure"), rng)
    d = density_from_config(_require(cfg, "density"), mu.dim)
    scfg = solver_config(cfg, args)
    ok, worst, witness = check_not_concentrated(mu)
    if not ok:
        print(f"error: measure is concentrated on a closed hemisphere: it must not be concentrated "
              f"in any closed hemisphere (min positive part {worst:.3e}, "
              f"witness {np.array2string(witness, precision=6)})", file=sys.stderr)
        return EXIT_CONCENTRATED
    result = solve(mu, d, scfg)
    dump_json(result_to_dict(result), out / "result.json")
    write_trace_csv(out / "trace.csv", result.trace)
    write_masses_csv(out / "masses.csv", result.polytope, result.masses)
    write_off(out / "solution.off", result.polytope)
    print(f"solve converged={result.converged} iterations={result.iterations} "
          f"kkt_residual={result.kkt_residual:.3e} tau={result.tau:.12g}")
    if args.multistart is not None and args.multistart > 1:
        rep = multistart_uniqueness_probe(mu, d, scfg, np.random.default_rng(scfg.seed))
        (out / "uniqueness.txt").write_text(rep.summary() + "\n")
        print(rep.summary())
    if not result.converged and not args.allow_soft:
        print("error: solver did not reach the KKT tolerance (use --allow-soft to accept)", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_verify(cfg: dict, args, out: Path) -> int:
    P = body_from_config(_require(cfg, "body"))
    if not isinstance(P, geo.HPolytope):
        raise ConfigError("verify needs a polytope body")
    d = density_from_config(_require(cfg, "density"), P.dim)
    block = cfg.get("verify") or {}
    checks = block.get("checks", list(CHECK_NAMES))
    if not checks:
        warnings.warn("empty check selection; nothing verified", stacklevel=1)
    seed = _seed(cfg, args)
    mu = measure_from_config(cfg["measure"], np.random.default_rng(seed)) if cfg.get("measure") else None
    reports = run_suite(P, d, mu, checks, resolution=_resolution(cfg),
                        solver_cfg=solver_config(cfg, args), seed=seed)
    text = "".join(r.line() + "\n" for r in reports)
    (out / "verify.txt").write_text(text)
    (out / "verify.json").write_text(reports_to_json(reports))
    sys.stdout.write(text)
    failed = [r.name for r in reports if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_export(cfg: dict, args, out: Path) -> int:
    if "result" in cfg:
        src = Path(cfg["result"])
        if not src.is_file():
            raise ConfigError(f"result file not found: {src}")
        P = polytope_from_dict(json.loads(src.read_text())["polytope"])
    else:
        P = body_from_config(_require(cfg, "body"))
        if not isinstance(P, geo.HPolytope):
            raise ConfigError("export needs a polytope")
    write_off(out / "polytope.off", P)
    dump_json(polytope_to_dict(P), out / "polytope.json")
    print(f"wrote {out / 'polytope.off'}")
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "solve": cmd_solve, "verify": cmd_verify, "export": cmd_export}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualorlicz", description="Dual Orlicz curvature measures and Minkowski solver.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="YAML config file")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out", type=str, default=None, help="output directory (default: config 'output' or ./out)")
    p.add_argument("--multistart", type=int, default=None, help="number of random starts for the uniqueness probe")
    p.add_argument("--allow-soft", action="store_true", help="exit 0 even if the solver did not converge")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.get("output", "out"))
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, InvalidPolytope) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MeasureConcentrated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONCENTRATED
    except (DualOrliczError, ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
