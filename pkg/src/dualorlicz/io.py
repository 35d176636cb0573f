"""Plain-text serialization: polytope JSON, facet CSV, trace CSV, OFF meshes.

Floats are written with 17 significant digits and nothing time-dependent is
recorded, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .geometry import HPolytope


def fmt(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{float(x) + 0.0:.17g}"


def polytope_to_dict(P: HPolytope) -> dict:
    return {"dim": P.dim, "normals": P.normals.tolist(), "supports": P.supports.tolist()}


def polytope_from_dict(data: dict) -> HPolytope:
    try:
        normals, supports = data["normals"], data["supports"]
    except KeyError as exc:
        raise ValueError(f"polytope record lacks {exc.args[0]!r}") from None
    P = HPolytope(np.asarray(normals, dtype=float), np.asarray(supports, dtype=float))
    if "dim" in data and int(data["dim"]) != P.dim:
        raise ValueError("declared dimension does not match the normals")
    return P


def dump_json(obj, path: Path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def result_to_dict(result) -> dict:
    return {
        "polytope": polytope_to_dict(result.polytope),
        "feasible_supports": result.feasible.supports.tolist(),
        "masses": np.asarray(result.masses).tolist(),
        "tau": result.tau,
        "objective": result.objective,
        "kkt_residual": result.kkt_residual,
        "iterations": result.iterations,
        "converged": result.converged,
    }


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue())


def write_masses_csv(path: Path, P: HPolytope, masses):
    axes = ["nx", "ny", "nz"][: P.dim]
    rows = [[i, *map(fmt, P.normals[i]), fmt(P.supports[i]), fmt(masses[i])] for i in range(P.m)]
    _write_csv(path, ["facet_index", *axes, "support", "mass"], rows)


def read_masses_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_trace_csv(path: Path, trace):
    rows = [[r.iteration, fmt(r.objective), fmt(r.constraint), fmt(r.residual), fmt(r.step)] for r in trace]
    _write_csv(path, ["iteration", "objective", "constraint", "residual", "step"], rows)


def off_text(P: HPolytope) -> str:
    """OFF mesh: a single face (z = 0) for polygons, one face per nonempty facet in 3-D."""
    V = P.vertices
    if P.dim == 2:
        loop = V[np.argsort(np.arctan2(V[:, 1], V[:, 0]))]
        verts = np.column_stack([loop, np.zeros(len(loop))])
        faces = [list(range(len(loop)))]
    else:
        verts = V
        faces = []
        for i in range(P.m):
            loop = P.facet_vertices(i)
            if len(loop) < 3:
                continue
            idx = [int(np.argmin(np.linalg.norm(V - p, axis=1))) for p in loop]
            # orient counterclockwise seen from outside
            a, b, c = V[idx[0]], V[idx[1]], V[idx[2]]
            if np.cross(b - a, c - a) @ P.normals[i] < 0:
                idx = idx[::-1]
            faces.append(idx)
    lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
    lines += [" ".join(fmt(x) for x in v) for v in verts]
    lines += [" ".join(map(str, [len(f), *f])) for f in faces]
    return "\n".join(lines) + "\n"


def write_off(path: Path, P: HPolytope):
    Path(path).write_text(off_text(P))


def read_off(path: Path):
    """Vertices and faces of an OFF file (as written by :func:`write_off`)."""
    tokens = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if tokens[0].strip() != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = (int(x) for x in tokens[1].split()[:2])
    verts = np.array([[float(x) for x in ln.split()] for ln in tokens[2:2 + nv]])
    faces = [[int(x) for x in ln.split()[1:]] for ln in tokens[2 + nv:2 + nv + nf]]
    return verts, faces
