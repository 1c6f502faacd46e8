"""Grid scans of the three-parameter family and boundary meshes for plotting."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import criteria
from . import matcore as mc
from . import simplex3 as s3

COLUMNS = ("alpha", "beta", "gamma", "a", "b", "c", "pos_margin", "ppt_margin", "realign_sum", "label")
CLOSED_TOL = 1e-8


@dataclass(frozen=True)
class ScanConfig:
    grid: int = 21
    box: tuple = ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))
    out: str | None = None
    fmt: str = "csv"
    jobs: int = 1
    seed: int = 42
    restarts: int = 32

    def __post_init__(self):
        if self.grid < 2:
            raise ValueError("grid resolution must be at least 2")
        if len(self.box) != 3:
            raise ValueError("box needs three (low, high) pairs")
        for lo, hi in self.box:
            if not hi >= lo:
                raise ValueError(f"empty box interval [{lo}, {hi}]")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, self.grid) if hi > lo else np.array([lo]) for lo, hi in self.box]

    def points(self) -> list[tuple[float, float, float]]:
        ax = self.axes()
        return [(float(a), float(b), float(g)) for a in ax[0] for b in ax[1] for g in ax[2]]


def parse_box(text: str) -> tuple:
    """``lo,hi`` for all axes or ``a0,a1,b0,b1,g0,g1``."""
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 2:
        return tuple((vals[0], vals[1]) for _ in range(3))
    if len(vals) == 6:
        return tuple((vals[2 * i], vals[2 * i + 1]) for i in range(3))
    raise ValueError("box must have 2 or 6 comma-separated numbers")


def resolve_jobs(jobs: int | None) -> int:
    env = os.environ.get("GEW_JOBS")
    if env:
        return max(1, int(env))
    return max(1, int(jobs or 1))


def scan_point(p) -> dict:
    """Numeric evaluation of one family point (one CSV row)."""
    p = s3.FamilyPoint(*p)
    rho = s3.family_state(p)
    e = s3.to_euclid(p)
    lam = mc.min_eigenvalue(rho)
    ppt = mc.min_eigenvalue(mc.partial_transpose(rho, s3.DIMS))
    rsum = mc.realignment_sum(rho, s3.DIMS)
    if lam < -mc.POSITIVITY_TOL:
        label = criteria.Label.INVALID_STATE
    else:
        label = criteria.classify(rho, s3.DIMS).label
    return {
        "alpha": p.alpha,
        "beta": p.beta,
        "gamma": p.gamma,
        "a": float(e.a),
        "b": float(e.b),
        "c": float(e.c),
        "pos_margin": lam,
        "ppt_margin": ppt,
        "realign_sum": rsum,
        "label": label.value,
    }


def closed_form_label(p, rec=None, tol: float = CLOSED_TOL) -> str:
    """Label predicted by the reconciled closed-form constraints alone."""
    rep = s3.constraint_report(p, rec)
    if min(rep.positivity) < -tol:
        return criteria.Label.INVALID_STATE.value
    if min(rep.ppt_closed) < -tol:
        return criteria.Label.NPT_ENTANGLED.value
    if min(rep.realign_closed) < -tol:
        return criteria.Label.BOUND_ENTANGLED.value
    return criteria.Label.PPT_UNDECIDED.value


def run_scan(cfg: ScanConfig) -> list[dict]:
    pts = cfg.points()
    jobs = resolve_jobs(cfg.jobs)
    if jobs == 1:
        return [scan_point(p) for p in pts]
    # map keeps input order whatever the completion order
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(scan_point, pts, chunksize=max(1, len(pts) // (8 * jobs))))


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rows_to_text(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in COLUMNS])
    return buf.getvalue()


# -- meshes ------------------------------------------------------------------------


@dataclass
class Mesh:
    name: str
    vertices: list
    faces: list  # zero-based index triples


def pyramid_mesh() -> Mesh:
    from scipy.spatial import ConvexHull

    verts = [tuple(s3.to_euclid(p)) for p in s3.pyramid_vertices()]
    hull = ConvexHull(np.array(verts))
    faces = []
    centre = np.mean(verts, axis=0)
    for simplex, eq in zip(hull.simplices, hull.equations):
        i, j, k = (int(x) for x in simplex)
        n = np.cross(np.subtract(verts[j], verts[i]), np.subtract(verts[k], verts[i]))
        # outward orientation
        if n @ (np.asarray(verts[i]) - centre) < 0:
            j, k = k, j
        faces.append((i, j, k))
    return Mesh("pyramid", verts, faces)


def surface_mesh(name: str, alpha_fn, grid: int = 41, keep=None) -> Mesh:
    """Triangulate ``alpha = alpha_fn(beta, gamma)`` over ``[-1, 1]^2``.

    Cells are kept when all their corners pass ``keep`` (default: inside
    the positivity pyramid).
    """
    rec = s3.reconcile()
    keep = keep or (lambda p: min(s3.positivity_check(p, rec)) >= -1e-12)
    bs = np.linspace(-1, 1, grid)
    gs = np.linspace(-1, 1, grid)
    index, verts, faces = {}, [], []

    def vid(i, j):
        if (i, j) not in index:
            p = (alpha_fn(bs[i], gs[j]), bs[i], gs[j])
            index[i, j] = len(verts)
            verts.append(tuple(float(x) for x in s3.to_euclid(p)))
        return index[i, j]

    ok = np.zeros((grid, grid), dtype=bool)
    for i, b in enumerate(bs):
        for j, g in enumerate(gs):
            a = alpha_fn(b, g)
            ok[i, j] = a is not None and np.isfinite(a) and keep((a, b, g))
    for i in range(grid - 1):
        for j in range(grid - 1):
            if ok[i, j] and ok[i + 1, j] and ok[i, j + 1]:
                faces.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            if ok[i + 1, j + 1] and ok[i + 1, j] and ok[i, j + 1]:
                faces.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return Mesh(name, verts, faces)


def default_meshes(grid: int = 41) -> list[Mesh]:
    rec = s3.reconcile()

    def from_resolved(name):
        r = rec.resolved[name]

        def fn(b, g):
            val, forced = r.candidate.bound(0.0, b, g)
            return None if forced is not None else val

        return fn

    return [
        pyramid_mesh(),
        surface_mesh("realign_cone", s3.realign_surface_alpha, grid),
        surface_mesh("ppt_upper", from_resolved("ppt2"), grid),
        surface_mesh("ppt_lower", from_resolved("ppt3"), grid),
    ]


def meshes_to_obj(meshes: list[Mesh]) -> str:
    lines = ["# Euclidean coordinates (a, b, c) of the three-parameter family"]
    offset = 1
    for m in meshes:
        lines.append(f"o {m.name}")
        lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in m.vertices]
        lines += [f"f {i + offset} {j + offset} {k + offset}" for i, j, k in m.faces]
        offset += len(m.vertices)
    return "\n".join(lines) + "\n"
