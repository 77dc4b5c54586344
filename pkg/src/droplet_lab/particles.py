"""Discrete weighted Fekete problem on the sphere.

``N`` unit vectors minimise

    E = sum_{i<j} -log|x_i - x_j| + N sum_i Q(x_i),
    Q(x) = -a (log|x - p1| + log|x - p2|),

where ``p1, p2`` are the lifted charges. The minimisers approximate the
equilibrium measure, which gives an independent brute-force check of the
predicted droplet.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .droplet import Droplet, build_droplet
from .geometry import geodesic_distance, inverse_stereo
from .line_equilibrium import ProblemParams
from .report import INCONCLUSIVE, VerificationReport, dumps

THREADS_ENV = "DROPLET_LAB_THREADS"
ARMIJO = 1e-4
_BLOCK = 128
_NORM_TOL = 1e-9


def thread_count() -> int:
    """Worker threads for energy evaluation, capped by ``DROPLET_LAB_THREADS``."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


def charge_vectors(params: ProblemParams) -> np.ndarray:
    return inverse_stereo(np.array(params.charge_points))


@dataclass
class Configuration:
    points: np.ndarray
    energy: float
    iterations: int
    converged: bool
    seed: int | None = None
    trace: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError("points must have shape (N, 3)")
        norms = np.linalg.norm(self.points, axis=1)
        if np.any(np.abs(norms - 1.0) > _NORM_TOL):
            raise ValueError("configuration points must be unit vectors")

    def __len__(self):
        return len(self.points)


# ---------------------------------------------------------------------------
# energy and gradient

def _blocks(n: int):
    return [(i, min(i + _BLOCK, n)) for i in range(0, n, _BLOCK)]


_POOLS: dict[int, ThreadPoolExecutor] = {}


def _pool(threads: int) -> ThreadPoolExecutor:
    if threads not in _POOLS:
        _POOLS[threads] = ThreadPoolExecutor(max_workers=threads)
    return _POOLS[threads]


def _run_blocks(fn, n: int, threads: int | None):
    # fixed-size blocks keep the summation order, hence the bits, independent
    # of the thread count
    blocks = _blocks(n)
    threads = thread_count() if threads is None else threads
    if threads == 1 or len(blocks) == 1:
        return [fn(*blk) for blk in blocks]
    return list(_pool(threads).map(lambda blk: fn(*blk), blocks))


def field_Q(params: ProblemParams | None, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if params is None:
        return np.zeros(x.shape[:-1])
    out = np.zeros(x.shape[:-1])
    with np.errstate(divide="ignore"):
        for c in charge_vectors(params):
            out -= params.a * np.log(np.linalg.norm(x - c, axis=-1))
    return out


def _field_grad(params: ProblemParams | None, x) -> np.ndarray:
    if params is None:
        return np.zeros_like(x)
    g = np.zeros_like(x)
    for c in charge_vectors(params):
        d = x - c
        g -= params.a * d / np.sum(d * d, axis=-1, keepdims=True)
    return g


def _pair_block(x: np.ndarray, i0: int, i1: int, want_grad: bool):
    cols = [x[i0:i1, k, None] - x[None, :, k] for k in range(3)]
    d2 = cols[0] * cols[0] + cols[1] * cols[1] + cols[2] * cols[2]
    rows = np.arange(i1 - i0)
    d2[rows, rows + i0] = 1.0
    if np.any(d2 == 0.0):
        return math.inf, None
    e = -0.25 * float(np.sum(np.log(d2)))
    if not want_grad:
        return e, None
    inv = 1.0 / d2
    g = np.stack([-np.sum(c * inv, axis=1) for c in cols], axis=1)
    return e, g


def _energy_grad(x: np.ndarray, params: ProblemParams | None, want_grad: bool,
                 threads: int | None = None):
    n = len(x)
    parts = _run_blocks(lambda i0, i1: _pair_block(x, i0, i1, want_grad), n, threads)
    e = 0.0
    for pe, _ in parts:
        e += pe
    if not math.isfinite(e):
        return math.inf, None
    q = field_Q(params, x)
    if not np.all(np.isfinite(q)):
        return math.inf, None
    e += n * float(np.sum(q))
    if not want_grad:
        return e, None
    g = np.concatenate([pg for _, pg in parts]) + n * _field_grad(params, x)
    return e, g


def _points_of(config) -> np.ndarray:
    if isinstance(config, Configuration):
        return config.points
    return np.asarray(config, dtype=float)


def discrete_energy(config, params: ProblemParams | None, threads: int | None = None) -> float:
    """Weighted discrete energy; ``+inf`` for coincident points or a point
    sitting on a charge. ``params=None`` means ``Q = 0``."""
    x = _points_of(config)
    if len(x) < 2:
        raise ValueError("need at least two points")
    return _energy_grad(x, params, False, threads)[0]


def energy_gradient(config, params: ProblemParams | None, threads: int | None = None) -> np.ndarray:
    """Euclidean gradient of :func:`discrete_energy` (shape ``(N, 3)``)."""
    x = _points_of(config)
    e, g = _energy_grad(x, params, True, threads)
    if g is None:
        raise ValueError("energy is infinite at this configuration")
    return g


def tangent_gradient(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return g - np.sum(g * x, axis=1, keepdims=True) * x


def gradient_check(config, params: ProblemParams | None, rng: np.random.Generator,
                   n_dirs: int = 3, h: float = 1e-6) -> float:
    """Largest relative gap between the analytic directional derivative and
    a central difference along random directions."""
    x = _points_of(config)
    g = energy_gradient(x, params, threads=1)
    worst = 0.0
    for _ in range(n_dirs):
        v = rng.standard_normal(x.shape)
        v /= np.linalg.norm(v)
        exact = float(np.sum(g * v))
        fd = (discrete_energy(x + h * v, params, 1) - discrete_energy(x - h * v, params, 1)) / (2 * h)
        worst = max(worst, abs(fd - exact) / max(abs(exact), abs(fd)))
    return worst


# ---------------------------------------------------------------------------
# optimisation

def _normalize(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def uniform_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    return _normalize(rng.standard_normal((n, 3)))


def initial_points(n: int, params: ProblemParams | None, rng: np.random.Generator,
                   noise: float = 0.1) -> np.ndarray:
    """Points drawn from the predicted droplet plus a uniform fraction."""
    if params is None:
        return uniform_sphere(n, rng)
    droplet = build_droplet(params)
    n_noise = int(round(noise * n))
    inside = []
    need = n - n_noise
    while need > 0:
        cand = uniform_sphere(max(4 * need, 64), rng)
        cand = cand[droplet.contains_sphere(cand)][:need]
        inside.append(cand)
        need -= len(cand)
    return np.concatenate(inside + [uniform_sphere(n_noise, rng)])


def _descend(x: np.ndarray, params, max_iters: int, gtol: float, threads, snapshots):
    n = len(x)
    e, g = _energy_grad(x, params, True, threads)
    gt = tangent_gradient(x, g)
    trace = [e]
    step = 1.0 / n
    prev = None
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        gnorm2 = float(np.sum(gt * gt))
        if math.sqrt(np.max(np.sum(gt * gt, axis=1))) <= gtol * n:
            converged = True
            it -= 1
            break
        if prev is not None:
            # Barzilai-Borwein guess for the first trial step
            dx, dg = x - prev[0], gt - prev[1]
            denom = float(np.sum(dx * dg))
            if denom > 0:
                step = float(np.sum(dx * dx)) / denom
        while True:
            trial = _normalize(x - step * gt)
            et, gtrial = _energy_grad(trial, params, True, threads)
            if et <= e - ARMIJO * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-300:
                return x, e, trace, it, False
        prev = (x, gt)
        x, e = trial, et
        gt = tangent_gradient(x, gtrial)
        trace.append(e)
        if snapshots is not None:
            snapshots.append(x)
        if len(trace) > 20 and trace[-21] - e <= 1e-15 * abs(e):
            converged = True
            break
    return x, e, trace, it, converged


def minimize(N: int, params: ProblemParams | None, seed: int = 0, restarts: int = 1,
             max_iters: int = 5000, gtol: float = 1e-7, threads: int | None = None,
             snapshots: list | None = None) -> Configuration:
    """Projected gradient descent with Armijo backtracking, best of
    ``restarts`` independently seeded starts."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for ss in seeds:
        rng = np.random.default_rng(ss)
        x0 = initial_points(N, params, rng)
        x, e, trace, it, ok = _descend(x0, params, max_iters, gtol, threads, snapshots)
        if best is None or e < best.energy:
            best = Configuration(x, e, it, ok, seed, trace)
    return best


# ---------------------------------------------------------------------------
# comparison with the analytic droplet

def boundary_distance(droplet: Droplet, xyz, n_boundary: int = 4096) -> np.ndarray:
    """Geodesic distance from each point to the droplet boundary."""
    xyz = np.atleast_2d(np.asarray(xyz, dtype=float))
    if droplet.shape != "ellipse":
        d = np.full(len(xyz), math.inf)
        for cap in droplet.caps:
            d = np.minimum(d, np.abs(geodesic_distance(xyz, cap.center.as_array()) - cap.geodesic_radius))
        return d
    bnd = droplet.boundary_sample(n_boundary).xyz
    cos = np.clip(xyz @ bnd.T, -1.0, 1.0)
    return np.arccos(np.max(cos, axis=1))


def fraction_inside(config, droplet: Droplet, slack: float = 0.03) -> float:
    """Share of points in ``D`` or within ``slack`` (geodesic) of it."""
    x = _points_of(config)
    ok = droplet.contains_sphere(x) | (boundary_distance(droplet, x) <= slack)
    return float(np.mean(ok))


def fraction_in_caps(config, params: ProblemParams, slack: float = 0.03) -> float:
    """Share of points deeper than ``slack`` inside either predicted cap."""
    from .droplet import cap_pair
    x = _points_of(config)
    hit = np.zeros(len(x), dtype=bool)
    for cap in cap_pair(params):
        hit |= geodesic_distance(x, cap.center.as_array()) < cap.geodesic_radius - slack
    return float(np.mean(hit))


def equal_area_cells(bins: int) -> list[tuple[float, float, float, float]]:
    """``bins`` bands uniform in ``x3`` times ``2 bins`` longitude sectors;
    by Archimedes every cell has area ``1/(2 bins^2)``."""
    z = np.linspace(-1.0, 1.0, bins + 1)
    phi = np.linspace(-np.pi, np.pi, 2 * bins + 1)
    return [(z[i], z[i + 1], phi[j], phi[j + 1]) for i in range(bins) for j in range(2 * bins)]


def _cell_probe(cell, k: int = 9) -> np.ndarray:
    z0, z1, f0, f1 = cell
    zz, ff = np.meshgrid(np.linspace(z0, z1, k), np.linspace(f0, f1, k))
    rr = np.sqrt(np.clip(1.0 - zz ** 2, 0.0, None))
    return np.stack([rr * np.cos(ff), rr * np.sin(ff), zz], axis=-1).reshape(-1, 3)


def empirical_density_check(config, droplet: Droplet | None, bins: int = 6,
                            margin: float = 0.1, tol: float = 0.25,
                            min_count: int = 10) -> VerificationReport:
    """Counts per equal-area cell lying at least ``margin`` inside ``D``.

    ``droplet=None`` means ``D`` is the whole sphere. The residual is the
    largest relative deviation of a count from the mean count.
    """
    x = _points_of(config)
    kept = []
    for cell in equal_area_cells(bins):
        if droplet is not None:
            probe = _cell_probe(cell)
            if not np.all(droplet.contains_sphere(probe)):
                continue
            if np.min(boundary_distance(droplet, probe)) < margin:
                continue
        kept.append(cell)
    phi = np.arctan2(x[:, 1], x[:, 0])
    counts = []
    for z0, z1, f0, f1 in kept:
        sel = (x[:, 2] >= z0) & (x[:, 2] < z1) & (phi >= f0) & (phi < f1)
        counts.append(int(np.sum(sel)))
    counts = np.array(counts, dtype=float)
    grid = f"{len(kept)} of {2 * bins * bins} equal-area cells, margin {margin}"
    details = {"counts": counts.astype(int).tolist(), "cells": len(kept)}
    if len(counts) == 0 or np.min(counts) < min_count:
        return VerificationReport("empirical_density", grid, {}, math.nan, math.nan, tol,
                                  details=details, status=INCONCLUSIVE)
    mean = float(np.mean(counts))
    dev = float(np.max(np.abs(counts - mean)) / mean)
    return VerificationReport("empirical_density", grid, {"mean_count": mean}, dev, 0.0, tol,
                              details=details)


def continuum_energy(params: ProblemParams) -> float:
    """Weighted energy ``I_Q`` of the equilibrium measure ``(1+2a) lambda_D``.

    From the Frostman equality ``I_Q = l_a + int Q dmu`` and, by the
    mirror symmetry, ``int Q dmu = 2a(1+2a) U^{lambda_D}(p1)``.
    """
    droplet = build_droplet(params)
    region = droplet.region()
    a, m = params.a, 1.0 + 2.0 * params.a
    if droplet.shape == "ellipse":
        x0 = np.array([0.0, 0.0, -1.0])
    else:
        x0 = np.array([1.0, 0.0, 0.0])
    p1 = charge_vectors(params)[0]
    u = region.potential(np.stack([x0, p1]))
    ell = m * u[0] + field_Q(params, x0)
    return float(ell + 2.0 * a * m * u[1])


def mirror(config) -> np.ndarray:
    """Reflection across the plane ``x2 = 0`` of the equidistant great circle."""
    x = _points_of(config).copy()
    x[:, 1] *= -1.0
    return x


# ---------------------------------------------------------------------------
# export

def write_csv(config: Configuration, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x1,x2,x3\n")
        for p in config.points:
            fh.write(",".join(format(float(v), ".17g") for v in p) + "\n")


def read_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "x1,x2,x3":
            raise ValueError(f"unexpected header {header!r}")
        return np.loadtxt(fh, delimiter=",", ndmin=2)


def config_record(config: Configuration, params: ProblemParams | None) -> dict:
    return {
        "N": len(config),
        "b": None if params is None else params.b,
        "a": None if params is None else params.a,
        "seed": config.seed,
        "energy": config.energy,
        "iterations": config.iterations,
        "converged": config.converged,
        "points": config.points.tolist(),
    }


def write_json(config: Configuration, params: ProblemParams | None, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(config_record(config, params)) + "\n")


def read_json(path) -> tuple[Configuration, dict]:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    cfg = Configuration(np.array(rec["points"], dtype=float), float(rec["energy"]),
                        int(rec["iterations"]), bool(rec["converged"]), rec["seed"])
    return cfg, rec
