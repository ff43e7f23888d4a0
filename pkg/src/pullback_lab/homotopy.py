"""Homotopies between smooth maps: reversal, composition and steadification."""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EndpointMismatch, NotSteady
from .geometry import (Manifold, PathT, Point, SmoothMap, compose_maps, constant_map, disk,
                       degree_map, identity_map, make_path, rotation_map, rotation_matrix, sphere)
from .sampling import halton

ENDPOINT_TOL = 1e-9
ENDPOINT_SAMPLES = 32
PHI_CELLS = 2**14
_LO, _HI = 1.0 / 3.0, 2.0 / 3.0


# ---- smoothing reparametrisation ------------------------------------------------


def bump(s):
    """``exp(1/((s-1/3)(s-2/3)))`` on (1/3, 2/3), zero elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > _LO) & (s < _HI)
    out[inside] = np.exp(1.0 / ((s[inside] - _LO) * (s[inside] - _HI)))
    return out


@functools.lru_cache(maxsize=1)
def phi_normalization() -> float:
    """Integral of the bump over [0,1]: composite Simpson on 2**14 subintervals of [1/3, 2/3]."""
    x = np.linspace(_LO, _HI, PHI_CELLS + 1)
    f = bump(x)
    w = (_HI - _LO) / PHI_CELLS
    return float(w / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum()))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


@functools.lru_cache(maxsize=1)
def _phi_table() -> np.ndarray:
    """Cumulative bump integral at the cell edges (5-point Gauss per cell)."""
    w = (_HI - _LO) / PHI_CELLS
    lo = _LO + w * np.arange(PHI_CELLS)
    nodes = lo[:, None] + 0.5 * (_GL_X + 1) * w
    cells = 0.5 * w * (bump(nodes) * _GL_W).sum(axis=1)
    return np.concatenate([[0.0], np.cumsum(cells)])


def smoothing_phi(t):
    """Smooth monotone step: 0 on [0, 1/3], 1 on [2/3, 1]. Accepts scalars or arrays."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.where(t >= _HI, 1.0, 0.0)
    mid = (t > _LO) & (t < _HI)
    if mid.any():
        tm = t[mid]
        w = (_HI - _LO) / PHI_CELLS
        k = np.clip(np.floor((tm - _LO) / w).astype(int), 0, PHI_CELLS - 1)
        a = _LO + k * w
        half = 0.5 * (tm - a)
        nodes = a[:, None] + half[:, None] * (_GL_X + 1)
        partial = half * (bump(nodes) * _GL_W).sum(axis=1)
        out[mid] = np.minimum((_phi_table()[k] + partial) / phi_normalization(), 1.0)
    return float(out[0]) if scalar else out


# ---- homotopies -------------------------------------------------------------------

HomotopyBatch = Callable[[np.ndarray, Point], "tuple[np.ndarray, np.ndarray]"]


@dataclass(frozen=True, eq=False)
class Homotopy:
    """A map ``I x source -> target`` from ``f_end`` to ``g_end``.

    ``steady_margin`` is the epsilon for which the homotopy is constant on
    ``[0, eps]`` and ``[1-eps, 1]``; constructors are responsible for it.
    ``batch`` optionally evaluates many times for one source point at once.
    """

    source: Manifold
    target: Manifold
    func: Callable[[float, Point], Point]
    f_end: SmoothMap
    g_end: SmoothMap
    steady_margin: float = 0.0
    batch: HomotopyBatch | None = None
    name: str = ""

    def __call__(self, t: float, x: Point) -> Point:
        return self.func(t, x)


def constant_homotopy(f: SmoothMap) -> Homotopy:
    def batch(ts, x):
        y = f(x)
        return np.full(len(ts), y.chart_id), np.tile(y.coords, (len(ts), 1))

    return Homotopy(f.source, f.target, lambda t, x: f(x), f, f, 0.5, batch, name=f"const[{f.name}]")


def reverse(H: Homotopy) -> Homotopy:
    batch = None if H.batch is None else (lambda ts, x: H.batch(1.0 - np.asarray(ts), x))
    return Homotopy(H.source, H.target, lambda t, x: H.func(1.0 - t, x), H.g_end, H.f_end,
                    H.steady_margin, batch, name=f"rev[{H.name}]")


def maps_agree(f: SmoothMap, g: SmoothMap, samples: int = ENDPOINT_SAMPLES, tol: float = ENDPOINT_TOL) -> bool:
    m = f.source
    for x in m.sample(halton(samples, m.sample_dim)):
        if f.target.distance(f(x), g(x)) > tol:
            return False
    return True


def compose(K: Homotopy, H: Homotopy) -> Homotopy:
    """``K o H``: run H on [0, 1/2] at double speed, then K."""
    if H.steady_margin <= 0 or K.steady_margin <= 0:
        raise NotSteady("compose needs steady homotopies; steadify first")
    if not maps_agree(H.g_end, K.f_end):
        raise EndpointMismatch("end map of H differs from start map of K")

    def func(t, x):
        return H.func(2 * t, x) if t <= 0.5 else K.func(2 * t - 1, x)

    batch = None
    if H.batch is not None and K.batch is not None:
        def batch(ts, x):
            ts = np.asarray(ts, dtype=float)
            first = ts <= 0.5
            ids = np.empty(len(ts), dtype=int)
            coords = np.empty((len(ts), H.target.dim))
            if first.any():
                ids[first], coords[first] = H.batch(2 * ts[first], x)
            if (~first).any():
                ids[~first], coords[~first] = K.batch(2 * ts[~first] - 1, x)
            return ids, coords

    eps = 0.5 * min(H.steady_margin, K.steady_margin)
    return Homotopy(H.source, H.target, func, H.f_end, K.g_end, eps, batch, name=f"{K.name}o{H.name}")


def steadify(H: Homotopy) -> Homotopy:
    batch = None if H.batch is None else (lambda ts, x: H.batch(smoothing_phi(np.asarray(ts, dtype=float)), x))
    return Homotopy(H.source, H.target, lambda t, x: H.func(smoothing_phi(t), x), H.f_end, H.g_end,
                    1.0 / 3.0, batch, name=f"steady[{H.name}]")


def track(H: Homotopy, x: Point) -> PathT:
    """The path ``t -> H(t, x)`` with a sampled chart schedule."""
    batch = None if H.batch is None else (lambda ts: H.batch(ts, x))
    return make_path(H.target, lambda t: H.func(t, x), batch)


# ---- catalogue --------------------------------------------------------------------


def rotation_homotopy(f: SmoothMap, axis, angle: float) -> Homotopy:
    """``H(t, x) = R(axis, t * angle) f(x)`` on S2, from ``f`` to ``R(angle) o f``."""
    m = sphere()

    def func(t, x):
        return m.point_from_ambient(rotation_matrix(axis, t * angle) @ m.embed(f(x)))

    def batch(ts, x):
        X = m.embed(f(x))
        return m.locate(rotation_matrix(axis, np.asarray(ts) * angle) @ X)

    g = compose_maps(rotation_map(axis, angle), f)
    return Homotopy(f.source, m, func, f, g, 0.0, batch, name=f"rotate[{list(axis)},{angle:g}]")


def contraction_homotopy(center=(0.0, 0.0), f: SmoothMap | None = None) -> Homotopy:
    """Straight-line contraction onto ``center``: from ``f`` (default identity) to a constant."""
    m = disk()
    f = identity_map(m) if f is None else f
    c = np.asarray(center, dtype=float)
    const = constant_map(m, m, Point(0, c))

    def func(t, x):
        return Point(0, (1 - t) * f(x).coords + t * c)

    def batch(ts, x):
        ts = np.asarray(ts, dtype=float)[:, None]
        return np.zeros(len(ts), dtype=int), (1 - ts) * f(x).coords + ts * c

    return Homotopy(m, m, func, f, const, 0.0, batch, name="contract")


def disk_rotation_homotopy(angle: float) -> Homotopy:
    """Rotate the disk about its centre through ``t * angle``, starting at the identity."""
    m = disk()

    def rot(a):
        a = np.asarray(a, dtype=float)
        return np.stack([np.stack([np.cos(a), -np.sin(a)], -1), np.stack([np.sin(a), np.cos(a)], -1)], -2)

    def batch(ts, x):
        ts = np.asarray(ts, dtype=float)
        return np.zeros(len(ts), dtype=int), rot(ts * angle) @ x.coords

    R = rot(angle)
    end = SmoothMap(m, m, lambda p: Point(0, R @ p.coords), name=f"disk-rot({angle:g})",
                    batch=lambda ids, x: (np.zeros(len(ids), dtype=int), np.asarray(x) @ R.T))
    return Homotopy(m, m, lambda t, x: Point(0, rot(t * angle) @ x.coords), identity_map(m), end, 0.0,
                    batch, name=f"disk-rotate[{angle:g}]")


def is_constant_map(f: SmoothMap, samples: int = ENDPOINT_SAMPLES, tol: float = ENDPOINT_TOL) -> bool:
    pts = f.source.sample(halton(samples, f.source.sample_dim))
    y0 = f(pts[0])
    return all(f.target.distance(y0, f(x)) <= tol for x in pts[1:])


def _sphere_homotopies() -> dict[str, Homotopy]:
    m = sphere()
    rz = steadify(rotation_homotopy(identity_map(m), [0.0, 0.0, 1.0], 0.75 * np.pi))
    rx = steadify(rotation_homotopy(rz.g_end, [1.0, 0.0, 0.0], 0.6 * np.pi))
    d2z = steadify(rotation_homotopy(degree_map(2), [0.0, 0.0, 1.0], 0.5 * np.pi))
    d2y = steadify(rotation_homotopy(d2z.g_end, [0.0, 1.0, 0.0], 0.4 * np.pi))
    return {"rot-z": rz, "rot-x": rx, "deg2-rot-z": d2z, "deg2-rot-y": d2y,
            "const-rot-z-end": constant_homotopy(rz.g_end)}


def _disk_homotopies() -> dict[str, Homotopy]:
    rot = steadify(disk_rotation_homotopy(0.5 * np.pi))
    shrink = steadify(contraction_homotopy((0.2, -0.1), rot.g_end))
    return {"disk-rotate": rot, "disk-contract": shrink}


def homotopy_catalogue(base: str) -> dict[str, Homotopy]:
    """Steady homotopies on the named base manifold ("S2" or "D2")."""
    if base == "S2":
        return _sphere_homotopies()
    if base == "D2":
        return _disk_homotopies()
    raise KeyError(f"no homotopy catalogue for base {base!r}")


HOMOTOPY_PAIRS = {
    "S2": (("rot-z", "rot-x"), ("rot-z", "const-rot-z-end"), ("deg2-rot-z", "deg2-rot-y")),
    "D2": (("disk-rotate", "disk-contract"),),
}
"""Composable ``(H, K)`` pairs per base: ``H.g_end`` equals ``K.f_end``."""
