"""Charts, atlases, points, tangents, smooth maps and paths.

Every chart function is vectorised over leading axes: coordinates arrive as
arrays of shape ``(..., dim)``. The scalar `Point`/`Tangent` API is a thin
layer over those array kernels so the transport integrator can evaluate whole
time grids at once.

The shipped catalogue is fixed: the interval I, the circle S1 (two arc charts),
the closed disk D2 (one chart) and the sphere S2 (two stereographic charts,
north coordinate z and south coordinate w = 1/z).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ChartGap, DomainEscape, OutOfOverlap

PREFERRED_MARGIN = 0.1
FD_STEP = 1e-6
PATH_SCHEDULE_SAMPLES = 256

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Chart:
    id: int
    dim: int
    margin_fn: ArrayFn
    overlap_maps: Mapping[int, ArrayFn] = field(default_factory=dict)
    overlap_jacobians: Mapping[int, ArrayFn] = field(default_factory=dict)

    def margin(self, coords):
        """Signed distance-like margin; positive exactly on the open chart domain."""
        with np.errstate(all="ignore"):
            m = self.margin_fn(np.asarray(coords, dtype=float))
        return np.where(np.isnan(m), -np.inf, m)

    def contains(self, coords) -> bool:
        return bool(self.margin(coords) > 0)


@dataclass(frozen=True, eq=False)
class Point:
    chart_id: int
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __repr__(self):
        return f"Point(chart={self.chart_id}, coords={self.coords.tolist()})"


@dataclass(frozen=True, eq=False)
class Tangent:
    base: Point
    components: np.ndarray

    def __post_init__(self):
        c = np.array(self.components, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "components", c)


@dataclass(frozen=True, eq=False)
class Manifold:
    """A manifold with a finite atlas and an embedding used for sampling and comparison.

    ``embed_fns[i]`` maps chart-i coordinates into the ambient space and
    ``unembed_fns[i]`` is its inverse (NaN where chart i is undefined).
    ``sample_fn`` maps the unit cube of dimension ``sample_dim`` onto the
    manifold (in ambient coordinates).
    """

    name: str
    dim: int
    charts: tuple[Chart, ...]
    embed_fns: tuple[ArrayFn, ...]
    unembed_fns: tuple[ArrayFn, ...]
    sample_fn: ArrayFn
    sample_dim: int

    def chart(self, i: int) -> Chart:
        return self.charts[i]

    # ---- array kernels -------------------------------------------------

    def convert(self, ids, coords, target: int):
        """Re-express coordinates given in charts ``ids`` in chart ``target``.

        Returns ``(coords_out, ok)``; rows outside the overlap have ``ok`` False
        and unspecified coordinates.
        """
        ids = np.asarray(ids, dtype=int)
        coords = np.asarray(coords, dtype=float)
        out = np.array(coords, dtype=float, copy=True)
        for cid in np.unique(ids):
            if cid == target:
                continue
            rows = ids == cid
            fn = self.charts[cid].overlap_maps.get(target)
            if fn is None:
                out[rows] = np.nan
                continue
            with np.errstate(all="ignore"):
                out[rows] = fn(coords[rows])
        ok = np.ones(len(ids), dtype=bool)
        for cid in np.unique(ids):
            rows = ids == cid
            ok[rows] = self.charts[cid].margin(coords[rows]) > 0
        ok &= self.charts[target].margin(out) > 0
        return out, ok

    def convert_tangent(self, ids, coords, vel, target: int):
        ids = np.asarray(ids, dtype=int)
        coords = np.asarray(coords, dtype=float)
        vel = np.asarray(vel, dtype=float)
        out = np.array(vel, dtype=float, copy=True)
        for cid in np.unique(ids):
            if cid == target:
                continue
            rows = ids == cid
            with np.errstate(all="ignore"):
                jac = self.charts[cid].overlap_jacobians[target](coords[rows])
            out[rows] = np.einsum("nij,nj->ni", jac, vel[rows])
        return out

    def margins(self, coords_by_chart) -> np.ndarray:
        return np.stack([c.margin(x) for c, x in zip(self.charts, coords_by_chart)])

    def locate(self, ambient):
        """Preferred chart ids and coordinates for ambient points, shape ``(n, k)``."""
        ambient = np.atleast_2d(np.asarray(ambient, dtype=float))
        with np.errstate(all="ignore"):
            candidates = [fn(ambient) for fn in self.unembed_fns]
        margins = self.margins(candidates)
        ids = _preferred_from_margins(margins)
        coords = np.empty((len(ambient), self.dim))
        for cid, cand in enumerate(candidates):
            rows = ids == cid
            coords[rows] = cand[rows]
        return ids, coords

    def embed_array(self, ids, coords) -> np.ndarray:
        ids = np.asarray(ids, dtype=int)
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        out = None
        for cid in np.unique(ids):
            rows = ids == cid
            vals = self.embed_fns[cid](coords[rows])
            if out is None:
                out = np.empty((len(ids), vals.shape[-1]))
            out[rows] = vals
        return out

    def preferred_ids(self, ids, coords) -> np.ndarray:
        ids = np.asarray(ids, dtype=int)
        cands = []
        for c in self.charts:
            x, ok = self.convert(ids, coords, c.id)
            cands.append(np.where(ok[:, None], x, np.nan))
        return _preferred_from_margins(self.margins(cands))

    # ---- scalar API ----------------------------------------------------

    def embed(self, p: Point) -> np.ndarray:
        return self.embed_fns[p.chart_id](p.coords[None, :])[0]

    def to_preferred_array(self, ids, coords):
        ids = np.asarray(ids, dtype=int)
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        pref = self.preferred_ids(ids, coords)
        out = np.array(coords, copy=True)
        for c in np.unique(pref):
            rows = pref == c
            out[rows], _ = self.convert(ids[rows], coords[rows], int(c))
        return pref, out

    def point_from_ambient(self, x) -> Point:
        ids, coords = self.locate(np.asarray(x, dtype=float)[None, :])
        return Point(int(ids[0]), coords[0])

    def preferred_chart(self, p: Point) -> int:
        return int(self.preferred_ids([p.chart_id], p.coords[None, :])[0])

    def to_preferred(self, p: Point) -> Point:
        return change_chart(self, p, self.preferred_chart(p))

    def try_change_chart(self, p: Point, target: int) -> Point | None:
        out, ok = self.convert([p.chart_id], p.coords[None, :], target)
        return Point(target, out[0]) if ok[0] else None

    def sample(self, u) -> list[Point]:
        ids, coords = self.locate(self.sample_fn(np.atleast_2d(u)))
        return [Point(int(i), c) for i, c in zip(ids, coords)]

    def distance(self, p: Point, q: Point) -> float:
        """Chart-coordinate distance after moving ``q`` into ``p``'s chart (ambient fallback)."""
        q2 = self.try_change_chart(q, p.chart_id)
        if q2 is not None:
            return float(np.linalg.norm(p.coords - q2.coords))
        return float(np.linalg.norm(self.embed(p) - self.embed(q)))

    def __repr__(self):
        return f"Manifold({self.name!r})"


def _preferred_from_margins(margins: np.ndarray) -> np.ndarray:
    """Lowest chart with margin >= 0.1, else the greatest positive margin."""
    good = margins >= PREFERRED_MARGIN
    first_good = np.argmax(good, axis=0)
    best = np.argmax(margins, axis=0)
    ids = np.where(good.any(axis=0), first_good, best)
    if np.any(margins.max(axis=0) <= 0):
        raise ChartGap("point lies in no chart")
    return ids


# ---- operations ------------------------------------------------------------


def change_chart(m: Manifold, p: Point, target: int) -> Point:
    if target == p.chart_id:
        return p
    out = m.try_change_chart(p, target)
    if out is None:
        raise OutOfOverlap(f"{p!r} is not in chart {target} of {m.name}")
    return out


def change_chart_tangent(m: Manifold, v: Tangent, target: int) -> Tangent:
    base = change_chart(m, v.base, target)
    comp = m.convert_tangent([v.base.chart_id], v.base.coords[None, :], v.components[None, :], target)
    return Tangent(base, comp[0])


@dataclass(frozen=True, eq=False)
class SmoothMap:
    source: Manifold
    target: Manifold
    func: Callable[[Point], Point]
    jacobian: Callable[[Point], np.ndarray] | None = None
    name: str = ""
    batch: Callable[[np.ndarray, np.ndarray], "tuple[np.ndarray, np.ndarray]"] | None = None

    def __call__(self, p: Point) -> Point:
        return self.func(p)


def apply_map(f: SmoothMap, ids, coords):
    """Evaluate ``f`` on arrays of points; uses the vectorised form when present."""
    ids = np.asarray(ids, dtype=int)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if f.batch is not None:
        return f.batch(ids, coords)
    pts = [f(Point(int(i), c)) for i, c in zip(ids, coords)]
    return (np.array([p.chart_id for p in pts], dtype=int),
            np.array([p.coords for p in pts]).reshape(len(pts), f.target.dim))


def differential(f: SmoothMap, p: Point, v: Tangent) -> Tangent:
    """Push a tangent vector forward along ``f``.

    Central differences with step ``1e-6 * max(1, |coords|)`` unless ``f``
    carries an analytic Jacobian.
    """
    q = f(p)
    if v.base.chart_id != p.chart_id:
        v = change_chart_tangent(f.source, v, p.chart_id)
    if f.jacobian is not None:
        return Tangent(q, f.jacobian(p) @ v.components)
    h = FD_STEP * max(1.0, float(np.linalg.norm(p.coords)))
    for cid in [p.chart_id] + [c.id for c in f.source.charts if c.id != p.chart_id]:
        base = f.source.try_change_chart(p, cid)
        if base is None:
            continue
        vv = v if cid == p.chart_id else change_chart_tangent(f.source, v, cid)
        lo = base.coords - h * vv.components
        hi = base.coords + h * vv.components
        chart = f.source.chart(cid)
        if chart.contains(lo) and chart.contains(hi):
            break
    else:
        raise DomainEscape("difference stencil leaves every chart")
    q_lo = f.target.try_change_chart(f(Point(cid, lo)), q.chart_id)
    q_hi = f.target.try_change_chart(f(Point(cid, hi)), q.chart_id)
    if q_lo is None or q_hi is None:
        raise DomainEscape("image of the stencil leaves the chart of f(p)")
    return Tangent(q, (q_hi.coords - q_lo.coords) / (2 * h))


# ---- paths -------------------------------------------------------------------

BatchFn = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray]"]


@dataclass(frozen=True, eq=False)
class PathT:
    """A piecewise-smooth path I -> target with a chart schedule.

    Piece ``k`` covers ``[breakpoints[k], breakpoints[k+1]]`` and is expressed
    in chart ``charts[k]``. ``joints`` are the breakpoints where the path may
    fail to be smooth; the integrator never steps across them.
    """

    target: Manifold
    func: Callable[[float], Point]
    breakpoints: tuple[float, ...]
    charts: tuple[int, ...]
    joints: tuple[float, ...] = ()
    batch: BatchFn | None = None

    def piece_index(self, t, side: str = "right"):
        bp = np.asarray(self.breakpoints)
        idx = np.searchsorted(bp, t, side="right" if side == "right" else "left") - 1
        return np.clip(idx, 0, len(self.charts) - 1)

    def raw(self, ts: np.ndarray):
        """Points at ``ts`` in whatever chart the path function produced."""
        ts = np.asarray(ts, dtype=float)
        if self.batch is not None:
            return self.batch(ts)
        pts = [self.func(float(t)) for t in ts]
        return (np.array([p.chart_id for p in pts], dtype=int),
                np.array([p.coords for p in pts]).reshape(len(ts), self.target.dim))

    def coords_in_pieces(self, ts, pieces):
        """Coordinates at ``ts`` expressed in the chart of the given pieces."""
        ids, coords = self.raw(ts)
        charts = np.asarray(self.charts)[pieces]
        out = np.empty_like(coords)
        for c in np.unique(charts):
            rows = charts == c
            x, ok = self.target.convert(ids[rows], coords[rows], int(c))
            if not ok.all():
                raise ChartGap(f"path leaves chart {c} of its schedule")
            out[rows] = x
        return charts, out

    def __call__(self, t: float, side: str = "right") -> Point:
        k = int(self.piece_index(t, side))
        return change_chart(self.target, self.func(float(t)), self.charts[k])


def make_path(target: Manifold, func: Callable[[float], Point], batch: BatchFn | None = None,
              joints: Sequence[float] = (), n_samples: int = PATH_SCHEDULE_SAMPLES) -> PathT:
    """Build a path, deriving its chart schedule from ``n_samples`` evaluations."""
    joints = tuple(sorted(float(j) for j in joints if 0.0 < j < 1.0))
    ts = np.unique(np.concatenate([np.linspace(0.0, 1.0, n_samples), joints]))
    probe = PathT(target, func, (0.0, 1.0), (0,), (), batch)
    ids, coords = probe.raw(ts)
    pref = target.preferred_ids(ids, coords)
    breakpoints = [0.0]
    charts = [int(pref[0])]
    joint_set = set(joints)
    for k in range(1, len(ts)):
        t = float(ts[k])
        if t in joint_set:
            breakpoints.append(t)
            charts.append(int(pref[k]))
        elif pref[k] != charts[-1]:
            for b, c in _chart_switches(probe, float(ts[k - 1]), charts[-1], t, int(pref[k])):
                breakpoints.append(b)
                charts.append(c)
    breakpoints.append(1.0)
    return PathT(target, func, tuple(float(b) for b in breakpoints), tuple(charts), joints, batch)


def _chart_switches(probe: PathT, t0: float, c0: int, t1: float, c1: int):
    """Locate preferred-chart changes in ``(t0, t1]`` by batched multisection."""
    m = probe.target

    def pref(ts):
        return m.preferred_ids(*probe.raw(np.asarray(ts, dtype=float)))

    out = []
    lo, c = t0, c0
    while c != c1 and len(out) < 8:
        a, b = lo, t1
        while b - a > 1e-13:
            grid = np.linspace(a, b, 33)
            changed = np.nonzero(pref(grid[1:]) != c)[0]
            k = int(changed[0]) if len(changed) else 31
            a, b = grid[k], grid[k + 1]
        c = int(pref([b])[0]) if b < t1 else c1
        out.append((float(b), c))
        lo = b
    return out


def _stencil(t: np.ndarray, a: np.ndarray, b: np.ndarray, h: float):
    """Stencil offsets (3 columns) and weights for a second-order derivative at ``t``."""
    n = len(t)
    offs = np.tile(np.array([-h, 0.0, h]), (n, 1))
    wts = np.tile(np.array([-0.5, 0.0, 0.5]) / h, (n, 1))
    fwd = t - h < a
    bwd = ~fwd & (t + h > b)
    offs[fwd] = [0.0, h, 2 * h]
    wts[fwd] = np.array([-1.5, 2.0, -0.5]) / h
    offs[bwd] = [-2 * h, -h, 0.0]
    wts[bwd] = np.array([0.5, -2.0, 1.5]) / h
    return offs, wts


def path_states(alpha: PathT, ts, sides=None):
    """Positions and velocities along ``alpha`` at many times.

    Returns ``(charts, coords, velocities)``; each time uses the chart of its
    schedule piece and a difference stencil that never crosses a breakpoint.
    """
    ts = np.asarray(ts, dtype=float)
    if sides is None:
        pieces = alpha.piece_index(ts, "right")
    else:
        right = alpha.piece_index(ts, "right")
        left = alpha.piece_index(ts, "left")
        pieces = np.where(np.asarray(sides) == "left", left, right)
    bp = np.asarray(alpha.breakpoints)
    offs, wts = _stencil(ts, bp[pieces], bp[pieces + 1], FD_STEP)
    stencil_t = np.clip((ts[:, None] + offs).reshape(-1), 0.0, 1.0)
    charts, coords = alpha.coords_in_pieces(stencil_t, np.repeat(pieces, 3))
    coords = coords.reshape(len(ts), 3, -1)
    # exact position: the stencil column with zero offset
    pos_col = np.argmin(np.abs(offs), axis=1)
    pos = coords[np.arange(len(ts)), pos_col]
    vel = np.einsum("nk,nkd->nd", wts, coords)
    return charts.reshape(len(ts), 3)[:, 0], pos, vel


def path_velocity(alpha: PathT, t: float, side: str = "right") -> Tangent:
    charts, pos, vel = path_states(alpha, np.array([t]), None if side == "right" else ["left"])
    return Tangent(Point(int(charts[0]), pos[0]), vel[0])


def constant_path(m: Manifold, p: Point) -> PathT:
    p = m.to_preferred(p)

    def batch(ts):
        n = len(ts)
        return np.full(n, p.chart_id), np.tile(p.coords, (n, 1))

    return PathT(m, lambda t: p, (0.0, 1.0), (p.chart_id,), (), batch)


def reverse_path(alpha: PathT) -> PathT:
    batch = None if alpha.batch is None else (lambda ts: alpha.batch(1.0 - np.asarray(ts)))
    return make_path(alpha.target, lambda t: alpha.func(1.0 - t), batch,
                     joints=[1.0 - j for j in alpha.joints])


def reparametrize(alpha: PathT, phi: Callable) -> PathT:
    """The path ``t -> alpha(phi(t))`` for a monotone ``phi`` with phi(0)=0, phi(1)=1."""
    joints = [_monotone_preimage(phi, j) for j in alpha.joints]
    batch = None if alpha.batch is None else (lambda ts: alpha.batch(np.asarray(phi(np.asarray(ts)), dtype=float)))
    return make_path(alpha.target, lambda t: alpha.func(float(phi(t))), batch, joints=joints)


def _monotone_preimage(phi: Callable, y: float) -> float:
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(phi(mid)) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---- catalogue ---------------------------------------------------------------

S2_CHART_RADIUS = 3.0
DISK_CHART_RADIUS = 1.25


def _inversion(c: np.ndarray) -> np.ndarray:
    r2 = c[..., 0] ** 2 + c[..., 1] ** 2
    return np.stack([c[..., 0] / r2, -c[..., 1] / r2], axis=-1)


def _inversion_jacobian(c: np.ndarray) -> np.ndarray:
    z = c[..., 0] + 1j * c[..., 1]
    k = -1.0 / z**2
    return np.stack([np.stack([k.real, -k.imag], -1), np.stack([k.imag, k.real], -1)], -2)


def _stereo_margin(c: np.ndarray) -> np.ndarray:
    return S2_CHART_RADIUS - np.hypot(c[..., 0], c[..., 1])


def _north_embed(c):
    x, y = c[..., 0], c[..., 1]
    r2 = x * x + y * y
    return np.stack([2 * x, -2 * y, 1 - r2], -1) / (1 + r2)[..., None]


def _south_embed(c):
    u, v = c[..., 0], c[..., 1]
    r2 = u * u + v * v
    return np.stack([2 * u, 2 * v, r2 - 1], -1) / (1 + r2)[..., None]


def _north_unembed(X):
    d = 1 + X[..., 2]
    return np.stack([X[..., 0] / d, -X[..., 1] / d], -1)


def _south_unembed(X):
    d = 1 - X[..., 2]
    return np.stack([X[..., 0] / d, X[..., 1] / d], -1)


def _sphere_sample(u):
    z = 1 - 2 * u[:, 0]
    ph = 2 * np.pi * u[:, 1]
    s = np.sqrt(np.clip(1 - z * z, 0, None))
    return np.stack([s * np.cos(ph), s * np.sin(ph), z], -1)


@functools.lru_cache(maxsize=None)
def sphere() -> Manifold:
    """S2 with north chart z (north pole at z=0) and south chart w = 1/z.

    The embedding is oriented so that the azimuth equals ``arg w = -arg z``.
    """
    north = Chart(0, 2, _stereo_margin, {1: _inversion}, {1: _inversion_jacobian})
    south = Chart(1, 2, _stereo_margin, {0: _inversion}, {0: _inversion_jacobian})
    return Manifold("S2", 2, (north, south), (_north_embed, _south_embed),
                    (_north_unembed, _south_unembed), _sphere_sample, 2)


def _arc0_to_1(c):
    return np.where(c < 0, c + 2 * np.pi, c)


def _arc1_to_0(c):
    return np.where(c > np.pi, c - 2 * np.pi, c)


def _unit_jac(c):
    return np.ones(c.shape[:-1] + (1, 1))


@functools.lru_cache(maxsize=None)
def circle() -> Manifold:
    """S1 with angle charts on (-pi, pi) and (0, 2pi)."""
    arc0 = Chart(0, 1, lambda c: np.pi - np.abs(c[..., 0]), {1: _arc0_to_1}, {1: _unit_jac})
    arc1 = Chart(1, 1, lambda c: np.pi - np.abs(c[..., 0] - np.pi), {0: _arc1_to_0}, {0: _unit_jac})

    def embed(c):
        return np.stack([np.cos(c[..., 0]), np.sin(c[..., 0])], -1)

    def unembed0(X):
        return np.arctan2(X[..., 1], X[..., 0])[..., None]

    def unembed1(X):
        return np.mod(np.arctan2(X[..., 1], X[..., 0]), 2 * np.pi)[..., None]

    def sample(u):
        return embed(2 * np.pi * u[:, :1])

    return Manifold("S1", 1, (arc0, arc1), (embed, embed), (unembed0, unembed1), sample, 1)


@functools.lru_cache(maxsize=None)
def disk() -> Manifold:
    """Closed unit disk; its single chart is the open disk of radius 1.25."""
    chart = Chart(0, 2, lambda c: DISK_CHART_RADIUS - np.hypot(c[..., 0], c[..., 1]))

    def sample(u):
        r = np.sqrt(u[:, 0])
        a = 2 * np.pi * u[:, 1]
        return np.stack([r * np.cos(a), r * np.sin(a)], -1)

    ident = lambda c: np.array(c, dtype=float)  # noqa: E731
    return Manifold("D2", 2, (chart,), (ident,), (ident,), sample, 2)


@functools.lru_cache(maxsize=None)
def interval() -> Manifold:
    chart = Chart(0, 1, lambda c: np.minimum(c[..., 0] + 0.25, 1.25 - c[..., 0]))
    ident = lambda c: np.array(c, dtype=float)  # noqa: E731
    return Manifold("I", 1, (chart,), (ident,), (ident,), lambda u: u[:, :1], 1)


MANIFOLDS = {"I": interval, "S1": circle, "D2": disk, "S2": sphere}


# ---- catalogue maps ----------------------------------------------------------


def identity_map(m: Manifold) -> SmoothMap:
    return SmoothMap(m, m, lambda p: p, lambda p: np.eye(m.dim), name="identity",
                     batch=lambda ids, x: (np.asarray(ids), np.asarray(x)))


def constant_map(source: Manifold, target: Manifold, q: Point) -> SmoothMap:
    q = target.to_preferred(q)

    def batch(ids, x):
        return np.full(len(ids), q.chart_id), np.tile(q.coords, (len(ids), 1))

    return SmoothMap(source, target, lambda p: q,
                     lambda p: np.zeros((target.dim, source.dim)), name="constant", batch=batch)


def compose_maps(g: SmoothMap, f: SmoothMap) -> SmoothMap:
    """``g o f``."""
    batch = None
    if f.batch is not None and g.batch is not None:
        batch = lambda ids, x: g.batch(*f.batch(ids, x))  # noqa: E731
    return SmoothMap(f.source, g.target, lambda p: g(f(p)), name=f"{g.name}o{f.name}", batch=batch)


def rotation_matrix(axis, angle) -> np.ndarray:
    """Rodrigues rotation; ``angle`` may be an array, giving shape ``(..., 3, 3)``."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    a = np.asarray(angle, dtype=float)[..., None, None]
    return np.eye(3) + np.sin(a) * K + (1 - np.cos(a)) * (K @ K)


def rotation_map(axis, angle: float) -> SmoothMap:
    m = sphere()
    R = rotation_matrix(axis, angle)

    def batch(ids, x):
        return m.locate(m.embed_array(ids, x) @ R.T)

    return SmoothMap(m, m, lambda p: m.point_from_ambient(R @ m.embed(p)),
                     name=f"rot({list(axis)},{angle:g})", batch=batch)


def degree_map(k: int) -> SmoothMap:
    """A degree-k self-map of S2.

    ``z -> z**k`` for k >= 0 and ``z -> conj(z)**|k|`` for k < 0, in either
    stereographic chart. Both restrict to ``z -> z**k`` on the unit circle |z| = 1.
    """
    m = sphere()

    def batch(ids, x):
        zeta = x[:, 0] + 1j * x[:, 1]
        out = zeta**k if k >= 0 else np.conj(zeta) ** (-k)
        ids = np.array(ids, dtype=int, copy=True)
        flip = np.abs(out) > 1.0
        out[flip] = 1.0 / out[flip]
        ids[flip] = 1 - ids[flip]
        return m.to_preferred_array(ids, np.stack([out.real, out.imag], -1))

    def func(p: Point) -> Point:
        ids, x = batch(np.array([p.chart_id]), p.coords[None, :])
        return Point(int(ids[0]), x[0])

    return SmoothMap(m, m, func, name=f"degree({k})", batch=batch)


def angle_doubling() -> SmoothMap:
    m = circle()

    def func(p: Point) -> Point:
        th = 2.0 * _angle(m, p)
        return m.point_from_ambient([math.cos(th), math.sin(th)])

    return SmoothMap(m, m, func, name="angle-doubling")


def _angle(m: Manifold, p: Point) -> float:
    x, y = m.embed(p)
    return math.atan2(y, x)


# ---- catalogue paths -----------------------------------------------------------


def ambient_path(m: Manifold, curve: Callable[[np.ndarray], np.ndarray]) -> PathT:
    """Path from a vectorised ambient curve ``ts -> (n, k)``."""
    def batch(ts):
        return m.locate(curve(np.atleast_1d(np.asarray(ts, dtype=float))))

    def func(t):
        ids, x = batch(np.array([t]))
        return Point(int(ids[0]), x[0])

    return make_path(m, func, batch)


def sphere_arc(start, axis, angle: float) -> PathT:
    """Rotate the ambient point ``start`` about ``axis`` through ``t * angle``."""
    X = np.asarray(start, dtype=float)
    return ambient_path(sphere(), lambda ts: rotation_matrix(axis, ts * angle) @ X)


def equator_arc(angle: float, start: float = 0.0) -> PathT:
    """Unit-speed-in-azimuth arc along the equator of S2 from azimuth ``start``."""
    def curve(ts):
        a = start + angle * ts
        return np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], -1)

    return ambient_path(sphere(), curve)


def circle_arc(theta0: float, angle: float) -> PathT:
    def curve(ts):
        a = theta0 + angle * ts
        return np.stack([np.cos(a), np.sin(a)], -1)

    return ambient_path(circle(), curve)


def disk_segment(a, b) -> PathT:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return ambient_path(disk(), lambda ts: (1 - ts)[:, None] * a + ts[:, None] * b)
