"""Principal bundles stored as cocycle data over a cover of the base.

Convention: a total point ``(i, x, g)`` has group coordinate ``g`` in
trivialisation ``i``, and trivialisations are related by ``g_i = g_ij(x) g_j``.
Moving to trivialisation ``j`` therefore multiplies on the left by ``g_ji(x)``.
Every cover set and every transition function lives in one chart of the
base, and receives coordinates in that chart.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import group as grp
from .errors import EmptyCover, OutOfCover, OutOfOverlap, TagMismatch
from .geometry import FD_STEP, Manifold, Point, SmoothMap, apply_map, disk, sphere
from .group import GroupElement
from .sampling import halton

DEFAULT_SAMPLES = 1000


@dataclass(frozen=True, eq=False)
class CoverSet:
    chart: int
    margin_fn: Callable[[np.ndarray], np.ndarray]
    label: tuple = ()


@dataclass(frozen=True, eq=False)
class Transition:
    """``g_ij`` on the overlap, as a function of coordinates in ``chart``."""

    chart: int
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True, eq=False)
class PrincipalBundle:
    name: str
    base: Manifold
    tag: str
    cover: tuple[CoverSet, ...]
    transitions: Mapping[tuple[int, int], Transition] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return grp.DIM[self.tag]

    def __repr__(self):
        return f"PrincipalBundle({self.name!r}, base={self.base.name}, group={self.tag}, cover={len(self.cover)})"


@dataclass(frozen=True, eq=False)
class TotalPoint:
    cover_index: int
    base: Point
    g: GroupElement


@dataclass(frozen=True)
class CocycleReport:
    max_violation: float
    samples: int
    passed: bool
    tolerance: float


# ---- array kernels -------------------------------------------------------------


def cover_margins(b: PrincipalBundle, ids, coords) -> np.ndarray:
    """Margins of every cover set at the given points, shape ``(n_cover, n)``."""
    ids = np.asarray(ids, dtype=int)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    out = np.full((len(b.cover), len(ids)), -np.inf)
    for k, cs in enumerate(b.cover):
        x, ok = b.base.convert(ids, coords, cs.chart)
        if ok.any():
            with np.errstate(all="ignore"):
                m = np.asarray(cs.margin_fn(x[ok]), dtype=float)
            out[k, ok] = np.where(np.isnan(m), -np.inf, m)
    return out


def cover_margin(b: PrincipalBundle, i: int, p: Point) -> float:
    return float(cover_margins(b, [p.chart_id], p.coords[None, :])[i, 0])


def transition_values(b: PrincipalBundle, i: int, j: int, ids, coords) -> np.ndarray:
    ids = np.asarray(ids, dtype=int)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if i == j:
        return np.broadcast_to(np.eye(b.dim, dtype=complex), (len(ids), b.dim, b.dim)).copy()
    tr = b.transitions[(i, j)]
    x, ok = b.base.convert(ids, coords, tr.chart)
    if not ok.all():
        raise OutOfOverlap(f"transition ({i},{j}) evaluated outside chart {tr.chart}")
    return np.asarray(tr.value(x), dtype=complex).reshape(len(ids), b.dim, b.dim)


def transition_derivatives(b: PrincipalBundle, i: int, j: int, ids, coords, vel) -> np.ndarray:
    """``dg_ij(v)`` at the given points; analytic when the transition supplies it."""
    ids = np.asarray(ids, dtype=int)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    vel = np.atleast_2d(np.asarray(vel, dtype=float))
    n, d = len(ids), b.dim
    if i == j:
        return np.zeros((n, d, d), dtype=complex)
    tr = b.transitions[(i, j)]
    x, ok = b.base.convert(ids, coords, tr.chart)
    if not ok.all():
        raise OutOfOverlap(f"transition ({i},{j}) differentiated outside chart {tr.chart}")
    v = b.base.convert_tangent(ids, coords, vel, tr.chart)
    if tr.derivative is not None:
        return np.asarray(tr.derivative(x, v), dtype=complex).reshape(n, d, d)
    h = FD_STEP * np.maximum(1.0, np.linalg.norm(x, axis=1))[:, None]
    hi = np.asarray(tr.value(x + h * v), dtype=complex).reshape(n, d, d)
    lo = np.asarray(tr.value(x - h * v), dtype=complex).reshape(n, d, d)
    return (hi - lo) / (2 * h[:, :, None])


def transition(b: PrincipalBundle, i: int, j: int, p: Point) -> GroupElement:
    return GroupElement(b.tag, transition_values(b, i, j, [p.chart_id], p.coords[None, :])[0])


def overlap_samples(b: PrincipalBundle, samples: int):
    """Low-discrepancy base points with their cover margins."""
    u = halton(samples, b.base.sample_dim)
    ids, coords = b.base.locate(b.base.sample_fn(u))
    return ids, coords, cover_margins(b, ids, coords)


# ---- operations ------------------------------------------------------------------


def validate_cocycle(b: PrincipalBundle, samples: int = DEFAULT_SAMPLES, tol: float = 1e-9) -> CocycleReport:
    """Max of ``|g_ij g_jk - g_ik|`` over sampled triple overlaps (pairs included)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ids, coords, margins = overlap_samples(b, samples)
    inside = margins > 0
    n_cov = len(b.cover)
    cache: dict[tuple[int, int], np.ndarray] = {}

    def values(i, j, rows):
        key = (i, j)
        if key not in cache:
            both = inside[i] & inside[j]
            full = np.full((len(ids), b.dim, b.dim), np.nan, dtype=complex)
            if both.any():
                full[both] = transition_values(b, i, j, ids[both], coords[both])
            cache[key] = full
        return cache[key][rows]

    worst = 0.0
    for i in range(n_cov):
        for j in range(n_cov):
            for k in range(n_cov):
                rows = inside[i] & inside[j] & inside[k]
                if not rows.any():
                    continue
                lhs = values(i, j, rows) @ values(j, k, rows)
                dev = np.linalg.norm(lhs - values(i, k, rows), axis=(1, 2))
                worst = max(worst, float(np.max(dev)))
    return CocycleReport(worst, samples, worst <= tol, tol)


def right_action(b: PrincipalBundle, p: TotalPoint, g: GroupElement) -> TotalPoint:
    if p.g.tag != g.tag or g.tag != b.tag:
        raise TagMismatch(f"{p.g.tag} acted on by {g.tag}")
    return TotalPoint(p.cover_index, p.base, grp.multiply(p.g, g))


def change_trivialization(b: PrincipalBundle, p: TotalPoint, target: int) -> TotalPoint:
    if target == p.cover_index:
        return p
    m = cover_margins(b, [p.base.chart_id], p.base.coords[None, :])[:, 0]
    if not (m[p.cover_index] > 0 and m[target] > 0):
        raise OutOfOverlap(f"base point not in cover sets {p.cover_index} and {target}")
    g_ji = transition(b, target, p.cover_index, p.base)
    return TotalPoint(target, p.base, grp.multiply(g_ji, p.g))


def best_cover(b: PrincipalBundle, x: Point) -> int:
    """Cover set with the greatest margin at ``x`` (ties to the lowest index)."""
    m = cover_margins(b, [x.chart_id], x.coords[None, :])[:, 0]
    k = int(np.argmax(m))
    if not m[k] > 0:
        raise OutOfCover(f"{x!r} lies in no cover set")
    return k


def total_point_distance(b: PrincipalBundle, p: TotalPoint, q: TotalPoint) -> float:
    """Compare in the lower of the two cover indices: group Frobenius + base chart distance."""
    k = min(p.cover_index, q.cover_index)
    p2 = change_trivialization(b, p, k)
    q2 = change_trivialization(b, q, k)
    return float(np.linalg.norm(p2.g.matrix - q2.g.matrix)) + b.base.distance(p2.base, q2.base)


def pull_back(xi: PrincipalBundle, f: SmoothMap, samples: int = DEFAULT_SAMPLES) -> PrincipalBundle:
    """The pull-back bundle ``f* xi`` over ``f.source``.

    Cover sets are the nonempty ``(chart a of M) & f^-1(U_i)`` in lexicographic
    order of ``(a, i)``; transitions are ``g_ij o f`` evaluated in chart ``a``.
    """
    if f.target is not xi.base:
        raise ValueError(f"map target {f.target.name} is not the bundle base {xi.base.name}")
    M = f.source

    def image_margins(a: int, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(coords)
        if len(coords) == 0:
            return np.empty((len(xi.cover), 0))
        return cover_margins(xi, *apply_map(f, np.full(len(coords), a), coords))

    def make_margin(a: int, i: int):
        chart = M.chart(a)

        def margin(coords):
            coords = np.atleast_2d(coords)
            return np.minimum(chart.margin(coords), image_margins(a, coords)[i])

        return margin

    u = halton(samples, M.sample_dim)
    ids, coords = M.locate(M.sample_fn(u))
    cover: list[CoverSet] = []
    for a in range(len(M.charts)):
        xa, ok = M.convert(ids, coords, a)
        im = image_margins(a, xa[ok]) if ok.any() else np.empty((len(xi.cover), 0))
        for i in range(len(xi.cover)):
            if np.any(im[i] > 0):
                cover.append(CoverSet(a, make_margin(a, i), label=(a, i)))
    if not cover:
        raise EmptyCover("every preimage of the cover is empty")

    def make_transition(a: int, i: int, j: int) -> Transition:
        def value(coords):
            coords = np.atleast_2d(coords)
            if i == j:
                return np.broadcast_to(np.eye(xi.dim, dtype=complex), (len(coords), xi.dim, xi.dim)).copy()
            return transition_values(xi, i, j, *apply_map(f, np.full(len(coords), a), coords))

        deriv = None
        if i == j:
            deriv = lambda x, v: np.zeros((len(np.atleast_2d(x)), xi.dim, xi.dim), dtype=complex)  # noqa: E731
        return Transition(a, value, deriv)

    transitions = {}
    for s, cs in enumerate(cover):
        for t, ct in enumerate(cover):
            if s != t:
                transitions[(s, t)] = make_transition(cs.label[0], cs.label[1], ct.label[1])
    return PrincipalBundle(f"pullback({xi.name},{f.name})", M, xi.tag, tuple(cover), transitions)


# ---- catalogue -------------------------------------------------------------------


def _stereo_cover(chart: int) -> CoverSet:
    return CoverSet(chart, lambda c: 3.0 - np.hypot(c[..., 0], c[..., 1]), label=("N",) if chart == 0 else ("S",))


def _const_transition(tag: str, chart: int, value) -> Transition:
    d = grp.DIM[tag]
    m = np.asarray(value, dtype=complex).reshape(d, d)

    def val(c):
        return np.broadcast_to(m, (len(np.atleast_2d(c)), d, d)).copy()

    def der(c, v):
        return np.zeros((len(np.atleast_2d(c)), d, d), dtype=complex)

    return Transition(chart, val, der)


def two_cap_bundle(name: str, g_ns: Transition, g_sn: Transition, tag: str = grp.U1) -> PrincipalBundle:
    """A bundle over S2 with the two stereographic chart domains as its cover."""
    return PrincipalBundle(name, sphere(), tag, (_stereo_cover(0), _stereo_cover(1)),
                           {(0, 1): g_ns, (1, 0): g_sn})


@functools.lru_cache(maxsize=None)
def trivial_s2_u1() -> PrincipalBundle:
    return two_cap_bundle("trivial-s2-u1", _const_transition(grp.U1, 0, 1), _const_transition(grp.U1, 0, 1))


def constant_s2_u1(theta: float) -> PrincipalBundle:
    """Two-cap U(1) bundle with constant transition ``exp(i theta)``."""
    return two_cap_bundle(f"constant-s2-u1({theta:g})",
                          _const_transition(grp.U1, 0, np.exp(1j * theta)),
                          _const_transition(grp.U1, 0, np.exp(-1j * theta)))


def _phase(c):
    z = c[..., 0] + 1j * c[..., 1]
    return z / np.abs(z)


def _dphase(c, v):
    """``d(arg z)(v)`` in the north chart."""
    x, y = c[..., 0], c[..., 1]
    return (x * v[..., 1] - y * v[..., 0]) / (x * x + y * y)


def winding_transition(k: int) -> tuple[Transition, Transition]:
    """``g_NS = (z/|z|)**k`` and its inverse, both in the north chart."""

    def ns(c):
        return (_phase(c) ** k)[..., None, None]

    def sn(c):
        return (_phase(c) ** (-k))[..., None, None]

    def d_ns(c, v):
        return (1j * k * _phase(c) ** k * _dphase(c, v))[..., None, None]

    def d_sn(c, v):
        return (-1j * k * _phase(c) ** (-k) * _dphase(c, v))[..., None, None]

    return Transition(0, ns, d_ns), Transition(0, sn, d_sn)


@functools.lru_cache(maxsize=None)
def hopf() -> PrincipalBundle:
    """U(1) Hopf bundle: ``g_NS(z) = z/|z|`` on the equatorial overlap."""
    ns, sn = winding_transition(1)
    return two_cap_bundle("hopf", ns, sn)


@functools.lru_cache(maxsize=None)
def trivial_disk_su2() -> PrincipalBundle:
    cover = CoverSet(0, lambda c: 1.25 - np.hypot(c[..., 0], c[..., 1]), label=("D",))
    return PrincipalBundle("trivial-disk-su2", disk(), grp.SU2, (cover,), {})


INNER_RADIUS = 0.7
OUTER_RADIUS = 0.3
TWIST = 1.5


def _twist(c, sign):
    """``exp(i sign TWIST (x sigma_x + y sigma_y))``."""
    x, y = c[..., 0], c[..., 1]
    r = np.hypot(x, y)
    th = TWIST * r
    nx, ny = x / r, y / r
    n_sigma = nx[..., None, None] * grp.SIGMA_X + ny[..., None, None] * grp.SIGMA_Y
    return np.cos(th)[..., None, None] * np.eye(2) + 1j * sign * np.sin(th)[..., None, None] * n_sigma


def _dtwist(c, v, sign):
    x, y = c[..., 0], c[..., 1]
    vx, vy = v[..., 0], v[..., 1]
    r = np.hypot(x, y)
    th = TWIST * r
    rdot = (x * vx + y * vy) / r
    nx, ny = x / r, y / r
    dnx = vx / r - x * rdot / r**2
    dny = vy / r - y * rdot / r**2
    n_sigma = nx[..., None, None] * grp.SIGMA_X + ny[..., None, None] * grp.SIGMA_Y
    dn_sigma = dnx[..., None, None] * grp.SIGMA_X + dny[..., None, None] * grp.SIGMA_Y
    dth = (TWIST * rdot)[..., None, None]
    s, co = np.sin(th)[..., None, None], np.cos(th)[..., None, None]
    return -s * dth * np.eye(2) + 1j * sign * (co * dth * n_sigma + s * dn_sigma)


@functools.lru_cache(maxsize=None)
def twisted_disk_su2() -> PrincipalBundle:
    """SU(2) bundle over the disk with an inner disk and an annulus as cover.

    The transition on the overlap ``0.3 < r < 0.7`` is the non-constant
    ``exp(i 1.5 (x sigma_x + y sigma_y))``.
    """
    inner = CoverSet(0, lambda c: INNER_RADIUS - np.hypot(c[..., 0], c[..., 1]), label=("inner",))
    outer = CoverSet(0, lambda c: np.minimum(np.hypot(c[..., 0], c[..., 1]) - OUTER_RADIUS,
                                             1.25 - np.hypot(c[..., 0], c[..., 1])), label=("outer",))
    g01 = Transition(0, lambda c: _twist(c, 1), lambda c, v: _dtwist(c, v, 1))
    g10 = Transition(0, lambda c: _twist(c, -1), lambda c, v: _dtwist(c, v, -1))
    return PrincipalBundle("twisted-disk-su2", disk(), grp.SU2, (inner, outer), {(0, 1): g01, (1, 0): g10})


BUNDLES: dict[str, Callable[[], PrincipalBundle]] = {
    "trivial-s2-u1": trivial_s2_u1,
    "hopf": hopf,
    "trivial-disk-su2": trivial_disk_su2,
    "twisted-disk-su2": twisted_disk_su2,
}


def bundle_by_name(name: str) -> PrincipalBundle:
    try:
        return BUNDLES[name]()
    except KeyError:
        raise KeyError(f"unknown bundle {name!r}; known: {sorted(BUNDLES)}") from None


def make_total_point(b: PrincipalBundle, x: Point, g: GroupElement | None = None, cover_index: int | None = None) -> TotalPoint:
    k = best_cover(b, x) if cover_index is None else cover_index
    return TotalPoint(k, x, grp.identity(b.tag) if g is None else g)

