"""Horizontal lifts and parallel transport.

The lift solves ``g' = -A_i(alpha(t))(alpha'(t)) g`` in a local trivialisation
with classical fixed-step RK4. The equation is linear, so each step is a
matrix propagator; the propagators for a whole segment are built at once and
then multiplied in order. The cover set is chosen per step from the base path
alone, which is what makes the batching possible.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import group as grp
from .bundle import (PrincipalBundle, TotalPoint, change_trivialization, cover_margins,
                     transition_values)
from .connection import Connection, form_values
from .errors import EndpointMismatch, NoCoveringSet, NotALoop, OutOfCover, TagMismatch
from .geometry import PathT, Point, path_states
from .group import GroupElement

DEFAULT_STEPS = 1000
BASE_TOL = 1e-9
SWITCH_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class LiftedPath:
    """Nodes of a horizontal lift, stored as arrays.

    ``covers[k]`` is the trivialisation of node ``k``; a cover switch adds a
    second node at the same time expressed in the new cover set.
    """

    connection: Connection
    base_path: PathT
    start: TotalPoint
    times: np.ndarray
    covers: np.ndarray
    charts: np.ndarray
    coords: np.ndarray
    groups: np.ndarray
    steps: int

    def __len__(self) -> int:
        return len(self.times)

    def node(self, k: int) -> TotalPoint:
        if k == 0 or k == -len(self.times):
            return self.start
        return TotalPoint(int(self.covers[k]), Point(int(self.charts[k]), self.coords[k]),
                          GroupElement(self.connection.bundle.tag, self.groups[k]))

    @cached_property
    def nodes(self) -> list[tuple[float, TotalPoint]]:
        return [(float(self.times[k]), self.node(k)) for k in range(len(self.times))]

    @property
    def end(self) -> TotalPoint:
        return self.node(-1)


# ---- path composition ------------------------------------------------------------


def compose_paths(alpha: PathT, beta: PathT) -> PathT:
    """``alpha * beta``: beta on [0, 1/2], then alpha. The join is a joint."""
    m = alpha.target
    if m.distance(beta(1.0, "left"), alpha(0.0)) > BASE_TOL:
        raise EndpointMismatch("beta(1) differs from alpha(0)")

    def func(t):
        return beta.func(min(2 * t, 1.0)) if t <= 0.5 else alpha.func(2 * t - 1)

    batch = None
    if alpha.batch is not None and beta.batch is not None:
        def batch(ts):
            ts = np.asarray(ts, dtype=float)
            first = ts <= 0.5
            ids = np.empty(len(ts), dtype=int)
            coords = np.empty((len(ts), m.dim))
            if first.any():
                ids[first], coords[first] = beta.batch(np.minimum(2 * ts[first], 1.0))
            if (~first).any():
                ids[~first], coords[~first] = alpha.batch(2 * ts[~first] - 1)
            return ids, coords

    bps = [0.5 * b for b in beta.breakpoints[:-1]] + [0.5 + 0.5 * b for b in alpha.breakpoints]
    joints = ([0.5 * j for j in beta.joints] + [0.5] + [0.5 + 0.5 * j for j in alpha.joints])
    return PathT(m, func, tuple(bps), tuple(beta.charts) + tuple(alpha.charts), tuple(joints), batch)


# ---- integration -----------------------------------------------------------------


def _check_start(b: PrincipalBundle, alpha: PathT, p: TotalPoint, steps: int) -> None:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if p.g.tag != b.tag:
        raise TagMismatch(f"{p.g.tag} point on a {b.tag} bundle")
    if b.base.distance(alpha(0.0), p.base) > BASE_TOL:
        raise ValueError("start point does not lie over alpha(0)")
    m = cover_margins(b, [p.base.chart_id], p.base.coords[None, :])[p.cover_index, 0]
    if not m > 0:
        raise OutOfCover(f"cover set {p.cover_index} does not contain the start point")


def _plan_covers(margins: np.ndarray, n: int, cover: int):
    """Cover set per step, switching when a stage point gets within SWITCH_MARGIN of the edge."""
    idx = 2 * np.arange(n)[:, None] + np.arange(3)
    stage_min = margins[:, idx].min(axis=2)
    plan = np.empty(n, dtype=int)
    switches = {}
    k = 0
    while k < n:
        low = np.nonzero(stage_min[cover, k:] < SWITCH_MARGIN)[0]
        stop = n if len(low) == 0 else k + int(low[0])
        plan[k:stop] = cover
        if stop == n:
            break
        new = int(np.argmax(stage_min[:, stop]))
        if not stage_min[new, stop] > 0:
            raise NoCoveringSet("no single cover set contains an integration step")
        if new != cover:
            switches[stop] = new
            cover = new
        plan[stop] = cover
        k = stop + 1
    return plan, switches


def _propagators(c: Connection, plan, charts, pos, vel, dt: float) -> np.ndarray:
    b = c.bundle
    n, d = len(plan), b.dim
    F = np.empty((n, 3, d, d), dtype=complex)
    for cv in np.unique(plan):
        rows = np.nonzero(plan == cv)[0]
        idx = (2 * rows[:, None] + np.arange(3)).reshape(-1)
        F[rows] = -form_values(c, int(cv), charts[idx], pos[idx], vel[idx], check=False).reshape(len(rows), 3, d, d)
    eye = np.eye(d)
    F1, F2, F3 = F[:, 0], F[:, 1], F[:, 2]
    k1 = F1
    k2 = F2 @ (eye + 0.5 * dt * k1)
    k3 = F2 @ (eye + 0.5 * dt * k2)
    k4 = F3 @ (eye + dt * k3)
    P = eye + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return grp.renormalize_array(b.tag, P)


def _accumulate(P: np.ndarray, g: np.ndarray) -> np.ndarray:
    """States ``P[k] ... P[0] g`` for every k."""
    if P.shape[-1] == 1:
        return np.cumprod(P[:, 0, 0])[:, None, None] * g
    out = np.empty_like(P)
    for k in range(len(P)):
        g = P[k] @ g
        out[k] = g
    return out


def _segments(alpha: PathT, steps: int):
    edges = [0.0] + [j for j in alpha.joints if 0.0 < j < 1.0] + [1.0]
    for a, e in zip(edges[:-1], edges[1:]):
        yield a, e, max(1, int(round(steps * (e - a))))


def horizontal_lift(c: Connection, alpha: PathT, p: TotalPoint, steps: int = DEFAULT_STEPS) -> LiftedPath:
    """Horizontal lift of ``alpha`` through ``p`` by fixed-step RK4."""
    b = c.bundle
    _check_start(b, alpha, p, steps)
    g = p.g.matrix.copy()
    times, covers, charts_out = [np.zeros(1)], [np.array([p.cover_index])], [np.array([p.base.chart_id])]
    coords_out, groups = [p.base.coords[None, :]], [g[None]]
    cover = p.cover_index
    for a, e, n in _segments(alpha, steps):
        dt = (e - a) / n
        ts = a + 0.5 * dt * np.arange(2 * n + 1)
        ts[-1] = e
        sides = np.full(len(ts), "right")
        sides[-1] = "left"
        charts, pos, vel = path_states(alpha, ts, sides)
        margins = cover_margins(b, charts, pos)
        if not (margins.max(axis=0) > 0).all():
            raise NoCoveringSet("the path leaves every cover set")
        plan, switches = _plan_covers(margins, n, cover)
        P = _propagators(c, plan, charts, pos, vel, dt)
        node_t = ts[2::2]
        starts = sorted({0, n, *switches})
        for r0, r1 in zip(starts[:-1], starts[1:]):
            if r0 in switches:
                new = switches[r0]
                j = 2 * r0
                g_no = transition_values(b, new, cover, charts[j:j + 1], pos[j:j + 1])[0]
                g = grp.renormalize_array(b.tag, g_no @ g)
                cover = new
                times.append(ts[j:j + 1])
                covers.append(np.array([cover]))
                charts_out.append(charts[j:j + 1])
                coords_out.append(pos[j:j + 1])
                groups.append(g[None])
            run = _accumulate(P[r0:r1], g)
            g = run[-1]
            times.append(node_t[r0:r1])
            covers.append(np.full(r1 - r0, cover))
            charts_out.append(charts[2 * r0 + 2:2 * r1 + 1:2])
            coords_out.append(pos[2 * r0 + 2:2 * r1 + 1:2])
            groups.append(run)
    return LiftedPath(c, alpha, p, np.concatenate(times), np.concatenate(covers), np.concatenate(charts_out),
                      np.concatenate(coords_out), np.concatenate(groups), steps)


def parallel_transport(c: Connection, alpha: PathT, p: TotalPoint, steps: int = DEFAULT_STEPS) -> TotalPoint:
    return horizontal_lift(c, alpha, p, steps).end


def holonomy(c: Connection, loop: PathT, p: TotalPoint, steps: int = DEFAULT_STEPS) -> GroupElement:
    """``h`` with ``transport(p) = p . h`` in the trivialisation of ``p``."""
    m = c.bundle.base
    if m.distance(loop(0.0), loop(1.0, "left")) > BASE_TOL:
        raise NotALoop("loop(0) and loop(1) differ")
    q = change_trivialization(c.bundle, parallel_transport(c, loop, p, steps), p.cover_index)
    return GroupElement(c.bundle.tag, grp.renormalize_array(c.bundle.tag, p.g.matrix.conj().T @ q.g.matrix))
