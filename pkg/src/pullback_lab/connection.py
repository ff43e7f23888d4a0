"""Connections as local Lie-algebra valued 1-forms over a bundle's cover.

Local forms follow the bundle convention ``g_i = g_ij g_j`` and satisfy

    A_j = g_ij^-1 A_i g_ij + g_ij^-1 dg_ij

on overlaps. Each form lives in the chart of its cover set and is evaluated
on arrays of coordinates and tangent components in that chart.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import group as grp
from .bundle import (PrincipalBundle, cover_margins, overlap_samples, transition_derivatives,
                     transition_values)
from .errors import NonConstantTransitions, OutOfCover, PartitionMismatch
from .geometry import Point, Tangent, change_chart_tangent
from .group import AlgebraElement
from .sampling import halton

CONSTANT_TOL = 1e-12
INTERIOR_MARGIN = 1e-9  # overlap samples closer to an edge are skipped (difference stencils need room)


@dataclass(frozen=True, eq=False)
class LocalForm:
    chart: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Connection:
    bundle: PrincipalBundle
    forms: tuple[LocalForm, ...]
    name: str = ""


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """One bump per cover set, each a function of coordinates in its chart."""

    bumps: tuple[tuple[int, Callable[[np.ndarray], np.ndarray]], ...]


@dataclass(frozen=True)
class CompatibilityReport:
    max_violation: float
    samples: int
    passed: bool
    tolerance: float


# ---- partitions of unity -------------------------------------------------------


def mollifier(x):
    """``exp(-1/x)`` for x > 0, else 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    a = mollifier(u)
    return a / (a + mollifier(1.0 - np.asarray(u, dtype=float)))


def partition_values(rho: PartitionOfUnity, b: PrincipalBundle, ids, coords) -> np.ndarray:
    """Bump values ``(n_cover, n)``; zero where a bump's chart does not contain the point."""
    ids = np.asarray(ids, dtype=int)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    out = np.zeros((len(rho.bumps), len(ids)))
    for k, (chart, fn) in enumerate(rho.bumps):
        x, ok = b.base.convert(ids, coords, chart)
        if ok.any():
            with np.errstate(all="ignore"):
                out[k, ok] = fn(x[ok])
    return out


def _cap_bump(c):
    """1 near the chart origin, 0 for |coord| >= 2: a smooth step in log|coord|."""
    with np.errstate(divide="ignore"):
        u = (np.log(np.hypot(c[..., 0], c[..., 1])) + np.log(2.0)) / (2 * np.log(2.0))
    return 1.0 - smooth_step(u)


def cap_partition() -> PartitionOfUnity:
    """Two polar-cap bumps for the stereographic cover of S2 (a function of the polar angle)."""
    return PartitionOfUnity(((0, _cap_bump), (1, _cap_bump)))


def radial_partition(r_in: float = 0.35, r_out: float = 0.65) -> PartitionOfUnity:
    def step(c):
        return smooth_step((np.hypot(c[..., 0], c[..., 1]) - r_in) / (r_out - r_in))

    return PartitionOfUnity(((0, lambda c: 1.0 - step(c)), (0, step)))


def margin_partition(b: PrincipalBundle) -> PartitionOfUnity:
    """Generic partition: ``mollifier(margin_i)`` normalised over all cover sets."""

    def make(i: int, chart: int):
        def fn(c):
            c = np.atleast_2d(c)
            w = mollifier(np.clip(cover_margins(b, np.full(len(c), chart), c), -1.0, None))
            return w[i] / w.sum(axis=0)

        return fn

    return PartitionOfUnity(tuple((cs.chart, make(i, cs.chart)) for i, cs in enumerate(b.cover)))


def standard_partition(b: PrincipalBundle) -> PartitionOfUnity:
    labels = [cs.label for cs in b.cover]
    if len(b.cover) == 1:
        return PartitionOfUnity(((b.cover[0].chart, lambda c: np.ones(len(np.atleast_2d(c)))),))
    if labels == [("N",), ("S",)]:
        return cap_partition()
    if labels == [("inner",), ("outer",)]:
        return radial_partition()
    return margin_partition(b)


# ---- evaluation --------------------------------------------------------------------


def form_values(c: Connection, i: int, ids, coords, vel, check: bool = True) -> np.ndarray:
    """``A_i(v)`` at many points, shape ``(n, d, d)``."""
    b = c.bundle
    ids = np.asarray(ids, dtype=int)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    vel = np.atleast_2d(np.asarray(vel, dtype=float))
    form = c.forms[i]
    x, ok = b.base.convert(ids, coords, form.chart)
    if check:
        inside = cover_margins(b, ids, coords)[i] > 0
        if not (ok & inside).all():
            raise OutOfCover(f"local form {i} evaluated outside its cover set")
    v = b.base.convert_tangent(ids, coords, vel, form.chart)
    return np.asarray(form.fn(x, v), dtype=complex).reshape(len(ids), b.dim, b.dim)


def evaluate_form(c: Connection, i: int, p: Point, v: Tangent) -> AlgebraElement:
    if v.base.chart_id != p.chart_id:
        v = change_chart_tangent(c.bundle.base, v, p.chart_id)
    vals = form_values(c, i, [p.chart_id], p.coords[None, :], v.components[None, :])
    return AlgebraElement(c.bundle.tag, vals[0])


# ---- constructions ----------------------------------------------------------------


def connection_from_partition(b: PrincipalBundle, rho: PartitionOfUnity | None = None) -> Connection:
    """Glue flat local connections: ``A_i = sum_j rho_j g_ji^-1 dg_ji``."""
    rho = standard_partition(b) if rho is None else rho
    if len(rho.bumps) != len(b.cover):
        raise PartitionMismatch(f"{len(rho.bumps)} bumps for {len(b.cover)} cover sets")
    d = b.dim

    def make(i: int, chart: int):
        def fn(x, v):
            x = np.atleast_2d(x)
            v = np.atleast_2d(v)
            ids = np.full(len(x), chart)
            weights = partition_values(rho, b, ids, x)
            acc = np.zeros((len(x), d, d), dtype=complex)
            for j in range(len(b.cover)):
                if j == i or (j, i) not in b.transitions:
                    continue
                rows = weights[j] > 0
                if not rows.any():
                    continue
                g = transition_values(b, j, i, ids[rows], x[rows])
                dg = transition_derivatives(b, j, i, ids[rows], x[rows], v[rows])
                acc[rows] += weights[j][rows, None, None] * (np.conj(np.swapaxes(g, 1, 2)) @ dg)
            return acc

        return fn

    forms = tuple(LocalForm(cs.chart, make(i, cs.chart)) for i, cs in enumerate(b.cover))
    return Connection(b, forms, "partition")


def _zero_form(chart: int, d: int) -> LocalForm:
    return LocalForm(chart, lambda x, v: np.zeros((len(np.atleast_2d(x)), d, d), dtype=complex))


def flat_connection(b: PrincipalBundle, samples: int = 1000) -> Connection:
    """Zero local forms; legal only when every transition is constant."""
    ids, coords, margins = overlap_samples(b, samples)
    inside = margins > 0
    for (i, j) in b.transitions:
        rows = inside[i] & inside[j]
        if rows.sum() < 2:
            continue
        g = transition_values(b, i, j, ids[rows], coords[rows])
        variation = float(np.max(np.linalg.norm(g - g[0], axis=(1, 2))))
        if variation >= CONSTANT_TOL:
            raise NonConstantTransitions(f"g_{i}{j} varies by {variation:.3g}")
    return Connection(b, tuple(_zero_form(cs.chart, b.dim) for cs in b.cover), "flat")


def _monopole_form(c, v):
    x, y = c[..., 0], c[..., 1]
    return (-1j * (x * v[..., 1] - y * v[..., 0]) / (1 + x * x + y * y))[..., None, None]


def monopole_connection(b: PrincipalBundle | None = None) -> Connection:
    """Unit monopole on the Hopf bundle.

    North form ``(i/2)(1 - cos theta) dphi`` and south form
    ``-(i/2)(1 + cos theta) dphi``, with the azimuth ``phi = arg w = -arg z``;
    in either stereographic chart both read ``-i (x dy - y dx) / (1 + |z|^2)``.
    """
    from .bundle import hopf

    b = hopf() if b is None else b
    return Connection(b, (LocalForm(0, _monopole_form), LocalForm(1, _monopole_form)), "monopole")


# ---- validation -----------------------------------------------------------------------


def _unit_tangents(n: int, dim: int) -> np.ndarray:
    u = halton(n, dim + 2)[:, -1]
    if dim == 1:
        return np.where(u < 0.5, -1.0, 1.0)[:, None]
    ang = 2 * np.pi * u
    out = np.zeros((n, dim))
    out[:, 0], out[:, 1] = np.cos(ang), np.sin(ang)
    return out


def validate_compatibility(c: Connection, samples: int = 1000, tol: float = 1e-6) -> CompatibilityReport:
    """Max over sampled overlap points of ``|A_j - (g_ij^-1 A_i g_ij + g_ij^-1 dg_ij)|``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    b = c.bundle
    ids, coords, margins = overlap_samples(b, samples)
    vel = _unit_tangents(samples, b.base.dim)
    inside = margins > INTERIOR_MARGIN
    worst = 0.0
    for (i, j) in b.transitions:
        rows = inside[i] & inside[j]
        if not rows.any():
            continue
        r_ids, r_x, r_v = ids[rows], coords[rows], vel[rows]
        a_i = form_values(c, i, r_ids, r_x, r_v)
        a_j = form_values(c, j, r_ids, r_x, r_v)
        g = transition_values(b, i, j, r_ids, r_x)
        dg = transition_derivatives(b, i, j, r_ids, r_x, r_v)
        g_inv = np.conj(np.swapaxes(g, 1, 2))
        dev = np.linalg.norm(a_j - (g_inv @ a_i @ g + g_inv @ dg), axis=(1, 2))
        worst = max(worst, float(np.max(dev)))
    return CompatibilityReport(worst, samples, worst <= tol, tol)


def is_anti_hermitian(m: np.ndarray, tol: float = 1e-9) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m + np.conj(np.swapaxes(m, -1, -2)))) <= tol)


CONNECTIONS = {
    "partition": lambda b: connection_from_partition(b),
    "flat": flat_connection,
    "monopole": lambda b: monopole_connection(b) if b.name == "hopf" else _monopole_error(b),
}


def _monopole_error(b: PrincipalBundle):
    raise ValueError(f"the monopole connection is only registered for 'hopf', not {b.name!r}")


def connection_by_name(name: str, b: PrincipalBundle) -> Connection:
    try:
        factory = CONNECTIONS[name]
    except KeyError:
        raise KeyError(f"unknown connection {name!r}; known: {sorted(CONNECTIONS)}") from None
    return factory(b)


def algebra_tag_ok(a: AlgebraElement) -> bool:
    if not is_anti_hermitian(a.matrix):
        return False
    return a.tag != grp.SU2 or abs(np.trace(a.matrix)) <= 1e-9
