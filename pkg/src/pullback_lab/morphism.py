"""The bundle morphism induced by a homotopy between pull-backs.

For a steady homotopy ``H`` from ``f`` to ``g`` and a connection on ``xi``, a
point of ``f* xi`` over ``x`` is carried to ``g* xi`` by parallel transport
along the track ``t -> H(t, x)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import group as grp
from .bundle import (PrincipalBundle, TotalPoint, change_trivialization, cover_margins, pull_back,
                     right_action, total_point_distance)
from .connection import Connection
from .errors import NotSteady, OutOfCover
from .geometry import Point
from .homotopy import Homotopy, compose, reverse, track
from .sampling import SplitMix64
from .transport import DEFAULT_STEPS, parallel_transport


@dataclass(frozen=True, eq=False)
class BundleMorphism:
    source: PrincipalBundle
    target: PrincipalBundle
    xi: PrincipalBundle
    homotopy: Homotopy
    connection: Connection
    steps: int = DEFAULT_STEPS

    def __call__(self, p: TotalPoint) -> TotalPoint:
        return apply_morphism(self, p)


@dataclass(frozen=True)
class FunctorReport:
    max_deviation: float
    samples: int
    passed: bool
    tolerance: float


def induced_morphism(H: Homotopy, xi: PrincipalBundle, c: Connection, steps: int = DEFAULT_STEPS) -> BundleMorphism:
    if not H.steady_margin > 0:
        raise NotSteady("the homotopy must be steady; steadify it first")
    if H.target is not xi.base:
        raise ValueError(f"homotopy target {H.target.name} is not the base {xi.base.name}")
    if c.bundle is not xi:
        raise ValueError("the connection lives on a different bundle")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return BundleMorphism(pull_back(xi, H.f_end), pull_back(xi, H.g_end), xi, H, c, steps)


def _margins(b: PrincipalBundle, x: Point) -> np.ndarray:
    return cover_margins(b, [x.chart_id], x.coords[None, :])[:, 0]


def apply_morphism(m: BundleMorphism, p: TotalPoint) -> TotalPoint:
    x = p.base
    if not _margins(m.source, x)[p.cover_index] > 0:
        raise OutOfCover(f"{x!r} is not in cover set {p.cover_index} of the source")
    alpha = track(m.homotopy, x)
    i = m.source.cover[p.cover_index].label[1]
    q = parallel_transport(m.connection, alpha, TotalPoint(i, alpha(0.0), p.g), m.steps)
    k = int(np.argmax(_margins(m.target, x)))
    q = change_trivialization(m.xi, q, m.target.cover[k].label[1])
    return TotalPoint(k, x, q.g)


def reindex(p: TotalPoint, src: PrincipalBundle, dst: PrincipalBundle) -> TotalPoint:
    """Move a point between two pull-backs with identical cover labels."""
    label = src.cover[p.cover_index].label
    k = [cs.label for cs in dst.cover].index(label)
    return TotalPoint(k, p.base, p.g)


# ---- sampled checks ----------------------------------------------------------------


def random_total_points(b: PrincipalBundle, n: int, rng: SplitMix64) -> list[TotalPoint]:
    """Base points from the manifold sampler, best cover, Haar group entries."""
    m = b.base
    out = []
    for x in m.sample(rng.unit_cube(n, m.sample_dim)):
        k = int(np.argmax(_margins(b, x)))
        out.append(TotalPoint(k, x, grp.random_element(b.tag, rng)))
    return out


def equivariance_deviation(m: BundleMorphism, samples: int = 100, seed: int = 0) -> float:
    rng = SplitMix64(seed)
    worst = 0.0
    for p in random_total_points(m.source, samples, rng):
        h = grp.random_element(m.source.tag, rng)
        lhs = apply_morphism(m, right_action(m.source, p, h))
        rhs = right_action(m.target, apply_morphism(m, p), h)
        worst = max(worst, total_point_distance(m.target, lhs, rhs))
    return worst


def fibre_deviation(m: BundleMorphism, samples: int = 100, seed: int = 0) -> float:
    """Largest base displacement; exactly zero by construction."""
    worst = 0.0
    for p in random_total_points(m.source, samples, SplitMix64(seed)):
        q = apply_morphism(m, p)
        worst = max(worst, float(m.source.base.distance(p.base, q.base)))
    return worst


def lipschitz_ratio(m: BundleMorphism, samples: int = 20, delta: float = 1e-4, seed: int = 0) -> float:
    """Largest ``|lambda(p') - lambda(p)| / |p' - p|`` under base perturbations of size ``delta``."""
    rng = SplitMix64(seed)
    M = m.source.base
    worst = 0.0
    for p in random_total_points(m.source, samples, rng):
        ang = 2 * np.pi * rng.random()
        step = delta * np.array([np.cos(ang), np.sin(ang)])[: M.dim]
        if M.dim == 1:
            step = np.array([delta])
        x2 = Point(p.base.chart_id, p.base.coords + step)
        if not _margins(m.source, x2)[p.cover_index] > 0:
            continue
        p2 = TotalPoint(p.cover_index, x2, p.g)
        d_in = total_point_distance(m.source, p, p2)
        d_out = total_point_distance(m.target, apply_morphism(m, p), apply_morphism(m, p2))
        worst = max(worst, d_out / d_in)
    return worst


def verify_functoriality(H: Homotopy, K: Homotopy, xi: PrincipalBundle, c: Connection, samples: int = 100,
                         tol: float = 1e-5, steps: int = DEFAULT_STEPS, seed: int = 0) -> FunctorReport:
    """Max over sampled points of ``|lambda_{K o H}(p) - lambda_K(lambda_H(p))|``."""
    KH = induced_morphism(compose(K, H), xi, c, steps)
    mH = induced_morphism(H, xi, c, steps)
    mK = induced_morphism(K, xi, c, steps)
    worst = 0.0
    for p in random_total_points(mH.source, samples, SplitMix64(seed)):
        direct = apply_morphism(KH, reindex(p, mH.source, KH.source))
        chained = apply_morphism(mK, reindex(apply_morphism(mH, p), mH.target, mK.source))
        worst = max(worst, total_point_distance(KH.target, direct, reindex(chained, mK.target, KH.target)))
    return FunctorReport(worst, samples, worst <= tol, tol)


def verify_isomorphism(H: Homotopy, xi: PrincipalBundle, c: Connection, samples: int = 100,
                       tol: float = 1e-5, steps: int = DEFAULT_STEPS, seed: int = 0) -> FunctorReport:
    """Max over sampled points of ``|lambda_{H^-1}(lambda_H(p)) - p|``."""
    fwd = induced_morphism(H, xi, c, steps)
    back = induced_morphism(reverse(H), xi, c, steps)
    worst = 0.0
    for p in random_total_points(fwd.source, samples, SplitMix64(seed)):
        q = apply_morphism(back, reindex(apply_morphism(fwd, p), fwd.target, back.source))
        worst = max(worst, total_point_distance(fwd.source, p, reindex(q, back.target, fwd.source)))
    return FunctorReport(worst, samples, worst <= tol, tol)

