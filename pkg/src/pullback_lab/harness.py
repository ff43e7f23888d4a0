"""Experiments: transport properties, morphism laws, contractible trivialisation
and Chern-number classification, written out as CSV plus a JSON summary."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import group as grp
from .bundle import (BUNDLES, PrincipalBundle, TotalPoint, bundle_by_name, cover_margins, hopf,
                     make_total_point, pull_back, right_action, total_point_distance, transition_values,
                     trivial_s2_u1)
from .connection import CONNECTIONS, Connection, connection_by_name, monopole_connection
from .errors import (Aliasing, ConfigError, NonInteger, NotContractibleSetup, UnknownExperiment)
from .geometry import (Manifold, PathT, Point, degree_map, disk_segment, equator_arc, identity_map,
                       reparametrize, reverse_path, sphere_arc)
from .homotopy import (HOMOTOPY_PAIRS, Homotopy, contraction_homotopy, homotopy_catalogue, is_constant_map,
                       maps_agree, smoothing_phi, steadify)
from .morphism import (apply_morphism, equivariance_deviation, fibre_deviation, induced_morphism,
                       verify_functoriality, verify_isomorphism)
from .sampling import SplitMix64
from .transport import LiftedPath, compose_paths, holonomy, horizontal_lift, parallel_transport

EXPERIMENTS = ("phi-table", "transport-props", "functoriality", "isomorphism",
               "contractible-trivialization", "chern-classification")
DEFAULT_BUNDLE = {"transport-props": "hopf", "functoriality": "hopf", "isomorphism": "hopf",
                  "contractible-trivialization": "twisted-disk-su2", "chern-classification": None}
PROJECTION_TOL = 1e-9
UNITARY_TOL = 1e-9
TRANSPORT_TOL = 1e-6
CONVERGENCE_STEPS = (16, 32)
CONVERGENCE_REFERENCE = 4096
CONVERGENCE_RATIO = 8.0
HOLONOMY_TOL = 1e-6
CHERN_SAMPLES = 10_000
KNOWN_CHERN = {"trivial-s2-u1": 0, "hopf": 1}
DEGREES = (-2, -1, 0, 1, 2)


@dataclass
class ExperimentConfig:
    experiment: str
    bundle: str | None = None
    connection: str | None = None
    steps: int = 1000
    samples: int = 100
    tolerance: float = 1e-5
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise UnknownExperiment(f"unknown experiment {self.experiment!r}; known: {', '.join(EXPERIMENTS)}")
        if self.bundle is not None and self.bundle not in BUNDLES:
            raise ConfigError(f"unknown bundle {self.bundle!r}; known: {sorted(BUNDLES)}")
        if self.connection is not None and self.connection not in CONNECTIONS:
            raise ConfigError(f"unknown connection {self.connection!r}; known: {sorted(CONNECTIONS)}")
        for name in ("steps", "samples", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{name} must be an integer")
        if self.steps < 1 or self.samples < 1:
            raise ConfigError("steps and samples must be >= 1")
        if not (isinstance(self.tolerance, (int, float)) and self.tolerance > 0 and math.isfinite(self.tolerance)):
            raise ConfigError("tolerance must be a positive number")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - names
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' field")
        return cls(**data)


@dataclass(frozen=True)
class Metric:
    name: str
    value: float
    tolerance: float
    passed: bool


@dataclass
class ExperimentResult:
    experiment: str
    passed: bool
    metrics: list[Metric]
    artifacts: list[str] = field(default_factory=list)
    tables: dict[str, list[tuple]] = field(default_factory=dict)


def at_most(name: str, value: float, tol: float) -> Metric:
    return Metric(name, float(value), float(tol), bool(value <= tol))


def at_least(name: str, value: float, bound: float) -> Metric:
    return Metric(name, float(value), float(bound), bool(value >= bound))


def equals(name: str, value: float, expected: float) -> Metric:
    """Exact check; the tolerance column holds the expected value."""
    return Metric(name, float(value), float(expected), bool(value == expected))


def _result(name: str, metrics: list[Metric], tables=None) -> ExperimentResult:
    return ExperimentResult(name, all(m.passed for m in metrics), metrics, [], tables or {})


# ---- phi table -----------------------------------------------------------------


def phi_table(cfg: ExperimentConfig) -> ExperimentResult:
    grid = np.linspace(0.0, 1.0, cfg.samples + 1)
    fine = smoothing_phi(np.linspace(0.0, 1.0, 10_001))
    left = smoothing_phi(np.linspace(0.0, 1.0 / 3.0, 1001))
    right = smoothing_phi(np.linspace(2.0 / 3.0, 1.0, 1001))
    metrics = [
        equals("phi(0)", smoothing_phi(0.0), 0.0),
        equals("phi(1/3)", smoothing_phi(1.0 / 3.0), 0.0),
        at_most("|phi(1/2)-1/2|", abs(smoothing_phi(0.5) - 0.5), 1e-9),
        equals("phi(2/3)", smoothing_phi(2.0 / 3.0), 1.0),
        equals("phi(1)", smoothing_phi(1.0), 1.0),
        at_most("max|phi| on [0,1/3]", float(np.max(np.abs(left))), 0.0),
        at_most("max|phi-1| on [2/3,1]", float(np.max(np.abs(right - 1.0))), 0.0),
        at_most("monotonicity violations", float(np.sum(np.diff(fine) < 0)), 0.0),
    ]
    return _result("phi-table", metrics, {"phi-grid": [("t", "phi")] + [(t, smoothing_phi(t)) for t in grid]})


# ---- transport properties ----------------------------------------------------------


def _unit_vector(rng: SplitMix64) -> np.ndarray:
    z = 2 * rng.random() - 1
    a = 2 * np.pi * rng.random()
    r = math.sqrt(max(0.0, 1 - z * z))
    return np.array([r * math.cos(a), r * math.sin(a), z])


def _disk_point(rng: SplitMix64, radius: float = 0.95) -> np.ndarray:
    r = radius * math.sqrt(rng.random())
    a = 2 * np.pi * rng.random()
    return np.array([r * math.cos(a), r * math.sin(a)])


def random_path(m: Manifold, rng: SplitMix64, start=None) -> PathT:
    """Random catalogue path on S2 (great-circle arc) or D2 (segment), from ``start`` if given."""
    if m.name == "S2":
        X = _unit_vector(rng) if start is None else np.asarray(start, dtype=float)
        return sphere_arc(X, _unit_vector(rng), rng.uniform(0.5, 3.0))
    if m.name == "D2":
        a = _disk_point(rng) if start is None else np.asarray(start, dtype=float)
        return disk_segment(a, _disk_point(rng))
    raise ConfigError(f"no random paths on {m.name}")


def _end_ambient(alpha: PathT) -> np.ndarray:
    return alpha.target.embed(alpha(1.0, "left"))


def projection_deviation(lift: LiftedPath) -> float:
    m = lift.base_path.target
    ids, coords = lift.base_path.raw(lift.times)
    return float(np.max(np.linalg.norm(m.embed_array(lift.charts, lift.coords) - m.embed_array(ids, coords), axis=1)))


def _unitarity(G: np.ndarray) -> float:
    if not len(G):
        return 0.0
    eye = np.eye(G.shape[-1])
    return float(np.max(np.linalg.norm(np.conj(np.swapaxes(G, 1, 2)) @ G - eye, axis=(1, 2))))


def unitarity_deviation(lift: LiftedPath) -> float:
    return _unitarity(lift.groups)


def transport_suite(c: Connection, samples: int, steps: int, seed: int) -> dict[str, float]:
    """Worst deviations of the transport invariants over random (path, start, group) cases."""
    b = c.bundle
    m = b.base
    rng = SplitMix64(seed)
    worst = dict.fromkeys(["projection", "start", "unitarity", "equivariance", "reversal",
                           "reparametrization", "composition"], 0.0)
    for _ in range(samples):
        beta = random_path(m, rng)
        alpha = random_path(m, rng, _end_ambient(beta))
        x0 = beta(0.0)
        p = make_total_point(b, x0, grp.random_element(b.tag, rng))
        h = grp.random_element(b.tag, rng)
        lift = horizontal_lift(c, beta, p, steps)
        worst["projection"] = max(worst["projection"], projection_deviation(lift))
        worst["start"] = max(worst["start"], total_point_distance(b, lift.node(0), p))
        worst["unitarity"] = max(worst["unitarity"], unitarity_deviation(lift))
        moved = horizontal_lift(c, beta, right_action(b, p, h), steps)
        dev = np.linalg.norm(moved.groups - lift.groups @ h.matrix, axis=(1, 2))
        worst["equivariance"] = max(worst["equivariance"], float(np.max(dev)))
        q = lift.end
        back = parallel_transport(c, reverse_path(beta), q, steps)
        worst["reversal"] = max(worst["reversal"], total_point_distance(b, back, p))
        rep = parallel_transport(c, reparametrize(beta, smoothing_phi), p, steps)
        worst["reparametrization"] = max(worst["reparametrization"], total_point_distance(b, rep, q))
        both = parallel_transport(c, compose_paths(alpha, beta), p, steps)
        chained = parallel_transport(c, alpha, q, steps)
        worst["composition"] = max(worst["composition"], total_point_distance(b, both, chained))
    return worst


def monopole_start() -> tuple[Connection, TotalPoint]:
    c = monopole_connection()
    return c, make_total_point(c.bundle, equator_arc(np.pi)(0.0))


def convergence_ratio(steps=CONVERGENCE_STEPS, reference: int = CONVERGENCE_REFERENCE) -> float:
    """Endpoint error ratio for successive step counts on the monopole half-equator arc."""
    c, p = monopole_start()
    arc = equator_arc(np.pi)
    ref = parallel_transport(c, arc, p, reference).g.matrix
    errs = [float(np.linalg.norm(parallel_transport(c, arc, p, n).g.matrix - ref)) for n in steps]
    return errs[0] / errs[1]


def monopole_holonomy_error(steps: int = 1000) -> float:
    c, p = monopole_start()
    h = holonomy(c, equator_arc(2 * np.pi), p, steps)
    return float(abs(h.matrix[0, 0] + 1.0))


def transport_props(cfg: ExperimentConfig, b: PrincipalBundle, c: Connection) -> ExperimentResult:
    worst = transport_suite(c, cfg.samples, cfg.steps, cfg.seed)
    tols = {"projection": PROJECTION_TOL, "start": 0.0, "unitarity": UNITARY_TOL}
    metrics = [at_most(k, v, tols.get(k, TRANSPORT_TOL)) for k, v in worst.items()]
    if c.name == "monopole":
        metrics.append(at_least("convergence-ratio", convergence_ratio(), CONVERGENCE_RATIO))
        metrics.append(at_most("|holonomy(equator)+1|", monopole_holonomy_error(cfg.steps), HOLONOMY_TOL))
    return _result("transport-props", metrics)


# ---- morphism laws ------------------------------------------------------------------


def _catalogue_for(b: PrincipalBundle) -> dict[str, Homotopy]:
    try:
        return homotopy_catalogue(b.base.name)
    except KeyError:
        raise ConfigError(f"no homotopy catalogue over {b.base.name}") from None


def functoriality(cfg: ExperimentConfig, b: PrincipalBundle, c: Connection) -> ExperimentResult:
    hs = _catalogue_for(b)
    metrics = []
    for name, H in hs.items():
        m = induced_morphism(H, b, c, cfg.steps)
        metrics.append(at_most(f"fibre[{name}]", fibre_deviation(m, cfg.samples, cfg.seed), 0.0))
        metrics.append(at_most(f"equivariance[{name}]", equivariance_deviation(m, cfg.samples, cfg.seed),
                               TRANSPORT_TOL))
    for hn, kn in HOMOTOPY_PAIRS[b.base.name]:
        rep = verify_functoriality(hs[hn], hs[kn], b, c, cfg.samples, cfg.tolerance, cfg.steps, cfg.seed)
        metrics.append(at_most(f"functoriality[{kn}o{hn}]", rep.max_deviation, cfg.tolerance))
    return _result("functoriality", metrics)


def isomorphism(cfg: ExperimentConfig, b: PrincipalBundle, c: Connection) -> ExperimentResult:
    metrics = []
    for name, H in _catalogue_for(b).items():
        rep = verify_isomorphism(H, b, c, cfg.samples, cfg.tolerance, cfg.steps, cfg.seed)
        metrics.append(at_most(f"round-trip[{name}]", rep.max_deviation, cfg.tolerance))
    return _result("isomorphism", metrics)


# ---- contractible base ---------------------------------------------------------------


def trivialization_matrices(xi: PrincipalBundle, H: Homotopy, c: Connection, xs: list[Point],
                            steps: int = 1000) -> dict[int, np.ndarray]:
    """``Lambda_i(x)`` for every cover set ``i`` containing ``x``: the global trivialisation of ``xi``.

    ``lambda_H`` carries ``(i, x, 1)`` into ``g* xi``, whose transitions are
    constant; re-expressing every image in one fixed cover set of ``g* xi``
    (which is the whole base) gives the group element ``Lambda_i(x)``.
    """
    m = induced_morphism(H, xi, c, steps)
    home = 0
    i_home = m.target.cover[home].label[1]
    m0 = H.g_end(xs[0])
    out: dict[int, np.ndarray] = {}
    for i, cs in enumerate(m.source.cover):
        rows = []
        for x in xs:
            if not cover_margins(m.source, [x.chart_id], x.coords[None, :])[i, 0] > 0:
                rows.append(np.full((xi.dim, xi.dim), np.nan, dtype=complex))
                continue
            q = apply_morphism(m, TotalPoint(i, x, grp.identity(xi.tag)))
            j = m.target.cover[q.cover_index].label[1]
            g_hj = transition_values(xi, i_home, j, [m0.chart_id], m0.coords[None, :])[0]
            rows.append(g_hj @ q.g.matrix)
        out[cs.label[1]] = np.array(rows)
    return out


def trivialize_contractible(xi: PrincipalBundle, contraction: Homotopy, c: Connection, steps: int = 1000,
                            samples: int = 100, seed: int = 0, tol: float = 1e-5) -> ExperimentResult:
    """Global trivialisation of a bundle over the disk from a contraction to a point.

    Metric: ``max |Lambda_i g_ij Lambda_j^-1 - I|`` over sampled overlap points.
    """
    if xi.base.name != "D2" or contraction.source is not xi.base or contraction.target is not xi.base:
        raise NotContractibleSetup(f"base {xi.base.name} is not the disk")
    if not maps_agree(contraction.f_end, identity_map(xi.base)):
        raise NotContractibleSetup("the contraction must start at the identity map")
    if not is_constant_map(contraction.g_end):
        raise NotContractibleSetup("the contraction must end at a constant map")
    rng = SplitMix64(seed)
    xs = [Point(0, _disk_point(rng, 1.0)) for _ in range(samples)]
    lam = trivialization_matrices(xi, contraction, c, xs, steps)
    ids = np.zeros(len(xs), dtype=int)
    coords = np.array([x.coords for x in xs])
    margins = cover_margins(xi, ids, coords)
    worst = 0.0
    for (i, j) in xi.transitions:
        rows = (margins[i] > 0) & (margins[j] > 0)
        if not rows.any():
            continue
        g = transition_values(xi, i, j, ids[rows], coords[rows])
        lj_inv = np.conj(np.swapaxes(lam[j][rows], 1, 2))
        dev = np.linalg.norm(lam[i][rows] @ g @ lj_inv - np.eye(xi.dim), axis=(1, 2))
        worst = max(worst, float(np.max(dev)))
    unit = max(_unitarity(v[~np.isnan(v).any(axis=(1, 2))]) for v in lam.values())
    metrics = [at_most("trivialized-cocycle-deviation", worst, tol),
               at_most("trivialization-unitarity", unit, UNITARY_TOL)]
    return _result("contractible-trivialization", metrics)


def contractible_trivialization(cfg: ExperimentConfig, b: PrincipalBundle, c: Connection) -> ExperimentResult:
    H = steadify(contraction_homotopy((0.0, 0.0))) if b.base.name == "D2" else None
    if H is None:
        raise NotContractibleSetup(f"base {b.base.name} is not the disk")
    return trivialize_contractible(b, H, c, cfg.steps, cfg.samples, cfg.seed, cfg.tolerance)


# ---- Chern numbers ------------------------------------------------------------------


def _pole_cover(xi: PrincipalBundle, chart: int) -> int:
    m = cover_margins(xi, [chart], np.zeros((1, 2)))[:, 0]
    inside = np.nonzero(m > 0)[0]
    if not len(inside):
        raise ValueError("no cover set contains a pole")
    return int(inside[0])


def _hemisphere(chart: int, n: int = 64) -> tuple[np.ndarray, np.ndarray]:
    r, a = np.meshgrid(np.linspace(0.0, 1.0, n), np.linspace(0.0, 2 * np.pi, 4 * n, endpoint=False))
    coords = np.stack([(r * np.cos(a)).ravel(), (r * np.sin(a)).ravel()], -1)
    return np.full(len(coords), chart), coords


def chern_number(xi: PrincipalBundle, samples: int = CHERN_SAMPLES) -> int:
    """First Chern number of a U(1) bundle over S2 from the equatorial winding.

    Uses the lowest cover set containing the north pole and the lowest one
    containing the south pole; each must contain its closed hemisphere. The
    winding of ``g_NS`` is summed along ``z = exp(2 pi i k / samples)``.
    """
    if xi.tag != grp.U1 or xi.base.name != "S2":
        raise ValueError("chern_number needs a U(1) bundle over S2")
    if samples < 3:
        raise ValueError("samples must be >= 3")
    north, south = _pole_cover(xi, 0), _pole_cover(xi, 1)
    for cover, chart in ((north, 0), (south, 1)):
        if not np.all(cover_margins(xi, *_hemisphere(chart))[cover] > 0):
            raise ValueError(f"cover set {cover} does not contain its closed hemisphere")
    ang = 2 * np.pi * np.arange(samples + 1) / samples
    coords = np.stack([np.cos(ang), np.sin(ang)], -1)
    g = transition_values(xi, north, south, np.zeros(samples + 1, dtype=int), coords)[:, 0, 0]
    steps = np.angle(g[1:] / g[:-1])
    if np.max(np.abs(steps)) >= np.pi:
        raise Aliasing("a phase increment reached pi; increase samples")
    total = float(np.sum(steps)) / (2 * np.pi)
    k = int(round(total))
    if abs(total - k) > 0.01:
        raise NonInteger(f"winding sum {total:.6f} is not an integer")
    return k


def classification_table(samples: int = CHERN_SAMPLES) -> list[tuple[str, int, int]]:
    """``(name, chern, expected)`` for the catalogue U(1) bundles and degree-k pull-backs of Hopf."""
    xi = hopf()
    rows = [("trivial-s2-u1", chern_number(trivial_s2_u1(), samples), 0),
            ("hopf", chern_number(xi, samples), 1)]
    for k in DEGREES:
        rows.append((f"degree({k})*hopf", chern_number(pull_back(xi, degree_map(k)), samples), k))
    return rows


def chern_classification(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.bundle is not None:
        if cfg.bundle not in KNOWN_CHERN:
            raise ConfigError(f"chern-classification needs a U(1) bundle over S2, not {cfg.bundle!r}")
        return _result("chern-classification",
                       [equals("chern", chern_number(bundle_by_name(cfg.bundle)), KNOWN_CHERN[cfg.bundle])])
    metrics = [equals(f"chern[{name}]", value, expected) for name, value, expected in classification_table()]
    metrics.append(at_most("|holonomy(equator)+1|", monopole_holonomy_error(cfg.steps), HOLONOMY_TOL))
    return _result("chern-classification", metrics)


# ---- dispatch and output ----------------------------------------------------------------


def _bundle_and_connection(cfg: ExperimentConfig) -> tuple[PrincipalBundle, Connection]:
    b = bundle_by_name(cfg.bundle or DEFAULT_BUNDLE[cfg.experiment])
    try:
        return b, connection_by_name(cfg.connection or "partition", b)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def run_experiment(cfg: ExperimentConfig, out: str | Path | None = None) -> ExperimentResult:
    cfg.validate()
    runners: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
        "phi-table": phi_table,
        "chern-classification": chern_classification,
        "transport-props": lambda c: transport_props(c, *_bundle_and_connection(c)),
        "functoriality": lambda c: functoriality(c, *_bundle_and_connection(c)),
        "isomorphism": lambda c: isomorphism(c, *_bundle_and_connection(c)),
        "contractible-trivialization": lambda c: contractible_trivialization(c, *_bundle_and_connection(c)),
    }
    result = runners[cfg.experiment](cfg)
    if out is not None:
        write_result(result, cfg, Path(out))
    return result


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def metrics_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "value", "tolerance", "pass"])
    for m in result.metrics:
        w.writerow([m.name, fmt(m.value), fmt(m.tolerance), fmt(m.passed)])
    return buf.getvalue()


def write_result(result: ExperimentResult, cfg: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.experiment
    paths = [out / f"{stem}.csv"]
    paths[0].write_text(metrics_csv(result))
    for name, rows in result.tables.items():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rows[0])
        for row in rows[1:]:
            w.writerow([fmt(v) for v in row])
        p = out / f"{name}.csv"
        p.write_text(buf.getvalue())
        paths.append(p)
    summary_path = out / f"{stem}.json"
    paths.append(summary_path)
    result.artifacts = [str(p) for p in paths]
    summary = {
        "experiment": result.experiment,
        "pass": result.passed,
        "config": dataclasses.asdict(cfg),
        "metrics": [{"name": m.name, "value": m.value, "tolerance": m.tolerance, "pass": m.passed}
                    for m in result.metrics],
        "artifacts": result.artifacts,
    }
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")


def load_config(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat JSON object")
    return data
