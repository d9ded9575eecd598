"""Scenario files: a strict, versioned JSON description of one simulation
or sweep, plus the machinery that runs them and writes reports.

A scenario selects a model (plain populations, per-cluster structured
dynamics, or the frozen-moment aggregate system), a graph, rates, an
initial condition, and solver settings. Unknown fields are errors, not
warnings: a silently ignored typo corrupts an experiment. All randomness
flows from the scenario seed (PCG64), so re-running a scenario reproduces
its trajectory CSV byte for byte. The environment variable SWARMNET_SEED,
when set, overrides the scenario seed.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dynamics, graphs, numkit, structured
from .errors import ScenarioError

SCHEMA_VERSION = 1

_MODELS = ("unstructured", "structured-clusters", "structured-moments")
_TOP_KEYS = {"schema", "name", "model", "graph", "params", "distribution",
             "initial", "psi", "solver", "outputs"}
_GRAPH_KEYS = {"generator", "n", "offsets", "edgelist"}
_PARAM_KEYS = {"gamma", "r", "alpha", "sigma"}
_DIST_KEYS = {"kind", "kmax", "exponent", "path"}
_INITIAL_KEYS = {"sampler", "x_range", "y_range", "file"}
_PSI_KEYS = {"source", "path", "psi_x", "psi_y", "psi_z"}
_SOLVER_KEYS = {"dt", "t_end", "sample_every", "seed", "tol_stationary",
                "tol_consensus", "stop_when_stationary"}


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    graph_spec: dict
    params: dynamics.ModelParams
    distribution_spec: dict | None
    initial_spec: dict
    psi_spec: dict | None
    solver: numkit.SolverConfig
    stop_when_stationary: bool
    outputs: Path
    base_dir: Path
    raw: dict


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"unknown field(s) {sorted(unknown)} in {where}")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ScenarioError(f"missing required field '{key}' in {where}")
    return obj[key]


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
    return parse_scenario(raw, base_dir=path.parent, default_name=path.stem)


def parse_scenario(raw: dict, base_dir: Path, default_name: str = "scenario") -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "scenario")
    schema = _require(raw, "schema", "scenario")
    if schema != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema version {schema}; expected {SCHEMA_VERSION}")
    model = _require(raw, "model", "scenario")
    if model not in _MODELS:
        raise ScenarioError(f"unknown model {model!r}; expected one of {_MODELS}")

    graph_spec = _require(raw, "graph", "scenario")
    _check_keys(graph_spec, _GRAPH_KEYS, "graph")

    params_spec = _require(raw, "params", "scenario")
    _check_keys(params_spec, _PARAM_KEYS, "params")
    try:
        params = dynamics.ModelParams(
            gamma=float(_require(params_spec, "gamma", "params")),
            r=float(_require(params_spec, "r", "params")),
            alpha=float(_require(params_spec, "alpha", "params")),
            sigma=float(_require(params_spec, "sigma", "params")),
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid params: {exc}") from None

    dist_spec = raw.get("distribution")
    if model == "structured-clusters" and dist_spec is None:
        raise ScenarioError("structured-clusters model requires a 'distribution'")
    if model == "unstructured" and dist_spec is not None:
        raise ScenarioError("'distribution' is only valid for structured models")
    if dist_spec is not None:
        _check_keys(dist_spec, _DIST_KEYS, "distribution")

    psi_spec = raw.get("psi")
    if model == "structured-moments":
        if psi_spec is None:
            raise ScenarioError("structured-moments model requires a 'psi' source")
        _check_keys(psi_spec, _PSI_KEYS, "psi")
        source = _require(psi_spec, "source", "psi")
        if source not in ("cluster-scenario", "values"):
            raise ScenarioError(f"psi.source must be 'cluster-scenario' or 'values', got {source!r}")
        if source == "values" and dist_spec is None:
            raise ScenarioError("psi.source 'values' requires a 'distribution' for kmax and moments")
    elif psi_spec is not None:
        raise ScenarioError("'psi' is only valid for the structured-moments model")

    initial_spec = raw.get("initial", {"sampler": "uniform"})
    _check_keys(initial_spec, _INITIAL_KEYS, "initial")

    solver_spec = _require(raw, "solver", "scenario")
    _check_keys(solver_spec, _SOLVER_KEYS, "solver")
    seed = int(solver_spec.get("seed", 0))
    env_seed = os.environ.get("SWARMNET_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ScenarioError(f"SWARMNET_SEED must be an integer, got {env_seed!r}") from None
    try:
        solver = numkit.SolverConfig(
            dt=float(_require(solver_spec, "dt", "solver")),
            t_end=float(_require(solver_spec, "t_end", "solver")),
            sample_every=int(solver_spec.get("sample_every", 1)),
            seed=seed,
            tol_stationary=float(solver_spec.get("tol_stationary", 1e-10)),
            tol_consensus=float(solver_spec.get("tol_consensus", 1e-8)),
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid solver config: {exc}") from None

    return Scenario(
        name=str(raw.get("name", default_name)),
        model=model,
        graph_spec=dict(graph_spec),
        params=params,
        distribution_spec=dict(dist_spec) if dist_spec is not None else None,
        initial_spec=dict(initial_spec),
        psi_spec=dict(psi_spec) if psi_spec is not None else None,
        solver=solver,
        stop_when_stationary=bool(solver_spec.get("stop_when_stationary", False)),
        outputs=Path(raw.get("outputs", "out")),
        base_dir=base_dir,
        raw=raw,
    )


def build_graph(spec: dict, base_dir: Path) -> graphs.RegularGraph:
    if "edgelist" in spec:
        if "generator" in spec:
            raise ScenarioError("graph: give either 'generator' or 'edgelist', not both")
        return graphs.load_edgelist(str(base_dir / spec["edgelist"]))
    generator = _require(spec, "generator", "graph")
    if generator == "buckminster":
        return graphs.build_buckminster()
    if generator == "circulant":
        n = int(_require(spec, "n", "graph"))
        offsets = [int(o) for o in _require(spec, "offsets", "graph")]
        return graphs.build_circulant(n, offsets)
    if generator == "complete":
        return graphs.build_complete(int(_require(spec, "n", "graph")))
    raise ScenarioError(f"unknown graph generator {generator!r}")


def build_distribution(spec: dict, base_dir: Path) -> structured.DegreeDistribution:
    kind = _require(spec, "kind", "distribution")
    if kind == "powerlaw":
        return structured.powerlaw_distribution(
            kmax=int(_require(spec, "kmax", "distribution")),
            exponent=float(spec.get("exponent", 3.0)),
        )
    if kind == "csv":
        return structured.load_distribution_csv(str(base_dir / _require(spec, "path", "distribution")))
    raise ScenarioError(f"unknown distribution kind {kind!r}")


def _initial_population(scn: Scenario, n: int) -> dynamics.PopulationState:
    spec = scn.initial_spec
    if "file" in spec:
        data = np.loadtxt(scn.base_dir / spec["file"], delimiter=",", skiprows=1)
        data = np.atleast_2d(data)
        if data.shape != (n, 2):
            raise ScenarioError(f"initial state file must have {n} rows of x,y")
        return dynamics.PopulationState(data[:, 0], data[:, 1])
    sampler = spec.get("sampler", "uniform")
    kwargs = {}
    if "x_range" in spec:
        kwargs["x_range"] = tuple(float(v) for v in spec["x_range"])
    if "y_range" in spec:
        kwargs["y_range"] = tuple(float(v) for v in spec["y_range"])
    return dynamics.sample_simplex_state(n, scn.solver.seed, sampler, **kwargs)


def _initial_clusters(scn: Scenario, n: int, kmax: int) -> structured.ClusteredState:
    spec = scn.initial_spec
    if "file" in spec:
        raise ScenarioError("file initial conditions are only supported for the unstructured model")
    sampler = spec.get("sampler", "uniform")
    kwargs = {}
    if "x_range" in spec:
        kwargs["x_range"] = tuple(float(v) for v in spec["x_range"])
    if "y_range" in spec:
        kwargs["y_range"] = tuple(float(v) for v in spec["y_range"])
    return structured.sample_cluster_state(n, kmax, scn.solver.seed, sampler, **kwargs)


def _cert_dict(cert: dynamics.StabilityCertificate) -> dict:
    return {
        "condition": cert.condition,
        "lhs": cert.lhs,
        "rhs_bounds": list(cert.rhs_bounds),
        "margin": cert.margin,
        "holds": cert.holds,
    }


def run_scenario(scn: Scenario, outputs_override: Path | None = None) -> dict:
    """Run one scenario end to end; writes the trajectory CSV and the JSON
    report into the outputs directory and returns the report."""
    t_wall = time.perf_counter()
    outdir = Path(outputs_override) if outputs_override is not None else scn.base_dir / scn.outputs
    outdir.mkdir(parents=True, exist_ok=True)
    graph = build_graph(scn.graph_spec, scn.base_dir)

    if scn.model == "unstructured":
        report = _run_unstructured(scn, graph, outdir)
    elif scn.model == "structured-clusters":
        report = _run_clusters(scn, graph, outdir)
    else:
        report = _run_moments(scn, graph, outdir)

    report["scenario"] = scn.raw
    report["seed"] = scn.solver.seed
    report["wall_clock_s"] = time.perf_counter() - t_wall
    report_path = outdir / f"{scn.name}_report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    report["report_path"] = str(report_path)
    return report


def _run_unstructured(scn: Scenario, graph: graphs.RegularGraph, outdir: Path) -> dict:
    state0 = _initial_population(scn, graph.n)
    cfg = scn.solver
    traj = dynamics.integrate(
        state0,
        scn.params,
        graph,
        cfg.dt,
        cfg.t_end,
        sample_every=cfg.sample_every,
        stop_tol=cfg.tol_stationary if scn.stop_when_stationary else None,
    )
    csv_path = outdir / f"{scn.name}_trajectory.csv"
    traj.to_csv(str(csv_path))

    final = traj.final
    dx, dy = dynamics.vector_field(final, scn.params, graph)
    residual = max(float(np.abs(dx).max()), float(np.abs(dy).max()))
    spread = max(numkit.spread(final.x), numkit.spread(final.y))
    candidates = dynamics.all_equilibria(scn.params, graph.d)
    best, dist = dynamics.best_equilibrium_match(final, candidates)
    certificates = []
    for eq in candidates:
        cert = dynamics.certify_stability(eq, scn.params, graph.d)
        certificates.append(dynamics.certificate_report(eq, cert))
    return {
        "model": scn.model,
        "graph": {"n": graph.n, "degree": graph.d, "edges": graph.edge_count},
        "terminal": {
            "t": float(traj.times[-1]),
            "x": final.x.tolist(),
            "y": final.y.tolist(),
            "mean_x": float(final.x.mean()),
            "mean_y": float(final.y.mean()),
        },
        "consensus": {"reached": spread < cfg.tol_consensus, "spread": spread},
        "stationary": {
            "residual": residual,
            "reached": residual < cfg.tol_stationary,
            "stopped_at": traj.stationary_time,
        },
        "matched_equilibrium": {
            "case_tag": best.case_tag,
            "xi": best.xi,
            "mu": best.mu,
            "zeta": best.zeta,
            "match_distance": dist,
            "residual": residual,
        },
        "certificates": certificates,
        "clamp_events": traj.clamp_events,
        "trajectory_csv": str(csv_path),
    }


def _run_clusters(scn: Scenario, graph: graphs.RegularGraph, outdir: Path) -> dict:
    dist = build_distribution(scn.distribution_spec, scn.base_dir)
    state0 = _initial_clusters(scn, graph.n, dist.kmax)
    cfg = scn.solver
    traj = structured.integrate_clusters(
        state0,
        scn.params,
        graph,
        dist,
        cfg.dt,
        cfg.t_end,
        sample_every=cfg.sample_every,
        stop_tol=cfg.tol_stationary if scn.stop_when_stationary else None,
    )
    csv_path = outdir / f"{scn.name}_trajectory.csv"
    traj.to_csv(str(csv_path))

    final = traj.final
    dX, dY = structured.cluster_vector_field(final, scn.params, graph, dist)
    residual = max(float(np.abs(dX).max()), float(np.abs(dY).max()))
    node_spread = max(
        float((final.x.max(axis=0) - final.x.min(axis=0)).max()),
        float((final.y.max(axis=0) - final.y.min(axis=0)).max()),
    )
    cluster_x = final.x.mean(axis=0)
    cluster_y = final.y.mean(axis=0)
    theta_star, x_star = structured.solve_selfconsistent_theta(dist, scn.params, graph.d)
    match_distance = max(
        float(np.abs(cluster_x - x_star).max()), float(np.abs(cluster_y - x_star).max())
    )
    psi_x, psi_y, psi_z = structured.compute_psi(final, dist)
    psi_star = (float(psi_x.mean()) + float(psi_y.mean())) / 2.0
    thm_cert = structured.certify_structured(
        float(psi_x.mean()), float(psi_y.mean()), float(psi_z.mean()),
        scn.params, graph.d, dist.kmax,
    )
    sym_cert = structured.certify_symmetric_structured(psi_star, dist, scn.params, graph.d)
    return {
        "model": scn.model,
        "graph": {"n": graph.n, "degree": graph.d, "edges": graph.edge_count},
        "distribution": {
            "kmax": dist.kmax,
            "mean_k": dist.mean_k,
            "second_moment": dist.second_moment,
        },
        "terminal": {
            "t": float(traj.times[-1]),
            "cluster_x": cluster_x.tolist(),
            "cluster_y": cluster_y.tolist(),
        },
        "consensus": {"reached": node_spread < cfg.tol_consensus, "spread": node_spread},
        "stationary": {
            "residual": residual,
            "reached": residual < cfg.tol_stationary,
            "stopped_at": traj.stationary_time,
        },
        "matched_equilibrium": {
            "kind": "self-consistent-symmetric",
            "theta_star": theta_star,
            "x_star": x_star.tolist(),
            "match_distance": match_distance,
            "residual": residual,
        },
        "psi_star": {
            "psi_x": float(psi_x.mean()),
            "psi_y": float(psi_y.mean()),
            "psi_z": float(psi_z.mean()),
        },
        "certificates": [_cert_dict(thm_cert), _cert_dict(sym_cert)],
        "clamp_events": traj.clamp_events,
        "trajectory_csv": str(csv_path),
    }


def _resolve_psi(scn: Scenario, graph: graphs.RegularGraph):
    """Frozen second moments for a moments run, plus the distribution they
    came from: either literal values or the terminal state of a referenced
    cluster scenario (run on the fly)."""
    spec = scn.psi_spec
    if spec["source"] == "values":
        dist = build_distribution(scn.distribution_spec, scn.base_dir)
        n = graph.n

        def vec(v):
            arr = np.asarray(v, dtype=float)
            return np.full(n, float(arr)) if arr.ndim == 0 else arr

        return vec(spec["psi_x"]), vec(spec["psi_y"]), vec(spec["psi_z"]), dist
    ref = load_scenario(scn.base_dir / _require(spec, "path", "psi"))
    if ref.model != "structured-clusters":
        raise ScenarioError("psi.source 'cluster-scenario' must reference a structured-clusters scenario")
    ref_graph = build_graph(ref.graph_spec, ref.base_dir)
    if ref_graph.n != graph.n:
        raise ScenarioError(
            f"referenced cluster scenario has {ref_graph.n} nodes, this one has {graph.n}"
        )
    dist = build_distribution(ref.distribution_spec, ref.base_dir)
    state0 = _initial_clusters(ref, ref_graph.n, dist.kmax)
    traj = structured.integrate_clusters(
        state0, ref.params, ref_graph, dist, ref.solver.dt, ref.solver.t_end,
        sample_every=ref.solver.n_steps,  # only the terminal state is needed
        stop_tol=ref.solver.tol_stationary if ref.stop_when_stationary else None,
    )
    psi_x, psi_y, psi_z = structured.compute_psi(traj.final, dist)
    return psi_x, psi_y, psi_z, dist


def _run_moments(scn: Scenario, graph: graphs.RegularGraph, outdir: Path) -> dict:
    psi_x, psi_y, psi_z, dist = _resolve_psi(scn, graph)
    cfg = scn.solver
    tx0, ty0 = numkit.sample_simplex_pairs(
        graph.n, cfg.seed, scn.initial_spec.get("sampler", "uniform")
    )
    traj = structured.integrate_moments(
        tx0, ty0, psi_x, psi_y, psi_z, scn.params, graph, dist.kmax,
        cfg.dt, cfg.t_end,
        sample_every=cfg.sample_every,
        stop_tol=cfg.tol_stationary if scn.stop_when_stationary else None,
    )
    csv_path = outdir / f"{scn.name}_trajectory.csv"
    traj.to_csv(str(csv_path))

    tx = traj.theta_x[-1]
    ty = traj.theta_y[-1]
    dtx, dty = structured.theta_vector_field(
        tx, ty, psi_x, psi_y, psi_z, scn.params, graph, dist.kmax
    )
    residual = max(float(np.abs(dtx).max()), float(np.abs(dty).max()))
    spread = max(numkit.spread(tx), numkit.spread(ty))
    eq_tx, eq_ty = structured.theta_equilibrium(
        psi_x, psi_y, psi_z, scn.params, graph, dist.kmax
    )
    match_distance = max(
        float(np.abs(tx - eq_tx).max()), float(np.abs(ty - eq_ty).max())
    )
    psi_star = (float(psi_x.mean()) + float(psi_y.mean())) / 2.0
    thm_cert = structured.certify_structured(
        float(psi_x.mean()), float(psi_y.mean()), float(psi_z.mean()),
        scn.params, graph.d, dist.kmax,
    )
    sym_cert = structured.certify_symmetric_structured(psi_star, dist, scn.params, graph.d)
    return {
        "model": scn.model,
        "graph": {"n": graph.n, "degree": graph.d, "edges": graph.edge_count},
        "terminal": {
            "t": float(traj.times[-1]),
            "theta_x": tx.tolist(),
            "theta_y": ty.tolist(),
        },
        "consensus": {"reached": spread < cfg.tol_consensus, "spread": spread},
        "stationary": {
            "residual": residual,
            "reached": residual < cfg.tol_stationary,
            "stopped_at": traj.stationary_time,
        },
        "matched_equilibrium": {
            "kind": "frozen-psi-linear-solve",
            "theta_x_star": eq_tx.tolist(),
            "theta_y_star": eq_ty.tolist(),
            "match_distance": match_distance,
            "residual": residual,
        },
        "frozen_psi": {
            "psi_x": psi_x.tolist(),
            "psi_y": psi_y.tolist(),
            "psi_z": psi_z.tolist(),
        },
        "certificates": [_cert_dict(thm_cert), _cert_dict(sym_cert)],
        "trajectory_csv": str(csv_path),
    }


# ---------------------------------------------------------------------------
# Equilibria listing and parameter sweeps

def list_equilibria(
    params: dynamics.ModelParams,
    d: int,
    dist: structured.DegreeDistribution | None = None,
) -> dict:
    """All closed-form equilibria with their certificates; includes the
    per-cluster self-consistent table when a distribution is given."""
    case1 = dynamics.equilibrium_case1(params, d)
    case2 = dynamics.equilibrium_case2(params, d)
    out = {
        "params": {"gamma": params.gamma, "r": params.r,
                   "alpha": params.alpha, "sigma": params.sigma},
        "degree": d,
        "case1": dynamics.certificate_report(case1, dynamics.certify_stability(case1, params, d)),
        "case2": [
            dynamics.certificate_report(eq, dynamics.certify_stability(eq, params, d))
            for eq in case2
        ],
    }
    if not case2:
        zeta = params.alpha / (params.r * d)
        out["case2_note"] = (
            "zeta infeasible" if zeta > 1.0 else "no real root in the simplex"
        )
    if dist is not None:
        theta_star, x_star = structured.solve_selfconsistent_theta(dist, params, d)
        psi_star = float((dist.k**2 * dist.p / dist.mean_k) @ x_star)
        psi_z_star = dist.second_moment / dist.mean_k - 2.0 * psi_star
        out["structured"] = {
            "kmax": dist.kmax,
            "theta_star": theta_star,
            "x_star": x_star.tolist(),
            "psi_star": psi_star,
            "certificates": [
                _cert_dict(structured.certify_structured(
                    psi_star, psi_star, psi_z_star, params, d, dist.kmax)),
                _cert_dict(structured.certify_symmetric_structured(
                    psi_star, dist, params, d)),
            ],
        }
    return out


_SWEEP_AXES = ("gamma", "r", "alpha", "sigma", "d")


def sweep_scenario(
    scn: Scenario,
    axis: str,
    values: list[float],
    out_path: Path | None = None,
    *,
    decay_trials: int = 3,
    decay_perturbation: float = 1e-3,
) -> Path:
    """One row of equilibria, certificate margins and decay-oracle outcomes
    per axis value; single-point failures are recorded in-row and the sweep
    continues. Writes (and returns the path of) a CSV."""
    if axis not in _SWEEP_AXES:
        raise ScenarioError(f"sweep axis must be one of {_SWEEP_AXES}, got {axis!r}")
    outdir = scn.base_dir / scn.outputs
    outdir.mkdir(parents=True, exist_ok=True)
    if out_path is None:
        out_path = outdir / f"{scn.name}_sweep_{axis}.csv"

    base_graph = build_graph(scn.graph_spec, scn.base_dir)
    frozen = None
    if scn.distribution_spec is not None:
        dist = build_distribution(scn.distribution_spec, scn.base_dir)
        theta_star, x_star = structured.solve_selfconsistent_theta(dist, scn.params, base_graph.d)
        psi_star = float((dist.k**2 * dist.p / dist.mean_k) @ x_star)
        psi_z_star = dist.second_moment / dist.mean_k - 2.0 * psi_star
        frozen = (dist, psi_star, psi_z_star)

    fields = [
        "value",
        "case1_xi", "case1_zeta", "case1_margin", "case1_holds", "case1_decay",
        "case2_xi_a", "case2_mu_a", "case2_margin_a", "case2_holds_a", "case2_decay_a",
        "case2_xi_b", "case2_mu_b", "case2_margin_b", "case2_holds_b", "case2_decay_b",
        "thm4_margin", "cor5_margin", "error",
    ]
    rows = []
    for value in values:
        row = {f: "" for f in fields}
        row["value"] = numkit.format_float(value)
        try:
            if axis == "d":
                d = int(value)
                if d == base_graph.d:
                    graph = base_graph
                else:
                    offsets = graphs.circulant_offsets_for_degree(base_graph.n, d)
                    graph = graphs.build_circulant(base_graph.n, offsets)
                params = scn.params
            else:
                graph = base_graph
                kwargs = {"gamma": scn.params.gamma, "r": scn.params.r,
                          "alpha": scn.params.alpha, "sigma": scn.params.sigma}
                kwargs[axis] = float(value)
                params = dynamics.ModelParams(**kwargs)
                d = graph.d

            case1 = dynamics.equilibrium_case1(params, d)
            cert1 = dynamics.certify_stability(case1, params, d)
            row["case1_xi"] = numkit.format_float(case1.xi)
            row["case1_zeta"] = numkit.format_float(case1.zeta)
            row["case1_margin"] = numkit.format_float(cert1.margin)
            row["case1_holds"] = str(cert1.holds).lower()
            if cert1.holds and decay_trials > 0:
                ok = dynamics.decay_oracle(
                    case1, params, graph, decay_perturbation, decay_trials,
                    seed=scn.solver.seed,
                )
                row["case1_decay"] = str(ok).lower()
            for label, eq in zip(("a", "b"), dynamics.equilibrium_case2(params, d)):
                cert = dynamics.certify_stability(eq, params, d)
                row[f"case2_xi_{label}"] = numkit.format_float(eq.xi)
                row[f"case2_mu_{label}"] = numkit.format_float(eq.mu)
                row[f"case2_margin_{label}"] = numkit.format_float(cert.margin)
                row[f"case2_holds_{label}"] = str(cert.holds).lower()
                if cert.holds and decay_trials > 0:
                    ok = dynamics.decay_oracle(
                        eq, params, graph, decay_perturbation, decay_trials,
                        seed=scn.solver.seed,
                    )
                    row[f"case2_decay_{label}"] = str(ok).lower()
            if frozen is not None:
                dist, psi_star, psi_z_star = frozen
                thm = structured.certify_structured(
                    psi_star, psi_star, psi_z_star, params, d, dist.kmax)
                cor = structured.certify_symmetric_structured(psi_star, dist, params, d)
                row["thm4_margin"] = numkit.format_float(thm.margin)
                row["cor5_margin"] = numkit.format_float(cor.margin)
        except Exception as exc:  # recorded in-row; the sweep continues
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(fields) + "\n")
        for row in rows:
            fh.write(",".join(str(row[f]).replace(",", ";") for f in fields) + "\n")
    return Path(out_path)
