"""Run orchestration: ensembles, sweeps, verification, and artifacts.

A run directory contains manifest.json (config echo + environment; enough
to re-execute the run), events.json, dimension.json, summary.json, and
optionally thinned trajectory CSVs.  summary.json is serialized
canonically (sorted keys) and is byte-identical across reruns and worker
counts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .besq import BesqSpec, besq_exact_transition, besq_hit_probability
from .collisions import EnsembleCollector, fit_box_dimension
from .config import ConfigError, RunConfig, parse_config
from .engine import (e_poly_drift, log_e_drift_components, mc_drift_estimate,
                     simulate_ensemble)
from .models import dimension_bound_predictor, make_preset
from .roots import build_root_system, reflect
from .sympoly import (elementary, residual_e_form2,
                      residual_reflection_identities)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_json(path, obj):
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=1)
    Path(path).write_text(text + "\n")


def config_digest(doc: dict) -> str:
    return hashlib.sha256(
        json.dumps(_jsonable(doc), sort_keys=True).encode()
    ).hexdigest()[:16]


def _run_chunk(doc: dict, start: int, count: int, seed_extra: tuple,
               record: bool = False) -> dict:
    """Integrate trajectories [start, start+count) and collect statistics.

    Top-level so it can run in a worker process; the model is rebuilt from
    the config document because coefficient callables do not pickle.
    """
    cfg = parse_config(doc)
    R = cfg.root_system()
    model = cfg.model()
    x0 = cfg.x0_array(R)
    scales = cfg.scale_list()
    collector = EnsembleCollector(
        R, cfg.weights, count, cfg.T, cfg.eps_grid,
        cfg.resolved_dim_eps(), scales,
    )
    res = simulate_ensemble(
        model, R, x0, cfg.T, cfg.policy, cfg.seed, count,
        base_index=start, seed_extra=tuple(seed_extra),
        collector=collector, record=record,
    )
    collector.finalize()
    return {
        "start": start,
        "count": count,
        "final_states": res.final_states,
        "final_times": res.final_times,
        "lifetime_flags": res.lifetime_flags,
        "stuck_flags": res.stuck_flags,
        "rejected_steps": res.rejected_steps,
        "accepted_steps": res.accepted_steps,
        "order1": {e: collector.events_order1[e] for e in collector.eps_list},
        "order2": {e: collector.events_order2[e] for e in collector.eps_list},
        "argmin": {e: collector.argmin_counts[e] for e in collector.eps_list},
        "intervals": {e: collector.intervals[e] for e in collector.eps_list},
        "box_counts": {s: int(collector._occ[s].sum()) for s in collector.scales},
        "records": res.records,
    }


def _chunk_bounds(total: int, workers: int) -> list[tuple[int, int]]:
    sizes = [total // workers + (1 if i < total % workers else 0)
             for i in range(workers)]
    bounds, start = [], 0
    for s in sizes:
        if s:
            bounds.append((start, s))
        start += s
    return bounds


def _execute(doc: dict, seed_extra: tuple = (), workers: int = 1,
             record: bool = False) -> dict:
    """Run the full ensemble, merging worker chunks in index order."""
    cfg = parse_config(doc)
    bounds = _chunk_bounds(cfg.ensemble, max(1, workers))
    if len(bounds) == 1:
        chunks = [_run_chunk(doc, bounds[0][0], bounds[0][1], seed_extra, record)]
    else:
        with ProcessPoolExecutor(max_workers=len(bounds)) as pool:
            futures = [pool.submit(_run_chunk, doc, s, c, seed_extra, record)
                       for s, c in bounds]
            chunks = [f.result() for f in futures]
    chunks.sort(key=lambda c: c["start"])

    merged = {
        "final_states": np.concatenate([c["final_states"] for c in chunks]),
        "final_times": np.concatenate([c["final_times"] for c in chunks]),
        "lifetime_flags": np.concatenate([c["lifetime_flags"] for c in chunks]),
        "stuck_flags": np.concatenate([c["stuck_flags"] for c in chunks]),
        "rejected_steps": np.concatenate([c["rejected_steps"] for c in chunks]),
        "accepted_steps": np.concatenate([c["accepted_steps"] for c in chunks]),
        "order1": {}, "order2": {}, "argmin": {}, "intervals": {},
        "box_counts": {},
        "records": None,
    }
    for eps in cfg.eps_grid:
        merged["order1"][eps] = np.concatenate([c["order1"][eps] for c in chunks])
        merged["order2"][eps] = np.concatenate([c["order2"][eps] for c in chunks])
        merged["argmin"][eps] = np.concatenate([c["argmin"][eps] for c in chunks])
        merged["intervals"][eps] = sum((c["intervals"][eps] for c in chunks), [])
    for s in cfg.scale_list():
        merged["box_counts"][s] = sum(c["box_counts"][s] for c in chunks)
    if record:
        merged["records"] = sum((c["records"] for c in chunks), [])
    return merged


def _summarize(cfg: RunConfig, merged: dict) -> dict:
    R = cfg.root_system()
    model = cfg.model()
    estimate = fit_box_dimension(merged["box_counts"], cfg.T,
                                 n_samples=cfg.ensemble)
    bounds = dimension_bound_predictor(model, R)
    P = cfg.ensemble
    event_rates = {}
    for eps in cfg.eps_grid:
        n1, n2 = merged["order1"][eps], merged["order2"][eps]
        event_rates[f"{eps:g}"] = {
            "order1": float(np.mean(n1 > 0)),
            "order2": float(np.mean(n2 > 0)),
            "any": float(np.mean((n1 + n2) > 0)),
        }
    return {
        "schema_version": 1,
        "config_digest": config_digest(cfg.raw),
        "family": cfg.family,
        "N": cfg.N,
        "preset": cfg.preset,
        "params": cfg.params,
        "T": cfg.T,
        "ensemble": P,
        "seed": cfg.seed,
        "dimension": {
            "value": estimate.value,
            "slope": estimate.slope,
            "stderr": estimate.stderr,
            "scale_window": list(estimate.scale_window),
            "flag": estimate.flag,
            "dim_eps": cfg.resolved_dim_eps(),
            "dim_eps_rule": "0.1 * sqrt(dt_max) unless set explicitly",
        },
        "event_rates": event_rates,
        "predictor": {
            "lower": bounds.lower,
            "upper": bounds.upper,
            "closed_form": bounds.closed_form,
            "note": bounds.note,
        },
        "paths": {
            "exploded": int(merged["lifetime_flags"].sum()),
            "stuck": int(merged["stuck_flags"].sum()),
            "accepted_steps": int(merged["accepted_steps"].sum()),
            "rejected_steps": int(merged["rejected_steps"].sum()),
        },
    }


def _write_trajectories(out: Path, records, R, stride: int):
    tdir = out / "trajectories"
    tdir.mkdir(exist_ok=True)
    pm = R.positive_matrix
    for rec in records:
        with open(tdir / f"traj_{rec.traj_index:06d}.csv", "w", newline="") as fh:
            wtr = csv.writer(fh)
            wtr.writerow(["t"] + [f"x_{i+1}" for i in range(R.N)] + ["dt", "min_gap"])
            dts = np.concatenate([[0.0], rec.step_sizes])
            for i in range(0, len(rec.times), stride):
                gap = float(np.min(pm @ rec.states[i]))
                wtr.writerow([f"{rec.times[i]:.12g}"]
                             + [f"{v:.12g}" for v in rec.states[i]]
                             + [f"{dts[i]:.12g}", f"{gap:.12g}"])


def run_simulate(cfg: RunConfig, out_dir=None, workers=None) -> dict:
    """Run an ensemble and persist the run directory; returns the manifest."""
    workers = workers or cfg.workers
    out = Path(out_dir) if out_dir else default_run_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.monotonic()
    merged = _execute(cfg.raw, workers=workers, record=cfg.record_trajectories)
    wall = time.monotonic() - t0

    summary = _summarize(cfg, merged)
    write_json(out / "summary.json", summary)
    write_json(out / "events.json", {
        "eps_grid": list(cfg.eps_grid),
        "dim_eps": cfg.resolved_dim_eps(),
        "per_eps": {
            f"{eps:g}": {
                "order1_counts": merged["order1"][eps],
                "order2_counts": merged["order2"][eps],
                "argmin_counts": merged["argmin"][eps],
                "intervals": merged["intervals"][eps],
            }
            for eps in cfg.eps_grid
        },
    })
    write_json(out / "dimension.json", {
        "dim_eps": cfg.resolved_dim_eps(),
        "scales": cfg.scale_list(),
        "pooled_counts": {f"{s:g}": n for s, n in merged["box_counts"].items()},
        "estimate": summary["dimension"],
        "note": ("box-counting proxy for the Hausdorff dimension; "
                 "threshold defaults to 0.1 * sqrt(dt_max)"),
    })
    if cfg.record_trajectories:
        _write_trajectories(out, merged["records"], cfg.root_system(),
                            cfg.thin_stride)

    manifest = {
        "config": cfg.raw,
        "version": __version__,
        "seed_scheme": "philox key = sha256(master_seed, trajectory_index)",
        "trajectory_index_range": [0, cfg.ensemble - 1],
        "workers": workers,
        "wall_clock_s": wall,
        "step_stats": summary["paths"],
        "summary": summary,
        "artifacts": sorted({p.name for p in out.iterdir() if p.is_file()}
                            | {"manifest.json"}),
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def default_run_dir(cfg: RunConfig) -> Path:
    root = cfg.output_dir or os.environ.get("WEYLGAS_OUTPUT_ROOT", "runs")
    return Path(root) / f"run_{config_digest(cfg.raw)}"


def rerun_from_manifest(manifest_path, out_dir=None, workers=None) -> dict:
    """Re-execute a run from its manifest alone."""
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    cfg = parse_config(manifest["config"])
    return run_simulate(cfg, out_dir=out_dir, workers=workers)


def reanalyze_dimension(run_dir, eps=None, scales=None) -> dict:
    """Recompute the box-counting estimate from a persisted run directory.

    ``eps`` must be one of the eps values the run recorded events at (the
    raw min-projection series is not persisted); ``scales`` may be any new
    list of scales within the horizon.
    """
    run_dir = Path(run_dir)
    with open(run_dir / "events.json") as fh:
        events = json.load(fh)
    with open(run_dir / "manifest.json") as fh:
        manifest = json.load(fh)
    cfg = parse_config(manifest["config"])

    available = {f"{e:g}" for e in events["eps_grid"]}
    key = f"{eps:g}" if eps is not None else f"{min(events['eps_grid']):g}"
    if key not in available:
        raise ValueError(
            f"eps {key} was not recorded; available: {sorted(available)}")
    scales = sorted(float(s) for s in (scales or cfg.scale_list()))

    from .collisions import box_counts
    total = {s: 0 for s in scales}
    for path_intervals in events["per_eps"][key]["intervals"]:
        for s, n in box_counts(path_intervals, scales, cfg.T).items():
            total[s] += n
    estimate = fit_box_dimension(total, cfg.T, n_samples=cfg.ensemble)
    result = {
        "eps": float(key),
        "scales": scales,
        "pooled_counts": {f"{s:g}": n for s, n in total.items()},
        "value": estimate.value,
        "slope": estimate.slope,
        "stderr": estimate.stderr,
        "flag": estimate.flag,
    }
    write_json(run_dir / "dimension_reanalysis.json", result)
    return result


def run_sweep(cfg: RunConfig, out_dir=None, workers=None) -> dict:
    """Run the ensemble at every grid point of a one or two parameter sweep."""
    if cfg.sweep is None:
        raise ConfigError(["sweep requires a 'sweep' section in the config"])
    workers = workers or cfg.workers
    out = Path(out_dir) if out_dir else default_run_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)

    p1 = cfg.sweep["parameter"]
    vals1 = cfg.sweep["values"]
    p2 = cfg.sweep.get("parameter2")
    vals2 = cfg.sweep.get("values2", [None])
    points = [(v1, v2) for v1 in vals1 for v2 in vals2]

    rows = []
    for i, (v1, v2) in enumerate(points):
        doc = {k: v for k, v in cfg.raw.items() if k != "sweep"}
        doc[p1] = v1
        if p2 is not None:
            doc[p2] = v2
        merged = _execute(doc, seed_extra=(i,), workers=workers)
        point_cfg = parse_config(doc)
        summary = _summarize(point_cfg, merged)
        finest = f"{min(cfg.eps_grid):g}"
        row = {
            "point": i,
            p1: v1,
            "predicted_lower": summary["predictor"]["lower"],
            "predicted_upper": summary["predictor"]["upper"],
            "estimated_dimension": summary["dimension"]["value"],
            "stderr": summary["dimension"]["stderr"],
            "event_rate_any": summary["event_rates"][finest]["any"],
            "event_rate_order2": summary["event_rates"][finest]["order2"],
        }
        if p2 is not None:
            row[p2] = v2
        rows.append(row)

    fields = ["point", p1] + ([p2] if p2 else []) + [
        "predicted_lower", "predicted_upper", "estimated_dimension",
        "stderr", "event_rate_any", "event_rate_order2",
    ]
    with open(out / "sweep.csv", "w", newline="") as fh:
        wtr = csv.DictWriter(fh, fieldnames=fields)
        wtr.writeheader()
        wtr.writerows(rows)
    table = {"config": cfg.raw, "rows": rows, "version": __version__}
    write_json(out / "sweep.json", table)
    return table


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


def _verify_algebra(rng: np.random.Generator) -> dict:
    """Exact-identity checks: root closure and polynomial residuals."""
    failures = []
    systems = [("A", 2), ("A", 3), ("A", 4), ("B", 2), ("B", 3), ("D", 3), ("D", 4)]
    for family, N in systems:
        R = build_root_system(family, N)
        full = set(R.roots)
        for y in R.roots:
            for z in R.roots:
                if tuple(reflect(y, z)) not in full:
                    failures.append(f"{family}{N}: closure fails at {y}, {z}")
        sq = [int(v) for v in rng.integers(1, 50, size=R.M)]
        if R.M >= 2:
            for n in range(1, R.M + 1):
                for _ in range(4):
                    i, j = rng.choice(R.M, size=2, replace=False)
                    if residual_e_form2(sq, n, int(i), int(j)) != 0:
                        failures.append(f"{family}{N}: e-identity residual at n={n}")
        x = [int(v) for v in rng.integers(-20, 20, size=N)]
        pm = R.positive_matrix
        for bi, beta in enumerate(R.positive_roots):
            for ai, alpha in enumerate(R.positive_roots):
                if ai == bi or pm[ai] @ pm[bi] == 0:
                    continue
                r1, r2 = residual_reflection_identities(x, alpha, beta, R)
                if r1 != 0 or r2 != 0:
                    failures.append(
                        f"{family}{N}: reflection residual at {alpha}, {beta}")
    return {"passed": not failures, "failures": failures[:20],
            "systems": [f"{f}{n}" for f, n in systems]}


def _verify_drift(rng: np.random.Generator) -> dict:
    """Closed-form drift formulas against the Monte Carlo oracle."""
    failures = []
    checks = []
    cases = [
        ("dyson", {"k": 0.6}, "A", 2, np.array([-0.7, 0.7])),
        ("bessel_b", {"k1": 0.8, "k2": 0.6}, "B", 2, np.array([0.6, 1.5])),
    ]
    for preset, params, family, N, x in cases:
        model = make_preset(preset, **params)
        R = build_root_system(family, N)
        for n in range(1, R.M + 1):
            drift = e_poly_drift(x, model, R, None, n)
            mc, se = mc_drift_estimate(
                x, model, R, lambda y: elementary((R.positive_matrix @ y) ** 2, n),
                h=1e-6, n_samples=4000, seed=int(rng.integers(2**31)))
            ok = abs(drift - mc) <= 3.0 * max(se, 1e-12)
            checks.append({"preset": preset, "n": n, "drift": drift,
                           "mc": mc, "stderr": se, "passed": ok})
            if not ok:
                failures.append(f"{preset} n={n}: e-drift {drift:g} vs MC {mc:g}")
            comps = log_e_drift_components(x, model, R, None, n)
            if comps[4] > 0:
                failures.append(f"{preset} n={n}: A5 positive")
            mc2, se2 = mc_drift_estimate(
                x, model, R,
                lambda y: -np.log(elementary((R.positive_matrix @ y) ** 2, n)),
                h=1e-6, n_samples=4000, seed=int(rng.integers(2**31)))
            if abs(comps.sum() - mc2) > 3.0 * max(se2, 1e-12):
                failures.append(
                    f"{preset} n={n}: log-drift {comps.sum():g} vs MC {mc2:g}")
    return {"passed": not failures, "failures": failures, "checks": checks}


def _verify_oracle(rng: np.random.Generator) -> dict:
    """BESQ oracle self-checks: moments, additivity, hitting law."""
    from scipy.stats import ks_2samp
    failures = []
    n = 100_000
    spec = BesqSpec(delta=1.7, x0=0.8)
    draws = besq_exact_transition(spec, t=0.5, size=n, seed=rng)
    mean_err = abs(draws.mean() - (spec.x0 + spec.delta * 0.5))
    if mean_err > 3.0 * draws.std() / np.sqrt(n):
        failures.append(f"transition mean off by {mean_err:g}")

    s1 = besq_exact_transition(BesqSpec(1.2, 0.3), 0.7, n, rng)
    s2 = besq_exact_transition(BesqSpec(0.9, 0.5), 0.7, n, rng)
    s12 = besq_exact_transition(BesqSpec(2.1, 0.8), 0.7, n, rng)
    ks = ks_2samp(s1 + s2, s12).statistic
    if ks >= 0.01:
        failures.append(f"additivity KS {ks:g} >= 0.01")

    # hit probability vs absorbing fine-step Euler
    spec = BesqSpec(delta=1.0, x0=1.0)
    p_exact = besq_hit_probability(spec, t=1.0)
    paths = 20_000
    dt = 5e-4
    x = np.full(paths, spec.x0)
    hit = np.zeros(paths, dtype=bool)
    for _ in range(int(1.0 / dt)):
        alive = ~hit
        xi = rng.standard_normal(alive.sum())
        x[alive] += spec.delta * dt + 2.0 * np.sqrt(np.maximum(x[alive], 0)) * np.sqrt(dt) * xi
        hit[alive] |= x[alive] <= 0
    p_mc = hit.mean()
    se = np.sqrt(p_mc * (1 - p_mc) / paths)
    # fine-step Euler still discretizes; allow 3 sigma plus a small bias term
    if abs(p_mc - p_exact) > 3.0 * se + 0.02:
        failures.append(f"hit probability {p_exact:g} vs MC {p_mc:g}")
    return {"passed": not failures, "failures": failures}


def run_verify(scope: str = "all", seed: int = 20260823) -> dict:
    """Execute the verification suites; report is machine readable."""
    if scope not in ("algebra", "drift", "oracle", "all"):
        raise ValueError(f"unknown scope {scope!r}")
    rng = np.random.default_rng(seed)
    sections = {}
    if scope in ("algebra", "all"):
        sections["algebra"] = _verify_algebra(rng)
    if scope in ("drift", "all"):
        sections["drift"] = _verify_drift(rng)
    if scope in ("oracle", "all"):
        sections["oracle"] = _verify_oracle(rng)
    passed = all(s["passed"] for s in sections.values())
    return {"scope": scope, "passed": passed, "sections": sections,
            "version": __version__}
