"""Euler-Maruyama integration of the repulsive particle SDE.

The drift is singular on the chamber walls, so stepping is adaptive
(dt proportional to the smallest squared root projection) with
reject-and-halve when a proposal leaves the chamber.  Ensembles are
integrated in lock-step over a vectorized state array; every trajectory
consumes noise from its own counter-based stream, so results do not depend
on chunking or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .models import CoefficientModel
from .rng import trajectory_generator
from .roots import RootSystem
from .sympoly import SymValueTable

_NOISE_BLOCK = 2048


@dataclass(frozen=True)
class StepPolicy:
    """Adaptive step-size and wall-handling policy.

    dt = clamp(safety * (min_alpha <x,alpha>^2)^gap_exponent, dt_min, dt_max),
    halved (with fresh noise) after each rejected proposal.  ``wall_mode``
    is "reject" (reject-and-halve) or "project" (shrink the displacement
    until the proposal sits just inside the chamber).
    """

    dt_max: float = 1e-3
    dt_min: float = 1e-9
    safety: float = 0.1
    gap_exponent: float = 1.0
    wall_mode: str = "reject"
    wall_tol: float = 0.0
    entry_eps: float = 1e-8
    explosion_radius: float = 1e6
    max_rejects: int = 60

    def __post_init__(self):
        if self.dt_min <= 0 or self.dt_max < self.dt_min:
            raise ValueError("need 0 < dt_min <= dt_max")
        if self.wall_mode not in ("reject", "project"):
            raise ValueError("wall_mode must be 'reject' or 'project'")


@dataclass
class TrajectoryRecord:
    """One sampled path with step metadata and seed lineage."""

    times: np.ndarray  # (n+1,)
    states: np.ndarray  # (n+1, N)
    step_sizes: np.ndarray  # (n,)
    master_seed: int
    traj_index: int
    lifetime_flag: bool = False  # explosion proxy triggered before horizon
    stuck: bool = False  # persistent rejection at the dt floor
    rejected_steps: int = 0


@dataclass
class EnsembleResult:
    """Summary output of a vectorized ensemble integration."""

    final_states: np.ndarray  # (P, N)
    final_times: np.ndarray  # (P,)
    lifetime_flags: np.ndarray  # (P,) bool
    stuck_flags: np.ndarray  # (P,) bool
    rejected_steps: np.ndarray  # (P,) int
    accepted_steps: np.ndarray  # (P,) int
    records: Optional[list] = None


def _repulsive_drift(states: np.ndarray, proj: np.ndarray,
                     kvals: np.ndarray, pm: np.ndarray) -> np.ndarray:
    """sum_alpha k_alpha(x) * alpha / <x,alpha> for a batch of states."""
    return (kvals / proj) @ pm


def advance_step(x: Sequence[float], model: CoefficientModel, R: RootSystem,
                 dt: float, noise: Sequence[float],
                 wall_tol: float = 0.0) -> Optional[np.ndarray]:
    """One explicit Euler-Maruyama proposal from an interior state.

    Returns the new configuration, or None when the proposal leaves the
    closed chamber (the caller halves dt and retries with fresh noise).
    Raises on a vanishing projection with positive coupling, where the
    drift is singular; boundary starts must use the entry push instead.
    """
    x = np.asarray(x, dtype=float)
    if dt <= 0:
        raise ValueError("dt must be positive")
    pm = R.positive_matrix
    proj = pm @ x
    kvals = model.coupling_values(x, R)
    if np.any((proj == 0) & (kvals > 0)):
        raise ZeroDivisionError(
            "singular drift: vanishing projection with positive coupling"
        )
    prop = (
        x
        + model.sigma(x) * np.sqrt(dt) * np.asarray(noise, dtype=float)
        + model.drift_b(x) * dt
        + _repulsive_drift(x, proj, kvals, pm) * dt
    )
    if np.min(pm @ prop) <= wall_tol:
        return None
    return prop


def boundary_entry_push(x: Sequence[float], model: CoefficientModel,
                        R: RootSystem, entry_eps: float = 1e-8,
                        max_tries: int = 80) -> np.ndarray:
    """Deterministic push off the chamber boundary.

    Applies only the repulsive drift with pseudo-gap max(<x,alpha>,
    entry_eps) over a time entry_eps, doubling the sub-step until the
    result is interior.  The exact process enters the interior instantly;
    this is the numerical surrogate for that entry.
    """
    x = np.asarray(x, dtype=float)
    pm = R.positive_matrix
    if np.min(pm @ x) < -1e-12:
        raise ValueError("starting point lies outside the closed chamber")
    dt0 = entry_eps
    for _ in range(max_tries):
        proj = np.maximum(pm @ x, entry_eps)
        kvals = model.coupling_values(x, R)
        cand = x + _repulsive_drift(x, proj, kvals, pm) * dt0
        if np.min(pm @ cand) > 0:
            return cand
        dt0 *= 2.0
    raise RuntimeError("boundary entry failed: repulsive push never reached the interior")


def simulate_ensemble(model: CoefficientModel, R: RootSystem,
                      x0: np.ndarray, horizon: float, policy: StepPolicy,
                      master_seed: int, n_paths: int, base_index: int = 0,
                      seed_extra: tuple[int, ...] = (),
                      collector=None, record: bool = False) -> EnsembleResult:
    """Integrate ``n_paths`` trajectories of the SDE to time ``horizon``.

    ``x0`` is one configuration shared by all paths or an (n_paths, N)
    array.  ``collector``, if given, receives per-iteration batches via
    ``collector.update(t_new, proj_new, accepted)`` with the projection
    matrix of accepted states; use it for streaming analytics when full
    records would not fit in memory.
    """
    pm = R.positive_matrix
    P, N = n_paths, R.N
    x0 = np.asarray(x0, dtype=float)
    states = np.broadcast_to(x0, (P, N)).astype(float).copy()
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")

    # boundary starts get the deterministic entry push at t = 0
    start_proj = states @ pm.T
    for p in np.flatnonzero(start_proj.min(axis=1) <= 0):
        states[p] = boundary_entry_push(states[p], model, R, policy.entry_eps)

    gens = [trajectory_generator(master_seed, base_index + p, *seed_extra) for p in range(P)]
    blocks = np.empty((P, _NOISE_BLOCK, N))
    for p in range(P):
        blocks[p] = gens[p].standard_normal((_NOISE_BLOCK, N))
    ptr = np.zeros(P, dtype=np.int64)

    t = np.zeros(P)
    active = np.ones(P, dtype=bool) if horizon > 0 else np.zeros(P, dtype=bool)
    reject_scale = np.ones(P)
    consec_rejects = np.zeros(P, dtype=np.int64)
    rejected_steps = np.zeros(P, dtype=np.int64)
    accepted_steps = np.zeros(P, dtype=np.int64)
    lifetime = np.zeros(P, dtype=bool)
    stuck = np.zeros(P, dtype=bool)

    rec_times = [[0.0] for _ in range(P)] if record else None
    rec_states = [[states[p].copy()] for p in range(P)] if record else None
    rec_dts = [[] for _ in range(P)] if record else None

    sqrt = np.sqrt
    while np.any(active):
        idx = np.flatnonzero(active)
        # refill exhausted noise blocks path by path
        for p in idx[ptr[idx] >= _NOISE_BLOCK]:
            blocks[p] = gens[p].standard_normal((_NOISE_BLOCK, N))
            ptr[p] = 0
        noise = blocks[idx, ptr[idx]]
        ptr[idx] += 1

        xs = states[idx]
        proj = xs @ pm.T
        gap2 = np.min(proj, axis=1) ** 2
        dt = np.clip(policy.safety * gap2**policy.gap_exponent,
                     policy.dt_min, policy.dt_max)
        dt = dt * reject_scale[idx]
        dt = np.minimum(dt, horizon - t[idx])

        kvals = model.coupling_values(xs, R)
        disp = (
            model.sigma(xs) * sqrt(dt)[:, None] * noise
            + model.drift_b(xs) * dt[:, None]
            + _repulsive_drift(xs, proj, kvals, pm) * dt[:, None]
        )
        prop = xs + disp
        prop_proj = prop @ pm.T
        ok = prop_proj.min(axis=1) > policy.wall_tol

        if policy.wall_mode == "project" and not ok.all():
            bad = np.flatnonzero(~ok)
            # shrink the displacement so the smallest projection stays at
            # a small positive fraction of its pre-step value
            dproj = disp[bad] @ pm.T
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = np.where(dproj < 0, (0.05 * proj[bad] - proj[bad]) / dproj, np.inf)
            lam = np.clip(lam.min(axis=1), 0.0, 1.0)
            prop[bad] = xs[bad] + lam[:, None] * disp[bad]
            prop_proj[bad] = prop[bad] @ pm.T
            ok = prop_proj.min(axis=1) > policy.wall_tol

        acc = idx[ok]
        rej = idx[~ok]
        states[acc] = prop[ok]
        t[acc] += dt[ok]
        accepted_steps[acc] += 1
        reject_scale[acc] = 1.0
        consec_rejects[acc] = 0
        reject_scale[rej] *= 0.5
        consec_rejects[rej] += 1
        rejected_steps[rej] += 1

        if record:
            for i, p in enumerate(np.flatnonzero(ok)):
                gp = acc[i]
                rec_times[gp].append(t[gp])
                rec_states[gp].append(prop[ok][i].copy())
                rec_dts[gp].append(dt[ok][i])

        if collector is not None and acc.size:
            collector.update(t[acc], prop_proj[ok], acc)

        # explosion proxy and stuck-step handling
        exploded = acc[np.max(np.abs(states[acc]), axis=1) > policy.explosion_radius]
        lifetime[exploded] = True
        active[exploded] = False
        dead = rej[consec_rejects[rej] > policy.max_rejects]
        stuck[dead] = True
        active[dead] = False
        active[acc[t[acc] >= horizon * (1.0 - 1e-12)]] = False

    records = None
    if record:
        records = [
            TrajectoryRecord(
                times=np.asarray(rec_times[p]),
                states=np.asarray(rec_states[p]),
                step_sizes=np.asarray(rec_dts[p]),
                master_seed=master_seed,
                traj_index=base_index + p,
                lifetime_flag=bool(lifetime[p]),
                stuck=bool(stuck[p]),
                rejected_steps=int(rejected_steps[p]),
            )
            for p in range(P)
        ]
    return EnsembleResult(
        final_states=states, final_times=t, lifetime_flags=lifetime,
        stuck_flags=stuck, rejected_steps=rejected_steps,
        accepted_steps=accepted_steps, records=records,
    )


def simulate_trajectory(model: CoefficientModel, R: RootSystem,
                        x0: Sequence[float], horizon: float,
                        policy: StepPolicy, seed: int,
                        traj_index: int = 0) -> TrajectoryRecord:
    """Single-path convenience wrapper around ``simulate_ensemble``.

    Identical (seed, config) input reproduces the record bit-for-bit; the
    path equals the corresponding member of any ensemble with the same
    master seed.
    """
    res = simulate_ensemble(model, R, np.asarray(x0, dtype=float), horizon,
                            policy, seed, n_paths=1, base_index=traj_index,
                            record=True)
    rec = res.records[0]
    if rec.stuck:
        raise RuntimeError(
            f"integrator stuck below dt_min at t={rec.times[-1]:.6g}, "
            f"state={rec.states[-1]}"
        )
    return rec


# ---------------------------------------------------------------------------
# drift diagnostics for the symmetric polynomials of squared projections
# ---------------------------------------------------------------------------


def _star_tables(x: np.ndarray, R: RootSystem, w: np.ndarray):
    """Weight-normalized roots, projections, and squared projections."""
    pm = R.positive_matrix
    star = pm / w[:, None]  # (M, N) rows alpha* = alpha / w_alpha
    sproj = star @ x  # <x, alpha*>
    return star, sproj, sproj**2


def e_poly_drift(x: Sequence[float], model: CoefficientModel, R: RootSystem,
                 w, n: int) -> float:
    """Instantaneous drift of e_n of the squared weighted projections.

    Sums the four dt-term groups of the polynomial's semi-martingale
    decomposition: background drift, coupling double sum, diagonal and
    off-diagonal diffusion terms.  Requires an interior state.
    """
    from .roots import resolve_weights

    x = np.asarray(x, dtype=float)
    w = resolve_weights(R, w)
    M = R.M
    if not 1 <= n <= M:
        raise ValueError(f"degree n={n} out of range [1, {M}]")
    star, sproj, sq = _star_tables(x, R, w)
    if np.min(R.positive_matrix @ x) <= 0:
        raise ValueError("drift diagnostics require an interior state")
    tab = SymValueTable(tuple(sq))
    e1 = np.array([tab.e(n - 1, (a,)) for a in range(M)])

    bvals = model.drift_b(x)
    sig2 = model.sigma(x) ** 2
    kvals = model.coupling_values(x, R)

    term_b = 2.0 * float(bvals @ (star.T @ (sproj * e1)))
    gram = star @ star.T  # <alpha*, beta*>
    term_k = 2.0 * float(np.sum(gram * np.outer(sproj * e1, kvals / sproj)))
    term_diag = float(sig2 @ (star.T**2 @ e1))
    term_off = 0.0
    for a in range(M):
        for b in range(M):
            if a == b:
                continue
            e2 = tab.e(n - 2, (a, b))
            term_off += (
                2.0 * float(sig2 @ (star[a] * star[b]))
                * sproj[a] * sproj[b] * e2
            )
    return term_b + term_k + term_diag + term_off


def log_e_drift_components(x: Sequence[float], model: CoefficientModel,
                           R: RootSystem, w, n: int) -> np.ndarray:
    """The six drift components of -ln e_n, returned separately.

    Component 5 (index 4) is manifestly nonpositive; the sum is the full
    drift of the log-polynomial semi-martingale.  Requires e_n(x) > 0 and
    an interior state.
    """
    from .roots import resolve_weights

    x = np.asarray(x, dtype=float)
    w = resolve_weights(R, w)
    M = R.M
    if not 1 <= n <= M:
        raise ValueError(f"degree n={n} out of range [1, {M}]")
    if np.min(R.positive_matrix @ x) <= 0:
        raise ValueError("drift diagnostics require an interior state")
    star, sproj, sq = _star_tables(x, R, w)
    tab = SymValueTable(tuple(sq))
    en = tab.e(n)
    if en <= 0:
        raise ValueError("e_n vanishes at this state")
    e1 = np.array([tab.e(n - 1, (a,)) for a in range(M)])
    ea_n = np.array([tab.e(n, (a,)) for a in range(M)])

    sig2 = model.sigma(x) ** 2
    bvals = model.drift_b(x)
    kvals = model.coupling_values(x, R)
    gram = star @ star.T
    norm2_star = (star**2).sum(axis=1)

    A1 = float(
        np.sum((sig2 @ star.T**2) * (sq * e1 - ea_n) * e1)
    ) / en**2

    A2 = 0.0
    A3 = 0.0
    A6 = 0.0
    for a in range(M):
        for b in range(M):
            if a == b:
                continue
            sig_ab = float(sig2 @ (star[a] * star[b]))
            e_ab_1 = tab.e(n - 1, (a, b))
            e_ab_2 = tab.e(n - 2, (a, b))
            e_ab_0 = tab.e(n, (a, b))
            A2 += 2.0 * sig_ab * sproj[a] * sproj[b] * e_ab_1**2
            A3 -= 2.0 * sig_ab * sproj[a] * sproj[b] * e_ab_0 * e_ab_2
            A6 -= 2.0 * gram[a, b] * sproj[a] / sproj[b] * e1[a] * kvals[b]
    A2 /= en**2
    A3 /= en**2
    A6 /= en

    A4 = -2.0 * float(bvals @ (star.T @ (sproj * e1))) / en
    A5 = -2.0 * float(np.sum(norm2_star * e1 * kvals)) / en
    return np.array([A1, A2, A3, A4, A5, A6])


def mc_drift_estimate(x: Sequence[float], model: CoefficientModel,
                      R: RootSystem, func, h: float = 1e-5,
                      n_samples: int = 20000, seed: int = 0):
    """Monte Carlo estimate of the drift of func(X_t) at an interior state.

    Takes one Euler step of size h with antithetic noise pairs, so the
    O(sqrt(h)) martingale part cancels exactly sample by sample:
    [f(x_plus) + f(x_minus) - 2 f(x)] / (2h).  Returns (mean, stderr);
    used as the independent oracle for the closed-form drift formulas.
    """
    x = np.asarray(x, dtype=float)
    pm = R.positive_matrix
    if np.min(pm @ x) <= 0:
        raise ValueError("drift estimate requires an interior state")
    rng = np.random.default_rng(seed)
    proj = pm @ x
    kvals = model.coupling_values(x, R)
    det = (model.drift_b(x) + _repulsive_drift(x, proj, kvals, pm)) * h
    scale = model.sigma(x) * np.sqrt(h)
    f0 = func(x)
    noise = rng.standard_normal((n_samples, x.size))
    vals = np.empty(n_samples)
    for i in range(n_samples):
        xp = x + det + scale * noise[i]
        xm = x + det - scale * noise[i]
        vals[i] = (func(xp) + func(xm) - 2.0 * f0) / (2.0 * h)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(n_samples))
    return mean, stderr
