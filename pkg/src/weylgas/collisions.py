"""Collision detection, multiple-collision scaling tests, zero-set
extraction, box-counting dimension estimation, and the projection time
change.

Two entry points exist for most quantities: pure functions over a
``TrajectoryRecord`` (small runs, tests) and the streaming
``EnsembleCollector`` that accumulates the same statistics while a
vectorized ensemble is being integrated, without storing paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import TrajectoryRecord
from .models import CoefficientModel
from .roots import Root, RootSystem, resolve_weights
from .sympoly import elementary


@dataclass(frozen=True)
class MinProjectionSeries:
    """Per-sample smallest and second-smallest weighted projections."""

    times: np.ndarray
    argmin: np.ndarray  # index into R.positive_roots
    min_values: np.ndarray
    second_values: np.ndarray


def _weighted_proj_matrix(traj: TrajectoryRecord, R: RootSystem, w) -> np.ndarray:
    weights = resolve_weights(R, w)
    return traj.states @ (R.positive_matrix / weights[:, None]).T


def min_projection_series(traj: TrajectoryRecord, R: RootSystem, w=None) -> MinProjectionSeries:
    """Smallest and runner-up weighted projections along a trajectory."""
    wproj = _weighted_proj_matrix(traj, R, w)
    order = np.argsort(wproj, axis=1)
    amin = order[:, 0]
    rows = np.arange(len(wproj))
    return MinProjectionSeries(
        times=traj.times,
        argmin=amin,
        min_values=wproj[rows, amin],
        second_values=wproj[rows, order[:, 1]] if R.M > 1 else np.full(len(wproj), np.inf),
    )


@dataclass(frozen=True)
class CollisionEvent:
    """A maximal interval where the smallest weighted projection < eps."""

    t_in: float
    t_out: float
    t_min: float
    min_value: float
    min_root: Root
    active_roots: tuple[Root, ...]
    order: int  # projections below eps at the event minimum
    second_gap: float  # runner-up minus smallest projection at the minimum
    tau_markers: dict = field(default_factory=dict)


def _interp_crossing(t0, v0, t1, v1, eps):
    """Linear interpolation of the time where the series crosses eps."""
    if v1 == v0:
        return t0
    lam = (eps - v0) / (v1 - v0)
    return t0 + np.clip(lam, 0.0, 1.0) * (t1 - t0)


def detect_collision_events(traj: TrajectoryRecord, R: RootSystem, w=None,
                            eps: float = 1e-4) -> list[CollisionEvent]:
    """Find all boundary approaches below eps along one trajectory.

    Interval edges are refined by linear interpolation of the
    min-projection series between samples; the event order counts the
    projections below eps at the interval minimum.  First-passage markers
    tau_n (weighted e_n falling below eps^(2*(M-n+1))) are attached to the
    event containing them.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    wproj = _weighted_proj_matrix(traj, R, w)
    times = traj.times
    minv = wproj.min(axis=1)
    below = minv < eps
    if not below.any():
        return []

    sq = wproj**2
    # tau_n markers: first crossing of e_n below eps^(2*(M - n + 1))
    tau: dict[int, float] = {}
    for n in range(1, R.M + 1):
        thresh = eps ** (2 * (R.M - n + 1))
        en = np.array([elementary(row, n) for row in sq])
        hits = np.flatnonzero(en < thresh)
        if hits.size:
            tau[n] = float(times[hits[0]])

    events: list[CollisionEvent] = []
    edges = np.flatnonzero(np.diff(below.astype(np.int8)))
    starts = [0] if below[0] else []
    starts += [i + 1 for i in edges if not below[i]]
    ends = []
    for i in edges:
        if below[i]:
            ends.append(i)
    if below[-1]:
        ends.append(len(below) - 1)

    for s, e in zip(starts, ends):
        t_in = times[s] if s == 0 else float(
            _interp_crossing(times[s - 1], minv[s - 1], times[s], minv[s], eps))
        t_out = times[e] if e == len(below) - 1 else float(
            _interp_crossing(times[e], minv[e], times[e + 1], minv[e + 1], eps))
        imin = s + int(np.argmin(minv[s:e + 1]))
        row = wproj[imin]
        active = np.flatnonzero(row < eps)
        second = np.partition(row, 1)[1] if R.M > 1 else np.inf
        markers = {n: tv for n, tv in tau.items() if t_in <= tv <= t_out}
        events.append(CollisionEvent(
            t_in=float(t_in), t_out=float(t_out), t_min=float(times[imin]),
            min_value=float(minv[imin]),
            min_root=R.positive_roots[int(np.argmin(row))],
            active_roots=tuple(R.positive_roots[i] for i in active),
            order=int(active.size),
            second_gap=float(second - minv[imin]),
            tau_markers=markers,
        ))
    return events


def multiple_collision_scaling(ensemble: Sequence[TrajectoryRecord], R: RootSystem,
                               w=None, eps_grid: Sequence[float] = (1e-2, 1e-3, 1e-4)):
    """Per-eps fraction of trajectories with simple and multiple events.

    Returns rows (eps, order-1 rate, order->=2 rate).  Under the
    no-multiple-collision theorem the second column vanishes as eps -> 0
    while the first stabilizes for models that do collide.
    """
    if len(ensemble) == 0:
        raise ValueError("ensemble must be non-empty")
    rows = []
    for eps in eps_grid:
        any1 = 0
        any2 = 0
        for traj in ensemble:
            events = detect_collision_events(traj, R, w, eps)
            orders = [ev.order for ev in events]
            any1 += any(o == 1 for o in orders)
            any2 += any(o >= 2 for o in orders)
        rows.append((float(eps), any1 / len(ensemble), any2 / len(ensemble)))
    return rows


def zero_set(traj: TrajectoryRecord, R: RootSystem, w=None,
             eps: float = 1e-4) -> list[tuple[float, float]]:
    """Times where the smallest weighted projection is below eps.

    Returned as a sorted list of disjoint (t_in, t_out) intervals; nested
    in eps (smaller eps gives a subset).
    """
    return [(ev.t_in, ev.t_out) for ev in detect_collision_events(traj, R, w, eps)]


# ---------------------------------------------------------------------------
# box-counting dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionEstimate:
    """Box-counting estimate of the dimension of a time set in [0, T].

    ``value`` is the clamped log-log regression slope with the convention
    N(delta) ~ delta^(-d); ``flag`` is "" on success, "empty" for an empty
    set, "undefined" with fewer than two occupied scales.
    """

    value: float
    scale_window: tuple[float, float]
    counts: dict
    slope: float
    stderr: float
    n_samples: int
    flag: str = ""


def dyadic_scales(T: float, n_scales: int, j_min: int = 2) -> list[float]:
    """Scales T/2^j for j = j_min .. j_min + n_scales - 1."""
    return [T / 2**j for j in range(j_min, j_min + n_scales)]


def _merge_intervals(intervals: Sequence[tuple[float, float]]):
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    merged = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def box_counts(intervals: Sequence[tuple[float, float]],
               scales: Sequence[float],
               T: Optional[float] = None) -> dict[float, int]:
    """Occupied-box counts of a union of intervals at each scale.

    When ``T`` is given the boxes tile [0, T) and the endpoint T falls in
    the last box rather than opening a new one.
    """
    merged = _merge_intervals(intervals)
    counts = {}
    for delta in scales:
        cap = int(np.ceil(T / delta)) - 1 if T else None
        n = 0
        last = -1
        for a, b in merged:
            lo, hi = int(a // delta), int(b // delta)
            if cap is not None:
                hi = min(hi, cap)
            if lo <= last:
                lo = last + 1
            if hi >= lo:
                n += hi - lo + 1
                last = hi
        counts[float(delta)] = n
    return counts


def fit_box_dimension(counts: dict[float, int], T: float,
                      n_samples: int = 1) -> DimensionEstimate:
    """Least-squares fit of log N(delta) against log(1/delta)."""
    occupied = {d: n for d, n in counts.items() if n > 0}
    window = (min(counts), max(counts)) if counts else (0.0, 0.0)
    if not occupied:
        return DimensionEstimate(0.0, window, counts, 0.0, 0.0, n_samples, "empty")
    if len(occupied) < 2:
        return DimensionEstimate(0.0, window, counts, 0.0, 0.0, n_samples, "undefined")
    xs = np.log(1.0 / np.array(sorted(occupied)))
    ys = np.log([occupied[d] for d in sorted(occupied)])
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    slope = float(coef[0])
    dof = len(xs) - 2
    if dof > 0 and res.size:
        s2 = float(res[0]) / dof
        sxx = float(((xs - xs.mean()) ** 2).sum())
        stderr = float(np.sqrt(s2 / sxx))
    else:
        stderr = 0.0
    return DimensionEstimate(
        value=float(np.clip(slope, 0.0, 1.0)),
        scale_window=(min(occupied), max(occupied)),
        counts=counts, slope=slope, stderr=stderr, n_samples=n_samples,
    )


def box_counting_dimension(intervals: Sequence[tuple[float, float]], T: float,
                           scales: Sequence[float]) -> DimensionEstimate:
    """Box-counting dimension of a union of time intervals in [0, T]."""
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    return fit_box_dimension(box_counts(intervals, scales, T), T)


def time_change_theta(traj: TrajectoryRecord, model: CoefficientModel,
                      R: RootSystem, beta: Sequence[int]):
    """Trapezoid samples of the projection time change for a simple root.

    Returns (times, theta, c_min, c_max) where theta(t) integrates
    C_beta = sum_i (beta*_i)^2 sigma^2(x_i) with beta* = beta/|beta|;
    (c_min, c_max) are the bi-Lipschitz bounds observed along the path.
    """
    beta = tuple(beta)
    if beta not in R.simple_roots:
        raise ValueError("beta must be a simple root")
    bstar = np.asarray(beta, dtype=float)
    bstar = bstar / np.linalg.norm(bstar)
    c = model.sigma(traj.states) ** 2 @ bstar**2
    dt = np.diff(traj.times)
    theta = np.concatenate([[0.0], np.cumsum(0.5 * (c[1:] + c[:-1]) * dt)])
    return traj.times, theta, float(c.min()), float(c.max())


# ---------------------------------------------------------------------------
# streaming ensemble accumulator
# ---------------------------------------------------------------------------


class EnsembleCollector:
    """Accumulates collision statistics while an ensemble integrates.

    Tracks, per trajectory and per threshold eps: event counts by order and
    sample-aligned below-eps intervals; and, at the dimension threshold
    ``dim_eps``, occupied dyadic boxes per scale for box-counting.  Feed it
    to ``simulate_ensemble`` via the ``collector`` argument and call
    ``finalize()`` afterwards.
    """

    def __init__(self, R: RootSystem, w, n_paths: int, horizon: float,
                 eps_list: Sequence[float], dim_eps: float,
                 scales: Sequence[float], max_intervals_per_path: int = 20000):
        self.R = R
        self.weights = resolve_weights(R, w)
        self.P = n_paths
        self.T = horizon
        self.eps_list = [float(e) for e in eps_list]
        self.dim_eps = float(dim_eps)
        self.scales = [float(s) for s in scales]
        self.max_intervals = max_intervals_per_path
        P = n_paths
        self._below = {e: np.zeros(P, dtype=bool) for e in self.eps_list}
        self._t_in = {e: np.zeros(P) for e in self.eps_list}
        self._t_last = {e: np.zeros(P) for e in self.eps_list}
        self._cur_min = {e: np.full(P, np.inf) for e in self.eps_list}
        self._cur_order = {e: np.zeros(P, dtype=np.int32) for e in self.eps_list}
        self._cur_argmin = {e: np.zeros(P, dtype=np.int32) for e in self.eps_list}
        self._cur_second = {e: np.full(P, np.inf) for e in self.eps_list}
        self.events_order1 = {e: np.zeros(P, dtype=np.int64) for e in self.eps_list}
        self.events_order2 = {e: np.zeros(P, dtype=np.int64) for e in self.eps_list}
        self.argmin_counts = {e: np.zeros((P, R.M), dtype=np.int64) for e in self.eps_list}
        self.intervals = {e: [[] for _ in range(P)] for e in self.eps_list}
        n_boxes = [max(1, int(np.ceil(horizon / s))) for s in self.scales]
        self._occ = {s: np.zeros((P, nb), dtype=bool)
                     for s, nb in zip(self.scales, n_boxes)}
        self._finalized = False

    def update(self, t_new: np.ndarray, proj_new: np.ndarray, path_idx: np.ndarray):
        """Record one accepted step for the given global path indices."""
        wproj = proj_new / self.weights
        if self.R.M > 1:
            two = np.partition(wproj, 1, axis=1)[:, :2]
            minv, secondv = two[:, 0], two[:, 1]
        else:
            minv = wproj[:, 0]
            secondv = np.full(len(wproj), np.inf)
        amin = np.argmin(wproj, axis=1)

        for eps in self.eps_list:
            below_now = minv < eps
            order_now = (wproj < eps).sum(axis=1)
            was = self._below[eps][path_idx]

            started = below_now & ~was
            if started.any():
                g = path_idx[started]
                self._below[eps][g] = True
                self._t_in[eps][g] = t_new[started]
                self._t_last[eps][g] = t_new[started]
                self._cur_min[eps][g] = minv[started]
                self._cur_order[eps][g] = order_now[started]
                self._cur_argmin[eps][g] = amin[started]
                self._cur_second[eps][g] = secondv[started]

            cont = below_now & was
            if cont.any():
                g = path_idx[cont]
                self._t_last[eps][g] = t_new[cont]
                deeper = minv[cont] < self._cur_min[eps][g]
                gd = g[deeper]
                self._cur_min[eps][gd] = minv[cont][deeper]
                self._cur_order[eps][gd] = order_now[cont][deeper]
                self._cur_argmin[eps][gd] = amin[cont][deeper]
                self._cur_second[eps][gd] = secondv[cont][deeper]

            ended = ~below_now & was
            for g in path_idx[ended]:
                self._close_event(eps, int(g))

        below_dim = minv < self.dim_eps
        if below_dim.any():
            g = path_idx[below_dim]
            tb = t_new[below_dim]
            for s in self.scales:
                occ = self._occ[s]
                cols = np.minimum((tb / s).astype(np.int64), occ.shape[1] - 1)
                occ[g, cols] = True

    def _close_event(self, eps: float, g: int):
        self._below[eps][g] = False
        order = int(self._cur_order[eps][g])
        if order >= 2:
            self.events_order2[eps][g] += 1
        elif order == 1:
            self.events_order1[eps][g] += 1
        self.argmin_counts[eps][g, int(self._cur_argmin[eps][g])] += 1
        ivs = self.intervals[eps][g]
        if len(ivs) < self.max_intervals:
            ivs.append((float(self._t_in[eps][g]), float(self._t_last[eps][g])))

    def finalize(self):
        """Close any events still open at the end of the horizon."""
        if self._finalized:
            return
        for eps in self.eps_list:
            for g in np.flatnonzero(self._below[eps]):
                self._close_event(eps, int(g))
        self._finalized = True

    # ----- summaries -----

    def event_rates(self, eps: float) -> tuple[float, float]:
        """(order-1 rate, order->=2 rate): fraction of paths with any event."""
        r1 = float(np.mean(self.events_order1[eps] > 0))
        r2 = float(np.mean(self.events_order2[eps] > 0))
        return r1, r2

    def any_event_rate(self, eps: float) -> float:
        both = self.events_order1[eps] + self.events_order2[eps]
        return float(np.mean(both > 0))

    def pooled_counts(self) -> dict[float, int]:
        """Summed per-path box counts at each scale (N_total ~ delta^-d)."""
        return {s: int(self._occ[s].sum()) for s in self.scales}

    def pooled_dimension(self) -> DimensionEstimate:
        return fit_box_dimension(self.pooled_counts(), self.T, n_samples=self.P)

    def argmin_fraction(self, eps: float, root_index: int) -> float:
        """Fraction of events (pooled) whose deepest root is the given one."""
        counts = self.argmin_counts[eps]
        total = counts.sum()
        if total == 0:
            return float("nan")
        return float(counts[:, root_index].sum() / total)
