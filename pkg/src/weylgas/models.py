"""Coefficient models (diffusion, background drift, repulsion coupling)
for the particle SDE, preset catalogue, assumption checks, and the
closed-form / grid-based collision-dimension predictor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .roots import RootSystem, decompose_simple, root_order_leq

PRESETS = ("dyson", "bessel_general", "bessel_b", "wishart", "jacobi", "custom")


@dataclass(frozen=True)
class CoefficientModel:
    """The (sigma, b, k_alpha) triple defining the particle SDE.

    ``sigma`` and ``drift_b`` act elementwise on coordinate arrays;
    ``coupling(x, R)`` maps states of shape (..., N) to per-positive-root
    values of shape (..., M).  Evaluators must be pure; instances are
    immutable and safe to share across workers.
    """

    sigma: Callable[[np.ndarray], np.ndarray]
    drift_b: Callable[[np.ndarray], np.ndarray]
    coupling: Callable[[np.ndarray, RootSystem], np.ndarray]
    preset: str = "custom"
    params: dict = field(default_factory=dict)
    # declared structural flags (A2/A3); sampling can check but not prove them
    monotone_drift: bool = False
    monotone_coupling: bool = False
    bounded_ratios: bool = True

    def coupling_values(self, x: np.ndarray, R: RootSystem) -> np.ndarray:
        return self.coupling(np.asarray(x, dtype=float), R)


def _const_coupling(values_per_root: Callable[[RootSystem], np.ndarray]):
    def coupling(x: np.ndarray, R: RootSystem) -> np.ndarray:
        k = values_per_root(R)
        return np.broadcast_to(k, x.shape[:-1] + (R.M,))

    return coupling


def _pair_indices(R: RootSystem) -> tuple[np.ndarray, np.ndarray]:
    """For each positive root e_j - e_i (or e_j + e_i) return (i, j)."""
    ii, jj = [], []
    for alpha in R.positive_roots:
        nz = [k for k, a in enumerate(alpha) if a != 0]
        if len(nz) != 2:
            raise ValueError("pair indices are only defined for two-entry roots")
        ii.append(nz[0])
        jj.append(nz[1])
    return np.array(ii), np.array(jj)


def make_preset(name: str, **params) -> CoefficientModel:
    """Build one of the preset coefficient models.

    dyson:          sigma=1, b=0, k_alpha = k on an A system (k > 0)
    bessel_general: sigma=1, b=0, reflection-invariant per-root constants
    bessel_b:       sigma=1, b=0, k1 on {e_i}, k2 on {e_j +/- e_i} (B system)
    wishart:        sigma(y)=2*sqrt(y), b=kappa*a, k_ij(y)=kappa*(y_i+y_j)
                    on an A system in the y coordinates
    jacobi:         sigma(x)=sqrt(1-x^2), b(x)=k[p-q-(p+q)x]/2,
                    k_ij(x)=k(1-x_i*x_j) on an A system in (-1, 1)
    """
    if name == "dyson":
        k = float(params["k"])
        if k <= 0:
            raise ValueError("dyson preset requires k > 0")
        return CoefficientModel(
            sigma=lambda y: np.ones_like(np.asarray(y, dtype=float)),
            drift_b=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
            coupling=_const_coupling(lambda R: np.full(R.M, k)),
            preset="dyson", params={"k": k},
            monotone_drift=True, monotone_coupling=True,
        )

    if name == "bessel_general":
        k_values = params["k_values"]

        def per_root(R: RootSystem) -> np.ndarray:
            arr = np.broadcast_to(np.asarray(k_values, dtype=float), (R.M,))
            if np.any(arr <= 0):
                raise ValueError("coupling constants must be positive")
            return arr

        return CoefficientModel(
            sigma=lambda y: np.ones_like(np.asarray(y, dtype=float)),
            drift_b=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
            coupling=_const_coupling(per_root),
            preset="bessel_general", params={"k_values": list(np.atleast_1d(k_values))},
            monotone_drift=True, monotone_coupling=False,
        )

    if name == "bessel_b":
        k1, k2 = float(params["k1"]), float(params["k2"])
        if k1 <= 0 or k2 <= 0:
            raise ValueError("bessel_b preset requires k1 > 0 and k2 > 0")

        def per_root(R: RootSystem) -> np.ndarray:
            if R.family != "B":
                raise ValueError("bessel_b preset requires a B root system")
            lengths = (R.positive_matrix != 0).sum(axis=1)
            return np.where(lengths == 1, k1, k2)

        return CoefficientModel(
            sigma=lambda y: np.ones_like(np.asarray(y, dtype=float)),
            drift_b=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
            coupling=_const_coupling(per_root),
            preset="bessel_b", params={"k1": k1, "k2": k2},
            # the ratio inequality couples the short and long walls; it
            # holds up to the origin wall only for equal constants
            monotone_drift=True, monotone_coupling=(k1 == k2),
        )

    if name == "wishart":
        kappa, a = float(params["kappa"]), float(params["a"])
        if kappa <= 0 or a <= 0:
            raise ValueError("wishart preset requires kappa > 0 and a > 0")

        def coupling(x: np.ndarray, R: RootSystem) -> np.ndarray:
            if R.family != "A":
                raise ValueError("wishart preset runs on an A root system")
            ii, jj = _pair_indices(R)
            return kappa * (x[..., ii] + x[..., jj])

        return CoefficientModel(
            sigma=lambda y: 2.0 * np.sqrt(np.maximum(np.asarray(y, dtype=float), 0.0)),
            drift_b=lambda y: np.full_like(np.asarray(y, dtype=float), kappa * a),
            coupling=coupling,
            preset="wishart", params={"kappa": kappa, "a": a},
            monotone_drift=False, monotone_coupling=True,
            bounded_ratios=False,
        )

    if name == "jacobi":
        k = float(params["k"])
        p, q = float(params["p"]), float(params["q"])
        N = int(params["N"])
        if k <= 0:
            raise ValueError("jacobi preset requires k > 0")
        if min(p, q) < N - 1 + 2.0 / k:
            raise ValueError(
                f"jacobi preset requires min(p, q) >= N - 1 + 2/k "
                f"= {N - 1 + 2.0 / k:g} for a unique strong solution"
            )

        def coupling(x: np.ndarray, R: RootSystem) -> np.ndarray:
            if R.family != "A":
                raise ValueError("jacobi preset runs on an A root system")
            ii, jj = _pair_indices(R)
            return k * (1.0 - x[..., ii] * x[..., jj])

        return CoefficientModel(
            sigma=lambda y: np.sqrt(np.maximum(1.0 - np.asarray(y, dtype=float) ** 2, 0.0)),
            drift_b=lambda y: 0.5 * k * (p - q - (p + q) * np.asarray(y, dtype=float)),
            coupling=coupling,
            preset="jacobi", params={"k": k, "p": p, "q": q, "N": N},
            monotone_drift=True, monotone_coupling=True,
            bounded_ratios=False,
        )

    if name == "custom":
        return CoefficientModel(
            sigma=params["sigma"], drift_b=params["drift_b"], coupling=params["coupling"],
            preset="custom", params=params.get("params", {}),
            monotone_drift=params.get("monotone_drift", False),
            monotone_coupling=params.get("monotone_coupling", False),
            bounded_ratios=params.get("bounded_ratios", True),
        )

    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


def wishart_param_map(k1: float, k2: float, N: int) -> tuple[float, float]:
    """Map B-type coupling constants (k1, k2) to Wishart (kappa, a).

    kappa = 2*k2 and kappa*a = 2*k1 + 2*k2*(N - 1) + 1; exact inverse of
    ``wishart_param_map_inverse``.
    """
    if k1 <= 0 or k2 <= 0:
        raise ValueError("k1 and k2 must be positive")
    kappa = 2.0 * k2
    a = (2.0 * k1 + 2.0 * k2 * (N - 1) + 1.0) / kappa
    return kappa, a


def wishart_param_map_inverse(kappa: float, a: float, N: int) -> tuple[float, float]:
    """Recover (k1, k2) from Wishart parameters (kappa, a)."""
    if kappa <= 0 or a <= 0:
        raise ValueError("kappa and a must be positive")
    k2 = kappa / 2.0
    k1 = (kappa * a - 1.0 - 2.0 * k2 * (N - 1)) / 2.0
    return k1, k2


def chamber_grid(R: RootSystem, n_points: int = 4096, scale: float = 1.0,
                 seed: int = 0, margin: float = 1e-3) -> np.ndarray:
    """Deterministic sample of interior chamber points, shape (n, N).

    Uniform draws are folded into the chamber (sorted for A, sorted absolute
    values for B/D) and pushed off the walls by ``margin``.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-scale, scale, size=(n_points, R.N))
    if R.family == "A":
        pts = np.sort(pts, axis=1)
    else:
        pts = np.sort(np.abs(pts), axis=1)
    # separate coordinates so all projections are bounded away from zero
    pts += margin * scale * np.arange(1, R.N + 1)
    proj = pts @ R.positive_matrix.T
    keep = np.all(proj > 0, axis=1)
    return pts[keep]


def _dominance_leq(alpha, beta, R: RootSystem) -> bool:
    """Comparable for the ratio inequality: support inclusion plus
    beta - alpha in the nonnegative span of the simple roots.

    The second condition is what makes <x, alpha> <= <x, beta> on the
    closed chamber; support inclusion alone would declare e_j and
    e_j + e_i mutually comparable in type B, where the projections are
    not ordered.
    """
    if not root_order_leq(alpha, beta, R):
        return False
    diff = tuple(b - a for a, b in zip(alpha, beta))
    try:
        coeffs = decompose_simple(diff, R)
    except ValueError:
        return False
    return all(c >= 0 for c in coeffs)


@dataclass(frozen=True)
class AssumptionReport:
    """Sampling-based check of the structural assumptions on a grid.

    A pass is evidence, not proof: only the supplied grid points are tested.
    """

    positivity_ok: bool
    drift_ok: Optional[bool]
    coupling_ok: Optional[bool]
    witnesses: dict

    @property
    def all_ok(self) -> bool:
        return bool(
            self.positivity_ok
            and self.drift_ok is not False
            and self.coupling_ok is not False
        )


def validate_assumptions(model: CoefficientModel, R: RootSystem,
                         grid: np.ndarray) -> AssumptionReport:
    """Check positivity, drift monotonicity, and coupling monotonicity.

    Positivity (sigma > 0, k_alpha > 0) is always checked.  The drift
    inequality sum_i alpha_i b(x_i) <= 0 over simple roots and the coupling
    ratio inequality k_alpha/<x,alpha> >= k_beta/<x,beta> for comparable
    non-orthogonal root pairs are checked on the grid; failures come with a
    witnessing point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    witnesses: dict = {}
    tol = 1e-12

    sig = model.sigma(grid)
    kvals = model.coupling_values(grid, R)
    positivity_ok = True
    if np.any(sig <= 0):
        positivity_ok = False
        witnesses["sigma"] = grid[np.argwhere(sig <= 0)[0][0]].tolist()
    if np.any(kvals <= 0):
        positivity_ok = False
        witnesses["coupling_positive"] = grid[np.argwhere(kvals <= 0)[0][0]].tolist()

    bvals = model.drift_b(grid)
    drift_ok = True
    for beta in R.simple_roots:
        s = bvals @ np.asarray(beta, dtype=float)
        bad = np.flatnonzero(s > tol)
        if bad.size:
            drift_ok = False
            witnesses["drift"] = {"root": list(beta), "point": grid[bad[0]].tolist()}
            break

    proj = grid @ R.positive_matrix.T
    coupling_ok = True
    for ia in range(R.M):
        for ib in range(R.M):
            if ia == ib:
                continue
            alpha, beta = R.positive_roots[ia], R.positive_roots[ib]
            if np.dot(alpha, beta) == 0:
                continue
            if not _dominance_leq(alpha, beta, R):
                continue
            lhs = kvals[:, ia] / proj[:, ia]
            rhs = kvals[:, ib] / proj[:, ib]
            bad = np.flatnonzero(lhs < rhs - tol * np.maximum(1.0, np.abs(rhs)))
            if bad.size:
                coupling_ok = False
                witnesses["coupling"] = {
                    "alpha": list(alpha), "beta": list(beta),
                    "point": grid[bad[0]].tolist(),
                }
                break
        if not coupling_ok:
            break

    return AssumptionReport(positivity_ok, drift_ok, coupling_ok, witnesses)


@dataclass(frozen=True)
class BoundConstants:
    """Grid estimates of the coupling-to-diffusion ratio constants.

    ratio(y, beta) = |beta|^2 k_beta(y) / sum_i beta_i^2 sigma^2(y_i);
    eta_check / eta_hat are its inf / sup per simple root, eta_tilde the
    per-root max_i sup k_alpha / sigma^2(y_i), h_tilde = max eta_tilde,
    b_hat = sup |b / sigma^2|, and c_R the root-coordinate constant.
    """

    eta_check: dict
    eta_hat: dict
    eta_tilde: dict
    h_tilde: float
    b_hat: float
    c_R: float


def _ratio_table(model: CoefficientModel, R: RootSystem, grid: np.ndarray) -> np.ndarray:
    """ratio(y, alpha) on the grid for every positive root, shape (n, M)."""
    pm = R.positive_matrix
    sig2 = model.sigma(grid) ** 2  # (n, N)
    denom = sig2 @ (pm.T**2)  # (n, M)
    norms2 = (pm**2).sum(axis=1)
    kvals = model.coupling_values(grid, R)
    with np.errstate(divide="ignore", invalid="ignore"):
        return norms2 * kvals / denom


def compute_bound_constants(model: CoefficientModel, R: RootSystem,
                            grid: np.ndarray) -> BoundConstants:
    """Estimate all dimension-bound constants by sampling the grid."""
    grid = np.asarray(grid, dtype=float)
    ratios = _ratio_table(model, R, grid)
    simple_idx = [R.index(b) for b in R.simple_roots]
    eta_check = {R.positive_roots[i]: float(ratios[:, i].min()) for i in simple_idx}
    eta_hat = {R.positive_roots[i]: float(ratios[:, i].max()) for i in simple_idx}

    sig2 = model.sigma(grid) ** 2
    kvals = model.coupling_values(grid, R)
    eta_tilde = {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, alpha in enumerate(R.positive_roots):
            eta_tilde[alpha] = float((kvals[:, i][:, None] / sig2).max())
    h_tilde = max(eta_tilde.values())
    with np.errstate(divide="ignore", invalid="ignore"):
        b_hat = float(np.abs(model.drift_b(grid) / sig2).max())

    norms = R.root_norms
    pm = R.positive_matrix
    c_R = 0.0
    for i in range(R.M):
        nz = np.abs(pm[i]) > 0
        c_R = max(c_R, float(np.max(norms[i] / np.abs(pm[i][nz]))))
    return BoundConstants(eta_check, eta_hat, eta_tilde, h_tilde, b_hat, c_R)


@dataclass(frozen=True)
class DimensionBounds:
    lower: Optional[float]
    upper: float
    constants: BoundConstants
    closed_form: bool
    note: str = ""


def dimension_bound_predictor(model: CoefficientModel, R: RootSystem,
                              grid: Optional[np.ndarray] = None) -> DimensionBounds:
    """Predicted bounds on the collision-time Hausdorff dimension.

    Presets with constant coupling-to-diffusion ratio use the closed forms
    (dyson: 1/2 - k; bessel_b: 1/2 - min(k1, k2); wishart: (1 - kappa)/2;
    jacobi: upper bound 1/2 - k, no non-trivial lower bound).  Otherwise the
    bounds are computed from grid inf/sup of the ratio; an unbounded ratio
    without a preset shortcut is an error.
    """
    if grid is None:
        grid = chamber_grid(R, n_points=64 ** min(R.N, 3), seed=7)
    constants = compute_bound_constants(model, R, grid)

    if model.preset == "dyson":
        d = max(0.0, 0.5 - model.params["k"])
        return DimensionBounds(d, d, constants, True)
    if model.preset == "bessel_b":
        d = max(0.0, 0.5 - min(model.params["k1"], model.params["k2"]))
        return DimensionBounds(d, d, constants, True)
    if model.preset == "wishart":
        d = max(0.0, 0.5 * (1.0 - model.params["kappa"]))
        note = "valid when particles do not hit zero: a >= 2/kappa + N - 1"
        return DimensionBounds(d, d, constants, True, note)
    if model.preset == "jacobi":
        upper = max(0.0, 0.5 - model.params["k"])
        return DimensionBounds(
            None, upper, constants, True,
            "no non-trivial lower bound: the coupling-to-diffusion ratio "
            "is unbounded near the walls",
        )

    if not model.bounded_ratios:
        raise ValueError(
            "unbounded coupling/diffusion ratio declared and no preset "
            "shortcut available"
        )
    if not np.isfinite(constants.b_hat) or not np.isfinite(constants.h_tilde):
        raise ValueError("ratio b/sigma^2 or k/sigma^2 diverges on the grid")

    upper = max(0.0, 0.5 - min(constants.eta_check.values()))
    if model.monotone_drift and model.monotone_coupling:
        lower = max(0.0, 0.5 - min(constants.eta_hat.values()))
        note = "lower bound holds almost surely (monotone drift + coupling)"
    else:
        lower = max(0.0, 0.5 - max(constants.eta_hat.values()))
        note = "lower bound holds with positive probability only"
    return DimensionBounds(lower, upper, constants, False, note)
