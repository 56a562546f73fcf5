import numpy as np
import pytest

from weylgas.engine import (StepPolicy, advance_step, boundary_entry_push,
                            e_poly_drift, log_e_drift_components,
                            mc_drift_estimate, simulate_ensemble,
                            simulate_trajectory)
from weylgas.models import make_preset
from weylgas.roots import build_root_system, chamber_classify
from weylgas.sympoly import elementary


@pytest.fixture
def dyson2():
    return make_preset("dyson", k=0.5), build_root_system("A", 2)


def test_step_policy_validation():
    with pytest.raises(ValueError):
        StepPolicy(dt_min=0.0)
    with pytest.raises(ValueError):
        StepPolicy(dt_min=1e-2, dt_max=1e-3)
    with pytest.raises(ValueError):
        StepPolicy(wall_mode="bounce")


def test_advance_step_hand_value(dyson2):
    model, R = dyson2
    # x = (-1, 1), zero noise, dt = 0.01: drift = k/2 * (-1, 1)
    out = advance_step([-1.0, 1.0], model, R, 0.01, [0.0, 0.0])
    assert out == pytest.approx([-1.0025, 1.0025])


def test_advance_step_rejects_wall_crossing(dyson2):
    model, R = dyson2
    # noise large enough to swap the particles
    out = advance_step([-0.01, 0.01], model, R, 1e-2, [5.0, -5.0])
    assert out is None


def test_advance_step_singular_start(dyson2):
    model, R = dyson2
    with pytest.raises(ZeroDivisionError):
        advance_step([0.0, 0.0], model, R, 1e-3, [0.0, 0.0])
    with pytest.raises(ValueError):
        advance_step([-1.0, 1.0], model, R, 0.0, [0.0, 0.0])


def test_boundary_entry_push(dyson2):
    model, R = dyson2
    x = boundary_entry_push([1.0, 1.0], model, R)
    assert chamber_classify(x, R).region == "interior"
    # already-interior points get pushed further inside, never out
    x2 = boundary_entry_push([-1.0, 1.0], model, R)
    assert chamber_classify(x2, R).region == "interior"
    with pytest.raises(ValueError):
        boundary_entry_push([1.0, -1.0], model, R)


def test_trajectory_basic_contract(dyson2):
    model, R = dyson2
    rec = simulate_trajectory(model, R, [-1.0, 1.0], 0.25, StepPolicy(), seed=5)
    assert rec.times[0] == 0.0
    assert np.all(np.diff(rec.times) > 0)
    assert rec.times[-1] == pytest.approx(0.25, rel=1e-9)
    assert len(rec.times) == len(rec.states)
    assert len(rec.step_sizes) == len(rec.times) - 1
    # chamber preservation at every accepted step
    proj = rec.states @ R.positive_matrix.T
    assert np.all(proj.min(axis=1) > 0)


def test_zero_horizon(dyson2):
    model, R = dyson2
    rec = simulate_trajectory(model, R, [-1.0, 1.0], 0.0, StepPolicy(), seed=5)
    assert len(rec.times) == 1
    assert np.array_equal(rec.states, [[-1.0, 1.0]])


def test_bit_for_bit_determinism(dyson2):
    model, R = dyson2
    pol = StepPolicy()
    a = simulate_trajectory(model, R, [-1.0, 1.0], 0.5, pol, seed=11)
    b = simulate_trajectory(model, R, [-1.0, 1.0], 0.5, pol, seed=11)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.times, b.times)
    c = simulate_trajectory(model, R, [-1.0, 1.0], 0.5, pol, seed=12)
    assert not np.array_equal(a.states, c.states)


def test_ensemble_matches_single_paths(dyson2):
    """Every ensemble member is the corresponding single trajectory."""
    model, R = dyson2
    pol = StepPolicy()
    res = simulate_ensemble(model, R, np.array([-1.0, 1.0]), 0.3, pol,
                            master_seed=3, n_paths=5, record=True)
    for p in (0, 2, 4):
        single = simulate_trajectory(model, R, [-1.0, 1.0], 0.3, pol,
                                     seed=3, traj_index=p)
        assert np.array_equal(res.records[p].states, single.states)


def test_ensemble_chunking_invariance(dyson2):
    model, R = dyson2
    pol = StepPolicy()
    full = simulate_ensemble(model, R, np.array([-1.0, 1.0]), 0.3, pol, 3,
                             n_paths=6)
    lo = simulate_ensemble(model, R, np.array([-1.0, 1.0]), 0.3, pol, 3,
                           n_paths=3, base_index=0)
    hi = simulate_ensemble(model, R, np.array([-1.0, 1.0]), 0.3, pol, 3,
                           n_paths=3, base_index=3)
    assert np.array_equal(full.final_states,
                          np.vstack([lo.final_states, hi.final_states]))


def test_boundary_start_enters_interior(dyson2):
    model, R = dyson2
    rec = simulate_trajectory(model, R, [0.0, 0.0], 0.1, StepPolicy(), seed=1)
    proj = rec.states[1:] @ R.positive_matrix.T
    assert np.all(proj.min(axis=1) > 0)


def test_explosion_flag():
    # huge positive drift blows the state past the explosion radius
    m = make_preset(
        "custom",
        sigma=lambda y: np.ones_like(y),
        drift_b=lambda y: np.full_like(y, 1e8),
        coupling=lambda x, R: np.full(x.shape[:-1] + (R.M,), 0.5),
    )
    R = build_root_system("A", 2)
    res = simulate_ensemble(m, R, np.array([-1.0, 1.0]), 1.0,
                            StepPolicy(explosion_radius=1e4), 0, n_paths=2)
    assert res.lifetime_flags.all()
    assert np.all(res.final_times < 1.0)


def test_project_wall_mode_stays_inside(dyson2):
    _, R = dyson2
    m = make_preset("dyson", k=0.05)
    pol = StepPolicy(wall_mode="project", dt_max=1e-3)
    rec = simulate_trajectory(m, R, [-0.05, 0.05], 1.0, pol, seed=9)
    proj = rec.states @ R.positive_matrix.T
    assert np.all(proj.min(axis=1) > 0)
    assert rec.rejected_steps == 0


def test_adaptive_dt_shrinks_near_wall(dyson2):
    model, R = dyson2
    pol = StepPolicy(dt_max=1e-3)
    rec = simulate_trajectory(model, R, [-0.005, 0.005], 0.01, pol, seed=2)
    assert rec.step_sizes[0] == pytest.approx(0.1 * 0.01**2)


def test_e_poly_drift_hand_values():
    # Dyson N=2, n=1, w = 1: d e_1 = (4k + 2) dt exactly
    R = build_root_system("A", 2)
    for k in (0.2, 0.5, 1.3):
        m = make_preset("dyson", k=k)
        for x in ([-1.0, 1.0], [-0.3, 2.0]):
            assert e_poly_drift(x, m, R, None, 1) == pytest.approx(4 * k + 2)


def test_e_poly_drift_interior_required():
    R = build_root_system("A", 2)
    m = make_preset("dyson", k=0.5)
    with pytest.raises(ValueError):
        e_poly_drift([1.0, -1.0], m, R, None, 1)
    with pytest.raises(ValueError):
        e_poly_drift([-1.0, 1.0], m, R, None, 2)


def test_log_drift_components_dyson_n2():
    """For A_1 there are no root pairs: A2 = A3 = A6 = 0 and A5 < 0."""
    R = build_root_system("A", 2)
    m = make_preset("dyson", k=0.5)
    comps = log_e_drift_components([-1.0, 1.0], m, R, None, 1)
    assert comps[1] == comps[2] == comps[5] == 0.0
    assert comps[4] < 0


@pytest.mark.parametrize("preset,params,family,N,x", [
    ("dyson", {"k": 0.35}, "A", 2, [-0.8, 0.6]),
    ("dyson", {"k": 0.7}, "A", 3, [-1.1, 0.1, 1.4]),
    ("bessel_b", {"k1": 0.6, "k2": 0.9}, "B", 2, [0.5, 1.3]),
])
def test_drift_formulas_match_monte_carlo(preset, params, family, N, x):
    model = make_preset(preset, **params)
    R = build_root_system(family, N)
    for n in range(1, R.M + 1):
        closed = e_poly_drift(x, model, R, None, n)
        mc, se = mc_drift_estimate(
            x, model, R,
            lambda y: elementary((R.positive_matrix @ y) ** 2, n),
            h=1e-6, n_samples=3000, seed=n)
        assert abs(closed - mc) <= 4.0 * max(se, 1e-10)

        comps = log_e_drift_components(x, model, R, None, n)
        assert comps[4] <= 0.0  # A5 is manifestly nonpositive
        mc2, se2 = mc_drift_estimate(
            x, model, R,
            lambda y: -np.log(elementary((R.positive_matrix @ y) ** 2, n)),
            h=1e-6, n_samples=3000, seed=100 + n)
        assert abs(comps.sum() - mc2) <= 4.0 * max(se2, 1e-10)


def test_drift_with_norm_weights_matches_monte_carlo():
    model = make_preset("bessel_b", k1=0.7, k2=0.5)
    R = build_root_system("B", 2)
    x = np.array([0.4, 1.1])
    star = R.positive_matrix / R.root_norms[:, None]
    closed = e_poly_drift(x, model, R, "norm", 2)
    mc, se = mc_drift_estimate(
        x, model, R, lambda y: elementary((star @ y) ** 2, 2),
        h=1e-6, n_samples=3000, seed=0)
    assert abs(closed - mc) <= 4.0 * max(se, 1e-10)


def test_strong_error_shrinks_with_dt(dyson2):
    """Halving dt_max roughly halves the strong error (order ~1 pathwise

    against a much finer reference with the same driving noise is not
    available here, so compare distributions of the final gap instead).
    """
    model, R = dyson2
    gaps = {}
    for dt in (1e-2, 1e-3, 1e-4):
        res = simulate_ensemble(model, R, np.array([-1.0, 1.0]), 1.0,
                                StepPolicy(dt_max=dt), 77, n_paths=400)
        gaps[dt] = (res.final_states[:, 1] - res.final_states[:, 0]).mean()
    # Dyson gap is a scaled Bessel process; its mean at t=1 is dt-stable
    assert abs(gaps[1e-3] - gaps[1e-4]) < abs(gaps[1e-2] - gaps[1e-4]) + 0.05


def test_stuck_raises_for_single_trajectory():
    # zero-noise model pinned against the wall with negative drift
    m = make_preset(
        "custom",
        sigma=lambda y: np.full_like(y, 1e-12),
        drift_b=lambda y: np.where(y > 0, -1e3, 1e3),
        coupling=lambda x, R: np.full(x.shape[:-1] + (R.M,), 1e-12),
    )
    R = build_root_system("A", 2)
    pol = StepPolicy(dt_max=1e-3, max_rejects=10)
    with pytest.raises(RuntimeError):
        simulate_trajectory(m, R, [-1e-9, 1e-9], 1.0, pol, seed=0)
