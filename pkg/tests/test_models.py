import numpy as np
import pytest

from weylgas.models import (chamber_grid, compute_bound_constants,
                            dimension_bound_predictor, make_preset,
                            validate_assumptions, wishart_param_map,
                            wishart_param_map_inverse)
from weylgas.roots import build_root_system


def test_dyson_preset():
    m = make_preset("dyson", k=0.3)
    R = build_root_system("A", 3)
    x = np.array([-1.0, 0.0, 1.0])
    assert np.allclose(m.sigma(x), 1.0)
    assert np.allclose(m.drift_b(x), 0.0)
    assert np.allclose(m.coupling_values(x, R), 0.3)
    with pytest.raises(ValueError):
        make_preset("dyson", k=0.0)
    with pytest.raises(ValueError):
        make_preset("nope", k=1.0)


def test_bessel_b_per_root_values():
    m = make_preset("bessel_b", k1=0.8, k2=0.3)
    R = build_root_system("B", 3)
    k = m.coupling_values(np.ones(3), R)
    lengths = (R.positive_matrix != 0).sum(axis=1)
    assert np.allclose(k[lengths == 1], 0.8)
    assert np.allclose(k[lengths == 2], 0.3)
    with pytest.raises(ValueError):
        m.coupling_values(np.ones(3), build_root_system("A", 3))


def test_wishart_coupling_is_sum_of_pairs():
    m = make_preset("wishart", kappa=1.0, a=4.0)
    R = build_root_system("A", 3)
    y = np.array([1.0, 2.0, 5.0])
    k = m.coupling_values(y, R)
    # roots ordered e2-e1, e3-e1, e3-e2
    assert np.allclose(k, [3.0, 6.0, 7.0])
    assert np.allclose(m.sigma(y), 2.0 * np.sqrt(y))
    assert np.allclose(m.drift_b(y), 4.0)


def test_jacobi_wall_condition():
    # N = 3, k = 0.5 needs min(p, q) >= 2 + 4 = 6
    m = make_preset("jacobi", k=0.5, p=6.5, q=6.0, N=3)
    x = np.array([-0.5, 0.0, 0.5])
    assert np.allclose(m.sigma(x), np.sqrt(1.0 - x**2))
    with pytest.raises(ValueError, match="min\\(p, q\\)"):
        make_preset("jacobi", k=0.5, p=5.0, q=6.0, N=3)


def test_wishart_param_map_roundtrip():
    kap, a = wishart_param_map(0.75, 0.5, 3)
    assert kap == pytest.approx(1.0)
    assert a == pytest.approx(4.5)
    k1, k2 = wishart_param_map_inverse(kap, a, 3)
    assert (k1, k2) == (pytest.approx(0.75), pytest.approx(0.5))
    # matrix-case values: k1 = k2 = 1/2, N = 2 gives kappa a = 2k1 + 2k2 + 1
    kap, a = wishart_param_map(0.5, 0.5, 2)
    assert kap == pytest.approx(1.0)
    assert a == pytest.approx(3.0)


def test_chamber_grid_interior():
    for family, N in [("A", 3), ("B", 2), ("D", 3)]:
        R = build_root_system(family, N)
        g = chamber_grid(R, n_points=500, seed=1)
        assert g.shape[1] == N
        assert len(g) > 400
        assert np.all(g @ R.positive_matrix.T > 0)


def test_validate_assumptions_presets_pass():
    R = build_root_system("B", 3)
    g = chamber_grid(R, 1000, seed=2)
    # equal constants give the reflection-invariant multivariate Bessel,
    # which satisfies the coupling ratio inequality
    rep = validate_assumptions(make_preset("bessel_b", k1=0.5, k2=0.5), R, g)
    assert rep.positivity_ok and rep.all_ok
    RA = build_root_system("A", 3)
    gA = chamber_grid(RA, 1000, seed=3)
    assert validate_assumptions(make_preset("dyson", k=0.2), RA, gA).all_ok
    gJ = chamber_grid(RA, 1000, scale=0.9, seed=3)  # inside (-1, 1)
    rep = validate_assumptions(
        make_preset("jacobi", k=1.0, p=5.0, q=5.0, N=3), RA, gJ)
    assert rep.coupling_ok and rep.all_ok


def test_validate_assumptions_detects_a2_failure():
    bad = make_preset(
        "custom",
        sigma=lambda y: np.ones_like(y),
        drift_b=lambda y: np.ones_like(y),  # pushes the last particle up
        coupling=lambda x, R: np.full(x.shape[:-1] + (R.M,), 0.5),
    )
    R = build_root_system("B", 2)
    g = chamber_grid(R, 200, seed=4)
    rep = validate_assumptions(bad, R, g)
    assert rep.drift_ok is False
    assert "drift" in rep.witnesses
    with pytest.raises(ValueError):
        validate_assumptions(bad, R, np.empty((0, 2)))


def test_validate_assumptions_detects_a3_failure():
    # coupling increasing along the root order violates the ratio inequality
    def coupling(x, R):
        proj = x @ R.positive_matrix.T
        return proj**2 + 0.1

    bad = make_preset(
        "custom",
        sigma=lambda y: np.ones_like(y),
        drift_b=lambda y: np.zeros_like(y),
        coupling=coupling,
    )
    R = build_root_system("A", 3)
    g = chamber_grid(R, 500, seed=5)
    rep = validate_assumptions(bad, R, g)
    assert rep.coupling_ok is False


def test_predictor_closed_forms():
    RA = build_root_system("A", 3)
    b = dimension_bound_predictor(make_preset("dyson", k=0.25), RA)
    assert b.lower == b.upper == pytest.approx(0.25)
    assert b.closed_form
    b = dimension_bound_predictor(make_preset("dyson", k=0.75), RA)
    assert b.upper == 0.0

    RB = build_root_system("B", 2)
    b = dimension_bound_predictor(make_preset("bessel_b", k1=0.1, k2=0.6), RB)
    assert b.upper == pytest.approx(0.4)

    b = dimension_bound_predictor(make_preset("wishart", kappa=0.5, a=7.0), RA)
    assert b.upper == pytest.approx(0.25)
    assert "a >= 2/kappa" in b.note

    b = dimension_bound_predictor(make_preset("jacobi", k=0.4, p=8, q=8, N=3), RA)
    assert b.upper == pytest.approx(0.1)
    assert b.lower is None


def test_predictor_grid_path_matches_dyson():
    """A custom constant-coefficient model reproduces the Dyson closed form."""
    m = make_preset(
        "custom",
        sigma=lambda y: np.ones_like(y),
        drift_b=lambda y: np.zeros_like(y),
        coupling=lambda x, R: np.full(x.shape[:-1] + (R.M,), 0.3),
        monotone_drift=True, monotone_coupling=True,
    )
    R = build_root_system("A", 3)
    b = dimension_bound_predictor(m, R, grid=chamber_grid(R, 2000, seed=6))
    assert not b.closed_form
    assert b.upper == pytest.approx(0.2, abs=1e-9)
    assert b.lower == pytest.approx(0.2, abs=1e-9)


def test_bound_constants_dyson_ratio():
    R = build_root_system("A", 2)
    m = make_preset("dyson", k=0.4)
    c = compute_bound_constants(m, R, chamber_grid(R, 200, seed=8))
    # |alpha|^2 k / (sum alpha_i^2 sigma^2) = 2k/2 = k for every point
    beta = R.simple_roots[0]
    assert c.eta_check[beta] == pytest.approx(0.4)
    assert c.eta_hat[beta] == pytest.approx(0.4)
    assert c.b_hat == 0.0
