import numpy as np
import pytest

from sphfilm.geometry import (
    CutoffSpec,
    Grid,
    build_grid,
    cutoff_derivative_bounds,
    cutoff_eta,
    cutoff_eta_d1,
    cutoff_eta_d2,
    cutoff_eta_sd,
    weight_at,
)


def test_build_grid_tiny_reference():
    g = build_grid(4, 0.0, allow_small=True)
    assert g.dx == 0.5
    np.testing.assert_allclose(g.x_centers, [-0.75, -0.25, 0.25, 0.75], rtol=0, atol=0)


def test_build_grid_thousand_cells():
    g = build_grid(1000, 1e-4)
    assert g.dx == 0.002
    assert g.x_faces.size == 1001
    assert g.x_centers.size == 1000


@pytest.mark.parametrize("n", [15, 17, 3])
def test_build_grid_rejects_odd(n):
    with pytest.raises(ValueError):
        build_grid(n, 0.0)


def test_build_grid_rejects_small_and_negative_delta():
    with pytest.raises(ValueError):
        build_grid(8, 0.0)
    with pytest.raises(ValueError):
        build_grid(64, -1e-9)


@pytest.mark.parametrize("n", [16, 64, 254, 1000])
def test_grid_face_invariants(n):
    g = build_grid(n, 1e-6)
    assert g.x_faces[0] == -1.0
    assert g.x_faces[-1] == 1.0
    # x = 0 is a face for even n_cells
    assert g.x_faces[n // 2] == 0.0
    # index arithmetic keeps spacing uniform to machine precision
    assert np.max(np.abs(np.diff(g.x_faces) - g.dx)) <= 4 * np.finfo(float).eps
    np.testing.assert_allclose(
        g.x_centers, 0.5 * (g.x_faces[:-1] + g.x_faces[1:]), rtol=0, atol=0
    )


def test_weight_at_values():
    g = build_grid(64, 0.0)
    assert weight_at(g, 0.0) == 1.0
    assert weight_at(g, 0.5) == 0.75
    g6 = build_grid(64, 1e-6)
    assert weight_at(g6, 1.0) == pytest.approx(1e-6, rel=0, abs=1e-18)
    assert weight_at(g6, -1.0) == pytest.approx(1e-6, rel=0, abs=1e-18)


def test_weight_at_rejects_out_of_range():
    g = build_grid(64, 0.0)
    with pytest.raises(ValueError):
        weight_at(g, 1.0000001)


def test_weight_floor_property():
    g = build_grid(64, 1e-3)
    x = np.linspace(-1, 1, 4001)
    assert np.all(weight_at(g, x) >= g.delta)


def test_cutoff_eta_endpoint_and_midpoint_values():
    assert cutoff_eta(0.0) == 1.0
    assert cutoff_eta(1.0) == 0.0
    assert cutoff_eta(-3.0) == 1.0
    assert cutoff_eta(2.0) == 0.0
    # -(1/8)(6/4 - 15/2 + 10) + 1 = 1/2
    assert cutoff_eta(0.5) == pytest.approx(0.5, abs=1e-15)


def test_cutoff_eta_smooth_joins():
    # quintic has vanishing first and second derivatives at both joins
    for tau in (1e-12, 1 - 1e-12):
        assert abs(cutoff_eta_d1(tau)) < 1e-10
        assert abs(cutoff_eta_d2(tau)) < 1e-9


def test_cutoff_eta_monotone_and_symmetric():
    tau = np.linspace(0.0, 1.0, 10_001)
    eta = cutoff_eta(tau)
    assert np.all(np.diff(eta) <= 0.0)
    np.testing.assert_allclose(eta + cutoff_eta(1.0 - tau), 1.0, rtol=0, atol=1e-12)


def test_cutoff_eta_max_slope():
    # max |eta'| = 15/8, attained at tau = 1/2, measured by dense sampling
    tau = np.linspace(0.0, 1.0, 10_001)
    d1 = np.abs(cutoff_eta_d1(tau))
    k = int(np.argmax(d1))
    assert d1[k] == pytest.approx(15.0 / 8.0, rel=1e-7)
    assert tau[k] == pytest.approx(0.5, abs=1e-3)


def test_cutoff_eta_sd_values():
    spec = CutoffSpec(s=0.5, delta_c=0.25, nu=2.0)
    assert cutoff_eta_sd(0.0, spec) == 1.0
    assert cutoff_eta_sd(0.5, spec) == 0.0
    assert cutoff_eta_sd(-0.5, spec) == 0.0
    assert cutoff_eta_sd(0.9, spec) == 0.0
    # x = 0.375 maps to tau = 0.5
    assert cutoff_eta_sd(0.375, spec) == pytest.approx(0.5, abs=1e-15)
    # plateau and outside checks
    assert cutoff_eta_sd(0.2, spec) == 1.0
    assert cutoff_eta_sd(-0.2499, spec) == 1.0


def test_cutoff_eta_sd_difference_quotient_bounds():
    # first-difference bound 15/(8 dc) holds with 1% sampling slack; the
    # second-difference maximum measures (10 sqrt(3)/3)/dc^2
    spec = CutoffSpec(s=0.6, delta_c=0.2, nu=2.0)
    d1max, d2max = cutoff_derivative_bounds(spec, n_samples=10_000)
    assert d1max <= (15.0 / (8.0 * spec.delta_c)) * 1.01
    assert d1max >= (15.0 / (8.0 * spec.delta_c)) * 0.99
    true_d2 = (10.0 * np.sqrt(3.0) / 3.0) / spec.delta_c**2
    assert d2max <= true_d2 * 1.01
    assert d2max >= true_d2 * 0.99


def test_cutoff_spec_validation():
    with pytest.raises(ValueError):
        CutoffSpec(s=0.0, delta_c=0.1, nu=2.0)
    with pytest.raises(ValueError):
        CutoffSpec(s=0.5, delta_c=0.6, nu=2.0)
    with pytest.raises(ValueError):
        CutoffSpec(s=0.5, delta_c=0.25, nu=1.0)
    with pytest.raises(ValueError):
        CutoffSpec(s=1.2, delta_c=0.25, nu=2.0)


def test_grid_is_frozen():
    g = build_grid(16, 0.0)
    assert isinstance(g, Grid)
    with pytest.raises(Exception):
        g.dx = 0.1
