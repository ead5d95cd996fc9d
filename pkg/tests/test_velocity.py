import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_ftl.velocity import (
    ModelError,
    WeightProfile,
    dissipation_H,
    flux,
    flux_deriv,
    greenshields,
    kruzkov_pair,
    lagrangian_velocity,
    model_from_name,
    power_law,
    quadratic_pair,
    smoothed_kruzkov_pair,
)


def test_greenshields_values(gs):
    assert gs(0.0) == 1.0
    assert gs(1.0) == 0.0
    assert gs(0.25) == pytest.approx(0.75)
    assert gs.lip == 1.0


def test_power_law():
    grid = np.linspace(0, 1, 101)
    np.testing.assert_allclose(power_law(1)(grid), greenshields()(grid))
    p2 = power_law(2)
    assert p2(0.5) == pytest.approx(0.25)
    assert p2.lip == 2
    # Lipschitz constant is |v'(0)| = p
    assert abs(p2.deriv(0.0)) == pytest.approx(2.0)
    with pytest.raises(ModelError):
        power_law(0.5)


@pytest.mark.parametrize("name", ["greenshields", "power:1", "power:2.5"])
def test_model_axioms(name):
    m = model_from_name(name)
    grid = np.linspace(0, 1, 1000)
    v = m(grid)
    assert abs(v[0] - 1) < 1e-12 and abs(v[-1]) < 1e-12
    assert np.all(np.diff(v) <= 1e-12)
    assert np.all(np.abs(np.diff(v)) <= m.lip * np.diff(grid) + 1e-12)


def test_model_from_name_rejects_unknown():
    with pytest.raises(ModelError):
        model_from_name("idm")


def test_lagrangian_velocity(gs):
    assert lagrangian_velocity(gs, 2.0) == pytest.approx(0.5)
    assert lagrangian_velocity(gs, 1.0) == 0.0
    assert abs(lagrangian_velocity(gs, 1e9) - 1.0) < 1e-8
    with pytest.raises(ModelError):
        lagrangian_velocity(gs, 0.9)
    y = np.linspace(1, 50, 300)
    assert np.all(np.diff(lagrangian_velocity(gs, y)) >= 0)


def test_flux(gs):
    assert flux(gs, 0.5) == pytest.approx(0.25)
    assert flux(gs, 0.0) == 0.0
    assert flux(gs, 1.0) == 0.0
    with pytest.raises(ModelError):
        flux(gs, 1.2)


def test_flux_concave_midpoint(gs):
    rng = np.random.default_rng(3)
    a, b = rng.uniform(0, 1, (2, 500))
    assert np.all(flux(gs, (a + b) / 2) >= (flux(gs, a) + flux(gs, b)) / 2 - 1e-12)


def test_weight_profile_invariants():
    w = WeightProfile((0.5, 0.3, 0.2, 0.0), kappa=0.4)
    assert w.N == 3
    assert WeightProfile.uniform(10).c == (0.1,) * 10 + (0.0,)
    with pytest.raises(ModelError, match="sum to 1"):
        WeightProfile((0.1,) * 5 + (0.0,) * 6)
    with pytest.raises(ModelError, match="non-increasing"):
        WeightProfile((0.3, 0.7, 0.0))
    with pytest.raises(ModelError, match="c_N"):
        WeightProfile((0.5, 0.5))
    with pytest.raises(ModelError, match="kappa"):
        WeightProfile((1.0, 0.0), kappa=-1)
    # kappa = 0 is admitted
    assert WeightProfile((1.0, 0.0), kappa=0.0).kappa == 0.0


def test_kruzkov_pair_examples(gs):
    pair = kruzkov_pair(gs, 0.5)
    assert pair.flux_eulerian(0.8) == pytest.approx(-0.09)
    assert pair.flux_eulerian(0.5) == 0.0
    assert kruzkov_pair(gs, 2.0).flux_lagrangian(4.0) == pytest.approx(0.25)


def test_kruzkov_eta_convex(gs):
    pair = kruzkov_pair(gs, 0.3)
    rng = np.random.default_rng(0)
    a, b = rng.uniform(-2, 2, (2, 200))
    assert np.all(pair.eta((a + b) / 2) <= (pair.eta(a) + pair.eta(b)) / 2 + 1e-15)


@pytest.mark.parametrize("make", [quadratic_pair, lambda m: smoothed_kruzkov_pair(m, 0.4, 0.05)])
def test_entropy_flux_derivative_matches(gs, make):
    # q' = eta' f' checked by central differences at interior points
    pair = make(gs)
    rho = np.linspace(0.05, 0.95, 100)
    h = 1e-5
    fd = (pair.flux_eulerian(rho + h) - pair.flux_eulerian(rho - h)) / (2 * h)
    expect = pair.eta_prime(rho) * flux_deriv(gs, rho)
    np.testing.assert_allclose(fd, expect, rtol=1e-6, atol=1e-9)


def test_dissipation_trivial(gs):
    assert dissipation_H(quadratic_pair(gs), gs, 3.0, 3.0) == 0.0


def test_dissipation_closed_form(gs):
    # int_1^2 (2s - 2) / s**2 ds = 2 ln 2 - 1
    assert dissipation_H(quadratic_pair(gs), gs, 1.0, 2.0) == pytest.approx(
        2 * math.log(2) - 1, abs=1e-12
    )


def test_dissipation_rejects_dense_arguments(gs):
    with pytest.raises(ModelError):
        dissipation_H(quadratic_pair(gs), gs, 0.5, 2.0)


def trapezoid_H(pair, m, a, b, n=200_000):
    s = np.linspace(a, b, n)
    Vp = -m.deriv(1 / s) / s**2
    return np.trapezoid((pair.eta_prime(s) - pair.eta_prime(a)) * Vp, s)


@settings(max_examples=60, deadline=None)
@given(st.floats(1, 10), st.floats(1, 10), st.sampled_from([1.0, 2.0]),
       st.floats(1.2, 9.0))
def test_dissipation_nonnegative(a, b, p, k):
    m = power_law(p)
    for pair in (quadratic_pair(m), smoothed_kruzkov_pair(m, k)):
        h = dissipation_H(pair, m, a, b)
        assert h >= -1e-10
        # fine-grid trapezoid as an independent oracle
        assert h == pytest.approx(trapezoid_H(pair, m, a, b), abs=2e-5)
