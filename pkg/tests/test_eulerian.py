import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import partner_ring
from nonlocal_ftl.dynamics import RingState, simulate
from nonlocal_ftl.eulerian import (
    InitialProfile,
    StepFunction,
    VacuumError,
    density_field,
    equal_mass_partition,
    figure1_profile,
    l1_distance_fields,
    lattice_y,
    resample_to_grid,
    vehicles_for_ell,
)
from nonlocal_ftl.ring_ops import tv_periodic
from nonlocal_ftl.velocity import WeightProfile, greenshields


def random_piecewise(rng, P=3.0, nu=0.1, pieces=None):
    n = pieces or int(rng.integers(1, 8))
    cuts = np.sort(rng.uniform(0, P, n - 1))
    b = np.concatenate([[0.0], cuts])
    vals = rng.uniform(nu, 1.0, n)
    return InitialProfile.piecewise(list(b), list(vals), P=P, nu=nu)


def test_constant_partition():
    st_, ell = equal_mass_partition(InitialProfile.piecewise([0.0], [0.5], P=2.0), 4)
    assert ell == 0.25
    np.testing.assert_allclose(st_.x, [0, 0.5, 1.0, 1.5])
    np.testing.assert_allclose(st_.rho, 0.5)


def test_two_level_partition():
    st_, ell = equal_mass_partition(InitialProfile.piecewise([0.0, 1.0], [1.0, 0.5], P=2.0), 3)
    assert ell == pytest.approx(0.5)
    np.testing.assert_allclose(st_.x, [0, 0.5, 1.0])
    np.testing.assert_allclose(st_.rho, [1, 1, 0.5])


def test_figure1_partition():
    prof = figure1_profile()
    assert prof.mass == pytest.approx(1.15)
    assert prof.tv == pytest.approx(1.9)
    M = vehicles_for_ell(prof.mass, 1 / 45)
    assert M == 52
    st_, ell = equal_mass_partition(prof, M)
    assert ell == pytest.approx(1.15 / 52)
    assert tv_periodic(st_.rho) == pytest.approx(1.9)


def test_partition_needs_room_for_stencil():
    with pytest.raises(ValueError, match="M >= N"):
        equal_mass_partition(figure1_profile(), 11, N=10)


def test_vacuum_rejected():
    with pytest.raises(VacuumError):
        InitialProfile.piecewise([0.0, 1.0], [0.5, 0.0], P=2.0)
    with pytest.raises(VacuumError):
        InitialProfile.piecewise([0.0, 1.0], [0.5, 0.2], P=2.0, nu=0.3)
    with pytest.raises(ValueError):
        InitialProfile.piecewise([0.0], [1.2], P=2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 300))
def test_partition_cells_carry_equal_mass(seed, M):
    prof = random_piecewise(np.random.default_rng(seed))
    st_, ell = equal_mass_partition(prof, M)
    edges = np.append(st_.x, prof.P)
    cell_mass = np.diff(prof.cumulative(edges))
    np.testing.assert_allclose(cell_mass, ell, atol=1e-10)
    assert abs(st_.gaps.sum() - prof.P) < 1e-10
    # initial densities are cell averages, so they sit inside the profile's range
    lo, hi = prof.bounds()
    assert np.all(st_.rho >= lo - 1e-12) and np.all(st_.rho <= hi + 1e-12)


def test_sinusoid_partition():
    prof = InitialProfile.sinusoid(0.5, 0.3, P=4.0)
    assert prof.mass == pytest.approx(2.0)
    st_, ell = equal_mass_partition(prof, 64)
    edges = np.append(st_.x, prof.P)
    np.testing.assert_allclose(np.diff(prof.cumulative(edges)), ell, atol=1e-10)


def test_density_field_examples(three_car):
    f = density_field(three_car)
    np.testing.assert_allclose(f.values, [1, 0.5, 1 / 3])
    assert f.mass == pytest.approx(1.5)
    assert f(0.7) == 0.5 and f(2.9) == pytest.approx(1 / 3) and f(3.2) == 1.0


def test_lattice_y(three_car):
    ly = lattice_y(three_car)
    np.testing.assert_allclose(ly.values, [1, 2, 3])
    assert three_car.ell * ly.values.sum() == pytest.approx(3.0)
    np.testing.assert_allclose(ly.widths, 1 / 3)


def test_resample_examples():
    g = resample_to_grid(StepFunction([0.0, 1.0], [1.0, 0.5], P=2.0), 1)
    assert g.avg[0] == pytest.approx(0.75)
    g = resample_to_grid(StepFunction([0.3], [0.4], P=2.0), 7)
    np.testing.assert_allclose(g.avg, 0.4)
    st_, _ = equal_mass_partition(figure1_profile(), 52)
    for m in (16, 100, 1024):
        assert resample_to_grid(density_field(st_), m).mass == pytest.approx(1.15, abs=1e-12)


def test_resample_against_brute_quadrature():
    rng = np.random.default_rng(4)
    st_ = RingState.from_gaps(rng.uniform(0.1, 0.4, 9), 0.1, x0=0.37)
    f = density_field(st_)
    g = resample_to_grid(f, 5)
    fine = np.linspace(0, st_.P, 5 * 40000, endpoint=False) + st_.P / (2 * 5 * 40000)
    brute = f(fine).reshape(5, -1).mean(axis=1)
    np.testing.assert_allclose(g.avg, brute, atol=1e-4)


def test_l1_examples():
    a = StepFunction([0.0, 1.0], [1.0, 0.0], P=2.0)
    b = StepFunction([0.0, 1.0], [0.0, 1.0], P=2.0)
    assert l1_distance_fields(a, a) == 0.0
    assert l1_distance_fields(a, b) == pytest.approx(2.0)
    with pytest.raises(ValueError, match="period"):
        l1_distance_fields(a, StepFunction([0.0], [1.0], P=3.0))


def test_l1_triangle_and_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = [StepFunction(np.sort(rng.uniform(0, 2, 5)), rng.uniform(0, 1, 5), P=2.0)
             for _ in range(3)]
        d = l1_distance_fields
        assert d(f[0], f[1]) == pytest.approx(d(f[1], f[0]), abs=1e-14)
        assert d(f[0], f[2]) <= d(f[0], f[1]) + d(f[1], f[2]) + 1e-13


def _rk4_run(prof, M, w, T=1.0, every=1):
    st_, ell = equal_mass_partition(prof, M, w.N)
    dt = ell / 10
    n = int(round(T / dt))
    times = np.minimum(np.arange(0, n + 1, every) * dt, T)
    return simulate(st_, w, greenshields(), "rk4", dt, T, times)


@pytest.mark.parametrize("seed", range(4))
def test_density_and_variation_bounds(seed):
    rng = np.random.default_rng(seed)
    prof = random_piecewise(rng, P=2.0, nu=0.15)
    w = WeightProfile.uniform(int(rng.integers(1, 5)), kappa=float(rng.choice([0.0, 0.5])))
    lo, hi = prof.bounds()
    traj = _rk4_run(prof, 60, w, every=5)
    for snap in traj.snapshots:
        assert snap.rho.min() >= lo - 1e-6 and snap.rho.max() <= hi + 1e-6
        assert tv_periodic(snap.rho) <= prof.tv / prof.nu**2 + 1e-6
        assert snap.M * snap.ell == pytest.approx(prof.mass, abs=1e-13)
        assert density_field(snap).mass == pytest.approx(prof.mass, abs=1e-12)


def test_index_sum_stability():
    rng = np.random.default_rng(21)
    w = WeightProfile.uniform(3, 0.5)
    m = greenshields()
    for _ in range(5):
        st_, _ = equal_mass_partition(random_piecewise(rng, P=2.0, nu=0.2), 40)
        other = partner_ring(rng, st_)
        nu = min(st_.rho.min(), other.rho.min())
        d0 = np.abs(st_.rho - other.rho).sum()
        dt = st_.ell / 10
        a = simulate(st_, w, m, "rk4", dt, 1.0, [0.5, 1.0])
        b = simulate(other, w, m, "rk4", dt, 1.0, [0.5, 1.0])
        for sa, sb in zip(a.snapshots, b.snapshots):
            assert np.abs(sa.rho - sb.rho).sum() <= d0 / nu**2 + 1e-6


def _max_time_rate(traj):
    snaps = traj.snapshots
    return max(
        l1_distance_fields(density_field(b), density_field(a)) / (b.t - a.t)
        for a, b in zip(snaps[:-1], snaps[1:])
    )


def test_time_modulus_on_random_data():
    rng = np.random.default_rng(31)
    for _ in range(4):
        prof = random_piecewise(rng, P=2.0, nu=0.2)
        w = WeightProfile.uniform(int(rng.integers(1, 4)), kappa=float(rng.choice([0.0, 0.5])))
        rate = _max_time_rate(_rk4_run(prof, 50, w, T=0.5))
        assert rate <= 2 * (1 + 2 * w.kappa) * greenshields().lip + 1e-6


def test_time_modulus_counterexample_on_large_jumps():
    # With the 0.05 / 1.0 plateau the density field moves faster than the
    # data-independent rate 2(1 + 2 kappa)|v'|; the bound only survives once it
    # is scaled by the spatial variation of rho.
    w = WeightProfile.uniform(10)
    m = greenshields()
    prof = figure1_profile()
    st_, ell = equal_mass_partition(prof, 52, w.N)
    traj = simulate(st_, w, m, "euler", ell, 1.0, np.arange(0, 46) * ell)
    rate = _max_time_rate(traj)
    assert rate > 2 * m.lip
    tv_max = max(tv_periodic(s.rho) for s in traj.snapshots)
    assert rate <= 2 * (1 + 2 * w.kappa) * m.lip * tv_max
