import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_log_profile
from logmoser.constants import make_dimension_context
from logmoser.profiles import (
    RadialProfile,
    TransformedProfile,
    dirichlet_radial,
    dirichlet_transformed,
    moser_profile,
    read_profile,
    rearrange_decreasing,
    shell_volumes,
    to_radial,
    to_transformed,
    transform_scale,
    write_profile,
)


def test_validation():
    with pytest.raises(ValueError):
        RadialProfile([0.5, 0.9], [1.0, 0.0], 2)
    with pytest.raises(ValueError):
        RadialProfile([0.5, 1.0], [1.0, 0.5], 2)
    with pytest.raises(ValueError):
        RadialProfile([0.5, 1.0], [-1.0, 0.0], 2)
    with pytest.raises(ValueError):
        TransformedProfile([0.0, 1.0], [0.1, 0.2], 2)
    with pytest.raises(ValueError):
        TransformedProfile([0.5, 1.0], [0.0, 0.2], 2)


def test_zero_profile_maps_to_zero():
    p = RadialProfile([0.25, 0.5, 1.0], [0.0, 0.0, 0.0], 3)
    w = to_transformed(p)
    assert np.all(w.values == 0) and w.t_grid[0] == 0
    assert np.all(to_radial(TransformedProfile([0.0, 2.0], [0.0, 0.0], 2)).values == 0)


def test_to_radial_single_ramp(ctx2):
    u = to_radial(TransformedProfile([0.0, 1.0], [0.0, 1.0], 2))
    r = math.exp(-0.5)
    assert u(r) == pytest.approx(2**-0.5 * (2 * math.pi) ** -0.5, rel=1e-14)
    assert u(1.0) == 0.0


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("n", [10, 100, 1000, 10000])
def test_moser_profile_closed_form(N, n):
    c = make_dimension_context(N)
    m = moser_profile(c, n)
    plateau = c.omega ** (-1 / N) * math.log(n) ** ((N - 1) / N)
    assert m(1.0) == 0.0
    assert m(1.0 / n) == pytest.approx(plateau, rel=1e-13)
    assert m(0.5 / n) == pytest.approx(plateau, rel=1e-13)
    assert dirichlet_radial(m) == pytest.approx(1.0, abs=1e-10)
    w = to_transformed(m)
    L = N * math.log(n)
    t = np.linspace(0, L, 7)
    np.testing.assert_allclose(w(t), t / L ** (1 / N), rtol=1e-12, atol=1e-14)
    assert w(L + 5.0) == pytest.approx(L ** ((N - 1) / N), rel=1e-12)
    assert dirichlet_transformed(w) == pytest.approx(1.0, abs=1e-10)


def test_transformed_energy_simple():
    w = TransformedProfile([0.0, 1.0], [0.0, 0.7], 3)
    assert w.energy() == pytest.approx(0.7**3, rel=1e-15)
    with pytest.raises(ValueError):
        TransformedProfile([0.0, 1.0], [0.0, 0.7], 3, tail_slope=0.1).energy()


@given(st.lists(st.floats(0.01, 3.0), min_size=1, max_size=6), st.integers(2, 4))
def test_energy_unchanged_by_node_insertion(slopes, N):
    t = np.arange(len(slopes) + 1, dtype=float)
    vals = np.concatenate([[0.0], np.cumsum(slopes)])
    w = TransformedProfile(t, vals, N)
    tf = np.union1d(t, t[:-1] + 0.37)
    wf = TransformedProfile(tf, w(tf), N)
    assert wf.energy() == pytest.approx(w.energy(), rel=1e-13)


def test_dirichlet_linear_closed_form(ctx2):
    # u = a (1 - r) on [0, 1]: energy = omega a^2 / 2 for N = 2
    r0 = 1e-3
    p = RadialProfile([r0, 1.0], [0.4, 0.0], 2, "linear")
    slope = 0.4 / (1 - r0)
    assert dirichlet_radial(p) == pytest.approx(2 * math.pi * slope**2 * (1 - r0**2) / 2, rel=1e-13)


def test_dirichlet_volume_closed_form(ctx3):
    # u = a (1 - r^3): |u'| = 3 a r^2, energy = omega * 27 a^3 int r^8 dr = 3 omega a^3
    p = RadialProfile([1e-9, 1.0], [0.5, 0.0], 3, "volume")
    assert dirichlet_radial(p) == pytest.approx(3 * ctx3.omega * 0.125, rel=1e-12)


@pytest.mark.parametrize("N", [2, 3])
def test_transform_isometry_random(N):
    rng = np.random.default_rng(N)
    for _ in range(30):
        p = random_log_profile(rng, N)
        assert abs(dirichlet_radial(p) - dirichlet_transformed(to_transformed(p))) <= 1e-12


@pytest.mark.parametrize("interp", ["linear", "volume"])
def test_transform_refines_other_modes(interp):
    p = RadialProfile([0.2, 0.5, 1.0], [1.0, 0.6, 0.0], 2, interp)
    w = to_transformed(p, refine=400)
    assert w.energy() == pytest.approx(dirichlet_radial(p), rel=1e-4)


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
def test_round_trip_nodes(seed, N):
    p = random_log_profile(np.random.default_rng(seed), N)
    back = to_radial(to_transformed(p))
    np.testing.assert_allclose(back.r_grid, p.r_grid, rtol=1e-13)
    np.testing.assert_allclose(back.values, p.values, rtol=1e-12, atol=1e-15)
    assert back.is_monotone() and to_transformed(p).is_monotone()


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_holder_bound_at_nodes(seed, N):
    w = to_transformed(random_log_profile(np.random.default_rng(seed), N))
    e = w.energy()
    p = N / (N - 1)
    assert np.all(w.values**p <= w.t_grid * e ** (1 / (N - 1)) * (1 + 1e-12) + 1e-300)


def test_truncation_and_extension():
    p = RadialProfile([0.1, 0.5, 1.0], [1.0, 0.5, 0.0], 2, "log")
    T0 = -2 * math.log(0.1)
    w = to_transformed(p, T_max=T0 + 3.0)
    assert w.t_max == pytest.approx(T0 + 3.0) and w.values[-1] == w.values[-2]
    assert to_transformed(p, T_max=1.0).t_max == 1.0


def test_transform_scale(ctx3):
    assert transform_scale(3) == pytest.approx(3 ** (2 / 3) * ctx3.omega ** (1 / 3), rel=1e-15)


def test_rearrange_equal_measure_shells():
    # three equal-volume shells with piecewise-constant values
    N = 2
    m = np.array([1 / 3, 2 / 3, 1.0])
    eps = 1e-9
    r_in = np.sqrt(m)
    r = np.sort(np.concatenate([[eps], r_in[:-1] - eps, r_in[:-1] + eps, [1.0 - eps, 1.0]]))
    vals = [0.2, 0.2, 0.8, 0.8, 0.5, 0.5, 0.0]
    p = RadialProfile(r, vals, N, "volume")
    q = rearrange_decreasing(p)
    assert q.is_monotone()
    assert q(0.5 * math.sqrt(1 / 3)) == pytest.approx(0.8, abs=1e-6)
    assert q(math.sqrt(0.5)) == pytest.approx(0.5, abs=1e-6)
    assert q(math.sqrt(0.9)) == pytest.approx(0.2, abs=1e-6)


def test_rearrange_identity_on_monotone():
    p = RadialProfile([0.1, 0.4, 0.7, 1.0], [1.0, 0.8, 0.3, 0.0], 2, "volume")
    q = rearrange_decreasing(p)
    r = np.linspace(0.1, 1.0, 50)
    np.testing.assert_allclose(q(r), p(r), atol=1e-12)


def _distribution(p, lam, samples=200001):
    # |{u > lam}| by fine sampling in the volume variable
    N, omega = p.N, p.ctx.omega
    m = np.linspace(0, omega / N, samples)
    r = np.maximum((N * m / omega) ** (1 / N), 1e-300)
    return np.mean(p(r) > lam) * omega / N


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_rearrange_preserves_distribution_and_idempotent(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, 8))
    r = np.append(np.sort(rng.uniform(0.05, 0.99, k)), 1.0)
    u = rng.uniform(0, 1, r.size)
    u[-1] = 0.0
    p = RadialProfile(r, u, 2, "volume")
    q = rearrange_decreasing(p)
    assert q.is_monotone()
    for lam in (0.1, 0.35, 0.6, 0.9):
        assert _distribution(q, lam) == pytest.approx(_distribution(p, lam), abs=2e-4)
    qq = rearrange_decreasing(q)
    rr = np.linspace(0.01, 1, 101)
    np.testing.assert_allclose(qq(rr), q(rr), atol=1e-12)
    # Polya-Szego: rearranging does not raise the energy
    assert dirichlet_radial(q) <= dirichlet_radial(p) * (1 + 1e-12)


def test_shell_volumes_sum(ctx3):
    p = RadialProfile([0.2, 0.6, 1.0], [1.0, 0.5, 0.0], 3)
    assert shell_volumes(p).sum() == pytest.approx(ctx3.omega / 3, rel=1e-14)


def test_profile_files(tmp_path, ctx2):
    m = moser_profile(ctx2, 50, nodes=64)
    write_profile(tmp_path / "m.txt", m)
    back = read_profile(tmp_path / "m.txt")
    assert back.interp == "log" and back.N == 2
    np.testing.assert_array_equal(back.values, m.values)
    w = to_transformed(m)
    write_profile(tmp_path / "w.txt", w)
    wb = read_profile(tmp_path / "w.txt")
    assert isinstance(wb, TransformedProfile)
    np.testing.assert_array_equal(wb.t_grid, w.t_grid)
    (tmp_path / "bad.txt").write_text("1 0\n")
    with pytest.raises(ValueError):
        read_profile(tmp_path / "bad.txt")
