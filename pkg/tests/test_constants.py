import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logmoser.constants import (
    F_log,
    F_value,
    check_g1,
    const_g,
    find_t0,
    g1_expression,
    log_pow_g,
    make_dimension_context,
    parse_nonlinearity,
    ratio_log_g,
    read_g_table,
    shift_g,
    t0_lhs,
    table_g,
    write_g_table,
)


@pytest.mark.parametrize("N,omega", [(2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_sphere_areas(N, omega):
    assert make_dimension_context(N).omega == pytest.approx(omega, rel=1e-14)


def test_n2_constants(ctx2):
    assert ctx2.alpha_N == pytest.approx(4 * math.pi, rel=1e-15)
    assert ctx2.H == 1.0
    assert ctx2.p == 2.0 and ctx2.beta == 1.0


def test_harmonic_numbers():
    assert make_dimension_context(3).H == 1.5
    assert make_dimension_context(5).H == pytest.approx(25 / 12, rel=1e-15)


@pytest.mark.parametrize("N", range(2, 9))
def test_alpha_omega_round_trip(N):
    c = make_dimension_context(N)
    assert (c.alpha_N / N) ** (N - 1) == pytest.approx(c.omega, rel=1e-12)


@pytest.mark.parametrize("bad", [1, 0, -3, 2.5])
def test_bad_dimension(bad):
    with pytest.raises(ValueError):
        make_dimension_context(bad)


def test_F_trivial_values(ctx2):
    nl = const_g(1.0)
    assert F_value(ctx2, nl, 0.0) == 1.0
    assert F_log(ctx2, nl, 0.0) == 0.0
    # the (1+t) exponent N/(2(N-1)) equals 1 for N = 2
    assert F_log(ctx2, nl, 1.0) == pytest.approx(4 * math.pi - math.log(2.0), rel=1e-15)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_F_log_matches_F_value(N):
    c = make_dimension_context(N)
    nl = log_pow_g(1.5, c.p)
    t = np.linspace(0.1, 3.0, 30)
    np.testing.assert_allclose(np.exp(F_log(c, nl, t)), F_value(c, nl, t), rtol=1e-12)


def test_F_overflow_and_zero_g(ctx2):
    with pytest.raises(OverflowError):
        F_value(ctx2, const_g(1.0), 10.0)
    assert math.isfinite(F_log(ctx2, const_g(1.0), 10.0))
    with pytest.raises(ValueError):
        F_log(ctx2, ratio_log_g(1.0), 0.0)


def test_g1_const_ok_at_2_and_fails_near_zero(ctx2):
    nl = const_g(1.0)
    direct = (8 * math.pi * 2**2 + 8 * math.pi * 2 - 1) * 1.0 * 1.0 * 0.5 * 2  # beta = 1
    assert g1_expression(ctx2, nl, 2.0) == pytest.approx(direct / 1.0, rel=1e-14)
    assert check_g1(ctx2, nl, [2.0]).ok
    rep = check_g1(ctx2, nl, [0.001])
    assert not rep.ok and rep.violations[0][0] == 0.001


def test_g1_log_pow_large_sigma(ctx2):
    sigma = ctx2.p * math.log(3.0)
    rep = check_g1(ctx2, log_pow_g(sigma), np.linspace(1e-6, 10.0, 4001))
    assert rep.ok and rep.checked == 4001


@pytest.mark.parametrize("spec", ["const:1", "shift:1,0.4,1"])
def test_g1_fails_near_zero_for_flat_families(ctx2, spec):
    assert not check_g1(ctx2, parse_nonlinearity(spec, ctx2), [1e-3]).ok


def test_g1_empty_grid(ctx2):
    rep = check_g1(ctx2, const_g(1.0), [])
    assert rep.ok and rep.checked == 0


def test_t0_closed_form_n2(ctx2):
    a = 8 * math.pi
    # 1 - a t - a t^2 = 0
    exact = (-a + math.sqrt(a * a + 4 * a)) / (2 * a)
    assert find_t0(ctx2) == pytest.approx(exact, rel=1e-13)
    assert abs(t0_lhs(ctx2, find_t0(ctx2))) < 1e-13


def test_t0_decreasing_in_dimension():
    vals = [find_t0(make_dimension_context(N)) for N in range(2, 7)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("spec", ["log-pow:2.2", "ratio-log:1", "ratio-log:0.5"])
def test_g_monotone_below_t0_when_g1_holds(ctx2, spec):
    nl = parse_nonlinearity(spec, ctx2)
    assert check_g1(ctx2, nl, np.linspace(1e-4, 10.0, 2000)).ok
    t = np.linspace(0.0, find_t0(ctx2), 200)
    assert np.all(nl(t) >= nl.g0 - 1e-9)


@pytest.mark.parametrize("spec", ["log-pow:2.2", "ratio-log:1"])
def test_F_monotone_when_g1_holds(ctx2, spec):
    nl = parse_nonlinearity(spec, ctx2)
    grid = np.linspace(1e-4, 3.0, 3000)
    assert check_g1(ctx2, nl, grid).ok
    assert np.all(np.diff(F_value(ctx2, nl, grid)) >= 0)


def test_family_metadata(ctx2):
    lp = log_pow_g(2.2)
    assert lp.Cg_infinite and math.isnan(lp.Cg) and lp.g0 == pytest.approx(math.log(2) ** 2.2)
    rl = ratio_log_g(1.0)
    assert rl.g0 == 0.0 and rl.Cg == 0.0
    sh = shift_g(1.0, 0.4, 1.0)
    assert (sh.g0, sh.Cg, sh.rho, sh.C2) == (2.0, 1.0, 0.4, 1.0)
    assert sh(1e12) == pytest.approx(1.0, abs=1e-4)


@given(st.floats(0.0, 50.0))
def test_analytic_derivatives(t):
    for nl in (log_pow_g(2.2), ratio_log_g(1.3), shift_g(1.0, 0.4, 2.0)):
        h = 1e-6 * max(1.0, t)
        lo = max(t - h, 0.0)
        fd = (nl(t + h) - nl(lo)) / (t + h - lo)
        assert float(nl.g_prime(np.asarray(t))) == pytest.approx(float(fd), rel=1e-4, abs=1e-8)


@settings(max_examples=30)
@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=20))
def test_table_round_trip(tmp_path_factory, gs):
    path = tmp_path_factory.mktemp("g") / "g.txt"
    t = np.arange(len(gs), dtype=float) * 0.5
    write_g_table(path, t, gs)
    t2, g2 = read_g_table(path)
    np.testing.assert_array_equal(t, t2)
    np.testing.assert_array_equal(np.asarray(gs), g2)
    nl = parse_nonlinearity(f"table:{path}")
    assert nl.g0 == gs[0] and nl.Cg == gs[-1]
    assert "central differences" in nl.derivative_note


def test_table_validation(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 2\n")
    with pytest.raises(ValueError):
        read_g_table(bad)
    bad.write_text("# logmoser-g v1\n0 1\n0 2\n")
    with pytest.raises(ValueError):
        read_g_table(bad)
    bad.write_text("# logmoser-g v1\n0.5 1\n1 2\n")
    with pytest.raises(ValueError):
        read_g_table(bad)


def test_table_matches_const(ctx2):
    nl = table_g([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
    assert float(nl(5.0)) == 1.0 and float(nl.g_prime(np.asarray(1.0))) == 0.0


@pytest.mark.parametrize("spec", ["bogus:1", "const:x", "shift:1,2", "log-pow"])
def test_parse_errors(spec):
    with pytest.raises(ValueError):
        parse_nonlinearity(spec)
