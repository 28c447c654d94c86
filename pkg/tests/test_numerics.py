import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from logmoser._numerics import RootNotBracketed, bisect, exact_sum, gauss_legendre, panel_edges


def test_bisect_finds_sqrt2():
    assert bisect(lambda x: x * x - 2.0, 0.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-14)


def test_bisect_residual_stop():
    # flat function: residual rule returns the first midpoint
    assert bisect(lambda x: 1e-20 * (x - 0.3), 0.0, 1.0, ftol=1e-12) == 0.5


def test_bisect_requires_sign_change():
    with pytest.raises(RootNotBracketed):
        bisect(lambda x: x * x + 1.0, -1.0, 1.0)


@given(st.floats(-50, 50))
def test_bisect_linear_roots(c):
    assert bisect(lambda x: x - c, -100.0, 100.0) == pytest.approx(c, abs=1e-11)


@pytest.mark.parametrize("order", [2, 5, 8, 16])
def test_gauss_legendre_exact_for_polynomials(order):
    x, w = gauss_legendre(order)
    for k in range(2 * order):
        assert np.dot(w, x**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


@given(st.lists(st.floats(0.01, 5.0), min_size=1, max_size=10), st.integers(1, 4), st.floats(0.05, 3.0))
def test_panel_edges_respects_width_and_breaks(widths, per, maxw):
    breaks = np.concatenate([[0.0], np.cumsum(widths)])
    edges = panel_edges(breaks, per, maxw)
    assert np.all(np.diff(edges) > 0)
    assert set(np.round(breaks, 12)) <= set(np.round(edges, 12))
    assert len(edges) - 1 >= per * len(widths)
    assert np.max(np.diff(edges)) <= maxw * (1 + 1e-12) or np.max(np.diff(edges)) <= np.max(widths) / per + 1e-12


def test_exact_sum_is_order_independent():
    x = np.array([1e16, 1.0, -1e16, 1.0])
    assert exact_sum(x) == exact_sum(x[::-1]) == 2.0
