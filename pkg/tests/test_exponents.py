from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from schatte.errors import ConfigurationError
from schatte.exponents import (ExponentTuple, analytic_sup, check_feasible, envelope,
                               grid_search, optimize_gamma)

from oracles import exhaustive_exponent_scan


def test_recomputed_demo_tuples():
    # (1/8, 1/64, 1/32, 1/7): 1/2 - 1/32 = 0.46875 but 5/14 + 1/8 = 0.4821...
    ok, violated = check_feasible(ExponentTuple(F(1, 8), F(1, 64), F(1, 32), F(1, 7)))
    assert not ok and violated == ["coupling"]
    assert check_feasible(ExponentTuple(F(1, 8), F(1, 64), F(1, 32), F(13, 100)))[0]
    ok, violated = check_feasible(ExponentTuple(F(1, 8), F(1, 64), F(1, 16), F(1, 7)))
    assert violated == ["coupling", "gap"]


def test_gamma_zero_infeasible():
    ok, violated = check_feasible(ExponentTuple(0.125, 0.015625, 0.0, 0.13))
    assert violated == ["gamma_pos"]


def test_analytic():
    sup, alpha = analytic_sup()
    assert sup == F(1, 16) and alpha == F(1, 8)
    assert envelope(0.1) == pytest.approx(0.05)


@pytest.mark.parametrize("res", [10, 17, 28, 40])
def test_grid_matches_exhaustive_scan(res):
    best, arg = grid_search(res)
    assert best == pytest.approx(exhaustive_exponent_scan(res), rel=1e-14)
    if arg is not None:
        assert check_feasible(arg)[0]


def test_grid_nested_monotone():
    vals = [grid_search(r)[0] for r in (25, 50, 100, 200, 400)]
    assert vals == sorted(vals)
    assert all(v < 1 / 16 for v in vals)


def test_resolution_floor():
    with pytest.raises(ConfigurationError):
        grid_search(5)


def test_optimize_report():
    d = optimize_gamma(50).to_dict()
    assert d["gamma_sup_exact"] == "1/16" and d["alpha_star_exact"] == "1/8"
    assert d["violated_demo"]["violated"] == ["coupling", "gap"]


@settings(max_examples=200, deadline=None)
@given(a=st.fractions(0, F(1, 2)), b=st.fractions(0, F(1, 2)),
       g=st.fractions(0, F(1, 2)), e=st.fractions(0, F(1, 2)))
def test_feasible_tuples_below_envelope(a, b, g, e):
    t = ExponentTuple(a, b, g, e)
    if check_feasible(t)[0]:
        assert g < envelope(a) <= F(1, 16)
