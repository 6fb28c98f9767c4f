import io

import numpy as np
import pytest

from burgers_fkpp.grid import (
    Field,
    Grid1D,
    GridError,
    LevelNotBracketedError,
    TailNotDecayedWarning,
    d1,
    d2,
    integrate,
    level_crossing,
    read_field_csv,
    tail_integral,
    write_field_csv,
)


def make_field(x_min, x_max, n, fn):
    g = Grid1D(x_min, x_max, n)
    return Field(g, fn(g.nodes()))


class TestGridConstruction:
    def test_nodes_exact(self):
        g = Grid1D(-1.0, 1.0, 5)
        assert g.h == 0.5
        np.testing.assert_allclose(g.nodes(), [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_invariants(self):
        with pytest.raises(GridError):
            Grid1D(-1.0, 1.0, 2)
        with pytest.raises(GridError):
            Grid1D(1.0, 2.0, 10)  # origin not inside
        with pytest.raises(GridError):
            Grid1D(1.0, -1.0, 10)

    def test_field_finite(self):
        g = Grid1D(-1.0, 1.0, 5)
        with pytest.raises(GridError):
            Field(g, np.array([0.0, 1.0, np.nan, 0.0, 0.0]))

    def test_field_immutable(self):
        f = make_field(-1, 1, 11, np.sin)
        with pytest.raises(ValueError):
            f.values[0] = 3.0


class TestD1:
    def test_linear_exact(self):
        f = make_field(-2, 3, 41, lambda x: x)
        np.testing.assert_allclose(d1(f).values, 1.0, atol=1e-12)

    def test_constant_zero(self):
        f = make_field(-2, 3, 41, lambda x: 0 * x + 7.0)
        np.testing.assert_allclose(d1(f).values, 0.0, atol=1e-12)

    def test_sin_at_origin(self):
        # analytic oracle: d/dx sin x at 0 is cos 0 = 1
        f = make_field(-1, 1, 201, np.sin)  # h = 0.01
        i0 = 100
        assert abs(f.x[i0]) < 1e-14
        assert abs(d1(f).values[i0] - 1.0) <= 1e-4

    def test_upwind_first_order(self):
        f = make_field(-1, 1, 201, np.sin)
        i0 = 100
        assert abs(d1(f, "upwind", +1).values[i0] - 1.0) <= 1e-2
        assert abs(d1(f, "upwind", -1).values[i0] - 1.0) <= 1e-2


class TestD2:
    def test_quadratic_exact(self):
        f = make_field(-2, 3, 41, lambda x: x**2)
        np.testing.assert_allclose(d2(f).values[1:-1], 2.0, atol=1e-10)

    def test_constant_zero(self):
        f = make_field(-2, 3, 41, lambda x: 0 * x + 7.0)
        np.testing.assert_allclose(d2(f).values, 0.0, atol=1e-10)

    def test_exp_at_origin(self):
        # analytic oracle: (e^x)'' at 0 is 1
        f = make_field(-1, 1, 201, np.exp)
        assert abs(d2(f).values[100] - 1.0) <= 1e-4


class TestConvergenceOrder:
    @pytest.mark.parametrize("op", [d1, d2])
    def test_central_observed_order(self, op):
        # observed order >= 1.9 across h -> h/2 -> h/4 on a smooth function
        errs = []
        target = {d1: np.cos, d2: lambda x: -np.sin(x)}[op]
        for n in (101, 201, 401):
            f = make_field(-1.5, 1.5, n, np.sin)
            err = np.max(np.abs(op(f).values[2:-2] - target(f.x[2:-2])))
            errs.append(err)
        p1 = np.log2(errs[0] / errs[1])
        p2 = np.log2(errs[1] / errs[2])
        assert p1 >= 1.9 and p2 >= 1.9


class TestIntegrate:
    def test_unit_constant(self):
        f = make_field(-2, 2, 81, lambda x: 0 * x + 1.0)
        assert abs(integrate(f, 0.0, 1.0) - 1.0) <= 1e-12

    def test_exp_analytic(self):
        # oracle: integral of e^x over [-20, 0] = 1 - e^{-20}
        f = make_field(-25, 5, 3001, np.exp)  # h = 0.01
        assert abs(integrate(f, -20.0, 0.0) - (1.0 - np.exp(-20.0))) <= 1e-4

    def test_heaviside_area(self):
        g = Grid1D(-1, 1, 201)
        f = Field(g, (g.nodes() <= 0).astype(float))
        assert abs(integrate(f, -1.0, 1.0) - 1.0) <= g.h

    def test_additivity(self):
        f = make_field(-2, 2, 173, lambda x: np.cos(3 * x) + x**2)
        a, b, c = -1.63, 0.211, 1.97
        lhs = integrate(f, a, b) + integrate(f, b, c)
        rhs = integrate(f, a, c)
        assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(rhs))

    def test_out_of_range(self):
        f = make_field(-1, 1, 21, np.sin)
        with pytest.raises(ValueError):
            integrate(f, -2.0, 0.5)


class TestTailIntegral:
    def test_zero(self):
        f = make_field(-1, 1, 21, lambda x: 0 * x)
        np.testing.assert_allclose(tail_integral(f).values, 0.0)

    def test_exp_decay(self):
        # oracle: integral of e^{-x} over [0, 40] = 1 - e^{-40}; trapezoid
        # error is h^2/12 * int |f''| so h = 0.002 leaves margin under 1e-6
        g = Grid1D(-1, 40, 20501)
        f = Field(g, np.exp(-g.nodes()))
        with pytest.warns(TailNotDecayedWarning):
            F = tail_integral(f, decay_tol=1e-30)
        i0 = 500
        assert abs(g.nodes()[i0]) < 1e-12
        assert abs(F.values[i0] - 1.0) <= 1e-6

    def test_sigmoid_antiderivative(self):
        # oracle: integral of 1/(1+e^y) from x to inf = log(1 + e^{-x});
        # at x = 0 this is log 2
        g = Grid1D(-5, 60, 13001)
        f = Field(g, 1.0 / (1.0 + np.exp(g.nodes())))
        F = tail_integral(f)
        i0 = 1000
        assert abs(F.values[i0] - np.log(2.0)) <= 1e-6
        np.testing.assert_allclose(
            F.values, np.log1p(np.exp(-g.nodes())), atol=1e-6
        )

    def test_d1_recovers_minus_f(self):
        g = Grid1D(-3, 30, 3301)
        f = Field(g, np.exp(-g.nodes()) * (2 + np.sin(g.nodes())))
        F = tail_integral(f)
        rec = d1(F).values[1:-1]
        assert np.max(np.abs(rec + f.values[1:-1])) <= 5 * g.h**2 * np.max(f.values)

    def test_warning_fires(self):
        f = make_field(-1, 1, 21, lambda x: 0 * x + 1.0)
        with pytest.warns(TailNotDecayedWarning):
            tail_integral(f)


class TestLevelCrossing:
    def test_sigmoid_half(self):
        # normalization oracle: 1/(1+e^x) passes through 1/2 at x = 0
        g = Grid1D(-10.003, 10.003, 2001)
        f = Field(g, 1.0 / (1.0 + np.exp(g.nodes())))
        assert abs(level_crossing(f, 0.5)) <= g.h**2

    def test_linear(self):
        g = Grid1D(-1, 1, 201)
        f = Field(g, (1 - g.nodes()) / 2)
        assert abs(level_crossing(f, 0.5)) <= 1e-12

    def test_symmetric_steeper(self):
        g = Grid1D(-8.001, 8.001, 1601)
        f = Field(g, 1.0 / (1.0 + np.exp(2 * g.nodes())))
        assert abs(level_crossing(f, 0.5)) <= g.h**2

    def test_translation_equivariance(self):
        g = Grid1D(-10, 10, 401)
        vals = 1.0 / (1.0 + np.exp(g.nodes()))
        f1 = Field(g, vals)
        f2 = Field(g, np.concatenate([vals[1:], [vals[-1] * 0.5]]))  # shift by one node
        x1 = level_crossing(f1, 0.37)
        x2 = level_crossing(f2, 0.37)
        assert abs((x1 - x2) - g.h) <= 1e-12

    def test_not_bracketed(self):
        f = make_field(-1, 1, 21, lambda x: 0 * x + 0.4)
        with pytest.raises(LevelNotBracketedError):
            level_crossing(f, 0.5)


class TestCsvRoundTrip:
    def test_round_trip_bitexact(self):
        f = make_field(-2.5, 1.5, 57, lambda x: np.sin(3.7 * x) * np.exp(x))
        buf = io.StringIO()
        write_field_csv(f, buf)
        buf.seek(0)
        f2 = read_field_csv(buf)
        assert f2.grid == f.grid
        np.testing.assert_array_equal(f2.values, f.values)
