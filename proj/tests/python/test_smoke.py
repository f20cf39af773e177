import math

import pytest

import qgrenorm as q


def test_constant_fixed_point():
    g = q.default_grid()
    one = q.EvenFn(g, [1.0] * g.n_points, 0.0)
    for beta in (0.3, 0.6, 0.9):
        assert q.residual_norm(one, q.RenormParams(beta)).sup <= 1e-8


def test_special_functions():
    assert abs(q.erf(1.0) - 0.8427007929) <= 1e-10
    assert abs(q.gamma_fn(0.5) - math.sqrt(math.pi)) <= 1e-10
    assert abs(q.kummer_m(1.0, 1.0, 1.0) - math.e) <= 1e-10
    assert abs(q.mu0_threshold(2.0, 0.5, -1.5, 0.8) - 0.46034569556064664) <= 1e-12


def test_limit_ode_family():
    sol = q.march_limit_ode(1.0)
    assert max(abs(v - 1.0) for v in sol.samples.values[:257]) <= 1e-8
    assert q.march_limit_ode(0.5).tail_class == q.TailClass.Growing
    with pytest.raises(q.BracketError):
        q.find_nu(0.01, 0.99, 1e-6)
    with pytest.raises(ValueError):
        q.find_nu(0.5, 0.5, 1e-6)


def test_laplace():
    assert abs(q.numeric_laplace(q.march_limit_ode(1.0), 2.0) - 0.5) <= 2e-6
    assert abs(q.inverse_laplace(lambda s: 1.0 / (s + 2.0), 1.0) - math.exp(-2.0)) <= 1e-5


def test_candidate_and_invariance():
    c = q.candidate_member(0.5, 0.6, 2.0)
    assert abs(c(2.0) - 0.5 * math.exp(-4.0)) <= 1e-12
    assert q.invariance_pass_rate(n_samples=3) == 1.0


def test_zero_seed_simulation_is_degenerate():
    g = q.default_grid()
    zero = q.EvenFn(g, [0.0] * g.n_points, 1.0)
    rep = q.simulate(zero, t_end_frac=0.5, n_samples=4, n_y=513)
    assert rep.degenerate
