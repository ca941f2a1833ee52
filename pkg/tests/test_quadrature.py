import math

import numpy as np
import pytest
from scipy import integrate

from hhlab.constants import profile_integrand
from hhlab.errors import DivergentDeclared
from hhlab.kernels import BUILTIN_IDS
from hhlab.quadrature import (EndpointBehaviour, IntegrandSpec, QuadrantIntegrand,
                              integrate_halfline, integrate_interval, integrate_quadrant)

from conftest import valid_draws


def test_beta_oracle():
    spec = IntegrandSpec(lambda u, du: u ** -0.5 / (1 + u), at_zero=EndpointBehaviour(-0.5),
                         at_inf=EndpointBehaviour(-1.5))
    res = integrate_halfline(spec, 1e-10)
    assert res.converged
    assert abs(res.value - math.pi) <= 1e-10 * math.pi
    assert res.error_estimate >= 0


def test_exponential_and_max_power():
    assert integrate_halfline(IntegrandSpec(lambda u, du: np.exp(-u))).value == pytest.approx(1, rel=1e-12)
    spec = IntegrandSpec(lambda u, du: u ** -0.5 / np.maximum(1, u), breakpoints=(1.0,),
                         at_zero=EndpointBehaviour(-0.5), at_inf=EndpointBehaviour(-1.5))
    assert integrate_halfline(spec).value == pytest.approx(4, rel=1e-10)


def test_interior_singularity():
    # int_0^2 |u - 1|^(-1/2) du = 4
    spec = IntegrandSpec(lambda u, du: np.abs(du) ** -0.5, singular_point=1.0,
                         at_singular=EndpointBehaviour(-0.5))
    assert integrate_interval(spec, 0, 2).value == pytest.approx(4, rel=1e-10)


def test_divergence_declared_before_evaluation():
    calls = []

    def f(u, du):
        calls.append(1)
        return 1 / u

    with pytest.raises(DivergentDeclared):
        integrate_halfline(IntegrandSpec(f, at_zero=EndpointBehaviour(-1.0), at_inf=EndpointBehaviour(-2)))
    assert not calls


def test_quadrant_examples():
    sep = QuadrantIntegrand(lambda x, y, d: np.exp(-x - y))
    assert integrate_quadrant(sep).value == pytest.approx(1, rel=1e-7)
    box = QuadrantIntegrand(lambda x, y, d: np.where((x < 1) & (y < 1), 1 / (x + y), 0.0),
                            x_breakpoints=(1.0,), y_range=(0.0, 1.0))
    res = integrate_quadrant(box)
    assert res.value == pytest.approx(2 * math.log(2), rel=1e-7)
    # the Hilbert inequality with f = g = 1 on [0, 1]
    assert res.value + res.error_estimate < math.pi


def test_quadrant_against_scipy():
    func = lambda x, y, d: np.exp(-x) * y / (1 + x + y) ** 3
    ours = integrate_quadrant(QuadrantIntegrand(func)).value
    ref, _ = integrate.dblquad(lambda x, y: func(x, y, x - y), 0, np.inf, 0, np.inf, epsabs=1e-11)
    assert ours == pytest.approx(ref, rel=1e-7)


@pytest.mark.parametrize("kid", BUILTIN_IDS)
def test_substitution_invariance(kid, rng):
    for kernel, cfg in valid_draws(rng, kid, 20):
        left = integrate_halfline(profile_integrand(kernel, cfg.r, "left"))
        right = integrate_halfline(profile_integrand(kernel, cfg.s, "right"))
        bar = left.error_estimate + right.error_estimate + 1e-13 * abs(left.value)
        assert abs(left.value - right.value) <= bar, (kernel, cfg)


def test_halving_tol_and_linearity():
    f = lambda u, du: np.log1p(u) * np.exp(-u) * u ** -0.3
    g = lambda u, du: np.exp(-2 * u) / np.sqrt(u)
    spec = lambda fn: IntegrandSpec(fn, at_zero=EndpointBehaviour(-0.5))
    coarse = integrate_halfline(spec(f), 1e-6)
    fine = integrate_halfline(spec(f), 5e-7)
    assert fine.error_estimate <= coarse.error_estimate
    a, b = 2.5, -0.75
    both = integrate_halfline(spec(lambda u, du: a * f(u, du) + b * g(u, du)))
    rf, rg = integrate_halfline(spec(f)), integrate_halfline(spec(g))
    bar = both.error_estimate + abs(a) * rf.error_estimate + abs(b) * rg.error_estimate
    assert abs(both.value - (a * rf.value + b * rg.value)) <= bar + 1e-14
