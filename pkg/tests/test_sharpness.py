import math

import numpy as np
import pytest
from scipy import integrate

from hhlab.quadrature import QuadrantIntegrand, integrate_quadrant
from hhlab.constants import ExponentConfig
from hhlab.errors import InvalidEpsilon, InvalidParameter
from hhlab.functions import weighted_p_norm
from hhlab.kernels import make_kernel
from hhlab.sharpness import (EPSILON_FLOOR, best_constant, extremal_pair, asymptotic_quantities,
                             sharpness_sweep)

SUM = make_kernel("sum-power", 1)
CFG = ExponentConfig.rs(2, 0.5, 1)


def test_extremal_pair_examples():
    pair = extremal_pair(0.01, 2)
    assert weighted_p_norm(pair.f, 2) == pytest.approx(100, rel=1e-12)
    assert pair.norm_product == 100
    assert extremal_pair(0.1, 2).phi == pytest.approx(4 / 0.81)
    assert float(pair.F(1.0)) == 0.0 and float(pair.G(1.0)) == 0.0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_norm_product_identity(p):
    for eps in (0.3, 0.01, 1e-3, EPSILON_FLOOR):
        pair = extremal_pair(eps, p)
        assert pair.norm_product == 1 / eps
        # closed-form norms (1/eps)^(1/p) (1/eps)^(1/q): a few ulps
        assert eps ** (-1 / p) * eps ** (-1 / pair.q) == pytest.approx(1 / eps, rel=8 * np.finfo(float).eps)
        # the generic piece-family norms lose ~ ulp/eps to the rounded exponent -1 - eps
        nf = weighted_p_norm(pair.f, p) ** (1 / p)
        ng = weighted_p_norm(pair.g, pair.q) ** (1 / pair.q)
        assert nf * ng == pytest.approx(1 / eps, rel=8 * np.finfo(float).eps / eps)


def test_epsilon_range():
    with pytest.raises(InvalidEpsilon):
        extremal_pair(0.0, 2)
    with pytest.raises(InvalidEpsilon):
        extremal_pair(1e-6, 2)
    with pytest.raises(InvalidEpsilon):
        extremal_pair(0.6, 3)  # 1/(p-1) = 0.5
    with pytest.raises(InvalidParameter):
        extremal_pair(0.1, 0.5)


def test_cumulatives_match_closed_form():
    pair = extremal_pair(0.05, 2.5)
    for x in (1.5, 10.0, 1e4):
        ref, _ = integrate.quad(lambda t: t ** (-1 / 2.5 - 0.05 / 2.5), 1, x, epsrel=1e-12)
        assert float(pair.F(x)) == pytest.approx(ref, rel=1e-10)


def test_asymptotic_limits():
    Q = asymptotic_quantities(SUM, CFG, 1e-3)
    assert abs(1e-3 * Q.I1.value - math.pi) < 0.05 * math.pi
    # I2 and I3 stay bounded; their exact limit (1+eps)/q I2 -> int_1^inf k(1,u) u^(s-1) du
    # + int_0^1 k(1,u) u^(s+1/q-1) du is pi/2 + ln 2 for this kernel
    limit = math.pi / 2 + math.log(2)
    for eps, rel in ((1e-3, 1e-3), (1e-4, 1e-4)):
        Q = asymptotic_quantities(SUM, CFG, eps)
        assert (1 + eps) / 2 * Q.I2.value == pytest.approx(limit, rel=rel)
        assert (1 + eps) / 2 * Q.I3.value == pytest.approx(limit, rel=rel)
    O = [asymptotic_quantities(SUM, CFG, e).O1.value for e in (1e-1, 1e-2, 1e-3)]
    assert all(math.isfinite(v) for v in O) and max(O) < 1.05 * min(O)


def test_eps_I1_convergence():
    for kernel, k in ((SUM, math.pi), (make_kernel("max-power", 1), 4.0)):
        assert abs(1e-4 * asymptotic_quantities(kernel, CFG, 1e-4).I1.value - k) < 0.01 * k


def test_sweep_lhs_against_2d_quadrature():
    # the corner reduction against iterated 2-D quadrature of F G on [1, inf)^2 at eps = 0.1
    eps = 0.1
    pair = extremal_pair(eps, 2)
    pt = sharpness_sweep(SUM, CFG, [eps])[0]
    spec = QuadrantIntegrand(lambda x, y, d: pair.F(x) * pair.G(y) / (x * y * (x + y)),
                             x_range=(1.0, math.inf), y_range=(1.0, math.inf))
    ref = integrate_quadrant(spec, 1e-8)
    assert abs(pt.lhs - ref.value) <= ref.error_estimate + 1e-7 * ref.value
    assert pt.lower_chain <= pt.lhs


def test_single_large_eps_well_below():
    pt = sharpness_sweep(SUM, CFG, [0.5])[0]
    assert pt.ratio < 0.9 * best_constant(SUM, CFG)


def test_sweep_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        sharpness_sweep(SUM, CFG, [1e-2, 1e-1])
    with pytest.raises(InvalidParameter):
        sharpness_sweep(SUM, ExponentConfig.rs(0.5, 0.5, 1), [0.1])
