import math

import mpmath
import numpy as np
import pytest

from hhlab.constants import ExponentConfig
from hhlab.errors import HypothesisViolated, InvalidParameter
from hhlab.functions import TestFunction, TestSequence, random_function
from hhlab.kernels import make_kernel
from hhlab.verifier import (check_hardy_discrete, check_hardy_integral, check_monotonicity,
                            verdict_for, verify_bilinear_discrete, verify_bilinear_integral,
                            verify_equivalent_form_discrete, verify_equivalent_form_integral)

BOX = TestFunction.indicator(0, 1)
EXP = TestFunction.exponential()


def test_verdict_rules():
    assert verdict_for("<", 1, 2, 3, 4)[0] == "holds"
    assert verdict_for("<", 1, 3.5, 3, 4)[0] == "inconclusive"
    assert verdict_for("<", 5, 6, 3, 4)[0] == "violated"
    assert verdict_for(">", 5, 6, 3, 4)[0] == "holds"


def test_hardy_integral_examples():
    rep = check_hardy_integral(BOX, 2)
    assert rep.lhs == pytest.approx(2, rel=1e-10) and rep.rhs == pytest.approx(4)
    assert rep.verdict == "holds" and rep.ratio == pytest.approx(0.5, rel=1e-10)
    assert check_hardy_integral(TestFunction.zero(), 2).verdict == "degenerate"
    rev = check_hardy_integral(EXP, 0.5, "reverse")
    assert rev.lhs == pytest.approx(math.sqrt(2 * math.pi), rel=1e-9)
    assert rev.rhs == pytest.approx(2) and rev.verdict == "holds" and rev.direction == ">"


def test_hardy_regime_mismatch():
    with pytest.raises(InvalidParameter):
        check_hardy_integral(BOX, 0.5, "forward")


def test_hardy_discrete_examples():
    rep = check_hardy_discrete(TestSequence.unit(), 2)
    assert rep.lhs_lower <= math.pi ** 2 / 6 <= rep.lhs_upper
    assert rep.verdict == "holds"
    assert check_hardy_discrete(TestSequence([0.0], 0.0, 2.0), 2).verdict == "degenerate"
    harm = check_hardy_discrete(TestSequence.power(1), 2)
    assert harm.verdict == "holds"
    assert harm.rhs == pytest.approx(4 * math.pi ** 2 / 6, rel=1e-3)
    # sum (H_n / n)^2 = 17 pi^4 / 360
    assert harm.lhs_lower <= 17 * math.pi ** 4 / 360 <= harm.lhs_upper


def test_hardy_discrete_reverse_direction():
    rep = check_hardy_discrete(TestSequence.power(3), 0.5, "reverse")
    assert rep.lhs == math.inf and rep.direction == ">" and rep.verdict == "holds"
    assert rep.extra["printed_direction"] == "<" and rep.extra["printed_verdict"] == "violated"


def test_bilinear_examples():
    rep = verify_bilinear_integral(make_kernel("sum-power", 2), ExponentConfig.rs(2, 1, 2), BOX, BOX)
    assert rep.constant == pytest.approx(4) and rep.verdict == "holds"
    zero = verify_bilinear_integral(make_kernel("sum-power", 2), ExponentConfig.rs(2, 1, 2),
                                    TestFunction.zero(), BOX)
    assert zero.verdict == "degenerate"
    rev = verify_bilinear_integral(make_kernel("max-power", 1), ExponentConfig.rs(0.5, 0.5, 1), EXP, EXP)
    assert rev.direction == ">" and rev.constant == pytest.approx(2) and rev.verdict == "holds"


def test_hilbert_box_value():
    # r = s = 1/2, p = 2: the weight is (xy)^-1, so the integrand is min(x,1) min(y,1) / (xy (x+y))
    k = make_kernel("sum-power", 1)
    rep = verify_bilinear_integral(k, ExponentConfig.rs(2, 0.5, 1), BOX, BOX)
    h = lambda x, y: min(x, 1) * min(y, 1) / (x * y * (x + y))
    ref = mpmath.quad(h, [0, 1, mpmath.inf], [0, 1, mpmath.inf])
    assert rep.lhs == pytest.approx(float(ref), rel=1e-6)


def test_power_form_examples():
    k = make_kernel("sum-power", 1)
    cfg = ExponentConfig.rs(2, 0.5, 1)
    rep = verify_equivalent_form_integral(k, cfg, BOX, BOX)
    assert rep.constant == pytest.approx(4 * math.pi ** 2) and rep.verdict == "holds"
    assert rep.extra["chain"]["holds"]
    assert verify_equivalent_form_integral(k, cfg, TestFunction.zero()).verdict == "degenerate"


def test_scaling_and_dilation(rng):
    k = make_kernel("max-power", 1.4)
    cfg = ExponentConfig.rs(2, 0.6, 1.4)
    f, g = random_function(rng), random_function(rng)
    base = verify_bilinear_integral(k, cfg, f, g)
    for c in (0.1, 7.0):
        other = verify_bilinear_integral(k, cfg, f.scaled(c), g)
        assert other.ratio == pytest.approx(base.ratio, rel=1e-8)
    for t in (0.5, 2.0):
        other = verify_bilinear_integral(k, cfg, f.dilated(t), g.dilated(t))
        assert other.ratio == pytest.approx(base.ratio, rel=1e-5)


def test_discrete_unit_oracles():
    k = make_kernel("max-power", 1)
    cfg = ExponentConfig.rs(2, 0.5, 1)
    e1 = TestSequence.unit()
    rep = verify_bilinear_discrete(k, cfg, e1, e1)
    # A_m = B_n = 1, weights m^(-1) n^(-1) and 1/max(m, n): the double sum is 3 zeta(3)
    assert rep.lhs_lower <= 3 * float(mpmath.zeta(3)) <= rep.lhs_upper
    assert rep.constant == pytest.approx(16) and rep.verdict == "holds"
    pw = verify_equivalent_form_discrete(k, cfg, e1)
    assert pw.constant == pytest.approx(64) and pw.verdict == "holds"
    zero = TestSequence([0.0], 0.0, 2.0)
    assert verify_bilinear_discrete(k, cfg, zero, e1).verdict == "degenerate"


def test_discrete_reverse_power_form():
    rep = verify_equivalent_form_discrete(make_kernel("max-power", 1), ExponentConfig.rs(0.5, 0.5, 1),
                                          TestSequence.power(3))
    assert rep.direction == ">" and rep.verdict == "holds"
    assert rep.constant == pytest.approx((1 * 4) ** 0.5)


def test_monotonicity_hypothesis():
    with pytest.raises(HypothesisViolated):
        check_monotonicity(make_kernel("log-ratio", 3), ExponentConfig.rs(2, 2, 3))
    assert set(check_monotonicity(make_kernel("sum-power", 1), ExponentConfig.rs(2, 0.5, 1)).values()) == {"analytic"}
    with pytest.raises(HypothesisViolated):
        verify_bilinear_discrete(make_kernel("log-ratio", 3), ExponentConfig.rs(2, 2, 3),
                                 TestSequence.unit(), TestSequence.unit())


def test_alpha_beta_origin_divergence():
    # alpha = beta = lam - p - 1: near the origin the integrand has degree 1 - p + a_f + a_g
    k = make_kernel("sum-power", 6)
    e = TestFunction.exponential()
    rep = verify_bilinear_integral(k, ExponentConfig.alpha_beta(4, 6), e, e)
    assert math.isinf(rep.lhs) and rep.verdict == "violated"
    assert "near the origin" in rep.provenance["lhs"]


def test_alpha_beta_dilation_scaling():
    # the alpha-beta ratio scales like t^(p-2) under f(x) -> f(tx)
    k = make_kernel("sum-power", 3.25)
    cfg = ExponentConfig.alpha_beta(1.25, 3.25)
    r = [verify_bilinear_integral(k, cfg, TestFunction.exponential(b=t),
                                  TestFunction.exponential(b=t)).ratio for t in (1.0, 2.0)]
    assert r[1] / r[0] == pytest.approx(2 ** -0.75, rel=1e-5)


def _reverse_kernel(zero, profile):
    from hhlab.kernels import KernelSpec, Singularity
    return KernelSpec.custom(profile, 1.0, singularities=(Singularity("zero", zero), Singularity("inf", -3.0)))


def test_reverse_weighted_power_form():
    cfg = ExponentConfig.weighted_form(0.5, 1.0)
    e = TestFunction.exponential()
    # k(u,1) ~ u at 0: the bracket decays only like 1/y, so the left side is infinite
    rep = verify_equivalent_form_integral(_reverse_kernel(1.0, lambda u: u / (1 + u) ** 4), cfg, e)
    assert math.isinf(rep.lhs) and rep.provenance["lhs"].startswith("divergent")
    k = _reverse_kernel(2.0, lambda u: u ** 2 / (1 + u) ** 5)
    rep = verify_equivalent_form_integral(k, cfg, e)
    h = lambda u: u ** 2 / (1 + u) ** 5

    def bracket(y):
        return mpmath.sqrt(mpmath.quad(lambda x: h(x / y) / y * mpmath.exp(-x),
                                       [0, y / 4, y, 4 * y, mpmath.inf] if y > 1 else [0, y, 1, mpmath.inf]))
    cuts = [0, 0.01, 0.1, 1, 10, 100, 1e3, 1e4, 1e5]
    head = mpmath.fsum(mpmath.quad(bracket, [a, b]) for a, b in zip(cuts, cuts[1:]))
    # beyond Y the bracket is sqrt(2) y^-1.5 (1 - 7.5/y + ...)
    Y = 1e5
    oracle = head + math.sqrt(2) * (2 / math.sqrt(Y) - 5 / Y ** 1.5)
    assert rep.lhs == pytest.approx(float(oracle), rel=1e-6)
    assert rep.direction == ">" and rep.verdict == "holds"
    # printed [-q k]^p against the derived [p k]^p at p = 3/4
    rep = verify_equivalent_form_integral(k, ExponentConfig.weighted_form(0.75, 1.0), e)
    assert rep.verdict == "violated" and rep.extra["derived_verdict"] == "holds"


def test_weighted_bilinear_subnormal_nodes():
    # outer nodes next to y = 0 meet inner nodes with subnormal weights on the diagonal
    k = make_kernel("diff-max", 1.0, 0.7700132277873377)
    f = TestFunction.from_dict({"pieces": [
        {"lo": 0.25, "hi": 0.5, "c": 7.206338193636918, "a": 0.2922159162333833, "b": 0.526654999002543},
        {"lo": 0.5, "hi": 2.0, "c": 3.7656852527037294, "a": 1.2595692759011723, "b": 0.0191522600550047},
        {"lo": 2.0, "hi": 16.0, "c": 4.450645416025473, "a": 1.3435321729801868, "b": 0.3959241965180239}]})
    g = TestFunction.from_dict({"pieces": [
        {"lo": 0.0, "hi": 8.0, "c": 0.6768446937112479, "a": 1.8401109884016607, "b": 0.16425978364793392}]})
    rep = verify_bilinear_integral(k, ExponentConfig.weighted_form(2.0, 1.0), f, g)
    assert rep.verdict == "holds" and math.isfinite(rep.lhs)
