"""Numerical checks of the Hardy and Hardy-Hilbert type inequalities.

Every check returns a :class:`VerificationReport`.  Both sides are carried as
intervals ``[lower, upper]`` that contain the true value under the stated
error model (quadrature estimates, truncation tail bounds, constant errors), and
the verdict is read off those intervals:

* ``holds``: the intervals are separated in the claimed direction;
* ``violated``: they are separated in the opposite direction;
* ``inconclusive``: they overlap;
* ``degenerate``: some input is identically zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import ExponentConfig, kernel_constant, profile_integrand, profile_moment
from .errors import (DivergentDeclared, HypothesisViolated, InvalidParameter, NotIntegrable,
                     NotSummable)
from .functions import (DEFAULT_TRUNCATION, TestFunction, TestSequence, cumulative,
                        partial_sums, sum_p_with_tail, weighted_p_norm)
from .kernels import KernelId, KernelSpec
from .quadrature import (DEFAULT_TOL_1D, DEFAULT_TOL_2D, EndpointBehaviour, IntegrandSpec,
                         QuadrantIntegrand, QuadratureResult, integrate_batch, integrate_interval,
                         integrate_quadrant)

# relative rounding allowance for closed-form quantities
_EXACT_REL = 1e-13


@dataclass(frozen=True)
class VerificationReport:
    check_id: str
    direction: str
    lhs: float
    lhs_lower: float
    lhs_upper: float
    rhs: float
    rhs_lower: float
    rhs_upper: float
    constant: float
    constant_provenance: str
    ratio: float
    verdict: str
    margin: float
    provenance: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def lhs_error(self):
        return max(self.lhs - self.lhs_lower, self.lhs_upper - self.lhs)

    @property
    def rhs_error(self):
        return max(self.rhs - self.rhs_lower, self.rhs_upper - self.rhs)

    def as_dict(self):
        return {
            "check_id": self.check_id, "direction": self.direction,
            "lhs": self.lhs, "lhs_lower": self.lhs_lower, "lhs_upper": self.lhs_upper,
            "rhs": self.rhs, "rhs_lower": self.rhs_lower, "rhs_upper": self.rhs_upper,
            "constant": self.constant, "constant_provenance": self.constant_provenance,
            "ratio": self.ratio, "verdict": self.verdict, "margin": self.margin,
            "provenance": self.provenance, "extra": self.extra,
        }


def verdict_for(direction, lhs_lower, lhs_upper, rhs_lower, rhs_upper):
    """``(verdict, margin)`` from the two intervals; margin > 0 exactly when the claim is confirmed."""
    if direction == "<":
        margin = rhs_lower - lhs_upper
        if margin > 0:
            return "holds", margin
        return ("violated" if lhs_lower > rhs_upper else "inconclusive"), margin
    if direction == ">":
        margin = lhs_lower - rhs_upper
        if margin > 0:
            return "holds", margin
        return ("violated" if lhs_upper < rhs_lower else "inconclusive"), margin
    raise InvalidParameter(f"direction must be '<' or '>', got {direction!r}")


def _ratio(lhs, rhs):
    if rhs == 0:
        return math.inf if lhs > 0 else math.nan
    return lhs / rhs


def _make_report(check_id, direction, lhs, lhs_lo, lhs_hi, rhs, rhs_lo, rhs_hi, constant,
                 constant_prov, provenance, extra=None):
    verdict, margin = verdict_for(direction, lhs_lo, lhs_hi, rhs_lo, rhs_hi)
    return VerificationReport(check_id, direction, lhs, lhs_lo, lhs_hi, rhs, rhs_lo, rhs_hi,
                              constant, constant_prov, _ratio(lhs, rhs), verdict, margin,
                              provenance, extra or {})


def _degenerate(check_id, direction, constant=math.nan, constant_prov="", note="input is identically zero"):
    return VerificationReport(check_id, direction, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, constant,
                              constant_prov, math.nan, "degenerate", 0.0, {"note": note}, {})


def _quad_interval(res):
    return res.value, res.value - res.error_estimate, res.value + res.error_estimate


def _scaled_interval(value, rel):
    return value, value * (1 - rel), value * (1 + rel)


def _regime_check(p, direction):
    if direction == "forward" and not p > 1:
        raise InvalidParameter(f"regime mismatch: forward direction needs p > 1, got p={p}")
    if direction == "reverse" and not 0 < p < 1:
        raise InvalidParameter(f"regime mismatch: reverse direction needs 0 < p < 1, got p={p}")
    if direction not in ("forward", "reverse"):
        raise InvalidParameter(f"direction must be 'forward' or 'reverse', got {direction!r}")


# -- Hardy inequalities -----------------------------------------------------------

def _growth_exponent(f: TestFunction):
    """``(g, log)`` with ``int_0^x f ~ x**g (log x)**log`` as ``x -> inf``."""
    last = f.pieces[-1]
    if math.isinf(last.hi) and last.b == 0:
        if last.a > -1:
            return last.a + 1.0, False
        if last.a == -1:
            return 0.0, True
    return 0.0, False


def check_hardy_integral(f: TestFunction, p, direction="forward", tol=DEFAULT_TOL_1D):
    """``int (F/x)**p`` against ``(p/(p-1))**p int f**p`` (forward, ``F = int_0^x f``)
    or ``(p/(1-p))**p int f**p`` (reverse, ``F = int_x^inf f``, direction ``>``)."""
    _regime_check(p, direction)
    check_id = f"hardy-integral-{direction}"
    rel = "<" if direction == "forward" else ">"
    const = (p / (p - 1.0)) ** p if direction == "forward" else (p / (1.0 - p)) ** p
    prov = "(p/(p-1))^p" if direction == "forward" else "(p/(1-p))^p"
    if f.is_zero:
        return _degenerate(check_id, rel, const, prov)
    if direction == "reverse" and not f.strictly_positive:
        raise InvalidParameter("reverse-regime inputs must be strictly positive on (0, inf)")
    norm = weighted_p_norm(f, p)
    F = cumulative(f, "forward" if direction == "forward" else "tail")

    def func(x, dx):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, (F(x) / x) ** p, 0.0)

    if direction == "forward":
        g, log = _growth_exponent(f)
        decay = p * (g - 1.0)
        if decay >= -1:
            raise NotIntegrable(f"(F/x)**p decays like x**{decay:.6g}; the left side diverges")
        spec = IntegrandSpec(func, breakpoints=f.breakpoints, at_inf=EndpointBehaviour(decay, log))
    else:
        spec = IntegrandSpec(func, breakpoints=f.breakpoints, at_zero=EndpointBehaviour(-p))
    res = integrate_interval(spec, 0.0, math.inf, tol)
    lhs = _quad_interval(res)
    rhs = _scaled_interval(const * norm, _EXACT_REL)
    return _make_report(check_id, rel, *lhs, *rhs, const, prov,
                        {"lhs": f"quadrature (err {res.error_estimate:.3g}, {res.evaluations} evals)",
                         "rhs": "closed-form norm"},
                        {"norm": norm})


def _hardy_tail_bound(a: TestSequence, A_N, N, p):
    """Upper bound for ``sum_{n>N} (A_n/n)**p``.

    With a summable tail ``A_n <= A_tot`` gives ``A_tot**p N**(1-p)/(p-1)``.
    Otherwise ``A_n <= A(n) := A_N + c int_N^n u**-t du``; when ``A(x)/x`` is
    decreasing on ``[N, inf)`` the sum is at most ``int_N^inf (A(x)/x)**p dx``,
    integrated in the variable ``x = N e^v``.
    """
    A_tot = a.total()
    if math.isfinite(A_tot):
        return A_tot ** p * N ** (1.0 - p) / (p - 1.0)
    c, t = a.tail_coef, a.tail_exp
    if t * p <= 1 or A_N < c * N ** (1.0 - t):
        return math.inf

    def bound(v, dv):
        with np.errstate(divide="ignore"):
            if t == 1:
                log_grow = np.log(v)
            else:
                z = (1.0 - t) * v
                # log(expm1(z)) without overflow for large z
                log_grow = np.where(z > 30, z + np.log1p(-np.exp(-np.minimum(z, 700.0))),
                                    np.log(np.expm1(np.minimum(z, 30.0)))) - math.log(1.0 - t)
            log_A = np.logaddexp(math.log(A_N), math.log(c) + (1.0 - t) * math.log(N) + log_grow)
        return np.exp((1.0 - p) * (math.log(N) + v) + p * log_A)

    res = integrate_interval(IntegrandSpec(bound), 0.0, math.inf, DEFAULT_TOL_1D)
    return res.value + res.error_estimate


def check_hardy_discrete(a: TestSequence, p, direction="forward", N=DEFAULT_TRUNCATION):
    """Discrete Hardy inequality.

    Forward (``p > 1``): ``sum (A_n/n)**p < (p/(p-1))**p sum a_n**p`` with a
    truncation tail bound.  Reverse (``0 < p < 1``): the left side is infinite
    for every nonzero sequence (``A_n/n >= A_1/n`` eventually and ``p < 1``), so
    the printed direction ``<`` fails and ``>`` is what holds; the report
    asserts ``>`` and records the printed direction's verdict in ``extra``.
    """
    _regime_check(p, direction)
    check_id = f"hardy-discrete-{direction}"
    const = (p / (p - 1.0)) ** p if direction == "forward" else (p / (1.0 - p)) ** p
    prov = "(p/(p-1))^p" if direction == "forward" else "(p/(1-p))^p"
    rel = "<" if direction == "forward" else ">"
    if a.is_zero:
        return _degenerate(check_id, rel, const, prov)
    norm, norm_tail = sum_p_with_tail(a, p, 0.0, N)
    rhs_lo, rhs_hi = const * norm * (1 - _EXACT_REL), const * (norm + norm_tail) * (1 + _EXACT_REL)
    rhs = const * (norm + 0.5 * norm_tail)
    Nn = max(int(N), len(a.head))
    A = partial_sums(a, Nn)
    n = np.arange(1, Nn + 1, dtype=float)
    partial = math.fsum((A / n) ** p)
    if direction == "forward":
        tail = _hardy_tail_bound(a, float(A[-1]), Nn, p)
        lhs_lo, lhs_hi = partial * (1 - _EXACT_REL), (partial + tail) * (1 + _EXACT_REL)
        lhs = partial + 0.5 * tail if math.isfinite(tail) else partial
        return _make_report(check_id, rel, lhs, lhs_lo, lhs_hi, rhs, rhs_lo, rhs_hi, const, prov,
                            {"lhs": f"truncated sum N={Nn} + tail bound {tail:.3g}",
                             "rhs": f"truncated sum N={Nn} + tail bound {norm_tail:.3g}"},
                            {"truncation": Nn})
    lhs = math.inf
    report = _make_report(check_id, ">", lhs, lhs, lhs, rhs, rhs_lo, rhs_hi, const, prov,
                          {"lhs": "divergent: (A_n/n)**p >= (A_m/n)**p with p < 1 is not summable",
                           "rhs": f"truncated sum N={Nn} + tail bound {norm_tail:.3g}"},
                          {"truncation": Nn, "partial_lhs": partial})
    printed_verdict, printed_margin = verdict_for("<", lhs, lhs, rhs_lo, rhs_hi)
    report.extra.update(printed_direction="<", printed_verdict=printed_verdict,
                        printed_margin=printed_margin)
    return report


# -- forms of the main theorems ---------------------------------------------------

@dataclass(frozen=True)
class _Form:
    """Everything that distinguishes one family of inequalities from another."""

    param: str
    ex: float          # exponent of x (or m) in the bilinear weight
    ey: float          # exponent of y (or n) in the bilinear weight
    delta: float       # extra power of y in the one-function form
    norm_w: float      # weight exponent in the norms (0 or 1)
    bil_const: float
    bil_prov: str
    bil_const_rel: float
    pow_const: float
    pow_prov: str
    pow_const_rel: float
    extra: dict


def _rs_constant(kernel, r, tol):
    """``(value, relative error, provenance)`` of ``int k(u,1) u**(r-1) du``."""
    if 0 < r < kernel.lam:
        rep = kernel_constant(kernel, r, tol)
        if rep.closed_form is not None and rep.agreement is not None and rep.agreement < 1e-6:
            return rep.closed_form, _EXACT_REL, f"closed-form {rep.closed_form_id}"
        num = rep.numeric
    else:
        num = profile_moment(kernel, r, "left", tol)
    rel = num.error_estimate / abs(num.value) if num.value else math.inf
    return num.value, max(rel, _EXACT_REL), f"quadrature int k(u,1)u^(r-1)du, r={r:.6g}"


def _form_for(kernel: KernelSpec, cfg: ExponentConfig, tol=DEFAULT_TOL_1D, discrete=False):
    p, q, lam = cfg.p, cfg.q, cfg.lam
    if abs(lam - kernel.lam) > 1e-14 * lam:
        raise InvalidParameter(f"config lam={lam} differs from kernel lam={kernel.lam}")
    forward = cfg.regime == "forward"
    sign = 1.0 if forward else -1.0
    if cfg.parametrization == "rs":
        k, krel, kprov = _rs_constant(kernel, cfg.r, tol)
        return _Form("rs", cfg.r - 1 / q - 1, cfg.s - 1 / p - 1, 1.0, 0.0,
                     sign * p * q * k, f"{'' if forward else '-'}pq*k; k: {kprov}", krel,
                     (sign * q * k) ** p, f"[{'' if forward else '-'}q*k]^p; k: {kprov}", p * krel,
                     {"k": k})
    if cfg.parametrization == "weighted":
        if not discrete and abs(lam - 1.0) > 1e-14:
            raise InvalidParameter("the continuous weighted forms are dilation invariant only for lam = 1")
        k, krel, kprov = _rs_constant(kernel, 1.0 / p, tol)
        extra = {"k": k}
        # the dual Hardy step gives int F**p <= p**p int (x f)**p (reversed for p < 1),
        # hence [p k]^p in both regimes
        extra["derived_power_constant"] = (p * k) ** p
        return _Form("weighted", 0.0, 0.0, 0.0, 1.0,
                     sign * p * q * k, f"{'' if forward else '-'}pq*k(1/p); k: {kprov}", krel,
                     (sign * q * k) ** p, f"[{'' if forward else '-'}q*k(1/p)]^p (as printed); k: {kprov}",
                     p * krel, extra)
    # alpha-beta
    if not forward:
        raise InvalidParameter("the alpha-beta forms are stated for p > 1 only")
    alpha, beta = cfg.alpha, cfg.beta
    ka_res = profile_moment(kernel, alpha + 1.0, "right", tol)
    kb_res = profile_moment(kernel, beta + 1.0, "left", tol)
    ka, kb = ka_res.value, kb_res.value
    rel = max(ka_res.error_estimate / ka, kb_res.error_estimate / kb, _EXACT_REL)
    extra = {"k_alpha": ka, "k_beta": kb}
    if discrete:
        bil = (p * q * ka, "pq*k(alpha) (as printed)", rel)
    else:
        bil = (p * q * ka ** (1 / p) * kb ** (1 / q), "pq*k(alpha)^(1/p)*k(beta)^(1/q)", rel)
    return _Form("alpha-beta", beta / q, alpha / p, 1.0, 0.0, *bil,
                 q ** p * ka ** (p - 1) * kb, "q^p*k(alpha)^(p-1)*k(beta)", p * rel, extra)


# -- continuous checks ---------------------------------------------------------------

def _log_pos(v):
    with np.errstate(divide="ignore"):
        return np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), -np.inf)


def _support_range(fn: TestFunction, direction):
    """Where the cumulative of ``fn`` is nonzero."""
    if direction == "forward":
        return (fn.pieces[0].lo, math.inf)
    return (0.0, fn.pieces[-1].hi)


def _bilinear_integrand(kernel, form, F, G):
    ex, ey = form.ex, form.ey

    def func(x, y, dxy):
        v, log_scale = kernel.scaled_values(x, y, dxy)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            logw = ex * np.log(x) + ey * np.log(y) + _log_pos(F(x)) + _log_pos(G(y)) + log_scale
            out = v * np.exp(logw)
        return np.where(np.isfinite(logw), out, 0.0)
    return func


def _power_inner(kernel, form, F, kappa):
    """Inner integrand of the power form divided by ``y**kappa`` (its homogeneity degree)."""
    ex, ey = form.ex, form.ey + form.delta - kappa

    def func(x, y, dxy):
        v, log_scale = kernel.scaled_values(x, y, dxy)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            logw = ex * np.log(x) + ey * np.log(y) + _log_pos(F(x)) + log_scale
            out = v * np.exp(logw)
        return np.where(np.isfinite(logw), out, 0.0)
    return func


def _check_inputs(cfg, *fns):
    if cfg.regime == "reverse":
        for fn in fns:
            if fn is not None and not fn.is_zero and not fn.strictly_positive:
                raise InvalidParameter("reverse-regime inputs must be strictly positive on (0, inf)")


def _cum_direction(form, cfg):
    if form.param == "weighted" or cfg.regime == "reverse":
        return "tail"
    return "forward"


def _bilinear_lhs(kernel, form, f, g, direction, tol):
    F, G = cumulative(f, direction), cumulative(g, direction)
    integrand = QuadrantIntegrand(
        _bilinear_integrand(kernel, form, F, G),
        x_breakpoints=f.breakpoints, y_breakpoints=g.breakpoints,
        x_range=_support_range(f, direction), y_range=_support_range(g, direction))
    return integrate_quadrant(integrand, tol)


def _power_lhs(kernel, form, f, direction, p, tol):
    F = cumulative(f, direction)
    kappa = form.ex + form.ey + form.delta + 1.0 - kernel.lam

    def outer(y, v):
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            return np.where(v > 0, np.exp(p * (kappa * np.log(y) + _log_pos(v))), 0.0)

    def outer_error(y, v, err):
        # first-order propagation, p y^(p kappa) v^(p-1) err, kept in log space
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            out = p * np.exp(p * kappa * np.log(y) + (p - 1) * _log_pos(v) + _log_pos(err))
        return np.where((v > 0) & (err > 0), out, 0.0)

    integrand = QuadrantIntegrand(
        _power_inner(kernel, form, F, kappa),
        x_breakpoints=f.breakpoints, y_breakpoints=f.breakpoints,
        outer=outer, outer_error=outer_error, x_range=_support_range(f, direction))
    return integrate_quadrant(integrand, tol)


def _tail_power_divergence(kernel, form, p):
    """Reason the power form with a tail cumulative is infinite, or None.

    F is bounded with F(0) > 0 and decays fast, so with ``k(u,1) ~ u**z`` at 0
    and ``~ u**w`` at infinity the bracket behaves like ``y**(ey+delta-lam-z)``
    for large y, and for small y like ``y**kappa`` (when ``int t**ex k(t,1) dt``
    converges) or ``y**(ey+delta-lam-w)`` (when it does not).
    """
    z, _ = _zero_exponent(kernel, "left")
    at_inf = kernel.singularity("inf")
    if at_inf is None:
        return None
    w = at_inf.exponent
    lam, ex, head = kernel.lam, form.ex, form.ey + form.delta
    if ex + z <= -1.0:
        return f"int x^{ex:.4g} k(x,y) F(x) dx diverges at x = 0 for every y"
    big = p * (head - lam - z)
    if big >= -1.0:
        return f"the outer integrand decays only like y^{big:.4g} at infinity"
    small = p * (head + ex + 1.0 - lam) if ex + w < -1.0 else p * (head - lam - w)
    if small <= -1.0:
        return f"the outer integrand grows like y^{small:.4g} at zero"
    return None


def _norm_factor(fn, exponent, w):
    """``(int (x**w fn)**exponent)**(1/exponent)``; zero when the integral is infinite and exponent < 0."""
    val = weighted_p_norm(fn, exponent, w, allow_infinite=exponent < 0)
    if math.isinf(val):
        return 0.0, val
    return val ** (1.0 / exponent), val


def verify_bilinear_integral(kernel: KernelSpec, cfg: ExponentConfig, f: TestFunction,
                             g: TestFunction, tol=DEFAULT_TOL_2D):
    """The two-function (bilinear) inequality for the parametrisation carried by ``cfg``.

    ``rs``: weight ``x**(r-1/q-1) y**(s-1/p-1)``, constant ``pq k(r)``;
    ``alpha-beta``: weight ``x**(beta/q) y**(alpha/p)``;
    ``weighted``: no weight, tail cumulatives, ``(x f)**p`` norms.
    In the reverse regime the constant is ``-pq k`` and the direction is ``>``.
    """
    form = _form_for(kernel, cfg, min(DEFAULT_TOL_1D, tol))
    direction = "<" if cfg.regime == "forward" else ">"
    check_id = f"bilinear/{form.param}"
    if f.is_zero or g.is_zero:
        return _degenerate(check_id, direction, form.bil_const, form.bil_prov)
    _check_inputs(cfg, f, g)
    cum = _cum_direction(form, cfg)
    p, q = cfg.p, cfg.q
    nf, nf_raw = _norm_factor(f, p, form.norm_w)
    ng, ng_raw = _norm_factor(g, q, form.norm_w)
    rhs_val = form.bil_const * nf * ng
    rhs = _scaled_interval(rhs_val, form.bil_const_rel + 2 * _EXACT_REL)
    extra = dict(form.extra)
    extra.update(norm_f=nf_raw, norm_g=ng_raw, cumulative=cum)
    if ng == 0.0:
        extra["note"] = "the g-norm factor vanishes because int g^q diverges for q < 0"
    if form.param == "rs" and cum == "tail":
        # F(0) G(0) > 0 and the weight times the kernel is homogeneous of degree -3,
        # so the integral over any neighbourhood of the origin diverges
        lhs = (math.inf, math.inf, math.inf)
        lhs_prov = "divergent: integrand ~ F(0)G(0) x rho^-3 near the origin"
    elif cum == "forward" and _origin_degree(kernel, form, f, g) <= -2.0:
        lhs = (math.inf, math.inf, math.inf)
        lhs_prov = (f"divergent: integrand is homogeneous of degree "
                    f"{_origin_degree(kernel, form, f, g):.4g} <= -2 near the origin")
    else:
        res = _bilinear_lhs(kernel, form, f, g, cum, tol)
        lhs = _quad_interval(res)
        lhs_prov = f"2-D quadrature (err {res.error_estimate:.3g}, {res.evaluations} evals)"
    return _make_report(check_id, direction, *lhs, *rhs, form.bil_const, form.bil_prov,
                        {"lhs": lhs_prov, "rhs": "closed-form norms x constant"}, extra)


def _origin_degree(kernel, form, f, g):
    """Degree of the bilinear integrand near the origin with forward cumulatives
    (``F ~ x**(a+1)`` when the first piece of ``f`` starts at 0); ``inf`` when
    ``F`` or ``G`` vanishes near 0."""
    first_f, first_g = f.pieces[0], g.pieces[0]
    if first_f.lo > 0 or first_g.lo > 0:
        return math.inf
    return form.ex + form.ey - kernel.lam + first_f.a + first_g.a + 2.0


def verify_equivalent_form_integral(kernel: KernelSpec, cfg: ExponentConfig, f: TestFunction,
                                    g: Optional[TestFunction] = None, tol=DEFAULT_TOL_2D,
                                    bilinear: Optional[VerificationReport] = None):
    """The one-function (power) form ``int [int w k F dx]^p dy`` against ``C int (x^w f)^p``.

    When ``g`` is given in the forward regime, the Hoelder step linking the two
    forms is also measured: bilinear lhs <= (power lhs)^(1/p) (int H^q)^(1/q)
    with ``H = G/y`` (or ``G`` for the weighted form).  A precomputed bilinear
    report can be passed to avoid recomputing it.
    """
    form = _form_for(kernel, cfg, min(DEFAULT_TOL_1D, tol))
    direction = "<" if cfg.regime == "forward" else ">"
    check_id = f"power/{form.param}"
    if f.is_zero:
        return _degenerate(check_id, direction, form.pow_const, form.pow_prov)
    _check_inputs(cfg, f, g)
    cum = _cum_direction(form, cfg)
    p, q = cfg.p, cfg.q
    norm = weighted_p_norm(f, p, form.norm_w)
    kappa = form.ex + form.ey + form.delta + 1.0 - kernel.lam
    divergent = None
    if cum == "forward" and p * kappa >= -1.0:
        # with x = t y the bracket behaves like F(inf) y^kappa int t^ex k(t,1) dt for large y,
        # and y^(p kappa) is not integrable at infinity
        divergent = f"the outer integrand grows like y^{p * kappa:.4g} at infinity"
    elif cum == "tail":
        divergent = _tail_power_divergence(kernel, form, p)
    if divergent is not None:
        res = QuadratureResult(math.inf, 0.0, 0, True)
        lhs_note = "divergent: " + divergent
    else:
        res = _power_lhs(kernel, form, f, cum, p, tol)
        lhs_note = f"nested quadrature (err {res.error_estimate:.3g}, {res.evaluations} evals)"
    rhs = _scaled_interval(form.pow_const * norm, form.pow_const_rel + _EXACT_REL)
    extra = dict(form.extra)
    extra.update(norm_f=norm, cumulative=cum)
    if "derived_power_constant" in extra:
        d = extra["derived_power_constant"] * norm
        dv, dm = verdict_for(direction, res.value - res.error_estimate, res.value + res.error_estimate,
                             d * (1 - form.pow_const_rel), d * (1 + form.pow_const_rel))
        extra.update(derived_rhs=d, derived_verdict=dv)
    if form.param == "alpha-beta" and g is not None and not g.is_zero:
        # the right side exactly as printed also carries the g-norm
        ng = weighted_p_norm(g, q) ** (1 / q)
        printed = form.pow_const * norm ** (1 / p) * ng
        pv, _ = verdict_for(direction, res.value - res.error_estimate, res.value + res.error_estimate,
                            printed * (1 - form.pow_const_rel), printed * (1 + form.pow_const_rel))
        extra.update(printed_mixed_rhs=printed, printed_mixed_verdict=pv)
    if g is not None and not g.is_zero and cfg.regime == "forward":
        extra["chain"] = _chain(kernel, cfg, form, f, g, res, cum, tol, bilinear)
    return _make_report(check_id, direction, *_quad_interval(res), *rhs, form.pow_const,
                        form.pow_prov,
                        {"lhs": lhs_note, "rhs": "closed-form norm x constant"}, extra)


def _chain(kernel, cfg, form, f, g, power_res, cum, tol, bilinear):
    p, q = cfg.p, cfg.q
    if bilinear is None or bilinear.verdict == "degenerate":
        bres = _bilinear_lhs(kernel, form, f, g, cum, tol)
        b_val, b_err = bres.value, bres.error_estimate
    else:
        b_val, b_err = bilinear.lhs, bilinear.lhs_error
    G = cumulative(g, cum)
    shift = 1.0 if form.delta else 0.0

    def h_func(y, dy):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.where(y > 0, (np.maximum(G(y), 0.0) / y ** shift) ** q, 0.0)

    if cum == "forward":
        gr, log = _growth_exponent(g)
        spec = IntegrandSpec(h_func, breakpoints=g.breakpoints,
                             at_inf=EndpointBehaviour(q * (gr - shift), log))
        lo, hi = g.pieces[0].lo, math.inf
    else:
        spec = IntegrandSpec(h_func, breakpoints=g.breakpoints)
        lo, hi = 0.0, g.pieces[-1].hi
    hres = integrate_interval(spec, lo, hi, DEFAULT_TOL_1D)
    P, Pe = power_res.value, power_res.error_estimate
    H, He = hres.value, hres.error_estimate
    bound = P ** (1 / p) * H ** (1 / q)
    bound_hi = (P + Pe) ** (1 / p) * (H + He) ** (1 / q)
    return {"bilinear": b_val, "bilinear_error": b_err, "bound": bound,
            "holds": bool(b_val - b_err <= bound_hi)}


# -- discrete checks ------------------------------------------------------------------

MONOTONICITY_GRID = np.geomspace(1e-4, 1e4, 256)
_ANALYTIC_MONOTONE = (KernelId.SUM_POWER, KernelId.MAX_POWER)
_BLOCK = 256
_PHI_GRID_POINTS = 200


def _profile_label(side, exponent):
    base = "k(u,1)" if side == "left" else "k(1,u)"
    return f"{base}*u^({exponent - 1.0:.6g})"


def _monotone_profile(kernel, exponent, side):
    """``(ok, how)``: is ``u -> k(u,1) u**(exponent-1)`` (or the right profile)
    nonincreasing on (0, inf) and strictly decreasing somewhere?"""
    if kernel.id in _ANALYTIC_MONOTONE:
        # (1+u)^-lam u^(e-1) and max(1,u)^-lam u^(e-1): both decrease iff e <= 1
        return exponent <= 1.0, "analytic"
    u = MONOTONICITY_GRID
    spec = profile_integrand(kernel, exponent, side)
    with np.errstate(all="ignore"):
        v = np.asarray(spec.func(u, u - 1.0), dtype=float)
    if np.isnan(v).any():
        return False, "grid"
    nonincreasing = bool(np.all(v[1:] <= v[:-1] * (1.0 + 1e-12)))
    strict = bool(np.any(v[1:] < v[:-1] * (1.0 - 1e-9)))
    return nonincreasing and strict, "grid"


def _hypothesis_exponents(cfg: ExponentConfig):
    if cfg.parametrization == "rs":
        return cfg.r, cfg.s
    if cfg.parametrization == "alpha-beta":
        return cfg.alpha + 1.0, cfg.beta + 1.0
    return 1.0 / cfg.p, 1.0 / cfg.q


def check_monotonicity(kernel: KernelSpec, cfg: ExponentConfig):
    """Validate the hypothesis of the discrete theorems for ``cfg``.

    The two profiles ``k(u,1) u**(e1-1)`` and ``k(1,u) u**(e2-1)`` must be
    nonincreasing on (0, inf) and strictly decreasing somewhere, with
    ``(e1, e2) = (r, s)``, ``(alpha+1, beta+1)`` or ``(1/p, 1/q)``.  Sum-power
    and max-power are decided analytically, every other kernel on a 256-point
    log grid over [1e-4, 1e4].  Returns ``{profile: method}``; raises
    :class:`HypothesisViolated` naming the offending profile.
    """
    out = {}
    for side, e in zip(("left", "right"), _hypothesis_exponents(cfg)):
        label = _profile_label(side, e)
        ok, how = _monotone_profile(kernel, e, side)
        if not ok:
            raise HypothesisViolated(f"{label} is not nonincreasing on (0, inf) ({how} check)")
        out[label] = how
    return out


def _tail_function(kernel, exponent, lo, tol):
    """Upper bounds on ``Phi(t) = int_t^inf u**(exponent-1) k(u,1) du`` for every ``t`` in ``lo``."""
    spec = profile_integrand(kernel, exponent, "left")
    t = np.asarray(lo, dtype=float)
    out = np.empty(t.shape)
    big = t >= 1.0
    starts = np.concatenate([t[big], [1.0]])
    vals, errs, _, done = integrate_batch(
        spec.func, starts, math.inf, 1.0, (), tol=tol, abs_tol=1e-300,
        at_singular=spec.at_singular, at_inf=spec.at_inf)
    if not done.all():
        raise NotSummable("tail integral of the kernel profile did not converge")
    bound = vals + errs
    out[big] = bound[:-1]
    if not big.all():
        # below 1 integrate in v = log u, where the integrand is smooth over many decades
        def func(v, dv):
            with np.errstate(all="ignore"):
                h = kernel.profile_values(np.exp(v), np.expm1(v))
                return np.where(h > 0, np.exp(exponent * v + np.log(np.where(h > 0, h, 1.0))), 0.0)

        lv, le, _, ok = integrate_batch(
            func, np.log(t[~big]), 0.0, 0.0, (), tol=tol, abs_tol=1e-300,
            at_singular=spec.at_singular)
        if not ok.all():
            raise NotSummable("tail integral of the kernel profile did not converge")
        out[~big] = bound[-1] + lv + le
    return out


def _inner_sums(kernel, ex, A, N):
    """``S_n = sum_{m<=N} m**ex k(m,n) A_m`` for ``n = 1..N``."""
    m = np.arange(1, N + 1, dtype=float)
    v = m ** ex * A
    if kernel.symmetric and getattr(kernel, "_raw", None) is None:
        return _inner_sums_symmetric(kernel, v, m)
    S = np.empty(N)
    for start in range(0, N, _BLOCK):
        n = m[start:start + _BLOCK, None]
        with np.errstate(all="ignore"):
            K = kernel.values(m[None, :], n, m[None, :] - n)
        if not np.all(np.isfinite(K)):
            raise NotSummable("the kernel is not finite on the integer lattice")
        S[start:start + _BLOCK] = K @ v
    return S


def _inner_sums_symmetric(kernel, v, m):
    """``K v`` for the symmetric lattice matrix ``K[n, m] = k(m, n)``, evaluating
    only the lower triangle ``m <= n`` as ``n**-lam h(m/n)``."""
    N = m.size
    S = np.zeros(N)
    for start in range(0, N, _BLOCK):
        stop = min(start + _BLOCK, N)
        n = m[start:stop, None]
        cols = m[None, :stop]
        lower = cols <= n
        with np.errstate(all="ignore"):
            L = n ** -kernel.lam * kernel.profile_values(np.minimum(cols / n, 1.0),
                                                         np.minimum((cols - n) / n, 0.0))
        L = np.where(lower, L, 0.0)
        if not np.all(np.isfinite(L)):
            raise NotSummable("the kernel is not finite on the integer lattice")
        rows = np.arange(stop - start)
        S[start:stop] += L @ v[:stop] - L[rows, rows + start] * v[start:stop]
        S[:stop] += L.T @ v[start:stop]
    return S


class _DiscreteTail:
    """Integral-comparison bounds for the parts of the sums beyond ``N``.

    With ``g(t) = t**ex k(t,1)`` and ``Phi(t) = int_t^inf g``, monotonicity of
    ``m -> m**ex k(m,n)`` gives ``sum_{m>N} m**ex k(m,n) A_m <= A_tot n**(ex+1-lam) Phi(N/n)``
    and ``sum_{m>=1} m**ex k(m,n) <= k(1,n) + n**(ex+1-lam) Phi(1/n)``.
    """

    def __init__(self, kernel, form, N, tol):
        self.kernel, self.form, self.N, self.tol = kernel, form, N, tol
        self.sigma = form.ex + form.ey + 1.0 - kernel.lam
        self.grid = np.geomspace(1.0, N, _PHI_GRID_POINTS)
        self.phi_grid = _tail_function(kernel, form.ex + 1.0, self.grid, tol)

    def inner(self, n):
        """Upper bound on ``sum_{m>N} m**ex k(m,n)`` for ``n <= N`` (per unit of ``A_tot``)."""
        t = self.N / n
        # Phi decreases, so the grid point just below N/n gives an upper bound
        idx = np.searchsorted(self.grid, t * (1 + 1e-12), side="right") - 1
        phi = self.phi_grid[np.clip(idx, 0, self.grid.size - 1)]
        return n ** (self.form.ex + 1.0 - self.kernel.lam) * phi

    def _log_envelope(self, t, delta):
        """``log U(1/t)`` with ``U(y) = y**delta [y**ey k(1,y) + y**sigma Phi(1/y)]``."""
        lam, ey, sigma = self.kernel.lam, self.form.ey, self.sigma
        lt = np.log(t)
        h = self.kernel.profile_values(t, t - 1.0)
        phi = _tail_function(self.kernel, self.form.ex + 1.0, t, self.tol)
        return -delta * lt + np.logaddexp((lam - ey) * lt + _log_pos(h), -sigma * lt + _log_pos(phi))

    def outer(self, delta, power):
        """Upper bound on ``sum_{n>N} U(n)**power`` (per unit of ``A_tot**power``)."""
        probe = 1.0 / np.geomspace(self.N, 1e6 * self.N, 64)
        u = self._log_envelope(probe, delta)
        if not (np.all(np.isfinite(u)) and np.all(np.diff(u) <= 1e-12)):
            raise NotSummable("the tail envelope is not nonincreasing beyond N")

        def func(t, dt):
            tf = t.reshape(-1)
            out = np.zeros(tf.shape)
            pos = tf > 0
            with np.errstate(all="ignore"):
                out[pos] = np.exp(power * self._log_envelope(tf[pos], delta) - 2.0 * np.log(tf[pos]))
            return out.reshape(t.shape)

        # int_N^inf U(y)^power dy with y = 1/t, and U(y) ~ y**(delta + b) for large y
        b = _marginal_exponent(self.kernel, self.form.ex, self.form.ey)
        decay = -power * (delta + b) - 2.0
        spec = IntegrandSpec(func, at_zero=EndpointBehaviour(decay, _zero_exponent(self.kernel, "left")[1]))
        res = integrate_interval(spec, 0.0, 1.0 / self.N, self.tol)
        return res.value + res.error_estimate


def _zero_exponent(kernel, side):
    """``(z, log)`` with ``k(u,1) ~ u**z`` (left) or ``k(1,u) ~ u**z`` (right) as ``u -> 0``."""
    sing = kernel.singularities if side == "left" else kernel.right_singularities()
    for sg in sing:
        if sg.location == "zero":
            return sg.exponent, sg.log
    return 0.0, False


def _marginal_exponent(kernel, e_sum, e_free, side="left"):
    """Growth exponent ``b`` of ``y**e_free sum_m m**e_sum k(m, y)``, which behaves like ``y**b``
    (``side="right"``: the same with the kernel arguments swapped).

    The sum is dominated by ``m ~ y`` when ``m**e_sum k(m,1)`` is integrable at 0,
    and by small ``m`` otherwise.
    """
    z, _ = _zero_exponent(kernel, side)
    return e_free - kernel.lam + max(e_sum + 1.0, -z)


def _discrete_divergent(kernel, form, delta, power):
    """True when forward partial sums (bounded below by a positive constant
    eventually) force the left side to be infinite."""
    n_side = _marginal_exponent(kernel, form.ex, form.ey)
    if power == 1.0 and delta == 0.0:
        m_side = _marginal_exponent(kernel, form.ey, form.ex, side="right")
        return max(n_side, m_side) >= -1.0
    return power * (delta + n_side) >= -1.0


def _discrete_setup(kernel, cfg, a, N, tol):
    form = _form_for(kernel, cfg, tol, discrete=True)
    monotone = check_monotonicity(kernel, cfg)
    tail_ok = True
    for side, e in (("left", form.ex + 1.0), ("right", form.ey + 1.0)):
        ok, how = _monotone_profile(kernel, e, side)
        if not ok:
            msg = f"the integral tail bound needs {_profile_label(side, e)} nonincreasing ({how} check)"
            if cfg.regime == "forward":
                raise NotSummable(msg)
            # a '>' verdict only needs the truncated sum, which is a lower bound
            tail_ok = False
    if cfg.regime == "reverse" and not a.strictly_positive:
        raise InvalidParameter("reverse-regime inputs must be strictly positive")
    Nn = max(int(N), len(a.head))
    return form, monotone, Nn, tail_ok


def _norm_interval(a, p, w, N):
    """``(value, lower, upper)`` of ``(sum (n**w a_n)**p)**(1/p)``; zero when the sum is infinite and p < 0."""
    val, tail = sum_p_with_tail(a, p, w, N, allow_infinite=p < 0)
    if math.isinf(val):
        return 0.0, 0.0, 0.0, val
    lo, hi = val, val + tail
    if p > 0:
        return (val + 0.5 * tail) ** (1 / p), lo ** (1 / p), hi ** (1 / p), val
    return (val + 0.5 * tail) ** (1 / p), hi ** (1 / p), lo ** (1 / p), val


def verify_bilinear_discrete(kernel: KernelSpec, cfg: ExponentConfig, a: TestSequence,
                             b: TestSequence, N=DEFAULT_TRUNCATION, tol=DEFAULT_TOL_1D):
    """Double series ``sum_n sum_m w(m,n) k(m,n) A_m B_n`` with forward partial sums.

    The sum over ``m, n <= N`` is exact up to rounding; everything beyond is
    bounded by integral comparison, so the left side is carried as
    ``[truncated, truncated + tail]``.
    """
    form, monotone, Nn, tail_ok = _discrete_setup(kernel, cfg, a, N, tol)
    direction = "<" if cfg.regime == "forward" else ">"
    check_id = f"bilinear-discrete/{form.param}"
    if a.is_zero or b.is_zero:
        return _degenerate(check_id, direction, form.bil_const, form.bil_prov)
    if cfg.regime == "reverse" and not b.strictly_positive:
        raise InvalidParameter("reverse-regime inputs must be strictly positive")
    p, q = cfg.p, cfg.q
    fa = _norm_interval(a, p, form.norm_w, Nn)
    fb = _norm_interval(b, q, form.norm_w, Nn)
    c = form.bil_const
    crel = form.bil_const_rel + 2 * _EXACT_REL
    rhs = (c * fa[0] * fb[0], c * fa[1] * fb[1] * (1 - crel), c * fa[2] * fb[2] * (1 + crel))
    extra = dict(form.extra, truncation=Nn, monotonicity=monotone, norm_a=fa[3], norm_b=fb[3])
    if fb[0] == 0.0:
        extra["note"] = "the b-norm factor vanishes because sum b_n^q diverges for q < 0"
    if _discrete_divergent(kernel, form, 0.0, 1.0):
        lhs = (math.inf, math.inf, math.inf)
        lhs_prov = "divergent: with A_m, B_n bounded below the double series behaves like sum n^sigma, sigma >= -1"
    else:
        A, B = partial_sums(a, Nn), partial_sums(b, Nn)
        n = np.arange(1, Nn + 1, dtype=float)
        S = _inner_sums(kernel, form.ex, A, Nn)
        wB = n ** form.ey * B
        partial = math.fsum(wB * S)
        A_tot, B_tot = a.total(), b.total()
        if tail_ok and math.isfinite(A_tot) and math.isfinite(B_tot):
            tails = _DiscreteTail(kernel, form, Nn, tol)
            tail = A_tot * math.fsum(wB * tails.inner(n)) + A_tot * B_tot * tails.outer(0.0, 1.0)
        else:
            tail = math.inf
        lhs = (partial + 0.5 * tail if math.isfinite(tail) else partial,
               partial * (1 - 1e-12), (partial + tail) * (1 + 1e-12))
        lhs_prov = f"truncated double sum N={Nn} + tail bound {tail:.3g}"
    return _make_report(check_id, direction, *lhs, *rhs, c, form.bil_prov,
                        {"lhs": lhs_prov, "rhs": "truncated norms with tail bounds x constant"}, extra)


def verify_equivalent_form_discrete(kernel: KernelSpec, cfg: ExponentConfig, a: TestSequence,
                                    N=DEFAULT_TRUNCATION, tol=DEFAULT_TOL_1D):
    """``sum_n [n**(ey+delta) sum_m m**ex k(m,n) A_m]**p`` against the power-form constant."""
    form, monotone, Nn, tail_ok = _discrete_setup(kernel, cfg, a, N, tol)
    direction = "<" if cfg.regime == "forward" else ">"
    check_id = f"power-discrete/{form.param}"
    if a.is_zero:
        return _degenerate(check_id, direction, form.pow_const, form.pow_prov)
    p = cfg.p
    norm, norm_tail = sum_p_with_tail(a, p, form.norm_w, Nn)
    c = form.pow_const
    crel = form.pow_const_rel + _EXACT_REL
    rhs = (c * (norm + 0.5 * norm_tail), c * norm * (1 - crel), c * (norm + norm_tail) * (1 + crel))
    extra = dict(form.extra, truncation=Nn, monotonicity=monotone, norm_a=norm)
    delta = form.delta
    if _discrete_divergent(kernel, form, delta, p):
        lhs = (math.inf, math.inf, math.inf)
        lhs_prov = "divergent: with A_m bounded below the bracket behaves like n^(delta+sigma)"
    else:
        A = partial_sums(a, Nn)
        n = np.arange(1, Nn + 1, dtype=float)
        S = _inner_sums(kernel, form.ex, A, Nn)
        scale = n ** (form.ey + delta)
        lower_terms = (scale * S) ** p
        partial = math.fsum(lower_terms)
        A_tot = a.total()
        if tail_ok and math.isfinite(A_tot):
            tails = _DiscreteTail(kernel, form, Nn, tol)
            bumped = (scale * (S + A_tot * tails.inner(n))) ** p
            tail = math.fsum(bumped - lower_terms) + A_tot ** p * tails.outer(delta, p)
        else:
            tail = math.inf
        lhs = (partial + 0.5 * tail if math.isfinite(tail) else partial,
               partial * (1 - 1e-12), (partial + tail) * (1 + 1e-12))
        lhs_prov = f"truncated sums N={Nn} + tail bound {tail:.3g}"
    return _make_report(check_id, direction, *lhs, *rhs, c, form.pow_prov,
                        {"lhs": lhs_prov, "rhs": "truncated norm with tail bound x constant"}, extra)
