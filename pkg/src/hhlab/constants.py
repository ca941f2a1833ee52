"""Kernel constants, weight functions and the closed forms for the built-ins."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameter, NonConvergence
from .kernels import KernelId, KernelSpec
from .quadrature import (DEFAULT_TOL_1D, EndpointBehaviour, IntegrandSpec, QuadratureResult,
                         integrate_halfline)


def beta_function(a, b):
    """Euler Beta function ``B(a, b)`` for positive arguments."""
    if not (a > 0 and b > 0):
        raise InvalidParameter(f"Beta function needs positive arguments, got ({a}, {b})")
    if a + b < 150:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    # large arguments: log-gamma differences avoid overflow
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def euler_alternating_sum(term, tol=1e-14, start=10, max_order=60):
    """``sum_{n>=0} (-1)**n term(n)`` for a smooth, decreasing positive ``term``.

    The first ``start`` terms are added directly; the tail goes through the
    Euler transform, stopping once the transformed term drops below ``tol``.
    """
    head = math.fsum((-1) ** n * term(n) for n in range(start))
    b = np.array([term(start + j) for j in range(max_order + 1)], dtype=float)
    tail = 0.0
    diffs = b
    for k in range(max_order + 1):
        contribution = (-1) ** k * diffs[0] / 2.0 ** (k + 1)
        tail += contribution
        if abs(contribution) < tol:
            return head + (-1) ** start * tail
        diffs = np.diff(diffs)
    raise NonConvergence(f"Euler transform did not reach tol={tol} in {max_order} orders")


@dataclass(frozen=True)
class ExponentConfig:
    """Exponents of one inequality instance.

    Three parametrisations are supported:

    * ``rs``: ``r`` is set and ``s = lam - r``;
    * ``alpha-beta``: ``alpha`` and ``beta`` are set;
    * ``weighted``: ``r = 1/p`` and ``s = 1/q`` regardless of ``lam`` (the
      forms with ``(x f(x))**p`` norms).

    ``q`` is always derived from ``p``.
    """

    p: float
    lam: float
    r: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    weighted: bool = False

    def __post_init__(self):
        p, lam = self.p, self.lam
        if not (p > 0 and p != 1 and math.isfinite(p)):
            raise InvalidParameter(f"p must be positive and different from 1, got {p}")
        if not (lam > 0 and math.isfinite(lam)):
            raise InvalidParameter(f"lam must be positive, got {lam}")
        if self.weighted:
            if self.r is None or abs(self.r - 1.0 / p) > 1e-15 / p:
                raise InvalidParameter("weighted parametrisation fixes r = 1/p")
            return
        if self.r is not None:
            if self.alpha is not None or self.beta is not None:
                raise InvalidParameter("give either r or (alpha, beta), not both")
            if not (0 < self.r < lam):
                raise InvalidParameter(f"need 0 < r < lam so that r, s > 0; got r={self.r}, lam={lam}")
        else:
            if self.alpha is None or self.beta is None:
                raise InvalidParameter("alpha-beta parametrisation needs both alpha and beta")
            if not (self.alpha > -1 and self.beta > -1):
                raise InvalidParameter(f"need alpha, beta > -1, got ({self.alpha}, {self.beta})")

    @classmethod
    def rs(cls, p, r, lam):
        return cls(float(p), float(lam), r=float(r))

    @classmethod
    def weighted_form(cls, p, lam=1.0):
        """Config of the weighted forms: ``r = 1/p`` and ``s = 1/q``."""
        return cls(float(p), float(lam), r=1.0 / float(p), weighted=True)

    @classmethod
    def alpha_beta(cls, p, lam, alpha=None, beta=None):
        """Default reading ``alpha = beta = lam - p - 1``; explicit values are only checked for convergence."""
        if alpha is None and beta is None:
            if not p > 1:
                raise InvalidParameter(f"alpha-beta parametrisation needs p > 1, got {p}")
            alpha = beta = lam - p - 1.0
        elif alpha is None or beta is None:
            raise InvalidParameter("give both alpha and beta or neither")
        return cls(float(p), float(lam), alpha=float(alpha), beta=float(beta))

    @property
    def q(self):
        return self.p / (self.p - 1.0)

    @property
    def s(self):
        if self.r is None:
            return None
        return 1.0 - 1.0 / self.p if self.weighted else self.lam - self.r

    @property
    def regime(self):
        return "forward" if self.p > 1 else "reverse"

    @property
    def parametrization(self):
        if self.weighted:
            return "weighted"
        return "rs" if self.r is not None else "alpha-beta"

    def as_dict(self):
        out = {"parametrization": self.parametrization, "p": self.p, "q": self.q,
               "lam": self.lam, "regime": self.regime}
        if self.r is not None:
            out.update(r=self.r, s=self.s)
        else:
            out.update(alpha=self.alpha, beta=self.beta)
        return out


def profile_integrand(kernel: KernelSpec, exponent, side="left"):
    """``u -> k(u, 1) u**(exponent - 1)`` (left) or ``k(1, u) u**(exponent - 1)`` (right)."""
    e = float(exponent)
    if side == "left":
        values, sing = kernel.profile_values, kernel.singularities
    elif side == "right":
        values, sing = kernel.right_profile_values, kernel.right_singularities()
    else:
        raise InvalidParameter(f"side must be 'left' or 'right', got {side!r}")
    by_loc = {s.location: s for s in sing}

    def func(u, w):
        h = values(u, w)
        # log space: u**(e-1) may overflow where h underflows
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            return np.where(h > 0, np.exp((e - 1.0) * np.log(u) + np.log(np.where(h > 0, h, 1.0))), 0.0)

    zero = by_loc.get("zero")
    one = by_loc.get("one")
    inf = by_loc.get("inf")
    return IntegrandSpec(
        func,
        singular_point=1.0,
        at_zero=EndpointBehaviour(zero.exponent + e - 1.0, zero.log) if zero else None,
        at_singular=EndpointBehaviour(one.exponent, one.log) if one else None,
        at_inf=EndpointBehaviour(inf.exponent + e - 1.0, inf.log) if inf else None,
    )


def profile_moment(kernel, exponent, side="left", tol=DEFAULT_TOL_1D):
    """``int_0^inf k(u, 1) u**(exponent - 1) du`` (or the right-profile analogue)."""
    return integrate_halfline(profile_integrand(kernel, exponent, side), tol)


# -- closed forms -------------------------------------------------------------

def _corrected_series(lam, r, s, tol=1e-15):
    return euler_alternating_sum(lambda n: 1.0 / (lam * n + r) ** 2 + 1.0 / (lam * n + s) ** 2, tol)


def printed_series(lam, r, tol=1e-15):
    """The alternating series exactly as printed: ``sum_{n>=1} (-1)**n 2/(lam n + r)**2``."""
    return -euler_alternating_sum(lambda n: 2.0 / (lam * (n + 1) + r) ** 2, tol)


CLOSED_FORM_IDS = {
    KernelId.SUM_POWER: "B(r,s)",
    KernelId.MAX_POWER: "1/r+1/s",
    KernelId.ABS_DIFF: "B(r,1-lam)+B(s,1-lam)",
    KernelId.LOG_RATIO: "[pi/(lam*sin(pi*r/lam))]^2",
    KernelId.DIFF_MAX: "B(r,1-beta)+B(s,1-beta)",
    KernelId.MIN_DIFF: "B(beta-r,1-beta)+B(beta-s,1-beta)",
    KernelId.POW_DIFF_MAX: "|beta|(r(r+beta)+s(s+beta))/(rs(r+beta)(s+beta))",
    KernelId.ABSLOG_MAX: "1/r^2+1/s^2",
    KernelId.ABSLOG_SUMPOW: "sum_{n>=0}(-1)^n[1/(lam*n+r)^2+1/(lam*n+s)^2]",
}

PRINTED_FORM_IDS = {
    KernelId.LOG_RATIO: "[pi/(lam*sin(r/lam))]^2",
    KernelId.ABSLOG_SUMPOW: "sum_{n>=1}(-1)^n*2/(lam*n+r)^2",
}


def closed_form_constant(kernel_id, r, s, lam, beta=None):
    """Closed-form kernel constant of a built-in kernel (corrected forms where the printed one fails)."""
    kid = KernelId(kernel_id)
    if not (r > 0 and s > 0):
        raise InvalidParameter(f"need r, s > 0, got ({r}, {s})")
    if kid is KernelId.SUM_POWER:
        return beta_function(r, s)
    if kid is KernelId.MAX_POWER:
        return 1.0 / r + 1.0 / s
    if kid is KernelId.ABS_DIFF:
        if not lam < 1:
            raise InvalidParameter(f"abs-diff constant needs lam < 1, got {lam}")
        return beta_function(r, 1 - lam) + beta_function(s, 1 - lam)
    if kid is KernelId.LOG_RATIO:
        return (math.pi / (lam * math.sin(math.pi * r / lam))) ** 2
    if kid in (KernelId.DIFF_MAX, KernelId.MIN_DIFF, KernelId.POW_DIFF_MAX) and beta is None:
        raise InvalidParameter(f"{kid.value} needs beta")
    if kid is KernelId.DIFF_MAX:
        if not 0 < beta < 1:
            raise InvalidParameter(f"diff-max needs 0 < beta < 1, got {beta}")
        return beta_function(r, 1 - beta) + beta_function(s, 1 - beta)
    if kid is KernelId.MIN_DIFF:
        if not (0 < beta < 1 and beta > r and beta > s):
            raise InvalidParameter(f"min-diff needs 0 < beta < 1 and beta > max(r, s), got beta={beta}")
        return beta_function(beta - r, 1 - beta) + beta_function(beta - s, 1 - beta)
    if kid is KernelId.POW_DIFF_MAX:
        if not (beta != 0 and beta > -min(r, s)):
            raise InvalidParameter(f"pow-diff-max needs beta != 0 and beta > -min(r, s), got {beta}")
        return abs(beta) * (r * (r + beta) + s * (s + beta)) / (r * s * (r + beta) * (s + beta))
    if kid is KernelId.ABSLOG_MAX:
        return 1.0 / r ** 2 + 1.0 / s ** 2
    if kid is KernelId.ABSLOG_SUMPOW:
        return _corrected_series(lam, r, s)
    raise InvalidParameter(f"no closed form for {kid.value}")


def printed_constant(kernel_id, r, lam):
    """Value of the constant exactly as printed, for the two kernels where it is wrong."""
    kid = KernelId(kernel_id)
    if kid is KernelId.LOG_RATIO:
        return (math.pi / (lam * math.sin(r / lam))) ** 2
    if kid is KernelId.ABSLOG_SUMPOW:
        return printed_series(lam, r)
    return None


@dataclass(frozen=True)
class ConstantReport:
    numeric: QuadratureResult
    closed_form: Optional[float] = None
    closed_form_id: Optional[str] = None
    agreement: Optional[float] = None
    printed: Optional[float] = None
    printed_form_id: Optional[str] = None
    printed_agreement: Optional[float] = None
    printed_discrepancy: bool = False

    @property
    def value(self):
        return self.numeric.value

    def as_dict(self):
        return {"numeric": self.numeric.as_dict(), "closed_form": self.closed_form,
                "closed_form_id": self.closed_form_id, "agreement": self.agreement,
                "printed": self.printed, "printed_form_id": self.printed_form_id,
                "printed_agreement": self.printed_agreement,
                "printed_discrepancy": self.printed_discrepancy}


def _rel(a, b):
    if b is None or a is None or not math.isfinite(b):
        return None
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def kernel_constant(kernel: KernelSpec, r, tol=DEFAULT_TOL_1D):
    """``int_0^inf k(u, 1) u**(r - 1) du`` with the closed form attached for built-ins."""
    s = kernel.lam - r
    if not (r > 0 and s > 0):
        raise InvalidParameter(f"need r > 0 and s = lam - r > 0, got r={r}, lam={kernel.lam}")
    numeric = profile_moment(kernel, r, "left", tol)
    if kernel.id is KernelId.CUSTOM:
        return ConstantReport(numeric)
    closed = closed_form_constant(kernel.id, r, s, kernel.lam, kernel.beta)
    printed = printed_constant(kernel.id, r, kernel.lam)
    printed_agreement = _rel(printed, numeric.value) if printed is not None else None
    return ConstantReport(
        numeric, closed, CLOSED_FORM_IDS[kernel.id], _rel(numeric.value, closed),
        printed, PRINTED_FORM_IDS.get(kernel.id), printed_agreement,
        printed is not None and (printed_agreement is None or printed_agreement > 1e-6))


@dataclass(frozen=True)
class SeriesConstantReport:
    """The alternating-series constant of the |log|/(1 + u**lam) kernel, three ways."""

    printed: float
    corrected: float
    quadrature: QuadratureResult
    discrepancy: bool

    def as_dict(self):
        return {"printed": self.printed, "corrected": self.corrected,
                "quadrature": self.quadrature.as_dict(), "discrepancy": self.discrepancy}


def alternating_series_constant(lam, r, tol=1e-12):
    """Accelerated printed series, corrected series and the quadrature value (primary truth)."""
    if not (lam > 0 and 0 < r < lam):
        raise InvalidParameter(f"need lam > 0 and 0 < r < lam, got lam={lam}, r={r}")
    from .kernels import make_kernel
    quad = profile_moment(make_kernel(KernelId.ABSLOG_SUMPOW, lam), r, "left", min(tol, 1e-10))
    printed = printed_series(lam, r, tol * 1e-3)
    corrected = _corrected_series(lam, r, lam - r, tol * 1e-3)
    bar = max(quad.error_estimate, tol * abs(quad.value))
    return SeriesConstantReport(printed, corrected, quad, abs(printed - quad.value) > bar)


def _log_space_product(scaled, log_const, power, t):
    """``k * exp(log_const) * t**power`` from ``scaled = (v, log_scale)`` without
    the overflow or underflow of the separate factors."""
    v, log_scale = scaled
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        logs = log_scale + log_const + power * np.log(t) + np.log(np.where(v > 0, v, 1.0))
        return np.where(v > 0, np.exp(logs), 0.0)


def weight_function(kernel: KernelSpec, cfg: ExponentConfig, which, point, tol=DEFAULT_TOL_1D):
    """``omega(s, x) = int k(x, y) x**r y**(s-1) dy`` (which="s") or
    ``omega(r, y) = int k(x, y) x**(r-1) y**s dx`` (which="r") at the given point."""
    if cfg.parametrization != "rs":
        raise InvalidParameter("weight functions need the RS parametrisation")
    if not point > 0:
        raise InvalidParameter(f"point must be positive, got {point}")
    r, s, lam = cfg.r, cfg.s, kernel.lam
    if abs(cfg.lam - lam) > 1e-14 * lam:
        raise InvalidParameter(f"config lam={cfg.lam} differs from kernel lam={lam}")
    x0 = float(point)
    one = kernel.singularity("one")
    if which == "s":
        right = {s_.location: s_ for s_ in kernel.right_singularities()}
        zero, inf = right.get("zero"), right.get("inf")

        def func(y, dy):
            return _log_space_product(kernel.scaled_values(x0, y, -dy), r * math.log(x0),
                                      (s - 1.0), y)
        e = s
    elif which == "r":
        zero, inf = kernel.singularity("zero"), kernel.singularity("inf")

        def func(x, dx):
            return _log_space_product(kernel.scaled_values(x, x0, dx), s * math.log(x0),
                                      (r - 1.0), x)
        e = r
    else:
        raise InvalidParameter(f"which must be 's' or 'r', got {which!r}")
    spec = IntegrandSpec(
        func, singular_point=x0,
        at_zero=EndpointBehaviour(zero.exponent + e - 1.0, zero.log) if zero else None,
        at_singular=EndpointBehaviour(one.exponent, one.log) if one else None,
        at_inf=EndpointBehaviour(inf.exponent + e - 1.0, inf.log) if inf else None)
    return integrate_halfline(spec, tol)


def alpha_beta_constants(kernel: KernelSpec, alpha, beta, tol=DEFAULT_TOL_1D):
    """``(int k(1, u) u**alpha du, int k(u, 1) u**beta du)``."""
    ka = profile_moment(kernel, alpha + 1.0, "right", tol)
    kb = profile_moment(kernel, beta + 1.0, "left", tol)
    return ka, kb
