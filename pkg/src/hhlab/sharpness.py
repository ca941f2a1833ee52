"""Best-possibility probes for the constant pq*k(r) of the bilinear inequality.

The extremal functions live on [1, inf), so every integral below is over
[1, inf)^2.  Substituting y = u x and exchanging the order of integration
turns each of them into one-dimensional profile integrals:

    int_1^inf int_1^inf k(x,y) x^(a-1) y^(b-1) dx dy
        = (1/c) [ int_1^inf k(1,u) u^(b-1) du + int_0^1 k(1,u) u^(b+c-1) du ],

with c = lam - a - b > 0.  Nothing near-divergent is handed to a 2-D rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import ExponentConfig, kernel_constant, profile_integrand
from .errors import InvalidEpsilon, InvalidParameter
from .functions import TestFunction
from .kernels import KernelSpec
from .quadrature import DEFAULT_TOL_1D, IntegrandSpec, QuadratureResult, integrate_interval

EPSILON_FLOOR = 1e-5


def _epsilon_ceiling(p):
    q = p / (p - 1.0)
    return min(1.0 / (p - 1.0), 1.0 / (q - 1.0))


def _check_epsilon(eps, p):
    if not p > 1:
        raise InvalidParameter(f"the extremal family needs p > 1, got p={p}")
    hi = _epsilon_ceiling(p)
    if not (EPSILON_FLOOR <= eps < hi):
        raise InvalidEpsilon(f"eps must lie in [{EPSILON_FLOOR:g}, {hi:.6g}), got {eps!r}")


@dataclass(frozen=True)
class ExtremalPair:
    eps: float
    p: float
    f: TestFunction
    g: TestFunction

    @property
    def q(self):
        return self.p / (self.p - 1.0)

    @property
    def phi(self):
        """Product of the prefactors of the two cumulatives."""
        p, q, e = self.p, self.q, self.eps
        return p * q / ((1.0 - e * (q - 1.0)) * (1.0 - e * (p - 1.0)))

    def F(self, x):
        p, q, e = self.p, self.q, self.eps
        x = np.asarray(x, dtype=float)
        a = 1.0 / q - e / p
        return np.where(x > 1, q / (1.0 - e * (q - 1.0)) * np.expm1(a * np.log(np.maximum(x, 1.0))), 0.0)

    def G(self, y):
        p, q, e = self.p, self.q, self.eps
        y = np.asarray(y, dtype=float)
        b = 1.0 / p - e / q
        return np.where(y > 1, p / (1.0 - e * (p - 1.0)) * np.expm1(b * np.log(np.maximum(y, 1.0))), 0.0)

    @property
    def norm_product(self):
        # int f^p = int g^q = int_1^inf x^(-1-eps) dx = 1/eps
        return 1.0 / self.eps

    def as_dict(self):
        return {"eps": self.eps, "p": self.p, "q": self.q, "phi": self.phi,
                "norm_product": self.norm_product, "f": self.f.as_dict(), "g": self.g.as_dict()}


def extremal_pair(eps, p) -> ExtremalPair:
    """``f = x^(-1/p - eps/p)`` and ``g = y^(-1/q - eps/q)`` on [1, inf)."""
    _check_epsilon(eps, p)
    q = p / (p - 1.0)
    return ExtremalPair(float(eps), float(p),
                        TestFunction.power(-1.0 / p - eps / p, lo=1.0),
                        TestFunction.power(-1.0 / q - eps / q, lo=1.0))


@dataclass(frozen=True)
class AsymptoticQuantities:
    eps: float
    I1: QuadratureResult
    I2: QuadratureResult
    I3: QuadratureResult
    O1: QuadratureResult
    O2: QuadratureResult
    O3: QuadratureResult

    def as_dict(self):
        out = {"eps": self.eps}
        for name in ("I1", "I2", "I3", "O1", "O2", "O3"):
            out[name] = getattr(self, name).as_dict()
        return out


def _moment(kernel, exponent, side, a, b, tol, weight=None):
    """``int_a^b k(u,1) u^(exponent-1) w(u) du`` (left) or with ``k(1,u)`` (right)."""
    spec = profile_integrand(kernel, exponent, side)
    func = spec.func
    if weight is not None:
        def func(u, w, _f=spec.func):
            return _f(u, w) * weight(u)
    spec = IntegrandSpec(func, singular_point=1.0,
                         at_zero=spec.at_zero if a == 0 else None,
                         at_singular=spec.at_singular,
                         at_inf=spec.at_inf if math.isinf(b) else None)
    return integrate_interval(spec, a, b, tol)


def _combine(parts, scale):
    value = scale * math.fsum(r.value for r in parts)
    error = abs(scale) * math.fsum(r.error_estimate for r in parts)
    return QuadratureResult(value, error, sum(r.evaluations for r in parts),
                            all(r.converged for r in parts))


def corner_integral(kernel, a, b, side="right", tol=DEFAULT_TOL_1D):
    """``int_1^inf int_1^inf k(x,y) x^(a-1) y^(b-1) dx dy`` via the y = u x reduction.

    ``side="left"`` reduces over x instead (x = u y), using ``k(u,1)``.
    """
    c = kernel.lam - a - b
    if not c > 0:
        raise InvalidParameter(f"the corner integral diverges: lam - a - b = {c:.6g} <= 0")
    e = b if side == "right" else a
    far = _moment(kernel, e, side, 1.0, math.inf, tol)
    near = _moment(kernel, e + c, side, 0.0, 1.0, tol)
    return _combine([far, near], 1.0 / c)


def corner_remainder(kernel, a, b, side="right", tol=DEFAULT_TOL_1D):
    """``int_1^inf x^(-1-c) [int_0^(1/x) k(1,u) u^(b-1) du] dx = (1/c) int_0^1 k(1,u) u^(b-1) (1 - u^c) du``."""
    c = kernel.lam - a - b
    if not c > 0:
        raise InvalidParameter(f"the remainder diverges: lam - a - b = {c:.6g} <= 0")
    e = b if side == "right" else a

    def one_minus(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, -np.expm1(c * np.log(np.where(u > 0, u, 1.0))) / c, 1.0 / c)

    res = _moment(kernel, e, side, 0.0, 1.0, tol, one_minus)
    return res


def _exponents(cfg, eps):
    p, q, r, s = cfg.p, cfg.q, cfg.r, cfg.s
    return {
        "I1": (r - eps / p, s - eps / q, "right"),
        "I2": (r - 1.0 / q, s - eps / q, "right"),
        "I3": (r - eps / p, s - 1.0 / p, "left"),
        "I0": (r - 1.0 / q, s - 1.0 / p, "right"),
    }


def _check_cfg(kernel, cfg):
    if cfg.parametrization != "rs" or cfg.regime != "forward":
        raise InvalidParameter("sharpness probes need a forward rs configuration")
    if abs(cfg.lam - kernel.lam) > 1e-14 * cfg.lam:
        raise InvalidParameter(f"config lam={cfg.lam} differs from kernel lam={kernel.lam}")


def asymptotic_quantities(kernel: KernelSpec, cfg: ExponentConfig, eps, tol=DEFAULT_TOL_1D):
    """The integrals I1, I2, I3 on [1, inf)^2 and their remainders O1, O2, O3.

    As eps -> 0, eps*I1 -> k(r) while I2 and I3 stay bounded; only the first
    limit matters for sharpness.  I3 and O3 are reduced over x, so they use the
    left profile k(u,1).
    """
    _check_cfg(kernel, cfg)
    _check_epsilon(eps, cfg.p)
    ex = _exponents(cfg, eps)
    out = {}
    for i in ("1", "2", "3"):
        a, b, side = ex["I" + i]
        out["I" + i] = corner_integral(kernel, a, b, side, tol)
        out["O" + i] = corner_remainder(kernel, a, b, side, tol)
    return AsymptoticQuantities(float(eps), **out)


lemma26_quantities = asymptotic_quantities  # name used by the operation catalogue


@dataclass(frozen=True)
class SweepPoint:
    eps: float
    ratio: float
    ratio_error: float
    lhs: float
    lower_chain: float
    eps_I1: float

    def as_dict(self):
        return dict(self.__dict__)


def sharpness_sweep(kernel: KernelSpec, cfg: ExponentConfig,
                    eps_list: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3), tol=DEFAULT_TOL_1D):
    """Ratio of the bilinear left side on the extremal pair to its norm product.

    On [1, inf)^2, F G = phi [x^a y^b - x^a - y^b + 1] exactly, so the left side is
    ``phi (I1 - I2 - I3 + I0)``; the bracket without I0 is the lower-bound chain.
    """
    _check_cfg(kernel, cfg)
    eps_list = [float(e) for e in eps_list]
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise InvalidParameter("eps_list must be strictly decreasing")
    a0, b0, side0 = _exponents(cfg, eps_list[0])["I0"]
    I0 = corner_integral(kernel, a0, b0, side0, tol)
    points = []
    for eps in eps_list:
        pair = extremal_pair(eps, cfg.p)
        Q = asymptotic_quantities(kernel, cfg, eps, tol)
        chain = pair.phi * (Q.I1.value - Q.I2.value - Q.I3.value)
        lhs = chain + pair.phi * I0.value
        err = pair.phi * (Q.I1.error_estimate + Q.I2.error_estimate + Q.I3.error_estimate
                          + I0.error_estimate)
        nprod = pair.norm_product
        points.append(SweepPoint(eps, lhs / nprod, err / nprod, lhs, chain, eps * Q.I1.value))
    return points


def best_constant(kernel: KernelSpec, cfg: ExponentConfig, tol=DEFAULT_TOL_1D):
    """``pq k(r)``, the limit the sweep approaches."""
    _check_cfg(kernel, cfg)
    return cfg.p * cfg.q * kernel_constant(kernel, cfg.r, tol).value
