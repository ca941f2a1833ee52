"""Double-exponential quadrature on (0, inf) with endpoint singularities.

The half line is split at 0, at declared breakpoints, at the (single) declared
interior singular point and at u = 1.  Each finite piece is integrated with the
tanh-sinh rule; the unbounded piece ``[T, inf)`` is mapped to ``(0, 1]`` by
``u = T / v``.  Abscissae are generated as offsets from the nearest endpoint,
so integrands are handed ``dx = x - c`` (with ``c`` the interior singular
point) computed without cancellation.

Everything is vectorised over a batch of independent integrals that share
the same breakpoints; the 2-D driver uses this for the inner integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DivergentDeclared, InvalidParameter, NonConvergence

DEFAULT_TOL_1D = 1e-10
DEFAULT_TOL_2D = 1e-7
DEFAULT_MAX_EVALS = 1_000_000

_T_MAX = 6  # sigma(6) ~ 1e-275, the smallest offset from an endpoint
_MIN_LEVEL = 3
_MAX_LEVEL = 14  # the evaluation budget, not the level, is the usual stop


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool

    def as_dict(self):
        return {"value": self.value, "error_estimate": self.error_estimate,
                "evaluations": self.evaluations, "converged": self.converged}


@dataclass(frozen=True)
class EndpointBehaviour:
    """The integrand behaves like ``t**exponent * |log t|**int(log)`` near a point."""

    exponent: float
    log: bool = False


@dataclass(frozen=True)
class IntegrandSpec:
    """An integrand on (0, inf) together with its declared singular structure.

    ``func(x, dx)`` is vectorised; ``dx`` equals ``x - singular_point`` (or
    ``x`` when there is no interior singular point) and is accurate close to
    the singular point.  ``at_zero`` / ``at_singular`` describe the algebraic
    behaviour near 0 and near the interior point, ``at_inf`` the decay
    ``u**exponent`` for large ``u``.
    """

    func: Callable
    singular_point: Optional[float] = None
    breakpoints: Sequence[float] = ()
    at_zero: Optional[EndpointBehaviour] = None
    at_singular: Optional[EndpointBehaviour] = None
    at_inf: Optional[EndpointBehaviour] = None

    @classmethod
    def simple(cls, func, **kwargs):
        """Wrap a plain ``f(x)``."""
        return cls(lambda x, dx: func(x), **kwargs)

    def validate(self):
        for name, beh in (("at_zero", self.at_zero), ("at_singular", self.at_singular)):
            if beh is not None and beh.exponent <= -1:
                raise DivergentDeclared(f"{name} exponent {beh.exponent} <= -1 is not integrable")
        if self.at_inf is not None and self.at_inf.exponent >= -1:
            raise DivergentDeclared(f"decay exponent {self.at_inf.exponent} >= -1 at infinity diverges")


@lru_cache(maxsize=None)
def _level_nodes(level):
    """Offsets (as fraction of the piece length), weights and side flags of one level."""
    if level == 0:
        t = np.arange(-_T_MAX, _T_MAX + 1, dtype=float)
        scale = np.ones_like(t)
        scale[0] = scale[-1] = 0.5
        h = 1.0
    else:
        h = 2.0 ** -level
        half = _T_MAX * 2 ** (level - 1)
        k = np.arange(-half, half)
        t = (2 * k + 1) * h
        scale = np.ones_like(t)
    z = 0.5 * math.pi * np.sinh(np.abs(t))
    e = np.exp(-2.0 * z)
    sigma = e / (1.0 + e)
    dxdt = math.pi * np.cosh(t) * sigma * (1.0 - sigma)
    left = t <= 0
    return sigma, h * scale * dxdt, left


def _extreme_nodes():
    sigma, _, _ = _level_nodes(0)
    return sigma[0], sigma[1]


def _correction(g1, d1, g2, d2, beh):
    """Integral of the neglected sliver ``(0, d1)`` and its uncertainty."""
    a1 = beh.exponent + 1.0
    with np.errstate(all="ignore"):
        factor = 1.0 / a1
        if beh.log:
            factor = factor + 1.0 / (a1 * a1 * np.abs(np.log(d1)))
        corr = g1 * d1 * factor
        ratio = np.where((g1 > 0) & (g2 > 0), g1 / np.where(g2 > 0, g2, 1.0), np.nan)
        local = np.log(ratio) / np.log(d1 / d2) + 1.0
        alt = np.where(local > 0, g1 * d1 / np.where(local > 0, local, 1.0), 2.0 * np.abs(corr))
        err = np.abs(alt - corr)
    corr = np.where(np.isfinite(corr), corr, 0.0)
    err = np.where(np.isfinite(err), err, np.abs(corr))
    return corr, err


class _Batch:
    """Tanh-sinh state for a batch of integrals over ``[lo_i, hi]``."""

    def __init__(self, func, lo, hi, c, breakpoints, behaviour, ncomp, params=None):
        self._func = func
        self.params = None if params is None else np.asarray(params, dtype=float)
        self.ncomp = ncomp
        lo = np.asarray(lo, dtype=float)
        B = lo.shape[0]
        c = np.zeros(B) if c is None else np.broadcast_to(np.asarray(c, dtype=float), (B,)).copy()
        self.c = c
        infinite = math.isinf(hi)
        upper = np.full(B, hi if not infinite else 0.0)
        cand = [np.asarray(bp, dtype=float) * np.ones(B) for bp in breakpoints]
        cand.append(c)
        cand.append(np.ones(B))
        pts = np.stack([lo] + cand, axis=1)
        if infinite:
            pts = np.maximum(pts, lo[:, None])
            last = pts.max(axis=1)
            stop = np.where(last > 0, 2.0 * last, 1.0)
            pts = np.concatenate([pts, stop[:, None]], axis=1)
            self.tail = stop
        else:
            pts = np.clip(pts, lo[:, None], upper[:, None])
            pts = np.concatenate([pts, upper[:, None]], axis=1)
            self.tail = None
        pts.sort(axis=1)
        self.a = pts[:, :-1]
        self.b = pts[:, 1:]
        self.behaviour = behaviour  # (at_zero, at_singular, at_inf)

    def func(self, x, dx, idx=None):
        if self.params is None:
            return self._func(x, dx)
        p = self.params if idx is None else self.params[idx]
        return self._func(x, dx, p.reshape(p.shape[:1] + (1,) * (x.ndim - 1)))

    def _eval(self, idx, sigma, wts, left):
        a = self.a[idx][..., None]
        b = self.b[idx][..., None]
        c = self.c[idx][:, None, None]
        L = b - a
        d = L * sigma
        x = np.where(left, a + d, b - d)
        dx = np.where(left, (a - c) + d, (b - c) - d)
        w = L * wts
        with np.errstate(all="ignore"):
            vals = self._shape(self.func(x, dx, idx), x.shape)
        # a node can round onto the singular point itself; it carries no mass
        on_sing = np.broadcast_to(dx == 0, x.shape)
        if self.ncomp > 1:
            on_sing = on_sing[..., None]
        vals = np.where(on_sing & ~np.isfinite(vals), 0.0, vals)
        sums = self._reduce(vals, w)
        if self.tail is not None:
            T = self.tail[idx][:, None, None]
            v = np.where(left, sigma, 1.0 - sigma)
            with np.errstate(over="ignore"):
                xt = T / v
                wt = wts * T / v / v
            # abscissae beyond the float range carry no representable mass
            wt = np.where(np.isfinite(xt) & np.isfinite(wt), wt, 0.0)
            xt = np.where(np.isfinite(xt), xt, np.finfo(float).max)
            with np.errstate(all="ignore"):
                vt = self._shape(self.func(xt, xt - c, idx), xt.shape)
            sums = sums + self._reduce(vt, np.broadcast_to(wt, xt.shape))
        return sums

    def _shape(self, vals, shape):
        extra = (self.ncomp,) if self.ncomp > 1 else ()
        return np.broadcast_to(np.asarray(vals, dtype=float), shape + extra)

    def _reduce(self, vals, w):
        vals = np.asarray(vals, dtype=float)
        w = np.broadcast_to(w, vals.shape[:3])
        if self.ncomp > 1:
            w = w[..., None]
        with np.errstate(all="ignore"):
            prod = vals * w
        # a subnormal weight marks a node next to an endpoint where the value may
        # overflow; with integrable endpoint behaviour its mass is negligible
        tiny_w = np.broadcast_to(w < np.finfo(float).tiny, prod.shape)
        prod = np.where(tiny_w & ~np.isfinite(prod), 0.0, prod)
        zero_w = np.broadcast_to(w == 0, prod.shape)
        prod = np.where(zero_w, 0.0, prod)
        if not np.all(np.isfinite(prod)):
            raise NonConvergence("integrand produced non-finite values inside the domain")
        return prod.sum(axis=(1, 2))

    def corrections(self):
        """Analytic contribution of the slivers beyond the extreme abscissae."""
        at_zero, at_sing, at_inf = self.behaviour
        B = self.a.shape[0]
        corr = np.zeros(B)
        err = np.zeros(B)
        s1, s2 = _extreme_nodes()
        if self.ncomp > 1 or (at_zero is None and at_sing is None and at_inf is None):
            return corr, err
        for side in ("left", "right"):
            end = self.a if side == "left" else self.b
            L = self.b - self.a
            d1, d2 = L * s1, L * s2
            x1 = self.a + d1 if side == "left" else self.b - d1
            x2 = self.a + d2 if side == "left" else self.b - d2
            dx1 = (end - self.c[:, None]) + (d1 if side == "left" else -d1)
            dx2 = (end - self.c[:, None]) + (d2 if side == "left" else -d2)
            with np.errstate(all="ignore"):
                g1 = np.abs(np.asarray(self.func(x1[..., None], dx1[..., None]), dtype=float)[..., 0])
                g2 = np.abs(np.asarray(self.func(x2[..., None], dx2[..., None]), dtype=float)[..., 0])
                sgn = np.sign(np.asarray(self.func(x1[..., None], dx1[..., None]), dtype=float)[..., 0])
            for beh, mask in ((at_zero, (end == 0) & (L > 0)),
                              (at_sing, (end == self.c[:, None]) & (end != 0) & (L > 0))):
                if beh is None or not mask.any():
                    continue
                cr, er = _correction(g1, d1, g2, d2, beh)
                corr += np.where(mask, sgn * cr, 0.0).sum(axis=1)
                err += np.where(mask, er, 0.0).sum(axis=1)
        if at_inf is not None and self.tail is not None:
            T = self.tail
            v1, v2 = s1, s2
            with np.errstate(all="ignore"):
                f1 = np.asarray(self.func((T / v1)[:, None, None], (T / v1 - self.c)[:, None, None]), dtype=float)
                f2 = np.asarray(self.func((T / v2)[:, None, None], (T / v2 - self.c)[:, None, None]), dtype=float)
            f1 = f1.reshape(B, -1)[:, 0] * T / v1 / v1
            f2 = f2.reshape(B, -1)[:, 0] * T / v2 / v2
            beh = EndpointBehaviour(-at_inf.exponent - 2.0, at_inf.log)
            cr, er = _correction(np.abs(f1), v1, np.abs(f2), v2, beh)
            corr += np.sign(f1) * cr
            err += er
        return corr, err


def integrate_batch(func, lo, hi=math.inf, singular_point=None, breakpoints=(), *,
                    tol=DEFAULT_TOL_1D, abs_tol=0.0, at_zero=None, at_singular=None,
                    at_inf=None, ncomp=1, params=None, max_evals=DEFAULT_MAX_EVALS,
                    min_level=_MIN_LEVEL, max_level=_MAX_LEVEL):
    """Integrate ``func`` over ``[lo_i, hi]`` for every entry of ``lo``.

    ``func(x, dx)`` receives arrays of shape ``(batch, pieces, nodes)``; with
    ``ncomp > 1`` it returns an extra trailing axis of that length and every
    component is integrated (convergence is judged on component 0).  When
    ``params`` (one row per batch entry) is given, ``func(x, dx, p)`` also
    receives the matching rows, broadcastable against ``x``.

    Returns ``(values, errors, evaluations, converged)`` with per-batch arrays.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    B = lo.shape[0]
    batch = _Batch(func, lo, hi, singular_point, breakpoints, (at_zero, at_singular, at_inf), ncomp, params)
    npieces = batch.a.shape[1] + (1 if batch.tail is not None else 0)

    shape = (B, ncomp) if ncomp > 1 else (B,)
    trap = np.zeros(shape)
    rich = np.zeros(shape)
    use_rich = np.zeros(B, dtype=bool)
    err = np.full(B, np.inf)
    done = np.zeros(B, dtype=bool)
    corr, corr_err = batch.corrections()
    evals = 0

    def first(v):
        return v if ncomp == 1 else v[:, 0]

    for level in range(0, max_level + 1):
        active = np.nonzero(~done)[0]
        if active.size == 0:
            break
        sigma, wts, left = _level_nodes(level)
        evals += active.size * npieces * sigma.size
        new = batch._eval(active, sigma, wts, left)
        if level == 0:
            trap[active] = new
            rich[active] = new
        else:
            # Truncating the t-range at +-_T_MAX leaves an O(h^2) Euler-Maclaurin
            # term when the integrand is still sizeable there (endpoint exponents
            # near -1).  One Richardson step removes it; it is used only where its
            # own increment beats the plain trapezoid increment.
            prev_rich = rich[active].copy()
            half = trap[active]
            trap[active] = 0.5 * half + new
            rich[active] = trap[active] + (trap[active] - half) / 3.0
            d_trap = np.abs(first(trap[active]) - first(half))
            d_rich = np.abs(first(rich[active]) - first(prev_rich)) if level >= 2 else np.full(active.size, np.inf)
            use_rich[active] = d_rich < d_trap
            diff = np.minimum(d_trap, d_rich)
            cur0 = np.where(use_rich[active], first(rich[active]), first(trap[active]))
            err[active] = diff
            if level >= min_level:
                total = np.abs(cur0 + corr[active])
                ok = diff <= np.maximum(tol * total, abs_tol)
                done[active[ok]] = True
        if evals > max_evals:
            break
    pick = use_rich if ncomp == 1 else use_rich[:, None]
    values = np.where(pick, rich, trap)
    if ncomp == 1:
        values = values + corr
    else:
        values[:, 0] += corr
    errors = err + corr_err
    head = values if ncomp == 1 else values[:, 0]
    converged = done & (errors <= np.maximum(tol * np.abs(head), abs_tol))
    return values, errors, evals, converged


def _to_result(values, errors, evals, done, strict, what):
    res = QuadratureResult(float(values[0]), float(errors[0]), int(evals), bool(done[0]))
    if strict and not res.converged:
        raise NonConvergence(f"{what}: error estimate {res.error_estimate:.3g} above tolerance "
                             f"after {res.evaluations} evaluations (value {res.value:.12g})", res)
    return res


def integrate_interval(integrand: IntegrandSpec, a=0.0, b=math.inf, tol=DEFAULT_TOL_1D, *,
                       abs_tol=0.0, max_evals=DEFAULT_MAX_EVALS, strict=True):
    """Integrate a declared integrand over ``[a, b]`` with ``0 <= a < b <= inf``."""
    if not (0 <= a < b):
        raise InvalidParameter(f"need 0 <= a < b, got a={a}, b={b}")
    integrand.validate()
    c = integrand.singular_point
    bps = [p for p in integrand.breakpoints if a < p < b]
    values, errors, evals, done = integrate_batch(
        lambda x, dx: integrand.func(x, dx), np.array([a]), b, c, bps,
        tol=tol, abs_tol=abs_tol, at_zero=integrand.at_zero,
        at_singular=integrand.at_singular,
        at_inf=integrand.at_inf if math.isinf(b) else None, max_evals=max_evals)
    return _to_result(values, errors, evals, done, strict, "integrate_interval")


def integrate_halfline(integrand: IntegrandSpec, tol=DEFAULT_TOL_1D, *, abs_tol=0.0,
                       max_evals=DEFAULT_MAX_EVALS, strict=True):
    """Integrate over (0, inf); raises :class:`DivergentDeclared` before evaluating
    anything when the declared exponents are not integrable."""
    return integrate_interval(integrand, 0.0, math.inf, tol, abs_tol=abs_tol,
                              max_evals=max_evals, strict=strict)


@dataclass(frozen=True)
class QuadrantIntegrand:
    """``func(x, y, dxy)`` on the open quadrant; ``dxy = x - y`` is accurate near the diagonal.

    ``outer`` optionally transforms the inner integral: the driver computes
    ``int outer(y, int func(x, y) dx) dy``; ``outer_error(y, v, err)`` maps an
    inner error ``err`` at value ``v`` to an error in ``outer(y, v)``.
    """

    func: Callable
    x_breakpoints: Sequence[float] = ()
    y_breakpoints: Sequence[float] = ()
    outer: Optional[Callable] = None
    outer_error: Optional[Callable] = None
    y_range: tuple = (0.0, math.inf)
    x_range: tuple = (0.0, math.inf)


def integrate_quadrant(integrand: QuadrantIntegrand, tol=DEFAULT_TOL_2D, *,
                       max_evals=50 * DEFAULT_MAX_EVALS, strict=True):
    """Iterated double integral ``int dy int dx`` with the diagonal as interior split point.

    The error estimate is the outer estimate plus the outer integral of the
    (derivative-weighted) inner error estimates.
    """
    inner_tol = tol / 10.0
    xa, xb = integrand.x_range
    ya, yb = integrand.y_range
    x_bps = [p for p in integrand.x_breakpoints if xa < p < xb]
    counter = {"evals": 0, "inner_ok": True}

    def outer_func(y, dy):
        shape = y.shape
        yf = y.reshape(-1)
        vals, errs, ev, done = integrate_batch(
            lambda x, dx, yy: integrand.func(x, yy, dx), np.full(yf.size, xa), xb, yf, x_bps,
            params=yf,
            tol=inner_tol, abs_tol=1e-300, max_evals=max(DEFAULT_MAX_EVALS, 4000 * yf.size))
        counter["evals"] += ev
        if not done.all():
            counter["inner_ok"] = False
        if integrand.outer is not None:
            g = integrand.outer(yf, vals)
            gd = np.abs(integrand.outer_error(yf, vals, errs))
        else:
            g = vals
            gd = errs
        return np.stack([g.reshape(shape), gd.reshape(shape)], axis=-1)

    ybps = sorted({p for p in list(integrand.y_breakpoints) + x_bps if ya < p < yb})
    values, errors, evals, done = integrate_batch(
        outer_func, np.array([ya]), yb, None, ybps, tol=tol, abs_tol=1e-300, ncomp=2,
        max_evals=max_evals)
    value = float(values[0, 0])
    error = float(errors[0] + abs(values[0, 1]))
    # inner failures are already accounted for through their weighted error estimates
    converged = bool(done[0]) and error <= 2 * tol * abs(value) + 1e-300
    res = QuadratureResult(value, error, int(evals + counter["evals"]), converged)
    if strict and not res.converged:
        raise NonConvergence(f"integrate_quadrant: error estimate {error:.3g} for value {value:.12g}", res)
    return res
