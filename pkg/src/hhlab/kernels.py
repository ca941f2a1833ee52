"""Homogeneous kernels of degree -lambda on the open quadrant.

Every built-in kernel is stored through its reduced profile ``h(u) = k(u, 1)``
and reconstructed as ``k(x, y) = y**-lam * h(x / y)``, so homogeneity holds by
construction.  Profiles are vectorised and receive both ``u`` and ``w = u - 1``;
the second argument lets kernels that are singular (or have a removable
singularity) at ``u = 1`` be evaluated without cancellation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import InvalidParameter, SingularPoint

# relative window around x = y where the log-ratio kernel switches to its series
_LOG_RATIO_WINDOW = 1e-6


class KernelId(str, enum.Enum):
    SUM_POWER = "sum-power"
    MAX_POWER = "max-power"
    ABS_DIFF = "abs-diff"
    LOG_RATIO = "log-ratio"
    DIFF_MAX = "diff-max"
    MIN_DIFF = "min-diff"
    POW_DIFF_MAX = "pow-diff-max"
    ABSLOG_MAX = "abslog-max"
    ABSLOG_SUMPOW = "abslog-sumpow"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Singularity:
    """Asymptotic behaviour of the reduced profile ``h(u) = k(u, 1)``.

    ``location`` is ``"zero"``, ``"one"`` or ``"inf"``.  Near the location the
    profile behaves like ``t**exponent * |log t|**int(log)`` where ``t`` is
    ``u``, ``|u - 1|`` or ``u`` respectively.
    """

    location: str
    exponent: float
    log: bool = False


def _log_u(u, w):
    small = np.abs(w) < 0.5
    return np.where(small, np.log1p(np.where(small, w, 0.0)), np.log(np.where(small, 1.0, u)))


def _pow_minus_one(u, w, a):
    """Accurate ``u**a - 1``."""
    return np.expm1(a * _log_u(u, w))


def _sum_power(u, w, lam, beta):
    return (1.0 + u) ** -lam


def _max_power(u, w, lam, beta):
    return np.maximum(u, 1.0) ** -lam


def _abs_diff(u, w, lam, beta):
    return np.abs(w) ** -lam


def _log_ratio(u, w, lam, beta):
    t = _log_u(u, w)
    near = np.abs(w) < _LOG_RATIO_WINDOW
    safe_t = np.where(near, 1.0, t)
    direct = safe_t / np.expm1(lam * safe_t)
    x = lam * t
    series = (1.0 - x / 2.0 + x * x / 12.0) / lam
    return np.where(near, series, direct)


def _diff_max(u, w, lam, beta):
    return np.abs(w) ** -beta * np.maximum(u, 1.0) ** (beta - lam)


def _min_diff(u, w, lam, beta):
    return np.minimum(u, 1.0) ** (beta - lam) * np.abs(w) ** -beta


def _pow_diff_max(u, w, lam, beta):
    return np.abs(_pow_minus_one(u, w, beta)) * np.maximum(u, 1.0) ** -(lam + beta)


def _abslog_max(u, w, lam, beta):
    return np.abs(_log_u(u, w)) * np.maximum(u, 1.0) ** -lam


def _abslog_sumpow(u, w, lam, beta):
    return np.abs(_log_u(u, w)) / (1.0 + u ** lam)


_PROFILES = {
    KernelId.SUM_POWER: _sum_power,
    KernelId.MAX_POWER: _max_power,
    KernelId.ABS_DIFF: _abs_diff,
    KernelId.LOG_RATIO: _log_ratio,
    KernelId.DIFF_MAX: _diff_max,
    KernelId.MIN_DIFF: _min_diff,
    KernelId.POW_DIFF_MAX: _pow_diff_max,
    KernelId.ABSLOG_MAX: _abslog_max,
    KernelId.ABSLOG_SUMPOW: _abslog_sumpow,
}

BUILTIN_IDS = tuple(_PROFILES)


def _builtin_singularities(kid, lam, beta):
    if kid is KernelId.SUM_POWER or kid is KernelId.MAX_POWER:
        return (Singularity("zero", 0.0), Singularity("inf", -lam))
    if kid is KernelId.ABS_DIFF:
        return (Singularity("zero", 0.0), Singularity("one", -lam), Singularity("inf", -lam))
    if kid is KernelId.LOG_RATIO:
        return (Singularity("zero", 0.0, log=True), Singularity("inf", -lam, log=True))
    if kid is KernelId.DIFF_MAX:
        return (Singularity("zero", 0.0), Singularity("one", -beta), Singularity("inf", -lam))
    if kid is KernelId.MIN_DIFF:
        return (Singularity("zero", beta - lam), Singularity("one", -beta), Singularity("inf", -beta))
    if kid is KernelId.POW_DIFF_MAX:
        if beta > 0:
            return (Singularity("zero", 0.0), Singularity("inf", -lam))
        return (Singularity("zero", beta), Singularity("inf", -(lam + beta)))
    # abslog-max, abslog-sumpow
    return (Singularity("zero", 0.0, log=True), Singularity("inf", -lam, log=True))


@dataclass(frozen=True)
class KernelSpec:
    """A nonnegative kernel homogeneous of degree ``-lam``.

    Use :func:`make_kernel` for the built-ins, :meth:`custom` for a user
    profile and :meth:`from_function` for an arbitrary two-variable function
    (only meaningful for the homogeneity-defect detector).
    """

    id: KernelId
    lam: float
    beta: Optional[float] = None
    singularities: Tuple[Singularity, ...] = ()
    symmetric: bool = True
    _profile: Optional[Callable] = field(default=None, compare=False, repr=False)
    _raw: Optional[Callable] = field(default=None, compare=False, repr=False)

    @classmethod
    def custom(cls, profile, lam, singularities=(), symmetric=False):
        """Kernel ``k(x, y) = y**-lam * profile(x / y)``; ``profile`` is vectorised in ``u``."""
        if not lam > 0:
            raise InvalidParameter(f"lam must be positive, got {lam}")
        return cls(KernelId.CUSTOM, float(lam), None, tuple(singularities), symmetric,
                   _profile=lambda u, w, lam_, beta_: profile(u))

    @classmethod
    def from_function(cls, func, lam):
        """Wrap an arbitrary ``func(x, y)``; homogeneity is *not* enforced."""
        return cls(KernelId.CUSTOM, float(lam), None, (), False,
                   _profile=lambda u, w, lam_, beta_: func(u, np.ones_like(u)), _raw=func)

    # -- metadata -----------------------------------------------------------
    def singularity(self, location):
        for s in self.singularities:
            if s.location == location:
                return s
        return None

    @property
    def singular_on_diagonal(self):
        return self.singularity("one") is not None

    def right_singularities(self):
        """Singularity metadata of ``u -> k(1, u) = u**-lam * h(1/u)``."""
        out = []
        for s in self.singularities:
            if s.location == "zero":
                out.append(Singularity("inf", -self.lam - s.exponent, s.log))
            elif s.location == "inf":
                out.append(Singularity("zero", -self.lam - s.exponent, s.log))
            else:
                out.append(s)
        return tuple(out)

    # -- evaluation -----------------------------------------------------------
    def profile_values(self, u, w=None):
        """Vectorised ``k(u, 1)``; ``w`` is ``u - 1`` computed accurately when available."""
        u = np.asarray(u, dtype=float)
        if w is None:
            w = u - 1.0
        fn = self._profile if self._profile is not None else _PROFILES[self.id]
        return fn(u, np.asarray(w, dtype=float), self.lam, self.beta)

    def right_profile_values(self, u, w=None):
        """Vectorised ``k(1, u) = u**-lam * k(1/u, 1)``."""
        u = np.asarray(u, dtype=float)
        if w is None:
            w = u - 1.0
        if self.symmetric:
            return self.profile_values(u, w)
        with np.errstate(over="ignore", invalid="ignore"):
            out = u ** -self.lam * self.profile_values(1.0 / u, -np.asarray(w, dtype=float) / u)
        return np.where(np.isfinite(out), out, 0.0)

    def values(self, x, y, dxy=None):
        """Vectorised ``k(x, y)``; ``dxy`` is ``x - y`` computed accurately when available."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self._raw is not None:
            return np.asarray(self._raw(x, y), dtype=float)
        if dxy is None:
            dxy = x - y
        x, y, dxy = np.broadcast_arrays(x, y, np.asarray(dxy, dtype=float))
        # scale by the larger argument so that neither power overflows
        below = x <= y
        big = np.where(below, y, x)
        small = np.where(below, x, y)
        d = np.where(below, dxy, -dxy)
        ratio = small / big
        left = self.profile_values(ratio, d / big)
        right = self.right_profile_values(ratio, d / big)
        return big ** -self.lam * np.where(below, left, right)

    def scaled_values(self, x, y, dxy=None):
        """``(v, log_scale)`` with ``k(x, y) = v * exp(log_scale)``.

        ``v`` is the profile value at the ratio of the smaller to the larger
        argument, so neither part overflows even at extreme ``x, y``.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self._raw is not None:
            return np.asarray(self._raw(x, y), dtype=float), np.zeros(np.broadcast(x, y).shape)
        if dxy is None:
            dxy = x - y
        x, y, dxy = np.broadcast_arrays(x, y, np.asarray(dxy, dtype=float))
        below = x <= y
        big = np.where(below, y, x)
        small = np.where(below, x, y)
        d = np.where(below, dxy, -dxy) / big
        # an underflowed ratio would hit the log singularity of some profiles at exactly 0
        ratio = np.maximum(small / big, np.finfo(float).tiny)
        v = np.where(below, self.profile_values(ratio, d), self.right_profile_values(ratio, d))
        return v, -self.lam * np.log(big)

    def _check_point(self, x, y):
        if not (x > 0 and y > 0):
            raise InvalidParameter(f"kernel arguments must be positive, got ({x}, {y})")
        if x == y and self.singular_on_diagonal:
            raise SingularPoint(f"{self.id.value} kernel is singular on x = y")

    def evaluate(self, x, y):
        """Return ``k(x, y)`` for positive scalars off the singular loci."""
        self._check_point(x, y)
        return float(self.values(x, y))

    def reduced_profile(self, u, side="left"):
        """``k(u, 1)`` for ``side="left"`` or ``k(1, u)`` for ``side="right"``."""
        if side == "left":
            return self.evaluate(u, 1.0)
        if side == "right":
            return self.evaluate(1.0, u)
        raise InvalidParameter(f"side must be 'left' or 'right', got {side!r}")

    def homogeneity_defect(self, x, y, u):
        """``|k(ux, uy) - u**-lam k(x, y)|``; zero up to rounding for homogeneous kernels."""
        self._check_point(x, y)
        self._check_point(u * x, u * y)
        return abs(float(self.values(u * x, u * y)) - u ** -self.lam * float(self.values(x, y)))


def make_kernel(kernel_id, lam, beta=None):
    """Build and validate one of the built-in kernels."""
    try:
        kid = KernelId(kernel_id)
    except ValueError:
        raise InvalidParameter(f"unknown kernel id {kernel_id!r}") from None
    if kid is KernelId.CUSTOM:
        raise InvalidParameter("custom kernels are built with KernelSpec.custom")
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidParameter(f"lam must be positive, got {lam}")
    needs_beta = kid in (KernelId.DIFF_MAX, KernelId.MIN_DIFF, KernelId.POW_DIFF_MAX)
    if needs_beta:
        if beta is None:
            raise InvalidParameter(f"{kid.value} kernel requires beta")
        beta = float(beta)
        if kid in (KernelId.DIFF_MAX, KernelId.MIN_DIFF) and not 0 < beta < 1:
            raise InvalidParameter(f"{kid.value} kernel requires 0 < beta < 1, got {beta}")
        if kid is KernelId.POW_DIFF_MAX and beta == 0:
            raise InvalidParameter("pow-diff-max kernel vanishes identically for beta = 0")
    else:
        beta = None
    return KernelSpec(kid, lam, beta, _builtin_singularities(kid, lam, beta), True)
