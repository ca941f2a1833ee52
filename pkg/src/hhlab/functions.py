"""Test functions and sequences with closed-form cumulatives and norms.

A :class:`TestFunction` is a finite sum of pieces ``c * x**a * exp(-b x)``,
each living on its own interval ``[lo, hi)``.  Integrals of such pieces are
incomplete Gamma functions (or plain powers when ``b = 0``), so cumulatives and
p-norms never need quadrature.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import special

from .errors import InvalidParameter, NotIntegrable, NotSummable

DEFAULT_TRUNCATION = 10_000


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    c: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise InvalidParameter(f"piece needs 0 <= lo < hi, got [{self.lo}, {self.hi})")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise InvalidParameter(f"piece coefficient must be positive, got {self.c}")
        if self.b < 0:
            raise InvalidParameter(f"piece decay rate must be nonnegative, got {self.b}")
        if self.b > 0 and self.a <= -1:
            raise InvalidParameter("pieces with exponential decay need a > -1")

    def as_dict(self):
        return {"lo": self.lo, "hi": None if math.isinf(self.hi) else self.hi,
                "c": self.c, "a": self.a, "b": self.b}


def _piece_integral(c, a, b, x1, x2):
    """``int_{x1}^{x2} c t**a exp(-b t) dt`` for arrays ``x1 <= x2`` (``x2`` may be inf).

    Returns ``inf`` where the integral diverges.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x1, x2 = np.broadcast_arrays(x1, x2)
    out = np.zeros(x1.shape)
    live = x2 > x1
    if not live.any():
        return out
    if b == 0:
        with np.errstate(divide="ignore", over="ignore"):
            if a == -1:
                val = np.log(x2 / x1)
            elif a > -1:
                val = (x2 ** (a + 1) - x1 ** (a + 1)) / (a + 1)
            else:
                val = (x1 ** (a + 1) - x2 ** (a + 1)) / (-(a + 1))
        val = np.where(np.isnan(val), np.inf, val)
        out[live] = c * val[live]
        return out
    # gamma-type piece: pick the lower or upper regularised function to avoid cancellation
    s = a + 1.0
    scale = c * math.exp(math.lgamma(s) - s * math.log(b))
    z1, z2 = b * x1[live], b * x2[live]
    upper = z1 > s
    val = np.empty(z1.shape)
    val[upper] = special.gammaincc(s, z1[upper]) - special.gammaincc(s, z2[upper])
    lo = ~upper
    val[lo] = special.gammainc(s, z2[lo]) - special.gammainc(s, z1[lo])
    out[live] = scale * np.maximum(val, 0.0)  # the differences are nonnegative up to rounding
    return out


class TestFunction:
    """Nonnegative piecewise function ``sum_i c_i x**a_i exp(-b_i x) 1_[lo_i, hi_i)``."""

    __test__ = False  # not a pytest class

    def __init__(self, pieces: Sequence[Piece] = ()):
        pieces = tuple(sorted(pieces, key=lambda pc: pc.lo))
        for left, right in zip(pieces, pieces[1:]):
            if right.lo < left.hi:
                raise InvalidParameter("test-function pieces must not overlap")
        self.pieces: Tuple[Piece, ...] = pieces

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def indicator(cls, lo=0.0, hi=1.0, c=1.0):
        return cls((Piece(lo, hi, c),))

    @classmethod
    def exponential(cls, b=1.0, c=1.0, a=0.0):
        return cls((Piece(0.0, math.inf, c, a, b),))

    @classmethod
    def power(cls, a, lo=1.0, hi=math.inf, c=1.0):
        return cls((Piece(lo, hi, c, a, 0.0),))

    @classmethod
    def from_dict(cls, data):
        try:
            pieces = [Piece(float(d["lo"]), math.inf if d.get("hi") is None else float(d["hi"]),
                            float(d["c"]), float(d.get("a", 0.0)), float(d.get("b", 0.0)))
                      for d in data["pieces"]]
        except (KeyError, TypeError) as exc:
            raise InvalidParameter(f"malformed test function: {exc}") from None
        return cls(pieces)

    def as_dict(self):
        return {"pieces": [pc.as_dict() for pc in self.pieces]}

    def scaled(self, factor):
        """``factor * f``."""
        if factor == 0:
            return TestFunction.zero()
        return TestFunction([Piece(pc.lo, pc.hi, pc.c * factor, pc.a, pc.b) for pc in self.pieces])

    def dilated(self, t):
        """``x -> f(t x)``."""
        return TestFunction([Piece(pc.lo / t, pc.hi / t, pc.c * t ** pc.a, pc.a, pc.b * t)
                             for pc in self.pieces])

    # -- metadata -----------------------------------------------------------
    @property
    def is_zero(self):
        return not self.pieces

    @property
    def breakpoints(self):
        pts = {pc.lo for pc in self.pieces} | {pc.hi for pc in self.pieces}
        return tuple(sorted(p for p in pts if 0 < p < math.inf))

    @property
    def strictly_positive(self):
        """True when the support is all of ``(0, inf)`` with no gaps."""
        if self.is_zero or self.pieces[0].lo != 0 or not math.isinf(self.pieces[-1].hi):
            return False
        return all(left.hi == right.lo for left, right in zip(self.pieces, self.pieces[1:]))

    @property
    def decays(self):
        """Integrable at infinity."""
        if self.is_zero:
            return True
        last = self.pieces[-1]
        return not math.isinf(last.hi) or last.b > 0 or last.a < -1

    def __repr__(self):
        return f"TestFunction({list(self.pieces)!r})"

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            for pc in self.pieces:
                inside = (x >= pc.lo) & (x < pc.hi) & (x > 0)
                logv = math.log(pc.c) + pc.a * np.log(np.where(inside, x, 1.0)) - pc.b * x
                out = np.where(inside, np.exp(logv), out)
        return out

    def power_integral(self, p, w=0.0, allow_infinite=False):
        """``int_0^inf (x**w f(x))**p dx`` in closed form."""
        if self.is_zero:
            return 0.0 if p > 0 else math.inf
        if p <= 0 and not self.strictly_positive:
            if allow_infinite:
                return math.inf
            raise NotIntegrable(f"f vanishes on a set of positive measure, so int f**{p} diverges")
        if p < 0:
            last = self.pieces[-1]
            ap = (last.a + w) * p
            if last.b > 0 or ap >= -1:
                # f**p grows (or fails to decay) at infinity
                if allow_infinite:
                    return math.inf
                raise NotIntegrable(f"int (x**{w} f)**{p} dx diverges at infinity")
            if any(pc.b > 0 for pc in self.pieces):
                raise NotIntegrable("negative powers of exponential pieces on bounded intervals are unsupported")
        total = 0.0
        for pc in self.pieces:
            val = float(_piece_integral(pc.c ** p, (pc.a + w) * p, pc.b * p, pc.lo, pc.hi))
            total += val
        if not math.isfinite(total) or total < 0:
            if allow_infinite:
                return math.inf
            raise NotIntegrable(f"int (x**{w} f)**{p} dx diverges")
        return total


def weighted_p_norm(f: TestFunction, p, w=0.0, allow_infinite=False):
    """``int_0^inf (x**w f(x))**p dx`` (not raised to ``1/p``)."""
    if p > 0:
        for pc in f.pieces:
            ap = (pc.a + w) * p
            if pc.lo == 0 and ap <= -1:
                if allow_infinite:
                    return math.inf
                raise NotIntegrable(f"(x**{w} f)**{p} is not integrable at 0")
            if math.isinf(pc.hi) and pc.b == 0 and ap >= -1:
                if allow_infinite:
                    return math.inf
                raise NotIntegrable(f"(x**{w} f)**{p} is not integrable at infinity")
    elif p == 0:
        raise InvalidParameter("p must be nonzero")
    return f.power_integral(p, w, allow_infinite)


@dataclass(frozen=True)
class CumulativeFunction:
    """``F(x) = int_0^x f`` (forward) or ``F(x) = int_x^inf f`` (tail)."""

    f: TestFunction
    direction: str

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        forward = self.direction == "forward"
        for pc, total in zip(self.f.pieces, self._totals):
            # whole pieces contribute their total; only points inside a piece need work
            out = out + np.where(x >= pc.hi if forward else x <= pc.lo, total, 0.0)
            inside = (x > pc.lo) & (x < pc.hi)
            if inside.any():
                xi = x[inside]
                if forward:
                    out[inside] += _piece_integral(pc.c, pc.a, pc.b, pc.lo, xi)
                else:
                    out[inside] += _piece_integral(pc.c, pc.a, pc.b, xi, pc.hi)
        return out

    @functools.cached_property
    def _totals(self):
        return [float(_piece_integral(pc.c, pc.a, pc.b, pc.lo, pc.hi)) for pc in self.f.pieces]

    @property
    def limit(self):
        """``F(inf)`` for forward, ``F(0)`` for tail: the total integral of ``f``."""
        return float(self(np.array(math.inf if self.direction == "forward" else 0.0)))


def cumulative(f: TestFunction, direction="forward"):
    if direction not in ("forward", "tail"):
        raise InvalidParameter(f"direction must be 'forward' or 'tail', got {direction!r}")
    if direction == "tail" and not f.decays:
        raise NotIntegrable("tail cumulative needs f integrable at infinity")
    for pc in f.pieces:
        if pc.lo == 0 and pc.a <= -1:
            raise NotIntegrable("f is not integrable at 0")
    return CumulativeFunction(f, direction)


# -- sequences ----------------------------------------------------------------

class TestSequence:
    """``a_n`` (n >= 1): explicit head values followed by the rule ``c n**-t``."""

    __test__ = False

    def __init__(self, head=(), tail_coef=0.0, tail_exp=2.0):
        head = tuple(float(v) for v in head)
        if any(v < 0 or not math.isfinite(v) for v in head):
            raise InvalidParameter("sequence terms must be finite and nonnegative")
        if tail_coef < 0:
            raise InvalidParameter("tail coefficient must be nonnegative")
        if tail_coef > 0 and not tail_exp > 0:
            raise InvalidParameter("tail rule c n**-t needs t > 0")
        self.head = head
        self.tail_coef = float(tail_coef)
        self.tail_exp = float(tail_exp)

    @classmethod
    def unit(cls):
        return cls((1.0,))

    @classmethod
    def power(cls, t, c=1.0):
        return cls((), c, t)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data.get("head", ()), float(data.get("tail_coef", 0.0)),
                       float(data.get("tail_exp", 2.0)))
        except (TypeError, AttributeError) as exc:
            raise InvalidParameter(f"malformed sequence: {exc}") from None

    def as_dict(self):
        return {"head": list(self.head), "tail_coef": self.tail_coef, "tail_exp": self.tail_exp}

    def __repr__(self):
        return f"TestSequence(head={self.head!r}, tail_coef={self.tail_coef}, tail_exp={self.tail_exp})"

    def scaled(self, factor):
        return TestSequence([v * factor for v in self.head], self.tail_coef * factor, self.tail_exp)

    @property
    def is_zero(self):
        return self.tail_coef == 0 and not any(self.head)

    @property
    def strictly_positive(self):
        return self.tail_coef > 0 and all(v > 0 for v in self.head)

    def terms(self, N):
        n = np.arange(1, N + 1, dtype=float)
        out = self.tail_coef * n ** -self.tail_exp if self.tail_coef > 0 else np.zeros(N)
        k = min(len(self.head), N)
        out[:k] = self.head[:k]
        return out

    def total(self):
        """``sum a_n`` (infinite when the tail is not summable)."""
        K = len(self.head)
        head = math.fsum(self.head)
        if self.tail_coef == 0:
            return head
        if self.tail_exp <= 1:
            return math.inf
        return head + self.tail_coef * float(special.zeta(self.tail_exp, K + 1))


def partial_sums(a: TestSequence, N):
    """``(A_1, ..., A_N)``."""
    if N < 1:
        raise InvalidParameter(f"N must be at least 1, got {N}")
    return np.cumsum(a.terms(int(N)))


def sum_p_with_tail(a: TestSequence, p, w=0.0, N=DEFAULT_TRUNCATION, allow_infinite=False):
    """``sum_n (n**w a_n)**p`` truncated at ``max(N, len(head))`` and an integral-comparison tail bound.

    Returns ``(value, tail_bound)``; the true sum lies in ``[value, value + tail_bound]``.
    """
    if p == 0:
        raise InvalidParameter("p must be nonzero")
    N = max(int(N), len(a.head))
    t = a.terms(N)
    n = np.arange(1, N + 1, dtype=float)
    if p < 0:
        if a.is_zero or not a.strictly_positive:
            if allow_infinite:
                return math.inf, 0.0
            raise NotSummable(f"sum a_n**{p} diverges when some a_n vanish")
        sigma = (w - a.tail_exp) * p
        if sigma >= -1:
            if allow_infinite:
                return math.inf, 0.0
            raise NotSummable(f"sum (n**w a_n)**{p} diverges")
    with np.errstate(divide="ignore"):
        vals = np.where(t > 0, (n ** w * np.where(t > 0, t, 1.0)) ** p, 0.0)
    value = math.fsum(vals)
    if a.tail_coef == 0:
        return value, 0.0
    # beyond N the terms are c**p n**((w - t) p), a decreasing power
    sigma = (a.tail_exp - w) * p
    if sigma <= 1:
        if allow_infinite:
            return math.inf, 0.0
        raise NotSummable(f"sum (n**{w} a_n)**{p} diverges: tail decays like n**-{sigma:.6g}")
    return value, a.tail_coef ** p * N ** (1.0 - sigma) / (sigma - 1.0)


# -- random generators ---------------------------------------------------------

_DYADIC = [2.0 ** j for j in range(-4, 5)]


def random_function(rng: np.random.Generator, regime="forward", max_pieces=5):
    """Random member of the piece family.

    Forward: 1-5 pieces between dyadic breakpoints in [2**-4, 2**4], optionally
    starting at 0 or ending with an exponential tail.  Reverse: strictly positive
    on (0, inf) with exponential decay.
    """
    k = int(rng.integers(1, max_pieces + 1))
    if regime == "reverse":
        inner = sorted(rng.choice(_DYADIC, size=k - 1, replace=False)) if k > 1 else []
        edges = [0.0] + list(inner) + [math.inf]
        pieces = []
        for i in range(k):
            a = 0.0 if i == 0 else float(rng.uniform(0.0, 1.0))
            b = float(rng.uniform(0.25, 2.0))
            pieces.append(Piece(edges[i], edges[i + 1], float(rng.uniform(0.1, 10.0)), a, b))
        return TestFunction(pieces)
    edges = sorted(rng.choice(_DYADIC, size=k + 1, replace=False))
    edges = [float(e) for e in edges]
    if rng.random() < 0.3:
        edges[0] = 0.0
    exp_tail = rng.random() < 0.3
    if exp_tail:
        edges[-1] = math.inf
    pieces = []
    for i in range(k):
        a = float(rng.uniform(0.0, 2.0))
        b = float(rng.uniform(0.0, 1.0))
        if i == k - 1 and exp_tail:
            b = float(rng.uniform(0.25, 2.0))
        pieces.append(Piece(edges[i], edges[i + 1], float(rng.uniform(0.1, 10.0)), a, b))
    return TestFunction(pieces)


def random_sequence(rng: np.random.Generator, positive=False, max_head=20, decay=(1.2, 3.0)):
    """Random head in [0.1, 10] (zeros allowed unless ``positive``) with a power tail
    ``c n**-t``, ``t`` uniform in ``decay``.  The weighted norms ``sum (n a_n)**p``
    need ``t > 1 + 1/p``."""
    K = int(rng.integers(1, max_head + 1))
    head = rng.uniform(0.1, 10.0, size=K)
    if not positive:
        head = np.where(rng.random(K) < 0.2, 0.0, head)
        if not head.any():
            head[0] = 1.0
    if positive or rng.random() < 0.6:
        c = float(rng.uniform(0.1, 10.0))
        t = float(rng.uniform(*decay))
    else:
        c, t = 0.0, 2.0
    return TestSequence(head.tolist(), c, t)
