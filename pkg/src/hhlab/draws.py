"""Random (kernel, configuration, input) draws shared by the CLI suite and the tests.

Draws that fall outside a theorem's hypotheses (divergent kernel constant,
non-monotone profile for the discrete forms) are redrawn; the number of
redraws is returned so that reports can state it.
"""
from __future__ import annotations

import numpy as np

from .constants import ExponentConfig, kernel_constant
from .errors import DivergentDeclared, HypothesisViolated, InvalidParameter
from .kernels import BUILTIN_IDS, KernelId, make_kernel
from .verifier import check_monotonicity

MAX_REDRAWS = 200

_BETA_RANGES = {
    KernelId.DIFF_MAX: (0.1, 0.9),
    KernelId.MIN_DIFF: (0.1, 0.9),
    KernelId.POW_DIFF_MAX: (0.1, 1.5),
}


def draw_kernel(rng: np.random.Generator, lam=None, ids=BUILTIN_IDS, lam_range=(0.5, 3.0)):
    kid = KernelId(ids[int(rng.integers(len(ids)))])
    lam = float(rng.uniform(*lam_range)) if lam is None else float(lam)
    beta = None
    if kid in _BETA_RANGES:
        beta = float(rng.uniform(*_BETA_RANGES[kid]))
    return make_kernel(kid.value, lam, beta)


def _constant_ok(kernel, r):
    try:
        kernel_constant(kernel, r)
    except (DivergentDeclared, InvalidParameter):
        return False
    return True


def draw_rs(rng, p, ids=BUILTIN_IDS, lam_range=(0.5, 3.0)):
    """``(kernel, cfg, redraws)`` with ``0 < r < lam`` and a convergent ``k(r)``."""
    for tries in range(MAX_REDRAWS):
        kernel = draw_kernel(rng, ids=ids, lam_range=lam_range)
        r = float(rng.uniform(0.1, 0.9)) * kernel.lam
        if _constant_ok(kernel, r):
            return kernel, ExponentConfig.rs(p, r, kernel.lam), tries
    raise RuntimeError("no admissible rs draw found")


def draw_alpha_beta(rng, p, ids=BUILTIN_IDS):
    """Alpha-beta draw with the default ``alpha = beta = lam - p - 1``."""
    for tries in range(MAX_REDRAWS):
        kernel = draw_kernel(rng, lam=p + 1.0 + float(rng.uniform(0.2, 2.0)), ids=ids)
        cfg = ExponentConfig.alpha_beta(p, kernel.lam)
        if _constant_ok(kernel, cfg.alpha + 1.0):
            return kernel, cfg, tries
    raise RuntimeError("no admissible alpha-beta draw found")


def draw_weighted(rng, p, ids=BUILTIN_IDS, lam=1.0):
    for tries in range(MAX_REDRAWS):
        kernel = draw_kernel(rng, lam=lam, ids=ids)
        if _constant_ok(kernel, 1.0 / p):
            return kernel, ExponentConfig.weighted_form(p, lam), tries
    raise RuntimeError("no admissible weighted draw found")


def draw_discrete(rng, p, form="rs", ids=BUILTIN_IDS):
    """A draw that also satisfies the monotonicity hypothesis of the discrete theorems."""
    for tries in range(MAX_REDRAWS):
        if form == "rs":
            kernel, cfg, _ = draw_rs(rng, p, ids)
        elif form == "weighted":
            # forward partial sums make the double series converge only for lam > 2
            kernel, cfg, _ = draw_weighted(rng, p, ids, lam=float(rng.uniform(2.2, 4.0)))
        else:
            raise InvalidParameter(f"unknown discrete form {form!r}")
        try:
            check_monotonicity(kernel, cfg)
        except HypothesisViolated:
            continue
        return kernel, cfg, tries
    raise RuntimeError("no draw satisfying the monotonicity hypothesis found")


def kernel_as_dict(kernel):
    return {"id": kernel.id.value, "lam": kernel.lam, "beta": kernel.beta}


def config_as_dict(cfg):
    return {k: v for k, v in cfg.as_dict().items() if v is not None}

