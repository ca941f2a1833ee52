"""Command-line driver.

    hhlab constants  [--config run.json]       kernel constants against closed forms
    hhlab verify     --config run.json         the checks listed in the config
    hhlab sharpness  [--config run.json]       extremal-family sweeps
    hhlab suite      [--seed 42]               a seeded random suite over everything

Reports are JSON lines, one record per check (``--format csv`` writes a summary
table instead).  Exit status: 0 when nothing failed, 2 when some check reports
``violated``, 1 on configuration or execution errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import draws
from .constants import ExponentConfig, alternating_series_constant, kernel_constant
from .errors import ConfigError, HHLabError, InvalidParameter
from .functions import (DEFAULT_TRUNCATION, TestFunction, TestSequence, random_function,
                        random_sequence)
from .kernels import BUILTIN_IDS, KernelId, make_kernel
from .quadrature import DEFAULT_TOL_2D
from .sharpness import best_constant, sharpness_sweep
from .verifier import (check_hardy_discrete, check_hardy_integral, verify_bilinear_discrete,
                       verify_bilinear_integral, verify_equivalent_form_discrete,
                       verify_equivalent_form_integral)

log = logging.getLogger("hhlab")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2

# parameters at which every closed form applies
DEFAULT_CONSTANT_KERNELS = [
    {"id": "sum-power", "lam": 2.0, "r": 1.0},
    {"id": "log-ratio", "lam": 1.0, "r": 0.5},
    {"id": "max-power", "lam": 1.0, "r": 0.5},
    {"id": "abs-diff", "lam": 0.5, "r": 0.25},
    {"id": "diff-max", "lam": 1.0, "beta": 0.5, "r": 0.5},
    {"id": "min-diff", "lam": 1.0, "beta": 0.75, "r": 0.5},
    {"id": "pow-diff-max", "lam": 1.0, "beta": 0.5, "r": 0.5},
    {"id": "abslog-max", "lam": 1.0, "r": 0.5},
    {"id": "abslog-sumpow", "lam": 1.0, "r": 0.5},
]

DEFAULT_SHARPNESS = [
    {"type": "sharpness", "kernel": {"id": "sum-power", "lam": 1.0},
     "config": {"p": 2.0, "r": 0.5, "lam": 1.0}},
    {"type": "sharpness", "kernel": {"id": "max-power", "lam": 1.0},
     "config": {"p": 2.0, "r": 0.5, "lam": 1.0}},
]

CHECK_TYPES = ("constant", "hardy-integral", "hardy-discrete", "bilinear", "power",
               "bilinear-discrete", "power-discrete", "sharpness")


# -- config parsing ------------------------------------------------------------------

def _need(d, key, path):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    if key not in d:
        raise ConfigError(f"{path}.{key}", "missing")
    return d[key]


def _number(d, key, path, default=None):
    if key not in d or d[key] is None:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {v!r}")
    return float(v)


def parse_kernel(d, path):
    kid = _need(d, "id", path)
    if kid not in BUILTIN_IDS:
        raise ConfigError(f"{path}.id", f"unknown kernel {kid!r}; choose from {', '.join(BUILTIN_IDS)}")
    try:
        return make_kernel(kid, _number(d, "lam", path), d.get("beta"))
    except InvalidParameter as exc:
        raise ConfigError(path, str(exc)) from None


def parse_exponents(d, path):
    p = _number(d, "p", path)
    lam = _number(d, "lam", path)
    param = d.get("parametrization")
    try:
        if param == "weighted" or d.get("weighted"):
            return ExponentConfig.weighted_form(p, lam)
        if param == "alpha-beta" or "alpha" in d or "beta" in d:
            return ExponentConfig.alpha_beta(p, lam, d.get("alpha"), d.get("beta"))
        if param not in (None, "rs"):
            raise ConfigError(f"{path}.parametrization", f"unknown parametrization {param!r}")
        return ExponentConfig.rs(p, _number(d, "r", path), lam)
    except InvalidParameter as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_function(d, path):
    try:
        return TestFunction.from_dict(d)
    except (InvalidParameter, AttributeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_sequence(d, path):
    try:
        return TestSequence.from_dict(d)
    except (InvalidParameter, AttributeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _check_regime(p, d, path, weighted=False):
    """Reject explicit requests that contradict the regime fixed by ``p``."""
    forward = p > 1
    want = "forward" if forward and not weighted else "tail"
    cum = d.get("cumulative")
    if cum is not None and cum != want:
        regime = "forward (p > 1)" if forward else "reverse (0 < p < 1)"
        raise ConfigError(f"{path}.cumulative",
                          f"regime mismatch: p={p:g} is the {regime} regime, which uses {want} cumulatives")
    direction = d.get("direction")
    if direction is not None:
        expected = "forward" if forward else "reverse"
        if direction != expected:
            raise ConfigError(f"{path}.direction",
                              f"regime mismatch: p={p:g} needs direction {expected!r}, got {direction!r}")


def parse_check(d, path):
    """Validate one check description; returns ``(type, arguments)`` for :func:`run_check`."""
    kind = _need(d, "type", path)
    if kind not in CHECK_TYPES:
        raise ConfigError(f"{path}.type", f"unknown check type {kind!r}")
    if kind == "constant":
        kernel = parse_kernel(_need(d, "kernel", path), f"{path}.kernel")
        r = _number(d, "r", path, kernel.lam / 2.0)
        return kind, (kernel, r)
    if kind in ("hardy-integral", "hardy-discrete"):
        p = _number(d, "p", path)
        if p <= 0 or p == 1:
            raise ConfigError(f"{path}.p", f"need p > 0 and p != 1, got {p:g}")
        _check_regime(p, d, path)
        direction = "forward" if p > 1 else "reverse"
        if kind == "hardy-integral":
            return kind, (_parse_function(_need(d, "f", path), f"{path}.f"), p, direction)
        return kind, (_parse_sequence(_need(d, "a", path), f"{path}.a"), p, direction)
    kernel = parse_kernel(_need(d, "kernel", path), f"{path}.kernel")
    cfg = parse_exponents(_need(d, "config", path), f"{path}.config")
    if abs(cfg.lam - kernel.lam) > 1e-14 * cfg.lam:
        raise ConfigError(f"{path}.config.lam", f"{cfg.lam} differs from the kernel's lam {kernel.lam}")
    _check_regime(cfg.p, d, path, weighted=cfg.parametrization == "weighted")
    if kind == "sharpness":
        eps = d.get("eps", [1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
        if not isinstance(eps, list) or not eps:
            raise ConfigError(f"{path}.eps", "expected a nonempty list")
        return kind, (kernel, cfg, [float(e) for e in eps])
    if kind in ("bilinear", "power"):
        f = _parse_function(_need(d, "f", path), f"{path}.f")
        g = _parse_function(_need(d, "g", path), f"{path}.g") if kind == "bilinear" or "g" in d else None
        return kind, (kernel, cfg, f, g)
    a = _parse_sequence(_need(d, "a", path), f"{path}.a")
    b = _parse_sequence(_need(d, "b", path), f"{path}.b") if kind == "bilinear-discrete" else None
    return kind, (kernel, cfg, a, b)


# -- execution ------------------------------------------------------------------------

def _run_constant(kernel, r, opts):
    rep = kernel_constant(kernel, r)
    out = {"verdict": "agrees" if rep.agreement is None or rep.agreement < 1e-6 else "disagrees",
           "report": rep.as_dict()}
    if kernel.id is KernelId.ABSLOG_SUMPOW:
        out["series"] = alternating_series_constant(kernel.lam, r).as_dict()
    return out


def _run_sharpness(kernel, cfg, eps, opts):
    points = sharpness_sweep(kernel, cfg, eps)
    limit = best_constant(kernel, cfg)
    ratios = [pt.ratio for pt in points]
    monotone = all(b >= a for a, b in zip(ratios, ratios[1:]))
    below = all(pt.ratio <= limit + pt.ratio_error for pt in points)
    verdict = "holds" if below else "violated"
    return {"verdict": verdict, "monotone": monotone, "best_constant": limit,
            "points": [pt.as_dict() for pt in points]}


def run_check(kind, args, opts):
    tol, N = opts["tol"], opts["truncation"]
    if kind == "constant":
        return _run_constant(*args, opts)
    if kind == "sharpness":
        return _run_sharpness(*args, opts)
    if kind == "hardy-integral":
        rep = check_hardy_integral(*args)
    elif kind == "hardy-discrete":
        rep = check_hardy_discrete(*args, N=N)
    elif kind == "bilinear":
        rep = verify_bilinear_integral(*args, tol=tol)
    elif kind == "power":
        rep = verify_equivalent_form_integral(*args, tol=tol)
    elif kind == "bilinear-discrete":
        rep = verify_bilinear_discrete(*args, N=N)
    else:
        kernel, cfg, a, _ = args
        rep = verify_equivalent_form_discrete(kernel, cfg, a, N=N)
    return {"verdict": rep.verdict, "report": rep.as_dict()}


def _clean(x):
    """Recursively make a record JSON-safe (non-finite floats become strings)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def execute(checks, opts, seed=None):
    """Validate every check first, then run them in order; returns (records, exit status)."""
    parsed = [parse_check(d, f"checks[{i}]") for i, d in enumerate(checks)]
    records, status = [], EXIT_OK
    for i, (d, (kind, args)) in enumerate(zip(checks, parsed)):
        rec = {"index": i, "type": kind, "seed": seed, "input": d}
        try:
            rec.update(run_check(kind, args, opts))
        except (HHLabError, ArithmeticError, ValueError) as exc:
            log.warning("check %d (%s) failed: %s", i, kind, exc)
            rec.update(verdict="error", error={"type": type(exc).__name__, "message": str(exc)})
            if status == EXIT_OK:
                status = EXIT_ERROR
        if rec["verdict"] == "violated":
            status = EXIT_VIOLATED
        records.append(_clean(rec))
    return records, status


# -- the seeded suite ------------------------------------------------------------------

def suite_checks(seed):
    """The check list of ``suite --seed``; identical seeds give identical lists."""
    rng = np.random.default_rng(seed)
    checks = [{"type": "constant", "kernel": {k: v for k, v in d.items() if k != "r"}, "r": d["r"]}
              for d in DEFAULT_CONSTANT_KERNELS]
    for p in (1.5, 2.0, 3.0):
        checks.append({"type": "hardy-integral", "p": p, "f": random_function(rng).as_dict()})
        checks.append({"type": "hardy-discrete", "p": p, "a": random_sequence(rng).as_dict()})
    checks.append({"type": "hardy-integral", "p": 0.5,
                   "f": random_function(rng, "reverse").as_dict()})
    checks.append({"type": "hardy-discrete", "p": 0.5,
                   "a": random_sequence(rng, positive=True).as_dict()})

    def pair(kernel, cfg, regime="forward"):
        f, g = random_function(rng, regime).as_dict(), random_function(rng, regime).as_dict()
        base = {"kernel": draws.kernel_as_dict(kernel), "config": draws.config_as_dict(cfg)}
        checks.append(dict(base, type="bilinear", f=f, g=g))
        checks.append(dict(base, type="power", f=f, g=g))

    for p in (1.25, 2.0, 4.0):
        kernel, cfg, _ = draws.draw_rs(rng, p)
        pair(kernel, cfg)
    kernel, cfg, _ = draws.draw_alpha_beta(rng, 2.0)
    pair(kernel, cfg)
    kernel, cfg, _ = draws.draw_weighted(rng, 2.0)
    pair(kernel, cfg)
    kernel, cfg, _ = draws.draw_rs(rng, 0.5, ids=("sum-power", "max-power"))
    pair(kernel, cfg, "reverse")
    for form in ("rs", "weighted"):
        kernel, cfg, _ = draws.draw_discrete(rng, 2.0, form)
        base = {"kernel": draws.kernel_as_dict(kernel), "config": draws.config_as_dict(cfg)}
        decay = (1.2, 3.0) if form == "rs" else (1.7, 3.5)
        a, b = (random_sequence(rng, decay=decay).as_dict() for _ in range(2))
        checks.append(dict(base, type="bilinear-discrete", a=a, b=b))
        checks.append(dict(base, type="power-discrete", a=a))
    checks.extend(DEFAULT_SHARPNESS[:1])
    return checks


# -- entry point ---------------------------------------------------------------------------

def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "the config must be a JSON object")
    return data


def _checks_for(command, cfg, seed):
    if command == "constants":
        kernels = cfg.get("kernels", DEFAULT_CONSTANT_KERNELS)
        if not isinstance(kernels, list):
            raise ConfigError("kernels", "expected a list")
        return [{"type": "constant", "kernel": {k: v for k, v in d.items() if k != "r"},
                 **({"r": d["r"]} if "r" in d else {})} for d in kernels]
    if command == "sharpness":
        return cfg.get("checks", DEFAULT_SHARPNESS)
    if command == "verify":
        checks = cfg.get("checks")
        if not isinstance(checks, list) or not checks:
            raise ConfigError("checks", "verify needs a nonempty list of checks")
        return checks
    return suite_checks(seed)


_CSV_FIELDS = ("index", "type", "check_id", "kernel", "verdict", "lhs", "rhs", "ratio", "margin",
               "value", "closed_form")


def _csv(records):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=_CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for rec in records:
        rep = rec.get("report", {})
        kernel = rec["input"].get("kernel", {})
        w.writerow({"index": rec["index"], "type": rec["type"], "check_id": rep.get("check_id", ""),
                    "kernel": kernel.get("id", ""), "verdict": rec["verdict"],
                    "lhs": rep.get("lhs", ""), "rhs": rep.get("rhs", ""),
                    "ratio": rep.get("ratio", ""), "margin": rep.get("margin", ""),
                    "value": rep.get("numeric", {}).get("value", ""),
                    "closed_form": rep.get("closed_form", "")})
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="hhlab", description="Numerical checks of Hardy-Hilbert type inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("constants", "kernel constants against closed forms"),
                       ("verify", "run the checks listed in --config"),
                       ("sharpness", "extremal-family sweeps"),
                       ("suite", "seeded random suite")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="random seed (suite default 0)")
        p.add_argument("--tol", type=float, default=None, help=f"2-D quadrature tolerance (default {DEFAULT_TOL_2D:g})")
        p.add_argument("--truncation", type=int, default=None,
                       help=f"discrete truncation N (default {DEFAULT_TRUNCATION})")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed", f"expected a nonnegative integer, got {seed!r}")
        tol = args.tol if args.tol is not None else _number(cfg, "tol", "<root>", DEFAULT_TOL_2D)
        N = args.truncation if args.truncation is not None else cfg.get("truncation", DEFAULT_TRUNCATION)
        if isinstance(N, bool) or not isinstance(N, int) or N < 1:
            raise ConfigError("truncation", f"expected a positive integer, got {N!r}")
        if not tol > 0:
            raise ConfigError("tol", f"expected a positive number, got {tol!r}")
        fmt = args.format or cfg.get("format", "json")
        if fmt not in ("json", "csv"):
            raise ConfigError("format", f"expected 'json' or 'csv', got {fmt!r}")
        checks = _checks_for(args.command, cfg, seed)
        records, status = execute(checks, {"tol": tol, "truncation": N}, seed)
    except ConfigError as exc:
        print(f"hhlab: config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if fmt == "csv":
        text = _csv(records)
    else:
        text = "".join(json.dumps(rec, sort_keys=True, allow_nan=False) + "\n" for rec in records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    counts = {}
    for rec in records:
        counts[rec["verdict"]] = counts.get(rec["verdict"], 0) + 1
    log.info("%d checks: %s", len(records), ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return status


if __name__ == "__main__":
    sys.exit(main())
