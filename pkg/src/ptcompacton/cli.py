"""Command-line front end: ``ptcompacton <command> [options]``.

Commands write CSV or JSON to ``--out`` (default stdout).  Errors go to
stderr as a JSON object; the exit status is 2 for bad input and 3 for a
failed computation.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .conserved import (
    check_relations,
    conserved_quadrature,
    conserved_report,
    fit_power_law,
    integral_set,
    speed_for_momentum,
)
from .errors import CompactonError, ComputationError, InvalidConfig, InvalidParams
from .params import ModelParams, classify, scaling_exponents
from .profile import ProfileFamily, build_profile, first_integral_residual, weak_solution_check
from .stability import dPdc_criterion, phi2_rho_half, stability_report
from .variational import compare_profiles, optimize_cos_power, optimize_post_gaussian

COMMANDS = ("profile", "conserved", "stability", "variational", "scaling", "sweep")
DEFAULT_FORMAT = {
    "profile": "csv",
    "conserved": "json",
    "stability": "json",
    "variational": "json",
    "scaling": "json",
    "sweep": "csv",
}
CONFIG_ERRORS = (InvalidConfig, InvalidParams, ValueError)


@dataclass
class RunConfig:
    command: str
    params: Dict[str, Any]
    momentum: Optional[float] = None
    grid_points: int = 256
    out_path: Optional[str] = None
    format: Optional[str] = None
    family: Optional[str] = None
    tol: float = 1e-9
    axis: Optional[str] = None
    values: List[float] = field(default_factory=list)
    jobs: int = 1

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InvalidConfig(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        for key in ("l", "p", "m"):
            if self.params.get(key) is None and not (self.command == "sweep" and self.axis == key):
                raise InvalidConfig(f"missing parameter --{key}")
        if self.momentum is not None and self.params.get("c") is not None:
            raise InvalidConfig("give either --c or --momentum, not both")
        if self.momentum is not None and not self.momentum > 0:
            raise InvalidConfig("--momentum must be positive")
        if self.grid_points < 64:
            raise InvalidConfig("--grid-points must be at least 64")
        if self.format is None:
            self.format = DEFAULT_FORMAT[self.command]
        if self.format not in ("csv", "json"):
            raise InvalidConfig(f"--format must be csv or json, not {self.format!r}")
        if self.family is not None:
            try:
                ProfileFamily(self.family)
            except ValueError:
                raise InvalidConfig(f"unknown family {self.family!r}") from None
        if self.command == "sweep":
            if self.axis not in ("l", "p", "m", "c"):
                raise InvalidConfig("--axis must be one of l, p, m, c")
            if not self.values:
                raise InvalidConfig("--values must list at least one value")
            if self.axis == "c" and self.momentum is not None:
                raise InvalidConfig("a c-sweep cannot also fix --momentum")
        if not self.tol > 0:
            raise InvalidConfig("--tol must be positive")
        return self


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would print usage and exit
        raise InvalidConfig(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ptcompacton", description="Compactons of PT-symmetric generalized KdV equations.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="what to compute")
    ap.add_argument("--l", type=float, help="nonlinearity exponent l (> 2)")
    ap.add_argument("--p", type=float, help="derivative-coupling exponent p")
    ap.add_argument("--m", type=int, help="derivative power m (even, >= 2)")
    ap.add_argument("--c", type=float, help="wave speed (default 1)")
    ap.add_argument("--momentum", type=float, help="fix the momentum P instead of c")
    ap.add_argument("--grid-points", type=int, help="samples per half-support (>= 64, default 256)")
    ap.add_argument("--family", help="profile family: " + ", ".join(f.value for f in ProfileFamily))
    ap.add_argument("--out", help="output path (default stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--tol", type=float, help="optimizer / root tolerance (default 1e-9)")
    ap.add_argument("--axis", choices=("l", "p", "m", "c"), help="sweep axis")
    ap.add_argument("--values", help="comma-separated sweep values")
    ap.add_argument("--jobs", type=int, help="worker processes for sweeps (default 1)")
    ap.add_argument("--config", help="JSON file with the same fields (flags override it)")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def _parse_values(text) -> List[float]:
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidConfig(f"cannot parse --values {text!r}") from None


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    base: Dict[str, Any] = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read config {ns.config!r}: {exc}") from None
        if not isinstance(base, dict):
            raise InvalidConfig("config file must hold a JSON object")
    params = dict(base.get("params") or {})
    for key in ("l", "p", "m", "c"):
        if key in base and key not in params:
            params[key] = base[key]
        if getattr(ns, key) is not None:
            params[key] = getattr(ns, key)

    def pick(flag, key, default=None):
        return flag if flag is not None else base.get(key, default)

    cfg = RunConfig(
        command=pick(ns.command, "command"),
        params=params,
        momentum=pick(ns.momentum, "momentum"),
        grid_points=int(pick(ns.grid_points, "grid_points", 256)),
        out_path=pick(ns.out, "out_path"),
        format=pick(ns.format, "format"),
        family=pick(ns.family, "family"),
        tol=float(pick(ns.tol, "tol", 1e-9)),
        axis=pick(ns.axis, "axis"),
        values=_parse_values(pick(ns.values, "values")),
        jobs=int(pick(ns.jobs, "jobs", 1)),
    )
    if cfg.command is None:
        raise InvalidConfig("no command given")
    return cfg.validate()


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v).replace(",", ";")


def _csv_table(columns: Sequence[str], rows: Sequence[Sequence[Any]], comments: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for line in comments:
        out.write(f"# {line}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def _flatten(d: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            flat[key] = ";".join(_fmt(x) for x in v)
        else:
            flat[key] = v
    return flat


def _single_row_csv(d: Dict[str, Any]) -> str:
    flat = _flatten(_clean(d))
    keys = sorted(flat)
    return _csv_table(keys, [[flat[k] for k in keys]])


def resolve_params(cfg: RunConfig) -> ModelParams:
    raw = dict(cfg.params)
    if cfg.momentum is not None:
        raw["c"] = 1.0
        base = ModelParams.from_mapping(raw)
        raw["c"] = speed_for_momentum(base, cfg.momentum)
    return ModelParams.from_mapping(raw)


def _meta(cfg: RunConfig, params: ModelParams) -> Dict[str, Any]:
    return {"params": params.to_dict(), "momentum": cfg.momentum, "resolved_c": params.c}


def cmd_profile(cfg: RunConfig) -> str:
    params = resolve_params(cfg)
    prof = build_profile(params, cfg.family, cfg.grid_points)
    if cfg.format == "csv":
        return prof.to_csv()
    out = _meta(cfg, params)
    out.update({
        "family": prof.family.value,
        "A": prof.A,
        "beta_w": prof.beta_w,
        "a_exp": prof.a_exp,
        "tau": prof.tau,
        "y_half": prof.y_half,
        "first_integral_residual": first_integral_residual(prof),
        "weak_solution": weak_solution_check(prof),
        "y": prof.y.tolist(),
        "f": prof.f.tolist(),
        "fprime": prof.fprime.tolist(),
    })
    return _dump_json(out)


def cmd_conserved(cfg: RunConfig) -> str:
    params = resolve_params(cfg)
    rep = conserved_report(build_profile(params, cfg.family, cfg.grid_points))
    rep.update(_meta(cfg, params))
    return _dump_json(rep) if cfg.format == "json" else _single_row_csv(rep)


def cmd_stability(cfg: RunConfig) -> str:
    params = resolve_params(cfg)
    rep = stability_report(params, cfg.family, cfg.grid_points).to_dict()
    rep.update(_meta(cfg, params))
    return _dump_json(rep) if cfg.format == "json" else _single_row_csv(rep)


def cmd_scaling(cfg: RunConfig) -> str:
    params = resolve_params(cfg)
    out = {
        "params": params.to_dict(),
        "exponents": scaling_exponents(params).to_dict(),
        "regime": classify(params).to_dict(),
    }
    return _dump_json(out) if cfg.format == "json" else _single_row_csv(out)


def cmd_variational(cfg: RunConfig) -> str:
    momentum = 1.0 if cfg.momentum is None else cfg.momentum
    raw = dict(cfg.params)
    if raw.get("c") is not None:
        raise InvalidConfig("variational runs at fixed momentum; use --momentum instead of --c")
    raw["c"] = 1.0
    base = ModelParams.from_mapping(raw)
    try:
        pg = optimize_post_gaussian(base, momentum, tol=cfg.tol)
        cp = optimize_cos_power(base, momentum, tol=cfg.tol)
    except ArithmeticError as exc:
        raise ComputationError(str(exc)) from exc
    exact = None
    try:
        c_exact = speed_for_momentum(base, momentum)
        exact = build_profile(base.with_speed(c_exact), cfg.family, cfg.grid_points)
    except CompactonError:
        c_exact = None
    if cfg.format == "csv":
        half = max(pg.half_extent if exact is None else exact.y_half, cp.half_extent)
        if exact is not None:
            half = max(half, exact.y_half * 1.25)
        y = np.linspace(-half, half, 2 * cfg.grid_points + 1)
        cols = ["y", "exact", "post_gaussian", "cos_power"]
        ex = exact.evaluate(y)[0] if exact is not None else np.full_like(y, math.nan)
        rows = zip(y, ex, pg.evaluate(y), cp.evaluate(y))
        comments = [
            f"momentum={momentum!r} c_exact={c_exact!r}",
            f"post_gaussian A={pg.A!r} beta={pg.beta!r} n={pg.shape!r} H={pg.H!r}",
            f"cos_power A={cp.A!r} beta={cp.beta!r} gamma={cp.shape!r} H={cp.H!r}",
        ]
        return _csv_table(cols, list(rows), comments)
    out: Dict[str, Any] = {
        "params": {k: v for k, v in base.to_dict().items() if k != "c"},
        "P": momentum,
        "c_exact": c_exact,
        "post_gaussian": pg.to_dict(),
        "cos_power": cp.to_dict(),
    }
    if exact is not None:
        out["distance_to_exact"] = {
            "post_gaussian": dict(zip(("l2", "sup"), compare_profiles(exact, pg))),
            "cos_power": dict(zip(("l2", "sup"), compare_profiles(exact, cp))),
        }
    return _dump_json(out)


SWEEP_COLUMNS = (
    "l", "p", "m", "c", "P", "E", "E_over_Pc", "r", "relation_residual",
    "window_ok", "dPdc_exponent", "phi2_numeric", "stable_consistent", "error",
)


def _sweep_point(args) -> Dict[str, Any]:
    raw, family, grid = args
    row: Dict[str, Any] = {k: raw.get(k) for k in ("l", "p", "m", "c")}
    try:
        params = ModelParams.from_mapping(raw)
        prof = build_profile(params, family, grid)
        ints = integral_set(prof)
        cons = conserved_quadrature(prof, ints)
        expo, _ = dPdc_criterion(params)
        phi2 = phi2_rho_half(params, cons.P, ints=ints).numeric
        window = classify(params).stable_window
        signs = (window, expo > 0, phi2 > 1e-8 * cons.P * params.c)
        row.update({
            "c": params.c,
            "P": cons.P,
            "E": cons.E,
            "E_over_Pc": cons.E / (cons.P * params.c),
            "r": scaling_exponents(params).r,
            "relation_residual": max(check_relations(params, ints).values()),
            "window_ok": window,
            "dPdc_exponent": expo,
            "phi2_numeric": phi2,
            "stable_consistent": all(signs) or not any(signs),
            "error": None,
        })
    except (CompactonError, ArithmeticError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(cfg: RunConfig) -> str:
    base = dict(cfg.params)
    if cfg.momentum is None and base.get("c") is None:
        base["c"] = 1.0
    jobs = []
    for v in cfg.values:
        raw = dict(base)
        raw[cfg.axis] = int(v) if cfg.axis == "m" else v
        if cfg.momentum is not None:
            try:
                raw["c"] = resolve_params(RunConfig("sweep", raw, cfg.momentum)).c
            except (CompactonError, ArithmeticError, ValueError):
                raw["c"] = None
        jobs.append((raw, cfg.family, cfg.grid_points))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    fits: Dict[str, Any] = {}
    good = [r for r in rows if r["error"] is None]
    if cfg.axis == "c" and len(good) >= 2:
        params = ModelParams.from_mapping(good[0])
        ex = scaling_exponents(params)
        fits["P_vs_c_slope"], _ = fit_power_law([r["c"] for r in good], [r["P"] for r in good])
        fits["P_vs_c_expected"] = ex.i2
        if all(r["E"] != 0 for r in good):
            fits["E_vs_P_slope"], _ = fit_power_law([r["P"] for r in good], [r["E"] for r in good])
            fits["E_vs_P_expected"] = None if ex.r is None else -ex.r
    if cfg.format == "json":
        return _dump_json({"axis": cfg.axis, "rows": rows, "fits": fits})
    comments = [f"fit {k}={_fmt(v)}" for k, v in sorted(fits.items())]
    return _csv_table(SWEEP_COLUMNS, [[r.get(k) for k in SWEEP_COLUMNS] for r in rows], comments)


HANDLERS = {
    "profile": cmd_profile,
    "conserved": cmd_conserved,
    "stability": cmd_stability,
    "variational": cmd_variational,
    "scaling": cmd_scaling,
    "sweep": cmd_sweep,
}


def run(cfg: RunConfig) -> int:
    text = HANDLERS[cfg.command](cfg)
    if cfg.out_path:
        with open(cfg.out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _report_error(kind: str, exc: BaseException) -> None:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except CONFIG_ERRORS as exc:
        _report_error("InvalidConfig", exc)
        return 2
    try:
        return run(cfg)
    except (InvalidConfig, InvalidParams) as exc:
        _report_error("InvalidConfig", exc)
        return 2
    except (CompactonError, ArithmeticError) as exc:
        # inadmissible parameters are input problems, numerical failures are not
        if isinstance(exc, ValueError):
            _report_error("InvalidConfig", exc)
            return 2
        _report_error("ComputationError", exc)
        return 3
    except OSError as exc:
        _report_error("InvalidConfig", exc)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
