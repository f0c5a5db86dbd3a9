"""Command-line front end.

Usage: coexist <eig|semitrivial|curves|branch|region|check>
           --config <path> [--out <dir>] [--n <int>] [--seed <int>]

Configuration is a flat INI file with one section per command plus the
shared [run] and [model] sections; unknown sections or keys are
rejected.  Outputs are CSV/JSON files whose layout is described by
output_schema.json, written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import curves, system
from .errors import CoexistError, ConfigError
from .grid import Grid
from .models import Model, ap1_sample, hypothesis_check, model_ap2
from .semitrivial import branch_sweep
from .eigen import sigma1_divergence

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "output_schema.json")

SENSITIVITY_REGISTRY = {
    "one": (lambda v: 1.0, lambda v: 0.0),
    "inv1p": (lambda v: 1.0 / (1.0 + v), lambda v: -1.0 / (1.0 + v) ** 2),
}

ALLOWED_KEYS = {
    "run": {"model", "n", "length", "seed", "out"},
    "model": {"b", "c", "chi", "f"},
    "eig": {"mode", "a_coeff", "b_potential", "mu"},
    "semitrivial": {"branch", "gamma_min", "gamma_max", "count"},
    "curves": {"which", "param_min", "param_max", "count"},
    "branch": {"fixed", "fixed_value", "start", "ds", "max_steps",
               "window_min", "window_max", "norm_cap"},
    "region": {"lambda_min", "lambda_max", "lambda_count",
               "mu_min", "mu_max", "mu_count", "probe_proven_empty"},
    "check": {"u_max", "v_max"},
}


@dataclass
class RunConfig:
    """Validated run configuration; sections keep their raw key-value
    maps after the schema check."""

    model_name: str
    n: int
    length: float
    seed: int
    out: str
    sections: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})


def load_schema() -> dict:
    with open(SCHEMA_PATH) as fh:
        return json.load(fh)


def load_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from exc

    sections = {}
    for name in parser.sections():
        if name not in ALLOWED_KEYS:
            raise ConfigError(f"unknown config section [{name}]")
        keys = dict(parser.items(name))
        unknown = set(keys) - ALLOWED_KEYS[name]
        if unknown:
            raise ConfigError(
                f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
        sections[name] = keys

    run = sections.get("run", {})
    try:
        cfg = RunConfig(
            model_name=run.get("model", "ap1-sample"),
            n=int(run.get("n", "199")),
            length=float(run.get("length", "1.0")),
            seed=int(run.get("seed", "0")),
            out=run.get("out", "."),
            sections=sections)
    except ValueError as exc:
        raise ConfigError(f"bad value in [run]: {exc}") from exc
    if cfg.n < 3:
        raise ConfigError(f"n must be >= 3, got {cfg.n}")
    if cfg.length <= 0:
        raise ConfigError(f"length must be positive, got {cfg.length}")
    return cfg


def build_model(cfg: RunConfig) -> Model:
    sec = cfg.section("model")
    try:
        b = float(sec.get("b", "1.0"))
        c = float(sec.get("c", "1.0"))
    except ValueError as exc:
        raise ConfigError(f"bad value in [model]: {exc}") from exc
    if cfg.model_name == "ap1-sample":
        return ap1_sample(b, c)
    if cfg.model_name == "ap2":
        try:
            chi = float(sec.get("chi", "0.5"))
        except ValueError as exc:
            raise ConfigError(f"bad value in [model]: {exc}") from exc
        f_name = sec.get("f", "one")
        if f_name not in SENSITIVITY_REGISTRY:
            raise ConfigError(
                f"unknown sensitivity {f_name!r}; "
                f"choices: {', '.join(sorted(SENSITIVITY_REGISTRY))}")
        f_sens, f_sens_prime = SENSITIVITY_REGISTRY[f_name]
        return model_ap2(chi, b, c, f_sens, f_sens_prime)
    raise ConfigError(f"unknown model {cfg.model_name!r}; "
                      f"choices: ap1-sample, ap2")


def _float(sec: dict, key: str, default: Optional[str] = None) -> float:
    raw = sec.get(key, default)
    if raw is None:
        raise ConfigError(f"missing required key {key!r}")
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _int(sec: dict, key: str, default: Optional[str] = None) -> int:
    raw = sec.get(key, default)
    if raw is None:
        raise ConfigError(f"missing required key {key!r}")
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _bool(sec: dict, key: str, default: str = "false") -> bool:
    raw = sec.get(key, default).strip().lower()
    if raw in ("true", "yes", "1", "on"):
        return True
    if raw in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"bad boolean for {key!r}: {raw!r}")


# ---------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: str, header: list, rows: list) -> None:
    """RFC-4180 CSV written atomically via a temp file in the target
    directory."""
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL,
                                lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(x) for x in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, payload: dict) -> None:
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# commands


def cmd_eig(cfg: RunConfig, grid: Grid, out: str) -> None:
    sec = cfg.section("eig")
    mode = sec.get("mode", "constant")
    rows = []
    if mode == "constant":
        a_coeff = _float(sec, "a_coeff", "1.0")
        b_pot = _float(sec, "b_potential", "0.0")
        res = sigma1_divergence(grid, a_coeff, b_pot)
        rows.append(["drift", res.sigma1, res.residual, res.iterations,
                     grid.n_interior, 0.0])
    elif mode == "gauge-pair":
        model = build_model(cfg)
        mu = _float(sec, "mu")
        cv = curves.lambda_mu(model, mu, grid)
        if cv.drift_result is None:
            raise ConfigError(
                "gauge-pair mode needs mu above the semitrivial threshold")
        rows.append(["drift", cv.drift_result.sigma1, cv.drift_result.residual,
                     cv.drift_result.iterations, grid.n_interior, cv.gap])
        rows.append(["gauge", cv.gauge_result.sigma1, cv.gauge_result.residual,
                     cv.gauge_result.iterations, grid.n_interior, cv.gap])
    else:
        raise ConfigError(f"unknown eig mode {mode!r}")
    write_csv(os.path.join(out, "eig.csv"),
              ["form", "sigma1", "residual", "iterations", "n", "gap"], rows)


def cmd_semitrivial(cfg: RunConfig, grid: Grid, out: str) -> None:
    sec = cfg.section("semitrivial")
    model = build_model(cfg)
    branch = sec.get("branch", "u")
    if branch not in ("u", "v"):
        raise ConfigError(f"branch must be 'u' or 'v', got {branch!r}")
    lo = _float(sec, "gamma_min")
    hi = _float(sec, "gamma_max")
    count = _int(sec, "count", "25")
    if count < 2 or hi <= lo:
        raise ConfigError("need gamma_max > gamma_min and count >= 2")
    gammas = np.linspace(lo, hi, count)
    sweep = branch_sweep(
        lambda g: curves.semitrivial_problem(model, branch, g, grid),
        gammas, grid)
    rows = []
    for gamma, sol, margin in zip(sweep.gammas, sweep.solutions,
                                  sweep.nondegeneracy_margins):
        exists = sol is not None
        rows.append([gamma, exists,
                     sol.sup_norm() if exists else 0.0,
                     margin if exists else np.nan])
    write_csv(os.path.join(out, "branch_semitrivial.csv"),
              ["gamma", "exists", "sup_norm", "margin"], rows)


def cmd_curves(cfg: RunConfig, grid: Grid, out: str) -> None:
    sec = cfg.section("curves")
    model = build_model(cfg)
    which = sec.get("which", "both")
    lo = _float(sec, "param_min")
    hi = _float(sec, "param_max")
    count = _int(sec, "count", "25")
    if count < 2 or hi <= lo:
        raise ConfigError("need param_max > param_min and count >= 2")
    params = np.linspace(lo, hi, count)
    names = {"mu_lambda": ["mu_lambda"], "lambda_mu": ["lambda_mu"],
             "both": ["mu_lambda", "lambda_mu"]}.get(which)
    if names is None:
        raise ConfigError(f"unknown curve selector {which!r}")
    rows = []
    for name in names:
        table = curves.curve_table(model, name, params, grid)
        for p, v, g in zip(table.parameters, table.values, table.gaps):
            rows.append([p, v, name, g])
    write_csv(os.path.join(out, "curves.csv"),
              ["param", "value", "which", "gap"], rows)


def cmd_branch(cfg: RunConfig, grid: Grid, out: str) -> None:
    sec = cfg.section("branch")
    model = build_model(cfg)
    fixed = sec.get("fixed", "lambda")
    if fixed not in ("lambda", "mu"):
        raise ConfigError(f"fixed must be 'lambda' or 'mu', got {fixed!r}")
    fixed_value = _float(sec, "fixed_value")
    start = sec.get("start", "u" if fixed == "lambda" else "v")
    if (fixed, start) not in (("lambda", "u"), ("mu", "v")):
        raise ConfigError(
            "start branch must carry the fixed parameter: "
            "fixed=lambda starts from 'u', fixed=mu from 'v'")

    theta = curves.semitrivial_state(model, start, fixed_value, grid)
    if theta is None:
        raise CoexistError(
            f"no semitrivial state at {fixed}={fixed_value}; "
            "pick a value above the threshold")
    if start == "u":
        crit = curves.mu_lambda(model, fixed_value, grid).value
        xi, phi2 = system.bifurcation_tangent(model, fixed_value, theta, crit)
        bp = system.BifurcationPoint("u", fixed_value, crit, theta, xi, phi2)
    else:
        crit = curves.lambda_mu(model, fixed_value, grid).value
        phi1, eta = system.bifurcation_tangent_v(model, fixed_value, theta,
                                                 crit)
        bp = system.BifurcationPoint("v", fixed_value, crit, theta, phi1, eta)

    opts = system.ContinuationOpts(
        ds=_float(sec, "ds", "0.05"),
        max_steps=_int(sec, "max_steps", "2000"),
        window=(_float(sec, "window_min", "-30.0"),
                _float(sec, "window_max", "30.0")),
        norm_cap=_float(sec, "norm_cap", "1e3"))
    branch = system.continue_branch(model, fixed, fixed_value, bp, opts)

    rows = []
    for step, pt in enumerate(branch.points):
        rows.append([step, pt.parameter,
                     pt.state.u.sup_norm(), pt.state.v.sup_norm(),
                     float(np.min(pt.state.u.values)),
                     float(np.min(pt.state.v.values)),
                     pt.arclength])
    write_csv(os.path.join(out, "branch.csv"),
              ["step", "param", "sup_u", "sup_v", "min_u", "min_v",
               "arclength"], rows)
    write_json(os.path.join(out, "verdict.json"), _jsonable({
        "termination": branch.termination.value,
        "fixed_name": branch.fixed_name,
        "fixed_value": branch.fixed_value,
        "free_name": branch.free_name,
        "matching_tol": opts.matching_tol,
        "data": branch.termination_data,
    }))


def cmd_region(cfg: RunConfig, grid: Grid, out: str) -> None:
    sec = cfg.section("region")
    model = build_model(cfg)
    lams = np.linspace(_float(sec, "lambda_min"), _float(sec, "lambda_max"),
                       _int(sec, "lambda_count", "12"))
    mus = np.linspace(_float(sec, "mu_min"), _float(sec, "mu_max"),
                      _int(sec, "mu_count", "12"))
    opts = curves.ProbeOpts(
        probe_proven_empty=_bool(sec, "probe_proven_empty"),
        rng_seed=cfg.seed)
    rm = curves.region_map(model, lams, mus, grid, opts)

    rows = []
    for i, lam in enumerate(rm.lambda_grid):
        for j, mu in enumerate(rm.mu_grid):
            cell = rm.cells[i][j]
            rows.append([lam, mu, cell.verdict, cell.probe_residual])
    write_csv(os.path.join(out, "region.csv"),
              ["lambda", "mu", "verdict", "probe_residual"], rows)

    crows = []
    for tab in (rm.mu_lambda_table, rm.lambda_mu_table):
        for p, v, g in zip(tab.parameters, tab.values, tab.gaps):
            crows.append([p, v, tab.which, g])
    write_csv(os.path.join(out, "curves.csv"),
              ["param", "value", "which", "gap"], crows)


def cmd_check(cfg: RunConfig, grid: Grid, out: str) -> None:
    sec = cfg.section("check")
    model = build_model(cfg)
    u_max = _float(sec, "u_max", "10.0")
    v_max = _float(sec, "v_max", "10.0")
    violations = hypothesis_check(model, u_max, v_max)
    write_json(os.path.join(out, "check.json"), {
        "model": model.label,
        "passed": not violations,
        "violations": [{"name": v.name,
                        "point": [float(p) for p in v.point],
                        "value": float(v.value)} for v in violations],
    })
    if violations:
        raise CoexistError(
            f"{len(violations)} hypothesis violation(s); see check.json")


COMMANDS = {
    "eig": cmd_eig,
    "semitrivial": cmd_semitrivial,
    "curves": cmd_curves,
    "branch": cmd_branch,
    "region": cmd_region,
    "check": cmd_check,
}


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="coexist",
        description="bifurcation toolkit for 1-D cross-diffusion systems")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None,
                        help="output directory (default: from config)")
    parser.add_argument("--n", type=int, default=None,
                        help="override grid size")
    parser.add_argument("--seed", type=int, default=None,
                        help="override probe seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.n is not None:
            cfg.n = args.n
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out if args.out is not None else cfg.out
        grid = Grid(cfg.n, cfg.length)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        COMMANDS[args.command](cfg, grid, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CoexistError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
