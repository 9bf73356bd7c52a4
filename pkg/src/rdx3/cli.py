"""Command-line entry point: check / params / simulate / verify / models.

Exit codes (exhaustive):
    0  success; for `check`, every core condition certified
    1  malformed config, bad arguments, or I/O failure
    2  some core condition falsified
    3  some core condition undecided (Unknown)
    4  feasibility search exhausted its budget
    5  simulation flagged blow-up
    6  conditions certified but no theorem's thresholds are met

All file outputs are written atomically (temp file + rename).  The
triangular-system check is informational and never affects exit codes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import __version__
from .checker import (
    ConditionReport,
    IwscWeights,
    NonlinearityTriple,
    SamplerConfig,
    check_all,
    check_iwsc,
)
from .lyapunov import (
    DiffusionTriple,
    FeasibilitySearchError,
    HpSpec,
    VARIANT_ABOVE,
    VARIANT_BELOW,
    theorem_params,
    theta_sigma_feasible,
)
from .models import ModelSpec, build_preset, preset_names
from .poly import Poly3, to_fraction
from .sim import BoundarySpec, DomainGrid, SimConfig, run, write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FALSIFIED = 2
EXIT_UNKNOWN = 3
EXIT_SEARCH_FAILED = 4
EXIT_BLOWUP = 5
EXIT_NO_THEOREM = 6


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config parsing helpers
# ---------------------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}") from e


def _check_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _fraction(value, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from e


def _poly_from_terms(obj, where: str) -> Poly3:
    if not isinstance(obj, list):
        raise ConfigError(f"{where} must be a list of terms")
    for rec in obj:
        if not isinstance(rec, dict) or set(rec) != {"e", "c"}:
            raise ConfigError(f"{where}: each term needs exactly the keys 'e' and 'c'")
        if isinstance(rec["c"], float):
            raise ConfigError(f"{where}: coefficients must be exact (string 'num/den' or integer)")
    try:
        return Poly3.from_json_obj(obj)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from e


def load_model(obj, where: str = "model") -> ModelSpec:
    _check_keys(obj, {"name", "params", "inline"}, set(), where)
    if "name" in obj and "inline" in obj:
        raise ConfigError(f"{where}: give either 'name' or 'inline', not both")
    if "name" in obj:
        try:
            return build_preset(obj["name"], obj.get("params"))
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"{where}: {e}") from e
    if "inline" not in obj:
        raise ConfigError(f"{where}: needs 'name' or 'inline'")
    inline = obj["inline"]
    _check_keys(inline, {"f", "g", "h", "d", "bc", "weights"}, {"f", "g", "h"}, f"{where}.inline")
    n = NonlinearityTriple(
        f=_poly_from_terms(inline["f"], f"{where}.inline.f"),
        g=_poly_from_terms(inline["g"], f"{where}.inline.g"),
        h=_poly_from_terms(inline["h"], f"{where}.inline.h"),
    )
    d_raw = inline.get("d", [1, 1, 1])
    if not isinstance(d_raw, list) or len(d_raw) != 3:
        raise ConfigError(f"{where}.inline.d must be a list of three values")
    d = DiffusionTriple(*(_fraction(x, f"{where}.inline.d") for x in d_raw))
    bc = BoundarySpec.from_json(inline["bc"]) if "bc" in inline else BoundarySpec.all_neumann()
    weights = _weights_from_json(inline.get("weights"), f"{where}.inline.weights")
    return ModelSpec(name="inline", d=d, n=n, bc=bc, weights=weights, metadata={})


def _weights_from_json(obj, where: str) -> IwscWeights | None:
    if obj is None:
        return None
    _check_keys(obj, {"lam1", "lam2"}, {"lam1", "lam2"}, where)
    try:
        return IwscWeights(_fraction(obj["lam1"], where), _fraction(obj["lam2"], where))
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


def _grid_from_json(obj, where: str = "grid") -> DomainGrid:
    _check_keys(obj, {"dim", "extents", "cells"}, {"dim", "extents", "cells"}, where)
    try:
        return DomainGrid.from_json(obj)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from e


RUN_KEYS = {
    "model", "grid", "bc", "init", "t_end", "record_dt",
    "energy", "seed", "safety", "blowup_threshold", "k1", "output", "weights",
}


def _parse_run_config(cfg: dict, seed_override: int | None):
    _check_keys(cfg, RUN_KEYS, {"model", "grid", "t_end", "record_dt"}, "run config")
    model = load_model(cfg["model"])
    if "bc" in cfg:
        try:
            model.bc = BoundarySpec.from_json(cfg["bc"])
        except ValueError as e:
            raise ConfigError(f"bc: {e}") from e
    if "weights" in cfg:
        model.weights = _weights_from_json(cfg["weights"], "weights")
    grid = _grid_from_json(cfg["grid"])
    seed = int(cfg.get("seed", 0)) if seed_override is None else seed_override
    init = cfg.get("init", {k: {"kind": "constant", "value": 1.0} for k in ("u", "v", "w")})
    _check_keys(init, {"u", "v", "w"}, set(), "init")
    energy_cfg = cfg.get("energy", {"mode": "auto", "theorem": 1})
    return model, grid, seed, init, energy_cfg


def _resolve_energy(energy_cfg: dict, model: ModelSpec, grid: DomainGrid) -> HpSpec:
    _check_keys(
        energy_cfg,
        {"mode", "theorem", "p", "theta", "sigma", "variant", "N"},
        {"mode"},
        "energy",
    )
    mode = energy_cfg["mode"]
    if mode == "explicit":
        for key in ("p", "theta", "sigma"):
            if key not in energy_cfg:
                raise ConfigError(f"energy: explicit mode needs '{key}'")
        variant = energy_cfg.get("variant", VARIANT_ABOVE)
        try:
            return HpSpec(
                p=int(energy_cfg["p"]),
                theta=_fraction(energy_cfg["theta"], "energy.theta"),
                sigma=_fraction(energy_cfg["sigma"], "energy.sigma"),
                variant=variant,
            )
        except ValueError as e:
            raise ConfigError(f"energy: {e}") from e
    if mode != "auto":
        raise ConfigError("energy.mode must be 'auto' or 'explicit'")
    from .checker import check_growth

    theorem = int(energy_cfg.get("theorem", 1))
    n_dim = int(energy_cfg.get("N", grid.dim))
    m, _ = check_growth(model.n)
    params = theorem_params(theorem, model.d, m, n_dim)
    return params.hp_spec()


def _sim_config(cfg: dict, grid: DomainGrid, seed: int, init: dict, energy: HpSpec) -> SimConfig:
    try:
        return SimConfig(
            grid=grid,
            t_end=float(cfg["t_end"]),
            record_dt=float(cfg["record_dt"]),
            energy=energy,
            init=init,
            seed=seed,
            safety=float(cfg.get("safety", 0.9)),
            blowup_threshold=float(cfg.get("blowup_threshold", 1e8)),
            k1=None if cfg.get("k1") is None else float(cfg["k1"]),
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"run config: {e}") from e


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _write_text_atomic(path: str, body: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _write_json(path: str, obj) -> None:
    _write_text_atomic(path, json.dumps(obj, indent=2) + "\n")


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows.extend(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}{i}."))
    else:
        rows.append((prefix.rstrip("."), "" if obj is None else str(obj)))
    return rows


def _emit(obj: dict, fmt: str) -> None:
    if fmt == "csv":
        print("key,value")
        for key, value in _flatten(obj):
            print(f"{key},{value}")
    else:
        print(json.dumps(obj, indent=2))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    cfg = _load_json(args.config)
    _check_keys(cfg, {"model", "weights", "isc_r", "seed"}, {"model"}, "check config")
    model = load_model(cfg["model"])
    weights = _weights_from_json(cfg.get("weights"), "weights") or model.weights
    if weights is None:
        raise ConfigError("no weighted-sum weights: give 'weights' or use a model that declares them")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    sampler = SamplerConfig(seed=seed)
    report = check_all(model.n, weights, sampler, isc_r=int(cfg.get("isc_r", 1)))
    obj = {"model": model.name, "seed": seed, "report": report.to_json()}
    _emit(obj, args.format)
    if args.out:
        _write_json(os.path.join(args.out, "report.json"), obj)
    if report.any_falsified():
        return EXIT_FALSIFIED
    if not report.all_certified():
        return EXIT_UNKNOWN
    return EXIT_OK


def _parse_triple(text: str, where: str) -> DiffusionTriple:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{where}: need three comma-separated values")
    return DiffusionTriple(*(_fraction(p.strip(), where) for p in parts))


def cmd_params(args) -> int:
    d = _parse_triple(args.d, "--d")
    if args.sweep_grid:
        obj = _feasibility_sweep(d, args.sweep_grid)
        _emit(obj, args.format)
        if args.out:
            _write_json(os.path.join(args.out, "feasibility.json"), obj)
        return EXIT_OK
    try:
        params = theorem_params(args.theorem, d, args.m, args.N, max_steps=args.budget)
    except FeasibilitySearchError as e:
        print(f"feasibility search failed: {e}", file=sys.stderr)
        return EXIT_SEARCH_FAILED
    obj = {"d": d.to_json(), "m": args.m, "N": args.N, "params": params.to_json()}
    _emit(obj, args.format)
    if args.out:
        _write_json(os.path.join(args.out, "params.json"), obj)
    return EXIT_OK


def _feasibility_sweep(d: DiffusionTriple, spec: str) -> dict:
    try:
        theta_spec, sigma_spec = spec.split(",")
        t_lo, t_hi, t_n = theta_spec.split(":")
        s_lo, s_hi, s_n = sigma_spec.split(":")
        t_vals = _linspace(Fraction(t_lo), Fraction(t_hi), int(t_n))
        s_vals = _linspace(Fraction(s_lo), Fraction(s_hi), int(s_n))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"--sweep-grid: expected 'lo:hi:n,lo:hi:n' ({e})") from e
    feasible = [
        [bool(theta_sigma_feasible(d, t, s)) for t in t_vals]
        for s in s_vals
    ]
    return {
        "d": d.to_json(),
        "theta": [float(t) for t in t_vals],
        "sigma": [float(s) for s in s_vals],
        "feasible": feasible,
    }


def _linspace(lo: Fraction, hi: Fraction, n: int) -> list[Fraction]:
    if n < 2 or hi <= lo:
        raise ConfigError("--sweep-grid: need hi > lo and at least 2 points")
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def _run_one(cfg: dict, out_dir: str, seed_override, tag: str = "") -> tuple[int, dict]:
    model, grid, seed, init, energy_cfg = _parse_run_config(cfg, seed_override)
    energy = _resolve_energy(energy_cfg, model, grid)
    sim_cfg = _sim_config(cfg, grid, seed, init, energy)
    result = run(model, sim_cfg)
    output = cfg.get("output", {})
    _check_keys(output, {"csv", "monitor"}, set(), "output")
    csv_name = output.get("csv", f"trajectory{tag}.csv")
    mon_name = output.get("monitor", f"monitor{tag}.json")
    csv_path = os.path.join(out_dir, csv_name)
    write_csv(result.records, csv_path)
    monitor_obj = {
        "model": model.name,
        "seed": seed,
        "energy": energy.to_json(),
        "monitor": result.monitor.to_json(),
    }
    _write_json(os.path.join(out_dir, mon_name), monitor_obj)
    summary = {
        "csv": csv_path,
        "monitor": os.path.join(out_dir, mon_name),
        "records": len(result.records),
        "last_time": result.last_time,
        "blowup": result.blowup,
    }
    return (EXIT_BLOWUP if result.blowup else EXIT_OK), summary


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    out_dir = args.out or "."
    if args.sweep or "sweep" in cfg:
        _check_keys(cfg, {"sweep"}, {"sweep"}, "sweep config")
        runs = cfg["sweep"]
        if not isinstance(runs, list) or not runs:
            raise ConfigError("sweep must be a nonempty list of run configs")
        workers = int(os.environ.get("RDX3_THREADS", "0")) or min(len(runs), os.cpu_count() or 1)
        codes = []
        summaries = []
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_one, rc, out_dir, args.seed, f"_{idx:03d}")
                for idx, rc in enumerate(runs)
            ]
            for fut in futures:
                code, summary = fut.result()
                codes.append(code)
                summaries.append(summary)
        _emit({"runs": summaries}, args.format)
        return max(codes)
    code, summary = _run_one(cfg, out_dir, args.seed)
    _emit(summary, args.format)
    return code


def cmd_verify(args) -> int:
    cfg = _load_json(args.config)
    out_dir = args.out or "."
    model, grid, seed, init, energy_cfg = _parse_run_config(cfg, args.seed)
    weights = model.weights
    if weights is None:
        raise ConfigError("verify needs weighted-sum weights on the model or in the config")
    sampler = SamplerConfig(seed=seed)
    report = check_all(model.n, weights, sampler)
    combined: dict = {
        "model": model.name,
        "seed": seed,
        "conditions": report.to_json(),
        "theorem": None,
        "reason": None,
        "params": None,
        "weights_used": weights.to_json(),
        "uniform_bound_expected": False,
        "simulation": None,
    }

    def finish(code: int) -> int:
        _emit(combined, args.format)
        _write_json(os.path.join(out_dir, "verify.json"), combined)
        return code

    if report.any_falsified():
        combined["reason"] = "a core condition was falsified"
        return finish(EXIT_FALSIFIED)
    if not report.all_certified():
        combined["reason"] = "a core condition is undecided"
        return finish(EXIT_UNKNOWN)

    theorem = 1 if weights.branch == "above_one" else 2
    try:
        params = theorem_params(theorem, model.d, report.growth_order, grid.dim)
    except FeasibilitySearchError as e:
        combined["reason"] = f"feasibility search failed: {e}"
        return finish(EXIT_SEARCH_FAILED)
    combined["params"] = params.to_json()

    lam1, lam2 = weights.lam1, weights.lam2
    if theorem == 2 and not params.thresholds_hold(lam1, lam2):
        # smaller weights only strengthen the below-one branch when the
        # rows still certify; retry at the thresholds themselves
        lam1 = min(lam1, params.lam1_threshold)
        lam2 = min(lam2, params.lam2_threshold)
        try:
            retry = IwscWeights(lam1, lam2)
        except ValueError:
            retry = None
        if retry is not None:
            verdict, ks = check_iwsc(model.n, retry, sampler)
            if verdict.certified:
                weights = retry
                report.iwsc = verdict
                report.iwsc_constants = ks
                report.weights = retry
                combined["conditions"] = report.to_json()
                combined["weights_used"] = retry.to_json()
    if not params.thresholds_hold(weights.lam1, weights.lam2):
        combined["reason"] = (
            "weights do not meet the thresholds for the found (theta, sigma); no theorem applies"
        )
        return finish(EXIT_NO_THEOREM)

    general_bc = set(model.bc.all_kinds()) != {"neumann"}
    combined["theorem"] = theorem + 2 if general_bc else theorem
    combined["reason"] = "hypotheses verified"
    combined["uniform_bound_expected"] = report.zero_constants() and model.bc.homogeneous()

    energy = params.hp_spec()
    k1_float = float(report.k1) if report.k1 is not None else None
    sim_cfg = _sim_config(cfg, grid, seed, init, energy)
    sim_cfg.k1 = k1_float
    result = run(model, sim_cfg)
    csv_path = os.path.join(out_dir, cfg.get("output", {}).get("csv", "trajectory.csv"))
    write_csv(result.records, csv_path)
    combined["simulation"] = {
        "csv": csv_path,
        "monitor": result.monitor.to_json(),
        "records": len(result.records),
        "last_time": result.last_time,
        "blowup": result.blowup,
    }
    return finish(EXIT_BLOWUP if result.blowup else EXIT_OK)


def cmd_models(args) -> int:
    if args.action == "list":
        obj = {"models": preset_names()}
        if args.format == "json":
            _emit(obj, "json")
        else:
            for name in preset_names():
                print(name)
        return EXIT_OK
    if not args.name:
        raise ConfigError("models show needs a model name")
    try:
        model = build_preset(args.name)
    except KeyError as e:
        raise ConfigError(str(e)) from e
    _emit(model.to_json(), args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdx3",
        description="Certificates, energy parameters and simulation for "
        "three-component reaction-diffusion systems.",
    )
    parser.add_argument("--version", action="version", version=f"rdx3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory", default=None)
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p_check = sub.add_parser("check", help="certify or falsify the structural conditions")
    p_check.add_argument("--config", required=True)
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_params = sub.add_parser("params", help="energy degree, feasible weights, thresholds")
    p_params.add_argument("--d", required=True, help="diffusion triple, e.g. 1,1,1")
    p_params.add_argument("--m", type=int, default=1, help="growth order")
    p_params.add_argument("--N", type=int, default=1, help="space dimension")
    p_params.add_argument("--theorem", type=int, choices=(1, 2), default=1)
    p_params.add_argument("--budget", type=int, default=48, help="feasibility search steps")
    p_params.add_argument(
        "--sweep-grid",
        default=None,
        help="emit a feasibility grid instead: 'tlo:thi:tn,slo:shi:sn'",
    )
    common(p_params)
    p_params.set_defaults(func=cmd_params)

    p_sim = sub.add_parser("simulate", help="integrate a model and write CSV + monitor")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--sweep", action="store_true", help="config holds a list of runs")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_verify = sub.add_parser("verify", help="check -> params -> simulate pipeline")
    p_verify.add_argument("--config", required=True)
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_models = sub.add_parser("models", help="list or show built-in models")
    p_models.add_argument("action", choices=("list", "show"))
    p_models.add_argument("name", nargs="?", default=None)
    common(p_models)
    p_models.set_defaults(func=cmd_models)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
