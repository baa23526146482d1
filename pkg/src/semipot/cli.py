"""Command-line front end: ``catalog``, ``eval``, ``study`` and ``dump-field``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 tainted fit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import capacity, disk, estimators, fields
from .expr import ExpressionError
from .models import CATALOG, ConditioningError, classify, custom_model, get_model
from .sets import PolarSetError, parse_set

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_TAINTED = 0, 1, 2, 3

ESTIMATORS = ("hyp-dist", "green", "step", "harmonic", "extremal", "condenser")
EXTRAS = ("residual", "beurling")

DEFAULT_CONFIG = {
    "model": "hyperbolic-strip",
    "set": "disk:0,0.2",
    "z": "0",
    "w": "0",
    "t_grid": "1:200:24:geom",
    "u_grid": "1:200:24:geom",
    "solver_t_grid": "2:10:9",
    "estimators": list(ESTIMATORS) + list(EXTRAS),
    "solver": {"spacing": math.pi / 32, "eps": 1e-4, "n_samples": 100000, "method": "grid",
               "omega_floor": 1e-6, "margin": 4.0, "tol": 1e-10, "r_max": 1e6, "richardson_tol": 0.04},
    "seed": 0,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(spec: str) -> np.ndarray:
    """``a:b:n`` (arithmetic) or ``a:b:n:geom`` (geometric) into an array."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid spec {spec!r} is not a:b:n[:geom|lin]")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid spec {spec!r} has non-numeric fields") from None
    kind = parts[3] if len(parts) == 4 else "lin"
    if n < 1 or not b > a and n > 1:
        raise UsageError(f"grid spec {spec!r} must be increasing with n >= 1")
    if kind == "geom":
        if a <= 0:
            raise UsageError("geometric grids need a positive start")
        return np.geomspace(a, b, n)
    if kind != "lin":
        raise UsageError(f"unknown grid kind {kind!r}")
    return np.linspace(a, b, n)


def _complex(text) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a complex number") from None


def _model(spec):
    if isinstance(spec, dict):
        try:
            return custom_model(spec["h"], spec["h_inverse"], spec.get("name", "custom"), spec.get("nominal_lambda"))
        except KeyError as exc:
            raise UsageError(f"custom model needs {exc.args[0]!r}") from None
    try:
        return get_model(spec)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


# -- catalog ------------------------------------------------------------------

def cmd_catalog(args, out=sys.stdout) -> int:
    out.write("name\tkind\tnominal_lambda\tdomain\n")
    for m in CATALOG.values():
        lam = "unknown" if m.nominal_lambda is None else f"{m.nominal_lambda:g}"
        out.write(f"{m.name}\t{m.kind.value}\t{lam}\t{m.domain_note}\n")
    return EXIT_OK


# -- eval ---------------------------------------------------------------------

def _need(args, n):
    if len(args.values) != n:
        raise UsageError(f"{args.quantity} takes {n} positional value(s)")
    return [_complex(v) for v in args.values]


def cmd_eval(args, out=sys.stdout) -> int:
    q = args.quantity
    echo = [f"quantity={q}"]
    std = None
    if q in ("hyp-dist", "green", "rho"):
        z, w = _need(args, 2)
        echo += [f"z={z}", f"w={w}"]
        fn = {"hyp-dist": disk.hyperbolic_distance, "green": disk.green_disk, "rho": disk.pseudo_hyperbolic}[q]
        value = float(fn(z, w))
    elif q == "sigma":
        (x,) = _need(args, 1)
        echo.append(f"x={x.real}")
        value = float(disk.sigma(x.real))
    elif q in ("caph", "logcap"):
        K = _one_set(args)
        echo += [f"set={args.set[0]}", f"n_max={args.n_max}"]
        fn = capacity.hyperbolic_capacity if q == "caph" else capacity.logarithmic_capacity
        value = fn(K, n_max=args.n_max).value
    elif q == "harmonic":
        K = _one_set(args)
        if args.z is None:
            raise UsageError("harmonic needs --z")
        z = _complex(args.z)
        echo += [f"set={args.set[0]}", f"z={z}", f"method={args.method}"]
        if args.method == "wos":
            echo += [f"samples={args.samples}", f"seed={args.seed}", f"eps={args.eps}"]
            est = fields.harmonic_measure_wos(z, K, eps=args.eps, n_samples=args.samples, seed=args.seed,
                                              workers=args.workers)
            std = est.std_error
        elif args.method == "equilibrium":
            est = None
            value = capacity.harmonic_measure_via_equilibrium(z, K, n=args.n_max)
        else:
            spacing = args.spacing or 1 / 128
            echo.append(f"spacing={spacing}")
            est = fields.harmonic_measure_grid(z, K, spacing)
        if est is not None:
            value = est.value
    elif q in ("capacitance", "extremal"):
        cap, more = _condenser(args)
        echo += more
        value = cap if q == "capacitance" else fields.extremal_distance(cap)
    else:
        raise UsageError(f"unknown quantity {q!r}")
    out.write("# " + " ".join(echo) + "\n")
    out.write(f"value={value!r}\n")
    if std is not None:
        out.write(f"std_error={std!r}\n")
    return EXIT_OK


def _one_set(args):
    if not args.set or len(args.set) != 1:
        raise UsageError("exactly one --set is required")
    return parse_set(args.set[0])


def _condenser(args):
    spacing = args.spacing or (math.pi / 32 if args.model else 1 / 64)
    if args.model:
        if not args.set or len(args.set) != 1 or args.t is None:
            raise UsageError("Koenigs-coordinate condensers need --model, one --set and --t")
        model = _model(args.model)
        K = parse_set(args.set[0])
        res = fields.condenser_capacity(fields.KoenigsImage(model), fields.koenigs_plate(model, K, 0.0),
                                        fields.koenigs_plate(model, K, args.t), spacing)
        echo = [f"model={model.name}", f"set={args.set[0]}", f"t={args.t}"]
    else:
        if not args.set or len(args.set) != 2:
            raise UsageError("unit-disk condensers need two --set plates (u=0 then u=1)")
        res = fields.condenser_capacity(fields.UnitDiskDomain(), parse_set(args.set[0]), parse_set(args.set[1]), spacing)
        echo = [f"set0={args.set[0]}", f"set1={args.set[1]}"]
    echo += [f"spacing={res.spacing}", f"cap_coarse={res.cap_coarse!r}"]
    return res.cap, echo


# -- study --------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(user, dict):
        raise UsageError("config must be a JSON object")
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    unknown = set(user) - set(cfg) - {"out", "workers"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    solver = dict(cfg["solver"])
    solver.update(user.pop("solver", {}))
    cfg.update(user)
    cfg["solver"] = solver
    return cfg


def config_hash(cfg: dict) -> str:
    keep = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    return hashlib.sha256(json.dumps(keep, sort_keys=True).encode()).hexdigest()


def _write_csv(path: Path, digest: str, seed: int, report_id: str, xs, ys, flags, xname="t"):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_sha256={digest} seed={seed} estimator={report_id}\n")
        fh.write(f"{xname},raw_value,flag\n")
        for x, y, f in zip(xs, ys, flags):
            fh.write(f"{float(x)!r},{float(y)!r},{f.replace(',', ';')}\n")


def run_study(cfg: dict, out_dir: Path, workers: int = 1) -> tuple[dict, dict]:
    """Run the configured estimators and write CSV/JSON files; returns (summary, timings)."""
    model = _model(cfg["model"])
    K = parse_set(cfg["set"])
    z, w = _complex(cfg["z"]), _complex(cfg["w"])
    t_closed = parse_grid(cfg["t_grid"])
    u_grid = parse_grid(cfg["u_grid"])
    t_solver = parse_grid(cfg["solver_t_grid"])
    sol = cfg["solver"]
    seed = cfg.get("seed")
    if sol.get("method") == "wos" and seed is None:
        raise UsageError("a seed is required for walk-on-spheres runs")
    try:
        scfg = estimators.SolverConfig(spacing=float(sol["spacing"]), eps=float(sol["eps"]),
                                       n_samples=int(sol["n_samples"]), seed=int(seed or 0),
                                       omega_floor=float(sol["omega_floor"]), margin=float(sol["margin"]),
                                       tol=float(sol["tol"]), method=sol["method"], workers=workers,
                                       r_max=float(sol["r_max"]), richardson_tol=float(sol["richardson_tol"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad solver settings: {exc}") from None
    wanted = cfg["estimators"]
    bad = set(wanted) - set(ESTIMATORS) - set(EXTRAS)
    if bad:
        raise UsageError(f"unknown estimators {sorted(bad)}")
    digest = config_hash(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings = {}
    reports = {}
    series = None

    def timed(name, fn):
        t0 = time.perf_counter()
        r = fn()
        timings[name] = time.perf_counter() - t0
        return r

    for name in wanted:
        if name == "hyp-dist":
            reports[name] = timed(name, lambda: estimators.lambda_via_hyp_dist(model, z, w, t_closed))
        elif name == "green":
            reports[name] = timed(name, lambda: estimators.lambda_via_green(model, z, w, t_closed))
        elif name == "step":
            reports[name] = timed(name, lambda: estimators.lambda_via_step(model, z, u_grid, scfg.r_max))
        elif name == "harmonic":
            reports[name] = timed(name, lambda: estimators.lambda_via_harmonic(model, K, z, t_solver, scfg))
        elif name in ("extremal", "condenser"):
            if series is None:
                series = timed("condenser-solves", lambda: estimators.condenser_series(model, K, t_solver, scfg))
            fn = estimators.lambda_via_extremal if name == "extremal" else estimators.lambda_via_condenser
            reports[name] = timed(name, lambda: fn(model, K, t_solver, scfg, series=series))

    summary = {
        "config": {k: v for k, v in cfg.items() if k not in ("out", "workers")},
        "config_sha256": digest,
        "seed": seed,
        "model": {"name": model.name, "kind": model.kind.value, "nominal_lambda": model.nominal_lambda},
        "estimators": {},
    }
    for name, rep in reports.items():
        _write_csv(out_dir / f"{name}.csv", digest, seed, rep.estimator_id.value, rep.t_grid, rep.raw_values, rep.flags,
                   "u" if name == "step" else "t")
        d = rep.to_dict()
        entry = {"estimator_id": d["estimator_id"], "fitted_lambda": d["fitted_lambda"], "fit_kind": d["fit_kind"],
                 "tainted": rep.tainted, "diagnostics": d["diagnostics"]}
        if name == "condenser":
            entry["verdict"] = rep.diagnostics["verdict"]
        summary["estimators"][name] = entry

    if "residual" in wanted:
        res = timed("residual", lambda: estimators.proposition_residual(model, K, z, t_solver, scfg))
        _write_csv(out_dir / "residual.csv", digest, seed, "StepExtremalResidual", res.u_grid, res.residual, res.flags, "u")
        summary["proposition_residual"] = estimators._plain({
            "u": res.u_grid, "residual": res.residual, "tail_decreasing": res.tail_decreasing,
            "doubling_ratios": {repr(k): v for k, v in res.doubling_ratios.items()}})
    if "beurling" in wanted:
        br = timed("beurling", lambda: fields.beurling_slope_check(model, K, z, t_solver, scfg.spacing, scfg.margin))
        _write_csv(out_dir / "beurling.csv", digest, seed, "BeurlingSeries", [r.t for r in br.rows],
                   [r.value for r in br.rows], [""] * len(br.rows))
        summary["beurling"] = {"log_bound": br.bound, "bound": br.bound_exp}

    verdict = timed("classify", lambda: classify(model))
    summary["classification"] = {"verdict": verdict.verdict, "lambda_hat": verdict.lambda_hat, "step": verdict.step}
    summary["tainted"] = sorted(n for n, r in reports.items() if r.tainted)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(estimators._plain(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / "timings.json", "w", encoding="utf-8") as fh:
        json.dump(timings, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary, timings


def cmd_study(args, out=sys.stdout) -> int:
    cfg = load_config(args.config)
    for key, val in (("model", args.model), ("set", args.set and args.set[0]), ("t_grid", args.t_grid),
                     ("u_grid", args.u_grid), ("solver_t_grid", args.solver_t_grid), ("seed", args.seed)):
        if val is not None:
            cfg[key] = val
    for key, val in (("spacing", args.spacing), ("eps", args.eps), ("n_samples", args.samples),
                     ("method", args.method)):
        if val is not None:
            cfg["solver"][key] = val
    out_dir = Path(args.out or cfg.get("out") or "study-out")
    summary, _ = run_study(cfg, out_dir, workers=args.workers)
    for name, e in summary["estimators"].items():
        mark = " TAINTED" if e["tainted"] else ""
        extra = f" verdict={e['verdict']}" if "verdict" in e else ""
        out.write(f"{name:10s} fitted_lambda={e['fitted_lambda']!r}{extra}{mark}\n")
    out.write(f"classification={summary['classification']['verdict']}\n")
    out.write(f"wrote {out_dir}\n")
    return EXIT_TAINTED if summary["tainted"] else EXIT_OK


# -- dump-field ---------------------------------------------------------------

def cmd_dump_field(args, out=sys.stdout) -> int:
    if not args.out:
        raise UsageError("dump-field needs --out")
    if args.model:
        model = _model(args.model)
        K = _one_set(args)
        if args.t is None:
            raise UsageError("Koenigs-coordinate fields need --t")
        spacing = args.spacing or math.pi / 32
        res = fields.condenser_capacity(fields.KoenigsImage(model), fields.koenigs_plate(model, K, 0.0),
                                        fields.koenigs_plate(model, K, args.t), spacing)
        sol = res.solution
    elif args.set and len(args.set) == 2:
        sol = fields.condenser_capacity(fields.UnitDiskDomain(), parse_set(args.set[0]), parse_set(args.set[1]),
                                        args.spacing or 1 / 64).solution
    else:
        sol = fields.harmonic_measure_grid(0.0, _one_set(args), args.spacing or 1 / 128).solution
    sol.dump(args.out)
    out.write(f"wrote {args.out} ({sol.grid.nx}x{sol.grid.ny}, spacing {sol.grid.h!r}, energy {sol.energy!r})\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semipot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    sub.add_parser("catalog", help="list the built-in semigroup models")

    common = _Parser(add_help=False)
    common.add_argument("--model", help="catalog model name")
    common.add_argument("--set", action="append", help="plate spec, e.g. disk:0,0.2 (repeatable)")
    common.add_argument("--spacing", type=float, help="grid spacing")
    common.add_argument("--eps", type=float, default=1e-4, help="walk-on-spheres absorption shell")
    common.add_argument("--samples", type=int, help="walk-on-spheres sample count")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="output path")
    common.add_argument("--workers", type=int, default=1, help="parallel workers")

    ev = sub.add_parser("eval", parents=[common], help="evaluate one quantity")
    ev.add_argument("quantity", choices=["hyp-dist", "green", "rho", "sigma", "caph", "logcap", "harmonic",
                                         "capacitance", "extremal"])
    ev.add_argument("values", nargs="*", help="positional arguments of the quantity")
    ev.add_argument("--z", help="evaluation point")
    ev.add_argument("--t", type=float, help="semigroup time")
    ev.add_argument("--method", choices=["grid", "wos", "equilibrium"], default="grid")
    ev.add_argument("--n-max", type=int, default=64, help="top of the Fekete ladder")

    st = sub.add_parser("study", parents=[common], help="run a convergence study from a JSON config")
    st.add_argument("config", help="path to the JSON study config")
    st.add_argument("--t-grid", help="a:b:n[:geom] grid for the closed-form estimators")
    st.add_argument("--u-grid", help="a:b:n[:geom] grid for the hyperbolic step")
    st.add_argument("--solver-t-grid", help="a:b:n grid for the field-solver estimators")
    st.add_argument("--method", choices=["grid", "wos"], default=None)

    df = sub.add_parser("dump-field", parents=[common], help="write a solved potential as a text grid")
    df.add_argument("--t", type=float, help="semigroup time (Koenigs-coordinate condenser)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", None) is None and args.verb == "eval":
        args.samples = 100_000
    if getattr(args, "seed", None) is None and args.verb == "eval":
        args.seed = 0
    handlers = {"catalog": cmd_catalog, "eval": cmd_eval, "study": cmd_study, "dump-field": cmd_dump_field}
    try:
        return handlers[args.verb](args)
    except (UsageError, PolarSetError, ExpressionError, ValueError) as exc:
        sys.stderr.write(f"semipot: {exc}\n")
        return EXIT_USAGE
    except (fields.SolverError, ConditioningError, capacity.FeketeConvergenceError, ArithmeticError) as exc:
        sys.stderr.write(f"semipot: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
