"""Command-line entry point.

Subcommands:
  run        Monte Carlo experiment -> results.csv, curve/point CSVs, figure
  weights    print a weight law's vector, sum of squares, and DFT spectrum
  stability  eigenvalues and both stability verdicts of the recursion
  curves     curve/point CSVs (and figure) for a single replication

Configuration comes from an optional flat ``key = value`` file plus flag
overrides; the FIBENS_SEED environment variable overrides the config
seed (an explicit --seed flag beats both).  Exit codes: 0 success,
2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from .ensemble import RecursionOperator, stability_report
from .experiments import (
    BUILTIN_METHODS,
    CurveTable,
    ExperimentConfig,
    ExperimentResult,
    TargetSpec,
    emit_curves,
    run_experiment,
)
from .linalg import NumericalError
from .weights import (
    LAW_KINDS,
    PHI,
    WeightLaw,
    sum_squared_weights,
    tail_weight,
    weight_spectrum,
    weights_from_law,
)

SEED_ENV_VAR = "FIBENS_SEED"

_INT_KEYS = {
    "m_learners",
    "n_train",
    "n_test",
    "rff_features",
    "max_degree",
    "reps",
    "seed",
    "grid_points",
}
_FLOAT_KEYS = {
    "noise_sd",
    "ridge_lambda",
    "bandwidth_min",
    "bandwidth_max",
    "beta",
    "gamma",
}
_STR_KEYS = {"target", "family", "methods", "out_dir"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS

_DEFAULTS = {
    "target": "sin",
    "family": "rff",
    "m_learners": 10,
    "n_train": 200,
    "n_test": 1000,
    "noise_sd": 0.3,
    "ridge_lambda": 1e-2,
    "rff_features": 100,
    "bandwidth_min": 0.05,
    "bandwidth_max": 0.8,
    "max_degree": 30,
    "reps": 50,
    "seed": 42,
    "grid_points": 2001,
    "methods": "uniform,fibonacci,orthogonal_rb",
    "beta": 0.7,
    "gamma": 0.25,
    "out_dir": ".",
}


class ConfigError(Exception):
    """Bad configuration; maps to exit code 2."""


def fmt(x: float) -> str:
    """Shortest round-trip decimal text of a float."""
    return repr(float(x))


def parse_config_file(path: str) -> dict:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _convert(key: str, value):
    if isinstance(value, str):
        try:
            if key in _INT_KEYS:
                value = int(value)
            elif key in _FLOAT_KEYS:
                value = float(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    return value


def parse_method_token(token: str):
    """A method token: builtin name or ``law:<kind>[:param=value...]``."""
    token = token.strip()
    if token in BUILTIN_METHODS:
        return token
    if token.startswith("law:"):
        parts = token.split(":")
        kind = parts[1] if len(parts) > 1 else ""
        params = {}
        for part in parts[2:]:
            if "=" not in part:
                raise ConfigError(
                    f"malformed law parameter {part!r} in method {token!r}"
                )
            name, _, value = part.partition("=")
            try:
                params[name.strip()] = float(value)
            except ValueError as exc:
                raise ConfigError(
                    f"law parameter {name!r} must be a number, got {value!r}"
                ) from exc
        try:
            return WeightLaw(kind, params)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown method {token!r}")


def build_experiment_config(values: dict) -> ExperimentConfig:
    merged = dict(_DEFAULTS)
    merged.update(values)
    merged = {k: _convert(k, v) for k, v in merged.items()}

    if merged["reps"] < 1:
        raise ConfigError("reps must be >= 1")
    if merged["m_learners"] < 1:
        raise ConfigError("m_learners must be >= 1")
    if merged["n_train"] < 1:
        raise ConfigError("n_train must be >= 1")
    if merged["n_test"] < 1:
        raise ConfigError("n_test must be >= 1")
    if merged["grid_points"] < 2:
        raise ConfigError("grid_points must be >= 2")
    if merged["noise_sd"] < 0:
        raise ConfigError("noise_sd must be >= 0")
    if merged["ridge_lambda"] < 0:
        raise ConfigError("ridge_lambda must be >= 0")
    if merged["rff_features"] < 1:
        raise ConfigError("rff_features must be >= 1")
    if not 0 <= merged["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if not 0 < merged["bandwidth_min"] <= merged["bandwidth_max"]:
        raise ConfigError("need 0 < bandwidth_min <= bandwidth_max")
    if merged["target"] not in ("sin", "sinc"):
        raise ConfigError(f"target must be 'sin' or 'sinc', got {merged['target']!r}")
    if merged["family"] not in ("rff", "poly"):
        raise ConfigError(f"family must be 'rff' or 'poly', got {merged['family']!r}")

    methods = tuple(
        parse_method_token(tok)
        for tok in str(merged["methods"]).split(",")
        if tok.strip()
    )
    if not methods:
        raise ConfigError("methods must name at least one method")
    try:
        return ExperimentConfig(
            target=TargetSpec(merged["target"]),
            family=merged["family"],
            m_learners=merged["m_learners"],
            n_train=merged["n_train"],
            n_test=merged["n_test"],
            noise_sd=merged["noise_sd"],
            replications=merged["reps"],
            seed=merged["seed"],
            grid_points=merged["grid_points"],
            methods=methods,
            ridge_lambda=merged["ridge_lambda"],
            rff_features=merged["rff_features"],
            bandwidth_min=merged["bandwidth_min"],
            bandwidth_max=merged["bandwidth_max"],
            max_degree=merged["max_degree"],
            beta=merged["beta"],
            gamma=merged["gamma"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def collect_config_values(args) -> dict:
    """Merge config file, FIBENS_SEED, and flag overrides (flags win)."""
    values = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from exc
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def write_results_csv(path: Path, experiment: str, result: ExperimentResult) -> None:
    rows = sorted(
        (experiment, name, s.mean_test_mse, s.sd_test_mse, s.mean_ise, s.sd_ise)
        for name, s in result.methods.items()
    )
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["experiment", "model", "mean_test_mse", "sd_test_mse", "mean_ise", "sd_ise"]
        )
        for exp, model, *stats in rows:
            writer.writerow([exp, model] + [fmt(v) for v in stats])


def read_results_csv(path: Path) -> list[dict]:
    with path.open(newline="") as handle:
        return [dict(row) for row in csv.DictReader(handle)]


def write_curves_csv(path: Path, table: CurveTable) -> None:
    names = list(table.fits)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x", "f_true"] + names)
        for i in range(table.x.size):
            writer.writerow(
                [fmt(table.x[i]), fmt(table.f_true[i])]
                + [fmt(table.fits[name][i]) for name in names]
            )


def write_points_csv(path: Path, table: CurveTable) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x", "y"])
        for x, y in zip(table.train_xs, table.train_ys):
            writer.writerow([fmt(x), fmt(y)])


def print_result_table(experiment: str, result: ExperimentResult) -> None:
    header = ("experiment", "model", "mean_test_mse", "sd_test_mse", "mean_ise", "sd_ise")
    rows = [
        (
            experiment,
            name,
            f"{s.mean_test_mse:.10g}",
            f"{s.sd_test_mse:.10g}",
            f"{s.mean_ise:.10g}",
            f"{s.sd_ise:.10g}",
        )
        for name, s in sorted(result.methods.items())
    ]
    widths = [max(len(header[j]), *(len(r[j]) for r in rows)) for j in range(len(header))]
    print("  ".join(h.ljust(widths[j]) for j, h in enumerate(header)))
    for row in rows:
        print("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))


def _render_figure(table: CurveTable, cfg: ExperimentConfig, out_dir: Path) -> Path:
    from .plots import render_curves

    experiment = cfg.target.kind
    path = out_dir / f"figure_{experiment}.png"
    title = f"{experiment} target, {cfg.family} ensembles"
    render_curves(table, title, str(path))
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    values = collect_config_values(args)
    cfg = build_experiment_config(values)
    out_dir = Path(values.get("out_dir", _DEFAULTS["out_dir"]))
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.threads and args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            result = run_experiment(cfg, map_fn=pool.map)
    else:
        result = run_experiment(cfg)
    experiment = cfg.target.kind
    write_results_csv(out_dir / "results.csv", experiment, result)
    table = emit_curves(cfg, 0)
    write_curves_csv(out_dir / f"curves_{experiment}.csv", table)
    write_points_csv(out_dir / f"points_{experiment}.csv", table)
    if not args.no_figures:
        _render_figure(table, cfg, out_dir)
    print_result_table(experiment, result)
    return 0


def cmd_curves(args) -> int:
    values = collect_config_values(args)
    cfg = build_experiment_config(values)
    if not 0 <= args.rep < cfg.replications:
        raise ConfigError(f"rep must lie in [0, reps); got {args.rep}")
    out_dir = Path(values.get("out_dir", _DEFAULTS["out_dir"]))
    out_dir.mkdir(parents=True, exist_ok=True)
    experiment = cfg.target.kind
    table = emit_curves(cfg, args.rep)
    write_curves_csv(out_dir / f"curves_{experiment}.csv", table)
    write_points_csv(out_dir / f"points_{experiment}.csv", table)
    if not args.no_figures:
        _render_figure(table, cfg, out_dir)
    print(f"wrote curves_{experiment}.csv and points_{experiment}.csv to {out_dir}")
    return 0


_LAW_FLAGS = ("ratio", "mu", "sigma", "a", "b", "shape", "scale", "alpha", "beta")


def cmd_weights(args) -> int:
    if args.law not in LAW_KINDS:
        raise ConfigError(
            f"unknown law {args.law!r}; choose from {', '.join(LAW_KINDS)}"
        )
    if args.m < 1:
        raise ConfigError("m must be >= 1")
    params = {
        name: getattr(args, name)
        for name in _LAW_FLAGS
        if getattr(args, name) is not None
    }
    try:
        law = WeightLaw(args.law, params)
        wv = weights_from_law(law, args.m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"law: {args.law}  M = {args.m}")
    print("weights: [" + ", ".join(f"{w:.10g}" for w in wv.w) + "]")
    print(f"sum of squared weights: {sum_squared_weights(wv):.10g}")
    spectrum = weight_spectrum(wv)
    print("dft magnitudes: [" + ", ".join(f"{s:.10g}" for s in spectrum) + "]")
    if args.law == "fibonacci":
        print("tail diagnostics (weight of the (k+1)-th learner from the end):")
        print("  k  tail_weight     phi^-(k+2)      difference")
        for k in range(min(6, args.m)):
            t = tail_weight(args.m, k)
            limit = PHI ** -(k + 2)
            print(f"  {k}  {t:<14.10g}  {limit:<14.10g}  {t - limit:+.3e}")
    return 0


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) < 1e-15:
        return f"{z.real:.10g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.10g} {sign} {abs(z.imag):.10g}i"


def cmd_stability(args) -> int:
    report = stability_report(RecursionOperator(args.beta, args.gamma))
    lam_p, lam_m = report.eigenvalues
    print(f"beta = {args.beta:.10g}, gamma = {args.gamma:.10g}")
    print(f"lambda+ = {_fmt_complex(lam_p)}")
    print(f"lambda- = {_fmt_complex(lam_m)}")
    print(f"spectral radius = {report.spectral_radius:.10g}")
    print(
        "spectral verdict:   "
        + ("STABLE" if report.spectral_stable else "UNSTABLE")
        + "  (max |lambda| < 1)"
    )
    disc = args.beta**2 + 4.0 * args.gamma
    print(
        "inequality verdict: "
        + ("STABLE" if report.inequality_stable else "UNSTABLE")
        + f"  (beta^2 + 4*gamma = {disc:.10g} vs 4)"
    )
    if report.spectral_stable != report.inequality_stable:
        print("note: the verdicts disagree; the spectral one is authoritative")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--target", choices=("sin", "sinc"))
    parser.add_argument("--family", choices=("rff", "poly"))
    parser.add_argument("--m-learners", dest="m_learners", type=int)
    parser.add_argument("--n-train", dest="n_train", type=int)
    parser.add_argument("--n-test", dest="n_test", type=int)
    parser.add_argument("--noise-sd", dest="noise_sd", type=float)
    parser.add_argument("--ridge-lambda", dest="ridge_lambda", type=float)
    parser.add_argument("--rff-features", dest="rff_features", type=int)
    parser.add_argument("--bandwidth-min", dest="bandwidth_min", type=float)
    parser.add_argument("--bandwidth-max", dest="bandwidth_max", type=float)
    parser.add_argument("--max-degree", dest="max_degree", type=int)
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--grid-points", dest="grid_points", type=int)
    parser.add_argument("--methods", help="comma list; see README for law:* tokens")
    parser.add_argument("--beta", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibens",
        description="Structured ensemble weighting experiments for 1-d regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a Monte Carlo experiment")
    _add_experiment_flags(p_run)
    p_run.add_argument(
        "--threads", type=int, default=1, help="worker threads for replications"
    )
    p_run.set_defaults(func=cmd_run)

    p_weights = sub.add_parser("weights", help="inspect a weight law")
    p_weights.add_argument("--law", required=True)
    p_weights.add_argument("--m", type=int, required=True)
    for name in _LAW_FLAGS:
        p_weights.add_argument(f"--{name}", type=float)
    p_weights.set_defaults(func=cmd_weights)

    p_stab = sub.add_parser("stability", help="recursion stability analysis")
    p_stab.add_argument("--beta", type=float, required=True)
    p_stab.add_argument("--gamma", type=float, required=True)
    p_stab.set_defaults(func=cmd_stability)

    p_curves = sub.add_parser("curves", help="emit fit curves for one replication")
    _add_experiment_flags(p_curves)
    p_curves.add_argument("--rep", type=int, default=0)
    p_curves.set_defaults(func=cmd_curves)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def run_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run_main()
