"""Command-line front end.

    randgsc distribution --j 10 --r 15 --out results/dist.csv --plot

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import experiments as ex
from .reducers import Method, ReducerSpec
from .report import plot_result, summary_lines, write_results
from .scenario import ScenarioSpec

SUBCOMMANDS = ("single", "omega-study", "distribution", "sweep-r", "sweep-k")

DEFAULT_METHODS = {
    "single": "gaussian,select,pc,mn,clairvoyant",
    "omega-study": "gaussian,select",
    "distribution": "gaussian,select,pc",
    "sweep-r": "gaussian,select,pc,mn",
    "sweep-k": "gaussian,select,pc,mn",
}
DEFAULT_TRIALS = {"single": 1, "omega-study": 100}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    subcommand: str
    scenario: ScenarioSpec
    r: int
    methods: tuple
    trials: int
    inner: int
    seed: int
    fix_scenario: bool
    r_values: tuple = ()
    k_values: tuple = ()
    out: Optional[Path] = None
    format: str = "csv"
    emit_raw: bool = True
    workers: int = 1
    plot: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _int_list(text):
    try:
        if not isinstance(text, str):
            return tuple(int(v) for v in text)
        return tuple(int(v) for v in text.split(",") if v.strip())
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("scenario")
    g.add_argument("--n", type=int)
    g.add_argument("--j", type=int)
    g.add_argument("--k", type=int, help="training samples (default 2J)")
    g.add_argument("--r", type=int, help="reduced dimension (default J)")
    g.add_argument("--theta-deg", type=float)
    g.add_argument("--eig-db-min", type=float)
    g.add_argument("--eig-db-max", type=float)
    g.add_argument("--sigma2", type=float)
    g = common.add_argument_group("run")
    g.add_argument("--trials", type=int)
    g.add_argument("--inner", type=int, help="training sets per Omega (omega-study)")
    g.add_argument("--seed", type=int)
    g.add_argument("--methods", help="comma list of gaussian,select,pc,mn,clairvoyant")
    g.add_argument("--r-values", type=_int_list)
    g.add_argument("--k-values", type=_int_list)
    g.add_argument("--fix-scenario", type=_bool, nargs="?", const=True)
    g.add_argument("--workers", type=int)
    g = common.add_argument_group("output")
    g.add_argument("--out", type=Path)
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--emit-raw", type=_bool)
    g.add_argument("--plot", type=_bool, nargs="?", const=True,
                   help="also render a PNG figure next to --out")
    g.add_argument("--config", type=Path, help="JSON file of defaults; flags take precedence")

    parser = _Parser(prog="randgsc", description="Partially adaptive GSC Monte Carlo experiments.")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _load_config_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_config(argv) -> CliConfig:
    args = build_parser().parse_args(argv)
    if args.subcommand is None:
        raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    values = _load_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if v is not None}
    known = set(vars(args))
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    values.update(flags)
    cmd = args.subcommand

    def get(key, default):
        return values.get(key, default)

    try:
        n = int(get("n", 100))
        j = int(get("j", 10))
        k = int(get("k", 2 * j))
        r = int(get("r", j))
        theta = float(get("theta_deg", 75.0))
        trials = int(get("trials", DEFAULT_TRIALS.get(cmd, 2000)))
        inner = int(get("inner", 100))
        seed = int(get("seed", 0))
        workers = int(get("workers", 1))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))
    if not 0.0 <= theta <= 90.0:
        raise UsageError("theta-deg must be in [0,90]")
    if n < 2:
        raise UsageError("n must be >= 2")
    if not 1 <= j < n:
        raise UsageError("j must satisfy 1 <= j < n")
    if not j <= k < n:
        raise UsageError("k must satisfy j <= k < n")
    if r < 1:
        raise UsageError("r must be >= 1")
    if r > k:
        raise UsageError("r must be <= k")
    if r > n - 1:
        raise UsageError("r must be <= n-1")
    if trials < 1:
        raise UsageError("trials must be >= 1")
    if inner < 1:
        raise UsageError("inner must be >= 1")
    if seed < 0:
        raise UsageError("seed must be >= 0")
    if workers < 1:
        raise UsageError("workers must be >= 1")
    try:
        scenario = ScenarioSpec(n=n, j=j, k=k, theta_deg=theta,
                                eig_db_min=float(get("eig_db_min", 15.0)),
                                eig_db_max=float(get("eig_db_max", 25.0)),
                                sigma2=float(get("sigma2", 1.0)))
    except ValueError as exc:
        raise UsageError(str(exc))

    names = get("methods", DEFAULT_METHODS[cmd])
    if isinstance(names, str):
        names = [s.strip() for s in names.split(",") if s.strip()]
    try:
        methods = tuple(Method(s) for s in names)
    except ValueError as exc:
        raise UsageError(f"methods: {exc}")
    if not methods:
        raise UsageError("methods must not be empty")
    if cmd == "omega-study" and methods != (Method.GAUSSIAN, Method.SELECT):
        raise UsageError("omega-study runs exactly methods gaussian,select")

    try:
        r_values = _int_list(get("r_values", range(max(1, j // 2), k + 1)))
        k_values = _int_list(get("k_values", range(j + 2, min(4 * j, n - 1) + 1, 2)))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc))
    if cmd == "sweep-r" and (not r_values or min(r_values) < 1 or max(r_values) > k):
        raise UsageError(f"r-values must lie in [1, k={k}]")
    k_low = max(j, r)
    if "k_values" not in values:
        k_values = tuple(v for v in k_values if v >= k_low)
    if cmd == "sweep-k" and (not k_values or min(k_values) < k_low or max(k_values) > n - 1):
        raise UsageError(f"k-values must lie in [{k_low}, {n - 1}]")

    out = get("out", None)
    plot = _bool(get("plot", False))
    if plot and out is None:
        raise UsageError("--plot needs --out")
    return CliConfig(
        subcommand=cmd, scenario=scenario, r=r, methods=methods, trials=trials, inner=inner,
        seed=seed, fix_scenario=_bool(get("fix_scenario", cmd == "omega-study")),
        r_values=r_values, k_values=k_values, out=Path(out) if out is not None else None,
        format=get("format", "csv"), emit_raw=_bool(get("emit_raw", True)), workers=workers,
        plot=plot,
    )


def experiment_config(cfg: CliConfig) -> ex.ExperimentConfig:
    specs = tuple(ReducerSpec(m, cfg.r if m in (Method.GAUSSIAN, Method.SELECT, Method.PC) else None)
                  for m in cfg.methods)
    return ex.ExperimentConfig(scenario=cfg.scenario, methods=specs, trials=cfg.trials,
                               inner_realizations=cfg.inner,
                               redraw_scenario_per_trial=not cfg.fix_scenario,
                               master_seed=cfg.seed, workers=cfg.workers)


def run_experiment(cfg: CliConfig) -> ex.ExperimentResult:
    config = experiment_config(cfg)
    if cfg.subcommand == "single":
        return ex.single(config)
    if cfg.subcommand == "omega-study":
        return ex.omega_study(config)
    if cfg.subcommand == "distribution":
        return ex.loss_distribution(config)
    if cfg.subcommand == "sweep-r":
        return ex.sweep_r(config, cfg.r_values)
    return ex.sweep_k(config, cfg.k_values)


def run_command(cfg: CliConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    result = run_experiment(cfg)
    if cfg.subcommand == "single":
        for row in result.rows:
            print(f"trial {row.trial_index} {row.method:<12} r={row.r:<3d} "
                  f"loss={row.loss:.6f} loss_db={row.loss_db:.4f}", file=stdout)
    for line in summary_lines(result):
        print(line, file=stdout)
    if cfg.out is not None:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        written = write_results(result, cfg.out, cfg.format, cfg.emit_raw)
        if cfg.plot:
            written.append(plot_result(result, cfg.out.with_suffix(".png")))
        for path in written:
            print(f"wrote {path}", file=stdout)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"randgsc: error: {exc}", file=sys.stderr)
        return 1
    try:
        return run_command(cfg)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"randgsc: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
