"""Command line front end: ``mcckf benchmark | stress | trace``.

Exit codes: 0 success, 2 configuration error, 3 filter failure.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from . import report
from .benchmark import ShotNoiseSpec, build_nav_model, monte_carlo_rmse, simulate_run
from .errors import FilterError, StepFailure
from .linalg import cholesky_lower
from .model import DEFAULT_SIGMA, KernelSpec
from .runner import FILTER_KINDS, SQRT_KINDS, iter_filter
from .stress import DEFAULT_EPSILONS, run_stress

EXIT_OK, EXIT_CONFIG, EXIT_FILTER = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    filters: List[str] = field(default_factory=lambda: list(FILTER_KINDS))
    sigma: float = DEFAULT_SIGMA
    steps: int = 300
    runs: int = 100
    seed: int = 0
    outlier_fraction: float = 0.2
    outlier_window: Tuple[int, Optional[int]] = (21, None)
    outlier_magnitude: Tuple[float, float] = (0.0, 5.0)
    force_lambda_one: bool = False
    format: str = "csv"
    output: Optional[str] = None

    def validate(self):
        if not self.filters:
            raise ConfigError("at least one filter is required")
        unknown = [f for f in self.filters if f not in FILTER_KINDS]
        if unknown:
            raise ConfigError(f"unknown filter(s) {unknown}; choose from {list(FILTER_KINDS)}")
        if not (isinstance(self.sigma, (int, float)) and self.sigma > 0):
            raise ConfigError("sigma must be positive")
        if self.steps < 1 or self.runs < 1:
            raise ConfigError("steps and runs must be at least 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        try:
            spec = self.shot_noise()
            spec.window(self.steps)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def kernel(self):
        return KernelSpec.unit() if self.force_lambda_one else KernelSpec(float(self.sigma))

    def shot_noise(self):
        start, end = self.outlier_window
        return ShotNoiseSpec(
            outlier_fraction=float(self.outlier_fraction),
            window_start=int(start),
            window_end=None if end is None else int(end),
            magnitude_range=tuple(float(v) for v in self.outlier_magnitude),
        )

    def metadata(self, command):
        meta = {
            "command": command,
            "filters": ",".join(self.filters),
            "sigma": "inf" if self.force_lambda_one else float(self.sigma),
            "steps": self.steps,
            "runs": self.runs,
            "seed": self.seed,
            "outlier_fraction": float(self.outlier_fraction),
            "outlier_window": f"{self.outlier_window[0]}:{'' if self.outlier_window[1] is None else self.outlier_window[1]}",
            "outlier_magnitude": f"{self.outlier_magnitude[0]!r}:{self.outlier_magnitude[1]!r}",
            "force_lambda_one": self.force_lambda_one,
        }
        meta.update({f"version_{k}": v for k, v in report.versions().items()})
        return meta


def _pair(text, conv, allow_open_end=False):
    parts = str(text).split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    lo, hi = parts
    try:
        if allow_open_end and hi == "":
            return conv(lo), None
        return conv(lo), conv(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text):
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_common(p, single_filter=False):
    if single_filter:
        p.add_argument("--filter", dest="filters", type=lambda s: [s], help="filter kind")
    else:
        p.add_argument("--filters", type=_csv_list, help="comma-separated filter kinds (default: all)")
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--sigma", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--outlier-fraction", type=float)
    p.add_argument("--outlier-window", type=lambda s: _pair(s, int, allow_open_end=True),
                   help="START:END step window (END may be empty for the last step)")
    p.add_argument("--outlier-magnitude", type=lambda s: _pair(s, float), help="LO:HI")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--force-lambda-one", action="store_true", default=None,
                   help="use a flat kernel so every correntropy weight is 1")


def build_parser():
    parser = argparse.ArgumentParser(prog="mcckf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("benchmark", help="Monte Carlo RMSE on the navigation benchmark")
    _add_common(p)

    p = sub.add_parser("stress", help="ill-conditioning sweep over epsilon")
    _add_common(p)
    p.add_argument("--epsilons", type=_float_list,
                   help="comma-separated epsilon values (default: 1e-2 ... 1e-9)")
    p.add_argument("--process-noise", type=float, default=1e-10)

    p = sub.add_parser("trace", help="per-step diagnostics for one filter on one run")
    _add_common(p, single_filter=True)
    p.add_argument("--run", type=int, default=0, help="run index within the seed")
    p.add_argument("--noise-free", action="store_true", help="start at the prior mean, draw no noise")
    return parser


def load_config(args):
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        extra = set(cfg) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            cfg[f.name] = v
    if args.command == "stress":
        cfg.setdefault("steps", 50)
    if args.command == "trace":
        cfg.setdefault("runs", 1)
        if "filters" not in cfg:
            cfg["filters"] = ["imcckf-apriori"]
        if len(cfg["filters"]) != 1:
            raise ConfigError("trace takes exactly one filter")
    try:
        config = RunConfig(**cfg)
        for name in ("outlier_window", "outlier_magnitude"):
            val = getattr(config, name)
            if not (isinstance(val, (list, tuple)) and len(val) == 2):
                raise ConfigError(f"{name} must have two entries")
            setattr(config, name, tuple(val))
        if isinstance(config.filters, str):
            config.filters = _csv_list(config.filters)
        return config.validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_benchmark(config):
    model = build_nav_model()
    spec = config.shot_noise()
    reports = monte_carlo_rmse(config.filters, model, spec, spec, M=config.runs, K=config.steps,
                               kernel=config.kernel(), master_seed=config.seed)
    sigma = math.inf if config.force_lambda_one else float(config.sigma)
    rows = report.benchmark_rows(reports, sigma, config.seed)
    return report.render(config.format, report.benchmark_columns(model.n), rows,
                         config.metadata("benchmark"))


STRESS_COLUMNS = ["epsilon", "filter", "status", "failed_step", "error", "max_asymmetry",
                  "min_factor_diag", "steps"]


def cmd_stress(config, epsilons, process_noise):
    outcomes = run_stress(epsilons, config.filters, steps=config.steps, kernel=config.kernel(),
                          process_noise=process_noise)
    rows = [
        {"epsilon": o.epsilon, "filter": o.filter_kind, "status": o.status,
         "failed_step": o.failed_step, "error": o.error, "max_asymmetry": o.max_asymmetry,
         "min_factor_diag": o.min_factor_diag, "steps": config.steps}
        for o in outcomes
    ]
    meta = config.metadata("stress")
    meta["process_noise"] = process_noise
    return report.render(config.format, STRESS_COLUMNS, rows, meta)


def trace_columns(model):
    return (["step", "lambda", "residual_norm", "normalized_residual_norm"]
            + [f"innov_factor_diag_{i + 1}" for i in range(model.m)]
            + [f"cov_factor_diag_{i + 1}" for i in range(model.n)]
            + ["measurement_outlier", "process_outlier"])


def trace_rows(kind, model, sim, kernel):
    rows = []
    v_out, w_out = set(sim.measurement_outliers.tolist()), set(sim.process_outliers.tolist())
    for k, (_, state, diag) in enumerate(iter_filter(kind, model, sim.measurements, kernel)):
        row = {
            "step": k, "lambda": diag.lam,
            "residual_norm": float(np.linalg.norm(diag.residual)),
            "normalized_residual_norm": (None if diag.normalized_residual is None
                                         else float(np.linalg.norm(diag.normalized_residual))),
            "measurement_outlier": k in v_out, "process_outlier": k in w_out,
        }
        for i, d in enumerate(np.diag(diag.innov_cov_factor)):
            row[f"innov_factor_diag_{i + 1}"] = float(d)
        try:
            S = state.S if kind in SQRT_KINDS else cholesky_lower(state.P)
            for i, d in enumerate(np.diag(S)):
                row[f"cov_factor_diag_{i + 1}"] = float(d)
        except FilterError:
            pass
        rows.append(row)
    return rows


def cmd_trace(config, run, noise_free):
    model = build_nav_model()
    spec = config.shot_noise()
    sim = simulate_run(model, spec, spec, config.steps, config.seed, run=run, noise_free=noise_free)
    rows = trace_rows(config.filters[0], model, sim, config.kernel())
    meta = config.metadata("trace")
    meta.update(run=run, noise_free=noise_free)
    return report.render(config.format, trace_columns(model), rows, meta)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
        if args.command == "stress":
            epsilons = DEFAULT_EPSILONS if args.epsilons is None else args.epsilons
            if not epsilons:
                raise ConfigError("epsilon list is empty")
            if any(not e > 0 for e in epsilons):
                raise ConfigError("epsilons must be positive")
            text = cmd_stress(config, epsilons, args.process_noise)
        elif args.command == "trace":
            if args.run < 0:
                raise ConfigError("run index must be nonnegative")
            text = cmd_trace(config, args.run, args.noise_free)
        else:
            text = cmd_benchmark(config)
    except ConfigError as exc:
        print(f"mcckf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StepFailure as exc:
        print(f"mcckf: filter failure: {exc}", file=sys.stderr)
        return EXIT_FILTER

    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
