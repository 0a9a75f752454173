"""Command-line entry point.

    zosmooth verify    --config cfg.json [--out DIR]
    zosmooth run       --config cfg.json --out DIR
    zosmooth sweep     --config cfg.json --out DIR
    zosmooth plot      results.csv --out plot.svg
    zosmooth constants --scheme L2 --p 2 --d 4 [--epsilon 0.05 --M2 1.5]

Exit codes: 0 success / all checks as expected, 1 check failure,
2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .estimators import (
    EstimatorConfig,
    kappa,
    smoothing_bias_bound,
    smoothing_lipschitz_grad,
    variance_bound,
)
from .experiments import DEFAULT_MULTIPLIERS, SWEEP_COLUMNS, threshold_setup, threshold_sweep
from .optimizer import STEP_RULES, RunConfig, gamma_for_target, max_noise_level, run
from .oracle import NOISE_KINDS, NoiseSpec
from .plotting import TRACE_COLUMNS, CsvFormatError, emit_plot
from .problems import PROBLEM_KINDS, make_problem
from .sampling import NORMS
from .verifier import DEFAULT_N, build_suite, run_suite, select

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
REPORT_COLUMNS = ("name", "role", "passed", "ok", "observed", "bound", "ci_halfwidth", "n",
                  "seed", "stream_id")
REQUIRED = ("problem", "d", "scheme", "epsilon")
PROBLEM_PARAMS = ("b", "radius", "start_distance", "x_star", "x0", "a", "c")


def fmt(v) -> str:
    """17 significant digits for floats so reruns are byte-identical."""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass
class ExperimentConfig:
    problem: str = "nonsmooth_norm"
    d: int = 4
    scheme: str = "L2"
    epsilon: float = 0.05
    p: int = 2
    problem_params: dict = field(default_factory=lambda: {"b": 0.5})
    noise: str = "uniform"
    delta: Optional[float] = None
    delta_multiplier: float = 1.0
    multipliers: list = field(default_factory=lambda: list(DEFAULT_MULTIPLIERS))
    seed: int = 0
    seeds: Optional[list] = None
    repeats: int = 10
    batch: int = 1
    N: Optional[int] = None
    gamma: Optional[float] = None
    step_rule: str = "decreasing_R_sigma"
    suite: str = "full"
    checks: Optional[list] = None
    n: dict = field(default_factory=dict)
    output: str = "results"

    @property
    def seed_list(self) -> list:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return list(range(self.seed, self.seed + self.repeats))

    def make_problem(self):
        return make_problem(self.problem, self.d, **self.problem_params)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def parse_config(text: str, command: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate a JSON config, filling documented defaults.

    ``problem``, ``d``, ``scheme`` and ``epsilon`` are required for every
    command except ``verify``. Errors raise ConfigError naming the key.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<json>", "top level must be an object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    if command != "verify":
        for key in REQUIRED:
            if key not in raw:
                raise ConfigError(key, "missing required key")
    cfg = ExperimentConfig(**raw)

    if cfg.problem not in PROBLEM_KINDS:
        raise ConfigError("problem", f"unknown problem {cfg.problem!r}; expected one of {PROBLEM_KINDS}")
    if not isinstance(cfg.d, int) or isinstance(cfg.d, bool) or cfg.d < 1:
        raise ConfigError("d", "must be a positive integer")
    if cfg.scheme not in NORMS:
        raise ConfigError("scheme", f"unknown scheme {cfg.scheme!r}; expected one of {NORMS}")
    if not _is_num(cfg.epsilon) or cfg.epsilon <= 0:
        raise ConfigError("epsilon", "must be a positive number")
    if cfg.p not in (1, 2):
        raise ConfigError("p", "must be 1 or 2")
    if not isinstance(cfg.problem_params, dict):
        raise ConfigError("problem_params", "must be an object")
    for key in cfg.problem_params:
        if key not in PROBLEM_PARAMS:
            raise ConfigError(f"problem_params.{key}", "unknown problem parameter")
    if cfg.noise not in NOISE_KINDS:
        raise ConfigError("noise", f"unknown noise kind {cfg.noise!r}; expected one of {NOISE_KINDS}")
    if cfg.delta is not None and (not _is_num(cfg.delta) or cfg.delta < 0):
        raise ConfigError("delta", "must be a non-negative number")
    if not _is_num(cfg.delta_multiplier) or cfg.delta_multiplier < 0:
        raise ConfigError("delta_multiplier", "must be a non-negative number")
    if not isinstance(cfg.multipliers, list) or not all(_is_num(m) and m >= 0 for m in cfg.multipliers):
        raise ConfigError("multipliers", "must be a list of non-negative numbers")
    if not isinstance(cfg.repeats, int) or cfg.repeats < 1:
        raise ConfigError("repeats", "must be an integer >= 1")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError("seed", "must be a non-negative integer")
    if cfg.seeds is not None and (not isinstance(cfg.seeds, list) or not cfg.seeds
                                  or not all(isinstance(s, int) and s >= 0 for s in cfg.seeds)):
        raise ConfigError("seeds", "must be a non-empty list of non-negative integers")
    if not isinstance(cfg.batch, int) or cfg.batch < 1:
        raise ConfigError("batch", "must be an integer >= 1")
    if cfg.N is not None and (not isinstance(cfg.N, int) or cfg.N < 0):
        raise ConfigError("N", "must be a non-negative integer")
    if cfg.gamma is not None and (not _is_num(cfg.gamma) or cfg.gamma <= 0):
        raise ConfigError("gamma", "must be a positive number")
    if cfg.step_rule not in STEP_RULES:
        raise ConfigError("step_rule", f"unknown step rule {cfg.step_rule!r}")
    if cfg.suite not in ("full", "negative"):
        raise ConfigError("suite", "must be 'full' or 'negative'")
    if cfg.checks is not None and not (isinstance(cfg.checks, list) and all(isinstance(c, str) for c in cfg.checks)):
        raise ConfigError("checks", "must be a list of check names")
    if not isinstance(cfg.n, dict) or any(k not in DEFAULT_N for k in cfg.n):
        raise ConfigError("n", f"keys must be among {sorted(DEFAULT_N)}")
    if any(not isinstance(v, int) or v < 2 for v in cfg.n.values()):
        raise ConfigError("n", "sample counts must be integers >= 2")
    return cfg


def _write_csv(path: Path, columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])


def cmd_verify(cfg: ExperimentConfig, out_dir) -> int:
    """Run the check suite; exit 0 iff every positive passes and every negative control fails."""
    checks = select(build_suite(cfg.n, b=cfg.problem_params.get("b", 0.5)), cfg.checks, cfg.suite)
    reports = run_suite(checks, cfg.seed)
    rows = [{"name": r.name, "role": r.role, "passed": r.passed, "ok": r.ok, "observed": r.observed,
             "bound": r.bound, "ci_halfwidth": r.ci_halfwidth, "n": r.n, "seed": r.seed,
             "stream_id": r.stream_id} for r in reports]
    path = Path(out_dir) / "verify_report.csv"
    _write_csv(path, REPORT_COLUMNS, rows)
    for r in reports:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status}  {r.name:<44} observed={r.observed:.6g} bound={r.bound:.6g} "
              f"ci={r.ci_halfwidth:.3g} n={r.n} [{r.role}]")
    bad = sum(not r.ok for r in reports)
    print(f"{len(reports) - bad}/{len(reports)} checks as expected; report: {path}")
    return EXIT_OK if bad == 0 else EXIT_FAIL


def _estimator(cfg):
    return EstimatorConfig(cfg.scheme, cfg.gamma, cfg.batch, cfg.p)


def cmd_run(cfg: ExperimentConfig, out_dir) -> int:
    """One run; writes trace.csv (iter, gap, calls)."""
    problem = cfg.make_problem()
    th = threshold_setup(problem, cfg.scheme, cfg.epsilon, cfg.batch, cfg.gamma)
    delta = cfg.delta if cfg.delta is not None else cfg.delta_multiplier * th.delta_max
    noise = NoiseSpec(cfg.noise if delta > 0 else "none", delta)
    N = th.N if cfg.N is None else cfg.N
    tr = run(problem, RunConfig(cfg.epsilon, N, cfg.step_rule, cfg.seed),
             _estimator(cfg).with_gamma(th.gamma), noise)
    rows = [{"iter": k, "gap": float(g), "calls": int(c)} for k, (g, c) in enumerate(zip(tr.gaps, tr.calls))]
    path = Path(out_dir) / "trace.csv"
    _write_csv(path, TRACE_COLUMNS, rows)
    print(f"gamma={fmt(th.gamma)} delta={fmt(delta)} N={N} final_gap={fmt(tr.final_gap)} "
          f"oracle_calls={tr.oracle_calls} -> {path}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out_dir) -> int:
    """Δ-multiplier × seed grid; writes sweep.csv."""
    problem = cfg.make_problem()
    rows = threshold_sweep(problem, cfg.scheme, cfg.epsilon, cfg.multipliers, cfg.seed_list,
                           cfg.batch, cfg.noise, cfg.N, cfg.gamma, cfg.step_rule)
    path = Path(out_dir) / "sweep.csv"
    _write_csv(path, SWEEP_COLUMNS, rows)
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_constants(args) -> int:
    s, p, d = args.scheme, args.p, args.d
    out = {"kappa": kappa(s, p, d)}
    const = args.L if args.setting == "smooth" else args.M2
    gamma = args.gamma if args.gamma is not None else gamma_for_target(s, args.setting, args.epsilon, const, d)
    dmax = max_noise_level(s, args.setting, args.M2, gamma, d, args.epsilon)
    out.update({
        "gamma": gamma,
        "delta_max": dmax,
        "variance_bound_delta0": variance_bound(s, p, d, args.M2, 0.0, gamma),
        "variance_bound_delta_max": variance_bound(s, p, d, args.M2, dmax, gamma),
        "smoothing_bias_bound": smoothing_bias_bound(s, args.setting, const, gamma, d),
        "lipschitz_grad": smoothing_lipschitz_grad(s, args.M2, gamma, d),
    })
    for k, v in out.items():
        print(f"{k} = {fmt(float(v))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zosmooth", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run the Monte Carlo check suite")
    v.add_argument("--config", required=True)
    v.add_argument("--out", default=None, help="output directory (default: config 'output')")
    for name, helptext in (("run", "single optimization run"), ("sweep", "noise-threshold sweep")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
    pl = sub.add_parser("plot", help="render a trace or sweep CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--out", required=True)
    c = sub.add_parser("constants", help="print closed-form constants")
    c.add_argument("--scheme", required=True, choices=NORMS)
    c.add_argument("--p", type=int, required=True, choices=(1, 2))
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--epsilon", type=float, default=0.05)
    c.add_argument("--M2", type=float, default=1.0)
    c.add_argument("--L", type=float, default=1.0)
    c.add_argument("--setting", choices=("nonsmooth", "smooth"), default="nonsmooth")
    c.add_argument("--gamma", type=float, default=None)
    return ap


COMMANDS = {"verify": cmd_verify, "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "constants":
            return cmd_constants(args)
        if args.command == "plot":
            try:
                emit_plot(args.csv, args.out)
            except CsvFormatError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            print(f"wrote {args.out}")
            return EXIT_OK
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
        cfg = parse_config(text, args.command)
        out = args.out if args.out is not None else cfg.output
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
