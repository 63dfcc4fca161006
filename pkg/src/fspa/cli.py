"""Command-line entry point.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime or numerical error.
Data goes to stdout; the resolved configuration and diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .encoding import interlacing_check, load_csv
from .engine import (
    DEFAULT_EPSILON,
    ConvergenceTarget,
    fspa_run,
    power_iteration_run,
    schedule_total,
    theorem_bound,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionMismatch,
    FSPAError,
    GapRequired,
    KernelAnnihilation,
    NonFiniteError,
    NormViolation,
    NotSymmetricError,
)
from .harness.config import SCENARIOS, ScenarioConfig, load_config
from .harness.generators import rng_for
from .harness.results import format_value
from .harness.scenarios import run_scenario
from .spectral import HermitianOperator, dominant_rank, principal_projector

OUTPUT_ENV = "FSPA_OUTPUT_DIR"
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default; usage problems are configuration errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _echo(**resolved):
    for k, v in resolved.items():
        print(f"# {k} = {v}", file=sys.stderr)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse numbers from {text!r}") from None


def load_operator_csv(path) -> HermitianOperator:
    """Square numeric CSV, no header; symmetry checked to 1e-12 then averaged."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"operator file not found: {path}")
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}") from None
    try:
        return HermitianOperator(A, symmetry_tol=1e-12)
    except (NotSymmetricError, NonFiniteError, DimensionMismatch) as e:
        raise DataFormatError(f"{path}: {e}") from None


def parse_operator_spec(spec: str) -> HermitianOperator:
    """``diag:0.9,0.45`` (or a bare comma list) gives a diagonal operator."""
    text = spec.strip()
    if text.startswith("diag:"):
        text = text[len("diag:"):]
    values = _floats(text)
    if not values:
        raise ConfigError(f"empty operator spec {spec!r}")
    return HermitianOperator.diagonal(values)


def parse_init(spec: str, H: HermitianOperator, seed: int) -> np.ndarray:
    """Initial state: ``uniform``, ``basis:J`` (1-based), ``overlap:A``,
    ``vec:x,y,...`` or ``random``."""
    d = H.dim
    kind, _, arg = spec.partition(":")
    if kind == "uniform":
        return np.full(d, 1.0 / np.sqrt(d))
    if kind == "basis":
        j = int(arg)
        if not 1 <= j <= d:
            raise ConfigError(f"basis index {j} out of range 1..{d}")
        return np.eye(d)[:, j - 1]
    if kind == "overlap":
        a = float(arg)
        if not 0 <= a <= 1:
            raise ConfigError("overlap must lie in [0, 1]")
        V = H.spectrum.eigenvectors
        c = np.full(d, np.sqrt((1 - a) / (d - 1))) if d > 1 else np.ones(1)
        c[0] = np.sqrt(a)
        return V @ c
    if kind == "vec":
        v = np.asarray(_floats(arg))
        if v.shape != (d,):
            raise ConfigError(f"init vector has {v.size} entries, operator has dim {d}")
        return v
    if kind == "random":
        return rng_for(seed).standard_normal(d)
    raise ConfigError(f"unknown init spec {spec!r}")


def cmd_scenario(args) -> int:
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg = load_config(path, args.name)
        explicit_out = "output_dir" in _raw_keys(path)
    else:
        cfg = ScenarioConfig(args.name)
        explicit_out = False
    if args.seed is not None:
        cfg.seed = args.seed
        cfg = ScenarioConfig.from_dict(cfg.to_dict())
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out:
        cfg.output_dir = args.out
    elif not explicit_out:
        cfg.output_dir = os.environ.get(OUTPUT_ENV, cfg.output_dir)
    print("# config " + json.dumps(cfg.to_dict(), sort_keys=True), file=sys.stderr)
    result = run_scenario(cfg)
    csv_path, meta_path = result.write(cfg.output_dir)
    print(csv_path)
    print(meta_path)
    return 0


def _raw_keys(path: Path) -> set:
    from .harness.config import tomllib

    return set(tomllib.loads(path.read_text(encoding="utf-8")))


def cmd_run(args) -> int:
    if bool(args.operator) == bool(args.spec):
        raise ConfigError("give exactly one of --operator or --spec")
    H = load_operator_csv(args.operator) if args.operator else parse_operator_spec(args.spec)
    phi0 = parse_init(args.init, H, args.seed)
    S = H.spectrum
    R = dominant_rank(S)
    reference = S.vector(0) if R == 1 else principal_projector(S, R)
    target = ConvergenceTarget(reference, args.epsilon) if args.epsilon is not None else None
    _echo(
        operator=args.operator or args.spec,
        dim=H.dim,
        init=args.init,
        algo=args.algo,
        rounds=args.rounds,
        max_applications=schedule_total(args.rounds),
        epsilon=args.epsilon,
        target_mode="eigenvector" if R == 1 else f"subspace(rank={R})",
        seed=args.seed,
    )
    if args.algo == "fspa":
        trace = fspa_run(H, phi0, args.rounds, target)
    else:
        trace = power_iteration_run(H, phi0, schedule_total(args.rounds), target)
    out = sys.stdout
    out.write("oracle_count,fidelity\n")
    for k, f in zip(trace.oracle_counts, trace.fidelities):
        out.write(f"{int(k)},{format_value(float(f))}\n")
    print(f"# termination = {trace.termination.value}", file=sys.stderr)
    if args.final_state:
        Path(args.final_state).write_text(
            "\n".join(format_value(float(x)) for x in trace.states[-1]) + "\n", encoding="utf-8"
        )
    return 0


def cmd_bound(args) -> int:
    _echo(ratio=args.ratio, overlap=args.overlap, epsilon=args.epsilon)
    try:
        k = theorem_bound(args.ratio, args.overlap, args.epsilon)
    except GapRequired as e:
        raise ConfigError(f"gap required: {e}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    print(k)
    return 0


def cmd_dataset_check(args) -> int:
    path = Path(args.path)
    if not path.is_file():
        raise ConfigError(f"dataset not found: {path}")
    X = load_csv(path, args.label_column)
    _echo(path=path, label_column=args.label_column, n_samples=X.n_samples, n_features=X.n_features)
    report = interlacing_check(X)
    for line in report.lines():
        print(line)
    return 0 if report.passed else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fspa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("scenario", help="run one experiment scenario and write CSV + metadata")
    p.add_argument("name", help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--config", help="TOML scenario config")
    p.add_argument("--out", help=f"output directory (default: config value, then ${OUTPUT_ENV}, then results/)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("run", help="run FSPA or power iteration and print the fidelity trace")
    p.add_argument("--operator", help="square numeric CSV matrix without header")
    p.add_argument("--spec", help="inline operator, e.g. diag:0.9,0.45")
    p.add_argument("--init", default="uniform", help="uniform | basis:J | overlap:A | vec:x,y,... | random")
    p.add_argument("--rounds", type=int, default=10, help="FSPA rounds T; power iteration gets 2^T - 1 steps")
    p.add_argument("--epsilon", type=float, default=None, help=f"stop at fidelity 1-eps (e.g. {DEFAULT_EPSILON:g})")
    p.add_argument("--algo", choices=("fspa", "power"), default="fspa")
    p.add_argument("--final-state", help="write the final state, one amplitude per line")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bound", help="applications sufficient for fidelity >= 1 - eps")
    p.add_argument("--ratio", type=float, required=True, help="lambda_2 / lambda_1")
    p.add_argument("--overlap", type=float, required=True, help="|a_1|^2")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("dataset-check", help="validate a CSV dataset and print its interlacing report")
    p.add_argument("path")
    p.add_argument("--label-column")
    p.set_defaults(func=cmd_dataset_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NormViolation as e:
        print(f"error: norm violation: measured spectral norm {e.norm:.12g} > 1", file=sys.stderr)
        return EXIT_RUNTIME
    except (KernelAnnihilation, FSPAError, RuntimeError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
