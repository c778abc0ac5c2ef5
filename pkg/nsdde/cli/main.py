"""Command-line front end: simulate, converge, check-assumptions, list-models.

Exit codes: 0 success, 1 validation error (nothing written), 2 runtime
failure (files already written are renamed `*.failed`).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# Add project root to path (go up from nsdde/cli/main.py to project root)
ROOT = Path(__file__).resolve().parents[2]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

import numpy as np  # noqa: E402
from pydantic import ValidationError  # noqa: E402

from nsdde.cli.config import RunConfig  # noqa: E402
from nsdde.cli.csv_writer import CsvOutputs, witness_json  # noqa: E402
from nsdde.errors import (  # noqa: E402
    InvalidParameterError,
    ModeMismatchError,
    NotFittableError,
    NsddeRuntimeFailure,
    NsddeValidationError,
)
from nsdde.experiment import strong_error_study  # noqa: E402
from nsdde.experiment.presets import list_presets  # noqa: E402
from nsdde.experiment.runner import path_chunks, run_chunks  # noqa: E402
from nsdde.jump_scheme import CompensatorOracle, simulate_jump  # noqa: E402
from nsdde.model import ASSUMPTIONS, Box, InitialSegment, audit_assumption, declared_assumptions  # noqa: E402
from nsdde.model.registry import build_model, list_models  # noqa: E402
from nsdde.noise import MarkMeasure, sample_brownian_batch, sample_jumps  # noqa: E402
from nsdde.scheme import PathRecord, TimeGrid, simulate  # noqa: E402
from nsdde.truncation import BoundFunction, TruncationRule, build_rule  # noqa: E402
from utils.env import default_output_dir  # noqa: E402
from utils.logging_setup import configure_logging  # noqa: E402


logger = logging.getLogger("NsddeCli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

LEVEL_FIELDS = [
    "level", "m", "delta", "g_delta", "radius", "n_samples", "mode", "q",
    "error_moment", "root_error", "std_err", "seed",
]
RATE_FIELDS = [
    "slope", "ci_lo", "ci_hi", "r2", "moment_slope", "moment_ci_lo", "moment_ci_hi",
    "theory_moment_order", "delta", "g_delta", "radius", "seed",
]
MOMENT_FIELDS = ["m", "delta", "g_delta", "radius", "p", "moment", "std_err", "seed"]
AUDIT_FIELDS = ["assumption", "n_samples", "n_evaluations", "worst_ratio", "passed", "witness", "delta", "g_delta", "radius", "seed"]


class UsageError(InvalidParameterError):
    """Bad command-line syntax."""


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs) -> None:
        # --p, --param and --paths must not abbreviate into each other
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e


def _float_pair(text: str) -> Tuple[float, float]:
    parts = text.split(",")
    try:
        lo, hi = (float(part) for part in parts)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got '{text}'") from e
    return lo, hi


def _key_value(text: str) -> Tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got '{text}'")
    try:
        return key.strip(), float(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"parameter {key.strip()} needs a numeric value, got '{value}'") from e


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsdde", description="Truncated Euler-Maruyama for neutral stochastic delay equations.")
    parser.add_argument("--log-level", help="logging level (default: NSDDE_LOG_LEVEL or INFO)")

    model = _Parser(add_help=False)
    model.add_argument("--model", help="registry model id (see list-models)")
    model.add_argument("--param", dest="params", action="append", type=_key_value, metavar="NAME=VALUE")
    model.add_argument("--driver", choices=["brownian", "jump"])
    model.add_argument("--intensity", type=float, help="jump intensity λ̄")
    model.add_argument("--mark-dist", help="point:c | gauss:s | uniform:a,b")
    model.add_argument("--seed", type=int)
    model.add_argument("--out", type=Path, help="output directory (default: NSDDE_OUTPUT_DIR or ./results)")

    scheme = _Parser(add_help=False)
    scheme.add_argument("--tau", type=float)
    scheme.add_argument("--T", type=float)
    scheme.add_argument("--epsilon", type=float, help="gauge exponent ε")
    scheme.add_argument("--regime", choices=["baseline", "improved"])
    scheme.add_argument("--gauge-mode", choices=["brownian", "jump"])
    scheme.add_argument("--p", type=float, help="moment exponent p > 2 (jump gauge)")
    scheme.add_argument("--xi", type=float, help="constant initial segment value")

    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", parents=[model, scheme], help="simulate truncated EM paths")
    sim.add_argument("--m", type=int, help="steps per delay, Δ = τ/m")
    sim.add_argument("--paths", type=int)

    conv = commands.add_parser("converge", parents=[model, scheme], help="coupled strong-error study")
    conv.add_argument("--levels", type=_int_list, help="comma-separated m values, e.g. 8,16,32")
    conv.add_argument("--ref", type=int, help="reference m_ref")
    conv.add_argument("--q", type=float)
    conv.add_argument("--paths", type=int)
    conv.add_argument("--mode", choices=["at-T", "uniform"])
    conv.add_argument("--moment-p", type=float)
    conv.add_argument("--bootstrap", type=int, help="bootstrap resamples for the slope CI")
    conv.add_argument("--preset", choices=list_presets())

    check = commands.add_parser("check-assumptions", parents=[model, scheme], help="audit coefficient assumptions")
    check.add_argument("--assumption", dest="assumptions", action="append", choices=list(ASSUMPTIONS))
    check.add_argument("--all", dest="all_assumptions", action="store_true")
    check.add_argument("--box", type=_float_pair, metavar="LO,HI")
    check.add_argument("--samples", type=int)
    check.add_argument("--q", type=float)
    check.add_argument("--delta", type=float, help="step Δ whose truncation radius A4/A4'/B2 use")

    commands.add_parser("list-models", help="print the registry model ids")
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    if args.get("params"):
        args["params"] = dict(args["params"])
    return RunConfig(**{k: v for k, v in args.items() if v is not None})


def _echo(rule: Optional[TruncationRule], seed: int) -> Dict[str, object]:
    if rule is None:
        return {"delta": None, "g_delta": None, "radius": None, "seed": seed}
    delta, gauge, radius = rule.describe()
    return {"delta": delta, "g_delta": gauge, "radius": radius, "seed": seed}


def _resolve_model(config: RunConfig):
    registered = build_model(config.setting("model"), config.params)
    coefficients, assumptions = registered.coefficients, registered.assumptions
    driver = config.resolved_driver or coefficients.driver
    if driver != coefficients.driver:
        raise ModeMismatchError(f"driver '{driver}' requested for the {coefficients.driver}-driven model '{registered.model_id}'")
    if config.p is not None:
        assumptions = replace(assumptions, p=config.p)
    if config.q is not None:
        assumptions = replace(assumptions, q=config.q)
    measure = MarkMeasure.parse(config.setting("intensity"), config.setting("mark_dist")) if driver == "jump" else None
    return registered, coefficients, assumptions, measure


def _simulate(config: RunConfig, outputs: CsvOutputs) -> str:
    registered, coefficients, assumptions, measure = _resolve_model(config)
    seed, n_paths = config.setting("seed"), config.setting("paths")
    grid = TimeGrid(config.setting("tau"), config.setting("T"), config.setting("m"))
    bound = BoundFunction.for_model(coefficients, measure)
    rule = build_rule(
        grid.delta,
        config.setting("epsilon"),
        bound,
        mode=coefficients.driver,
        p=assumptions.p,
        regime=config.setting("regime"),
    )
    xi = InitialSegment.constant(grid.tau, [config.setting("xi")] * coefficients.state_dim)
    logger.info(f"Simulating {n_paths} paths of '{registered.model_id}': Δ={rule.delta:.6g}, g(Δ)={rule.gauge:.6g}, r={rule.radius:.6g}")

    if measure is None:
        def run(indices: np.ndarray) -> PathRecord:
            noise = sample_brownian_batch(seed, indices, grid.T, grid.delta, coefficients.noise_dim)
            return simulate(coefficients, rule, grid, xi, noise)
    else:
        oracle = CompensatorOracle.for_rule(coefficients, rule, measure)

        def run(indices: np.ndarray) -> PathRecord:
            jumps = [sample_jumps(seed, int(i), grid.T, measure) for i in indices]
            return simulate_jump(coefficients, rule, grid, xi, jumps, oracle)

    records = run_chunks(run, path_chunks(n_paths))

    n = coefficients.state_dim
    fields = ["path", "k", "t", *[f"y{i}" for i in range(n)], "delta", "g_delta", "radius", "seed"]
    if measure is not None:
        fields.append("jumps_in_interval")
    echo = _echo(rule, seed)
    steps = range(-grid.m, grid.M + 1)

    def rows():
        for record in records:
            for row in range(record.n_paths):
                for k, t in zip(steps, record.times):
                    values = record.at(k)[row]
                    line = {"path": int(record.path_indices[row]), "k": k, "t": float(t)}
                    line.update({f"y{i}": float(values[i]) for i in range(n)})
                    line.update(echo)
                    if record.jump_counts is not None:
                        # jumps in (t_{k-1}, t_k]
                        line["jumps_in_interval"] = int(record.jump_counts[row, k - 1]) if k >= 1 else 0
                    yield line

    path = outputs.write("paths.csv", fields, rows())
    terminal = np.concatenate([np.linalg.norm(r.terminal, axis=-1) for r in records])
    return f"simulate: {n_paths} paths of {registered.model_id} (Δ={rule.delta:.6g}, r={rule.radius:.6g}), max |Y(T)|={terminal.max():.6g} -> {path}"


def _converge(config: RunConfig, outputs: CsvOutputs) -> str:
    study = config.study_config()
    report = strong_error_study(study)
    seed = study.seed

    outputs.write(
        "levels.csv",
        LEVEL_FIELDS,
        ({**asdict(level), "seed": seed} for level in report.levels),
    )
    outputs.write(
        "moments.csv",
        MOMENT_FIELDS,
        ({**asdict(moment), "seed": seed} for moment in report.moments),
    )
    if not report.fittable:
        raise NotFittableError(report.fit_error or "rate fit failed")

    fit = report.fit
    outputs.write(
        "rate.csv",
        RATE_FIELDS,
        [
            {
                "slope": fit.slope,
                "ci_lo": fit.ci_lo,
                "ci_hi": fit.ci_hi,
                "r2": fit.r2,
                "moment_slope": fit.moment_slope,
                "moment_ci_lo": fit.moment_ci[0],
                "moment_ci_hi": fit.moment_ci[1],
                "theory_moment_order": report.theory_moment_order,
                **_echo(report.reference, seed),
            }
        ],
    )
    return (
        f"converge: slope {fit.slope:.4f} (95% CI {fit.ci_lo:.4f}..{fit.ci_hi:.4f}, R²={fit.r2:.4f}) "
        f"moment slope {fit.moment_slope:.4f} (theory {report.theory_moment_order:.4f}) "
        f"over levels {study.sorted_levels} -> {outputs.directory}"
    )


def _check_assumptions(config: RunConfig, outputs: CsvOutputs) -> str:
    registered, coefficients, assumptions, measure = _resolve_model(config)
    seed, samples = config.setting("seed"), config.setting("samples")
    lo, hi = config.setting("box")
    box = Box.square(lo, hi, coefficients.state_dim)

    rule = None
    if config.delta is not None:
        bound = BoundFunction.for_model(coefficients, measure)
        rule = build_rule(
            config.delta,
            config.setting("epsilon"),
            bound,
            mode=coefficients.driver,
            p=assumptions.p,
            regime=config.setting("regime"),
        )

    selected = declared_assumptions(coefficients, assumptions, rule is not None) if config.all_assumptions else config.assumptions
    if not selected:
        raise InvalidParameterError(f"model '{registered.model_id}' declares no auditable assumption")
    radius = rule.radius if rule is not None else None
    reports = [
        audit_assumption(a, coefficients, assumptions, box, samples, seed, radius=radius, measure=measure)
        for a in selected
    ]

    echo = _echo(rule, seed)
    outputs.write(
        "audit.csv",
        AUDIT_FIELDS,
        (
            {
                "assumption": r.assumption,
                "n_samples": r.n_samples,
                "n_evaluations": r.n_evaluations,
                "worst_ratio": r.worst_ratio,
                "passed": r.passed,
                "witness": witness_json(r.witness),
                **echo,
            }
            for r in reports
        ),
    )
    passed = sum(r.passed for r in reports)
    failing = [r.assumption for r in reports if not r.passed]
    detail = f"; failing: {', '.join(failing)}" if failing else ""
    return f"check-assumptions: {passed}/{len(reports)} passed for {registered.model_id} on [{lo}, {hi}]{detail}"


def _list_models(config: RunConfig, outputs: CsvOutputs) -> str:
    return "\n".join(list_models())


HANDLERS: Dict[str, Callable[[RunConfig, CsvOutputs], str]] = {
    "simulate": _simulate,
    "converge": _converge,
    "check-assumptions": _check_assumptions,
    "list-models": _list_models,
}


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(x) for x in item.get("loc", ()))
        parts.append(f"{where}: {item['msg']}" if where else item["msg"])
    return "; ".join(parts)


def _diagnose(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except ValidationError as e:
        _diagnose(_validation_message(e))
        return EXIT_VALIDATION
    except NsddeValidationError as e:
        _diagnose(str(e))
        return EXIT_VALIDATION

    try:
        configure_logging(config.log_level)
    except RuntimeError as e:
        _diagnose(str(e))
        return EXIT_VALIDATION

    outputs = CsvOutputs(config.out or default_output_dir())
    try:
        summary = HANDLERS[config.command](config, outputs)
    except ValidationError as e:
        outputs.discard()
        _diagnose(_validation_message(e))
        return EXIT_VALIDATION
    except NsddeValidationError as e:
        outputs.discard()
        _diagnose(str(e))
        return EXIT_VALIDATION
    except NsddeRuntimeFailure as e:
        failed = outputs.mark_failed()
        if failed:
            logger.warning(f"Partial output kept as {', '.join(str(p) for p in failed)}")
        _diagnose(str(e))
        return EXIT_RUNTIME
    except RuntimeError as e:
        # environment configuration (NSDDE_THREADS, NSDDE_CHUNK_PATHS)
        outputs.discard()
        _diagnose(str(e))
        return EXIT_VALIDATION

    print(summary)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
