"""Command-line surface: generate traces, train, sweep, plot, reproduce.

Exit codes are stable across subcommands: 0 success, 1 I/O failure, 2 bad
usage or configuration, 3 data error (single-class training data, malformed
input files, insufficient vehicles).  Diagnostics go to standard error;
results and file paths go to standard output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset_io import (
    Dataset,
    InsufficientVehiclesError,
    TraceFormatError,
    derive_seed,
    read_examples_csv,
    read_trace_csv,
    sample_examples,
    write_examples_csv,
    write_trace_csv,
)
from .eval_pipeline import (
    BoundaryLine,
    EmptyTestError,
    VerticalBoundary,
    boundary_report,
    format_report,
    report_to_csv,
    sweep_with_model,
    train_position_model,
)
from .plotting import PlotSpec, render_svg
from .svm import (
    DimensionMismatchError,
    KernelSpec,
    ModelFormatError,
    SingleClassError,
    SvmModel,
    TrainConfig,
    UnsupportedKernelError,
    load_model,
    save_model,
)
from .traffic_sim import ConfigError, ScenarioConfig, generate_trace

__all__ = ["main", "DEFAULT_SEED", "DEFAULT_TEST_SIZES"]

# Documented default seed for the reproduction pipeline (`run-paper`).
DEFAULT_SEED = 7
DEFAULT_TEST_SIZES = "10:100:10"
DEFAULT_TRAIN_SIZE = 400


class _UsageError(Exception):
    pass


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Scenario configuration assembly (defaults <- config file <- flags)
# ---------------------------------------------------------------------------

_SCALAR_FIELDS = {
    "num_vehicles": int,
    "num_steps": int,
    "junction_x": float,
    "route2_probability": float,
    "spawn_spacing": float,
    "lane_noise": float,
    "rng_seed": int,
}


def _parse_pair(raw: str, field: str) -> tuple[float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(field, f"expected two comma-separated numbers, got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(field, f"non-numeric value {raw!r}") from None


def load_scenario_file(path: str | Path) -> dict:
    """Parse the key=value scenario format ('#' comments, blank lines ok)."""
    values: dict = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("config", f"line {line_no}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key in _SCALAR_FIELDS:
            try:
                values[key] = _SCALAR_FIELDS[key](raw)
            except ValueError:
                raise ConfigError(key, f"line {line_no}: non-numeric value {raw!r}") from None
        elif key == "lane_y":
            parts = [p.strip() for p in raw.split(",")]
            if len(parts) != 3:
                raise ConfigError("lane_y", f"line {line_no}: expected three ordinates")
            try:
                values[key] = tuple(float(p) for p in parts)
            except ValueError:
                raise ConfigError("lane_y", f"line {line_no}: non-numeric value") from None
        elif key in ("ramp_end", "speed_range"):
            values[key] = _parse_pair(raw, key)
        else:
            raise ConfigError(key, f"line {line_no}: unknown field")
    return values


def _build_scenario(args: argparse.Namespace) -> ScenarioConfig:
    values: dict = {}
    if args.config:
        values.update(load_scenario_file(args.config))
    overrides = {
        "num_vehicles": args.vehicles,
        "num_steps": args.steps,
        "route2_probability": args.route2_prob,
        "spawn_spacing": args.spacing,
        "junction_x": args.junction_x,
        "lane_noise": args.lane_noise,
        "rng_seed": args.seed,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if args.speed_range is not None:
        values["speed_range"] = _parse_pair(args.speed_range, "speed_range")
    if args.ramp_end is not None:
        values["ramp_end"] = _parse_pair(args.ramp_end, "ramp_end")
    if args.lane_y is not None:
        parts = [p.strip() for p in args.lane_y.split(",")]
        if len(parts) != 3:
            raise ConfigError("lane_y", "expected three comma-separated ordinates")
        try:
            values["lane_y"] = tuple(float(p) for p in parts)
        except ValueError:
            raise ConfigError("lane_y", "non-numeric ordinate") from None
    return ScenarioConfig(**values)


def _kernel_from_args(args: argparse.Namespace) -> KernelSpec:
    family = args.kernel
    try:
        if family == "linear":
            for flag, value in (("gamma", args.gamma), ("coef0", args.coef0), ("degree", args.degree)):
                if value is not None:
                    raise _UsageError(f"--{flag} does not apply to the linear kernel")
            return KernelSpec.linear()
        if family == "rbf":
            if args.coef0 is not None or args.degree is not None:
                raise _UsageError("--coef0/--degree do not apply to the rbf kernel")
            return KernelSpec.rbf(gamma=args.gamma)
        if family == "polynomial":
            return KernelSpec.polynomial(
                degree=args.degree if args.degree is not None else 3,
                gamma=args.gamma,
                coef0=args.coef0 if args.coef0 is not None else 0.0,
            )
        if family == "sigmoid":
            if args.degree is not None:
                raise _UsageError("--degree does not apply to the sigmoid kernel")
            return KernelSpec.sigmoid(
                gamma=args.gamma,
                coef0=args.coef0 if args.coef0 is not None else 0.0,
            )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    raise _UsageError(f"unknown kernel {family!r}")


def parse_test_sizes(raw: str) -> list[int]:
    """Accept '10', '10,20,30', or 'start:stop:step' (stop inclusive)."""
    try:
        if ":" in raw:
            parts = [int(p) for p in raw.split(":")]
            if len(parts) != 3:
                raise ValueError("range needs start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError("range needs stop >= start and step > 0")
            return list(range(start, stop + 1, step))
        return [int(p) for p in raw.split(",")]
    except ValueError as exc:
        raise _UsageError(f"bad --test-sizes value {raw!r}: {exc}") from exc


def _boundary_lines(model: SvmModel) -> list[str]:
    if model.kernel.family != "linear":
        return []
    boundary = boundary_report(model)
    if isinstance(boundary, BoundaryLine):
        return [f"boundary: y = {boundary.slope:.6g}x + {boundary.intercept:.6g}"]
    if isinstance(boundary, VerticalBoundary):
        return [f"boundary: vertical at x = {boundary.x:.6g}"]
    return []


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_generate(args: argparse.Namespace) -> int:
    config = _build_scenario(args)
    trace = generate_trace(config)
    write_trace_csv(trace, args.output)
    print(f"wrote {config.num_vehicles} vehicles, {len(trace.points)} points to {args.output}")
    return 0


def _train_model(args: argparse.Namespace):
    trace = read_trace_csv(args.trace)
    kernel = _kernel_from_args(args)
    cfg = TrainConfig(C=args.C, tol=args.tol, max_passes=args.max_passes, rng_seed=args.seed)
    try:
        cfg.validate()
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    train_ds = sample_examples(trace, args.train_size, args.seed)
    model = train_position_model(list(train_ds.examples), kernel, cfg)
    return trace, train_ds, model


def _cmd_train(args: argparse.Namespace) -> int:
    _, _, model = _train_model(args)
    save_model(model, args.output)
    summary = model.summary
    print(f"support vectors: {summary.n_support}")
    print(f"converged: {summary.converged} (passes: {summary.passes})")
    for line in _boundary_lines(model):
        print(line)
    print(f"wrote model to {args.output}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    test_sizes = parse_test_sizes(args.test_sizes)
    if args.model:
        trace = read_trace_csv(args.trace)
        model = load_model(args.model)
        report = sweep_with_model(model, trace, test_sizes, args.seed)
    else:
        trace, train_ds, model = _train_model(args)
        report = sweep_with_model(
            model,
            trace,
            test_sizes,
            args.seed,
            exclude_vehicles=train_ds.vehicle_ids,
            train_size=args.train_size,
        )
    report_to_csv(report, args.output)
    print(format_report(report))
    print(f"wrote report to {args.output}")
    return 0


def _plot_spec_from_args(args: argparse.Namespace) -> PlotSpec:
    kwargs: dict = {
        "width": args.width,
        "height": args.height,
        "shade_regions": not args.no_regions,
    }
    for name, raw in (("x_range", args.x_range), ("y_range", args.y_range)):
        if raw is not None:
            lo_hi = raw.split(":")
            if len(lo_hi) != 2:
                raise _UsageError(f"--{name.replace('_', '-')} needs low:high")
            try:
                kwargs[name] = (float(lo_hi[0]), float(lo_hi[1]))
            except ValueError as exc:
                raise _UsageError(str(exc)) from exc
    spec = PlotSpec(**kwargs)
    try:
        spec.validate()
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    return spec


def _cmd_plot(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if args.data:
        dataset = read_examples_csv(args.data)
    else:
        dataset = Dataset(examples=(), provenance="imported", seed=0)
    spec = _plot_spec_from_args(args)
    try:
        svg = render_svg(model, dataset, spec)
    except UnsupportedKernelError as exc:
        raise _UsageError(str(exc)) from exc
    Path(args.output).write_text(svg, encoding="utf-8", newline="\n")
    print(f"wrote plot to {args.output}")
    return 0


def _cmd_run_paper(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed
    test_sizes = parse_test_sizes(args.test_sizes)

    config = ScenarioConfig(num_vehicles=args.vehicles, rng_seed=seed)
    trace = generate_trace(config)
    write_trace_csv(trace, out_dir / "trace.csv")

    train_ds = sample_examples(trace, args.train_size, seed)
    cfg = TrainConfig(rng_seed=seed)
    model = train_position_model(list(train_ds.examples), KernelSpec.linear(), cfg)
    save_model(model, out_dir / "model.txt")

    report = sweep_with_model(
        model,
        trace,
        test_sizes,
        seed,
        exclude_vehicles=train_ds.vehicle_ids,
        train_size=args.train_size,
    )
    report_to_csv(report, out_dir / "report.csv")

    write_examples_csv(train_ds, out_dir / "train.csv")
    spec = PlotSpec()
    (out_dir / "train.svg").write_text(
        render_svg(model, train_ds, spec), encoding="utf-8", newline="\n"
    )
    for size in (10, 100):
        if size not in test_sizes:
            continue
        test_ds = sample_examples(
            trace, size, derive_seed(seed, size), exclude_vehicles=train_ds.vehicle_ids
        )
        write_examples_csv(test_ds, out_dir / f"test_{size}.csv")
        (out_dir / f"test_{size}.svg").write_text(
            render_svg(model, test_ds, spec), encoding="utf-8", newline="\n"
        )

    print(format_report(report))
    print(f"outputs in {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kernel", choices=("linear", "polynomial", "rbf", "sigmoid"),
                        default="linear")
    parser.add_argument("--C", type=float, default=1.0, help="soft-margin box constraint")
    parser.add_argument("--tol", type=float, default=1e-3, help="KKT tolerance")
    parser.add_argument("--max-passes", type=int, default=200)
    parser.add_argument("--gamma", type=float, default=None,
                        help="kernel scale (default: 1/(d*var) at training time)")
    parser.add_argument("--coef0", type=float, default=None)
    parser.add_argument("--degree", type=int, default=None)
    parser.add_argument("--train-size", type=int, default=DEFAULT_TRAIN_SIZE)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routesvm",
        description="Highway junction route prediction with a from-scratch kernel SVM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate the highway scenario to a trace CSV")
    p.add_argument("--config", help="key=value scenario file (flags override it)")
    p.add_argument("--vehicles", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--route2-prob", type=float, default=None)
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--junction-x", type=float, default=None)
    p.add_argument("--ramp-end", default=None, help="x,y of the off-ramp end")
    p.add_argument("--lane-y", default=None, help="three lane ordinates, comma separated")
    p.add_argument("--speed-range", default=None, help="low,high meters/step")
    p.add_argument("--lane-noise", type=float, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train", help="train an SVM on examples sampled from a trace")
    p.add_argument("trace")
    _add_train_flags(p)
    p.add_argument("-o", "--output", required=True, help="model output path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep", help="accuracy sweep over test sizes")
    p.add_argument("trace")
    p.add_argument("--model", default=None,
                   help="evaluate this serialized model instead of training")
    _add_train_flags(p)
    p.add_argument("--test-sizes", default=DEFAULT_TEST_SIZES,
                   help="'10', '10,20,30', or 'start:stop:step'")
    p.add_argument("-o", "--output", required=True, help="report CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("plot", help="render decision regions and scatter to SVG")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None, help="examples CSV (x,y,label)")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--no-regions", action="store_true",
                   help="scatter only (required for nonlinear kernels)")
    p.add_argument("--x-range", default=None, help="low:high")
    p.add_argument("--y-range", default=None, help="low:high")
    p.add_argument("-o", "--output", required=True, help="SVG output path")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser(
        "run-paper",
        help="one-line reproduction: generate, train, sweep, plot with the defaults",
    )
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--vehicles", type=int, default=600)
    p.add_argument("--train-size", type=int, default=DEFAULT_TRAIN_SIZE)
    p.add_argument("--test-sizes", default=DEFAULT_TEST_SIZES)
    p.set_defaults(func=_cmd_run_paper)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except _UsageError as exc:
        _err(str(exc))
        return 2
    except ConfigError as exc:
        _err(str(exc))
        return 2
    except (
        SingleClassError,
        InsufficientVehiclesError,
        TraceFormatError,
        ModelFormatError,
        EmptyTestError,
        DimensionMismatchError,
    ) as exc:
        _err(str(exc))
        return 3
    except OSError as exc:
        _err(str(exc))
        return 1
    except ValueError as exc:
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
