"""Train/evaluate orchestration: accuracy sweeps and boundary summaries.

A sweep trains one model, evaluates it on independently drawn test sets of
each requested size (every test set vehicle-disjoint from the training set),
and reports exact correct counts per row so accuracies are rational numbers,
not accumulated floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset_io import Dataset, InsufficientVehiclesError, derive_seed, sample_examples
from .svm import (
    KernelSpec,
    LabeledExample,
    Standardizer,
    SvmModel,
    TrainConfig,
    extract_hyperplane,
    decision_values,
    train,
)
from .traffic_sim import Trace

__all__ = [
    "EmptyTestError",
    "BoundaryLine",
    "VerticalBoundary",
    "SweepRow",
    "EvaluationReport",
    "evaluate",
    "boundary_report",
    "linear_model_from_weights",
    "train_position_model",
    "sweep_with_model",
    "accuracy_sweep",
    "report_to_csv",
    "format_report",
]

W_FLOOR = 1e-12


class EmptyTestError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryLine:
    """Linear decision boundary in slope-intercept form: y = slope*x + intercept."""

    slope: float
    intercept: float


@dataclass(frozen=True)
class VerticalBoundary:
    """Degenerate boundary x = const (the weight on y vanished)."""

    x: float


@dataclass(frozen=True)
class SweepRow:
    test_size: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.test_size


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[SweepRow, ...]
    mean_accuracy: float | None  # None when the sweep had zero rows
    boundary: BoundaryLine | VerticalBoundary | None
    train_size: int
    seed: int
    convergence_flag: bool


def evaluate(model: SvmModel, test: Dataset) -> tuple[int, float]:
    """Count correct classifications; returns (correct, accuracy)."""
    if not test.examples:
        raise EmptyTestError("test dataset is empty")
    xs = np.array([e.features for e in test.examples], dtype=float)
    labels = np.array([e.label for e in test.examples])
    predicted = np.where(decision_values(model, xs) >= 0.0, 1, -1)
    correct = int(np.sum(predicted == labels))
    return correct, correct / len(test.examples)


def boundary_report(model: SvmModel) -> BoundaryLine | VerticalBoundary | None:
    """Decision line of a linear-kernel model; None for nonlinear kernels."""
    if model.kernel.family != "linear":
        return None
    w, b = extract_hyperplane(model)
    w_x, w_y = float(w[0]), float(w[1])
    if abs(w_y) > W_FLOOR:
        return BoundaryLine(slope=-w_x / w_y, intercept=-b / w_y)
    if abs(w_x) > W_FLOOR:
        return VerticalBoundary(x=-b / w_x)
    raise ValueError("boundary is degenerate: weight vector is numerically zero")


def linear_model_from_weights(w, bias: float, summary=None) -> SvmModel:
    """A linear SvmModel whose decision function is exactly w.x + bias.

    Built from one unit-basis support per nonzero weight component plus a
    zero-feature support that balances the dual equality constraint.
    """
    w = np.asarray(w, dtype=float)
    dim = w.shape[0]
    supports = []
    alphas = []
    for k, wk in enumerate(w):
        if wk != 0.0:
            basis = tuple(1.0 if j == k else 0.0 for j in range(dim))
            supports.append(LabeledExample(basis, 1 if wk > 0 else -1))
            alphas.append(abs(float(wk)))
    total = float(w.sum())
    if total != 0.0:
        supports.append(LabeledExample((0.0,) * dim, -1 if total > 0 else 1))
        alphas.append(abs(total))
    return SvmModel(
        kernel=KernelSpec.linear(),
        support_examples=tuple(supports),
        alphas=tuple(alphas),
        bias=float(bias),
        summary=summary,
    )


def train_position_model(
    data: list[LabeledExample] | tuple[LabeledExample, ...],
    kernel: KernelSpec,
    cfg: TrainConfig = TrainConfig(),
) -> SvmModel:
    """Train a route classifier on raw position examples.

    Position features span thousands of meters in x but only a couple of
    meters in y, which stalls pairwise dual ascent long before tolerance on
    the raw features.  For the linear kernel this trains on standardized
    features (mean/variance from the training data only) and re-expresses
    the resulting plane exactly in raw meters, so the reported boundary
    stays comparable with the road geometry.  Other kernels train directly
    on the raw features.
    """
    if kernel.family != "linear":
        return train(data, kernel, cfg)
    xs = np.array([e.features for e in data], dtype=float)
    scaler = Standardizer().fit(xs)
    scaled = [
        LabeledExample(tuple(row), e.label)
        for row, e in zip(scaler.transform(xs), data)
    ]
    inner = train(scaled, kernel, cfg)
    w_scaled, b_scaled = extract_hyperplane(inner)
    w_raw = w_scaled / scaler.scale
    b_raw = float(b_scaled - np.sum(w_scaled * scaler.mean / scaler.scale))
    return linear_model_from_weights(w_raw, b_raw, summary=inner.summary)


def sweep_with_model(
    model: SvmModel,
    trace: Trace,
    test_sizes: list[int] | tuple[int, ...],
    seed: int,
    exclude_vehicles: tuple[str, ...] = (),
    train_size: int = 0,
) -> EvaluationReport:
    """Evaluate an existing model on one independently sampled test set per
    requested size (seeded sub-stream per size)."""
    rows = []
    for size in test_sizes:
        test_ds = sample_examples(
            trace, size, derive_seed(seed, size), exclude_vehicles=exclude_vehicles
        )
        correct, _ = evaluate(model, test_ds)
        rows.append(SweepRow(test_size=size, correct=correct))
    mean = sum(r.accuracy for r in rows) / len(rows) if rows else None
    boundary = boundary_report(model) if model.kernel.family == "linear" else None
    converged = model.summary.converged if model.summary is not None else True
    return EvaluationReport(
        rows=tuple(rows),
        mean_accuracy=mean,
        boundary=boundary,
        train_size=train_size,
        seed=seed,
        convergence_flag=converged,
    )


def accuracy_sweep(
    trace: Trace,
    train_size: int,
    test_sizes: list[int] | tuple[int, ...],
    kernel: KernelSpec,
    cfg: TrainConfig = TrainConfig(),
    seed: int = 0,
) -> EvaluationReport:
    """Train once on ``train_size`` examples, then run the accuracy sweep.

    Every test set is drawn from vehicles disjoint from the training
    vehicles.  Deterministic in (trace, sizes, kernel, cfg, seed).
    """
    vehicle_count = len(trace.vehicle_ids())
    needed = train_size + (max(test_sizes) if test_sizes else 0)
    if vehicle_count < needed:
        raise InsufficientVehiclesError(
            f"need {needed} distinct vehicles, trace provides {vehicle_count}"
        )
    train_ds = sample_examples(trace, train_size, seed)
    model = train_position_model(list(train_ds.examples), kernel, cfg)
    return sweep_with_model(
        model,
        trace,
        test_sizes,
        seed,
        exclude_vehicles=train_ds.vehicle_ids,
        train_size=train_size,
    )


def report_to_csv(report: EvaluationReport, destination: str | Path) -> None:
    lines = ["test_size,correct,accuracy"]
    for r in report.rows:
        lines.append(f"{r.test_size},{r.correct},{r.accuracy!r}")
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def format_report(report: EvaluationReport) -> str:
    """Human-readable accuracy table (per-size rows plus the mean)."""
    header_right = f"{report.train_size} training examples"
    rows = [("Testing examples", header_right)]
    for r in report.rows:
        rows.append((str(r.test_size), f"{100.0 * r.accuracy:.2f}%"))
    if report.mean_accuracy is not None:
        rows.append(("mean", f"{100.0 * report.mean_accuracy:.2f}%"))
    else:
        rows.append(("mean", "undefined (no rows)"))
    left_width = max(len(left) for left, _ in rows)
    lines = [f"{left.ljust(left_width)}  {right}" for left, right in rows]
    if isinstance(report.boundary, BoundaryLine):
        lines.append(
            f"boundary: y = {report.boundary.slope:.6g}x + {report.boundary.intercept:.6g}"
        )
    elif isinstance(report.boundary, VerticalBoundary):
        lines.append(f"boundary: vertical at x = {report.boundary.x:.6g}")
    if not report.convergence_flag:
        lines.append("warning: training did not fully converge")
    return "\n".join(lines)
