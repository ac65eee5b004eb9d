"""Shared test machinery: independent oracles and random instance generators."""

from __future__ import annotations

import random
from pathlib import Path

import numpy as np

from routesvm.svm import KernelSpec, LabeledExample, SvmModel
from routesvm.traffic_sim import Trace, TrajectoryPoint


def hard_margin_oracle(points, labels):
    """Max-margin separating hyperplane by support-subset enumeration.

    Tries every candidate support set of size 2 (one point per class, the
    boundary is their perpendicular bisector) and size 3 (two same-class
    points define the boundary direction, offset midway to the third) and
    returns the feasible candidate with the largest margin as
    (unit_w, b, margin).  Independent of the SVM training path.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    pos = [p for p, y in zip(pts, labels) if y == 1]
    neg = [p for p, y in zip(pts, labels) if y == -1]
    best = None

    def feasible(w, b, margin):
        slack = 1e-9 * max(1.0, margin)
        return all(y * (w @ p + b) >= margin - slack for p, y in zip(pts, labels))

    for p in pos:
        for q in neg:
            diff = p - q
            dist = float(np.linalg.norm(diff))
            if dist < 1e-12:
                continue
            w = diff / dist
            b = -float(w @ (p + q)) / 2.0
            margin = dist / 2.0
            if feasible(w, b, margin) and (best is None or margin > best[2]):
                best = (w, b, margin)

    for same, other, sign in ((pos, neg, 1.0), (neg, pos, -1.0)):
        for i in range(len(same)):
            for j in range(i + 1, len(same)):
                a1, a2 = same[i], same[j]
                d = a2 - a1
                nd = float(np.linalg.norm(d))
                if nd < 1e-12:
                    continue
                normal = np.array([-d[1], d[0]]) / nd
                for c in other:
                    gap = float(normal @ (a1 - c))
                    if abs(gap) < 1e-12:
                        continue
                    w = normal * sign * np.sign(gap)
                    margin = abs(gap) / 2.0
                    b = -0.5 * float(w @ (a1 + c))
                    if feasible(w, b, margin) and (best is None or margin > best[2]):
                        best = (w, b, margin)
    return best


def random_separable_examples(rng: random.Random, max_pts: int = 6, min_margin: float = 0.1):
    """A small 2-D dataset separable with margin at least ``min_margin``."""
    while True:
        npts = rng.randint(2, max_pts)
        wx, wy = rng.uniform(-1, 1), rng.uniform(-1, 1)
        norm = (wx * wx + wy * wy) ** 0.5
        if norm < 0.3:
            continue
        b = rng.uniform(-0.5, 0.5)
        examples = []
        while len(examples) < npts:
            x, y = rng.uniform(-2, 2), rng.uniform(-2, 2)
            value = (wx * x + wy * y + b) / norm
            if abs(value) < min_margin:
                continue
            examples.append(LabeledExample((x, y), 1 if value > 0 else -1))
        if {1, -1} <= {e.label for e in examples}:
            return examples


def random_overlapping_examples(rng: random.Random, n: int = 60):
    """Two overlapping Gaussian blobs, one per class."""
    examples = []
    for _ in range(n):
        label = 1 if rng.random() < 0.5 else -1
        cx = 1.0 if label == 1 else -1.0
        examples.append(LabeledExample((rng.gauss(cx, 1.0), rng.gauss(0.0, 1.0)), label))
    if {1, -1} <= {e.label for e in examples}:
        return examples
    return random_overlapping_examples(rng, n)


def random_linear_model(rng: random.Random, max_supports: int = 5) -> SvmModel:
    """A linear model with random supports and coefficients (not trained)."""
    n = rng.randint(1, max_supports)
    supports = tuple(
        LabeledExample(
            (rng.uniform(-3, 3), rng.uniform(-3, 3)), 1 if rng.random() < 0.5 else -1
        )
        for _ in range(n)
    )
    alphas = tuple(rng.uniform(0.1, 2.0) for _ in range(n))
    return SvmModel(
        kernel=KernelSpec.linear(),
        support_examples=supports,
        alphas=alphas,
        bias=rng.uniform(-2, 2),
    )


def random_trace(rng: random.Random, n_vehicles: int = 5, n_steps: int = 4) -> Trace:
    """An arbitrary (not simulator-generated) trace for round-trip tests."""
    points = []
    for i in range(n_vehicles):
        label = rng.randint(0, 1)
        speed = rng.uniform(0.5, 3.0)
        for step in range(n_steps):
            points.append(
                TrajectoryPoint(
                    vehicle_id=f"v{i:04d}",
                    step=step,
                    x=rng.uniform(-1e3, 1e3),
                    y=rng.uniform(-5, 5),
                    speed=speed,
                    route_label=label,
                )
            )
    points.sort(key=lambda p: (p.step, p.vehicle_id))
    return Trace(points=tuple(points))


def write_fcd_xml(trace: Trace, destination: str | Path, time_step: float = 0.5) -> None:
    """Export a trace in the floating-car-data XML shape.

    ``time`` attributes advance by ``time_step`` seconds, deliberately not
    equal to the integer step index, so ingestion has to renumber.
    """
    steps = sorted({p.step for p in trace.points})
    by_step: dict[int, list[TrajectoryPoint]] = {s: [] for s in steps}
    for p in trace.points:
        by_step[p.step].append(p)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<fcd-export>"]
    for index, step in enumerate(steps):
        lines.append(f'  <timestep time="{index * time_step:.2f}">')
        for p in by_step[step]:
            lines.append(
                f'    <vehicle id="{p.vehicle_id}" x="{p.x:.17g}" y="{p.y:.17g}" '
                f'speed="{p.speed:.17g}" lane="ignored_0" angle="90.00"/>'
            )
        lines.append("  </timestep>")
    lines.append("</fcd-export>")
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def label_table_of(trace: Trace) -> dict[str, int]:
    return {p.vehicle_id: p.route_label for p in trace.points}
