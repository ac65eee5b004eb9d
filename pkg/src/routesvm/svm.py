"""From-scratch kernel support vector machine.

Binary soft-margin SVM trained by pairwise coordinate ascent on the dual
(SMO-style): repeatedly pick a multiplier violating the KKT conditions, pick
a partner, solve the two-variable subproblem in closed form, clip to the box,
and stop when a full sweep finds nothing to change.  The decision function is

    f(x) = sum_i alpha_i * y_i * K(s_i, x) + b

over the retained support examples.  Four kernel families are supported:
linear, polynomial, rbf, sigmoid.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "SingleClassError",
    "UnsupportedKernelError",
    "ZeroNormError",
    "ModelFormatError",
    "LabeledExample",
    "KernelSpec",
    "TrainConfig",
    "TrainSummary",
    "SvmModel",
    "Standardizer",
    "kernel_eval",
    "kernel_matrix",
    "decision_value",
    "decision_values",
    "classify",
    "functional_margin",
    "geometric_margin",
    "weight_norm",
    "train",
    "extract_hyperplane",
    "model_to_text",
    "model_from_text",
    "save_model",
    "load_model",
]

KERNEL_FAMILIES = ("linear", "polynomial", "rbf", "sigmoid")

NORM_FLOOR = 1e-12


class DimensionMismatchError(ValueError):
    pass


class SingleClassError(ValueError):
    pass


class UnsupportedKernelError(ValueError):
    pass


class ZeroNormError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


def _f17(v: float) -> str:
    """Decimal text with 17 significant digits (exact float round-trip)."""
    return format(float(v), ".17g")


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector with class label +1 or -1."""

    features: tuple[float, ...]
    label: int

    def __post_init__(self):
        if self.label not in (1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label}")
        if not all(math.isfinite(f) for f in self.features):
            raise ValueError("features must be finite")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus the hyperparameters that family uses.

    linear:      K(a,b) = a.b                      (no parameters)
    polynomial:  K(a,b) = (gamma*(a.b) + coef0)^degree
    rbf:         K(a,b) = exp(-gamma*||a-b||^2)
    sigmoid:     K(a,b) = tanh(gamma*(a.b) + coef0)

    ``gamma=None`` on a parametric family means "fill in the scale-aware
    default at training time" (1 / (n_features * feature variance)); it must
    be concrete before the kernel can be evaluated.
    """

    family: str
    degree: int | None = None
    gamma: float | None = None
    coef0: float | None = None

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def polynomial(cls, degree: int = 3, gamma: float | None = None, coef0: float = 0.0) -> "KernelSpec":
        return cls("polynomial", degree=degree, gamma=gamma, coef0=coef0)

    @classmethod
    def rbf(cls, gamma: float | None = None) -> "KernelSpec":
        return cls("rbf", gamma=gamma)

    @classmethod
    def sigmoid(cls, gamma: float | None = None, coef0: float = 0.0) -> "KernelSpec":
        return cls("sigmoid", gamma=gamma, coef0=coef0)

    def validate(self) -> None:
        if self.family not in KERNEL_FAMILIES:
            raise UnsupportedKernelError(f"unknown kernel family {self.family!r}")
        uses_gamma = self.family in ("polynomial", "rbf", "sigmoid")
        uses_coef0 = self.family in ("polynomial", "sigmoid")
        uses_degree = self.family == "polynomial"
        if uses_gamma:
            if self.gamma is None or not (self.gamma > 0):
                raise ValueError(f"{self.family} kernel needs gamma > 0")
        elif self.gamma is not None:
            raise ValueError(f"{self.family} kernel takes no gamma")
        if uses_coef0:
            if self.coef0 is None:
                raise ValueError(f"{self.family} kernel needs coef0")
        elif self.coef0 is not None:
            raise ValueError(f"{self.family} kernel takes no coef0")
        if uses_degree:
            if self.degree is None or self.degree < 1:
                raise ValueError("polynomial kernel needs degree >= 1")
        elif self.degree is not None:
            raise ValueError(f"{self.family} kernel takes no degree")

    def resolved(self, features: np.ndarray) -> "KernelSpec":
        """Fill a missing gamma from the data scale: 1/(d * variance)."""
        if self.family in ("polynomial", "rbf", "sigmoid") and self.gamma is None:
            var = float(np.var(features))
            if var <= 0.0:
                var = 1.0
            gamma = 1.0 / (features.shape[1] * var)
            return KernelSpec(self.family, degree=self.degree, gamma=gamma, coef0=self.coef0)
        return self


def _pairwise_dots(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All-pairs dot products accumulated one feature at a time.

    Equivalent to ``a @ b.T`` but built from elementwise outer products, so
    the floating-point result does not depend on the BLAS build; training
    trajectories stay bit-reproducible across platforms.
    """
    dots = np.multiply.outer(a[:, 0], b[:, 0])
    for k in range(1, a.shape[1]):
        dots += np.multiply.outer(a[:, k], b[:, k])
    return dots


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gram matrix K[i, j] = K(a[i], b[j]) for row-vector stacks a, b."""
    spec.validate()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"vectors have dimensions {a.shape[1]} and {b.shape[1]}"
        )
    dots = _pairwise_dots(a, b)
    if spec.family == "linear":
        return dots
    if spec.family == "polynomial":
        return (spec.gamma * dots + spec.coef0) ** spec.degree
    if spec.family == "rbf":
        sq = (
            np.sum(a * a, axis=1)[:, None]
            - 2.0 * dots
            + np.sum(b * b, axis=1)[None, :]
        )
        return np.exp(-spec.gamma * np.maximum(sq, 0.0))
    return np.tanh(spec.gamma * dots + spec.coef0)


def kernel_eval(spec: KernelSpec, a, b) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    return float(kernel_matrix(spec, a, b)[0, 0])


@dataclass(frozen=True)
class TrainConfig:
    """Soft-margin training knobs: box constraint, KKT tolerance, pass cap."""

    C: float = 1.0
    tol: float = 1e-3
    max_passes: int = 200
    rng_seed: int = 0

    def validate(self) -> None:
        if not (math.isfinite(self.C) and self.C > 0):
            raise ValueError("C must be finite and > 0")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ValueError("tol must be finite and > 0")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass(frozen=True)
class TrainSummary:
    """What happened during optimization (not persisted with the model)."""

    passes: int
    converged: bool
    dual_objectives: tuple[float, ...]
    n_support: int = 0


@dataclass(frozen=True)
class SvmModel:
    """Trained classifier: support examples, dual coefficients, bias, kernel."""

    kernel: KernelSpec
    support_examples: tuple[LabeledExample, ...]
    alphas: tuple[float, ...]
    bias: float
    summary: TrainSummary | None = field(default=None, compare=False)

    @cached_property
    def _support_matrix(self) -> np.ndarray:
        if not self.support_examples:
            dim = 0
        else:
            dim = len(self.support_examples[0].features)
        return np.array(
            [e.features for e in self.support_examples], dtype=float
        ).reshape(len(self.support_examples), dim)

    @cached_property
    def _coefs(self) -> np.ndarray:
        """alpha_i * y_i per support example."""
        labels = np.array([e.label for e in self.support_examples], dtype=float)
        return np.asarray(self.alphas, dtype=float) * labels

    def scaled(self, c: float) -> "SvmModel":
        """Copy with all dual coefficients and the bias multiplied by c."""
        return SvmModel(
            kernel=self.kernel,
            support_examples=self.support_examples,
            alphas=tuple(c * a for a in self.alphas),
            bias=c * self.bias,
        )


def decision_values(model: SvmModel, xs: np.ndarray) -> np.ndarray:
    """Decision function over a stack of row vectors (fixed summation order)."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[None, :]
    if not model.support_examples:
        return np.full(xs.shape[0], model.bias)
    k = kernel_matrix(model.kernel, model._support_matrix, xs)
    return model._coefs @ k + model.bias


def decision_value(model: SvmModel, x) -> float:
    """f(x) = sum_i alpha_i y_i K(s_i, x) + bias."""
    return float(decision_values(model, np.asarray(x, dtype=float))[0])


def classify(model: SvmModel, x) -> int:
    """+1 if the decision value is >= 0 else -1 (exact zero maps to +1)."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def functional_margin(model: SvmModel, e: LabeledExample) -> float:
    """label * f(features): positive iff the example is classified correctly."""
    return e.label * decision_value(model, e.features)


def weight_norm(model: SvmModel) -> float:
    """||w|| in the kernel feature space: sqrt(c' K c) with c = alpha*y."""
    if not model.support_examples:
        return 0.0
    k = kernel_matrix(model.kernel, model._support_matrix, model._support_matrix)
    sq = float(model._coefs @ k @ model._coefs)
    return math.sqrt(max(sq, 0.0))


def geometric_margin(model: SvmModel, e: LabeledExample) -> float:
    """Functional margin divided by ||w||: signed distance to the boundary."""
    norm = weight_norm(model)
    if norm <= NORM_FLOOR:
        raise ZeroNormError("weight vector norm is below the numeric floor")
    return functional_margin(model, e) / norm


def extract_hyperplane(model: SvmModel) -> tuple[np.ndarray, float]:
    """Explicit (w, b) of a linear-kernel model: w = sum_i alpha_i y_i x_i."""
    if model.kernel.family != "linear":
        raise UnsupportedKernelError(
            f"hyperplane extraction needs a linear kernel, got {model.kernel.family}"
        )
    if not model.support_examples:
        raise ValueError("model has no support examples")
    w = model._coefs @ model._support_matrix
    return w, model.bias


@dataclass
class Standardizer:
    """Optional per-feature standardization fitted on training data only.

    Not applied anywhere by default; callers who opt in must transform both
    training and test features themselves.
    """

    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    def fit(self, xs: np.ndarray) -> "Standardizer":
        xs = np.asarray(xs, dtype=float)
        self.mean = xs.mean(axis=0)
        std = xs.std(axis=0)
        self.scale = np.where(std > 0, std, 1.0)
        return self

    def transform(self, xs: np.ndarray) -> np.ndarray:
        if self.mean is None:
            raise ValueError("standardizer is not fitted")
        return (np.asarray(xs, dtype=float) - self.mean) / self.scale


# ---------------------------------------------------------------------------
# Training (pairwise dual coordinate ascent)
# ---------------------------------------------------------------------------


class _Smo:
    """Working state for one optimization run over a fixed Gram matrix."""

    def __init__(self, k: np.ndarray, y: np.ndarray, cfg: TrainConfig):
        self.k = k
        self.y = y
        self.c = cfg.C
        self.tol = cfg.tol
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # errors[i] = f(x_i) - y_i, maintained incrementally
        self.errors = -y.astype(float).copy()
        self.rng = random.Random(cfg.rng_seed)

    def dual_objective(self) -> float:
        coef = self.alpha * self.y
        quad = ((self.k * coef).sum(axis=1) * coef).sum()  # BLAS-free reduction
        return float(self.alpha.sum() - 0.5 * quad)

    def violates_kkt(self, i: int) -> bool:
        r = self.errors[i] * self.y[i]
        return (r < -self.tol and self.alpha[i] < self.c) or (
            r > self.tol and self.alpha[i] > 0.0
        )

    def try_step(self, i: int, j: int) -> bool:
        """Solve the two-variable subproblem for (i, j); True if alpha moved."""
        if i == j:
            return False
        a_i, a_j = self.alpha[i], self.alpha[j]
        y_i, y_j = self.y[i], self.y[j]
        e_i, e_j = self.errors[i], self.errors[j]
        s = y_i * y_j
        if s < 0:
            low, high = max(0.0, a_j - a_i), min(self.c, self.c + a_j - a_i)
        else:
            low, high = max(0.0, a_i + a_j - self.c), min(self.c, a_i + a_j)
        if low >= high:
            return False
        k_ii, k_jj, k_ij = self.k[i, i], self.k[j, j], self.k[i, j]
        eta = k_ii + k_jj - 2.0 * k_ij
        if eta > 0.0:
            a_j_new = a_j + y_j * (e_i - e_j) / eta
            a_j_new = min(high, max(low, a_j_new))
        else:
            # Flat or concave segment: the restricted dual is maximized at an
            # endpoint, so evaluate both and take the better one.
            f_i = y_i * (e_i + self.b) - a_i * k_ii - s * a_j * k_ij
            f_j = y_j * (e_j + self.b) - s * a_i * k_ij - a_j * k_jj
            low_i = a_i + s * (a_j - low)
            high_i = a_i + s * (a_j - high)
            obj_low = (
                low_i * f_i
                + low * f_j
                + 0.5 * low_i**2 * k_ii
                + 0.5 * low**2 * k_jj
                + s * low * low_i * k_ij
            )
            obj_high = (
                high_i * f_i
                + high * f_j
                + 0.5 * high_i**2 * k_ii
                + 0.5 * high**2 * k_jj
                + s * high * high_i * k_ij
            )
            gap = 1e-12 * (abs(obj_low) + abs(obj_high) + 1.0)
            if obj_low < obj_high - gap:
                a_j_new = low
            elif obj_high < obj_low - gap:
                a_j_new = high
            else:
                return False
        if abs(a_j_new - a_j) < 1e-12 * (a_j_new + a_j + 1e-12):
            return False
        a_i_new = a_i + s * (a_j - a_j_new)
        a_i_new = min(self.c, max(0.0, a_i_new))

        d_i, d_j = a_i_new - a_i, a_j_new - a_j
        b1 = self.b - e_i - y_i * d_i * k_ii - y_j * d_j * k_ij
        b2 = self.b - e_j - y_i * d_i * k_ij - y_j * d_j * k_jj
        if 0.0 < a_i_new < self.c:
            b_new = b1
        elif 0.0 < a_j_new < self.c:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        self.errors += (
            y_i * d_i * self.k[i] + y_j * d_j * self.k[j] + (b_new - self.b)
        )
        self.alpha[i], self.alpha[j] = a_i_new, a_j_new
        self.b = b_new
        return True

    def examine(self, i: int) -> bool:
        """Partner search for a KKT-violating index i."""
        if not self.violates_kkt(i):
            return False
        # First choice: the partner maximizing the step size |E_i - E_j|.
        j = int(np.argmax(np.abs(self.errors[i] - self.errors)))
        if self.try_step(i, j):
            return True
        # Fall back to scanning the unbounded multipliers, then everything,
        # each from a seeded random start.
        unbound = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.c))
        if len(unbound):
            start = self.rng.randrange(len(unbound))
            for idx in range(len(unbound)):
                if self.try_step(i, int(unbound[(start + idx) % len(unbound)])):
                    return True
        start = self.rng.randrange(self.n)
        for idx in range(self.n):
            if self.try_step(i, (start + idx) % self.n):
                return True
        return False

    def run(self, max_passes: int) -> TrainSummary:
        """Full sweeps over all multipliers until a sweep changes nothing and
        the KKT case split holds under the re-anchored bias.

        The incrementally maintained bias can drift from the averaged-bias
        estimate the final model uses; on a zero-change sweep the bias is
        re-anchored and, if violations remain, sweeping continues.  A second
        zero-change sweep under the same anchored bias means no pair step can
        make progress, so the loop stops (converged=False).
        """
        objectives = []
        passes = 0
        rebiased = False
        converged = False
        while passes < max_passes:
            passes += 1
            changed = 0
            for i in range(self.n):
                if self.examine(i):
                    changed += 1
            objectives.append(self.dual_objective())
            if changed > 0:
                rebiased = False
                continue
            self.finalize_bias()
            if self.final_violations() == 0:
                converged = True
                break
            if rebiased:
                break
            rebiased = True
        if passes >= max_passes and not converged:
            self.finalize_bias()
            converged = self.final_violations() == 0
        return TrainSummary(
            passes=passes, converged=converged, dual_objectives=tuple(objectives)
        )

    def finalize_bias(self) -> None:
        """Recompute b as the average of y_i - (f(x_i) - b) over the
        unbounded support vectors.

        With every multiplier at a bound there is no margin-riding vector to
        average, but optimality only constrains b to an interval; its
        endpoints come from the bound multipliers' targets and the midpoint
        keeps every example's KKT deviation within half the optimality gap.
        """
        floor = NORM_FLOOR * max(1.0, self.c)
        partial = (self.k * (self.alpha * self.y)).sum(axis=1)  # f without bias
        targets = self.y - partial
        unbound = (self.alpha > floor) & (self.alpha < self.c - floor)
        if unbound.any():
            self.b = float(np.mean(targets[unbound]))
        else:
            can_grow = ((self.y > 0) & (self.alpha < self.c - floor)) | (
                (self.y < 0) & (self.alpha > floor)
            )
            can_shrink = ((self.y > 0) & (self.alpha > floor)) | (
                (self.y < 0) & (self.alpha < self.c - floor)
            )
            if can_grow.any() and can_shrink.any():
                self.b = 0.5 * float(targets[can_grow].max() + targets[can_shrink].min())
        self.errors = partial + self.b - self.y

    def final_violations(self) -> int:
        """KKT case-split violations at the current iterate.

        alpha=0 needs margin >= 1-tol; interior alpha needs |margin-1| <= tol;
        alpha=C needs margin <= 1+tol.
        """
        floor = NORM_FLOOR * max(1.0, self.c)
        margin = self.y * (self.errors + self.y)  # y_i * f(x_i)
        at_zero = self.alpha <= floor
        at_c = self.alpha >= self.c - floor
        interior = ~at_zero & ~at_c
        bad = (
            (at_zero & (margin < 1.0 - self.tol))
            | (interior & (np.abs(margin - 1.0) > self.tol))
            | (at_c & (margin > 1.0 + self.tol))
        )
        return int(bad.sum())


def train(
    data: list[LabeledExample] | tuple[LabeledExample, ...],
    kernel: KernelSpec,
    cfg: TrainConfig = TrainConfig(),
) -> SvmModel:
    """Fit the soft-margin dual on ``data`` and return the trained model.

    Maximizes  sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)
    subject to 0 <= alpha <= C and sum(alpha * y) = 0.  Training stops when a
    full sweep changes no multiplier or after ``cfg.max_passes`` sweeps;
    non-convergence is reported through the model summary, not raised.
    Examples with zero dual coefficient are dropped from the model.
    """
    cfg.validate()
    if not data:
        raise ValueError("training data is empty")
    labels = {e.label for e in data}
    if labels != {1, -1}:
        raise SingleClassError(f"training data needs both classes, got labels {sorted(labels)}")
    dim = len(data[0].features)
    if any(len(e.features) != dim for e in data):
        raise DimensionMismatchError("training examples have inconsistent dimensions")

    xs = np.array([e.features for e in data], dtype=float)
    ys = np.array([e.label for e in data], dtype=float)
    kernel = kernel.resolved(xs)
    kernel.validate()
    gram = kernel_matrix(kernel, xs, xs)

    smo = _Smo(gram, ys, cfg)
    summary = smo.run(cfg.max_passes)
    smo.finalize_bias()

    floor = NORM_FLOOR * max(1.0, cfg.C)
    keep = np.flatnonzero(smo.alpha > floor)
    summary = TrainSummary(
        passes=summary.passes,
        converged=smo.final_violations() == 0,
        dual_objectives=summary.dual_objectives,
        n_support=len(keep),
    )
    return SvmModel(
        kernel=kernel,
        support_examples=tuple(data[int(i)] for i in keep),
        alphas=tuple(float(smo.alpha[int(i)]) for i in keep),
        bias=float(smo.b),
        summary=summary,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_MAGIC = "routesvm-model"
_VERSION = "v1"


def model_to_text(model: SvmModel) -> str:
    """Versioned plain-text form; floats at 17 significant digits.

    Header line: magic, version, kernel family and parameters, bias, support
    count.  Then one line per support vector: alpha, label, features.
    """
    spec = model.kernel
    parts = [_MAGIC, _VERSION, f"family={spec.family}"]
    if spec.degree is not None:
        parts.append(f"degree={spec.degree}")
    if spec.gamma is not None:
        parts.append(f"gamma={_f17(spec.gamma)}")
    if spec.coef0 is not None:
        parts.append(f"coef0={_f17(spec.coef0)}")
    parts.append(f"bias={_f17(model.bias)}")
    parts.append(f"supports={len(model.support_examples)}")
    lines = [" ".join(parts)]
    for alpha, example in zip(model.alphas, model.support_examples):
        fields = [_f17(alpha), str(example.label)]
        fields.extend(_f17(f) for f in example.features)
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> SvmModel:
    """Inverse of :func:`model_to_text`; raises ModelFormatError on bad input."""
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("empty model text")
    header = lines[0].split()
    if len(header) < 4 or header[0] != _MAGIC:
        raise ModelFormatError("missing model header magic")
    if header[1] != _VERSION:
        raise ModelFormatError(f"unsupported model version {header[1]!r}")
    fields: dict[str, str] = {}
    for token in header[2:]:
        if "=" not in token:
            raise ModelFormatError(f"malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    try:
        family = fields.pop("family")
        bias = float(fields.pop("bias"))
        count = int(fields.pop("supports"))
        degree = int(fields.pop("degree")) if "degree" in fields else None
        gamma = float(fields.pop("gamma")) if "gamma" in fields else None
        coef0 = float(fields.pop("coef0")) if "coef0" in fields else None
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad model header: {exc}") from exc
    if fields:
        raise ModelFormatError(f"unknown header fields {sorted(fields)}")
    spec = KernelSpec(family, degree=degree, gamma=gamma, coef0=coef0)
    try:
        spec.validate()
    except ValueError as exc:
        raise ModelFormatError(f"bad kernel parameters: {exc}") from exc

    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise ModelFormatError(f"expected {count} support lines, found {len(body)}")
    alphas = []
    examples = []
    for line_no, line in enumerate(body, start=2):
        tokens = line.split()
        if len(tokens) < 3:
            raise ModelFormatError(f"line {line_no}: too few fields")
        try:
            alphas.append(float(tokens[0]))
            label = int(tokens[1])
            features = tuple(float(t) for t in tokens[2:])
            examples.append(LabeledExample(features=features, label=label))
        except ValueError as exc:
            raise ModelFormatError(f"line {line_no}: {exc}") from exc
    return SvmModel(
        kernel=spec,
        support_examples=tuple(examples),
        alphas=tuple(alphas),
        bias=bias,
    )


def save_model(model: SvmModel, path: str | Path) -> None:
    Path(path).write_text(model_to_text(model), encoding="utf-8", newline="\n")


def load_model(path: str | Path) -> SvmModel:
    return model_from_text(Path(path).read_text(encoding="utf-8"))
