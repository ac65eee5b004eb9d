import math
import random

import numpy as np
import pytest

from routesvm.svm import (
    DimensionMismatchError,
    KernelSpec,
    LabeledExample,
    ModelFormatError,
    Standardizer,
    SvmModel,
    UnsupportedKernelError,
    ZeroNormError,
    classify,
    decision_value,
    functional_margin,
    geometric_margin,
    kernel_eval,
    model_from_text,
    model_to_text,
    weight_norm,
)

from helpers import random_linear_model


def single_support_model(features=(0.0, 1.0), label=1, alpha=1.0, bias=0.0) -> SvmModel:
    return SvmModel(
        kernel=KernelSpec.linear(),
        support_examples=(LabeledExample(tuple(features), label),),
        alphas=(alpha,),
        bias=bias,
    )


def bias_only_model(bias: float) -> SvmModel:
    return SvmModel(kernel=KernelSpec.linear(), support_examples=(), alphas=(), bias=bias)


class TestKernels:
    def test_linear_dot_product(self):
        assert kernel_eval(KernelSpec.linear(), (1, 2), (3, 4)) == 11.0

    def test_rbf_zero_distance(self):
        for gamma in (0.1, 1.0, 25.0):
            assert kernel_eval(KernelSpec.rbf(gamma=gamma), (0.3, -2.0), (0.3, -2.0)) == 1.0

    def test_polynomial_cross_unit_vectors(self):
        spec = KernelSpec.polynomial(degree=2, gamma=1.0, coef0=1.0)
        assert kernel_eval(spec, (1, 0), (0, 1)) == 1.0

    def test_sigmoid_matches_tanh(self):
        spec = KernelSpec.sigmoid(gamma=0.5, coef0=0.25)
        a, b = (1.0, 2.0), (-0.5, 3.0)
        expected = math.tanh(0.5 * (1.0 * -0.5 + 2.0 * 3.0) + 0.25)
        assert kernel_eval(spec, a, b) == pytest.approx(expected, rel=1e-15)

    def test_symmetry_all_families(self):
        rng = random.Random(5)
        specs = [
            KernelSpec.linear(),
            KernelSpec.polynomial(degree=3, gamma=0.7, coef0=0.2),
            KernelSpec.rbf(gamma=0.9),
            KernelSpec.sigmoid(gamma=0.4, coef0=-0.1),
        ]
        for _ in range(200):
            a = (rng.uniform(-5, 5), rng.uniform(-5, 5))
            b = (rng.uniform(-5, 5), rng.uniform(-5, 5))
            for spec in specs:
                assert abs(kernel_eval(spec, a, b) - kernel_eval(spec, b, a)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            kernel_eval(KernelSpec.linear(), (1, 2), (1, 2, 3))

    @pytest.mark.parametrize(
        "spec",
        [
            KernelSpec("linear", gamma=1.0),
            KernelSpec("linear", degree=2),
            KernelSpec("rbf"),
            KernelSpec("rbf", gamma=-1.0),
            KernelSpec("rbf", gamma=1.0, coef0=0.0),
            KernelSpec("polynomial", gamma=1.0, coef0=0.0),
            KernelSpec("polynomial", degree=0, gamma=1.0, coef0=0.0),
            KernelSpec("sigmoid", gamma=1.0, coef0=0.0, degree=2),
            KernelSpec("quadratic"),
        ],
    )
    def test_parameters_present_exactly_per_family(self, spec):
        with pytest.raises((ValueError, UnsupportedKernelError)):
            spec.validate()


class TestDecisionAndClassify:
    def test_empty_model_returns_bias(self):
        model = bias_only_model(0.0)
        for x in ((0, 0), (4, -7), (1e6, 1e6)):
            assert decision_value(model, x) == 0.0

    def test_single_support_unit_dot(self):
        model = single_support_model()
        assert decision_value(model, (0.0, 1.0)) == 1.0

    def test_classify_positive_negative_and_tie(self):
        assert classify(bias_only_model(2.3), (0, 0)) == 1
        assert classify(bias_only_model(-0.1), (0, 0)) == -1
        assert classify(bias_only_model(0.0), (0, 0)) == 1

    def test_classify_consistent_with_decision_on_grid(self):
        rng = random.Random(11)
        model = random_linear_model(rng)
        for gx in np.linspace(-4, 4, 21):
            for gy in np.linspace(-4, 4, 21):
                sign = 1 if decision_value(model, (gx, gy)) >= 0 else -1
                assert classify(model, (gx, gy)) == sign


class TestMargins:
    def test_functional_margin_single_support(self):
        model = single_support_model()
        assert functional_margin(model, LabeledExample((0.0, 1.0), 1)) == 1.0

    def test_functional_margin_sign(self):
        model = single_support_model()  # w = (0, 1), b = 0
        assert functional_margin(model, LabeledExample((2.0, 3.0), 1)) > 0
        assert functional_margin(model, LabeledExample((2.0, -3.0), -1)) > 0
        assert functional_margin(model, LabeledExample((2.0, 3.0), -1)) < 0

    def test_margin_zero_on_boundary(self):
        model = single_support_model()
        on_boundary = LabeledExample((5.0, 0.0), 1)
        assert functional_margin(model, on_boundary) == 0.0
        assert geometric_margin(model, on_boundary) == 0.0

    def test_geometric_margin_is_point_to_line_distance(self):
        model = single_support_model()  # w = (0, 1)
        assert geometric_margin(model, LabeledExample((0.0, 2.0), 1)) == pytest.approx(2.0)

    def test_scaling_leaves_geometric_margin(self):
        rng = random.Random(3)
        for _ in range(50):
            model = random_linear_model(rng)
            point = LabeledExample((rng.uniform(-3, 3), rng.uniform(-3, 3)), 1)
            scaled = model.scaled(3.0)
            assert geometric_margin(scaled, point) == pytest.approx(
                geometric_margin(model, point), abs=1e-9
            )
            assert functional_margin(scaled, point) == pytest.approx(
                3.0 * functional_margin(model, point), rel=1e-12
            )

    def test_zero_norm_error(self):
        with pytest.raises(ZeroNormError):
            geometric_margin(bias_only_model(1.0), LabeledExample((0.0, 0.0), 1))
        # two identical supports with opposite labels cancel w exactly
        cancelling = SvmModel(
            kernel=KernelSpec.linear(),
            support_examples=(
                LabeledExample((1.0, 1.0), 1),
                LabeledExample((1.0, 1.0), -1),
            ),
            alphas=(0.5, 0.5),
            bias=0.0,
        )
        with pytest.raises(ZeroNormError):
            geometric_margin(cancelling, LabeledExample((0.0, 0.0), 1))

    def test_weight_norm_matches_explicit_w_for_linear(self):
        rng = random.Random(17)
        for _ in range(50):
            model = random_linear_model(rng)
            w = np.zeros(2)
            for alpha, e in zip(model.alphas, model.support_examples):
                w += alpha * e.label * np.asarray(e.features)
            assert weight_norm(model) == pytest.approx(float(np.linalg.norm(w)), rel=1e-12)


class TestStandardizer:
    def test_fit_transform(self):
        xs = np.array([[1.0, 10.0], [3.0, 30.0], [5.0, 20.0]])
        std = Standardizer().fit(xs)
        out = std.transform(xs)
        assert np.allclose(out.mean(axis=0), 0.0)
        assert np.allclose(out.std(axis=0), 1.0)

    def test_unfitted_raises(self):
        with pytest.raises(ValueError):
            Standardizer().transform(np.zeros((2, 2)))


class TestSerialization:
    def test_round_trip_structural_equality(self):
        rng = random.Random(23)
        for _ in range(50):
            model = random_linear_model(rng)
            text = model_to_text(model)
            assert model_from_text(text) == model
            assert model_to_text(model_from_text(text)) == text

    def test_round_trip_all_kernel_families(self):
        rng = random.Random(29)
        base = random_linear_model(rng)
        for spec in (
            KernelSpec.polynomial(degree=4, gamma=0.25, coef0=1.5),
            KernelSpec.rbf(gamma=1.0 / 3.0),
            KernelSpec.sigmoid(gamma=0.125, coef0=-0.75),
        ):
            model = SvmModel(
                kernel=spec,
                support_examples=base.support_examples,
                alphas=base.alphas,
                bias=base.bias,
            )
            assert model_from_text(model_to_text(model)) == model

    def test_seventeen_digit_floats_round_trip_exactly(self):
        model = single_support_model(features=(1 / 3, math.pi), alpha=math.e, bias=math.sqrt(2))
        restored = model_from_text(model_to_text(model))
        assert restored.bias == model.bias
        assert restored.alphas == model.alphas
        assert restored.support_examples == model.support_examples

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "not-a-model v1 family=linear bias=0 supports=0\n",
            "routesvm-model v2 family=linear bias=0 supports=0\n",
            "routesvm-model v1 family=linear bias=0 supports=1\n",
            "routesvm-model v1 family=linear bias=zz supports=0\n",
            "routesvm-model v1 family=linear bias=0 supports=1\n1.0 1\n",
            "routesvm-model v1 family=linear bias=0 supports=0 extra=1\n",
        ],
    )
    def test_malformed_model_text(self, text):
        with pytest.raises(ModelFormatError):
            model_from_text(text)
