"""Genz test functions.

Covers:
- pointwise forms against scalar reference implementations
- closed-form integrals over [-1, 1]^d against high-order tensor Gauss quadrature
- seeded sampling: normalization, decay, reproducibility
- serialization, domain checks
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from smolyak_pce.basis import DomainError
from smolyak_pce.genz import DEFAULT_B, UNIT_CUBE_B, GenzInstance, GenzKind, genz_eval, genz_sample
from smolyak_pce.quadrature import QuadratureFamily, QuadratureKind, integrate, tensor_rule_for


def reference(kind, c, w, x):
    """Scalar loop implementations of the six forms on [-1, 1]^d."""
    d = len(c)
    if kind == "oscillatory":
        return math.cos(2 * math.pi * w[0] + sum(ci * xi for ci, xi in zip(c, x)))
    if kind == "product_peak":
        return math.prod(1.0 / (ci**-2 + (xi - wi) ** 2) for ci, xi, wi in zip(c, x, w))
    if kind == "corner_peak":
        return (1 + sum(ci * (xi + 1) / 2 for ci, xi in zip(c, x))) ** (-(d + 1))
    if kind == "gaussian":
        return math.exp(-sum(ci**2 * (xi - wi) ** 2 for ci, xi, wi in zip(c, x, w)))
    if kind == "continuous":
        return math.exp(-sum(ci**2 * abs(xi - wi) for ci, xi, wi in zip(c, x, w)))
    if x[0] > w[0] or x[1] > w[1]:
        return 0.0
    return math.exp(sum(ci * xi for ci, xi in zip(c, x)))


def closed_form_integral(inst):
    """Mean over the uniform density on [-1, 1]^d for the three product-structured smooth kinds."""
    c, w = inst.c, inst.w
    if inst.kind is GenzKind.OSCILLATORY:
        return (np.exp(2j * np.pi * w[0]) * np.prod(np.sin(c) / c)).real
    if inst.kind is GenzKind.PRODUCT_PEAK:
        return np.prod(c / 2 * (np.arctan(c * (1 - w)) + np.arctan(c * (1 + w))))
    return np.prod(np.sqrt(np.pi) / (4 * c) * (erf(c * (1 - w)) + erf(c * (1 + w))))


class TestForms:
    @pytest.mark.parametrize("kind", [k.value for k in GenzKind])
    def test_against_reference(self, kind):
        inst = genz_sample(kind, 3, seed=11)
        x = np.random.default_rng(0).uniform(-1, 1, (50, 3))
        ref = [reference(kind, inst.c, inst.w, p) for p in x]
        np.testing.assert_allclose(inst(x), ref, rtol=1e-13)

    @pytest.mark.parametrize("kind", ["oscillatory", "product_peak", "gaussian"])
    def test_integral_against_closed_form(self, kind):
        inst = genz_sample(kind, 3, seed=5, decay=True)
        rule = tensor_rule_for((QuadratureFamily(QuadratureKind.GAUSS_LINEAR),) * 3, (40, 40, 40))
        assert integrate(rule, inst) == pytest.approx(closed_form_integral(inst), rel=1e-10)

    def test_single_point_returns_float(self):
        assert isinstance(genz_eval(genz_sample("gaussian", 2), np.zeros(2)), float)

    def test_domain(self):
        with pytest.raises(DomainError):
            genz_sample("gaussian", 2)(np.array([1.5, 0.0]))

    def test_dimension_check(self):
        with pytest.raises(ValueError, match="dimension"):
            genz_sample("gaussian", 2)(np.zeros((1, 3)))

    def test_discontinuous_needs_two_dims(self):
        with pytest.raises(ValueError):
            GenzInstance("discontinuous", [1.0], [0.5])


class TestSampling:
    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(list(GenzKind)), st.integers(1, 8), st.integers(0, 10**6))
    def test_normalization(self, kind, d, seed):
        if kind is GenzKind.DISCONTINUOUS and d < 2:
            return
        inst = genz_sample(kind, d, seed=seed)
        assert inst.w.sum() == pytest.approx(1.0)
        assert inst.c.sum() == pytest.approx(DEFAULT_B[kind])
        assert np.all(inst.c > 0) and np.all(inst.w > 0)

    def test_decay_scales_coefficients(self):
        plain = genz_sample("oscillatory", 4, seed=3)
        decayed = genz_sample("oscillatory", 4, seed=3, decay=True)
        np.testing.assert_allclose(decayed.c / plain.c, np.exp(np.arange(1, 5) / 5))
        np.testing.assert_array_equal(decayed.w, plain.w)

    def test_seed_reproducible(self):
        a, b = genz_sample("product_peak", 5, seed=9), genz_sample("product_peak", 5, seed=9)
        np.testing.assert_array_equal(a.c, b.c)
        assert not np.array_equal(a.c, genz_sample("product_peak", 5, seed=10).c)

    def test_defaults(self):
        assert DEFAULT_B[GenzKind.OSCILLATORY] == UNIT_CUBE_B[GenzKind.OSCILLATORY] / 2
        assert DEFAULT_B[GenzKind.CORNER_PEAK] == UNIT_CUBE_B[GenzKind.CORNER_PEAK]
        assert DEFAULT_B[GenzKind.CONTINUOUS] == DEFAULT_B[GenzKind.GAUSSIAN]

    def test_rejects_bad_b(self):
        with pytest.raises(ValueError):
            genz_sample("gaussian", 2, b=0.0)

    def test_parse_accepts_dashes(self):
        assert GenzKind.parse("product-peak") is GenzKind.PRODUCT_PEAK
        with pytest.raises(ValueError, match="expected one of"):
            GenzKind.parse("bumpy")


class TestSerialization:
    def test_roundtrip_bitwise(self):
        inst = genz_sample("corner_peak", 4, seed=2, decay=True)
        back = GenzInstance.from_dict(json.loads(inst.to_json()))
        np.testing.assert_array_equal(back.c, inst.c)
        np.testing.assert_array_equal(back.w, inst.w)
        assert back.kind is inst.kind and back.decay and back.b == inst.b

    def test_dimension_mismatch(self):
        data = genz_sample("gaussian", 2).to_dict()
        data["d"] = 3
        with pytest.raises(ValueError):
            GenzInstance.from_dict(data)

    def test_arrays_read_only(self):
        inst = genz_sample("gaussian", 2)
        with pytest.raises(ValueError):
            inst.c[0] = 1.0
