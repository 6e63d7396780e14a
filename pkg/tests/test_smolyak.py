"""Smolyak quadrature and pseudospectral operators.

Covers:
- Smolyak quadrature equals the brute-force combination of tensor rules
- pseudospectral operator reproduces its range on random admissible sets (property)
- full-tensor set reduces to the tensor operator
- range, exact set, distinct points, aliasing report screening
- direct quadrature on a full tensor rule
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LEG, brute_force_combination, random_admissible_set
from smolyak_pce.expansion import PolynomialExpansion
from smolyak_pce.multiindex import MultiIndexSet, full_tensor_set, total_order_set
from smolyak_pce.quadrature import QuadratureFamily, QuadratureKind, integrate, tensor_rule_for
from smolyak_pce.smolyak import (
    SmolyakSpec,
    aliasing_report,
    direct_quadrature,
    exact_degrees,
    smolyak_exact_degrees,
    smolyak_pseudospectral,
    smolyak_quadrature,
    smolyak_range,
)
from smolyak_pce.tensorop import TensorPseudospectralSpec, tensor_pseudospectral

GL, GE, CC, GP = (QuadratureKind.GAUSS_LINEAR, QuadratureKind.GAUSS_EXPONENTIAL,
                  QuadratureKind.CLENSHAW_CURTIS, QuadratureKind.GAUSS_PATTERSON)


def smooth(x):
    return np.exp(0.3 * x[:, 0] - 0.5 * x[:, 1]) + np.sin(x.sum(axis=1))


class TestQuadrature:
    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([GL, GE, CC, GP]), st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_equals_brute_force_combination(self, kind, size, seed):
        fam = QuadratureFamily(kind)
        levels = random_admissible_set(np.random.default_rng(seed), 2, size, caps=(6, 6))
        spec = SmolyakSpec(levels, (fam, fam))
        ref = sum(c * integrate(tensor_rule_for((fam, fam), k), smooth)
                  for k, c in brute_force_combination(levels).items())
        assert smolyak_quadrature(smooth, spec) == pytest.approx(ref, abs=1e-13)

    def test_full_tensor_set_is_tensor_rule(self):
        fam = QuadratureFamily(GL)
        spec = SmolyakSpec(full_tensor_set((3, 4)), (fam, fam))
        assert smolyak_quadrature(smooth, spec) == pytest.approx(
            integrate(tensor_rule_for((fam, fam), (3, 4)), smooth), abs=1e-15)


class TestPseudospectral:
    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([(GL, "legendre"), (GL, "hermite"), (GE, "legendre"), (CC, "legendre")]),
           st.integers(1, 15), st.integers(0, 2**32 - 1))
    def test_reproduces_range_polynomials(self, kind_poly, size, seed):
        fam = QuadratureFamily(*kind_poly)
        rng = np.random.default_rng(seed)
        levels = random_admissible_set(rng, 2, size, caps=(5, 5))
        spec = SmolyakSpec(levels, (fam, fam))
        J = smolyak_range(spec).sorted()
        truth = PolynomialExpansion(spec.polynomials, dict(zip(J, rng.standard_normal(len(J)))))
        got = smolyak_pseudospectral(truth.evaluate, spec)
        assert set(got.indices()) == set(J)
        for j in J:
            assert got[j] == pytest.approx(truth[j], abs=1e-11)

    def test_full_tensor_set_reduces_to_tensor_operator(self):
        fams = (QuadratureFamily(GL), QuadratureFamily(CC))
        spec = SmolyakSpec(full_tensor_set((4, 3)), fams)
        a = smolyak_pseudospectral(smooth, spec)
        b = tensor_pseudospectral(smooth, TensorPseudospectralSpec((4, 3), fams))
        assert a.as_dict() == pytest.approx(b.as_dict(), abs=1e-15)

    def test_requires_level_floor_one(self):
        with pytest.raises(ValueError, match="1-based"):
            SmolyakSpec(MultiIndexSet([(0, 0)], floor=0), (QuadratureFamily(GL),) * 2)


class TestSets:
    def test_range_is_union_of_boxes(self):
        fam = QuadratureFamily(GE)
        spec = SmolyakSpec(total_order_set(2, 4), (fam, fam))
        rng = smolyak_range(spec)
        expected = {j for k in spec.levels for j in itertools.product(*[range(q + 1) for q in spec.truncation(k)])}
        assert set(rng) == expected
        assert len(rng) == 48
        assert rng.floor == 0

    def test_exact_set_predicate(self):
        fam = QuadratureFamily(GE)
        spec = SmolyakSpec(total_order_set(2, 4), (fam, fam))
        exact = smolyak_exact_degrees(spec)
        assert exact((31, 1)) and exact((15, 3)) and exact((7, 7))
        assert not exact((8, 4)) and not exact((32, 0))
        assert exact_degrees(spec)((7, 7))

    def test_points_are_distinct_union(self):
        fam = QuadratureFamily(CC)
        spec = SmolyakSpec(total_order_set(2, 3), (fam, fam))
        pts = spec.points()
        assert len(pts) == len({tuple(p) for p in pts.tolist()})
        assert len(pts) == 29  # level-3 Clenshaw-Curtis sparse grid in 2D


class TestDirectAndAliasing:
    def test_direct_on_tensor_rule_matches_tensor_operator(self):
        fams = (QuadratureFamily(GL), QuadratureFamily(GL))
        spec = TensorPseudospectralSpec((5, 5), fams)
        ref = tensor_pseudospectral(smooth, spec)
        got = direct_quadrature(smooth, ref.indices(), spec)
        assert got.as_dict() == pytest.approx(ref.as_dict(), abs=1e-15)

    def test_direct_report_lists_inexact_products(self):
        fams = (QuadratureFamily(GL),)
        spec = TensorPseudospectralSpec((2,), fams)  # exact to degree 3
        pairs = aliasing_report([(0,), (1,), (2,)], spec)
        assert pairs == [((2,), (2,))]

    def test_smolyak_report_screens_internal_pairs(self):
        fam = QuadratureFamily(GE)
        spec = SmolyakSpec(total_order_set(2, 4), (fam, fam))
        J = smolyak_range(spec).sorted()
        assert aliasing_report(J, spec, "smolyak", external=J) == []

    def test_smolyak_report_flags_uncovered_external(self):
        fam = QuadratureFamily(GE)
        spec = SmolyakSpec(total_order_set(2, 4), (fam, fam))
        J = smolyak_range(spec).sorted()
        pairs = aliasing_report(J, spec, "smolyak", external=[(20, 0), (0, 40)])
        assert ((0, 0), (0, 40)) in pairs
        assert all(jp[0] >= j[0] and jp[1] >= j[1] for j, jp in pairs)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            aliasing_report([(0,)], TensorPseudospectralSpec((1,), (QuadratureFamily(GL),)), "other")

    def test_smolyak_method_needs_spec(self):
        with pytest.raises(TypeError):
            aliasing_report([(0,)], TensorPseudospectralSpec((1,), (QuadratureFamily(GL),)), "smolyak")


def test_example_family_uses_uniform_weight():
    assert QuadratureFamily(GE).polynomial is LEG
