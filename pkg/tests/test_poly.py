"""Exact polynomial substrate: ring laws, evaluation, derivatives, serialization."""

import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdx3.poly import Poly3, X1, X2, X3, affine_weight, dominates

LAM = affine_weight()


def rand_poly(rng, max_terms=5, max_exp=4, max_coeff=9):
    terms = {}
    for _ in range(rng.randrange(1, max_terms + 1)):
        e = tuple(rng.randrange(0, max_exp + 1) for _ in range(3))
        terms[e] = Fraction(rng.randrange(-max_coeff, max_coeff + 1), rng.randrange(1, 4))
    return Poly3(terms)


coeffs = st.fractions(min_value=-9, max_value=9, max_denominator=8)
exponents = st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4))
polys = st.dictionaries(exponents, coeffs, min_size=0, max_size=5).map(Poly3)


class TestEval:
    def test_weight_at_origin(self):
        assert LAM.eval((0, 0, 0)) == 1

    def test_symmetric_cancellation(self):
        p = X2**5 - X1**6
        assert p.eval((1, 1, 0)) == 0

    def test_mixed_point(self):
        p = X2**5 - X1**6
        assert p.eval((2, 1, 0)) == -63

    def test_rational_point_exact(self):
        p = 3 * X1 * X3 - Fraction(1, 2) * X2**2
        x = (Fraction(1, 3), Fraction(2, 5), Fraction(7, 2))
        assert p.eval(x) == 3 * Fraction(1, 3) * Fraction(7, 2) - Fraction(1, 2) * Fraction(2, 5) ** 2


class TestRingOps:
    def test_scale_by_zero(self):
        assert (LAM * 0).is_zero()

    def test_additive_inverse(self):
        assert (X1 + (-X1)).is_zero()

    def test_square_of_weight(self):
        sq = LAM * LAM
        assert sq.coefficient((1, 1, 0)) == 2
        assert sq.coefficient((2, 0, 0)) == 1

    def test_no_zero_terms_stored(self):
        p = X1 * X2 - X1 * X2 + X3
        assert (0, 0, 0) not in p.terms
        assert all(c != 0 for c in p.terms.values())
        assert p == X3

    @settings(max_examples=60, deadline=None)
    @given(polys, polys)
    def test_add_mul_commute(self, p, q):
        assert p + q == q + p
        assert p * q == q * p

    @settings(max_examples=40, deadline=None)
    @given(polys, polys, polys)
    def test_associativity_distributivity(self, p, q, r):
        assert (p + q) + r == p + (q + r)
        assert (p * q) * r == p * (q * r)
        assert p * (q + r) == p * q + p * r

    def test_eval_is_ring_homomorphism(self):
        rng = random.Random(7)
        for _ in range(100):
            p, q = rand_poly(rng), rand_poly(rng)
            x = tuple(Fraction(rng.randrange(0, 64), rng.randrange(1, 8)) for _ in range(3))
            assert (p + q).eval(x) == p.eval(x) + q.eval(x)
            assert (p * q).eval(x) == p.eval(x) * q.eval(x)

    def test_mul_against_sympy(self):
        sympy = pytest.importorskip("sympy")
        u, v, w = sympy.symbols("u v w")

        def lift(p):
            return sum(
                sympy.Rational(c) * u**e1 * v**e2 * w**e3 for (e1, e2, e3), c in p.terms.items()
            )

        rng = random.Random(11)
        for _ in range(20):
            p, q = rand_poly(rng), rand_poly(rng)
            ours = lift(p * q)
            theirs = sympy.expand(lift(p) * lift(q))
            assert sympy.simplify(ours - theirs) == 0


class TestDegree:
    def test_weight_degree(self):
        assert LAM.total_degree() == 1

    def test_degree_seven(self):
        assert (X3**7 - 5 * X2**5).total_degree() == 7

    def test_constant_degree(self):
        assert Poly3.constant(5).total_degree() == 0

    def test_zero_degree_convention(self):
        assert Poly3.zero().total_degree() == 0


class TestDerivative:
    def test_product_rule_case(self):
        assert (X1**2 * X3).partial_derivative(1) == 2 * X1 * X3

    def test_weight_derivative(self):
        assert LAM.partial_derivative(2) == Poly3.constant(1)

    def test_power_rule(self):
        c = Fraction(3)
        p = X2**5 - c * X3**7
        assert p.partial_derivative(3) == -7 * c * X3**6

    def test_matches_finite_differences(self):
        p = X1**2 * X3 + X2**5 - 2 * X1 * X2 * X3
        x = np.array([1.3]), np.array([0.7]), np.array([0.9])
        h = 1e-4
        for axis in (1, 2, 3):
            shift = [np.zeros(1)] * 3
            shift[axis - 1] = np.array([h])
            plus = p.eval_arrays(*(xi + s for xi, s in zip(x, shift)))
            minus = p.eval_arrays(*(xi - s for xi, s in zip(x, shift)))
            fd = (plus - minus) / (2 * h)
            exact = p.partial_derivative(axis).eval_arrays(*x)
            assert abs(fd[0] - exact[0]) <= 10 * h**2

    def test_matches_sympy(self):
        sympy = pytest.importorskip("sympy")
        u, v, w = sympy.symbols("u v w")
        rng = random.Random(5)
        for _ in range(10):
            p = rand_poly(rng)
            expr = sum(
                sympy.Rational(c) * u**e1 * v**e2 * w**e3 for (e1, e2, e3), c in p.terms.items()
            )
            for axis, var in ((1, u), (2, v), (3, w)):
                ours = p.partial_derivative(axis)
                ours_expr = sum(
                    sympy.Rational(c) * u**e1 * v**e2 * w**e3
                    for (e1, e2, e3), c in ours.terms.items()
                )
                assert sympy.simplify(ours_expr - sympy.diff(expr, var)) == 0


class TestDominates:
    def test_weight_dominates_coordinate(self):
        assert dominates(LAM, X1)

    def test_negative_coefficient(self):
        b = 5
        assert dominates(Poly3.zero(), (1 - b) * X2**5)

    def test_not_coefficientwise(self):
        assert not dominates(Poly3.zero(), X1 - X2)
        # and indeed the pointwise inequality fails too
        assert (X1 - X2).eval((1, 0, 0)) > 0

    def test_implies_pointwise(self):
        rng = random.Random(3)
        for _ in range(20):
            p = rand_poly(rng)
            slack = Poly3(
                {
                    tuple(rng.randrange(0, 4) for _ in range(3)): -Fraction(rng.randrange(0, 5))
                    for _ in range(3)
                }
            )
            q = p + slack
            assert dominates(p, q)
            pts = np.random.default_rng(42).uniform(0, 10, size=(500, 3))
            pv = p.eval_arrays(pts[:, 0], pts[:, 1], pts[:, 2])
            qv = q.eval_arrays(pts[:, 0], pts[:, 1], pts[:, 2])
            assert np.all(qv <= pv + 1e-9 * np.maximum(1, np.abs(pv)))


class TestSerialization:
    def test_round_trip_bit_exact(self):
        rng = random.Random(9)
        for _ in range(30):
            p = rand_poly(rng)
            blob = json.dumps(p.to_json_obj())
            q = Poly3.from_json_obj(json.loads(blob))
            assert p == q
            assert p.terms == q.terms

    def test_graded_lex_order(self):
        p = X3**2 + X1 + X2**2 * X1 + Poly3.constant(4)
        records = p.to_json_obj()
        keys = [tuple(r["e"]) for r in records]
        assert keys == [(0, 0, 0), (1, 0, 0), (0, 0, 2), (1, 2, 0)]

    def test_num_den_format(self):
        p = Fraction(-3, 2) * X1
        assert p.to_json_obj() == [{"e": [1, 0, 0], "c": "-3/2"}]

    def test_duplicate_triples_rejected(self):
        with pytest.raises(ValueError):
            Poly3.from_json_obj([{"e": [0, 0, 0], "c": "1/1"}, {"e": [0, 0, 0], "c": "2/1"}])


class TestValidation:
    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            Poly3({(-1, 0, 0): 1})

    def test_bad_axis_rejected(self):
        with pytest.raises(ValueError):
            X1.partial_derivative(4)
        with pytest.raises(ValueError):
            Poly3.variable(0)

    def test_float_coefficients_read_as_decimal(self):
        p = Poly3({(1, 0, 0): 1.1})
        assert p.coefficient((1, 0, 0)) == Fraction(11, 10)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            X1 ** (-1)
