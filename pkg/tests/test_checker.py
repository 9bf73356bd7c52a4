"""Condition checker: certificates, falsification witnesses, ladder minimality."""

import random
from fractions import Fraction

import pytest

from rdx3.checker import (
    CERTIFIED,
    FALSIFIED,
    UNKNOWN,
    WITNESS_MARGIN,
    ConditionReport,
    IwscWeights,
    NonlinearityTriple,
    SamplerConfig,
    check_all,
    check_growth,
    check_isc,
    check_iwsc,
    check_mass_control,
    check_quasi_positivity,
    lemma_liws_probe,
)
from rdx3.poly import Poly3, X1, X2, X3, affine_weight

LAM = affine_weight()


def intro_triple(b=5, c=5):
    return NonlinearityTriple(
        f=X2**5 - X1**6,
        g=X3**7 - b * X2**5,
        h=X1**6 - c * X3**7,
    )


ZERO_TRIPLE = NonlinearityTriple(Poly3.zero(), Poly3.zero(), Poly3.zero())


class TestQuasiPositivity:
    def test_cyclic_exchange_certifies(self):
        n = NonlinearityTriple(
            f=X2**2 - X1**3,
            g=X3**2 - 5 * X2**2,
            h=2 * X1**3 - 3 * X3**2,
        )
        assert check_quasi_positivity(n).status == CERTIFIED

    def test_negative_reaction_witness(self):
        n = NonlinearityTriple(-X2, Poly3.zero(), Poly3.zero())
        v = check_quasi_positivity(n)
        assert v.status == FALSIFIED
        assert v.witness == (0, 1, 0)

    def test_lv_interaction_certifies(self):
        # each reaction carries its own species as a factor
        inner = -X1 - 2 * X2 + X3
        n = NonlinearityTriple(X1 * inner, X2 * inner, X3 * inner)
        assert check_quasi_positivity(n).status == CERTIFIED


class TestMassControl:
    def test_intro_dissipative(self):
        v, k1 = check_mass_control(intro_triple())
        assert v.status == CERTIFIED
        assert k1 == 0

    def test_conservation(self):
        n = NonlinearityTriple(X2 - X1, X3 - X2, X1 - X3)
        v, k1 = check_mass_control(n)
        assert v.status == CERTIFIED
        assert k1 == 0

    def test_cubic_beats_linear(self):
        uvw = X1 * X2 * X3
        n = NonlinearityTriple(uvw, uvw, uvw)
        v, k1 = check_mass_control(n)
        assert v.status == FALSIFIED
        assert k1 is None
        # witness violates the capped inequality by an exact positive amount
        x = v.witness
        total = (n.f + n.g + n.h).eval(x)
        assert total - Fraction(2) ** 64 * LAM.eval(x) == v.margin > WITNESS_MARGIN

    def test_ladder_minimality(self):
        n = NonlinearityTriple(3 * X1, Poly3.zero(), Poly3.zero())
        v, k1 = check_mass_control(n)
        assert v.status == CERTIFIED
        assert k1 == 4  # smallest power of two above 3


class TestIwsc:
    def test_intro_certifies_at_four(self):
        v, ks = check_iwsc(intro_triple(), IwscWeights(4, 4))
        assert v.status == CERTIFIED
        assert ks == (0, 0, 0)

    def test_intro_falsified_above_b(self):
        v, ks = check_iwsc(intro_triple(), IwscWeights(6, 6))
        assert v.status == FALSIFIED
        assert ks is None
        x = v.witness
        assert x[0] == 0 and x[1] > 0 and x[2] == 0  # second-axis ray

    def test_zero_triple(self):
        v, ks = check_iwsc(ZERO_TRIPLE, IwscWeights(7, 3))
        assert v.status == CERTIFIED
        assert ks == (0, 0, 0)

    def test_nonzero_constants_minimal(self):
        n = NonlinearityTriple(X2 - X1, X3 - X2, X1 - X3)
        v, ks = check_iwsc(n, IwscWeights(2, 2))
        assert v.status == CERTIFIED
        # rows reduce to (lam-1)(v-u), (lam-1)(w-u), mixed; minimal ladder constants
        assert ks == (1, 1, 2)

    def test_weights_validation(self):
        with pytest.raises(ValueError):
            IwscWeights(2, Fraction(1, 2))
        with pytest.raises(ValueError):
            IwscWeights(1, 2)
        with pytest.raises(ValueError):
            IwscWeights(0, 0)
        assert IwscWeights(4, 4).branch == "above_one"
        assert IwscWeights(Fraction(1, 2), Fraction(1, 3)).branch == "below_one"


class TestGrowth:
    def test_intro_order_seven(self):
        m, big_m = check_growth(intro_triple())
        assert m == 7
        assert big_m == 1

    def test_weight_itself(self):
        n = NonlinearityTriple(LAM, LAM, LAM)
        assert check_growth(n) == (1, 1)

    def test_quadratic_family(self):
        n = NonlinearityTriple(
            f=X2**2 - X1**2,
            g=X3**2 - 2 * X2**2,
            h=X1**2 - 2 * X3**2,
        )
        assert check_growth(n)[0] == 2

    def test_floor_at_one(self):
        n = NonlinearityTriple(Poly3.constant(5), Poly3.zero(), Poly3.zero())
        m, big_m = check_growth(n)
        assert m == 1
        assert big_m == 8  # smallest power of two with 5 <= M * 1


class TestIsc:
    def test_intro_falsified_on_second_axis(self):
        v = check_isc(intro_triple())
        assert v.status == FALSIFIED
        x = v.witness
        assert x[0] == 0 and x[1] > 0 and x[2] == 0

    def test_zero_triple(self):
        assert check_isc(ZERO_TRIPLE).status == CERTIFIED

    def test_nonpositive_rows(self):
        n = NonlinearityTriple(-X1, -X2, -X3)
        assert check_isc(n, 1).status == CERTIFIED

    def test_matrix_validation(self):
        with pytest.raises(ValueError):
            check_isc(ZERO_TRIPLE, 1, matrix=((1, 1, 0), (0, 1, 0), (0, 0, 1)))
        with pytest.raises(ValueError):
            check_isc(ZERO_TRIPLE, 1, matrix=((0, 0, 0), (1, 1, 0), (1, 1, 1)))
        with pytest.raises(ValueError):
            check_isc(ZERO_TRIPLE, Fraction(3, 2))


class TestLiwsProbe:
    def test_nonpositive_phi(self):
        assert lemma_liws_probe(-X1, Poly3.zero(), 3, 0, 0, 2)

    def test_mixed_sign_phi(self):
        assert lemma_liws_probe(X1 - X2, X2, 2, 2, 2, Fraction(3, 2))

    def test_equality_case(self):
        assert lemma_liws_probe(Poly3.zero(), LAM, 2, 1, 1, Fraction(3, 2))

    def test_below_one_branch(self):
        assert lemma_liws_probe(X1 - X2, X2, Fraction(1, 2), 2, 2, Fraction(3, 4))

    def test_rejects_uncertified_premise(self):
        with pytest.raises(ValueError):
            lemma_liws_probe(X1**2, Poly3.zero(), 2, 1, 1, Fraction(3, 2))

    def test_rejects_alpha_star_outside(self):
        with pytest.raises(ValueError):
            lemma_liws_probe(-X1, Poly3.zero(), 2, 0, 0, 3)

    def test_rejects_alpha_one(self):
        with pytest.raises(ValueError):
            lemma_liws_probe(-X1, Poly3.zero(), 1, 0, 0, 1)


class TestSoundnessAndDeterminism:
    def test_certified_holds_at_1e5_integer_points(self):
        # exact soundness scan: certified inequalities hold with zero slack
        n = intro_triple()
        _, k1 = check_mass_control(n)
        v, ks = check_iwsc(n, IwscWeights(4, 4))
        assert v.status == CERTIFIED
        total = n.f + n.g + n.h
        rows = [
            4 * n.f + n.g + n.h,
            4 * n.f + 4 * n.g + n.h,
            16 * n.f + 4 * n.g + n.h,
        ]
        rng = random.Random(123)
        for _ in range(100_000):
            x = tuple(rng.randrange(0, 1001) for _ in range(3))
            wx = LAM.eval(x)
            assert total.eval(x) <= k1 * wx
            for row, k in zip(rows, ks):
                assert row.eval(x) <= k * wx

    def test_verdict_deterministic_in_seed(self):
        uvw = X1 * X2 * X3
        n = NonlinearityTriple(uvw, uvw, uvw)
        a1, _ = check_mass_control(n, SamplerConfig(seed=5))
        a2, _ = check_mass_control(n, SamplerConfig(seed=5))
        b, _ = check_mass_control(n, SamplerConfig(seed=99))
        assert a1 == a2
        assert b.status == FALSIFIED

    def test_unknown_is_reachable(self):
        # pointwise true but not coefficientwise certifiable: u(vw - v^2 - w^2)
        f = X1 * (X2 * X3 - X2**2 - X3**2)
        n = NonlinearityTriple(f, Poly3.zero(), Poly3.zero())
        v, k1 = check_mass_control(n)
        assert v.status == UNKNOWN
        assert k1 is None


class TestReport:
    def test_intro_report_shape(self):
        report = check_all(intro_triple(), IwscWeights(4, 4))
        obj = report.to_json()
        assert list(obj) == ["quasi_positive", "mass_control", "iwsc", "growth", "isc", "summary"]
        assert obj["summary"]["all_certified"] is True
        assert obj["summary"]["zero_constants"] is True
        assert obj["isc"]["verdict"]["status"] == FALSIFIED
        assert obj["isc"]["informational"] is True

    def test_isc_does_not_block_certification(self):
        report = check_all(intro_triple(), IwscWeights(4, 4))
        assert isinstance(report, ConditionReport)
        assert report.all_certified()
        assert report.isc.status == FALSIFIED
