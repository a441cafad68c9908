"""Tests for exact arithmetic and the irrational-angle test."""

import math

import pytest
import sympy
from sympy import Rational

from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.errors import AngleParseError, NotMonic, TraceNotRepresentable, TraceOutOfRange
from lib.exact_algebra import (
    AngleSpec,
    QuadExt,
    RatPoly,
    check_condition_C,
    continued_fraction_test,
    cyclotomic,
    is_root_of_unity,
    min_poly_from_trace,
    root_of_unity_order,
)
from lib.linalg_groups import c_theta


class TestRatPoly:
    """Rational polynomials, constant term first."""

    def test_trailing_zeros_are_stripped(self):
        f = RatPoly((1, 2, 0, 0))
        assert f.degree == 1
        assert f.coeffs == (Rational(1), Rational(2))

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            RatPoly((0, 0))

    def test_monic_and_palindromic(self):
        f = RatPoly((2, 4, 2))
        assert not f.is_monic
        assert f.is_palindromic
        assert f.monic().coeffs == (1, 2, 1)

    def test_json_pairs(self):
        f = RatPoly((1, 2, Rational(5, 2), 2, 1))
        assert f.to_json() == [[1, 1], [2, 1], [5, 2], [2, 1], [1, 1]]
        assert RatPoly.from_json(f.to_json()) == f

    def test_evaluate(self):
        f = RatPoly((1, 0, 1))
        assert abs(f.evaluate(1j)) < 1e-15


class TestQuadExt:
    """Quadratic field arithmetic."""

    def test_radicand_made_square_free(self):
        q = QuadExt(0, 1, 8)
        assert (q.a, q.b, q.d) == (0, 2, 2)

    def test_perfect_square_becomes_rational(self):
        q = QuadExt(1, 3, 4)
        assert q.is_rational
        assert q.a == 7

    def test_product_with_conjugate_is_rational(self):
        q = QuadExt(1, 1, 2)
        product = q * q.conjugate()
        assert product.is_rational
        assert product.a == -1

    def test_mixed_radicands_rejected(self):
        with pytest.raises(TraceNotRepresentable):
            QuadExt(0, 1, 2) + QuadExt(0, 1, 3)

    def test_rational_operands_mix_freely(self):
        q = 1 - QuadExt(0, Rational(1, 2), 2)
        assert (q.a, q.b, q.d) == (1, Rational(-1, 2), 2)

    def test_from_sympy(self):
        q = QuadExt.from_sympy(1 + sympy.sqrt(2) / 2)
        assert (q.a, q.b, q.d) == (1, Rational(1, 2), 2)

    def test_from_sympy_rejects_other_shapes(self):
        with pytest.raises(TraceNotRepresentable):
            QuadExt.from_sympy(sympy.sqrt(2) + sympy.sqrt(3))
        with pytest.raises(TraceNotRepresentable):
            QuadExt.from_sympy(sympy.pi)

    def test_float_value(self):
        assert float(QuadExt(1, 1, 2)) == pytest.approx(1 + math.sqrt(2))


class TestAngleSpec:
    """Parsing of angle flags."""

    @pytest.mark.parametrize('text,value', [
        ('pi', Rational(1)),
        ('pi/4', Rational(1, 4)),
        ('pi*2/5', Rational(2, 5)),
        ('-pi*1/3', Rational(-1, 3)),
        ('2*pi', Rational(2)),
        ('0', Rational(0)),
    ])
    def test_rational_multiples(self, text, value):
        angle = AngleSpec.parse(text)
        assert angle.kind == 'rational_pi'
        assert angle.value == value
        assert angle.is_exact

    def test_quadratic_multiple_of_pi(self):
        angle = AngleSpec.parse('sqrt:2*pi')
        assert angle.kind == 'symbolic_quad'
        assert angle.radians() == pytest.approx(math.sqrt(2) * math.pi)
        assert angle.over_pi_is_rational() is False

    def test_square_radicand_collapses(self):
        angle = AngleSpec.parse('sqrt:4*pi')
        assert angle.kind == 'rational_pi'
        assert angle.value == 2

    def test_quadratic_radians(self):
        angle = AngleSpec.parse('sqrt:3*1/2')
        assert angle.kind == 'quad_radians'
        assert angle.radians() == pytest.approx(math.sqrt(3) / 2)

    def test_numeric_forms(self):
        assert AngleSpec.parse('0.5*pi').kind == 'numeric'
        angle = AngleSpec.parse('1.25')
        assert angle.kind == 'numeric'
        assert not angle.is_exact
        assert angle.over_pi_is_rational() is None

    def test_unparseable(self):
        with pytest.raises(AngleParseError):
            AngleSpec.parse('tau/2')

    def test_parse_error_is_value_error(self):
        with pytest.raises(ValueError):
            AngleSpec.parse('pi/0')

    def test_integer_multiple_check(self):
        assert AngleSpec.parse('pi*3').over_pi_is_integer() is True
        assert AngleSpec.parse('pi/2').over_pi_is_integer() is False
        assert AngleSpec.parse('0.3').over_pi_is_integer() is None

    def test_exact_cos_sin(self):
        cos, sin = AngleSpec.parse('pi/4').exact_cos_sin()
        assert cos == sympy.sqrt(2) / 2
        assert sin == sympy.sqrt(2) / 2
        assert AngleSpec.parse('sqrt:2*pi').exact_cos_sin() is None


class TestCyclotomic:
    """Cyclotomic polynomials and the root-of-unity decision."""

    def test_small_orders(self):
        assert cyclotomic(1).coeffs == (-1, 1)
        assert cyclotomic(4).coeffs == (1, 0, 1)
        assert cyclotomic(6).coeffs == (1, -1, 1)
        assert cyclotomic(12).coeffs == (1, 0, -1, 0, 1)

    def test_degree_is_totient(self):
        for n in range(1, 201):
            assert cyclotomic(n).degree == sympy.totient(n)

    def test_divides_lambda_power_minus_one(self):
        lam = sympy.Symbol('lambda')
        for n in range(1, 201):
            power = sympy.Poly(lam ** n - 1, lam, domain=sympy.QQ)
            assert power.rem(cyclotomic(n).as_poly()).is_zero

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            cyclotomic(0)

    @pytest.mark.parametrize('n', range(1, 101))
    def test_recognises_every_cyclotomic(self, n):
        verdict = is_root_of_unity(cyclotomic(n))
        assert verdict.status == 'yes'
        assert verdict.order == n

    def test_non_integer_coefficients(self):
        verdict = is_root_of_unity(RatPoly((1, 2, Rational(5, 2), 2, 1)))
        assert verdict.status == 'no'

    def test_integer_but_not_cyclotomic(self):
        assert is_root_of_unity(RatPoly((1, -3, 1))).status == 'no'

    def test_constant(self):
        assert is_root_of_unity(RatPoly((1,))).status == 'not_applicable'

    def test_requires_monic(self):
        with pytest.raises(NotMonic):
            is_root_of_unity(RatPoly((1, 2)))

    def test_root_of_unity_order(self):
        assert root_of_unity_order(Rational(1, 3)) == 6
        assert root_of_unity_order(Rational(2, 5)) == 5
        assert root_of_unity_order(Rational(1)) == 2
        assert root_of_unity_order(Rational(0)) == 1


class TestMinimalPolynomial:
    """Minimal polynomials recovered from exact traces."""

    def test_trace_three_is_identity(self):
        assert min_poly_from_trace(3).coeffs == (-1, 1)

    def test_trace_minus_one_is_half_turn(self):
        assert min_poly_from_trace(-1) == cyclotomic(2)

    def test_quarter_turn(self):
        assert min_poly_from_trace(1) == cyclotomic(4)

    def test_quadratic_trace(self):
        # tr = sqrt(2)/2: quarter turn about e1 times an eighth turn about an orthogonal axis
        poly = min_poly_from_trace(QuadExt(0, Rational(1, 2), 2))
        assert poly.to_json() == [[1, 1], [2, 1], [5, 2], [2, 1], [1, 1]]

    def test_quadratic_trace_with_cyclotomic_factor(self):
        # tr = 1 + sqrt(2): s = sqrt(2), eigenvalue exp(i*pi/4)
        poly = min_poly_from_trace(QuadExt(1, 1, 2))
        assert poly == cyclotomic(8)

    def test_out_of_range(self):
        with pytest.raises(TraceOutOfRange):
            min_poly_from_trace(4)


class TestConditionC:
    """The irrational-angle test on exact and numeric inputs."""

    def test_rational_angle_fails_with_order(self):
        result = check_condition_C(AngleSpec.parse('pi/3'))
        assert result.status == 'fails'
        assert result.order == 6

    def test_quadratic_multiple_holds(self):
        result = check_condition_C(AngleSpec.parse('sqrt:2*pi'))
        assert result.status == 'holds'
        assert 'quadratic irrational' in result.to_evidence()['reason']

    def test_algebraic_radians_hold(self):
        assert check_condition_C(AngleSpec.parse('sqrt:2')).status == 'holds'

    def test_exact_trace_holds_with_certificate(self):
        result = check_condition_C(QuadExt(0, Rational(1, 2), 2))
        assert result.status == 'holds'
        evidence = result.to_evidence()
        assert evidence['minimal_polynomial'][2] == [5, 2]

    def test_exact_trace_fails(self):
        result = check_condition_C(Rational(0))
        assert result.status == 'fails'
        assert result.order == 3

    def test_numeric_rational(self):
        result = continued_fraction_test(0.25)
        assert result.status == 'numeric_only'
        assert result.verdict == 'likely_rational'
        assert result.order == 8
        assert result.confidence == pytest.approx(1.0)

    def test_numeric_irrational(self):
        result = continued_fraction_test(math.sqrt(2), bound=10 ** 4, tol=1e-12)
        assert result.verdict == 'likely_irrational'
        assert 0.0 < result.confidence < 1.0
        assert result.transcript['denominator_bound'] == 10 ** 4

    def test_rotation_with_rational_angle_is_exact(self):
        result = check_condition_C(c_theta(math.pi / 2))
        assert result.status == 'fails'
        assert result.order == 4
        assert result.transcript['recovered_from'] == 'rotation'
        assert result.transcript['minimal_polynomial'] == cyclotomic(4).to_json()

    def test_rotation_with_irrational_angle_stays_numeric(self):
        result = check_condition_C(c_theta(math.sqrt(2) * math.pi))
        assert result.status == 'numeric_only'
        assert result.verdict == 'likely_irrational'

    def test_identity_rotation_has_order_one(self):
        result = check_condition_C(c_theta(0.0))
        assert result.status == 'fails'
        assert result.order == 1

    @pytest.mark.parametrize('d', [2, 3, 5, 7, 11])
    def test_quadratic_irrationals_at_default_bound(self, d):
        result = continued_fraction_test(math.sqrt(d))
        assert result.verdict == 'likely_irrational'
        assert result.transcript['denominator_bound'] == 10 ** 6
        assert 'convergent' not in result.transcript

    def test_close_convergent_is_not_a_match(self):
        # 978122/564719 lies within 1e-12 of sqrt(3)
        plain = continued_fraction_test(math.sqrt(3), scaled_tol=math.inf)
        assert plain.transcript['convergent'] == [978122, 564719]
        result = continued_fraction_test(math.sqrt(3))
        assert result.verdict == 'likely_irrational'
        assert 0.0 < result.confidence < 1.0

    @pytest.mark.parametrize('p, q', [(1, 3), (2, 7), (5, 12), (7, 360), (1234, 9973)])
    def test_small_denominator_rationals_match(self, p, q):
        result = continued_fraction_test(p / q)
        assert result.verdict == 'likely_rational'
        assert result.transcript['convergent'] == [p, q]

    def test_numeric_angle_spec(self):
        result = check_condition_C(AngleSpec.numeric(1.0), bound=10 ** 4)
        assert result.status == 'numeric_only'
        assert result.verdict == 'likely_irrational'


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
