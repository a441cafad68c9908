"""
Exact arithmetic for eigenvalue certification.

Rational numbers and polynomials come from sympy. This module adds the
value types the certificates are expressed in (RatPoly, QuadExt,
AngleSpec), cyclotomic polynomials, minimal polynomials of rotation
eigenvalues recovered from exact traces, and the root-of-unity test
behind the irrational-angle condition.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy import Poly, QQ, Rational
from sympy.ntheory.continued_fraction import (
    continued_fraction_convergents,
    continued_fraction_iterator,
)

from lib.errors import (
    AngleParseError,
    IdentityInput,
    NotMonic,
    TraceNotRepresentable,
    TraceOutOfRange,
)
from lib.linalg_groups import Rot3, axis_angle_of

logger = logging.getLogger(__name__)

LAMBDA = sympy.Symbol('lambda')

DEFAULT_CF_BOUND = 10 ** 6
DEFAULT_CF_TOL = 1e-12
DEFAULT_CF_SCALED_TOL = 1e-3
# rotations whose angle/pi matches p/q with q up to this are treated as exact
EXACT_RECOVERY_DENOMINATOR = 10 ** 4


def to_rational(x: Any) -> Rational:
    """Convert ints, strings like '5/3' and sympy numbers to a reduced Rational."""
    r = sympy.Rational(x)
    if not r.is_Rational:
        raise TypeError(f"not a rational number: {x!r}")
    return r


def rational_to_json(r: Rational) -> List[int]:
    return [int(r.p), int(r.q)]


@dataclass(frozen=True)
class RatPoly:
    """
    Polynomial in lambda with rational coefficients, constant term first.

    Trailing zero coefficients are stripped, so the leading coefficient
    is always nonzero.
    """

    coeffs: Tuple[Rational, ...]

    def __post_init__(self):
        coeffs = [to_rational(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            raise ValueError("the zero polynomial is not a valid RatPoly")
        object.__setattr__(self, 'coeffs', tuple(coeffs))

    @classmethod
    def from_poly(cls, poly: Poly) -> 'RatPoly':
        return cls(tuple(reversed(poly.all_coeffs())))

    @classmethod
    def from_json(cls, pairs: Sequence[Sequence[int]]) -> 'RatPoly':
        return cls(tuple(Rational(int(n), int(d)) for n, d in pairs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    @property
    def is_palindromic(self) -> bool:
        return self.coeffs == tuple(reversed(self.coeffs))

    @property
    def has_integer_coeffs(self) -> bool:
        return all(c.q == 1 for c in self.coeffs)

    def as_poly(self) -> Poly:
        return Poly(list(reversed(self.coeffs)), LAMBDA, domain=QQ)

    def monic(self) -> 'RatPoly':
        lead = self.coeffs[-1]
        return RatPoly(tuple(c / lead for c in self.coeffs))

    def evaluate(self, z: complex) -> complex:
        return complex(np.polyval([float(c) for c in reversed(self.coeffs)], z))

    def numeric_roots(self) -> np.ndarray:
        return np.roots([float(c) for c in reversed(self.coeffs)])

    def to_json(self) -> List[List[int]]:
        return [rational_to_json(c) for c in self.coeffs]

    def __str__(self) -> str:
        return str(self.as_poly().as_expr())


@dataclass(frozen=True)
class QuadExt:
    """
    Element a + b*sqrt(d) of a real quadratic field.

    d is made square-free on construction; rational values are stored
    with b = 0 and d = 1.
    """

    a: Rational
    b: Rational = Rational(0)
    d: int = 1

    def __post_init__(self):
        a = to_rational(self.a)
        b = to_rational(self.b)
        d = int(self.d)
        if d <= 0:
            raise ValueError(f"QuadExt needs a positive radicand, got {d}")
        square, free = 1, 1
        for prime, exp in sympy.factorint(d).items():
            square *= prime ** (exp // 2)
            free *= prime ** (exp % 2)
        b = b * square
        if free == 1:
            a, b = a + b, Rational(0)
        if b == 0:
            free = 1
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'd', free)

    @classmethod
    def coerce(cls, x: Union['QuadExt', Any]) -> 'QuadExt':
        if isinstance(x, QuadExt):
            return x
        return cls(to_rational(x))

    @classmethod
    def from_sympy(cls, expr: Any) -> 'QuadExt':
        """
        Read a sympy expression of the form a + b*sqrt(d).

        Raises:
            TraceNotRepresentable: If the expression has any other shape
        """
        expr = sympy.radsimp(sympy.expand(sympy.sympify(expr)))
        a, b, d = Rational(0), Rational(0), None
        for term in sympy.Add.make_args(expr):
            coeff, rest = term.as_coeff_Mul()
            if not coeff.is_Rational:
                raise TraceNotRepresentable(f"non-rational coefficient in {expr}")
            if rest == 1:
                a += coeff
                continue
            if not (rest.is_Pow and rest.exp == Rational(1, 2)
                    and rest.base.is_Integer and rest.base > 0):
                raise TraceNotRepresentable(f"{expr} is not of the form a + b*sqrt(d)")
            radicand = int(rest.base)
            if d is not None and radicand != d:
                raise TraceNotRepresentable(f"{expr} mixes sqrt({d}) and sqrt({radicand})")
            d = radicand
            b += coeff
        return cls(a, b, d or 1)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def _radicand_with(self, other: 'QuadExt') -> int:
        if self.is_rational:
            return other.d
        if other.is_rational or other.d == self.d:
            return self.d
        raise TraceNotRepresentable(
            f"cannot combine sqrt({self.d}) and sqrt({other.d}) in one quadratic field"
        )

    def __add__(self, other: Any) -> 'QuadExt':
        other = QuadExt.coerce(other)
        d = self._radicand_with(other)
        return QuadExt(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self) -> 'QuadExt':
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other: Any) -> 'QuadExt':
        return self + (-QuadExt.coerce(other))

    def __rsub__(self, other: Any) -> 'QuadExt':
        return QuadExt.coerce(other) - self

    def __mul__(self, other: Any) -> 'QuadExt':
        other = QuadExt.coerce(other)
        d = self._radicand_with(other)
        return QuadExt(
            self.a * other.a + self.b * other.b * d,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def conjugate(self) -> 'QuadExt':
        return QuadExt(self.a, -self.b, self.d)

    def to_sympy(self) -> sympy.Expr:
        return self.a + self.b * sympy.sqrt(self.d)

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def to_json(self) -> Dict[str, Any]:
        return {'a': rational_to_json(self.a), 'b': rational_to_json(self.b), 'd': self.d}

    def __str__(self) -> str:
        if self.is_rational:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.d})"


_PI_FORM = re.compile(r'^(?P<sign>[+-]?)pi(?:\*(?P<p>\d+)(?:/(?P<q>\d+))?|/(?P<q2>\d+))?$')
_SQRT_FORM = re.compile(
    r'^(?P<sign>[+-]?)sqrt:(?P<d>\d+)(?P<pi>\*pi)?(?:\*(?P<p>\d+)(?:/(?P<q>\d+))?)?$'
)
_MULTIPLE_OF_PI_FORM = re.compile(r'^(?P<x>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\*pi$')
_DECIMAL_FORM = re.compile(r'^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$')

ANGLE_KINDS = ('rational_pi', 'symbolic_quad', 'quad_radians', 'numeric')


@dataclass(frozen=True)
class AngleSpec:
    """
    An angle that remembers how exactly it is known.

    Kinds:
        rational_pi: value is a Rational r, angle = r*pi
        symbolic_quad: value is an irrational QuadExt q, angle = q*pi
        quad_radians: value is a nonzero QuadExt q, angle = q radians
        numeric: value is a float number of radians
    """

    kind: str
    value: Any

    def __post_init__(self):
        if self.kind not in ANGLE_KINDS:
            raise ValueError(f"unknown angle kind: {self.kind}")
        if self.kind == 'numeric':
            value = float(self.value)
            if not math.isfinite(value):
                raise ValueError("numeric angle must be finite")
            object.__setattr__(self, 'value', value)
        elif self.kind == 'rational_pi':
            object.__setattr__(self, 'value', to_rational(self.value))
        else:
            object.__setattr__(self, 'value', QuadExt.coerce(self.value))

    @classmethod
    def rational_pi(cls, r: Any) -> 'AngleSpec':
        return cls('rational_pi', to_rational(r))

    @classmethod
    def symbolic_quad(cls, q: QuadExt) -> 'AngleSpec':
        q = QuadExt.coerce(q)
        if q.is_rational:
            return cls.rational_pi(q.a)
        return cls('symbolic_quad', q)

    @classmethod
    def quad_radians(cls, q: QuadExt) -> 'AngleSpec':
        q = QuadExt.coerce(q)
        if q.is_rational and q.a == 0:
            return cls.rational_pi(0)
        return cls('quad_radians', q)

    @classmethod
    def numeric(cls, x: float) -> 'AngleSpec':
        return cls('numeric', x)

    @classmethod
    def parse(cls, text: str) -> 'AngleSpec':
        """
        Parse an angle flag.

        Accepted forms: ``pi``, ``pi*p``, ``pi*p/q``, ``pi/q``,
        ``sqrt:d*pi``, ``sqrt:d*pi*p/q`` (exact multiples of pi),
        ``sqrt:d``, ``sqrt:d*p/q`` (exact radians), ``x*pi`` and plain
        decimals (numeric). A leading sign is allowed; ``0`` is exact.

        Raises:
            AngleParseError: If the text matches none of the forms
        """
        s = text.strip().replace(' ', '')
        sign = -1 if s.startswith('-') else 1

        m = _PI_FORM.match(s)
        if m:
            p = int(m.group('p') or 1)
            q = int(m.group('q') or m.group('q2') or 1)
            if q == 0:
                raise AngleParseError(f"zero denominator in angle {text!r}")
            return cls.rational_pi(Rational(sign * p, q))

        m = _SQRT_FORM.match(s)
        if m:
            p = int(m.group('p') or 1)
            q = int(m.group('q') or 1)
            if q == 0:
                raise AngleParseError(f"zero denominator in angle {text!r}")
            d = int(m.group('d'))
            if d == 0:
                return cls.rational_pi(0)
            value = QuadExt(0, Rational(sign * p, q), d)
            if m.group('pi'):
                return cls.symbolic_quad(value)
            return cls.quad_radians(value)

        m = _MULTIPLE_OF_PI_FORM.match(s)
        if m:
            literal = m.group('x')
            if re.fullmatch(r'[+-]?\d+', literal):
                return cls.rational_pi(int(literal))
            return cls.numeric(float(literal) * math.pi)

        if _DECIMAL_FORM.match(s):
            x = float(s)
            if x == 0.0:
                return cls.rational_pi(0)
            return cls.numeric(x)

        raise AngleParseError(
            f"cannot parse angle {text!r}; expected pi*p/q, sqrt:d*pi*p/q or a decimal"
        )

    @property
    def is_exact(self) -> bool:
        return self.kind != 'numeric'

    def radians(self) -> float:
        if self.kind == 'rational_pi':
            return float(self.value) * math.pi
        if self.kind == 'symbolic_quad':
            return float(self.value) * math.pi
        return float(self.value)

    def over_pi(self) -> float:
        return self.radians() / math.pi

    def over_pi_is_rational(self) -> Optional[bool]:
        """Exact answer to 'is angle/pi rational', or None when only numerically known."""
        if self.kind == 'rational_pi':
            return True
        if self.kind in ('symbolic_quad', 'quad_radians'):
            # irrational QuadExt, or a nonzero algebraic number divided by pi
            return False
        return None

    def over_pi_is_integer(self) -> Optional[bool]:
        known = self.over_pi_is_rational()
        if known is None:
            return None
        return known and self.value.q == 1

    def value_is_rational(self) -> Optional[bool]:
        """Exact answer to 'is the angle itself (in radians) rational'."""
        if self.kind == 'rational_pi':
            return self.value == 0
        if self.kind == 'symbolic_quad':
            return False
        if self.kind == 'quad_radians':
            return self.value.is_rational
        return True if self.value == 0.0 else None

    def exact_cos_sin(self) -> Optional[Tuple[sympy.Expr, sympy.Expr]]:
        """Exact cos and sin as sympy expressions, for rational multiples of pi only."""
        if self.kind != 'rational_pi':
            return None
        angle = sympy.pi * self.value
        return sympy.cos(angle), sympy.sin(angle)

    def to_text(self) -> str:
        if self.kind == 'rational_pi':
            r = self.value
            return 'pi*0' if r == 0 else f"pi*{r.p}/{r.q}"
        if self.kind == 'symbolic_quad':
            return f"({self.value})*pi"
        if self.kind == 'quad_radians':
            return str(self.value)
        return repr(self.value)


@lru_cache(maxsize=None)
def _cyclotomic_poly(n: int) -> Poly:
    quotient = Poly(LAMBDA ** n - 1, LAMBDA, domain=QQ)
    for d in sympy.divisors(n)[:-1]:
        quotient = quotient.exquo(_cyclotomic_poly(d))
    return quotient


def cyclotomic(n: int) -> RatPoly:
    """
    The n-th cyclotomic polynomial, by dividing lambda^n - 1 by the
    cyclotomic polynomials of the proper divisors of n.

    Args:
        n: Positive order

    Returns:
        Integer-coefficient RatPoly
    """
    if n < 1:
        raise ValueError(f"cyclotomic order must be positive, got {n}")
    return RatPoly.from_poly(_cyclotomic_poly(n))


@dataclass(frozen=True)
class RootOfUnityVerdict:
    status: str  # 'yes', 'no' or 'not_applicable'
    order: Optional[int] = None


def _orders_with_totient(degree: int) -> List[int]:
    # phi(n) >= sqrt(n/2), so every solution of phi(n) = degree is below 2*degree^2 + 2
    bound = 2 * degree * degree + 2
    return [n for n in range(1, bound + 1) if sympy.totient(n) == degree]


def is_root_of_unity(f: RatPoly) -> RootOfUnityVerdict:
    """
    Decide whether an irreducible monic polynomial is cyclotomic.

    Args:
        f: Monic polynomial, irreducible over the rationals

    Returns:
        yes(order) when f is the cyclotomic polynomial of that order,
        no otherwise, not_applicable for constants

    Raises:
        NotMonic: If f is not monic
    """
    if not f.is_monic:
        raise NotMonic(f"polynomial {f} is not monic")
    if f.degree == 0:
        return RootOfUnityVerdict('not_applicable')
    if not f.has_integer_coeffs:
        return RootOfUnityVerdict('no')
    for n in _orders_with_totient(f.degree):
        if cyclotomic(n) == f:
            return RootOfUnityVerdict('yes', n)
    return RootOfUnityVerdict('no')


def min_poly_from_trace(trace: Union[QuadExt, Any]) -> RatPoly:
    """
    Minimal polynomial over the rationals of a non-unit eigenvalue zeta
    of a rotation with the given exact trace.

    With s = trace - 1 = zeta + 1/zeta, zeta is a root of
    lambda^2 - s*lambda + 1; for quadratic s the product with the field
    conjugate gives a rational quartic. The irreducible factor vanishing
    at zeta is returned, made monic.

    Args:
        trace: Exact trace as QuadExt or rational

    Returns:
        The minimal polynomial of zeta

    Raises:
        TraceOutOfRange: If |s| > 2
    """
    s = QuadExt.coerce(trace) - 1
    s_value = float(s)
    if abs(s_value) > 2.0 + 1e-12:
        raise TraceOutOfRange(f"s = tr - 1 = {s} lies outside [-2, 2]")

    if s.is_rational:
        full = Poly(LAMBDA ** 2 - s.a * LAMBDA + 1, LAMBDA, domain=QQ)
    else:
        s_bar = s.conjugate()
        e1 = (s + s_bar).a
        e2 = (s * s_bar).a
        full = Poly(
            LAMBDA ** 4 - e1 * LAMBDA ** 3 + (2 + e2) * LAMBDA ** 2 - e1 * LAMBDA + 1,
            LAMBDA, domain=QQ,
        )

    zeta = complex(np.exp(1j * math.acos(max(-1.0, min(1.0, s_value / 2.0)))))
    _, factors = full.factor_list()
    candidates = [RatPoly.from_poly(factor).monic() for factor, _ in factors]
    best = min(candidates, key=lambda g: abs(g.evaluate(zeta)))
    logger.debug(f"minimal polynomial for s = {s}: {best}")
    return best


@dataclass(frozen=True)
class ConditionC:
    """
    Outcome of the irrational-angle test.

    status is 'holds' (certificate = non-cyclotomic minimal polynomial or
    an exact irrationality reason), 'fails' (order = root-of-unity order)
    or 'numeric_only' (verdict 'likely_irrational' or 'likely_rational').
    With r the larger of residual/tol and q^2 residual/scaled_tol, confidence
    is 1 - r for likely_rational and 1 - 1/r (best convergent) for
    likely_irrational.
    """

    status: str
    order: Optional[int] = None
    certificate: Optional[RatPoly] = None
    verdict: Optional[str] = None
    confidence: Optional[float] = None
    transcript: Dict[str, Any] = field(default_factory=dict)

    def to_evidence(self) -> Dict[str, Any]:
        evidence: Dict[str, Any] = {'status': self.status}
        if self.order is not None:
            evidence['order'] = self.order
        if self.certificate is not None:
            evidence['minimal_polynomial'] = self.certificate.to_json()
            evidence['minimal_polynomial_text'] = str(self.certificate)
        if self.verdict is not None:
            evidence['verdict'] = self.verdict
        if self.confidence is not None:
            evidence['confidence'] = self.confidence
        evidence.update(self.transcript)
        return evidence


def root_of_unity_order(r: Rational) -> int:
    """Multiplicative order of exp(i*pi*r) for rational r."""
    r = to_rational(r)
    two_q = 2 * r.q
    return two_q // math.gcd(int(r.p), two_q)


def continued_fraction_test(x: float, bound: int = DEFAULT_CF_BOUND,
                            tol: float = DEFAULT_CF_TOL,
                            scaled_tol: float = DEFAULT_CF_SCALED_TOL) -> ConditionC:
    """
    Numeric rationality test of x = angle/pi by continued-fraction convergents.

    A convergent p/q matches when |x - p/q| <= tol and q^2 |x - p/q| <= scaled_tol.
    Convergents of an irrational x keep q^2 |x - p/q| near 1/(a+2), a being
    the next partial quotient.

    Args:
        x: The ratio angle/pi
        bound: Largest convergent denominator examined
        tol: Residual below which a convergent may count as a match
        scaled_tol: Bound on q^2 times the residual for a match

    Returns:
        numeric_only ConditionC with the convergent transcript
    """
    exact = Rational(x)
    best_ratio = math.inf
    best = None
    best_residual = math.inf
    for convergent in continued_fraction_convergents(continued_fraction_iterator(exact)):
        if convergent.q > bound:
            break
        residual = float(abs(exact - convergent))
        ratio = max(residual / tol, residual * float(convergent.q) ** 2 / scaled_tol)
        if ratio < best_ratio:
            best_ratio, best, best_residual = ratio, convergent, residual
        if ratio <= 1.0:
            order = root_of_unity_order(convergent)
            return ConditionC(
                'numeric_only', order=order, verdict='likely_rational',
                confidence=1.0 - ratio,
                transcript={'angle_over_pi': x, 'convergent': rational_to_json(convergent),
                            'residual': residual, 'denominator_bound': bound, 'tolerance': tol,
                            'scaled_tolerance': scaled_tol},
            )
    transcript: Dict[str, Any] = {'angle_over_pi': x, 'residual': best_residual,
                                  'denominator_bound': bound, 'tolerance': tol,
                                  'scaled_tolerance': scaled_tol}
    if best is not None:
        transcript['best_convergent'] = rational_to_json(best)
    return ConditionC('numeric_only', verdict='likely_irrational',
                      confidence=1.0 - 1.0 / best_ratio, transcript=transcript)


def check_condition_C(subject: Union[AngleSpec, QuadExt, Rot3, Any],
                      bound: int = DEFAULT_CF_BOUND,
                      tol: float = DEFAULT_CF_TOL) -> ConditionC:
    """
    Test whether a rotation angle is an irrational multiple of pi.

    A Rot3 whose angle/pi matches p/q with q <= EXACT_RECOVERY_DENOMINATOR
    gets the exact rational-angle verdict.

    Args:
        subject: An AngleSpec, an exact trace (QuadExt or rational), or a Rot3
        bound: Continued-fraction denominator bound for the numeric path
        tol: Continued-fraction tolerance for the numeric path

    Returns:
        ConditionC with status holds, fails or numeric_only
    """
    if isinstance(subject, AngleSpec):
        if subject.kind == 'rational_pi':
            order = root_of_unity_order(subject.value)
            return ConditionC('fails', order=order,
                              transcript={'angle': subject.to_text(),
                                          'minimal_polynomial': cyclotomic(order).to_json()})
        if subject.kind == 'symbolic_quad':
            return ConditionC('holds', transcript={
                'angle': subject.to_text(),
                'reason': f"angle/pi = {subject.value} is a quadratic irrational",
            })
        if subject.kind == 'quad_radians':
            return ConditionC('holds', transcript={
                'angle': subject.to_text(),
                'reason': 'angle is a nonzero algebraic number, so angle/pi is transcendental',
            })
        return continued_fraction_test(subject.over_pi(), bound, tol)

    if isinstance(subject, Rot3):
        try:
            theta = axis_angle_of(subject).theta
        except IdentityInput:
            theta = 0.0
        numeric = continued_fraction_test(theta / math.pi, bound, tol)
        if numeric.verdict == 'likely_rational':
            p, q = numeric.transcript['convergent']
            if q <= EXACT_RECOVERY_DENOMINATOR:
                recovered = check_condition_C(AngleSpec.rational_pi(Rational(p, q)))
                recovered.transcript.update(
                    {'recovered_from': 'rotation', 'residual': numeric.transcript['residual']})
                return recovered
        return numeric

    trace = QuadExt.coerce(subject)
    poly = min_poly_from_trace(trace)
    verdict = is_root_of_unity(poly)
    transcript = {'trace': str(trace), 'trace_exact': trace.to_json()}
    if verdict.status == 'yes':
        transcript['minimal_polynomial'] = poly.to_json()
        return ConditionC('fails', order=verdict.order, transcript=transcript)
    return ConditionC('holds', certificate=poly, transcript=transcript)
