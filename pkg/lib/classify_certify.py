"""
Hypothesis checkers, finite-subgroup classification and derived generators.

Certificates report 'holds' or 'fails' only on exact evidence (rational
multiples of pi, quadratic-surd traces, minimal polynomials). Angles that
are only known as floats go through the continued-fraction test and come
back as 'numeric_only' together with its transcript.
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy import Poly, QQ, Rational

from lib.errors import BadCaseParams, IdentityInput, TraceNotRepresentable
from lib.exact_algebra import (
    DEFAULT_CF_BOUND,
    DEFAULT_CF_TOL,
    LAMBDA,
    AngleSpec,
    ConditionC,
    QuadExt,
    RatPoly,
    check_condition_C,
    continued_fraction_test,
    min_poly_from_trace,
    rational_to_json,
)
from lib.linalg_groups import (
    SU2,
    GroupElement,
    Rot3,
    U2Mat,
    axis_angle_of,
    b_theta,
    c_theta,
    common_kind,
    conj_su2,
    lift_so3_pair,
    matrix_power,
    matrix_to_json,
    phi_cover,
    rotation_angle,
    su2_lift,
    to_array,
    v_phi_gamma,
)
from lib.orbit_explorer import DEFAULT_TOL, GroupBall, OrbitReport, group_ball, orbit

logger = logging.getLogger(__name__)

CLAIMS = ('condA', 'condB', 'condC', 'thm_main', 'thm_main2', 'thm_main3', 'thm_main4',
          'thm_main5', 'prop_cond1', 'nondense')
VERDICTS = ('holds', 'fails', 'numeric_only')

MAX_EXACT_WORD = 4
CLASSIFY_EXACT_DEPTH = 6
CLASSIFY_EXACT_WORDS = 32
AXIS_TOL = 1e-9


@dataclass(frozen=True)
class Certificate:
    """Verdict on one claim, with the evidence that decided it."""

    claim: str
    verdict: str
    evidence: Dict[str, Any] = field(default_factory=dict)
    supporting: Tuple['Certificate', ...] = ()

    def __post_init__(self):
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim: {self.claim}")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict: {self.verdict}")

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            'claim': self.claim,
            'verdict': self.verdict,
            'evidence': self.evidence,
        }
        if self.supporting:
            payload['supporting'] = [c.to_json() for c in self.supporting]
        return payload


def _as_angle(value: Union[AngleSpec, str, float]) -> AngleSpec:
    if isinstance(value, AngleSpec):
        return value
    if isinstance(value, str):
        return AngleSpec.parse(value)
    return AngleSpec.numeric(float(value))


@dataclass(frozen=True)
class GenConfig:
    """
    Rotation angles theta1, theta2 of the two generators, the angle phi
    in (0, pi/2] between their axes, and the azimuth gamma of the second axis.
    """

    theta1: AngleSpec
    theta2: AngleSpec
    phi: AngleSpec
    gamma: AngleSpec = AngleSpec.rational_pi(0)

    def __post_init__(self):
        for name in ('theta1', 'theta2', 'phi', 'gamma'):
            object.__setattr__(self, name, _as_angle(getattr(self, name)))
        phi = self.phi.radians()
        if not 0.0 < phi <= math.pi / 2.0 + 1e-15:
            raise ValueError(f"phi must lie in (0, pi/2], got {phi!r}")

    @property
    def is_exact(self) -> bool:
        """True when every angle is a rational multiple of pi."""
        return all(a.kind == 'rational_pi' for a in (self.theta1, self.theta2, self.phi, self.gamma))

    def to_json(self) -> Dict[str, Any]:
        return {name: getattr(self, name).to_text()
                for name in ('theta1', 'theta2', 'phi', 'gamma')}


def gens_from_config(cfg: GenConfig) -> Tuple[Rot3, Rot3]:
    """(C(theta1), V C(theta2) V^T) with V = v_phi_gamma(phi, gamma)."""
    v = v_phi_gamma(cfg.phi.radians(), cfg.gamma.radians()).m
    c2 = v @ c_theta(cfg.theta2.radians()).m @ v.T
    return c_theta(cfg.theta1.radians()), Rot3(c2)


def su2_gens_from_config(cfg: GenConfig) -> Tuple[SU2, SU2]:
    """SU(2) lifts (B(theta1), U B(theta2) U^dagger) of the configuration's generators."""
    u = su2_lift(v_phi_gamma(cfg.phi.radians(), cfg.gamma.radians()))
    return b_theta(cfg.theta1.radians()), conj_su2(u, b_theta(cfg.theta2.radians()))


def u2_gens_from_config(cfg: GenConfig, phase: Union[AngleSpec, str, float]) -> Tuple[U2Mat, U2Mat]:
    """The SU(2) generators with the second one multiplied by e^{i phase}."""
    b1, b2 = su2_gens_from_config(cfg)
    gamma = _as_angle(phase).radians()
    return U2Mat(b1.m), U2Mat(np.exp(1j * gamma) * b2.m)


def polyhedral_config(kind: str) -> GenConfig:
    """
    Generator configuration for the tetrahedral (alt4), octahedral (sym4)
    or icosahedral (alt5) rotation group.

    alt4 pairs a half turn about a cube axis with a third turn about a body
    diagonal; sym4 uses a quarter turn instead; alt5 pairs a fifth turn
    about a vertex axis with the half turn about an adjacent edge midpoint.
    """
    diagonal = AngleSpec.numeric(math.acos(1.0 / math.sqrt(3.0)))
    if kind == 'alt4':
        return GenConfig(AngleSpec.rational_pi(1), AngleSpec.rational_pi(Rational(2, 3)), diagonal)
    if kind == 'sym4':
        return GenConfig(AngleSpec.rational_pi(Rational(1, 2)),
                         AngleSpec.rational_pi(Rational(2, 3)), diagonal)
    if kind == 'alt5':
        return GenConfig(AngleSpec.rational_pi(Rational(2, 5)), AngleSpec.rational_pi(1),
                         AngleSpec.numeric(math.atan(2.0) / 2.0))
    raise ValueError(f"unknown polyhedral group: {kind}")


_GEN_WORD_TOKEN = re.compile(r'-?[12]')


def parse_gen_word(text: str) -> Tuple[int, ...]:
    """Parse a generator word such as '12', '1-2' or '2,1,-1'."""
    compact = text.replace(',', '').replace(' ', '')
    tokens = _GEN_WORD_TOKEN.findall(compact)
    if ''.join(tokens) != compact:
        raise ValueError(f"generator word {text!r} may only contain 1, 2 and '-'")
    return tuple(int(t) for t in tokens)


def _sym_c(cos: sympy.Expr, sin: sympy.Expr) -> sympy.Matrix:
    return sympy.Matrix([[1, 0, 0], [0, cos, -sin], [0, sin, cos]])


def _sym_v(phi_cs: Tuple[sympy.Expr, sympy.Expr], gamma_cs: Tuple[sympy.Expr, sympy.Expr]) -> sympy.Matrix:
    cp, sp = phi_cs
    cg, sg = gamma_cs
    return sympy.Matrix([
        [cp, -sp * cg, -sp * sg],
        [sp * cg, sg * sg + cp * cg * cg, (cp - 1) * cg * sg],
        [sp * sg, (cp - 1) * cg * sg, cg * cg + cp * sg * sg],
    ])


def exact_gens(cfg: GenConfig) -> Tuple[sympy.Matrix, sympy.Matrix]:
    """
    The generators as sympy matrices with exact trigonometric entries.

    Raises:
        TraceNotRepresentable: If an angle is not a rational multiple of pi
    """
    if not cfg.is_exact:
        raise TraceNotRepresentable("configuration angles are not all rational multiples of pi")
    v = _sym_v(cfg.phi.exact_cos_sin(), cfg.gamma.exact_cos_sin())
    c1 = _sym_c(*cfg.theta1.exact_cos_sin())
    c2 = v * _sym_c(*cfg.theta2.exact_cos_sin()) * v.T
    return c1, c2


def exact_word_trace(cfg: GenConfig, word: Sequence[int],
                     max_length: int = MAX_EXACT_WORD) -> QuadExt:
    """
    Exact trace of a product of the configuration's generators.

    Args:
        cfg: Configuration with rational-pi angles
        word: Signed generator indices, applied left to right as a matrix product
        max_length: Longest word handled exactly

    Raises:
        TraceNotRepresentable: If the word is too long, an angle is inexact,
            or the trace leaves the rationals and a single quadratic field
    """
    if len(word) > max_length:
        raise TraceNotRepresentable(f"exact traces are limited to words of length {max_length}")
    c1, c2 = exact_gens(cfg)
    letters = {1: c1, 2: c2, -1: c1.T, -2: c2.T}
    product = sympy.eye(3)
    for letter in word:
        product = product * letters[letter]
    trace = sympy.simplify(sympy.sqrtdenest(sympy.expand(product.trace())))
    return QuadExt.from_sympy(trace)


@dataclass(frozen=True)
class NumericOnly:
    """Minimal polynomial not available exactly; value is the numeric eigenphase."""

    value: float
    reason: str

    def to_json(self) -> Dict[str, Any]:
        return {'status': 'numeric_only', 'eigenphase': self.value, 'reason': self.reason}


def minpoly_product(cfg: GenConfig, which: Union[str, Sequence[int]]) -> Union[RatPoly, NumericOnly]:
    """
    Minimal polynomial of a non-unit eigenvalue of a word product.

    Args:
        cfg: Generator configuration
        which: Word over the generators, e.g. '12'

    Returns:
        RatPoly from the exact trace, or NumericOnly with the product's
        rotation angle when the trace is not exactly representable
    """
    word = parse_gen_word(which) if isinstance(which, str) else tuple(which)
    try:
        return min_poly_from_trace(exact_word_trace(cfg, word))
    except TraceNotRepresentable as e:
        logger.warning(f"falling back to numeric eigenphase for word {word}: {e}")
        c1, c2 = gens_from_config(cfg)
        letters = {1: c1.m, 2: c2.m, -1: c1.m.T, -2: c2.m.T}
        product = np.eye(3)
        for letter in word:
            product = product @ letters[letter]
        return NumericOnly(rotation_angle(product), str(e))


def _combine_statuses(statuses: Sequence[str]) -> str:
    if any(s == 'fails' for s in statuses):
        return 'fails'
    if any(s == 'numeric_only' for s in statuses):
        return 'numeric_only'
    return 'holds'


@dataclass(frozen=True)
class _Truth:
    value: bool
    exact: bool
    detail: Dict[str, Any]

    def to_json(self) -> Dict[str, Any]:
        return {'value': self.value, 'exact': self.exact, **self.detail}


def _truth_verdict(truths: Sequence[_Truth]) -> Tuple[str, Optional[str]]:
    # conjunction of tri-state facts; the second entry is the likely outcome of numeric_only
    if any(not t.value and t.exact for t in truths):
        return 'fails', None
    if all(t.exact for t in truths):
        return 'holds', None
    return 'numeric_only', 'holds' if all(t.value for t in truths) else 'fails'


def _irrational_over_pi(angle: AngleSpec, bound: int, tol: float) -> _Truth:
    known = angle.over_pi_is_rational()
    if known is not None:
        return _Truth(not known, True, {'angle': angle.to_text()})
    test = continued_fraction_test(angle.over_pi(), bound, tol)
    return _Truth(test.verdict == 'likely_irrational', False, test.to_evidence())


def _rational_non_integer_over_pi(angle: AngleSpec, bound: int, tol: float) -> _Truth:
    known = angle.over_pi_is_rational()
    if known is not None:
        value = known and not angle.over_pi_is_integer()
        detail: Dict[str, Any] = {'angle': angle.to_text()}
        if known:
            detail['ratio'] = rational_to_json(angle.value)
        return _Truth(value, True, detail)
    test = continued_fraction_test(angle.over_pi(), bound, tol)
    rational = test.verdict == 'likely_rational'
    value = rational and test.transcript['convergent'][1] != 1
    return _Truth(value, False, test.to_evidence())


def _not_integer_over_pi(angle: AngleSpec, bound: int, tol: float) -> _Truth:
    known = angle.over_pi_is_integer()
    if known is not None:
        return _Truth(not known, True, {'angle': angle.to_text()})
    test = continued_fraction_test(angle.over_pi(), bound, tol)
    if test.verdict == 'likely_irrational':
        return _Truth(True, False, test.to_evidence())
    return _Truth(test.transcript['convergent'][1] != 1, False, test.to_evidence())


def _axis_or_none(r: Rot3) -> Optional[np.ndarray]:
    try:
        return axis_angle_of(r).axis
    except IdentityInput:
        return None


def _condition_a(k: int, c: Rot3, angle: Optional[AngleSpec], trace: Optional[QuadExt],
                 tol: float) -> Tuple[str, Dict[str, Any]]:
    if angle is not None and angle.over_pi_is_integer() is not None:
        holds = not angle.over_pi_is_integer()
        return ('holds' if holds else 'fails'), {'k': k, 'angle': angle.to_text(), 'method': 'exact'}
    if trace is not None:
        holds = trace not in (QuadExt(3), QuadExt(-1))
        return ('holds' if holds else 'fails'), {'k': k, 'trace': str(trace), 'method': 'exact'}
    deviation = float(np.max(np.abs(c.m @ c.m - np.eye(3))))
    return ('holds' if deviation > tol else 'fails'), {
        'k': k, 'square_deviation': deviation, 'method': 'numeric'}


def check_ABC(c1: Rot3, c2: Rot3,
              angles: Optional[Tuple[Optional[AngleSpec], Optional[AngleSpec]]] = None,
              exact_traces: Optional[Tuple[Optional[QuadExt], Optional[QuadExt]]] = None,
              phi: Optional[AngleSpec] = None,
              tol: float = DEFAULT_TOL, cf_bound: int = DEFAULT_CF_BOUND,
              cf_tol: float = DEFAULT_CF_TOL) -> List[Certificate]:
    """
    Certificates for (A) no square is the identity, (B) independent axes,
    (C) an angle that is an irrational multiple of pi.

    Args:
        c1, c2: The two rotations
        angles: Exact rotation angles of c1, c2 when known
        exact_traces: Exact traces of c1, c2 when known
        phi: Exact angle between the axes when known
        tol: Numeric tolerance for (A) and (B)

    Returns:
        [condA, condB, condC]
    """
    angles = angles or (None, None)
    exact_traces = exact_traces or (None, None)
    gens = (c1, c2)

    parts = [_condition_a(k + 1, gens[k], angles[k], exact_traces[k], tol) for k in range(2)]
    cond_a = Certificate('condA', _combine_statuses([p[0] for p in parts]),
                         {'generators': [p[1] for p in parts]})

    axes = [_axis_or_none(c) for c in gens]
    if axes[0] is None or axes[1] is None:
        cond_b = Certificate('condB', 'holds', {
            'note': 'an identity generator fixes every direction, so independent fixed vectors exist',
            'identity_generators': [k + 1 for k in range(2) if axes[k] is None]})
    elif phi is not None and phi.is_exact:
        cond_b = Certificate('condB', 'holds', {'phi': phi.to_text(), 'method': 'exact'})
    else:
        cross = float(np.linalg.norm(np.cross(axes[0], axes[1])))
        cond_b = Certificate('condB', 'holds' if cross > tol else 'fails', {
            'axes': [[float(x) for x in a] for a in axes], 'cross_norm': cross,
            'method': 'numeric'})

    results: List[ConditionC] = []
    for k in range(2):
        if angles[k] is not None:
            results.append(check_condition_C(angles[k], cf_bound, cf_tol))
        elif exact_traces[k] is not None:
            results.append(check_condition_C(exact_traces[k], cf_bound, cf_tol))
        else:
            results.append(check_condition_C(gens[k], cf_bound, cf_tol))
    statuses = [r.status for r in results]
    if 'holds' in statuses:
        verdict_c = 'holds'
    elif all(s == 'fails' for s in statuses):
        verdict_c = 'fails'
    else:
        verdict_c = 'numeric_only'
    evidence_c: Dict[str, Any] = {f"k{k + 1}": results[k].to_evidence() for k in range(2)}
    if verdict_c == 'numeric_only':
        likely = any(r.verdict == 'likely_irrational' for r in results)
        evidence_c['likely'] = 'holds' if likely else 'fails'
    cond_c = Certificate('condC', verdict_c, evidence_c)

    logger.info(f"(A) {cond_a.verdict}, (B) {cond_b.verdict}, (C) {cond_c.verdict}")
    return [cond_a, cond_b, cond_c]


def check_ABC_config(cfg: GenConfig, tol: float = DEFAULT_TOL, cf_bound: int = DEFAULT_CF_BOUND,
                     cf_tol: float = DEFAULT_CF_TOL) -> List[Certificate]:
    """check_ABC on the generators of a configuration, using its exact angles."""
    c1, c2 = gens_from_config(cfg)
    return check_ABC(c1, c2, angles=(cfg.theta1, cfg.theta2), phi=cfg.phi,
                     tol=tol, cf_bound=cf_bound, cf_tol=cf_tol)


def _theorem_from_abc(claim: str, conclusion: str, abc: List[Certificate]) -> Certificate:
    verdict = _combine_statuses([c.verdict for c in abc])
    evidence: Dict[str, Any] = {'conclusion': conclusion}
    if verdict == 'numeric_only':
        likely = all(c.verdict == 'holds' or c.evidence.get('likely') == 'holds' for c in abc)
        evidence['likely'] = 'holds' if likely else 'fails'
    return Certificate(claim, verdict, evidence, tuple(abc))


def check_thm_main(c1: Rot3, c2: Rot3, **abc_options: Any) -> Certificate:
    """Every orbit is dense in S^2 when (A), (B), (C) hold."""
    return _theorem_from_abc('thm_main', 'every orbit is dense in S^2',
                             check_ABC(c1, c2, **abc_options))


def check_thm_main2(c1: Rot3, c2: Rot3, **abc_options: Any) -> Certificate:
    """The generated group is dense in SO(3) when (A), (B), (C) hold."""
    return _theorem_from_abc('thm_main2', 'the generated group is dense in SO(3)',
                             check_ABC(c1, c2, **abc_options))


def check_prop_cond1(cfg: GenConfig, tol: float = DEFAULT_TOL, cf_bound: int = DEFAULT_CF_BOUND,
                     cf_tol: float = DEFAULT_CF_TOL) -> Certificate:
    """
    (a) one of theta1/pi, theta2/pi is irrational and (b) the other is not
    an integer. When this holds the (A)(B)(C) certificates of the
    configuration's generators are attached as supporting evidence.
    """
    thetas = (cfg.theta1, cfg.theta2)
    irrational = [_irrational_over_pi(t, cf_bound, cf_tol) for t in thetas]
    non_integer = [_not_integer_over_pi(t, cf_bound, cf_tol) for t in thetas]

    options = []
    for i, j in ((0, 1), (1, 0)):
        verdict, likely = _truth_verdict([irrational[i], non_integer[j]])
        options.append((verdict, likely, i))

    evidence: Dict[str, Any] = {
        'irrational_over_pi': [t.to_json() for t in irrational],
        'non_integer_over_pi': [t.to_json() for t in non_integer],
    }
    exact_holds = [o for o in options if o[0] == 'holds']
    if exact_holds:
        verdict = 'holds'
        evidence['irrational_generator'] = exact_holds[0][2] + 1
    elif all(o[0] == 'fails' for o in options):
        verdict = 'fails'
        no_irrational = all(not t.value and t.exact for t in irrational)
        evidence['failed_condition'] = 'a' if no_irrational else 'b'
    else:
        verdict = 'numeric_only'
        likely = any(o[0] == 'numeric_only' and o[1] == 'holds' for o in options)
        evidence['likely'] = 'holds' if likely else 'fails'

    supporting: Tuple[Certificate, ...] = ()
    if verdict == 'holds' or evidence.get('likely') == 'holds':
        supporting = tuple(check_ABC_config(cfg, tol, cf_bound, cf_tol))
    return Certificate('prop_cond1', verdict, evidence, supporting)


DERIVED_CASES = ('products', 'dihedral_pow2', 'dihedral_prime')


def derived_words(case: str, m: Optional[int] = None, n: Optional[int] = None,
                  p: Optional[int] = None) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    Generator words of the derived pair.

    Raises:
        BadCaseParams: If the case or its parameters are invalid
    """
    if case == 'products':
        return (1, 2), (2, 1)
    if case == 'dihedral_pow2':
        if m is None or m < 3:
            raise BadCaseParams(f"dihedral_pow2 needs m >= 3, got {m}")
        power = 2 ** (m - 3)
    elif case == 'dihedral_prime':
        if n is None or p is None or p <= 2 or not sympy.isprime(p) or n % p:
            raise BadCaseParams(f"dihedral_prime needs a prime p > 2 dividing n, got n={n}, p={p}")
        power = n // p
    else:
        raise BadCaseParams(f"unknown derived case {case!r}; expected one of {DERIVED_CASES}")
    return (1,) + (2,) * power, (2,) * power + (1,)


def derived_gens(case: str, c1p: Rot3, c2p: Rot3, m: Optional[int] = None,
                 n: Optional[int] = None, p: Optional[int] = None) -> Tuple[Rot3, Rot3]:
    """
    The pair (C1 P, P C1) with P = C2 for products, C2^(2^(m-3)) for
    dihedral_pow2 and C2^(n/p) for dihedral_prime. Both outputs are
    conjugate, so they share eigenvalues.

    Raises:
        BadCaseParams: If the case or its parameters are invalid
    """
    w1, _ = derived_words(case, m, n, p)
    power = matrix_power(c2p.m, len(w1) - 1)
    return Rot3(c1p.m @ power), Rot3(power @ c1p.m)


def default_derived_case(cfg: GenConfig) -> Optional[Tuple[str, Dict[str, int]]]:
    """
    Derived case implied by the angle pattern theta1 = phi = pi/2, theta2 = 2 pi/n.

    n = 2^m with m >= 3 gives dihedral_pow2; otherwise the smallest odd
    prime p dividing n gives dihedral_prime. Other configurations have no
    derived case.
    """
    half = Rational(1, 2)
    if not cfg.is_exact or cfg.theta1.value != half or cfg.phi.value != half:
        return None
    ratio = cfg.theta2.value
    if ratio <= 0:
        return None
    n = 2 / ratio
    if not n.is_integer or n < 3:
        return None
    n = int(n)
    if n & (n - 1) == 0:
        m = n.bit_length() - 1
        return ('dihedral_pow2', {'m': m}) if m >= 3 else None
    p = min(q for q in sympy.primefactors(n) if q > 2)
    return 'dihedral_prime', {'n': n, 'p': p}


def check_ABC_derived(cfg: GenConfig, case: str, m: Optional[int] = None,
                      n: Optional[int] = None, p: Optional[int] = None,
                      tol: float = DEFAULT_TOL, cf_bound: int = DEFAULT_CF_BOUND,
                      cf_tol: float = DEFAULT_CF_TOL) -> List[Certificate]:
    """check_ABC on a derived pair, with exact traces when the configuration allows them."""
    c1, c2 = gens_from_config(cfg)
    d1, d2 = derived_gens(case, c1, c2, m, n, p)
    traces: List[Optional[QuadExt]] = []
    for word in derived_words(case, m, n, p):
        try:
            traces.append(exact_word_trace(cfg, word))
        except TraceNotRepresentable as e:
            logger.warning(f"no exact trace for derived word {word}: {e}")
            traces.append(None)
    return check_ABC(d1, d2, exact_traces=(traces[0], traces[1]),
                     tol=tol, cf_bound=cf_bound, cf_tol=cf_tol)


def dihedral_prime_minpoly(n: int) -> RatPoly:
    """
    Minimal polynomial of a non-unit eigenvalue of C(pi/2) V C(2 pi/n) V^T
    with orthogonal axes.

    The product has trace cos(2 pi/n), so zeta + 1/zeta = cos(2 pi/n) - 1.
    cos(2 pi/n) is a root of T_n(y) - 1; its irreducible factor is shifted
    and eliminated against lambda^2 - s lambda + 1.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    y, s = sympy.symbols('y s')
    target = math.cos(2.0 * math.pi / n)
    _, factors = Poly(sympy.chebyshevt(n, y) - 1, y, domain=QQ).factor_list()
    cos_poly = min((f for f, _ in factors), key=lambda f: abs(complex(f.eval(target))))
    shifted = cos_poly.as_expr().subs(y, s + 1)
    eliminated = sympy.resultant(shifted, LAMBDA ** 2 - s * LAMBDA + 1, s)
    s_value = target - 1.0
    zeta = complex(np.exp(1j * math.acos(max(-1.0, min(1.0, s_value / 2.0)))))
    _, lam_factors = Poly(eliminated, LAMBDA, domain=QQ).factor_list()
    candidates = [RatPoly.from_poly(f).monic() for f, _ in lam_factors]
    return min(candidates, key=lambda g: abs(g.evaluate(zeta)))


@dataclass(frozen=True)
class Classification:
    """
    Isomorphism type of the generated group.

    kind is one of cyclic, dihedral, alt4, sym4, alt5, finite_other,
    infinite_likely, infinite_certified; order is the group order for
    the finite kinds.
    """

    kind: str
    order: Optional[int]
    saturated: bool
    ball_size: int
    cover_order: Optional[int] = None
    evidence: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            'kind': self.kind,
            'order': self.order,
            'saturated': self.saturated,
            'ball_size': self.ball_size,
        }
        if self.cover_order is not None:
            payload['cover_order'] = self.cover_order
        if self.evidence:
            payload['evidence'] = self.evidence
        return payload


def _rotation_orders(elements: np.ndarray) -> List[int]:
    bound = len(elements)
    cos = np.clip((np.trace(elements, axis1=1, axis2=2) - 1.0) / 2.0, -1.0, 1.0)
    fractions = np.arccos(cos) / (2.0 * math.pi)
    return [int(Rational(float(x)).limit_denominator(bound).q) for x in fractions]


def _commute(gens: Sequence[np.ndarray], tol: float) -> bool:
    return all(np.max(np.abs(a @ b - b @ a)) <= tol for a, b in itertools.combinations(gens, 2))


def _finite_kind(order: int, orders: List[int], abelian: bool) -> Tuple[str, Optional[int]]:
    top = set(orders)
    if abelian:
        if order == 4 and max(orders) == 2:
            return 'dihedral', 4
        if max(orders) == order:
            return 'cyclic', order
        return 'finite_other', order
    if order == 12 and top <= {1, 2, 3}:
        return 'alt4', 12
    if order == 24 and top <= {1, 2, 3, 4}:
        return 'sym4', 24
    if order == 60 and top <= {1, 2, 3, 5}:
        return 'alt5', 60
    half = order // 2
    if order % 2 == 0 and max(orders) == half and orders.count(2) >= half:
        return 'dihedral', order
    return 'finite_other', order


def _shortlex_words(max_length: int):
    letters = (1, 2, -1, -2)
    for length in range(1, max_length + 1):
        for word in itertools.product(letters, repeat=length):
            if any(a == -b for a, b in zip(word, word[1:])):
                continue
            yield word


def _exact_infinite_certificate(cfg: GenConfig) -> Optional[Dict[str, Any]]:
    for k, angle in ((1, cfg.theta1), (2, cfg.theta2)):
        if angle.over_pi_is_rational() is False:
            result = check_condition_C(angle)
            return {'generator': k, 'condition_c': result.to_evidence()}
    if not cfg.is_exact:
        return None
    examined = 0
    for word in _shortlex_words(CLASSIFY_EXACT_DEPTH):
        if examined >= CLASSIFY_EXACT_WORDS:
            break
        try:
            trace = exact_word_trace(cfg, word, max_length=CLASSIFY_EXACT_DEPTH)
        except TraceNotRepresentable:
            continue
        examined += 1
        result = check_condition_C(trace)
        if result.status == 'holds':
            return {'word': list(word), 'condition_c': result.to_evidence()}
    logger.info(f"no exact infinite-order certificate among {examined} words")
    return None


def classify(subject: Union[GenConfig, Sequence[GroupElement]], max_size: int = 100000,
             max_depth: int = 40, tol: float = DEFAULT_TOL,
             threads: Optional[int] = None) -> Classification:
    """
    Classify the group generated by a configuration or an explicit generator list.

    A saturated SO(3) ball is matched by order, element orders and
    commutativity. An unsaturated ball is reported infinite_certified when
    some element has an exactly irrational angle, else infinite_likely.
    SU(2) generators are classified through their SO(3) images and report
    the SU(2) ball size as cover_order.
    """
    cfg = subject if isinstance(subject, GenConfig) else None
    gens: List[GroupElement] = list(gens_from_config(cfg)) if cfg else list(subject)
    kind = common_kind(gens)

    cover_ball: Optional[GroupBall] = None
    if kind == 'su2':
        cover_ball = group_ball(gens, max_depth, max_size, tol, threads)
        gens = [phi_cover(g) for g in gens]
        kind = 'so3'

    ball = group_ball(gens, max_depth, max_size, tol, threads)
    cover_order = len(cover_ball) if cover_ball is not None and cover_ball.saturated else None

    if ball.saturated:
        order = len(ball)
        if kind == 'so3':
            orders = _rotation_orders(ball.elements)
            abelian = _commute([to_array(g) for g in gens], 1e-8)
            group_kind, group_order = _finite_kind(order, orders, abelian)
            evidence = {'element_orders': sorted(orders), 'abelian': abelian}
        else:
            group_kind, group_order = 'finite_other', order
            evidence = {}
        logger.info(f"classified as {group_kind}({group_order})")
        return Classification(group_kind, group_order, True, order, cover_order, evidence)

    certificate = _exact_infinite_certificate(cfg) if cfg else None
    if certificate is not None:
        logger.info("classified as infinite_certified")
        return Classification('infinite_certified', None, False, len(ball), None, certificate)
    evidence = {'growth': list(ball.growth), 'superlinear_growth': ball.likely_infinite}
    logger.info("classified as infinite_likely")
    return Classification('infinite_likely', None, False, len(ball), None, evidence)


@dataclass(frozen=True)
class Complexity:
    """Orbit size d when the orbit of omega is finite, else infinite_likely."""

    kind: str
    degree: Optional[int]
    report: OrbitReport

    def to_json(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'degree': self.degree, 'orbit': self.report.to_json()}


def complexity_degree(gens: Sequence[GroupElement], omega: Sequence[float], max_depth: int = 40,
                      max_size: int = 100000, tol: float = DEFAULT_TOL,
                      **orbit_options: Any) -> Complexity:
    """Degree of finite complexity at omega: the orbit size when the orbit saturates."""
    report = orbit(gens, omega, max_depth, max_size, tol, **orbit_options)
    if report.saturated:
        return Complexity('finite', len(report.points), report)
    return Complexity('infinite_likely', None, report)


def _smallest_even_multiplier(q: Rational) -> int:
    # smallest N > 0 with N*q an even integer
    return int(q.q) if q.p % 2 == 0 else 2 * int(q.q)


def _ratio_of(truth: _Truth) -> Optional[Rational]:
    if 'ratio' in truth.detail:
        num, den = truth.detail['ratio']
        return Rational(num, den)
    if 'convergent' in truth.detail:
        num, den = truth.detail['convergent']
        return Rational(num, den)
    return None


def check_thm_main3(cfg_plus: GenConfig, cfg_minus: GenConfig,
                    cf_bound: int = DEFAULT_CF_BOUND, cf_tol: float = DEFAULT_CF_TOL) -> Certificate:
    """
    Density in SO(4) from the angle pattern theta+1 = q1 pi, theta+2 = psi2 pi,
    theta-1 = psi1 pi, theta-2 = q2 pi with q1, q2 rational non-integers and
    psi1, psi2 irrational.

    On success the evidence carries the multipliers N+ and N- (smallest N with
    N q even) and the lifted SO(4) generators.
    """
    q1 = _rational_non_integer_over_pi(cfg_plus.theta1, cf_bound, cf_tol)
    psi2 = _irrational_over_pi(cfg_plus.theta2, cf_bound, cf_tol)
    psi1 = _irrational_over_pi(cfg_minus.theta1, cf_bound, cf_tol)
    q2 = _rational_non_integer_over_pi(cfg_minus.theta2, cf_bound, cf_tol)
    verdict, likely = _truth_verdict([q1, psi2, psi1, q2])

    evidence: Dict[str, Any] = {
        'q1': q1.to_json(), 'psi2': psi2.to_json(), 'psi1': psi1.to_json(), 'q2': q2.to_json(),
        'phi_plus': cfg_plus.phi.to_text(), 'phi_minus': cfg_minus.phi.to_text(),
    }
    if likely is not None:
        evidence['likely'] = likely
    if verdict == 'holds' or likely == 'holds':
        evidence['n_plus'] = _smallest_even_multiplier(_ratio_of(q1))
        evidence['n_minus'] = _smallest_even_multiplier(_ratio_of(q2))
        plus = gens_from_config(cfg_plus)
        minus = gens_from_config(cfg_minus)
        evidence['lifted_generators'] = [
            matrix_to_json(lift_so3_pair(plus[k], minus[k]).m) for k in range(2)
        ]
    logger.info(f"Theorem pattern for SO(4): {verdict}")
    return Certificate('thm_main3', verdict, evidence)


def _hermitian_eigenvectors(b: np.ndarray, tol: float) -> Optional[np.ndarray]:
    h = (b - b.conj().T) / 2j
    h = h - (np.trace(h) / 2.0) * np.eye(2)
    if np.max(np.abs(h)) <= tol:
        return None
    _, vecs = np.linalg.eigh(h)
    return vecs


def _su2_eigenphase(b: np.ndarray) -> float:
    """Phase in [0, pi] of the eigenvalues e^{+-i phase} of an SU(2) matrix."""
    return math.acos(float(np.clip((np.trace(b) / 2.0).real, -1.0, 1.0)))


def check_thm_main4(b1: SU2, b2: SU2,
                    angles: Optional[Tuple[Optional[AngleSpec], Optional[AngleSpec]]] = None,
                    tol: float = DEFAULT_TOL, cf_bound: int = DEFAULT_CF_BOUND,
                    cf_tol: float = DEFAULT_CF_TOL) -> Certificate:
    """
    Density in SU(2) from (a) no fourth power is the identity, (b) no shared
    eigenvector, (c) an eigenphase that is an irrational multiple of pi.

    angles are the exact theta with b_k conjugate to b_theta(theta), when known.
    """
    angles = angles or (None, None)
    mats = (b1.m, b2.m)
    statuses: List[str] = []

    part_a = []
    for k in range(2):
        angle = angles[k]
        if angle is not None and angle.over_pi_is_integer() is not None:
            status = 'fails' if angle.over_pi_is_integer() else 'holds'
            part_a.append({'k': k + 1, 'status': status, 'angle': angle.to_text(), 'method': 'exact'})
        else:
            deviation = float(np.max(np.abs(np.linalg.matrix_power(mats[k], 4) - np.eye(2))))
            status = 'holds' if deviation > tol else 'fails'
            part_a.append({'k': k + 1, 'status': status, 'fourth_power_deviation': deviation,
                           'method': 'numeric'})
        statuses.append(status)

    vecs = [_hermitian_eigenvectors(m, tol) for m in mats]
    if vecs[0] is None or vecs[1] is None:
        status_b = 'fails'
        part_b: Dict[str, Any] = {'status': status_b, 'reason': 'a scalar generator shares every eigenvector'}
    else:
        overlaps = np.abs(vecs[0].conj().T @ vecs[1])
        hermitian_angle = float(np.arccos(np.clip(np.max(overlaps), 0.0, 1.0)))
        status_b = 'holds' if hermitian_angle > tol else 'fails'
        part_b = {'status': status_b, 'min_hermitian_angle': hermitian_angle}
    statuses.append(status_b)

    results = []
    for k in range(2):
        if angles[k] is not None:
            results.append(check_condition_C(angles[k], cf_bound, cf_tol))
        else:
            # eigenvalues e^{+-i phase}; phase/pi irrational iff 2 phase/pi is
            x = 2.0 * _su2_eigenphase(mats[k]) / math.pi
            results.append(continued_fraction_test(x, cf_bound, cf_tol))
    c_statuses = [r.status for r in results]
    if 'holds' in c_statuses:
        status_c = 'holds'
    elif all(s == 'fails' for s in c_statuses):
        status_c = 'fails'
    else:
        status_c = 'numeric_only'
    statuses.append(status_c)

    verdict = _combine_statuses(statuses)
    evidence: Dict[str, Any] = {
        'a': part_a, 'b': part_b,
        'c': {'status': status_c, **{f"k{k + 1}": results[k].to_evidence() for k in range(2)}},
    }
    supporting: Tuple[Certificate, ...] = ()
    if verdict == 'numeric_only':
        likely = 'fails' not in statuses and any(r.verdict == 'likely_irrational' or r.status == 'holds'
                                                  for r in results)
        evidence['likely'] = 'holds' if likely else 'fails'
    if verdict == 'holds' or evidence.get('likely') == 'holds':
        images = (phi_cover(b1), phi_cover(b2))
        supporting = tuple(check_ABC(*images, angles=angles, tol=tol,
                                     cf_bound=cf_bound, cf_tol=cf_tol))
        evidence['images'] = 'the SO(3) images satisfy (A), (B), (C)'
    return Certificate('thm_main4', verdict, evidence, supporting)


def central_phase(b: Union[U2Mat, np.ndarray]) -> float:
    """gamma = (arg det mod 2 pi) / 2, in [0, pi)."""
    m = b.m if isinstance(b, U2Mat) else np.asarray(b)
    arg = float(np.angle(np.linalg.det(m)))
    if abs(arg) < 1e-15:
        arg = 0.0
    arg %= 2.0 * math.pi
    if 2.0 * math.pi - arg < 1e-15:
        arg = 0.0
    return arg / 2.0


def decompose_u2(b: U2Mat) -> Tuple[float, SU2]:
    """Split b = e^{i gamma} s with s in SU(2) and gamma = central_phase(b)."""
    gamma = central_phase(b)
    return gamma, SU2.from_matrix(b.m * np.exp(-1j * gamma), tol=1e-10)


def central_phase_gap(b2: Union[U2Mat, float], n: int, count: int) -> float:
    """Largest gap on the circle between the phases k n gamma (mod 2 pi), 0 <= k < count."""
    gamma = central_phase(b2) if isinstance(b2, U2Mat) else float(b2)
    phases = np.sort(np.mod(np.arange(count) * n * gamma, 2.0 * math.pi))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2.0 * math.pi]]))
    return float(np.max(gaps))


def _n_for_half_even(q: Rational) -> int:
    # smallest N > 0 with N q / 2 an even integer
    a, b = int(q.p), int(q.q)
    return 4 * b // math.gcd(a, 4 * b)


def check_thm_main5(b1: U2Mat, b2: U2Mat, psi: Optional[AngleSpec] = None,
                    q: Optional[AngleSpec] = None, gamma: Optional[AngleSpec] = None,
                    gap_count: int = 10000, cf_bound: int = DEFAULT_CF_BOUND,
                    cf_tol: float = DEFAULT_CF_TOL) -> Certificate:
    """
    Density in U(2) for B1 = B(psi pi) and B2 = e^{i gamma} U B(q pi) U^dagger
    with q rational non-integer and psi, gamma irrational.

    psi, q and gamma are exact hints for the angles psi*pi, q*pi and the
    phase gamma; without them the values are read off the matrices. Both
    'gamma irrational' and 'gamma/pi irrational' are reported; the verdict
    uses the former.
    """
    gamma_num, su2_part = decompose_u2(b2)
    det_residual = float(abs(np.linalg.det(su2_part.m) - 1.0))
    round_trip = float(np.max(np.abs(np.exp(1j * gamma_num) * su2_part.m - b2.m)))

    det1 = np.linalg.det(b1.m)
    in_su2 = _Truth(bool(abs(det1 - 1.0) < 1e-10), True, {'det_b1': [float(det1.real), float(det1.imag)]})

    if psi is not None:
        psi_truth = _irrational_over_pi(psi, cf_bound, cf_tol)
    else:
        psi_truth = _irrational_over_pi(AngleSpec.numeric(2.0 * _su2_eigenphase(b1.m)), cf_bound, cf_tol)
    if q is not None:
        q_truth = _rational_non_integer_over_pi(q, cf_bound, cf_tol)
    else:
        q_truth = _rational_non_integer_over_pi(
            AngleSpec.numeric(2.0 * _su2_eigenphase(su2_part.m)), cf_bound, cf_tol)

    hint_consistent = True
    if gamma is not None:
        hint_consistent = bool(abs(np.exp(2j * gamma.radians()) - np.linalg.det(b2.m)) < 1e-9)
        exact = gamma.value_is_rational()
        if exact is not None:
            gamma_truth = _Truth(not exact, True, {'gamma': gamma.to_text()})
        else:
            test = continued_fraction_test(gamma.radians(), cf_bound, cf_tol)
            gamma_truth = _Truth(test.verdict == 'likely_irrational', False, test.to_evidence())
        gamma_over_pi = _irrational_over_pi(gamma, cf_bound, cf_tol)
    else:
        if gamma_num == 0.0:
            gamma_truth = _Truth(False, True, {'gamma': 0.0})
        else:
            test = continued_fraction_test(gamma_num, cf_bound, cf_tol)
            gamma_truth = _Truth(test.verdict == 'likely_irrational', False, test.to_evidence())
        gamma_over_pi = _irrational_over_pi(AngleSpec.numeric(gamma_num), cf_bound, cf_tol)

    truths = [in_su2, psi_truth, q_truth, gamma_truth]
    verdict, likely = _truth_verdict(truths)
    if not hint_consistent:
        verdict, likely = 'fails', None

    evidence: Dict[str, Any] = {
        'gamma': gamma_num,
        'det_residual': det_residual,
        'decomposition_residual': round_trip,
        'b1_in_su2': in_su2.to_json(),
        'psi_irrational': psi_truth.to_json(),
        'q_rational_non_integer': q_truth.to_json(),
        'gamma_irrational': gamma_truth.to_json(),
        'gamma_over_pi_irrational': gamma_over_pi.to_json(),
        'gamma_hint_consistent': hint_consistent,
    }
    if likely is not None:
        evidence['likely'] = likely
    ratio = _ratio_of(q_truth)
    if q_truth.value and ratio is not None:
        n = _n_for_half_even(ratio)
        power = matrix_power(b2.m, n)
        evidence['n'] = n
        evidence['power_central_deviation'] = float(np.max(np.abs(power - (np.trace(power) / 2.0) * np.eye(2))))
        evidence['central_phase_gap'] = central_phase_gap(gamma_num, n, gap_count)
    logger.info(f"Theorem pattern for U(2): {verdict}")
    return Certificate('thm_main5', verdict, evidence)


def check_nondense(c1: Rot3, c2: Rot3, angles: Optional[Tuple[Optional[AngleSpec], Optional[AngleSpec]]] = None,
                   phi: Optional[AngleSpec] = None, tol: float = DEFAULT_TOL,
                   cf_bound: int = DEFAULT_CF_BOUND, cf_tol: float = DEFAULT_CF_TOL) -> Certificate:
    """
    Orbits confined to one or two circles: c1 turns by an irrational
    multiple of pi, c2 is a half turn, and the axes are orthogonal. The
    evidence names omega0 = axis of c1, whose orbit has degree 2.
    """
    angles = angles or (None, None)
    irrational = _irrational_over_pi(angles[0], cf_bound, cf_tol) if angles[0] is not None \
        else None
    if irrational is None:
        result = check_condition_C(c1, cf_bound, cf_tol)
        irrational = _Truth(result.verdict == 'likely_irrational', False, result.to_evidence())

    if angles[1] is not None and angles[1].over_pi_is_rational() is not None:
        is_half = angles[1].over_pi_is_rational() and angles[1].value % 2 == 1
        half_turn = _Truth(bool(is_half), True, {'angle': angles[1].to_text()})
    else:
        square = float(np.max(np.abs(c2.m @ c2.m - np.eye(3))))
        distance = float(np.max(np.abs(c2.m - np.eye(3))))
        half_turn = _Truth(square <= tol and distance > tol, True,
                           {'square_deviation': square, 'method': 'numeric'})

    axis1, axis2 = _axis_or_none(c1), _axis_or_none(c2)
    if phi is not None and phi.kind == 'rational_pi':
        orthogonal = _Truth(phi.value == Rational(1, 2), True, {'phi': phi.to_text()})
    elif axis1 is None or axis2 is None:
        orthogonal = _Truth(False, True, {'reason': 'identity generator has no axis'})
    else:
        dot = float(abs(axis1 @ axis2))
        orthogonal = _Truth(dot <= tol, True, {'axis_dot': dot, 'method': 'numeric'})

    verdict, likely = _truth_verdict([irrational, half_turn, orthogonal])
    evidence: Dict[str, Any] = {
        'irrational_angle': irrational.to_json(),
        'half_turn': half_turn.to_json(),
        'orthogonal_axes': orthogonal.to_json(),
    }
    if likely is not None:
        evidence['likely'] = likely
    if (verdict == 'holds' or likely == 'holds') and axis1 is not None:
        evidence['omega0'] = [float(x) for x in axis1]
        evidence['degree_at_omega0'] = 2
    return Certificate('nondense', verdict, evidence)
