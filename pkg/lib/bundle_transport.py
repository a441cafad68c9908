"""
Flat connections on the product bundles T^2 x R^4 and T^2 x C^2.

A connection with constant coefficients P1, P2 has holonomy
A_x = exp(-2 pi P1) around the x circle and A_y = exp(-2 pi P2) around the
y circle. Normal polygonal curves from the origin reduce to words of
signed windings, and parallel transport along them is the product of
the corresponding powers.
"""

import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, schur

from lib.errors import (
    ConnectionFormError,
    DimensionMismatch,
    LogBranchFailure,
    WordParseError,
    WrongFiber,
)
from lib.linalg_groups import (
    DEFAULT_ORTH_TOL,
    SU2,
    GroupElement,
    Rot3,
    Rot4,
    U2Mat,
    common_kind,
    matrix_from_json,
    matrix_power,
    matrix_to_json,
    so4_to_so3_pair,
    to_array,
)

logger = logging.getLogger(__name__)

FIBERS = ('real4', 'complex2')
LOG_ROUND_TRIP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Connection:
    """
    Constant connection form P1 dx + P2 dy.

    p1, p2 are skew-symmetric 4x4 for the real fiber and anti-Hermitian
    2x2 for the complex fiber; with su2 set they are also trace-free.
    """

    fiber: str
    p1: np.ndarray
    p2: np.ndarray
    su2: bool = False

    def __post_init__(self):
        if self.fiber not in FIBERS:
            raise ConnectionFormError(f"fiber must be one of {FIBERS}, got {self.fiber!r}")
        dim = 4 if self.fiber == 'real4' else 2
        dtype = float if self.fiber == 'real4' else complex
        for name in ('p1', 'p2'):
            p = np.array(getattr(self, name), dtype=dtype, copy=True)
            if p.shape != (dim, dim):
                raise DimensionMismatch(f"{name} must be {dim}x{dim} for fiber {self.fiber}")
            skew = np.max(np.abs(p + p.conj().T))
            if skew > DEFAULT_ORTH_TOL:
                raise ConnectionFormError(f"{name} is not skew/anti-Hermitian (deviation {skew:.3e})")
            if self.su2 and abs(np.trace(p)) > DEFAULT_ORTH_TOL:
                raise ConnectionFormError(f"{name} must be trace-free for an su(2)-valued connection")
            p.setflags(write=False)
            object.__setattr__(self, name, p)

    @property
    def dimension(self) -> int:
        return self.p1.shape[0]

    @cached_property
    def a_x(self) -> np.ndarray:
        return expm(-2.0 * math.pi * self.p1)

    @cached_property
    def a_y(self) -> np.ndarray:
        return expm(-2.0 * math.pi * self.p2)

    def holonomy(self, axis: str) -> np.ndarray:
        return self.a_x if axis == 'x' else self.a_y

    def to_json(self) -> Dict[str, Any]:
        return {'fiber': self.fiber, 'p1': matrix_to_json(self.p1), 'p2': matrix_to_json(self.p2)}

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> 'Connection':
        fiber = payload.get('fiber')
        p1 = matrix_from_json(payload['p1'])
        p2 = matrix_from_json(payload['p2'])
        su2 = fiber == 'complex2' and abs(np.trace(p1)) < DEFAULT_ORTH_TOL \
            and abs(np.trace(p2)) < DEFAULT_ORTH_TOL
        return cls(fiber, p1, p2, su2=su2)


@dataclass(frozen=True)
class NPCWord:
    """Normal polygonal curve from the origin as (axis, winding) steps, applied left to right."""

    steps: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        steps = tuple((str(axis), int(winding)) for axis, winding in self.steps)
        for axis, winding in steps:
            if axis not in ('x', 'y'):
                raise WordParseError(f"axis must be 'x' or 'y', got {axis!r}")
            if winding == 0:
                raise WordParseError(f"winding on axis {axis} must be nonzero")
        object.__setattr__(self, 'steps', steps)

    def __add__(self, other: 'NPCWord') -> 'NPCWord':
        return NPCWord(self.steps + other.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def to_text(self) -> str:
        return ','.join(f"{axis}:{winding}" for axis, winding in self.steps)


_WORD_TOKEN = re.compile(r'^(?P<axis>[xy]):(?P<winding>[+-]?\d+)$')


def parse_word(text: str) -> NPCWord:
    """
    Parse a word such as 'x:3,y:-2,x:1'. An empty string is the constant curve.

    Raises:
        WordParseError: Naming the first offending token
    """
    text = text.strip()
    if not text:
        return NPCWord()
    steps = []
    for token in text.split(','):
        token = token.strip()
        m = _WORD_TOKEN.match(token)
        if not m:
            raise WordParseError(f"bad word token {token!r}; expected x:<m> or y:<m>")
        winding = int(m.group('winding'))
        if winding == 0:
            raise WordParseError(f"bad word token {token!r}; winding must be nonzero")
        steps.append((m.group('axis'), winding))
    return NPCWord(tuple(steps))


def _log_so4(a: np.ndarray) -> np.ndarray:
    # real Schur form of an orthogonal matrix: 1x1 blocks +-1, 2x2 rotation blocks
    t, z = schur(a, output='real')
    n = a.shape[0]
    log_t = np.zeros((n, n))
    minus_ones = []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-14:
            angle = math.atan2(t[i + 1, i], t[i, i])
            log_t[i, i + 1] = -angle
            log_t[i + 1, i] = angle
            i += 2
            continue
        if t[i, i] < 0:
            minus_ones.append(i)
        i += 1
    if len(minus_ones) % 2:
        raise LogBranchFailure("odd number of -1 eigenvalues; matrix is not in SO(4)")
    # pair the -1 eigenvectors into half-turn planes
    for j, k in zip(minus_ones[0::2], minus_ones[1::2]):
        log_t[j, k] = -math.pi
        log_t[k, j] = math.pi
    log_a = z @ log_t @ z.T
    return 0.5 * (log_a - log_a.T)


def _log_su2(u: np.ndarray) -> np.ndarray:
    # u = cos(phi) I + sin(phi) N with N a unit trace-free anti-Hermitian matrix
    cos_phi = float(np.clip(u[0, 0].real, -1.0, 1.0))
    x = 0.5 * (u - u.conj().T)
    x = x - (np.trace(x) / 2.0) * np.eye(2)
    sin_phi = math.sqrt(0.5 * float(np.sum(np.abs(x) ** 2)))
    phi = math.atan2(sin_phi, cos_phi)
    if sin_phi > 1e-15:
        return (phi / sin_phi) * x
    if cos_phi > 0:
        return np.zeros((2, 2), dtype=complex)
    # -I: any unit direction works, take the diagonal one
    return math.pi * np.array([[1j, 0.0], [0.0, -1j]])


def _log_u2(u: np.ndarray) -> np.ndarray:
    gamma = (np.angle(np.linalg.det(u)) % (2.0 * math.pi)) / 2.0
    phase = np.exp(1j * gamma)
    special = u / phase
    return 1j * gamma * np.eye(2) + _log_su2(special)


def _coefficient_from(g: np.ndarray, kind: str) -> np.ndarray:
    if kind == 'so4':
        log_g = _log_so4(g)
    elif kind == 'su2':
        log_g = _log_su2(g)
    else:
        log_g = _log_u2(g)
    p = -log_g / (2.0 * math.pi)
    error = np.max(np.abs(expm(-2.0 * math.pi * p) - g))
    if error > LOG_ROUND_TRIP_TOL:
        logger.error(f"logarithm round trip failed for {kind} generator (error {error:.3e})")
        raise LogBranchFailure(f"no logarithm reproduces the {kind} generator (error {error:.3e})")
    return p


def connection_from_gens(a1: GroupElement, a2: GroupElement) -> Connection:
    """
    Constant connection whose holonomies around the two circles are a1 and a2.

    Args:
        a1: Holonomy around the x circle
        a2: Holonomy around the y circle (same group as a1)

    Returns:
        Connection with p_k = -log(a_k) / (2 pi) on the principal branch

    Raises:
        LogBranchFailure: If a logarithm fails its round trip
        ConnectionFormError: If the generators are 3x3 rotations
    """
    kind = common_kind([a1, a2])
    if kind == 'so3':
        raise ConnectionFormError("connections are defined on rank-4 real or rank-2 complex fibers")
    p1 = _coefficient_from(to_array(a1), kind)
    p2 = _coefficient_from(to_array(a2), kind)
    fiber = 'real4' if kind == 'so4' else 'complex2'
    if fiber == 'real4':
        p1, p2 = p1.real, p2.real
    logger.debug(f"built {fiber} connection from {kind} generators")
    return Connection(fiber, p1, p2, su2=(kind == 'su2'))


def _fiber_vector(conn: Connection, v: Sequence[Any]) -> np.ndarray:
    dtype = float if conn.fiber == 'real4' else complex
    vec = np.asarray(v, dtype=dtype)
    if vec.shape != (conn.dimension,):
        raise DimensionMismatch(
            f"vector has shape {vec.shape}, fiber {conn.fiber} needs ({conn.dimension},)"
        )
    return vec


def word_matrix(conn: Connection, word: NPCWord) -> np.ndarray:
    """Matrix of parallel transport along the word; the first step acts first."""
    total = np.eye(conn.dimension, dtype=conn.a_x.dtype)
    for axis, winding in word.steps:
        total = matrix_power(conn.holonomy(axis), winding) @ total
    return total


def transport(conn: Connection, word: NPCWord, v: Sequence[Any]) -> np.ndarray:
    """
    Parallel transport of a fiber vector along a normal polygonal curve.

    Raises:
        DimensionMismatch: If v does not match the fiber dimension
    """
    vec = _fiber_vector(conn, v)
    for axis, winding in word.steps:
        vec = matrix_power(conn.holonomy(axis), winding) @ vec
    return vec


def transport_ode_oracle(conn: Connection, word: NPCWord, v: Sequence[Any],
                         step: float) -> np.ndarray:
    """
    Integrate xi' = -P xi along each segment with classical RK4.

    Each segment of winding m has length 2 pi |m| and is split into
    ceil(length/step) equal steps; negative windings run with -P.

    Raises:
        DimensionMismatch: If v does not match the fiber dimension
        ValueError: If step is not positive
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    vec = _fiber_vector(conn, v)
    identity = np.eye(conn.dimension)
    for axis, winding in word.steps:
        p = conn.p1 if axis == 'x' else conn.p2
        k = -p if winding > 0 else p
        length = 2.0 * math.pi * abs(winding)
        n_steps = max(1, math.ceil(length / step))
        h = length / n_steps
        # RK4 on a linear autonomous system is one fixed step matrix
        hk = h * k
        hk2 = hk @ hk
        hk3 = hk2 @ hk
        stepper = identity + hk + hk2 / 2.0 + hk3 / 6.0 + (hk3 @ hk) / 24.0
        vec = np.linalg.matrix_power(stepper, n_steps) @ vec
    return vec


def lambda2_gens(conn: Connection) -> Tuple[Tuple[Rot3, Rot3], Tuple[Rot3, Rot3]]:
    """
    Holonomy of the induced connections on the self-dual and
    anti-self-dual bivector bundles.

    Returns:
        ((C_plus_1, C_plus_2), (C_minus_1, C_minus_2))

    Raises:
        WrongFiber: If the connection is not on the real rank-4 fiber
    """
    if conn.fiber != 'real4':
        raise WrongFiber(f"bivector holonomy needs the real4 fiber, got {conn.fiber}")
    plus_1, minus_1 = so4_to_so3_pair(Rot4(conn.a_x))
    plus_2, minus_2 = so4_to_so3_pair(Rot4(conn.a_y))
    return (plus_1, plus_2), (minus_1, minus_2)


def holonomy_gens(conn: Connection) -> Tuple[GroupElement, GroupElement]:
    """The generators (A_x, A_y) as typed group elements."""
    if conn.fiber == 'real4':
        return Rot4(conn.a_x), Rot4(conn.a_y)
    if conn.su2:
        return SU2.from_matrix(conn.a_x, tol=1e-10), SU2.from_matrix(conn.a_y, tol=1e-10)
    return U2Mat(conn.a_x), U2Mat(conn.a_y)
