"""
Group elements of SO(3), SO(4), SU(2) and U(2).

Provides the rotation generators used to describe holonomy on the torus,
the exponential map of so(3), axis-angle recovery, the double covering
SU(2) -> SO(3) and the split SO(4) -> SO(3) x SO(3) through the
self-dual and anti-self-dual parts of the exterior square.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import polar

from lib.errors import GroupKindMismatch, GroupMembershipError, IdentityInput

logger = logging.getLogger(__name__)

DEFAULT_ORTH_TOL = 1e-12
REORTHONORMALIZE_EVERY = 64

# so(3) basis; J_k is the cross-product matrix of e_k
J1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
J2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
J3 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

# su(2) basis
I1 = np.array([[1j, 0.0], [0.0, -1j]])
I2 = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
I3 = np.array([[0.0, 1j], [1j, 0.0]])


def _readonly(m: np.ndarray, dtype) -> np.ndarray:
    arr = np.array(m, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_orthogonal(m: np.ndarray, dim: int, name: str, tol: float) -> None:
    if m.shape != (dim, dim):
        raise GroupMembershipError(f"{name} expects a {dim}x{dim} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise GroupMembershipError(f"{name} has non-finite entries")
    drift = np.max(np.abs(m.T @ m - np.eye(dim)))
    if drift > tol:
        raise GroupMembershipError(f"{name} is not orthogonal (deviation {drift:.3e})")
    det = np.linalg.det(m)
    if abs(det - 1.0) > tol:
        raise GroupMembershipError(f"{name} has determinant {det:.15g}, expected +1")


@dataclass(frozen=True, eq=False)
class Rot3:
    """Rotation of R^3, stored as a read-only 3x3 array."""

    m: np.ndarray

    def __post_init__(self):
        m = _readonly(self.m, float)
        _check_orthogonal(m, 3, 'Rot3', DEFAULT_ORTH_TOL)
        object.__setattr__(self, 'm', m)

    @classmethod
    def identity(cls) -> 'Rot3':
        return cls(np.eye(3))

    def __matmul__(self, other: 'Rot3') -> 'Rot3':
        return Rot3(self.m @ other.m)

    def inverse(self) -> 'Rot3':
        return Rot3(self.m.T)

    def apply(self, v: Sequence[float]) -> np.ndarray:
        return self.m @ np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class Rot4:
    """Rotation of R^4, stored as a read-only 4x4 array."""

    m: np.ndarray

    def __post_init__(self):
        m = _readonly(self.m, float)
        _check_orthogonal(m, 4, 'Rot4', DEFAULT_ORTH_TOL)
        object.__setattr__(self, 'm', m)

    @classmethod
    def identity(cls) -> 'Rot4':
        return cls(np.eye(4))

    def __matmul__(self, other: 'Rot4') -> 'Rot4':
        return Rot4(self.m @ other.m)

    def inverse(self) -> 'Rot4':
        return Rot4(self.m.T)


@dataclass(frozen=True, eq=False)
class SU2:
    """
    Special unitary 2x2 matrix [[alpha, -conj(beta)], [beta, conj(alpha)]].

    The real coordinates (b1, b2, b3, b4) = (Re alpha, Im alpha, Re beta, Im beta)
    form a unit vector of R^4.
    """

    alpha: complex
    beta: complex

    def __post_init__(self):
        alpha = complex(self.alpha)
        beta = complex(self.beta)
        if not (np.isfinite(alpha) and np.isfinite(beta)):
            raise GroupMembershipError("SU2 has non-finite entries")
        norm = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm - 1.0) > DEFAULT_ORTH_TOL:
            raise GroupMembershipError(f"SU2 needs |alpha|^2 + |beta|^2 = 1, got {norm:.15g}")
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'beta', beta)

    @classmethod
    def identity(cls) -> 'SU2':
        return cls(1.0, 0.0)

    @classmethod
    def from_matrix(cls, m: np.ndarray, tol: float = DEFAULT_ORTH_TOL) -> 'SU2':
        """
        Build an SU2 value from its 2x2 matrix.

        Raises:
            GroupMembershipError: If the matrix is not of the SU(2) shape
        """
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise GroupMembershipError(f"SU2 expects a 2x2 matrix, got shape {m.shape}")
        alpha, beta = m[0, 0], m[1, 0]
        if abs(m[1, 1] - np.conj(alpha)) > tol or abs(m[0, 1] + np.conj(beta)) > tol:
            raise GroupMembershipError("matrix is not of the form [[a, -conj(b)], [b, conj(a)]]")
        return cls(alpha, beta)

    @property
    def m(self) -> np.ndarray:
        return _readonly(
            [[self.alpha, -np.conj(self.beta)], [self.beta, np.conj(self.alpha)]], complex
        )

    @property
    def b(self) -> Tuple[float, float, float, float]:
        return (self.alpha.real, self.alpha.imag, self.beta.real, self.beta.imag)

    def __matmul__(self, other: 'SU2') -> 'SU2':
        return SU2.from_matrix(self.m @ other.m)

    def __neg__(self) -> 'SU2':
        return SU2(-self.alpha, -self.beta)

    def inverse(self) -> 'SU2':
        return SU2(np.conj(self.alpha), -self.beta)


@dataclass(frozen=True, eq=False)
class U2Mat:
    """Unitary 2x2 matrix, stored as a read-only complex array."""

    m: np.ndarray

    def __post_init__(self):
        m = _readonly(self.m, complex)
        if m.shape != (2, 2):
            raise GroupMembershipError(f"U2Mat expects a 2x2 matrix, got shape {m.shape}")
        drift = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if drift > DEFAULT_ORTH_TOL:
            raise GroupMembershipError(f"U2Mat is not unitary (deviation {drift:.3e})")
        if abs(abs(np.linalg.det(m)) - 1.0) > DEFAULT_ORTH_TOL:
            raise GroupMembershipError("U2Mat needs |det| = 1")
        object.__setattr__(self, 'm', m)

    @classmethod
    def identity(cls) -> 'U2Mat':
        return cls(np.eye(2))

    def __matmul__(self, other: 'U2Mat') -> 'U2Mat':
        return U2Mat(self.m @ other.m)

    def inverse(self) -> 'U2Mat':
        return U2Mat(self.m.conj().T)


@dataclass(frozen=True, eq=False)
class AxisAngle:
    """Rotation axis (unit vector) and angle in [0, 2*pi)."""

    axis: np.ndarray
    theta: float

    def __post_init__(self):
        axis = _readonly(self.axis, float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > DEFAULT_ORTH_TOL:
            raise GroupMembershipError("AxisAngle needs a unit 3-vector axis")
        object.__setattr__(self, 'axis', axis)
        object.__setattr__(self, 'theta', float(self.theta))

    def to_rot3(self) -> Rot3:
        return exp_so3(self.theta * self.axis)


GroupElement = Union[Rot3, Rot4, SU2, U2Mat]

GROUP_KINDS = ('so3', 'so4', 'su2', 'u2')
KIND_DIMENSION = {'so3': 3, 'so4': 4, 'su2': 2, 'u2': 2}
KIND_IS_COMPLEX = {'so3': False, 'so4': False, 'su2': True, 'u2': True}


def group_kind_of(g: GroupElement) -> str:
    """Return the group kind tag ('so3', 'so4', 'su2', 'u2') of an element."""
    if isinstance(g, Rot3):
        return 'so3'
    if isinstance(g, Rot4):
        return 'so4'
    if isinstance(g, SU2):
        return 'su2'
    if isinstance(g, U2Mat):
        return 'u2'
    raise TypeError(f"not a group element: {type(g).__name__}")


def common_kind(gens: Sequence[GroupElement]) -> str:
    """
    Return the group kind shared by all generators.

    Raises:
        GroupKindMismatch: If the generators belong to different groups
        ValueError: If no generator is given
    """
    if not gens:
        raise ValueError("at least one generator is required")
    kinds = {group_kind_of(g) for g in gens}
    if len(kinds) != 1:
        raise GroupKindMismatch(f"generators mix group kinds: {sorted(kinds)}")
    return kinds.pop()


def to_array(g: GroupElement) -> np.ndarray:
    return np.array(g.m)


def from_array(kind: str, m: np.ndarray) -> GroupElement:
    """Wrap a raw matrix as a group element of the given kind."""
    if kind == 'so3':
        return Rot3(m)
    if kind == 'so4':
        return Rot4(m)
    if kind == 'su2':
        return SU2.from_matrix(m)
    if kind == 'u2':
        return U2Mat(m)
    raise ValueError(f"unknown group kind: {kind}")


def reorthonormalize(m: np.ndarray) -> np.ndarray:
    """Project a matrix onto the nearest orthogonal/unitary matrix (polar factor)."""
    u, _ = polar(np.asarray(m))
    return u


def reorthonormalize_stack(ms: np.ndarray) -> np.ndarray:
    """Polar projection of a stack of matrices of shape (N, n, n)."""
    u, _, vh = np.linalg.svd(ms)
    return u @ vh


def long_product(mats: Sequence[np.ndarray]) -> np.ndarray:
    """
    Multiply matrices left to right, re-projecting onto the group every
    REORTHONORMALIZE_EVERY factors.
    """
    if not mats:
        raise ValueError("long_product needs at least one factor")
    acc = np.array(mats[0])
    for count, factor in enumerate(mats[1:], start=1):
        acc = acc @ factor
        if count % REORTHONORMALIZE_EVERY == 0:
            drift = np.max(np.abs(acc.conj().T @ acc - np.eye(acc.shape[0])))
            logger.debug(f"re-projecting product after {count} factors (drift {drift:.2e})")
            acc = reorthonormalize(acc)
    return acc


def matrix_power(m: np.ndarray, k: int) -> np.ndarray:
    """Integer power of an orthogonal/unitary matrix; negative powers use the adjoint."""
    base = np.asarray(m)
    if k < 0:
        base = base.conj().T
        k = -k
    if k == 0:
        return np.eye(base.shape[0], dtype=base.dtype)
    return long_product([base] * k)


def hat(w: Sequence[float]) -> np.ndarray:
    """Return w1*J1 + w2*J2 + w3*J3."""
    w1, w2, w3 = (float(x) for x in w)
    return np.array([[0.0, -w3, w2], [w3, 0.0, -w1], [-w2, w1, 0.0]])


def c_theta(theta: float) -> Rot3:
    """
    Block rotation fixing e1 and turning the (e2, e3) plane by theta.

    Args:
        theta: Rotation angle in radians

    Returns:
        The rotation as a Rot3
    """
    c, s = math.cos(theta), math.sin(theta)
    return Rot3(np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]))


def v_phi_gamma(phi: float, gamma: float) -> Rot3:
    """
    Rotation by phi about the axis (0, -sin gamma, cos gamma).

    Column 1 of the result makes angle phi with e1, so conjugating
    c_theta by it moves the rotation axis from e1 to that column.

    Args:
        phi: Angle between e1 and the new axis
        gamma: Azimuth of the new axis around e1

    Returns:
        The rotation as a Rot3
    """
    cp, sp = math.cos(phi), math.sin(phi)
    cg, sg = math.cos(gamma), math.sin(gamma)
    return Rot3(np.array([
        [cp, -sp * cg, -sp * sg],
        [sp * cg, sg * sg + cp * cg * cg, (cp - 1.0) * cg * sg],
        [sp * sg, (cp - 1.0) * cg * sg, cg * cg + cp * sg * sg],
    ]))


def exp_so3(coeffs: Sequence[float]) -> Rot3:
    """
    Exponential of coeffs[0]*J1 + coeffs[1]*J2 + coeffs[2]*J3 (Rodrigues form).

    Args:
        coeffs: Three real coefficients in the J basis

    Returns:
        The rotation as a Rot3
    """
    w = np.asarray(coeffs, dtype=float)
    theta = float(np.linalg.norm(w))
    k = hat(w)
    k2 = k @ k
    if theta < 1e-8:
        m = np.eye(3) + k + 0.5 * k2
    else:
        m = np.eye(3) + (math.sin(theta) / theta) * k + ((1.0 - math.cos(theta)) / theta ** 2) * k2
    return Rot3(m)


def _canonical_axis(axis: np.ndarray) -> np.ndarray:
    # first clearly nonzero component positive
    for x in axis:
        if abs(x) > 1e-9:
            return axis if x > 0 else -axis
    return axis


def axis_angle_of(r: Rot3, tol: float = DEFAULT_ORTH_TOL) -> AxisAngle:
    """
    Recover axis and angle of a rotation.

    The axis is the unit fixed vector, oriented so its first nonzero
    component is positive; theta in [0, 2*pi) then follows from the
    trace and the skew part.

    Args:
        r: Rotation to decompose
        tol: Identity tolerance

    Returns:
        AxisAngle with exp_so3(theta * axis) == r

    Raises:
        IdentityInput: If r is the identity
    """
    m = r.m
    if np.max(np.abs(m - np.eye(3))) <= tol:
        raise IdentityInput("the identity rotation has no axis")

    vee = 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    cos_theta = float(np.clip((np.trace(m) - 1.0) / 2.0, -1.0, 1.0))
    sin_norm = float(np.linalg.norm(vee))

    if cos_theta > 0.0 or sin_norm > 1e-6:
        if sin_norm < 1e-15:
            raise IdentityInput("rotation is numerically the identity")
        axis = vee / sin_norm
    else:
        # near a half turn: the symmetric part is close to axis * axis^T
        sym = 0.5 * (0.5 * (m + m.T) + np.eye(3))
        j = int(np.argmax(np.linalg.norm(sym, axis=0)))
        axis = sym[:, j] / np.linalg.norm(sym[:, j])

    axis = _canonical_axis(axis / np.linalg.norm(axis))
    theta = math.atan2(float(vee @ axis), cos_theta) % (2.0 * math.pi)
    return AxisAngle(axis, theta)


def rotation_angle(r: np.ndarray) -> float:
    """Rotation angle in [0, pi] of a 3x3 rotation matrix."""
    return math.acos(float(np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)))


def b_theta(theta: float) -> SU2:
    """Return exp(-(theta/2) I1) = diag(e^{-i theta/2}, e^{i theta/2})."""
    return SU2(complex(math.cos(theta / 2.0), -math.sin(theta / 2.0)), 0.0)


def phi_cover(u: SU2) -> Rot3:
    """
    The double covering SU(2) -> SO(3).

    Args:
        u: Element of SU(2)

    Returns:
        Its image rotation; phi_cover(-u) == phi_cover(u)
    """
    b = np.array(u.b)
    b1, b2, b3, b4 = b / np.linalg.norm(b)
    return Rot3(np.array([
        [b1 * b1 + b2 * b2 - b3 * b3 - b4 * b4, 2 * b1 * b4 + 2 * b2 * b3, -2 * b1 * b3 + 2 * b2 * b4],
        [-2 * b1 * b4 + 2 * b2 * b3, b1 * b1 + b3 * b3 - b2 * b2 - b4 * b4, 2 * b1 * b2 + 2 * b3 * b4],
        [2 * b1 * b3 + 2 * b2 * b4, -2 * b1 * b2 + 2 * b3 * b4, b1 * b1 + b4 * b4 - b2 * b2 - b3 * b3],
    ]))


def su2_lift(r: Rot3) -> SU2:
    """
    One of the two preimages of r under phi_cover, chosen with b1 >= 0.

    Args:
        r: Rotation to lift

    Returns:
        SU2 element u with phi_cover(u) == r
    """
    try:
        aa = axis_angle_of(r)
    except IdentityInput:
        return SU2.identity()
    half = aa.theta / 2.0
    n1, n2, n3 = aa.axis
    c, s = math.cos(half), math.sin(half)
    alpha = complex(c, -n1 * s)
    beta = complex(-n2 * s, -n3 * s)
    if c < 0.0:
        alpha, beta = -alpha, -beta
    return SU2(alpha, beta)


def conj_su2(u: SU2, b: SU2) -> SU2:
    """Return u * b * u^dagger."""
    um = u.m
    return SU2.from_matrix(um @ b.m @ um.conj().T)


# Exterior square of R^4: pairs (i, j) with i < j, then the Omega bases.
_WEDGE_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _omega_change_of_basis() -> np.ndarray:
    index = {p: i for i, p in enumerate(_WEDGE_PAIRS)}
    s = 1.0 / math.sqrt(2.0)
    t = np.zeros((6, 6))
    for sign, offset in ((1.0, 0), (-1.0, 3)):
        # Omega_1 = e1^e2 +- e3^e4
        t[index[(0, 1)], offset] = s
        t[index[(2, 3)], offset] = sign * s
        # Omega_2 = e1^e3 +- e4^e2 = e1^e3 -+ e2^e4
        t[index[(0, 2)], offset + 1] = s
        t[index[(1, 3)], offset + 1] = -sign * s
        # Omega_3 = e1^e4 +- e2^e3
        t[index[(0, 3)], offset + 2] = s
        t[index[(1, 2)], offset + 2] = sign * s
    return t


OMEGA_BASIS = _omega_change_of_basis()


def second_compound(a: np.ndarray) -> np.ndarray:
    """Matrix of the induced map on the exterior square, basis e_i ^ e_j (i < j)."""
    c = np.empty((6, 6))
    for r, (i, j) in enumerate(_WEDGE_PAIRS):
        for col, (k, l) in enumerate(_WEDGE_PAIRS):
            c[r, col] = a[i, k] * a[j, l] - a[i, l] * a[j, k]
    return c


def so4_to_so3_pair(a: Rot4) -> Tuple[Rot3, Rot3]:
    """
    Split a rotation of R^4 into its actions on the self-dual and
    anti-self-dual bivectors.

    Args:
        a: Rotation of R^4

    Returns:
        (plus block, minus block) in the ordered Omega bases
    """
    induced = OMEGA_BASIS.T @ second_compound(a.m) @ OMEGA_BASIS
    return Rot3(induced[:3, :3]), Rot3(induced[3:, 3:])


def _quaternion_of(r: Rot3) -> np.ndarray:
    # unit quaternion (w, x, y, z) of the rotation, from its SU(2) lift
    b1, b2, b3, b4 = su2_lift(r).b
    return np.array([b1, -b2, -b3, -b4])


def left_multiplication(p: np.ndarray) -> np.ndarray:
    """Matrix of x -> p x on quaternions (w, x, y, z) = R^4."""
    w, x, y, z = p
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])


def right_multiplication(q: np.ndarray) -> np.ndarray:
    """Matrix of x -> x q on quaternions (w, x, y, z) = R^4."""
    w, x, y, z = q
    return np.array([
        [w, -x, -y, -z],
        [x, w, z, -y],
        [y, -z, w, x],
        [z, y, -x, w],
    ])


def lift_so3_pair(cp: Rot3, cm: Rot3) -> Rot4:
    """
    Rotation of R^4 whose bivector split is (cp, cm).

    Of the two preimages +-a the one with nonnegative trace is returned;
    at zero trace, the one whose first nonzero entry (row-major) is positive.

    Args:
        cp: Action on the self-dual bivectors
        cm: Action on the anti-self-dual bivectors

    Returns:
        The lifted Rot4
    """
    p = _quaternion_of(cp)
    q = _quaternion_of(cm)
    q_conj = q * np.array([1.0, -1.0, -1.0, -1.0])
    a = left_multiplication(p) @ right_multiplication(q_conj)

    trace = float(np.trace(a))
    if abs(trace) <= 1e-12:
        flat = a.ravel()
        first = flat[np.argmax(np.abs(flat) > 1e-12)]
        if first < 0:
            a = -a
    elif trace < 0:
        a = -a
    return Rot4(a)


def matrix_to_json(m: np.ndarray) -> List[List[Any]]:
    """Encode a matrix as row-major nested lists; complex entries become [re, im]."""
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return [[float(x) for x in row] for row in m]


def matrix_from_json(rows: Sequence[Sequence[Any]]) -> np.ndarray:
    """Decode a matrix from nested lists, accepting [re, im] pairs for complex entries."""
    is_complex = any(isinstance(x, (list, tuple)) for row in rows for x in row)
    if is_complex:
        def entry(x):
            if isinstance(x, (list, tuple)):
                if len(x) != 2:
                    raise ValueError(f"complex entry must be [re, im], got {x!r}")
                return complex(float(x[0]), float(x[1]))
            return complex(float(x), 0.0)
        return np.array([[entry(x) for x in row] for row in rows], dtype=complex)
    return np.array(rows, dtype=float)


def gens_to_json(gens: Sequence[GroupElement]) -> Dict[str, Any]:
    """Generator file payload {kind, matrices}."""
    kind = common_kind(gens)
    return {'kind': kind, 'matrices': [matrix_to_json(to_array(g)) for g in gens]}


def _snap_to_group(kind: str, m: np.ndarray, tol: float) -> GroupElement:
    dim = KIND_DIMENSION[kind]
    m = np.asarray(m, dtype=complex if kind in ('su2', 'u2') else float)
    if m.shape != (dim, dim):
        raise GroupMembershipError(f"{kind} generator must be {dim}x{dim}, got shape {m.shape}")
    drift = float(np.max(np.abs(m.conj().T @ m - np.eye(dim))))
    if drift > tol:
        raise GroupMembershipError(f"{kind} generator deviates from its group by {drift:.3e}")
    if drift > 0.0:
        m = reorthonormalize(m)
    if kind == 'su2':
        return SU2.from_matrix(m, max(tol, DEFAULT_ORTH_TOL))
    return from_array(kind, m)


def gens_from_json(payload: Dict[str, Any], tol: float = DEFAULT_ORTH_TOL) -> List[GroupElement]:
    """
    Parse a generator file payload.

    Matrices within tol of their group are projected onto it, so files
    written with fewer than 17 digits still load.

    Raises:
        GroupMembershipError: If a matrix fails its group invariants
        ValueError: If the payload is malformed
    """
    kind = payload.get('kind')
    if kind not in GROUP_KINDS:
        raise ValueError(f"generator kind must be one of {GROUP_KINDS}, got {kind!r}")
    matrices = payload.get('matrices')
    if not isinstance(matrices, list) or not matrices:
        raise ValueError("generator file needs a nonempty 'matrices' list")
    return [_snap_to_group(kind, matrix_from_json(rows), tol) for rows in matrices]
