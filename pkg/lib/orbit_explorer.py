"""
Enumeration of group balls and orbits.

Balls and orbits are grown breadth-first over words in the generators
and their inverses. Near-duplicates are merged with a max-norm KD-tree
at the dedup tolerance, so a ball that stops growing is the whole
(finite) group. Covering radii are measured against deterministic
low-discrepancy probe meshes.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation
from scipy.stats import qmc

from lib.errors import DimensionMismatch, GroupKindMismatch
from lib.kernels import env_threads, max_metric_best_dots
from lib.linalg_groups import (
    KIND_DIMENSION,
    REORTHONORMALIZE_EVERY,
    GroupElement,
    Rot3,
    common_kind,
    group_kind_of,
    left_multiplication,
    reorthonormalize,
    reorthonormalize_stack,
    right_multiplication,
    to_array,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_PROBES = 4096
DEFAULT_PLANE_TOL = 1e-8
CONFINEMENT_SUBSAMPLE = 32
APPROX_BLOCK_SIZE = 4096
APPROX_CHILDREN = 32


def resolve_workers(threads: Optional[int] = None) -> int:
    """KD-tree worker count: explicit value, else HOLONOMY_THREADS, else all cores (-1)."""
    if threads is not None:
        return max(1, int(threads))
    env = env_threads()
    return -1 if env is None else env


class _DedupIndex:
    """Set of key vectors with membership up to tol in the max norm."""

    def __init__(self, tol: float, workers: int):
        self.tol = tol
        self.workers = workers
        self._keys: Optional[np.ndarray] = None
        self._tree: Optional[cKDTree] = None

    def add(self, keys: np.ndarray) -> None:
        self._keys = keys if self._keys is None else np.vstack([self._keys, keys])
        self._tree = cKDTree(self._keys)

    def filter_new(self, keys: np.ndarray) -> np.ndarray:
        """Indices of keys that are new, keeping the first of any near-equal group."""
        fresh = np.ones(len(keys), dtype=bool)
        if self._tree is not None:
            dist, _ = self._tree.query(keys, k=1, p=np.inf,
                                       distance_upper_bound=self.tol, workers=self.workers)
            fresh = ~np.isfinite(dist)
        idx = np.nonzero(fresh)[0]
        if len(idx) > 1:
            pairs = cKDTree(keys[idx]).query_pairs(self.tol, p=np.inf, output_type='ndarray')
            if len(pairs):
                keep = np.ones(len(idx), dtype=bool)
                pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
                for i, j in pairs.tolist():
                    if keep[i]:
                        keep[j] = False
                idx = idx[keep]
        return idx


def _matrix_keys(stack: np.ndarray) -> np.ndarray:
    flat = stack.reshape(len(stack), -1)
    if np.iscomplexobj(flat):
        return np.hstack([flat.real, flat.imag])
    return flat


@dataclass
class _Closure:
    items: np.ndarray
    parents: np.ndarray
    letters: np.ndarray
    growth: List[int]
    depth: int
    saturated: bool
    truncated: bool


def _breadth_first(start: np.ndarray,
                   step: Callable[[np.ndarray], np.ndarray],
                   n_letters: int,
                   normalize: Callable[[np.ndarray], np.ndarray],
                   key_of: Callable[[np.ndarray], np.ndarray],
                   max_depth: int, max_size: int, tol: float, workers: int, label: str,
                   on_level: Optional[Callable[[int, np.ndarray], None]] = None) -> _Closure:
    items = [start[None]]
    parents = [np.array([-1])]
    letters = [np.array([-1])]
    index = _DedupIndex(tol, workers)
    index.add(key_of(start[None]))
    frontier = start[None]
    frontier_ids = np.array([0])
    size, depth = 1, 0
    growth = [1]
    saturated = truncated = False
    if on_level is not None:
        on_level(0, start[None])

    while depth < max_depth and size < max_size:
        candidates = step(frontier)
        if (depth + 1) % REORTHONORMALIZE_EVERY == 0:
            candidates = normalize(candidates)
        keys = key_of(candidates)
        fresh = index.filter_new(keys)
        if len(fresh) == 0:
            saturated = True
            break
        room = max_size - size
        if len(fresh) > room:
            fresh = fresh[:room]
            truncated = True
        new = candidates[fresh]
        items.append(new)
        parents.append(frontier_ids[fresh // n_letters])
        letters.append(fresh % n_letters)
        index.add(keys[fresh])
        frontier, frontier_ids = new, np.arange(size, size + len(fresh))
        size += len(fresh)
        depth += 1
        growth.append(len(fresh))
        logger.info(f"{label} depth {depth}: {len(fresh)} new, {size} total")
        if on_level is not None:
            on_level(depth, np.concatenate(items))
        if truncated:
            break

    if saturated:
        logger.info(f"{label} saturated at {size} elements (depth {depth})")
    else:
        logger.info(f"{label} stopped unsaturated at {size} elements (depth {depth})")
    return _Closure(np.concatenate(items), np.concatenate(parents), np.concatenate(letters),
                    growth, depth, saturated, truncated)


def _alphabet(mats: Sequence[np.ndarray]) -> np.ndarray:
    # generators g_1..g_k followed by their inverses
    mats = [np.asarray(m) for m in mats]
    return np.stack(mats + [m.conj().T for m in mats])


def _letter_label(letter: int, n_gens: int) -> int:
    return letter + 1 if letter < n_gens else -(letter - n_gens + 1)


@dataclass
class GroupBall:
    """
    Breadth-first ball in the group generated by the generators.

    words are signed 1-based generator indices (negative = inverse),
    growth[k] is the number of elements first reached at word length k.
    """

    group_kind: str
    elements: np.ndarray
    depth: int
    saturated: bool
    growth: List[int]
    n_gens: int
    parents: np.ndarray
    letters: np.ndarray
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.elements)

    def word(self, i: int) -> Tuple[int, ...]:
        labels = []
        while self.parents[i] >= 0:
            labels.append(_letter_label(int(self.letters[i]), self.n_gens))
            i = int(self.parents[i])
        return tuple(reversed(labels))

    @property
    def word_lengths(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.growth)), self.growth)

    @property
    def likely_infinite(self) -> bool:
        """Unsaturated with strictly increasing growth over the last three full levels."""
        if self.saturated:
            return False
        full = self.growth[:-1] if self.truncated else self.growth
        tail = full[-3:]
        return len(tail) == 3 and tail[0] < tail[1] < tail[2]

    def to_json(self) -> Dict[str, Any]:
        return {
            'group_kind': self.group_kind,
            'size': len(self),
            'depth': self.depth,
            'saturated': self.saturated,
            'likely_infinite': self.likely_infinite,
            'growth': list(self.growth),
        }


def group_ball(gens: Sequence[GroupElement], max_depth: int, max_size: int,
               tol: float = DEFAULT_TOL, threads: Optional[int] = None) -> GroupBall:
    """
    Breadth-first closure of the generators and their inverses.

    Args:
        gens: Nonempty generators of one group kind
        max_depth: Longest word length to expand to
        max_size: Element cap; reaching it leaves the ball unsaturated
        tol: Max-norm dedup tolerance on matrix entries
        threads: KD-tree workers (see resolve_workers)

    Returns:
        GroupBall; saturated iff a full frontier expansion added nothing
    """
    kind = common_kind(gens)
    n = KIND_DIMENSION[kind]
    alphabet = _alphabet([to_array(g) for g in gens])
    n_letters = len(alphabet)

    def step(frontier: np.ndarray) -> np.ndarray:
        return np.einsum('fij,ljk->flik', frontier, alphabet).reshape(-1, n, n)

    dtype = complex if np.iscomplexobj(alphabet) else float
    closure = _breadth_first(
        np.eye(n, dtype=dtype), step, n_letters, reorthonormalize_stack, _matrix_keys,
        max_depth, max_size, tol, resolve_workers(threads), f"{kind} ball",
    )
    return GroupBall(kind, closure.items, closure.depth, closure.saturated, closure.growth,
                     len(gens), closure.parents, closure.letters, closure.truncated)


def _realify(m: np.ndarray) -> np.ndarray:
    """Real 2n x 2n matrix of a complex n x n matrix on (Re z1, Im z1, Re z2, Im z2, ...)."""
    n = m.shape[0]
    r = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            a = m[i, j]
            r[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [[a.real, -a.imag], [a.imag, a.real]]
    return r


def _action_matrices(gens: Sequence[GroupElement]) -> List[np.ndarray]:
    mats = [to_array(g) for g in gens]
    if np.iscomplexobj(mats[0]):
        return [_realify(m) for m in mats]
    return mats


def _normalize_rows(points: np.ndarray) -> np.ndarray:
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def _vector_step(alphabet: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def step(frontier: np.ndarray) -> np.ndarray:
        return np.einsum('lij,fj->fli', alphabet, frontier).reshape(-1, alphabet.shape[1])
    return step


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Lexicographic order of rows after rounding to 12 decimals."""
    rounded = np.round(points, 12)
    return np.lexsort(rounded.T[::-1])


def fibonacci_sphere(n: int) -> np.ndarray:
    """n near-uniform points on S^2 along the golden-angle spiral."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    angle = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(angle), r * np.sin(angle), z])


def sobol_points(d: int, n: int, seed: int = 0) -> np.ndarray:
    """First n points of a scrambled Sobol sequence in [0, 1)^d."""
    sampler = qmc.Sobol(d, scramble=True, seed=seed)
    m = max(0, math.ceil(math.log2(max(n, 1))))
    return sampler.random_base2(m)[:n]


def shoemake_quaternions(u: np.ndarray) -> np.ndarray:
    """Map points of [0, 1)^3 to uniformly distributed unit quaternions."""
    u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
    a, b = np.sqrt(1.0 - u1), np.sqrt(u1)
    t2, t3 = 2.0 * math.pi * u2, 2.0 * math.pi * u3
    return np.column_stack([a * np.sin(t2), a * np.cos(t2), b * np.sin(t3), b * np.cos(t3)])


def _sphere_from_square(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    z = 1.0 - 2.0 * u
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    t = 2.0 * math.pi * v
    return np.column_stack([r * np.cos(t), r * np.sin(t), z])


def _chord_to_angle(chord: np.ndarray) -> np.ndarray:
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))


def sphere_covering_radius(points: np.ndarray, probes: int = DEFAULT_PROBES, seed: int = 0,
                           threads: Optional[int] = None) -> float:
    """
    Largest angular distance from a probe to the nearest point.

    S^2 uses a Fibonacci mesh; S^3 uses Shoemake-mapped Sobol points.
    """
    dim = points.shape[1]
    if dim == 3:
        mesh = fibonacci_sphere(probes)
    elif dim == 4:
        mesh = shoemake_quaternions(sobol_points(3, probes, seed))
    else:
        raise DimensionMismatch(f"sphere covering radius needs 3- or 4-vectors, got {dim}")
    chord, _ = cKDTree(points).query(mesh, k=1, workers=resolve_workers(threads))
    return float(np.max(_chord_to_angle(chord)))


@dataclass
class Confinement:
    """Orbit shape: a single point, at most two planes (circles), or neither."""

    kind: str
    planes: List[Tuple[np.ndarray, float]] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'planes': [{'normal': [float(x) for x in normal], 'offset': float(offset)}
                       for normal, offset in self.planes],
        }


def _canonical_plane(normal: np.ndarray, offset: float) -> Tuple[np.ndarray, float]:
    significant = np.nonzero(np.abs(normal) > 1e-9)[0]
    if len(significant) and normal[significant[0]] < 0:
        normal, offset = -normal, -offset
    return normal, float(offset)


def _fit_plane(points: np.ndarray, hint: np.ndarray) -> Tuple[np.ndarray, float]:
    if len(points) >= 3:
        centroid = points.mean(axis=0)
        _, _, vh = np.linalg.svd(points - centroid)
        normal = vh[-1]
    elif len(points) == 2:
        d = points[1] - points[0]
        normal = hint - (hint @ d) / (d @ d) * d
        if np.linalg.norm(normal) < 1e-12:
            normal = np.cross(d, np.eye(3)[np.argmin(np.abs(d))])
    else:
        normal = hint
    normal = normal / np.linalg.norm(normal)
    return normal, float(np.mean(points @ normal))


def _verify_planes(points: np.ndarray, normal: np.ndarray, offset: float,
                   tol: float) -> Optional[List[Tuple[np.ndarray, float]]]:
    off = points[np.abs(points @ normal - offset) > tol]
    if len(off) == 0:
        return [(normal, offset)]
    normal2, offset2 = _fit_plane(off, normal)
    if np.max(np.abs(off @ normal2 - offset2)) > tol:
        return None
    return [(normal, offset), (normal2, offset2)]


def detect_confinement(points: np.ndarray, tol: float = DEFAULT_PLANE_TOL) -> Confinement:
    """
    Decide whether S^2 points sit at one point, on at most two circles, or neither.

    Candidate first planes come from all triples of a 32-point subsample;
    a candidate survives when the subsample points off it are coplanar,
    and is then verified against every point.

    Args:
        points: (N, 3) unit vectors, N >= 1
        tol: Distance tolerance to a point or plane

    Returns:
        Confinement of kind point, circles or full
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("detect_confinement needs at least one point")
    if np.max(np.abs(pts - pts[0])) <= tol:
        return Confinement('point')
    if len(pts) <= 2:
        return Confinement('circles', [_canonical_plane(*_fit_plane(pts, np.eye(3)[2]))])

    sub_idx = np.unique(np.linspace(0, len(pts) - 1, min(CONFINEMENT_SUBSAMPLE, len(pts))).astype(int))
    sub = pts[sub_idx]
    for i, j, k in itertools.combinations(range(len(sub)), 3):
        normal = np.cross(sub[j] - sub[i], sub[k] - sub[i])
        norm = np.linalg.norm(normal)
        if norm < 1e-9:
            continue
        normal = normal / norm
        offset = float(normal @ sub[i])
        off_sub = sub[np.abs(sub @ normal - offset) > tol]
        if len(off_sub) >= 3:
            normal2, offset2 = _fit_plane(off_sub, normal)
            if np.max(np.abs(off_sub @ normal2 - offset2)) > tol:
                continue
        planes = _verify_planes(pts, normal, offset, tol)
        if planes is not None:
            planes = sorted((_canonical_plane(n, o) for n, o in planes), key=lambda p: p[1])
            return Confinement('circles', planes)
    return Confinement('full')


@dataclass
class OrbitReport:
    """
    Deduplicated orbit points in canonical order.

    confinement is set for orbits on S^2; factor_confinement for orbits
    on S^2 x S^2 (keys 'plus' and 'minus').
    """

    points: np.ndarray
    covering_radius: float
    depth: int
    saturated: bool
    confinement: Optional[Confinement] = None
    factor_confinement: Optional[Dict[str, Confinement]] = None
    snapshots: List[Dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            'covering_radius': self.covering_radius,
            'confinement': self.confinement.to_json() if self.confinement else None,
            'depth': self.depth,
            'size': len(self.points),
            'saturated': self.saturated,
        }
        if self.factor_confinement is not None:
            payload['factor_confinement'] = {
                name: c.to_json() for name, c in sorted(self.factor_confinement.items())
            }
        if self.snapshots:
            payload['snapshots'] = self.snapshots
        return payload


def orbit(gens: Sequence[GroupElement], omega: Sequence[Any], max_depth: int, max_size: int,
          tol: float = DEFAULT_TOL, probes: int = DEFAULT_PROBES, seed: int = 0,
          plane_tol: float = DEFAULT_PLANE_TOL, snapshots: bool = False,
          threads: Optional[int] = None) -> OrbitReport:
    """
    Orbit of a unit vector under the generated group.

    so3 acts on S^2 and so4 on S^3; su2 and u2 act on the unit sphere of
    C^2, given either as two complex or four real coordinates
    (Re z1, Im z1, Re z2, Im z2).

    Raises:
        DimensionMismatch: If omega has the wrong length for the group
        ValueError: If omega is not a unit vector
    """
    kind = common_kind(gens)
    alphabet = _alphabet(_action_matrices(gens))
    dim = alphabet.shape[1]
    w = np.asarray(omega)
    if np.iscomplexobj(w) or (kind in ('su2', 'u2') and w.shape == (2,)):
        w = np.asarray(w, dtype=complex)
        w = np.column_stack([w.real, w.imag]).ravel()
    w = np.asarray(w, dtype=float)
    if w.shape != (dim,):
        raise DimensionMismatch(f"{kind} orbits need a {dim}-vector, got shape {w.shape}")
    if abs(np.linalg.norm(w) - 1.0) > 1e-12:
        raise ValueError(f"omega must be a unit vector, norm is {np.linalg.norm(w):.15g}")

    workers = resolve_workers(threads)
    history: List[Dict[str, Any]] = []

    def record(depth: int, pts: np.ndarray) -> None:
        radius = sphere_covering_radius(pts, probes, seed, threads)
        history.append({'depth': depth, 'size': len(pts), 'covering_radius': radius})

    closure = _breadth_first(
        w, _vector_step(alphabet), len(alphabet), _normalize_rows, lambda pts: pts,
        max_depth, max_size, tol, workers, f"{kind} orbit",
        on_level=record if snapshots else None,
    )
    points = closure.items[canonical_order(closure.items)]
    radius = history[-1]['covering_radius'] if history else \
        sphere_covering_radius(points, probes, seed, threads)
    confinement = detect_confinement(points, plane_tol) if dim == 3 else None
    return OrbitReport(points, radius, closure.depth, closure.saturated,
                       confinement=confinement, snapshots=history)


def _quaternion_keys(elements: np.ndarray) -> np.ndarray:
    quats = Rotation.from_matrix(elements).as_quat()
    return np.vstack([quats, -quats])


def _group_keys(kind: str, elements: np.ndarray) -> np.ndarray:
    # Euclidean distance between keys equals |g - h|_F / sqrt(n)
    if kind == 'su2':
        return np.column_stack([elements[:, 0, 0].real, elements[:, 0, 0].imag,
                                elements[:, 1, 0].real, elements[:, 1, 0].imag])
    n = elements.shape[1]
    return _matrix_keys(elements) / math.sqrt(n)


def _group_probes(kind: str, probes: int, seed: int) -> np.ndarray:
    if kind in ('so3', 'su2'):
        return shoemake_quaternions(sobol_points(3, probes, seed))
    if kind == 'u2':
        u = sobol_points(4, probes, seed)
        q = shoemake_quaternions(u[:, :3])
        alpha = q[:, 0] + 1j * q[:, 1]
        beta = q[:, 2] + 1j * q[:, 3]
        su2 = np.empty((probes, 2, 2), dtype=complex)
        su2[:, 0, 0], su2[:, 0, 1] = alpha, -np.conj(beta)
        su2[:, 1, 0], su2[:, 1, 1] = beta, np.conj(alpha)
        phase = np.exp(2j * math.pi * u[:, 3])
        return _group_keys('u2', su2 * phase[:, None, None])
    if kind == 'so4':
        u = sobol_points(6, probes, seed)
        left = shoemake_quaternions(u[:, :3])
        right = shoemake_quaternions(u[:, 3:])
        mats = np.stack([left_multiplication(p) @ right_multiplication(q)
                         for p, q in zip(left, right)])
        return _group_keys('so4', mats)
    raise ValueError(f"unknown group kind: {kind}")


def covering_radius_group(ball: GroupBall, probes: int = DEFAULT_PROBES, seed: int = 0,
                          threads: Optional[int] = None) -> float:
    """
    Largest distance from a quasi-random group element to the ball.

    On SO(3) the distance is the relative rotation angle; on SU(2), U(2)
    and SO(4) it is |g - h|_F / sqrt(n).
    """
    workers = resolve_workers(threads)
    mesh = _group_probes(ball.group_kind, probes, seed)
    if ball.group_kind == 'so3':
        chord, _ = cKDTree(_quaternion_keys(ball.elements)).query(mesh, k=1, workers=workers)
        # unit quaternions at angle a on S^3 give relative rotation angle 2a
        return float(np.max(2.0 * _chord_to_angle(chord)))
    tree = cKDTree(_group_keys(ball.group_kind, ball.elements))
    dist, _ = tree.query(mesh, k=1, workers=workers)
    return float(np.max(dist))


def group_distance(kind: str, stack: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Distance of each matrix in a stack to target, in the covering-radius metric."""
    if kind == 'so3':
        cos = (np.einsum('ij,nij->n', target, stack) - 1.0) / 2.0
        return np.arccos(np.clip(cos, -1.0, 1.0))
    n = target.shape[0]
    return np.linalg.norm((stack - target).reshape(len(stack), -1), axis=1) / math.sqrt(n)


@dataclass(frozen=True)
class Approximation:
    word: Tuple[int, ...]
    distance: float
    evaluated: int


@dataclass(frozen=True)
class NotFound:
    best_word: Tuple[int, ...]
    best_distance: float
    evaluated: int


def approximate_element(gens: Sequence[GroupElement], target: GroupElement, eps: float,
                        budget: int = 10 ** 6, tol: float = DEFAULT_TOL,
                        block_size: int = APPROX_BLOCK_SIZE,
                        threads: Optional[int] = None) -> Union[Approximation, NotFound]:
    """
    Best-first search for a word whose product lies within eps of target.

    Each expansion multiplies the popped product by every element of a
    precomputed ball of block_size elements and pushes the closest
    children. budget counts evaluated products.

    Returns:
        Approximation with the shortest hit of the first successful
        expansion, or NotFound with the best word seen
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    kind = common_kind(gens)
    if group_kind_of(target) != kind:
        raise GroupKindMismatch(f"target is {group_kind_of(target)}, generators are {kind}")
    t = to_array(target)
    identity = np.eye(t.shape[0], dtype=t.dtype)
    d0 = float(group_distance(kind, identity[None], t)[0])
    if d0 <= eps:
        return Approximation((), d0, 0)

    block = group_ball(gens, max_depth=REORTHONORMALIZE_EVERY, max_size=block_size,
                       tol=tol, threads=threads)
    lengths = block.word_lengths
    heap: List[Tuple[float, int, Tuple[int, ...], np.ndarray]] = [(d0, 0, (), identity)]
    counter = itertools.count(1)
    evaluated = 0
    best_word, best_distance = (), d0

    while heap and evaluated < budget:
        _, _, word, x = heapq.heappop(heap)
        products = np.einsum('ij,njk->nik', x, block.elements)
        dists = group_distance(kind, products, t)
        evaluated += len(products)
        hits = np.nonzero(dists <= eps)[0]
        if len(hits):
            j = min(hits.tolist(), key=lambda h: (lengths[h], dists[h]))
            found = word + block.word(j)
            logger.info(f"approximation found: length {len(found)}, distance {dists[j]:.3e}, "
                        f"{evaluated} products evaluated")
            return Approximation(found, float(dists[j]), evaluated)
        for j in np.argsort(dists, kind='stable')[:APPROX_CHILDREN].tolist():
            child = word + block.word(j)
            if dists[j] < best_distance:
                best_word, best_distance = child, float(dists[j])
            heapq.heappush(heap, (float(dists[j]), next(counter), child,
                                  reorthonormalize(products[j])))

    logger.info(f"no approximation within {eps} after {evaluated} products "
                f"(best {best_distance:.3e})")
    return NotFound(best_word, best_distance, evaluated)


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = np.zeros((6, 6))
    m[:3, :3] = a
    m[3:, 3:] = b
    return m


def product_orbit(gens_pairs: Sequence[Tuple[Rot3, Rot3]], p_plus: Sequence[float],
                  p_minus: Sequence[float], max_size: int, tol: float = DEFAULT_TOL,
                  max_depth: int = 10 ** 6, probes: int = DEFAULT_PROBES, seed: int = 0,
                  plane_tol: float = DEFAULT_PLANE_TOL,
                  threads: Optional[int] = None) -> OrbitReport:
    """
    Orbit of (p_plus, p_minus) under the diagonal action of rotation pairs on S^2 x S^2.

    The covering radius uses the max metric
    max(angle(x+, y+), angle(x-, y-)); confinement is reported per factor.

    Raises:
        ValueError: If an input vector is not a unit 3-vector
    """
    start = np.concatenate([np.asarray(p_plus, dtype=float), np.asarray(p_minus, dtype=float)])
    if start.shape != (6,):
        raise DimensionMismatch("product orbits need two 3-vectors")
    for part in (start[:3], start[3:]):
        if abs(np.linalg.norm(part) - 1.0) > 1e-12:
            raise ValueError("p_plus and p_minus must be unit vectors")
    alphabet = _alphabet([_block_diag(cp.m, cm.m) for cp, cm in gens_pairs])

    def renormalize(pts: np.ndarray) -> np.ndarray:
        return np.hstack([_normalize_rows(pts[:, :3]), _normalize_rows(pts[:, 3:])])

    closure = _breadth_first(
        start, _vector_step(alphabet), len(alphabet), renormalize, lambda pts: pts,
        max_depth, max_size, tol, resolve_workers(threads), "product orbit",
    )
    points = closure.items[canonical_order(closure.items)]

    u = sobol_points(4, probes, seed)
    probe_plus = _sphere_from_square(u[:, 0], u[:, 1])
    probe_minus = _sphere_from_square(u[:, 2], u[:, 3])
    best = max_metric_best_dots(probe_plus, probe_minus,
                                np.ascontiguousarray(points[:, :3]),
                                np.ascontiguousarray(points[:, 3:]))
    radius = float(np.max(np.arccos(np.clip(best, -1.0, 1.0))))

    factors = {
        'plus': detect_confinement(points[:, :3], plane_tol),
        'minus': detect_confinement(points[:, 3:], plane_tol),
    }
    return OrbitReport(points, radius, closure.depth, closure.saturated,
                       factor_confinement=factors)
