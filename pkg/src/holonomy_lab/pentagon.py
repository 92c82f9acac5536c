"""Pentagons spanned by an orbit point of a punctured-torus pair.

For a pair (g, h) and a point p the pentagon visits

    p -> [g^-1, h^-1] p -> h p -> g h p -> h^-1 g h p -> p

Its first side joins p to its image under the boundary element
``[g^-1, h^-1]``; the other four sides are paired by h and g.

The embedded-disc test works on whole batches of polygons at once: vertices
go to the Klein model, where geodesic sides are straight chords, and the test
combines pairwise segment intersection with the total turning of the
boundary.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .char_torus import ALL_MOVES, Move, apply_move_matrices, character_of
from .errors import ContractError, DegeneratePentagon, WrongRegime
from .hyp_core import (
    Geodesic,
    Hyperbolic,
    Isometry,
    PointH2,
    classify,
    collar,
    commutator,
    commutator_trace,
    disk_to_klein,
    distance_to_geodesic,
    uhp_to_disk,
)

TOL_GEO = 1e-9
TOL_TURN = 1e-6
TOL_CHORD = 1e-12
TWO_PI = 2 * math.pi

DEFAULT_DEPTH = 6
DEFAULT_GRID = 64
MAX_ENTRY = 1e6  # bases with larger matrix entries are skipped as ill-conditioned


def pentagon_maps(g: Isometry, h: Isometry) -> tuple[Isometry, ...]:
    """The five isometries whose images of p are the pentagon vertices."""
    gi, hi = g.inverse(), h.inverse()
    return (Isometry.identity(), gi @ hi @ g @ h, h, g @ h, hi @ g @ h)


def _mobius(m: Isometry, z: np.ndarray) -> np.ndarray:
    a, b, c, d = m.entries
    return (a * z + b) / (c * z + d)


def pentagon_vertices(g: Isometry, h: Isometry, points: np.ndarray) -> np.ndarray:
    """Vertices for many base points at once, shape ``points.shape + (5,)``."""
    z = np.asarray(points, dtype=complex)
    return np.stack([_mobius(m, z) for m in pentagon_maps(g, h)], axis=-1)


@dataclass(frozen=True)
class Pentagon:
    g: Isometry
    h: Isometry
    p: PointH2
    vertices: tuple[PointH2, ...]

    @property
    def sides(self) -> list[tuple[PointH2, PointH2]]:
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    def z(self) -> np.ndarray:
        return np.array([v.z for v in self.vertices])


def build_pentagon(g: Isometry, h: Isometry, p: PointH2) -> Pentagon:
    verts = tuple(PointH2.from_complex(m(p.z)) for m in pentagon_maps(g, h))
    return Pentagon(g, h, p, verts)


# -- embedded-disc test ---------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EmbeddingReport:
    ok: bool
    orientation: int
    margin: float


def _cross(u, v):
    return (np.conj(u) * v).imag


def _dot(u, v):
    return (np.conj(u) * v).real


def _point_segment_distance(p, a, b):
    ab = b - a
    len2 = np.abs(ab) ** 2
    t = np.where(len2 > 0, _dot(ab, p - a) / np.where(len2 > 0, len2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(p - (a + t * ab))


def _segment_distance(p1, p2, q1, q2):
    """Euclidean distance between segments; zero when they cross."""
    d1, d2 = _cross(p2 - p1, q1 - p1), _cross(p2 - p1, q2 - p1)
    d3, d4 = _cross(q2 - q1, p1 - q1), _cross(q2 - q1, p2 - q1)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum.reduce([
        _point_segment_distance(q1, p1, p2),
        _point_segment_distance(q2, p1, p2),
        _point_segment_distance(p1, q1, q2),
        _point_segment_distance(p2, q1, q2),
    ])
    return np.where(crossing, 0.0, dist)


def polygon_report(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Embedded-disc verdicts for polygons given as rows of UHP vertices.

    Returns boolean ``ok``, integer ``orientation`` (+1 counterclockwise) and
    ``margin``, the least Klein-model clearance between non-adjacent sides.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    n = z.shape[-1]
    y = z.imag
    # Vertices numerically on the ideal boundary cannot be certified.
    finite = np.isfinite(z).all(axis=-1) & (y > 0).all(axis=-1)
    y = np.where(y > 0, y, 1.0)

    distinct = finite.copy()
    for i in range(n):
        for j in range(i + 1, n):
            arg = np.abs(z[..., i] - z[..., j]) / (2 * np.sqrt(y[..., i] * y[..., j]))
            distinct &= 2 * np.arcsinh(arg) > TOL_GEO

    k = disk_to_klein(uhp_to_disk(np.where(np.isfinite(z), z, 1j)))
    nxt = np.roll(k, -1, axis=-1)
    prv = np.roll(k, 1, axis=-1)
    edges = nxt - k

    # Two sides sharing a vertex overlap only when they fold back on each other.
    u, v = prv - k, nxt - k
    folded = (np.abs(_cross(u, v)) <= TOL_CHORD * np.abs(u) * np.abs(v)) & (_dot(u, v) > 0)
    no_fold = ~folded.any(axis=-1)

    margin = np.full(z.shape[:-1], np.inf)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            d = _segment_distance(k[..., i], nxt[..., i], k[..., j], nxt[..., j])
            margin = np.minimum(margin, d)
    disjoint = margin > TOL_CHORD

    prev_edges = np.roll(edges, 1, axis=-1)
    turning = np.arctan2(_cross(prev_edges, edges), _dot(prev_edges, edges)).sum(axis=-1)
    simple = np.abs(np.abs(turning) - TWO_PI) < TOL_TURN

    ok = distinct & no_fold & disjoint & simple
    orientation = np.where(turning >= 0, 1, -1)
    return ok, orientation, margin


def bounds_embedded_disc(pent: Pentagon) -> EmbeddingReport:
    ok, orientation, margin = polygon_report(pent.z())
    return EmbeddingReport(bool(ok[0]), int(orientation[0]), float(margin[0]))


# -- angles and area ---------------------------------------------------------------


def interior_angles(z: Sequence[complex], orientation: int) -> np.ndarray:
    """Interior angle at each vertex of a simple polygon with the given orientation."""
    z = np.asarray(z, dtype=complex)

    def direction(vertex, towards):
        w = (towards - vertex.real) / vertex.imag
        return np.angle((w - 1j) / (w + 1j))

    to_prev = direction(z, np.roll(z, 1))
    to_next = direction(z, np.roll(z, -1))
    if orientation > 0:
        return np.mod(to_prev - to_next, TWO_PI)
    return np.mod(to_next - to_prev, TWO_PI)


def signed_area(z: Sequence[complex]) -> float:
    """Signed hyperbolic area of a closed geodesic polygon (positive when ccw).

    Sums a fan of triangles from vertex 0, each with area
    ``2 arg((1 - u v*)(1 - v w*)(1 - w u*))`` in the disk model.
    """
    w = uhp_to_disk(np.asarray(z, dtype=complex))
    u = w[0]
    a, b = w[1:-1], w[2:]
    prod = (1 - u * np.conj(a)) * (1 - a * np.conj(b)) * (1 - b * np.conj(u))
    return float(2 * np.angle(prod).sum())


def polygon_area(z: Sequence[complex]) -> float:
    return abs(signed_area(z))


def corner_angle(pent: Pentagon) -> float:
    """Sum of the five interior angles, the angle at the glued corner."""
    report = bounds_embedded_disc(pent)
    if not report.ok:
        raise DegeneratePentagon("pentagon does not bound an embedded disc")
    return float(interior_angles(pent.z(), report.orientation).sum())


# -- goodness search ---------------------------------------------------------------


def boundary_axis(g: Isometry, h: Isometry) -> Geodesic:
    """Axis of [g^-1, h^-1], the element joining the first two vertices."""
    cls = classify(commutator(g.inverse(), h.inverse()))
    if not isinstance(cls, Hyperbolic):
        raise WrongRegime("the boundary element is not hyperbolic")
    return cls.axis


@dataclass(frozen=True)
class GoodnessWitness:
    moves: tuple[Move, ...]
    point: PointH2
    delta: float
    epsilon: float
    orientation: int
    pair: tuple[Isometry, Isometry]
    corner_angle: float
    side: int  # sign of the Fermi coordinate of the point


def _bases(g: Isometry, h: Isometry, depth: int) -> Iterator[tuple[tuple[Move, ...], tuple[Isometry, Isometry]]]:
    """Breadth-first move words, skipping bases whose character was already seen."""
    seen = set()
    queue = deque([((), (g, h))])
    while queue:
        word, pair = queue.popleft()
        key = tuple(round(c, 8) + 0.0 for c in character_of(*pair).coords)
        if key in seen:
            continue
        seen.add(key)
        yield word, pair
        if len(word) < depth:
            for mv in ALL_MOVES:
                queue.append((word + (mv,), apply_move_matrices(mv, pair)))


def _collar_grid(epsilon: float, length: float, grid: int, seed: int):
    rng = np.random.default_rng(seed)
    us, ur = rng.random(), 0.25 + 0.5 * rng.random()
    s = (np.arange(grid) + us) * length / grid
    r = -epsilon + 2 * epsilon * (np.arange(grid) + ur) / grid
    return np.meshgrid(s, r, indexing="ij")


def iter_witnesses(g: Isometry, h: Isometry, epsilon: float, depth: int = DEFAULT_DEPTH,
                   grid: int = DEFAULT_GRID, seed: int = 0,
                   moves_allowed: Sequence[Move] | None = None) -> Iterator[GoodnessWitness]:
    """All witnesses per basis, in deterministic enumeration order.

    Within a basis the grid is scanned with arclength as the outer index and
    signed distance as the inner one; one witness is produced per distinct
    (basis, side, orientation) so callers can filter on those.
    """
    if not commutator_trace(g, h) > 2:
        raise WrongRegime("goodness is defined for commutator trace > 2")
    allowed = set(ALL_MOVES if moves_allowed is None else moves_allowed)
    for word, (gp, hp) in _bases(g, h, depth):
        if any(mv not in allowed for mv in word):
            continue
        if max(map(abs, gp.entries + hp.entries)) > MAX_ENTRY:
            continue
        try:
            axis = boundary_axis(gp, hp)
            # Work in the frame where the axis is the imaginary axis.
            k = axis.to_standard()
            kinv = k.inverse()
            if max(map(abs, k.entries)) > MAX_ENTRY:
                continue
            gs, hs = k @ gp @ kinv, k @ hp @ kinv
        except (ContractError, ValueError):
            continue  # basis too ill-conditioned to place its axis
        trace = commutator_trace(gp, hp)
        if not abs(commutator_trace(gs, hs) - trace) <= TOL_GEO * max(1.0, abs(trace)):
            continue  # the frame change lost the conjugacy invariant
        boundary = classify(commutator(gs.inverse(), hs.inverse()))
        if not isinstance(boundary, Hyperbolic):
            continue
        length = boundary.length
        s, r = _collar_grid(epsilon, length, grid, seed)
        w = np.exp(s) * (-np.tanh(r) + 1j / np.cosh(r))
        ok, orientation, _ = polygon_report(pentagon_vertices(gs, hs, w.ravel()))
        emitted = set()
        for idx in np.flatnonzero(ok):
            side = 1 if r.ravel()[idx] > 0 else -1
            key = (side, int(orientation[idx]))
            if key in emitted:
                continue
            try:
                point = PointH2.from_complex(kinv(complex(w.ravel()[idx])))
                pent = build_pentagon(gp, hp, point)
            except ValueError:
                continue
            report = bounds_embedded_disc(pent)
            if not report.ok:
                continue
            emitted.add(key)
            yield GoodnessWitness(
                moves=word,
                point=point,
                delta=distance_to_geodesic(point, axis),
                epsilon=epsilon,
                orientation=report.orientation,
                pair=(gp, hp),
                corner_angle=corner_angle(pent),
                side=side,
            )


def search_good(g: Isometry, h: Isometry, epsilon: float, depth: int = DEFAULT_DEPTH,
                grid: int = DEFAULT_GRID, seed: int = 0) -> GoodnessWitness | None:
    """First witness of epsilon-goodness within the budget, or None."""
    return next(iter_witnesses(g, h, epsilon, depth, grid, seed), None)


def search_w_good(g: Isometry, h: Isometry, depth: int = DEFAULT_DEPTH,
                  grid: int = DEFAULT_GRID, seed: int = 0) -> GoodnessWitness | None:
    """Goodness search with epsilon equal to the collar width of Tr[g, h]."""
    t = commutator_trace(g, h)
    if not t > 2:
        raise WrongRegime("goodness is defined for commutator trace > 2")
    return search_good(g, h, collar(t).w, depth, grid, seed)
