"""Cone-surface structures on closed surfaces from surface-group representations.

The fundamental polygon is always the relator polygon: with the relator
``a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1`` and a base point p, vertex k is
P_k(p) where P_k is the image of the first k letters.  Side k runs from vertex
k to vertex k+1.  A letter x read at position i and x^-1 read at position j
give the pairing ``P_j x^-1 P_i^-1``, which carries side i onto side j with
reversed direction.  All 4g vertices form a single cycle, so a simple relator
polygon is a cone surface with (at most) one cone point at the image of p.

Genus-2 constructions split the surface into the handle (a1, b1) and its
complement (a2, b2), a one-holed torus sharing the boundary [a1, b1].
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from .char_torus import Move, apply_move_matrices, is_virtually_abelian
from .errors import (
    BudgetExhausted,
    CommutatorMismatch,
    ElementaryRepresentation,
    EllipticBoundary,
    HolonomyError,
    IdentityCurve,
    InvalidDomain,
    NotVAPair,
    NoWitness,
    OutOfDisc,
    RelatorNotSatisfied,
    RootNotBracketed,
    WrongRegime,
)
from .hyp_core import (
    IDENTITY,
    TOL_CLASS,
    Elliptic,
    Geodesic,
    Hyperbolic,
    Isometry,
    Parabolic,
    PointH2,
    classify,
    collar,
    commutator,
    commutator_sl2,
    commutator_trace,
    distance,
    psl_distance,
    shared_fixed_point,
)
from .lifts import (
    SurfaceRepresentation,
    classify_lift,
    commutator_lift,
    compose,
    compose_all,
    euler_number_closed,
    lift_simplest,
)
from .pentagon import interior_angles, iter_witnesses, polygon_report, signed_area

TOL_ANG = 1e-6
TOL_PAIR = 1e-8
TOL_AREA = 1e-6
TWO_PI = 2 * math.pi

# -- words in the surface group -------------------------------------------------
#
# A word is a tuple of nonzero ints: k stands for generator k (1-based, in the
# order a1, b1, a2, b2, ...) and -k for its inverse.


def reduce_word(word: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(word))


def substitute(word: Sequence[int], images: dict[int, Sequence[int]]) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        out.extend(images[x] if x > 0 else invert_word(images[-x]))
    return reduce_word(out)


def word_name(word: Sequence[int]) -> str:
    if not word:
        return "1"
    names = []
    for x in word:
        k = abs(x) - 1
        base = f"{'ab'[k % 2]}{k // 2 + 1}"
        names.append(base if x > 0 else base + "^-1")
    return "*".join(names)


def evaluate(word: Sequence[int], generators: Sequence[Isometry]) -> Isometry:
    out = IDENTITY
    for x in word:
        g = generators[abs(x) - 1]
        out = out @ (g if x > 0 else g.inverse())
    return out


def relator_word(genus: int) -> tuple[int, ...]:
    word = []
    for i in range(genus):
        a, b = 2 * i + 1, 2 * i + 2
        word += [a, b, -a, -b]
    return tuple(word)


def _cyclic_rotations(word):
    return {word[i:] + word[:i] for i in range(len(word))}


def _cyclically_reduce(word):
    w = list(reduce_word(word))
    while len(w) > 1 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def preserves_relator(images: dict[int, Sequence[int]], genus: int) -> bool:
    """Whether the substitution sends the relator to a cyclic rotation of itself."""
    r = relator_word(genus)
    return _cyclically_reduce(substitute(r, images)) in _cyclic_rotations(r)


def slide_automorphism(genus: int, k: int = 1) -> dict[int, tuple[int, ...]]:
    """Twist along a curve between handles 1 and 2, applied k times.

    Fixes a1 and a2 and sends b1 -> (a2 a1)^k b1, b2 -> (a1 a2)^k b2.
    """
    ident = {i: (i,) for i in range(1, 2 * genus + 1)}
    xi, eta = (3, 1), (1, 3)
    if k < 0:
        xi, eta, k = invert_word(xi), invert_word(eta), -k
    ident[2] = reduce_word(xi * k + (2,))
    ident[4] = reduce_word(eta * k + (4,))
    return ident


def apply_automorphism(rep: SurfaceRepresentation, images: dict[int, Sequence[int]]) -> SurfaceRepresentation:
    gens = rep.generators
    return SurfaceRepresentation.from_generators(
        [evaluate(images[i], gens) for i in range(1, 2 * rep.genus + 1)])


# -- cone-surface data ------------------------------------------------------------


@dataclass(frozen=True)
class ConePoint:
    vertex_orbit: tuple[int, ...]
    angle: float

    @property
    def order(self) -> float:
        """k with angle = 2 pi (k + 1)."""
        return self.angle / TWO_PI - 1


@dataclass(frozen=True)
class Pairing:
    side_from: int
    side_to: int
    isometry: Isometry


@dataclass(frozen=True)
class DomainResiduals:
    pairing: float
    vertex_cycle: float
    area: float
    gauss_bonnet: float
    angle: float


@dataclass(frozen=True)
class ConeSurfaceData:
    polygon: tuple[PointH2, ...]
    pairings: tuple[Pairing, ...]
    cone_points: tuple[ConePoint, ...]
    genus: int
    chi: int
    holonomy: SurfaceRepresentation
    residuals: DomainResiduals | None = field(default=None, compare=False)

    @property
    def euler(self) -> int:
        return euler_number_closed(self.holonomy)

    @property
    def cone_point(self) -> PointH2:
        """Developed image of the (single) cone point."""
        return self.polygon[self.cone_points[0].vertex_orbit[0]]


def develop_relator_polygon(rep: SurfaceRepresentation, p: PointH2):
    """Vertices and side pairings of the relator polygon based at p."""
    word = relator_word(rep.genus)
    prefixes = [IDENTITY]
    for x in word[:-1]:
        prefixes.append(prefixes[-1] @ evaluate((x,), rep.generators))
    vertices = tuple(PointH2.from_complex(m(p.z)) for m in prefixes)
    first = {}
    pairings = []
    for pos, x in enumerate(word):
        if -x in first:
            i = first.pop(-x)
            letter = evaluate((word[i],), rep.generators)
            iso = prefixes[pos] @ letter.inverse() @ prefixes[i].inverse()
            pairings.append(Pairing(i, pos, iso))
        else:
            first[x] = pos
    return vertices, tuple(sorted(pairings, key=lambda pr: pr.side_from))


def holonomy_from_pairings(pairings: Sequence[Pairing], genus: int) -> SurfaceRepresentation:
    """Generators recovered from the pairings of a relator polygon."""
    by_side = {pr.side_from: pr.isometry for pr in pairings}
    gens: list[Isometry] = []
    k = IDENTITY  # image of the commutators of earlier handles
    for i in range(genus):
        kinv = k.inverse()
        ta = kinv @ by_side[4 * i] @ k      # a b a^-1
        tb = kinv @ by_side[4 * i + 1] @ k  # [a, b] a^-1
        u = tb.inverse() @ ta               # a b
        a = ta.inverse() @ u
        b = a.inverse() @ u
        gens += [a, b]
        k = k @ commutator(a, b)
    return SurfaceRepresentation.from_generators(gens)


def vertex_cycles(n: int, pairings: Sequence[Pairing]) -> list[tuple[tuple[int, ...], Isometry]]:
    """Vertex orbits under the side pairings, each with its cycle transformation."""
    moves = {}
    for pr in pairings:
        moves[pr.side_from] = (pr.side_to, pr.isometry)
        moves[pr.side_to] = (pr.side_from, pr.isometry.inverse())
    seen: set[int] = set()
    cycles = []
    for start in range(n):
        if start in seen:
            continue
        orbit = [start]
        total = IDENTITY
        vertex, side = start, start
        for _ in range(2 * n):
            other, iso = moves[side]
            # pairings reverse direction: a side's start goes to the image's end
            vertex = (other + 1) % n if vertex == side else other
            side = (other - 1) % n if vertex == other else vertex
            total = iso @ total
            if vertex == start and side == start:
                break
            orbit.append(vertex)
        else:
            raise InvalidDomain("vertex cycle did not close")
        seen.update(orbit)
        cycles.append((tuple(orbit), total))
    return cycles


def _side_residual(pr: Pairing, vertices: Sequence[PointH2], n: int) -> float:
    i, j = pr.side_from, pr.side_to
    a, b = vertices[i], vertices[(i + 1) % n]
    c, d = vertices[j], vertices[(j + 1) % n]
    return max(distance(PointH2.from_complex(pr.isometry(a.z)), d),
               distance(PointH2.from_complex(pr.isometry(b.z)), c))


def assemble(rep: SurfaceRepresentation, p: PointH2,
             expected_orders: Sequence[float] | None = None) -> ConeSurfaceData:
    """Relator polygon at p, validated as cone-surface data."""
    vertices, pairings = develop_relator_polygon(rep, p)
    return make_domain(vertices, pairings, rep.genus, expected_orders)


def make_domain(vertices: Sequence[PointH2], pairings: Sequence[Pairing], genus: int,
                expected_orders: Sequence[float] | None = None) -> ConeSurfaceData:
    """Check every invariant of the polygon data and package it.

    Raises InvalidDomain when the polygon is not simple, a pairing misses its
    target side, a vertex cycle does not compose to the identity, or the area
    disagrees with Gauss-Bonnet.
    """
    n = len(vertices)
    z = np.array([v.z for v in vertices])
    ok, orientation, _ = polygon_report(z)
    if not ok[0]:
        raise InvalidDomain("polygon is not simple")
    sides = sorted([pr.side_from for pr in pairings] + [pr.side_to for pr in pairings])
    if sides != list(range(n)):
        raise InvalidDomain("every side must appear in exactly one pairing")
    pair_res = max(_side_residual(pr, vertices, n) for pr in pairings)
    if pair_res > TOL_PAIR:
        raise InvalidDomain(f"pairing residual {pair_res:.3e}")
    angles = interior_angles(z, int(orientation[0]))
    cones = []
    cycle_res = 0.0
    for orbit, total in vertex_cycles(n, pairings):
        cycle_res = max(cycle_res, float(psl_distance(total, IDENTITY)))
        theta = float(angles[list(orbit)].sum())
        if abs(theta - TWO_PI) > TOL_ANG:
            cones.append(ConePoint(orbit, theta))
    if cycle_res > TOL_PAIR:
        raise InvalidDomain(f"vertex-cycle residual {cycle_res:.3e}")
    chi = 2 - 2 * genus
    orders = [c.order for c in cones]
    if expected_orders is not None and (len(orders) != len(expected_orders) or any(
            abs(o - e) > TOL_ANG / TWO_PI for o, e in zip(orders, expected_orders))):
        raise InvalidDomain(f"cone orders {orders} differ from {list(expected_orders)}")
    total_order = chi + sum(round(o) for o in orders)
    if any(abs(o - round(o)) > TOL_ANG for o in orders):
        raise InvalidDomain(f"cone orders {orders} are not integral")
    if not total_order < 0:
        raise InvalidDomain("chi + sum of orders must be negative")
    area = abs(signed_area(z))
    gb = abs(area + TWO_PI * total_order)
    if gb > TOL_AREA:
        raise InvalidDomain(f"area {area!r} breaks Gauss-Bonnet by {gb:.3e}")
    holonomy = holonomy_from_pairings(pairings, genus)
    residuals = DomainResiduals(pair_res, cycle_res, area, gb,
                                max((abs(c.order - round(c.order)) * TWO_PI for c in cones), default=0.0))
    return ConeSurfaceData(tuple(vertices), tuple(pairings), tuple(cones), genus, chi, holonomy, residuals)


# -- Euler numbers and splitting -----------------------------------------------------


def gauss_bonnet_admissible(chi: int, orders: Sequence[float]) -> bool:
    return chi + sum(orders) < 0


def relative_euler_handles(pairs: Sequence[tuple[Isometry, Isometry]]) -> int:
    """Relative Euler number of the subsurface carried by consecutive handles.

    The product of the commutator lifts is trivialized along the boundary by
    the simplest lift of the inverse boundary element.
    """
    u = compose_all([commutator_lift(a, b) for a, b in pairs])
    boundary = u.base
    tr = boundary.trace
    if abs(tr) < 2 - TOL_CLASS:
        raise EllipticBoundary(f"boundary trace {tr!r} is elliptic")
    cls = classify_lift(compose(u, lift_simplest(boundary.inverse())))
    if cls.family != "Center":
        raise WrongRegime(f"boundary trivialization left {cls}")
    return cls.index


@dataclass(frozen=True)
class SplitResult:
    handle_pair: tuple[Isometry, Isometry]
    complement_generators: tuple[Isometry, ...]
    boundary_trace: float
    handle_rel_euler: int
    complement_rel_euler: int


def _handles(rep: SurfaceRepresentation) -> list[tuple[Isometry, Isometry]]:
    return [rep.handle(i) for i in range(1, rep.genus + 1)]


def split_handle(rep: SurfaceRepresentation, handle_index: int) -> SplitResult:
    """Cut off handle i; the Euler number splits into handle and complement parts.

    The handle part is the lift-computed relative number of [a_i, b_i]; its
    magnitude is fixed by the trace rule (1 when Tr <= -2, 0 when Tr >= 2).
    The complement part is computed independently from the remaining handles
    (read cyclically after handle i) and must add up to the Euler number.
    """
    handles = _handles(rep)
    g, h = handles[handle_index - 1]
    a, _, _, d = commutator_sl2(g, h)
    tr = a + d
    if abs(tr) < 2 - TOL_CLASS:
        raise EllipticBoundary(f"boundary trace {tr!r} is elliptic")
    handle_rel = relative_euler_handles([(g, h)])
    rest = handles[handle_index:] + handles[:handle_index - 1]
    complement_rel = relative_euler_handles(rest)
    total = euler_number_closed(rep)
    if handle_rel + complement_rel != total:
        raise WrongRegime(f"relative Euler numbers {handle_rel} + {complement_rel} != {total}")
    complement = tuple(x for pair in rest for x in pair)
    return SplitResult((g, h), complement, tr, handle_rel, complement_rel)


# -- simple curves ---------------------------------------------------------------------


@dataclass(frozen=True)
class CurveHit:
    word: tuple[int, ...]
    name: str
    kind: object  # Identity, Elliptic or Parabolic
    image: Isometry


_HANDLE_MOVE_WORDS = {
    Move.TWIST_A: lambda a, b: (a, reduce_word(a + b)),
    Move.TWIST_A_INV: lambda a, b: (a, reduce_word(invert_word(a) + b)),
    Move.TWIST_B: lambda a, b: (reduce_word(a + b), b),
    Move.TWIST_B_INV: lambda a, b: (reduce_word(a + invert_word(b)), b),
}


def simple_curve_catalog(genus: int, budget: int) -> Iterator[tuple[int, ...]]:
    """Words of simple closed curves: generators, handle-orbit images, separating curves."""
    seen: set[tuple[int, ...]] = set()
    emitted = 0

    def fresh(w):
        key = min(_cyclic_rotations(_cyclically_reduce(w)) | _cyclic_rotations(_cyclically_reduce(invert_word(w))))
        if key in seen:
            return False
        seen.add(key)
        return True

    queue = []
    for i in range(genus):
        a, b = (2 * i + 1,), (2 * i + 2,)
        queue.append((a, b))
        for w in (a, b, reduce_word(a + b), reduce_word(a + invert_word(b))):
            if fresh(w):
                emitted += 1
                yield w
                if emitted >= budget:
                    return
    for k in range(1, genus):
        w = relator_word(genus)[:4 * k]
        if fresh(w):
            emitted += 1
            yield w
            if emitted >= budget:
                return
    # breadth-first images of each handle basis under the handle-local moves
    while queue:
        a, b = queue.pop(0)
        for build in _HANDLE_MOVE_WORDS.values():
            na, nb = build(a, b)
            for w in (na, nb):
                if fresh(w):
                    emitted += 1
                    yield w
                    if emitted >= budget:
                        return
            queue.append((na, nb))


def find_non_hyperbolic_simple_curve(rep: SurfaceRepresentation, budget: int = 200) -> CurveHit | None:
    """First catalog curve whose image is elliptic, parabolic or the identity."""
    for w in simple_curve_catalog(rep.genus, budget):
        image = evaluate(w, rep.generators)
        kind = classify(image)
        if not isinstance(kind, Hyperbolic):
            return CurveHit(w, word_name(w), kind, image)
    return None


def check_identity_curves(rep: SurfaceRepresentation, budget: int = 200) -> None:
    """Raise IdentityCurve if a simple closed curve is sent to the identity."""
    for w in simple_curve_catalog(rep.genus, budget):
        if evaluate(w, rep.generators).is_identity(1e-9):
            raise IdentityCurve(f"simple closed curve {word_name(w)} maps to the identity")


# -- parabolic basis repair ------------------------------------------------------------


_SLIDES = (1, -1, 2, -2)


def fix_parabolic_basis(rep: SurfaceRepresentation, alpha_index: int = 0) -> SurfaceRepresentation:
    """Change the basis so that the parabolic a1 shares no fixed point with b1.

    Applies a slide automorphism b1 -> xi b1 with xi = (a2 a1)^k; the first
    k in (1, -1, 2, -2) that separates the fixed points wins.
    """
    if rep.genus < 2:
        raise WrongRegime("the slide needs a second handle")
    if alpha_index != 0:
        raise WrongRegime("only alpha = a1 (index 0) is supported; relabel handles first")
    a1, b1 = rep.handle(1)
    if not isinstance(classify(a1), Parabolic):
        raise WrongRegime("a1 is not parabolic")
    if shared_fixed_point(a1, b1) is None:
        return rep
    for k in _SLIDES:
        images = slide_automorphism(rep.genus, k)
        new = apply_automorphism(rep, images)
        if shared_fixed_point(*new.handle(1)) is None:
            return new
    raise ElementaryRepresentation("every slide keeps a fixed point shared with a1")


# -- virtually abelian handle ------------------------------------------------------------


def _complement_commutator_residual(rep: SurfaceRepresentation) -> float:
    """PSL distance between [a2, b2] and [a1, b1]^-1."""
    (a1, b1), (a2, b2) = rep.handle(1), rep.handle(2)
    return psl_distance(commutator(a2, b2), commutator(a1, b1).inverse())


def _require_genus_two(rep: SurfaceRepresentation) -> None:
    if rep.genus != 2:
        raise WrongRegime(f"domain construction is implemented for genus 2, not {rep.genus}")


def build_va_pair_domain(rep: SurfaceRepresentation) -> ConeSurfaceData:
    """Degenerate-octagon domain for a handle made of two half-turns.

    The base point sits on the translation axis of [a1, b1] between the two
    half-turn centres, so the four handle sides lie along that axis and the
    complement contributes a pentagon with angle sum pi.
    """
    _require_genus_two(rep)
    check_identity_curves(rep)
    a1, b1 = rep.handle(1)
    if not is_virtually_abelian(a1, b1):
        raise NotVAPair("handle 1 is not a virtually abelian pair")
    if _complement_commutator_residual(rep) > TOL_PAIR:
        raise CommutatorMismatch("[a2, b2] is not aligned with [a1, b1]^-1")
    ca, cb = classify(a1), classify(b1)
    if not (isinstance(ca, Elliptic) and isinstance(cb, Elliptic)):
        raise NotVAPair("the VA domain expects a1 and b1 to be the half-turns")
    axis = classify(commutator(a1, b1)).axis
    s1, _ = axis.fermi(ca.center)
    s2, _ = axis.fermi(cb.center)
    p = axis.point_at((s1 + s2) / 2, 0.0)
    return assemble(rep, p, expected_orders=[1.0])


# -- collar assembly -----------------------------------------------------------------------


def track_conjugator(moves: Sequence[Move], pair: tuple[Isometry, Isometry]) -> Isometry:
    """K with [g', h'] = K [g, h] K^-1 after orientation-preserving moves."""
    k = IDENTITY
    g, h = pair
    for mv in moves:
        if mv is Move.TWIST_A:
            k = g @ k
        elif mv is Move.TWIST_A_INV:
            k = g.inverse() @ k
        elif mv not in (Move.TWIST_B, Move.TWIST_B_INV):
            raise ValueError(f"{mv} reverses orientation")
        g, h = apply_move_matrices(mv, (g, h))
    return k


def complement_angle(rep: SurfaceRepresentation, p: PointH2) -> float:
    """Angle sum of the complement part (vertices 4..8) of the relator polygon at p."""
    (a1, b1), (a2, b2) = rep.handle(1), rep.handle(2)
    c = commutator(a1, b1)
    maps = (c, c @ a2, c @ a2 @ b2, c @ a2 @ b2 @ a2.inverse(), IDENTITY)
    z = np.array([m(p.z) for m in maps])
    ok, orientation, _ = polygon_report(z)
    if not ok[0]:
        return math.nan
    return float(interior_angles(z, int(orientation[0])).sum())


@dataclass(frozen=True)
class CollarSolution:
    data: ConeSurfaceData
    moves: tuple[Move, ...]
    delta: float
    theta_handle: float
    theta_complement: float
    residual: float
    representation: SurfaceRepresentation


def _bisect(f, lo, hi, tol=1e-10):
    flo = f(lo)
    for _ in range(200):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_collar(rep: SurfaceRepresentation, s: float, side: int, theta_handle: float):
    """delta in the collar of [a1, b1] at which the complement angle is 4 pi - theta_handle."""
    a1, b1 = rep.handle(1)
    cls = classify(commutator(a1, b1))
    axis = cls.axis
    w = collar(commutator_trace(a1, b1)).w
    lo, hi = 1e-6, w - 1e-6

    def theta1(delta):
        return complement_angle(rep, axis.point_at(s, side * delta))

    probe = np.array([theta1(d) for d in np.linspace(lo, hi, 17)])
    if np.isnan(probe).any():
        raise RootNotBracketed("complement polygon degenerates inside the collar",
                               (float(np.nanmin(probe)), float(np.nanmax(probe))))
    steps = np.diff(probe)
    if not ((steps > 0).all() or (steps < 0).all()):
        raise RootNotBracketed("complement angle is not monotone over the collar",
                               (float(probe.min()), float(probe.max())))
    target = 4 * math.pi - theta_handle
    if not probe.min() <= target <= probe.max():
        raise RootNotBracketed(
            f"complement angles [{probe.min():.9f}, {probe.max():.9f}] miss {target:.9f}",
            (float(probe.min()), float(probe.max())))
    delta = _bisect(lambda d: theta1(d) - target, lo, hi)
    return delta, theta1(delta), axis



def _centering(p: PointH2) -> Isometry:
    """Isometry taking p to i."""
    root = math.sqrt(p.y)
    return Isometry(1 / root, -p.x / root, 0.0, root)


def _diameter_midpoint(vertices: Sequence[PointH2]) -> PointH2:
    u, v = max(((u, v) for i, u in enumerate(vertices) for v in vertices[i + 1:]),
               key=lambda uv: distance(*uv))
    line = Geodesic.through(u, v)
    return line.point_at(0.5 * (line.fermi(u)[0] + line.fermi(v)[0]), 0.0)


def _collar_pass(frame: Isometry, g: Isometry, h: Isometry, k: Isometry,
                 complement: tuple[Isometry, Isometry], z: complex, corner: float):
    """Conjugate the moved marking by frame and solve the collar depth near z."""
    m, finv = frame @ k, frame.inverse()
    minv = m.inverse()
    a2, b2 = complement
    moved = SurfaceRepresentation.from_generators(
        [frame @ g @ finv, frame @ h @ finv, m @ a2 @ minv, m @ b2 @ minv])
    axis = classify(commutator(*moved.handle(1))).axis
    s, r = axis.fermi(PointH2.from_complex(z))
    side = 1 if r > 0 else -1
    delta, theta1, _ = solve_collar(moved, s, side, corner)
    return moved, delta, theta1, axis.point_at(s, side * delta)


ORIENTATION_PRESERVING = (Move.TWIST_A, Move.TWIST_A_INV, Move.TWIST_B, Move.TWIST_B_INV)


def build_collar_assembly(rep: SurfaceRepresentation, depth: int = 6, grid: int = 64,
                          seed: int = 0) -> CollarSolution:
    """Glue a handle pentagon to a truncated complement along a collar loop.

    Witnesses come from the goodness search over orientation-preserving handle
    moves; the complement is conjugated along so the relator still holds.  For
    each witness the collar depth delta is solved so the corner angles add to
    4 pi, and the octagon rebuilt there is validated as cone-surface data.
    """
    _require_genus_two(rep)
    check_identity_curves(rep)
    split = split_handle(rep, 1)
    if split.handle_rel_euler != 0 or abs(split.complement_rel_euler) != 1:
        raise WrongRegime(f"needs relative Euler numbers 0 and +-1, got "
                          f"{split.handle_rel_euler} and {split.complement_rel_euler}")
    a1, b1 = rep.handle(1)
    a2, b2 = rep.handle(2)
    t = commutator_trace(a1, b1)
    if not t > 2:
        raise WrongRegime(f"handle commutator trace {t!r} is not above 2")
    w = collar(t).w
    failures = []
    for wit in iter_witnesses(a1, b1, w, depth, grid, seed, ORIENTATION_PRESERVING):
        g, h = wit.pair
        k = track_conjugator(wit.moves, (a1, b1))
        base = PointH2.from_complex((g @ h)(wit.point.z))
        try:
            # first pass in a frame centered at the base point, second pass
            # recentered on the developed polygon so no vertex sits near the boundary
            frame = _centering(base)
            moved, delta, theta1, q = _collar_pass(frame, g, h, k, (a2, b2), frame(base.z),
                                                    wit.corner_angle)
            vertices, _ = develop_relator_polygon(moved, q)
            shift = _centering(_diameter_midpoint(vertices))
            moved, delta, theta1, q = _collar_pass(shift @ frame, g, h, k, (a2, b2),
                                                    shift(q.z), wit.corner_angle)
            data = assemble(moved, q, expected_orders=[1.0])
        except (RootNotBracketed, InvalidDomain, RelatorNotSatisfied) as exc:
            failures.append(str(exc))
            continue
        residual = abs(theta1 + wit.corner_angle - 4 * math.pi)
        return CollarSolution(data, wit.moves, delta, wit.corner_angle, theta1, residual, moved)
    detail = f"; last failure: {failures[-1]}" if failures else ""
    raise NoWitness(f"no usable w(t)-good witness within depth {depth}, grid {grid}{detail}")


# -- moving the cone point ------------------------------------------------------------------


def rebase_cone_point(data: ConeSurfaceData, new_point: PointH2) -> ConeSurfaceData:
    """Same holonomy and pairing pattern, polygon re-developed from new_point."""
    if len(data.cone_points) != 1:
        raise WrongRegime("rebasing needs exactly one cone point")
    try:
        new = assemble(data.holonomy, new_point)
    except InvalidDomain as exc:
        raise OutOfDisc(f"new base point leaves the embedded disc: {exc}") from exc
    if len(new.cone_points) != 1 or abs(new.cone_points[0].angle - data.cone_points[0].angle) > TOL_ANG:
        raise OutOfDisc("cone angle changed")
    return new


# -- dispatch ----------------------------------------------------------------------------


def swap_handles(rep: SurfaceRepresentation) -> SurfaceRepresentation:
    """(a2, b2, a1, b1): the relator is a cyclic rotation of the original one."""
    _require_genus_two(rep)
    return SurfaceRepresentation.from_generators(rep.generators[2:] + rep.generators[:2])


def geometrize(rep: SurfaceRepresentation, depth: int = 6, grid: int = 64,
               seed: int = 0) -> ConeSurfaceData:
    """Route a genus-2 representation with Euler number +-1 to a domain builder.

    Each handle ordering is tried in turn: a virtually abelian handle goes to
    the degenerate octagon, a parabolic a1 is first moved off its shared fixed
    point, and everything else goes through the collar assembly.
    """
    _require_genus_two(rep)
    e = euler_number_closed(rep)
    if abs(e) != 1:
        raise WrongRegime(f"Euler number {e} is not +-1")
    check_identity_curves(rep)
    errors: list[HolonomyError] = []
    for candidate in (rep, swap_handles(rep)):
        a1, b1 = candidate.handle(1)
        try:
            if is_virtually_abelian(a1, b1):
                return build_va_pair_domain(candidate)
            if isinstance(classify(a1), Parabolic):
                candidate = fix_parabolic_basis(candidate)
            return build_collar_assembly(candidate, depth, grid, seed).data
        except HolonomyError as exc:
            errors.append(exc)
    budget = [exc for exc in errors if isinstance(exc, BudgetExhausted)]
    raise (budget or errors)[-1]
