"""Trace coordinates on the character variety of the punctured torus.

A pair (g, h) is recorded by (x, y, z) = (Tr g, Tr h, Tr gh) for SL2 lifts.
Changing lifts flips the signs of two coordinates at a time, so characters
are compared through the lexicographically greatest sign representative.
Basis changes act on pairs; each has a polynomial action on the traces.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConjugate, NotRealizable, ReducibleAmbiguity, WrongRegime
from .hyp_core import (
    TOL_CLASS,
    Elliptic,
    Hyperbolic,
    Identity,
    Isometry,
    _from_sl2,
    _lift_point,
    classify,
    commutator,
    distance,
    distance_to_geodesic,
    psl_distance,
    sl2_inverse,
    sl2_product,
)

TOL_KAPPA = 1e-9
TOL_TIE = 1e-9
DEFAULT_BUDGET = 10_000


def kappa_of(x: float, y: float, z: float) -> float:
    return x * x + y * y + z * z - x * y * z - 2


_SIGN_PATTERNS = ((1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1))


def _lex_greater(p, q) -> bool:
    for a, b in zip(p, q):
        if a > b + TOL_TIE:
            return True
        if a < b - TOL_TIE:
            return False
    return False


@dataclass(frozen=True, slots=True)
class Character:
    x: float
    y: float
    z: float
    kappa: float = field(compare=False)

    @classmethod
    def of(cls, x: float, y: float, z: float) -> Character:
        """Canonical character of the sign class of (x, y, z)."""
        best = (x, y, z)
        for sx, sy, sz in _SIGN_PATTERNS[1:]:
            cand = (sx * x, sy * y, sz * z)
            if _lex_greater(cand, best):
                best = cand
        # Zero entries keep a positive zero so the output stays tidy.
        best = tuple(v + 0.0 for v in best)
        return cls(*best, kappa_of(*best))

    @property
    def coords(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def distance(self, other: Character) -> float:
        """Coordinate distance between sign classes."""
        return min(max(abs(s * a - b) for s, a, b in zip(signs, self.coords, other.coords))
                   for signs in _SIGN_PATTERNS)

    def is_close(self, other: Character, tol: float = 1e-8) -> bool:
        return self.distance(other) < tol

    def __str__(self):
        return f"({self.x:.12g}, {self.y:.12g}, {self.z:.12g}) kappa={self.kappa:.12g}"


def character_of(g: Isometry, h: Isometry) -> Character:
    gh = sl2_product(g, h)
    return Character.of(g.trace, h.trace, gh[0] + gh[3])


def traces_of(g, h) -> tuple[float, float, float]:
    """Raw (Tr g, Tr h, Tr gh) for matrix-level lifts, without sign folding."""
    gh = sl2_product(g, h)
    return (g[0] + g[3], h[0] + h[3], gh[0] + gh[3])


# -- realization -------------------------------------------------------------


def is_realizable(c: Character) -> bool:
    return c.kappa >= 2 - TOL_KAPPA or max(abs(v) for v in c.coords) > 2


def _realize_sl2(x: float, y: float, z: float):
    """SL2 matrices A, B with Tr A = x, Tr B = y, Tr AB = z.

    The normal form of AB is ill conditioned when |z| is close to 2, so the
    triple is first moved to put its coordinate farthest from +-2 last.
    """
    options = [(z, None), (y, Move.TWIST_A), (x, Move.TWIST_B)]
    _, back = max(options, key=lambda o: (min(abs(abs(o[0]) - 2), 1e-3), o[1] is None))
    if back is None:
        return _realize_normal_form(x, y, z)
    a, b = _realize_normal_form(*move_traces(back.inverse, x, y, z))
    return move_sl2(back, a, b)


def _realize_normal_form(x: float, y: float, z: float):
    """Solve with AB in normal form by the class of z."""
    # Put C = AB in normal form, solve the two linear conditions on A, then
    # choose the free off-diagonal entry to satisfy det A = 1.
    if abs(abs(z) - 2) <= TOL_CLASS:
        s = 1.0 if z > 0 else -1.0
        cmat = (s, s, 0.0, s)
        lower = x - s * y
        a = d = x / 2
        upper = (a * d - 1) / lower if lower != 0 else 0.0
        amat = (a, upper, lower, d)
        if lower == 0 and abs(x) >= 2:
            r = (x + math.copysign(math.sqrt(x * x - 4), x)) / 2
            amat = (r, 0.0, 0.0, 1 / r)
        elif lower == 0:
            # reducible with elliptic A: take AB = +-I
            t = math.acos(x / 2)
            amat = (math.cos(t), math.sin(t), -math.sin(t), math.cos(t))
            cmat = (s, 0.0, 0.0, s)
    elif abs(z) > 2:
        lam = (z + math.copysign(math.sqrt(z * z - 4), z)) / 2
        cmat = (lam, 0.0, 0.0, 1 / lam)
        a = (y - x * lam) / (1 / lam - lam)
        d = x - a
        bc = a * d - 1
        upper = math.sqrt(abs(bc)) or 1.0
        amat = (a, upper, bc / upper, d)
    else:
        t = math.acos(z / 2)
        ct, st = math.cos(t), math.sin(t)
        cmat = (ct, st, -st, ct)
        delta = (y - x * ct) / st
        rhs = (x * x + delta * delta) / 4 - 1
        if rhs < -1e-12:
            raise NotRealizable(f"no real solution for ({x}, {y}, {z})")
        u = math.sqrt(max(rhs, 0.0))
        amat = (x / 2 + u, delta / 2, -delta / 2, x / 2 - u)
    bmat = sl2_product(sl2_inverse(amat), cmat)
    return amat, bmat


def realize(c: Character) -> tuple[Isometry, Isometry]:
    """A pair (g, h) whose character is c.

    Raises ReducibleAmbiguity (carrying a representative pair) when
    kappa = 2, where the character does not pin down a conjugacy class.
    """
    if not is_realizable(c):
        raise NotRealizable(f"character {c} is not realized in SL2(R)")
    a, b = _realize_sl2(*c.coords)
    pair = (_from_sl2(a), _from_sl2(b))
    if abs(c.kappa - 2) <= TOL_KAPPA:
        raise ReducibleAmbiguity(f"kappa = 2 for {c}: reducible, not unique", pair)
    return pair


# -- commutator alignment ----------------------------------------------------


def _normalizer(g: Isometry) -> tuple[str, Isometry, float]:
    """(class tag, k, parameter) with k g k^-1 in normal form."""
    cls = classify(g)
    if isinstance(cls, Identity):
        return "Identity", Isometry.identity(), 0.0
    if isinstance(cls, Elliptic):
        return "Elliptic", _lift_point(cls.center).inverse(), cls.angle
    if isinstance(cls, Hyperbolic):
        return "Hyperbolic", cls.axis.to_standard(), cls.length
    # parabolic: move the fixed point to infinity, then scale to z -> z +- 1
    x = cls.fixed
    if math.isinf(x):
        k = Isometry.identity()
    elif abs(x) <= 1:
        k = Isometry(0.0, -1.0, 1.0, -x)
    else:
        k = Isometry(1.0, 0.0, -1.0 / x, 1.0)
    a, b, _, _ = (k @ g @ k.inverse()).entries
    shift = b / a if abs(a) > 0 else b
    r = math.sqrt(abs(shift))
    return "Parabolic", Isometry(1 / r, 0.0, 0.0, r) @ k, float(cls.sense)


def conjugator(source: Isometry, target: Isometry, tol: float = 1e-8) -> Isometry:
    """k with k source k^-1 = target."""
    tag_s, ks, par_s = _normalizer(source)
    tag_t, kt, par_t = _normalizer(target)
    if tag_s != tag_t or abs(par_s - par_t) > tol:
        raise NotConjugate(f"{tag_s}({par_s:.12g}) is not conjugate to {tag_t}({par_t:.12g})")
    k = kt.inverse() @ ks
    if psl_distance(k @ source @ k.inverse(), target) > tol * max(1.0, max(map(abs, target.entries))):
        raise NotConjugate("conjugation residual above tolerance")
    return k


def align_commutator(g: Isometry, h: Isometry, target: Isometry,
                     tol: float = 1e-8) -> tuple[Isometry, Isometry]:
    k = conjugator(commutator(g, h), target, tol)
    kinv = k.inverse()
    return k @ g @ kinv, k @ h @ kinv


# -- virtually abelian pairs -------------------------------------------------


def _half_turn_center(g: Isometry, tol: float = 1e-8):
    cls = classify(g)
    if isinstance(cls, Elliptic) and abs(cls.angle - math.pi) < tol:
        return cls.center
    return None


def is_virtually_abelian_geometric(g: Isometry, h: Isometry) -> bool:
    """Two of g, h, gh are half-turns about distinct points; the third
    translates along the geodesic through them."""
    triple = (g, h, g @ h)
    for i in range(3):
        p = _half_turn_center(triple[(i + 1) % 3])
        q = _half_turn_center(triple[(i + 2) % 3])
        if p is None or q is None or distance(p, q) < 1e-8:
            continue
        cls = classify(triple[i])
        if not isinstance(cls, Hyperbolic):
            continue
        if max(distance_to_geodesic(p, cls.axis), distance_to_geodesic(q, cls.axis)) < 1e-6:
            return True
    return False


def in_va_set(c: Character, tol: float = 1e-8) -> bool:
    coords = sorted(c.coords, key=abs)
    return abs(coords[0]) < tol and abs(coords[1]) < tol and abs(coords[2]) > 2 + TOL_CLASS


def is_virtually_abelian(g: Isometry, h: Isometry) -> bool:
    geometric = is_virtually_abelian_geometric(g, h)
    algebraic = in_va_set(character_of(g, h))
    if geometric != algebraic:
        raise AssertionError(f"geometric ({geometric}) and trace ({algebraic}) tests disagree")
    return geometric


# -- basis changes -------------------------------------------------------------


class Move(enum.Enum):
    """Basis changes of the free group on (a, b).

    TWIST_A: (a, b) -> (a, ab);  TWIST_B: (a, b) -> (ab, b);
    SWAP_INVERT: (a, b) -> (b^-1, a^-1);  INVERT_B: (a, b) -> (a, b^-1).
    The last two reverse orientation.
    """

    TWIST_A = "TwistA"
    TWIST_A_INV = "TwistA^-1"
    TWIST_B = "TwistB"
    TWIST_B_INV = "TwistB^-1"
    SWAP_INVERT = "SwapInvert"
    INVERT_B = "InvertB"

    @property
    def inverse(self) -> Move:
        return _INVERSES[self]

    @property
    def orientation(self) -> int:
        return -1 if self in (Move.SWAP_INVERT, Move.INVERT_B) else 1

    def __str__(self):
        return self.value


_INVERSES = {
    Move.TWIST_A: Move.TWIST_A_INV,
    Move.TWIST_A_INV: Move.TWIST_A,
    Move.TWIST_B: Move.TWIST_B_INV,
    Move.TWIST_B_INV: Move.TWIST_B,
    Move.SWAP_INVERT: Move.SWAP_INVERT,
    Move.INVERT_B: Move.INVERT_B,
}

DESCENT_ORDER = (Move.TWIST_A, Move.TWIST_A_INV, Move.TWIST_B, Move.TWIST_B_INV, Move.SWAP_INVERT)
ALL_MOVES = DESCENT_ORDER + (Move.INVERT_B,)


def move_traces(mv: Move, x: float, y: float, z: float) -> tuple[float, float, float]:
    """Polynomial action on raw trace triples."""
    if mv is Move.TWIST_A:
        return x, z, x * z - y
    if mv is Move.TWIST_A_INV:
        return x, x * y - z, y
    if mv is Move.TWIST_B:
        return z, y, y * z - x
    if mv is Move.TWIST_B_INV:
        return x * y - z, y, x
    if mv is Move.SWAP_INVERT:
        return y, x, z
    return x, y, x * y - z


def apply_move(mv: Move, c: Character) -> Character:
    return Character.of(*move_traces(mv, *c.coords))


def move_sl2(mv: Move, a, b):
    """Matrix-level action on SL2 4-tuples (no sign normalization)."""
    if mv is Move.TWIST_A:
        return a, sl2_product(a, b)
    if mv is Move.TWIST_A_INV:
        return a, sl2_product(sl2_inverse(a), b)
    if mv is Move.TWIST_B:
        return sl2_product(a, b), b
    if mv is Move.TWIST_B_INV:
        return sl2_product(a, sl2_inverse(b)), b
    if mv is Move.SWAP_INVERT:
        return sl2_inverse(b), sl2_inverse(a)
    return a, sl2_inverse(b)


def apply_move_matrices(mv: Move, pair: tuple[Isometry, Isometry]) -> tuple[Isometry, Isometry]:
    a, b = move_sl2(mv, pair[0].entries, pair[1].entries)
    return _from_sl2(a), _from_sl2(b)


def apply_moves_matrices(moves: Iterable[Move], pair):
    for mv in moves:
        pair = apply_move_matrices(mv, pair)
    return pair


def apply_moves(moves: Iterable[Move], c: Character) -> Character:
    x, y, z = c.coords
    for mv in moves:
        x, y, z = move_traces(mv, x, y, z)
    return Character.of(x, y, z)


# -- level sets ----------------------------------------------------------------


@dataclass(frozen=True)
class LevelSetVerdict:
    tag: str  # Pants, WithElliptics, Reducible or Unknown
    witness: tuple[Move, ...] | None = None
    steps: int = 0
    final: Character | None = None


def _height(coords) -> float:
    return max(abs(v) for v in coords)


def _in_octant_class(coords) -> bool:
    x, y, z = coords
    return min(abs(x), abs(y), abs(z)) >= 2 and x * y * z < 0


def classify_level_set(c: Character, budget: int = DEFAULT_BUDGET) -> LevelSetVerdict:
    """Greedy descent on max |coordinate| towards an elliptic or pants verdict."""
    if abs(c.kappa - 2) <= TOL_KAPPA:
        return LevelSetVerdict("Reducible", (), 0, c)
    if c.kappa < 2:
        raise WrongRegime(f"kappa = {c.kappa!r} is below 2")
    coords = c.coords
    path: list[Move] = []
    for step in range(budget + 1):
        if any(abs(v) < 2 for v in coords):
            return LevelSetVerdict("WithElliptics", tuple(path), step, Character.of(*coords))
        height = _height(coords)
        best = None
        for mv in DESCENT_ORDER:
            cand = move_traces(mv, *coords)
            if _height(cand) < height - 1e-12:
                best = (mv, cand)
                break
        if best is None:
            if _in_octant_class(coords):
                return LevelSetVerdict("Pants", tuple(path), step, Character.of(*coords))
            break
        if step == budget:
            break
        path.append(best[0])
        coords = best[1]
    return LevelSetVerdict("Unknown", tuple(path), len(path), Character.of(*coords))


def _project_to_level(coords, level):
    """Newton step on the largest coordinate to restore kappa = level."""
    x, y, z = coords
    i = int(np.argmax(np.abs(coords)))
    v = [x, y, z]
    for _ in range(3):
        f = kappa_of(*v) - level
        others = [v[j] for j in range(3) if j != i]
        df = 2 * v[i] - others[0] * others[1]
        if df == 0:
            break
        v[i] -= f / df
    return tuple(v)


def orbit_sample(c: Character, steps: int, seed: int, cap: float | None = None,
                 moves: Sequence[Move] = DESCENT_ORDER) -> list[Character]:
    """Seeded random walk over basis changes, staying on the kappa level set.

    The walk is lazy: moves that would push max |coordinate| above ``cap``
    (default: ten times the start, at least 50) are rejected, which keeps the
    walk in a bounded window where kappa is numerically well conditioned.
    """
    if not c.kappa > 2 - TOL_KAPPA:
        raise WrongRegime(f"kappa = {c.kappa!r} is not above 2")
    if cap is None:
        cap = max(50.0, 10 * _height(c.coords))
    rng = np.random.default_rng(seed)
    level = c.kappa
    coords = c.coords
    out = [c]
    for choice in rng.integers(len(moves), size=steps):
        cand = move_traces(moves[choice], *coords)
        if _height(cand) <= cap:
            coords = cand
            if abs(kappa_of(*coords) - level) > 1e-10:
                coords = _project_to_level(coords, level)
        out.append(Character.of(*coords))
    return out
