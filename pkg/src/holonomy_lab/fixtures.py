"""Reference genus-2 representations used by the tests and the CLI.

Each builder returns a SurfaceRepresentation whose Euler number is fixed by
construction: the octagon group gives -2, the others -1.
"""

from __future__ import annotations

import math

import numpy as np

from .char_torus import Character, align_commutator, realize
from .errors import NotConjugate
from .hyp_core import (
    IDENTITY,
    Geodesic,
    Isometry,
    PointH2,
    commutator,
    commutator_trace,
    half_turn,
    normalize,
)
from .lifts import SurfaceRepresentation, euler_number_closed


def mirror(g: Isometry) -> Isometry:
    """Conjugate by the reflection z -> -conj(z)."""
    return normalize([[g.a, -g.b], [-g.c, g.d]])


def mirror_rep(rep: SurfaceRepresentation) -> SurfaceRepresentation:
    return SurfaceRepresentation.from_generators([mirror(g) for g in rep.generators])


def _orient_euler(rep: SurfaceRepresentation, target: int) -> SurfaceRepresentation:
    e = euler_number_closed(rep)
    if e == target:
        return rep
    if e == -target:
        return mirror_rep(rep)
    raise ValueError(f"Euler number {e} cannot be oriented to {target}")


def trivial_rep(genus: int = 2) -> SurfaceRepresentation:
    return SurfaceRepresentation.from_generators([IDENTITY] * (2 * genus))


# -- octagon group ---------------------------------------------------------------


def _frame(p: PointH2, q: PointH2) -> Isometry:
    """Isometry taking i to p and the upward imaginary axis towards q."""
    k = Geodesic.through(p, q).to_standard()
    y = k(p.z).imag
    s = 1 / math.sqrt(y)
    return (Isometry(s, 0.0, 0.0, 1 / s) @ k).inverse()


def segment_map(p: PointH2, q: PointH2, p2: PointH2, q2: PointH2) -> Isometry:
    """The orientation-preserving isometry with p -> p2 and q -> q2 (equal lengths)."""
    return _frame(p2, q2) @ _frame(p, q).inverse()


def regular_octagon_rep() -> SurfaceRepresentation:
    """Side pairings of the regular octagon with angles pi/4, relator pattern."""
    from .geometrize import Pairing, holonomy_from_pairings, relator_word

    n = 8
    cosh_r = (1 / math.tan(math.pi / n)) ** 2  # cot(pi/n) cot(alpha/2) with alpha = pi/4
    rho = math.tanh(math.acosh(cosh_r) / 2)
    # clockwise vertices make the Euler number -2 under the ccw boundary convention
    verts = [PointH2.from_disk(rho * np.exp(-1j * (2 * math.pi * k / n + math.pi / n))) for k in range(n)]
    word = relator_word(2)
    first = {}
    pairings = []
    for pos, x in enumerate(word):
        if -x in first:
            i = first.pop(-x)
            iso = segment_map(verts[i], verts[(i + 1) % n], verts[(pos + 1) % n], verts[pos])
            pairings.append(Pairing(i, pos, iso))
        else:
            first[x] = pos
    rep = holonomy_from_pairings(pairings, 2)
    return _orient_euler(rep, -2)


# -- complements ---------------------------------------------------------------------


def fuchsian_complement(boundary: Isometry, t: float) -> tuple[Isometry, Isometry]:
    """A one-holed-torus pair with [a2, b2] = boundary^-1 and SL2 commutator trace -t.

    Uses the symmetric character (s, s, s) with s^3 - 3 s^2 + 2 - t = 0, s > 2.
    """
    roots = np.roots([1.0, -3.0, 0.0, 2.0 - t])
    s = float(max(r.real for r in roots if abs(r.imag) < 1e-9))
    a2, b2 = realize(Character.of(s, s, s))
    return align_commutator(a2, b2, boundary.inverse())


def _with_complement(a1: Isometry, b1: Isometry, target: int = -1) -> SurfaceRepresentation:
    c = commutator(a1, b1)
    a2, b2 = fuchsian_complement(c, commutator_trace(a1, b1))
    return _orient_euler(SurfaceRepresentation.from_generators([a1, b1, a2, b2]), target)


def va_genus2_rep() -> SurfaceRepresentation:
    """Handle of half-turns about i and e*i; complement Fuchsian."""
    return _with_complement(half_turn(PointH2(0.0, 1.0)), half_turn(PointH2(0.0, math.e)))


ELLIPTIC_HANDLE_CHARACTER = (1.0, 2.5, -1.5)


def elliptic_handle_rep() -> SurfaceRepresentation:
    """Handle with elliptic a1 and commutator trace above 2; complement Fuchsian."""
    a1, b1 = realize(Character.of(*ELLIPTIC_HANDLE_CHARACTER))
    return _with_complement(a1, b1)


def parabolic_handle_rep(lam: float = 2.5) -> SurfaceRepresentation:
    """a1 = z + 1 and b1 = z * lam^2 share the fixed point at infinity.

    [a1, b1] is the parabolic z -> z + 1 - lam^2; the complement is the cusped
    (3, 3, 3) torus aligned to its inverse, mirrored when the senses disagree.
    """
    a1 = Isometry(1.0, 1.0, 0.0, 1.0)
    b1 = Isometry(lam, 0.0, 0.0, 1 / lam)
    target = commutator(a1, b1).inverse()
    a2, b2 = realize(Character.of(3.0, 3.0, 3.0))
    try:
        a2, b2 = align_commutator(a2, b2, target)
    except NotConjugate:
        a2, b2 = align_commutator(mirror(a2), mirror(b2), target)
    return _orient_euler(SurfaceRepresentation.from_generators([a1, b1, a2, b2]), -1)
