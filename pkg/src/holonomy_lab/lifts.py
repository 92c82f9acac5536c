"""The universal cover of PSL2(R) as lifts of boundary-circle maps.

A lift is a pair (base isometry, anchor) where the anchor is F(0) for an
increasing map F of the real line with F(x + 2pi) = F(x) + 2pi covering the
action of the base on the disk boundary.

F is evaluated in closed form.  Write the SL2 matrix of the base as
``Rot(beta) @ P`` with P symmetric positive definite.  On unit vectors
``v(phi)`` the argument of ``P v(phi)`` differs from ``phi`` by less than
pi/2, so ``phi + beta + eta(phi)`` is a continuous lift of the projective
action.  Boundary angle theta corresponds to the direction ``phi = -theta/2``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import (
    EllipticBoundary,
    EllipticHasNoSimplestLift,
    NotElliptic,
    RelatorNotSatisfied,
)
from .hyp_core import (
    CCW,
    IDENTITY,
    TOL_CLASS,
    Elliptic,
    Hyperbolic,
    Identity,
    Isometry,
    _lift_point,
    classify,
    commutator,
    commutator_sl2,
    ideal_angle,
    psl_distance,
    sl2_product,
)

TWO_PI = 2 * math.pi
TOL_REL = 1e-8
TOL_INTEGER = 1e-6


def _boundary_lift(g: Isometry, theta: float) -> float:
    """A fixed continuous lift of g's boundary map, determined by g's entries."""
    a, b, c, d = g.entries
    beta = math.atan2(c - b, a + d)
    cb, sb = math.cos(beta), math.sin(beta)
    # P = Rot(-beta) @ A
    p11, p12 = cb * a + sb * c, cb * b + sb * d
    p22 = -sb * b + cb * d
    phi = -theta / 2
    cp, sp = math.cos(phi), math.sin(phi)
    dot = p11 * cp * cp + 2 * p12 * cp * sp + p22 * sp * sp
    cross = p12 * (cp * cp - sp * sp) + (p22 - p11) * cp * sp
    return theta - 2 * beta - 2 * math.atan2(cross, dot)


def _snap(g: Isometry, approx_anchor: float) -> tuple[float, int]:
    """Anchor of the lift of g nearest to ``approx_anchor`` and its index."""
    base0 = _boundary_lift(g, 0.0)
    n = round((approx_anchor - base0) / TWO_PI)
    return base0 + TWO_PI * n, n


@dataclass(frozen=True, slots=True)
class LiftedIsometry:
    base: Isometry
    anchor: float

    @classmethod
    def from_base(cls, g: Isometry, n: int = 0) -> LiftedIsometry:
        """The lift ``n`` steps of 2pi above the closed-form reference lift."""
        return cls(g, _boundary_lift(g, 0.0) + TWO_PI * n)

    def __call__(self, theta: float) -> float:
        g = self.base
        return _boundary_lift(g, theta) - _boundary_lift(g, 0.0) + self.anchor

    @property
    def sheet(self) -> int:
        """Offset from the reference lift; its parity is the SL2 sign."""
        return _snap(self.base, self.anchor)[1]


def center_power(n: int) -> LiftedIsometry:
    return LiftedIsometry(IDENTITY, TWO_PI * n)


def compose(u: LiftedIsometry, v: LiftedIsometry) -> LiftedIsometry:
    base = u.base @ v.base
    return LiftedIsometry(base, _snap(base, u(v.anchor))[0])


def compose_all(lifts: Sequence[LiftedIsometry]) -> LiftedIsometry:
    out = center_power(0)
    for u in lifts:
        out = compose(out, u)
    return out


def invert(u: LiftedIsometry) -> LiftedIsometry:
    base = u.base.inverse()
    candidate = LiftedIsometry.from_base(base)
    shift = round(candidate(u.anchor) / TWO_PI)
    return LiftedIsometry(base, candidate.anchor - TWO_PI * shift)


def _fixed_angle(cls) -> float:
    if isinstance(cls, Hyperbolic):
        return ideal_angle(cls.axis.end)
    return ideal_angle(cls.fixed)


def lift_simplest(g: Isometry) -> LiftedIsometry:
    """The lift whose boundary map has fixed points (Hyp0, Par0 or Center(0))."""
    cls = classify(g)
    if isinstance(cls, Identity):
        return center_power(0)
    if isinstance(cls, Elliptic):
        raise EllipticHasNoSimplestLift("elliptic elements have no lift with fixed points")
    u = LiftedIsometry.from_base(g)
    theta = _fixed_angle(cls)
    shift = round((u(theta) - theta) / TWO_PI)
    return LiftedIsometry(g, u.anchor - TWO_PI * shift)


def translation_number(u: LiftedIsometry) -> float:
    """Rotation amount of an elliptic lift, read after moving its center to 0."""
    cls = classify(u.base)
    if not isinstance(cls, Elliptic):
        raise NotElliptic("translation numbers are computed for elliptic bases only")
    k = LiftedIsometry.from_base(_lift_point(cls.center).inverse())
    return compose(compose(k, u), invert(k)).anchor


def lift_elliptic(g: Isometry, sense: int) -> LiftedIsometry:
    """Ell(1) for ``sense == CCW``, Ell(-1) for ``sense == CW``."""
    if not isinstance(classify(g), Elliptic):
        raise NotElliptic("expected an elliptic isometry")
    u = LiftedIsometry.from_base(g)
    shift = math.floor(translation_number(u) / TWO_PI)
    if sense != CCW:
        shift += 1
    return LiftedIsometry(g, u.anchor - TWO_PI * shift)


@dataclass(frozen=True, slots=True)
class LiftClass:
    family: str  # Center, Hyp, ParPlus, ParMinus or Ell
    index: int

    def __str__(self):
        return f"{self.family}({self.index})"


def classify_lift(u: LiftedIsometry) -> LiftClass:
    cls = classify(u.base)
    if isinstance(cls, Identity):
        return LiftClass("Center", round(u.anchor / TWO_PI))
    if isinstance(cls, Elliptic):
        tau = translation_number(u)
        m = math.floor(tau / TWO_PI)
        return LiftClass("Ell", m + 1 if tau > 0 else m)
    theta = _fixed_angle(cls)
    m = round((u(theta) - theta) / TWO_PI)
    if isinstance(cls, Hyperbolic):
        return LiftClass("Hyp", m)
    x = theta + math.pi
    drift = u(x) - x - TWO_PI * m
    return LiftClass("ParPlus" if drift > 0 else "ParMinus", m)


def lifted_trace(u: LiftedIsometry) -> float:
    """Trace of the SL2 element under u."""
    sign = -1.0 if u.sheet % 2 else 1.0
    return sign * u.base.trace


def commutator_lift(g: Isometry, h: Isometry) -> LiftedIsometry:
    """The lift of [g, h] obtained from any lifts of g and h."""
    gt, ht = LiftedIsometry.from_base(g), LiftedIsometry.from_base(h)
    return compose_all((gt, ht, invert(gt), invert(ht)))


# -- closed surfaces -----------------------------------------------------------


def relator_sl2(generators: Sequence[Isometry]):
    """SL2 product of the commutators [a1, b1] ... [ag, bg]."""
    out = (1.0, 0.0, 0.0, 1.0)
    for a, b in zip(generators[::2], generators[1::2]):
        out = sl2_product(out, commutator_sl2(a, b))
    return out


def _relator_residual(generators) -> float:
    a, b, c, d = relator_sl2(generators)
    plus = max(abs(a - 1), abs(b), abs(c), abs(d - 1))
    minus = max(abs(a + 1), abs(b), abs(c), abs(d + 1))
    return min(plus, minus)


@dataclass(frozen=True)
class SurfaceRepresentation:
    """Images of a1, b1, ..., ag, bg satisfying the product-of-commutators relator."""

    genus: int
    generators: tuple[Isometry, ...]
    relator_residual: float

    @classmethod
    def from_generators(cls, generators: Sequence[Isometry], tol: float = TOL_REL):
        gens = tuple(generators)
        if len(gens) < 4 or len(gens) % 2:
            raise ValueError("need an even number (at least 4) of generators")
        residual = _relator_residual(gens)
        if not residual < tol:
            raise RelatorNotSatisfied(f"relator residual {residual:.3e} exceeds {tol:.0e}")
        return cls(len(gens) // 2, gens, residual)

    def handle(self, i: int) -> tuple[Isometry, Isometry]:
        """Generators of handle i, counted from 1."""
        return self.generators[2 * i - 2], self.generators[2 * i - 1]

    def conjugate(self, k: Isometry) -> SurfaceRepresentation:
        kinv = k.inverse()
        return SurfaceRepresentation.from_generators([k @ g @ kinv for g in self.generators])


def euler_number_closed(rep: SurfaceRepresentation) -> int:
    total = compose_all([commutator_lift(a, b) for a, b in
                         zip(rep.generators[::2], rep.generators[1::2])])
    if psl_distance(total.base, IDENTITY) > TOL_REL:
        raise RelatorNotSatisfied("lifted relator does not project to the identity")
    ratio = total.anchor / TWO_PI
    m = round(ratio)
    if abs(ratio - m) > TOL_INTEGER:
        raise RelatorNotSatisfied(f"lifted relator is {ratio!r} turns, not an integer")
    return m


def relative_euler_punctured_torus(g: Isometry, h: Isometry) -> int:
    """Trace rule: -1 when Tr[g,h] <= -2 and 0 when Tr[g,h] >= 2."""
    a, _, _, d = commutator_sl2(g, h)
    tr = a + d
    if abs(tr) < 2 - TOL_CLASS:
        raise EllipticBoundary(f"boundary trace {tr!r} is elliptic")
    return -1 if tr < 0 else 0


def relative_euler_lift(g: Isometry, h: Isometry) -> int:
    """Signed relative Euler number from the commutator lift.

    Trivializes the boundary by the simplest lift of [g, h]^-1; the sign
    depends on the orientation of the pair.
    """
    a, _, _, d = commutator_sl2(g, h)
    if abs(a + d) < 2 - TOL_CLASS:
        raise EllipticBoundary(f"boundary trace {a + d!r} is elliptic")
    u = compose(commutator_lift(g, h), lift_simplest(commutator(g, h).inverse()))
    # u covers the identity, so its anchor is a whole number of turns
    ratio = u.anchor / TWO_PI
    m = round(ratio)
    if abs(ratio - m) > TOL_INTEGER:
        raise RelatorNotSatisfied(f"boundary trivialization left {ratio!r} turns")
    return m
