"""Hyperbolic plane geometry in the upper half-plane model.

Isometries are PSL2(R) elements stored as a determinant-one matrix with a
canonical sign.  Ideal points are real floats, with ``math.inf`` for the
point at infinity.  The boundary circle of the Poincare disk is parametrized
counterclockwise by angle; the Cayley map sends infinity to angle 0 and
increasing real x to increasing angle.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDeterminant, NotHyperbolicTrace, SharedFixedPoint

TOL_DET = 1e-12
TOL_SIGN = 1e-9
TOL_CLASS = 1e-9

CCW = 1
CW = -1

INF = math.inf


def _canonical_sign(a: float, b: float, c: float, d: float) -> tuple[float, float, float, float]:
    tr = a + d
    if tr > TOL_SIGN:
        return a, b, c, d
    if tr < -TOL_SIGN:
        return -a, -b, -c, -d
    for entry in (a, b, c):
        if abs(entry) > TOL_SIGN:
            return (a, b, c, d) if entry > 0 else (-a, -b, -c, -d)
    return a, b, c, d


@dataclass(frozen=True, slots=True)
class Isometry:
    """A PSL2(R) element: ``z -> (a z + b) / (c z + d)`` with ``ad - bc = 1``.

    Build instances with :func:`normalize`; the constructor trusts its input.
    """

    a: float
    b: float
    c: float
    d: float

    @staticmethod
    def identity() -> Isometry:
        return IDENTITY

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: Isometry) -> Isometry:
        return _from_sl2(_mul(self.entries, other.entries))

    def inverse(self) -> Isometry:
        return _from_sl2((self.d, -self.b, -self.c, self.a))

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def is_identity(self, tol: float = TOL_CLASS) -> bool:
        return psl_distance(self, IDENTITY) < tol


IDENTITY = Isometry(1.0, 0.0, 0.0, 1.0)

Matrix = Isometry | np.ndarray | Iterable[Iterable[float]]


def _mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _from_sl2(m) -> Isometry:
    return Isometry(*_canonical_sign(*m))


def sl2_entries(m: Matrix) -> tuple[float, float, float, float]:
    """Flatten a matrix-like value (or a flat 4-tuple) to ``(a, b, c, d)``."""
    if isinstance(m, Isometry):
        return m.entries
    if isinstance(m, tuple) and len(m) == 4:
        return m
    arr = np.asarray(m, dtype=float)
    if arr.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {arr.shape}")
    return (float(arr[0, 0]), float(arr[0, 1]), float(arr[1, 0]), float(arr[1, 1]))


def sl2_product(*ms: Matrix) -> tuple[float, float, float, float]:
    out = (1.0, 0.0, 0.0, 1.0)
    for m in ms:
        out = _mul(out, sl2_entries(m))
    return out


def sl2_inverse(m: Matrix) -> tuple[float, float, float, float]:
    a, b, c, d = sl2_entries(m)
    return (d, -b, -c, a)


def normalize(raw: Matrix) -> Isometry:
    """Scale to determinant one and pick the canonical sign."""
    a, b, c, d = sl2_entries(raw)
    det = a * d - b * c
    if not det > TOL_DET:
        raise NonPositiveDeterminant(f"determinant {det!r} is not positive")
    s = math.sqrt(det)
    return _from_sl2((a / s, b / s, c / s, d / s))


def psl_distance(g: Isometry, h: Isometry) -> float:
    """Largest entry difference, minimized over the sign ambiguity."""
    plus = max(abs(x - y) for x, y in zip(g.entries, h.entries))
    minus = max(abs(x + y) for x, y in zip(g.entries, h.entries))
    return min(plus, minus)


# -- points ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PointH2:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"point {self.x!r} + {self.y!r}i is not in the upper half-plane")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> PointH2:
        return cls(z.real, z.imag)

    def to_disk(self) -> complex:
        z = self.z
        return (z - 1j) / (z + 1j)

    @classmethod
    def from_disk(cls, w: complex) -> PointH2:
        return cls.from_complex(1j * (1 + w) / (1 - w))

    def to_klein(self) -> tuple[float, float]:
        w = self.to_disk()
        k = 2 * w / (1 + abs(w) ** 2)
        return (k.real, k.imag)

    @classmethod
    def from_klein(cls, kx: float, ky: float) -> PointH2:
        k = complex(kx, ky)
        r2 = abs(k) ** 2
        return cls.from_disk(k / (1 + math.sqrt(max(0.0, 1 - r2))))


I = PointH2(0.0, 1.0)


def disk_to_klein(w):
    """Poincare disk to Klein model; works elementwise on numpy arrays."""
    return 2 * w / (1 + np.abs(w) ** 2)


def uhp_to_disk(z):
    return (z - 1j) / (z + 1j)


def ideal_angle(x: float) -> float:
    """Disk-boundary angle in [0, 2pi) of a real or infinite ideal point."""
    if math.isinf(x):
        return 0.0
    return (-2.0 * math.atan2(1.0, x)) % (2 * math.pi)


def angle_to_ideal(theta: float) -> float:
    half = (theta % (2 * math.pi)) / 2
    s = math.sin(half)
    if s == 0.0:
        return INF
    return -math.cos(half) / s


def apply(g: Isometry, p: PointH2) -> PointH2:
    return PointH2.from_complex(g(p.z))


def apply_ideal(g: Isometry, x: float) -> float:
    a, b, c, d = g.entries
    if math.isinf(x):
        return INF if c == 0 else a / c
    den = c * x + d
    if den == 0:
        return INF
    return (a * x + b) / den


def distance(p: PointH2, q: PointH2) -> float:
    return 2.0 * math.asinh(abs(p.z - q.z) / (2.0 * math.sqrt(p.y * q.y)))


# -- geodesics ---------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Geodesic:
    """Oriented complete geodesic from ``start`` to ``end`` (ideal points)."""

    start: float
    end: float

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("geodesic endpoints must be distinct")

    @classmethod
    def through(cls, p: PointH2, q: PointH2) -> Geodesic:
        """The geodesic through p and q, oriented from p towards q."""
        if abs(p.x - q.x) <= 1e-15 * max(1.0, abs(p.x)):
            return cls(p.x, INF) if q.y > p.y else cls(INF, p.x)
        center = (abs(q.z) ** 2 - abs(p.z) ** 2) / (2 * (q.x - p.x))
        radius = abs(p.z - center)
        lo, hi = center - radius, center + radius
        return cls(lo, hi) if q.x > p.x else cls(hi, lo)

    def reversed(self) -> Geodesic:
        return Geodesic(self.end, self.start)

    def disk_angles(self) -> tuple[float, float]:
        return ideal_angle(self.start), ideal_angle(self.end)

    def klein_endpoints(self) -> tuple[tuple[float, float], tuple[float, float]]:
        t0, t1 = self.disk_angles()
        return (math.cos(t0), math.sin(t0)), (math.cos(t1), math.sin(t1))

    def to_standard(self) -> Isometry:
        """An isometry carrying this geodesic to the imaginary axis, start to 0."""
        return _standardizer(self.start, self.end).inverse()

    def point_at(self, s: float, r: float = 0.0) -> PointH2:
        """Fermi coordinates: arclength s from the foot of i, signed distance r.

        Positive r is to the left of the direction of travel.
        """
        w = math.exp(s) * complex(-math.tanh(r), 1.0 / math.cosh(r))
        return PointH2.from_complex(_standardizer(self.start, self.end)(w))

    def fermi(self, p: PointH2) -> tuple[float, float]:
        """Inverse of :meth:`point_at`."""
        w = self.to_standard()(p.z)
        return math.log(abs(w)), -math.asinh(w.real / w.imag)


IMAGINARY_AXIS = Geodesic(0.0, INF)


def _raw_standardizer(start: float, end: float) -> Isometry:
    if math.isinf(end):
        return Isometry(1.0, start, 0.0, 1.0)
    if math.isinf(start):
        return normalize(((end, -1.0), (1.0, 0.0)))
    if end > start:
        return normalize(((end, start), (1.0, 1.0)))
    return normalize(((end, -start), (1.0, -1.0)))


_FLIP = Isometry(0.0, -1.0, 1.0, 0.0)  # z -> -1/z


def _flip_ideal(x: float) -> float:
    if math.isinf(x):
        return 0.0
    return INF if x == 0 else -1.0 / x


def _size(x: float) -> float:
    return INF if math.isinf(x) else abs(x)


def _standardizer(start: float, end: float) -> Isometry:
    """Isometry taking 0 to ``start``, infinity to ``end`` and i to the foot
    of the perpendicular from i."""
    fs, fe = _flip_ideal(start), _flip_ideal(end)
    if max(_size(fs), _size(fe)) < max(_size(start), _size(end)):
        k = _FLIP.inverse() @ _raw_standardizer(fs, fe)
    else:
        k = _raw_standardizer(start, end)
    r = abs(k.inverse()(1j))
    s = math.sqrt(r)
    return k @ Isometry(s, 0.0, 0.0, 1 / s)


def distance_to_geodesic(p: PointH2, gamma: Geodesic) -> float:
    w = gamma.to_standard()(p.z)
    return math.asinh(abs(w.real) / w.imag)


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def geodesics_cross(g1: Geodesic, g2: Geodesic) -> bool:
    """Whether two geodesics meet in the interior (chord test, Klein model)."""
    p1, p2 = g1.klein_endpoints()
    q1, q2 = g2.klein_endpoints()
    return (_orient(p1, p2, q1) * _orient(p1, p2, q2) < 0
            and _orient(q1, q2, p1) * _orient(q1, q2, p2) < 0)


# -- classification ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Identity:
    tag = "Identity"


@dataclass(frozen=True, slots=True)
class Elliptic:
    angle: float
    center: PointH2
    tag = "Elliptic"


@dataclass(frozen=True, slots=True)
class Parabolic:
    fixed: float
    sense: int
    margin: float
    tag = "Parabolic"


@dataclass(frozen=True, slots=True)
class Hyperbolic:
    length: float
    axis: Geodesic
    tag = "Hyperbolic"


IsometryClass = Identity | Elliptic | Parabolic | Hyperbolic


def _eigenline(a, b, c, d, mu) -> float:
    # Two candidate kernel vectors of (M - mu); keep the better conditioned one.
    u1, v1 = b, mu - a
    u2, v2 = mu - d, c
    u, v = (u1, v1) if u1 * u1 + v1 * v1 >= u2 * u2 + v2 * v2 else (u2, v2)
    if abs(v) <= 1e-300 or abs(v) < 1e-15 * abs(u):
        return INF
    return u / v


def _elliptic_center(a, b, c, d) -> PointH2:
    tr = a + d
    return PointH2((a - d) / (2 * c), math.sqrt(max(4 - tr * tr, 0.0)) / (2 * abs(c)))


def classify(g: Isometry) -> IsometryClass:
    a, b, c, d = g.entries
    t = abs(a + d)
    # c == 0 forces |trace| >= 2, so a sub-2 trace there is rounding noise.
    if t < 2 - TOL_CLASS and abs(c) > 1e-300:
        center = _elliptic_center(a, b, c, d)
        angle = (-2.0 * cmath.phase(c * center.z + d)) % (2 * math.pi)
        return Elliptic(angle, center)
    if t > 2 + TOL_CLASS:
        s = 1.0 if a + d > 0 else -1.0
        lam = s * (t + math.sqrt(t * t - 4)) / 2
        attracting = _eigenline(a, b, c, d, lam)
        repelling = _eigenline(a, b, c, d, 1 / lam)
        return Hyperbolic(2 * math.acosh(t / 2), Geodesic(repelling, attracting))
    if abs(b) < TOL_CLASS and abs(c) < TOL_CLASS:
        return Identity()
    s = 1.0 if a + d >= 0 else -1.0
    a, b, c, d = s * a, s * b, s * c, s * d
    fixed = _eigenline(a, b, c, d, 1.0)
    return Parabolic(fixed, CCW if b - c > 0 else CW, abs(t - 2))


def fixed_points(g: Isometry) -> tuple:
    """Fixed points: a 1-tuple holding the center (elliptic) or ideal points."""
    cls = classify(g)
    if isinstance(cls, Elliptic):
        return (cls.center,)
    if isinstance(cls, Parabolic):
        return (cls.fixed,)
    if isinstance(cls, Hyperbolic):
        return (cls.axis.start, cls.axis.end)
    raise ValueError("the identity fixes every point")


def _same_point(p, q, tol=1e-8) -> bool:
    if isinstance(p, PointH2) or isinstance(q, PointH2):
        return isinstance(p, PointH2) and isinstance(q, PointH2) and distance(p, q) < tol
    if math.isinf(p) or math.isinf(q):
        return math.isinf(p) and math.isinf(q)
    return abs(ideal_angle(p) - ideal_angle(q)) % (2 * math.pi) < tol or \
        abs(ideal_angle(p) - ideal_angle(q)) % (2 * math.pi) > 2 * math.pi - tol


def shared_fixed_point(g: Isometry, h: Isometry):
    """A common fixed point of g and h, or None."""
    for p in fixed_points(g):
        for q in fixed_points(h):
            if _same_point(p, q):
                return p
    return None


# -- constructors ------------------------------------------------------------


def _lift_point(p: PointH2) -> Isometry:
    r = math.sqrt(p.y)
    return Isometry(r, p.x / r, 0.0, 1.0 / r)


def elliptic_about(p: PointH2, angle: float) -> Isometry:
    """Counterclockwise rotation by ``angle`` about p."""
    t = angle / 2
    rot = (math.cos(t), math.sin(t), -math.sin(t), math.cos(t))
    k = _lift_point(p)
    return _from_sl2(sl2_product(k, rot, k.inverse()))


def half_turn(p: PointH2) -> Isometry:
    return elliptic_about(p, math.pi)


def hyperbolic_translation(gamma: Geodesic, length: float) -> Isometry:
    """Translation by ``length`` along gamma, from its start towards its end."""
    if not length > 0:
        raise ValueError("translation length must be positive")
    k = _standardizer(gamma.start, gamma.end)
    e = math.exp(length / 2)
    return _from_sl2(sl2_product(k, (e, 0.0, 0.0, 1 / e), k.inverse()))


def parabolic_at(x: float, shift: float) -> Isometry:
    """Parabolic fixing x, conjugate to ``z -> z + shift`` by a real translation."""
    if math.isinf(x):
        return Isometry(1.0, shift, 0.0, 1.0)
    flip = Isometry(x, -1.0, 1.0, 0.0)  # sends infinity to x
    return _from_sl2(sl2_product(flip, (1.0, shift, 0.0, 1.0), flip.inverse()))


# -- commutators ---------------------------------------------------------------


def commutator_sl2(g: Matrix, h: Matrix) -> tuple[float, float, float, float]:
    """The SL2 commutator g h g^-1 h^-1; independent of the lifts of g and h."""
    return sl2_product(g, h, sl2_inverse(g), sl2_inverse(h))


def commutator(g: Isometry, h: Isometry) -> Isometry:
    return _from_sl2(commutator_sl2(g, h))


def commutator_trace(g: Matrix, h: Matrix) -> float:
    a, _, _, d = commutator_sl2(g, h)
    return a + d


@dataclass(frozen=True)
class CommutatorGeometry:
    """Where the commutator of g and h sits relative to g and h.

    ``sense`` is CCW/CW for elliptic and parabolic commutators, read from the
    SL2 commutator itself.  The arc fields are filled only when g and h are
    hyperbolic with crossing axes; the arc in question is the boundary arc from
    the attracting point of g to that of h that avoids both repelling points.
    """

    kind: IsometryClass
    trace: float
    fixed: tuple
    sense: int | None
    axes_cross: bool
    arc_orientation: int | None = None
    on_arc: bool | None = None
    attracting_nearer_g: bool | None = None
    in_region: bool | None = None


def _arc_position(theta: float, origin: float, orientation: int) -> float:
    return ((theta - origin) * orientation) % (2 * math.pi)


def commutator_geometry(g: Isometry, h: Isometry) -> CommutatorGeometry:
    if g.is_identity() or h.is_identity():
        raise ValueError("commutator geometry needs non-identity elements")
    shared = shared_fixed_point(g, h)
    if shared is not None:
        raise SharedFixedPoint(f"g and h share the fixed point {shared!r}")
    m = commutator_sl2(g, h)
    tr = m[0] + m[3]
    comm = _from_sl2(m)
    kind = classify(comm)
    sense = None
    if isinstance(kind, Parabolic):
        sense = kind.sense
    elif isinstance(kind, Elliptic):
        # SL2 elliptics conjugate to a rotation by t in (0, pi) have c < 0.
        sense = CCW if m[2] < 0 else CW
    fixed = () if isinstance(kind, Identity) else fixed_points(comm)
    cg, ch = classify(g), classify(h)
    if not (isinstance(cg, Hyperbolic) and isinstance(ch, Hyperbolic)):
        return CommutatorGeometry(kind, tr, fixed, sense, False)
    cross = geodesics_cross(cg.axis, ch.axis)
    if not cross:
        return CommutatorGeometry(kind, tr, fixed, sense, False)
    g_minus, g_plus = cg.axis.disk_angles()
    _, h_plus = ch.axis.disk_angles()
    orientation = CCW
    span = _arc_position(h_plus, g_plus, orientation)
    if _arc_position(g_minus, g_plus, orientation) < span:
        orientation = CW
        span = _arc_position(h_plus, g_plus, orientation)
    on_arc = nearer = in_region = None
    if isinstance(kind, Hyperbolic):
        pos = [_arc_position(t, g_plus, orientation) for t in kind.axis.disk_angles()]
        on_arc = all(0 < q < span for q in pos)
        nearer = pos[1] < pos[0]
    elif isinstance(kind, Parabolic):
        on_arc = 0 < _arc_position(ideal_angle(kind.fixed), g_plus, orientation) < span
    elif isinstance(kind, Elliptic):
        k = kind.center.to_klein()
        g0, g1 = cg.axis.klein_endpoints()
        h0, h1 = ch.axis.klein_endpoints()
        in_region = (_orient(g0, g1, k) * _orient(g0, g1, h1) > 0
                     and _orient(h0, h1, k) * _orient(h0, h1, g1) > 0)
    return CommutatorGeometry(kind, tr, fixed, sense, True, orientation, on_arc, nearer, in_region)


# -- collars -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CollarData:
    t: float
    d: float
    w: float


def collar(t: float) -> CollarData:
    """Translation length and collar half-width for boundary trace t."""
    if not abs(t) > 2 + TOL_CLASS:
        raise NotHyperbolicTrace(f"|t| = {abs(t)!r} is not above 2")
    d = 2 * math.acosh(abs(t) / 2)
    # sinh(d/2) = sqrt(t^2/4 - 1) avoids cancellation near |t| = 2.
    return CollarData(t, d, math.asinh(1 / math.sqrt(t * t / 4 - 1)))
