import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from holonomy_lab.hyp_core import Isometry, PointH2, normalize

settings.register_profile(
    "default", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

entry = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def isometries(draw, min_det=0.05):
    """Random matrices with entries in [-3, 3], rescaled to determinant one."""
    a, b, c, d = draw(st.tuples(entry, entry, entry, entry))
    det = a * d - b * c
    if abs(det) < min_det:
        a, d = a + 1.5, d + 1.5
        det = a * d - b * c
    if det < 0:
        b, d = -b, -d
        det = -det
    if det < min_det:
        return Isometry(1.0, 0.0, 0.0, 1.0)
    return normalize([[a, b], [c, d]])


@st.composite
def points(draw):
    x = draw(st.floats(-4.0, 4.0))
    y = draw(st.floats(0.05, 5.0))
    return PointH2(x, y)


def random_sl2(rng: np.random.Generator, n: int, low: float = -3.0, high: float = 3.0,
               min_det: float = 0.05) -> list[Isometry]:
    """n random PSL2 elements from uniform entries, determinant sign fixed by a column flip."""
    out = []
    while len(out) < n:
        a, b, c, d = rng.uniform(low, high, 4)
        det = a * d - b * c
        if abs(det) < min_det:
            continue
        if det < 0:
            b, d = -b, -d
        out.append(normalize([[a, b], [c, d]]))
    return out


def same_point(p: PointH2, q: PointH2, tol: float = 1e-9) -> bool:
    return abs(p.z - q.z) <= tol * max(1.0, abs(q.z))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


E = math.e


def pair_with_kappa(rng: np.random.Generator, target: float, span: float = 6.0):
    """A realized pair whose commutator trace is ``target``, with random traces of g and h."""
    from holonomy_lab.char_torus import Character, realize
    from holonomy_lab.errors import NotRealizable, ReducibleAmbiguity

    while True:
        x, y = rng.uniform(-span, span, 2)
        disc = x * x * y * y - 4 * (x * x + y * y - 2 - target)
        if disc < 0:
            continue
        z = (x * y + rng.choice((-1.0, 1.0)) * math.sqrt(disc)) / 2
        try:
            return realize(Character.of(x, y, z))
        except (NotRealizable, ReducibleAmbiguity):
            continue


def upper_triangular_pair(rng: np.random.Generator):
    """Non-commuting g, h fixing infinity: their commutator is parabolic."""
    a, c = rng.uniform(0.3, 3.0, 2)
    b, d = rng.uniform(-3.0, 3.0, 2)
    g = Isometry(a, b, 0.0, 1 / a)
    h = Isometry(c, d, 0.0, 1 / c)
    return g, h


def moderate_isometries(rng: np.random.Generator, n: int) -> list[Isometry]:
    """Rotations about i followed by moves of i to points within distance ~1.5."""
    from holonomy_lab.hyp_core import elliptic_about

    out = []
    for _ in range(n):
        x, logy, angle = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2 * math.pi)
        y = math.exp(logy)
        r = math.sqrt(y)
        out.append(Isometry(r, x / r, 0.0, 1 / r) @ elliptic_about(PointH2(0.0, 1.0), angle))
    return out


def random_genus2_rep(rng: np.random.Generator, kind: int):
    """A genus-2 representation glued from two handles along a common boundary.

    ``kind`` picks the boundary trace: 0 below -2, 1 at -2, 2 elliptic,
    3 above 2 (all with a random second handle on the same level), 4 any
    trace above -2 with a Fuchsian complement.  Returns None when the
    alignment or the relator check fails numerically.
    """
    from holonomy_lab.char_torus import align_commutator
    from holonomy_lab.errors import NotConjugate, RelatorNotSatisfied
    from holonomy_lab.fixtures import fuchsian_complement, mirror, mirror_rep
    from holonomy_lab.hyp_core import commutator, commutator_trace
    from holonomy_lab.lifts import SurfaceRepresentation

    t = (rng.uniform(-30, -2.05), -2.0, rng.uniform(-1.95, 1.95),
         rng.uniform(2.05, 30), rng.uniform(-1.95, 30))[kind]
    g1, h1 = pair_with_kappa(rng, t, 4.0)
    if rng.random() < 0.5:
        g1, h1 = mirror(g1), mirror(h1)
    target = commutator(g1, h1).inverse()
    try:
        if kind == 4:
            g2, h2 = fuchsian_complement(commutator(g1, h1), commutator_trace(g1, h1))
        else:
            g2, h2 = pair_with_kappa(rng, t, 4.0)
            try:
                g2, h2 = align_commutator(g2, h2, target)
            except NotConjugate:
                g2, h2 = align_commutator(mirror(g2), mirror(h2), target)
        rep = SurfaceRepresentation.from_generators([g1, h1, g2, h2])
        rep = rep.conjugate(moderate_isometries(rng, 1)[0])
    except (NotConjugate, RelatorNotSatisfied):
        return None
    return mirror_rep(rep) if rng.random() < 0.5 else rep
