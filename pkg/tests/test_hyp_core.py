import cmath
import itertools
import math

import pytest
from conftest import E, isometries, points, same_point
from hypothesis import assume, given
from hypothesis import strategies as st

from holonomy_lab.errors import (
    NonPositiveDeterminant,
    NotHyperbolicTrace,
    SharedFixedPoint,
)
from holonomy_lab.hyp_core import (
    CCW,
    CW,
    IDENTITY,
    IMAGINARY_AXIS,
    Elliptic,
    Geodesic,
    Hyperbolic,
    Identity,
    Isometry,
    Parabolic,
    PointH2,
    angle_to_ideal,
    apply,
    apply_ideal,
    classify,
    collar,
    commutator,
    commutator_geometry,
    commutator_sl2,
    commutator_trace,
    distance,
    distance_to_geodesic,
    elliptic_about,
    geodesics_cross,
    half_turn,
    hyperbolic_translation,
    ideal_angle,
    normalize,
    parabolic_at,
    psl_distance,
    shared_fixed_point,
    sl2_inverse,
    sl2_product,
)

I = PointH2(0.0, 1.0)


def cosh_distance(p: PointH2, q: PointH2) -> float:
    return 1 + abs(p.z - q.z) ** 2 / (2 * p.y * q.y)


def ideal_image(g: Isometry, x: float) -> float:
    return apply_ideal(g, x)


def interleaved(g1: Geodesic, g2: Geodesic) -> bool:
    """Endpoints alternate around the circle: an angle-ordering test, no chords."""
    a0, a1 = sorted(g1.disk_angles())
    inside = [a0 < t < a1 for t in g2.disk_angles()]
    return inside[0] != inside[1]


# -- normalize ---------------------------------------------------------------


def test_normalize_scalar_matrix_is_identity():
    assert normalize([[2, 0], [0, 2]]) == IDENTITY


def test_normalize_trace_zero_sign_rule():
    assert normalize([[0, -1], [1, 0]]).entries == (0.0, 1.0, -1.0, 0.0)


def test_normalize_negative_trace_is_negated():
    assert normalize([[-1, -1], [0, -1]]).entries == (1.0, 1.0, 0.0, 1.0)


@pytest.mark.parametrize("raw", [[[1, 0], [0, -1]], [[0, 0], [0, 0]], [[1, 2], [2, 4]]])
def test_normalize_rejects_non_positive_determinant(raw):
    with pytest.raises(NonPositiveDeterminant):
        normalize(raw)


@given(isometries())
def test_normalized_matrices_have_unit_determinant(g):
    a, b, c, d = g.entries
    assert abs(a * d - b * c - 1) < 1e-12
    assert normalize(g.matrix) == g or psl_distance(normalize(g.matrix), g) < 1e-12


# -- points, distances, geodesics ------------------------------------------------


def test_apply_examples():
    assert apply(IDENTITY, I) == I
    assert same_point(apply(normalize([[E, 0], [0, 1 / E]]), I), PointH2(0.0, E * E))
    assert same_point(apply(Isometry(1.0, 1.0, 0.0, 1.0), I), PointH2(1.0, 1.0))


def test_distance_examples():
    assert distance(I, PointH2(0.0, E * E)) == pytest.approx(2.0, abs=1e-12)
    assert distance(I, I) == 0.0
    assert distance_to_geodesic(PointH2(1.0, 1.0), IMAGINARY_AXIS) == pytest.approx(0.8813736, abs=1e-7)


@given(points(), points())
def test_distance_matches_arccosh_formula(p, q):
    assert distance(p, q) == pytest.approx(math.acosh(cosh_distance(p, q)), rel=1e-7, abs=1e-7)


@given(points(), points(), points())
def test_distance_is_a_metric(p, q, r):
    assert distance(p, q) == pytest.approx(distance(q, p), abs=1e-12)
    assert distance(p, r) <= distance(p, q) + distance(q, r) + 1e-10


@given(isometries(), points(), points())
def test_isometries_preserve_distance(g, p, q):
    assert distance(apply(g, p), apply(g, q)) == pytest.approx(distance(p, q), rel=1e-8, abs=1e-8)


@given(points())
def test_model_conversions_round_trip(p):
    assert same_point(PointH2.from_disk(p.to_disk()), p, 1e-12)
    assert same_point(PointH2.from_klein(*p.to_klein()), p, 1e-10)


@given(isometries(), points())
def test_distance_to_geodesic_is_invariant(k, p):
    # closed form on the imaginary axis, transported by k
    expected = math.asinh(abs(p.x) / p.y)
    gamma = Geodesic(ideal_image(k, 0.0), ideal_image(k, math.inf))
    assume(gamma.start != gamma.end)
    assert distance_to_geodesic(apply(k, p), gamma) == pytest.approx(expected, rel=1e-7, abs=1e-7)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-4, 4), st.floats(-4, 4))
def test_fermi_coordinates_round_trip(s, r, u, v):
    assume(abs(u - v) > 0.1)
    gamma = Geodesic(u, v)
    p = gamma.point_at(s, r)
    assert distance_to_geodesic(p, gamma) == pytest.approx(abs(r), abs=1e-8)
    s2, r2 = gamma.fermi(p)
    assert (s2, r2) == pytest.approx((s, r), abs=1e-8)


def test_fermi_positive_side_is_left_of_travel():
    # travelling up the imaginary axis, the left side is x < 0
    assert IMAGINARY_AXIS.point_at(0.0, 0.5).x < 0


# -- classification ------------------------------------------------------------


def test_classify_examples():
    par = classify(Isometry(1.0, 1.0, 0.0, 1.0))
    assert isinstance(par, Parabolic) and math.isinf(par.fixed)

    hyp = classify(normalize([[E, 0], [0, 1 / E]]))
    assert isinstance(hyp, Hyperbolic)
    assert hyp.length == pytest.approx(2.0, abs=1e-12)
    assert {hyp.axis.start, hyp.axis.end} == {0.0, math.inf}

    ell = classify(Isometry(0.0, 1.0, -1.0, 0.0))
    assert isinstance(ell, Elliptic)
    assert ell.angle == pytest.approx(math.pi)
    assert same_point(ell.center, I)

    assert isinstance(classify(IDENTITY), Identity)


@given(isometries())
def test_elliptic_angle_is_the_derivative_at_the_center(g):
    cls = classify(g)
    assume(isinstance(cls, Elliptic))
    z = cls.center.z
    assert abs(g(z) - z) < 1e-8 * max(1.0, abs(z))
    derivative = 1 / (g.c * z + g.d) ** 2
    assert abs(derivative) == pytest.approx(1.0, abs=1e-7)
    assert cmath.exp(1j * cls.angle) == pytest.approx(derivative, abs=1e-7)


def test_classify_upper_triangular_with_rounded_trace():
    # Entries whose trace rounds below 2 but with c == 0 cannot be elliptic.
    near = Isometry(1.0 - 1e-8, 0.0, 0.0, 1.0 - 1e-8)
    assert isinstance(classify(near), Identity)
    shear = Isometry(1.0 - 1e-8, 0.5, 0.0, 1.0 - 1e-8)
    assert isinstance(classify(shear), Parabolic)


@given(isometries())
def test_hyperbolic_axis_and_length(g):
    cls = classify(g)
    assume(isinstance(cls, Hyperbolic) and cls.length > 1e-3)
    for x in (cls.axis.start, cls.axis.end):
        if not math.isinf(x):
            assume(abs(x) < 1e6)
            image = apply_ideal(g, x)
            assert ideal_angle(image) == pytest.approx(ideal_angle(x), abs=1e-6)
    p = cls.axis.point_at(0.0)
    assert distance(p, apply(g, p)) == pytest.approx(cls.length, rel=1e-7, abs=1e-7)
    # moves forward along the axis, from start to end
    assert cls.axis.fermi(apply(g, p))[0] == pytest.approx(cls.length, rel=1e-6, abs=1e-6)


@given(st.floats(-5, 5), st.floats(0.1, 3) | st.floats(-3, -0.1))
def test_parabolic_sense_follows_boundary_motion(x, shift):
    g = parabolic_at(x, shift)
    cls = classify(g)
    assert isinstance(cls, Parabolic)
    assert ideal_angle(cls.fixed) == pytest.approx(ideal_angle(x), abs=1e-8)
    # a boundary point opposite the fixed point moves in the reported sense
    theta = (ideal_angle(x) + math.pi) % (2 * math.pi)
    y = -1 / math.tan(theta / 2) if theta else math.inf
    step = (ideal_angle(apply_ideal(g, y)) - theta + math.pi) % (2 * math.pi) - math.pi
    assert (step > 0) == (cls.sense == CCW)


@given(isometries(), isometries())
def test_classify_is_conjugation_invariant(g, k):
    assume(max(map(abs, k.entries)) <= 5)
    c1, c2 = classify(g), classify(k @ g @ k.inverse())
    t = abs(g.trace)
    assume(abs(t - 2) > 1e-6)
    assert type(c1) is type(c2)
    if isinstance(c1, Hyperbolic):
        assert c1.length == pytest.approx(c2.length, abs=1e-8)
    if isinstance(c1, Elliptic):
        assert c1.angle == pytest.approx(c2.angle, abs=1e-7)


# -- constructors ------------------------------------------------------------


def test_half_turn_examples():
    assert psl_distance(half_turn(I), Isometry(0.0, 1.0, -1.0, 0.0)) < 1e-15
    assert psl_distance(half_turn(PointH2(0.0, E)), normalize([[0, -E], [1 / E, 0]])) < 1e-15


@given(points())
def test_half_turn_squares_to_identity(p):
    h = half_turn(p)
    assert (h @ h).is_identity(1e-9)


def test_translation_along_imaginary_axis():
    g = hyperbolic_translation(IMAGINARY_AXIS, 2.0)
    assert psl_distance(g, normalize([[E, 0], [0, 1 / E]])) < 1e-14


@given(points(), st.floats(0.01, 6.2))
def test_elliptic_about_matches_classification(p, angle):
    cls = classify(elliptic_about(p, angle))
    assert isinstance(cls, Elliptic)
    assert cls.angle == pytest.approx(angle, abs=1e-7)
    assert distance(cls.center, p) < 1e-6


# -- commutators ---------------------------------------------------------------


def test_commutator_trace_examples():
    h = half_turn(PointH2(0.0, E))
    assert commutator_trace(IDENTITY, h) == pytest.approx(2.0)
    assert commutator_trace(half_turn(I), h) == pytest.approx(2 * math.cosh(2), abs=1e-9)


@given(isometries(), isometries())
def test_commutator_trace_ignores_lift_signs(g, h):
    neg = tuple(-x for x in g.entries)
    neg_h = tuple(-x for x in h.entries)
    assert commutator_trace(neg, neg_h) == pytest.approx(commutator_trace(g, h), abs=1e-12)
    assert commutator_trace(neg, h) == pytest.approx(commutator_trace(g, h), abs=1e-12)


@given(isometries(), isometries())
def test_trace_below_two_iff_crossing_hyperbolic_axes(g, h):
    t = commutator_trace(g, h)
    assume(abs(t - 2) > 1e-6)
    cg, ch = classify(g), classify(h)
    both = isinstance(cg, Hyperbolic) and isinstance(ch, Hyperbolic)
    crossing = both and geodesics_cross(cg.axis, ch.axis)
    # two independent crossing tests must agree
    if both:
        assert crossing == interleaved(cg.axis, ch.axis)
    assert (t < 2) == crossing


@given(st.floats(-3, 3), st.floats(0.2, 3), isometries())
def test_parabolic_or_elliptic_without_common_fixed_point_gives_hyperbolic(x, shift, h):
    for g in (parabolic_at(x, shift), elliptic_about(PointH2(x, shift), 1.0 + shift)):
        assume(not isinstance(classify(h), Identity))
        assume(shared_fixed_point(g, h) is None)
        tr = commutator_trace(g, h)
        assume(abs(tr - 2) > 1e-6)
        assert isinstance(classify(commutator(g, h)), Hyperbolic)


def test_commutator_geometry_crossing_axes_example():
    g = hyperbolic_translation(Geodesic(-1.0, 1.0), 1.0)
    h = hyperbolic_translation(IMAGINARY_AXIS, 1.0)
    geo = commutator_geometry(g, h)
    assert geo.axes_cross
    assert geo.trace < 2
    assert isinstance(geo.kind, Elliptic)
    assert geo.in_region


def test_commutator_geometry_parabolic_generator():
    g = Isometry(1.0, 1.0, 0.0, 1.0)
    h = hyperbolic_translation(Geodesic(-1.0, 1.0), 2.0)
    assert isinstance(commutator_geometry(g, h).kind, Hyperbolic)


def test_commutator_geometry_shared_fixed_point():
    with pytest.raises(SharedFixedPoint):
        commutator_geometry(half_turn(I), elliptic_about(I, 1.0))


@st.composite
def crossing_pairs(draw):
    """Hyperbolic g, h whose axes cross: endpoints interleave on the circle."""
    cuts = sorted(draw(st.lists(st.floats(0.05, 6.2), min_size=4, max_size=4, unique=True)))
    assume(min(b - a for a, b in itertools.pairwise(cuts)) > 0.05)
    ends = [angle_to_ideal(t) for t in cuts]
    g_axis = Geodesic(ends[0], ends[2])
    h_axis = Geodesic(ends[1], ends[3])
    if draw(st.booleans()):
        g_axis = g_axis.reversed()
    if draw(st.booleans()):
        h_axis = h_axis.reversed()
    lengths = st.floats(0.1, 4.0)
    return (hyperbolic_translation(g_axis, draw(lengths)),
            hyperbolic_translation(h_axis, draw(lengths)))


@given(crossing_pairs())
def test_commutator_geometry_arc_rules(pair):
    geo = commutator_geometry(*pair)
    assert geo.axes_cross
    assert geo.trace < 2
    if geo.trace < -2 - 1e-6:
        assert isinstance(geo.kind, Hyperbolic)
        assert geo.on_arc and geo.attracting_nearer_g
    elif -2 + 1e-6 < geo.trace < 2 - 1e-6:
        assert isinstance(geo.kind, Elliptic)
        assert geo.in_region


def test_commutator_sense_is_reported_for_elliptic_commutators():
    g = hyperbolic_translation(Geodesic(-1.0, 1.0), 1.0)
    h = hyperbolic_translation(IMAGINARY_AXIS, 1.0)
    geo = commutator_geometry(g, h)
    mirrored = commutator_geometry(h, g)
    assert {geo.sense, mirrored.sense} == {CCW, CW}
    # oracle: the SL2 commutator, conjugated so its center is i, is a rotation matrix
    center = geo.kind.center
    r = math.sqrt(center.y)
    k = (1 / r, -center.x / r, 0.0, r)
    a, b, c, d = commutator_sl2(g, h)
    _, _, rc, _ = sl2_product(k, (a, b, c, d), sl2_inverse(k))
    assert (rc < 0) == (geo.sense == CCW)


# -- collars -----------------------------------------------------------------


def test_collar_at_two_cosh_one():
    c = collar(2 * math.cosh(1))
    assert c.d == pytest.approx(2.0, abs=1e-12)
    assert c.w == pytest.approx(math.asinh(1 / math.sinh(1)), abs=1e-12)
    assert c.w == pytest.approx(0.7719368, abs=1e-7)


@pytest.mark.parametrize("t", [2.01, 3.0, 10.0, 100.0, -2.5, -40.0])
def test_collar_identity(t):
    c = collar(t)
    assert math.sinh(c.w) * math.sinh(c.d / 2) == pytest.approx(1.0, abs=1e-10)
    assert c.d == pytest.approx(2 * math.acosh(abs(t) / 2), abs=1e-12)


def test_collar_width_decreases():
    widths = [collar(t).w for t in (2.5, 3.0, 10.0, 100.0)]
    assert widths == sorted(widths, reverse=True)


@pytest.mark.parametrize("t", [2.0, 1.0, -2.0, 0.0])
def test_collar_rejects_non_hyperbolic_traces(t):
    with pytest.raises(NotHyperbolicTrace):
        collar(t)
