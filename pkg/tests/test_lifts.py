import itertools
import math

import numpy as np
import pytest
from conftest import (
    E,
    isometries,
    moderate_isometries,
    pair_with_kappa,
    random_sl2,
    upper_triangular_pair,
)
from hypothesis import given
from hypothesis import strategies as st

from holonomy_lab.errors import (
    EllipticBoundary,
    EllipticHasNoSimplestLift,
    NotElliptic,
    RelatorNotSatisfied,
)
from holonomy_lab.fixtures import (
    mirror,
    mirror_rep,
    regular_octagon_rep,
    trivial_rep,
    va_genus2_rep,
)
from holonomy_lab.hyp_core import (
    CCW,
    CW,
    IDENTITY,
    Isometry,
    PointH2,
    angle_to_ideal,
    apply_ideal,
    commutator_sl2,
    elliptic_about,
    half_turn,
    ideal_angle,
    psl_distance,
)
from holonomy_lab.lifts import (
    LiftClass,
    LiftedIsometry,
    SurfaceRepresentation,
    center_power,
    classify_lift,
    commutator_lift,
    compose,
    compose_all,
    euler_number_closed,
    invert,
    lift_elliptic,
    lift_simplest,
    lifted_trace,
    relative_euler_lift,
    relative_euler_punctured_torus,
    translation_number,
)

TWO_PI = 2 * math.pi
I = PointH2(0.0, 1.0)
DIAG_E = Isometry(E, 0.0, 0.0, 1 / E)


def circle_map(g: Isometry, theta: float) -> float:
    return ideal_angle(apply_ideal(g, angle_to_ideal(theta)))


def unwrapped_increment(g: Isometry, theta: float, steps: int = 4000) -> float:
    """F(theta) - F(0) by following the boundary map along a fine grid."""
    ts = np.linspace(0.0, theta, steps + 1)
    images = np.array([circle_map(g, t) for t in ts])
    return float(np.unwrap(images)[-1] - images[0])


def same_lift(u: LiftedIsometry, v: LiftedIsometry, tol: float = 1e-10) -> bool:
    return psl_distance(u.base, v.base) < tol and abs(u.anchor - v.anchor) < tol


# -- the lifted boundary map ------------------------------------------------------


@given(isometries(), st.floats(-7.0, 7.0))
def test_lift_is_a_lift_of_the_circle_map(g, theta):
    u = LiftedIsometry.from_base(g)
    diff = (u(theta) - circle_map(g, theta)) % TWO_PI
    assert min(diff, TWO_PI - diff) < 1e-8


@given(isometries())
def test_lift_is_increasing_and_periodic(g):
    u = LiftedIsometry.from_base(g)
    xs = np.linspace(-math.pi, math.pi, 16)
    values = [u(x) for x in xs]
    assert all(b > a for a, b in itertools.pairwise(values))
    for x in xs:
        assert abs(u(x + TWO_PI) - u(x) - TWO_PI) < 1e-9


def test_lift_increment_matches_unwrapped_boundary_map(rng):
    for g in random_sl2(rng, 10):
        u = LiftedIsometry.from_base(g)
        for theta in (1.0, 3.0, 5.5):
            assert abs((u(theta) - u(0.0)) - unwrapped_increment(g, theta)) < 1e-6


# -- simplest and elliptic lifts ---------------------------------------------------


def test_simplest_lift_of_identity_is_identity_map():
    u = lift_simplest(IDENTITY)
    for x in (-2.0, 0.0, 1.3, 4.0):
        assert abs(u(x) - x) < 1e-15


def test_simplest_lift_of_diagonal_fixes_zero_and_infinity():
    u = lift_simplest(DIAG_E)
    for x in (0.0, math.inf):
        theta = ideal_angle(x)
        assert abs(u(theta) - theta) < 1e-12


def test_simplest_lift_of_elliptic_raises():
    with pytest.raises(EllipticHasNoSimplestLift):
        lift_simplest(half_turn(I))


def test_half_turn_ccw_lift_translates_by_pi():
    assert translation_number(lift_elliptic(half_turn(I), CCW)) == pytest.approx(math.pi, abs=1e-12)


def test_half_turn_lift_shifts_every_angle_by_pi():
    u = lift_elliptic(half_turn(I), CCW)
    for x in np.linspace(0, TWO_PI, 7):
        assert u(x) - x == pytest.approx(math.pi, abs=1e-12)


def test_quarter_turn_cw_lift_relation():
    g = elliptic_about(I, math.pi / 2)
    cw, ccw = lift_elliptic(g, CW), lift_elliptic(g, CCW)
    assert translation_number(cw) == pytest.approx(math.pi / 2 - TWO_PI, abs=1e-12)
    assert same_lift(compose(cw, center_power(1)), ccw)


def test_lift_elliptic_rejects_identity():
    with pytest.raises(NotElliptic):
        lift_elliptic(IDENTITY, CCW)


@given(st.floats(0.05, TWO_PI - 0.05), st.floats(-3, 3), st.floats(0.2, 4))
def test_elliptic_lift_windows(angle, x, y):
    g = elliptic_about(PointH2(x, y), angle)
    assert 0 < translation_number(lift_elliptic(g, CCW)) < TWO_PI
    assert -TWO_PI < translation_number(lift_elliptic(g, CW)) < 0
    assert classify_lift(lift_elliptic(g, CCW)) == LiftClass("Ell", 1)
    assert classify_lift(lift_elliptic(g, CW)) == LiftClass("Ell", -1)


# -- group structure ---------------------------------------------------------------


def test_center_powers_cancel():
    assert same_lift(compose(center_power(1), center_power(-1)), center_power(0))


@given(isometries())
def test_compose_with_inverse_is_trivial(g):
    u = LiftedIsometry.from_base(g, 2)
    assert same_lift(compose(u, invert(u)), center_power(0), tol=1e-8)
    assert same_lift(compose(invert(u), u), center_power(0), tol=1e-8)


@given(isometries(), isometries(), st.floats(-6, 6))
def test_compose_is_function_composition(g, h, x):
    u, v = LiftedIsometry.from_base(g, 1), LiftedIsometry.from_base(h, -1)
    assert compose(u, v)(x) == pytest.approx(u(v(x)), abs=1e-8)


@pytest.mark.parametrize("n", [-3, -1, 1, 2, 5])
def test_center_power_shifts_class_index(n):
    assert classify_lift(compose(lift_simplest(DIAG_E), center_power(n))) == LiftClass("Hyp", n)


def test_inverse_of_ccw_lift_is_ell_minus_one():
    assert classify_lift(invert(lift_elliptic(half_turn(I), CCW))) == LiftClass("Ell", -1)


# -- classification and traces -----------------------------------------------------


def test_classify_lift_examples():
    assert classify_lift(lift_simplest(DIAG_E)) == LiftClass("Hyp", 0)
    assert classify_lift(lift_elliptic(half_turn(I), CCW)) == LiftClass("Ell", 1)
    assert classify_lift(center_power(-4)) == LiftClass("Center", -4)


def test_parabolic_sense_survives_index_shift():
    par = Isometry(1.0, 1.0, 0.0, 1.0)
    base = classify_lift(lift_simplest(par))
    shifted = classify_lift(compose(center_power(2), lift_simplest(par)))
    assert base.family in ("ParPlus", "ParMinus") and base.index == 0
    assert shifted == LiftClass(base.family, 2)
    # z -> z + 1 moves boundary angles counterclockwise
    x = 0.5
    assert lift_simplest(par)(ideal_angle(x)) > ideal_angle(x)
    assert base.family == "ParPlus"


def test_mirrored_parabolic_has_opposite_sense():
    par = Isometry(1.0, 1.0, 0.0, 1.0)
    assert classify_lift(lift_simplest(mirror(par))).family == "ParMinus"


@pytest.mark.parametrize("n", range(-4, 5))
def test_center_trace_alternates(n):
    assert lifted_trace(center_power(n)) == 2 * (-1) ** n


def test_lifted_trace_of_hyperbolic_branches():
    u = lift_simplest(DIAG_E)
    assert lifted_trace(u) == pytest.approx(2 * math.cosh(1), abs=1e-12)
    assert lifted_trace(compose(center_power(1), u)) == pytest.approx(-2 * math.cosh(1), abs=1e-12)


def test_lifted_trace_matches_sl2_product(rng):
    """Reference lifts carry the SL2 sign of the stored entries, so traces of products agree."""
    for _ in range(200):
        g, h = random_sl2(rng, 2)
        u = compose(LiftedIsometry.from_base(g), LiftedIsometry.from_base(h))
        a, _, _, d = (np.array(g.entries).reshape(2, 2) @ np.array(h.entries).reshape(2, 2)).ravel()
        assert lifted_trace(u) == pytest.approx(a + d, abs=1e-9)


@given(isometries(), st.integers(-3, 3))
def test_hyperbolic_index_parity_gives_trace_sign(g, n):
    u = compose(center_power(n), LiftedIsometry.from_base(g))
    cls = classify_lift(u)
    if cls.family == "Hyp":
        assert (lifted_trace(u) > 2) == (cls.index % 2 == 0)


# -- commutator lifts --------------------------------------------------------------


def test_commutator_lift_with_identity_is_trivial(rng):
    h = random_sl2(rng, 1)[0]
    assert same_lift(commutator_lift(IDENTITY, h), center_power(0), tol=1e-12)


def test_commutator_lift_of_half_turns_is_hyp0():
    assert classify_lift(commutator_lift(half_turn(I), half_turn(PointH2(0.0, E)))) == LiftClass("Hyp", 0)


def test_commutator_lift_of_cusped_torus():
    from holonomy_lab.char_torus import Character, realize

    g, h = realize(Character.of(3.0, 3.0, 3.0))
    cls = classify_lift(commutator_lift(g, h))
    assert cls in (LiftClass("ParMinus", 1), LiftClass("ParPlus", -1))


def test_commutator_lift_matches_sl2_trace(rng):
    for _ in range(200):
        g, h = random_sl2(rng, 2)
        a, _, _, d = commutator_sl2(g, h)
        assert lifted_trace(commutator_lift(g, h)) == pytest.approx(a + d, abs=1e-8)


def test_commutator_lift_independent_of_lift_choice(rng):
    for _ in range(500):
        g, h = random_sl2(rng, 2)
        a, b = rng.integers(-3, 4, 2)
        gt = compose(LiftedIsometry.from_base(g), center_power(int(a)))
        ht = compose(LiftedIsometry.from_base(h), center_power(int(b)))
        direct = compose_all((gt, ht, invert(gt), invert(ht)))
        assert same_lift(direct, commutator_lift(g, h), tol=1e-10)


TABLE = {
    "above": {LiftClass("Hyp", 0)},
    "plus_two": {LiftClass("ParPlus", 0), LiftClass("ParMinus", 0)},
    "between": {LiftClass("Ell", 1), LiftClass("Ell", -1)},
    "minus_two": {LiftClass("ParPlus", -1), LiftClass("ParMinus", 1)},
    "below": {LiftClass("Hyp", 1), LiftClass("Hyp", -1)},
}


def sample_pair(rng, regime):
    if regime == "plus_two":
        g, h = upper_triangular_pair(rng)
    else:
        target = {"above": rng.uniform(2.05, 40), "between": rng.uniform(-1.95, 1.95),
                  "minus_two": -2.0, "below": rng.uniform(-40, -2.05)}[regime]
        g, h = pair_with_kappa(rng, target)
    if rng.random() < 0.5:
        g, h = mirror(g), mirror(h)
    k = moderate_isometries(rng, 1)[0]
    return k @ g @ k.inverse(), k @ h @ k.inverse()


@pytest.mark.parametrize("regime", sorted(TABLE))
def test_commutator_lift_class_table(rng, regime):
    seen = set()
    for _ in range(200):
        g, h = sample_pair(rng, regime)
        cls = classify_lift(commutator_lift(g, h))
        assert cls in TABLE[regime]
        seen.add(cls)
    assert seen == TABLE[regime]


# -- closed surfaces ---------------------------------------------------------------


def test_euler_examples():
    assert euler_number_closed(trivial_rep()) == 0
    assert euler_number_closed(regular_octagon_rep()) == -2
    assert euler_number_closed(va_genus2_rep()) == -1


def test_mirror_flips_euler_number():
    assert euler_number_closed(mirror_rep(regular_octagon_rep())) == 2
    assert euler_number_closed(mirror_rep(va_genus2_rep())) == 1


@pytest.mark.parametrize("build", [regular_octagon_rep, va_genus2_rep, trivial_rep])
def test_euler_conjugation_invariant(rng, build):
    rep = build()
    m = euler_number_closed(rep)
    for k in moderate_isometries(rng, 100):
        assert euler_number_closed(rep.conjugate(k)) == m


def test_relator_must_hold():
    g = Isometry(2.0, 0.0, 0.0, 0.5)
    h = Isometry(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(RelatorNotSatisfied):
        SurfaceRepresentation.from_generators([g, h, IDENTITY, IDENTITY])


def test_octagon_relator_residual_small():
    assert regular_octagon_rep().relator_residual < 1e-8


# -- relative Euler numbers --------------------------------------------------------


def test_relative_euler_examples():
    from holonomy_lab.char_torus import Character, realize

    assert relative_euler_punctured_torus(half_turn(I), half_turn(PointH2(0.0, E))) == 0
    assert relative_euler_punctured_torus(*realize(Character.of(3.0, 3.0, 3.0))) == -1


def test_relative_euler_elliptic_boundary(rng):
    g, h = pair_with_kappa(rng, 1.0)
    with pytest.raises(EllipticBoundary):
        relative_euler_punctured_torus(g, h)
    with pytest.raises(EllipticBoundary):
        relative_euler_lift(g, h)


@pytest.mark.parametrize("regime", ["above", "plus_two", "minus_two", "below"])
def test_trace_rule_matches_lift_up_to_orientation(rng, regime):
    for _ in range(100):
        g, h = sample_pair(rng, regime)
        rule = relative_euler_punctured_torus(g, h)
        lifted = relative_euler_lift(g, h)
        assert rule == -abs(lifted)
        assert relative_euler_lift(mirror(g), mirror(h)) == -lifted


@pytest.mark.parametrize("build", [regular_octagon_rep, va_genus2_rep])
def test_relative_euler_additivity(build):
    rep = build()
    a1, b1 = rep.handle(1)
    handle = relative_euler_lift(a1, b1)
    a2, b2 = rep.handle(2)
    complement = relative_euler_lift(a2, b2)
    assert handle + complement == euler_number_closed(rep)
