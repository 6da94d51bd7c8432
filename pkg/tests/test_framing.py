import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selflink import geometry as geo
from selflink.errors import CurvatureVanishes, DirectionDegenerate, PushoffCollision
from selflink.framing import (
    Framing,
    add_twists,
    frenet_framing,
    normal,
    normal_and_derivative,
    projection_framing,
    pushoff,
    sampled_framing,
    shift_framing,
    so3_lift_class,
    total_torsion,
    twist_integral,
)

CIRCLE = geo.circle()
TREFOIL = geo.torus_knot(2, 3, 2.0, 0.5)
TORUS32 = geo.torus_knot(3, 2, 2.0, 0.5)
WOBBLY = geo.CurveSpec("perturbed_circle", {"amplitude": 0.6, "mode": 3, "axis_x": 1.0, "axis_z": 0.0})
CONST = projection_framing(CIRCLE, (0, 0, 1))


def all_framings():
    out = {
        "circle_const": CONST,
        "circle_frenet": frenet_framing(CIRCLE),
        "trefoil_frenet": frenet_framing(TREFOIL),
        "trefoil_blackboard": projection_framing(TREFOIL, (0, 0, 1)),
        "torus32_frenet": frenet_framing(TORUS32),
        "torus32_tilted": projection_framing(TORUS32, (0.2, -0.1, 1.0)),
    }
    t = geo.grid(256)
    out["trefoil_sampled"] = sampled_framing(TREFOIL, normal(out["trefoil_blackboard"], t))
    return out


FRAMINGS = all_framings()


def assert_framing_invariants(f, n=1024):
    t = geo.grid(n)
    nv = normal(f, t)
    np.testing.assert_allclose(np.linalg.norm(nv, axis=1), 1.0, atol=1e-10)
    that = geo.unit_tangent(f.base, t)
    assert np.max(np.abs(np.sum(nv * that, axis=1))) < 1e-9
    np.testing.assert_allclose(normal(f, 1.0 - 1e-13), normal(f, 0.0), atol=1e-9)


def test_frenet_framing_examples():
    np.testing.assert_allclose(normal(frenet_framing(CIRCLE), 0.0), [-1, 0, 0], atol=1e-12)
    assert_framing_invariants(frenet_framing(TREFOIL))
    with pytest.raises(CurvatureVanishes):
        frenet_framing(WOBBLY)


def test_projection_framing_examples():
    np.testing.assert_allclose(normal(CONST, geo.grid(64)), np.tile([0, 0, 1.0], (64, 1)), atol=1e-15)
    with pytest.raises(DirectionDegenerate) as exc:
        projection_framing(CIRCLE, (1, 0, 0))
    assert exc.value.t == pytest.approx(0.25) or exc.value.t == pytest.approx(0.75)
    assert_framing_invariants(projection_framing(TREFOIL, (0, 0, 1)))


@pytest.mark.parametrize("name", sorted(FRAMINGS))
def test_type_invariants(name):
    assert_framing_invariants(FRAMINGS[name])
    assert_framing_invariants(add_twists(FRAMINGS[name], 2))


@pytest.mark.parametrize("name", sorted(FRAMINGS))
def test_framing_derivative_matches_finite_difference(name):
    f = add_twists(FRAMINGS[name], 1)
    t, h = np.array([0.03, 0.41, 0.77]), 1e-6
    _, dn = normal_and_derivative(f, t)
    approx = (normal(f, t + h) - normal(f, t - h)) / (2 * h)
    np.testing.assert_allclose(dn, approx, atol=1e-5 * max(1.0, np.abs(dn).max()))


def test_add_twists_examples():
    assert add_twists(CONST, 0) is CONST
    assert twist_integral(add_twists(CONST, 1)) == pytest.approx(1.0, abs=1e-8)
    f = FRAMINGS["trefoil_frenet"]
    back = add_twists(add_twists(f, 3), -3)
    t = geo.grid(300)
    np.testing.assert_allclose(normal(back, t), normal(f, t), atol=1e-12)


def test_twisted_round_trip_through_nested_framing():
    # Building the nested framing by hand (not through add_twists' merging) still round-trips.
    f = FRAMINGS["torus32_frenet"]
    nested = Framing(f.base, "twisted", twists=-3, inner=Framing(f.base, "twisted", twists=3, inner=f))
    t = geo.grid(300)
    np.testing.assert_allclose(normal(nested, t), normal(f, t), atol=1e-12)


def test_twist_integral_examples():
    assert abs(twist_integral(CONST)) < 1e-10
    assert twist_integral(add_twists(CONST, 2)) == pytest.approx(2.0, abs=1e-8)
    assert abs(twist_integral(frenet_framing(CIRCLE))) < 1e-10
    with pytest.raises(ValueError):
        twist_integral(CONST, 32)


@pytest.mark.parametrize("name", sorted(FRAMINGS))
@pytest.mark.parametrize("k", [-3, -2, -1, 1, 2, 3])
def test_twist_shift_identity(name, k):
    f = FRAMINGS[name]
    assert twist_integral(add_twists(f, k)) - twist_integral(f) == pytest.approx(k, abs=1e-6)


@pytest.mark.parametrize("name", sorted(FRAMINGS))
@pytest.mark.parametrize("c", [0.1, 0.37])
def test_twist_reparametrization_invariance(name, c):
    f = FRAMINGS[name]
    assert twist_integral(shift_framing(f, c)) == pytest.approx(twist_integral(f), abs=1e-8)


def test_sampled_framing_spectral_derivative():
    f = FRAMINGS["trefoil_sampled"]
    assert twist_integral(f, 256) == pytest.approx(twist_integral(FRAMINGS["trefoil_blackboard"], 256), abs=1e-8)


@pytest.mark.parametrize("curve", [TREFOIL, TORUS32])
def test_frenet_twist_equals_total_torsion(curve):
    assert abs(twist_integral(frenet_framing(curve), 2048) - total_torsion(curve, 2048)) < 1e-6


def test_total_torsion_circle_and_error():
    assert abs(total_torsion(CIRCLE)) < 1e-12
    with pytest.raises(CurvatureVanishes):
        total_torsion(WOBBLY)


def test_pushoff_examples():
    p = pushoff(CIRCLE, CONST, 0.1)
    t = geo.grid(97)
    expected = geo.evaluate(CIRCLE, t) + [0, 0, 0.1]
    np.testing.assert_allclose(geo.evaluate(p, t), expected, atol=1e-9)
    p = pushoff(CIRCLE, frenet_framing(CIRCLE), 0.1)
    np.testing.assert_allclose(np.linalg.norm(geo.evaluate(p, t), axis=1), 0.9, atol=1e-9)


def test_pushoff_collision_at_large_epsilon():
    f = projection_framing(TREFOIL, (0, 0, 1))
    # independent distance scan: the lifted copy meets the other tube strands
    t = geo.grid(1024)
    base = geo.evaluate(TREFOIL, t)
    lifted = base + 2.0 * normal(f, t)
    dmin = np.sqrt(((lifted[:, None, :] - base[None, :, :]) ** 2).sum(-1)).min()
    assert dmin <= 1.0
    with pytest.raises(PushoffCollision):
        pushoff(TREFOIL, f, 2.0)
    with pytest.raises(ValueError):
        pushoff(TREFOIL, f, 0.0)


def test_lift_class_examples():
    assert so3_lift_class(CONST) == "nontrivial"
    assert so3_lift_class(add_twists(CONST, 1)) == "trivial"


@pytest.mark.parametrize("name", sorted(FRAMINGS))
def test_lift_class_parity(name):
    f = FRAMINGS[name]
    base = so3_lift_class(f)
    other = "trivial" if base == "nontrivial" else "nontrivial"
    for k in (-3, -1, 1, 3):
        assert so3_lift_class(add_twists(f, k)) == other
    for k in (-2, 2):
        assert so3_lift_class(add_twists(f, k)) == base


@settings(max_examples=20, deadline=None)
@given(k=st.integers(-4, 4), c=st.floats(0.0, 0.99))
def test_twisted_circle_closed_form(k, c):
    f = shift_framing(add_twists(CONST, k), c)
    assert twist_integral(f, 128) == pytest.approx(k, abs=1e-8)
    assert so3_lift_class(f, 256) == ("nontrivial" if k % 2 == 0 else "trivial")


def test_framing_json_round_trip():
    f = add_twists(projection_framing(TREFOIL, (0, 0, 1)), 2)
    g = Framing.from_json(f.to_json(), TREFOIL)
    t = geo.grid(64)
    np.testing.assert_array_equal(normal(f, t), normal(g, t))
    with pytest.raises(ValueError):
        Framing.from_json({"kind": "frenet", "extra": 1}, TREFOIL)
    with pytest.raises(ValueError):
        Framing.from_json({"kind": "twisted", "twists": 1.5, "base": {"kind": "frenet"}}, TREFOIL)
