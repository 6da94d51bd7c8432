import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hopf_pair
from selflink import geometry as geo
from selflink.diagram import combinatorial_linking
from selflink.errors import CoincidentPoints, CurvesIntersect, SelfIntersection
from selflink.framing import add_twists, frenet_framing, projection_framing, pushoff, twist_integral
from selflink.quadrature import (
    QuadratureConfig,
    convergence_study,
    gauss_map,
    gauss_map_extended,
    linking_integral,
    observed_orders,
    writhe_integral,
    writhe_symmetry_gap,
)

CIRCLE = geo.circle()
TREFOIL = geo.torus_knot(2, 3, 2.0, 0.5)
CFG = QuadratureConfig(512)


def test_config_validation():
    for bad in (30, 33, 64.5, True):
        with pytest.raises(ValueError):
            QuadratureConfig(bad)
    with pytest.raises(ValueError):
        QuadratureConfig(64, diagonal_policy="paste")


def test_gauss_map_examples():
    np.testing.assert_allclose(gauss_map(CIRCLE, CIRCLE, 0.0, 0.5), [-1, 0, 0], atol=1e-12)
    lifted = geo.circle(cz=1.0)
    np.testing.assert_allclose(gauss_map(CIRCLE, lifted, 0.0, 0.0), [0, 0, 1], atol=1e-12)
    with pytest.raises(CoincidentPoints):
        gauss_map(CIRCLE, CIRCLE, 0.0, 0.0)


def test_gauss_map_extended():
    np.testing.assert_allclose(gauss_map_extended(CIRCLE, 0.0, "plus"), [0, 1, 0], atol=1e-12)
    np.testing.assert_allclose(gauss_map_extended(CIRCLE, 0.0, "minus"), [0, -1, 0], atol=1e-12)
    for s in (0.1, 0.55, 0.9):
        phi = gauss_map(TREFOIL, TREFOIL, s, s + 1e-4)
        lim = gauss_map_extended(TREFOIL, s, "plus")
        assert math.acos(min(1.0, float(np.dot(phi, lim)))) < 1e-3
        phi = gauss_map(TREFOIL, TREFOIL, s, s - 1e-4)
        lim = gauss_map_extended(TREFOIL, s, "minus")
        assert math.acos(min(1.0, float(np.dot(phi, lim)))) < 1e-3


def test_linking_unlinked_and_hopf():
    far = geo.circle(cx=5.0)
    assert abs(linking_integral(CIRCLE, far, CFG).value) < 1e-6
    c0, c1 = hopf_pair()
    lk = linking_integral(c0, c1, CFG)
    oracle = combinatorial_linking(c0, c1, (0.1, 0.2, 1.0))
    assert abs(oracle) == 1
    assert abs(lk.value - oracle) < 1e-4
    assert linking_integral(c1, c0, CFG).value == pytest.approx(lk.value, abs=1e-12)
    assert linking_integral(c0, geo.reversed_curve(c1), CFG).value == pytest.approx(-lk.value, abs=1e-12)


def test_linking_with_twisted_pushoff():
    push = pushoff(CIRCLE, add_twists(projection_framing(CIRCLE, (0, 0, 1)), 3), 0.1)
    oracle = combinatorial_linking(CIRCLE, push, (0.27, 0.14, 1.0))
    assert oracle == 3
    assert abs(linking_integral(CIRCLE, push, CFG).value - oracle) < 1e-3


@settings(max_examples=10, deadline=None)
@given(offset=st.floats(10.0, 40.0), tilt=st.floats(-1.0, 1.0))
def test_separated_curves_do_not_link(offset, tilt):
    # diameter of the trefoil is 5; shift it well past a separating plane
    moved = geo.sampled(geo.evaluate(TREFOIL, geo.grid(256)) + np.array([offset * 5, tilt, 0.0]))
    assert abs(linking_integral(TREFOIL, moved, QuadratureConfig(256)).value) < 1e-6


def test_integer_consistency_with_diagram():
    # analytic pairs only: a spline-sampled partner carries its own representation error
    c0, c1 = hopf_pair()
    meridian = geo.circle(cx=2.0, ux=1.0, uy=0.0, uz=0.0, vx=0.0, vy=0.0, vz=1.0)
    pairs = [(c0, c1), (CIRCLE, geo.circle(cx=5.0)), (TREFOIL, meridian)]
    for a, b in pairs:
        res = linking_integral(a, b, CFG)
        oracle = combinatorial_linking(a, b, (0.3, -0.2, 1.0))
        if res.error_estimate < 0.1:
            assert abs(res.value - oracle) <= max(res.error_estimate, 1e-12)
    assert abs(combinatorial_linking(TREFOIL, meridian, (0.3, -0.2, 1.0))) in (2, 3)


def test_writhe_examples():
    assert abs(writhe_integral(CIRCLE, CFG).value) < 1e-8
    wr = writhe_integral(TREFOIL, CFG)
    # independent route: pushoff linking number minus twist
    f = frenet_framing(TREFOIL)
    oracle = combinatorial_linking(TREFOIL, pushoff(TREFOIL, f, 0.05), (0.27, 0.14, 1.0)) - twist_integral(f, 2048)
    assert abs(wr.value - oracle) < 1e-2
    assert wr.error_estimate > 0
    assert writhe_integral(geo.mirrored(TREFOIL), CFG).value == pytest.approx(-wr.value, abs=1e-8)


@pytest.mark.parametrize("c", [0.1, 0.37])
def test_writhe_reparametrization(c):
    a = writhe_integral(TREFOIL, CFG).value
    b = writhe_integral(geo.shifted(TREFOIL, c), CFG).value
    assert abs(a - b) < 1e-6


def test_writhe_symmetry():
    assert writhe_symmetry_gap(TREFOIL, 256) < 1e-12
    assert writhe_symmetry_gap(geo.torus_knot(3, 2, 2.0, 0.5), 256) < 1e-12


@settings(max_examples=8, deadline=None)
@given(amp=st.floats(0.0, 0.3), mode=st.integers(1, 4), ax=st.sampled_from([(1, 0, 0), (0, 1, 1), (1, 1, 1)]))
def test_mirror_antisymmetry(amp, mode, ax):
    c = geo.CurveSpec("perturbed_circle", {"amplitude": amp, "mode": mode, "axis_x": ax[0], "axis_y": ax[1], "axis_z": ax[2]})
    cfg = QuadratureConfig(128, richardson=False)
    assert writhe_integral(geo.mirrored(c), cfg).value == pytest.approx(-writhe_integral(c, cfg).value, abs=1e-8)


def test_parallel_path_is_bit_identical():
    serial = writhe_integral(TREFOIL, QuadratureConfig(256, richardson=False))
    threaded = writhe_integral(TREFOIL, QuadratureConfig(256, richardson=False, parallel=True, threads=4))
    assert serial.value == threaded.value
    c0, c1 = hopf_pair()
    a = linking_integral(c0, c1, QuadratureConfig(256, parallel=True, threads=3)).value
    b = linking_integral(c0, c1, QuadratureConfig(256)).value
    assert a == b


def test_errors():
    figure_eight = geo.sampled(
        np.stack([np.sin(2 * np.pi * geo.grid(256)), 0.5 * np.sin(4 * np.pi * geo.grid(256)), np.zeros(256)], axis=1)
    )
    with pytest.raises(SelfIntersection):
        writhe_integral(figure_eight, QuadratureConfig(256))
    with pytest.raises(CurvesIntersect):
        linking_integral(CIRCLE, CIRCLE, QuadratureConfig(64))


def test_convergence_study_hopf():
    c0, c1 = hopf_pair()
    values = convergence_study("linking", (c0, c1), [64, 128, 256, 512])
    diffs = [abs(b - a) for (_, a), (_, b) in zip(values, values[1:])]
    # the periodic trapezoid rule is spectrally accurate here: differences fall to round-off
    # and then stay there
    for a, b in zip(diffs, diffs[1:]):
        assert b <= a or b < 1e-13
    assert all(abs(v + 1) < 1e-12 for _, v in values)


def test_convergence_study_trefoil_order():
    values = convergence_study("writhe", TREFOIL, [128, 256, 512, 1024])
    orders = observed_orders(values)
    assert orders[:2] == [None, None]
    assert all(o >= 2 for o in orders[2:])


def test_convergence_study_circle_and_twist():
    assert all(abs(v) < 1e-8 for _, v in convergence_study("writhe", CIRCLE, [32, 64, 256]))
    f = add_twists(projection_framing(CIRCLE, (0, 0, 1)), 1)
    assert all(abs(v - 1) < 1e-8 for _, v in convergence_study("twist", f, [64, 128]))
    with pytest.raises(ValueError):
        convergence_study("writhe", CIRCLE, [64, 32])
    with pytest.raises(ValueError):
        convergence_study("writhe", CIRCLE, [])
    with pytest.raises(ValueError):
        convergence_study("area", CIRCLE, [64])
