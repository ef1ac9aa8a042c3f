import math

import numpy as np
import pytest

import oracles
from lamcert.curves import (
    ChainEvaluator,
    HybridCurve,
    MultiCurve,
    ThickSegment,
    TubeSegment,
    cap_and_tighten,
    core_path,
    curve_length,
    k_functional,
    minimal_cap,
    multicurve_length,
    shorten_deep_multicurve,
    thick_length,
    tighten_in_tube,
    validate_curve,
)
from lamcert.errors import HypothesisError, InputError
from lamcert.tube import LOG4, TWO_PI, TubeShape, path_length

TUBE = TubeShape(0.1, 1.0, 3.0)


def radial_dip(theta: float, z: float, r_low: float, radius: float = 3.0):
    return np.array(
        [[radius, theta, z], [r_low, theta, z], [radius, theta, z]]
    )


def test_segment_validation():
    with pytest.raises(InputError):
        ThickSegment("a", -1.0)
    with pytest.raises(InputError):
        ThickSegment("a", math.nan)
    with pytest.raises(InputError):
        TubeSegment("t", np.array([[1.0, 0.0, 0.0]]))
    seg = TubeSegment("t", [[3.0, 0.0, 0.0], [3.0, 1.0, 0.5]])
    assert seg.z_displacement == 0.5
    assert not seg.path.flags.writeable
    with pytest.raises(InputError):
        HybridCurve(())
    with pytest.raises(InputError):
        HybridCurve(("nope",))
    with pytest.raises(InputError):
        MultiCurve(((HybridCurve((ThickSegment("a", 1.0),)), 0),))
    assert MultiCurve().components == ()


def test_validate_curve():
    good = HybridCurve((TubeSegment("t", radial_dip(0.0, 0.0, 1.0)),))
    validate_curve(good, {"t": TUBE})
    with pytest.raises(InputError):
        validate_curve(good, {})
    inside = HybridCurve(
        (TubeSegment("t", [[2.0, 0.0, 0.0], [3.0, 1.0, 0.0]]),)
    )
    with pytest.raises(InputError):
        validate_curve(inside, {"t": TUBE})
    outside = HybridCurve(
        (TubeSegment("t", [[3.0, 0.0, 0.0], [3.5, 1.0, 0.0], [3.0, 2.0, 0.0]]),)
    )
    with pytest.raises(InputError):
        validate_curve(outside, {"t": TUBE})


def test_lengths_and_weights():
    curve = HybridCurve(
        (
            ThickSegment("a", 2.0),
            TubeSegment("t", radial_dip(0.0, 0.0, 0.5)),
        )
    )
    tubes = {"t": TUBE}
    assert curve_length(curve, tubes) == pytest.approx(7.0, rel=1e-12)
    # clipping at radius 1 removes the two [0.5, 1] radial runs
    assert thick_length(curve, tubes, {"t": 1.0}) == pytest.approx(6.0, rel=1e-12)
    assert thick_length(curve, tubes, {}) == pytest.approx(7.0, rel=1e-12)
    mc = MultiCurve(((curve, 2), (curve, -1)))
    assert multicurve_length(mc, tubes) == pytest.approx(21.0, rel=1e-12)
    assert multicurve_length(mc, tubes, interfaces={"t": 1.0}) == pytest.approx(
        18.0, rel=1e-12
    )
    with pytest.raises(InputError):
        curve_length(curve, {})


def test_clip_keeps_entering_and_leaving_pieces():
    enter = HybridCurve(
        (TubeSegment("t", [[0.5, 0.0, 0.0], [3.0, 0.0, 0.0]]),)
    )
    assert thick_length(enter, {"t": TUBE}, {"t": 1.0}) == pytest.approx(
        2.0, rel=1e-12
    )


def test_chain_evaluator_linearity_and_cancellation():
    ev = ChainEvaluator((2.0, -1.0), {"t": 3.0})
    thick = ThickSegment("a", 1.0, (1, 4))
    fwd = TubeSegment("t", [[3.0, 0.0, 0.0], [3.0, 0.7, 0.31]])
    rev = TubeSegment("t", [[3.0, 5.0, 2.0], [3.0, 5.0 - 0.7, 2.0 - 0.31]])
    assert ev.of_curve(HybridCurve((thick,))) == -2.0
    assert ev.of_curve(HybridCurve((fwd,))) == pytest.approx(3.0 * 0.31)
    # a cap inserted forward and reversed cancels exactly, not just approximately
    both = HybridCurve((thick, fwd, rev))
    assert ev.of_curve(both) == ev.of_curve(HybridCurve((thick,)))
    mc = MultiCurve(((HybridCurve((thick,)), 2), (HybridCurve((fwd,)), -1)))
    assert ev.of_multicurve(mc) == pytest.approx(2 * -2.0 - 3.0 * 0.31)
    with pytest.raises(InputError):
        ev.of_curve(HybridCurve((ThickSegment("short", 1.0, (1,)),)))


def test_k_functional():
    tubes = {"t": TUBE}
    ev = ChainEvaluator((2.0,))
    assert k_functional(ev, MultiCurve(), tubes) == 0.0

    curve = HybridCurve(
        (
            ThickSegment("a", 2.0, (1,)),
            TubeSegment("t", radial_dip(0.0, 0.0, 0.5)),
        )
    )
    mc = MultiCurve(((curve, 1),))
    assert k_functional(ev, mc, tubes) == pytest.approx(2.0 / 7.0, rel=1e-12)
    thick = k_functional(ev, mc, tubes, thick=True, interfaces={"t": 1.0})
    assert thick == pytest.approx(2.0 / 6.0, rel=1e-12)
    # discarding thin length can only help a positive ratio
    assert thick >= k_functional(ev, mc, tubes)
    with pytest.raises(InputError):
        k_functional(ev, mc, tubes, thick=True)
    zero_len = MultiCurve(((HybridCurve((ThickSegment("z", 0.0, (1,)),)), 1),))
    with pytest.raises(InputError):
        k_functional(ev, zero_len, tubes)
    ok = ChainEvaluator((0.0,))
    assert k_functional(ok, zero_len, tubes) == 0.0


def test_core_path():
    assert np.array_equal(core_path(TUBE, 0), [[0.0, 0.0, 0.0]])
    path = core_path(TUBE, -3)
    assert path_length(path) == pytest.approx(0.3, rel=1e-12)
    with pytest.raises(InputError):
        core_path(TUBE, 1.5)


def test_tighten_free_class_is_exact_core():
    start = np.array([1.0, 0.2, 0.0])
    k = 3
    end = start + np.array([0.0, k * TUBE.twist + TWO_PI, k * TUBE.core_length])
    mid = np.array([2.5, 1.0, 0.1])
    res = tighten_in_tube(TUBE, np.vstack([start, mid, end]), "free-class")
    assert res.converged
    assert res.length == pytest.approx(k * TUBE.core_length, abs=1e-15)
    assert np.array_equal(res.path, core_path(TUBE, k))
    # trivial class collapses to a point
    triv = tighten_in_tube(
        TUBE, np.vstack([start, mid, start + [0.0, TWO_PI, 0.0]]), "free-class"
    )
    assert triv.length == 0.0
    with pytest.raises(InputError):
        tighten_in_tube(TUBE, np.vstack([start, mid]), "free-class")
    with pytest.raises(InputError):
        tighten_in_tube(TUBE, np.vstack([start, mid, end]), "no-such-mode")


def test_tighten_fixed_endpoints_matches_closed_form():
    tube = TubeShape(0.08, 0.7, 3.0)
    p = (2.0, 0.0, 0.0)
    q = (2.0, 1.0, 0.6)
    want = oracles.fermi_distance(p, q)
    res = tighten_in_tube(tube, np.array([p, q]), max_vertices=256)
    assert res.length == pytest.approx(want, rel=1e-4)
    assert res.length >= want - 1e-9  # discrete path cannot beat the geodesic
    # a second pass changes nothing measurable
    again = tighten_in_tube(tube, res.path, max_vertices=256)
    assert again.length == pytest.approx(res.length, rel=1e-6)
    with pytest.raises(InputError):
        tighten_in_tube(tube, np.array([[4.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))


def test_minimal_cap_hand_cases():
    tube = TubeShape(0.3, 2.1, 2.0)
    cap = minimal_cap(tube, (0.5, 0.1), (0.7, 0.15))
    assert cap.winding == 0
    assert cap.dtheta == pytest.approx(0.2, rel=1e-12)
    assert cap.dz == pytest.approx(0.05, rel=1e-12)
    assert cap.length == pytest.approx(0.7493663641806658, rel=1e-12)
    same = minimal_cap(tube, (1.0, 0.2), (1.0, 0.2))
    assert same.length == 0.0 and same.winding == 0
    # a full meridian of displacement is undone by a deck translation
    around = minimal_cap(tube, (0.0, 0.0), (TWO_PI, 0.0))
    assert around.length == pytest.approx(0.0, abs=1e-9)


def test_minimal_cap_matches_brute_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(40):
        eps = float(rng.uniform(0.05, 0.6))
        tw = float(rng.uniform(0.0, 6.2))
        radius = float(rng.uniform(0.8, 3.0))
        tube = TubeShape(eps, tw, radius)
        a = (float(rng.uniform(-9, 9)), float(rng.uniform(-3, 3)))
        b = (float(rng.uniform(-9, 9)), float(rng.uniform(-3, 3)))
        cap = minimal_cap(tube, a, b)
        want_len, want_j, _ = oracles.brute_min_cap(
            eps, tw, radius, b[0] - a[0], b[1] - a[1]
        )
        assert cap.length == pytest.approx(want_len, rel=1e-9, abs=1e-12)
        assert cap.winding == want_j
        # reported displacement reproduces the reported length
        sh, ch = math.sinh(radius), math.cosh(radius)
        assert math.hypot(cap.dtheta * sh, cap.dz * ch) == pytest.approx(
            cap.length, rel=1e-9, abs=1e-12
        )


def test_cap_and_tighten_radial_spike():
    spike = radial_dip(0.5, 0.2, 0.0)
    res = cap_and_tighten(TUBE, spike, 2.0 * LOG4)
    assert res.cap_length == 0.0
    assert res.winding == 0 and res.core_length == 0.0
    assert res.sigma_length == pytest.approx(6.0, rel=1e-12)
    assert res.margin == pytest.approx(6.0 - LOG4 / 2.0, rel=1e-12)
    # tube too small for the depth bound, so no guarantee is claimed
    assert not res.certified
    assert res.notes == (
        "inequality not guaranteed: radius below depth bound + log 4",
    )


def test_cap_and_tighten_certified():
    tube = TubeShape(0.1, 1.0, 4.5)
    arc = np.array([[4.5, 0.0, 0.0], [0.5, 0.3, 0.05], [4.5, 0.6, 0.10]])
    res = cap_and_tighten(tube, arc, 2.0 * LOG4)
    assert res.certified and res.notes == ()
    assert res.winding == 1
    assert res.margin == pytest.approx(19.677019863476737, rel=1e-9)
    assert res.margin >= 0.0
    shallow = np.array([[4.5, 0.0, 0.0], [4.0, 0.3, 0.05], [4.5, 0.6, 0.10]])
    res2 = cap_and_tighten(tube, shallow, 2.0 * LOG4)
    assert not res2.certified
    assert res2.notes == (
        "inequality not guaranteed: arc not deeper than depth bound",
    )
    with pytest.raises(InputError):
        cap_and_tighten(tube, np.array([[2.0, 0.0, 0.0], [4.5, 1.0, 0.0]]), 1.0)


# A tube deep enough for honest shortening hypotheses: the core must be very
# short for the boundary torus to have a small covering radius at this depth.
DEEP = TubeShape(1e-7, 1.75, 6.0)


def shortening_fixture():
    deep = TubeSegment(
        "deep",
        np.array(
            [[6.0, 0.0, 0.0], [1.0, 0.4, 0.02], [6.0, 0.8, 0.045]]
        ),
    )
    shallow = TubeSegment(
        "deep",
        np.array(
            [[6.0, 3.0, 0.10], [5.0, 3.2, 0.11], [6.0, 3.4, 0.12]]
        ),
    )
    curve = HybridCurve(
        (
            ThickSegment("t1", 5.0, (1,)),
            deep,
            ThickSegment("t2", 4.0, (0,)),
            shallow,
        )
    )
    return curve, {"deep": DEEP}


def test_shortening_passthrough_without_deep_strands():
    curve, tubes = shortening_fixture()
    res = shorten_deep_multicurve(curve, tubes, 5.5)
    assert len(res.multicurve.components) == 1
    assert res.multicurve.components[0][0] is curve
    assert res.ledger.tubes == () and res.ledger.loops == ()
    assert res.ledger.savings == 0.0


def test_shortening_cuts_deep_strand():
    curve, tubes = shortening_fixture()
    before = curve_length(curve, tubes)
    res = shorten_deep_multicurve(curve, tubes, 4.2)
    led = res.ledger

    assert led.length_before == pytest.approx(before, rel=1e-12)
    assert led.length_after < led.length_before
    assert led.savings == pytest.approx(35.92516032961207, rel=1e-9)
    assert multicurve_length(res.multicurve, tubes) == pytest.approx(
        led.length_after, rel=1e-12
    )

    (cut,) = led.tubes
    assert cut.tube_id == "deep"
    assert cut.strands_cut == 1 and cut.crossings == 2
    assert cut.net_chain_added == 0 and cut.trivial_loops_dropped == 0
    assert cut.cap_lengths == (pytest.approx(0.09939284103142614, rel=1e-9),)

    (loop,) = led.loops
    assert loop.strand_count == 1
    assert loop.winding == 454781
    assert loop.core_length == pytest.approx(loop.winding * 1e-7, rel=1e-12)
    assert loop.sigma_length > loop.core_length

    # thick trace is untouched
    assert sorted(
        label for c, _ in res.multicurve.components for label in c.thick_labels()
    ) == sorted(curve.thick_labels())
    # homology bookkeeping nets to zero across the cut
    ev = ChainEvaluator((2.0,), {"deep": 3.0})
    assert ev.of_multicurve(res.multicurve) == pytest.approx(
        ev.of_curve(curve), abs=1e-9
    )


def test_shortening_hypothesis_errors():
    curve, tubes = shortening_fixture()
    with pytest.raises(HypothesisError, match="2 log 4"):
        shorten_deep_multicurve(curve, tubes, 2.0)
    # same depth bound, but a fat-boundary tube: diameter domination fails
    fat = {"deep": TubeShape(0.3, 1.0, 6.0)}
    fat_curve = HybridCurve(
        (
            ThickSegment("t1", 5.0),
            TubeSegment(
                "deep", np.array([[6.0, 0.0, 0.0], [1.0, 0.4, 0.02], [6.0, 0.8, 0.045]])
            ),
        )
    )
    with pytest.raises(HypothesisError, match="8 \\* diameter"):
        shorten_deep_multicurve(fat_curve, fat, 4.2)
    # depth bound crowding the radius: the clearance hypothesis fails
    with pytest.raises(HypothesisError, match="radius not above"):
        shorten_deep_multicurve(curve, tubes, 4.8)
    with pytest.raises(InputError):
        shorten_deep_multicurve(curve, tubes, -1.0)
