"""Geometry layer: interval sets, rasterized domains, the profile family."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pluripot.geometry import (IntervalUnionSet, disk_spec, annulus_spec,
                               disk_minus_set_spec, polygon_spec,
                               domain_spec_from_json, rasterize_domain,
                               interior_connected, grid_to_csv,
                               circle_exit_crossing, circle_entry_crossing,
                               HartogsProfileDomain)
from pluripot.capacity import staircase_set


# ------------------------------------------------------------- interval sets

def test_interval_union_merges_overlaps():
    E = IntervalUnionSet(((0.0, 1.0), (0.5, 2.0), (3.0, 3.5)), (2.5, 0.7))
    assert E.intervals == ((0.0, 2.0), (3.0, 3.5))
    assert E.points == (2.5,)          # 0.7 is absorbed by [0, 2]
    assert E.total_length() == pytest.approx(2.5)
    assert E.contains_real(0.5) and E.contains_real(2.5)
    assert not E.contains_real(2.7)


def test_interval_union_distance_and_slicing():
    E = IntervalUnionSet(((0.0, 1.0),), (3.0,))
    assert E.distance(0.5 + 0.0j) == 0.0
    assert E.distance(2.0 + 0.0j) == pytest.approx(1.0)
    assert E.distance(1.0 + 1.0j) == pytest.approx(1.0)
    S = E.intersect_interval(0.25, 5.0)
    assert S.intervals == ((0.25, 1.0),) and S.points == (3.0,)
    assert IntervalUnionSet(((0.2, 0.4),), ()).is_subset_of(E)
    assert not E.is_subset_of(IntervalUnionSet(((0.0, 1.0),), ()))


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 2)),
                min_size=1, max_size=6),
       st.floats(-8, 8), st.floats(-8, 8))
@settings(max_examples=60, deadline=None)
def test_interval_union_distance_is_1_lipschitz(raw, x1, x2):
    E = IntervalUnionSet(tuple((a, a + w) for a, w in raw), ())
    d1, d2 = E.distance(complex(x1)), E.distance(complex(x2))
    assert abs(d1 - d2) <= abs(x1 - x2) + 1e-12


# -------------------------------------------------------- rasterized domains

def test_disk_raster_delta_and_mask():
    g = rasterize_domain(disk_spec(0.0, 1.0), 0.05)
    assert g.contains(0.0)
    assert g.delta_at(0.0) == pytest.approx(1.0, abs=g.spacing)
    assert g.delta_at(0.9) == pytest.approx(0.1, abs=g.spacing)
    assert g.diameter() == pytest.approx(2.0)
    assert interior_connected(g)
    # forced-exterior edge rings
    assert not g.mask[0].any() and not g.mask[-1].any()
    assert not g.mask[:, 0].any() and not g.mask[:, -1].any()
    # symmetry of the lattice under reflection
    assert np.array_equal(g.mask, g.mask[::-1])
    assert np.array_equal(g.mask, g.mask[:, ::-1])


def test_delta_is_lipschitz_on_annulus():
    g = rasterize_domain(annulus_spec(0.4, 1.0), 0.02)
    ins = g.interior
    Z = g.zgrid()[ins]
    d = g.delta[ins]
    rng = np.random.default_rng(3)
    idx = rng.integers(0, Z.size, size=(200, 2))
    gaps = np.abs(d[idx[:, 0]] - d[idx[:, 1]])
    dists = np.abs(Z[idx[:, 0]] - Z[idx[:, 1]])
    assert np.all(gaps <= dists + 1e-9)


def test_raster_error_paths():
    with pytest.raises(ValueError, match="resolution"):
        rasterize_domain(disk_spec(0.0, 1.0), 0.5)
    with pytest.raises(ValueError, match="empty-domain|resolution"):
        rasterize_domain(disk_spec(0.0, 0.01), 0.4)


def test_circle_crossings_exact():
    # from 0.3 walking in direction +1, the unit circle is 0.7 away
    assert circle_exit_crossing(0.3 + 0j, 1.0 + 0j, 1.0) == \
        pytest.approx(0.7, abs=1e-14)
    # from 0.5 walking toward the origin, the r=0.2 circle is 0.3 away
    assert circle_entry_crossing(0.5 + 0j, -1.0 + 0j, 0.2) == \
        pytest.approx(0.3, abs=1e-14)
    assert circle_entry_crossing(0.5 + 0j, 1.0 + 0j, 0.2) == np.inf
    assert circle_entry_crossing(0.5 + 0.5j, 1.0 + 0j, 0.2) == np.inf


def test_slit_domain_delta_pins():
    E = staircase_set(24)
    g = rasterize_domain(disk_minus_set_spec(0.0, 3.0, E), 0.02)
    # nearest removed feature to -1 is the point 0; the outer circle is 2 away
    assert g.delta_at(-1.0) == pytest.approx(1.0, abs=1e-9)
    assert g.delta_at(2.9) == pytest.approx(0.1, abs=1e-9)
    assert g.delta_at(-2.0j) == pytest.approx(1.0, abs=1e-9)
    assert interior_connected(g)


def test_polygon_and_json_round_trip():
    spec = domain_spec_from_json({"kind": "polygon",
                                  "vertices": [[0, 0], [1, 0], [1, 1],
                                               [0, 1]]})
    g = rasterize_domain(spec, 0.05)
    assert g.contains(0.5 + 0.5j)
    assert not g.contains(1.5 + 0.5j)
    assert g.delta_at(0.5 + 0.5j) == pytest.approx(0.5, abs=g.spacing)
    for doc in ({"kind": "disk", "radius": 1.0},
                {"kind": "annulus", "r": 0.3, "R": 1.0},
                {"kind": "hartogs", "s": 0.5}):
        domain_spec_from_json(doc)
    with pytest.raises(ValueError, match="unknown domain kind"):
        domain_spec_from_json({"kind": "torus"})


def test_grid_to_csv_shape_and_determinism():
    g = rasterize_domain(disk_spec(0.0, 1.0), 0.1)
    text = grid_to_csv(g)
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,mask,delta"
    assert len(lines) == 1 + g.mask.size
    assert text == grid_to_csv(g)


# ------------------------------------------------------------ profile family

def test_profile_pinch_plateau_values():
    dom = HartogsProfileDomain(0.5)
    for which, pts in (("r1", {1.0: 3.0, 1.5: 3.0 - np.sqrt(0.5), 2.0: 1.0,
                               3.5: 1.0, 5.0: 1.0, 6.0: 3.0}),
                       ("r2", {1.0: 3.0, 1.5: 3.0 + np.sqrt(0.5), 2.0: 4.0,
                               3.5: 4.0, 5.0: 4.0, 6.0: 3.0}),
                       ("c", {1.0: 0.0, 2.0: 0.0, 3.0: -1.0, 4.0: 1.0,
                              5.0: 0.0, 6.0: 0.0})):
        for x, v in pts.items():
            assert dom.profile_eval(which, x) == pytest.approx(v, abs=1e-12)


def test_profile_continuity_at_joins():
    dom = HartogsProfileDomain(0.5)
    joins = [1.5, 2.0, 3.0 - 0.2, 3.0 + 0.2, 4.0 - 0.2, 4.0 + 0.2, 5.0, 5.5]
    for which in ("r1", "r2", "c"):
        for x in joins:
            lo = dom.profile_eval(which, x - 1e-9)
            hi = dom.profile_eval(which, x + 1e-9)
            assert abs(hi - lo) < 1e-6, (which, x)


def test_profile_hole_strictly_contains_origin():
    dom = HartogsProfileDomain(0.5)
    ts = np.linspace(1.0 + 1e-6, 6.0 - 1e-6, 2001)
    r1 = dom.profile_eval("r1", ts)
    c = np.abs(dom.profile_eval("c", ts))
    # the z = 0 axis stays inside the closed hole on every fiber; within
    # ~0.01 of a cusp anchor the gap r1 - |c| falls below float64 resolution,
    # so strictness is only assertable away from the anchors
    assert np.all(c <= r1)
    assert np.all(c <= 1.0 + 1e-15)
    away = (np.abs(ts - 3.0) >= 0.01) & (np.abs(ts - 4.0) >= 0.01)
    assert np.all(c[away] < r1[away])
    assert np.all(c[away] < 1.0)


def test_fiber_membership_and_tangency():
    dom = HartogsProfileDomain(0.5)
    fib = dom.fiber(1.5)
    assert fib.is_centered_annulus()
    assert fib.area() == pytest.approx(
        np.pi * ((3 + np.sqrt(0.5)) ** 2 - (3 - np.sqrt(0.5)) ** 2))
    assert not dom.contains(0.0j, 3.0)        # tangency: 0 on the hole rim
    assert not dom.contains(0.0j, 2.5)        # 0 interior to the hole
    assert dom.contains(2.0 + 0j, 2.5)
    assert not dom.contains(2.0 + 0j, 6.5)    # |w| outside the base
    with pytest.raises(ValueError, match="fiber-range"):
        dom.fiber(6.0)
    with pytest.raises(ValueError, match="profile-range"):
        dom.profile_eval("r1", 0.5)
    with pytest.raises(ValueError, match="profile exponent"):
        HartogsProfileDomain(1.5)


def test_collar_depth_matches_cusp_formula():
    dom = HartogsProfileDomain(0.5)
    for tau in (0.1, 0.05, 0.01):
        d = dom.profile_eval("r1", 3.0 + tau) - abs(dom.profile_eval("c",
                                                                     3.0 +
                                                                     tau))
        assert d == pytest.approx(0.5 * np.exp(-2.0 * tau ** -0.5),
                                  rel=1e-12)
