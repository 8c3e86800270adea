"""Grid relative-extremal and Green solves against closed forms."""

import numpy as np
import pytest

from pluripot.geometry import (disk_spec, annulus_spec, disk_minus_set_spec,
                               rasterize_domain)
from pluripot.capacity import staircase_set
from pluripot.envelopes import (relative_extremal, green_function, sublevel,
                                check_blocki_bounds, fit_index_certificate,
                                check_lemma21, check_lemma22, field_to_csv)


@pytest.fixture(scope="module")
def disk_grid():
    return rasterize_domain(disk_spec(0.0, 1.0), 0.02)


@pytest.fixture(scope="module")
def disk_extremal(disk_grid):
    return relative_extremal(disk_grid, (0.0, 0.5))


@pytest.fixture(scope="module")
def disk_green(disk_grid):
    return green_function(disk_grid, 0.5)


def _disk_green_exact(z, w):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.abs((z - w) / (1.0 - np.conj(w) * z)))


def test_green_matches_moebius_closed_form(disk_grid, disk_green):
    g = disk_green
    dom = disk_grid
    ins = dom.interior
    Z = dom.zgrid()
    off_pole = ins & (np.abs(Z - 0.5) > dom.spacing / 2.0)
    with np.errstate(invalid="ignore"):
        err = np.abs(g.values - _disk_green_exact(Z, 0.5 + 0j))[off_pole]
    assert err.max() < 5e-5
    assert g.values[ins].max() <= 0.0


def test_green_grid_refinement_is_second_order():
    errs = []
    for h in (0.04, 0.02):
        dom = rasterize_domain(disk_spec(0.0, 1.0), h)
        g = green_function(dom, 0.5)
        Z = dom.zgrid()
        off = dom.interior & (np.abs(Z - 0.5) > h / 2.0)
        with np.errstate(invalid="ignore"):
            errs.append(
                np.abs(g.values - _disk_green_exact(Z, 0.5 + 0j))[off].max())
    assert errs[0] / errs[1] >= 1.8


def test_extremal_matches_radial_closed_form(disk_grid, disk_extremal):
    # ball obstacle in the unit disk: rho = max(-1, log|z| / log 2)
    f = disk_extremal
    dom = disk_grid
    ins = dom.interior
    Z = dom.zgrid()
    r = np.maximum(np.abs(Z), 1e-300)
    exact = np.maximum(-1.0, np.log(r) / np.log(2.0))
    assert np.abs((f.values - exact)[ins]).max() < 1e-4
    # value_at snaps to the nearest node; query a node-aligned radius
    x_snap = dom.xs[np.argmin(np.abs(dom.xs - 0.75))]
    assert f.value_at(complex(x_snap)) == pytest.approx(
        np.log(x_snap) / np.log(2.0), abs=1e-4)
    # -1 on the obstacle, 0 outside the domain
    on_obstacle = np.abs(Z) <= 0.5
    assert f.values[on_obstacle].max() == -1.0
    assert np.abs(f.values[~ins & ~on_obstacle]).max() == 0.0


def test_extremal_field_inherits_symmetry(disk_extremal):
    v = disk_extremal.values
    assert np.max(np.abs(v - v[::-1])) < 1e-6
    assert np.max(np.abs(v - v[:, ::-1])) < 1e-6


def test_sublevel_counts_nest(disk_extremal):
    s = sublevel(disk_extremal, 0.5)
    counts = [c for _, c in s.nested]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert s.count == dict(s.nested)[s.level]
    assert s.area == pytest.approx(s.count * s.spacing ** 2)


def test_blocki_bounds_hold_on_disk(disk_grid):
    rep = check_blocki_bounds(disk_grid, 0.0, 0.2)
    assert rep["violation_lower"] <= 1e-3
    assert rep["violation_upper"] <= 1e-3
    assert rep["R"] == pytest.approx(2.0)
    # with R = delta(w) = 1 both comparisons collapse to equalities in the
    # continuum; the residual violation is the staircase error of the
    # obstacle rim, O(h/eps) on the log scale
    eq = check_blocki_bounds(disk_grid, 0.0, 0.2, R_override=1.0)
    assert abs(eq["violation_lower"]) < 0.05
    assert abs(eq["violation_upper"]) < 0.05


def test_blocki_bounds_on_slit_domain():
    dom = rasterize_domain(disk_minus_set_spec(0.0, 3.0, staircase_set(24)),
                           0.04)
    rep = check_blocki_bounds(dom, 2.0j, 0.1)
    assert rep["violation_lower"] <= 2e-3
    assert rep["violation_upper"] <= 2e-3


def test_lemma21_no_violations_with_fitted_certificate(disk_grid):
    rng = np.random.default_rng(5)
    t = rng.uniform(0, 2 * np.pi, 40)
    rr = 1.0 - 10.0 ** rng.uniform(-3, -1, 40)
    z1 = rr * np.exp(1j * t)
    z2 = z1 * np.exp(1j * 10.0 ** rng.uniform(-4, -2, 40))
    pairs = list(zip(z1, z2))
    rep = check_lemma21(disk_grid, (0.0, 0.5), 2.0, pairs)
    assert rep["n_violations"] == 0
    assert rep["eps_r"] > 0.0
    assert rep["certificate"].alpha > 0.0
    with pytest.raises(ValueError, match="no-index-certificate"):
        check_lemma21(disk_grid, (0.0, 0.5), 2.0, pairs, cert="bogus")


def test_lemma22_constant_matches_continuum(disk_grid):
    rep = check_lemma22(disk_grid, (0.0, 0.5), 0.8, 2.0)
    assert np.isfinite(rep["C"])
    assert rep["C"] >= 1.0
    assert rep["count"] > 0
    assert rep["mu"] == pytest.approx((-rep["rho_w"]) ** 1.5, rel=1e-12)
    # continuum value: {g(., 0.8) <= -1} is the Euclidean image of the
    # pseudo-hyperbolic disk of radius e^{-1}; the least -rho on it sits at
    # its far edge x = c_E + r_E with rho(x) = log(x)/log 2
    s, w = np.exp(-1.0), 0.8
    den = 1.0 - s * s * w * w
    x_far = (w * (1 - s * s) + s * (1 - w * w)) / den
    mu = (-np.log(w) / np.log(2.0)) ** 1.5
    c_exact = mu / (-np.log(x_far) / np.log(2.0))
    assert rep["C"] == pytest.approx(c_exact, rel=0.05)


def test_certificate_fit_error_path(disk_grid):
    with pytest.raises(ValueError, match="no-index-certificate"):
        fit_index_certificate(disk_grid, (0.0, 0.5), delta_cut=1e-9)


def test_envelope_error_paths(disk_grid):
    with pytest.raises(ValueError, match="obstacle-outside"):
        relative_extremal(disk_grid, (2.5, 0.2))
    with pytest.raises(ValueError, match="resolution"):
        # off-lattice center so no node falls inside the tiny ball
        relative_extremal(disk_grid, (0.0103 + 0.0071j, 0.001))
    with pytest.raises(ValueError, match="pole-near-boundary"):
        green_function(disk_grid, 0.999)


def test_field_csv_deterministic(disk_extremal):
    text = field_to_csv(disk_extremal)
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,mask,value"
    assert len(lines) == 1 + disk_extremal.values.size
    assert text == field_to_csv(disk_extremal)


def test_extremal_decreases_with_domain(disk_grid):
    # same obstacle, smaller domain: the extremal function can only go up
    ann = rasterize_domain(annulus_spec(0.25, 1.0), 0.02)
    K = (0.6, 0.1)
    f_disk = relative_extremal(disk_grid, K)
    f_ann = relative_extremal(ann, K)
    common = ann.interior
    Z = ann.zgrid()[common]
    disk_vals = np.array([f_disk.value_at(z) for z in Z[::7]])
    ann_vals = f_ann.values[common][::7]
    assert (disk_vals <= ann_vals + 1e-3).all()
    assert f_ann.values[common].min() == -1.0
    assert f_ann.values[common].max() <= 0.0
