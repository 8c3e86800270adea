"""Luxemburg norms, truncated kernels, collar quadrature, theta-averaging."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pluripot.geometry import HartogsProfileDomain
from pluripot.orlicz_bergman import (
    OrliczParams, SampledFunction, function_from_json, disk_samples,
    annulus_samples, rectangle_samples, hartogs_samples,
    hartogs_orbit_samples, lp_norm, luxemburg_norm, orlicz_props_check,
    disk_kernel, annulus_kernel, kernel_eval, coefficient_check,
    reproducing_check, span_density_test, sublevel_integral_scan,
    dyadic_orlicz_certifier, lemma41_integrals, rotational_average,
    contour_coefficient, laurent_tail_masses)


@pytest.fixture(scope="module")
def profile_dom():
    return HartogsProfileDomain(0.5)


@pytest.fixture(scope="module")
def unit_square():
    rng = np.random.default_rng(11)
    base = rectangle_samples(lambda z: np.ones_like(z), 0.0, 1.0, 0.0, 1.0,
                             nx=12, ny=12)
    return base, rng


# ----------------------------------------------------------- Young functions

def test_t0_is_two_for_quadratic_family():
    for q in (0.0, 1.0, 3.0):
        assert OrliczParams(2.0, q).t0 == pytest.approx(2.0, abs=1e-12)


def test_young_function_edges():
    par = OrliczParams(2.0, 1.0)
    t = np.array([0.0, 0.5, 1.0])
    assert par.young(t).tolist() == [0.0, 0.0, 0.0]
    t = np.linspace(1.0, 20.0, 50)
    assert (np.diff(par.young(t)) > 0.0).all()
    assert (par.h(np.linspace(0.0, par.t0, 20)) == 0.0).all()
    assert par.h(par.t0 + 1.0) > 0.0


def test_params_validation():
    with pytest.raises(ValueError):
        OrliczParams(0.5, 1.0)
    with pytest.raises(ValueError):
        OrliczParams(2.0, -1.0)


# ----------------------------------------------------------- Luxemburg norms

def test_q_zero_reduces_to_lp():
    rng = np.random.default_rng(3)
    f = disk_samples(lambda z: np.ones_like(z), n_r=16, n_phi=32)
    f = f.with_values(rng.normal(size=f.points.shape)
                      + 1j * rng.normal(size=f.points.shape))
    for p in (1.5, 2.0, 3.0):
        par = OrliczParams(p, 0.0)
        assert luxemburg_norm(f, par) == pytest.approx(lp_norm(f, p),
                                                       rel=1e-8)


def test_constant_function_scalar_oracle(unit_square):
    # f = e on the unit square: the norm solves (e/s)^2 log(e/s) = 1, a
    # scalar equation solved here by bisection without the module's machinery
    base, _ = unit_square
    f = base.with_values(np.full(base.points.shape, np.e))
    got = luxemburg_norm(f, OrliczParams(2.0, 1.0))
    lo, hi = 1.0, np.e
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if (np.e / mid) ** 2 * np.log(np.e / mid) > 1.0 \
            else (lo, mid)
    assert got == pytest.approx(hi, rel=1e-9)


def test_zero_function_has_zero_norm(unit_square):
    base, _ = unit_square
    f = base.with_values(np.zeros(base.points.shape))
    assert luxemburg_norm(f, OrliczParams(2.0, 1.0)) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 20.0), st.integers(0, 10 ** 6))
def test_luxemburg_homogeneity(c, seed):
    rng = np.random.default_rng(seed)
    base = rectangle_samples(lambda z: np.ones_like(z), 0.0, 1.0, 0.0, 1.0,
                             nx=8, ny=8)
    f = base.with_values(rng.normal(size=base.points.shape))
    par = OrliczParams(2.0, 1.0)
    nf = luxemburg_norm(f, par)
    ncf = luxemburg_norm(f.with_values(c * f.values), par)
    assert ncf == pytest.approx(c * nf, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_luxemburg_monotone_in_absolute_value(seed):
    rng = np.random.default_rng(seed)
    base = rectangle_samples(lambda z: np.ones_like(z), 0.0, 1.0, 0.0, 1.0,
                             nx=8, ny=8)
    v = rng.normal(size=base.points.shape)
    grow = 1.0 + rng.uniform(0.0, 1.0, size=base.points.shape)
    par = OrliczParams(2.0, 1.0)
    n_small = luxemburg_norm(base.with_values(v), par)
    n_large = luxemburg_norm(base.with_values(v * grow), par)
    assert n_small <= n_large * (1.0 + 1e-9)


def test_props_check_randomized(unit_square):
    base, rng = unit_square
    par = OrliczParams(2.0, 1.0)
    for _ in range(20):
        f = base.with_values(rng.normal(size=base.points.shape)
                             * np.exp(rng.uniform(-2, 4)))
        g = base.with_values(rng.normal(size=base.points.shape))
        rep = orlicz_props_check(f, g, complex(rng.normal(), rng.normal()),
                                 par)
        assert rep["membership"]
        assert rep["lp_domination"]["ok"]
        assert rep["homogeneity"]["ok"]
        assert rep["triangle"]["ok"]


def test_props_check_concave_range_skips_triangle(unit_square):
    base, _ = unit_square
    f = base.with_values(np.full(base.points.shape, 2.0))
    rep = orlicz_props_check(f, f, 1.0, OrliczParams(2.0, 0.5))
    assert rep["triangle"] is None
    assert rep["lp_domination"]["ok"]


def test_props_check_rejects_mismatched_grids(unit_square):
    base, _ = unit_square
    other = rectangle_samples(lambda z: np.ones_like(z), 0.0, 2.0, 0.0, 1.0,
                              nx=12, ny=12)
    with pytest.raises(ValueError, match="mismatched"):
        orlicz_props_check(base, other, 1.0, OrliczParams())


# ------------------------------------------------ fiber-family sampled norms

def test_hartogs_volume_against_profile_integral(profile_dom):
    f = hartogs_samples(profile_dom, {"kind": "monomial", "m": 0})
    # independent volume: 2 pi t times the fiber area, Gauss-Legendre in t
    from pluripot._quad import panel_points
    t, wt = panel_points(np.linspace(1.0, 6.0, 401), 6)
    r1 = np.array([profile_dom.profile_eval("r1", ti) for ti in t])
    r2 = np.array([profile_dom.profile_eval("r2", ti) for ti in t])
    vol = float(np.sum(wt * 2.0 * np.pi * t * np.pi * (r2 ** 2 - r1 ** 2)))
    assert f.area == pytest.approx(vol, rel=1e-4)
    assert f.weights.min() > 0.0


def test_reciprocal_tail_certificate(profile_dom):
    f = hartogs_samples(profile_dom, {"kind": "reciprocal_z"})
    assert f.meta["singular_tail"]["kind"] == "reciprocal_z"
    # 1/s - 1 = 1 at s = 1/2: the norm exists below, diverges at and above
    for q in (1.0, 1.5):
        with pytest.raises(ValueError, match="not-in-orlicz"):
            luxemburg_norm(f, OrliczParams(2.0, q))
    n = luxemburg_norm(f, OrliczParams(2.0, 0.5))
    assert np.isfinite(n) and n > 1.0


def test_truncated_reciprocal_has_finite_norm(profile_dom):
    # same integrand but sampled without the certificate: stays finite
    f = hartogs_samples(profile_dom,
                        lambda z: 1.0 / np.asarray(z, dtype=np.complex128))
    assert f.meta is None
    n = luxemburg_norm(f, OrliczParams(2.0, 1.0))
    assert np.isfinite(n)


def test_function_from_json_kinds():
    z = np.array([2.0 + 1.0j, -0.5j])
    f, tail = function_from_json({"kind": "reciprocal_z"})
    assert tail == "reciprocal_z"
    assert np.allclose(f(z), 1.0 / z)
    f, tail = function_from_json({"kind": "monomial", "m": 3})
    assert tail is None
    assert np.allclose(f(z), z ** 3)
    f, _ = function_from_json(
        {"kind": "laurent", "coeffs": {"-1": [0.0, 2.0], "2": 1.0}})
    assert np.allclose(f(z), 2j / z + z ** 2)
    with pytest.raises(ValueError, match="unknown function kind"):
        function_from_json({"kind": "sine"})


def test_sampled_function_validation():
    with pytest.raises(ValueError, match="share a shape"):
        SampledFunction(points=np.zeros(3, dtype=complex),
                        weights=np.ones(2), values=np.zeros(3), area=1.0)
    with pytest.raises(ValueError, match="positive"):
        SampledFunction(points=np.zeros(2, dtype=complex),
                        weights=np.array([1.0, 0.0]), values=np.zeros(2),
                        area=1.0)


# ----------------------------------------------------------- Bergman kernels

def test_disk_kernel_matches_closed_form():
    K = disk_kernel(M=60)
    rng = np.random.default_rng(7)
    # |z w| <= 0.56 keeps the truncation tail (m+1)|zw|^m below 1e-13
    z = rng.uniform(0.05, 0.75, 40) * np.exp(1j * rng.uniform(0, 2 * np.pi, 40))
    w = rng.uniform(0.05, 0.75, 40) * np.exp(1j * rng.uniform(0, 2 * np.pi, 40))
    got = np.array([kernel_eval(K, zi, wi) for zi, wi in zip(z, w)])
    exact = 1.0 / (np.pi * (1.0 - z * np.conj(w)) ** 2)
    assert np.abs(got - exact).max() < 1e-12


def test_kernel_hermitian_and_positive():
    for K in (disk_kernel(M=40), annulus_kernel(0.5, M=60)):
        zs = (0.55 + 0.1j, 0.7 - 0.3j, 0.62j) if K.kind == "disk" else \
            (0.6 + 0.1j, 0.8 - 0.2j, -0.7j)
        for z in zs:
            for w in zs:
                assert kernel_eval(K, z, w) == pytest.approx(
                    np.conj(kernel_eval(K, w, z)), abs=1e-13)
            assert np.real(kernel_eval(K, z, z)) > 0.0


def test_coefficients_match_quadrature():
    assert coefficient_check(disk_kernel(M=60)) < 1e-12
    assert coefficient_check(annulus_kernel(0.5, M=120)) < 1e-12
    assert coefficient_check(annulus_kernel(0.3, M=80)) < 1e-12


def test_auto_doubling_picks_stable_truncation():
    K = disk_kernel()
    assert K.M >= 16
    K2 = annulus_kernel(0.5)
    assert K2.M >= 16
    assert K2.coeffs.shape == K2.m_values.shape


def test_reproducing_identity_in_span():
    K = disk_kernel(M=60)
    f = {"kind": "laurent", "coeffs": {"0": 1.0, "3": [0.0, -0.5], "7": 2.0}}
    assert reproducing_check(K, f) < 1e-10
    Ka = annulus_kernel(0.5, M=60)
    fa = {"kind": "laurent", "coeffs": {"-3": 1.0, "-1": [1.0, 1.0], "2": 0.5}}
    assert reproducing_check(Ka, fa) < 1e-10


def test_reproducing_negative_control():
    # a monomial past the truncation order must NOT be reproduced
    K = disk_kernel(M=60)
    f = {"kind": "monomial", "m": K.M + 5}
    assert reproducing_check(K, f, w_list=(0.95 + 0j,)) > 1e-3


def test_span_residuals_shrink_with_more_poles():
    K = disk_kernel(M=40)
    f = {"kind": "laurent", "coeffs": {"1": 1.0, "4": 0.7, "9": [0.0, 1.0]}}
    poles = [0.75 * np.exp(2j * np.pi * k / 12) for k in range(12)]
    rep = span_density_test(K, f, poles)
    assert rep["monotone"]
    assert rep["residuals"][-1] < rep["residuals"][0] / 3.0


def test_span_gram_ridge_flag():
    K = disk_kernel(M=40)
    f = {"kind": "monomial", "m": 2}
    poles = [0.5, 0.5, 0.5 + 1e-14, 0.3]  # near-duplicate poles
    rep = span_density_test(K, f, poles, sizes=[4])
    assert "ridge" in rep["flags"]


def test_span_rejects_out_of_range_sizes():
    K = disk_kernel(M=20)
    with pytest.raises(ValueError, match="sizes"):
        span_density_test(K, {"kind": "monomial", "m": 1}, [0.5, 0.6],
                          sizes=[3])
    with pytest.raises(ValueError, match="truncated span"):
        span_density_test(K, {"kind": "monomial", "m": 50}, [0.5, 0.6])


# --------------------------------------------------- sublevel scan, certifier

def test_scan_matches_boundary_shell_closed_form():
    # rho = log|z| on the disk, pole at 0: K(., 0) = 1/pi, so
    # I(eps) = (1 - e^{-2 eps}) / pi exactly
    K = disk_kernel(M=40)
    eps = [2.0 ** -k for k in range(2, 9)]
    rep = sublevel_integral_scan(
        K, lambda z: np.log(np.abs(z)), 0j, eps)
    for row in rep["rows"]:
        # the shell boundary cuts through radial panels; the snap error
        # grows to a few percent once the shell is thinner than the local
        # panel width
        exact = (1.0 - np.exp(-2.0 * row["eps"])) / np.pi
        assert row["value"] == pytest.approx(exact, rel=0.05)
    assert 0.85 < rep["r_hat"] < 1.0
    assert rep["C_fit"] > 0.0
    assert rep["n_used"] == len(eps)


def test_scan_range_error():
    K = disk_kernel(M=20)
    with pytest.raises(ValueError, match="scan-range"):
        sublevel_integral_scan(K, lambda z: np.log(np.abs(z)), 0j,
                               [1.5, 2.0, 3.0, 0.25])


def test_certifier_verdict_is_sign_exact():
    for q in (0.3, 0.9, 1.5, 2.2):
        for alpha in (0.5, 1.0, 1.7):
            for r in (0.4, 1.1):
                rep = dyadic_orlicz_certifier((2.0, alpha, r), q)
                want = "converges" if q < alpha * r else "diverges"
                assert rep["verdict"] == want
                assert np.isfinite(rep["tail_bound"]) == (want == "converges")
    # the boundary case q = alpha r is a divergent harmonic-type sum
    assert dyadic_orlicz_certifier((1.0, 2.0, 0.5), 1.0)["verdict"] == \
        "diverges"
    with pytest.raises(ValueError):
        dyadic_orlicz_certifier((1.0, -2.0, 0.5), 1.0)
    with pytest.raises(ValueError):
        dyadic_orlicz_certifier((1.0, 2.0, 0.5), 1.0, k0=10, k_max=5)


# ------------------------------------------------------- collar integrals

@pytest.mark.parametrize("q,label", [(2.0, "power-divergent"),
                                     (1.0, "log-divergent"),
                                     (0.5, "bounded")])
def test_collar_integrals_classify_regimes(profile_dom, q, label):
    # the slope classifier separates ~1/log(1/eps) from a real power only
    # once eps reaches deep into the collar
    eps = [2.0 ** -k for k in range(10, 41, 2)]
    rep = lemma41_integrals(profile_dom, q, eps)
    assert rep["classification"] == label
    assert rep["increment_exponent"] == pytest.approx(
        rep["predicted_increment_exponent"], abs=0.05)
    assert rep["minorant_ok"]
    assert rep["majorant_ok"]
    assert rep["J_variation"] < 1e-6
    assert len(rep["L"]) == len(eps)
    assert all(b >= a for a, b in zip(rep["L"], rep["L"][1:]))


def test_collar_integral_errors(profile_dom):
    with pytest.raises(ValueError, match=r"eps_list must lie in \(0, 0.5\]"):
        lemma41_integrals(profile_dom, 2.0, [0.7, 0.01, 0.001])
    with pytest.raises(ValueError, match="below the transition width"):
        lemma41_integrals(profile_dom, 2.0, [0.5, 0.4])
    with pytest.raises(ValueError, match="q must be"):
        lemma41_integrals(profile_dom, -1.0, [0.01, 0.001])


# ------------------------------------------------------------ theta-averaging

@pytest.fixture(scope="module")
def orbit_samples(profile_dom):
    return hartogs_orbit_samples(profile_dom,
                                 lambda z, w: np.abs(z) + 0.5 * w,
                                 n_theta=8)


def test_rotational_average_kills_w_harmonics(orbit_samples):
    avg = rotational_average(orbit_samples, 8)
    # the 0.5 w part has zero mean on every orbit; |z| survives untouched
    assert np.abs(avg.values - np.abs(orbit_samples.points)).max() < 1e-12
    # idempotent
    again = rotational_average(avg, 8)
    assert np.array_equal(again.values, avg.values)


def test_rotational_average_contracts_l2(orbit_samples):
    avg = rotational_average(orbit_samples, 8)
    l2_avg = np.sum(orbit_samples.weights * np.abs(avg.values) ** 2)
    l2_raw = np.sum(orbit_samples.weights
                    * np.abs(orbit_samples.values) ** 2)
    assert l2_avg <= l2_raw * (1.0 + 1e-12)


def test_rotational_average_grid_mismatch(orbit_samples, unit_square):
    base, _ = unit_square
    with pytest.raises(ValueError, match="grid-mismatch"):
        rotational_average(base, 8)
    with pytest.raises(ValueError, match="grid-mismatch"):
        rotational_average(orbit_samples, 16)


# --------------------------------------------------------- contour extraction

def test_contour_coefficient_exact_for_laurent():
    assert contour_coefficient(lambda z: 1.0 / z, -1) == pytest.approx(
        1.0, abs=1e-12)
    f = lambda z: z ** 2 + 5.0 / z ** 3
    assert contour_coefficient(f, -3) == pytest.approx(5.0, abs=1e-12)
    assert contour_coefficient(f, 2) == pytest.approx(1.0, abs=1e-12)
    assert contour_coefficient(f, 0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError, match="n_theta"):
        contour_coefficient(lambda z: z, 0, n_theta=32)


def test_laurent_tail_masses_verdicts():
    assert laurent_tail_masses(0.5, -2)["verdict"] == "divergent"
    assert laurent_tail_masses(0.5, -1)["verdict"] == "integrable"
    assert laurent_tail_masses(0.5, 0)["verdict"] == "integrable"
    rep = laurent_tail_masses(0.5, -3)
    assert rep["verdict"] == "divergent"
    assert np.all(np.diff(rep["log_masses"][-4:]) > 0.0)
