import numpy as np
import pytest
from hypothesis import given, strategies as st

from nfisac.geometry_channel import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    CarrierSpec,
    MultipathComponent,
    absorption_coefficient,
    channel_from_components,
    half_wavelength_ula,
    make_carrier,
    near_field_distance,
    path_loss_db,
    perturb_csi,
    polar_point,
    rayleigh_boundary,
    steering_matrix,
    steering_vector,
    synthesize_channel,
)


def test_rayleigh_trivial():
    assert rayleigh_boundary(0.0, 0.003) == 0.0
    assert rayleigh_boundary(1.0, 2.0) == 1.0


def test_rayleigh_128_elements_28ghz():
    # 2 D^2 / lambda with D = 127 lambda / 2 reduces to 127^2 lambda / 2
    c = make_carrier(28e9)
    arr = half_wavelength_ula(128, c)
    assert rayleigh_boundary(arr.aperture, c.wavelength) == pytest.approx(86.34558134075, rel=1e-12)


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_rayleigh_bad_wavelength(lam):
    with pytest.raises(ValueError):
        rayleigh_boundary(1.0, lam)


def test_near_field_distance():
    assert near_field_distance([0, 0, 0], [3, 4, 0]) == pytest.approx(5.0)
    assert near_field_distance([0, 2, 0], [0, 2, 0]) == 0.0
    assert near_field_distance([0, 1, 0], [1, 2, 2]) == pytest.approx(2.449489742783178, rel=1e-14)


def test_single_element_steering():
    c = make_carrier(28e9)
    a = steering_vector(ArrayGeometry(1, 0.0), [5.0, 0.0, 0.0], c)
    assert abs(abs(a[0]) - 1.0) < 1e-15


def test_steering_symmetric_pairs():
    c = make_carrier(60e9)
    arr = half_wavelength_ula(9, c)
    a = steering_vector(arr, [2.0, 0.0, 0.0], c)
    np.testing.assert_allclose(a, a[::-1], rtol=0, atol=1e-14)


def test_steering_brute_force():
    c = make_carrier(28e9)
    arr = half_wavelength_ula(4, c)
    p = np.array([1.0, 0.5, 0.0])
    k0 = 2 * np.pi * 28e9 / SPEED_OF_LIGHT
    d = SPEED_OF_LIGHT / 28e9 / 2
    want = []
    for n in range(4):
        y = (n - 1.5) * d
        r = np.sqrt(1.0 + (0.5 - y) ** 2)
        want.append(np.exp(-1j * k0 * r) / 2)
    np.testing.assert_allclose(steering_vector(arr, p, c), want, rtol=1e-12)


@given(st.integers(1, 64), st.floats(0.5, 200.0), st.floats(-89.0, 89.0))
def test_steering_unit_norm(n, r, az):
    c = make_carrier(100e9)
    a = steering_vector(half_wavelength_ula(n, c), polar_point(r, az), c)
    assert np.linalg.norm(a) == pytest.approx(1.0, rel=1e-12)


def test_path_loss_trivial():
    c = CarrierSpec(SPEED_OF_LIGHT / (4 * np.pi))
    assert path_loss_db(1.0, c) == pytest.approx(0.0, abs=1e-12)


def test_path_loss_300ghz_absorption():
    c = CarrierSpec(300e9, absorption_db_per_m=0.1)
    assert path_loss_db(100.0, c) == pytest.approx(131.9902083162766, rel=1e-12)


@pytest.mark.parametrize("d", [0.0, -3.0])
def test_path_loss_domain(d):
    with pytest.raises(ValueError):
        path_loss_db(d, make_carrier(28e9))


def test_absorption_lookup_interpolates_and_clamps():
    table = {28.0: 1.0, 60.0: 3.0}
    assert absorption_coefficient(44e9, table) == pytest.approx(2.0)
    assert absorption_coefficient(10e9, table) == 1.0
    assert absorption_coefficient(500e9, table) == 3.0


def test_single_path_outer_product():
    c = make_carrier(28e9)
    tx, rx = half_wavelength_ula(6, c), half_wavelength_ula(3, c, (5.0, 1.0, 0.0))
    comp = MultipathComponent(1.0 + 0j, np.array(rx.center), np.array(tx.center))
    h = channel_from_components(tx, rx, c, [comp], 0.0)
    want = np.outer(steering_vector(rx, tx.center, c), steering_vector(tx, rx.center, c).conj())
    np.testing.assert_allclose(h.entries, want, atol=1e-15)


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_rank_at_most_paths(paths, seed):
    c = make_carrier(100e9)
    tx, rx = half_wavelength_ula(8, c), half_wavelength_ula(8, c, (20.0, 3.0, 0.0))
    h = synthesize_channel(tx, rx, c, paths, 20.2, np.random.default_rng(seed), shadow_db=0.0)
    s = np.linalg.svd(h.entries, compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) <= paths


def test_two_path_double_loop_oracle():
    c = make_carrier(28e9)
    tx, rx = half_wavelength_ula(2, c), half_wavelength_ula(2, c, (4.0, 1.0, 0.0))
    h = synthesize_channel(tx, rx, c, 2, 4.1, np.random.default_rng(7), shadow_db=1.5)
    k0 = 2 * np.pi / c.wavelength
    amp = 10 ** (-h.path_loss_db / 20)
    want = np.zeros((2, 2), dtype=complex)
    for i, pr in enumerate(rx.element_positions):
        for j, pt in enumerate(tx.element_positions):
            for comp in h.components:
                r_rx = np.linalg.norm(comp.aoa_focal_point - pr)
                r_tx = np.linalg.norm(comp.aod_focal_point - pt)
                want[i, j] += comp.gain * np.exp(-1j * k0 * r_rx) * np.exp(1j * k0 * r_tx) / 2
    # phases of ~2e3 rad carry ~1e-12 relative rounding
    np.testing.assert_allclose(h.entries, amp * want, rtol=1e-9)


def test_csi_zero_error(rng):
    h = rng.standard_normal((3, 3)) + 0j
    np.testing.assert_array_equal(perturb_csi(h, 0.0, rng).estimate, h)


@given(st.floats(1e-6, 10.0), st.integers(0, 2**31))
def test_csi_error_inside_ball(eps, seed):
    r = np.random.default_rng(seed)
    h = r.standard_normal((4, 4)) + 1j * r.standard_normal((4, 4))
    e = h - perturb_csi(h, eps, r).estimate
    assert np.vdot(e, e).real <= eps


def test_csi_monte_carlo_bound(rng):
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    worst = max(float(np.linalg.norm(h - perturb_csi(h, 0.01, rng).estimate) ** 2) for _ in range(1000))
    assert worst <= 0.01


def test_csi_negative_eps():
    with pytest.raises(ValueError):
        perturb_csi(np.eye(2), -1.0, np.random.default_rng(0))


def test_bad_carrier_and_array():
    with pytest.raises(ValueError):
        make_carrier(0.0)
    with pytest.raises(ValueError):
        ArrayGeometry(0, 1.0)


def test_steering_matrix_columns_match_vectors():
    c = make_carrier(220e9)
    arr = half_wavelength_ula(8, c)
    pts = np.array([polar_point(3.0, 10.0), polar_point(7.0, -40.0)])
    m = steering_matrix(arr, pts, c)
    for i, p in enumerate(pts):
        np.testing.assert_allclose(m[:, i], steering_vector(arr, p, c))
