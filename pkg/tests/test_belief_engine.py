import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nfisac import belief_engine as be
from nfisac import kernels

BACKENDS = ["python"] + (["compiled"] if kernels.compiled_backend is not None else [])


@pytest.fixture(params=BACKENDS, autouse=True)
def backend(request, monkeypatch):
    impl = kernels.python_backend if request.param == "python" else kernels.compiled_backend
    for name in ("gaussian_kernel", "predict_reflect", "posterior_update", "entropy_bits"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


P = be.BeliefHyperparams()
probs_strategy = arrays(np.float64, st.integers(2, 200), elements=st.floats(0, 1)).filter(lambda a: a.sum() > 1e-6)


def as_belief(p, sigma=5.0):
    p = p / p.sum()
    return be.AngularBelief(p, be.angle_grid(p.size), sigma)


# --- predict -----------------------------------------------------------------

def test_predict_delta_mass_near_centre():
    b = be.AngularBelief.delta(0.0, 181, sigma=1.0)  # sigma_min equals one 1-degree bin
    out = be.predict(b).probs
    i = b.index_of(0.0)
    assert out[i - 1:i + 2].sum() >= 0.68


def test_predict_uniform_fixed_point():
    b = be.AngularBelief.uniform(181, 7.0)
    np.testing.assert_allclose(be.predict(b, mixing=1e-3).probs, 1 / 181, rtol=1e-12)


@given(probs_strategy, st.floats(P.sigma_min, P.sigma_max), st.floats(0, 0.1))
def test_predict_normalized_nonnegative(p, sigma, mix):
    out = be.predict(as_belief(p, sigma), mixing=mix).probs
    assert abs(out.sum() - 1) <= 1e-9
    assert (out >= 0).all()


@given(probs_strategy, st.floats(P.sigma_min, P.sigma_max))
def test_predict_never_lowers_entropy(p, sigma):
    b = as_belief(p, sigma)
    assert be.entropy(be.predict(b, 1e-3)) >= be.entropy(b) - 1e-9


def test_predict_edge_mass_reflects():
    b = be.AngularBelief.delta(-90.0, 91, sigma=4.0)
    out = be.predict(b).probs
    assert out.sum() == pytest.approx(1.0)
    assert out[0] == out.max()


# --- update ------------------------------------------------------------------

def test_update_k0_and_uniform_z_identity(rng):
    b = as_belief(rng.random(31))
    np.testing.assert_allclose(be.update(b, rng.random(31), 0.0)[0].probs, b.probs)
    np.testing.assert_allclose(be.update(b, np.full(31, 0.3), 2.5)[0].probs, b.probs, rtol=1e-12)


def test_update_hand_example():
    b = be.AngularBelief(np.full(5, 0.2), be.angle_grid(5), 5.0)
    post, ok = be.update(b, [1, 2, 1, 1, 1], 1.0)
    np.testing.assert_allclose(post.probs, np.array([1, 2, 1, 1, 1]) / 6, rtol=1e-14)
    assert ok


def test_update_zero_product_is_uninformative():
    b = be.AngularBelief.delta(0.0, 11)
    z = np.ones(11)
    z[b.index_of(0.0)] = 0.0
    post, ok = be.update(b, z, 1.0)
    assert not ok
    np.testing.assert_array_equal(post.probs, b.probs)


def test_update_validation():
    b = be.AngularBelief.uniform(5)
    with pytest.raises(ValueError):
        be.update(b, np.ones(4), 1.0)
    with pytest.raises(ValueError):
        be.update(b, -np.ones(5), 1.0)
    with pytest.raises(ValueError):
        be.update(b, np.ones(5), -1.0)


@given(probs_strategy, st.data())
def test_update_normalized(p, data):
    b = as_belief(p)
    z = data.draw(arrays(np.float64, p.size, elements=st.floats(0, 1)))
    post, ok = be.update(b, z, data.draw(st.floats(0, 4)))
    assert abs(post.probs.sum() - 1) <= 1e-9


# --- entropy / confidence ----------------------------------------------------

def test_entropy_examples():
    assert be.entropy(be.AngularBelief.uniform(181)) == pytest.approx(np.log2(181), rel=1e-12)
    assert be.entropy(be.AngularBelief.delta(3.0, 181)) == 0.0
    assert be.entropy(np.array([0.5, 0.5] + [0.0] * 9)) == pytest.approx(1.0)


def test_confidence_examples():
    assert be.confidence(be.AngularBelief.uniform(181)) == pytest.approx(0.0, abs=1e-12)
    assert be.confidence(be.AngularBelief.delta(0.0, 181)) == 1.0
    two = np.zeros(181)
    two[[10, 20]] = 0.5
    assert be.confidence(two) == pytest.approx(1 - 1 / np.log2(181), rel=1e-12)


@given(probs_strategy)
def test_entropy_bounds_and_confidence_formula(p):
    p = p / p.sum()
    h = be.entropy(p)
    assert -1e-12 <= h <= np.log2(p.size) + 1e-9
    assert be.confidence(p) == 1 - min(1.0, h / np.log2(p.size))


def test_likelihood_exponent():
    assert be.likelihood_exponent(0.0, P) == P.k_min
    assert be.likelihood_exponent(1.0, P) == P.k_max
    q = be.BeliefHyperparams(k_min=1, k_max=3)
    assert be.likelihood_exponent(0.5, q) == 2.0
    with pytest.raises(ValueError):
        be.likelihood_exponent(1.5, P)


# --- MAP peaks ---------------------------------------------------------------

def test_map_peaks_delta():
    b = be.AngularBelief.delta(12.0, 181)
    ang, ok = be.map_peaks(b, 1)
    assert ang == [12.0] and ok


def test_map_peaks_tie_break_by_index():
    b = be.AngularBelief.uniform(181)
    b.probs[:] = 0
    b.probs[[40, 120]] = 0.5
    ang, _ = be.map_peaks(b, 2)
    assert ang == [float(b.grid[40]), float(b.grid[120])]


def test_map_peaks_gaussian_second_peak_exhaustive():
    grid = be.angle_grid(181)
    probs = np.exp(-0.5 * ((grid - 5.0) / 6.0) ** 2) + 0.3 * np.exp(-0.5 * ((grid + 40) / 3.0) ** 2)
    b = be.AngularBelief(probs / probs.sum(), grid, 4.0)
    ang, ok = be.map_peaks(b, 2, separation=4.0)
    assert ok
    mode = int(np.argmax(b.probs))
    assert abs(b.index_of(ang[1]) - mode) > 1
    # exhaustive: best pair containing the mode with the separation respected
    best = max((j for j in range(181) if abs(grid[j] - grid[mode]) >= 4.0), key=lambda j: b.probs[j])
    assert ang == [float(grid[mode]), float(grid[best])]


def test_map_peaks_exclusion_and_incomplete():
    b = be.AngularBelief.delta(14.0, 19)  # coarse 10 degree grid
    ang, ok = be.map_peaks(b, 3, excluded=[(-90, 70)], separation=15)
    assert not ok and 14.0 not in ang and len(ang) == 1
    with pytest.raises(ValueError):
        be.map_peaks(b, 0)


# --- gamma and kernel adaptation --------------------------------------------

def test_sensing_fraction_examples():
    assert be.sensing_fraction(0.0, P) == P.gamma_min
    assert be.sensing_fraction(P.max_entropy, P) == P.gamma_max
    assert be.sensing_fraction(P.max_entropy / 2, P) == pytest.approx((P.gamma_min + P.gamma_max) / 2)
    with pytest.raises(ValueError):
        be.sensing_fraction(-0.1, P)


@given(st.floats(0, 20), st.floats(0, 20))
def test_sensing_fraction_monotone(a, b):
    lo, hi = sorted((a, b))
    assert be.sensing_fraction(lo, P) <= be.sensing_fraction(hi, P)


def test_adapt_kernel_examples():
    assert be.adapt_kernel(5.0, False, P) == pytest.approx(min(P.sigma_max, 5.0 * (1 + P.k_ex)))
    assert be.adapt_kernel(5.0, True, P) == pytest.approx(max(P.sigma_min, 5.0 * (1 - P.k_ey)))
    assert be.adapt_kernel(5.0, False, be.BeliefHyperparams(k_ex=100.0)) == P.sigma_max


@given(st.floats(P.sigma_min, P.sigma_max), st.booleans())
def test_adapt_kernel_direction_and_clip(sigma, ok):
    out = be.adapt_kernel(sigma, ok, P)
    assert P.sigma_min <= out <= P.sigma_max
    assert (out <= sigma) if ok else (out >= sigma)


# --- sensing response ---------------------------------------------------------

def test_sensing_without_eves_is_flat(rng):
    b = be.AngularBelief.uniform(61)
    z = be.sensing_response(b, [], [], rng, P, noise=False)
    np.testing.assert_array_equal(z, 1.0)
    np.testing.assert_allclose(be.update(b, z, 3.0)[0].probs, b.probs)


def test_sensing_peak_coincidence(rng):
    b = be.AngularBelief.uniform(181)
    z = be.sensing_response(b, [-17.0], [1.0], rng, be.BeliefHyperparams(sensing_snr_db=30), noise=False)
    assert b.grid[int(np.argmax(z))] == -17.0
    assert z.max() == 1.0


def test_sensing_convergence_monte_carlo():
    """Illuminated static eavesdropper: MAP within 2 bins after 500 slots in >= 90% of seeds."""
    hits = 0
    for seed in range(100):
        r = np.random.default_rng(seed)
        truth = float(r.uniform(-60, 60))
        b = be.AngularBelief.uniform(P.num_bins, P.sigma0)
        for _ in range(500):
            b = be.predict(be.AngularBelief(b.probs, b.grid, P.sigma_min), P.mixing)
            peaks, _ = be.map_peaks(b, 2)
            ill = 1.0 if min(abs(p - truth) for p in peaks) <= 2 else P.sensing_floor
            z = be.sensing_response(b, [truth], [ill], r, P)
            b, _ = be.update(b, z, P.k_min)
        hits += abs(b.index_of(truth) - int(np.argmax(b.probs))) <= 2
    assert hits >= 90


def test_hyperparam_validation():
    for bad in (dict(num_bins=1), dict(sigma0=30.0), dict(k_min=5.0), dict(gamma_min=0.9),
                dict(conf_th=0.0), dict(mixing=1.0)):
        with pytest.raises(ValueError):
            be.BeliefHyperparams(**bad)
    assert P.entropy_target == pytest.approx(0.3 * np.log2(181))
