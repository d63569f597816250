import numpy as np
import numpy.testing as npt
import pytest

from noisetransfer import (NoiseModelParams, apply_crf, apply_icrf,
                           bayer_process, compute_noise_level_map,
                           make_awgn_pair, make_training_pair,
                           sample_heterogeneous_noise, sample_noise_params,
                           synthesize_noise)
from noisetransfer.noise_model import BAYER_PATTERNS
from noisetransfer.evaluation import psnr

from helpers import random_image
from oracles import lag1_correlation


# ---------------------------------------------------------------- response curve

def test_icrf_endpoints_and_midpoint():
    p = NoiseModelParams(crf_gamma=2.0)
    npt.assert_allclose(apply_icrf(np.array([0.0, 1.0]), p), [0.0, 1.0])
    npt.assert_allclose(apply_icrf(np.array([0.5]), p), [0.25])


def test_crf_midpoint():
    p = NoiseModelParams(crf_gamma=2.0)
    npt.assert_allclose(apply_crf(np.array([0.25]), p), [0.5])


@pytest.mark.parametrize("gamma", [1.0, 1.7, 2.2, 3.0])
def test_crf_roundtrip(gamma):
    p = NoiseModelParams(crf_gamma=gamma)
    y = random_image(11, (17, 23))
    npt.assert_allclose(apply_crf(apply_icrf(y, p), p), y, atol=1e-6)
    npt.assert_allclose(apply_icrf(apply_crf(y, p), p), y, atol=1e-6)


def test_crf_disabled_is_identity():
    p = NoiseModelParams(enable_crf=False, crf_gamma=2.2)
    y = random_image(5, (9, 9))
    npt.assert_array_equal(apply_icrf(y, p), y)
    npt.assert_array_equal(apply_crf(y, p), y)


def test_crf_finite_on_negative_inputs():
    # Noisy irradiance dips below zero; the curve must stay finite there.
    p = NoiseModelParams(crf_gamma=2.2)
    vals = apply_crf(np.array([-0.3, -1e-9, 0.0]), p)
    assert np.all(np.isfinite(vals))
    assert vals[0] < 0


# ---------------------------------------------------------------- level map

def test_level_map_closed_form():
    p = NoiseModelParams(sigma_s=0.06, sigma_c=0.03)
    m = compute_noise_level_map(np.array([[0.5]]), p)
    npt.assert_allclose(m, np.sqrt(0.5 * 0.06 ** 2 + 0.03 ** 2))


def test_level_map_floor_at_zero_irradiance():
    p = NoiseModelParams(sigma_s=0.06, sigma_c=0.03)
    m = compute_noise_level_map(np.zeros((4, 4)), p)
    npt.assert_allclose(m, 0.03)


def test_level_map_signal_free_case():
    p = NoiseModelParams(sigma_s=0.0, sigma_c=0.02)
    m = compute_noise_level_map(random_image(3, (6, 6)), p)
    npt.assert_allclose(m, 0.02)


def test_level_map_colour_uses_channel_mean():
    p = NoiseModelParams(sigma_s=0.05, sigma_c=0.01)
    L = random_image(4, (5, 5, 3))
    expected = np.sqrt(L.mean(axis=2) * 0.05 ** 2 + 0.01 ** 2)
    npt.assert_allclose(compute_noise_level_map(L, p), expected)
    assert compute_noise_level_map(L, p).shape == (5, 5)


def test_level_map_independent_of_pipeline_toggles():
    y = random_image(9, (12, 12, 3))
    for crf in (True, False):
        for bpd in (True, False):
            p = NoiseModelParams(sigma_s=0.04, sigma_c=0.02,
                                 enable_crf=crf, enable_bpd=bpd)
            _, m = synthesize_noise(y, p, seed=5)
            expected = compute_noise_level_map(apply_icrf(y, p), p)
            npt.assert_array_equal(m, expected)


# ---------------------------------------------------------------- gaussian stage

def test_hetero_noise_zero_scales_gives_zero():
    p = NoiseModelParams(sigma_s=0.0, sigma_c=0.0)
    n = sample_heterogeneous_noise(np.full((8, 8), 0.4), p, seed=0)
    npt.assert_array_equal(n, 0.0)


def test_hetero_noise_statistics_match_map():
    # 1e5 i.i.d. pixels at one irradiance stand in for 1e5 seeds at one pixel.
    p = NoiseModelParams(sigma_s=0.06, sigma_c=0.03)
    L = np.full((250, 400), 0.5)
    n = sample_heterogeneous_noise(L, p, seed=123)
    sigma = compute_noise_level_map(L, p)[0, 0]
    count = n.size
    assert abs(n.mean()) < 3.0 * sigma / np.sqrt(count)
    assert abs(n.std() - sigma) < 3.0 * sigma / np.sqrt(2 * count)


def test_hetero_noise_variance_tracks_signal():
    p = NoiseModelParams(sigma_s=0.06, sigma_c=0.005)
    rows = np.repeat(np.linspace(0.0, 1.0, 5)[:, None], 20000, axis=1)
    n = sample_heterogeneous_noise(rows, p, seed=3)
    stds = n.std(axis=1)
    assert np.all(np.diff(stds) > 0)  # brighter rows are noisier


# ---------------------------------------------------------------- bayer stage

@pytest.mark.parametrize("pattern", BAYER_PATTERNS)
def test_bayer_constant_image_is_exact(pattern):
    p = NoiseModelParams(bayer_pattern=pattern)
    img = np.full((10, 12, 3), 0.37)
    npt.assert_array_equal(bayer_process(img, p), img)


def test_bayer_disabled_is_identity():
    p = NoiseModelParams(enable_bpd=False)
    img = random_image(8, (7, 9, 3))
    npt.assert_array_equal(bayer_process(img, p), img)


def test_bayer_rejects_bad_inputs():
    p = NoiseModelParams()
    with pytest.raises(ValueError):
        bayer_process(random_image(0, (7, 8, 3)), p)  # odd height
    with pytest.raises(ValueError):
        bayer_process(random_image(1, (8, 9, 3)), p)  # odd width
    with pytest.raises(ValueError):
        bayer_process(random_image(2, (8, 8)), p)  # not colour


def test_bayer_keeps_sampled_positions():
    p = NoiseModelParams(bayer_pattern="RGGB")
    img = random_image(6, (8, 8, 3))
    out = bayer_process(img, p)
    # RGGB: red lives at even/even sites and must pass through untouched.
    npt.assert_array_equal(out[0::2, 0::2, 0], img[0::2, 0::2, 0])
    npt.assert_array_equal(out[1::2, 1::2, 2], img[1::2, 1::2, 2])


def test_bayer_spatially_correlates_noise():
    # The demosaic averages neighbours, so independent noise comes out
    # positively correlated at lag 1 while the plain field is not.
    img = np.full((32, 32, 3), 0.5)
    with_bpd, without_bpd = [], []
    for seed in range(100):
        p_on = NoiseModelParams(sigma_s=0.0, sigma_c=0.05, enable_crf=False,
                                enable_bpd=True)
        p_off = NoiseModelParams(sigma_s=0.0, sigma_c=0.05, enable_crf=False,
                                 enable_bpd=False)
        n_on, _ = synthesize_noise(img, p_on, seed=seed)
        n_off, _ = synthesize_noise(img, p_off, seed=seed)
        with_bpd.append(lag1_correlation(n_on[:, :, 1]))
        without_bpd.append(lag1_correlation(n_off[:, :, 1]))
    assert np.mean(with_bpd) > 0.1
    assert abs(np.mean(without_bpd)) < 0.05
    assert np.mean(with_bpd) > np.mean(without_bpd) + 0.1


# ---------------------------------------------------------------- full synthesis

def test_synthesize_zero_scales_gives_zero_noise():
    p = NoiseModelParams(sigma_s=0.0, sigma_c=0.0)
    noise, level = synthesize_noise(random_image(2, (8, 8, 3)), p, seed=0)
    npt.assert_allclose(noise, 0.0, atol=1e-12)
    npt.assert_array_equal(level, 0.0)


def test_synthesize_grayscale_skips_bayer():
    p = NoiseModelParams(sigma_s=0.04, sigma_c=0.02, enable_bpd=True)
    noise, _ = synthesize_noise(random_image(3, (9, 9)), p, seed=1)
    assert noise.shape == (9, 9)


def test_synthesize_deterministic_per_seed():
    p = NoiseModelParams(sigma_s=0.05, sigma_c=0.02)
    y = random_image(4, (10, 10, 3))
    n1, m1 = synthesize_noise(y, p, seed=42)
    n2, m2 = synthesize_noise(y, p, seed=42)
    n3, _ = synthesize_noise(y, p, seed=43)
    npt.assert_array_equal(n1, n2)
    npt.assert_array_equal(m1, m2)
    assert np.any(n1 != n3)


def test_synthesize_statistics_match_map_without_pipeline():
    # With both pipeline stages off the corruption is exactly the Gaussian
    # stage, so per-pixel stds over many seeds must match the map.
    p = NoiseModelParams(sigma_s=0.06, sigma_c=0.03, enable_crf=False,
                         enable_bpd=False)
    y = random_image(7, (4, 4))
    level = compute_noise_level_map(apply_icrf(y, p), p)
    draws = np.stack([synthesize_noise(y, p, seed=s)[0] for s in range(10000)])
    stds = draws.std(axis=0)
    band = 4.0 * level / np.sqrt(2 * draws.shape[0])
    assert np.all(np.abs(stds - level) < band)


# ---------------------------------------------------------------- pairs

def test_training_pair_shapes_and_source_untouched():
    p = NoiseModelParams(sigma_s=0.05, sigma_c=0.02)
    y = random_image(11, (12, 14, 3))
    pair = make_training_pair(y, p, seed=9)
    assert pair.target.shape == y.shape
    assert pair.target_map.shape == (12, 14)
    npt.assert_array_equal(pair.source, y)
    assert pair.target.min() >= 0.0 and pair.target.max() <= 1.0


def test_training_pair_zero_scales_is_identity():
    p = NoiseModelParams(sigma_s=0.0, sigma_c=0.0)
    y = random_image(12, (10, 10))
    pair = make_training_pair(y, p, seed=0)
    npt.assert_allclose(pair.target, y, atol=1e-12)


def test_training_pair_psnr_decreases_with_noise_floor():
    y = random_image(13, (32, 32))
    levels = [0.005, 0.01, 0.02, 0.04]
    means = []
    for sigma_c in levels:
        p = NoiseModelParams(sigma_s=0.0, sigma_c=sigma_c)
        vals = [psnr(make_training_pair(y, p, seed=s).target, y)
                for s in range(20)]
        means.append(np.mean(vals))
    assert all(a > b for a, b in zip(means, means[1:]))


def test_awgn_pair_basic_properties():
    x = np.full((64, 64), 0.5)
    pair = make_awgn_pair(x, 0.05, 0.02, seed=21)
    assert pair.target_map.shape == (64, 64)
    npt.assert_array_equal(pair.target_map, 0.02)
    # At 10 sigma from the clamp boundary, the stds pass through unchanged.
    assert abs((pair.source - x).std() - 0.05) < 0.005
    assert abs((pair.target - x).std() - 0.02) < 0.002


def test_awgn_pair_noises_are_independent():
    x = np.full((320, 320), 0.5)
    pair = make_awgn_pair(x, 0.04, 0.04, seed=2)
    ny = (pair.source - x).ravel()
    nz = (pair.target - x).ravel()
    rho = np.corrcoef(ny, nz)[0, 1]
    assert abs(rho) < 0.01


def test_awgn_zero_levels_is_identity():
    x = random_image(14, (8, 8))
    pair = make_awgn_pair(x, 0.0, 0.0, seed=0)
    npt.assert_array_equal(pair.source, x)
    npt.assert_array_equal(pair.target, x)
    npt.assert_array_equal(pair.target_map, 0.0)


def test_awgn_rejects_negative_levels():
    with pytest.raises(ValueError):
        make_awgn_pair(np.zeros((4, 4)), -0.1, 0.1)


# ---------------------------------------------------------------- parameter sampling

def test_sampled_scales_stay_in_range():
    rng = np.random.default_rng(0)
    for _ in range(500):
        p = sample_noise_params(rng)
        assert 0.0 < p.sigma_s <= 0.06
        assert 0.0 < p.sigma_c <= 0.03


def test_params_validation():
    with pytest.raises(ValueError):
        NoiseModelParams(sigma_s=-0.01)
    with pytest.raises(ValueError):
        NoiseModelParams(crf_gamma=0.0)
    with pytest.raises(ValueError):
        NoiseModelParams(bayer_pattern="XYZW")
