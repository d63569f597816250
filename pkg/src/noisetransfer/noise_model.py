"""Camera-pipeline noise synthesis for paired denoising data.

Real photographs are not corrupted by white Gaussian noise.  Shot noise grows
with scene irradiance, read noise is signal independent, and the in-camera
response curve plus Bayer demosaicking warp and spatially correlate both.
This module builds that corruption synthetically so that clean photographs can
be turned into realistic (noisy source, noisy target, noise level map)
triplets:

    intensity y --inverse response--> irradiance L
    L + heteroscedastic Gaussian noise --response--> mosaic + demosaic
    corruption = processed(noisy) - processed(clean)

Subtracting the two processed branches cancels the image content exactly, so
the result is a pure noise field whose statistics depend on the image.  The
pseudo noise level map summarises the corruption before the pipeline stages:

    map^2 = L * sigma_s^2 + sigma_c^2

computed from the channel-mean irradiance plane, which makes the map a
per-pixel standard deviation in irradiance units.

Conventions: images are float arrays shaped (H, W) for grayscale or (H, W, 3)
for colour, values nominally in [0, 1].  Noise level maps are (H, W) arrays.
Intermediate signals are never clamped; clamping happens only when a finished
image leaves the pipeline.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

BAYER_PATTERNS = ("RGGB", "BGGR", "GRBG", "GBRG")

# Default sampling ranges for per-pair noise parameters.
SIGMA_S_MAX = 0.06
SIGMA_C_MAX = 0.03
AWGN_SIGMA_MAX = 75.0 / 255.0


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed, a seed sequence, or a Generator; return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class NoiseModelParams:
    """Knobs for one synthetic corruption.

    sigma_s scales the signal-dependent variance, sigma_c is the constant
    noise floor, crf_gamma parameterises the power-law response curve, and
    the two enable flags switch the response curve and the Bayer stage off
    for ablations (both off reduces the model to heteroscedastic Gaussian
    noise in intensity space).
    """

    sigma_s: float = 0.03
    sigma_c: float = 0.015
    crf_gamma: float = 2.2
    enable_crf: bool = True
    enable_bpd: bool = True
    bayer_pattern: str = "RGGB"

    def __post_init__(self):
        if self.sigma_s < 0 or self.sigma_c < 0:
            raise ValueError("noise scales must be non-negative")
        if self.crf_gamma <= 0:
            raise ValueError("crf_gamma must be positive")
        if self.bayer_pattern not in BAYER_PATTERNS:
            raise ValueError(f"unknown Bayer pattern {self.bayer_pattern!r}")


@dataclass
class TrainingPair:
    """One supervised example: noisy source, noisy target, target's level map."""

    source: np.ndarray
    target: np.ndarray
    target_map: np.ndarray

    def __post_init__(self):
        if self.source.shape != self.target.shape:
            raise ValueError("source and target shapes differ")
        if self.target_map.shape != self.target.shape[:2]:
            raise ValueError("level map must match the image plane")


def sample_noise_params(rng, sigma_s_max: float = SIGMA_S_MAX,
                        sigma_c_max: float = SIGMA_C_MAX,
                        **overrides) -> NoiseModelParams:
    """Draw per-pair noise scales uniformly from (0, max] (zero excluded)."""
    rng = as_generator(rng)
    sigma_s = sigma_s_max * (1.0 - rng.random())
    sigma_c = sigma_c_max * (1.0 - rng.random())
    return NoiseModelParams(sigma_s=sigma_s, sigma_c=sigma_c, **overrides)


def _signed_power(x: np.ndarray, exponent: float) -> np.ndarray:
    # Odd extension of the power law.  Noisy irradiance can dip below zero
    # and the unclamped pipeline must stay finite and invertible there.
    return np.sign(x) * np.abs(x) ** exponent


def apply_icrf(y: np.ndarray, params: NoiseModelParams) -> np.ndarray:
    """Map stored intensities back to linear irradiance (inverse response)."""
    y = np.asarray(y, dtype=np.float64)
    if not params.enable_crf:
        return y
    return _signed_power(y, params.crf_gamma)


def apply_crf(L: np.ndarray, params: NoiseModelParams) -> np.ndarray:
    """Map linear irradiance to stored intensities (forward response)."""
    L = np.asarray(L, dtype=np.float64)
    if not params.enable_crf:
        return L
    return _signed_power(L, 1.0 / params.crf_gamma)


def _irradiance_plane(L: np.ndarray) -> np.ndarray:
    L = np.asarray(L, dtype=np.float64)
    return L.mean(axis=2) if L.ndim == 3 else L


def compute_noise_level_map(L: np.ndarray, params: NoiseModelParams) -> np.ndarray:
    """Per-pixel noise standard deviation implied by irradiance L.

    Colour images use the channel-mean irradiance plane, so every channel of
    the sampled noise shares one per-pixel level and the map stays (H, W).
    """
    plane = np.maximum(_irradiance_plane(L), 0.0)
    return np.sqrt(plane * params.sigma_s ** 2 + params.sigma_c ** 2)


def sample_heterogeneous_noise(L: np.ndarray, params: NoiseModelParams,
                               seed=None) -> np.ndarray:
    """Draw signal-dependent plus constant Gaussian noise in irradiance space.

    The two components are drawn separately (signal-dependent first), so the
    per-pixel variance is exactly the squared level map.
    """
    rng = as_generator(seed)
    L = np.asarray(L, dtype=np.float64)
    plane = np.maximum(_irradiance_plane(L), 0.0)
    dep_std = np.sqrt(plane) * params.sigma_s
    if L.ndim == 3:
        dep_std = dep_std[:, :, None]
    n_dep = rng.standard_normal(L.shape) * dep_std
    n_const = rng.standard_normal(L.shape) * params.sigma_c
    return n_dep + n_const


def _bayer_masks(pattern: str, height: int, width: int) -> np.ndarray:
    # 2x2 cell layout, returned as three float planes (R, G, B).
    layout = {
        "RGGB": ((0, 1), (1, 2)),
        "BGGR": ((2, 1), (1, 0)),
        "GRBG": ((1, 0), (2, 1)),
        "GBRG": ((1, 2), (0, 1)),
    }[pattern]
    masks = np.zeros((3, height, width), dtype=np.float64)
    for i in range(2):
        for j in range(2):
            masks[layout[i][j], i::2, j::2] = 1.0
    return masks


# Centre-excluded bilinear kernel: together with a mask-normalised divide it
# averages whichever neighbours actually carry the channel.
_BILINEAR = np.array([[0.25, 0.5, 0.25],
                      [0.5, 0.0, 0.5],
                      [0.25, 0.5, 0.25]])


def bayer_process(img: np.ndarray, params: NoiseModelParams) -> np.ndarray:
    """Mosaic to a single Bayer plane, then demosaic bilinearly.

    Identity when enable_bpd is false.  Otherwise the image must be colour
    with even height and width.  Sampled positions keep their exact values;
    missing positions are neighbour averages, which is what spatially
    correlates the noise that passes through.
    """
    img = np.asarray(img, dtype=np.float64)
    if not params.enable_bpd:
        return img
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("Bayer processing needs an (H, W, 3) image")
    height, width = img.shape[:2]
    if height % 2 or width % 2:
        raise ValueError("Bayer processing needs even height and width")

    masks = _bayer_masks(params.bayer_pattern, height, width)
    mosaic = (img * masks.transpose(1, 2, 0)).sum(axis=2)

    planes = []
    for c in range(3):
        num = ndimage.convolve(mosaic * masks[c], _BILINEAR, mode="mirror")
        den = ndimage.convolve(masks[c], _BILINEAR, mode="mirror")
        # den is zero only at sampled sites (their channel has no same-colour
        # neighbour inside the kernel), and those keep the mosaic value.
        interp = num / np.where(den > 0, den, 1.0)
        planes.append(np.where(masks[c] > 0, mosaic, interp))
    return np.stack(planes, axis=2)


def synthesize_noise(y: np.ndarray, params: NoiseModelParams, seed=None):
    """Sample one camera-pipeline noise field for image y.

    Returns (noise, level_map).  The noise is the difference between the
    pipeline applied to noisy and clean irradiance, so adding it to y yields
    the corrupted image.  Grayscale input switches the Bayer stage off (there
    is no mosaic to simulate); colour input with odd dimensions is rejected
    when the Bayer stage is on.
    """
    y = np.asarray(y, dtype=np.float64)
    L = apply_icrf(y, params)
    level_map = compute_noise_level_map(L, params)
    noise_lin = sample_heterogeneous_noise(L, params, seed)

    noisy = apply_crf(L + noise_lin, params)
    clean = apply_crf(L, params)
    if params.enable_bpd and y.ndim == 3:
        noisy = bayer_process(noisy, params)
        clean = bayer_process(clean, params)
    return noisy - clean, level_map


def make_training_pair(y: np.ndarray, params: NoiseModelParams,
                       seed=None) -> TrainingPair:
    """Corrupt y once and package it with the pseudo noise level map.

    The source keeps its original values; the target is clamped to [0, 1]
    because it leaves the pipeline as an image.
    """
    y = np.asarray(y, dtype=np.float64)
    noise, level_map = synthesize_noise(y, params, seed)
    target = np.clip(y + noise, 0.0, 1.0)
    return TrainingPair(source=y, target=target, target_map=level_map)


def make_awgn_pair(x: np.ndarray, sigma_source: float, sigma_target: float,
                   seed=None) -> TrainingPair:
    """Two independent white-Gaussian corruptions of the same clean image.

    The target map is constant at sigma_target.  Source noise is drawn first,
    then target noise; both images are clamped at the exit.
    """
    if sigma_source < 0 or sigma_target < 0:
        raise ValueError("noise levels must be non-negative")
    rng = as_generator(seed)
    x = np.asarray(x, dtype=np.float64)
    source = np.clip(x + rng.standard_normal(x.shape) * sigma_source, 0.0, 1.0)
    target = np.clip(x + rng.standard_normal(x.shape) * sigma_target, 0.0, 1.0)
    level_map = np.full(x.shape[:2], float(sigma_target))
    return TrainingPair(source=source, target=target, target_map=level_map)
