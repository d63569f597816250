"""Image quality metrics and trained-model inference.

PSNR uses a peak of 1.0 and returns +inf for identical images, so "perfect"
is representable rather than an exception.  SSIM is the windowed form with an
11x11 Gaussian (sigma 1.5) on valid positions only; colour images score as
the channel mean.  Identical inputs score exactly 1.0 and the measure is
exactly symmetric, both in actual float arithmetic, because the two inputs
pass through the same expressions.

Inference wraps the generator: denoising conditions on an all-zero level map
and runs the deterministic path; noise transference conditions on a target
map and runs the stochastic path, so different seeds give different
realisations of the same noise level.
"""

import math
from pathlib import Path

import numpy as np
import torch
from scipy.signal import convolve2d

from .data import load_image
from .noise_model import as_generator


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_plane(a, b, window, c1, c2):
    mu_a = convolve2d(a, window, mode="valid")
    mu_b = convolve2d(b, window, mode="valid")
    var_a = convolve2d(a * a, window, mode="valid") - mu_a * mu_a
    var_b = convolve2d(b * b, window, mode="valid") - mu_b * mu_b
    cov = convolve2d(a * b, window, mode="valid") - mu_a * mu_b
    score = (((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
             / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)))
    return float(score.mean())


def ssim(a: np.ndarray, b: np.ndarray, window_size: int = 11,
         sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03,
         peak: float = 1.0) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape[0], a.shape[1]) < window_size:
        raise ValueError(f"images smaller than the {window_size}x{window_size} "
                         "window cannot be scored")
    window = _gaussian_window(window_size, sigma)
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    if a.ndim == 2:
        return _ssim_plane(a, b, window, c1, c2)
    return float(np.mean([_ssim_plane(a[:, :, c], b[:, :, c], window, c1, c2)
                          for c in range(a.shape[2])]))


def _to_tensor(img: np.ndarray) -> torch.Tensor:
    img = np.asarray(img, dtype=np.float32)
    chw = img[None, :, :] if img.ndim == 2 else np.moveaxis(img, 2, 0)
    return torch.from_numpy(np.ascontiguousarray(chw))[None]


def _to_image(t: torch.Tensor) -> np.ndarray:
    arr = t.detach().numpy()[0].astype(np.float64)
    return arr[0] if arr.shape[0] == 1 else np.moveaxis(arr, 0, 2)


def _check_channels(img: np.ndarray, generator) -> None:
    channels = 1 if img.ndim == 2 else img.shape[2]
    if channels != generator.config.in_channels:
        raise ValueError(f"image has {channels} channel(s) but the model "
                         f"expects {generator.config.in_channels}")


def denoise(y: np.ndarray, generator) -> np.ndarray:
    """Blind denoising: the zero-noise-level case of noise transference.

    Deterministic and stateless; the output is clamped to [0, 1] because it
    leaves the pipeline.
    """
    _check_channels(y, generator)
    with torch.no_grad():
        zero_map = torch.zeros((1, 1) + tuple(np.shape(y)[:2]))
        out = generator(_to_tensor(y), zero_map, mode="inference")
    return np.clip(_to_image(out), 0.0, 1.0)


def transfer_noise(y: np.ndarray, level_map: np.ndarray, generator,
                   seed=None) -> np.ndarray:
    """Re-render y as if corrupted at the level the map describes.

    An identically-zero map is exactly a denoising request and takes the
    deterministic path, so the result matches denoise() bit for bit.  Nonzero
    maps engage the stochastic branch: the seed picks the realisation.
    """
    _check_channels(y, generator)
    level_map = np.asarray(level_map, dtype=np.float64)
    if level_map.shape != np.shape(y)[:2]:
        raise ValueError("level map must match the image plane")
    if not level_map.any():
        return denoise(y, generator)
    rng = as_generator(seed)
    with torch.no_grad():
        m = torch.from_numpy(level_map.astype(np.float32))[None, None]
        out = generator(_to_tensor(y), m, mode="train", rng=rng)
    return np.clip(_to_image(out), 0.0, 1.0)


def evaluate_pairs(entries, generator=None, base_dir=".") -> dict:
    """Score (noisy, reference) pairs; generator None scores the noisy input.

    Returns {"rows": [...], "mean_psnr": ..., "mean_ssim": ...}.  A row for
    an unreadable entry carries an "error" field and is excluded from the
    means; rows always come back in manifest order, one per entry.
    """
    base = Path(base_dir)
    rows = []
    for entry in entries:
        row = {"noisy": str(entry["noisy"])}
        try:
            noisy = load_image(base / entry["noisy"])
            reference = load_image(base / entry["reference"])
            restored = noisy if generator is None else denoise(noisy, generator)
            row["psnr"] = psnr(restored, reference)
            row["ssim"] = ssim(restored, reference)
        except (OSError, ValueError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    scored = [r for r in rows if "error" not in r]
    return {
        "rows": rows,
        "mean_psnr": (float(np.mean([r["psnr"] for r in scored]))
                      if scored else math.nan),
        "mean_ssim": (float(np.mean([r["ssim"] for r in scored]))
                      if scored else math.nan),
    }


def _fmt(value: float) -> str:
    if math.isnan(value):
        return "NA"
    if math.isinf(value):
        return "inf"
    return f"{value:.6f}"


def write_report(path, result: dict) -> None:
    """CSV: header, one row per pair (NA on errors), trailing mean row."""
    lines = ["noisy,psnr_db,ssim"]
    for row in result["rows"]:
        if "error" in row:
            lines.append(f"{row['noisy']},NA,NA")
        else:
            lines.append(f"{row['noisy']},{_fmt(row['psnr'])},{_fmt(row['ssim'])}")
    lines.append(f"mean,{_fmt(result['mean_psnr'])},{_fmt(result['mean_ssim'])}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
