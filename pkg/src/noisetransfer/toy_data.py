"""Procedural test images: smooth ramps, cosine textures and crisp shapes.

Denoisers need both flat regions (where residual noise is obvious) and edges
(which over-smoothing destroys), so each image layers a low-frequency base, a
little oriented texture and a handful of constant-intensity shapes.  Entirely
deterministic per seed, so datasets never need to ship with the repo.
"""

import numpy as np

from .noise_model import as_generator


def make_toy_image(seed, size: int = 80, channels: int = 1) -> np.ndarray:
    rng = as_generator(seed)
    yy, xx = np.mgrid[0:size, 0:size] / float(size)

    planes = []
    for _ in range(channels):
        base = rng.uniform(0.2, 0.8)
        img = base + rng.uniform(-0.4, 0.4) * xx + rng.uniform(-0.4, 0.4) * yy
        for _ in range(rng.integers(1, 4)):
            freq = rng.uniform(2.0, 9.0) * 2.0 * np.pi
            angle = rng.uniform(0.0, np.pi)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = rng.uniform(0.02, 0.10)
            img = img + amp * np.cos(freq * (np.cos(angle) * xx
                                             + np.sin(angle) * yy) + phase)
        for _ in range(rng.integers(2, 6)):
            cy, cx = rng.uniform(0.1, 0.9, size=2)
            value = rng.uniform(0.05, 0.95)
            if rng.random() < 0.5:
                r = rng.uniform(0.05, 0.2)
                mask = (yy - cy) ** 2 + (xx - cx) ** 2 < r ** 2
            else:
                hh, hw = rng.uniform(0.04, 0.18, size=2)
                mask = (np.abs(yy - cy) < hh) & (np.abs(xx - cx) < hw)
            img = np.where(mask, value, img)
        planes.append(img)

    out = planes[0] if channels == 1 else np.stack(planes, axis=2)
    return np.clip(out, 0.0, 1.0)


def make_toy_dataset(seed, count: int, size: int = 80,
                     channels: int = 1) -> list:
    """count independent toy images; image i depends only on (seed, i)."""
    return [make_toy_image([seed, i], size=size, channels=channels)
            for i in range(count)]
