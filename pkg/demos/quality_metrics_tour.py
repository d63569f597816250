"""Tour of the image quality metrics used by the evaluation tooling.

Demonstrates PSNR and SSIM on controlled distortions, including the edge
cases the implementations pin down: identical images give infinite PSNR and
an SSIM of exactly 1.0, and both metrics are symmetric in their arguments.
"""

import numpy as np

from noisetransfer import psnr, ssim
from noisetransfer.toy_data import make_toy_image

rng = np.random.default_rng(77)
img = make_toy_image(seed=4, size=96)

print("== 1. edge cases ==")
print(f"psnr(x, x) = {psnr(img, img)}")
print(f"ssim(x, x) = {ssim(img, img)!r}  (exactly 1.0)")

print("\n== 2. additive Gaussian noise of growing strength ==")
print(f"{'sigma':>10} {'psnr (dB)':>10} {'ssim':>8}")
for sigma in (5, 10, 25, 50):
    noisy = np.clip(img + rng.normal(0, sigma / 255, img.shape), 0, 1)
    print(f"{sigma:>7}/255 {psnr(img, noisy):>10.2f} {ssim(img, noisy):>8.4f}")

print("\n== 3. psnr follows the closed form for a known offset ==")
offset = img + 0.05  # intentionally not clipped, keeps the MSE exact
expected = 20 * np.log10(1.0 / 0.05)
print(f"measured {psnr(img, offset):.6f} dB, closed form {expected:.6f} dB")

print("\n== 4. the two metrics can disagree ==")
from scipy.ndimage import uniform_filter

blurred = uniform_filter(img, size=5)
shifted = np.clip(img + 0.07, 0.0, 1.0)
print(f"5x5 box blur:    psnr {psnr(img, blurred):6.2f} dB, "
      f"ssim {ssim(img, blurred):.4f}")
print(f"+0.07 shift:     psnr {psnr(img, shifted):6.2f} dB, "
      f"ssim {ssim(img, shifted):.4f}")
print("psnr prefers the blur; ssim prefers the shift that keeps structure")

print("\n== 5. symmetry ==")
noisy = np.clip(img + rng.normal(0, 0.1, img.shape), 0, 1)
print(f"|psnr(a,b) - psnr(b,a)| = {abs(psnr(img, noisy) - psnr(noisy, img)):.2e}")
print(f"|ssim(a,b) - ssim(b,a)| = {abs(ssim(img, noisy) - ssim(noisy, img)):.2e}")
