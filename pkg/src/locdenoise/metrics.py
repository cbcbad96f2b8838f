"""SNR, PSNR and SSIM on normalized (dynamic range 1) images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import ImageGrid

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityMetrics:
    psnr_db: float
    ssim: float


def _pair(a, b):
    a = a.pixels if isinstance(a, ImageGrid) else np.asarray(a, dtype=np.float64)
    b = b.pixels if isinstance(b, ImageGrid) else np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def snr_db(clean, noisy) -> float:
    """Signal power over error power, ``10 log10(sum x^2 / sum (x - y)^2)``."""
    x, y = _pair(clean, noisy)
    signal = float(np.sum(x * x))
    if signal == 0:
        raise ValueError("SNR undefined for zero signal")
    noise = float(np.sum((x - y) ** 2))
    if noise == 0:
        return float("inf")
    return 10.0 * np.log10(signal / noise)


def psnr(ref, test, peak: float = 1.0) -> float:
    x, y = _pair(ref, test)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def ssim_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian taps; the 2-D window is their outer product."""
    x = np.arange(size) - (size - 1) / 2
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


def _valid_filter(a, w):
    m = a.shape[0] - w.size + 1
    rows = sum(wk * a[k:k + m, :] for k, wk in enumerate(w))
    return sum(wk * rows[:, k:k + m] for k, wk in enumerate(w))


def ssim(ref, test, data_range: float = 1.0) -> float:
    """Mean SSIM over all fully-contained 11x11 Gaussian windows (no padding)."""
    x, y = _pair(ref, test)
    w = ssim_window()
    if x.shape[0] < w.size:
        raise ValueError(f"image side {x.shape[0]} smaller than the {w.size}x{w.size} window")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mx = _valid_filter(x, w)
    my = _valid_filter(y, w)
    vx = _valid_filter(x * x, w) - mx * mx
    vy = _valid_filter(y * y, w) - my * my
    cxy = _valid_filter(x * y, w) - mx * my
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def quality(ref, test) -> QualityMetrics:
    return QualityMetrics(psnr(ref, test), ssim(ref, test))
