"""Sparse piecewise-constant test phantoms.

All randomness comes from ``numpy.random.Generator(PCG64(seed))`` and only
its ``integers``/``uniform`` draws, so outputs are reproducible across
platforms for a given numpy release.
"""

from __future__ import annotations

import numpy as np

from .image import ImageGrid

KINDS = ("blocks", "disks", "shepp_logan_like")

# fraction of bright pixels the random generators aim for
_COVERAGE_MIN = 0.12
_COVERAGE_MAX = 0.30


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _blocks(n, rng):
    img = np.zeros((n, n))
    lo, hi = max(2, n // 8), max(3, n // 4)
    for _ in range(200):
        if np.count_nonzero(img) >= _COVERAGE_MIN * n * n:
            break
        h, w = rng.integers(lo, hi + 1, size=2)
        r = rng.integers(0, n - h + 1)
        c = rng.integers(0, n - w + 1)
        trial = img.copy()
        trial[r:r + h, c:c + w] = rng.uniform(0.6, 1.0)
        if np.count_nonzero(trial) <= _COVERAGE_MAX * n * n:
            img = trial
    return img


def _disks(n, rng):
    img = np.zeros((n, n))
    yy, xx = np.mgrid[0:n, 0:n]
    for _ in range(200):
        if np.count_nonzero(img) >= _COVERAGE_MIN * n * n:
            break
        rad = rng.uniform(n / 16, n / 6)
        cy, cx = rng.uniform(rad, n - rad, size=2)
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= rad * rad
        trial = img.copy()
        trial[mask] = rng.uniform(0.55, 1.0)
        if np.count_nonzero(trial) <= _COVERAGE_MAX * n * n:
            img = trial
    return img


def _ellipse(yy, xx, cy, cx, ay, ax, theta):
    c, s = np.cos(theta), np.sin(theta)
    u = (xx - cx) * c + (yy - cy) * s
    v = -(xx - cx) * s + (yy - cy) * c
    return (u / ax) ** 2 + (v / ay) ** 2 <= 1.0


def _shepp_logan_like(n, rng):
    """Bright skull ring, dim interior, a few jittered bright inclusions."""
    img = np.zeros((n, n))
    # coordinates in [-1, 1]
    g = (np.arange(n) + 0.5) / n * 2 - 1
    yy, xx = np.meshgrid(g, g, indexing="ij")
    outer = _ellipse(yy, xx, 0, 0, 0.92, 0.69, 0)
    inner = _ellipse(yy, xx, -0.0184, 0, 0.874, 0.6624, 0)
    img[outer] = 1.0
    img[inner] = 0.05
    inclusions = [
        (0.0, 0.22, 0.31, 0.11, -0.31),
        (0.0, -0.22, 0.41, 0.16, 0.31),
        (0.35, 0.0, 0.25, 0.21, 0.0),
        (-0.6, 0.0, 0.046, 0.046, 0.0),
        (-0.6, 0.06, 0.023, 0.046, 0.0),
    ]
    for cy, cx, ay, ax, th in inclusions:
        jy, jx = rng.uniform(-0.04, 0.04, size=2)
        img[_ellipse(yy, xx, cy + jy, cx + jx, ay, ax, th)] = rng.uniform(0.6, 0.9)
    return img


def make_phantom(kind: str, n: int, seed: int = 0) -> ImageGrid:
    if n < 16:
        raise ValueError(f"phantom side must be at least 16, got {n}")
    builders = {"blocks": _blocks, "disks": _disks, "shepp_logan_like": _shepp_logan_like}
    if kind not in builders:
        raise ValueError(f"unknown phantom kind {kind!r}; choose from {KINDS}")
    return ImageGrid(builders[kind](n, _rng(seed)))
