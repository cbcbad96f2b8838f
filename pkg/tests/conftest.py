import functools

import numpy as np
import pytest

from locdenoise.bench import bench_cell, sweep_point
from locdenoise.denoise import DenoiseConfig
from locdenoise.image import ImageGrid
from locdenoise.noise import NoiseSpec, add_poisson_noise
from locdenoise.phantoms import make_phantom

# acceptance results, printed in the terminal summary
ACCEPTANCE: dict[str, tuple[bool, str]] = {}

# same phantom as `locdenoise bench --phantom blocks`
BENCH_PHANTOM_SEED = 0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, n):
    return ImageGrid(rng.random((n, n)))


@functools.lru_cache(maxsize=None)
def blocks_phantom(n=64):
    return make_phantom("blocks", n, BENCH_PHANTOM_SEED)


@functools.lru_cache(maxsize=None)
def cached_cell(snr, seed):
    """Bench rows (all_modes, selected_modes) for one noisy blocks realization."""
    return tuple(bench_cell(blocks_phantom(), float(snr), int(seed), DenoiseConfig()))


@functools.lru_cache(maxsize=None)
def noisy_phantom(snr, seed=1, n=64):
    noisy, _ = add_poisson_noise(blocks_phantom(n), NoiseSpec(float(snr), seed))
    return noisy


@functools.lru_cache(maxsize=None)
def cached_sweep_point(snr, alpha, seed=1):
    return sweep_point(noisy_phantom(snr, seed), float(alpha), DenoiseConfig())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0].lstrip("AC"))):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
