import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from locdenoise.image import (
    ImageFormatError, ImageGrid, SmoothingSpec, gaussian_smooth, load_image, save_image,
)


def test_load_p2_scales_by_maxval(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_text("P2\n# comment\n2 2\n255\n255 0\n128 64\n")
    img = load_image(p)
    assert img.n == 2
    np.testing.assert_array_equal(img.vector, [1.0, 0.0, 128 / 255, 64 / 255])


def test_load_p5_16bit(tmp_path):
    p = tmp_path / "b.pgm"
    raw = np.array([[65535, 0], [1, 32768]], dtype=">u2")
    p.write_bytes(b"P5 2 2 65535\n" + raw.tobytes())
    img = load_image(p)
    np.testing.assert_array_equal(img.pixels, raw.astype(float) / 65535)


def test_non_square_rejected(tmp_path):
    p = tmp_path / "r.pgm"
    p.write_text("P2\n4 3\n255\n" + " ".join(["1"] * 12) + "\n")
    with pytest.raises(ImageFormatError, match="non-square"):
        load_image(p)


def test_zero_size_rejected(tmp_path):
    p = tmp_path / "z.pgm"
    p.write_text("P2\n0 0\n255\n")
    with pytest.raises(ImageFormatError, match="zero-size"):
        load_image(p)


def test_unsupported_format(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_text("P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(ImageFormatError, match="unsupported"):
        load_image(p)
    jpg = tmp_path / "a.jpg"
    jpg.write_bytes(b"x")
    with pytest.raises(ImageFormatError):
        load_image(jpg)


def test_png_16bit_saturated(tmp_path):
    p = tmp_path / "s.png"
    Image.fromarray(np.full((4, 4), 65535, dtype=np.uint16)).save(p)
    img = load_image(p)
    np.testing.assert_array_equal(img.pixels, np.ones((4, 4)))


def test_png_8bit(tmp_path):
    p = tmp_path / "e.png"
    Image.fromarray(np.array([[0, 51], [102, 255]], dtype=np.uint8), mode="L").save(p)
    np.testing.assert_allclose(load_image(p).vector, [0, 0.2, 0.4, 1.0])


def test_png_color_rejected(tmp_path):
    p = tmp_path / "c.png"
    Image.new("RGB", (3, 3)).save(p)
    with pytest.raises(ImageFormatError, match="grayscale"):
        load_image(p)


def test_save_clamps_and_rounds_half_up(tmp_path):
    p = tmp_path / "o.pgm"
    save_image(ImageGrid([[1.2, 0.5], [-0.3, 0.0]]), p, binary=False)
    body = p.read_text().split()
    assert body[:4] == ["P2", "2", "2", "255"]
    # round(0.5 * 255) = round(127.5) -> 128
    assert [int(v) for v in body[4:]] == [255, 128, 0, 0]


def test_save_non_finite_rejected(tmp_path):
    with pytest.raises(ValueError):
        save_image(ImageGrid([[np.nan]]), tmp_path / "n.pgm")


def test_save_unwritable(tmp_path):
    with pytest.raises(OSError):
        save_image(ImageGrid([[0.5]]), tmp_path / "missing" / "x.pgm")


@pytest.mark.parametrize("suffix,depth", [(".pgm", 8), (".pgm", 16), (".png", 8), (".png", 16)])
def test_round_trip_within_half_step(tmp_path, rng, suffix, depth):
    img = ImageGrid(rng.random((9, 9)))
    path = tmp_path / f"rt{suffix}"
    save_image(img, path, bit_depth=depth)
    back = load_image(path)
    step = 1.0 / (2 ** depth - 1)
    assert np.max(np.abs(back.pixels - img.pixels)) <= step / 2 + 1e-15


def test_p2_round_trip_bit_exact(tmp_path, rng):
    values = rng.integers(0, 256, size=(5, 5))
    img = ImageGrid(values / 255)
    save_image(img, tmp_path / "q.pgm", binary=False)
    np.testing.assert_array_equal(np.rint(load_image(tmp_path / "q.pgm").pixels * 255), values)


def test_smooth_constant_image():
    img = ImageGrid(np.full((12, 12), 0.37))
    out = gaussian_smooth(img, SmoothingSpec(True, 1.3))
    np.testing.assert_allclose(out.pixels, 0.37, rtol=0, atol=1e-15)


def test_smooth_delta_center_is_kernel_center_weight():
    a = np.zeros((15, 15))
    a[7, 7] = 1.0
    out = gaussian_smooth(ImageGrid(a), SmoothingSpec(True, sigma=1.0, kernel_radius=3))
    # sampled 2-D Gaussian over [-3, 3]^2, normalized; value at the origin
    g = [[math.exp(-(i * i + j * j) / 2) for j in range(-3, 4)] for i in range(-3, 4)]
    total = sum(map(sum, g))
    assert out.pixels[7, 7] == pytest.approx(1.0 / total, rel=1e-14)
    assert out.pixels[7, 7] == pytest.approx(0.15924112569070245, rel=1e-14)


def test_smooth_disabled_is_error():
    with pytest.raises(ValueError):
        gaussian_smooth(ImageGrid([[0.1]]), SmoothingSpec(False))


def test_kernel_radius_floor():
    with pytest.raises(ValueError):
        SmoothingSpec(True, sigma=2.0, kernel_radius=5)
    assert SmoothingSpec(True, sigma=2.0).kernel_radius == 6


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (10, 10), elements=st.floats(0, 1)),
       st.floats(0.3, 3.0))
def test_smooth_preserves_mean_and_max(pixels, sigma):
    img = ImageGrid(pixels)
    out = gaussian_smooth(img, SmoothingSpec(True, sigma))
    assert abs(out.pixels.mean() - pixels.mean()) <= 1e-10
    assert out.pixels.max() <= pixels.max() + 1e-12


def test_imagegrid_validation():
    with pytest.raises(ValueError, match="non-square"):
        ImageGrid(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        ImageGrid(np.zeros(5))
    assert ImageGrid(np.arange(9.0)).n == 3
