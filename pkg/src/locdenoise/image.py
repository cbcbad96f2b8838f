"""Square grayscale images: PGM/PNG I/O, normalization and Gaussian pre-smoothing.

Intensities are held as float64 in ``[0, 1]`` after loading.  In-memory
images produced by noise synthesis or truncated reconstruction may leave
that range; values are only clamped when written to disk.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported or non-square image files."""


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Square ``N x N`` intensity field stored row-major.

    Pixel ``(r, c)`` maps to flat index ``r * N + c``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim == 1:
            n = math.isqrt(arr.size)
            if n * n != arr.size:
                raise ValueError(f"pixel count {arr.size} is not a perfect square")
            arr = arr.reshape(n, n)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"non-square image: shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("zero-size image")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def n(self) -> int:
        return self.pixels.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return self.pixels.reshape(-1)

    def __repr__(self):
        return f"ImageGrid(N={self.n}, min={self.pixels.min():.4g}, max={self.pixels.max():.4g})"


@dataclass(frozen=True)
class SmoothingSpec:
    enabled: bool = False
    sigma: float = 1.0
    kernel_radius: int = field(default=0)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        radius = self.kernel_radius or math.ceil(3 * self.sigma)
        if self.enabled and radius < math.ceil(3 * self.sigma):
            raise ValueError(
                f"kernel_radius {radius} < ceil(3*sigma) = {math.ceil(3 * self.sigma)}")
        object.__setattr__(self, "kernel_radius", int(radius))


# ---------------------------------------------------------------------------
# PGM

def _pgm_tokens(data: bytes):
    """Yield (token, end_offset) for header tokens, skipping ``#`` comments."""
    i, n = 0, len(data)
    while i < n:
        ch = data[i:i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a P2 or P5 file and return ``(integer array, maxval)``."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        if magic not in (b"P2", b"P5"):
            raise ImageFormatError(f"unsupported format: magic {magic!r}")
        width = int(next(tokens)[0])
        height = int(next(tokens)[0])
        maxval_tok, end = next(tokens)
        maxval = int(maxval_tok)
    except StopIteration:
        raise ImageFormatError("truncated PGM header") from None
    except ValueError as exc:
        if isinstance(exc, ImageFormatError):
            raise
        raise ImageFormatError(f"malformed PGM header: {exc}") from None
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid maxval {maxval}")
    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        start = end + 1  # exactly one whitespace byte after maxval
        raw = data[start:start + count * dtype.itemsize]
        if len(raw) != count * dtype.itemsize:
            raise ImageFormatError("truncated PGM raster")
        values = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        body = data[end:].split()
        if len(body) < count:
            raise ImageFormatError("truncated PGM raster")
        values = np.array([int(v) for v in body[:count]], dtype=np.int64)
    if values.size and values.max() > maxval:
        raise ImageFormatError("sample exceeds maxval")
    return values.reshape(height, width), maxval


def write_pgm(path, values: np.ndarray, maxval: int, binary: bool = True):
    height, width = values.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            dtype = ">u2" if maxval > 255 else "u1"
            fh.write(values.astype(dtype).tobytes())
        else:
            for row in values:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


# ---------------------------------------------------------------------------
# PNG (via Pillow)

def read_png(path) -> tuple[np.ndarray, int]:
    with Image.open(path) as im:
        if im.format != "PNG":
            raise ImageFormatError(f"unsupported format: {im.format}")
        mode = im.mode
        if mode == "L":
            return np.asarray(im, dtype=np.int64), 255
        if mode in ("I;16", "I;16B", "I"):
            arr = np.asarray(im).astype(np.int64)
            return arr, 65535
        if mode == "1":
            return np.asarray(im.convert("L"), dtype=np.int64), 255
    raise ImageFormatError(f"unsupported PNG mode {mode!r} (grayscale only)")


def write_png(path, values: np.ndarray, maxval: int):
    if maxval == 255:
        Image.fromarray(values.astype(np.uint8), mode="L").save(path, format="PNG")
    else:
        Image.fromarray(values.astype(np.uint16)).save(path, format="PNG")


# ---------------------------------------------------------------------------

def _kind(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".pgm", ".pnm"):
        return "pgm"
    if ext == ".png":
        return "png"
    raise ImageFormatError(f"unsupported format: extension {ext!r}")


def load_image(path) -> ImageGrid:
    """Load a PGM (P2/P5) or grayscale PNG and scale samples by the format maximum."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    values, maxval = read_pgm(path) if _kind(path) == "pgm" else read_png(path)
    h, w = values.shape
    if h == 0 or w == 0:
        raise ImageFormatError("zero-size image")
    if h != w:
        raise ImageFormatError(f"non-square image ({h}x{w})")
    return ImageGrid(values / float(maxval))


def quantize(pixels: np.ndarray, maxval: int) -> np.ndarray:
    """Clamp to [0, 1] and quantize with round-half-up."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if not np.all(np.isfinite(pixels)):
        raise ValueError("cannot save non-finite intensities")
    return np.floor(np.clip(pixels, 0.0, 1.0) * maxval + 0.5).astype(np.int64)


def save_image(img: ImageGrid, path, bit_depth: int = 8, binary: bool = True):
    """Write ``img`` as PGM or PNG, chosen by extension.

    ``bit_depth`` is 8 or 16; ``binary`` selects P5 over P2 for PGM.
    """
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    maxval = 255 if bit_depth == 8 else 65535
    values = quantize(img.pixels, maxval)
    if _kind(path) == "pgm":
        write_pgm(path, values, maxval, binary=binary)
    else:
        write_png(path, values, maxval)


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _smooth_axis(a: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    r = kernel.size // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    # half-sample symmetric reflection keeps the mean exact for symmetric kernels
    padded = np.pad(a, pad, mode="symmetric")
    out = np.zeros_like(a)
    n = a.shape[axis]
    for k, w in enumerate(kernel):
        sl = [slice(None), slice(None)]
        sl[axis] = slice(k, k + n)
        out += w * padded[tuple(sl)]
    return out


def gaussian_smooth(img: ImageGrid, spec: SmoothingSpec) -> ImageGrid:
    """Separable Gaussian blur with reflect-at-border padding, clamped to [0, 1]."""
    if not spec.enabled:
        raise ValueError("gaussian_smooth called with smoothing disabled")
    kernel = gaussian_kernel(spec.sigma, spec.kernel_radius)
    out = _smooth_axis(_smooth_axis(img.pixels, kernel, 0), kernel, 1)
    return ImageGrid(np.clip(out, 0.0, 1.0))
