"""Planck-constant estimate and the discrete image Hamiltonian.

The operator acts on the row-major vectorized image of ``N*N`` pixels::

    H[i, i]   = x[i] + 4 t
    H[i, i±1] = -t
    H[i, i±N] = -t

with ``t = (alpha * hbar)**2 / (2 * mass)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .image import ImageGrid


class LaplacianMode(str, Enum):
    #: couple every index pair ``(i, i+1)``, including row-end to next-row-start
    LITERAL = "literal"
    #: drop the ``(i, i+1)`` pairs that straddle a row boundary
    NO_ROW_WRAP = "no_row_wrap"


def estimate_hbar(img: ImageGrid) -> float:
    """Image-derived Planck constant, ``2 * ||x / max(x)||_2 / N``."""
    x = img.vector
    peak = x.max()
    if not peak > 0:
        raise ValueError("cannot estimate hbar: image maximum is not positive")
    return float(2.0 * np.sqrt(np.sum((x / peak) ** 2)) / img.n)


@dataclass(frozen=True)
class PlanckParams:
    hbar: float
    alpha: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "alpha", "mass"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def hbar_prime(self) -> float:
        return self.alpha * self.hbar

    @property
    def coupling(self) -> float:
        return self.hbar_prime ** 2 / (2.0 * self.mass)

    @classmethod
    def from_image(cls, img: ImageGrid, alpha: float = 1.0, mass: float = 1.0) -> "PlanckParams":
        return cls(estimate_hbar(img), alpha, mass)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Symmetric five-band operator; only the diagonal and upper bands are stored."""

    n: int
    diagonal: np.ndarray
    coupling: float
    mode: LaplacianMode
    near_band: np.ndarray  # H[i, i+1], length N*N - 1
    far_band: np.ndarray   # H[i, i+N], length N*N - N

    @property
    def dim(self) -> int:
        return self.n * self.n

    def to_sparse(self) -> sp.csr_matrix:
        d = self.dim
        diags = [self.diagonal]
        offsets = [0]
        if d > 1:
            diags += [self.near_band, self.near_band]
            offsets += [1, -1]
        if self.n > 1:
            diags += [self.far_band, self.far_band]
            offsets += [self.n, -self.n]
        return sp.diags(diags, offsets, shape=(d, d), format="csr")

    def to_dense(self) -> np.ndarray:
        d = self.dim
        h = np.zeros((d, d))
        idx = np.arange(d)
        h[idx, idx] = self.diagonal
        if d > 1:
            i = np.arange(d - 1)
            h[i, i + 1] = self.near_band
            h[i + 1, i] = self.near_band
        if self.n > 1:
            i = np.arange(d - self.n)
            h[i, i + self.n] = self.far_band
            h[i + self.n, i] = self.far_band
        return h

    def write_triplets(self, path):
        """Dump nonzero entries as ``row,col,value`` CSV."""
        coo = self.to_sparse().tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "col", "value"])
            for k in order:
                if coo.data[k] != 0:
                    w.writerow([int(coo.row[k]), int(coo.col[k]), repr(float(coo.data[k]))])


def build_hamiltonian(img: ImageGrid, params: PlanckParams,
                      mode: LaplacianMode | str = LaplacianMode.LITERAL) -> Hamiltonian:
    mode = LaplacianMode(mode)
    n = img.n
    d = n * n
    t = params.coupling
    diagonal = img.vector + 4.0 * t
    near = np.full(max(d - 1, 0), -t)
    if mode is LaplacianMode.NO_ROW_WRAP and n > 1:
        near[n - 1::n] = 0.0
    far = np.full(max(d - n, 0), -t)
    for a in (diagonal, near, far):
        a.setflags(write=False)
    return Hamiltonian(n, diagonal, t, mode, near, far)
