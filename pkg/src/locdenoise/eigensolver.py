"""Full-spectrum symmetric eigendecomposition of the image Hamiltonian."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hamiltonian import Hamiltonian

DEFAULT_DIM_CAP = 16384


class DimensionCapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Eigenpairs in ascending eigenvalue order.

    ``modes`` is mode-major: ``modes[k]`` is the unit eigenvector for
    ``eigenvalues[k]``.  Each vector's largest-magnitude entry (lowest index
    on ties) is positive.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def vectors(self) -> np.ndarray:
        """Column view, ``vectors[:, k] == modes[k]``."""
        return self.modes.T

    def write_eigenvalues(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "eigenvalue"])
            for k, lam in enumerate(self.eigenvalues):
                w.writerow([k, repr(float(lam))])


def fix_signs(modes: np.ndarray) -> np.ndarray:
    """Flip rows of ``modes`` so the largest-|.| entry of each is positive."""
    pivot = np.argmax(np.abs(modes), axis=1)  # argmax returns the first maximum
    signs = np.sign(modes[np.arange(modes.shape[0]), pivot])
    signs[signs == 0] = 1.0
    return modes * signs[:, None]


def eigendecompose_dense(h: np.ndarray) -> EigenBasis:
    """Decompose an explicit symmetric matrix."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("operator has non-finite entries")
    if not np.array_equal(h, h.T):
        raise ValueError("operator is not symmetric")
    w, v = scipy.linalg.eigh(h, driver="evd", check_finite=False)
    modes = np.ascontiguousarray(fix_signs(v.T))
    w.setflags(write=False)
    modes.setflags(write=False)
    return EigenBasis(w, modes)


def eigendecompose(ham: Hamiltonian, cap: int = DEFAULT_DIM_CAP) -> EigenBasis:
    if ham.dim > cap:
        side = int(np.sqrt(cap))
        raise DimensionCapError(
            f"operator dimension {ham.dim} exceeds cap {cap}; a full dense solve "
            f"needs O(dim^2) memory. Downsample to at most {side}x{side} pixels "
            f"or raise the cap explicitly.")
    return eigendecompose_dense(ham.to_dense())
