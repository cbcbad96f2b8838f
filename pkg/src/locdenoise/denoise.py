"""Projection onto the adaptive eigenbasis, selective reconstruction, end-to-end pipeline."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .eigensolver import DEFAULT_DIM_CAP, EigenBasis, eigendecompose
from .hamiltonian import LaplacianMode, PlanckParams, build_hamiltonian
from .image import ImageGrid, SmoothingSpec, gaussian_smooth
from .localization import (
    DEFAULT_BINS, EmptySelectionError, LorentzianFit, ModeSelection, ModeSpectrum,
    PrHistogram, fit_lorentzian, participation_ratios, pr_histogram, select_modes,
)
from .metrics import psnr, ssim

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DenoiseConfig:
    laplacian_mode: LaplacianMode = LaplacianMode.LITERAL
    alpha: float = 1.0
    mass: float = 1.0
    threshold_multiplier: float = 1.0
    bin_count: int = DEFAULT_BINS
    smoothing: SmoothingSpec = field(default_factory=SmoothingSpec)
    dim_cap: int = DEFAULT_DIM_CAP
    all_modes: bool = False

    def __post_init__(self):
        object.__setattr__(self, "laplacian_mode", LaplacianMode(self.laplacian_mode))
        if not self.alpha > 0 or not self.mass > 0 or not self.threshold_multiplier > 0:
            raise ValueError("alpha, mass and threshold_multiplier must be positive")
        if self.bin_count < 8:
            raise ValueError("bin_count must be at least 8")


def project(img: ImageGrid, basis: EigenBasis) -> np.ndarray:
    """Coefficients ``c[n] = e_n . vec(img)``."""
    if img.vector.size != basis.dim:
        raise ValueError(f"image has {img.vector.size} pixels, basis has dimension {basis.dim}")
    return basis.modes @ img.vector


@dataclass(frozen=True, eq=False)
class CompressedBasis:
    """The kept modes of a basis, copied into one contiguous mode-major block."""

    indices: np.ndarray
    modes: np.ndarray
    dim: int

    @property
    def size(self) -> int:
        return self.indices.size


def compress(basis: EigenBasis, selection: ModeSelection) -> CompressedBasis:
    mask = np.asarray(selection.keep_mask, dtype=bool)
    if mask.size != basis.dim:
        raise ValueError("selection and basis dimensions disagree")
    if mask.all():
        return CompressedBasis(np.arange(basis.dim), basis.modes, basis.dim)
    idx = np.flatnonzero(mask)
    return CompressedBasis(idx, np.ascontiguousarray(basis.modes[idx]), basis.dim)


def synthesize(kept_coeffs: np.ndarray, compressed: CompressedBasis) -> ImageGrid:
    """Sum ``c_k e_k`` over the modes held in ``compressed``."""
    if compressed.size == 0:
        return ImageGrid(np.zeros(compressed.dim))
    return ImageGrid(kept_coeffs @ compressed.modes)


def reconstruct(coeffs: np.ndarray, basis: EigenBasis, selection: ModeSelection) -> ImageGrid:
    """Sum ``c[n] e_n`` over the kept modes; no clamping."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.size != basis.dim:
        raise ValueError(f"{coeffs.size} coefficients for a basis of dimension {basis.dim}")
    compressed = compress(basis, selection)
    return synthesize(coeffs[compressed.indices], compressed)


@dataclass
class Analysis:
    """Everything computed before projection: operator scale, basis and selection."""

    params: PlanckParams
    basis: EigenBasis
    spectrum: ModeSpectrum | None = None
    histogram: PrHistogram | None = None
    fit: LorentzianFit | None = None
    selection: ModeSelection | None = None
    compressed: CompressedBasis | None = None
    fallback: bool = False
    t_eigen_s: float = 0.0
    t_fit_s: float = 0.0


def decompose(img: ImageGrid, config: DenoiseConfig) -> Analysis:
    basis_img = gaussian_smooth(img, config.smoothing) if config.smoothing.enabled else img
    params = PlanckParams.from_image(basis_img, config.alpha, config.mass)
    ham = build_hamiltonian(basis_img, params, config.laplacian_mode)
    t0 = time.perf_counter()
    basis = eigendecompose(ham, cap=config.dim_cap)
    return Analysis(params, basis, t_eigen_s=time.perf_counter() - t0)


def classify(analysis: Analysis, config: DenoiseConfig) -> Analysis:
    """Fill in PR spectrum, histogram, fit, selection and the compressed basis.

    An empty selection falls back to keeping every mode and sets ``fallback``.
    """
    t0 = time.perf_counter()
    spectrum = participation_ratios(analysis.basis)
    hist = pr_histogram(spectrum, config.bin_count)
    fit = fit_lorentzian(hist)
    try:
        selection = select_modes(spectrum, fit, config.threshold_multiplier)
        fallback = False
    except EmptySelectionError as exc:
        log.warning("%s", exc)
        selection = ModeSelection.keep_all(spectrum.size)
        fallback = True
    analysis.spectrum, analysis.histogram, analysis.fit = spectrum, hist, fit
    analysis.selection, analysis.fallback = selection, fallback
    analysis.compressed = compress(analysis.basis, selection)
    analysis.t_fit_s = time.perf_counter() - t0
    return analysis


def analyze(img: ImageGrid, config: DenoiseConfig) -> Analysis:
    return classify(decompose(img, config), config)


@dataclass
class DenoiseReport:
    method: str
    n: int
    hbar: float
    hbar_prime: float
    kept_count: int
    discarded_count: int
    compression_ratio: float
    pr_threshold: float = float("nan")
    lambda0: float = float("nan")
    gamma: float = float("nan")
    fallback: bool = False
    psnr_db: float = float("nan")
    ssim: float = float("nan")
    t_eigen_s: float = 0.0
    t_fit_s: float = 0.0
    t_project_s: float = 0.0
    t_reconstruct_s: float = 0.0

    TIMING_FIELDS = ("t_eigen_s", "t_fit_s", "t_project_s", "t_reconstruct_s")

    def items(self):
        return list(asdict(self).items())

    def lines(self) -> list[str]:
        out = []
        for k, v in self.items():
            if isinstance(v, bool):
                v = int(v)
            out.append(f"{k}={v}")
        return out

    def write(self, path):
        with open(path, "w") as fh:
            fh.write("\n".join(self.lines()) + "\n")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def finish(img: ImageGrid, analysis: Analysis, all_modes: bool,
           clean: ImageGrid | None = None) -> tuple[ImageGrid, DenoiseReport]:
    """Project ``img`` and reconstruct with all modes or with the analysis selection.

    Only the coefficients of kept modes are computed, against the compressed
    basis built during classification.
    """
    if img.vector.size != analysis.basis.dim:
        raise ValueError("image and basis dimensions disagree")
    if all_modes:
        selection = ModeSelection.keep_all(analysis.basis.dim)
        compressed = compress(analysis.basis, selection)
    else:
        if analysis.selection is None:
            raise ValueError("analysis has no selection; run classify() first")
        selection, compressed = analysis.selection, analysis.compressed
    t0 = time.perf_counter()
    kept_coeffs = compressed.modes @ img.vector
    t1 = time.perf_counter()
    out = synthesize(kept_coeffs, compressed)
    t2 = time.perf_counter()
    fit = analysis.fit
    report = DenoiseReport(
        method="all_modes" if all_modes else "selected_modes",
        n=img.n,
        hbar=analysis.params.hbar,
        hbar_prime=analysis.params.hbar_prime,
        kept_count=selection.kept_count,
        discarded_count=selection.discarded_count,
        compression_ratio=selection.compression_ratio,
        pr_threshold=float("nan") if all_modes else selection.pr_threshold,
        lambda0=fit.lambda0 if fit is not None and not all_modes else float("nan"),
        gamma=fit.gamma if fit is not None and not all_modes else float("nan"),
        fallback=False if all_modes else analysis.fallback,
        t_eigen_s=analysis.t_eigen_s,
        t_fit_s=0.0 if all_modes else analysis.t_fit_s,
        t_project_s=t1 - t0,
        t_reconstruct_s=t2 - t1,
    )
    if clean is not None:
        report.psnr_db = psnr(clean, out)
        report.ssim = ssim(clean, out) if img.n >= 11 else float("nan")
    return out, report


def denoise_pipeline(img: ImageGrid, config: DenoiseConfig = DenoiseConfig(),
                     clean: ImageGrid | None = None) -> tuple[ImageGrid, DenoiseReport]:
    """Estimate hbar, build H, decompose, select low-PR modes and reconstruct.

    With ``config.all_modes`` the PR classification is skipped and the full
    basis is used, which reproduces the input.
    """
    analysis = decompose(img, config)
    if not config.all_modes:
        classify(analysis, config)
    return finish(img, analysis, config.all_modes, clean)
