"""Image denoising by participation-ratio selection of Hamiltonian eigenmodes."""

from .bench import bench_run, sweep_hbar
from .denoise import DenoiseConfig, DenoiseReport, analyze, denoise_pipeline, project, reconstruct
from .eigensolver import EigenBasis, eigendecompose
from .hamiltonian import Hamiltonian, LaplacianMode, PlanckParams, build_hamiltonian, estimate_hbar
from .image import ImageGrid, SmoothingSpec, gaussian_smooth, load_image, save_image
from .localization import (
    LorentzianFit, ModeSelection, ModeSpectrum, PrHistogram, fit_lorentzian,
    participation_ratios, pr_histogram, select_modes,
)
from .metrics import psnr, snr_db, ssim
from .noise import NoiseSpec, add_poisson_noise
from .phantoms import make_phantom

__version__ = "0.1.0"
