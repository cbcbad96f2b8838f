"""Participation ratios, their histogram, Lorentzian peak fit and mode selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenBasis

DEFAULT_BINS = 64
MIN_FIT_BINS = 8


class DegenerateRangeError(ValueError):
    pass


class FitError(RuntimeError):
    pass


class EmptySelectionError(RuntimeError):
    """No mode lies below the threshold; callers should fall back to keeping every mode."""


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    eigenvalues: np.ndarray
    pr: np.ndarray

    @property
    def size(self) -> int:
        return self.pr.size

    @property
    def mode_index(self) -> np.ndarray:
        return np.arange(self.size)


@dataclass(frozen=True, eq=False)
class PrHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def bin_count(self) -> int:
        return self.counts.size

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class LorentzianFit:
    lambda0: float
    gamma: float
    amplitude: float
    residual: float

    def __call__(self, x):
        return lorentzian(x, self.lambda0, self.gamma, self.amplitude)

    @property
    def peak(self) -> float:
        return self.amplitude / (np.pi * self.gamma)


@dataclass(frozen=True, eq=False)
class ModeSelection:
    keep_mask: np.ndarray
    pr_threshold: float
    multiplier: float
    # (min, max) eigenvalue of kept modes in the lower / upper half of the spectrum
    low_band: tuple[float, float] | None = None
    high_band: tuple[float, float] | None = None

    @property
    def kept_count(self) -> int:
        return int(np.count_nonzero(self.keep_mask))

    @property
    def discarded_count(self) -> int:
        return int(self.keep_mask.size - self.kept_count)

    @property
    def compression_ratio(self) -> float:
        return self.discarded_count / self.keep_mask.size

    @classmethod
    def keep_all(cls, size: int) -> "ModeSelection":
        return cls(np.ones(size, dtype=bool), np.inf, np.inf)


def participation_ratios(basis: EigenBasis) -> ModeSpectrum:
    """Per-mode ratio ``(sum e^2)^2 / (N_pix * sum e^4)``, in ``[1/N_pix, 1]``."""
    modes = basis.modes
    n_pix = modes.shape[1]
    sq = modes * modes
    s2 = sq.sum(axis=1)
    s4 = (sq * sq).sum(axis=1)
    if np.any(s4 == 0):
        raise ValueError("basis contains a zero-norm eigenvector")
    return ModeSpectrum(basis.eigenvalues, s2 * s2 / (n_pix * s4))


def pr_histogram(spectrum: ModeSpectrum, bin_count: int = DEFAULT_BINS) -> PrHistogram:
    """Equal-width histogram over ``[min pr, max pr]``; the last bin is closed."""
    if bin_count < 2:
        raise ValueError("bin_count must be at least 2")
    pr = spectrum.pr
    if pr.size == 0:
        raise ValueError("empty spectrum")
    lo, hi = float(pr.min()), float(pr.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        raise DegenerateRangeError("degenerate PR range: all participation ratios are equal")
    counts, edges = np.histogram(pr, bins=bin_count, range=(lo, hi))
    return PrHistogram(edges, counts)


def lorentzian(x, lambda0, gamma, amplitude=1.0):
    """``amplitude / pi * gamma / ((x - lambda0)**2 + gamma**2)``."""
    x = np.asarray(x, dtype=np.float64)
    return amplitude / np.pi * gamma / ((x - lambda0) ** 2 + gamma ** 2)


def _grid_search(x, y, n_centers, n_widths):
    span = x[-1] - x[0]
    step = span / max(x.size - 1, 1)
    centers = np.linspace(x[0], x[-1], n_centers)
    widths = np.geomspace(step / 4, span, n_widths)
    u = x[None, None, :] - centers[:, None, None]
    g = widths[None, :, None] / (np.pi * (u * u + widths[None, :, None] ** 2))
    amp = (g * y).sum(axis=2) / (g * g).sum(axis=2)
    amp = np.maximum(amp, 0.0)
    sse = ((amp[..., None] * g - y) ** 2).sum(axis=2)
    i, j = np.unravel_index(np.argmin(sse), sse.shape)
    return centers[i], widths[j], amp[i, j]


def _jacobian(x, lam0, gam, amp):
    u = x - lam0
    d = u * u + gam * gam
    g = gam / (np.pi * d)
    return np.column_stack([
        amp * gam / np.pi * 2 * u / (d * d),
        amp / np.pi * (u * u - gam * gam) / (d * d),
        g,
    ])


def _refine(x, y, p, max_iter=500):
    """Levenberg-damped Gauss-Newton on (lambda0, gamma, amplitude)."""
    lo, hi = x[0], x[-1]

    def sse(q):
        r = y - lorentzian(x, *q)
        return float(r @ r)

    cost = sse(p)
    damping = 1e-3
    for _ in range(max_iter):
        jac = _jacobian(x, *p)
        r = y - lorentzian(x, *p)
        jtj = jac.T @ jac
        grad = jac.T @ r
        accepted = False
        while damping < 1e16:
            a = jtj + damping * np.diag(np.diag(jtj))
            try:
                step = np.linalg.solve(a, grad)
            except np.linalg.LinAlgError:
                damping *= 10
                continue
            q = p + step
            if q[1] > 0 and q[2] > 0 and lo <= q[0] <= hi:
                new_cost = sse(q)
                if new_cost <= cost:
                    accepted = True
                    break
            damping *= 10
        if not accepted:
            break
        rel = abs(cost - new_cost) / max(cost, 1e-300)
        p, cost = q, new_cost
        damping = max(damping / 10, 1e-12)
        if rel < 1e-15 or np.all(np.abs(step) <= 1e-15 * (np.abs(p) + 1e-15)):
            break
    return p


def fit_lorentzian(hist: PrHistogram) -> LorentzianFit:
    """Unweighted least-squares Lorentzian fit to the histogram counts.

    A coarse grid over centre and width (amplitude in closed form) seeds a
    damped Gauss-Newton refinement of all three parameters.  The schedule
    is fixed, so identical histograms give identical fits.
    """
    x = hist.centers
    y = hist.counts.astype(np.float64)
    if np.count_nonzero(y) < MIN_FIT_BINS:
        raise FitError(f"need at least {MIN_FIT_BINS} non-empty bins to fit, "
                       f"got {np.count_nonzero(y)}")
    p0 = np.array(_grid_search(x, y, n_centers=4 * x.size + 1, n_widths=64))
    if p0[2] <= 0:
        raise FitError("no positive-amplitude Lorentzian matches the histogram")
    p = _refine(x, y, p0)
    if not np.all(np.isfinite(p)) or p[1] <= 0:
        raise FitError(f"fit diverged: parameters {p}")
    r = y - lorentzian(x, *p)
    return LorentzianFit(float(p[0]), float(p[1]), float(p[2]), float(np.sqrt(np.mean(r * r))))


def pr_threshold(spectrum: ModeSpectrum, fit: LorentzianFit, multiplier: float = 1.0) -> float:
    """Lower edge ``lambda0 - c * gamma`` of the fitted peak, floored at the smallest PR."""
    if not multiplier > 0:
        raise ValueError("threshold multiplier must be positive")
    return max(float(spectrum.pr.min()), fit.lambda0 - multiplier * fit.gamma)


def _band(eigenvalues, mask):
    if not mask.any():
        return None
    vals = eigenvalues[mask]
    return float(vals.min()), float(vals.max())


def select_modes(spectrum: ModeSpectrum, fit: LorentzianFit,
                 multiplier: float = 1.0) -> ModeSelection:
    """Keep the modes whose PR lies strictly below the fitted threshold."""
    threshold = pr_threshold(spectrum, fit, multiplier)
    keep = spectrum.pr < threshold
    if not keep.any():
        raise EmptySelectionError(
            f"no mode has PR below the threshold {threshold:.6g}; "
            "fall back to keeping all modes")
    half = spectrum.size // 2
    lower = np.arange(spectrum.size) < half
    return ModeSelection(
        keep, threshold, multiplier,
        low_band=_band(spectrum.eigenvalues, keep & lower),
        high_band=_band(spectrum.eigenvalues, keep & ~lower),
    )


def write_spectrum_csv(path, spectrum: ModeSpectrum, selection: ModeSelection | None = None):
    keep = selection.keep_mask if selection is not None else np.ones(spectrum.size, bool)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode_index", "eigenvalue", "participation_ratio", "kept"])
        for k in range(spectrum.size):
            w.writerow([k, repr(float(spectrum.eigenvalues[k])),
                        repr(float(spectrum.pr[k])), int(keep[k])])


def write_histogram_csv(path, hist: PrHistogram, fit: LorentzianFit | None = None):
    fitted = fit(hist.centers) if fit is not None else np.full(hist.bin_count, np.nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_center", "count", "fit_value"])
        for c, n, f in zip(hist.centers, hist.counts, fitted):
            w.writerow([repr(float(c)), int(n), repr(float(f))])
