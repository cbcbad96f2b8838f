"""Static figures written next to the CSV outputs (SVG by default)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps the SVG bytes reproducible
_SVG_META = {"Date": None, "Creator": None}
plt.rcParams["svg.hashsalt"] = "locdenoise"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fig.savefig(path, metadata=_SVG_META if str(path).endswith(".svg") else None)
    plt.close(fig)


def plot_spectrum(path, spectrum, selection=None, title=None):
    """Participation ratio against eigenvalue; kept modes highlighted."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ev, pr = spectrum.eigenvalues, spectrum.pr
    if selection is not None and not np.all(selection.keep_mask):
        keep = selection.keep_mask
        ax.scatter(ev[~keep], pr[~keep], s=3, c="0.6", label="discarded", rasterized=False)
        ax.scatter(ev[keep], pr[keep], s=3, c="tab:red", label="kept")
        ax.axhline(selection.pr_threshold, ls="--", lw=0.8, c="k", label="threshold")
        ax.legend(loc="best", fontsize=8, markerscale=3)
    else:
        ax.scatter(ev, pr, s=3, c="tab:blue")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("normalized participation ratio")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_histogram(path, hist, fit=None, threshold=None, title=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = np.diff(hist.bin_edges)
    ax.bar(hist.bin_edges[:-1], hist.counts, width=widths, align="edge",
           color="0.75", edgecolor="0.4", lw=0.3, label="modes")
    if fit is not None:
        x = np.linspace(hist.bin_edges[0], hist.bin_edges[-1], 400)
        ax.plot(x, fit(x), c="tab:red", lw=1.2,
                label=f"Lorentzian  $\\lambda_0$={fit.lambda0:.4f}, $\\Gamma$={fit.gamma:.4f}")
    if threshold is not None and np.isfinite(threshold):
        ax.axvline(threshold, ls="--", lw=0.8, c="k", label="threshold")
    ax.set_xlabel("normalized participation ratio")
    ax.set_ylabel("mode count")
    ax.legend(loc="upper left", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(path, points):
    """One PR-vs-eigenvalue panel per alpha."""
    fig, axes = plt.subplots(1, len(points), figsize=(3 * len(points), 3), sharey=True,
                             squeeze=False)
    for ax, p in zip(axes[0], points):
        sp = p.analysis.spectrum
        ax.scatter(sp.eigenvalues, sp.pr, s=2)
        ax.set_title(f"$\\alpha$={p.alpha:g}", fontsize=9)
        ax.set_xlabel("eigenvalue", fontsize=8)
    axes[0][0].set_ylabel("normalized PR")
    fig.tight_layout()
    _save(fig, path)


def plot_bench(path, rows):
    """Mean PSNR and SSIM against input SNR, one line per method."""
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.5))
    for method in sorted({r.method for r in rows}):
        snrs = sorted({r.snr_db for r in rows if r.method == method})
        ps = [np.mean([r.psnr_db for r in rows if r.method == method and r.snr_db == s])
              for s in snrs]
        ss = [np.mean([r.ssim for r in rows if r.method == method and r.snr_db == s])
              for s in snrs]
        a1.plot(snrs, ps, marker="o", label=method)
        a2.plot(snrs, ss, marker="o", label=method)
    a1.set_xlabel("input SNR (dB)")
    a1.set_ylabel("PSNR (dB)")
    a2.set_xlabel("input SNR (dB)")
    a2.set_ylabel("SSIM")
    a1.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
