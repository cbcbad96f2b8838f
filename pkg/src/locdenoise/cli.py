"""Command-line entry point.

Subcommands: denoise, analyze, noise, metrics, bench, sweep-hbar.  Tunables
come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines, then command-line flags.  Results are printed as
``key=value`` lines on stdout.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .bench import SWEEP_ALPHAS, bench_run, sweep_hbar, write_bench_csv
from .denoise import DenoiseConfig, analyze, classify, decompose, finish
from .eigensolver import DEFAULT_DIM_CAP
from .hamiltonian import LaplacianMode
from .image import SmoothingSpec, load_image, save_image
from .localization import (
    DEFAULT_BINS, ModeSelection, write_histogram_csv, write_spectrum_csv,
)
from .metrics import psnr, snr_db, ssim
from .noise import NoiseSpec, add_poisson_noise
from .phantoms import KINDS, make_phantom

log = logging.getLogger("locdenoise")


@dataclass(frozen=True)
class CliConfig:
    laplacian_mode: str = LaplacianMode.LITERAL.value
    alpha: float = 1.0
    mass: float = 1.0
    threshold_multiplier: float = 1.0
    bin_count: int = DEFAULT_BINS
    smooth: bool = False
    sigma: float = 1.0
    kernel_radius: int = 0
    dim_cap: int = DEFAULT_DIM_CAP
    seed: int = 0

    def denoise_config(self, all_modes: bool = False) -> DenoiseConfig:
        return DenoiseConfig(
            laplacian_mode=LaplacianMode(self.laplacian_mode),
            alpha=self.alpha,
            mass=self.mass,
            threshold_multiplier=self.threshold_multiplier,
            bin_count=self.bin_count,
            smoothing=SmoothingSpec(self.smooth, self.sigma, self.kernel_radius),
            dim_cap=self.dim_cap,
            all_modes=all_modes,
        )


def _coerce(name, raw: str):
    kind = {f.name: f.type for f in fields(CliConfig)}[name]
    if kind == "bool":
        if raw.strip().lower() in ("1", "true", "yes", "on"):
            return True
        if raw.strip().lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    return {"int": int, "float": float, "str": str}[kind](raw.strip())


def read_config_file(path) -> dict:
    known = {f.name for f in fields(CliConfig)}
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, value)
    return out


def resolve_config(args) -> CliConfig:
    cfg = CliConfig()
    if getattr(args, "config", None):
        cfg = replace(cfg, **read_config_file(args.config))
    flags = {f.name: getattr(args, f.name) for f in fields(CliConfig)
             if getattr(args, f.name, None) is not None}
    return replace(cfg, **flags)


@contextmanager
def outputs():
    """Collect output paths; remove the ones already written if the body fails."""
    written: list[str] = []
    try:
        yield written
    except BaseException:
        for p in written:
            if os.path.exists(p):
                os.remove(p)
        raise


def _emit(pairs):
    for k, v in pairs:
        if isinstance(v, bool):
            v = int(v)
        print(f"{k}={v}")


def _float_list(text: str) -> list[float]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty comma-separated list")
    return [float(s) for s in items]


def _int_list(text: str) -> list[int]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty comma-separated list")
    return [int(s) for s in items]


# ---------------------------------------------------------------------------
# commands

def cmd_denoise(args) -> int:
    cfg = resolve_config(args)
    config = cfg.denoise_config(args.all_modes)
    img = load_image(args.input)
    clean = load_image(args.clean) if args.clean else None
    analysis = decompose(img, config)
    if not args.all_modes or args.spectrum_csv:
        classify(analysis, config)
    out, report = finish(img, analysis, args.all_modes, clean)
    report_path = args.report or args.output + ".report.txt"
    with outputs() as written:
        save_image(out, args.output, bit_depth=args.bit_depth)
        written.append(args.output)
        report.write(report_path)
        written.append(report_path)
        if args.spectrum_csv:
            sel = (ModeSelection.keep_all(analysis.basis.dim) if args.all_modes
                   else analysis.selection)
            write_spectrum_csv(args.spectrum_csv, analysis.spectrum, sel)
            written.append(args.spectrum_csv)
    _emit(report.items())
    return 0


def _analysis_summary(analysis):
    sp, sel, fit = analysis.spectrum, analysis.selection, analysis.fit
    return [
        ("n", int(round(np.sqrt(sp.size)))),
        ("modes", sp.size),
        ("hbar", analysis.params.hbar),
        ("hbar_prime", analysis.params.hbar_prime),
        ("median_pr", float(np.median(sp.pr))),
        ("localized_fraction", float(np.mean(sp.pr < sel.pr_threshold))),
        ("lambda0", fit.lambda0),
        ("gamma", fit.gamma),
        ("fit_rms", fit.residual),
        ("pr_threshold", sel.pr_threshold),
        ("kept_count", sel.kept_count),
        ("discarded_count", sel.discarded_count),
        ("compression_ratio", sel.compression_ratio),
        ("fallback", analysis.fallback),
        ("low_band", "" if sel.low_band is None else "%r:%r" % sel.low_band),
        ("high_band", "" if sel.high_band is None else "%r:%r" % sel.high_band),
    ]


def _write_analysis(outdir, analysis, written, stem="", figures=True):
    from .plotting import plot_histogram, plot_spectrum

    os.makedirs(outdir, exist_ok=True)
    paths = {k: os.path.join(outdir, f"{stem}{k}") for k in
             ("spectrum.csv", "histogram.csv", "spectrum.svg", "histogram.svg")}
    write_spectrum_csv(paths["spectrum.csv"], analysis.spectrum, analysis.selection)
    written.append(paths["spectrum.csv"])
    write_histogram_csv(paths["histogram.csv"], analysis.histogram, analysis.fit)
    written.append(paths["histogram.csv"])
    if figures:
        plot_spectrum(paths["spectrum.svg"], analysis.spectrum, analysis.selection)
        written.append(paths["spectrum.svg"])
        plot_histogram(paths["histogram.svg"], analysis.histogram, analysis.fit,
                       analysis.selection.pr_threshold)
        written.append(paths["histogram.svg"])
    return paths


def cmd_analyze(args) -> int:
    cfg = resolve_config(args)
    img = load_image(args.input)
    analysis = analyze(img, cfg.denoise_config())
    with outputs() as written:
        _write_analysis(args.outdir, analysis, written, figures=not args.no_figures)
    _emit(_analysis_summary(analysis))
    return 0


def cmd_noise(args) -> int:
    img = load_image(args.input)
    seed = args.seed if args.seed is not None else 0
    noisy, spec = add_poisson_noise(img, NoiseSpec(args.snr_db, seed))
    with outputs() as written:
        save_image(noisy, args.output, bit_depth=args.bit_depth)
        written.append(args.output)
    _emit([("target_snr_db", spec.target_snr_db), ("achieved_snr_db", spec.achieved_snr_db),
           ("scale", spec.scale), ("seed", seed)])
    return 0


def cmd_metrics(args) -> int:
    ref, test = load_image(args.reference), load_image(args.test)
    pairs = [("psnr_db", psnr(ref, test)), ("ssim", ssim(ref, test))]
    if np.any(ref.pixels != 0):
        pairs.append(("snr_db", snr_db(ref, test)))
    _emit(pairs)
    return 0


def cmd_bench(args) -> int:
    from .plotting import plot_bench

    cfg = resolve_config(args)
    if args.input:
        clean = load_image(args.input)
    else:
        clean = make_phantom(args.phantom, args.size, cfg.seed)
    rows = bench_run(clean, args.snrs, args.seeds, cfg.denoise_config(), workers=args.workers)
    figure = args.figure or os.path.splitext(args.output)[0] + ".svg"
    with outputs() as written:
        write_bench_csv(args.output, rows)
        written.append(args.output)
        if not args.no_figures:
            plot_bench(figure, rows)
            written.append(figure)
    _emit([("rows", len(rows)), ("csv", args.output)])
    for snr in args.snrs:
        for method in ("all_modes", "selected_modes"):
            sel = [r for r in rows if r.snr_db == snr and r.method == method]
            _emit([(f"mean_psnr_db[{snr:g},{method}]", float(np.mean([r.psnr_db for r in sel]))),
                   (f"mean_ssim[{snr:g},{method}]", float(np.mean([r.ssim for r in sel])))])
        noisy = [r.noisy_psnr_db for r in rows if r.snr_db == snr and r.method == "all_modes"]
        _emit([(f"mean_noisy_psnr_db[{snr:g}]", float(np.mean(noisy)))])
    return 0


def cmd_sweep_hbar(args) -> int:
    from .plotting import plot_sweep

    cfg = resolve_config(args)
    img = load_image(args.input)
    points = sweep_hbar(img, args.alphas, cfg.denoise_config())
    os.makedirs(args.outdir, exist_ok=True)
    summary = os.path.join(args.outdir, "summary.csv")
    with outputs() as written:
        for p in points:
            path = os.path.join(args.outdir, f"spectrum_alpha{p.alpha:g}.csv")
            write_spectrum_csv(path, p.analysis.spectrum, p.analysis.selection)
            written.append(path)
        with open(summary, "w") as fh:
            written.append(summary)
            fh.write("alpha,hbar_prime,median_pr,localized_fraction\n")
            for p in points:
                fh.write(f"{p.alpha!r},{p.hbar_prime!r},{p.median_pr!r},{p.localized_fraction!r}\n")
        if not args.no_figures:
            fig = os.path.join(args.outdir, "sweep.svg")
            plot_sweep(fig, points)
            written.append(fig)
    for p in points:
        _emit([(f"median_pr[{p.alpha:g}]", p.median_pr),
               (f"localized_fraction[{p.alpha:g}]", p.localized_fraction)])
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_tuning(p):
    g = p.add_argument_group("model")
    g.add_argument("--config", help="flat key=value file; flags override it")
    g.add_argument("--laplacian-mode", dest="laplacian_mode",
                   choices=[m.value for m in LaplacianMode])
    g.add_argument("--alpha", type=float, help="hbar scale factor (default 1)")
    g.add_argument("--mass", type=float, help="particle mass (default 1)")
    g.add_argument("-c", "--threshold-multiplier", dest="threshold_multiplier", type=float,
                   help="threshold = lambda0 - c * gamma (default 1)")
    g.add_argument("--bins", dest="bin_count", type=int, help="PR histogram bins (default 64)")
    g.add_argument("--smooth", action="store_const", const=True, default=None,
                   help="Gaussian pre-smoothing before building the basis")
    g.add_argument("--sigma", type=float)
    g.add_argument("--kernel-radius", dest="kernel_radius", type=int)
    g.add_argument("--dim-cap", dest="dim_cap", type=int,
                   help=f"largest operator dimension accepted (default {DEFAULT_DIM_CAP})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locdenoise", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise an image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--all-modes", action="store_true", help="keep every mode (baseline)")
    p.add_argument("--report", help="report path (default OUTPUT.report.txt)")
    p.add_argument("--spectrum-csv")
    p.add_argument("--clean", help="clean reference image for PSNR/SSIM")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    _add_tuning(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("analyze", help="PR spectrum, histogram, fit and figures")
    p.add_argument("input")
    p.add_argument("--outdir", default=".")
    p.add_argument("--no-figures", action="store_true")
    _add_tuning(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("noise", help="add Poisson noise at a target SNR")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--snr-db", dest="snr_db", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("metrics", help="PSNR/SSIM of TEST against REFERENCE")
    p.add_argument("reference")
    p.add_argument("test")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="all-modes vs selected-modes benchmark")
    p.add_argument("--phantom", choices=KINDS, default="blocks")
    p.add_argument("--input", help="use this clean image instead of a phantom")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--snrs", type=_float_list, required=True)
    p.add_argument("--seeds", type=_int_list, default=[1])
    p.add_argument("--seed", type=int, help="phantom seed (default 0)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", default="bench.csv")
    p.add_argument("--figure", help="figure path (default next to the CSV)")
    p.add_argument("--no-figures", action="store_true")
    _add_tuning(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep-hbar", help="PR spectra for scaled Planck constants")
    p.add_argument("input")
    p.add_argument("--alphas", type=_float_list, default=list(SWEEP_ALPHAS))
    p.add_argument("--outdir", default=".")
    p.add_argument("--no-figures", action="store_true")
    _add_tuning(p)
    p.set_defaults(func=cmd_sweep_hbar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
