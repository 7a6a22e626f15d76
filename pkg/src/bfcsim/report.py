"""End-to-end reproduction pipeline: one config in, a full report plus artifacts out.

Chains the comb, interferometry, spectral-correlation, Schmidt, and CHSH
stages for a single cavity and writes every intermediate product (CSV) next
to a JSON report and a human-readable summary.  Output is deterministic for
a fixed config and seed: no timestamps enter any artifact, so repeated runs
are byte-identical.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import chsh as chsh_mod
from . import io as io_mod
from .comb import build_comb
from .config import TOOL_VERSION, SCHEMA_VERSION, RunConfig
from .hom import central_dip_width, locate_revivals, simulate_hom_trace
from .jsi import FilterSpec, crosstalk_db, filter_bandwidth_hz, scan_correlation_matrix
from .schmidt import (
    REFERENCE_IDEAL_K_FREQ,
    bin_counts,
    dimensionality_report,
    ideal_frequency_spectrum,
    jsa_from_jsi,
    schmidt_decompose,
    time_bin_eigenvalues,
    time_bin_spectrum_from_visibilities,
    window_limited_n_max,
)

LOCK_FILENAME = ".bfcsim.lock"

# Acceptance bands for headline numbers, keyed by cavity preset where they
# are preset-specific.
_K_TIME_BANDS = {"45ghz": (18.25, 18.35), "15ghz": (6.56, 6.86), "5ghz": (5.11, 5.21)}
_COMMON_BANDS = {
    "s_fringe": (2.769, 2.773),
    "s_chsh_analytic": (2.684, 2.688),
    "central_dip_width_ps": (3.2, 4.5),
}
_45GHZ_BANDS = {
    "revival_count": (61, 61),
    "revival_spacing_ps": (10.98, 11.08),
    "total_dimensionality": (648, 648),
    "time_dimensionality": (324, 324),
}


class StageError(RuntimeError):
    """A pipeline stage failed; partial artifacts stay on disk."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@dataclass
class ReproReport:
    cavity_label: str
    fsr_ghz: float
    linewidth_ghz: float
    finesse: float
    round_trip_ps: float
    envelope_shape: str
    n_max: int
    window_n_max: int
    revival_count: int
    revival_spacing_ps: float
    central_dip_width_ps: float
    central_visibility: float
    visibility_table: list[tuple[int, float, float]]
    k_time_theory: float
    k_time_fitted: float
    k_freq_ideal: float
    k_freq_ideal_reference: float | None
    k_freq_degraded: float
    crosstalk_db: float | None
    n_freq_bins: float
    n_time_bins: float
    product_nt_nomega: float
    product_kt_komega: float
    fringe_visibility: float
    s_fringe: float
    chsh_visibility: float
    s_chsh_analytic: float
    s_chsh_simulated: float
    s_sigma_simulated: float
    violation_sigmas_simulated: float
    time_dimensionality: int
    freq_dimensionality: int
    total_dimensionality: int
    config_hash: str
    tool_version: str = TOOL_VERSION
    schema_version: str = SCHEMA_VERSION
    bands: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, np.floating):
                value = float(value)
            if isinstance(value, list):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            out[key] = value
        return out


def _bands_for(preset: str) -> dict:
    bands = dict(_COMMON_BANDS)
    if preset in _K_TIME_BANDS:
        bands["k_time_theory"] = _K_TIME_BANDS[preset]
    if preset == "45ghz":
        bands.update(_45GHZ_BANDS)
    return {k: list(v) for k, v in bands.items()}


def run_report(config: RunConfig, out_dir: str | None = None) -> ReproReport:
    """Execute the full pipeline for one cavity and write all artifacts."""
    out = Path(out_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_FILENAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        os.close(fd)
    except FileExistsError:
        raise RuntimeError(
            f"output directory {out} is locked by another run (remove {lock} if stale)"
        )
    try:
        return _run_stages(config, out)
    finally:
        try:
            lock.unlink()
        except OSError:
            pass


def _stage(name: str, fn):
    try:
        return fn()
    except Exception as exc:
        raise StageError(name, exc) from exc


def _run_stages(config: RunConfig, out: Path) -> ReproReport:
    cavity = config.cavity
    source = config.source
    n_max = config.resolved_n_max()

    comb = _stage("comb", lambda: build_comb(cavity, source, n_max))

    def do_hom():
        step = config.hom.step_ps
        window = config.hom.window_ps
        delays = np.arange(-window, window + step / 2.0, step)
        trace = simulate_hom_trace(
            comb, delays, accidental_fraction=config.hom.accidental_fraction
        )
        io_mod.trace_to_csv(trace, out / "hom_trace.csv")
        # Fine scan of the central dip, as a zoomed inset: the wide scan's
        # step cannot resolve the base-to-base width.
        zoom_delays = np.arange(-12.0, 12.0 + 0.01, 0.02)
        zoom = simulate_hom_trace(
            comb, zoom_delays, accidental_fraction=config.hom.accidental_fraction
        )
        io_mod.trace_to_csv(zoom, out / "hom_trace_zoom.csv")
        return trace, zoom

    trace, zoom_trace = _stage("hom", do_hom)

    def do_revivals():
        records = locate_revivals(trace)
        io_mod.revivals_to_csv(records, out / "revivals.csv")
        return records

    revivals = _stage("revivals", do_revivals)
    centers = np.array([r.center_ps for r in revivals])
    spacing = float(np.mean(np.diff(centers))) if len(revivals) > 1 else math.nan
    central = next((r for r in revivals if r.n == 0), None)
    central_vis = central.visibility if central else math.nan

    dip_width = _stage("dip-width", lambda: central_dip_width(zoom_trace))

    def do_time_schmidt():
        window_n = window_limited_n_max(cavity, config.hom.window_ps)
        theory = time_bin_eigenvalues(cavity, window_n)
        points = [(r.n, r.visibility) for r in revivals if 0.0 < r.visibility <= 1.0]
        fitted = time_bin_spectrum_from_visibilities(points, window_n)
        io_mod.spectrum_to_csv(theory, out / "schmidt_time_theory.csv")
        io_mod.spectrum_to_csv(fitted, out / "schmidt_time_fitted.csv")
        return window_n, theory, fitted

    window_n, k_time_theory_spec, k_time_fitted_spec = _stage("schmidt-time", do_time_schmidt)

    def do_jsi():
        fwhm_hz = filter_bandwidth_hz(config.jsi.filter_fwhm_pm, source.degenerate_wavelength_nm)
        filt = FilterSpec(fwhm_hz=fwhm_hz, shape=config.jsi.filter_shape)
        max_bin = min(config.jsi.max_bin, comb.n_max)
        scan = scan_correlation_matrix(
            comb, filt, filt, max_bin, pump_power_mw=config.jsi.pump_power_mw
        )
        xtalk = crosstalk_db(scan)
        io_mod.jsi_to_csv(scan, out / "jsi_scan.csv")
        io_mod.export_json(
            out / "jsi_scan.json",
            {
                "crosstalk_db": xtalk,
                "filter_fwhm_pm": config.jsi.filter_fwhm_pm,
                "filter_fwhm_ghz": fwhm_hz / 1e9,
                "filter_shape": config.jsi.filter_shape,
                "max_bin": max_bin,
                "pump_power_mw": config.jsi.pump_power_mw,
            },
        )
        return scan, xtalk

    scan, xtalk = _stage("jsi", do_jsi)

    def do_freq_schmidt():
        ideal_spec = ideal_frequency_spectrum(comb)
        degraded = schmidt_decompose(jsa_from_jsi(scan), basis="frequency")
        io_mod.spectrum_to_csv(ideal_spec, out / "schmidt_frequency_ideal.csv")
        io_mod.spectrum_to_csv(degraded, out / "schmidt_frequency_degraded.csv")
        return ideal_spec, degraded

    k_freq_ideal_spec, k_freq_degraded_spec = _stage("schmidt-frequency", do_freq_schmidt)

    def do_chsh():
        s_fringe = chsh_mod.s_fringe_from_visibility(config.chsh.fringe_visibility)
        analytic = chsh_mod.s_chsh(visibility=config.chsh.chsh_visibility)
        simulated = chsh_mod.simulate_chsh_counts(
            config.chsh.chsh_visibility, config.chsh.integration, config.chsh.seed
        )
        for i, fixed in enumerate((45.0, 90.0, 135.0, 180.0)):
            scan_angles = np.arange(0.0, 360.0, 10.0)
            fringe = chsh_mod.simulate_fringe_scan(
                fixed,
                scan_angles,
                config.chsh.fringe_visibility,
                config.chsh.integration,
                seed=config.chsh.seed + i,
            )
            io_mod.fringe_to_csv(fringe, out / f"chsh_fringe_p1_{int(fixed)}.csv")
        io_mod.export_json(
            out / "chsh.json",
            {
                "s_fringe": s_fringe,
                "analytic": io_mod.chsh_to_dict(analytic),
                "simulated": io_mod.chsh_to_dict(simulated),
            },
        )
        return s_fringe, analytic, simulated

    s_fringe, chsh_analytic, chsh_simulated = _stage("chsh", do_chsh)

    def do_dimensionality():
        counts = bin_counts(cavity, source, config.hom.window_ps)
        return counts, dimensionality_report(
            k_time_theory_spec.k_number, k_freq_ideal_spec.k_number, counts
        )

    counts, dim = _stage("dimensionality", do_dimensionality)

    report = ReproReport(
        cavity_label=cavity.label or config.preset_name or "custom",
        fsr_ghz=cavity.fsr_hz / 1e9,
        linewidth_ghz=cavity.linewidth_fwhm_hz / 1e9,
        finesse=cavity.finesse,
        round_trip_ps=cavity.round_trip_ps,
        envelope_shape=source.envelope_shape,
        n_max=comb.n_max,
        window_n_max=window_n,
        revival_count=len(revivals),
        revival_spacing_ps=spacing,
        central_dip_width_ps=dip_width,
        central_visibility=central_vis,
        visibility_table=[(r.n, r.center_ps, r.visibility) for r in revivals],
        k_time_theory=k_time_theory_spec.k_number,
        k_time_fitted=k_time_fitted_spec.k_number,
        k_freq_ideal=k_freq_ideal_spec.k_number,
        k_freq_ideal_reference=REFERENCE_IDEAL_K_FREQ.get(config.preset_name),
        k_freq_degraded=k_freq_degraded_spec.k_number,
        crosstalk_db=xtalk,
        n_freq_bins=counts.n_freq_bins,
        n_time_bins=counts.n_time_bins,
        product_nt_nomega=dim.product_nt_nomega,
        product_kt_komega=dim.product_kt_komega,
        fringe_visibility=config.chsh.fringe_visibility,
        s_fringe=s_fringe,
        chsh_visibility=config.chsh.chsh_visibility,
        s_chsh_analytic=chsh_analytic.s_value,
        s_chsh_simulated=chsh_simulated.s_value,
        s_sigma_simulated=chsh_simulated.s_sigma,
        violation_sigmas_simulated=chsh_simulated.violation_sigmas,
        time_dimensionality=dim.total_dimensionality // dim.polarization_factor,
        freq_dimensionality=dim.freq_dimensionality,
        total_dimensionality=dim.total_dimensionality,
        config_hash=config.config_hash(),
        bands=_bands_for(config.preset_name),
    )

    def do_write():
        io_mod.export_json(out / "report.json", report.to_dict())
        (out / "summary.txt").write_text(_summary_text(report), encoding="utf-8")

    _stage("write", do_write)
    return report


def _fmt(value, band=None) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        text = f"{value:.4f}"
    else:
        text = str(value)
    if band:
        text += f"  [accept {band[0]} .. {band[1]}]"
    return text


def _summary_text(r: ReproReport) -> str:
    b = r.bands
    lines = [
        f"bfcsim {r.tool_version} reproduction report (config {r.config_hash[:12]})",
        "",
        f"cavity {r.cavity_label}: FSR {r.fsr_ghz} GHz, linewidth {r.linewidth_ghz} GHz, "
        f"finesse {r.finesse:.3f}, round trip {r.round_trip_ps:.3f} ps",
        f"comb: {2 * r.n_max + 1} bins ({r.envelope_shape} envelope), "
        f"window-limited time bins +/-{r.window_n_max}",
        "",
        "interferometry:",
        f"  revival dips: {_fmt(r.revival_count, b.get('revival_count'))}",
        f"  revival spacing (ps): {_fmt(r.revival_spacing_ps, b.get('revival_spacing_ps'))}",
        f"  central dip width (ps): {_fmt(r.central_dip_width_ps, b.get('central_dip_width_ps'))}",
        f"  central visibility: {_fmt(r.central_visibility)}",
        "",
        "schmidt analysis:",
        f"  K_time theory: {_fmt(r.k_time_theory, b.get('k_time_theory'))}",
        f"  K_time fitted: {_fmt(r.k_time_fitted)}",
        f"  K_freq ideal (envelope diagonal): {_fmt(r.k_freq_ideal)}"
        + (
            f"  [published ideal target {r.k_freq_ideal_reference}]"
            if r.k_freq_ideal_reference
            else ""
        ),
        f"  K_freq degraded (filters + floor): {_fmt(r.k_freq_degraded)}",
        f"  crosstalk (dB): {_fmt(r.crosstalk_db)}",
        f"  N_freq x N_time: {r.n_freq_bins:.3f} x {r.n_time_bins:.3f} "
        f"= {r.product_nt_nomega:.3f}",
        f"  K_time x K_freq: {r.product_kt_komega:.3f}",
        "",
        "bell test:",
        f"  S_fringe({r.fringe_visibility}): {_fmt(r.s_fringe, b.get('s_fringe'))}",
        f"  S_chsh analytic({r.chsh_visibility}): "
        f"{_fmt(r.s_chsh_analytic, b.get('s_chsh_analytic'))}",
        f"  S_chsh simulated: {r.s_chsh_simulated:.4f} +/- {r.s_sigma_simulated:.4f} "
        f"({r.violation_sigmas_simulated:.1f} sigma violation)",
        "",
        "dimensionality:",
        f"  time-bin: {_fmt(r.time_dimensionality, b.get('time_dimensionality'))}",
        f"  frequency-bin: {_fmt(r.freq_dimensionality)}",
        f"  total (with polarization): "
        f"{_fmt(r.total_dimensionality, b.get('total_dimensionality'))}",
        "",
    ]
    return "\n".join(lines)
