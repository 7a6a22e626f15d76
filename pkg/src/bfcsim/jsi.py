"""Joint spectral intensity matrices over signal/idler frequency bins.

Energy conservation pins the ideal comb JSI to the anticorrelation
diagonal ``n_s + n_i = 0``.  Measured matrices degrade in two modeled
ways: finite-bandwidth selection filters smear weight into neighboring
cells, and multi-pair emission adds a uniform accidental floor that grows
with pump power.  The floor model is a two-anchor calibration, not
physics: its linear+quadratic coefficients are fixed so the scanned
matrix reports the two published cross-talk levels at 2 mW and 4 mW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comb import CombSpectrum, SPEED_OF_LIGHT_M_S

FILTER_SHAPES = ("gaussian", "lorentzian")


@dataclass(frozen=True, eq=False)
class Jsi:
    """Nonnegative coincidence-weight matrix indexed by (n_s, n_i)."""

    n_max: int
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        size = 2 * self.n_max + 1
        if self.n_max < 0 or v.shape != (size, size):
            raise ValueError(f"Jsi: expected a {size}x{size} matrix, got shape {v.shape}")
        if float(v.min()) < -1e-15:
            raise ValueError("Jsi: entries must be nonnegative")
        if self.normalized and abs(float(v.sum()) - 1.0) > 1e-12:
            raise ValueError("Jsi: normalized matrix must sum to 1 within 1e-12")
        v.setflags(write=False)

    @property
    def bins(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def value_at(self, n_s: int, n_i: int) -> float:
        if abs(n_s) > self.n_max or abs(n_i) > self.n_max:
            raise ValueError(f"bin pair ({n_s}, {n_i}) outside +/-{self.n_max}")
        return float(self.values[n_s + self.n_max, n_i + self.n_max])

    def anti_diagonal(self) -> np.ndarray:
        """Entries on the anticorrelation diagonal n_s = -n_i, ordered by n_s."""
        idx = np.arange(2 * self.n_max + 1)
        return self.values[idx, idx[::-1]]


@dataclass(frozen=True)
class FilterSpec:
    """Tunable bin-selection filter; fwhm_hz = 0 is an ideal single-bin selector."""

    fwhm_hz: float = 0.0
    shape: str = "gaussian"
    center_offset_bins: float = 0.0

    def __post_init__(self) -> None:
        if self.fwhm_hz < 0.0:
            raise ValueError("FilterSpec: fwhm_hz must be >= 0")
        if self.shape not in FILTER_SHAPES:
            raise ValueError(f"FilterSpec: shape must be one of {FILTER_SHAPES}")


def filter_bandwidth_hz(fwhm_pm: float, wavelength_nm: float = 1316.0) -> float:
    """Convert a filter bandwidth quoted in picometers to Hz."""
    lam_m = wavelength_nm * 1e-9
    return SPEED_OF_LIGHT_M_S * (fwhm_pm * 1e-12) / (lam_m * lam_m)


def filter_transmission(filt: FilterSpec, offset_bins, fsr_hz: float):
    """Filter transmission at a bin offset from the filter's target bin."""
    off = (np.asarray(offset_bins, dtype=float) - filt.center_offset_bins) * fsr_hz
    if filt.fwhm_hz == 0.0:
        out = np.where(np.abs(off) < 1e-6 * fsr_hz, 1.0, 0.0)
    elif filt.shape == "gaussian":
        out = np.exp(-4.0 * math.log(2.0) * np.square(off / filt.fwhm_hz))
    else:
        out = 1.0 / (1.0 + np.square(2.0 * off / filt.fwhm_hz))
    return out if out.ndim else float(out)


def ideal_jsi(comb: CombSpectrum) -> Jsi:
    """Noise-free JSI: comb weights on the anticorrelation diagonal, zero elsewhere."""
    size = 2 * comb.n_max + 1
    values = np.zeros((size, size))
    idx = np.arange(size)
    values[idx, idx[::-1]] = comb.bin_weights
    return Jsi(n_max=comb.n_max, values=values, normalized=True)


def apply_filters(
    jsi: Jsi,
    comb: CombSpectrum,
    sig: FilterSpec,
    idl: FilterSpec,
    sig_bin: int,
    idl_bin: int,
) -> float:
    """Coincidence weight with the two filters centered on (sig_bin, idl_bin).

    Sums the JSI over true bins weighted by each filter's transmission at
    its offset from the target, with offsets converted to Hz via the FSR.
    Zero-bandwidth filters reduce to sampling the matrix at the targets.
    """
    if abs(sig_bin) > jsi.n_max or abs(idl_bin) > jsi.n_max:
        raise ValueError(f"target bins ({sig_bin}, {idl_bin}) outside +/-{jsi.n_max}")
    fsr_hz = comb.fsr_rad_s / (2.0 * math.pi)
    bins = jsi.bins
    t_sig = np.atleast_1d(filter_transmission(sig, bins - sig_bin, fsr_hz))
    t_idl = np.atleast_1d(filter_transmission(idl, bins - idl_bin, fsr_hz))
    return float(t_sig @ jsi.values @ t_idl)


@dataclass(frozen=True)
class AccidentalModel:
    """Uniform accidental floor fraction r(P) = a*P + b*P^2 of the peak cell."""

    linear_per_mw: float
    quadratic_per_mw2: float

    @classmethod
    def calibrate(
        cls,
        anchor1: tuple[float, float],
        anchor2: tuple[float, float],
    ) -> "AccidentalModel":
        """Fit (a, b) so the floor fraction passes through two (power, fraction) anchors."""
        (p1, r1), (p2, r2) = anchor1, anchor2
        det = p1 * p2 * p2 - p2 * p1 * p1
        if det == 0.0:
            raise ValueError("AccidentalModel: anchors must have distinct nonzero powers")
        a = (r1 * p2 * p2 - r2 * p1 * p1) / det
        b = (r2 * p1 - r1 * p2) / det
        return cls(linear_per_mw=a, quadratic_per_mw2=b)

    def floor_fraction(self, pump_power_mw: float) -> float:
        if pump_power_mw < 0.0:
            raise ValueError("pump power must be >= 0")
        return self.linear_per_mw * pump_power_mw + self.quadratic_per_mw2 * pump_power_mw**2


# Anchored to the published cross-talk levels: -11.71 dB at 2 mW and
# -6.31 dB at 4 mW.
DEFAULT_ACCIDENTAL_MODEL = AccidentalModel.calibrate(
    (2.0, 10.0 ** (-11.71 / 10.0)),
    (4.0, 10.0 ** (-6.31 / 10.0)),
)


def accidental_floor(pump_power_mw: float, model: AccidentalModel = DEFAULT_ACCIDENTAL_MODEL) -> float:
    """Accidental floor as a fraction of the peak diagonal cell."""
    return model.floor_fraction(pump_power_mw)


def scan_correlation_matrix(
    comb: CombSpectrum,
    sig: FilterSpec,
    idl: FilterSpec,
    max_bin: int,
    pump_power_mw: float = 0.0,
    model: AccidentalModel = DEFAULT_ACCIDENTAL_MODEL,
) -> Jsi:
    """Filtered coincidence matrix over targets in [-max_bin, max_bin]^2.

    Applies the filter pair to the ideal JSI at every target pair, then
    adds the pump-dependent accidental floor.  The floor is referenced to
    the peak diagonal cell of the *measured* matrix, i.e. the uniform
    offset f solves f = r * (signal_peak + f), so the off-diagonal to
    peak-diagonal ratio of the result equals the calibrated fraction r.
    """
    if max_bin < 0 or max_bin > comb.n_max:
        raise ValueError(f"scan range +/-{max_bin} outside the comb's +/-{comb.n_max} bins")
    base = ideal_jsi(comb)
    fsr_hz = comb.fsr_rad_s / (2.0 * math.pi)
    targets = np.arange(-max_bin, max_bin + 1)
    bins = base.bins
    t_sig = np.stack([np.atleast_1d(filter_transmission(sig, bins - t, fsr_hz)) for t in targets])
    t_idl = np.stack([np.atleast_1d(filter_transmission(idl, bins - t, fsr_hz)) for t in targets])
    values = t_sig @ base.values @ t_idl.T

    r = model.floor_fraction(pump_power_mw)
    if r >= 1.0:
        raise ValueError(f"accidental floor fraction {r:.3f} >= 1; pump power too high")
    if r > 0.0:
        size = 2 * max_bin + 1
        idx = np.arange(size)
        peak = float(values[idx, idx[::-1]].max())
        values = values + r / (1.0 - r) * peak

    total = values.sum()
    if total <= 0.0:
        raise ValueError("scan produced an all-zero matrix")
    return Jsi(n_max=max_bin, values=values / total, normalized=True)


def crosstalk_db(jsi: Jsi) -> float | None:
    """Worst off-diagonal cell relative to the peak anticorrelated cell, in dB.

    Returns None when every off-diagonal cell is exactly zero (an ideal
    matrix has no cross-talk to quote).
    """
    v = jsi.values
    if float(v.max()) <= 0.0:
        raise ValueError("crosstalk_db: matrix is all zero")
    size = 2 * jsi.n_max + 1
    idx = np.arange(size)
    anti = v[idx, idx[::-1]]
    peak = float(anti.max())
    if peak <= 0.0:
        raise ValueError("crosstalk_db: no nonzero cell on the anticorrelation diagonal")
    mask = np.ones_like(v, dtype=bool)
    mask[idx, idx[::-1]] = False
    max_off = float(v[mask].max()) if np.any(mask) else 0.0
    if max_off <= 0.0:
        return None
    return 10.0 * math.log10(max_off / peak)
