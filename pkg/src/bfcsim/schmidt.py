"""Schmidt-mode analysis in the frequency-bin and time-bin bases.

The Schmidt number ``K = 1 / sum(lambda^2)`` (with eigenvalues summing
to 1) counts the effective modes of a bipartite pure state.  In the
frequency basis the eigenvalues come from a singular value decomposition
of the joint spectral amplitude, which in turn is approximated as the
elementwise square root of the measured joint spectral intensity (a
pure-state assumption; every JSI-derived K is amplitude-approximated in
that sense).  In the time basis the comb's geometric temporal decay gives
the eigenvalues in closed form,

    lambda_n = exp(-2 pi |n| / F) / sum_k exp(-2 pi |k| / F),  |n| <= N,

so K follows from the finesse alone.  A fitted decay rate extracted from
measured revival visibilities can replace pi/F, which is how experimental
traces are folded into the same formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comb import CavitySpec, CombSpectrum, SourceSpec
from .hom import visibility_to_decay_parameter
from .jsi import Jsi

SCHMIDT_BASES = ("frequency", "time")

# Published ideal frequency-bin Schmidt numbers for the three cavities,
# quoted for side-by-side reporting; they come from a derivation outside
# this package's scope and are not reproduced by the envelope-weighted
# diagonal computed here.
REFERENCE_IDEAL_K_FREQ = {"45ghz": 4.9, "15ghz": 20.0, "5ghz": 34.0}


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Normalized Schmidt eigenvalues (descending) and their Schmidt number.

    ``bin_indices`` carries the physical bin label of each eigenvalue when
    one exists (time basis); it is permuted together with the eigenvalues.
    """

    eigenvalues: np.ndarray
    k_number: float
    basis: str
    bin_indices: np.ndarray | None = None

    def __post_init__(self) -> None:
        lam = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        if self.basis not in SCHMIDT_BASES:
            raise ValueError(f"SchmidtSpectrum: basis must be one of {SCHMIDT_BASES}")
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("SchmidtSpectrum: eigenvalues must be a nonempty 1-d array")
        if float(lam.min()) < -1e-14:
            raise ValueError("SchmidtSpectrum: eigenvalues must be nonnegative")
        if np.any(np.diff(lam) > 1e-14):
            raise ValueError("SchmidtSpectrum: eigenvalues must be sorted descending")
        if abs(float(lam.sum()) - 1.0) > 1e-10:
            raise ValueError("SchmidtSpectrum: eigenvalues must sum to 1 within 1e-10")
        k = 1.0 / float(np.sum(lam * lam))
        if abs(k - self.k_number) > 1e-9:
            raise ValueError("SchmidtSpectrum: k_number inconsistent with eigenvalues")
        nonzero = int(np.count_nonzero(lam > 0.0))
        if not (1.0 - 1e-9 <= self.k_number <= nonzero + 1e-9):
            raise ValueError("SchmidtSpectrum: k_number outside [1, nonzero count]")
        if self.bin_indices is not None:
            idx = np.asarray(self.bin_indices)
            object.__setattr__(self, "bin_indices", idx)
            if idx.shape != lam.shape:
                raise ValueError("SchmidtSpectrum: bin_indices must align with eigenvalues")
            idx.setflags(write=False)
        lam.setflags(write=False)


@dataclass(frozen=True)
class BinCounts:
    """Usable mode counts: frequency bins, time bins, and the window-limited time bins."""

    n_freq_bins: float
    n_time_bins: float
    n_time_bins_window: float


@dataclass(frozen=True)
class DimensionalityReport:
    k_time: float
    k_freq: float
    n_time_bins: float
    n_freq_bins: float
    product_nt_nomega: float
    product_kt_komega: float
    polarization_factor: int
    total_dimensionality: int
    freq_dimensionality: int

    def __post_init__(self) -> None:
        if abs(self.product_nt_nomega - self.n_time_bins * self.n_freq_bins) > 1e-9 * max(
            1.0, abs(self.product_nt_nomega)
        ):
            raise ValueError("DimensionalityReport: bin-count product inconsistent")
        if self.total_dimensionality != self.polarization_factor * int(self.k_time) ** 2:
            raise ValueError("DimensionalityReport: total dimensionality inconsistent")


def _spectrum_from_weights(
    weights: np.ndarray,
    basis: str,
    bin_indices: np.ndarray | None = None,
) -> SchmidtSpectrum:
    lam = np.asarray(weights, dtype=float)
    total = lam.sum()
    if total <= 0.0:
        raise ValueError("Schmidt eigenvalues cannot be normalized: zero total weight")
    lam = lam / total
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    idx = None if bin_indices is None else np.asarray(bin_indices)[order]
    k = 1.0 / float(np.sum(lam * lam))
    return SchmidtSpectrum(eigenvalues=lam, k_number=k, basis=basis, bin_indices=idx)


def schmidt_number(eigenvalues) -> float:
    """Inverse participation ratio of a normalized eigenvalue set."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam / lam.sum()
    return 1.0 / float(np.sum(lam * lam))


def jsa_from_jsi(jsi) -> np.ndarray:
    """Amplitude matrix: elementwise square root, Frobenius-normalized.

    Accepts a `Jsi` or a bare nonnegative matrix.  This is the pure-state
    approximation; phases are unrecoverable from intensity data.
    """
    values = jsi.values if isinstance(jsi, Jsi) else np.asarray(jsi, dtype=float)
    if float(values.min()) < 0.0:
        raise ValueError("jsa_from_jsi: intensity matrix must be nonnegative")
    amp = np.sqrt(values)
    norm = float(np.linalg.norm(amp))
    if norm == 0.0:
        raise ValueError("jsa_from_jsi: zero matrix has no amplitude")
    return amp / norm


def schmidt_decompose(jsa: np.ndarray, basis: str = "frequency") -> SchmidtSpectrum:
    """Schmidt spectrum of an amplitude matrix via singular values.

    Eigenvalues are the squared singular values normalized to 1, making
    the result invariant under global scaling and under row or column
    permutations of the input.
    """
    a = np.asarray(jsa, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("schmidt_decompose: input must be a nonempty 2-d matrix")
    if not np.any(a):
        raise ValueError("schmidt_decompose: zero matrix rejected")
    s = np.linalg.svd(a, compute_uv=False)
    return _spectrum_from_weights(s * s, basis=basis)


def time_bin_eigenvalues(cavity: CavitySpec, n_max: int) -> SchmidtSpectrum:
    """Closed-form time-bin Schmidt spectrum for |n| <= n_max."""
    if n_max < 0:
        raise ValueError("time_bin_eigenvalues: n_max must be >= 0")
    n = np.arange(-n_max, n_max + 1)
    weights = np.exp(-2.0 * math.pi * np.abs(n) / cavity.finesse)
    return _spectrum_from_weights(weights, basis="time", bin_indices=n)


def fit_decay_parameter(visibility_points) -> float:
    """Per-bin decay rate from (n, visibility) pairs.

    Each visibility is inverted to its decay parameter ``x_n`` and the
    slope of ``x = rate * |n|`` is fit by unweighted least squares through
    the origin (the model forces visibility 1 at n = 0 exactly).
    """
    pts = [(int(n), float(v)) for n, v in visibility_points]
    if len(pts) < 2:
        raise ValueError("fit_decay_parameter: at least 2 visibility points required")
    if all(n == 0 for n, _ in pts):
        raise ValueError("fit_decay_parameter: degenerate fit, all points at n = 0")
    for n, v in pts:
        if not (0.0 < v <= 1.0):
            raise ValueError(f"fit_decay_parameter: visibility {v!r} at n={n} outside (0, 1]")
    num = 0.0
    den = 0.0
    for n, v in pts:
        x = visibility_to_decay_parameter(v)
        num += abs(n) * x
        den += n * n
    return num / den


def time_bin_spectrum_from_visibilities(visibility_points, n_max: int) -> SchmidtSpectrum:
    """Time-bin Schmidt spectrum with pi/F replaced by a fitted decay rate."""
    if n_max < 0:
        raise ValueError("time_bin_spectrum_from_visibilities: n_max must be >= 0")
    rate = fit_decay_parameter(visibility_points)
    n = np.arange(-n_max, n_max + 1)
    weights = np.exp(-2.0 * rate * np.abs(n))
    return _spectrum_from_weights(weights, basis="time", bin_indices=n)


def window_limited_n_max(cavity: CavitySpec, delay_window_ps: float) -> int:
    """Largest revival index whose dip fits inside a +/- delay window."""
    if delay_window_ps <= 0.0:
        raise ValueError("delay window must be positive")
    return int(delay_window_ps / (0.5 * cavity.round_trip_ps))


def bin_counts(cavity: CavitySpec, source: SourceSpec, delay_window_ps: float) -> BinCounts:
    """Frequency-bin and time-bin counts for a cavity/source pair.

    The frequency-bin count is the phase-matching bandwidth over the FSR;
    the time-bin count within an inverse cavity linewidth equals the
    finesse.  The window-limited count caps the latter by the number of
    revival periods inside the scan window.
    """
    n_freq = source.phase_matching_fwhm_hz / cavity.fsr_hz
    n_time = cavity.finesse
    windowed = min(n_time, delay_window_ps / (0.5 * cavity.round_trip_ps))
    return BinCounts(n_freq_bins=n_freq, n_time_bins=n_time, n_time_bins_window=windowed)


def dimensionality_report(k_time: float, k_freq: float, counts: BinCounts) -> DimensionalityReport:
    """Hilbert-space dimensionality summary.

    The headline number is ``2 * floor(k_time)^2``: squared because the
    time-bin state is bipartite, doubled by the polarization subspace,
    floored because fractional Schmidt modes do not add a usable
    dimension.  ``floor(k_freq)^2`` is reported for the frequency basis.
    """
    if k_time < 1.0 or k_freq < 1.0:
        raise ValueError("dimensionality_report: Schmidt numbers must be >= 1")
    return DimensionalityReport(
        k_time=k_time,
        k_freq=k_freq,
        n_time_bins=counts.n_time_bins,
        n_freq_bins=counts.n_freq_bins,
        product_nt_nomega=counts.n_time_bins * counts.n_freq_bins,
        product_kt_komega=k_time * k_freq,
        polarization_factor=2,
        total_dimensionality=2 * int(k_time) ** 2,
        freq_dimensionality=int(k_freq) ** 2,
    )


def ideal_frequency_spectrum(comb: CombSpectrum) -> SchmidtSpectrum:
    """Frequency-bin Schmidt spectrum of the ideal (anticorrelated) JSI.

    For a strictly anticorrelated matrix the singular values are the
    square roots of the bin weights, so the eigenvalues are the weights
    themselves; computed directly rather than through an SVD.
    """
    return _spectrum_from_weights(
        comb.bin_weights.copy(), basis="frequency", bin_indices=comb.bins
    )
