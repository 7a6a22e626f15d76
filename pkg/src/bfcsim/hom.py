"""Hong-Ou-Mandel interferometry of the comb state.

For a frequency-anticorrelated pure two-photon state the balanced
beamsplitter coincidence rate is ``C(tau) = 1 - V(tau)`` with ``V`` the
normalized cosine transform of the biphoton spectral intensity at
``2 * Omega * tau``.  The comb structure turns the single dip at zero
delay into a train of revival dips spaced half a round-trip time apart,
whose depths decay with the bin index n as

    V_n = exp(-|n| pi/F) * (1 + |n| pi/F),

the closed form for Lorentzian bins.  `simulate_hom_trace` is a plain
numeric quadrature of the interferogram and is kept deliberately
independent of that closed form so the two can validate each other.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .comb import CavitySpec, CombSpectrum

# Fractional accidental-coincidence level used when accidentals are
# switched on without an explicit value; traces are noiseless by default.
DEFAULT_ACCIDENTAL_FRACTION = 0.015


# A hard bin cutoff (the bandwidth-limiting filter that sets n_max) rings:
# the coincidence rate overshoots the plateau by up to ~1% near dip
# shoulders for slowly decaying envelopes.  Traces stay within 1e-9 of
# [0, 1] for gaussian envelopes; this is the allowance for the rest.
TRUNCATION_OVERSHOOT_TOL = 0.02


@dataclass(frozen=True, eq=False)
class HomTrace:
    """Normalized coincidence rate versus relative delay."""

    delays_ps: np.ndarray
    coincidence: np.ndarray
    comb: CombSpectrum

    def __post_init__(self) -> None:
        d = np.asarray(self.delays_ps, dtype=float)
        c = np.asarray(self.coincidence, dtype=float)
        object.__setattr__(self, "delays_ps", d)
        object.__setattr__(self, "coincidence", c)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("HomTrace: delay grid must be a nonempty 1-d array")
        if c.shape != d.shape:
            raise ValueError("HomTrace: delays and coincidence must have equal length")
        if d.size > 1 and not np.all(np.diff(d) > 0.0):
            raise ValueError("HomTrace: delays must be strictly increasing")
        if float(c.min()) < -1e-9 or float(c.max()) > 1.0 + TRUNCATION_OVERSHOOT_TOL:
            raise ValueError(
                f"HomTrace: coincidence must lie in [0, {1.0 + TRUNCATION_OVERSHOOT_TOL}]"
            )
        d.setflags(write=False)
        c.setflags(write=False)

    @property
    def revival_period_ps(self) -> float:
        """Dip spacing: half the cavity round-trip time."""
        return 0.5 * self.comb.round_trip_ps


@dataclass(frozen=True)
class RevivalRecord:
    n: int
    center_ps: float
    visibility: float


def simulate_hom_trace(
    comb: CombSpectrum,
    delays_ps,
    points_per_linewidth: int = 32,
    accidental_fraction: float = 0.0,
    pad_bins: float = 2.0,
) -> HomTrace:
    """Numeric interferogram oracle over an explicit delay grid (ps).

    The biphoton spectral intensity is the squared Lorentzian line
    profile summed over bins with the comb weights; the visibility is its
    normalized cosine transform evaluated by trapezoidal quadrature on a
    grid of ``points_per_linewidth`` samples per cavity linewidth.  An
    optional uniform accidental floor rescales V -> V * (1 - a).
    """
    delays = np.atleast_1d(np.asarray(delays_ps, dtype=float))
    if delays.size == 0:
        raise ValueError("simulate_hom_trace: empty delay grid")
    if delays.size > 1 and not np.all(np.diff(delays) > 0.0):
        raise ValueError("simulate_hom_trace: delay grid must be strictly increasing")
    if points_per_linewidth < 8:
        raise ValueError(
            "simulate_hom_trace: fewer than 8 quadrature points per linewidth "
            "risks aliasing the bin lineshape"
        )
    if not (0.0 <= accidental_fraction < 1.0):
        raise ValueError("simulate_hom_trace: accidental_fraction must be in [0, 1)")

    hw = comb.half_width_rad_s
    spacing = comb.fsr_rad_s
    # Symmetric quadrature grid covering every bin plus pad_bins of margin;
    # symmetry keeps the computed trace even in tau to machine precision.
    step = 2.0 * hw / points_per_linewidth
    half_span = (comb.n_max + pad_bins) * spacing
    k = int(math.ceil(half_span / step))
    omega = step * np.arange(-k, k + 1)

    intensity = np.zeros_like(omega)
    for m, w in zip(comb.bins, comb.bin_weights):
        line = 1.0 / (hw * hw + np.square(omega - m * spacing))
        intensity += w * np.square(line)
    intensity /= intensity.sum()

    tau = delays * 1e-12
    visibility = np.empty(tau.size)
    block = max(1, 4_000_000 // omega.size)
    for i in range(0, tau.size, block):
        chunk = tau[i : i + block]
        visibility[i : i + block] = np.cos(2.0 * np.outer(chunk, omega)) @ intensity

    coincidence = 1.0 - (1.0 - accidental_fraction) * visibility
    coincidence = np.clip(coincidence, 0.0, None)
    return HomTrace(delays_ps=delays, coincidence=coincidence, comb=comb)


def dip_visibility_closed_form(n: int, cavity: CavitySpec) -> float:
    """Closed-form visibility of the n-th revival dip for Lorentzian bins."""
    x = abs(n) * math.pi / cavity.finesse
    return math.exp(-x) * (1.0 + x)


def visibility_to_decay_parameter(v: float) -> float:
    """Invert ``v = exp(-x) (1 + x)`` for x >= 0 by bracketed bisection.

    The right-hand side decreases monotonically from 1, so the root is
    unique; it equals ``|n| pi / F`` when v is the n-th dip visibility.
    """
    if not (0.0 < v <= 1.0):
        raise ValueError(f"visibility must lie in (0, 1], got {v!r}")
    if v == 1.0:
        return 0.0

    def f(x: float) -> float:
        return math.exp(-x) * (1.0 + x) - v

    lo, hi = 0.0, 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(f"failed to bracket decay parameter for v={v!r}")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _plateau_medians(delays: np.ndarray, coincidence: np.ndarray, period: float) -> dict[int, float]:
    """Median coincidence over the middle half of each inter-dip interval."""
    medians: dict[int, float] = {}
    k_lo = int(math.floor(delays[0] / period)) - 1
    k_hi = int(math.ceil(delays[-1] / period)) + 1
    for k in range(k_lo, k_hi + 1):
        lo = (k + 0.25) * period
        hi = (k + 0.75) * period
        mask = (delays >= lo) & (delays <= hi)
        if np.any(mask):
            medians[k] = float(np.median(coincidence[mask]))
    return medians


def locate_revivals(trace: HomTrace) -> list[RevivalRecord]:
    """Find revival dips near integer multiples of half the round-trip time.

    Each candidate window of width half a period is searched for a strict
    interior minimum; the plateau reference for the visibility is the
    median coincidence over the middle half of the flanking inter-dip
    intervals.
    """
    delays = trace.delays_ps
    c = trace.coincidence
    period = trace.revival_period_ps
    if delays[-1] - delays[0] < period:
        raise ValueError("locate_revivals: trace must span at least one revival period")
    if delays.size > 1:
        grid_step = float(np.median(np.diff(delays)))
        if grid_step > period / 10.0:
            warnings.warn(
                "locate_revivals: delay grid coarser than a tenth of the revival "
                "period; dip centers are unreliable",
                stacklevel=2,
            )

    medians = _plateau_medians(delays, c, period)
    global_plateau = float(np.median(list(medians.values()))) if medians else float(c.max())

    records: list[RevivalRecord] = []
    n_lo = int(math.ceil(delays[0] / period))
    n_hi = int(math.floor(delays[-1] / period))
    for n in range(n_lo, n_hi + 1):
        center = n * period
        idx = np.nonzero(np.abs(delays - center) <= period / 4.0)[0]
        if idx.size < 3:
            continue
        local = c[idx]
        j = int(np.argmin(local))
        # Reject window-edge minima: a revival must be an interior dip.
        if j == 0 or j == local.size - 1:
            continue
        if not (local[j] < local[0] and local[j] < local[-1]):
            continue
        plateaus = [medians[k] for k in (n - 1, n) if k in medians]
        c_max = float(np.mean(plateaus)) if plateaus else global_plateau
        if c_max <= 0.0:
            continue
        vis = (c_max - float(local[j])) / c_max
        vis = min(max(vis, 0.0), 1.0)
        records.append(RevivalRecord(n=n, center_ps=float(delays[idx[j]]), visibility=vis))
    return records


def central_dip_width(trace: HomTrace, threshold: float = 0.01) -> float:
    """Base-to-base width of the central dip (ps).

    Walks outward from zero delay on each side to the first crossing where
    the visibility ``1 - C/plateau`` falls below `threshold`, with linear
    interpolation between samples.
    """
    if not (0.0 < threshold <= 0.5):
        raise ValueError("central_dip_width: threshold must lie in (0, 0.5]")
    delays = trace.delays_ps
    c = trace.coincidence
    # Plateau level; traces from the simulator are already normalized to 1
    # away from dips, the quantile keeps user-supplied traces honest.
    plateau = float(np.quantile(c, 0.95))
    if plateau <= 0.0:
        raise ValueError("central_dip_width: trace has no plateau")
    vis = 1.0 - c / plateau

    i0 = int(np.argmin(np.abs(delays)))
    if vis[i0] <= threshold:
        raise ValueError("central_dip_width: no dip at zero delay above threshold")

    def crossing(direction: int) -> float:
        j = i0
        while 0 <= j + direction < delays.size and vis[j + direction] >= threshold:
            j += direction
        if not (0 <= j + direction < delays.size):
            raise ValueError("central_dip_width: dip not resolved within the trace")
        a, b = j, j + direction
        frac = (vis[a] - threshold) / (vis[a] - vis[b])
        return float(delays[a] + frac * (delays[b] - delays[a]))

    right = crossing(+1)
    left = crossing(-1)
    inside = np.nonzero((delays > left) & (delays < right))[0]
    if inside.size < 20:
        raise ValueError(
            f"central_dip_width: only {inside.size} samples resolve the central dip; "
            "at least 20 required"
        )
    return right - left
