"""Spectral hole burning in a Zeeman-split Lambda system.

Every ion carries four optical lines between ground sublevels (1, 2) and
excited sublevels (1, 2).  With sublevel 1 the upper Zeeman component in both
electronic states, and the ion centre frequency ``nu`` at the mean line
position, the line offsets are

    g1-e1 (allowed):   -(dg - de)/2       g2-e2 (allowed):   +(dg - de)/2
    g1-e2 (forbidden): -(dg + de)/2       g2-e1 (forbidden): +(dg + de)/2

A burn laser pumps population between the two ground sublevels; relaxation at
``Gamma0`` pulls them back to equal occupation.  The steady state is solved
per ion and the probe optical depth is integrated over a flat inhomogeneous
distribution of ``nu``.  Frequencies are in MHz, rates in 1/s.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import WindowTooNarrow

ALLOWED, FORBIDDEN = "A", "F"
SIDEBAND_OFFSET_MHZ = 0.864

# Hole/anti-hole families: label -> (multiplier of delta_g, of delta_e), kind,
# and the (burn, probe) transition classes contributing there.
FEATURE_TABLE = {
    "0": ((0, 0), "hole", ((ALLOWED, ALLOWED), (FORBIDDEN, FORBIDDEN))),
    "delta_e": ((0, 1), "hole", ((FORBIDDEN, ALLOWED), (ALLOWED, FORBIDDEN))),
    "delta_g-delta_e": ((1, -1), "antihole", ((ALLOWED, ALLOWED),)),
    "delta_g": ((1, 0), "antihole", ((FORBIDDEN, ALLOWED), (ALLOWED, FORBIDDEN))),
    "delta_g+delta_e": ((1, 1), "antihole", ((FORBIDDEN, FORBIDDEN),)),
}
PROBE_FORBIDDEN_NOTE = (
    "forbidden probing: not expected to be observed outside the field "
    "direction that optimizes the branching ratio R"
)


@dataclass(frozen=True)
class Line:
    offset: float
    ground_sublevel: int
    excited_sublevel: int
    kind: str
    strength: float


@dataclass(frozen=True)
class LineStructure:
    delta_g: float
    delta_e: float
    R: float
    lines: tuple

    @property
    def offsets(self) -> np.ndarray:
        return np.array([ln.offset for ln in self.lines])

    @property
    def strengths(self) -> np.ndarray:
        return np.array([ln.strength for ln in self.lines])

    @property
    def ground(self) -> np.ndarray:
        return np.array([ln.ground_sublevel for ln in self.lines])


def line_structure(delta_g: float, delta_e: float, R: float) -> LineStructure:
    if delta_g < 0 or delta_e < 0:
        raise ValueError("splittings must be >= 0")
    if R < 0:
        raise ValueError("branching ratio must be >= 0")
    a, f = 1.0 / (1.0 + R), R / (1.0 + R)
    half_diff, half_sum = 0.5 * (delta_g - delta_e), 0.5 * (delta_g + delta_e)
    # canonical order, relied on by pump_rates
    lines = (
        Line(-half_diff, 1, 1, ALLOWED, a),
        Line(-half_sum, 1, 2, FORBIDDEN, f),
        Line(+half_sum, 2, 1, FORBIDDEN, f),
        Line(+half_diff, 2, 2, ALLOWED, a),
    )
    return LineStructure(delta_g, delta_e, R, lines)


def enumerate_features(ls: LineStructure, ndigits: int = 9) -> dict:
    """Burn every line in turn, probe every line: signed position -> contributions.

    Each contribution is ``(kind, burn_class, probe_class)``; kind is "hole" when
    the probed line starts from the depleted sublevel, else "antihole".
    """
    out: dict[float, list] = {}
    for burn in ls.lines:
        for probe in ls.lines:
            pos = round(probe.offset - burn.offset, ndigits) + 0.0
            kind = "hole" if probe.ground_sublevel == burn.ground_sublevel else "antihole"
            out.setdefault(pos, []).append((kind, burn.kind, probe.kind))
    return out


@dataclass(frozen=True)
class FeatureClass:
    label: str
    position: float
    kind: str
    contributions: tuple  # (burn_class, probe_class) pairs
    notes: tuple = ()


def classify_features(delta_g: float, delta_e: float) -> dict[str, FeatureClass]:
    """Allowed/forbidden make-up of every hole and anti-hole position (|offset|)."""
    out = {}
    for label, ((mg, me), kind, contribs) in FEATURE_TABLE.items():
        notes = tuple(
            f"{b}{p}: {PROBE_FORBIDDEN_NOTE}" for b, p in contribs if p == FORBIDDEN
        )
        out[label] = FeatureClass(label, abs(mg * delta_g + me * delta_e), kind, contribs, notes)
    return out


@dataclass(frozen=True)
class Sideband:
    offset: float
    relative_amplitude: float


def default_sidebands(amplitude: float = 0.3) -> tuple:
    """Symmetric pair of burn sidebands at +/-864 kHz."""
    return (Sideband(-SIDEBAND_OFFSET_MHZ, amplitude), Sideband(SIDEBAND_OFFSET_MHZ, amplitude))


@dataclass(frozen=True)
class BurnConfig:
    P0: float
    Gamma0: float
    R: float
    R1: float
    gamma_h: float = 0.1
    omega0: float = 0.0
    sidebands: tuple = ()
    baseline_od: float = 0.3

    def __post_init__(self):
        if self.P0 < 0:
            raise ValueError("P0 must be >= 0")
        if not self.Gamma0 > 0:
            raise ValueError("Gamma0 must be > 0")
        if not self.gamma_h > 0:
            raise ValueError("gamma_h must be > 0")
        if self.R < 0 or self.R1 < 0:
            raise ValueError("R and R1 must be >= 0")
        if any(sb.relative_amplitude < 0 for sb in self.sidebands):
            raise ValueError("sideband amplitudes must be >= 0")
        if not self.baseline_od > 0:
            raise ValueError("baseline_od must be > 0")


def lorentzian_peak(x, fwhm):
    """Lorentzian with unit peak height."""
    return 1.0 / (1.0 + (2.0 * np.asarray(x) / fwhm) ** 2)


def lorentzian_area(x, fwhm):
    """Lorentzian with unit area."""
    hw = 0.5 * fwhm
    return (hw / np.pi) / (np.asarray(x) ** 2 + hw * hw)


def excitation(detuning, config: BurnConfig):
    """P(detuning) from the carrier plus any sidebands."""
    detuning = np.asarray(detuning, dtype=float)
    p = config.P0 * lorentzian_peak(detuning, config.gamma_h)
    for sb in config.sidebands:
        p = p + config.P0 * sb.relative_amplitude * lorentzian_peak(detuning - sb.offset, config.gamma_h)
    return p


def pump_rates(detunings, config: BurnConfig):
    """Ground-sublevel transfer rates (W12, W21) for line detunings from the burn.

    ``detunings[..., k]`` is (line k frequency - burn frequency) in the canonical
    line order of :func:`line_structure`.
    """
    d = np.asarray(detunings, dtype=float)
    p = excitation(d, config)
    allowed = config.R1 / (1.0 + config.R1)
    forbidden = config.R / (1.0 + config.R1)
    w12 = p[..., 0] * allowed + p[..., 1] * forbidden
    w21 = p[..., 2] * forbidden + p[..., 3] * allowed
    return w12, w21


def steady_state(w12, w21, gamma0):
    if np.any(np.asarray(gamma0) <= 0):
        raise ValueError("Gamma0 must be > 0")
    n1 = (np.asarray(w21) + 0.5 * gamma0) / (np.asarray(w12) + np.asarray(w21) + gamma0)
    return n1, 1.0 - n1


@dataclass(frozen=True)
class SaturationReport:
    allowed_ok: bool
    forbidden_ok: bool
    bleached: bool
    allowed_rate: float
    forbidden_rate: float


BLEACH_FACTOR = 10.0


def saturation_check(config: BurnConfig) -> SaturationReport:
    a = config.P0 * config.R1 / (1.0 + config.R1)
    f = config.P0 * config.R / (1.0 + config.R1)
    return SaturationReport(a < config.Gamma0, f < config.Gamma0, a > BLEACH_FACTOR * config.Gamma0, a, f)


@dataclass
class TransmissionSpectrum:
    probe_grid: np.ndarray
    optical_depth: np.ndarray
    baseline_od: float

    @property
    def transmission(self) -> np.ndarray:
        return np.exp(-self.optical_depth)

    @classmethod
    def from_transmission(cls, freq, transmission, baseline_od=None):
        t = np.asarray(transmission, dtype=float)
        if np.any(t <= 0) or np.any(t > 1 + 1e-9):
            raise ValueError("transmission must lie in (0, 1]")
        od = -np.log(t)
        return cls(np.asarray(freq, dtype=float), od, float(np.median(od)) if baseline_od is None else baseline_od)


def probe_grid(window, resolution) -> np.ndarray:
    lo, hi = window
    n = int(math.floor((hi - lo) / resolution + 1e-9)) + 1
    return lo + resolution * np.arange(n)


NU_CHUNK = 256
NU_MARGIN_LINEWIDTHS = 20.0


def _accumulate(nu, probe, ls: LineStructure, config: BurnConfig):
    """Burned and unburned absorption at ``probe`` from ions at ``nu``."""
    offs, strengths, ground = ls.offsets, ls.strengths, ls.ground
    line_freq = nu[:, None] + offs[None, :]  # (n_nu, 4)
    w12, w21 = pump_rates(line_freq - config.omega0, config)
    n1, n2 = steady_state(w12, w21, config.Gamma0)
    pops = np.where(ground[None, :] == 1, n1[:, None], n2[:, None])  # (n_nu, 4)
    shape = lorentzian_area(probe[None, None, :] - line_freq[:, :, None], config.gamma_h)
    weighted = strengths[None, :, None] * shape
    burned = np.einsum("nl,nlp->p", pops, weighted)
    unburned = 0.5 * weighted.sum(axis=(0, 1))
    return burned, unburned


def synthesize_spectrum(
    delta_g: float,
    delta_e: float,
    config: BurnConfig,
    window=(-10.0, 10.0),
    resolution: float = 0.02,
    workers: int = 1,
) -> TransmissionSpectrum:
    """Steady-state hole-burning spectrum; probe offsets relative to the window origin."""
    lo, hi = window
    if not hi > lo:
        raise ValueError("window must have hi > lo")
    if not resolution < config.gamma_h / 4:
        raise ValueError(f"resolution {resolution} must be < gamma_h/4 = {config.gamma_h / 4}")
    reach = delta_g + delta_e
    if config.omega0 - reach < lo or config.omega0 + reach > hi:
        raise WindowTooNarrow(
            f"features at omega0 +/- {reach:.4g} MHz do not fit window [{lo}, {hi}]"
        )

    ls = line_structure(delta_g, delta_e, config.R)
    probe = probe_grid(window, resolution)
    margin = 0.5 * reach + NU_MARGIN_LINEWIDTHS * config.gamma_h
    nu = np.arange(lo - margin, hi + margin + 0.5 * resolution, resolution)

    chunks = [nu[i:i + NU_CHUNK] for i in range(0, len(nu), NU_CHUNK)]
    job = lambda c: _accumulate(c, probe, ls, config)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]

    # fixed chunk order keeps the sum bit-stable across worker counts
    burned = np.zeros_like(probe)
    unburned = np.zeros_like(probe)
    for b, u in parts:
        burned += b
        unburned += u
    od = config.baseline_od * burned / unburned
    return TransmissionSpectrum(probe, od, config.baseline_od)


@dataclass(frozen=True)
class Feature:
    position: float
    kind: str
    depth: float


@dataclass
class FeatureList:
    features: list = field(default_factory=list)

    def positions(self, kind=None) -> np.ndarray:
        return np.array([f.position for f in self.features if kind is None or f.kind == kind])

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)


def detect_features(spectrum: TransmissionSpectrum, min_depth: float, center: float = 0.0) -> FeatureList:
    """Local OD extrema deviating more than ``min_depth`` from the median baseline."""
    x = np.asarray(spectrum.probe_grid, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("probe grid must be strictly increasing")
    d = np.asarray(spectrum.optical_depth, dtype=float) - np.median(spectrum.optical_depth)
    found = []
    for i in range(1, len(d) - 1):
        y0, y1, y2 = d[i - 1], d[i], d[i + 1]
        if y1 > y0 and y1 >= y2 and y1 > min_depth:
            kind = "antihole"
        elif y1 < y0 and y1 <= y2 and -y1 > min_depth:
            kind = "hole"
        else:
            continue
        # parabola through the three points (grid is locally uniform enough)
        h0, h2 = x[i] - x[i - 1], x[i + 1] - x[i]
        denom = h0 * h2 * (h0 + h2)
        a = (h0 * (y2 - y1) - h2 * (y1 - y0)) / denom
        b = (h0 * h0 * (y2 - y1) + h2 * h2 * (y1 - y0)) / denom
        if a != 0:
            dx = -b / (2 * a)
            peak = y1 + b * dx + a * dx * dx
        else:
            dx, peak = 0.0, y1
        found.append(Feature(float(x[i] + dx - center) + 0.0, kind, float(abs(peak))))
    return FeatureList(found)
