"""Gyromagnetic tensor components from hole-burning splitting measurements.

Three field directions are used, each selecting sites where the local field
has a simple form (values per tesla):

    [-1-11]  sites 3,5:   Delta = sqrt((2 gx^2 + gz^2) / 3)
    [001]    sites 3-6:   Delta = sqrt((gx^2 + gy^2) / 2)
    [111]    sites 1,3,5: Delta = sqrt((2 gy^2 + gz^2) / 3)

gx and gz cannot be separated from these data; only gy and the combination
sqrt(2 gx^2 + gz^2) are determined.  Uncertainties are first-order with
independent inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from . import geometry
from .errors import ConfigError, InconsistentData
from .optimizer import bound_from_splittings, crystal_tilt
from .zeeman import splitting

DIRECTIONS = ("[-1-11]", "[001]", "[111]")
SQRT32 = math.sqrt(1.5)


@dataclass(frozen=True)
class SplittingMeasurement:
    direction_label: str
    delta_g: float
    delta_e: float | None
    sigma_g: float = 0.0
    sigma_e: float = 0.0

    def __post_init__(self):
        if self.direction_label not in DIRECTIONS:
            raise ConfigError("direction", f"expected one of {DIRECTIONS}, got {self.direction_label!r}")
        if not self.delta_g > 0 or (self.delta_e is not None and not self.delta_e > 0):
            raise ConfigError(self.direction_label, "splittings must be > 0")
        if self.sigma_g < 0 or self.sigma_e < 0:
            raise ConfigError(self.direction_label, "sigmas must be >= 0")


@dataclass(frozen=True)
class Value:
    value: float
    sigma: float

    def __iter__(self):
        return iter((self.value, self.sigma))


@dataclass
class FitResult:
    gy_g: Value
    gy_e: Value
    gy_g_combination: Value | None = None
    gy_e_combination: Value | None = None
    ratio_xy_g_upper: float | None = None
    ratio_xy_e: Value | None = None
    ratio_comb_g: Value | None = None
    ratio_comb_e: Value | None = None
    consistent: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LambdaFigures:
    r_max_bound: Value
    theta0_local: Value
    dTheta0_deg: Value


def propagate(f, values, sigmas, rel_step: float = 1e-6) -> Value:
    """First-order uncertainty of f(*values) via central differences."""
    values = [float(v) for v in values]
    f0 = float(f(*values))
    var = 0.0
    for i, (v, s) in enumerate(zip(values, sigmas)):
        if s == 0:
            continue
        h = rel_step * max(abs(v), 1e-12)
        up, dn = list(values), list(values)
        up[i] += h
        dn[i] -= h
        d = (f(*up) - f(*dn)) / (2 * h)
        var += (d * s) ** 2
    return Value(f0, math.sqrt(var))


def measurements_from_json(text: str) -> dict[str, SplittingMeasurement]:
    """Parse ``[{direction, delta_g, delta_e, sigma_g, sigma_e}, ...]`` keyed by direction."""
    try:
        items = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("measurements", f"not valid JSON ({exc})") from None
    if not isinstance(items, list):
        raise ConfigError("measurements", "expected a JSON list of measurement objects")
    out = {}
    for i, it in enumerate(items):
        if not isinstance(it, dict):
            raise ConfigError(f"measurements[{i}]", "expected an object")
        for key in ("direction", "delta_g"):
            if key not in it:
                raise ConfigError(f"measurements[{i}].{key}", "missing")
        label = str(it["direction"]).replace(" ", "")
        try:
            m = SplittingMeasurement(
                label,
                float(it["delta_g"]),
                None if it.get("delta_e") is None else float(it["delta_e"]),
                float(it.get("sigma_g", 0.0)),
                float(it.get("sigma_e", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"measurements[{i}]", str(exc)) from None
        out[label] = m
    for d in DIRECTIONS:
        if d not in out:
            raise ConfigError(d, "missing measurement for direction")
    return out


def _combination(d001, d111, dbar):
    return math.sqrt(d001**2 + 0.75 * (d111**2 - dbar**2))


def fit_gamma_y(m111, m001, m_bar, check: bool = True) -> FitResult:
    """gamma_y per level, neglecting gz in the [111] splitting; the three-direction
    combination is carried as a cross-check."""
    gy_g = Value(SQRT32 * m111.delta_g, SQRT32 * m111.sigma_g)
    if m111.delta_e is None:
        raise ConfigError("[111]", "excited-state splitting is required")
    gy_e = Value(SQRT32 * m111.delta_e, SQRT32 * m111.sigma_e)

    comb_g = propagate(_combination, (m001.delta_g, m111.delta_g, m_bar.delta_g),
                       (m001.sigma_g, m111.sigma_g, m_bar.sigma_g))
    comb_e = None
    if m001.delta_e is not None and m_bar.delta_e is not None:
        comb_e = propagate(_combination, (m001.delta_e, m111.delta_e, m_bar.delta_e),
                           (m001.sigma_e, m111.sigma_e, m_bar.sigma_e))

    consistent = True
    for primary, cross in ((gy_g, comb_g), (gy_e, comb_e)):
        if cross is None:
            continue
        tol = 3 * math.hypot(primary.sigma, cross.sigma)
        if abs(primary.value - cross.value) > tol:
            consistent = False
    fit = FitResult(gy_g, gy_e, comb_g, comb_e, consistent=consistent)
    if check and not consistent:
        raise InconsistentData(
            f"gamma_y routes disagree beyond 3 sigma: ground {gy_g} vs {comb_g}, excited {gy_e} vs {comb_e}"
        )
    return fit


def anisotropy_ratios(fit: FitResult, m_bar: SplittingMeasurement) -> FitResult:
    sq3 = math.sqrt(3.0)
    fit.ratio_comb_g = propagate(lambda d, g: sq3 * d / g,
                                 (m_bar.delta_g, fit.gy_g.value), (m_bar.sigma_g, fit.gy_g.sigma))
    fit.ratio_comb_e = propagate(lambda d, g: sq3 * d / g,
                                 (m_bar.delta_e, fit.gy_e.value), (m_bar.sigma_e, fit.gy_e.sigma))
    # gz neglected: justified for the excited level only, so the ground value is a bound
    fit.ratio_xy_e = propagate(lambda d, g: SQRT32 * d / g,
                               (m_bar.delta_e, fit.gy_e.value), (m_bar.sigma_e, fit.gy_e.sigma))
    fit.ratio_xy_g_upper = SQRT32 * m_bar.delta_g / fit.gy_g.value
    return fit


def lambda_figures(fit: FitResult, m_bar: SplittingMeasurement) -> LambdaFigures:
    vals = (m_bar.delta_g, m_bar.delta_e, fit.gy_g.value, fit.gy_e.value)
    sigs = (m_bar.sigma_g, m_bar.sigma_e, fit.gy_g.sigma, fit.gy_e.sigma)
    bound = propagate(lambda *a: bound_from_splittings(*a)[0], vals, sigs)
    theta0 = propagate(lambda *a: bound_from_splittings(*a)[1], vals, sigs)
    dtheta = propagate(lambda *a: math.degrees(crystal_tilt(bound_from_splittings(*a)[1])), vals, sigs)
    return LambdaFigures(bound, theta0, dtheta)


@dataclass(frozen=True)
class ConsistencyReport:
    predicted_g: Value
    predicted_e: Value
    measured_g: Value
    measured_e: Value | None
    deviation_sigma_g: float
    deviation_sigma_e: float | None


def _pred001(gx, gy):
    return math.sqrt((gx * gx + gy * gy) / 2.0)


def _deviation(pred: Value, meas: Value) -> float:
    s = math.hypot(pred.sigma, meas.sigma)
    diff = abs(pred.value - meas.value)
    if s == 0:
        return 0.0 if diff < 1e-12 * max(1.0, abs(meas.value)) else math.inf
    return diff / s


def consistency_check(fit: FitResult, m001: SplittingMeasurement) -> ConsistencyReport:
    """Predict the [001] splittings from the fit (ground gx taken as 0)."""
    pred_g = propagate(lambda gy: _pred001(0.0, gy), (fit.gy_g.value,), (fit.gy_g.sigma,))
    if fit.ratio_xy_e is not None:
        pred_e = propagate(lambda r, gy: _pred001(r * gy, gy),
                           (fit.ratio_xy_e.value, fit.gy_e.value), (fit.ratio_xy_e.sigma, fit.gy_e.sigma))
    else:
        pred_e = propagate(lambda gy: _pred001(0.0, gy), (fit.gy_e.value,), (fit.gy_e.sigma,))
    meas_g = Value(m001.delta_g, m001.sigma_g)
    meas_e = None if m001.delta_e is None else Value(m001.delta_e, m001.sigma_e)
    return ConsistencyReport(
        pred_g, pred_e, meas_g, meas_e,
        _deviation(pred_g, meas_g),
        None if meas_e is None else _deviation(pred_e, meas_e),
    )


def fit_all(measurements: dict[str, SplittingMeasurement], check: bool = True) -> dict:
    """Full pipeline with every intermediate quantity, ready for JSON output."""
    m_bar, m001, m111 = (measurements[d] for d in DIRECTIONS)
    fit = fit_gamma_y(m111, m001, m_bar, check=check)
    anisotropy_ratios(fit, m_bar)
    figs = lambda_figures(fit, m_bar)
    cons = consistency_check(fit, m001)
    return {
        "inputs": {k: asdict(v) for k, v in measurements.items()},
        "fit": fit.to_dict(),
        "lambda_figures": asdict(figs),
        "consistency": asdict(cons),
    }


def synthetic_measurements(gamma_g, gamma_e, sigma: float = 0.0) -> dict[str, SplittingMeasurement]:
    """Splittings per tesla a given tensor pair would produce along the three directions."""
    site_for = {"[-1-11]": 3, "[001]": 3, "[111]": 1}
    out = {}
    for label in DIRECTIONS:
        bl = geometry.to_local(geometry.frame(site_for[label]), geometry.direction(label))
        out[label] = SplittingMeasurement(
            label, splitting(gamma_g, bl), splitting(gamma_e, bl), sigma, sigma
        )
    return out
