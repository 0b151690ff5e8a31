"""Branching-ratio optimisation over the applied-field orientation.

Local-frame tilt parameterisation used throughout::

    B / |B| = (cos(theta) cos(phi), sin(theta), cos(theta) sin(phi))

``phi`` is the azimuth of the field's projection on the local xOz plane and
``theta`` the tilt toward the strong y axis.  With ``rho = Delta/gamma_y`` at
theta = 0, i.e. rho = sqrt(r^2 cos^2 phi + s^2 sin^2 phi), the near-optimal
tilt is tan(theta0) = sqrt(rho_e rho_g) and

    R_max >= ((sqrt(rho_g) - sqrt(rho_e)) / (sqrt(rho_g) + sqrt(rho_e)))^2.

The disparity factors are written in cos(phi)-multiplied form so phi = pi/2
needs no special casing.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import geometry
from .errors import ComputationError, NoInteriorMaximum
from .zeeman import GyroTensor, lambda_system, splitting

SMALL_TILT = 0.3  # rad; beyond this the crystal-tilt conversion is unreliable


@dataclass
class SiteScan:
    delta_g: np.ndarray
    delta_e: np.ndarray
    branching_ratio: np.ndarray  # NaN where an effective field is degenerate


@dataclass
class OrientationScan:
    theta_grid: np.ndarray
    site_classes: dict = field(default_factory=dict)  # label -> SiteScan

    def rows(self):
        """Plot-ready rows in grid order: theta_deg then per-class columns."""
        labels = list(self.site_classes)
        for i, th in enumerate(self.theta_grid):
            row = [math.degrees(th)]
            for lab in labels:
                sc = self.site_classes[lab]
                row += [sc.delta_g[i], sc.delta_e[i], sc.branching_ratio[i]]
            yield row


@dataclass(frozen=True)
class TiltOptimum:
    theta0_local: float
    dTheta0_crystal: float
    r_max_bound: float
    r_max_exact: float
    phi: float
    theta_star: float = float("nan")
    sin_alpha_at_theta0: float = float("nan")
    r_at_theta0: float = float("nan")


@dataclass(frozen=True)
class DisparityFactors:
    A: float
    C: float
    F: float
    identity_residual: float


def theta_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive, strictly increasing grid; empty when stop < start."""
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    if stop < start:
        return np.empty(0)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _scan_point(args):
    theta, gamma_g, gamma_e, frames = args
    b = geometry.bisector_field(theta)
    out = []
    for fr in frames:
        bl = geometry.to_local(fr, b)
        dg, de = splitting(gamma_g, bl), splitting(gamma_e, bl)
        try:
            r = lambda_system(gamma_g, gamma_e, bl).branching_ratio
        except ComputationError:
            r = float("nan")
        out.append((dg, de, r))
    return out


def scan_bisector(
    gamma_g: GyroTensor,
    gamma_e: GyroTensor,
    theta_range=(-math.pi / 2, math.pi / 2),
    step=math.radians(0.25),
    workers: int = 1,
) -> OrientationScan:
    """Splittings (per tesla) and R for site 1 and sites 3/5 over the bisector plane."""
    grid = theta_grid(theta_range[0], theta_range[1], step)
    frames = (geometry.frame(1), geometry.frame(3))
    tasks = [(th, gamma_g, gamma_e, frames) for th in grid]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(_scan_point, tasks))  # map keeps grid order
    else:
        results = [_scan_point(t) for t in tasks]

    scan = OrientationScan(grid)
    for k, label in enumerate(("site1", "site35")):
        arr = np.array([r[k] for r in results], dtype=float).reshape(-1, 3)
        scan.site_classes[label] = SiteScan(arr[:, 0], arr[:, 1], arr[:, 2])
    return scan


def tilt_optimum_xoy(r_e: float, r_g: float) -> tuple[float, float]:
    """Small-tilt optimum for a field tilted from Ox toward Oy."""
    theta0 = math.sqrt(r_e * r_g)
    q = (math.sqrt(r_e) - math.sqrt(r_g)) / (math.sqrt(r_e) + math.sqrt(r_g))
    return theta0, q * q


def bound_from_splittings(delta_g, delta_e, gy_g, gy_e) -> tuple[float, float]:
    """Lower bound on the optimal R and the local tilt, from splittings at B_y = 0."""
    ug, ue = delta_g / gy_g, delta_e / gy_e
    q = (math.sqrt(ug) - math.sqrt(ue)) / (math.sqrt(ug) + math.sqrt(ue))
    return q * q, math.atan(math.sqrt(ug * ue))


def crystal_tilt(theta0_local: float) -> float:
    """Bisector-plane offset from [-1-11] matching a local tilt (small-angle)."""
    if abs(theta0_local) >= SMALL_TILT:
        warnings.warn(
            f"local tilt {theta0_local:.3f} rad is not small; crystal-frame conversion is approximate",
            stacklevel=2,
        )
    return 2.0 * theta0_local / math.sqrt(3.0)


def tilt_field(theta: float, phi: float) -> np.ndarray:
    ct = math.cos(theta)
    return np.array([ct * math.cos(phi), math.sin(theta), ct * math.sin(phi)])


def _rho(g: GyroTensor, phi: float) -> float:
    return math.hypot(g.r * math.cos(phi), g.s * math.sin(phi))


def _check_gy(gamma_g, gamma_e):
    if not (gamma_g.gamma_y > 0 and gamma_e.gamma_y > 0):
        raise ValueError("gamma_y must be positive in both levels")


def sin_alpha_tilt(gamma_g: GyroTensor, gamma_e: GyroTensor, theta: float, phi: float) -> float:
    """|n_e x n_g| from the explicit ratio formula (independent of the vector route)."""
    rg, sg, re, se = gamma_g.r, gamma_g.s, gamma_e.r, gamma_e.s
    c, sn, t = math.cos(phi), math.sin(phi), math.tan(theta)
    num = t * t * (sn * sn * (sg - se) ** 2 + c * c * (re - rg) ** 2) + (c * sn * (re * sg - rg * se)) ** 2
    de2 = (re * c) ** 2 + t * t + (se * sn) ** 2
    dg2 = (rg * c) ** 2 + t * t + (sg * sn) ** 2
    return math.sqrt(num / (de2 * dg2))


def r_of_theta(gamma_g: GyroTensor, gamma_e: GyroTensor, theta: float, phi: float) -> float:
    return lambda_system(gamma_g, gamma_e, tilt_field(theta, phi)).branching_ratio


def _r_on_grid(gamma_g: GyroTensor, gamma_e: GyroTensor, thetas, phi: float) -> np.ndarray:
    """Vectorised R(theta), cross-product form; only used to locate the bracket."""
    t = np.asarray(thetas)[:, None]
    b = np.hstack([np.cos(t) * math.cos(phi), np.sin(t), np.cos(t) * math.sin(phi)])
    ng = b * gamma_g.diag
    ne = b * gamma_e.diag
    ng /= np.linalg.norm(ng, axis=1, keepdims=True)
    ne /= np.linalg.norm(ne, axis=1, keepdims=True)
    c = np.sum(ng * ne, axis=1)
    return np.sum(np.cross(ne, ng) ** 2, axis=1) / (1.0 + c) ** 2


def numeric_maximize(gamma_g: GyroTensor, gamma_e: GyroTensor, phi: float, n_grid: int = 1000):
    """Exact maximum of R over theta in (0, pi/2) at fixed phi."""
    _check_gy(gamma_g, gamma_e)
    hi_edge = math.pi / 2
    for _ in range(6):
        grid = np.linspace(0.0, hi_edge, n_grid + 2)[1:-1]
        vals = _r_on_grid(gamma_g, gamma_e, grid, phi)
        i = int(np.argmax(vals))
        if i > 0:
            break
        # optimum may hide below the first grid point; zoom toward theta = 0
        hi_edge = grid[1]
    if vals[i] <= 1e-15:
        return float(grid[i]), 0.0
    if i == 0 or i == len(grid) - 1:
        raise NoInteriorMaximum(f"R is monotone in theta at phi={phi:.6g} (max at grid edge)")

    lo, mid, hi = grid[i - 1], grid[i], grid[i + 1]

    def neg_r(t):
        return -r_of_theta(gamma_g, gamma_e, t, phi)

    try:
        # relative tolerance scaled so the final bracket is < 1e-8 rad anywhere in (0, pi/2)
        res = minimize_scalar(neg_r, bracket=(lo, mid, hi), method="golden", tol=1e-8 / (2 * math.pi))
    except ValueError:
        # plateau at machine precision: golden needs a strict bracket
        res = minimize_scalar(neg_r, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    theta_star = float(res.x)
    r_star = r_of_theta(gamma_g, gamma_e, theta_star, phi)
    # R is even in theta; a "maximum" no higher than the untilted value is the boundary
    r_flat = float(_r_on_grid(gamma_g, gamma_e, [0.0], phi)[0])
    if r_star <= r_flat * (1 + 1e-12):
        raise NoInteriorMaximum(f"R decreases from theta = 0 at phi={phi:.6g}; optimum is untilted")
    return theta_star, r_star


def general_tilt(gamma_g: GyroTensor, gamma_e: GyroTensor, phi: float) -> TiltOptimum:
    _check_gy(gamma_g, gamma_e)
    rho_g, rho_e = _rho(gamma_g, phi), _rho(gamma_e, phi)
    theta0 = math.atan(math.sqrt(rho_e * rho_g))
    sin_a = sin_alpha_tilt(gamma_g, gamma_e, theta0, phi)
    r0 = r_of_theta(gamma_g, gamma_e, theta0, phi)
    bound, _ = bound_from_splittings(rho_g, rho_e, 1.0, 1.0)
    theta_star, r_star = numeric_maximize(gamma_g, gamma_e, phi)
    return TiltOptimum(
        theta0_local=theta0,
        dTheta0_crystal=crystal_tilt(theta0),
        r_max_bound=bound,
        r_max_exact=r_star,
        phi=phi,
        theta_star=theta_star,
        sin_alpha_at_theta0=sin_a,
        r_at_theta0=r0,
    )


def disparity_decomposition(gamma_g: GyroTensor, gamma_e: GyroTensor, phi: float) -> DisparityFactors:
    """Split sin^2(alpha) at theta0 into the bound term plus A*C*F."""
    _check_gy(gamma_g, gamma_e)
    rg, sg, re, se = gamma_g.r, gamma_g.s, gamma_e.r, gamma_e.s
    c, sn = math.cos(phi), math.sin(phi)
    rho_g, rho_e = _rho(gamma_g, phi), _rho(gamma_e, phi)

    plus = re * sg + rg * se
    A = ((re * sg - rg * se) / plus) ** 2 if plus != 0 else 0.0
    C = (plus * sn * c / (math.sqrt(rho_e * rho_g) * (rho_e + rho_g))) ** 2
    te, tg = se / re, sg / rg
    de = math.sqrt(c * c + (te * sn) ** 2)  # delta_i * cos(phi)
    dg = math.sqrt(c * c + (tg * sn) ** 2)
    F = 1.0 + 2.0 * de * dg / (c * c + de * dg + te * tg * sn * sn)

    theta0 = math.atan(math.sqrt(rho_e * rho_g))
    lhs = sin_alpha_tilt(gamma_g, gamma_e, theta0, phi) ** 2
    rhs = ((rho_g - rho_e) / (rho_g + rho_e)) ** 2 + A * C * F
    return DisparityFactors(A, C, F, abs(lhs - rhs))


def phi_from_local(b_local) -> float:
    """Azimuth of the xOz projection of a local field, folded into [0, pi/2]."""
    bx, _, bz = np.abs(np.asarray(b_local, dtype=float))
    return math.atan2(bz, bx)
