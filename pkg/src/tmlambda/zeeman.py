"""Effective-field model of the enhanced nuclear Zeeman interaction (I = 1/2).

In a D2 site the effective Hamiltonian is diagonal in the site frame,

    H = gx Bx Ix + gy By Iy + gz Bz Iz = delta * (n . I),

so every level is described by a splitting ``delta`` and a unit vector ``n``
(the effective field).  The optical branching ratio of the Lambda system is
fixed by the angle between the ground and excited effective fields.

Gyromagnetic factors are in MHz/T, fields in tesla, splittings in MHz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntiparallelFields, DegenerateField

# Spin-1/2 operators I = sigma / 2
IX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
IY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
IZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class GyroTensor:
    gamma_x: float
    gamma_y: float
    gamma_z: float
    level_label: str = "ground"

    def __post_init__(self):
        vals = (self.gamma_x, self.gamma_y, self.gamma_z)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"non-finite gyromagnetic factor in {vals}")
        if self.level_label not in ("ground", "excited"):
            raise ValueError(f"level_label must be 'ground' or 'excited', got {self.level_label!r}")

    @property
    def diag(self) -> np.ndarray:
        return np.array([self.gamma_x, self.gamma_y, self.gamma_z], dtype=float)

    @classmethod
    def from_ratios(cls, gamma_y, r, s, level_label="ground"):
        """Build from gamma_y and the ratios r = gx/gy, s = gz/gy."""
        return cls(r * gamma_y, gamma_y, s * gamma_y, level_label)

    @property
    def r(self) -> float:
        return self.gamma_x / self.gamma_y

    @property
    def s(self) -> float:
        return self.gamma_z / self.gamma_y


@dataclass(frozen=True)
class EffectiveField:
    X: float
    Y: float
    Z: float
    delta: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])


@dataclass(frozen=True)
class SpinEigenstate:
    a: complex
    b: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)


@dataclass(frozen=True)
class LambdaSystem:
    eff_ground: EffectiveField
    eff_excited: EffectiveField
    alpha_eff: float
    branching_ratio: float


def splitting(g: GyroTensor, b_local) -> float:
    return float(np.linalg.norm(g.diag * np.asarray(b_local, dtype=float)))


def effective_field(g: GyroTensor, b_local) -> EffectiveField:
    b_local = np.asarray(b_local, dtype=float)
    v = g.diag * b_local
    delta = float(np.linalg.norm(v))
    scale = np.max(np.abs(g.diag)) * np.linalg.norm(b_local)
    if delta == 0.0 or delta <= 1e-14 * scale:
        raise DegenerateField(f"zero splitting for gamma={g.diag.tolist()}, B={b_local.tolist()}")
    x, y, z = v / delta
    return EffectiveField(float(x), float(y), float(z), delta)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # b real and >= 0; if b vanishes, make a real and > 0 instead
    k = 1 if abs(v[1]) > 1e-15 else 0
    out = v * (np.conj(v[k]) / abs(v[k]))
    out[k] = abs(v[k])  # exactly real, no rounding residue
    return out


def eigenstates(eff: EffectiveField) -> tuple[SpinEigenstate, SpinEigenstate]:
    """Eigenvectors of (X Ix + Y Iy + Z Iz) on the Iz basis (|+>, |->).

    state1 has eigenvalue -1/2 (|a1|^2 = (1 - Z)/2), state2 has +1/2.
    """
    X, Y, Z = eff.X, eff.Y, eff.Z
    # two algebraically equivalent forms; take the better-conditioned one
    if Z <= 0:
        up = np.array([X - 1j * Y, 1.0 - Z])
        down = np.array([-(1.0 - Z), X + 1j * Y])
    else:
        up = np.array([1.0 + Z, X + 1j * Y])
        down = np.array([X - 1j * Y, -(1.0 + Z)])
    up = _fix_phase(up / np.linalg.norm(up))
    down = _fix_phase(down / np.linalg.norm(down))
    return SpinEigenstate(*down), SpinEigenstate(*up)


def spin_operator(eff: EffectiveField) -> np.ndarray:
    return eff.X * IX + eff.Y * IY + eff.Z * IZ


def branching_ratio(eff_g: EffectiveField, eff_e: EffectiveField) -> LambdaSystem:
    """Forbidden/allowed transition probability ratio of the Lambda system."""
    ng, ne = eff_g.vector, eff_e.vector
    cos_a = float(np.dot(ng, ne))
    cross2 = float(np.sum(np.cross(ne, ng) ** 2))
    if abs(1.0 + cos_a) < 1e-12:
        raise AntiparallelFields("ground and excited effective fields are antiparallel")
    r_cos = (1.0 - cos_a) / (1.0 + cos_a)
    r_cross = cross2 / (1.0 + cos_a) ** 2
    if abs(r_cos - r_cross) > 1e-12 * max(1.0, r_cross):
        raise ArithmeticError(f"branching-ratio forms disagree: {r_cos} vs {r_cross}")
    alpha = float(np.arctan2(np.sqrt(cross2), cos_a))
    return LambdaSystem(eff_g, eff_e, alpha, r_cross)


def lambda_system(g_ground: GyroTensor, g_excited: GyroTensor, b_local) -> LambdaSystem:
    return branching_ratio(effective_field(g_ground, b_local), effective_field(g_excited, b_local))


def overlap_matrix(ground_pair, excited_pair) -> np.ndarray:
    """|<g_i|e_j>|^2 for the two ground and two excited nuclear states."""
    g = np.array([s.vector for s in ground_pair])
    e = np.array([s.vector for s in excited_pair])
    return np.abs(np.conj(g) @ e.T) ** 2
