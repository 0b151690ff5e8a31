"""Six D2 substitution sites of YAG and their local frames.

Each site frame is an orthonormal right-handed triad expressed in the cubic
cell basis ([100], [010], [001]).  The optical transition dipole of a site lies
along its local y axis.  Only the magnitudes of local field components enter
the Zeeman model, so the residual sign freedom in the table is harmless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

_S2 = 1.0 / np.sqrt(2.0)

# (site_id, x_axis, y_axis, z_axis) before normalisation
_FRAME_TABLE = (
    (1, (1, -1, 0), (1, 1, 0), (0, 0, 1)),
    (2, (-1, -1, 0), (1, -1, 0), (0, 0, 1)),
    (3, (0, 1, -1), (0, 1, 1), (1, 0, 0)),
    (4, (0, -1, -1), (0, 1, -1), (1, 0, 0)),
    (5, (-1, 0, 1), (1, 0, 1), (0, 1, 0)),
    (6, (1, 0, 1), (1, 0, -1), (0, 1, 0)),
)

NAMED_DIRECTIONS = {
    "[001]": (0, 0, 1),
    "[100]": (1, 0, 0),
    "[010]": (0, 1, 0),
    "[111]": (1, 1, 1),
    "[-1-11]": (-1, -1, 1),
    "[110]": (1, 1, 0),
    "[1-10]": (1, -1, 0),
}

# Bisector-plane angle of [-1-11]; B_y vanishes there for sites 3 and 5.
THETA_BAR = -np.arctan(np.sqrt(2.0))

DARK_TOL = 1e-9
EQUIV_TOL = 1e-9


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError(f"cannot normalise vector {v!r}")
    return v / n


def direction(spec) -> np.ndarray:
    """Resolve a named label such as ``"[-1-11]"`` or a raw triplet to a unit vector."""
    if isinstance(spec, str):
        key = spec.strip().replace(" ", "")
        if key not in NAMED_DIRECTIONS:
            raise ValueError(f"unknown direction label {spec!r}; known: {sorted(NAMED_DIRECTIONS)}")
        return unit(NAMED_DIRECTIONS[key])
    return unit(spec)


@dataclass(frozen=True)
class SiteFrame:
    site_id: int
    x_axis: np.ndarray
    y_axis: np.ndarray
    z_axis: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Rows are the local axes, so ``matrix @ v`` gives local components."""
        return np.vstack([self.x_axis, self.y_axis, self.z_axis])

    def to_dict(self) -> dict:
        return {
            "site_id": self.site_id,
            "x_axis": self.x_axis.tolist(),
            "y_axis": self.y_axis.tolist(),
            "z_axis": self.z_axis.tolist(),
        }


_FRAMES = tuple(
    SiteFrame(sid, unit(x), unit(y), unit(z)) for sid, x, y, z in _FRAME_TABLE
)


def site_frames() -> list[SiteFrame]:
    return list(_FRAMES)


def frame(site_id: int) -> SiteFrame:
    if not 1 <= site_id <= 6:
        raise ValueError(f"site_id must be 1..6, got {site_id}")
    return _FRAMES[site_id - 1]


def frames_json(indent: int = 2) -> str:
    return json.dumps([f.to_dict() for f in _FRAMES], indent=indent)


def to_local(frame: SiteFrame, v) -> np.ndarray:
    return frame.matrix @ np.asarray(v, dtype=float)


def dipole_projection(frame: SiteFrame, polarization) -> float:
    return float(abs(np.dot(frame.y_axis, polarization)))


def bisector_field(theta: float) -> np.ndarray:
    """Unit field in the (1-10) plane, ``theta`` from [001] toward [110]."""
    return np.array([np.sin(theta) * _S2, np.sin(theta) * _S2, np.cos(theta)])


def bisector_by_closed_form(theta):
    """Local B_y/B at sites 3 and 5 for a bisector-plane field."""
    return 0.5 * np.sin(theta) + np.cos(theta) * _S2


@dataclass(frozen=True)
class SiteClassification:
    dark_sites: frozenset
    active_classes: tuple  # of frozensets, ordered by smallest site id
    projections: dict  # site_id -> |dipole . polarization|

    def class_of(self, site_id: int) -> frozenset | None:
        for cls in self.active_classes:
            if site_id in cls:
                return cls
        return None

    def od_fraction(self, sites) -> float:
        """Share of the optical density carried by ``sites`` (weights |proj|^2)."""
        total = sum(p * p for p in self.projections.values())
        if total == 0.0:
            return 0.0
        return sum(self.projections[s] ** 2 for s in sites) / total


def classify_sites(b_direction, polarization) -> SiteClassification:
    b = np.asarray(b_direction, dtype=float)
    pol = np.asarray(polarization, dtype=float)
    projections = {f.site_id: dipole_projection(f, pol) for f in _FRAMES}
    dark = frozenset(s for s, p in projections.items() if p < DARK_TOL)

    groups: list[tuple[np.ndarray, float, list[int]]] = []
    for f in _FRAMES:
        if f.site_id in dark:
            continue
        key = np.abs(to_local(f, b))
        proj = projections[f.site_id]
        for gkey, gproj, members in groups:
            if np.all(np.abs(gkey - key) < EQUIV_TOL) and abs(gproj - proj) < EQUIV_TOL:
                members.append(f.site_id)
                break
        else:
            groups.append((key, proj, [f.site_id]))

    classes = tuple(frozenset(m) for _, _, m in groups)
    return SiteClassification(dark, classes, projections)
