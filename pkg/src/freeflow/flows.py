"""Explicit L1 vector fields with prescribed distributional divergence.

The spindle field on a lens-shaped tube around a segment [x,y] has
-div = delta_y - delta_x and L1 norm at most ||y-x|| + M*eps; chaining
spindles along a piecewise-linear path telescopes the divergence to the path
endpoints. Smearing a closed loop's tangent measure with a bump of radius 1/k
yields a smooth, compactly supported divergence-free field. Hyper-rectangle
face measures discretize the Bochner integral of evaluation differences over
opposite faces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .domain import Domain, PLPath, vector_norm
from .errors import (
    DegenerateSegment,
    RectOutsideDomain,
    SpindleLeavesDomain,
    TubeLeavesDomain,
)
from .fields import GridVectorField
from .transport import Molecule


@dataclass(frozen=True)
class Profile:
    """Cross-section profile psi on [0,1]: psi(0)=psi(1)=0, 0 < psi <= 1 inside,
    Lipschitz with |psi'| <= slope_bound."""

    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Callable[[np.ndarray], np.ndarray]
    slope_bound: float
    name: str = "custom"


def parabolic_profile() -> Profile:
    return Profile(fn=lambda t: t * (1.0 - t),
                   dfn=lambda t: 1.0 - 2.0 * t,
                   slope_bound=1.0,
                   name="t(1-t)")


PROFILES = {"t(1-t)": parabolic_profile}


@dataclass(frozen=True)
class SpindleSpec:
    x: tuple
    y: tuple
    epsilon: float
    psi: Profile = field(default_factory=parabolic_profile)
    subsamples: int = 4

    def to_json_dict(self):
        return {"x": list(self.x), "y": list(self.y), "epsilon": self.epsilon,
                "psi": self.psi.name, "subsamples": self.subsamples}

    @classmethod
    def from_json_dict(cls, d):
        prof = PROFILES[d.get("psi", "t(1-t)")]()
        return cls(x=tuple(d["x"]), y=tuple(d["y"]), epsilon=float(d["epsilon"]),
                   psi=prof, subsamples=int(d.get("subsamples", 4)))


@dataclass
class SpindleField:
    spec: SpindleSpec
    grid_values: GridVectorField
    l1_norm: float


def _check_profile(psi: Profile):
    t = np.linspace(0.0, 1.0, 101)
    v = psi.fn(t)
    if abs(v[0]) > 1e-12 or abs(v[-1]) > 1e-12:
        raise ValueError("profile must vanish at both endpoints")
    if (v[1:-1] <= 0).any() or (v <= 1.0 + 1e-12).all() is False:
        raise ValueError("profile must satisfy 0 < psi <= 1 on (0,1)")


def _segment_clearance(domain: Domain, a, b):
    """Min Euclidean boundary clearance over a supersampled segment."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = max(3, int(np.ceil(np.linalg.norm(b - a) / (domain.h / 4.0))) + 1)
    ts = np.linspace(0.0, 1.0, n)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    return float(domain.boundary_clearance(pts).min())


def _candidate_cells(domain: Domain, lo, hi, pad):
    c = domain.centers
    sel = ((c[:, 0] >= lo[0] - pad) & (c[:, 0] <= hi[0] + pad)
           & (c[:, 1] >= lo[1] - pad) & (c[:, 1] <= hi[1] + pad))
    return np.flatnonzero(sel)


def _subsample_offsets(h, s):
    d = ((np.arange(s) + 0.5) / s - 0.5) * h
    ox, oy = np.meshgrid(d, d, indexing="ij")
    return np.stack([ox.ravel(), oy.ravel()], axis=1)  # (s*s, 2)


def spindle_field(domain: Domain, spec: SpindleSpec) -> SpindleField:
    """Cell-averaged closed-form spindle field for -div = delta_y - delta_x."""
    x = np.asarray(spec.x, dtype=float)
    y = np.asarray(spec.y, dtype=float)
    d = y - x
    seg_len2 = float(d @ d)
    if seg_len2 < 1e-24:
        raise DegenerateSegment("spindle endpoints coincide")
    seg_len = math.sqrt(seg_len2)
    if spec.epsilon <= 0:
        raise SpindleLeavesDomain("epsilon must be positive")
    _check_profile(spec.psi)
    clearance = _segment_clearance(domain, x, y)
    if clearance <= spec.epsilon:
        raise SpindleLeavesDomain(
            f"tube radius eps={spec.epsilon:g} exceeds segment clearance {clearance:g}"
        )

    nhat = np.array([-d[1], d[0]]) / seg_len
    h = domain.h
    cells = _candidate_cells(domain, np.minimum(x, y), np.maximum(x, y),
                             pad=spec.epsilon + h)
    offs = _subsample_offsets(h, spec.subsamples)
    pts = domain.centers[cells][:, None, :] + offs[None, :, :]  # (C,S,2)
    rel = pts - x
    t = (rel @ d) / seg_len2
    s_raw = rel @ nhat
    psi_t = np.zeros_like(t)
    core = (t > 0.0) & (t < 1.0)
    psi_t[core] = spec.psi.fn(t[core])
    inside = core & (psi_t > 1e-14) & (np.abs(s_raw) <= spec.epsilon * psi_t)

    vals = np.zeros(pts.shape)
    if inside.any():
        ti = t[inside]
        w = s_raw[inside] / psi_t[inside]  # in [-eps, eps]
        denom = 2.0 * spec.epsilon * seg_len * psi_t[inside]
        vec = d[None, :] + (spec.psi.dfn(ti) * w)[:, None] * nhat[None, :]
        vals[inside] = vec / denom[:, None]
    cell_vals = vals.mean(axis=1)  # average of the zero-extended closed form

    values = np.zeros((domain.n_cells, 2))
    values[cells] = cell_vals
    support = np.zeros(domain.n_cells, dtype=bool)
    support[cells] = np.abs(cell_vals).max(axis=1) > 0
    gfield = GridVectorField(domain, values, support=support)
    return SpindleField(spec=spec, grid_values=gfield, l1_norm=gfield.l1_norm())


def chain_spindles(domain: Domain, path: PLPath, epsilon: float) -> GridVectorField:
    """Sum of per-segment spindles along the path; eps is capped per segment by
    the segment's boundary clearance. Supports may overlap (values add)."""
    verts = path.vertices
    segs = path.segments()
    if len(segs) == 0:
        raise DegenerateSegment("chain needs at least one segment")
    values = np.zeros((domain.n_cells, 2))
    support = np.zeros(domain.n_cells, dtype=bool)
    for a, b in segs:
        if np.linalg.norm(b - a) < 1e-15:
            continue
        clearance = _segment_clearance(domain, a, b)
        if clearance <= 0:
            raise SpindleLeavesDomain("chain segment leaves the domain")
        eps_seg = min(float(epsilon), clearance - 1e-12)
        if eps_seg <= 0:
            raise SpindleLeavesDomain("no positive tube radius fits this segment")
        sf = spindle_field(domain, SpindleSpec(x=tuple(a), y=tuple(b), epsilon=eps_seg))
        values += sf.grid_values.values
        support |= sf.grid_values.support
    return GridVectorField(domain, values, support=support)


@lru_cache(maxsize=1)
def _bump_normalization():
    """1 / integral over the plane of exp(-1/(1-r^2)) on the unit disk."""
    val, _ = quad(lambda r: math.exp(-1.0 / (1.0 - r * r)) * r, 0.0, 1.0)
    return 1.0 / (2.0 * math.pi * val)


def _bump_uk(v, k):
    """u_k(v) = k^2 u(k v) with the standard bump u, unit continuum mass."""
    r2 = (np.asarray(v) ** 2).sum(axis=-1) * k * k
    out = np.zeros(r2.shape)
    core = r2 < 1.0 - 1e-14
    out[core] = np.exp(-1.0 / (1.0 - r2[core]))
    return out * (_bump_normalization() * k * k)


def loop_smear(domain: Domain, loop: PLPath, k: int, subsamples: int = 2) -> GridVectorField:
    """h(z) = integral of u_k(gamma(t)-z) gamma'(t) dt for a closed loop:
    smooth, supported in the 1/k tube, divergence-free."""
    if not loop.closed:
        raise TubeLeavesDomain("loop must be closed")
    segs = loop.segments()
    total_len = sum(float(np.linalg.norm(b - a)) for a, b in segs)
    values = np.zeros((domain.n_cells, 2))
    if total_len == 0.0:
        return GridVectorField(domain, values, support=np.zeros(domain.n_cells, bool))

    radius = 1.0 / k
    for a, b in segs:
        n = max(3, int(np.ceil(np.linalg.norm(b - a) / (domain.h / 4.0))) + 1)
        ts = np.linspace(0.0, 1.0, n)
        pts = a[None, :] + ts[:, None] * (b - a)[None, :]
        if (domain.boundary_clearance(pts) <= radius - 1e-12).any():
            raise TubeLeavesDomain(
                f"loop tube of radius 1/k={radius:g} leaves the domain"
            )

    # midpoint samples of the loop, weighted by the local segment step
    step = min(domain.h, radius / 4.0)
    sample_pts = []
    sample_wts = []
    for a, b in segs:
        d = b - a
        seg_len = float(np.linalg.norm(d))
        if seg_len == 0.0:
            continue
        m = max(1, int(np.ceil(seg_len / step)))
        tm = (np.arange(m) + 0.5) / m
        sample_pts.append(a[None, :] + tm[:, None] * d[None, :])
        sample_wts.append(np.tile(d / m, (m, 1)))
    sample_pts = np.concatenate(sample_pts, axis=0)
    sample_wts = np.concatenate(sample_wts, axis=0)

    verts = loop.vertices
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    cells = _candidate_cells(domain, lo, hi, pad=radius + domain.h)
    offs = _subsample_offsets(domain.h, subsamples)
    sub_pts = domain.centers[cells][:, None, :] + offs[None, :, :]
    flat = sub_pts.reshape(-1, 2)

    out = np.zeros((len(flat), 2))
    chunk = max(1, int(4e6 / max(1, len(sample_pts))))
    for start in range(0, len(flat), chunk):
        block = flat[start:start + chunk]
        diff = sample_pts[None, :, :] - block[:, None, :]
        w = _bump_uk(diff, k)
        out[start:start + chunk] = w @ sample_wts
    cell_vals = out.reshape(len(cells), -1, 2).mean(axis=1)

    values[cells] = cell_vals
    support = np.zeros(domain.n_cells, dtype=bool)
    support[cells] = np.abs(cell_vals).max(axis=1) > 0
    return GridVectorField(domain, values, support=support)


def rect_face_measure(domain: Domain, rect, axis: int) -> Molecule:
    """Molecule with mass +h per cell on the face x_axis = b and -h on
    x_axis = a of an axis-aligned rectangle: the discrete face integral of
    evaluation differences, pairing with f to ~ integral of d_axis f over rect."""
    (a1, a2), (b1, b2) = rect
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    lo = np.array([min(a1, b1), min(a2, b2)], dtype=float)
    hi = np.array([max(a1, b1), max(a2, b2)], dtype=float)
    corners = np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    ring = PLPath(corners, closed=True)
    for a, b in ring.segments():
        n = max(3, int(np.ceil(np.linalg.norm(b - a) / (domain.h / 4.0))) + 1)
        ts = np.linspace(0.0, 1.0, n)
        pts = a[None, :] + ts[:, None] * (b - a)[None, :]
        if (domain.boundary_clearance(pts) <= 0).any():
            raise RectOutsideDomain("rectangle is not contained in the domain")

    h = domain.h
    ax = axis - 1
    tr = 1 - ax
    col_a = int(round((lo[ax] - domain.origin[ax]) / h - 0.5))
    col_b = int(round((hi[ax] - domain.origin[ax]) / h - 0.5))
    j_lo = int(np.ceil((lo[tr] - domain.origin[tr]) / h - 0.5))
    j_hi = int(np.floor((hi[tr] - domain.origin[tr]) / h - 0.5))
    cells, masses = [], []
    for j in range(j_lo, j_hi + 1):
        for col, sign in ((col_b, +1.0), (col_a, -1.0)):
            ij = (col, j) if ax == 0 else (j, col)
            if not (0 <= ij[0] < domain.nx and 0 <= ij[1] < domain.ny):
                raise RectOutsideDomain("face cell outside the grid")
            idx = domain.cell_index[ij]
            if idx < 0:
                raise RectOutsideDomain("face cell is not interior")
            cells.append(int(idx))
            masses.append(sign * h)
    return Molecule.from_cell_masses(cells, masses)
