"""Grid fields over a rasterized domain and the calculus on them.

Scalar and vector fields live on interior cells (optionally restricted to an
eroded support). Mollification averages a bounded field with a discrete bump
kernel of radius 1/k and is therefore only defined on the cells at boundary
distance > 1/k + h/2, where every cell the kernel reads is interior. Line
integrals use per-segment composite midpoint quadrature with bilinear
interpolation of grid fields; conservativity of a bounded field is decided,
as in the continuum theory, only after mollification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import ndimage
from scipy.sparse.csgraph import dijkstra

from .domain import (
    Domain,
    PLPath,
    Region,
    dual_norm_id,
    erode_depth,
    path_length,
    vector_norm,
)
from .errors import (
    EmptyErosion,
    FieldDomainMismatch,
    IsolatedCell,
    KernelTooSmall,
    LoopOutsideRegion,
    PathLeavesSupport,
)

_W_EPS = 1e-12


# ---------------------------------------------------------------------------
# field types
# ---------------------------------------------------------------------------

class _GridFieldBase:
    def __init__(self, domain: Domain, values, support=None):
        self.domain = domain
        self.values = np.asarray(values, dtype=float)
        if support is None:
            support = np.ones(domain.n_cells, dtype=bool)
        self.support = np.asarray(support, dtype=bool)
        if len(self.values) != domain.n_cells or len(self.support) != domain.n_cells:
            raise FieldDomainMismatch("field arrays must cover all interior cells")
        if not np.isfinite(self.values[self.support]).all():
            raise FieldDomainMismatch("field has non-finite values on its support")
        self.values = np.where(
            self.support[(...,) + (None,) * (self.values.ndim - 1)], self.values, 0.0
        )

    @cached_property
    def _grid(self):
        shape = (self.domain.nx, self.domain.ny) + self.values.shape[1:]
        g = np.zeros(shape)
        ij = self.domain.cells_ij
        g[ij[:, 0], ij[:, 1]] = self.values
        return g

    @cached_property
    def _grid_support(self):
        g = np.zeros((self.domain.nx, self.domain.ny), dtype=bool)
        ij = self.domain.cells_ij
        g[ij[:, 0], ij[:, 1]] = self.support
        return g

    def interpolate(self, points):
        """Bilinear interpolation over supported cell centers.

        Corners outside the support are dropped and the weights renormalized;
        returns (values, ok) where ok is False when no corner is supported.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        u = (pts - self.domain.origin) / self.domain.h - 0.5
        i0 = np.floor(u).astype(np.int64)
        f = u - i0
        val_shape = pts.shape[:-1] + self.values.shape[1:]
        acc = np.zeros(val_shape)
        wsum = np.zeros(pts.shape[:-1])
        for dx, dy, w in (
            (0, 0, (1 - f[..., 0]) * (1 - f[..., 1])),
            (1, 0, f[..., 0] * (1 - f[..., 1])),
            (0, 1, (1 - f[..., 0]) * f[..., 1]),
            (1, 1, f[..., 0] * f[..., 1]),
        ):
            ix = i0[..., 0] + dx
            iy = i0[..., 1] + dy
            inb = (ix >= 0) & (ix < self.domain.nx) & (iy >= 0) & (iy < self.domain.ny)
            ixc = np.where(inb, ix, 0)
            iyc = np.where(inb, iy, 0)
            ok = inb & self._grid_support[ixc, iyc]
            wk = np.where(ok, w, 0.0)
            acc += wk[(...,) + (None,) * (self.values.ndim - 1)] * self._grid[ixc, iyc]
            wsum += wk
        ok = wsum > _W_EPS
        safe = np.where(ok, wsum, 1.0)
        return acc / safe[(...,) + (None,) * (self.values.ndim - 1)], ok


class GridScalarField(_GridFieldBase):
    """Real values on (a sub-region of) the interior cells."""

    def sup_norm(self) -> float:
        if not self.support.any():
            return 0.0
        return float(np.abs(self.values[self.support]).max())


class GridVectorField(_GridFieldBase):
    """2-vector values on (a sub-region of) the interior cells."""

    def __init__(self, domain, values, support=None, support_region: Optional[Region] = None):
        if support is None and support_region is not None:
            support = support_region.mask
        super().__init__(domain, values, support)
        self.support_region = support_region

    def sup_dual_norm(self) -> float:
        """ess-sup of the dual norm of the values (the L-infinity norm of an
        element of L^inf(Omega; E*))."""
        if not self.support.any():
            return 0.0
        return float(vector_norm(self.values[self.support],
                                 dual_norm_id(self.domain.norm_id)).max())

    def l1_norm(self) -> float:
        """Grid L1 norm: sum of ||value|| * h^2 in the domain norm."""
        return float(
            vector_norm(self.values[self.support], self.domain.norm_id).sum()
            * self.domain.h ** 2
        )


@dataclass(frozen=True)
class Mollifier:
    """Discrete bump kernel on cell offsets within Euclidean radius 1/k."""

    k: int
    offsets: np.ndarray  # (M,2) int
    weights: np.ndarray  # (M,), nonnegative, sums to 1

    @property
    def radius(self) -> float:
        return 1.0 / self.k

    @cached_property
    def kernel2d(self):
        r = int(np.abs(self.offsets).max()) if len(self.offsets) else 0
        k2 = np.zeros((2 * r + 1, 2 * r + 1))
        k2[self.offsets[:, 0] + r, self.offsets[:, 1] + r] = self.weights
        return k2


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form 2-vector field with a validity predicate."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    domain_of_validity: Callable[[np.ndarray], np.ndarray]

    def interpolate(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.asarray(self.domain_of_validity(pts), dtype=bool)
        vals = np.zeros(pts.shape)
        if ok.any():
            vals[ok] = self.evaluator(pts[ok])
        return vals, ok


@dataclass(frozen=True)
class SmoothTestFunction:
    """Scalar test function on all of the plane with an analytic gradient."""

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    label: str = ""


def gaussian_bump(center, sigma, amplitude=1.0) -> SmoothTestFunction:
    c = np.asarray(center, dtype=float)
    s2 = float(sigma) ** 2

    def value(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r2 = ((pts - c) ** 2).sum(axis=-1)
        return amplitude * np.exp(-r2 / (2 * s2))

    def grad(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - c
        r2 = (d * d).sum(axis=-1)
        return -amplitude * np.exp(-r2 / (2 * s2))[..., None] * d / s2

    return SmoothTestFunction(value, grad, label=f"bump({c[0]:g},{c[1]:g};{sigma:g})")


def default_test_battery(domain: Domain):
    """Ten Gaussian bumps spread over the domain's bounding box."""
    lo = domain.origin
    hi = domain.origin + np.array([domain.nx, domain.ny]) * domain.h
    span = hi - lo
    rel = [
        (0.3, 0.3), (0.5, 0.3), (0.7, 0.3),
        (0.3, 0.5), (0.5, 0.5), (0.7, 0.5),
        (0.3, 0.7), (0.5, 0.7), (0.7, 0.7),
        (0.45, 0.62),
    ]
    sigma = 0.18 * float(min(span))
    return [gaussian_bump(lo + np.array(r) * span, sigma) for r in rel]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def make_mollifier(domain: Domain, k: int) -> Mollifier:
    """Normalized discrete bump exp(-1/(1-|x|^2)) truncated at radius 1/k."""
    if k <= 0:
        raise KernelTooSmall("k must be a positive integer")
    radius = 1.0 / k
    h = domain.h
    if radius < h - 1e-12:
        raise KernelTooSmall(f"kernel radius 1/k={radius:g} smaller than h={h:g}")
    r_cells = int(math.floor(radius / h + 1e-12))
    d = np.arange(-r_cells, r_cells + 1)
    ox, oy = np.meshgrid(d, d, indexing="ij")
    rho = np.sqrt((ox.astype(float) ** 2 + oy ** 2)) * h * k
    w = np.zeros_like(rho)
    core = rho < 1.0 - 1e-12
    w[core] = np.exp(-1.0 / (1.0 - rho[core] ** 2))
    keep = w > 0
    offsets = np.stack([ox[keep], oy[keep]], axis=1).astype(np.int64)
    weights = w[keep]
    weights = weights / weights.sum()
    return Mollifier(k=int(k), offsets=offsets, weights=weights)


def mollify(g: GridVectorField, m: Mollifier) -> GridVectorField:
    """Kernel-weighted average of g, supported where the kernel stays inside."""
    if not g.support.all():
        raise FieldDomainMismatch("mollify requires a field defined on all interior cells")
    dom = g.domain
    region = erode_depth(dom, m.radius + dom.h / 2.0)  # EmptyErosion if nothing survives
    out = np.zeros_like(g.values)
    kern = m.kernel2d
    for comp in range(2):
        full = ndimage.convolve(g._grid[..., comp], kern, mode="constant", cval=0.0)
        out[:, comp] = full[dom.cells_ij[:, 0], dom.cells_ij[:, 1]]
    out[~region.mask] = 0.0
    return GridVectorField(dom, out, support=region.mask, support_region=region)


def gradient(f: GridScalarField) -> GridVectorField:
    """Finite-difference gradient: central where both axis neighbors are in the
    field's support, one-sided otherwise; supported on cells with at least one
    neighbor per axis."""
    dom = f.domain
    h = dom.h
    vals = f.values
    sup = f.support
    out = np.zeros((dom.n_cells, 2))
    out_sup = sup.copy()
    for axis, (po, mo) in enumerate((((1, 0), (-1, 0)), ((0, 1), (0, -1)))):
        fwd = dom.axis_neighbors[po]
        bwd = dom.axis_neighbors[mo]
        has_f = (fwd >= 0) & sup[np.where(fwd >= 0, fwd, 0)] & sup
        has_b = (bwd >= 0) & sup[np.where(bwd >= 0, bwd, 0)] & sup
        central = has_f & has_b
        fonly = has_f & ~has_b
        bonly = has_b & ~has_f
        fi = np.where(fwd >= 0, fwd, 0)
        bi = np.where(bwd >= 0, bwd, 0)
        out[central, axis] = (vals[fi[central]] - vals[bi[central]]) / (2 * h)
        out[fonly, axis] = (vals[fi[fonly]] - vals[fonly]) / h
        out[bonly, axis] = (vals[bonly] - vals[bi[bonly]]) / h
        out_sup &= has_f | has_b
    if not out_sup.any():
        raise IsolatedCell("no cell has the neighbors needed for a gradient")
    out[~out_sup] = 0.0
    return GridVectorField(dom, out, support=out_sup)


def gradient_of_interpolant(f: GridScalarField) -> AnalyticField:
    """Exact gradient of the bilinear interpolant of f (valid inside patches
    whose four corners are supported). This field is conservative cellwise:
    its loop integrals vanish identically."""
    dom = f.domain

    def locate(pts):
        u = (pts - dom.origin) / dom.h - 0.5
        i0 = np.floor(u).astype(np.int64)
        fr = u - i0
        return i0, fr

    def corners_ok(i0):
        ok = np.ones(i0.shape[:-1], dtype=bool)
        for dx, dy in ((0, 0), (1, 0), (0, 1), (1, 1)):
            ix, iy = i0[..., 0] + dx, i0[..., 1] + dy
            inb = (ix >= 0) & (ix < dom.nx) & (iy >= 0) & (iy < dom.ny)
            ok &= inb
            ixc, iyc = np.where(inb, ix, 0), np.where(inb, iy, 0)
            ok &= f._grid_support[ixc, iyc]
        return ok

    def evaluator(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        i0, fr = locate(pts)
        i0x = np.clip(i0[..., 0], 0, dom.nx - 2)
        i0y = np.clip(i0[..., 1], 0, dom.ny - 2)
        v00 = f._grid[i0x, i0y]
        v10 = f._grid[i0x + 1, i0y]
        v01 = f._grid[i0x, i0y + 1]
        v11 = f._grid[i0x + 1, i0y + 1]
        fx, fy = fr[..., 0], fr[..., 1]
        gx = ((v10 - v00) * (1 - fy) + (v11 - v01) * fy) / dom.h
        gy = ((v01 - v00) * (1 - fx) + (v11 - v10) * fx) / dom.h
        return np.stack([gx, gy], axis=-1)

    def validity(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        i0, _ = locate(pts)
        return corners_ok(i0)

    return AnalyticField(evaluator, validity)


def line_integral(g, path: PLPath, step: float) -> float:
    """Composite midpoint quadrature of the tangential integral of g along the
    path, segment by segment (exactly additive under concatenation)."""
    segs = path.segments()
    if len(segs) == 0:
        return 0.0
    total = 0.0
    for a, b in segs:
        d = b - a
        seg_len = float(np.hypot(*d))
        if seg_len == 0.0:
            continue
        m = max(1, int(np.ceil(seg_len / step)))
        ts = (np.arange(m) + 0.5) / m
        pts = a[None, :] + ts[:, None] * d[None, :]
        vals, ok = g.interpolate(pts)
        if not ok.all():
            raise PathLeavesSupport("quadrature sample outside field support")
        total += float((vals @ d).sum()) / m
    return total


def jacobian_symmetry_defect(g: GridVectorField, m: Mollifier) -> float:
    """max |d1(g2*u_k) - d2(g1*u_k)| by central differences on the mollified
    support (cells with both neighbors per axis in that support)."""
    gm = mollify(g, m)
    dom = g.domain
    sup = gm.support
    xp, xm = dom.axis_neighbors[(1, 0)], dom.axis_neighbors[(-1, 0)]
    yp, ym = dom.axis_neighbors[(0, 1)], dom.axis_neighbors[(0, -1)]

    def both(fwd, bwd):
        return ((fwd >= 0) & sup[np.where(fwd >= 0, fwd, 0)]
                & (bwd >= 0) & sup[np.where(bwd >= 0, bwd, 0)])

    cells = sup & both(xp, xm) & both(yp, ym)
    if not cells.any():
        raise EmptyErosion("no cell admits central differences on the mollified support")
    h = dom.h
    d1g2 = (gm.values[xp[cells], 1] - gm.values[xm[cells], 1]) / (2 * h)
    d2g1 = (gm.values[yp[cells], 0] - gm.values[ym[cells], 0]) / (2 * h)
    return float(np.abs(d1g2 - d2g1).max())


def tol_conservative(h, ell_max, g_sup):
    """Default conservativity tolerance: 10 * h * max loop length * ||g||_inf."""
    return 10.0 * h * ell_max * g_sup


def _face_loop_integrals(field: GridVectorField, faces):
    """Loop integral of the bilinear interpolant around grid faces
    [c00,c10,c11,c01]; trapezoid per edge is exact for the interpolant."""
    v = field.values
    h = field.domain.h
    c00, c10, c11, c01 = faces.T
    return (h / 2.0) * (
        (v[c00, 0] + v[c10, 0]) - (v[c01, 0] + v[c11, 0])
        + (v[c10, 1] + v[c11, 1]) - (v[c00, 1] + v[c01, 1])
    )


def _hole_cycle(domain: Domain, support, hole):
    """A graph cycle in `support` encircling the hole, or None."""
    hull = np.asarray(hole, dtype=float)
    c = hull.mean(axis=0)
    centers = domain.centers
    band = support & (np.abs(centers[:, 1] - c[1]) <= domain.h)
    left = band & (centers[:, 0] < c[0])
    right = band & (centers[:, 0] > c[0])
    if not left.any() or not right.any():
        return None
    a = int(np.flatnonzero(left)[np.argmax(centers[left, 0])])   # closest on the left
    b = int(np.flatnonzero(right)[np.argmin(centers[right, 0])])  # closest on the right
    halves = []
    for upper in (True, False):
        if upper:
            half = support & (centers[:, 1] > c[1] - domain.h)
        else:
            half = support & (centers[:, 1] < c[1] + domain.h)
        csr = domain.subgraph_csr(half)
        dist, pred = dijkstra(csr, directed=False, indices=a, return_predecessors=True)
        if not np.isfinite(dist[b]):
            return None
        chain = [b]
        while chain[-1] != a:
            chain.append(int(pred[chain[-1]]))
        chain.reverse()
        halves.append(chain)
    cycle = halves[0] + halves[1][::-1][1:-1]
    return PLPath(domain.centers[np.asarray(cycle)], closed=True)


@dataclass
class ConservativityReport:
    max_loop_integral: float
    worst_loop: Optional[PLPath]
    tol: float
    conservative: bool
    raw_max_loop_integral: float
    n_loops: int
    k: int
    hole_cycles_found: int = 0


def conservativity_check(g: GridVectorField, k: int, loops="auto",
                         tol: Optional[float] = None) -> ConservativityReport:
    """Max |loop integral| of the mollified field over the loop family.

    Auto mode uses every grid-face 4-cycle inside the mollified support plus
    one cycle around each hole. Raw-field loop integrals are reported too but
    carry no verdict (conservativity is defined through mollification).
    """
    dom = g.domain
    m = make_mollifier(dom, k)
    gm = mollify(g, m)
    sup = gm.support
    h = dom.h

    best = 0.0
    best_raw = 0.0
    worst = None
    ell_max = 0.0
    n_loops = 0
    holes_found = 0

    if loops == "auto":
        faces = dom.faces
        faces = faces[sup[faces].all(axis=1)]
        if len(faces):
            vals = _face_loop_integrals(gm, faces)
            raw_vals = _face_loop_integrals(g, faces)
            n_loops += len(faces)
            ell_max = max(ell_max, 4 * h)
            i = int(np.argmax(np.abs(vals)))
            best = float(np.abs(vals[i]))
            best_raw = float(np.abs(raw_vals).max())
            f = faces[i]
            worst = PLPath(dom.centers[np.array([f[0], f[1], f[2], f[3]])], closed=True)
        loop_list = []
        for hole in dom.spec.holes:
            cyc = _hole_cycle(dom, sup, hole)
            if cyc is not None:
                holes_found += 1
                loop_list.append(cyc)
    else:
        loop_list = list(loops)
        for lp in loop_list:
            if not lp.closed:
                raise LoopOutsideRegion("conservativity loops must be closed")

    for lp in loop_list:
        try:
            val = abs(line_integral(gm, lp, step=h / 2.0))
            raw = abs(line_integral(g, lp, step=h / 2.0))
        except PathLeavesSupport as exc:
            raise LoopOutsideRegion(str(exc)) from exc
        n_loops += 1
        ell_max = max(ell_max, path_length(lp, dom.norm_id))
        best_raw = max(best_raw, raw)
        if val > best:
            best = val
            worst = lp

    if tol is None:
        tol = tol_conservative(h, ell_max if ell_max > 0 else 4 * h, g.sup_dual_norm())
    return ConservativityReport(
        max_loop_integral=best,
        worst_loop=worst,
        tol=float(tol),
        conservative=bool(best <= tol),
        raw_max_loop_integral=best_raw,
        n_loops=n_loops,
        k=int(k),
        hole_cycles_found=holes_found,
    )


def weak_divergence_pairing(hfield: GridVectorField, testfn: SmoothTestFunction) -> float:
    """Discrete <h, grad(phi)> = <-div h, phi> with zero extension outside the
    domain: the sum runs over interior cells only."""
    dom = hfield.domain
    pts = dom.centers[hfield.support]
    grads = testfn.gradient(pts)
    return float((hfield.values[hfield.support] * grads).sum() * dom.h ** 2)


def vortex_field(center=(0.0, 0.0), min_radius=0.5) -> AnalyticField:
    """g(p) = (-(p-c)_2, (p-c)_1)/|p-c|^2, valid at distance >= min_radius."""
    c = np.asarray(center, dtype=float)
    if min_radius <= 0:
        raise ValueError("min_radius must be positive")

    def evaluator(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - c
        r2 = (d * d).sum(axis=-1)
        return np.stack([-d[..., 1], d[..., 0]], axis=-1) / r2[..., None]

    def validity(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - c
        return np.sqrt((d * d).sum(axis=-1)) >= min_radius

    return AnalyticField(evaluator, validity)


def sample_vector_field(domain: Domain, analytic: AnalyticField) -> GridVectorField:
    """Sample a closed-form field at all interior cell centers."""
    vals, ok = analytic.interpolate(domain.centers)
    if not ok.all():
        raise FieldDomainMismatch("analytic field invalid at some interior cells")
    return GridVectorField(domain, vals)


def sample_scalar_field(domain: Domain, fn) -> GridScalarField:
    return GridScalarField(domain, np.asarray(fn(domain.centers), dtype=float))


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

def dump_field_csv(field, path):
    """(i, j, cx, cy, v) rows for scalars, (i, j, cx, cy, vx, vy) for vectors,
    over supported cells; repr() floats so reloads are bit-exact."""
    dom = field.domain
    vec = field.values.ndim == 2
    header = "i,j,cx,cy,vx,vy" if vec else "i,j,cx,cy,v"
    with open(path, "w") as f:
        f.write(header + "\n")
        for idx in np.flatnonzero(field.support):
            i, j = dom.cells_ij[idx]
            cx, cy = dom.centers[idx]
            if vec:
                vx, vy = field.values[idx]
                f.write(f"{i},{j},{cx!r},{cy!r},{vx!r},{vy!r}\n")
            else:
                f.write(f"{i},{j},{cx!r},{cy!r},{field.values[idx]!r}\n")


def load_field_csv(domain: Domain, path):
    """Load a field dump, validating every row against the domain mask."""
    with open(path) as f:
        header = f.readline().strip().split(",")
        vec = len(header) == 6
        n_val = 2 if vec else 1
        values = np.zeros((domain.n_cells, 2) if vec else domain.n_cells)
        support = np.zeros(domain.n_cells, dtype=bool)
        for line in f:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < domain.nx and 0 <= j < domain.ny) or domain.cell_index[i, j] < 0:
                raise FieldDomainMismatch(f"cell ({i},{j}) is not interior in this domain")
            idx = domain.cell_index[i, j]
            support[idx] = True
            vals = [float(p) for p in parts[4:4 + n_val]]
            values[idx] = vals if vec else vals[0]
    if vec:
        return GridVectorField(domain, values, support=support)
    return GridScalarField(domain, values, support=support)
