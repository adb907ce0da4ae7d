"""Rasterized polygonal domains with obstacles and their intrinsic metric.

A domain is a polygon with polygonal holes and optional zero-width slits,
rasterized onto a square grid of spacing h. Interior cells are those whose
center lies in the open region with Euclidean clearance > h/2 from every
polygon edge. Cells become nodes of a weighted graph (offsets of Chebyshev
radius <= K with coprime components, weight = norm of the center difference);
graph shortest paths realize the intrinsic distance. Slits do not remove
cells; they sever every graph edge whose segment crosses them, and they count
toward the boundary distance used for erosions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .errors import (
    DegenerateSpec,
    DisconnectedInterior,
    EmptyErosion,
    PointOutsideDomain,
    ZeroLengthPath,
)

NORM_IDS = ("l1", "l2")

_GRIDLINE_EPS = 1e-9


def vector_norm(v, norm_id):
    """Norm of 2-vectors along the last axis. norm_id in {l1, l2, linf}."""
    v = np.asarray(v, dtype=float)
    if norm_id == "l1":
        return np.abs(v).sum(axis=-1)
    if norm_id == "l2":
        return np.sqrt((v * v).sum(axis=-1))
    if norm_id == "linf":
        return np.abs(v).max(axis=-1)
    raise ValueError(f"unknown norm {norm_id!r}")


def dual_norm_id(norm_id):
    """Name of the dual norm (pairing <g, v> with |g.v| <= ||g||_* ||v||)."""
    return {"l1": "linf", "l2": "l2", "linf": "l1"}[norm_id]


# ---------------------------------------------------------------------------
# planar geometry helpers
# ---------------------------------------------------------------------------

def points_in_polygon(points, poly):
    """Crossing-number test, vectorized over points. Boundary points unreliable
    (they are excluded later by the clearance rule anyway)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    poly = np.asarray(poly, dtype=float)
    x1, y1 = poly[-1]
    for x2, y2 in poly:
        cond = (y1 > y) != (y2 > y)
        if np.any(cond):
            xc = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            inside ^= cond & (x < xc)
        x1, y1 = x2, y2
    return inside


def dist_to_segments(points, segs):
    """Min Euclidean distance from each point to a list of segments (S,2,2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    best = np.full(len(pts), np.inf)
    for a, b in segs:
        ab = b - a
        denom = float(ab @ ab)
        if denom < 1e-30:
            d = np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
        else:
            t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
            proj = a + t[:, None] * ab
            d = np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1])
        best = np.minimum(best, d)
    return best


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (
        b[..., 1] - a[..., 1]
    ) * (c[..., 0] - a[..., 0])


def _on_segment(a, b, p, eps=1e-12):
    """p collinear-ish with [a,b]: does it sit within the bounding box?"""
    lo = np.minimum(a, b) - eps
    hi = np.maximum(a, b) + eps
    return np.all((p >= lo) & (p <= hi), axis=-1)


def segments_cross(p1, p2, q1, q2):
    """True where segment [p1,p2] intersects segment [q1,q2] (touching counts).

    p1, p2 may be (N,2) arrays; q1, q2 is a single segment.
    """
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    p2 = np.atleast_2d(np.asarray(p2, dtype=float))
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1[None, :])
    d4 = _orient(p1, p2, q2[None, :])
    proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
        ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
    )
    touch = (
        ((d1 == 0) & _on_segment(q1, q2, p1))
        | ((d2 == 0) & _on_segment(q1, q2, p2))
        | ((d3 == 0) & _on_segment(p1, p2, q1[None, :]))
        | ((d4 == 0) & _on_segment(p1, p2, q2[None, :]))
    )
    return proper | touch


def _polygon_area(poly):
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def _polygon_segments(poly):
    p = np.asarray(poly, dtype=float)
    return np.stack([p, np.roll(p, -1, axis=0)], axis=1)


# ---------------------------------------------------------------------------
# spec / domain / region / path types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """Polygonal region with holes and slits plus rasterization parameters."""

    outer: tuple
    holes: tuple = ()
    slits: tuple = ()
    norm_id: str = "l2"
    h: float = 1.0 / 64
    neighborhood_order: int | None = None  # default: 1 for l1, 2 for l2
    basepoint: tuple | None = None

    @property
    def K(self) -> int:
        if self.neighborhood_order is not None:
            return int(self.neighborhood_order)
        return 1 if self.norm_id == "l1" else 2

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            outer=tuple(tuple(p) for p in d["outer"]),
            holes=tuple(tuple(tuple(p) for p in hole) for hole in d.get("holes", [])),
            slits=tuple(tuple(tuple(p) for p in s) for s in d.get("slits", [])),
            norm_id=d.get("norm", "l2"),
            h=float(d["h"]),
            neighborhood_order=d.get("K"),
            basepoint=tuple(d["basepoint"]) if d.get("basepoint") else None,
        )

    def to_json_dict(self):
        return {
            "outer": [list(p) for p in self.outer],
            "holes": [[list(p) for p in hole] for hole in self.holes],
            "slits": [[list(p) for p in s] for s in self.slits],
            "norm": self.norm_id,
            "h": self.h,
            "K": self.K,
            "basepoint": list(self.basepoint) if self.basepoint else None,
        }


@dataclass(frozen=True)
class Region:
    """Subset of a domain's interior cells surviving an erosion depth 1/k."""

    parent: "Domain"
    mask: np.ndarray  # (N,) bool over interior cells
    k: float  # erosion depth is 1/k; float so depths like 1/k + h/2 are exact

    @property
    def depth(self) -> float:
        return 1.0 / self.k

    @property
    def size(self) -> int:
        return int(self.mask.sum())


@dataclass
class PLPath:
    """Piecewise-linear path given by its vertex list."""

    vertices: np.ndarray  # (V,2)
    closed: bool = False

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))

    def segments(self):
        """(S,2,2) array of segments, including the closing one if closed."""
        v = self.vertices
        if len(v) < 2:
            return np.zeros((0, 2, 2))
        segs = np.stack([v[:-1], v[1:]], axis=1)
        if self.closed and not np.allclose(v[0], v[-1]):
            segs = np.concatenate([segs, np.stack([v[-1:], v[:1]], axis=1)], axis=0)
        return segs


def _neighbor_offsets(K):
    """Offsets of Chebyshev radius <= K with coprime components, one per
    unordered pair (dx > 0, or dx == 0 and dy > 0)."""
    offs = []
    for dx in range(0, K + 1):
        for dy in range(-K, K + 1):
            if dx == 0 and dy <= 0:
                continue
            if dx == 0 or dy == 0:
                if max(dx, abs(dy)) != 1:
                    continue
            elif math.gcd(dx, abs(dy)) != 1:
                continue
            offs.append((dx, dy))
    return offs


class Domain:
    """Immutable rasterized domain: cells, boundary distances and grid graph.

    Safe for concurrent reads; distance queries run per-call scratch state.
    """

    def __init__(self, spec, origin, shape, mask, dist_cells, basepoint_cell,
                 edges_u, edges_v, edges_w, edges_off):
        self.spec = spec
        self.origin = np.asarray(origin, dtype=float)
        self.nx, self.ny = shape
        self.mask = mask  # (nx,ny) bool
        self.cell_index = np.full((self.nx, self.ny), -1, dtype=np.int64)
        ii, jj = np.nonzero(mask)
        self.cell_index[ii, jj] = np.arange(len(ii))
        self.cells_ij = np.stack([ii, jj], axis=1)
        self.centers = self.origin + (self.cells_ij + 0.5) * spec.h
        self.dist_to_boundary = dist_cells  # (N,)
        self.basepoint = int(basepoint_cell)
        self.edges_u = edges_u
        self.edges_v = edges_v
        self.edges_w = edges_w
        self.edges_off = edges_off

    # -- basic properties --------------------------------------------------
    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def norm_id(self) -> str:
        return self.spec.norm_id

    @property
    def n_cells(self) -> int:
        return len(self.centers)

    @property
    def n_edges(self) -> int:
        return len(self.edges_u)

    @cached_property
    def csr(self):
        u = np.concatenate([self.edges_u, self.edges_v])
        v = np.concatenate([self.edges_v, self.edges_u])
        w = np.concatenate([self.edges_w, self.edges_w])
        return sp.csr_matrix((w, (u, v)), shape=(self.n_cells, self.n_cells))

    @cached_property
    def _kdtree(self):
        return cKDTree(self.centers)

    @cached_property
    def _boundary_segments(self):
        segs = [_polygon_segments(self.spec.outer)]
        for hole in self.spec.holes:
            segs.append(_polygon_segments(hole))
        out = np.concatenate(segs, axis=0)
        return out

    @cached_property
    def _slit_segments(self):
        if not self.spec.slits:
            return np.zeros((0, 2, 2))
        return np.asarray([[s[0], s[1]] for s in self.spec.slits], dtype=float)

    @cached_property
    def axis_neighbors(self):
        """Per-cell neighbor index (-1 if absent) for offsets +x, -x, +y, -y,
        honoring severed edges."""
        nbr = {off: np.full(self.n_cells, -1, dtype=np.int64)
               for off in ((1, 0), (-1, 0), (0, 1), (0, -1))}
        for off in ((1, 0), (0, 1)):
            sel = (self.edges_off == off).all(axis=1)
            u, v = self.edges_u[sel], self.edges_v[sel]
            nbr[off][u] = v
            nbr[(-off[0], -off[1])][v] = u
        return nbr

    @cached_property
    def faces(self):
        """Grid-face 4-cycles (F,4) as cell ids [c00, c10, c11, c01], kept only
        when all four border edges exist in the graph."""
        xp = self.axis_neighbors[(1, 0)]
        yp = self.axis_neighbors[(0, 1)]
        c00 = np.arange(self.n_cells)
        c10 = xp[c00]
        c01 = yp[c00]
        ok = (c10 >= 0) & (c01 >= 0)
        c11a = np.where(ok, yp[np.where(c10 >= 0, c10, 0)], -1)
        c11b = np.where(ok, xp[np.where(c01 >= 0, c01, 0)], -1)
        ok &= (c11a >= 0) & (c11a == c11b)
        return np.stack([c00[ok], c10[ok], c11a[ok], c01[ok]], axis=1)

    # -- geometry queries ---------------------------------------------------
    def boundary_clearance(self, points):
        """Euclidean distance from arbitrary points to the complement of the
        region (0 outside the outer polygon or inside a hole); slits count."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = dist_to_segments(pts, self._boundary_segments)
        if len(self._slit_segments):
            d = np.minimum(d, dist_to_segments(pts, self._slit_segments))
        inside = points_in_polygon(pts, np.asarray(self.spec.outer, dtype=float))
        for hole in self.spec.holes:
            inside &= ~points_in_polygon(pts, np.asarray(hole, dtype=float))
        return np.where(inside, d, 0.0)

    def snap(self, point):
        """Index of the nearest interior cell; reject if farther than h."""
        p = np.asarray(point, dtype=float)
        d, idx = self._kdtree.query(p)
        if d > self.h + 1e-12:
            raise PointOutsideDomain(
                f"point {tuple(p)} is {d:.4g} from the nearest interior cell (> h={self.h:g})"
            )
        return int(idx)

    def in_interior_union(self, points):
        """True where a point lies in the union of closed interior cells.
        Points on cell borders are accepted if any adjacent cell is interior."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        u = (pts - self.origin) / self.h
        iu = np.floor(u).astype(np.int64)
        frac = u - iu
        ok = np.zeros(len(pts), dtype=bool)
        lo = frac < _GRIDLINE_EPS
        hi = frac > 1.0 - _GRIDLINE_EPS
        for dx, condx in ((0, None), (-1, lo[:, 0]), (1, hi[:, 0])):
            for dy, condy in ((0, None), (-1, lo[:, 1]), (1, hi[:, 1])):
                cond = np.ones(len(pts), dtype=bool)
                if condx is not None:
                    cond &= condx
                if condy is not None:
                    cond &= condy
                if not np.any(cond):
                    continue
                ix = iu[:, 0] + dx
                iy = iu[:, 1] + dy
                inb = (ix >= 0) & (ix < self.nx) & (iy >= 0) & (iy < self.ny)
                sub = cond & inb
                ok[sub] |= self.mask[ix[sub], iy[sub]]
        return ok

    def validate_path(self, path, step=None):
        """Supersampled in-domain check: every segment stays in the union of
        interior cells and crosses no slit. Step defaults to h/4."""
        if step is None:
            step = self.h / 4.0
        segs = path.segments()
        if len(segs) == 0:
            return bool(self.in_interior_union(path.vertices).all())
        for a, b in segs:
            n = max(2, int(np.ceil(np.linalg.norm(b - a) / step)) + 1)
            ts = np.linspace(0.0, 1.0, n)
            pts = a[None, :] + ts[:, None] * (b - a)[None, :]
            if not self.in_interior_union(pts).all():
                return False
            for s in self._slit_segments:
                if segments_cross(a[None, :], b[None, :], s[0], s[1])[0]:
                    return False
        return True

    def subgraph_csr(self, cell_mask):
        """CSR over all cells with edges restricted to cell_mask nodes."""
        keep = cell_mask[self.edges_u] & cell_mask[self.edges_v]
        u = np.concatenate([self.edges_u[keep], self.edges_v[keep]])
        v = np.concatenate([self.edges_v[keep], self.edges_u[keep]])
        w = np.concatenate([self.edges_w[keep], self.edges_w[keep]])
        return sp.csr_matrix((w, (u, v)), shape=(self.n_cells, self.n_cells))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def build_domain(spec: DomainSpec) -> Domain:
    """Rasterize the spec: interior cells, boundary distances, grid graph."""
    outer = np.asarray(spec.outer, dtype=float)
    if len(outer) < 3:
        raise DegenerateSpec("outer polygon needs at least 3 vertices")
    if spec.h <= 0:
        raise DegenerateSpec("grid spacing h must be positive")
    area = abs(_polygon_area(outer))
    if area < spec.h * spec.h:
        raise DegenerateSpec(f"outer polygon area {area:g} below one cell")
    if spec.norm_id not in NORM_IDS:
        raise DegenerateSpec(f"norm must be one of {NORM_IDS}")
    if spec.K not in (1, 2, 3):
        raise DegenerateSpec("neighborhood order K must be in {1, 2, 3}")

    h = spec.h
    xmin, ymin = outer.min(axis=0)
    xmax, ymax = outer.max(axis=0)
    nx = int(np.ceil((xmax - xmin) / h - 1e-12))
    ny = int(np.ceil((ymax - ymin) / h - 1e-12))
    if nx < 1 or ny < 1:
        raise DegenerateSpec("h larger than the bounding box")
    origin = np.array([xmin, ymin])

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    centers = origin + (np.stack([ii, jj], axis=-1) + 0.5) * h
    flat = centers.reshape(-1, 2)

    inside = points_in_polygon(flat, outer)
    for hole in spec.holes:
        inside &= ~points_in_polygon(flat, np.asarray(hole, dtype=float))

    poly_segs = [_polygon_segments(outer)]
    for hole in spec.holes:
        poly_segs.append(_polygon_segments(np.asarray(hole, dtype=float)))
    poly_segs = np.concatenate(poly_segs, axis=0)
    d_poly = dist_to_segments(flat, poly_segs)

    # relative guard so centers at clearance exactly h/2 are excluded
    # deterministically rather than by floating-point luck
    interior = inside & (d_poly > (h / 2.0) * (1.0 + 1e-9))
    mask = interior.reshape(nx, ny)
    n_cells = int(mask.sum())
    if n_cells == 0:
        raise DegenerateSpec("no interior cell survives rasterization")

    d_all = d_poly.copy()
    if spec.slits:
        slit_segs = np.asarray([[s[0], s[1]] for s in spec.slits], dtype=float)
        d_all = np.minimum(d_all, dist_to_segments(flat, slit_segs))
    dist_cells = d_all.reshape(nx, ny)[mask]

    cell_index = np.full((nx, ny), -1, dtype=np.int64)
    mi, mj = np.nonzero(mask)
    cell_index[mi, mj] = np.arange(n_cells)
    cell_centers = origin + (np.stack([mi, mj], axis=1) + 0.5) * h

    # edges per offset; offsets beyond Chebyshev radius 1 also need their
    # center-to-center segment to stay inside the union of interior cells
    eu, ev, ew, eo = [], [], [], []
    union_checker = None
    for off in _neighbor_offsets(spec.K):
        dx, dy = off
        a_sl = (slice(0, nx - dx) if dx else slice(None),
                slice(0, ny - dy) if dy > 0 else (slice(-dy, None) if dy < 0 else slice(None)))
        b_sl = (slice(dx, None) if dx else slice(None),
                slice(dy, None) if dy > 0 else (slice(0, ny + dy) if dy < 0 else slice(None)))
        both = mask[a_sl] & mask[b_sl]
        ua = cell_index[a_sl][both]
        vb = cell_index[b_sl][both]
        if len(ua) == 0:
            continue
        if max(abs(dx), abs(dy)) > 1:
            if union_checker is None:
                union_checker = _UnionChecker(origin, h, mask)
            a_pts = cell_centers[ua]
            b_pts = cell_centers[vb]
            ok = union_checker.segments_inside(a_pts, b_pts)
            ua, vb = ua[ok], vb[ok]
            if len(ua) == 0:
                continue
        w = vector_norm(np.array([dx, dy], dtype=float) * h, spec.norm_id)
        eu.append(ua)
        ev.append(vb)
        ew.append(np.full(len(ua), w))
        eo.append(np.tile(np.array(off, dtype=np.int64), (len(ua), 1)))

    edges_u = np.concatenate(eu) if eu else np.zeros(0, dtype=np.int64)
    edges_v = np.concatenate(ev) if ev else np.zeros(0, dtype=np.int64)
    edges_w = np.concatenate(ew) if ew else np.zeros(0)
    edges_off = np.concatenate(eo) if eo else np.zeros((0, 2), dtype=np.int64)

    # sever edges crossing any slit
    if spec.slits and len(edges_u):
        keep = np.ones(len(edges_u), dtype=bool)
        pa = cell_centers[edges_u]
        pb = cell_centers[edges_v]
        for s in spec.slits:
            keep &= ~segments_cross(pa, pb, np.asarray(s[0], float), np.asarray(s[1], float))
        edges_u, edges_v = edges_u[keep], edges_v[keep]
        edges_w, edges_off = edges_w[keep], edges_off[keep]

    adj = sp.csr_matrix(
        (np.ones(2 * len(edges_u)),
         (np.concatenate([edges_u, edges_v]), np.concatenate([edges_v, edges_u]))),
        shape=(n_cells, n_cells),
    )
    n_comp, _ = connected_components(adj, directed=False)
    if n_comp > 1:
        raise DisconnectedInterior(
            f"rasterization yields {n_comp} graph components (h too coarse or region split)"
        )

    dom = Domain(spec, origin, (nx, ny), mask, dist_cells, 0,
                 edges_u, edges_v, edges_w, edges_off)
    if spec.basepoint is not None:
        dom.basepoint = dom.snap(spec.basepoint)
    else:
        centroid = cell_centers.mean(axis=0)
        _, idx = dom._kdtree.query(centroid)
        dom.basepoint = int(idx)
    return dom


class _UnionChecker:
    """Vectorized membership of segment supersamples in the interior union."""

    def __init__(self, origin, h, mask):
        self.origin = origin
        self.h = h
        self.mask = mask
        self.nx, self.ny = mask.shape

    def _points_ok(self, pts):
        u = (pts - self.origin) / self.h
        iu = np.floor(u).astype(np.int64)
        frac = u - iu
        ok = np.zeros(pts.shape[:-1], dtype=bool)
        lo = frac < _GRIDLINE_EPS
        hi = frac > 1.0 - _GRIDLINE_EPS
        for dx, cx in ((0, None), (-1, lo[..., 0]), (1, hi[..., 0])):
            for dy, cy in ((0, None), (-1, lo[..., 1]), (1, hi[..., 1])):
                cond = np.ones(pts.shape[:-1], dtype=bool)
                if cx is not None:
                    cond &= cx
                if cy is not None:
                    cond &= cy
                ix = iu[..., 0] + dx
                iy = iu[..., 1] + dy
                inb = (ix >= 0) & (ix < self.nx) & (iy >= 0) & (iy < self.ny)
                sel = cond & inb
                vals = np.zeros_like(ok)
                vals[sel] = self.mask[ix[sel], iy[sel]]
                ok |= vals
        return ok

    def segments_inside(self, a_pts, b_pts):
        length = np.linalg.norm(b_pts - a_pts, axis=1).max()
        n = max(3, int(np.ceil(length / (self.h / 4.0))) + 1)
        ts = np.linspace(0.0, 1.0, n)
        pts = a_pts[:, None, :] + ts[None, :, None] * (b_pts - a_pts)[:, None, :]
        return self._points_ok(pts).all(axis=1)


def erode(domain: Domain, k) -> Region:
    """Cells at boundary distance > 1/k; monotone in k."""
    if k <= 0:
        raise EmptyErosion("erosion parameter k must be positive")
    depth = 1.0 / float(k)
    if depth >= domain.dist_to_boundary.max():
        raise EmptyErosion(
            f"erosion depth 1/k={depth:g} >= max boundary distance "
            f"{domain.dist_to_boundary.max():g}"
        )
    mask = domain.dist_to_boundary > depth
    if not mask.any():
        raise EmptyErosion(f"no cell survives erosion depth {depth:g}")
    return Region(parent=domain, mask=mask, k=float(k))


def erode_depth(domain: Domain, depth: float) -> Region:
    """Erosion by an explicit depth (used by mollification: depth 1/k + h/2)."""
    mask = domain.dist_to_boundary > depth
    if not mask.any():
        raise EmptyErosion(f"no cell survives erosion depth {depth:g}")
    return Region(parent=domain, mask=mask, k=1.0 / depth)


def intrinsic_distance(domain: Domain, x, y):
    """Graph-geodesic distance between snapped points and the realizing path."""
    src = domain.snap(x)
    dst = domain.snap(y)
    if src == dst:
        return 0.0, PLPath(domain.centers[src][None, :])
    dist, pred = dijkstra(domain.csr, directed=False, indices=src,
                          return_predecessors=True)
    d = float(dist[dst])
    if not np.isfinite(d):
        raise PointOutsideDomain("no path between snapped cells")  # unreachable: graph is connected
    chain = [dst]
    while chain[-1] != src:
        chain.append(int(pred[chain[-1]]))
    chain.reverse()
    return d, PLPath(domain.centers[np.asarray(chain)])


def path_length(path: PLPath, norm_id: str) -> float:
    """Total length of the polyline in the given norm; 0 for a single vertex."""
    if len(path.vertices) == 0:
        raise ValueError("empty path")
    segs = path.segments()
    if len(segs) == 0:
        return 0.0
    return float(vector_norm(segs[:, 1, :] - segs[:, 0, :], norm_id).sum())


def constant_speed_samples(path: PLPath, m: int, norm_id: str = "l2"):
    """m samples of the arclength-proportional parametrization on the uniform
    t-grid, each with the local velocity (segment direction at speed ell)."""
    if m < 2:
        raise ValueError("need at least two samples")
    segs = path.segments()
    if len(segs) == 0:
        raise ZeroLengthPath("single-vertex path has no parametrization")
    seg_vec = segs[:, 1, :] - segs[:, 0, :]
    seg_len = vector_norm(seg_vec, norm_id)
    ell = float(seg_len.sum())
    if ell <= 0.0:
        raise ZeroLengthPath("path has zero length")
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    s = np.linspace(0.0, ell, m)
    # segment containing each arclength; ties at breakpoints take the later
    # segment so corner samples carry the outgoing direction
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(segs) - 1)
    local = (s - cum[idx]) / np.where(seg_len[idx] > 0, seg_len[idx], 1.0)
    points = segs[idx, 0, :] + local[:, None] * seg_vec[idx]
    velocity = seg_vec[idx] / np.where(seg_len[idx] > 0, seg_len[idx], 1.0)[:, None] * ell
    return points, velocity


def dump_mask_csv(domain: Domain, path):
    """CSV rows (i, j, cx, cy, interior, dist_to_boundary) over the full grid."""
    h = domain.h
    with open(path, "w") as f:
        f.write("i,j,cx,cy,interior,dist_to_boundary\n")
        for i in range(domain.nx):
            for j in range(domain.ny):
                cx = domain.origin[0] + (i + 0.5) * h
                cy = domain.origin[1] + (j + 0.5) * h
                idx = domain.cell_index[i, j]
                if idx >= 0:
                    f.write(f"{i},{j},{cx!r},{cy!r},1,{domain.dist_to_boundary[idx]!r}\n")
                else:
                    f.write(f"{i},{j},{cx!r},{cy!r},0,\n")
