"""Recover Lipschitz potentials from conservative bounded fields.

A bounded field whose mollification is conservative integrates to a potential
along any path from the basepoint; we integrate along graph shortest paths
(telescoping along the Dijkstra tree, which is exactly the per-segment line
integral of the whole path) and quantify path independence by re-integrating
through random intermediate cells. Local and global Lipschitz norms coincide
exactly on the graph metric; their gap to the dual sup norm of the gradient
is the discretization's isometry defect.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra

from .domain import Domain, dual_norm_id, vector_norm
from .errors import BasepointEroded, NotConservative
from .fields import (
    GridScalarField,
    GridVectorField,
    conservativity_check,
    gradient,
    make_mollifier,
    mollify,
)


@dataclass
class ReconstructionResult:
    potential: GridScalarField
    k_used: int
    per_cell_path_length: np.ndarray  # geodesic distance from basepoint (masked cells: inf)
    residual: float
    conservativity: object = None
    component_restricted: bool = False  # erosion disconnected; kept basepoint's component


def _segment_integrals(field: GridVectorField, a_pts, b_pts, step):
    """Midpoint line integrals of straight segments a->b, vectorized by
    grouping segments of equal quadrature count."""
    d = b_pts - a_pts
    lens = np.hypot(d[:, 0], d[:, 1])
    m = np.maximum(1, np.ceil(lens / step).astype(int))
    out = np.zeros(len(a_pts))
    for mv in np.unique(m):
        sel = m == mv
        ts = (np.arange(mv) + 0.5) / mv
        pts = a_pts[sel, None, :] + ts[None, :, None] * d[sel, None, :]
        vals, ok = field.interpolate(pts.reshape(-1, 2))
        if not ok.all():
            # segments between support cells stay inside the interpolation
            # stencil of the support; reaching here means a support bug
            raise RuntimeError("tree segment left the mollified support")
        vals = vals.reshape(-1, mv, 2)
        out[sel] = (vals * d[sel, None, :]).sum(axis=(1, 2)) / mv
    return out


def reconstruct_potential(g: GridVectorField, k: int, probe_paths: int = 10,
                          seed: int = 0) -> ReconstructionResult:
    """Potential of the mollified field by shortest-path integration from the
    basepoint; raises NotConservative when the conservativity check fails."""
    dom = g.domain
    report = conservativity_check(g, k)
    if not report.conservative:
        raise NotConservative(
            f"max loop integral {report.max_loop_integral:.4g} exceeds tol {report.tol:.4g}"
        )
    m = make_mollifier(dom, k)
    gm = mollify(g, m)
    sup = gm.support
    if not sup[dom.basepoint]:
        raise BasepointEroded(
            f"basepoint at boundary distance {dom.dist_to_boundary[dom.basepoint]:.4g} "
            f"eroded at depth {m.radius + dom.h / 2:.4g}"
        )

    csr = dom.subgraph_csr(sup)
    n_comp, labels = connected_components(csr, directed=False)
    # restrict to the basepoint's component of the eroded region
    comp_mask = sup & (labels == labels[dom.basepoint])
    component_restricted = bool(comp_mask.sum() < sup.sum())
    if component_restricted:
        csr = dom.subgraph_csr(comp_mask)

    dist, pred = dijkstra(csr, directed=False, indices=dom.basepoint,
                          return_predecessors=True)
    reach = np.isfinite(dist) & comp_mask

    # accumulate per-edge integrals along the shortest-path tree in distance
    # order: potential(c) = potential(pred(c)) + integral over the tree edge
    order = np.argsort(dist[reach])
    nodes = np.flatnonzero(reach)[order]
    nodes = nodes[nodes != dom.basepoint]
    pr = pred[nodes]
    edge_int = _segment_integrals(gm, dom.centers[pr], dom.centers[nodes], step=dom.h / 2.0)
    pot = np.zeros(dom.n_cells)
    for node, parent, val in zip(nodes, pr, edge_int):
        pot[node] = pot[parent] + val

    # path-independence probes: integrate x0 -> w -> c along a second route
    rng = np.random.default_rng(seed)
    residual = 0.0
    cells = np.flatnonzero(reach)
    if probe_paths > 0 and len(cells) > 2:
        for _ in range(int(probe_paths)):
            w = int(rng.choice(cells))
            c = int(rng.choice(cells))
            if w == c or w == dom.basepoint:
                continue
            dist_w, pred_w = dijkstra(csr, directed=False, indices=w,
                                      return_predecessors=True)
            if not np.isfinite(dist_w[c]):
                continue
            chain = [c]
            while chain[-1] != w:
                chain.append(int(pred_w[chain[-1]]))
            chain.reverse()
            a = dom.centers[np.asarray(chain[:-1])]
            b = dom.centers[np.asarray(chain[1:])]
            via = pot[w] + _segment_integrals(gm, a, b, step=dom.h / 2.0).sum()
            residual = max(residual, abs(via - pot[c]))

    field = GridScalarField(dom, pot, support=reach)
    return ReconstructionResult(
        potential=field,
        k_used=int(k),
        per_cell_path_length=np.where(reach, dist, np.inf),
        residual=float(residual),
        conservativity=report,
        component_restricted=component_restricted,
    )


def lipschitz_norm_local(f: GridScalarField) -> float:
    """max over graph edges of |f(u)-f(v)| / weight(u,v), over supported cells."""
    dom = f.domain
    u, v, w = dom.edges_u, dom.edges_v, dom.edges_w
    keep = f.support[u] & f.support[v]
    if not keep.any():
        return 0.0
    diffs = np.abs(f.values[u[keep]] - f.values[v[keep]])
    return float((diffs / w[keep]).max())


def lipschitz_norm_global(f: GridScalarField, sample_pairs="all", seed: int = 0) -> float:
    """sup over cell pairs of |f(u)-f(v)| / d_graph(u,v); 'all' enumerates every
    pair (multi-source Dijkstra), an integer samples that many random pairs."""
    dom = f.domain
    cells = np.flatnonzero(f.support)
    if len(cells) < 2:
        return 0.0
    sub = dom.subgraph_csr(f.support)
    if sample_pairs == "all":
        sources = cells
    else:
        rng = np.random.default_rng(seed)
        n = min(int(sample_pairs), len(cells) * (len(cells) - 1) // 2)
        sources = np.unique(rng.choice(cells, size=max(2, int(np.sqrt(n)) + 1), replace=True))
    dmat = dijkstra(sub, directed=False, indices=sources)
    dmat = dmat[:, cells]
    fd = np.abs(f.values[sources][:, None] - f.values[cells][None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where((dmat > 0) & np.isfinite(dmat), fd / dmat, 0.0)
    return float(ratios.max())


def grad_sup_dual(f: GridScalarField) -> float:
    """Sup over cells of the dual norm of the finite-difference gradient."""
    gf = gradient(f)
    return float(vector_norm(gf.values[gf.support],
                             dual_norm_id(f.domain.norm_id)).max())


def isometry_defect(f: GridScalarField) -> float:
    """|lipschitz_norm_local(f) - ||grad f||_{inf,dual}|; O(h) on smooth f."""
    return abs(lipschitz_norm_local(f) - grad_sup_dual(f))
