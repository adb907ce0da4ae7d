"""Free-space norms of zero-sum molecules as minimal flows and as transport.

The Beckmann route minimizes total |flow| * cost over the domain's grid graph
subject to a prescribed divergence; the Kantorovich route solves the bipartite
transportation problem between positive and negative atoms with geodesic
costs. On a fixed graph the two optima coincide exactly (flow decomposition),
which is the discrete form of the isometry between the free space and the
L1 quotient. Both are solved by successive shortest paths with node
potentials; masses are rounded to multiples of 1/mass_scale so the
combinatorial optimum is exact for the rounded instance, and the final
potentials are a dual certificate (zero gap, 1-Lipschitz).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import bellman_ford, dijkstra

from .domain import Domain
from .errors import (
    Disconnected,
    FieldDomainMismatch,
    NonSummable,
    SolutionMismatch,
    Unbalanced,
)

DEFAULT_MASS_SCALE = 10_000

_BALANCE_TOL = 1e-12


# ---------------------------------------------------------------------------
# molecules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Molecule:
    """Finitely supported zero-sum masses on interior cells, canonicalized
    (duplicates merged, zero masses dropped, sorted by cell)."""

    atoms: tuple  # ((cell, mass), ...)
    basepoint_relative: bool = False

    @classmethod
    def from_cell_masses(cls, cells, masses, basepoint_relative=False):
        acc = {}
        for c, m in zip(cells, masses):
            acc[int(c)] = acc.get(int(c), 0.0) + float(m)
        atoms = tuple((c, m) for c, m in sorted(acc.items()) if m != 0.0)
        total = sum(m for _, m in atoms)
        total_abs = sum(abs(m) for _, m in atoms)
        if abs(total) > _BALANCE_TOL + _BALANCE_TOL * total_abs:
            raise Unbalanced(f"molecule masses sum to {total:g}, not 0")
        return cls(atoms=atoms, basepoint_relative=basepoint_relative)

    @classmethod
    def from_points(cls, domain: Domain, point_masses, basepoint_relative=False):
        """Snap (point, mass) pairs to interior cells; if basepoint_relative,
        balance with an implicit atom at the basepoint."""
        cells = [domain.snap(p) for p, _ in point_masses]
        masses = [float(m) for _, m in point_masses]
        if basepoint_relative:
            cells.append(domain.basepoint)
            masses.append(-sum(masses))
        return cls.from_cell_masses(cells, masses, basepoint_relative=basepoint_relative)

    def scaled(self, t: float) -> "Molecule":
        if t == 0.0:
            return Molecule(atoms=())
        return Molecule(atoms=tuple((c, t * m) for c, m in self.atoms),
                        basepoint_relative=self.basepoint_relative)

    @property
    def cells(self):
        return np.array([c for c, _ in self.atoms], dtype=np.int64)

    @property
    def masses(self):
        return np.array([m for _, m in self.atoms])

    def __len__(self):
        return len(self.atoms)


def round_masses(masses, mass_scale):
    """Round to multiples of 1/mass_scale; the residual goes to the largest
    atom so the rounded masses balance exactly."""
    s = np.rint(np.asarray(masses) * mass_scale).astype(np.int64)
    resid = int(s.sum())
    if resid != 0 and len(s):
        s[int(np.argmax(np.abs(s)))] -= resid
    return s


# ---------------------------------------------------------------------------
# networks and solutions
# ---------------------------------------------------------------------------

@dataclass
class FlowNetwork:
    """Directed arcs with nonnegative costs and balanced node supplies."""

    n_nodes: int
    tails: np.ndarray
    heads: np.ndarray
    costs: np.ndarray
    supplies: np.ndarray
    node_cells: np.ndarray  # grid cell id per node (for dumps/duality)
    kind: str               # "grid" | "bipartite"
    domain: Optional[Domain] = None

    def __post_init__(self):
        if (self.costs < 0).any():
            raise ValueError("arc costs must be nonnegative")
        total = float(self.supplies.sum())
        if abs(total) > 1e-9 * max(1.0, np.abs(self.supplies).sum()):
            raise Unbalanced(f"network supplies sum to {total:g}")


@dataclass
class FlowSolution:
    """Arc flows, optimal cost and dual potentials for a rounded instance."""

    network: FlowNetwork
    arc_flows: np.ndarray       # per input arc, >= 0, original mass units
    total_cost: float
    node_potentials: np.ndarray
    supplies_rounded: np.ndarray  # per node, original mass units
    mass_scale: int

    def validate(self, tol=1e-9):
        """Conservation, complementary slackness and dual 1-Lipschitz checks;
        returns the worst violation of each."""
        net = self.network
        div = np.zeros(net.n_nodes)
        np.add.at(div, net.tails, self.arc_flows)
        np.add.at(div, net.heads, -self.arc_flows)
        conservation = float(np.abs(div - self.supplies_rounded).max()) if net.n_nodes else 0.0
        pi = self.node_potentials
        reduced = net.costs + pi[net.tails] - pi[net.heads]
        feasibility = float(max(0.0, -(reduced.min()))) if len(reduced) else 0.0
        carrying = self.arc_flows > 0
        slackness = float(np.abs(reduced[carrying]).max()) if carrying.any() else 0.0
        ok = conservation <= tol and feasibility <= tol and slackness <= tol
        return {"conservation": conservation, "dual_feasibility": feasibility,
                "slackness": slackness, "ok": ok}


def grid_network(domain: Domain, mu: Molecule) -> FlowNetwork:
    """Each undirected grid edge as two opposite arcs of its metric cost; no
    arcs cross the boundary or slits (the discrete zero-extension of X)."""
    tails = np.concatenate([domain.edges_u, domain.edges_v])
    heads = np.concatenate([domain.edges_v, domain.edges_u])
    costs = np.concatenate([domain.edges_w, domain.edges_w])
    supplies = np.zeros(domain.n_cells)
    if len(mu):
        np.add.at(supplies, mu.cells, mu.masses)
    return FlowNetwork(n_nodes=domain.n_cells, tails=tails, heads=heads,
                       costs=costs, supplies=supplies,
                       node_cells=np.arange(domain.n_cells), kind="grid",
                       domain=domain)


def bipartite_network(domain: Domain, mu: Molecule) -> FlowNetwork:
    """Complete bipartite network between positive and negative atoms with
    graph-geodesic costs (multi-source Dijkstra)."""
    cells = mu.cells
    masses = mu.masses
    pos = masses > 0
    neg = masses < 0
    p_cells, n_cells_ = cells[pos], cells[neg]
    np_, nn = len(p_cells), len(n_cells_)
    if np_ == 0 or nn == 0:
        return FlowNetwork(n_nodes=0, tails=np.zeros(0, np.int64),
                           heads=np.zeros(0, np.int64), costs=np.zeros(0),
                           supplies=np.zeros(0), node_cells=np.zeros(0, np.int64),
                           kind="bipartite", domain=domain)
    dmat = dijkstra(domain.csr, directed=False, indices=p_cells)[:, n_cells_]
    if not np.isfinite(dmat).all():
        raise Disconnected("some supply atom cannot reach a demand atom")
    ti, hj = np.meshgrid(np.arange(np_), np.arange(nn), indexing="ij")
    return FlowNetwork(
        n_nodes=np_ + nn,
        tails=ti.ravel().astype(np.int64),
        heads=(hj.ravel() + np_).astype(np.int64),
        costs=dmat.ravel(),
        supplies=np.concatenate([masses[pos], masses[neg]]),
        node_cells=np.concatenate([p_cells, n_cells_]),
        kind="bipartite",
        domain=domain,
    )


# ---------------------------------------------------------------------------
# successive shortest paths with node potentials
# ---------------------------------------------------------------------------

def _initial_potentials(net: FlowNetwork, sinks):
    """pi = -(distance to the nearest deficit node): dual feasible, and it
    steers every reduced-cost Dijkstra toward the sinks (A*-style)."""
    rev = sp.csr_matrix((net.costs, (net.heads, net.tails)),
                        shape=(net.n_nodes, net.n_nodes))
    m = dijkstra(rev, directed=True, indices=sinks, min_only=True)
    return -m


def min_cost_flow(net: FlowNetwork, mass_scale: int = DEFAULT_MASS_SCALE) -> FlowSolution:
    """Exact integral min-cost flow at resolution 1/mass_scale.

    Successive shortest paths: Dijkstra with reduced costs from one excess
    node to the nearest deficit node, push, repeat. Reduced costs stay >= 0,
    so the final potentials certify optimality.
    """
    if mass_scale < 1:
        raise ValueError("mass_scale must be >= 1")
    n = net.n_nodes
    supplies_int = round_masses(net.supplies, mass_scale) if n else np.zeros(0, np.int64)
    A = len(net.tails)
    if n == 0 or not supplies_int.any():
        return FlowSolution(network=net, arc_flows=np.zeros(A), total_cost=0.0,
                            node_potentials=np.zeros(n),
                            supplies_rounded=supplies_int / mass_scale if n else np.zeros(0),
                            mass_scale=int(mass_scale))

    excess = supplies_int.astype(np.int64).tolist()
    sinks = np.flatnonzero(supplies_int < 0)
    pi_arr = _initial_potentials(net, sinks)
    bad = ~np.isfinite(pi_arr)
    if bad.any():
        if (supplies_int[bad] != 0).any():
            raise Disconnected("some supply node cannot reach any deficit")
        pi_arr[bad] = 0.0

    # residual arcs: even id 2a = input arc a (uncapacitated), odd id 2a+1 =
    # its reversal with capacity flow[a]
    arc_to = np.empty(2 * A, dtype=np.int64)
    arc_to[0::2] = net.heads
    arc_to[1::2] = net.tails
    arc_cost = np.empty(2 * A)
    arc_cost[0::2] = net.costs
    arc_cost[1::2] = -net.costs
    arc_tail = np.empty(2 * A, dtype=np.int64)
    arc_tail[0::2] = net.tails
    arc_tail[1::2] = net.heads
    order = np.argsort(arc_tail, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, arc_tail + 1, 1)
    indptr = np.cumsum(indptr)
    adj = [order[indptr[u]:indptr[u + 1]].tolist() for u in range(n)]

    to = arc_to.tolist()
    cost = arc_cost.tolist()
    pi = pi_arr.tolist()
    flow = [0] * A
    INF = float("inf")

    active = [int(u) for u in np.flatnonzero(supplies_int > 0)]
    while active:
        s = active[-1]
        if excess[s] <= 0:
            active.pop()
            continue
        dist = [INF] * n
        parent = [-1] * n
        dist[s] = 0.0
        heap = [(0.0, s)]
        settled = []
        t = -1
        while heap:
            d_u, u = heapq.heappop(heap)
            if d_u > dist[u]:
                continue
            if excess[u] < 0:
                t = u
                break
            settled.append(u)
            pu = pi[u]
            for a in adj[u]:
                if a & 1:
                    if flow[a >> 1] <= 0:
                        continue
                v = to[a]
                rc = cost[a] + pu - pi[v]
                if rc < 0.0:
                    rc = 0.0  # guard float drift; exact math keeps rc >= 0
                nd = d_u + rc
                if nd < dist[v]:
                    dist[v] = nd
                    parent[v] = a
                    heapq.heappush(heap, (nd, v))
        if t < 0:
            raise Disconnected("no augmenting path from an excess to a deficit")
        d_t = dist[t]
        # textbook update is pi[v] += min(dist[v], d_t); the uniform +d_t part
        # cancels in every reduced cost, so only settled nodes need touching
        for v in settled:
            pi[v] += dist[v] - d_t
        delta = min(excess[s], -excess[t])
        v = t
        while v != s:
            a = parent[v]
            if a & 1:
                f = flow[a >> 1]
                if f < delta:
                    delta = f
            v = arc_tail[a]
        v = t
        while v != s:
            a = parent[v]
            if a & 1:
                flow[a >> 1] -= delta
            else:
                flow[a >> 1] += delta
            v = arc_tail[a]
        excess[s] -= delta
        excess[t] += delta

    flows = np.asarray(flow, dtype=float) / mass_scale
    total_cost = float(flows @ net.costs)
    return FlowSolution(network=net, arc_flows=flows, total_cost=total_cost,
                        node_potentials=np.asarray(pi),
                        supplies_rounded=supplies_int / mass_scale,
                        mass_scale=int(mass_scale))


# ---------------------------------------------------------------------------
# the two norm computations
# ---------------------------------------------------------------------------

def kantorovich_norm(domain: Domain, mu: Molecule,
                     mass_scale: int = DEFAULT_MASS_SCALE):
    """Transport norm: optimal plan between atoms at geodesic costs."""
    net = bipartite_network(domain, mu)
    sol = min_cost_flow(net, mass_scale)
    return sol.total_cost, sol


def beckmann_norm(domain: Domain, mu: Molecule,
                  mass_scale: int = DEFAULT_MASS_SCALE):
    """Minimal-L1-flow norm: min-cost flow on the grid graph with the molecule
    as divergence data."""
    net = grid_network(domain, mu)
    sol = min_cost_flow(net, mass_scale)
    return sol.total_cost, sol


def flux_projection(hfield):
    """Split cell values onto axis-adjacent edges: F_e = h * mean of the two
    cells' components along the edge axis. Returns (edge_ids, F)."""
    dom = hfield.domain
    off = dom.edges_off
    sel = ((off[:, 0] == 1) & (off[:, 1] == 0)) | ((off[:, 0] == 0) & (off[:, 1] == 1))
    idx = np.flatnonzero(sel)
    axis = (off[idx, 1] == 1).astype(int)
    u, v = dom.edges_u[idx], dom.edges_v[idx]
    vals = hfield.values
    F = dom.h * 0.5 * (vals[u, axis] + vals[v, axis])
    return idx, F


def divergence_molecule(domain: Domain, edge_ids, F) -> Molecule:
    """Molecule of -div * h^2 of an edge-flux vector (zero extension: missing
    edges at the boundary or across slits carry no flux)."""
    m = np.zeros(domain.n_cells)
    np.add.at(m, domain.edges_u[edge_ids], -F)
    np.add.at(m, domain.edges_v[edge_ids], F)
    cells = np.flatnonzero(m != 0.0)
    return Molecule.from_cell_masses(cells, m[cells])


@dataclass
class QuotientResult:
    norm: float
    mu: Molecule
    flow: FlowSolution
    grid_l1: float       # L1 norm of the supplied representative
    member_cost: float   # cost of the flux projection itself as a flow


def quotient_norm(domain: Domain, hfield,
                  mass_scale: int = DEFAULT_MASS_SCALE) -> QuotientResult:
    """Quotient norm of [h]: the class is determined by the discrete divergence
    of the flux projection; the norm is the Beckmann minimum over that class.
    The projection itself is a feasible flow, so norm <= member_cost always."""
    if hfield.domain is not domain:
        raise FieldDomainMismatch("field belongs to a different domain")
    grid_l1 = hfield.l1_norm()
    if not np.isfinite(grid_l1):
        raise NonSummable("field has no finite grid L1 norm")
    edge_ids, F = flux_projection(hfield)
    mu = divergence_molecule(domain, edge_ids, F)
    norm, flow = beckmann_norm(domain, mu, mass_scale)
    member_cost = float(np.abs(F) @ domain.edges_w[edge_ids])
    return QuotientResult(norm=norm, mu=mu, flow=flow,
                          grid_l1=grid_l1, member_cost=member_cost)


# ---------------------------------------------------------------------------
# duality certificates
# ---------------------------------------------------------------------------

@dataclass
class DualityReport:
    pairing: float
    lip_of_potential: float
    gap: float
    potential: object  # GridScalarField


def _bipartite_dual_values(domain: Domain, sol: FlowSolution):
    """Dual values on atoms that are metric-consistent (|f_i - f_j| <= d_ij for
    every atom pair) and tight on flow arcs (f_p - f_n = d_pn): shortest paths
    in the atom graph with metric arcs, overridden by negative-length flow
    arcs (the tighter constraint; no negative cycles at optimality)."""
    net = sol.network
    nA = net.n_nodes
    cells = net.node_cells
    dmat = dijkstra(domain.csr, directed=False, indices=cells)[:, cells]
    W = dmat.copy()
    carrying = sol.arc_flows > 0
    W[net.tails[carrying], net.heads[carrying]] = -net.costs[carrying]
    rows, cols = np.meshgrid(np.arange(nA), np.arange(nA), indexing="ij")
    off = rows != cols
    rows, cols, data = rows[off], cols[off], W[off]
    virtual = nA
    # virtual arcs get weight 1 (not 0: explicit zeros are fragile in sparse
    # csgraph); the uniform offset is subtracted afterwards
    rows = np.concatenate([rows, np.full(nA, virtual)])
    cols = np.concatenate([cols, np.arange(nA)])
    data = np.concatenate([data, np.ones(nA)])
    g = sp.csr_matrix((data, (rows, cols)), shape=(nA + 1, nA + 1))
    dist = bellman_ford(g, directed=True, indices=virtual)
    return np.asarray(dist[:nA]) - 1.0


def duality_certificate(domain: Domain, mu: Molecule, sol: FlowSolution) -> DualityReport:
    """Kantorovich-Rubinstein certificate: a grid potential f with local
    Lipschitz constant <= 1 whose pairing with the (rounded) molecule equals
    the solved cost."""
    from .fields import GridScalarField
    from .potential import lipschitz_norm_local

    net = sol.network
    # the solution must conserve exactly the rounded molecule
    expect = np.zeros(net.n_nodes)
    if net.kind == "grid":
        if len(mu):
            np.add.at(expect, mu.cells, mu.masses)
    else:
        masses = mu.masses
        expect = np.concatenate([masses[masses > 0], masses[masses < 0]])
    if len(expect) != len(sol.supplies_rounded) or (
        len(expect)
        and np.abs(round_masses(expect, sol.mass_scale) / sol.mass_scale
                   - sol.supplies_rounded).max() > 1e-12
    ):
        raise SolutionMismatch("solution was not produced from this molecule")
    chk = sol.validate()
    if chk["conservation"] > 1e-9:
        raise SolutionMismatch(f"flow violates conservation by {chk['conservation']:g}")

    if net.n_nodes == 0:
        f = GridScalarField(domain, np.zeros(domain.n_cells))
        return DualityReport(pairing=0.0, lip_of_potential=0.0, gap=abs(sol.total_cost),
                             potential=f)

    if net.kind == "grid":
        fvals = -sol.node_potentials
        fvals = fvals - fvals[domain.basepoint]
        f = GridScalarField(domain, fvals)
    else:
        fa = _bipartite_dual_values(domain, sol)
        # 1-Lipschitz extension min_i (f_i + d(i, .)) via a virtual source;
        # source arcs are shifted positive so none is an explicit sparse zero
        shift = float(fa.min()) - 1.0
        nv = domain.n_cells
        u = np.concatenate([domain.edges_u, domain.edges_v,
                            np.full(net.n_nodes, nv, dtype=np.int64)])
        v = np.concatenate([domain.edges_v, domain.edges_u, net.node_cells])
        w = np.concatenate([domain.edges_w, domain.edges_w, fa - shift])
        g = sp.csr_matrix((w, (u, v)), shape=(nv + 1, nv + 1))
        dist = dijkstra(g, directed=True, indices=nv)
        fvals = dist[:nv] + shift
        f = GridScalarField(domain, fvals - fvals[domain.basepoint])

    pairing = float(sol.supplies_rounded @ f.values[net.node_cells])
    lip = lipschitz_norm_local(f)
    gap = abs(pairing - sol.total_cost)
    return DualityReport(pairing=pairing, lip_of_potential=lip, gap=gap, potential=f)
