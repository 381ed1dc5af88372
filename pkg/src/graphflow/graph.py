"""
Weighted metric graphs.

Every edge is parametrised on [0, 1]. Material travels from the x=1 end of an
edge towards its x=0 end, so an edge ``e = (e(0), e(1))`` receives material at
the vertex ``e(1)`` and releases it at ``e(0)``. At each vertex the material
leaving the incident edges is split among the edges that start there (at
their x=1 end) with routing weights ``w[vertex, edge]``.

Matrix indices follow declaration order of vertices and edges.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    MissingWeight,
    NonpositiveVelocity,
    SelfLoop,
    UnexpectedWeight,
    UnknownVertex,
    WeightOutOfRange,
)

STOCHASTIC_TOL = 1e-12
DOMAIN_RTOL = 1e-9


@dataclass(frozen=True)
class Edge:
    id: str
    x0: str  # vertex at the x=0 end, e(0)
    x1: str  # vertex at the x=1 end, e(1)


def _as_edges(edges: Iterable) -> tuple[Edge, ...]:
    out = []
    for k, e in enumerate(edges):
        if isinstance(e, Edge):
            out.append(e)
        else:
            a, b = e
            out.append(Edge(f"e{k + 1}", str(a), str(b)))
    return tuple(out)


def build_incidence(vertices: Sequence[str], edges: Iterable) -> tuple[np.ndarray, np.ndarray]:
    """
    Outgoing and incoming incidence matrices.

    ``phi_out[i, j] = 1`` iff edge j has its x=1 end at vertex i, and
    ``phi_in[i, j] = 1`` iff edge j has its x=0 end at vertex i.

    Parameters
    ----------
    vertices : sequence of str
    edges : iterable of Edge or (x0, x1) pairs

    Returns
    -------
    phi_out, phi_in : ndarray, shape (n, m)
    """
    edges = _as_edges(edges)
    index = {v: i for i, v in enumerate(vertices)}
    seen = set()
    phi_out = np.zeros((len(vertices), len(edges)))
    phi_in = np.zeros((len(vertices), len(edges)))
    for j, e in enumerate(edges):
        for v in (e.x0, e.x1):
            if v not in index:
                raise UnknownVertex(f"edge {e.id!r} references undeclared vertex {v!r}")
        if e.x0 == e.x1:
            raise SelfLoop(f"edge {e.id!r} is a loop at {e.x0!r}")
        if (e.x0, e.x1) in seen:
            raise DuplicateEdge(f"edge {e.id!r} duplicates ({e.x0!r}, {e.x1!r})")
        seen.add((e.x0, e.x1))
        phi_out[index[e.x1], j] = 1.0
        phi_in[index[e.x0], j] = 1.0
    return phi_out, phi_in


def build_line_adjacency(
    vertices: Sequence[str],
    edges: Iterable,
    weights: Mapping[tuple[str, str], float],
) -> np.ndarray:
    """
    Weighted transposed adjacency matrix of the line graph.

    ``B[i, j] = w[k, i]`` when edge j ends (x=0) at the vertex k where edge i
    begins (x=1), and 0 otherwise. Column j therefore tells how the outflow of
    edge j is shared among the edges it feeds.

    ``weights`` maps ``(vertex_id, edge_id)`` to a value in [0, 1] and must
    cover exactly the pairs where the edge's x=1 end sits at the vertex.
    Extra pairs are tolerated only with value 0.
    """
    edges = _as_edges(edges)
    ids = [e.id for e in edges]
    required = {(e.x1, e.id) for e in edges}
    for key, w in weights.items():
        if key not in required:
            if key[1] not in ids or key[0] not in vertices:
                raise UnexpectedWeight(f"weight for unknown pair {key!r}", key)
            if w != 0:
                raise UnexpectedWeight(
                    f"weight {key!r} = {w} but edge {key[1]!r} does not start at {key[0]!r}",
                    key,
                )
    for key in sorted(required, key=lambda p: ids.index(p[1])):
        if key not in weights:
            raise MissingWeight(f"missing weight for (vertex {key[0]!r}, edge {key[1]!r})", key)
        w = weights[key]
        if not (0.0 <= w <= 1.0):
            raise WeightOutOfRange(f"weight {key!r} = {w} outside [0, 1]", key)

    m = len(edges)
    B = np.zeros((m, m))
    for i, ei in enumerate(edges):
        for j, ej in enumerate(edges):
            if ej.x0 == ei.x1:
                B[i, j] = weights[(ei.x1, ei.id)]
    return B


@dataclass(frozen=True)
class MetricGraph:
    """
    Immutable weighted metric graph.

    Construction checks that the graph is simple and connected and that the
    routing weights are complete and in range. Conservation (weights summing
    to one at each vertex) is *not* enforced here; sources and sinks are
    legitimate graphs, see :func:`validate_conservation`.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    weights: Mapping[tuple[str, str], float]
    phi_out: np.ndarray = field(repr=False)
    phi_in: np.ndarray = field(repr=False)
    line_adjacency: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, vertices, edges, weights) -> MetricGraph:
        vertices = tuple(str(v) for v in vertices)
        edges = _as_edges(edges)
        ids = [e.id for e in edges]
        if len(set(ids)) != len(ids):
            raise DuplicateEdge("edge identifiers are not unique")
        if len(set(vertices)) != len(vertices):
            raise UnknownVertex("vertex identifiers are not unique")
        phi_out, phi_in = build_incidence(vertices, edges)
        _check_connected(phi_out, phi_in)
        weights = {(str(v), str(e)): float(w) for (v, e), w in dict(weights).items()}
        B = build_line_adjacency(vertices, edges, weights)
        for arr in (phi_out, phi_in, B):
            arr.setflags(write=False)
        return cls(vertices, edges, weights, phi_out, phi_in, B)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def edge_ids(self) -> list[str]:
        return [e.id for e in self.edges]

    def edge_index(self, edge_id: str) -> int:
        return self.edge_ids.index(edge_id)

    def weight_matrix(self) -> np.ndarray:
        """Dense n x m matrix of routing weights (zero where undefined)."""
        W = np.zeros((self.n, self.m))
        vidx = {v: i for i, v in enumerate(self.vertices)}
        for j, e in enumerate(self.edges):
            W[vidx[e.x1], j] = self.weights[(e.x1, e.id)]
        return W


def _check_connected(phi_out: np.ndarray, phi_in: np.ndarray) -> None:
    n = phi_out.shape[0]
    if n == 0:
        raise DisconnectedGraph("graph has no vertices")
    heads = phi_out.argmax(axis=0)
    tails = phi_in.argmax(axis=0)
    adj = csr_matrix((np.ones(len(heads)), (heads, tails)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=True, connection="weak")
    if ncomp != 1:
        raise DisconnectedGraph(f"graph has {ncomp} connected components")


@dataclass
class ConservationReport:
    ok: bool
    vertex_residuals: dict[str, float]
    column_residuals: dict[str, float]

    def lines(self) -> list[str]:
        if self.ok:
            return ["stochasticity: ok"]
        out = ["stochasticity: VIOLATED"]
        for v, r in self.vertex_residuals.items():
            out.append(f"  vertex {v}: weight sum residual {r:.3g}")
        for e, r in self.column_residuals.items():
            out.append(f"  column {e}: column sum residual {r:.3g}")
        return out


def validate_conservation(graph: MetricGraph, tol: float = STOCHASTIC_TOL) -> ConservationReport:
    """Check the Kirchhoff condition at every vertex and column stochasticity of B.

    Residuals are reported as ``1 - sum``, so a positive value means material
    is lost.
    """
    W = graph.weight_matrix()
    row = 1.0 - W.sum(axis=1)
    col = 1.0 - graph.line_adjacency.sum(axis=0)
    bad_v = {v: float(r) for v, r in zip(graph.vertices, row) if abs(r) > tol}
    bad_c = {e: float(r) for e, r in zip(graph.edge_ids, col) if abs(r) > tol}
    return ConservationReport(not bad_v and not bad_c, bad_v, bad_c)


def _speeds(velocities, t: float) -> np.ndarray:
    if callable(getattr(velocities[0], "eval", None)):
        return np.array([float(p.eval(t)) for p in velocities])
    return np.asarray(velocities, dtype=float)


def velocity_adjacency(B: np.ndarray, velocities, t: float = 0.0) -> np.ndarray:
    """Boundary matrix ``C(t)^-1 B C(t)``, entrywise ``c_i^-1 B_ij c_j``.

    ``velocities`` is either a sequence of profiles (evaluated at ``t``) or an
    array of speeds.
    """
    c = _speeds(velocities, t)
    if np.any(c <= 0):
        raise NonpositiveVelocity(f"speeds must be positive, got {c}")
    return np.asarray(B) * c[None, :] / c[:, None]


@dataclass
class DomainCheck:
    constant: bool
    # (i, j, t_a, t_b) with 0-based edge indices
    witness: tuple[int, int, float, float] | None = None


def constant_domain_check(
    B: np.ndarray, velocities, times: Sequence[float], rtol: float = DOMAIN_RTOL
) -> DomainCheck:
    """
    Test whether the boundary matrix, hence the operator domain, is the same
    at all sampled times.

    Only pairs (i, j) with ``B[i, j] != 0`` are constrained: the speed ratio
    ``c_i / c_j`` must agree across all samples to relative tolerance ``rtol``.
    """
    times = list(times)
    if len(times) < 2:
        raise ValueError("need at least two sample times")
    C = np.array([_speeds(velocities, t) for t in times])  # (K, m)
    B = np.asarray(B)
    for i, j in zip(*np.nonzero(B)):
        ratio = C[:, i] / C[:, j]
        dev = np.abs(ratio - ratio[0])
        k = int(np.argmax(dev))
        if dev[k] > rtol * abs(ratio[0]):
            return DomainCheck(False, (int(i), int(j), float(times[0]), float(times[k])))
    return DomainCheck(True)
