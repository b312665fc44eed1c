"""Undirected graphs, edge-list ingestion, power-law cluster generation and
all-pairs hop distances."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str):
        super().__init__(f"line {lineno}: expected two node labels, got {line!r}")
        self.lineno = lineno


class DisconnectedGraphError(GraphError):
    def __init__(self, i: int, j: int):
        super().__init__(f"graph is disconnected: node {j} unreachable from node {i}")
        self.pair = (i, j)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..node_count-1``.

    ``adjacency[i]`` is the sorted tuple of neighbours of ``i``. ``labels``
    keeps the original node labels when the graph was read from a file.
    """

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphError("graph must have at least one node")
        if len(self.adjacency) != self.node_count:
            raise GraphError("adjacency length does not match node_count")
        for i, nbrs in enumerate(self.adjacency):
            prev = -1
            for j in nbrs:
                if not 0 <= j < self.node_count:
                    raise GraphError(f"neighbour {j} of node {i} out of range")
                if j == i:
                    raise GraphError(f"self-loop at node {i}")
                if j <= prev:
                    raise GraphError(f"neighbours of node {i} not sorted/unique")
                prev = j
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i not in self.adjacency[j]:
                    raise GraphError(f"edge {i}-{j} missing its reverse")

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> Graph:
        """Build from an iterable of ``(i, j)`` pairs; loops and repeats are dropped."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if i != j:
                nbrs[i].add(j)
                nbrs[j].add(i)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs),
                   tuple(labels) if labels is not None else None)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def to_sparse(self) -> sp.csr_matrix:
        deg = self.degrees()
        indptr = np.concatenate([[0], np.cumsum(deg)])
        indices = np.fromiter((j for a in self.adjacency for j in a),
                              dtype=np.int32, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.float32)
        return sp.csr_matrix((data, indices, indptr), shape=(self.node_count,) * 2)


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    m: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise GraphError(f"need 1 <= m < n, got m={self.m}, n={self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise GraphError(f"triangle probability must lie in [0, 1], got {self.p}")


def load_edge_list(text: str) -> Graph:
    """Parse whitespace-separated edge-list text.

    Lines that are blank or start with ``#`` or ``%`` are skipped. Labels are
    relabelled densely in order of first appearance.
    """
    index: dict[str, int] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(lineno, raw)
        ends = []
        for tok in tokens:
            if tok not in index:
                index[tok] = len(index)
            ends.append(index[tok])
        edges.append(tuple(ends))
    if not index:
        raise GraphError("edge list is empty")
    return Graph.from_edges(len(index), edges, labels=list(index))


def read_edge_list(path: str | Path) -> Graph:
    return load_edge_list(Path(path).read_text(encoding="utf-8"))


def powerlaw_cluster_graph(params: GeneratorParams) -> Graph:
    """Holme-Kim growth: preferential attachment with triangle closure.

    Starts from ``m`` isolated nodes; every later node adds exactly ``m``
    distinct edges, so the result has ``m * (n - m)`` edges. After the
    first preferential edge, each further edge closes a triangle through a
    random neighbour of the last preferential target with probability ``p``.
    """
    n, m, p = params.n, params.m, params.p
    rng = random.Random(params.seed)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    # one entry per incident edge endpoint; the seed nodes appear once each
    # so the first node attaches uniformly
    repeated = list(range(m))

    def attach_preferential(source: int) -> int:
        while True:
            t = repeated[int(rng.random() * len(repeated))]
            if t not in nbrs[source]:
                return t

    for source in range(m, n):
        src_nbrs = nbrs[source]
        target = attach_preferential(source)
        chosen = [target]
        src_nbrs.add(target)
        nbrs[target].add(source)
        while len(chosen) < m:
            if rng.random() < p:
                candidates = sorted(nbrs[target] - src_nbrs - {source})
                if candidates:
                    t = candidates[int(rng.random() * len(candidates))]
                    chosen.append(t)
                    src_nbrs.add(t)
                    nbrs[t].add(source)
                    continue
            target = attach_preferential(source)
            chosen.append(target)
            src_nbrs.add(target)
            nbrs[target].add(source)
        repeated.extend(chosen)
        repeated.extend([source] * m)
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs))


def connected_components(g: Graph) -> list[list[int]]:
    seen = np.zeros(g.node_count, dtype=bool)
    comps = []
    for start in range(g.node_count):
        if seen[start]:
            continue
        seen[start] = True
        comp, stack = [start], [start]
        while stack:
            v = stack.pop()
            for w in g.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component, relabelled densely.

    Ties go to the component holding the smallest original node index.
    Node order inside the component follows the original order.
    """
    comps = connected_components(g)
    # components are discovered in order of their smallest node, so max()
    # already returns the earliest one among equals
    best = max(comps, key=len)
    if len(best) == g.node_count:
        return g
    relabel = {v: k for k, v in enumerate(best)}
    adjacency = tuple(tuple(relabel[w] for w in g.adjacency[v]) for v in best)
    labels = tuple(g.labels[v] for v in best) if g.labels is not None else None
    return Graph(len(best), adjacency, labels)


def hop_distance_matrix(g: Graph) -> np.ndarray:
    """All-pairs shortest hop counts by level-synchronous BFS from every node.

    All sources advance together: one sparse-dense product per BFS level.
    Raises DisconnectedGraphError if some pair is unreachable.
    """
    n = g.node_count
    adj = g.to_sparse()
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    visited = np.eye(n, dtype=bool)
    frontier = np.eye(n, dtype=np.float32)
    level = 0
    while True:
        level += 1
        reached = np.asarray(adj @ frontier) > 0
        new = reached & ~visited
        if not new.any():
            break
        dist[new] = level
        visited |= new
        frontier = new.astype(np.float32)
    if not visited.all():
        i, j = np.argwhere(~visited)[0]
        raise DisconnectedGraphError(int(j), int(i))
    return dist


def average_degree(g: Graph) -> float:
    return 2.0 * g.edge_count / g.node_count


def singular_value_profile(h: np.ndarray) -> np.ndarray:
    """All singular values of ``h``, largest first (LAPACK divide and conquer)."""
    h = np.asarray(h, dtype=np.float64)
    return np.linalg.svd(h, compute_uv=False)
