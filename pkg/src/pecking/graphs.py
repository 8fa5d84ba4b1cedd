"""Simple undirected site graphs and their Laplacians.

Vertices are dense 0-based integers. Graphs are immutable after
construction; the simulation engines never mutate topology. Supported
families: path, star, cycle, complete, lattice2d (von Neumann
4-neighbor square lattice, open or periodic boundary).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("path", "star", "cycle", "complete", "lattice2d")
BOUNDARIES = ("open", "periodic")


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class SiteGraph:
    """Simple undirected graph: vertex count, sorted edge tuple, adjacency.

    Invariants (enforced by ``from_edges``): no self-loops, no duplicate
    edges, adjacency symmetric, vertex ids 0..n-1, sum of degrees = 2|E|.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    graph_id: str = field(default="", compare=False)

    @classmethod
    def from_edges(cls, n: int, edges, graph_id: str = "") -> "SiteGraph":
        if n < 1:
            raise GraphError("vertex count must be >= 1")
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) outside vertex range 0..{n - 1}")
            seen.add((min(u, v), max(u, v)))
        ordered = tuple(sorted(seen))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in ordered:
            adj[u].append(v)
            adj[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in adj)
        return cls(n=n, edges=ordered, adjacency=adjacency,
                   graph_id=graph_id or f"edges-{n}-{len(ordered)}")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint arrays (u[], v[]) in canonical sorted edge order."""
        if not self.edges:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        arr = np.asarray(self.edges, dtype=np.int64)
        return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def build_family(family: str, n: int, boundary: str = "periodic") -> SiteGraph:
    """Construct a named graph family on n vertices.

    Star puts vertex 0 at the hub. lattice2d requires n to be a perfect
    square (linear dimension L = sqrt(n)) and honors ``boundary``;
    boundary is ignored for the other families.
    """
    if family not in FAMILIES:
        raise GraphError(f"unknown family {family!r}; choose from {FAMILIES}")
    if boundary not in BOUNDARIES:
        raise GraphError(f"unknown boundary {boundary!r}; choose from {BOUNDARIES}")
    if n < 1:
        raise GraphError("n must be >= 1")
    if family == "path":
        edges = [(k, k + 1) for k in range(n - 1)]
        gid = f"path-{n}"
    elif family == "star":
        edges = [(0, k) for k in range(1, n)]
        gid = f"star-{n}"
    elif family == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        edges = [(k, (k + 1) % n) for k in range(n)]
        gid = f"cycle-{n}"
    elif family == "complete":
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        gid = f"complete-{n}"
    else:
        side = int(round(n ** 0.5))
        if side * side != n:
            raise GraphError(f"lattice2d needs a perfect-square n, got {n}")
        edges = _lattice_edges(side, boundary)
        gid = f"lattice2d-{n}-{boundary}"
    return SiteGraph.from_edges(n, edges, graph_id=gid)


def _lattice_edges(side: int, boundary: str) -> list[tuple[int, int]]:
    # von Neumann neighbors; for side <= 2 periodic wrap lands on an
    # existing neighbor and from_edges dedup keeps the graph simple
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, r * side + c + 1))
            elif boundary == "periodic" and side > 1:
                edges.append((v, r * side))
            if r + 1 < side:
                edges.append((v, (r + 1) * side + c))
            elif boundary == "periodic" and side > 1:
                edges.append((v, c))
    return edges


def from_edge_list(text: str) -> SiteGraph:
    """Parse the edge-list text format: one "u v" pair per line.

    ``#`` starts a comment line; tokens are whitespace-separated decimal
    integers. Vertex count is max id + 1; every id in 0..max must occur
    (gaps rejected, ids are kept stable across tools rather than
    compacted). Duplicate lines collapse to one edge.
    """
    edges = []
    ids = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer token in {raw!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative vertex id")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at vertex {u}")
        edges.append((u, v))
        ids.add(u)
        ids.add(v)
    if not edges:
        raise GraphError("edge list is empty")
    n = max(ids) + 1
    missing = sorted(set(range(n)) - ids)
    if missing:
        raise GraphError(f"vertex ids have gaps: {missing[:5]} never appear")
    return SiteGraph.from_edges(n, edges, graph_id=f"edgelist-{n}-{len(set((min(u,v),max(u,v)) for u,v in edges))}")


def edge_list_text(g: SiteGraph) -> str:
    """Serialize to the edge-list text format (canonical edge order)."""
    return "\n".join(f"{u} {v}" for u, v in g.edges) + "\n"


def laplacian(g: SiteGraph) -> np.ndarray:
    """Dense Laplacian L = diag(d_1..d_n) - A.

    Integer-valued, symmetric, zero row sums, positive semidefinite.
    Returned as float64 for downstream spectral work.
    """
    lap = np.zeros((g.n, g.n), dtype=np.float64)
    for u, v in g.edges:
        lap[u, v] -= 1.0
        lap[v, u] -= 1.0
        lap[u, u] += 1.0
        lap[v, v] += 1.0
    return lap


def connected_components(g: SiteGraph) -> list[list[int]]:
    """Partition of 0..n-1 by connectivity, ordered by smallest member."""
    unseen = set(range(g.n))
    comps = []
    while unseen:
        root = min(unseen)
        stack = [root]
        unseen.discard(root)
        comp = [root]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if w in unseen:
                    unseen.discard(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def is_connected(g: SiteGraph) -> bool:
    return len(connected_components(g)) == 1


def relabel(g: SiteGraph, perm) -> SiteGraph:
    """Relabel vertices by permutation (perm[i] = new id of old vertex i)."""
    perm = list(perm)
    if sorted(perm) != list(range(g.n)):
        raise GraphError("perm must be a permutation of 0..n-1")
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    return SiteGraph.from_edges(g.n, edges, graph_id=g.graph_id + "-relabeled")


def random_tree(n: int, rng: np.random.Generator) -> SiteGraph:
    """Random recursive tree: vertex k attaches to a uniform earlier vertex."""
    if n < 1:
        raise GraphError("n must be >= 1")
    edges = [(int(rng.integers(0, k)), k) for k in range(1, n)]
    return SiteGraph.from_edges(n, edges, graph_id=f"tree-{n}")


def random_connected_graph(n: int, extra_edges: int, rng: np.random.Generator) -> SiteGraph:
    """Random tree plus `extra_edges` additional distinct random edges."""
    tree = random_tree(n, rng)
    edges = set(tree.edges)
    limit = n * (n - 1) // 2
    want = min(len(edges) + max(0, extra_edges), limit)
    while len(edges) < want:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return SiteGraph.from_edges(n, sorted(edges), graph_id=f"random-{n}-{len(edges)}")
