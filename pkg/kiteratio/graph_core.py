"""
Graph representation, kite construction, connectivity, graph6 codec and the
structural detectors used by the lemma checks.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import GraphError

logger = logging.getLogger('kiteratio.graph_core')

GRAPH6_HEADER = ">>graph6<<"
# Short form only: one header byte
GRAPH6_MAX_N = 62


class Graph:
    """Undirected simple graph on vertices 0..n-1 stored as a dense symmetric boolean matrix.

    The matrix is read-only after construction, so a Graph can be shared freely.
    """

    __slots__ = ('n', 'adjacency', '_degrees', '_neighbors')

    def __init__(self, adjacency):
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphError(f"Adjacency must be a square matrix, got shape {adj.shape}")
        if adj.shape[0] < 1:
            raise GraphError("A graph needs at least one vertex")
        if adj.diagonal().any():
            raise GraphError("Loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise GraphError("Adjacency must be symmetric")
        adj.setflags(write=False)
        self.n = adj.shape[0]
        self.adjacency = adj
        self._degrees = None
        self._neighbors = None

    @property
    def degrees(self):
        if self._degrees is None:
            degrees = self.adjacency.sum(axis=1).astype(np.int64)
            degrees.setflags(write=False)
            self._degrees = degrees
        return self._degrees

    def neighbors(self, v):
        if self._neighbors is None:
            self._neighbors = [np.flatnonzero(row) for row in self.adjacency]
        return self._neighbors[v]

    def has_edge(self, u, v):
        return bool(self.adjacency[u, v])

    def edges(self):
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(u), int(v)) for u, v in zip(rows, cols)]

    @property
    def edge_count(self):
        return int(self.degrees.sum()) // 2

    def relabel(self, perm):
        """Return the graph with vertex v renamed perm[v]."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise GraphError("Relabeling must be a permutation of 0..n-1")
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(self.n)
        return Graph(self.adjacency[np.ix_(inverse, inverse)])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.n, np.packbits(self.adjacency).tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class KiteSpec:
    """P_r . K_s: a path of order r glued at an end to one vertex of K_s."""

    r: int
    s: int

    def __post_init__(self):
        if self.r < 1:
            raise GraphError(f"Kite path order must be >= 1, got r={self.r}")
        if self.s < 2:
            raise GraphError(f"Kite clique order must be >= 2, got s={self.s}")

    @property
    def n(self):
        return self.r + self.s - 1

    def to_dict(self):
        return {"r": self.r, "s": self.s, "n": self.n}


@dataclass(frozen=True)
class PendantPath:
    """Pendant path v1..vm (v1 has degree 1) and the vertex it hangs from."""

    vertices: Tuple[int, ...]
    attachment: int

    @property
    def length(self):
        return len(self.vertices)


def build_graph(n, edges):
    """Build a graph from an explicit edge list; duplicate edges collapse."""
    if n < 1:
        raise GraphError(f"Vertex count must be >= 1, got {n}")
    adj = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"Edge ({u}, {v}) has a vertex outside 0..{n - 1}")
        if u == v:
            raise GraphError(f"Loop edge at vertex {u}")
        adj[u, v] = adj[v, u] = True
    return Graph(adj)


def complete_graph(n):
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    return Graph(adj)


def path_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    if n < 3:
        raise GraphError(f"A cycle needs at least 3 vertices, got {n}")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def kite(spec):
    """Realise P_r . K_s.

    Vertices 0..r-2 are the pendant path (0 is the free end), r-1 is the
    attachment, and r-1..r+s-2 form the clique.
    """
    r, s = spec.r, spec.s
    n = spec.n
    adj = np.zeros((n, n), dtype=bool)
    for i in range(r - 1):
        adj[i, i + 1] = adj[i + 1, i] = True
    adj[r - 1:, r - 1:] = True
    np.fill_diagonal(adj, False)
    return Graph(adj)


def bfs_distances(g, sources):
    """Multi-source BFS; unreachable vertices get -1."""
    dist = np.full(g.n, -1, dtype=np.int64)
    queue = deque()
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def is_connected(g):
    return bool((bfs_distances(g, [0]) >= 0).all())


def diameter(g):
    """Largest eccentricity; -1 for a disconnected graph."""
    best = 0
    for v in range(g.n):
        dist = bfs_distances(g, [v])
        if (dist < 0).any():
            return -1
        best = max(best, int(dist.max()))
    return best


def is_complete(g):
    return g.edge_count == g.n * (g.n - 1) // 2


def is_regular(g):
    degrees = g.degrees
    return bool(degrees.min() == degrees.max())


def shortest_path(g, sources, targets):
    """Lexicographically smallest shortest path from any source to any target.

    Among sources at minimum distance the smallest label starts the path; each
    step then takes the smallest-labelled neighbour one step closer. Returns
    None if no target is reachable.
    """
    to_target = bfs_distances(g, sorted(targets))
    reachable = [s for s in sorted(sources) if to_target[s] >= 0]
    if not reachable:
        return None
    start = min(reachable, key=lambda s: (to_target[s], s))
    path = [int(start)]
    current = start
    while to_target[current] > 0:
        current = min(w for w in g.neighbors(current) if to_target[w] == to_target[current] - 1)
        path.append(int(current))
    return path


def pendant_paths(g):
    """Yield the maximal pendant path starting at each degree-1 vertex, in label order.

    The walk goes through degree-2 vertices until a vertex of degree >= 3 (the
    attachment). On a bare path it ends at the opposite endpoint, which is then
    reported as the attachment.
    """
    degrees = g.degrees
    for leaf in np.flatnonzero(degrees == 1):
        leaf = int(leaf)
        path = [leaf]
        prev, current = -1, leaf
        while True:
            nxt = next(int(w) for w in g.neighbors(current) if w != prev)
            if degrees[nxt] != 2:
                break
            path.append(nxt)
            prev, current = current, nxt
        yield PendantPath(tuple(path), nxt)


def find_pendant_path(g):
    """Longest maximal pendant path, or None when no vertex has degree 1.

    Ties go to the lexicographically smallest vertex sequence, so a bare path is
    rooted at its smaller endpoint.
    """
    best = None
    for candidate in pendant_paths(g):
        if best is None or candidate.length > best.length or (
                candidate.length == best.length and candidate.vertices < best.vertices):
            best = candidate
    return best


def encode_graph6(g):
    """Short-form graph6 text (no newline) for n <= 62."""
    n = g.n
    if n > GRAPH6_MAX_N:
        raise GraphError(f"Only short-form graph6 is supported (n <= {GRAPH6_MAX_N}), got n={n}")
    bits = [1 if g.adjacency[i, j] else 0 for j in range(1, n) for i in range(j)]
    bits.extend([0] * (-len(bits) % 6))
    chars = [chr(n + 63)]
    for start in range(0, len(bits), 6):
        value = 0
        for bit in bits[start:start + 6]:
            value = (value << 1) | bit
        chars.append(chr(value + 63))
    return "".join(chars)


def parse_graph6(line):
    """Parse one short-form graph6 line."""
    text = line.strip()
    if text.startswith(GRAPH6_HEADER):
        text = text[len(GRAPH6_HEADER):]
    if not text:
        raise GraphError("Empty graph6 line")
    for ch in text:
        if not 63 <= ord(ch) <= 126:
            raise GraphError(f"Character {ch!r} is outside the graph6 printable range")
    if text[0] == '~':
        raise GraphError("Long-form graph6 (n > 62) is not supported")
    n = ord(text[0]) - 63
    if n < 1:
        raise GraphError("graph6 line encodes an empty graph")
    pair_count = n * (n - 1) // 2
    expected = 1 + (pair_count + 5) // 6
    if len(text) != expected:
        raise GraphError(f"graph6 length header says n={n}, expected {expected} bytes, got {len(text)}")

    bits = []
    for ch in text[1:]:
        value = ord(ch) - 63
        bits.extend((value >> shift) & 1 for shift in range(5, -1, -1))
    if any(bits[pair_count:]):
        raise GraphError("Nonzero padding bits in graph6 line")

    adj = np.zeros((n, n), dtype=bool)
    k = 0
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                adj[i, j] = adj[j, i] = True
            k += 1
    return Graph(adj)


def read_graph6_file(path):
    """Yield (line_number, Graph) for each non-blank line of a graph6 file."""
    with open(path, "rb") as f:
        for line_number, raw in enumerate(f, start=1):
            try:
                line = raw.decode("ascii")
            except UnicodeDecodeError as e:
                raise GraphError(f"{path}:{line_number}: non-ASCII byte at column {e.start + 1}") from e
            if not line.strip():
                continue
            try:
                yield line_number, parse_graph6(line)
            except GraphError as e:
                raise GraphError(f"{path}:{line_number}: {e}") from e
