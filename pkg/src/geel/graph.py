"""Undirected graphs, node orderings, and bandwidth.

Node ids are 0-based everywhere in this module; ranks produced by the
ordering generators are 1-based (the codec reserves 0 for the sentinel
source that precedes the first edge).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConnectivityError, DimensionError, GraphValidationError

Edge = Tuple[int, int]


class Graph:
    """Simple undirected graph with a sorted adjacency list per node.

    No self-loops and no parallel edges. Instances are treated as
    immutable once built; all operations below return new objects.
    """

    __slots__ = ("node_count", "adjacency")

    def __init__(self, node_count: int, edges: Iterable[Edge]):
        if node_count < 1:
            raise GraphValidationError("graph needs at least one node")
        adj = [set() for _ in range(node_count)]
        for u, v in edges:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphValidationError(f"edge ({u},{v}) out of range for N={node_count}")
            if u == v:
                raise GraphValidationError(f"self-loop at node {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.node_count = node_count
        self.adjacency = tuple(tuple(sorted(s)) for s in adj)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def edges(self) -> list[Edge]:
        """Each undirected edge once, as (min, max), sorted."""
        return [(u, v) for u in range(self.node_count) for v in self.adjacency[u] if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        a, b = self.adjacency[u], self.adjacency[v]
        small = a if len(a) <= len(b) else b
        return (v if small is a else u) in small

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.node_count == other.node_count
            and self.adjacency == other.adjacency
        )

    def __hash__(self) -> int:
        return hash((self.node_count, self.adjacency))

    def __repr__(self) -> str:
        return f"Graph(N={self.node_count}, M={self.edge_count})"


@dataclass(frozen=True)
class Ordering:
    """Bijection node id -> rank in 1..N, with its inverse.

    ``rank[u]`` is the 1-based rank of node u; ``inverse[r-1]`` is the
    node holding rank r.
    """

    rank: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_rank(cls, rank: Sequence[int]) -> "Ordering":
        rank = np.asarray(rank, dtype=np.int64)
        n = rank.shape[0]
        if n == 0 or sorted(rank.tolist()) != list(range(1, n + 1)):
            raise GraphValidationError("rank array is not a bijection onto 1..N")
        inverse = np.empty(n, dtype=np.int64)
        inverse[rank - 1] = np.arange(n)
        return cls(rank=rank, inverse=inverse)

    @classmethod
    def from_visit_order(cls, order: Sequence[int]) -> "Ordering":
        """Node visited k-th (0-based) receives rank k+1."""
        order = np.asarray(order, dtype=np.int64)
        rank = np.empty(order.shape[0], dtype=np.int64)
        rank[order] = np.arange(1, order.shape[0] + 1)
        return cls.from_rank(rank)

    @classmethod
    def identity(cls, n: int) -> "Ordering":
        return cls.from_rank(np.arange(1, n + 1))

    def __len__(self) -> int:
        return int(self.rank.shape[0])


def is_connected(g: Graph) -> bool:
    """True iff every node is reachable from node 0."""
    seen = bytearray(g.node_count)
    seen[0] = 1
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if not seen[v]:
                seen[v] = 1
                count += 1
                queue.append(v)
    return count == g.node_count


def largest_component(g: Graph) -> Graph:
    """Induced subgraph on the largest connected component (ties: the one
    containing the smallest node id), relabeled to 0..k-1 preserving id order."""
    unseen = set(range(g.node_count))
    best: list[int] = []
    while unseen:
        start = min(unseen)
        comp = [start]
        unseen.discard(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if v in unseen:
                    unseen.discard(v)
                    comp.append(v)
                    queue.append(v)
        if len(comp) > len(best):
            best = comp
    best.sort()
    relabel = {u: i for i, u in enumerate(best)}
    keep = set(best)
    edges = [(relabel[u], relabel[v]) for u, v in g.edges() if u in keep and v in keep]
    return Graph(len(best), edges)


def bandwidth(g: Graph, pi: Ordering) -> int:
    """Max |rank(u) - rank(v)| over edges; 0 for edgeless graphs."""
    if len(pi) != g.node_count:
        raise DimensionError(f"ordering has {len(pi)} ranks for a graph with {g.node_count} nodes")
    rank = pi.rank
    width = 0
    for u, v in g.edges():
        d = int(abs(rank[u] - rank[v]))
        if d > width:
            width = d
    return width


def _require_connected(g: Graph, what: str) -> None:
    if not is_connected(g):
        raise ConnectivityError(f"{what} requires a connected graph")


def cuthill_mckee(
    g: Graph,
    rng: Optional[np.random.Generator] = None,
    start_policy: str = "deterministic",
    reverse: bool = False,
) -> Ordering:
    """Cuthill-McKee ordering for bandwidth reduction.

    BFS from a minimum-degree start node, appending unvisited neighbors
    of each visited node in ascending degree. With the deterministic
    policy, ties break by ascending node id and the start is the lowest-id
    minimum-degree node; with the sampled policy the start is uniform over
    minimum-degree nodes and ties are broken by a pre-shuffle followed by
    a stable sort on degree. ``reverse`` flips the visit order (RCM).
    """
    _require_connected(g, "cuthill_mckee")
    if start_policy not in ("deterministic", "sampled"):
        raise ValueError(f"unknown start_policy {start_policy!r}")
    sampled = start_policy == "sampled"
    if sampled and rng is None:
        rng = np.random.default_rng()

    degs = [g.degree(u) for u in range(g.node_count)]
    min_deg = min(degs)
    candidates = [u for u in range(g.node_count) if degs[u] == min_deg]
    start = int(rng.choice(candidates)) if sampled else candidates[0]

    visited = bytearray(g.node_count)
    visited[start] = 1
    order = [start]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        fresh = [v for v in g.adjacency[u] if not visited[v]]
        if sampled and len(fresh) > 1:
            fresh = [fresh[i] for i in rng.permutation(len(fresh))]
        fresh.sort(key=lambda v: degs[v])  # stable: pre-shuffle decides ties
        for v in fresh:
            visited[v] = 1
            order.append(v)
    if reverse:
        order.reverse()
    return Ordering.from_visit_order(order)


def bfs_ordering(
    g: Graph, rng: Optional[np.random.Generator] = None, start: Optional[int] = None
) -> Ordering:
    """Breadth-first visit order from a random start; neighbor ties by ascending id."""
    _require_connected(g, "bfs_ordering")
    if start is None:
        start = int((rng or np.random.default_rng()).integers(g.node_count))
    visited = bytearray(g.node_count)
    visited[start] = 1
    order = [start]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in g.adjacency[u]:  # adjacency is sorted by id
            if not visited[v]:
                visited[v] = 1
                order.append(v)
    return Ordering.from_visit_order(order)


def dfs_ordering(
    g: Graph, rng: Optional[np.random.Generator] = None, start: Optional[int] = None
) -> Ordering:
    """Depth-first visit order from a random start; neighbor ties by ascending id."""
    _require_connected(g, "dfs_ordering")
    if start is None:
        start = int((rng or np.random.default_rng()).integers(g.node_count))
    visited = bytearray(g.node_count)
    order: list[int] = []
    stack = [start]
    while stack:
        u = stack.pop()
        if visited[u]:
            continue
        visited[u] = 1
        order.append(u)
        # push in reverse so the lowest-id unvisited neighbor is expanded first
        for v in reversed(g.adjacency[u]):
            if not visited[v]:
                stack.append(v)
    return Ordering.from_visit_order(order)


def random_ordering(g: Graph, rng: Optional[np.random.Generator] = None) -> Ordering:
    """Uniformly random permutation of ranks; defined for any graph."""
    rng = rng or np.random.default_rng()
    return Ordering.from_rank(rng.permutation(g.node_count) + 1)


ORDERING_FAMILIES = ("cm", "bfs", "dfs", "random")


def make_ordering(g: Graph, family: str, rng: Optional[np.random.Generator] = None) -> Ordering:
    """Dispatch by family name: cm | bfs | dfs | random | identity.

    ``cm`` samples its start and tie-breaks when an rng is given and is
    deterministic otherwise.
    """
    if family == "cm":
        policy = "sampled" if rng is not None else "deterministic"
        return cuthill_mckee(g, rng=rng, start_policy=policy)
    if family == "bfs":
        return bfs_ordering(g, rng=rng)
    if family == "dfs":
        return dfs_ordering(g, rng=rng)
    if family == "random":
        return random_ordering(g, rng=rng)
    if family == "identity":
        return Ordering.identity(g.node_count)
    raise ValueError(f"unknown ordering family {family!r}")


def apply_ordering(g: Graph, pi: Ordering) -> Graph:
    """Relabeled copy in which the node holding rank r becomes node r-1."""
    if len(pi) != g.node_count:
        raise DimensionError(f"ordering has {len(pi)} ranks for a graph with {g.node_count} nodes")
    rank = pi.rank
    return Graph(g.node_count, [(int(rank[u]) - 1, int(rank[v]) - 1) for u, v in g.edges()])
