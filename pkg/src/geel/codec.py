"""Lossless graph <-> gap-pair sequence <-> token id codecs.

The pipeline is graph -> sorted edge list -> gap pairs -> token ids and
back. Ranks are 1-based; the sentinel source preceding the first edge is
rank 0, so the first inter-edge gap of a connected graph is always 1.
Also houses the alternative tokenizations used by the representation
ablation (flattened adjacency, raw edge list, intra-gap edge list).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConnectivityError,
    DecodeError,
    DimensionError,
    OrderingError,
    VocabularyError,
)
from .graph import Graph, Ordering, is_connected

Pair = Tuple[int, int]


@dataclass(frozen=True)
class EdgeList:
    """Lexicographically sorted (source, target) pairs with 1 <= s < t <= N."""

    pairs: Tuple[Pair, ...]
    node_count: int

    def __post_init__(self):
        prev = (0, 0)
        for i, (s, t) in enumerate(self.pairs):
            if not (1 <= s < t <= self.node_count):
                raise OrderingError(f"pair {i}: ({s},{t}) violates 1 <= s < t <= N")
            if (s, t) <= prev:
                raise OrderingError(f"pair {i}: ({s},{t}) breaks lexicographic order")
            prev = (s, t)


@dataclass(frozen=True)
class GeelSequence:
    """Gap-encoded edge list: (inter-edge gap a, intra-edge gap b) per edge.

    ``node_count`` is carried through from the encoder when known; decoded
    model output leaves it None and the node count is inferred as the
    largest recovered target.
    """

    pairs: Tuple[Pair, ...]
    node_count: Optional[int] = None

    def __len__(self) -> int:
        return len(self.pairs)

    def max_gap(self) -> int:
        """Largest gap value appearing in either slot (0 when empty)."""
        return max((max(a, b) for a, b in self.pairs), default=0)


def to_edge_list(g: Graph, pi: Ordering) -> EdgeList:
    """Each edge once as (min rank, max rank), sorted lexicographically."""
    if not is_connected(g):
        raise ConnectivityError("codec requires a connected graph")
    if len(pi) != g.node_count:
        raise DimensionError(f"ordering has {len(pi)} ranks for a graph with {g.node_count} nodes")
    rank = pi.rank
    pairs = []
    for u, v in g.edges():
        ru, rv = int(rank[u]), int(rank[v])
        pairs.append((ru, rv) if ru < rv else (rv, ru))
    pairs.sort()
    return EdgeList(pairs=tuple(pairs), node_count=g.node_count)


def gap_encode(el: EdgeList) -> GeelSequence:
    """a_m = s_m - s_{m-1} with s_0 = 0; b_m = t_m - s_m."""
    if not el.pairs:
        raise OrderingError("cannot gap-encode an empty edge list")
    pairs = []
    prev_s = 0
    for s, t in el.pairs:
        pairs.append((s - prev_s, t - s))
        prev_s = s
    return GeelSequence(pairs=tuple(pairs), node_count=el.node_count)


def gap_decode(gs: GeelSequence) -> EdgeList:
    """Exact inverse of gap_encode; strict about every validity rule.

    Rejects (with the offending index) any pair whose recovery breaks
    s < t, t <= N, lexicographic sortedness, or edge uniqueness.
    """
    if not gs.pairs:
        raise DecodeError("empty gap sequence")
    n_bound = gs.node_count
    pairs: List[Pair] = []
    s = 0
    prev = (0, 0)
    for i, (a, b) in enumerate(gs.pairs):
        if a < 0:
            raise DecodeError(f"negative inter-edge gap {a}", index=i)
        if b <= 0:
            raise DecodeError(f"non-positive intra-edge gap {b}", index=i)
        s += a
        t = s + b
        if s < 1:
            raise DecodeError("source rank below 1", index=i)
        if n_bound is not None and t > n_bound:
            raise DecodeError(f"target rank {t} exceeds node count {n_bound}", index=i)
        if (s, t) == prev:
            raise DecodeError(f"duplicate edge ({s},{t})", index=i)
        if (s, t) < prev:
            raise DecodeError(f"pair ({s},{t}) breaks sortedness", index=i)
        pairs.append((s, t))
        prev = (s, t)
    node_count = n_bound if n_bound is not None else max(t for _, t in pairs)
    return EdgeList(pairs=tuple(pairs), node_count=node_count)


def geel_to_graph(gs: GeelSequence) -> Graph:
    """Decode and materialize the adjacency structure."""
    el = gap_decode(gs)
    return Graph(el.node_count, [(s - 1, t - 1) for s, t in el.pairs])


def encode_graph(g: Graph, pi: Ordering) -> GeelSequence:
    """Convenience composition: to_edge_list then gap_encode."""
    return gap_encode(to_edge_list(g, pi))


class Vocabulary:
    """Dense token ids for every gap pair in the rectangle {0..B} x {1..B}.

    Ids 0 and 1 are BOS and EOS; pair (a, b) maps to 2 + a*B + (b-1).
    The rectangle covers all pairs under the gap bound, not only observed
    ones, so a model can emit any pair the bound admits. ``square_bound``
    is the conventional B*B headline figure reported next to the exact
    rectangle size.
    """

    BOS = 0
    EOS = 1

    def __init__(self, gap_bound: int):
        if gap_bound < 1:
            raise VocabularyError("gap bound must be at least 1")
        self.gap_bound = gap_bound

    @property
    def pair_token_count(self) -> int:
        return self.gap_bound * (self.gap_bound + 1)

    @property
    def size(self) -> int:
        return self.pair_token_count + 2

    @property
    def square_bound(self) -> int:
        return self.gap_bound * self.gap_bound

    def contains(self, pair: Pair) -> bool:
        a, b = pair
        return 0 <= a <= self.gap_bound and 1 <= b <= self.gap_bound

    def id_of(self, pair: Pair) -> int:
        if not self.contains(pair):
            raise VocabularyError(f"pair {pair} outside rectangle of bound {self.gap_bound}")
        a, b = pair
        return 2 + a * self.gap_bound + (b - 1)

    def pair_of(self, token_id: int) -> Pair:
        if not (2 <= token_id < self.size):
            raise VocabularyError(f"id {token_id} is not a pair token")
        a, rem = divmod(token_id - 2, self.gap_bound)
        return (a, rem + 1)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.gap_bound == other.gap_bound

    def __repr__(self) -> str:
        return f"Vocabulary(gap_bound={self.gap_bound}, size={self.size})"


def build_vocabulary(corpus: Iterable[GeelSequence]) -> Vocabulary:
    """Gap bound = max over the corpus of max(a, b); full rectangle enumerated."""
    bound = 0
    empty = True
    for gs in corpus:
        empty = False
        bound = max(bound, gs.max_gap())
    if empty:
        raise VocabularyError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(max(bound, 1))


def tokenize(gs: GeelSequence, v: Vocabulary) -> List[int]:
    """BOS + pair ids + EOS."""
    return [v.BOS] + [v.id_of(p) for p in gs.pairs] + [v.EOS]


def detokenize(ids: Sequence[int], v: Vocabulary) -> GeelSequence:
    """Strip sentinels and map ids back to pairs; strict about placement."""
    if len(ids) < 2 or ids[0] != v.BOS or ids[-1] != v.EOS:
        raise VocabularyError("token stream must be BOS ... EOS")
    pairs = []
    for i in ids[1:-1]:
        if i in (v.BOS, v.EOS):
            raise VocabularyError("sentinel token inside the stream")
        pairs.append(v.pair_of(i))
    return GeelSequence(pairs=tuple(pairs))


def source_ranks(gs: GeelSequence) -> List[int]:
    """Prefix sums of the inter-edge gaps: the source rank of each edge."""
    return np.cumsum([a for a, _ in gs.pairs]).tolist()


# ---------------------------------------------------------------------------
# Alternative tokenizations for the representation ablation.
# ---------------------------------------------------------------------------


def flatten_adjacency(g: Graph, pi: Ordering) -> np.ndarray:
    """Upper triangle of the reordered adjacency matrix, row-major, as bits."""
    relabeled_rank = pi.rank
    n = g.node_count
    mat = np.zeros((n, n), dtype=np.uint8)
    for u, v in g.edges():
        i, j = int(relabeled_rank[u]) - 1, int(relabeled_rank[v]) - 1
        mat[i, j] = 1
        mat[j, i] = 1
    return mat[np.triu_indices(n, k=1)]


def unflatten_adjacency(bits: Sequence[int]) -> Graph:
    """Inverse of flatten_adjacency; the bit count must be triangular."""
    bits = np.asarray(bits, dtype=np.uint8)
    # len == n(n-1)/2  =>  n = (1 + sqrt(1+8len)) / 2
    n = int(round((1 + np.sqrt(1 + 8 * len(bits))) / 2))
    if n * (n - 1) // 2 != len(bits):
        raise DecodeError(f"bit count {len(bits)} is not a triangular number")
    rows, cols = np.triu_indices(n, k=1)
    edges = [(int(i), int(j)) for i, j, bit in zip(rows, cols, bits) if bit]
    return Graph(n, edges)


RAW_EDGE_LIST = "raw_edge_list"
INTRA_GAP = "intra_gap"


class PairGridVocabulary:
    """Dense ids over a fixed (first, second) integer grid plus BOS/EOS.

    Backs the ablation tokenizations: raw edge list pairs (s, t) over an
    N x N grid, and intra-gap pairs (s, b) over an N x B grid. First
    components run 1..first_bound, second components 1..second_bound.
    """

    BOS = 0
    EOS = 1

    def __init__(self, first_bound: int, second_bound: int):
        if first_bound < 1 or second_bound < 1:
            raise VocabularyError("grid bounds must be at least 1")
        self.first_bound = first_bound
        self.second_bound = second_bound

    @property
    def size(self) -> int:
        return self.first_bound * self.second_bound + 2

    def id_of(self, pair: Pair) -> int:
        x, y = pair
        if not (1 <= x <= self.first_bound and 1 <= y <= self.second_bound):
            raise VocabularyError(f"pair {pair} outside {self.first_bound}x{self.second_bound} grid")
        return 2 + (x - 1) * self.second_bound + (y - 1)

    def pair_of(self, token_id: int) -> Pair:
        if not (2 <= token_id < self.size):
            raise VocabularyError(f"id {token_id} is not a pair token")
        x, rem = divmod(token_id - 2, self.second_bound)
        return (x + 1, rem + 1)


def raw_grid_vocabulary(node_count: int) -> PairGridVocabulary:
    """(s, t) grid for the raw edge list ablation: N*N pair tokens."""
    return PairGridVocabulary(node_count, node_count)


def intra_gap_vocabulary(node_count: int, gap_bound: Optional[int] = None) -> PairGridVocabulary:
    """(s, b) grid for the intra-gap ablation: N*B pair tokens.

    ``gap_bound`` defaults to the loosest possible bound N-1.
    """
    return PairGridVocabulary(node_count, gap_bound or max(node_count - 1, 1))


def raw_edge_list_tokens(el: EdgeList, node_count: int) -> List[int]:
    """(s, t) pairs verbatim over the N x N grid, BOS/EOS wrapped."""
    v = raw_grid_vocabulary(node_count)
    return [v.BOS] + [v.id_of(p) for p in el.pairs] + [v.EOS]


def raw_edge_list_decode(ids: Sequence[int], v: PairGridVocabulary) -> EdgeList:
    pairs = []
    prev = (0, 0)
    for i, tid in enumerate(_strip_sentinels(ids, v)):
        s, t = v.pair_of(tid)
        if s >= t:
            raise DecodeError(f"pair ({s},{t}) violates s < t", index=i)
        if (s, t) == prev:
            raise DecodeError(f"duplicate edge ({s},{t})", index=i)
        if (s, t) < prev:
            raise DecodeError(f"pair ({s},{t}) breaks sortedness", index=i)
        pairs.append((s, t))
        prev = (s, t)
    return EdgeList(pairs=tuple(pairs), node_count=max(t for _, t in pairs))


def intra_gap_tokens(el: EdgeList, node_count: int, gap_bound: Optional[int] = None) -> List[int]:
    """(s, b) pairs with b = t - s over the N x B grid, BOS/EOS wrapped."""
    v = intra_gap_vocabulary(node_count, gap_bound)
    return [v.BOS] + [v.id_of((s, t - s)) for s, t in el.pairs] + [v.EOS]


def intra_gap_decode(ids: Sequence[int], v: PairGridVocabulary) -> EdgeList:
    pairs = []
    prev = (0, 0)
    for i, tid in enumerate(_strip_sentinels(ids, v)):
        s, b = v.pair_of(tid)
        t = s + b
        if (s, t) == prev:
            raise DecodeError(f"duplicate edge ({s},{t})", index=i)
        if (s, t) < prev:
            raise DecodeError(f"pair ({s},{t}) breaks sortedness", index=i)
        pairs.append((s, t))
        prev = (s, t)
    return EdgeList(pairs=tuple(pairs), node_count=max(t for _, t in pairs))


def _strip_sentinels(ids: Sequence[int], v) -> Sequence[int]:
    if len(ids) < 3 or ids[0] != v.BOS or ids[-1] != v.EOS:
        raise DecodeError("token stream must be BOS pair+ EOS")
    return ids[1:-1]
