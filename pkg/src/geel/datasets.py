"""Synthetic benchmark-style graph families and JSONL persistence.

File format: first line is a header object
``{"format": "geel-graphs", "version": 1, "node_types": [...], "edge_types": [...]}``
(alphabets optional), followed by one record per line. Node ids in files
are 0-based; the codec shifts to 1-based ranks internally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import attributed as attr
from . import codec
from .errors import GenerationError, ParseError
from .graph import Graph, cuthill_mckee, is_connected, make_ordering

FILE_FORMAT = "geel-graphs"
FILE_VERSION = 1


@dataclass
class GraphRecord:
    node_count: int
    edges: List[Tuple[int, int]]
    node_types: Optional[List[str]] = None
    edge_types: Optional[List[str]] = None  # parallel to edges
    name: Optional[str] = None

    def to_graph(self) -> Graph:
        return Graph(self.node_count, self.edges)

    def edge_type_map(self) -> Dict[Tuple[int, int], str]:
        if self.edge_types is None:
            return {}
        return {edge: t for edge, t in zip(self.edges, self.edge_types)}

    @classmethod
    def from_graph(cls, g: Graph, name: Optional[str] = None) -> "GraphRecord":
        return cls(node_count=g.node_count, edges=g.edges(), name=name)

    def canonicalized(self) -> "GraphRecord":
        """Sorted (min, max) edges with types carried along."""
        keyed = []
        for i, (u, v) in enumerate(self.edges):
            e = (u, v) if u < v else (v, u)
            keyed.append((e, self.edge_types[i] if self.edge_types else None))
        keyed.sort(key=lambda item: item[0])
        return GraphRecord(
            node_count=self.node_count,
            edges=[e for e, _ in keyed],
            node_types=list(self.node_types) if self.node_types else None,
            edge_types=[t for _, t in keyed] if self.edge_types else None,
            name=self.name,
        )


# ---------------------------------------------------------------------------
# Generators.
# ---------------------------------------------------------------------------


def gen_grid(p: int, q: int) -> Graph:
    """p x q lattice; M = p(q-1) + q(p-1)."""
    if p < 2 or q < 2:
        raise ValueError("grid dimensions must be at least 2")
    edges = []
    for i in range(p):
        for j in range(q):
            u = i * q + j
            if j + 1 < q:
                edges.append((u, u + 1))
            if i + 1 < p:
                edges.append((u, u + q))
    return Graph(p * q, edges)


def gen_lobster(expected_backbone: int, p1: float, p2: float, rng: np.random.Generator) -> Graph:
    """Random lobster: a backbone path plus geometric cascades of leaves.

    Backbone length is uniform-ish around ``expected_backbone`` (the
    classical construction); each backbone node grows first-level leaves
    while a p1 coin keeps coming up, and each such leaf grows second-level
    leaves under p2. Connected by construction.
    """
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
        raise ValueError("leaf probabilities must be in [0, 1]")
    backbone = max(1, int(2 * expected_backbone * rng.random() + 0.5))
    edges = [(i, i + 1) for i in range(backbone - 1)]
    next_node = backbone
    for node in range(backbone):
        while p1 > 0.0 and rng.random() < p1:
            leaf = next_node
            next_node += 1
            edges.append((node, leaf))
            while p2 > 0.0 and rng.random() < p2:
                edges.append((leaf, next_node))
                next_node += 1
    return Graph(next_node if next_node > 0 else 1, edges)


def gen_community(
    n1: int,
    n2: int,
    p_intra: float,
    inter_edge_frac: float,
    rng: np.random.Generator,
    max_attempts: int = 1000,
) -> Graph:
    """Two Erdos-Renyi blocks joined by random cross edges; resampled until connected."""
    if n1 < 2 or n2 < 2:
        raise ValueError("community sizes must be at least 2")
    n = n1 + n2
    n_cross = max(1, math.ceil(inter_edge_frac * n))
    for _ in range(max_attempts):
        edges = []
        for block_lo, block_n in ((0, n1), (n1, n2)):
            for i in range(block_n):
                for j in range(i + 1, block_n):
                    if rng.random() < p_intra:
                        edges.append((block_lo + i, block_lo + j))
        cross = {(int(rng.integers(n1)), int(n1 + rng.integers(n2))) for _ in range(n_cross)}
        edges.extend(cross)
        g = Graph(n, edges)
        if is_connected(g):
            return g
    raise GenerationError(f"no connected community graph within {max_attempts} attempts")


def random_connected_graph(n: int, extra_edge_prob: float, rng: np.random.Generator) -> Graph:
    """Uniform random spanning tree plus independent extra edges.

    Handy corpus for fuzzing the codec: always connected, arbitrary shape.
    """
    if n < 1:
        raise ValueError("need at least one node")
    edges = set()
    perm = rng.permutation(n)
    for k in range(1, n):
        u = int(perm[k])
        v = int(perm[int(rng.integers(k))])
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, v))
    return Graph(n, sorted(edges))


# ---------------------------------------------------------------------------
# Persistence.
# ---------------------------------------------------------------------------


def save_graphs(
    records: Sequence[GraphRecord],
    path: str,
    node_types: Optional[Sequence[str]] = None,
    edge_types: Optional[Sequence[str]] = None,
) -> None:
    """Canonical JSONL: sorted keys, sorted edges, compact separators."""
    header: dict = {"format": FILE_FORMAT, "version": FILE_VERSION}
    if node_types is not None:
        header["node_types"] = list(node_types)
    if edge_types is not None:
        header["edge_types"] = list(edge_types)
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        for rec in records:
            rec = rec.canonicalized()
            obj: dict = {"node_count": rec.node_count, "edges": [list(e) for e in rec.edges]}
            if rec.node_types is not None:
                obj["node_types"] = rec.node_types
            if rec.edge_types is not None:
                obj["edge_types"] = rec.edge_types
            if rec.name is not None:
                obj["name"] = rec.name
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


@dataclass
class GraphFile:
    records: List[GraphRecord]
    node_types: Optional[List[str]] = None
    edge_types: Optional[List[str]] = None

    @property
    def attributed(self) -> bool:
        return self.node_types is not None and self.edge_types is not None

    def alphabets(self) -> attr.TypeAlphabets:
        if not self.attributed:
            raise ParseError("file declares no type alphabets")
        return attr.TypeAlphabets(tuple(self.node_types), tuple(self.edge_types))


def load_graphs(path: str) -> GraphFile:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = _parse_json(lines[0], 1)
    if header.get("format") != FILE_FORMAT:
        raise ParseError(f"unexpected format {header.get('format')!r}", line=1)
    if header.get("version", 0) > FILE_VERSION:
        raise ParseError(f"file version {header.get('version')} is newer than supported", line=1)
    node_alpha = header.get("node_types")
    edge_alpha = header.get("edge_types")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        obj = _parse_json(line, lineno)
        records.append(_parse_record(obj, lineno, node_alpha, edge_alpha))
    return GraphFile(records=records, node_types=node_alpha, edge_types=edge_alpha)


def _parse_json(line: str, lineno: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as err:
        raise ParseError(f"malformed JSON: {err.msg}", line=lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", line=lineno)
    return obj


def _parse_record(
    obj: dict, lineno: int, node_alpha: Optional[List[str]], edge_alpha: Optional[List[str]]
) -> GraphRecord:
    try:
        n = int(obj["node_count"])
        raw_edges = obj["edges"]
    except (KeyError, TypeError, ValueError):
        raise ParseError("record needs node_count and edges", line=lineno) from None
    edges = []
    for e in raw_edges:
        if not (isinstance(e, list) and len(e) == 2):
            raise ParseError(f"bad edge entry {e!r}", line=lineno)
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise ParseError(f"self-loop edge [{u},{v}]", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge [{u},{v}] out of range for node_count {n}", line=lineno)
        edges.append((u, v))
    node_types = obj.get("node_types")
    if node_types is not None:
        if node_alpha is None:
            raise ParseError("typed record in a file without declared node_types", line=lineno)
        if len(node_types) != n:
            raise ParseError(f"{len(node_types)} node types for {n} nodes", line=lineno)
        for t in node_types:
            if t not in node_alpha:
                raise ParseError(f"undeclared node type {t!r}", line=lineno)
    edge_types = obj.get("edge_types")
    if edge_types is not None:
        if edge_alpha is None:
            raise ParseError("typed record in a file without declared edge_types", line=lineno)
        if len(edge_types) != len(edges):
            raise ParseError(f"{len(edge_types)} edge types for {len(edges)} edges", line=lineno)
        for t in edge_types:
            if t not in edge_alpha:
                raise ParseError(f"undeclared edge type {t!r}", line=lineno)
    return GraphRecord(
        node_count=n,
        edges=edges,
        node_types=node_types,
        edge_types=edge_types,
        name=obj.get("name"),
    )


def split(
    records: Sequence[GraphRecord], train_frac: float, rng: np.random.Generator
) -> Tuple[List[GraphRecord], List[GraphRecord]]:
    """Seeded shuffle then partition into (train, test)."""
    if not (0.0 < train_frac < 1.0):
        raise ValueError("train_frac must be strictly between 0 and 1")
    order = rng.permutation(len(records))
    cut = int(round(train_frac * len(records)))
    train = [records[int(i)] for i in order[:cut]]
    test = [records[int(i)] for i in order[cut:]]
    return train, test


# ---------------------------------------------------------------------------
# Corpus statistics.
# ---------------------------------------------------------------------------


@dataclass
class CorpusStats:
    graph_count: int
    node_range: Tuple[int, int]
    edge_range: Tuple[int, int]
    max_bandwidth: int
    vocab_square: int  # conventional B*B headline figure
    vocab_exact: int  # B(B+1) pairs + BOS/EOS
    representation_size: int  # max M over the corpus
    adjacency_size: int  # max N squared, for comparison
    max_plain_length: int
    max_attributed_length: int
    ordering: str
    exceptions: List[Tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "graph_count": self.graph_count,
            "node_range": list(self.node_range),
            "edge_range": list(self.edge_range),
            "max_bandwidth": self.max_bandwidth,
            "vocab_square": self.vocab_square,
            "vocab_exact": self.vocab_exact,
            "representation_size": self.representation_size,
            "adjacency_size": self.adjacency_size,
            "max_plain_length": self.max_plain_length,
            "max_attributed_length": self.max_attributed_length,
            "ordering": self.ordering,
            "exceptions": [list(e) for e in self.exceptions],
        }


def corpus_stats(
    records: Sequence[GraphRecord],
    ordering: str = "cm",
    rng: Optional[np.random.Generator] = None,
) -> CorpusStats:
    """Bandwidth/vocabulary/representation accounting over a corpus.

    Disconnected graphs cannot be encoded and are listed in
    ``exceptions`` instead of contributing to the figures.
    """
    max_b = 0
    n_lo, n_hi = None, 0
    m_lo, m_hi = None, 0
    max_attr_len = 0
    exceptions = []
    counted = 0
    for idx, rec in enumerate(records):
        g = rec.to_graph()
        if not is_connected(g):
            exceptions.append((idx, "disconnected"))
            continue
        counted += 1
        pi = (
            cuthill_mckee(g)
            if ordering == "cm" and rng is None
            else make_ordering(g, ordering, rng)
        )
        gs = codec.encode_graph(g, pi)
        max_b = max(max_b, gs.max_gap())
        n_lo = g.node_count if n_lo is None else min(n_lo, g.node_count)
        n_hi = max(n_hi, g.node_count)
        m_lo = g.edge_count if m_lo is None else min(m_lo, g.edge_count)
        m_hi = max(m_hi, g.edge_count)
        # attributed stream: a node type per rank, tuple+type per real edge,
        # one dummy tuple per rank that never sources an edge
        sources = {s for s, _ in codec.gap_decode(gs).pairs}
        dummies = g.node_count - len(sources)
        max_attr_len = max(max_attr_len, g.node_count + 2 * g.edge_count + dummies)
    if counted == 0:
        raise GenerationError("no connected graphs in the corpus")
    return CorpusStats(
        graph_count=len(records),
        node_range=(n_lo, n_hi),
        edge_range=(m_lo, m_hi),
        max_bandwidth=max_b,
        vocab_square=max_b * max_b,
        vocab_exact=max_b * (max_b + 1) + 2,
        representation_size=m_hi,
        adjacency_size=n_hi * n_hi,
        max_plain_length=m_hi,
        max_attributed_length=max_attr_len,
        ordering=ordering,
        exceptions=exceptions,
    )
