"""Attributed-graph token streams and their transition grammar.

An attributed stream interleaves node-type tokens, gap-pair edge tuples,
and edge-type tokens. Every rank is announced by a node-type token before
its first tuple; ranks that never act as a source of a real edge carry a
dummy self-loop tuple (b = 0) instead, which takes no edge type. The
grammar below accepts exactly the decodable streams, and its per-state
mask powers constrained sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    AlphabetError,
    ConnectivityError,
    DimensionError,
    GrammarError,
    VocabularyError,
)
from .graph import Graph, Ordering, is_connected


@dataclass(frozen=True)
class TypeAlphabets:
    """Ordered node- and edge-type alphabets."""

    node_types: Tuple[str, ...]
    edge_types: Tuple[str, ...]

    def __post_init__(self):
        for label, types in (("node", self.node_types), ("edge", self.edge_types)):
            if not types:
                raise AlphabetError(f"{label} type alphabet is empty")
            if len(set(types)) != len(types):
                raise AlphabetError(f"duplicate {label} types in {types}")


@dataclass(frozen=True)
class NodeType:
    name: str


@dataclass(frozen=True)
class EdgeTuple:
    a: int
    b: int  # b == 0 marks a dummy self-loop

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise GrammarError(f"negative gap in tuple ({self.a},{self.b})")
        if self.b == 0 and self.a < 1:
            raise GrammarError("dummy self-loop must introduce a new source (a >= 1)")


@dataclass(frozen=True)
class EdgeType:
    name: str


@dataclass(frozen=True)
class Special:
    name: str


BOS = Special("BOS")
EOS = Special("EOS")

Token = Union[NodeType, EdgeTuple, EdgeType, Special]

START = "start"
AFTER_NODE_TYPE = "after_node_type"
AFTER_EDGE_TUPLE = "after_edge_tuple"
AFTER_SELFLOOP_TUPLE = "after_selfloop_tuple"
AFTER_EDGE_TYPE = "after_edge_type"
DONE = "done"


@dataclass(frozen=True)
class GrammarState:
    """Progress through an attributed stream.

    ``described`` counts node-type tokens so far; since sources advance
    contiguously it is also the highest typed rank. ``node_budget`` caps
    how many ranks may be described (None = unbounded).
    """

    kind: str = START
    source: int = 0
    described: int = 0
    last_target: int = 0
    max_target: int = 0
    emitted_edges: frozenset = frozenset()
    node_budget: Optional[int] = None

    @property
    def described_sources(self) -> frozenset:
        return frozenset(range(1, self.described + 1))


def step_state(state: GrammarState, token: Token) -> GrammarState:
    """Advance by one token, raising GrammarError on any rule violation."""
    kind = state.kind
    if kind == DONE:
        raise GrammarError("stream already finished", expected=())

    if isinstance(token, NodeType):
        if kind not in (START, AFTER_EDGE_TYPE, AFTER_SELFLOOP_TUPLE):
            raise GrammarError(f"node-type not allowed in state {kind}", expected=_expected(kind))
        if state.node_budget is not None and state.described >= state.node_budget:
            raise GrammarError(f"node budget {state.node_budget} exhausted")
        return replace(state, kind=AFTER_NODE_TYPE, described=state.described + 1)

    if isinstance(token, EdgeTuple):
        a, b = token.a, token.b
        if kind == AFTER_NODE_TYPE:
            needed = state.described - state.source
            if a != needed:
                raise GrammarError(
                    f"tuple after a node-type must advance to the typed rank (a={needed}, got {a})"
                )
            src = state.described
            if b == 0:
                return replace(state, kind=AFTER_SELFLOOP_TUPLE, source=src, last_target=0)
            return _emit_edge(state, src, src + b, AFTER_EDGE_TUPLE)
        if kind == AFTER_EDGE_TYPE:
            if a != 0:
                raise GrammarError("a new source needs its node-type first (a must be 0 here)")
            if b == 0:
                raise GrammarError("dummy self-loop cannot continue an existing source")
            return _emit_edge(state, state.source, state.source + b, AFTER_EDGE_TUPLE)
        raise GrammarError(f"edge-tuple not allowed in state {kind}", expected=_expected(kind))

    if isinstance(token, EdgeType):
        if kind != AFTER_EDGE_TUPLE:
            raise GrammarError(f"edge-type not allowed in state {kind}", expected=_expected(kind))
        return replace(state, kind=AFTER_EDGE_TYPE)

    if token == EOS:
        if kind not in (AFTER_EDGE_TYPE, AFTER_SELFLOOP_TUPLE):
            raise GrammarError(f"EOS not allowed in state {kind}", expected=_expected(kind))
        if state.max_target > state.described:
            raise GrammarError(
                f"EOS with rank {state.max_target} referenced but only {state.described} described"
            )
        return replace(state, kind=DONE)

    if token == BOS:
        raise GrammarError("BOS is only valid as the stream opener")
    raise GrammarError(f"unrecognized token {token!r}")


def _emit_edge(state: GrammarState, s: int, t: int, kind: str) -> GrammarState:
    if t <= state.last_target and s == state.source:
        raise GrammarError(f"edge ({s},{t}) breaks target order within source {s}")
    if (s, t) in state.emitted_edges:
        raise GrammarError(f"duplicate edge ({s},{t})")
    if state.node_budget is not None and t > state.node_budget:
        raise GrammarError(f"target {t} exceeds node budget {state.node_budget}")
    return replace(
        state,
        kind=kind,
        source=s,
        last_target=t,
        max_target=max(state.max_target, t),
        emitted_edges=state.emitted_edges | {(s, t)},
    )


def _expected(kind: str) -> Tuple[str, ...]:
    return {
        START: ("node-type",),
        AFTER_NODE_TYPE: ("edge-tuple",),
        AFTER_EDGE_TUPLE: ("edge-type",),
        AFTER_EDGE_TYPE: ("node-type", "edge-tuple", "EOS"),
        AFTER_SELFLOOP_TUPLE: ("node-type", "EOS"),
        DONE: (),
    }[kind]


class AttributedVocabulary:
    """Dense ids over node types, edge types, and the gap-pair grid.

    Layout: BOS, EOS, node types, edge types, real pairs {0..B}x{1..B},
    then dummy pairs {1..B}x{0}. ``split_token_figure`` is the count a
    split-gap tokenization (separate a- and b-tokens) would need, printed
    by the stats command for comparison with the joint-tuple count.
    """

    BOS = 0
    EOS = 1

    def __init__(self, alphabets: TypeAlphabets, gap_bound: int):
        if gap_bound < 1:
            raise VocabularyError("gap bound must be at least 1")
        self.alphabets = alphabets
        self.gap_bound = gap_bound
        self.node_type_offset = 2
        self.edge_type_offset = self.node_type_offset + len(alphabets.node_types)
        self.pair_offset = self.edge_type_offset + len(alphabets.edge_types)
        self.dummy_offset = self.pair_offset + gap_bound * (gap_bound + 1)
        self.size = self.dummy_offset + gap_bound
        self._node_index = {x: i for i, x in enumerate(alphabets.node_types)}
        self._edge_index = {e: i for i, e in enumerate(alphabets.edge_types)}

    @property
    def pair_token_count(self) -> int:
        return self.gap_bound * (self.gap_bound + 2)

    @property
    def split_token_figure(self) -> int:
        return 2 * self.gap_bound + len(self.alphabets.node_types) + len(self.alphabets.edge_types)

    def id_of(self, token: Token) -> int:
        if token == BOS:
            return self.BOS
        if token == EOS:
            return self.EOS
        if isinstance(token, NodeType):
            try:
                return self.node_type_offset + self._node_index[token.name]
            except KeyError:
                raise AlphabetError(f"node type {token.name!r} not in alphabet") from None
        if isinstance(token, EdgeType):
            try:
                return self.edge_type_offset + self._edge_index[token.name]
            except KeyError:
                raise AlphabetError(f"edge type {token.name!r} not in alphabet") from None
        if isinstance(token, EdgeTuple):
            a, b = token.a, token.b
            if b == 0:
                if not (1 <= a <= self.gap_bound):
                    raise VocabularyError(f"dummy tuple ({a},0) outside bound {self.gap_bound}")
                return self.dummy_offset + (a - 1)
            if not (0 <= a <= self.gap_bound and 1 <= b <= self.gap_bound):
                raise VocabularyError(f"tuple ({a},{b}) outside bound {self.gap_bound}")
            return self.pair_offset + a * self.gap_bound + (b - 1)
        raise VocabularyError(f"unrecognized token {token!r}")

    def token_of(self, token_id: int) -> Token:
        if token_id == self.BOS:
            return BOS
        if token_id == self.EOS:
            return EOS
        if self.node_type_offset <= token_id < self.edge_type_offset:
            return NodeType(self.alphabets.node_types[token_id - self.node_type_offset])
        if self.edge_type_offset <= token_id < self.pair_offset:
            return EdgeType(self.alphabets.edge_types[token_id - self.edge_type_offset])
        if self.pair_offset <= token_id < self.dummy_offset:
            a, rem = divmod(token_id - self.pair_offset, self.gap_bound)
            return EdgeTuple(a, rem + 1)
        if self.dummy_offset <= token_id < self.size:
            return EdgeTuple(token_id - self.dummy_offset + 1, 0)
        raise VocabularyError(f"id {token_id} out of range")


def allowed_next(state: GrammarState, v: AttributedVocabulary) -> np.ndarray:
    """Boolean mask over token ids whose emission keeps the stream valid."""
    kind = state.kind
    if kind == DONE:
        raise GrammarError("no continuations from the done state")
    mask = np.zeros(v.size, dtype=bool)
    budget = state.node_budget
    bound = v.gap_bound

    if kind in (START, AFTER_EDGE_TYPE, AFTER_SELFLOOP_TUPLE):
        if budget is None or state.described < budget:
            mask[v.node_type_offset : v.edge_type_offset] = True

    if kind == AFTER_NODE_TYPE:
        needed = state.described - state.source
        src = state.described
        if 1 <= needed <= bound:
            # dummy self-loop on the freshly typed rank
            mask[v.dummy_offset + needed - 1] = True
            # real tuples (needed, b): contiguous row in the pair block
            b_hi = bound if budget is None else min(bound, budget - src)
            if b_hi >= 1:
                row = v.pair_offset + needed * bound
                mask[row : row + b_hi] = True

    if kind == AFTER_EDGE_TYPE:
        # continue the same source: (0, b) with strictly increasing targets
        b_lo = state.last_target - state.source + 1
        b_hi = bound if budget is None else min(bound, budget - state.source)
        if b_lo <= b_hi:
            row = v.pair_offset
            mask[row + b_lo - 1 : row + b_hi] = True

    if kind in (AFTER_EDGE_TYPE, AFTER_SELFLOOP_TUPLE):
        if state.max_target <= state.described:
            mask[v.EOS] = True

    return mask


# ---------------------------------------------------------------------------
# Encoding / decoding whole graphs.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributedGraph:
    """Decoded stream: structure + node types in id order + type per edge."""

    graph: Graph
    node_types: Tuple[str, ...]
    edge_types: Dict[Tuple[int, int], str] = field(hash=False, default_factory=dict)


def encode_attributed(
    g: Graph,
    node_types: Sequence[str],
    edge_types: Mapping[Tuple[int, int], str],
    pi: Ordering,
) -> List[Token]:
    """Token stream for a connected typed graph under the given ordering.

    ``node_types[u]`` types node u; ``edge_types[(u, v)]`` with u < v types
    each edge. Ranks are walked in order; a rank that never sources a real
    edge gets a dummy self-loop so its node type still appears.
    """
    if not is_connected(g):
        raise ConnectivityError("attributed encoding requires a connected graph")
    if len(node_types) != g.node_count:
        raise DimensionError(f"{len(node_types)} node types for {g.node_count} nodes")
    if len(pi) != g.node_count:
        raise DimensionError(f"ordering has {len(pi)} ranks for a graph with {g.node_count} nodes")

    rank = pi.rank
    typed_edges = {}
    for u, v in g.edges():
        key = (u, v)
        if key not in edge_types:
            raise AlphabetError(f"edge ({u},{v}) has no type")
        s, t = sorted((int(rank[u]), int(rank[v])))
        typed_edges[(s, t)] = edge_types[key]

    by_source: Dict[int, List[int]] = {}
    for s, t in typed_edges:
        by_source.setdefault(s, []).append(t)

    tokens: List[Token] = [BOS]
    prev_source = 0
    for r in range(1, g.node_count + 1):
        tokens.append(NodeType(node_types[int(pi.inverse[r - 1])]))
        targets = sorted(by_source.get(r, ()))
        if not targets:
            tokens.append(EdgeTuple(r - prev_source, 0))
        else:
            for t in targets:
                tokens.append(EdgeTuple(r - prev_source, t - r))
                tokens.append(EdgeType(typed_edges[(r, t)]))
                prev_source = r
        prev_source = r
    tokens.append(EOS)
    return tokens


def decode_attributed(tokens: Sequence[Token], node_budget: Optional[int] = None) -> AttributedGraph:
    """Replay a stream through the grammar and rebuild the typed graph."""
    if not tokens or tokens[0] != BOS:
        raise GrammarError("stream must start with BOS", position=0)
    state = GrammarState(node_budget=node_budget)
    node_types: List[str] = []
    edge_types: Dict[Tuple[int, int], str] = {}
    pending_edge: Optional[Tuple[int, int]] = None
    for pos, token in enumerate(tokens[1:], start=1):
        try:
            new_state = step_state(state, token)
        except GrammarError as err:
            raise GrammarError(str(err), position=pos, expected=_expected(state.kind)) from None
        if isinstance(token, NodeType):
            node_types.append(token.name)
        elif isinstance(token, EdgeTuple) and token.b > 0:
            pending_edge = (new_state.source, new_state.last_target)
        elif isinstance(token, EdgeType):
            edge_types[(pending_edge[0] - 1, pending_edge[1] - 1)] = token.name
            pending_edge = None
        state = new_state
    if state.kind != DONE:
        raise GrammarError("stream ended before EOS", position=len(tokens))
    graph = Graph(len(node_types), list(edge_types.keys()))
    return AttributedGraph(graph=graph, node_types=tuple(node_types), edge_types=edge_types)


def build_attributed_vocabulary(
    streams: Iterable[Sequence[Token]], alphabets: TypeAlphabets
) -> AttributedVocabulary:
    """Gap bound = max gap in any tuple over the corpus of encoded streams."""
    bound = 0
    for stream in streams:
        for token in stream:
            if isinstance(token, EdgeTuple):
                bound = max(bound, token.a, token.b)
    return AttributedVocabulary(alphabets, max(bound, 1))


def tokenize_attributed(tokens: Sequence[Token], v: AttributedVocabulary) -> List[int]:
    return [v.id_of(t) for t in tokens]


def detokenize_attributed(ids: Sequence[int], v: AttributedVocabulary) -> List[Token]:
    return [v.token_of(i) for i in ids]


def source_prefix_attributed(tokens: Sequence[Token]) -> List[int]:
    """Running source rank per token (tuples advance it by their a)."""
    prefix = []
    source = 0
    for token in tokens:
        if isinstance(token, EdgeTuple):
            source += token.a
        prefix.append(source)
    return prefix
