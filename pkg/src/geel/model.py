"""Autoregressive next-token model over gap-pair token streams.

A stacked LSTM in plain numpy (float64): token embedding plus a learned
positional embedding of the running source rank, gate recurrences, softmax
output, and hand-written backpropagation through time. No autodiff
framework is involved; gradients are checked against finite differences
in the test suite.
"""

from __future__ import annotations

import json
import struct
import time
import zlib
from dataclasses import dataclass, asdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import attributed as attr
from . import codec
from .errors import (
    CapacityError,
    CheckpointError,
    DimensionError,
    NumericError,
    VocabularyError,
)
from .graph import Graph, make_ordering

CHECKPOINT_MAGIC = b"GEEL"
CHECKPOINT_VERSION = 1


@dataclass
class ModelConfig:
    vocab_size: int
    embed_dim: int = 512
    num_layers: int = 3
    input_dropout: float = 0.1
    max_nodes: int = 128
    mode: str = "plain"  # plain | attributed | grid
    use_positional: bool = True
    grad_clip: Optional[float] = None  # global-norm clip; off by default
    max_seq_len: Optional[int] = None  # training truncation; off by default

    def __post_init__(self):
        if self.embed_dim <= 0:
            raise ValueError("embed_dim must be positive")
        if not (0.0 <= self.input_dropout < 1.0):
            raise ValueError("input_dropout must be in [0, 1)")
        if self.vocab_size < 3:
            raise ValueError("vocab_size must cover BOS, EOS, and one pair")


class Parameters:
    """All weight tensors, in the order they are serialized."""

    def __init__(
        self,
        token_embedding: np.ndarray,
        positional_embedding: np.ndarray,
        layer_wx: List[np.ndarray],
        layer_wh: List[np.ndarray],
        layer_bias: List[np.ndarray],
        out_weight: np.ndarray,
        out_bias: np.ndarray,
    ):
        self.token_embedding = token_embedding
        self.positional_embedding = positional_embedding
        self.layer_wx = layer_wx
        self.layer_wh = layer_wh
        self.layer_bias = layer_bias
        self.out_weight = out_weight
        self.out_bias = out_bias

    @classmethod
    def initialize(cls, config: ModelConfig, rng: np.random.Generator) -> "Parameters":
        """Uniform +-1/sqrt(fan_in) weights, zero biases."""
        d = config.embed_dim

        def uniform(shape, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        layer_wx, layer_wh, layer_bias = [], [], []
        for _ in range(config.num_layers):
            layer_wx.append(uniform((d, 4 * d), d))
            layer_wh.append(uniform((d, 4 * d), d))
            layer_bias.append(np.zeros(4 * d))
        positional = uniform((config.max_nodes + 1, d), d)
        if not config.use_positional:
            positional = np.zeros_like(positional)
        return cls(
            token_embedding=uniform((config.vocab_size, d), d),
            positional_embedding=positional,
            layer_wx=layer_wx,
            layer_wh=layer_wh,
            layer_bias=layer_bias,
            out_weight=uniform((d, config.vocab_size), d),
            out_bias=np.zeros(config.vocab_size),
        )

    def named_tensors(self) -> List[Tuple[str, np.ndarray]]:
        """Serialization order: embeddings, per-layer gates, output head."""
        named = [
            ("token_embedding", self.token_embedding),
            ("positional_embedding", self.positional_embedding),
        ]
        for l in range(len(self.layer_wx)):
            named.append((f"layer{l}_wx", self.layer_wx[l]))
            named.append((f"layer{l}_wh", self.layer_wh[l]))
            named.append((f"layer{l}_bias", self.layer_bias[l]))
        named.append(("out_weight", self.out_weight))
        named.append(("out_bias", self.out_bias))
        return named

    def zeros_like(self) -> Dict[str, np.ndarray]:
        return {name: np.zeros_like(t) for name, t in self.named_tensors()}

    def copy(self) -> "Parameters":
        return Parameters(
            self.token_embedding.copy(),
            self.positional_embedding.copy(),
            [w.copy() for w in self.layer_wx],
            [w.copy() for w in self.layer_wh],
            [b.copy() for b in self.layer_bias],
            self.out_weight.copy(),
            self.out_bias.copy(),
        )

    def apply_named(self, fn: Callable[[str, np.ndarray], None]) -> None:
        for name, t in self.named_tensors():
            fn(name, t)


# ---------------------------------------------------------------------------
# Forward / loss / backward.
# ---------------------------------------------------------------------------


@dataclass
class Batch:
    """Teacher-forcing batch: inputs shifted against targets, EOS-padded.

    ``mask`` is 1.0 for real target positions (up to and including the
    first EOS) and 0.0 for padding.
    """

    inputs: np.ndarray  # (B, T) token ids
    prefixes: np.ndarray  # (B, T) running source ranks
    targets: np.ndarray  # (B, T) token ids
    mask: np.ndarray  # (B, T) float64


def make_batch(sequences: Sequence[Tuple[Sequence[int], Sequence[int]]], eos_id: int) -> Batch:
    """Pad (token ids, source prefixes) pairs to a common length.

    Each sequence must be BOS ... EOS with a prefix value per token.
    """
    if not sequences:
        raise DimensionError("empty batch")
    lengths = [len(ids) - 1 for ids, _ in sequences]
    t_max = max(lengths)
    n = len(sequences)
    inputs = np.full((n, t_max), eos_id, dtype=np.int64)
    targets = np.full((n, t_max), eos_id, dtype=np.int64)
    prefixes = np.zeros((n, t_max), dtype=np.int64)
    mask = np.zeros((n, t_max))
    for k, (ids, pref) in enumerate(sequences):
        if len(ids) != len(pref):
            raise DimensionError("token and prefix lengths differ")
        t = lengths[k]
        inputs[k, :t] = ids[:-1]
        targets[k, :t] = ids[1:]
        prefixes[k, :t] = pref[:-1]
        prefixes[k, t:] = pref[-2] if len(pref) > 1 else pref[-1]
        mask[k, :t] = 1.0
    return Batch(inputs=inputs, prefixes=prefixes, targets=targets, mask=mask)


def embed(params: Parameters, config: ModelConfig, tokens: np.ndarray, prefixes: np.ndarray) -> np.ndarray:
    """Token embedding plus positional embedding of the source prefix sum."""
    tokens = np.asarray(tokens, dtype=np.int64)
    prefixes = np.asarray(prefixes, dtype=np.int64)
    if prefixes.max(initial=0) > config.max_nodes:
        raise CapacityError(
            f"source rank {int(prefixes.max())} exceeds positional capacity {config.max_nodes}"
        )
    x = params.token_embedding[tokens]
    if config.use_positional:
        x = x + params.positional_embedding[prefixes]
    return x


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _lstm_forward(params: Parameters, inputs: np.ndarray, collect_cache: bool):
    """Stacked LSTM over (B, T, D) inputs; returns top hidden states."""
    b, t_len, d = inputs.shape
    x = inputs
    cache = {"layers": []} if collect_cache else None
    for layer in range(len(params.layer_wx)):
        wx, wh, bias = params.layer_wx[layer], params.layer_wh[layer], params.layer_bias[layer]
        h = np.zeros((b, d))
        c = np.zeros((b, d))
        hs = np.empty((b, t_len, d))
        if collect_cache:
            gates = np.empty((b, t_len, 4 * d))
            cs = np.empty((b, t_len, d))
        pre = x @ wx + bias  # hoist the input projection out of the loop
        for t in range(t_len):
            z = pre[:, t] + h @ wh
            i = _sigmoid(z[:, :d])
            f = _sigmoid(z[:, d : 2 * d])
            g = np.tanh(z[:, 2 * d : 3 * d])
            o = _sigmoid(z[:, 3 * d :])
            c = f * c + i * g
            h = o * np.tanh(c)
            if not np.all(np.isfinite(h)):
                raise NumericError(f"non-finite hidden state at step {t}")
            hs[:, t] = h
            if collect_cache:
                gates[:, t, :d] = i
                gates[:, t, d : 2 * d] = f
                gates[:, t, 2 * d : 3 * d] = g
                gates[:, t, 3 * d :] = o
                cs[:, t] = c
        if collect_cache:
            cache["layers"].append({"x": x, "gates": gates, "c": cs, "h": hs})
        x = hs
    return x, cache


def forward(
    params: Parameters,
    config: ModelConfig,
    inputs: np.ndarray,
    dropout_mask: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Logits at every step for embedded inputs of shape (B, T, D)."""
    if dropout_mask is not None:
        inputs = inputs * dropout_mask
    top, _ = _lstm_forward(params, inputs, collect_cache=False)
    return top @ params.out_weight + params.out_bias


def loss(logits: np.ndarray, targets: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """Mean next-token cross-entropy over unmasked positions."""
    if logits.shape[:-1] != targets.shape:
        raise DimensionError(f"logits {logits.shape} do not match targets {targets.shape}")
    if mask is None:
        mask = np.ones(targets.shape)
    m = logits.max(axis=-1, keepdims=True)
    lse = m[..., 0] + np.log(np.exp(logits - m).sum(axis=-1))
    picked = np.take_along_axis(logits, targets[..., None], axis=-1)[..., 0]
    total = mask.sum()
    if total <= 0:
        raise DimensionError("loss mask selects no positions")
    return float(((lse - picked) * mask).sum() / total)


def backward(params: Parameters, config: ModelConfig, batch: Batch,
             dropout_mask: Optional[np.ndarray] = None) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean loss and its exact gradient for every parameter tensor."""
    if batch.inputs.shape[0] == 0:
        raise DimensionError("empty batch")
    x_embed = embed(params, config, batch.inputs, batch.prefixes)
    x_in = x_embed * dropout_mask if dropout_mask is not None else x_embed
    top, cache = _lstm_forward(params, x_in, collect_cache=True)
    logits = top @ params.out_weight + params.out_bias

    b, t_len, v = logits.shape
    m = logits.max(axis=-1, keepdims=True)
    ex = np.exp(logits - m)
    probs = ex / ex.sum(axis=-1, keepdims=True)
    lse = m[..., 0] + np.log(ex.sum(axis=-1))
    picked = np.take_along_axis(logits, batch.targets[..., None], axis=-1)[..., 0]
    total = batch.mask.sum()
    loss_value = float(((lse - picked) * batch.mask).sum() / total)

    dlogits = probs.copy()
    np.put_along_axis(
        dlogits,
        batch.targets[..., None],
        np.take_along_axis(dlogits, batch.targets[..., None], axis=-1) - 1.0,
        axis=-1,
    )
    dlogits *= (batch.mask / total)[..., None]

    grads = params.zeros_like()
    flat_top = top.reshape(-1, top.shape[-1])
    flat_dlogits = dlogits.reshape(-1, v)
    grads["out_weight"] += flat_top.T @ flat_dlogits
    grads["out_bias"] += flat_dlogits.sum(axis=0)
    d_hidden = dlogits @ params.out_weight.T  # (B, T, D)

    d = config.embed_dim
    for layer in range(len(params.layer_wx) - 1, -1, -1):
        lc = cache["layers"][layer]
        wx, wh = params.layer_wx[layer], params.layer_wh[layer]
        gates, cs, hs, xs = lc["gates"], lc["c"], lc["h"], lc["x"]
        g_wx = grads[f"layer{layer}_wx"]
        g_wh = grads[f"layer{layer}_wh"]
        g_b = grads[f"layer{layer}_bias"]
        dx = np.empty_like(xs)
        dh_next = np.zeros((b, d))
        dc_next = np.zeros((b, d))
        for t in range(t_len - 1, -1, -1):
            i = gates[:, t, :d]
            f = gates[:, t, d : 2 * d]
            g = gates[:, t, 2 * d : 3 * d]
            o = gates[:, t, 3 * d :]
            tc = np.tanh(cs[:, t])
            dh = d_hidden[:, t] + dh_next
            dc = dc_next + dh * o * (1.0 - tc * tc)
            c_prev = cs[:, t - 1] if t > 0 else np.zeros((b, d))
            dz = np.empty((b, 4 * d))
            dz[:, :d] = dc * g * i * (1.0 - i)
            dz[:, d : 2 * d] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * d : 3 * d] = dc * i * (1.0 - g * g)
            dz[:, 3 * d :] = dh * tc * o * (1.0 - o)
            h_prev = hs[:, t - 1] if t > 0 else np.zeros((b, d))
            g_wx += xs[:, t].T @ dz
            g_wh += h_prev.T @ dz
            g_b += dz.sum(axis=0)
            dx[:, t] = dz @ wx.T
            dh_next = dz @ wh.T
            dc_next = dc * f
        d_hidden = dx

    if dropout_mask is not None:
        d_hidden = d_hidden * dropout_mask
    flat_dx = d_hidden.reshape(-1, d)
    np.add.at(grads["token_embedding"], batch.inputs.ravel(), flat_dx)
    if config.use_positional:
        np.add.at(grads["positional_embedding"], batch.prefixes.ravel(), flat_dx)
    return loss_value, grads


# ---------------------------------------------------------------------------
# Optimizer and training loop.
# ---------------------------------------------------------------------------


@dataclass
class TrainState:
    step: int
    learning_rate: float
    batch_size: int
    seed: int
    first_moment: Dict[str, np.ndarray]
    second_moment: Dict[str, np.ndarray]
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initialize(cls, params: Parameters, learning_rate: float, batch_size: int, seed: int) -> "TrainState":
        return cls(
            step=0,
            learning_rate=learning_rate,
            batch_size=batch_size,
            seed=seed,
            first_moment=params.zeros_like(),
            second_moment=params.zeros_like(),
        )


def adam_step(state: TrainState, params: Parameters, grads: Dict[str, np.ndarray]) -> None:
    """Bias-corrected Adam update, in place."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.step
    correction2 = 1.0 - b2 ** state.step

    def update(name: str, tensor: np.ndarray) -> None:
        g = grads[name]
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        tensor -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.eps)

    params.apply_named(update)


def clip_gradients(grads: Dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients so the global L2 norm is at most max_norm."""
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm and total > 0:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total

Encoder = Callable[[object, np.random.Generator], Tuple[List[int], List[int]]]


def plain_encoder(vocab: codec.Vocabulary, ordering: str = "cm", resample: bool = True) -> Encoder:
    """Graph -> (token ids, source prefixes) under a per-call ordering.

    With ``resample`` a fresh ordering is drawn from the family every call;
    otherwise the deterministic member of the family is used.
    """

    def encode(g: Graph, rng: np.random.Generator):
        pi = make_ordering(g, ordering, rng if resample else None)
        gs = codec.encode_graph(g, pi)
        ids = codec.tokenize(gs, vocab)
        prefixes = [0] + codec.source_ranks(gs) + [0]
        prefixes[-1] = prefixes[-2]  # EOS keeps the final source rank
        return ids, prefixes

    return encode


def attributed_encoder(vocab: attr.AttributedVocabulary, ordering: str = "cm", resample: bool = True) -> Encoder:
    """(Graph, node_types, edge_types) -> ids and prefixes."""

    def encode(item, rng: np.random.Generator):
        g, node_types, edge_types = item
        pi = make_ordering(g, ordering, rng if resample else None)
        tokens = attr.encode_attributed(g, node_types, edge_types, pi)
        ids = attr.tokenize_attributed(tokens, vocab)
        prefixes = attr.source_prefix_attributed(tokens)
        return ids, prefixes

    return encode


def train_epoch(
    state: TrainState,
    params: Parameters,
    dataset: Sequence[object],
    config: ModelConfig,
    encoder: Encoder,
    rng: np.random.Generator,
    shuffle: bool = True,
) -> Tuple[float, int]:
    """One pass over the dataset with teacher forcing.

    Each item is re-encoded per step (a fresh ordering when the encoder
    samples one). Items whose encoding falls outside the vocabulary or
    positional capacity are skipped; returns (mean loss, skipped count).
    """
    order = rng.permutation(len(dataset)) if shuffle else np.arange(len(dataset))
    eos_id = 1  # all vocabularies reserve 0/1 for BOS/EOS
    total_loss = 0.0
    batches = 0
    skipped = 0
    for lo in range(0, len(order), state.batch_size):
        chunk = order[lo : lo + state.batch_size]
        encoded = []
        for idx in chunk:
            try:
                ids, prefixes = encoder(dataset[int(idx)], rng)
            except (VocabularyError, CapacityError):
                skipped += 1
                continue
            if config.max_seq_len is not None and len(ids) > config.max_seq_len + 2:
                ids = ids[: config.max_seq_len + 2]
                prefixes = prefixes[: config.max_seq_len + 2]
            encoded.append((ids, prefixes))
        if not encoded:
            continue
        batch = make_batch(encoded, eos_id=eos_id)
        dropout_mask = None
        if config.input_dropout > 0.0:
            keep = 1.0 - config.input_dropout
            dropout_mask = (
                rng.random((batch.inputs.shape[0], batch.inputs.shape[1], config.embed_dim)) < keep
            ) / keep
        batch_loss, grads = backward(params, config, batch, dropout_mask=dropout_mask)
        if not config.use_positional:
            grads["positional_embedding"][:] = 0.0
        if config.grad_clip is not None:
            clip_gradients(grads, config.grad_clip)
        adam_step(state, params, grads)
        total_loss += batch_loss
        batches += 1
    if batches == 0:
        raise DimensionError("no trainable sequences in the dataset")
    return total_loss / batches, skipped


def fit(
    params: Parameters,
    config: ModelConfig,
    state: TrainState,
    dataset: Sequence[object],
    encoder: Encoder,
    epochs: int,
    log_path: Optional[str] = None,
    checkpoint_path: Optional[str] = None,
    checkpoint_every: int = 0,
    vocab_spec: Optional[dict] = None,
    quiet: bool = True,
) -> List[float]:
    """Multi-epoch driver: CSV loss log and periodic checkpoints."""
    rng = np.random.default_rng(state.seed)
    losses = []
    log_file = open(log_path, "w") if log_path else None
    if log_file:
        log_file.write("epoch,loss,wall_seconds\n")
    started = time.perf_counter()
    try:
        for epoch in range(1, epochs + 1):
            epoch_loss, skipped = train_epoch(state, params, dataset, config, encoder, rng)
            losses.append(epoch_loss)
            elapsed = time.perf_counter() - started
            if log_file:
                log_file.write(f"{epoch},{epoch_loss:.6f},{elapsed:.3f}\n")
                log_file.flush()
            if not quiet:
                note = f" (skipped {skipped})" if skipped else ""
                print(f"epoch {epoch}: loss {epoch_loss:.4f}{note}")
            if checkpoint_path and checkpoint_every and epoch % checkpoint_every == 0:
                save_checkpoint(checkpoint_path, params, config, vocab_spec or {})
    finally:
        if log_file:
            log_file.close()
    if checkpoint_path:
        save_checkpoint(checkpoint_path, params, config, vocab_spec or {})
    return losses


# ---------------------------------------------------------------------------
# Incremental evaluation for sampling.
# ---------------------------------------------------------------------------


class RecurrentState:
    """Per-layer (h, c) carried across sampling steps."""

    def __init__(self, params: Parameters, batch: int = 1):
        d = params.layer_wx[0].shape[0]
        self.h = [np.zeros((batch, d)) for _ in params.layer_wx]
        self.c = [np.zeros((batch, d)) for _ in params.layer_wx]


def step(params: Parameters, x: np.ndarray, rec: RecurrentState) -> np.ndarray:
    """One-token advance; O(1) work per step regardless of history length."""
    d = x.shape[-1]
    inp = x
    for layer in range(len(params.layer_wx)):
        z = inp @ params.layer_wx[layer] + rec.h[layer] @ params.layer_wh[layer] + params.layer_bias[layer]
        i = _sigmoid(z[:, :d])
        f = _sigmoid(z[:, d : 2 * d])
        g = np.tanh(z[:, 2 * d : 3 * d])
        o = _sigmoid(z[:, 3 * d :])
        rec.c[layer] = f * rec.c[layer] + i * g
        rec.h[layer] = o * np.tanh(rec.c[layer])
        inp = rec.h[layer]
    return inp @ params.out_weight + params.out_bias


# ---------------------------------------------------------------------------
# Checkpoint format: magic, version, canonical-JSON config, raw tensors, CRC.
# ---------------------------------------------------------------------------


def vocab_spec(vocab) -> dict:
    """JSON-serializable description sufficient to rebuild the vocabulary."""
    if isinstance(vocab, codec.Vocabulary):
        return {"kind": "pair", "gap_bound": vocab.gap_bound}
    if isinstance(vocab, codec.PairGridVocabulary):
        return {"kind": "grid", "first_bound": vocab.first_bound, "second_bound": vocab.second_bound}
    if isinstance(vocab, attr.AttributedVocabulary):
        return {
            "kind": "attributed",
            "gap_bound": vocab.gap_bound,
            "node_types": list(vocab.alphabets.node_types),
            "edge_types": list(vocab.alphabets.edge_types),
        }
    raise CheckpointError(f"cannot serialize vocabulary {vocab!r}")


def vocab_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "pair":
        return codec.Vocabulary(spec["gap_bound"])
    if kind == "grid":
        return codec.PairGridVocabulary(spec["first_bound"], spec["second_bound"])
    if kind == "attributed":
        alphabets = attr.TypeAlphabets(tuple(spec["node_types"]), tuple(spec["edge_types"]))
        return attr.AttributedVocabulary(alphabets, spec["gap_bound"])
    raise CheckpointError(f"unknown vocabulary kind {kind!r}")


def save_checkpoint(path: str, params: Parameters, config: ModelConfig, vocab_info: dict) -> None:
    header = {"model": asdict(config), "vocab": vocab_info}
    config_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = bytearray()
    blob += CHECKPOINT_MAGIC
    blob += struct.pack("<I", CHECKPOINT_VERSION)
    blob += struct.pack("<I", len(config_bytes))
    blob += config_bytes
    for _, tensor in params.named_tensors():
        blob += np.ascontiguousarray(tensor, dtype="<f8").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load_checkpoint(path: str) -> Tuple[Parameters, ModelConfig, dict]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a model checkpoint (bad magic)")
    (version,) = struct.unpack("<I", blob[4:8])
    if version > CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {version} is newer than supported {CHECKPOINT_VERSION}")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CheckpointError("checkpoint CRC mismatch")
    (config_len,) = struct.unpack("<I", blob[8:12])
    header = json.loads(blob[12 : 12 + config_len].decode("utf-8"))
    config = ModelConfig(**header["model"])
    d = config.embed_dim
    shapes = [
        (config.vocab_size, d),
        (config.max_nodes + 1, d),
    ]
    for _ in range(config.num_layers):
        shapes += [(d, 4 * d), (d, 4 * d), (4 * d,)]
    shapes += [(d, config.vocab_size), (config.vocab_size,)]

    offset = 12 + config_len
    tensors = []
    for shape in shapes:
        count = int(np.prod(shape))
        end = offset + count * 8
        if end > len(blob) - 4:
            raise CheckpointError("checkpoint truncated")
        tensors.append(np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy())
        offset = end
    if offset != len(blob) - 4:
        raise CheckpointError("trailing bytes in checkpoint")
    layer_wx = [tensors[2 + 3 * l] for l in range(config.num_layers)]
    layer_wh = [tensors[3 + 3 * l] for l in range(config.num_layers)]
    layer_bias = [tensors[4 + 3 * l] for l in range(config.num_layers)]
    params = Parameters(
        token_embedding=tensors[0],
        positional_embedding=tensors[1],
        layer_wx=layer_wx,
        layer_wh=layer_wh,
        layer_bias=layer_bias,
        out_weight=tensors[2 + 3 * config.num_layers],
        out_bias=tensors[3 + 3 * config.num_layers],
    )
    return params, config, header["vocab"]
