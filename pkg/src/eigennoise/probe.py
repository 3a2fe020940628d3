"""MLP probe over embedding features, trained with Adam and dev-set
learning-rate annealing.

The probe is softmax(W2 relu(W1 h)) with a single hidden layer and no
dropout. Inputs h come from one of three featurizations: a flattened
token window (token tasks), the mean over a token sequence (sequence
tasks), or precomputed vectors (synthetic tasks). When the attached
embedding table is trainable, gradients flow into the referenced rows;
the PAD row never receives gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .datasets import SequenceDataset, SyntheticDataset, TokenDataset
from .embeddings import PAD, EmbeddingTable, embed_lookup, row_index
from .vocab import OOV, Vocabulary, rank_of, tokenize

DEFAULT_WINDOWS = (0, 2, 5, 10)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    lr: float = 0.001
    anneal_factor: float = 0.5
    patience: int = 4
    consecutive: bool = False  # count non-improvements consecutively instead of cumulatively
    seed: int = 0
    batch_size: int = 64
    max_epochs: int = 50
    hidden: int = 512

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")


# --- featurization ---------------------------------------------------------


def featurize_token(table: EmbeddingTable, ranks: Sequence[int],
                    position: int, m: int) -> np.ndarray:
    """Flattened window of embeddings at positions pos-m..pos+m.

    Out-of-sentence positions contribute PAD (zero) rows; the result has
    length (2m+1)*d.
    """
    if not 0 <= position < len(ranks):
        raise ValueError(f"position {position} outside sentence of {len(ranks)} tokens")
    if m < 0:
        raise ValueError(f"window half-width must be >= 0, got {m}")
    window = [
        ranks[p] if 0 <= p < len(ranks) else PAD
        for p in range(position - m, position + m + 1)
    ]
    return embed_lookup(table, window).reshape(-1)


def featurize_sequence(table: EmbeddingTable, ranks: Sequence[int]) -> np.ndarray:
    """Mean of the token embeddings; OOV rows are included in the mean."""
    if len(ranks) == 0:
        raise ValueError("cannot featurize an empty sequence")
    return embed_lookup(table, ranks).mean(axis=0)


@dataclass
class ProbeData:
    """Probe-ready examples in one of three input forms.

    pooling "direct": ``features`` holds the inputs. pooling "concat":
    ``indices`` rows are fixed-width windows of table row indices,
    flattened after lookup. pooling "mean": ``indices`` rows are padded
    token sequences averaged over the first ``lengths`` entries (padding
    points at the zero PAD row, so a plain sum is safe).
    """

    labels: np.ndarray
    num_classes: int
    pooling: str = "direct"
    features: np.ndarray | None = None
    indices: np.ndarray | None = None
    lengths: np.ndarray | None = None

    def __post_init__(self):
        if self.pooling not in ("direct", "concat", "mean"):
            raise ValueError(f"unknown pooling {self.pooling!r}")
        if self.pooling == "direct" and self.features is None:
            raise ValueError("direct pooling requires features")
        if self.pooling in ("concat", "mean") and self.indices is None:
            raise ValueError(f"{self.pooling} pooling requires indices")
        if self.pooling == "mean" and self.lengths is None:
            raise ValueError("mean pooling requires lengths")
        if self.labels.min(initial=0) < 0 or self.labels.max(initial=0) >= self.num_classes:
            raise ValueError("labels must lie in 0..num_classes-1")

    def __len__(self) -> int:
        return len(self.labels)

    def input_dim(self, d: int | None = None) -> int:
        if self.pooling == "direct":
            return self.features.shape[1]
        if d is None:
            raise ValueError("need the embedding dimension for index pooling")
        return self.indices.shape[1] * d if self.pooling == "concat" else d

    def subset(self, sel) -> "ProbeData":
        return ProbeData(
            labels=self.labels[sel],
            num_classes=self.num_classes,
            pooling=self.pooling,
            features=None if self.features is None else self.features[sel],
            indices=None if self.indices is None else self.indices[sel],
            lengths=None if self.lengths is None else self.lengths[sel],
        )


def _ranks_to_rows(tokens: Sequence[str], vocab: Vocabulary) -> list[int]:
    return [row_index(vocab.size, rank_of(vocab, t)) for t in tokens]


def token_window_data(ds: TokenDataset, vocab: Vocabulary, m: int,
                      label_set: Sequence[str] | None = None) -> ProbeData:
    """One example per (sentence, position): a width-(2m+1) index window."""
    label_set = tuple(label_set if label_set is not None else ds.label_set)
    label_index = {lab: i for i, lab in enumerate(label_set)}
    pad_row = vocab.size + 1
    windows = []
    labels = []
    for sent, labs in zip(ds.sentences, ds.labels):
        rows = _ranks_to_rows(sent, vocab)
        for pos, lab in enumerate(labs):
            win = [
                rows[p] if 0 <= p < len(rows) else pad_row
                for p in range(pos - m, pos + m + 1)
            ]
            windows.append(win)
            labels.append(label_index[lab])
    return ProbeData(
        labels=np.array(labels, dtype=int),
        num_classes=len(label_set),
        pooling="concat",
        indices=np.array(windows, dtype=int),
    )


def sequence_data(ds: SequenceDataset, vocab: Vocabulary) -> ProbeData:
    """One mean-pooled example per text; tokens outside the vocab hit OOV."""
    rows_per_text = []
    for i, text in enumerate(ds.texts):
        toks = tokenize(text)
        if not toks:
            raise ValueError(f"text {i} tokenizes to nothing; cannot featurize")
        rows_per_text.append(_ranks_to_rows(toks, vocab))
    return _padded_mean_data(rows_per_text, np.array(ds.labels, dtype=int),
                             ds.num_classes, vocab.size)


def synthetic_feature_data(ds: SyntheticDataset) -> ProbeData:
    return ProbeData(labels=ds.labels.astype(int), num_classes=ds.num_classes,
                     pooling="direct", features=ds.features)


def synthetic_token_data(ds: SyntheticDataset, vocab: Vocabulary) -> ProbeData:
    rows_per_text = [_ranks_to_rows(toks, vocab) for toks in ds.tokens]
    return _padded_mean_data(rows_per_text, ds.labels.astype(int),
                             ds.num_classes, vocab.size)


def _padded_mean_data(rows_per_text, labels, num_classes, vocab_size) -> ProbeData:
    pad_row = vocab_size + 1
    lengths = np.array([len(r) for r in rows_per_text], dtype=int)
    width = int(lengths.max())
    idx = np.full((len(rows_per_text), width), pad_row, dtype=int)
    for i, rows in enumerate(rows_per_text):
        idx[i, : len(rows)] = rows
    return ProbeData(labels=labels, num_classes=num_classes, pooling="mean",
                     indices=idx, lengths=lengths)


# --- model -----------------------------------------------------------------


@dataclass
class ProbeModel:
    w1: np.ndarray  # (hidden, input_dim)
    w2: np.ndarray  # (num_classes, hidden)
    table: EmbeddingTable | None = None
    pooling: str = "direct"

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[0]


def init_probe(input_dim: int, num_classes: int, hidden: int = 512,
               seed: int = 0, table: EmbeddingTable | None = None,
               pooling: str = "direct") -> ProbeModel:
    """Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weight init."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    b1 = 1.0 / np.sqrt(input_dim)
    b2 = 1.0 / np.sqrt(hidden)
    return ProbeModel(
        w1=rng.uniform(-b1, b1, (hidden, input_dim)),
        w2=rng.uniform(-b2, b2, (num_classes, hidden)),
        table=table,
        pooling=pooling,
    )


def gather_features(data: ProbeData, table: EmbeddingTable | None,
                    sel=slice(None)) -> np.ndarray:
    """Materialize the (B, input_dim) feature block for selected examples."""
    if data.pooling == "direct":
        return data.features[sel]
    if table is None:
        raise ValueError(f"{data.pooling} pooling requires an embedding table")
    idx = data.indices[sel]
    gathered = table.rows[idx]  # (B, w, d)
    if data.pooling == "concat":
        return gathered.reshape(len(idx), -1)
    return gathered.sum(axis=1) / data.lengths[sel][:, None]


def forward(model: ProbeModel, h: np.ndarray) -> np.ndarray:
    """softmax(W2 relu(W1 h)), stabilized by max subtraction."""
    h = np.asarray(h, dtype=float)
    if not np.isfinite(h).all():
        raise ValueError("probe input must be finite")
    single = h.ndim == 1
    hb = h[None, :] if single else h
    hidden = np.maximum(hb @ model.w1.T, 0.0)
    logits = hidden @ model.w2.T
    logits = logits - logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    probs = expl / expl.sum(axis=1, keepdims=True)
    return probs[0] if single else probs


def _log_probs(model: ProbeModel, h: np.ndarray) -> np.ndarray:
    hidden = np.maximum(h @ model.w1.T, 0.0)
    logits = hidden @ model.w2.T
    logits = logits - logits.max(axis=1, keepdims=True)
    return logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))


def backward(model: ProbeModel, h: np.ndarray, labels: np.ndarray,
             indices: np.ndarray | None = None,
             lengths: np.ndarray | None = None) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its gradients.

    Returns gradients for w1 and w2, plus a dense "table" gradient when
    the attached table is trainable and ``indices`` locate the rows each
    feature segment came from. The PAD row's gradient is forced to zero.
    """
    h = np.asarray(h, dtype=float)
    if not np.isfinite(h).all():
        raise ValueError("probe input must be finite")
    labels = np.asarray(labels, dtype=int)
    batch = len(labels)
    pre = h @ model.w1.T
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ model.w2.T
    logits = logits - logits.max(axis=1, keepdims=True)
    expl = np.exp(logits)
    probs = expl / expl.sum(axis=1, keepdims=True)
    logz = np.log(expl.sum(axis=1))
    loss = float(-(logits[np.arange(batch), labels] - logz).mean())

    dlogits = probs.copy()
    dlogits[np.arange(batch), labels] -= 1.0
    dlogits /= batch
    grads = {
        "w2": dlogits.T @ hidden,
    }
    dhidden = (dlogits @ model.w2) * (pre > 0)
    grads["w1"] = dhidden.T @ h
    table = model.table
    if table is not None and table.trainable and indices is not None:
        dh = dhidden @ model.w1  # (B, input_dim)
        gtable = np.zeros_like(table.rows)
        if model.pooling == "concat":
            np.add.at(gtable, indices, dh.reshape(indices.shape + (table.d,)))
        elif model.pooling == "mean":
            contrib = dh / lengths[:, None]
            np.add.at(gtable, indices,
                      np.broadcast_to(contrib[:, None, :], indices.shape + (table.d,)))
        else:
            raise ValueError("direct pooling has no table rows to differentiate")
        gtable[table.pad_row] = 0.0
        grads["table"] = gtable
    return loss, grads


# --- optimization ----------------------------------------------------------


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(state: AdamState, params: dict[str, np.ndarray],
              grads: dict[str, np.ndarray], lr: float) -> None:
    """One in-place Adam update with bias correction (beta1=0.9,
    beta2=0.999, eps=1e-8). Parameter names are visited in sorted order."""
    state.t += 1
    bc1 = 1.0 - ADAM_BETA1**state.t
    bc2 = 1.0 - ADAM_BETA2**state.t
    for name in sorted(grads):
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        params[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)


# --- training --------------------------------------------------------------


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    dev_loss: float
    lr: float


def evaluate_loss(model: ProbeModel, data: ProbeData) -> float:
    h = gather_features(data, model.table)
    logp = _log_probs(model, h)
    return float(-logp[np.arange(len(data)), data.labels].mean())


def evaluate_accuracy(model: ProbeModel, data: ProbeData) -> float:
    h = gather_features(data, model.table)
    pred = _log_probs(model, h).argmax(axis=1)
    return float((pred == data.labels).mean())


def predict_proba(model: ProbeModel, data: ProbeData) -> np.ndarray:
    return np.exp(_log_probs(model, gather_features(data, model.table)))


def train_probe(train: ProbeData, dev: ProbeData, config: TrainConfig,
                table: EmbeddingTable | None = None,
                model: ProbeModel | None = None) -> tuple[ProbeModel, list[EpochStats]]:
    """Adam training with the anneal-on-plateau schedule.

    After every epoch whose dev loss is not a new strict minimum, the
    learning rate halves and a counter increments (cumulatively, unless
    ``config.consecutive``); training stops once the counter reaches
    ``config.patience`` or at ``config.max_epochs``. Returns the final
    model and the per-epoch trace.

    Passing ``model`` warm-starts from its current weights (and its
    attached table) instead of a fresh seeded initialization.
    """
    if len(train) == 0 or len(dev) == 0:
        raise ValueError("train and dev sets must be non-empty")
    if model is None:
        input_dim = train.input_dim(table.d if table is not None else None)
        model = init_probe(input_dim, train.num_classes, hidden=config.hidden,
                           seed=config.seed, table=table, pooling=train.pooling)
    else:
        table = model.table
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    params = {"w1": model.w1, "w2": model.w2}
    if table is not None and table.trainable:
        params["table"] = table.rows
    state = AdamState()
    lr = config.lr
    best_dev = np.inf
    stale = 0
    trace: list[EpochStats] = []
    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(len(train))
        seen = 0
        loss_sum = 0.0
        for start in range(0, len(perm), config.batch_size):
            sel = perm[start : start + config.batch_size]
            h = gather_features(train, table, sel)
            loss, grads = backward(
                model, h, train.labels[sel],
                indices=None if train.indices is None else train.indices[sel],
                lengths=None if train.lengths is None else train.lengths[sel],
            )
            if not np.isfinite(loss):
                raise ArithmeticError(f"non-finite training loss at epoch {epoch}")
            adam_step(state, params, grads, lr)
            loss_sum += loss * len(sel)
            seen += len(sel)
        dev_loss = evaluate_loss(model, dev)
        if not np.isfinite(dev_loss):
            raise ArithmeticError(f"non-finite dev loss at epoch {epoch}")
        trace.append(EpochStats(epoch=epoch, train_loss=loss_sum / seen,
                                dev_loss=dev_loss, lr=lr))
        if dev_loss < best_dev:
            best_dev = dev_loss
            if config.consecutive:
                stale = 0
        else:
            lr *= config.anneal_factor
            stale += 1
            if stale >= config.patience:
                break
    return model, trace


def write_epoch_trace(trace: list[EpochStats], path) -> None:
    """Line records "epoch<TAB>train_loss<TAB>dev_loss<TAB>lr"."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in trace:
            fh.write(f"{row.epoch}\t{row.train_loss!r}\t{row.dev_loss!r}\t{row.lr!r}\n")
