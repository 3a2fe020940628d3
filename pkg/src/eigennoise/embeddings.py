"""Embedding tables: rank-indexed vectors plus reserved OOV and PAD rows.

A table for a vocabulary of N ranks has N+2 rows: row i-1 holds rank i's
vector, row N is the OOV row, row N+1 is the PAD row. PAD stays exactly
zero forever; OOV starts zero and may train in unfrozen mode.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .vocab import OOV, Vocabulary

#: Sentinel index for out-of-sentence window positions.
PAD = -2

OOV_TOKEN = "<oov>"
PAD_TOKEN = "<pad>"


@dataclass
class EmbeddingTable:
    rows: np.ndarray  # (N + 2, d)
    d: int
    source: str  # eigennoise | random | imported
    trainable: bool = False

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != self.d:
            raise ValueError(f"rows shape {self.rows.shape} inconsistent with d={self.d}")
        if self.rows.shape[0] < 3:
            raise ValueError("table needs at least one rank row plus OOV and PAD")

    @property
    def n(self) -> int:
        """Number of rank rows (vocabulary size)."""
        return self.rows.shape[0] - 2

    @property
    def oov_row(self) -> int:
        return self.n

    @property
    def pad_row(self) -> int:
        return self.n + 1

    def copy(self, trainable: bool | None = None) -> "EmbeddingTable":
        out = replace(self, rows=self.rows.copy())
        if trainable is not None:
            out.trainable = trainable
        return out


def row_index(table_n: int, rank_or_sentinel: int) -> int:
    """Map a rank (1..N) or OOV/PAD sentinel to a 0-based row index."""
    r = rank_or_sentinel
    if r == OOV:
        return table_n
    if r == PAD:
        return table_n + 1
    if not 1 <= r <= table_n:
        raise ValueError(f"rank {r} outside 1..{table_n}")
    return r - 1


def embed_lookup(table: EmbeddingTable, ranks: "list[int] | np.ndarray") -> np.ndarray:
    """Row-stack the vectors for a sequence of ranks/sentinels."""
    idx = np.array([row_index(table.n, r) for r in ranks], dtype=int)
    return table.rows[idx]


def random_table(n: int, d: int, seed: int) -> EmbeddingTable:
    """Standard-normal table from a seeded counter-based generator.

    Uses numpy's Philox stream keyed by ``seed``, so tables are
    bit-reproducible per seed within this codebase. OOV and PAD rows are
    zero.
    """
    if n < 1 or d < 1:
        raise ValueError(f"need n, d >= 1, got n={n}, d={d}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    rows = np.zeros((n + 2, d))
    rows[:n] = rng.standard_normal((n, d))
    return EmbeddingTable(rows=rows, d=d, source="random")


@dataclass(frozen=True)
class AlignmentReport:
    matched: int
    unmatched: int

    @property
    def oov_rate(self) -> float:
        total = self.matched + self.unmatched
        return self.unmatched / total if total else 0.0

    def to_text(self) -> str:
        return (
            f"matched\t{self.matched}\n"
            f"unmatched\t{self.unmatched}\n"
            f"oov_rate\t{self.oov_rate:.6f}\n"
        )


def import_text(
    path: str | Path,
    vocab: Vocabulary,
    expected_d: int | None = None,
) -> tuple[EmbeddingTable, AlignmentReport]:
    """Load GloVe-format text vectors and align them to ``vocab`` by token.

    Each line is "token v1 v2 ... vd". Vocabulary tokens missing from the
    file keep the zero OOV-style row and are counted as unmatched; file
    tokens outside the vocabulary are skipped. On duplicate tokens the
    first line wins.
    """
    vectors: dict[str, np.ndarray] = {}
    d = expected_d
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split(" ")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'token v1 ... vd'")
            token, fields = parts[0], parts[1:]
            if d is None:
                d = len(fields)
            if len(fields) != d:
                raise ValueError(
                    f"{path}:{lineno}: {len(fields)} values, expected {d}"
                )
            try:
                vec = np.array([float(f) for f in fields])
            except ValueError:
                for col, f in enumerate(fields, start=2):
                    try:
                        float(f)
                    except ValueError:
                        raise ValueError(
                            f"{path}:{lineno}: column {col}: cannot parse {f!r}"
                        ) from None
                raise
            vectors.setdefault(token, vec)
    if d is None:
        raise ValueError(f"{path}: empty embedding file")
    rows = np.zeros((vocab.size + 2, d))
    matched = 0
    for token, _, rank in vocab.entries:
        vec = vectors.get(token)
        if vec is not None:
            rows[rank - 1] = vec
            matched += 1
    report = AlignmentReport(matched=matched, unmatched=vocab.size - matched)
    return EmbeddingTable(rows=rows, d=d, source="imported"), report


def export_text(
    table: EmbeddingTable,
    path: str | Path,
    vocab: Vocabulary | None = None,
) -> None:
    """Write GloVe-compatible text: "token v1 ... vd", no header.

    Rank rows are labeled by their vocabulary tokens when ``vocab`` is
    given, otherwise "rank_<r>". The OOV and PAD rows are written last
    under reserved labels.
    """
    if vocab is not None and vocab.size != table.n:
        raise ValueError(f"vocab size {vocab.size} != table size {table.n}")
    labels = vocab.tokens() if vocab is not None else [
        f"rank_{r}" for r in range(1, table.n + 1)
    ]
    labels += [OOV_TOKEN, PAD_TOKEN]
    with open(path, "w", encoding="utf-8") as fh:
        for label, row in zip(labels, table.rows):
            fh.write(label + " " + " ".join(f"{v:.8g}" for v in row) + "\n")
