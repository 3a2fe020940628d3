"""Closed-form independent co-occurrence model over Zipfian ranks.

Joint frequency for ranks i, j is ``2*m*N / (i*j*H_N)``: each token
self-samples ``2m`` window partners from the Zipf unigram model, so rows
marginalize to ``2*m*N/i`` and the model is exactly independent (its PMI
is identically zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .vocab import harmonic_number

DEFAULT_WINDOW = 5
DENSE_CAP = 4096

#: How the positivity constraint min entry == 1 is (optionally) restored.
#: "verbatim" keeps the closed form untouched; "rescale" multiplies the
#: whole matrix so the smallest entry is 1 (eigenvectors unchanged);
#: "floor" clips entries up to 1 (experimental: changes matrix rank).
POSITIVITY_MODES = ("verbatim", "rescale", "floor")


@dataclass(frozen=True)
class HarmonicModel:
    """Value object for the rank co-occurrence model: size N, window m."""

    n: int
    m: int = DEFAULT_WINDOW

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vocabulary size must be >= 1, got {self.n}")
        if self.m < 1:
            raise ValueError(f"window half-width must be >= 1, got {self.m}")

    @property
    def h_n(self) -> float:
        return harmonic_number(self.n)

    @property
    def scale(self) -> float:
        """Common factor 2*m*N/H_N of every entry."""
        return 2.0 * self.m * self.n / self.h_n


@dataclass(frozen=True)
class CoocMatrix:
    """Dense co-occurrence counts with cached marginals."""

    values: np.ndarray  # (N, N), non-negative
    row_marginals: np.ndarray  # (N,)
    col_marginals: np.ndarray  # (N,)
    total: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "CoocMatrix":
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"co-occurrence matrix must be square, got {values.shape}")
        if (values < 0).any():
            raise ValueError("co-occurrence entries must be non-negative")
        rows = values.sum(axis=1)
        cols = values.sum(axis=0)
        return cls(values=values, row_marginals=rows, col_marginals=cols,
                   total=float(rows.sum()))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _check_ranks(model: HarmonicModel, i: int, j: int) -> None:
    if not (1 <= i <= model.n and 1 <= j <= model.n):
        raise ValueError(f"ranks ({i}, {j}) outside 1..{model.n}")


def xhat_entry(model: HarmonicModel, i: int, j: int) -> float:
    """Modeled joint frequency of ranks i and j: 2*m*N / (i*j*H_N)."""
    _check_ranks(model, i, j)
    return model.scale / (i * j)


def log_xhat_entry(model: HarmonicModel, i: int, j: int) -> float:
    """log of :func:`xhat_entry`, i.e. log(2mN/H_N) - log i - log j."""
    _check_ranks(model, i, j)
    return math.log(model.scale) - math.log(i) - math.log(j)


def materialize(
    model: HarmonicModel,
    positivity: str = "verbatim",
    max_dense: int = DENSE_CAP,
) -> CoocMatrix:
    """Dense N x N matrix of the model, with marginals.

    Only feasible for small N; larger vocabularies should stay on the
    analytic path (eigen.eigennoise_analytic), which never materializes.
    """
    if model.n > max_dense:
        raise ValueError(
            f"N={model.n} exceeds the dense cap {max_dense}; "
            "use the analytic eigen path instead of materializing"
        )
    if positivity not in POSITIVITY_MODES:
        raise ValueError(f"positivity must be one of {POSITIVITY_MODES}")
    inv_rank = 1.0 / np.arange(1, model.n + 1, dtype=float)
    values = model.scale * np.outer(inv_rank, inv_rank)
    if positivity == "rescale":
        values = values / values.min()
    elif positivity == "floor":
        values = np.maximum(values, 1.0)
    return CoocMatrix.from_values(values)


def materialize_log(model: HarmonicModel, max_dense: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of log joint frequencies (the factorization target)."""
    if model.n > max_dense:
        raise ValueError(f"N={model.n} exceeds the dense cap {max_dense}")
    log_rank = np.log(np.arange(1, model.n + 1, dtype=float))
    return math.log(model.scale) - log_rank[:, None] - log_rank[None, :]


def pmi_shifted(c: CoocMatrix, i: int, j: int, k: float = 1.0) -> float:
    """Natural-log shifted PMI log(X_ij * M / (x_i * y_j * k)).

    With k=1 this is plain PMI. Zero cells are an error: smoothing is the
    caller's decision, and the harmonic model is everywhere positive.
    """
    if not (1 <= i <= c.n and 1 <= j <= c.n):
        raise ValueError(f"ranks ({i}, {j}) outside 1..{c.n}")
    if k <= 0:
        raise ValueError(f"shift k must be positive, got {k}")
    x_ij = c.values[i - 1, j - 1]
    if x_ij <= 0:
        raise ValueError(f"PMI undefined for zero cell ({i}, {j})")
    return math.log(x_ij * c.total / (c.row_marginals[i - 1] * c.col_marginals[j - 1] * k))


def pmi_matrix(c: CoocMatrix, k: float = 1.0) -> np.ndarray:
    """Shifted PMI over all cells (brute-force diagnostic; small N only)."""
    if (c.values <= 0).any():
        raise ValueError("PMI matrix requires an everywhere-positive input")
    return np.log(c.values * c.total) - np.log(
        np.outer(c.row_marginals, c.col_marginals) * k
    )


def dump_matrix(c: CoocMatrix, path: str | Path) -> None:
    """Debug dump: one row per line, space-separated decimal values."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in c.values:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
