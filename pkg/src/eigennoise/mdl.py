"""Online (prequential) codelength over a block schedule.

The label stream is shuffled once per seed, the first block is paid for
with a uniform code (t1 * log2 K bits), and every later block is scored
by a model freshly trained on everything transmitted so far. Shorter
total codelength means the representation is more regular with respect
to the labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .probe import ProbeData, TrainConfig

DEFAULT_FRACTIONS = (0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.25, 12.5, 25.0, 50.0, 100.0)

#: Smallest admissible predicted probability for a true label.
PROB_CLAMP = 2.0**-64

#: fit_predict(train_prefix, dev, config) -> callable mapping a ProbeData
#: batch to an (n, K) matrix of predicted class probabilities.
FitPredict = Callable[[ProbeData, ProbeData, TrainConfig], Callable[[ProbeData], np.ndarray]]


@dataclass(frozen=True)
class BlockSchedule:
    boundaries: tuple[int, ...]  # strictly increasing, last == n
    fractions: tuple[float, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("boundaries must be strictly increasing")
        if self.boundaries[0] < 1:
            raise ValueError("first boundary must be >= 1")

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def num_blocks(self) -> int:
        return len(self.boundaries)


def make_schedule(n: int, fractions: Sequence[float] = DEFAULT_FRACTIONS) -> BlockSchedule:
    """Boundary for fraction p is ceil(p*n/100); deduplicated, last forced to n."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    bounds = sorted({min(math.ceil(p * n / 100.0), n) for p in fractions if p > 0})
    if not bounds or bounds[-1] != n:
        bounds.append(n)
    if len(bounds) < 2:
        raise ValueError(
            f"n={n} yields fewer than 2 distinct block boundaries; "
            "the online code needs at least one trained block"
        )
    return BlockSchedule(boundaries=tuple(bounds), fractions=tuple(fractions))


@dataclass(frozen=True)
class CodelengthReport:
    block_bits: tuple[float, ...]
    block_clamps: tuple[int, ...]
    boundaries: tuple[int, ...]
    num_classes: int
    n: int
    seed: int

    @property
    def total_bits(self) -> float:
        return float(sum(self.block_bits))

    @property
    def kilobits(self) -> float:
        return self.total_bits / 1000.0

    @property
    def kilobytes(self) -> float:
        return self.total_bits / 8000.0

    @property
    def clamp_count(self) -> int:
        return int(sum(self.block_clamps))

    @property
    def uniform_baseline_bits(self) -> float:
        """Cost of sending every label with the uniform code."""
        return self.n * math.log2(self.num_classes)


def online_codelength(
    data: ProbeData,
    schedule: BlockSchedule,
    fit_predict: FitPredict,
    config: TrainConfig,
    dev: ProbeData | None = None,
) -> CodelengthReport:
    """Transmission cost of the label stream under the online protocol.

    The stream order is one seeded shuffle of ``data`` (seed =
    ``config.seed``). Block 1 costs t1*log2(K); block i+1 costs
    -sum log2 p(y|x) under a model trained on examples 1..t_i. When no
    ``dev`` split is given, each stage holds out a seeded 10% of its
    prefix for early stopping. Predicted probabilities are clamped at
    2**-64 and clamps counted, so codelengths stay finite.
    """
    if schedule.n != len(data):
        raise ValueError(f"schedule covers {schedule.n} examples, data has {len(data)}")
    k = data.num_classes
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    stream = data.subset(rng.permutation(len(data)))
    bounds = schedule.boundaries
    bits = [bounds[0] * math.log2(k)]
    clamps = [0]
    for stage in range(1, len(bounds)):
        lo, hi = bounds[stage - 1], bounds[stage]
        prefix = stream.subset(np.arange(lo))
        if dev is not None:
            stage_train, stage_dev = prefix, dev
        else:
            stage_train, stage_dev = _holdout(prefix, config.seed, stage)
        predict = fit_predict(stage_train, stage_dev, config)
        block = stream.subset(np.arange(lo, hi))
        probs = np.asarray(predict(block), dtype=float)
        p_true = probs[np.arange(len(block)), block.labels]
        clamped = int((p_true < PROB_CLAMP).sum())
        p_true = np.maximum(p_true, PROB_CLAMP)
        bits.append(float(-np.log2(p_true).sum()))
        clamps.append(clamped)
    return CodelengthReport(
        block_bits=tuple(bits),
        block_clamps=tuple(clamps),
        boundaries=bounds,
        num_classes=k,
        n=len(data),
        seed=config.seed,
    )


def _holdout(prefix: ProbeData, seed: int, stage: int) -> tuple[ProbeData, ProbeData]:
    """Seeded 10% dev holdout (at least one example each side)."""
    n = len(prefix)
    if n < 2:
        return prefix, prefix  # degenerate stage: dev == train
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(stage,))
    perm = np.random.Generator(np.random.Philox(seed=seq)).permutation(n)
    n_dev = max(1, n // 10)
    return prefix.subset(perm[n_dev:]), prefix.subset(perm[:n_dev])


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Mean and (n-1)-denominator standard deviation; std 0 for one value."""
    if len(values) == 0:
        raise ValueError("nothing to aggregate")
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = 0.0 if len(arr) == 1 else float(arr.std(ddof=1))
    return mean, std


def format_report(report: CodelengthReport) -> str:
    """Structured text: one record per block, then totals and baseline."""
    lines = ["block\tstart\tend\tbits\tclamps"]
    lo = 0
    for i, (bits, clamps, hi) in enumerate(
        zip(report.block_bits, report.block_clamps, report.boundaries), start=1
    ):
        lines.append(f"{i}\t{lo}\t{hi}\t{bits:.6f}\t{clamps}")
        lo = hi
    lines.append(f"total_bits\t{report.total_bits:.6f}")
    lines.append(f"kilobits\t{report.kilobits:.6f}")
    lines.append(f"kilobytes\t{report.kilobytes:.6f}")
    lines.append(f"uniform_bits\t{report.uniform_baseline_bits:.6f}")
    lines.append(f"classes\t{report.num_classes}")
    lines.append(f"n\t{report.n}")
    lines.append(f"seed\t{report.seed}")
    lines.append(f"clamp_count\t{report.clamp_count}")
    return "\n".join(lines) + "\n"


def write_report(report: CodelengthReport, path: str | Path) -> None:
    Path(path).write_text(format_report(report), encoding="utf-8")
