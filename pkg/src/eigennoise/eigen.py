"""Eigen-decomposition of the harmonic co-occurrence model.

Two routes to the same factors:

* an analytic O(N*d) construction exploiting the model's low rank
  (rank 1 in linear space, rank 2 in log space), whose degenerate
  zero-eigenspace is filled by a deterministic Householder completion;
* a cyclic-Jacobi dense eigensolver used as the brute-force oracle.

The retained factor U_d (unit eigenvector columns) is the embedding; V_d
carries the eigenvalue scaling and is exposed for diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingTable
from .harmonic import DEFAULT_WINDOW, DENSE_CAP, HarmonicModel

ORDERING_RULES = ("by_magnitude", "by_value")

_SWEEP_CAP = 100
_CONV_FACTOR = 1e-12


@dataclass(frozen=True)
class FullDecomposition:
    """All N eigenpairs; eigenvalues descending by value, signs fixed."""

    eigenvalues: np.ndarray  # (N,)
    vectors: np.ndarray  # (N, N), column k pairs with eigenvalues[k]

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class EigenFactorization:
    """d retained eigenpairs: U_d has unit columns, V_d = U_d * diag(eigenvalues)."""

    n: int
    d: int
    eigenvalues: np.ndarray  # (d,)
    u: np.ndarray  # (N, d)
    v: np.ndarray  # (N, d)
    ordering_rule: str


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            out[:, j] = -col
    return out


def dense_eigh(matrix: np.ndarray, tol: float = 1e-8,
               max_dense: int = DENSE_CAP) -> FullDecomposition:
    """Cyclic-Jacobi eigensolver for a dense symmetric matrix.

    Sweeps annihilate off-diagonal entries until the off-diagonal
    Frobenius norm falls below 1e-12 relative to the input norm (a strict
    absolute threshold is unreachable in 64-bit floats once entries are
    large). Caps at 100 sweeps and raises if still unconverged.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > max_dense:
        raise ValueError(f"N={n} exceeds the dense cap {max_dense}")
    asym = float(np.abs(a - a.T).max()) if n > 1 else 0.0
    if asym > tol:
        raise ValueError(f"matrix asymmetry {asym:.3e} exceeds tolerance {tol:.3e}")
    a = (a + a.T) / 2.0
    q = np.eye(n)
    conv = _CONV_FACTOR * max(1.0, float(np.linalg.norm(a)))
    skip = conv / max(n, 1)  # skipping every entry this small still converges
    for sweep in range(_SWEEP_CAP + 1):
        off2 = float((a * a).sum() - (np.diag(a) ** 2).sum())
        if math.sqrt(max(off2, 0.0)) <= conv:
            break
        if sweep == _SWEEP_CAP:
            raise RuntimeError(
                f"Jacobi did not converge in {_SWEEP_CAP} sweeps "
                f"(off-diagonal norm {math.sqrt(off2):.3e})"
            )
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) <= skip:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p, col_r = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * col_p - s * col_r
                a[:, r] = s * col_p + c * col_r
                row_p, row_r = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c * row_p - s * row_r
                a[r, :] = s * row_p + c * row_r
                a[p, r] = a[r, p] = 0.0
                q_p, q_r = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * q_p - s * q_r
                q[:, r] = s * q_p + c * q_r
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return FullDecomposition(eigenvalues=values[order],
                             vectors=_fix_signs(q[:, order]))


def _ordering(values: np.ndarray, rule: str) -> np.ndarray:
    if rule == "by_magnitude":
        return np.argsort(-np.abs(values), kind="stable")
    if rule == "by_value":
        return np.argsort(-values, kind="stable")
    raise ValueError(f"ordering_rule must be one of {ORDERING_RULES}, got {rule!r}")


def truncate(full: FullDecomposition, d: int,
             ordering_rule: str = "by_magnitude") -> EigenFactorization:
    """Retain d eigenpairs of a full decomposition under the ordering rule."""
    if not 1 <= d <= full.n:
        raise ValueError(f"d={d} outside 1..{full.n}")
    keep = _ordering(full.eigenvalues, ordering_rule)[:d]
    values = full.eigenvalues[keep]
    u = full.vectors[:, keep]
    return EigenFactorization(n=full.n, d=d, eigenvalues=values, u=u,
                              v=u * values[None, :], ordering_rule=ordering_rule)


def _log_mode_pairs(model: HarmonicModel) -> tuple[np.ndarray, np.ndarray]:
    """Exact nonzero eigenpairs of the log-frequency matrix.

    That matrix is alpha*J - beta 1^T - 1 beta^T with beta_i = log i, so
    its range lies in span{1, beta}: project onto an orthonormal basis of
    that plane, solve the 2x2 problem in closed form, and lift back.
    """
    n = model.n
    alpha = math.log(model.scale)
    if n == 1:
        return np.array([alpha]), np.array([[1.0]])
    beta = np.log(np.arange(1, n + 1, dtype=float))
    ones = np.ones(n)
    q1 = ones / math.sqrt(n)
    centered = beta - beta.mean()
    q2 = centered / np.linalg.norm(centered)

    def apply(vec: np.ndarray) -> np.ndarray:
        s1 = vec.sum()
        sb = beta @ vec
        return (alpha * s1 - sb) * ones - s1 * beta

    t11 = q1 @ apply(q1)
    t12 = q1 @ apply(q2)
    t22 = q2 @ apply(q2)
    half_tr = 0.5 * (t11 + t22)
    rad = math.hypot(0.5 * (t11 - t22), t12)
    values = np.array([half_tr + rad, half_tr - rad])
    vectors = np.empty((n, 2))
    for k, lam in enumerate(values):
        if abs(t12) > 0:
            w = np.array([t12, lam - t11])
        else:
            w = np.array([1.0, 0.0]) if abs(lam - t11) <= abs(lam - t22) else np.array([0.0, 1.0])
        w = w / np.linalg.norm(w)
        vectors[:, k] = w[0] * q1 + w[1] * q2
    return values, vectors


def _householder_complete(u_cols: np.ndarray) -> np.ndarray:
    """N x N orthogonal matrix whose leading columns equal ``u_cols``.

    Householder QR of the orthonormal input; the trailing columns of the
    accumulated Q are a deterministic completion of the orthogonal
    complement.
    """
    n, k = u_cols.shape
    a = u_cols.astype(float).copy()
    reflectors = []
    for j in range(k):
        x = a[j:, j]
        norm_x = float(np.linalg.norm(x))
        v = x.copy()
        v[0] += math.copysign(norm_x, x[0]) if x[0] != 0 else norm_x
        vnorm2 = float(v @ v)
        if vnorm2 > 0:
            a[j:, j:] -= np.outer(v, (2.0 / vnorm2) * (v @ a[j:, j:]))
        reflectors.append((j, v, vnorm2))
    q = np.eye(n)
    for j, v, vnorm2 in reversed(reflectors):
        if vnorm2 > 0:
            q[j:, :] -= np.outer(v, (2.0 / vnorm2) * (v @ q[j:, :]))
    # overwriting the leading columns flips any sign the reflectors chose
    # and kills accumulated round-off; the complement is unaffected
    q[:, :k] = u_cols
    return q


def _rotate_within_complement(completion: np.ndarray, seed: int) -> np.ndarray:
    """Mix the completion columns by a seeded random orthogonal transform."""
    width = completion.shape[1]
    if width < 2:
        return completion
    rng = np.random.Generator(np.random.Philox(key=seed))
    gauss = rng.standard_normal((width, width))
    q, r = np.linalg.qr(gauss)
    q = q * np.where(np.diag(r) >= 0, 1.0, -1.0)
    return completion @ q


def eigennoise_analytic(
    n: int,
    d: int,
    m: int = DEFAULT_WINDOW,
    mode: str = "linear",
    completion_seed: int | None = 0,
    ordering_rule: str = "by_magnitude",
) -> EigenFactorization:
    """EigenNoise factors without materializing the N x N matrix.

    Linear mode: the model is rank 1, so column 1 of U_d is the
    normalized inverse-rank vector with eigenvalue (2mN/H_N) * sum 1/i^2.
    Log mode: the two nonzero eigenpairs of the rank-2 log matrix fill
    columns 1-2 (ordered by ``ordering_rule``). All remaining columns are
    a deterministic Householder completion of the zero eigenspace,
    rotated within that complement by a seeded orthogonal transform
    (``completion_seed=None`` disables the rotation).
    """
    if not 1 <= d <= n:
        raise ValueError(f"d={d} outside 1..{n}")
    model = HarmonicModel(n=n, m=m)
    if mode == "linear":
        z = 1.0 / np.arange(1, n + 1, dtype=float)
        values = np.array([model.scale * float(z @ z)])
        vectors = (z / np.linalg.norm(z))[:, None]
    elif mode == "log":
        values, vectors = _log_mode_pairs(model)
    else:
        raise ValueError(f"mode must be 'linear' or 'log', got {mode!r}")
    order = _ordering(values, ordering_rule)
    values, vectors = values[order], _fix_signs(vectors[:, order])
    k = min(len(values), d)
    values, vectors = values[:k], vectors[:, :k]
    if d > k:
        completion = _householder_complete(vectors)[:, k:]
        if completion_seed is not None:
            completion = _rotate_within_complement(completion, completion_seed)
        u = np.hstack([vectors, _fix_signs(completion[:, : d - k])])
        values = np.concatenate([values, np.zeros(d - k)])
    else:
        u = vectors
    return EigenFactorization(n=n, d=d, eigenvalues=values, u=u,
                              v=u * values[None, :], ordering_rule=ordering_rule)


def to_embedding(fact: EigenFactorization, which: str = "U") -> EmbeddingTable:
    """Embedding table from the retained factor; zero OOV and PAD rows appended."""
    if which == "U":
        block = fact.u
    elif which == "V":
        block = fact.v
    else:
        raise ValueError(f"which must be 'U' or 'V', got {which!r}")
    rows = np.zeros((fact.n + 2, fact.d))
    rows[: fact.n] = block
    return EmbeddingTable(rows=rows, d=fact.d, source="eigennoise")
