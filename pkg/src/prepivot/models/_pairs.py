"""Shared helpers for pairs (row) resampling via multinomial counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from prepivot.errors import RankError
from prepivot.numerics.linalg import COND_CAP

MAX_REDRAWS = 100


def row_products(V: np.ndarray) -> np.ndarray:
    """Per-row outer products ``v_t v_t'`` flattened to ``(n, k*k)``."""
    return (V[:, :, None] * V[:, None, :]).reshape(V.shape[0], -1)


def counts_from_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Occurrence counts of each original row for every resample (rows of ``idx``)."""
    B = idx.shape[0]
    offsets = (np.arange(B) * n)[:, None]
    return np.bincount((idx + offsets).ravel(), minlength=B * n).reshape(B, n)


def batched_cross(counts: np.ndarray, products: np.ndarray, n: int, k: int) -> np.ndarray:
    """Scaled cross-product matrices ``S* = sum_t c_t v_t v_t' / n`` for each resample."""
    return (counts @ products / n).reshape(-1, k, k)


def well_conditioned(S: np.ndarray, cap: float = COND_CAP) -> np.ndarray:
    """Boolean mask of matrices in the batch with condition number below ``cap``."""
    if S.shape[-1] == 0:
        return np.ones(S.shape[0], dtype=bool)
    # symmetric PSD blocks: 2-norm condition number from the eigenvalues
    with np.errstate(all="ignore"):
        if S.shape[-1] == 1:
            cond = np.where(S[:, 0, 0] > 0, 1.0, np.inf)
        elif S.shape[-1] == 2:
            a, b, d = S[:, 0, 0], S[:, 0, 1], S[:, 1, 1]
            mid, rad = 0.5 * (a + d), np.hypot(0.5 * (a - d), b)
            cond = np.abs(mid + rad) / np.abs(mid - rad)
        else:
            ev = np.abs(np.linalg.eigvalsh(S))
            cond = ev.max(axis=-1) / ev.min(axis=-1)
    return np.isfinite(cond) & (cond <= cap)


@dataclass
class PairsDraws:
    """First-level pairs resamples: row indices into the original data."""

    idx: np.ndarray
    retries: int = 0

    def __len__(self) -> int:
        return self.idx.shape[0]


def draw_indices(rng: np.random.Generator, size: int, n: int, ok, label: str) -> tuple[np.ndarray, int]:
    """Draw ``(size, n)`` row indices, redrawing rows rejected by ``ok``.

    ``ok`` maps an index block to a boolean mask.  Redraws use the same
    generator sequentially, so the result is deterministic.
    """
    idx = rng.integers(0, n, size=(size, n))
    bad = ~ok(idx)
    attempts = np.zeros(size, dtype=int)
    while bad.any():
        attempts[bad] += 1
        if attempts.max() > MAX_REDRAWS:
            raise RankError(f"{label}: a resample stayed singular after {MAX_REDRAWS} redraws", block=label)
        rows = np.flatnonzero(bad)
        idx[rows] = rng.integers(0, n, size=(rows.size, n))
        bad[rows] = ~ok(idx[rows])
    return idx, int(attempts.sum())
