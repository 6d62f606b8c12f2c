"""Principal components with a deterministic sign convention."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ciqlab.errors import DimensionError

__all__ = ["PcaResult", "pca"]


@dataclass
class PcaResult:
    components: np.ndarray        # (cols, k) loading vectors
    scores: np.ndarray            # (rows, k) principal component series
    explained_variance: np.ndarray


def pca(X: np.ndarray, k: int = 1) -> PcaResult:
    """Leading ``k`` principal components of the column-demeaned matrix.

    Each component is flipped so its loading vector has nonnegative mean
    (ties by exactly-zero mean resolved toward a nonnegative first element),
    making the score series deterministic across platforms.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    rows, cols = X.shape
    k = int(k)
    if k < 1 or k > min(rows, cols):
        raise DimensionError(f"k={k} must lie in [1, min(rows, cols)={min(rows, cols)}]")
    Xc = X - X.mean(axis=0)
    u, s, vt = np.linalg.svd(Xc, full_matrices=False)
    comps = vt[:k].T
    scores = u[:, :k] * s[:k]
    for j in range(k):
        m = comps[:, j].mean()
        flip = m < 0.0 or (m == 0.0 and comps[0, j] < 0.0)
        if flip:
            comps[:, j] = -comps[:, j]
            scores[:, j] = -scores[:, j]
    explained = s[:k] ** 2 / max(rows - 1, 1)
    return PcaResult(comps, scores, explained)
