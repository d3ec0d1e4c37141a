"""Small dense linear-algebra helpers: thresholded rank, nullspaces, minors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class RankInfo:
    rank: int
    singular_values: np.ndarray
    threshold: float

    @property
    def margin(self) -> float:
        """Ratio of the smallest retained singular value to the threshold.

        ``inf`` when nothing is retained, so rank 0 always counts as
        well separated from below.
        """
        if self.rank == 0:
            return np.inf
        return float(self.singular_values[self.rank - 1] / self.threshold) if self.threshold > 0 else np.inf

    @property
    def gap_below(self) -> float:
        """Ratio of threshold to the largest dropped singular value."""
        s = self.singular_values
        if self.rank >= s.size or s[self.rank] == 0:
            return np.inf
        return float(self.threshold / s[self.rank])

    def well_separated(self, factor: float = 10.0) -> bool:
        return self.margin > factor


def numerical_rank(A: np.ndarray, rel: float, floor: float = 0.0) -> RankInfo:
    """Count singular values above ``max(rel * sigma_max, floor)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return RankInfo(0, np.zeros(0), floor)
    s = np.linalg.svd(A, compute_uv=False)
    thr = max(rel * s[0], floor)
    if thr == 0.0:
        thr = np.finfo(float).tiny
    return RankInfo(int(np.sum(s > thr)), s, thr)


def sign_normalize(B: np.ndarray, rel: float = 1e-12) -> np.ndarray:
    """Flip columns so that the first non-negligible entry is positive."""
    B = np.array(B, dtype=float)
    for j in range(B.shape[1]):
        col = B[:, j]
        big = np.abs(col) > rel * np.max(np.abs(col), initial=0.0)
        if big.any() and col[np.argmax(big)] < 0:
            B[:, j] = -col
    return B


def nullspace(A: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis (columns) of the nullspace of A given its rank."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    cols = A.shape[1]
    if rank == 0:
        return np.eye(cols)
    _, _, Vt = np.linalg.svd(A)
    return Vt[rank:].T.copy()


def orth_projector(B: np.ndarray, rel: float = 1e-9) -> np.ndarray:
    """Euclidean orthogonal projector onto the column span of B."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[1] == 0:
        return np.zeros((B.shape[0], B.shape[0]))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    r = int(np.sum(s > rel * s[0])) if s.size and s[0] > 0 else 0
    Q = U[:, :r]
    return Q @ Q.T


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Operator-norm distance between the projectors onto span A and span B."""
    return float(np.linalg.norm(orth_projector(A) - orth_projector(B), 2))


def intersection_dim(A: np.ndarray, B: np.ndarray, rel: float = 1e-9) -> int:
    """dim(span A & span B) for matrices with independent columns."""
    a, b = A.shape[1], B.shape[1]
    if a == 0 or b == 0:
        return 0
    stacked = np.hstack([A, B])
    return a + b - numerical_rank(stacked, rel).rank


def minors(W: np.ndarray, q: int):
    """Yield ``(rows, cols, det)`` for every q x q minor of W."""
    r, c = W.shape
    for rows in combinations(range(r), q):
        sub = W[list(rows)]
        for cols in combinations(range(c), q):
            yield rows, cols, float(np.linalg.det(sub[:, list(cols)]))
