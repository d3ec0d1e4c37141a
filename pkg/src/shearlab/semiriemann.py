"""Ambient semi-Riemannian manifold in a single coordinate chart."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateMetricError, SignatureMismatchError
from .expr import Expression, eval_jet2, parse
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class AmbientManifold:
    """Coordinates, declared signature and upper-triangle metric components.

    ``components`` maps ``(a, b)`` with ``a <= b`` to an :class:`Expression`
    over ``coordinates``; missing pairs are identically zero.
    """

    coordinates: tuple[str, ...]
    signature: tuple[int, int]  # (n_minus, n_plus)
    components: Mapping[tuple[int, int], Expression]

    def __post_init__(self):
        N = len(self.coordinates)
        if N < 2:
            raise ValueError("ambient dimension must be at least 2")
        n_minus, n_plus = self.signature
        if n_minus < 0 or n_plus < 0 or n_minus + n_plus != N:
            raise ValueError(f"signature {self.signature} inconsistent with dimension {N}")
        for a, b in self.components:
            if not 0 <= a <= b < N:
                raise ValueError(f"metric index pair {(a, b)} is not upper-triangular in range")

    @classmethod
    def from_strings(
        cls,
        coordinates: Sequence[str],
        signature: tuple[int, int],
        entries: Mapping[tuple[str, str], str],
    ) -> "AmbientManifold":
        """Build from ``{("t", "t"): "-1", ("x", "x"): "1", ...}``."""
        coordinates = tuple(coordinates)
        index = {c: i for i, c in enumerate(coordinates)}
        comps: dict[tuple[int, int], Expression] = {}
        for (ca, cb), text in entries.items():
            a, b = sorted((index[ca], index[cb]))
            if (a, b) in comps:
                raise ValueError(f"metric entry ({ca},{cb}) given twice")
            comps[(a, b)] = parse(text, coordinates)
        return cls(coordinates, tuple(signature), comps)

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    @property
    def is_riemannian(self) -> bool:
        return self.signature[0] == 0


@dataclass(frozen=True)
class MetricValue:
    point: np.ndarray
    g_lower: np.ndarray
    g_upper: np.ndarray
    d_g: np.ndarray  # d_g[a, b, c] = d_c g_ab


def signature_of(g: np.ndarray, rel_tol: float = DEFAULT.eig) -> tuple[int, int, int]:
    """Return ``(n_minus, n_plus, n_zero)`` of a symmetric matrix.

    Eigenvalues within ``rel_tol * ||g||_2`` of zero count as zero.
    """
    lam = np.linalg.eigvalsh(g)
    thr = rel_tol * np.max(np.abs(lam), initial=0.0)
    return int(np.sum(lam < -thr)), int(np.sum(lam > thr)), int(np.sum(np.abs(lam) <= thr))


def metric_at(amb: AmbientManifold, x: Sequence[float], tol: Tolerances = DEFAULT) -> MetricValue:
    x = np.asarray(x, dtype=float)
    N = amb.dimension
    if x.shape != (N,):
        raise ValueError(f"point must have {N} coordinates, got shape {x.shape}")
    g = np.zeros((N, N))
    dg = np.zeros((N, N, N))
    for (a, b), expr in amb.components.items():
        jet = eval_jet2(expr, x)
        g[a, b] = g[b, a] = jet.value
        dg[a, b, :] = jet.gradient
        dg[b, a, :] = jet.gradient

    norm_inf = np.max(np.sum(np.abs(g), axis=1))
    tol_det = tol.det * max(1.0, norm_inf**N)
    det = np.linalg.det(g)
    if not abs(det) >= tol_det:
        raise DegenerateMetricError(
            f"metric is degenerate at x={x.tolist()}: |det g| = {abs(det):.3e} < {tol_det:.3e}"
        )
    n_minus, n_plus, n_zero = signature_of(g, tol.eig)
    if n_zero or (n_minus, n_plus) != tuple(amb.signature):
        raise SignatureMismatchError(
            f"metric at x={x.tolist()} has signature ({n_minus},{n_plus})"
            f"{f' with {n_zero} null eigenvalue(s)' if n_zero else ''},"
            f" declared {tuple(amb.signature)}"
        )
    g_upper = np.linalg.solve(g, np.eye(N))
    return MetricValue(x, g, g_upper, dg)


def christoffel_from(mv: MetricValue) -> np.ndarray:
    """Gamma[a, b, c] = 1/2 g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)."""
    dg = mv.d_g
    # lower[d, b, c] = d_b g_dc + d_c g_db - d_d g_bc
    lower = 0.5 * (
        np.transpose(dg, (0, 2, 1)) + dg - np.transpose(dg, (2, 0, 1))
    )
    gamma = np.einsum("ad,dbc->abc", mv.g_upper, lower)
    return 0.5 * (gamma + np.transpose(gamma, (0, 2, 1)))


def christoffel(amb: AmbientManifold, x: Sequence[float], tol: Tolerances = DEFAULT) -> np.ndarray:
    """Christoffel symbols of the Levi-Civita connection, shape (N, N, N)."""
    return christoffel_from(metric_at(amb, x, tol))
