"""Pointwise data of a spacelike immersion: tangent frame, induced metric, normal frame."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateNormalMetricError, NotImmersedError, NotSpacelikeError
from .expr import Expression, eval_jet2, parse
from .linalg import sign_normalize
from .semiriemann import AmbientManifold, MetricValue, christoffel_from, metric_at
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class ImmersionSpec:
    parameters: tuple[str, ...]
    components: tuple[Expression, ...]  # one per ambient coordinate
    ambient: AmbientManifold

    def __post_init__(self):
        if len(self.parameters) < 1:
            raise ValueError("an immersion needs at least one parameter")
        if len(self.components) != self.ambient.dimension:
            raise ValueError(
                f"need {self.ambient.dimension} component expressions, got {len(self.components)}"
            )
        if self.n >= self.ambient.dimension:
            raise ValueError("co-dimension must be at least 1")

    @classmethod
    def from_strings(
        cls,
        ambient: AmbientManifold,
        parameters: Sequence[str],
        components: Sequence[str] | Mapping[str, str],
    ) -> "ImmersionSpec":
        parameters = tuple(parameters)
        if isinstance(components, Mapping):
            components = [components[c] for c in ambient.coordinates]
        return cls(parameters, tuple(parse(c, parameters) for c in components), ambient)

    @property
    def n(self) -> int:
        return len(self.parameters)

    @property
    def k(self) -> int:
        return self.ambient.dimension - self.n


@dataclass(frozen=True)
class PointFrameData:
    """Everything the extrinsic computations need at one parameter point.

    The normal frame ``Xi`` is not orthonormal for the ambient metric; all
    downstream formulas go through the normal Gram matrix ``G_N``.
    """

    u: np.ndarray
    x: np.ndarray
    E: np.ndarray  # (N, n) tangent frame, E[:, i] = d Phi / d u^i
    D2: np.ndarray  # (N, n, n) second derivatives of Phi
    g: np.ndarray  # (n, n) induced metric
    g_inv: np.ndarray
    Xi: np.ndarray  # (N, k) normal frame
    G_N: np.ndarray  # (k, k) = Xi^T gbar Xi
    metric: MetricValue
    gamma: np.ndarray  # (N, N, N) ambient Christoffel symbols at x
    signature: tuple[int, int] = (0, 0)

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @property
    def k(self) -> int:
        return self.Xi.shape[1]

    @property
    def gbar(self) -> np.ndarray:
        return self.metric.g_lower

    def remix(self, M: np.ndarray) -> "PointFrameData":
        """Same point with normal frame ``Xi @ M`` (M invertible k x k)."""
        M = np.asarray(M, dtype=float)
        Xi = self.Xi @ M
        G = Xi.T @ self.gbar @ Xi
        return replace(self, Xi=Xi, G_N=0.5 * (G + G.T))


def _rank(s: np.ndarray, rel: float) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel * s[0]))


def frame_at(imm: ImmersionSpec, u: Sequence[float], tol: Tolerances = DEFAULT) -> PointFrameData:
    u = np.asarray(u, dtype=float)
    n, N = imm.n, imm.ambient.dimension
    if u.shape != (n,):
        raise ValueError(f"parameter point must have {n} entries, got shape {u.shape}")

    x = np.empty(N)
    E = np.empty((N, n))
    D2 = np.empty((N, n, n))
    for a, comp in enumerate(imm.components):
        jet = eval_jet2(comp, u)
        x[a], E[a], D2[a] = jet.value, jet.gradient, jet.hessian

    sv = np.linalg.svd(E, compute_uv=False)
    if _rank(sv, tol.immersion) < n:
        raise NotImmersedError(
            f"differential has rank < {n} at u={u.tolist()} (singular values {sv.tolist()})"
        )

    mv = metric_at(imm.ambient, x, tol)
    gbar = mv.g_lower
    g = E.T @ gbar @ E
    g = 0.5 * (g + g.T)
    tr = np.trace(g)
    lam_min = np.linalg.eigvalsh(g)[0]
    if not (tr > 0 and lam_min > tol.spacelike * tr / n):
        raise NotSpacelikeError(
            f"induced metric is not positive definite at u={u.tolist()}"
            f" (smallest eigenvalue {lam_min:.3e})"
        )
    g_inv = np.linalg.solve(g, np.eye(n))

    # Euclidean nullspace of E^T gbar: orthonormal columns, signature agnostic
    _, s, Vt = np.linalg.svd(E.T @ gbar)
    Xi = sign_normalize(Vt[n:].T)
    gbar_norm = np.linalg.norm(gbar, 2)
    tol_orth = tol.orth * gbar_norm * max(np.linalg.norm(E, 2), np.linalg.norm(Xi, 2))
    resid = np.max(np.abs(Xi.T @ gbar @ E))
    if resid > tol_orth:
        raise DegenerateNormalMetricError(
            f"normal frame not orthogonal to tangent space at u={u.tolist()}:"
            f" residual {resid:.3e} > {tol_orth:.3e}"
        )
    G_N = Xi.T @ gbar @ Xi
    G_N = 0.5 * (G_N + G_N.T)
    sG = np.linalg.svd(G_N, compute_uv=False)
    if sG[-1] <= tol.det * gbar_norm:
        raise DegenerateNormalMetricError(
            f"normal Gram matrix is degenerate at u={u.tolist()} (singular values {sG.tolist()})"
        )

    return PointFrameData(
        u=u,
        x=x,
        E=E,
        D2=D2,
        g=g,
        g_inv=g_inv,
        Xi=Xi,
        G_N=G_N,
        metric=mv,
        gamma=christoffel_from(mv),
        signature=tuple(imm.ambient.signature),
    )


def tangent_project(P: PointFrameData, v: Sequence[float]) -> np.ndarray:
    """Tangent coefficients c = g^-1 E^T gbar v of the orthogonal projection."""
    v = np.asarray(v, dtype=float)
    return np.linalg.solve(P.g, P.E.T @ P.gbar @ v)


def normal_project(P: PointFrameData, v: Sequence[float]) -> np.ndarray:
    """Components d of the normal part of ``v`` in the frame ``Xi``."""
    v = np.asarray(v, dtype=float)
    c = tangent_project(P, v)
    return np.linalg.solve(P.G_N, P.Xi.T @ P.gbar @ (v - P.E @ c))
