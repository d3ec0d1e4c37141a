"""Extrinsic invariants, shear and umbilical spaces, and their cross-checks.

All normal-valued quantities are stored as components in the normal frame
``P.Xi`` of a :class:`~shearlab.immersion.PointFrameData`; tensors carry the
normal index first, e.g. ``h[alpha, i, j]``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import CrossCheckMismatchError, ShearlabError, UmbilicalVerificationError
from .immersion import ImmersionSpec, PointFrameData, frame_at
from .linalg import RankInfo, intersection_dim, nullspace, numerical_rank, sign_normalize
from .tolerances import DEFAULT, Tolerances

TOTALLY_UMBILICAL = "totally-umbilical"
SINGLE_SHEAR = "single-shear-direction"
NO_UMBILICAL = "no-umbilical-directions"


# ---------------------------------------------------------------------------
# h, H, h~ and the operators
# ---------------------------------------------------------------------------


def second_fundamental_form(P: PointFrameData) -> np.ndarray:
    """Normal components ``h[alpha, i, j]`` from the Gauss formula.

    The ambient covariant derivative of the coordinate fields is
    ``d2 Phi / du^i du^j + Gamma(E_i, E_j)``; its normal part is h.
    """
    n, k, N = P.n, P.k, P.E.shape[0]
    V = P.D2 + np.einsum("abc,bi,cj->aij", P.gamma, P.E, P.E)
    flat = V.reshape(N, n * n)
    c = np.linalg.solve(P.g, P.E.T @ P.gbar @ flat)
    d = np.linalg.solve(P.G_N, P.Xi.T @ P.gbar @ (flat - P.E @ c))
    h = d.reshape(k, n, n)
    return 0.5 * (h + np.transpose(h, (0, 2, 1)))


def mean_curvature(P: PointFrameData, h: np.ndarray) -> np.ndarray:
    """H^alpha = (1/n) g^{ij} h^alpha_{ij}."""
    return np.einsum("ij,aij->a", P.g_inv, h) / P.n


def total_shear(P: PointFrameData, h: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Trace-free part h~ = h - g H."""
    return h - np.einsum("ij,a->aij", P.g, H)


def _operator(P: PointFrameData, T: np.ndarray, xi: np.ndarray) -> np.ndarray:
    # g(A X, Y) = gbar(T(X, Y), xi)  =>  A = g^-1 B, B_ij = (G_N xi)_a T^a_ij
    B = np.einsum("a,aij->ij", P.G_N @ np.asarray(xi, dtype=float), T)
    return P.g_inv @ B


def weingarten_operator(P: PointFrameData, h: np.ndarray, xi: Sequence[float]) -> np.ndarray:
    """Shape operator A_xi for a normal vector given by frame components ``xi``."""
    return _operator(P, h, xi)


def shear_operator(P: PointFrameData, h_tilde: np.ndarray, xi: Sequence[float]) -> np.ndarray:
    """Shear operator, the trace-free part of A_xi."""
    return _operator(P, h_tilde, xi)


@dataclass(frozen=True)
class ExtrinsicData:
    h: np.ndarray
    H: np.ndarray
    h_tilde: np.ndarray
    A: np.ndarray  # A[alpha] = A_{xi_alpha}
    A_tilde: np.ndarray  # A_tilde[alpha] = shear operator of xi_alpha
    A_tilde_dual: np.ndarray  # per-leg operators of the frame decomposition

    def reconstruct_shear_operator(self, P: PointFrameData, eta: Sequence[float]) -> np.ndarray:
        """Shear operator of ``eta`` as sum_i gbar(xi_i, eta) * A_tilde_dual[i]."""
        coeff = P.G_N @ np.asarray(eta, dtype=float)
        return np.einsum("i,ijk->jk", coeff, self.A_tilde_dual)

    def reconstruct_shear_tensor(self, P: PointFrameData) -> np.ndarray:
        """h~^i_{jk} = g(A_tilde_dual[i] e_j, e_k), components on xi_i."""
        return np.einsum("iaj,ak->ijk", self.A_tilde_dual, P.g)


def extrinsic(P: PointFrameData) -> ExtrinsicData:
    h = second_fundamental_form(P)
    H = mean_curvature(P, h)
    ht = total_shear(P, h, H)
    legs = np.eye(P.k)
    A = np.stack([weingarten_operator(P, h, e) for e in legs])
    At = np.stack([shear_operator(P, ht, e) for e in legs])
    # dual-frame convention: A^i = sum_j (G_N^-1)_ij A_{xi_j}
    At_dual = np.einsum("ij,jab->iab", np.linalg.inv(P.G_N), At)
    return ExtrinsicData(h, H, ht, A, At, At_dual)


# ---------------------------------------------------------------------------
# Scales
# ---------------------------------------------------------------------------


def trace_tolerance(h: np.ndarray, tol: Tolerances = DEFAULT) -> float:
    return tol.trace * (1.0 + float(np.max(np.abs(h), initial=0.0)))


def umbilical_tolerance(h_tilde: np.ndarray, tol: Tolerances = DEFAULT) -> float:
    return tol.umb * (1.0 + float(np.linalg.norm(h_tilde)))


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def shear_values(h_tilde: np.ndarray) -> np.ndarray:
    """k x n(n+1)/2 matrix whose columns are h~(e_i, e_j), i <= j."""
    n = h_tilde.shape[1]
    return np.stack([h_tilde[:, i, j] for i, j in _pairs(n)], axis=1)


# ---------------------------------------------------------------------------
# Shear space, umbilical space, oracles
# ---------------------------------------------------------------------------


def shear_space(
    P: PointFrameData, h_tilde: np.ndarray, tol: Tolerances = DEFAULT, floor: float | None = None
) -> tuple[np.ndarray, int, RankInfo]:
    """Basis S (k x d, Euclidean-orthonormal columns) of the shear space.

    ``floor`` is the absolute singular-value floor; by default the trace
    tolerance of h~ itself, so pure rounding noise never counts as rank.
    """
    M = shear_values(h_tilde)
    if floor is None:
        floor = trace_tolerance(h_tilde, tol)
    info = numerical_rank(M, tol.rank, floor)
    d = info.rank
    if d == 0:
        return np.zeros((P.k, 0)), 0, info
    U, _, _ = np.linalg.svd(M, full_matrices=False)
    return sign_normalize(U[:, :d]), d, info


def umbilical_space(
    P: PointFrameData, h_tilde: np.ndarray, S: np.ndarray, tol: Tolerances = DEFAULT
) -> tuple[np.ndarray, int, float]:
    """Basis U of the normals gbar-orthogonal to span S, verified umbilical.

    Returns ``(U, m, worst)`` where ``worst`` is the largest Frobenius norm
    of a shear operator over the basis vectors. Raises
    UmbilicalVerificationError if it exceeds the umbilicity tolerance.
    """
    d = S.shape[1]
    if d == 0:
        U = np.eye(P.k)
    else:
        U = sign_normalize(nullspace(S.T @ P.G_N, d))
    limit = umbilical_tolerance(h_tilde, tol)
    worst = 0.0
    for col in U.T:
        norm = float(np.linalg.norm(shear_operator(P, h_tilde, col)))
        worst = max(worst, norm)
        if norm > limit:
            raise UmbilicalVerificationError(
                f"normal direction {col.tolist()} orthogonal to the shear space has"
                f" |shear operator|_F = {norm:.3e} > {limit:.3e} at u={P.u.tolist()}"
            )
    return U, U.shape[1], worst


def flat_shear_values(P: PointFrameData, h_tilde: np.ndarray) -> np.ndarray:
    """Rows are the one-forms h~(e_i, e_j)^flat restricted to the normal frame."""
    return (P.G_N @ shear_values(h_tilde)).T


def wedge_rank_oracle(
    oneforms: np.ndarray, q: int, rel: float = DEFAULT.rank, floor: float = 0.0
) -> bool:
    """True iff every q-fold wedge of the given covectors vanishes.

    A wedge of q covectors vanishes iff all q x q minors of their stacked
    components do. A minor is treated as zero when it is below ``rel`` times
    the product of the norms of the covectors involved, or when one of those
    covectors is itself below ``floor``.
    """
    W = np.atleast_2d(np.asarray(oneforms, dtype=float))
    rows, k = W.shape
    if q <= 0:
        return False
    if q > k or q > rows:
        return True
    norms = np.linalg.norm(W, axis=1)

    for sel in combinations(range(rows), q):
        scale = float(np.prod(norms[list(sel)]))
        if min(norms[list(sel)]) <= floor:
            continue
        sub = W[list(sel)]
        for cols in combinations(range(k), q):
            if abs(np.linalg.det(sub[:, list(cols)])) > rel * scale:
                return False
    return True


def wedge_rank(oneforms: np.ndarray, rel: float = DEFAULT.rank, floor: float = 0.0) -> int:
    """Largest q whose q-fold wedge is nonzero (0 if all covectors vanish)."""
    W = np.atleast_2d(oneforms)
    q = 0
    while q < min(W.shape) and not wedge_rank_oracle(W, q + 1, rel, floor):
        q += 1
    return q


def operator_rank(
    P: PointFrameData, h_tilde: np.ndarray, tol: Tolerances = DEFAULT
) -> RankInfo:
    """Number of linearly independent shear operators among the frame legs."""
    ops = np.stack([shear_operator(P, h_tilde, e).ravel() for e in np.eye(P.k)])
    floor = trace_tolerance(h_tilde, tol) * np.linalg.norm(P.G_N, 2) * np.linalg.norm(P.g_inv, 2)
    return numerical_rank(ops, tol.rank, floor)


def duality_residual(
    P: PointFrameData, ext: ExtrinsicData, xis: np.ndarray
) -> float:
    """Max scaled residual of g(A~_xi e_i, e_j) = gbar(h~(e_i, e_j), xi).

    The right side is evaluated with ambient vectors (``Xi @ components``),
    independently of the normal Gram matrix used to build the operators.
    """
    xis = np.atleast_2d(xis)
    amb_ht = np.einsum("Na,aij->Nij", P.Xi, ext.h_tilde)
    worst = 0.0
    for xi in xis:
        xi_amb = P.Xi @ xi
        lhs = shear_operator(P, ext.h_tilde, xi).T @ P.g
        rhs = np.einsum("Nij,NM,M->ij", amb_ht, P.gbar, xi_amb)
        scale = (
            np.linalg.norm(P.gbar, 2)
            * max(np.linalg.norm(xi_amb), np.finfo(float).tiny)
            * (1.0 + np.max(np.linalg.norm(amb_ht, axis=0)))
            * (1.0 + np.linalg.norm(P.g, 2))
        )
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    return worst


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def label_for(m: int, k: int) -> str:
    if m == k:
        return TOTALLY_UMBILICAL
    if m == 0:
        return NO_UMBILICAL
    if m == k - 1:
        return SINGLE_SHEAR
    return f"intermediate({m})"


@dataclass(frozen=True)
class CrossChecks:
    dims_sum: bool
    wedge: bool
    wedge_rank: int
    operator_rank: int
    duality_residual: float
    dim_bound: bool
    umbilical_residual: float
    direct_sum: bool | None  # only decided for Riemannian ambients

    def as_dict(self) -> dict:
        return {
            "dims_sum": self.dims_sum,
            "wedge": self.wedge,
            "wedge_rank": self.wedge_rank,
            "operator_rank": self.operator_rank,
            "duality_residual": self.duality_residual,
            "dim_bound": self.dim_bound,
            "umbilical_residual": self.umbilical_residual,
            "direct_sum": self.direct_sum,
        }


@dataclass(frozen=True)
class ShearReport:
    point: np.ndarray
    n: int
    k: int
    d: int
    m: int
    label: str
    shear_basis: np.ndarray  # (k, d) components in normal_frame
    umbilical_basis: np.ndarray  # (k, m)
    intersection_dim: int
    checks: CrossChecks
    normal_frame: np.ndarray  # (N, k)
    shear_rank: RankInfo
    first_normal_rank: int
    extrinsic: ExtrinsicData = field(repr=False)
    G: np.ndarray | None = None  # d == 1 only
    A_tilde: np.ndarray | None = None
    factor_residual: float | None = None
    tolerances: Tolerances = DEFAULT

    @property
    def well_separated(self) -> bool:
        """False near a rank transition (smallest kept singular value < 10x threshold)."""
        return self.shear_rank.well_separated(10.0)

    def ambient_shear_basis(self) -> np.ndarray:
        return self.normal_frame @ self.shear_basis

    def ambient_umbilical_basis(self) -> np.ndarray:
        return self.normal_frame @ self.umbilical_basis

    def as_dict(self) -> dict:
        out = {
            "point": self.point.tolist(),
            "d": self.d,
            "m": self.m,
            "k": self.k,
            "n": self.n,
            "label": self.label,
            "shear_basis": self.shear_basis.T.tolist(),
            "umbilical_basis": self.umbilical_basis.T.tolist(),
            "intersection_dim": self.intersection_dim,
            "checks": self.checks.as_dict(),
            "first_normal_rank": self.first_normal_rank,
            "normal_frame": self.normal_frame.T.tolist(),
            "tolerances": self.tolerances.as_dict(),
        }
        if self.G is not None:
            out["G"] = self.G.tolist()
            out["A_tilde"] = self.A_tilde.tolist()
            out["factor_residual"] = self.factor_residual
        return out


def classify(P: PointFrameData, tol: Tolerances = DEFAULT, strict: bool = True) -> ShearReport:
    """Run the full pipeline at one point and cross-check the rank criteria.

    With ``strict`` a disagreement between the SVD rank, the wedge oracle and
    the operator rank (or a failed Riemannian direct sum) raises
    CrossCheckMismatchError carrying the report; otherwise the report is
    returned and the verdicts are left in ``report.checks``.
    """
    ext = extrinsic(P)
    ht = ext.h_tilde
    k, n = P.k, P.n
    floor = trace_tolerance(ext.h, tol)

    S, d, info = shear_space(P, ht, tol, floor=floor)
    U, m, umb_worst = umbilical_space(P, ht, S, tol)

    W = flat_shear_values(P, ht)
    w_floor = floor * np.linalg.norm(P.G_N, 2)
    wedge_ok = wedge_rank_oracle(W, d + 1, tol.rank, w_floor) and (
        d == 0 or not wedge_rank_oracle(W, d, tol.rank, w_floor)
    )
    op_rank = operator_rank(P, ht, tol).rank
    inter = intersection_dim(S, U)
    direct_sum = None
    if P.signature[0] == 0:
        direct_sum = inter == 0 and d + m == k

    checks = CrossChecks(
        dims_sum=(m + d == k),
        wedge=wedge_ok,
        wedge_rank=wedge_rank(W, tol.rank, w_floor),
        operator_rank=op_rank,
        duality_residual=duality_residual(P, ext, np.eye(k)),
        dim_bound=d <= min(k, n * (n + 1) // 2 - 1),
        umbilical_residual=umb_worst,
        direct_sum=direct_sum,
    )

    G = A_t = resid = None
    if d == 1:
        G = S[:, 0]
        B = np.einsum("a,aij->ij", G, ht)
        A_t = P.g_inv @ B
        resid = float(np.max(np.abs(ht - np.einsum("a,ij->aij", G, B)), initial=0.0))

    n1 = numerical_rank(shear_values(ext.h), tol.rank, floor).rank

    report = ShearReport(
        point=P.u,
        n=n,
        k=k,
        d=d,
        m=m,
        label=label_for(m, k),
        shear_basis=S,
        umbilical_basis=U,
        intersection_dim=inter,
        checks=checks,
        normal_frame=P.Xi,
        shear_rank=info,
        first_normal_rank=n1,
        extrinsic=ext,
        G=G,
        A_tilde=A_t,
        factor_residual=resid,
        tolerances=tol,
    )

    failed = []
    if not checks.wedge:
        failed.append("wedge oracle")
    if op_rank != d:
        failed.append(f"operator rank {op_rank} != {d}")
    if not checks.dims_sum:
        failed.append("m + d != k")
    if direct_sum is False:
        failed.append("Riemannian direct sum")
    if failed and strict:
        raise CrossCheckMismatchError(
            f"cross-checks disagree at u={P.u.tolist()} (shear-space rank d={d}): "
            + "; ".join(failed),
            failed,
            report,
        )
    return report


def classify_at(
    imm: ImmersionSpec, u: Sequence[float], tol: Tolerances = DEFAULT, strict: bool = True
) -> ShearReport:
    return classify(frame_at(imm, u, tol), tol, strict)


# ---------------------------------------------------------------------------
# Constancy scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    points: list
    outcomes: list  # ShearReport or ShearlabError, in input order

    @property
    def reports(self) -> list[ShearReport]:
        return [o for o in self.outcomes if isinstance(o, ShearReport)]

    @property
    def errors(self) -> list[tuple[int, ShearlabError]]:
        return [(i, o) for i, o in enumerate(self.outcomes) if not isinstance(o, ShearReport)]

    @property
    def partition(self) -> dict[tuple[int, int], list[int]]:
        parts: dict[tuple[int, int], list[int]] = {}
        for i, o in enumerate(self.outcomes):
            if isinstance(o, ShearReport):
                parts.setdefault((o.d, o.m), []).append(i)
        return parts

    @property
    def constant(self) -> bool:
        return len(self.partition) == 1

    @property
    def verdict(self) -> str:
        if not self.partition:
            return "no-data"
        return "constant" if self.constant else "non-constant"

    @property
    def dims(self) -> tuple[int, int] | None:
        """The global (d, m) when the dimensions are constant, else None."""
        return next(iter(self.partition)) if self.constant else None


def constancy_scan(
    imm: ImmersionSpec,
    grid: Sequence[Sequence[float]],
    tol: Tolerances = DEFAULT,
    workers: int | None = None,
) -> ScanResult:
    """Classify every grid point; per-point failures are collected, not raised."""

    def one(u):
        try:
            return classify_at(imm, u, tol)
        except ShearlabError as exc:
            return exc

    points = [np.asarray(u, dtype=float) for u in grid]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, points))
    else:
        outcomes = [one(u) for u in points]
    return ScanResult(points, outcomes)
