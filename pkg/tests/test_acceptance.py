"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import time

import numpy as np
import pytest

from shearlab import catalog
from shearlab.errors import ShearlabError
from shearlab.expr import eval_jet2, parse
from shearlab.immersion import frame_at
from shearlab.linalg import numerical_rank, subspace_distance
from shearlab.shear import classify, duality_residual, shear_operator, trace_tolerance, umbilical_tolerance

from oracles import fd_gradient, fd_hessian, random_trig_polynomial, rel_err
from randgen import mixed_population

POPULATION_SIZE = 200


def report(number, title, ok, detail=""):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else ""))
    assert ok, detail


@pytest.fixture(scope="module")
def population():
    start = time.perf_counter()
    samples = mixed_population(count=POPULATION_SIZE)
    rows, errors = [], []
    for s in samples:
        for u in s.points:
            try:
                P = frame_at(s.immersion, u)
                rows.append((s, P, classify(P, strict=False)))
            except ShearlabError as exc:
                errors.append((s, u, exc))
    return rows, errors, time.perf_counter() - start


@pytest.fixture(scope="module")
def catalog_frames():
    out = []
    for name, entry in catalog.ENTRIES.items():
        spec = entry.spec()
        for u in spec.samples():
            out.append((name, frame_at(spec.immersion, u)))
    return out


def test_criterion_1_catalog_golden():
    start = time.perf_counter()
    results = [catalog.run_entry(name) for name in catalog.ENTRIES]
    elapsed = time.perf_counter() - start
    failed = [r.name for r in results if not r.passed]
    points = sum(r.points for r in results)
    report(
        1,
        "catalog golden suite",
        len(results) >= 7 and not failed and elapsed < 5.0,
        f"{len(results)} entries, {points} points, {elapsed:.2f}s, failed={failed}",
    )


def test_criterion_2_dimension_identity(population):
    rows, errors, elapsed = population
    kept = [r for _, _, r in rows if r.well_separated]
    violations = [r.point for r in kept if r.d + r.m != r.k]
    report(
        2,
        "m + d = k on the randomized population",
        not violations and not errors and elapsed < 60.0,
        f"{POPULATION_SIZE} immersions, {len(rows)} points, {len(rows) - len(kept)} near transitions, "
        f"{len(violations)} violations, {len(errors)} frame errors, {elapsed:.1f}s",
    )


def test_criterion_3_rank_criteria_agree(population):
    rows, _, _ = population
    bad = [
        r.point
        for _, _, r in rows
        if r.well_separated and not (r.checks.wedge and r.checks.wedge_rank == r.d and r.checks.operator_rank == r.d)
    ]
    report(3, "SVD rank, wedge minors and operator rank agree", not bad, f"{len(bad)} disagreements")


def test_criterion_4_umbilicity_verified(population):
    rows, _, _ = population
    worst, checked = 0.0, 0
    ok = True
    for _, P, r in rows:
        ht = r.extrinsic.h_tilde
        limit = umbilical_tolerance(ht)
        for col in r.umbilical_basis.T:
            norm = float(np.linalg.norm(shear_operator(P, ht, col)))
            worst = max(worst, norm / limit)
            ok &= norm <= limit
            checked += 1
    report(4, "umbilical basis vectors have vanishing shear operator", ok,
           f"{checked} vectors, worst ratio to tolerance {worst:.2e}")


def test_criterion_5_duality(catalog_frames):
    rng = np.random.default_rng(50)
    worst = 0.0
    for _, P in catalog_frames:
        r = classify(P)
        worst = max(worst, duality_residual(P, r.extrinsic, rng.normal(size=(50, P.k))))
    report(5, "duality residual", worst <= 1e-8, f"max scaled residual {worst:.2e} over {len(catalog_frames)} points")


def test_criterion_6_trace_free_and_bound(population, catalog_frames):
    rows, _, _ = population
    reports = [(P, r) for _, P, r in rows] + [(P, classify(P)) for _, P in catalog_frames]
    trace_bad = 0
    bound_bad = 0
    n1 = 0
    for P, r in reports:
        tr = np.einsum("ij,aij->a", P.g_inv, r.extrinsic.h_tilde)
        trace_bad += np.max(np.abs(tr)) > trace_tolerance(r.extrinsic.h)
        bound_bad += r.d > min(r.k, P.n * (P.n + 1) // 2 - 1)
        if P.n == 1:
            n1 += 1
            bound_bad += r.d != 0
    report(
        6,
        "trace-free shear and dimension bound",
        trace_bad == 0 and bound_bad == 0 and n1 > 0,
        f"{len(reports)} points, {n1} curves, trace violations {trace_bad}, bound violations {bound_bad}",
    )


def test_criterion_7_ad_matches_finite_differences():
    rng = np.random.default_rng(7)
    worst_g = worst_h = 0.0
    for _ in range(100):
        names = ["u", "v", "w"][: rng.integers(1, 4)]
        e = parse(random_trig_polynomial(rng, names), names)
        x = rng.uniform(-1, 1, len(names))
        j = eval_jet2(e, x)
        worst_g = max(worst_g, rel_err(j.gradient, fd_gradient(e, x)))
        worst_h = max(worst_h, rel_err(j.hessian, fd_hessian(e, x)))
    report(7, "jet derivatives match central differences", worst_g <= 1e-6 and worst_h <= 1e-4,
           f"gradient {worst_g:.1e}, hessian {worst_h:.1e}")


def test_criterion_8_indefinite_degeneracy(catalog_frames):
    null_dims = [classify(P).intersection_dim for name, P in catalog_frames if name == "null-graph"]
    euclid = []
    for name, P in catalog_frames:
        if P.signature[0] != 0:
            continue
        r = classify(P)
        span = numerical_rank(np.hstack([r.shear_basis, r.umbilical_basis]), 1e-9).rank
        euclid.append((name, r.intersection_dim == 0 and span == P.k))
    bad = [n for n, ok in euclid if not ok]
    report(
        8,
        "null shear overlaps the umbilical space; Euclidean sums are direct",
        bool(null_dims) and set(null_dims) == {1} and bool(euclid) and not bad,
        f"null-graph intersections {sorted(set(null_dims))}, {len(euclid)} Euclidean points, failing {bad}",
    )


def test_criterion_9_frame_invariance(catalog_frames):
    rng = np.random.default_rng(9)
    worst = 0.0
    changed = []
    for name, P in catalog_frames:
        r = classify(P)
        for _ in range(5):
            M = rng.normal(size=(P.k, P.k))
            if abs(np.linalg.det(M)) < 0.1:
                M += 2 * np.eye(P.k)
            r2 = classify(P.remix(M))
            if (r2.d, r2.m, r2.label, r2.intersection_dim) != (r.d, r.m, r.label, r.intersection_dim):
                changed.append(name)
            worst = max(
                worst,
                subspace_distance(r.ambient_shear_basis(), r2.ambient_shear_basis()),
                subspace_distance(r.ambient_umbilical_basis(), r2.ambient_umbilical_basis()),
            )
    report(9, "normal-frame remixing changes nothing", not changed and worst <= 1e-6,
           f"max projector distance {worst:.1e}, changed {sorted(set(changed))}")
