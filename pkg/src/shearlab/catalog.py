"""Built-in reference immersions with hand-derived expectations."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources

from .errors import ShearlabError, UnknownEntryError
from .shear import NO_UMBILICAL, SINGLE_SHEAR, TOTALLY_UMBILICAL, classify_at, label_for
from .specfile import SpecFile, loads
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class Expected:
    d: int
    m: int
    label: str
    intersection_dim: int


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    filename: str
    expected: Expected
    provenance: str

    def text(self) -> str:
        return resources.files("shearlab").joinpath("specs", self.filename).read_text("utf-8")

    def spec(self) -> SpecFile:
        return loads(self.text())


def _entry(name, filename, d, m, label, inter, provenance) -> CatalogEntry:
    entry = CatalogEntry(name, filename, Expected(d, m, label, inter), provenance)
    spec = entry.spec()
    n, k = spec.immersion.n, spec.immersion.k
    # reject inconsistent expectations at import time
    if d + m != k or d > min(k, n * (n + 1) // 2 - 1) or label != label_for(m, k):
        raise ValueError(f"catalog entry {name!r} has inconsistent expectations")
    return entry


ENTRIES: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        _entry(
            "plane", "plane.spec", 0, 1, TOTALLY_UMBILICAL, 0,
            "affine immersion into flat space: second derivatives and Christoffels vanish, h = 0",
        ),
        _entry(
            "sphere", "sphere.spec", 0, 1, TOTALLY_UMBILICAL, 0,
            "Phi_ij = -(1/r) g_ij N for the unit normal N = Phi/r, hence h~ = 0",
        ),
        _entry(
            "cylinder", "cylinder.spec", 1, 0, NO_UMBILICAL, 0,
            "h(du,du) = -N, h(dv,dv) = h(du,dv) = 0, g = 1: h~(du,du) = -N/2 != 0 with k = 1",
        ),
        _entry(
            "torus", "torus.spec", 1, 1, SINGLE_SHEAR, 0,
            "h~(du,du) = -h~(dv,dv) = (-cos u, -sin u, cos v, sin v)/2 spans one line, "
            "gbar-orthogonal to H; Euclidean so the sum is direct",
        ),
        _entry(
            "minkowski-sphere", "minkowski_sphere.spec", 0, 2, TOTALLY_UMBILICAL, 0,
            "second derivatives have no dt component and the spatial sphere is umbilical: h ∝ g",
        ),
        _entry(
            "null-graph", "null_graph.spec", 1, 1, SINGLE_SHEAR, 1,
            "Phi_uu = 2 l with l = (1,0,0,1) null and normal; g = 1 so h~ = l (du du - dv dv); "
            "gbar(l, l) = 0 puts l in both spaces",
        ),
        _entry(
            "saddle-null-graph", "saddle_null_graph.spec", 1, 1, SINGLE_SHEAR, 1,
            "Phi_uv = l, other second derivatives vanish, g = 1: h~ = l (du dv + dv du)",
        ),
        _entry(
            "helix", "helix.spec", 0, 2, TOTALLY_UMBILICAL, 0,
            "n = 1: a trace-free 1 x 1 form vanishes, d <= n(n+1)/2 - 1 = 0",
        ),
        _entry(
            "quadric-surface", "quadric_surface.spec", 2, 1, "intermediate(1)", 0,
            "origin: h~ values e3 - e4 and e5 independent, umbilical line e3 + e4; "
            "other samples checked by Euclidean brute force in the test suite",
        ),
        _entry(
            "flrw-sphere", "flrw_sphere.spec", 0, 2, TOTALLY_UMBILICAL, 0,
            "slice t = const has extrinsic curvature a a' delta (umbilical along dt); coordinate "
            "sphere umbilical in the conformally flat slice",
        ),
    ]
}


def spec_text(name: str) -> str:
    """Spec-file text of a catalog entry or of any other shipped example file."""
    if name in ENTRIES:
        return ENTRIES[name].text()
    path = resources.files("shearlab").joinpath("specs", f"{name}.spec")
    if path.is_file():
        return path.read_text("utf-8")
    raise UnknownEntryError(
        f"unknown catalog entry or example {name!r}; available: {', '.join(ENTRIES)}"
    )


def list_entries() -> list[CatalogEntry]:
    return list(ENTRIES.values())


def get_entry(name: str) -> CatalogEntry:
    try:
        return ENTRIES[name]
    except KeyError:
        raise UnknownEntryError(
            f"unknown catalog entry {name!r}; available: {', '.join(ENTRIES)}"
        ) from None


@dataclass
class EntryResult:
    name: str
    passed: bool
    points: int
    failures: list[str] = field(default_factory=list)
    elapsed: float = 0.0


def run_entry(name: str, tol: Tolerances = DEFAULT) -> EntryResult:
    """Classify every sample point of an entry and compare with its expectation."""
    entry = get_entry(name)
    spec = entry.spec()
    exp = entry.expected
    start = time.perf_counter()
    failures = []
    samples = spec.samples()
    for u in samples:
        try:
            r = classify_at(spec.immersion, u, tol)
        except ShearlabError as exc:
            failures.append(f"u={u.tolist()}: {exc}")
            continue
        got = (r.d, r.m, r.label, r.intersection_dim)
        want = (exp.d, exp.m, exp.label, exp.intersection_dim)
        if got != want:
            failures.append(f"u={u.tolist()}: got {got}, expected {want}")
    return EntryResult(name, not failures, len(samples), failures, time.perf_counter() - start)
