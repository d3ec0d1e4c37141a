"""Line-oriented spec files describing an ambient metric, an immersion and samples.

Example::

    # round sphere of radius 2
    [ambient]
    coordinates = x, y, z
    signature = 0, 3
    g[x,x] = 1
    g[y,y] = 1
    g[z,z] = 1

    [immersion]
    parameters = th, ph
    phi[x] = 2*sin(th)*cos(ph)
    phi[y] = 2*sin(th)*sin(ph)
    phi[z] = 2*cos(th)

    [samples]
    point = pi/3, pi/5
    grid[th] = 0.3, 2.8, 5
    grid[ph] = 0, 6, 5

Metric entries not listed are zero; ``g[a,b]`` and ``g[b,a]`` denote the same
entry. Sample values may be constant expressions.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, SpecFileError
from .expr import evaluate, parse
from .immersion import ImmersionSpec
from .semiriemann import AmbientManifold

_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_KEY = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\[([^\]]*)\])?$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")
SECTIONS = ("ambient", "immersion", "samples")


@dataclass
class SpecFile:
    ambient: AmbientManifold
    immersion: ImmersionSpec
    points: list[np.ndarray] = field(default_factory=list)
    grid_axes: dict[str, np.ndarray] = field(default_factory=dict)
    source: str = ""

    def grid(self) -> list[np.ndarray]:
        """Rectangular grid in parameter order (last parameter varies fastest)."""
        if not self.grid_axes:
            return []
        axes = [self.grid_axes[p] for p in self.immersion.parameters]
        return [np.array(p) for p in itertools.product(*axes)]

    def samples(self) -> list[np.ndarray]:
        """Explicit points followed by grid points."""
        return list(self.points) + self.grid()


@dataclass
class _Line:
    key: str
    index: str | None
    value: str
    line: int
    value_col: int


def _split_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",")]


def _names(entry: _Line) -> tuple[str, ...]:
    names = _split_list(entry.value)
    for name in names:
        if not _NAME.match(name):
            raise SpecFileError(f"invalid name {name!r}", entry.line, entry.value_col)
    if len(set(names)) != len(names):
        raise SpecFileError("duplicate names", entry.line, entry.value_col)
    return tuple(names)


def _expr(entry: _Line, variables):
    try:
        return parse(entry.value, variables)
    except ParseError as exc:
        message = exc.message
        if exc.expected:
            message += f" (expected one of: {', '.join(exc.expected)})"
        raise SpecFileError(message, entry.line, entry.value_col + exc.column - 1) from exc
    except ValueError as exc:
        raise SpecFileError(str(exc), entry.line, entry.value_col) from exc


def _constants(entry: _Line, variables) -> list[float]:
    values = []
    col = entry.value_col
    for part in entry.value.split(","):
        sub = _Line(entry.key, entry.index, part, entry.line, col + len(part) - len(part.lstrip()))
        expr = _expr(sub, variables)
        if expr.free_variables():
            raise SpecFileError("sample values must be constant", entry.line, sub.value_col)
        values.append(evaluate(expr, [0.0] * len(variables)))
        col += len(part) + 1
    return values


def loads(text: str) -> SpecFile:
    sections: dict[str, list[_Line]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        m = _SECTION.match(stripped)
        if m:
            current = m.group(1).lower()
            if current not in SECTIONS:
                raise SpecFileError(f"unknown section [{current}]", lineno, 1)
            if current in sections:
                raise SpecFileError(f"section [{current}] appears twice", lineno, 1)
            sections[current] = []
            continue
        if current is None:
            raise SpecFileError("entry outside of any section", lineno, 1)
        if "=" not in line:
            raise SpecFileError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1)
        lhs, rhs = line.split("=", 1)
        km = _KEY.match(lhs.strip())
        if not km:
            raise SpecFileError(f"malformed key {lhs.strip()!r}", lineno, 1)
        value_col = len(lhs) + 2 + (len(rhs) - len(rhs.lstrip()))
        sections[current].append(_Line(km.group(1), km.group(2), rhs.strip(), lineno, value_col))

    for required in ("ambient", "immersion"):
        if required not in sections:
            raise SpecFileError(f"missing section [{required}]")

    ambient = _ambient(sections["ambient"])
    immersion = _immersion(sections["immersion"], ambient)
    spec = SpecFile(ambient, immersion, source=text)
    _samples(sections.get("samples", []), spec)
    return spec


def _single(entries: list[_Line], key: str, section: str) -> _Line:
    found = [e for e in entries if e.key == key and e.index is None]
    if not found:
        raise SpecFileError(f"[{section}] is missing '{key}'")
    if len(found) > 1:
        raise SpecFileError(f"'{key}' given twice", found[1].line, 1)
    return found[0]


def _ambient(entries: list[_Line]) -> AmbientManifold:
    coords_line = _single(entries, "coordinates", "ambient")
    coords = _names(coords_line)
    sig_line = _single(entries, "signature", "ambient")
    try:
        signature = tuple(int(s) for s in _split_list(sig_line.value))
    except ValueError:
        raise SpecFileError("signature must be two integers 'n_minus, n_plus'", sig_line.line, sig_line.value_col) from None
    if len(signature) != 2 or min(signature) < 0 or sum(signature) != len(coords):
        raise SpecFileError(
            f"signature {sig_line.value!r} inconsistent with {len(coords)} coordinates",
            sig_line.line,
            sig_line.value_col,
        )
    comps = {}
    index = {c: i for i, c in enumerate(coords)}
    for e in entries:
        if e.key in ("coordinates", "signature") and e.index is None:
            continue
        if e.key == "dimension" and e.index is None:
            if e.value.strip() != str(len(coords)):
                raise SpecFileError(
                    f"dimension {e.value} does not match {len(coords)} coordinates", e.line, e.value_col
                )
            continue
        if e.key != "g" or e.index is None:
            raise SpecFileError(f"unknown key {e.key!r} in [ambient]", e.line, 1)
        pair = _split_list(e.index)
        if len(pair) != 2 or any(p not in index for p in pair):
            raise SpecFileError(f"metric index g[{e.index}] must name two coordinates", e.line, 1)
        a, b = sorted(index[p] for p in pair)
        if (a, b) in comps:
            raise SpecFileError(f"metric entry g[{e.index}] given twice", e.line, 1)
        comps[(a, b)] = _expr(e, coords)
    if not comps:
        raise SpecFileError("[ambient] has no metric entries")
    try:
        return AmbientManifold(coords, signature, comps)
    except ValueError as exc:
        raise SpecFileError(str(exc), coords_line.line, 1) from exc


def _immersion(entries: list[_Line], ambient: AmbientManifold) -> ImmersionSpec:
    params_line = _single(entries, "parameters", "immersion")
    params = _names(params_line)
    if len(params) >= ambient.dimension:
        raise SpecFileError(
            f"{len(params)} parameters leave no co-dimension in a {ambient.dimension}-dimensional ambient",
            params_line.line,
            params_line.value_col,
        )
    comps = {}
    for e in entries:
        if e.key == "parameters" and e.index is None:
            continue
        if e.key != "phi" or e.index is None:
            raise SpecFileError(f"unknown key {e.key!r} in [immersion]", e.line, 1)
        name = e.index.strip()
        if name not in ambient.coordinates:
            raise SpecFileError(f"phi[{name}] does not name an ambient coordinate", e.line, 1)
        if name in comps:
            raise SpecFileError(f"phi[{name}] given twice", e.line, 1)
        comps[name] = _expr(e, params)
    missing = [c for c in ambient.coordinates if c not in comps]
    if missing:
        raise SpecFileError(f"[immersion] is missing components for {', '.join(missing)}")
    return ImmersionSpec(params, tuple(comps[c] for c in ambient.coordinates), ambient)


def _samples(entries: list[_Line], spec: SpecFile) -> None:
    params = spec.immersion.parameters
    for e in entries:
        if e.key == "point" and e.index is None:
            values = _constants(e, params)
            if len(values) != len(params):
                raise SpecFileError(
                    f"point needs {len(params)} values, got {len(values)}", e.line, e.value_col
                )
            spec.points.append(np.array(values))
        elif e.key == "grid" and e.index is not None:
            name = e.index.strip()
            if name not in params:
                raise SpecFileError(f"grid[{name}] does not name a parameter", e.line, 1)
            if name in spec.grid_axes:
                raise SpecFileError(f"grid[{name}] given twice", e.line, 1)
            values = _constants(e, params)
            if len(values) != 3 or not float(values[2]).is_integer() or values[2] < 1:
                raise SpecFileError("grid needs 'min, max, count' with integer count >= 1", e.line, e.value_col)
            spec.grid_axes[name] = np.linspace(values[0], values[1], int(values[2]))
        else:
            raise SpecFileError(f"unknown key {e.key!r} in [samples]", e.line, 1)
    if spec.grid_axes and set(spec.grid_axes) != set(params):
        missing = sorted(set(params) - set(spec.grid_axes))
        raise SpecFileError(f"grid is missing axes for {', '.join(missing)}")


def load(path: str | Path) -> SpecFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise SpecFileError(f"spec file not found: {path}") from None
    try:
        return loads(text)
    except SpecFileError as exc:
        wrapped = SpecFileError(f"{path}: {exc}")
        wrapped.line, wrapped.column = exc.line, exc.column
        raise wrapped from exc
