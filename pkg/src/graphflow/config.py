"""
JSON run configuration (schema version 1).

Top-level keys::

    schema_version  1
    graph           {"vertices": [...],
                     "edges": [{"id", "x0", "x1"}, ...],
                     "weights": [{"vertex", "edge", "value"}, ...]}
    velocities      {edge_id: {"kind": "constant" | "sinusoid" | "piecewise" | "sampled", ...}}
    absorption      optional, {edge_id: {"kind": "zero" | "uniform" | "grid", ...}}
    initial         {edge_id: {"kind": "polynomial", "coefficients": [...]}
                              | {"kind": "cells", "values": [...]}}
    sim             {"s", "t", "dt", "cells_per_edge", "scheme", "snapshot_every"}
    output          {"directory", "formats"}

``x0`` / ``x1`` name the vertices at the x=0 / x=1 ends of an edge. Every
error names the offending key path, e.g. ``sim.dt``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GraphError, ParseError, SchemaError, ValidationError
from .graph import Edge, MetricGraph, validate_conservation
from .transport.absorption import AbsorptionProfile
from .transport.state import PolynomialData
from .transport.stepping import SCHEMES
from .velocity import VelocityProfile

SCHEMA_VERSION = 1
TOP_KEYS = {"schema_version", "graph", "velocities", "absorption", "initial", "sim", "output"}
REQUIRED_TOP = {"schema_version", "graph", "velocities", "initial", "sim"}
SIM_KEYS = {"s", "t", "dt", "cells_per_edge", "scheme", "snapshot_every"}
VELOCITY_FIELDS = {
    "constant": ({"value"}, {"lower", "upper"}),
    "sinusoid": ({"base", "amp"}, {"omega", "phase", "lower", "upper"}),
    "piecewise": ({"times", "values"}, {"period", "lower", "upper"}),
    "sampled": ({"times", "values"}, {"period", "lower", "upper"}),
}
ABSORPTION_FIELDS = {
    "zero": (set(), set()),
    "uniform": ({"base"}, {"amp", "omega", "phase"}),
    "grid": ({"times", "xs", "values"}, {"period"}),
}


class MixedEdgeData:
    """Initial data given per edge as a polynomial or as cell averages."""

    def __init__(self, parts):
        self.parts = parts  # list of ("polynomial", coeffs) or ("cells", array)
        self._poly = PolynomialData([c if k == "polynomial" else [0.0] for k, c in parts])

    @property
    def m(self) -> int:
        return len(self.parts)

    @property
    def all_polynomial(self) -> bool:
        return all(k == "polynomial" for k, _ in self.parts)

    def _cells(self, j):
        vals = np.asarray(self.parts[j][1], dtype=float)
        N = len(vals)
        cum = np.concatenate([[0.0], np.cumsum(vals)]) / N
        return vals, N, cum

    def value(self, j, x):
        if self.parts[j][0] == "polynomial":
            return self._poly.value(j, x)
        vals, N, _ = self._cells(j)
        x = np.asarray(x, dtype=float)
        return vals[np.clip(np.floor(x * N).astype(int), 0, N - 1)]

    def integral(self, j, a, b):
        if self.parts[j][0] == "polynomial":
            return self._poly.integral(j, a, b)
        vals, N, cum = self._cells(j)

        def prim(y):
            y = np.asarray(y, dtype=float)
            i = np.clip(np.floor(y * N).astype(int), 0, N - 1)
            return cum[i] + (y - i / N) * vals[i]

        return prim(b) - prim(a)


@dataclass
class SimSettings:
    s: float
    t: float
    dt: float
    cells_per_edge: int
    scheme: str
    snapshot_every: int = 1


@dataclass
class SimConfig:
    graph: MetricGraph
    velocities: list
    absorption: list | None
    initial: MixedEdgeData
    sim: SimSettings
    output_directory: str
    formats: list
    raw: dict = field(repr=False)
    sha256: str = ""
    diagnostics: list = field(default_factory=list)  # (key path, message), non-strict mode only

    @property
    def has_absorption(self) -> bool:
        return self.absorption is not None and any(q.kind != "zero" for q in self.absorption)


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# -- small schema helpers ------------------------------------------------------


def _obj(value, path):
    if not isinstance(value, dict):
        raise SchemaError("expected an object", path)
    return value


def _keys(obj, path, required, optional=frozenset()):
    missing = sorted(set(required) - obj.keys())
    if missing:
        raise SchemaError(f"missing field {missing[0]!r}", f"{path}.{missing[0]}" if path else missing[0])
    extra = sorted(obj.keys() - set(required) - set(optional))
    if extra:
        raise SchemaError(f"unexpected field {extra[0]!r}", f"{path}.{extra[0]}" if path else extra[0])


def _num(value, path, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError("expected a finite number", path)
    if positive and value <= 0:
        raise SchemaError("must be > 0", path)
    if nonneg and value < 0:
        raise SchemaError("must be >= 0", path)
    return float(value)


def _int(value, path, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError("expected an integer", path)
    if value < minimum:
        raise SchemaError(f"must be >= {minimum}", path)
    return value


def _numlist(value, path, min_len=1):
    if not isinstance(value, list) or len(value) < min_len:
        raise SchemaError(f"expected a list of at least {min_len} numbers", path)
    return [_num(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _str(value, path):
    if not isinstance(value, str) or not value:
        raise SchemaError("expected a non-empty string", path)
    return value


# -- sections ---------------------------------------------------------------


def _parse_graph(sec):
    path = "graph"
    _obj(sec, path)
    _keys(sec, path, {"vertices", "edges", "weights"})
    if not isinstance(sec["vertices"], list) or not sec["vertices"]:
        raise SchemaError("expected a non-empty list", "graph.vertices")
    vertices = [_str(v, f"graph.vertices[{i}]") for i, v in enumerate(sec["vertices"])]
    if not isinstance(sec["edges"], list) or not sec["edges"]:
        raise SchemaError("expected a non-empty list", "graph.edges")
    edges = []
    for i, e in enumerate(sec["edges"]):
        p = f"graph.edges[{i}]"
        _obj(e, p)
        _keys(e, p, {"id", "x0", "x1"})
        edges.append((_str(e["id"], f"{p}.id"), _str(e["x0"], f"{p}.x0"), _str(e["x1"], f"{p}.x1")))
    if not isinstance(sec["weights"], list):
        raise SchemaError("expected a list", "graph.weights")
    weights = {}
    for i, w in enumerate(sec["weights"]):
        p = f"graph.weights[{i}]"
        _obj(w, p)
        _keys(w, p, {"vertex", "edge", "value"})
        key = (_str(w["vertex"], f"{p}.vertex"), _str(w["edge"], f"{p}.edge"))
        if key in weights:
            raise SchemaError(f"duplicate weight for {key}", p)
        weights[key] = _num(w["value"], f"{p}.value")
    try:
        graph = MetricGraph.build(vertices, [Edge(*e) for e in edges], weights)
    except GraphError as exc:
        raise ValidationError(str(exc), _graph_error_path(exc, weights)) from exc
    return graph


def _graph_error_path(exc, weights):
    if exc.pair is not None:
        return f"graph.weights.{exc.pair[0]}/{exc.pair[1]}"
    return "graph.edges"


def _parse_velocity(spec, path):
    _obj(spec, path)
    kind = spec.get("kind")
    if kind not in VELOCITY_FIELDS:
        raise SchemaError(f"kind must be one of {sorted(VELOCITY_FIELDS)}", f"{path}.kind")
    req, opt = VELOCITY_FIELDS[kind]
    _keys(spec, path, req | {"kind"}, opt)
    bounds = {k: _num(spec[k], f"{path}.{k}") for k in ("lower", "upper") if k in spec}
    try:
        if kind == "constant":
            return VelocityProfile.constant(_num(spec["value"], f"{path}.value"), **bounds)
        if kind == "sinusoid":
            return VelocityProfile.sinusoid(
                _num(spec["base"], f"{path}.base"),
                _num(spec["amp"], f"{path}.amp"),
                _num(spec.get("omega", 1.0), f"{path}.omega"),
                _num(spec.get("phase", 0.0), f"{path}.phase"),
                **bounds,
            )
        times = _numlist(spec["times"], f"{path}.times", 1 if kind == "piecewise" else 2)
        values = _numlist(spec["values"], f"{path}.values", len(times))
        period = _num(spec["period"], f"{path}.period", positive=True) if "period" in spec else None
        ctor = VelocityProfile.piecewise if kind == "piecewise" else VelocityProfile.sampled
        return ctor(times, values, period=period, **bounds)
    except ValueError as exc:
        raise ValidationError(str(exc), path) from exc


def _parse_absorption(spec, path):
    _obj(spec, path)
    kind = spec.get("kind")
    if kind not in ABSORPTION_FIELDS:
        raise SchemaError(f"kind must be one of {sorted(ABSORPTION_FIELDS)}", f"{path}.kind")
    req, opt = ABSORPTION_FIELDS[kind]
    _keys(spec, path, req | {"kind"}, opt)
    if kind == "zero":
        return AbsorptionProfile.zero()
    if kind == "uniform":
        return AbsorptionProfile.uniform(
            _num(spec["base"], f"{path}.base"),
            _num(spec.get("amp", 0.0), f"{path}.amp"),
            _num(spec.get("omega", 0.0), f"{path}.omega"),
            _num(spec.get("phase", 0.0), f"{path}.phase"),
        )
    times = _numlist(spec["times"], f"{path}.times")
    xs = _numlist(spec["xs"], f"{path}.xs", 2)
    if not isinstance(spec["values"], list) or len(spec["values"]) != len(times):
        raise SchemaError("expected one row per time", f"{path}.values")
    rows = [_numlist(r, f"{path}.values[{i}]", len(xs)) for i, r in enumerate(spec["values"])]
    if any(len(r) != len(xs) for r in rows):
        raise SchemaError("each row needs one value per x", f"{path}.values")
    period = _num(spec["period"], f"{path}.period", positive=True) if "period" in spec else None
    try:
        return AbsorptionProfile.grid(times, xs, rows, period)
    except ValueError as exc:
        raise ValidationError(str(exc), path) from exc


def _parse_sim(sec):
    _obj(sec, "sim")
    _keys(sec, "sim", {"s", "t", "dt", "cells_per_edge", "scheme"}, {"snapshot_every"})
    s = _num(sec["s"], "sim.s")
    t = _num(sec["t"], "sim.t")
    dt = _num(sec["dt"], "sim.dt", positive=True)
    N = _int(sec["cells_per_edge"], "sim.cells_per_edge", 4)
    scheme = sec["scheme"]
    if scheme not in SCHEMES:
        raise SchemaError(f"scheme must be one of {list(SCHEMES)}", "sim.scheme")
    every = _int(sec.get("snapshot_every", 1), "sim.snapshot_every", 1)
    if t < s:
        raise SchemaError("t must be >= s", "sim.t")
    return SimSettings(s, t, dt, N, scheme, every)


def _per_edge(sec, name, graph, required=True):
    _obj(sec, name)
    ids = graph.edge_ids
    for key in sec:
        if key not in ids:
            raise ValidationError(f"unknown edge id {key!r}", f"{name}.{key}")
    if required:
        for e in ids:
            if e not in sec:
                raise SchemaError(f"missing entry for edge {e!r}", f"{name}.{e}")
    return ids


def parse_config_dict(raw: dict, strict: bool = True) -> SimConfig:
    """Validate an already-decoded configuration; see :func:`parse_config`."""
    _obj(raw, "")
    _keys(raw, "", REQUIRED_TOP, TOP_KEYS - REQUIRED_TOP)
    if raw["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version (expected {SCHEMA_VERSION})", "schema_version")
    graph = _parse_graph(raw["graph"])
    sim = _parse_sim(raw["sim"])

    ids = _per_edge(raw["velocities"], "velocities", graph)
    velocities = [_parse_velocity(raw["velocities"][e], f"velocities.{e}") for e in ids]

    absorption = None
    if "absorption" in raw:
        _per_edge(raw["absorption"], "absorption", graph, required=False)
        absorption = [
            _parse_absorption(raw["absorption"][e], f"absorption.{e}")
            if e in raw["absorption"]
            else AbsorptionProfile.zero()
            for e in ids
        ]

    _per_edge(raw["initial"], "initial", graph)
    parts = []
    for e in ids:
        p = f"initial.{e}"
        spec = _obj(raw["initial"][e], p)
        kind = spec.get("kind")
        if kind == "polynomial":
            _keys(spec, p, {"kind", "coefficients"})
            parts.append(("polynomial", _numlist(spec["coefficients"], f"{p}.coefficients")))
        elif kind == "cells":
            _keys(spec, p, {"kind", "values"})
            vals = _numlist(spec["values"], f"{p}.values")
            if len(vals) != sim.cells_per_edge:
                raise ValidationError(
                    f"expected {sim.cells_per_edge} cell values, got {len(vals)}", f"{p}.values"
                )
            parts.append(("cells", vals))
        else:
            raise SchemaError("kind must be 'polynomial' or 'cells'", f"{p}.kind")

    out = raw.get("output", {})
    _obj(out, "output")
    _keys(out, "output", set(), {"directory", "formats"})
    directory = _str(out.get("directory", "out"), "output.directory")
    formats = out.get("formats", ["csv", "json"])
    if not isinstance(formats, list) or any(f not in ("csv", "json") for f in formats):
        raise SchemaError("formats must be a list drawn from ['csv', 'json']", "output.formats")

    if sim.scheme == "oracle" and absorption is not None and any(q.kind != "zero" for q in absorption):
        raise ValidationError("the oracle scheme cannot take absorption", "sim.scheme")

    diagnostics = []
    cons = validate_conservation(graph)
    if not cons.ok:
        bad = list(cons.vertex_residuals) or list(cons.column_residuals)
        diagnostics.append(("graph.weights", f"weights violate conservation at {', '.join(bad)}"))
    window = (sim.s, sim.t) if sim.t > sim.s else (sim.s, sim.s + 1.0)
    for e, prof in zip(ids, velocities):
        rep = prof.validate_bounds(window)
        if not rep.ok:
            diagnostics.append(
                (
                    f"velocities.{e}",
                    f"speed range [{rep.observed_min:.6g}, {rep.observed_max:.6g}] violates "
                    f"declared bounds [{prof.lower:.6g}, {prof.upper:.6g}] or positivity",
                )
            )
    if strict and diagnostics:
        raise ValidationError(diagnostics[0][1], diagnostics[0][0])

    return SimConfig(
        graph=graph,
        velocities=velocities,
        absorption=absorption,
        initial=MixedEdgeData(parts),
        sim=sim,
        output_directory=directory,
        formats=list(formats),
        raw=raw,
        sha256=config_hash(raw),
        diagnostics=diagnostics,
    )


def parse_config(path, strict: bool = True) -> SimConfig:
    """
    Read and validate a configuration file.

    Raises
    ------
    ParseError
        Malformed JSON (message carries line and column).
    SchemaError
        Missing, extra or ill-typed fields.
    ValidationError
        Graph, weight, conservation or velocity-bound problems. With
        ``strict=False`` conservation and bound problems are collected in
        ``SimConfig.diagnostics`` instead.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config_dict(raw, strict)
