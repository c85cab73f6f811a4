"""Manifest loading, task execution, and report serialization.

A manifest is one JSON document: a chart (or a builder invocation), the
field's components as expression strings, named connections, and an ordered
task list.  Loading validates everything up front -- unknown coordinates,
asymmetric Christoffel data, and non-homological fields are rejected with a
location-carrying error before any task runs.

Reports are deterministic: no timestamps, sorted keys, components printed via
the canonical expression grammar (so a report can be parsed back).  Any
randomness is drawn from integer seeds named in the manifest itself.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from .algebra import (
    Chart,
    ChartError,
    EVEN,
    ODD,
    SuperPolynomial,
    parity_name,
    random_superpolynomial,
)
from .cocycles import SERIES_TAGS, build_report
from .cohomology import (
    exactness_witness,
    function_cohomology_dims,
    transgression,
)
from .connection import (
    Connection,
    ConnectionError_,
    verify_cov_lie_relation,
    verify_structural_relations,
)
from .expressions import ParseError, parse_expression, to_expression
from .lie import HomologicalField, NotHomologicalError, certify_homological
from .models import (
    RESERVED_PREFIX,
    build_chevalley_eilenberg,
    build_lie_algebroid,
    build_odd_tangent,
)
from .tensor import TensorField

DEFAULT_MAX_ORDER = 4

TASK_KINDS = ("check-q", "verify-relations", "compute", "exactness",
              "transgression", "cohomology-dims")


class ManifestError(ValueError):
    """Validation failure with a JSON-path-style location."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass
class Manifest:
    chart: Chart
    hq: HomologicalField
    connection_specs: dict[str, Any]
    tasks: list[dict]
    source: dict
    _connections: dict[str, Connection] = field(default_factory=dict)

    def connection(self, name: str, location: str = "") -> Connection:
        if name in self._connections:
            return self._connections[name]
        if name == "flat":
            conn = Connection.flat(self.chart)
        else:
            spec = self.connection_specs.get(name)
            if spec is None:
                raise ManifestError(f"unknown connection {name!r}", location)
            conn = _build_connection(self.chart, name, spec)
        self._connections[name] = conn
        return conn


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _expect_type(value, types, what: str, location: str):
    if not isinstance(value, types):
        names = (types.__name__ if isinstance(types, type)
                 else "/".join(t.__name__ for t in types))
        raise ManifestError(f"{what} must be {names}", location)
    return value


def _parse_chart(data, location: str) -> Chart:
    _expect_type(data, list, "chart", location)
    coords = []
    for pos, entry in enumerate(data):
        where = f"{location}[{pos}]"
        _expect_type(entry, list, "chart entry", where)
        if len(entry) != 2:
            raise ManifestError("chart entry must be [name, parity]", where)
        name, par = entry
        _expect_type(name, str, "coordinate name", where)
        if name.startswith(RESERVED_PREFIX):
            raise ManifestError(
                f"coordinate names may not start with {RESERVED_PREFIX!r} "
                "(reserved for the homotopy construction)", where)
        if par not in ("even", "odd"):
            raise ManifestError("parity must be 'even' or 'odd'", where)
        coords.append((name, EVEN if par == "even" else ODD))
    try:
        return Chart(coords)
    except ChartError as exc:
        raise ManifestError(str(exc), location) from None


def _parse_rational(text, location: str) -> Fraction:
    _expect_type(text, (str, int), "rational", location)
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ManifestError(f"bad rational {text!r}: {exc}", location) from None


def _build_field(chart: Optional[Chart], data, location: str):
    """Returns (chart, certified field) from expressions or a builder call."""
    _expect_type(data, dict, "q", location)
    if "builder" in data:
        model = _run_builder(data, location)
        if chart is not None and chart != model.chart:
            raise ManifestError(
                "declared chart does not match the builder's chart", location)
        return model.chart, model.hq
    if chart is None:
        raise ManifestError("a chart declaration is required unless q uses a "
                            "builder", "chart")
    comps = {}
    for name, src in data.items():
        where = f"{location}.{name}"
        try:
            index = chart.index(name)
        except Exception:
            raise ManifestError(f"unknown coordinate {name!r}", where) from None
        _expect_type(src, str, "component expression", where)
        try:
            poly = parse_expression(src, chart)
        except ParseError as exc:
            raise ManifestError(str(exc), where) from None
        if not poly.is_zero():
            comps[index] = poly
    try:
        q = TensorField.vector(chart, ODD, comps)
        return chart, certify_homological(q)
    except NotHomologicalError:
        raise
    except ValueError as exc:
        raise ManifestError(str(exc), location) from None


def _run_builder(data: dict, location: str):
    kind = data["builder"]
    if kind == "odd-tangent":
        n = _expect_type(data.get("base_dim"), int, "base_dim",
                         f"{location}.base_dim")
        return build_odd_tangent(n)
    if kind == "chevalley-eilenberg":
        dim = _expect_type(data.get("dimension"), int, "dimension",
                           f"{location}.dimension")
        raw = _expect_type(data.get("structure_constants", []), list,
                           "structure_constants",
                           f"{location}.structure_constants")
        names = [f"th{i + 1}" for i in range(dim)]
        constants: dict[tuple[int, int, int], Fraction] = {}
        for pos, entry in enumerate(raw):
            where = f"{location}.structure_constants[{pos}]"
            _expect_type(entry, list, "entry", where)
            if len(entry) != 4:
                raise ManifestError("entry must be [k, i, j, value]", where)
            k, i, j, value = entry
            try:
                idx = tuple(names.index(x) for x in (k, i, j))
            except ValueError:
                raise ManifestError(
                    f"indices must be coordinate names among {names}", where
                ) from None
            c = _parse_rational(value, where)
            constants[idx] = constants.get(idx, Fraction(0)) + c
            mirror = (idx[0], idx[2], idx[1])
            constants[mirror] = constants.get(mirror, Fraction(0)) - c
        try:
            return build_chevalley_eilenberg(dim, constants)
        except ValueError as exc:
            if isinstance(exc, NotHomologicalError):
                raise
            raise ManifestError(str(exc), location) from None
    if kind == "lie-algebroid":
        base = _expect_type(data.get("base_dim"), int, "base_dim",
                            f"{location}.base_dim")
        fiber = _expect_type(data.get("fiber_dim"), int, "fiber_dim",
                             f"{location}.fiber_dim")
        coords = [(f"x{i + 1}", EVEN) for i in range(base)]
        coords += [(f"th{a + 1}", ODD) for a in range(fiber)]
        chart = Chart(coords)

        def entries(key: str, arity: int):
            raw = _expect_type(data.get(key, []), list, key, f"{location}.{key}")
            for pos, entry in enumerate(raw):
                where = f"{location}.{key}[{pos}]"
                _expect_type(entry, list, "entry", where)
                if len(entry) != arity + 1:
                    raise ManifestError(
                        f"entry must have {arity} names and an expression", where)
                try:
                    idx = tuple(chart.index(x) for x in entry[:arity])
                except Exception:
                    raise ManifestError("unknown coordinate in entry",
                                        where) from None
                try:
                    poly = parse_expression(entry[arity], chart)
                except ParseError as exc:
                    raise ManifestError(str(exc), where) from None
                yield idx, poly

        anchor = {(i, a - base): poly for (i, a), poly in entries("anchor", 2)}
        structure = {(c - base, a - base, b - base): poly
                     for (c, a, b), poly in entries("structure_functions", 3)}
        try:
            return build_lie_algebroid(base, fiber, anchor, structure,
                                       chart=chart)
        except NotHomologicalError:
            raise
        except ValueError as exc:
            raise ManifestError(str(exc), location) from None
    raise ManifestError(f"unknown builder {kind!r}", f"{location}.builder")


def _build_connection(chart: Chart, name: str, spec) -> Connection:
    location = f"connections.{name}"
    _expect_type(spec, dict, "connection", location)
    if "random_seed" in spec:
        seed = _expect_type(spec["random_seed"], int, "random_seed",
                            f"{location}.random_seed")
        degree = spec.get("max_degree", 2)
        _expect_type(degree, int, "max_degree", f"{location}.max_degree")
        return Connection.random(chart, seed, max_degree=degree)
    raw = _expect_type(spec.get("entries", []), list, "entries",
                       f"{location}.entries")
    gamma: dict[tuple[int, int, int], SuperPolynomial] = {}
    for pos, entry in enumerate(raw):
        where = f"{location}.entries[{pos}]"
        _expect_type(entry, list, "entry", where)
        if len(entry) != 4:
            raise ManifestError("entry must be [k, i, j, expression]", where)
        try:
            k, i, j = (chart.index(x) for x in entry[:3])
        except Exception:
            raise ManifestError("unknown coordinate in Christoffel entry",
                                where) from None
        try:
            poly = parse_expression(entry[3], chart)
        except ParseError as exc:
            raise ManifestError(str(exc), where) from None
        if (k, i, j) in gamma:
            raise ManifestError("duplicate Christoffel entry", where)
        gamma[(k, i, j)] = poly
    try:
        return Connection(chart, gamma)
    except (ConnectionError_, ValueError) as exc:
        raise ManifestError(str(exc), location) from None


def _validate_task(task, pos: int) -> dict:
    where = f"tasks[{pos}]"
    _expect_type(task, dict, "task", where)
    kind = task.get("kind")
    if kind not in TASK_KINDS:
        raise ManifestError(f"task kind must be one of {TASK_KINDS}",
                            f"{where}.kind")
    def need(key, types):
        if key not in task:
            raise ManifestError(f"task {kind!r} needs {key!r}", f"{where}.{key}")
        return _expect_type(task[key], types, key, f"{where}.{key}")
    if kind == "compute":
        series = need("series", str)
        if series not in SERIES_TAGS:
            raise ManifestError(f"series must be one of {SERIES_TAGS}",
                                f"{where}.series")
        need("order", int)
        if series != "Qpow":
            need("connection", str)
    elif kind == "exactness":
        target = need("target", str)
        if target != "last-result":
            raise ManifestError("only the 'last-result' target is supported",
                                f"{where}.target")
        need("degree_bound", int)
    elif kind == "transgression":
        series = need("series", str)
        if series not in SERIES_TAGS:
            raise ManifestError(f"series must be one of {SERIES_TAGS}",
                                f"{where}.series")
        need("order", int)
        pair = need("connections", list)
        if len(pair) != 2 or not all(isinstance(x, str) for x in pair):
            raise ManifestError("connections must be a pair of names",
                                f"{where}.connections")
    elif kind == "verify-relations":
        need("connection", str)
    return task


def load_manifest(path: str) -> Manifest:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}")
    return load_manifest_data(data)


def load_manifest_data(data: dict) -> Manifest:
    _expect_type(data, dict, "manifest", "")
    chart = _parse_chart(data["chart"], "chart") if "chart" in data else None
    if "q" not in data:
        raise ManifestError("manifest must define q", "q")
    try:
        chart, hq = _build_field(chart, data["q"], "q")
    except NotHomologicalError as exc:
        raise ManifestError(f"q is not homological: {exc}", "q") from None
    specs = data.get("connections", {})
    _expect_type(specs, dict, "connections", "connections")
    if "flat" in specs:
        raise ManifestError("the name 'flat' is reserved for the zero "
                            "connection", "connections.flat")
    tasks_raw = data.get("tasks", [])
    _expect_type(tasks_raw, list, "tasks", "tasks")
    tasks = [_validate_task(t, i) for i, t in enumerate(tasks_raw)]
    manifest = Manifest(chart=chart, hq=hq, connection_specs=specs,
                        tasks=tasks, source=data)
    # eagerly build every declared connection so malformed data fails the load
    for name in specs:
        manifest.connection(name, f"connections.{name}")
    return manifest


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def tensor_to_json(t: TensorField) -> dict:
    chart = t.chart
    comps = []
    for (upper, lower), poly in sorted(t.components.items()):
        comps.append([
            [chart.names[i] for i in upper],
            [chart.names[j] for j in lower],
            to_expression(poly),
        ])
    return {
        "signature": [t.n_upper, t.m_lower],
        "parity": parity_name(t.parity),
        "components": comps,
        "zero": t.is_zero(),
    }


# ---------------------------------------------------------------------------
# task execution
# ---------------------------------------------------------------------------

def _task_check_q(manifest: Manifest, task: dict, state: dict) -> dict:
    # the load already certified; re-derive the certificate for the record
    certify_homological(manifest.hq.field)
    return {"status": "ok",
            "detail": {"certified": True,
                       "components": tensor_to_json(manifest.hq.field)}}


def _task_verify_relations(manifest: Manifest, task: dict, state: dict) -> dict:
    conn = manifest.connection(task["connection"])
    report = verify_structural_relations(conn, manifest.hq)
    samples = task.get("endomorphism_samples", 5)
    seed = task.get("seed", 0)
    rng = random.Random(seed)
    chart = manifest.chart
    endo_ok = True
    worst = None
    for _ in range(samples):
        parity = rng.randint(0, 1)
        comps = {}
        for i in range(chart.dim):
            for j in range(chart.dim):
                want = (parity + chart.parities[i] + chart.parities[j]) & 1
                poly = random_superpolynomial(chart, rng, parity=want,
                                              max_even_degree=2, max_terms=1)
                if not poly.is_zero():
                    comps[((i,), (j,))] = poly
        endo = TensorField(chart, 1, 1, parity, comps)
        residual = verify_cov_lie_relation(conn, manifest.hq, endo)
        if not residual.is_zero():
            endo_ok = False
            worst = residual
            break
    ok = report.all_zero and endo_ok
    detail = {
        "structural_residuals_zero": report.all_zero,
        "derivative_relation_zero": endo_ok,
        "summary": report.summary(),
    }
    if worst is not None:
        detail["derivative_relation_residual"] = tensor_to_json(worst)
    return {"status": "ok" if ok else "failed", "detail": detail}


def _task_compute(manifest: Manifest, task: dict, state: dict) -> dict:
    series, order = task["series"], task["order"]
    if order > state["max_order"]:
        raise ManifestError(
            f"order {order} exceeds the configured cap {state['max_order']}")
    conn = None
    conn_desc = "none (connection-free series)"
    if series != "Qpow":
        conn = manifest.connection(task["connection"])
        conn_desc = f"{task['connection']}: {conn.describe()}"
    report = build_report(series, order, manifest.hq, conn,
                          connection_description=conn_desc)
    state["last_result"] = report.value
    return {
        "status": "ok" if report.is_closed else "failed",
        "detail": {
            "series": series,
            "order": order,
            "connection": conn_desc,
            "value": tensor_to_json(report.value),
            "closedness_residual": tensor_to_json(report.closedness_residual),
            "closed": report.is_closed,
        },
    }


def _task_exactness(manifest: Manifest, task: dict, state: dict) -> dict:
    target = state.get("last_result")
    if target is None:
        raise ManifestError("exactness target 'last-result' needs an earlier "
                            "compute task")
    verdict = exactness_witness(manifest.hq, target, task["degree_bound"])
    detail = {
        "status": verdict.status,
        "degree_bound": verdict.bound,
        "conclusive": verdict.conclusive,
    }
    if verdict.witness is not None:
        detail["witness"] = tensor_to_json(verdict.witness)
    return {"status": "failed" if verdict.status == "not-closed" else "ok",
            "detail": detail}


def _task_transgression(manifest: Manifest, task: dict, state: dict) -> dict:
    series, order = task["series"], task["order"]
    if order > state["max_order"]:
        raise ManifestError(
            f"order {order} exceeds the configured cap {state['max_order']}")
    name0, name1 = task["connections"]
    result = transgression(series, order, manifest.hq,
                           manifest.connection(name0),
                           manifest.connection(name1))
    return {
        "status": "ok" if result.ok else "failed",
        "detail": {
            "series": series,
            "order": order,
            "connections": [name0, name1],
            "psi": tensor_to_json(result.psi),
            "difference": tensor_to_json(result.difference),
            "residual": tensor_to_json(result.residual),
            "residual_zero": result.ok,
        },
    }


def _task_cohomology_dims(manifest: Manifest, task: dict, state: dict) -> dict:
    dims = function_cohomology_dims(manifest.hq)
    return {"status": "ok", "detail": {"dims_by_degree": dims}}


_RUNNERS: dict[str, Callable] = {
    "check-q": _task_check_q,
    "verify-relations": _task_verify_relations,
    "compute": _task_compute,
    "exactness": _task_exactness,
    "transgression": _task_transgression,
    "cohomology-dims": _task_cohomology_dims,
}


def run_tasks(manifest: Manifest, *, max_order: int = DEFAULT_MAX_ORDER,
              parallel: bool = False) -> dict:
    """Execute the manifest's tasks in order and assemble the report.

    Per-task errors are recorded and execution continues.  With ``parallel``
    the independent tasks run on a thread pool, except that any task chain
    involving 'last-result' keeps its sequential semantics; report order
    always matches manifest order.
    """
    state = {"max_order": max_order}
    records: list[Optional[dict]] = [None] * len(manifest.tasks)

    def run_one(pos: int, task: dict) -> dict:
        try:
            return _RUNNERS[task["kind"]](manifest, task, state)
        except Exception as exc:  # recorded, not raised: remaining tasks run
            return {"status": "error",
                    "detail": {"error": f"{type(exc).__name__}: {exc}"}}

    sequential = [i for i, t in enumerate(manifest.tasks)
                  if t["kind"] in ("compute", "exactness")]
    if parallel:
        with ThreadPoolExecutor() as pool:
            futures = {}
            for pos, task in enumerate(manifest.tasks):
                if pos in sequential:
                    continue
                futures[pos] = pool.submit(run_one, pos, task)
            for pos in sequential:
                records[pos] = run_one(pos, manifest.tasks[pos])
            for pos, fut in futures.items():
                records[pos] = fut.result()
    else:
        for pos, task in enumerate(manifest.tasks):
            records[pos] = run_one(pos, task)

    for pos, task in enumerate(manifest.tasks):
        records[pos] = {"task": task, **records[pos]}
    ok = all(r["status"] == "ok" for r in records)
    return {
        "chart": [[name, parity_name(p)] for name, p in manifest.chart.coordinates],
        "q": {
            manifest.chart.names[key[0][0]]: to_expression(val)
            for key, val in sorted(manifest.hq.field.components.items())
        },
        "tasks": records,
        "ok": ok,
    }


def report_to_text(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
