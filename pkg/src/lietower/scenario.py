"""Scenario files: YAML documents naming objects and the checks to run on them.

Schema::

    name: <str>                      # optional, defaults to the file stem
    seed: <int>                      # default 0
    sampling: {count: <int>, low: <float>, high: <float>}
    tolerance: <float>               # default for every command
    objects:
      <name>: {make: <constructor>, <parameters>...}
    commands:
      - {op: <operation>, <arguments>..., tol: <float>, expect: pass|fail}

Constructors and operations are listed by ``lietower list``. Objects may
refer to earlier objects by name. Structure-constant indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import yaml

from .algebroid import StructureFunctions, tangent_algebroid, zero_anchor_algebroid
from .checks import Sampling
from .constructions import (PoissonTensor, action_algebroid, canonical_poisson,
                            distribution_algebroid, harmonic_oscillator_N, nijenhuis_algebroid,
                            poisson_cotangent_algebroid)
from .dynamics import make_semispray
from .fields import Chart, VectorField
from .jets import JetChart, PDESystem1
from .tower import corank1_tower, identity_tower, nijenhuis_tower, truncation_system

__all__ = ["Scenario", "SchemaError", "load_scenario", "parse_scenario", "CONSTRUCTORS",
           "OPERATIONS", "list_constructors"]

LINE = "__line__"


class SchemaError(ValueError):
    """Scenario document does not match the schema."""

    def __init__(self, message: str, line: int | None = None, field_: str | None = None):
        self.line, self.field = line, field_
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_ is not None:
            where.append(f"field '{field_}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class _LineLoader(yaml.SafeLoader):
    """Records the source line of every mapping under ``__line__``."""


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=True)
    mapping[LINE] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _strip(value):
    if isinstance(value, dict):
        return {k: _strip(v) for k, v in value.items() if k != LINE}
    if isinstance(value, list):
        return [_strip(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# parameter helpers


class _Spec:
    """A mapping from the document with line-aware accessors."""

    def __init__(self, data: dict, where: str):
        self.data = data
        self.line = data.get(LINE)
        self.where = where
        self.used = {LINE}

    def error(self, message: str, key: str | None = None) -> SchemaError:
        return SchemaError(message, self.line, f"{self.where}.{key}" if key else self.where)

    def get(self, key: str, kind=None, default: Any = ..., check: Callable | None = None):
        self.used.add(key)
        if key not in self.data:
            if default is ...:
                raise self.error("missing required field", key)
            return default
        value = _strip(self.data[key])
        if kind is not None:
            kinds = kind if isinstance(kind, tuple) else (kind,)
            if float in kinds and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if not isinstance(value, kinds) or isinstance(value, bool) and bool not in kinds:
                names = "/".join(k.__name__ for k in kinds)
                raise self.error(f"expected {names}, got {type(value).__name__}", key)
        if check is not None:
            problem = check(value)
            if problem:
                raise self.error(problem, key)
        return value

    def finish(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise self.error(f"unknown field(s) {extra}")


def _positive(v):
    return None if v > 0 else "must be positive"


def _at_least_one(v):
    return None if v >= 1 else "must be >= 1"


def _str_list(v):
    if not isinstance(v, list) or not all(isinstance(x, (str, int, float)) for x in v):
        return "expected a list of expressions"
    return None


def _matrix(v):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        return "expected a list of rows"
    if len({len(r) for r in v}) != 1:
        return "rows have different lengths"
    return None


def _structure(spec: _Spec, m: int, key: str = "structure") -> StructureFunctions:
    raw = spec.get(key, list, default=[])
    upper = {}
    for entry in raw:
        if not (isinstance(entry, list) and len(entry) == 4):
            raise spec.error("entries are [k, i, j, value] with 0-based indices", key)
        k, i, j, value = entry
        if not all(isinstance(t, int) and 0 <= t < m for t in (k, i, j)):
            raise spec.error(f"index out of range 0..{m - 1} in {entry}", key)
        if i >= j:
            raise spec.error(f"entries need i < j, got {entry}", key)
        upper[(k, i, j)] = value
    return upper


# ---------------------------------------------------------------------------
# constructors


def _chart_from(spec: _Spec, dim_key: str = "dim") -> Chart:
    if "coords" in spec.data:
        names = spec.get("coords", list, check=lambda v: None if v and all(isinstance(x, str) for x in v)
                         else "expected a list of coordinate names")
        try:
            return Chart(tuple(names))
        except ValueError as err:
            raise spec.error(str(err), "coords") from None
    return Chart.euclidean(spec.get(dim_key, int, default=1, check=_at_least_one))


def _make_tangent(spec, objs):
    return tangent_algebroid(_chart_from(spec))


def _make_zero_anchor(spec, objs):
    chart = _chart_from(spec)
    m = spec.get("fiber", int, check=_at_least_one)
    upper = _structure(spec, m)
    return zero_anchor_algebroid(chart, m, StructureFunctions.antisymmetric(m, upper, chart) if upper else None)


def _make_nijenhuis(spec, objs):
    return nijenhuis_algebroid(harmonic_oscillator_N(spec.get("level", int, check=_at_least_one)))


def _make_distribution(spec, objs):
    chart = _chart_from(spec)
    frame_raw = spec.get("frame", list, check=_matrix)
    frame = [VectorField(chart, tuple(map(str, r))) for r in frame_raw]
    C = StructureFunctions.antisymmetric(len(frame), _structure(spec, len(frame)), chart)
    return distribution_algebroid(frame, C)


def _make_action(spec, objs):
    chart = _chart_from(spec)
    gens_raw = spec.get("generators", list, check=_matrix)
    gens = [VectorField(chart, tuple(map(str, r))) for r in gens_raw]
    C = StructureFunctions.antisymmetric(len(gens), _structure(spec, len(gens)), chart)
    return action_algebroid(chart, gens, C)


def _make_affine_action(spec, objs):
    chart = Chart(("x",))
    gens = [VectorField(chart, ("1",)), VectorField(chart, ("x",))]
    return action_algebroid(chart, gens, StructureFunctions.antisymmetric(2, {(0, 0, 1): 1.0}))


def _make_poisson(spec, objs):
    if "pairs" in spec.data:
        P = canonical_poisson(spec.get("pairs", int, check=_at_least_one))
    else:
        chart = _chart_from(spec)
        rows = spec.get("P", list, check=_matrix)
        P = PoissonTensor(chart, [[str(x) for x in r] for r in rows])
    return poisson_cotangent_algebroid(P)


def _make_nijenhuis_tower(spec, objs):
    return nijenhuis_tower(spec.get("depth", int, check=_at_least_one))


def _make_corank1_tower(spec, objs):
    return corank1_tower(spec.get("depth", int, check=_at_least_one))


def _make_identity_tower(spec, objs):
    return identity_tower(spec.get("depth", int, check=lambda v: None if v >= 0 else "must be >= 0"),
                          spec.get("dim", int, default=1, check=_at_least_one))


def _make_truncation(spec, objs):
    dims = spec.get("dims", list, check=lambda v: None if v and all(isinstance(d, int) and d >= 1 for d in v)
                    else "expected a list of positive dimensions")
    return truncation_system(dims)


def _ref(spec: _Spec, objs: dict, key: str, kind: type | tuple | None = None):
    name = spec.get(key, str)
    if name not in objs:
        raise spec.error(f"unknown object '{name}' (objects must be defined before use)", key)
    obj = objs[name]
    if kind is not None and not isinstance(obj, kind):
        raise spec.error(f"object '{name}' is not a {kind.__name__ if isinstance(kind, type) else kind}", key)
    return obj


def _make_semispray(spec, objs):
    from .algebroid import Algebroid

    A = _ref(spec, objs, "algebroid", Algebroid)
    xi = spec.get("xi", list, check=_str_list)
    return make_semispray(A, [str(x) for x in xi])


def _make_pde(spec, objs):
    return PDESystem1(str(spec.get("phi", (str, int, float))), str(spec.get("psi", (str, int, float))))


def _make_field(spec, objs):
    comps = spec.get("components", list, check=_str_list)
    chart = JetChart(0) if "coords" not in spec.data else _chart_from(spec)
    return VectorField(chart, tuple(str(c) for c in comps))


# name -> (signature shown by ``list``, builder)
CONSTRUCTORS: dict[str, tuple[str, Callable]] = {
    "action": ("action(coords, generators, structure)", _make_action),
    "affine_action": ("affine_action()", _make_affine_action),
    "corank1_tower": ("corank1_tower(depth)", _make_corank1_tower),
    "distribution": ("distribution(coords, frame, structure)", _make_distribution),
    "field": ("field(components over x, y, u)", _make_field),
    "identity_tower": ("identity_tower(depth, dim)", _make_identity_tower),
    "nijenhuis": ("nijenhuis(level)", _make_nijenhuis),
    "nijenhuis_tower": ("nijenhuis_tower(depth)", _make_nijenhuis_tower),
    "pde_system": ("pde_system(phi, psi)", _make_pde),
    "poisson_cotangent": ("poisson_cotangent(P matrix)", _make_poisson),
    "semispray": ("semispray(algebroid, xi)", _make_semispray),
    "tangent": ("tangent(dim)", _make_tangent),
    "truncation_system": ("truncation_system(dims)", _make_truncation),
    "zero_anchor": ("zero_anchor(dim, fiber, structure)", _make_zero_anchor),
}

# operation -> signature; implementations live in :mod:`lietower.cli`
OPERATIONS: dict[str, str] = {
    "alpha_compatibility": "alpha_compatibility(tower)",
    "axioms": "axioms(algebroid, sections)",
    "contact_on_graph": "contact_on_graph(u, order)",
    "d_squared": "d_squared(algebroid, forms)",
    "h0_membership": "h0_membership(h, lam)",
    "homogeneity": "homogeneity(spray, lambdas)",
    "integrability": "integrability(system)",
    "integrate": "integrate(spray, x0, e0, t_end, step, expect_base, expect_fiber)",
    "limit_bracket": "limit_bracket(tower, first, second)",
    "prolong_bracket": "prolong_bracket(first, second, order)",
    "torsion": "torsion(level)",
    "tower_spray": "tower_spray(tower, xi, x_top, e_top, t_end, step)",
    "validate_thread": "validate_thread(system, points)",
    "verify_system": "verify_system(tower, pairs, morphisms)",
}


# command keys naming scenario objects, checked before anything runs
_REFERENCE_KEYS = ("algebroid", "tower", "spray", "system")
_EXTRA_REFERENCE_KEYS = {"prolong_bracket": ("first", "second")}


def list_constructors() -> list[str]:
    """Sorted catalogue lines: constructors, then operations."""
    lines = [f"constructor  {CONSTRUCTORS[k][0]}" for k in sorted(CONSTRUCTORS)]
    lines += [f"operation    {OPERATIONS[k]}" for k in sorted(OPERATIONS)]
    return lines


# ---------------------------------------------------------------------------
# documents


@dataclass
class Command:
    op: str
    spec: _Spec
    index: int
    tol: float
    expect: str


@dataclass
class Scenario:
    name: str
    seed: int
    sampling: Sampling
    tolerance: float
    objects: dict = field(default_factory=dict)
    commands: list = field(default_factory=list)

    def with_overrides(self, seed: int | None = None, samples: int | None = None) -> "Scenario":
        s = self.sampling
        if seed is not None:
            self.seed = seed
        self.sampling = Sampling(samples if samples is not None else s.count, s.low, s.high, self.seed)
        return self


def parse_scenario(text: str, name: str = "scenario", seed: int | None = None,
                   samples: int | None = None) -> Scenario:
    """Parse and validate a scenario document, building its objects.

    ``seed`` and ``samples`` override the document. Raises
    :class:`SchemaError` with the offending line and field.
    """
    try:
        raw = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise SchemaError(f"invalid YAML: {getattr(err, 'problem', err)}",
                          mark.line + 1 if mark else None) from None
    if not isinstance(raw, dict):
        raise SchemaError("scenario must be a mapping at top level", 1)
    top = _Spec(raw, "scenario")
    name = top.get("name", str, default=name)
    doc_seed = top.get("seed", int, default=0)
    seed = doc_seed if seed is None else seed
    top.get("sampling", dict, default={})
    samp = _Spec(raw.get("sampling", {}), "sampling")
    count = samp.get("count", int, default=100, check=_at_least_one)
    low = samp.get("low", float, default=-1.0)
    high = samp.get("high", float, default=1.0, check=lambda v: None if v > low else "must exceed low")
    samp.finish()
    if samples is not None:
        if samples < 1:
            raise SchemaError("sample count must be >= 1", None, "--samples")
        count = samples
    tolerance = top.get("tolerance", float, default=1e-9, check=_positive)
    scen = Scenario(name, seed, Sampling(count, low, high, seed), tolerance)

    objects_raw = raw.get("objects", {})
    top.used.add("objects")
    if not isinstance(objects_raw, dict):
        raise top.error("expected a mapping of named objects", "objects")
    for obj_name, body in objects_raw.items():
        if obj_name == LINE:
            continue
        if not isinstance(body, dict):
            raise SchemaError("object definition must be a mapping", objects_raw.get(LINE), f"objects.{obj_name}")
        spec = _Spec(body, f"objects.{obj_name}")
        make = spec.get("make", str)
        if make not in CONSTRUCTORS:
            raise spec.error(f"unknown constructor '{make}'", "make")
        try:
            scen.objects[obj_name] = CONSTRUCTORS[make][1](spec, scen.objects)
        except SchemaError:
            raise
        except Exception as err:  # construction hypotheses, parse errors
            raise spec.error(f"{make}: {err}") from None
        spec.finish()

    commands_raw = top.get("commands", list)
    for k, body in enumerate(commands_raw):
        raw_body = raw["commands"][k]
        if not isinstance(raw_body, dict):
            raise SchemaError("command must be a mapping", None, f"commands[{k}]")
        spec = _Spec(raw_body, f"commands[{k}]")
        op = spec.get("op", str)
        if op not in OPERATIONS:
            raise spec.error(f"unknown operation '{op}'", "op")
        for key in _REFERENCE_KEYS + _EXTRA_REFERENCE_KEYS.get(op, ()):
            ref = raw_body.get(key)
            if isinstance(ref, str) and ref not in scen.objects:
                raise spec.error(f"unknown object '{ref}' (objects must be defined before use)", key)
        tol = spec.get("tol", float, default=tolerance, check=_positive)
        expect = spec.get("expect", str, default="pass",
                          check=lambda v: None if v in ("pass", "fail") else "must be 'pass' or 'fail'")
        scen.commands.append(Command(op, spec, k, tol, expect))
    top.finish()
    return scen


def load_scenario(path, seed: int | None = None, samples: int | None = None) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise SchemaError(f"cannot read scenario: {err.strerror}", None, str(path)) from None
    return parse_scenario(text, path.stem, seed, samples)
