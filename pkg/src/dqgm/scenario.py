"""Scenario documents: one JSON file declaring a model, named objects and parameters.

Top-level keys are ``scalar_mode`` (``"exact"`` or ``"float"``), ``model``,
optional ``b_model`` (defaults to ``model``), ``objects`` (name -> object) and
``params``.  See ``docs/scenario.schema.json`` for the full layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    LEFT,
    RIGHT,
    Element,
    Multiplier,
    TensorMultiplier,
)
from .functionals import ReducedFunctional, WindowFunctional
from .models import (
    DQGDescriptor,
    coproduct_of_multiplier,
    dual_of_group,
    dual_of_su2,
    finite_cayley,
    free_group,
    integer_pairs,
    integers,
    single_block_algebra,
    symmetric_group,
    trivial_group,
)
from .rules import (
    CharacterRule,
    IdentityRule,
    LinearCombinationRule,
    PointMassRule,
    PolynomialRule,
    ProductRule,
    Rule,
    RuleError,
    TableRule,
    ZeroRule,
)
from .scalars import EXACT, FLOAT, parse_scalar

__all__ = ["Scenario", "ParseError", "ValidationError", "parse_scenario", "load_scenario", "parse_rule"]

TOP_LEVEL = {"scalar_mode", "model", "b_model", "objects", "params"}
KINDS = {"multiplier", "element", "functional", "window_functional", "tensor"}


class ParseError(ValueError):
    """Malformed document; carries line/column when the JSON itself is broken."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class ValidationError(ValueError):
    """Well-formed document that does not describe a consistent experiment."""


@dataclass
class Scenario:
    scalar_mode: str
    model: DQGDescriptor
    b_model: DQGDescriptor
    objects: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    @property
    def field(self):
        return self.model.algebra.field

    def get(self, name: str, kind: str | tuple | None = None):
        if name not in self.objects:
            raise ValidationError(f"undefined object {name!r}")
        obj_kind, obj = self.objects[name]
        kinds = (kind,) if isinstance(kind, str) else kind
        if kinds and obj_kind not in kinds:
            raise ValidationError(f"object {name!r} is a {obj_kind}, expected {' or '.join(kinds)}")
        return obj


def _index(value):
    if isinstance(value, list):
        return tuple(_index(v) for v in value)
    return value


def _matrix(data, f, where: str):
    if not isinstance(data, list):
        data = [[data]]
    try:
        rows = [[parse_scalar(x, f.exact) for x in row] for row in data]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    if any(len(r) != len(rows) for r in rows):
        raise ValidationError(f"{where}: block must be square")
    return f.array(rows)


def _turns(value, exact: bool):
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError as exc:
            raise ValidationError(f"bad character turns {value!r}") from exc
    if isinstance(value, int):
        return Fraction(value)
    if exact:
        raise ValidationError(f"character turns {value!r}: give a rational string in exact mode")
    return float(value)


def parse_rule(data, algebra) -> Rule:
    """Rule JSON (as produced by ``Rule.to_json``) -> :class:`Rule`, validated on ``algebra``."""
    f = algebra.field
    rule = _parse_rule(data, f)
    try:
        rule.validate(algebra)
    except RuleError as exc:
        hint = " (use float mode)" if f.exact and isinstance(_first_character(rule), CharacterRule) else ""
        raise ValidationError(f"{exc}{hint}") from exc
    return rule


def _first_character(rule):
    if isinstance(rule, CharacterRule):
        return rule
    for sub in getattr(rule, "factors", ()) or ():
        hit = _first_character(sub)
        if hit:
            return hit
    for _, sub in getattr(rule, "terms", ()) or ():
        hit = _first_character(sub)
        if hit:
            return hit
    return None


def _parse_rule(data, f) -> Rule:
    if data == "identity":
        return IdentityRule()
    if data == "zero":
        return ZeroRule()
    if not isinstance(data, dict) or len(data) not in (1, 2):
        raise ValidationError(f"cannot read rule {data!r}")
    if "table" in data:
        entries = {}
        for item in data["table"]:
            idx = _index(item["index"])
            entries[idx] = _matrix(item["block"], f, f"table entry {item['index']!r}")
        default = data.get("default")
        return TableRule(entries, None if default is None else _parse_rule(default, f))
    if len(data) != 1:
        raise ValidationError(f"cannot read rule {data!r}")
    (key, value), = data.items()
    try:
        if key == "polynomial":
            return PolynomialRule(tuple(parse_scalar(c, f.exact) for c in value))
        if key == "character":
            turns = value["turns"] if isinstance(value, dict) else value
            return CharacterRule(_turns(turns, f.exact))
        if key == "point_mass":
            return PointMassRule(_index(value["index"]), parse_scalar(value.get("value", 1), f.exact))
        if key == "sum":
            return LinearCombinationRule(
                tuple((parse_scalar(t.get("coeff", 1), f.exact), _parse_rule(t["rule"], f)) for t in value)
            )
        if key == "product":
            return ProductRule(tuple(_parse_rule(r, f) for r in value))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"rule {key!r}: missing or malformed field {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"rule {key!r}: {exc}") from exc
    raise ValidationError(f"unknown rule type {key!r}")


def build_model(desc: dict, f) -> DQGDescriptor:
    if not isinstance(desc, dict) or "type" not in desc:
        raise ValidationError("model must be an object with a 'type'")
    kind = desc["type"]
    if kind == "dual_group":
        group = desc.get("group")
        if group == "Z":
            g = integers()
        elif group == "Z2":
            g = integer_pairs()
        elif group == "S":
            g = symmetric_group(int(desc.get("n", 3)))
        elif group in ("S3", "S4"):
            g = symmetric_group(int(group[1]))
        elif group == "trivial":
            g = trivial_group()
        elif group == "free":
            g = free_group(int(desc.get("generators", 2)))
        elif group == "cayley":
            try:
                g = finite_cayley(desc["table"], int(desc.get("identity", 0)), desc.get("name", "cayley"))
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"cayley model: {exc}") from exc
        else:
            raise ValidationError(f"unknown group {group!r}")
        dqg = dual_of_group(g, f)
    elif kind == "dual_su2":
        if f.exact:
            raise ValidationError("the SU(2) dual needs irrational Clebsch-Gordan data (use float mode)")
        dqg = dual_of_su2(int(desc.get("max_spin_index", 3)))
    elif kind == "single_block":
        alg, haar = single_block_algebra(
            int(desc.get("size", 2)),
            [parse_scalar(x, f.exact) for x in desc.get("density", [1, 2])],
            parse_scalar(desc.get("d", 1), f.exact),
            f,
        )
        # one block, trivial fusion: only the functional layer is meaningful here
        dqg = DQGDescriptor(alg.name, alg, lambda b, c: [], haar, lambda b, a: [], lambda c, a: [])
    else:
        raise ValidationError(f"unknown model type {kind!r}")
    if "phi_scale" in desc:
        dqg = dqg.with_haar(dqg.haar.scaled(parse_scalar(desc["phi_scale"], f.exact)))
    return dqg


def _element(data, algebra, where):
    blocks = {}
    items = data.get("blocks") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise ValidationError(f"{where}: expected a list of {{index, block}} entries")
    for item in items:
        idx = _index(item["index"])
        if not algebra.contains(idx):
            raise ValidationError(f"{where}: index {item['index']!r} is not a block of {algebra.name}")
        m = _matrix(item["block"], algebra.field, where)
        n = algebra.block_dim(idx)
        if m.shape != (n, n):
            raise ValidationError(f"{where}: block {item['index']!r} has size {m.shape[0]}, expected {n}")
        blocks[idx] = m
    return Element(algebra, blocks)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    unknown = set(doc) - TOP_LEVEL
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}")
    for key in ("scalar_mode", "model"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}")
    mode = doc["scalar_mode"]
    if mode not in ("exact", "float"):
        raise ValidationError(f"scalar_mode must be 'exact' or 'float', got {mode!r}")
    f = EXACT if mode == "exact" else FLOAT
    model = build_model(doc["model"], f)
    b_model = build_model(doc["b_model"], f) if "b_model" in doc else model
    scenario = Scenario(mode, model, b_model, {}, dict(doc.get("params", {})), doc)
    models = {"model": model, "b_model": b_model}

    # objects may reference earlier ones; resolve in two passes so order does not matter
    pending = dict(doc.get("objects", {}))
    for _ in range(len(pending) + 1):
        progressed = False
        for name in list(pending):
            try:
                scenario.objects[name] = _build_object(name, pending[name], scenario, models)
            except _Deferred:
                continue
            del pending[name]
            progressed = True
        if not pending or not progressed:
            break
    if pending:
        name = sorted(pending)[0]
        _build_object(name, pending[name], scenario, models, final=True)
    return scenario


class _Deferred(Exception):
    pass


def _ref(scenario, name, kind, final):
    if name in scenario.objects:
        return scenario.get(name, kind)
    if final or name not in scenario.source.get("objects", {}):
        raise ValidationError(f"undefined object {name!r}")
    raise _Deferred


def _build_object(name, data, scenario, models, final=False):
    where = f"object {name!r}"
    if not isinstance(data, dict) or data.get("kind") not in KINDS:
        raise ValidationError(f"{where}: 'kind' must be one of {sorted(KINDS)}")
    kind = data["kind"]
    on = data.get("on", "model")
    if on not in models:
        raise ValidationError(f"{where}: 'on' must be 'model' or 'b_model'")
    dqg = models[on]
    alg = dqg.algebra
    try:
        if kind == "multiplier":
            return kind, Multiplier(alg, parse_rule(data["rule"], alg))
        if kind == "element":
            return kind, _element(data, alg, where)
        if kind == "functional":
            side = data.get("side", LEFT)
            if side not in (LEFT, RIGHT):
                raise ValidationError(f"{where}: side must be 'left' or 'right'")
            rep = data["representative"]
            elem = _ref(scenario, rep, "element", final) if isinstance(rep, str) else _element(rep, alg, where)
            if elem.algebra is not alg:
                raise ValidationError(f"{where}: representative lives on another model")
            return kind, ReducedFunctional(dqg.haar, elem, side)
        if kind == "window_functional":
            dens = {}
            for item in data["densities"]:
                idx = _index(item["index"])
                dens[idx] = _matrix(item["block"], alg.field, where)
            return kind, WindowFunctional(alg, dens)
        if kind == "tensor":
            if "coproduct" in data:
                x = _ref(scenario, data["coproduct"], "multiplier", final)
                if x.algebra is not scenario.model.algebra:
                    raise ValidationError(f"{where}: coproduct needs a multiplier on 'model'")
                return kind, coproduct_of_multiplier(scenario.model, x)
            terms = []
            for t in data["terms"]:
                xl = _ref(scenario, t["left"], "multiplier", final)
                yr = _ref(scenario, t["right"], "multiplier", final)
                terms.append((parse_scalar(t.get("coeff", 1), alg.field.exact), xl, yr))
            if not terms:
                raise ValidationError(f"{where}: empty tensor")
            return kind, TensorMultiplier.elementary(terms)
    except KeyError as exc:
        raise ValidationError(f"{where}: missing field {exc}") from exc
    raise ValidationError(f"{where}: unsupported kind {kind!r}")


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as handle:
        return parse_scenario(handle.read())
