"""Rule and flow documents (YAML or JSON) and their (de)serialization.

A rule document::

    schema: 1
    dim: 2
    kind: maksimov          # general | maksimov | a0 | group
    op_table: [[1, 1], [2, 2]]

``group`` rules take ``group: {table: [[...]], identity: 1}`` (or
``group: {cyclic: [2, 2, 2]}`` as a shorthand); ``general`` rules take
``entries: [[ijk, lnr, uvw, coeff], ...]`` with 1-based flat indices.

A flow document has ``family`` (a1..a6, transport, product), ``rule`` (inline
document or a path relative to the flow file), the family payload and an
optional ``time_grid: {start, end, step}``. Matrices are given either as a
nested m x m x m list, as ``{entries: [[i, j, k, value], ...]}``, or as the
strings ``zero`` / ``unit``.
"""

from __future__ import annotations

import os
from typing import Optional

import numpy as np
import yaml

from . import algebra
from .flows import (FlowFamily, MatrixPath, ScalarFamily, TimeGrid, DEFAULT_GRID, flow_exp,
                    flow_fg, flow_gamma, flow_idempotent, flow_invertible, flow_power,
                    flow_product, transport)
from .rules import BinaryOp, GroupTable, MulRule
from .tensor import CubicMatrix, zero

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def load_document(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    doc.setdefault("_base", os.path.dirname(os.path.abspath(path)))
    return doc


def dump_document(doc: dict) -> str:
    return yaml.safe_dump(_strip_private(doc), sort_keys=False, default_flow_style=None)


def _strip_private(doc):
    if isinstance(doc, dict):
        return {k: _strip_private(v) for k, v in doc.items() if not str(k).startswith("_")}
    if isinstance(doc, list):
        return [_strip_private(v) for v in doc]
    return doc


def _check_schema(doc: dict) -> None:
    version = doc.get("schema", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})")


def _require(doc: dict, key: str, what: str):
    if key not in doc:
        raise ConfigError(f"{what} document is missing field {key!r}")
    return doc[key]


# -- rules --------------------------------------------------------------------

def parse_rule(doc, base: Optional[str] = None) -> MulRule:
    if isinstance(doc, str):
        path = doc if base is None or os.path.isabs(doc) else os.path.join(base, doc)
        doc = load_document(path)
    if not isinstance(doc, dict):
        raise ConfigError("rule must be a mapping or a file path")
    _check_schema(doc)
    kind = _require(doc, "kind", "rule")
    dim = doc.get("dim")
    try:
        if kind == "a0":
            rule = MulRule.a0(int(_require(doc, "dim", "rule")))
        elif kind == "maksimov":
            rule = MulRule.maksimov(BinaryOp(_require(doc, "op_table", "rule")))
        elif kind == "group":
            g = _require(doc, "group", "rule")
            if "cyclic" in g:
                table = GroupTable.cyclic_product(int(_require(doc, "dim", "rule")), g["cyclic"])
            else:
                table = GroupTable(_require(g, "table", "group"), dim)
                if "identity" in g and int(g["identity"]) != table.identity:
                    raise ConfigError(f"group identity is {table.identity}, document says {g['identity']}")
            rule = MulRule.group(table)
        elif kind == "general":
            rule = MulRule.general(int(_require(doc, "dim", "rule")), _require(doc, "entries", "rule"))
        else:
            raise ConfigError(f"unknown rule kind {kind!r}")
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed rule document: {exc}") from None
    if dim is not None and int(dim) != rule.dim:
        raise ConfigError(f"rule dim field {dim} disagrees with payload dim {rule.dim}")
    return rule


def rule_document(rule: MulRule) -> dict:
    doc = {"schema": SCHEMA_VERSION, "dim": rule.dim, "kind": rule.kind}
    if rule.kind == "maksimov":
        doc["op_table"] = rule.op.table.tolist()
    elif rule.kind == "group":
        doc["group"] = {"table": rule.group_table.table.tolist(),
                        "identity": int(rule.group_table.identity)}
    elif rule.kind == "general":
        p, q, w, c = rule.entries
        doc["entries"] = [[int(a) + 1, int(b) + 1, int(d) + 1, float(v)] for a, b, d, v in zip(p, q, w, c)]
    return doc


# -- matrices -----------------------------------------------------------------

def parse_matrix(spec, rule: MulRule) -> CubicMatrix:
    m = rule.dim
    if isinstance(spec, str):
        if spec == "zero":
            return zero(m)
        if spec == "unit":
            return algebra.unit_of(rule)
        raise ConfigError(f"unknown matrix shorthand {spec!r}")
    if isinstance(spec, dict):
        arr = np.zeros((m, m, m))
        for row in _require(spec, "entries", "matrix"):
            i, j, k, v = row
            if not all(1 <= int(x) <= m for x in (i, j, k)):
                raise ConfigError(f"matrix entry index out of range: {row}")
            arr[int(i) - 1, int(j) - 1, int(k) - 1] = float(v)
        if "scale" in spec:
            arr *= float(spec["scale"])
        return CubicMatrix(arr)
    try:
        mat = CubicMatrix(spec)
    except ValueError as exc:
        raise ConfigError(f"bad matrix: {exc}") from None
    if mat.dim != m:
        raise ConfigError(f"matrix has dim {mat.dim}, rule has dim {m}")
    return mat


def matrix_document(mat: CubicMatrix) -> dict:
    return {"entries": [[i, j, k, v] for (i, j, k), v in mat.nonzero()]}


# -- flows --------------------------------------------------------------------

def parse_grid(doc: dict) -> TimeGrid:
    g = doc.get("time_grid")
    if g is None:
        return DEFAULT_GRID
    try:
        return TimeGrid(float(g["start"]), float(g["end"]), float(g["step"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad time_grid: {exc}") from None


def _scalars(doc: dict, m: int) -> ScalarFamily:
    try:
        return ScalarFamily.from_expressions(m, f=doc.get("f"), g=doc.get("g"), gamma=doc.get("gamma"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_flow(doc, base: Optional[str] = None) -> FlowFamily:
    if isinstance(doc, str):
        path = doc if base is None or os.path.isabs(doc) else os.path.join(base, doc)
        doc = load_document(path)
    _check_schema(doc)
    base = doc.get("_base", base)
    family = _require(doc, "family", "flow")
    grid = parse_grid(doc)
    check_tol = float(doc.get("check_tol", 1e-9))

    if family == "a6":
        rule = None
        m = int(doc["dim"]) if "dim" in doc else parse_rule(_require(doc, "rule", "flow"), base).dim
    else:
        rule = parse_rule(_require(doc, "rule", "flow"), base)
        m = rule.dim

    if family == "a1":
        return flow_power(rule, parse_matrix(_require(doc, "Q", "flow"), rule))
    if family == "a2":
        return flow_idempotent(rule, parse_matrix(_require(doc, "X", "flow"), rule),
                               tol=float(doc.get("tol", 1e-9)))
    if family == "a3":
        return flow_exp(rule, parse_matrix(_require(doc, "Q", "flow"), rule), tol=float(doc.get("tol", 1e-12)))
    if family == "a4":
        terms = [(t["coeff"], parse_matrix(t["matrix"], rule)) for t in _require(doc, "path", "flow")]
        flow = flow_invertible(rule, MatrixPath(terms))
        return flow
    if family == "a5":
        op = rule.binary_op
        if op is None:
            raise ConfigError("a5 needs a Maksimov (or a0) rule")
        return flow_fg(op, _scalars(doc, m), check_tol, grid)
    if family == "a6":
        if rule is not None and rule.kind != "a0" and rule.binary_op != MulRule.a0(m).binary_op:
            raise ConfigError("a6 is defined for the a0 rule only")
        return flow_gamma(_scalars(doc, m), check_tol, grid)
    if family == "transport":
        source = parse_flow(_require(doc, "source", "transport"), base)
        op = rule.binary_op
        if op is None:
            raise ConfigError("transport target rule must be Maksimov")
        return transport(source, _require(doc, "perm", "transport"), op)
    if family == "product":
        factors = [parse_flow(f, base) for f in _require(doc, "factors", "product")]
        return flow_product(rule, factors)
    raise ConfigError(f"unknown flow family {family!r}")


def flow_document(flow: FlowFamily) -> dict:
    """Document that rebuilds ``flow``; needs expression-based scalar inputs."""
    p = flow.params
    family = p.get("family")
    if family is None:
        raise ConfigError(f"{flow.label} carries no construction parameters")
    doc = {"schema": SCHEMA_VERSION, "family": family, "rule": rule_document(flow.rule)}
    if family in ("a1", "a3"):
        doc["Q"] = matrix_document(p["Q"])
        if family == "a3":
            doc["tol"] = p["tol"]
    elif family == "a2":
        doc["X"] = matrix_document(p["X"])
    elif family == "a4":
        path = p["path"]
        if not isinstance(path, MatrixPath) or not path.serializable:
            raise ConfigError("a4 path is not expression-based; cannot serialize")
        doc["path"] = [{"coeff": src, "matrix": matrix_document(mat)} for src, _, mat in path.terms]
    elif family in ("a5", "a6"):
        fam = p["scalars"]
        if fam.sources is None:
            raise ConfigError("scalar family was not built from expressions; cannot serialize")
        doc.update(fam.sources)
    elif family == "transport":
        doc["source"] = flow_document(p["source"])
        doc["perm"] = list(p["perm"])
    elif family == "product":
        doc["factors"] = [flow_document(f) for f in p["factors"]]
    return doc
