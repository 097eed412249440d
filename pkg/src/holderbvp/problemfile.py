"""Problem/family files: a small TOML schema for boundary-value problems.

A file describes one parameter family (a single problem is a family with no
``eps`` anywhere).  Blocks:

* ``[interval]`` -- ``a``, ``b`` (floats, a < b)
* ``[space]``    -- ``n`` (int >= 0), ``alpha`` (float in [0, 1]), ``m`` (int >= 1)
* ``[system]``   -- ``A`` (m x m expressions in t, eps), ``f`` (m expressions)
* ``[boundary]`` -- ``betas`` (n + 1 matrices, m x m, expressions in eps),
  optional ``density`` (m x m expressions in t, eps), optional repeated
  ``[[boundary.jump]]`` tables with ``location`` (expression in eps) and
  ``matrix`` (m x m expressions in eps)
* ``[data]``     -- ``q`` (m expressions in eps), optional ``eps0`` (default 1.0)
* ``[limit]``    -- optional overrides used at eps = 0: any of ``A``, ``f``,
  ``q``, ``betas``, ``density``, and ``[[limit.jump]]`` tables.  Required
  whenever a template expression is undefined at eps = 0.

Expression syntax: variables ``t`` and ``eps``, imaginary unit ``i`` (also as
numeric suffix, ``0.3i``), operators ``+ - * / ^`` (``^`` takes a
non-negative integer), functions ``sin cos exp``, parentheses.  Matrix
entries may also be plain TOML numbers.  Expression strings are kept verbatim
for round-tripping.
"""

from __future__ import annotations

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DimensionError, ParseError
from .expressions import parse_expr
from .families import ProblemFamily
from .grid import Interval

__all__ = ["parse_problem", "parse_problem_text", "write_problem"]


def _expect_table(data, name):
    if name not in data:
        raise ParseError(f"missing block '{name}'")
    if not isinstance(data[name], dict):
        raise ParseError(f"block '{name}' must be a table")
    return data[name]


def _expect_key(table, block, key, types):
    if key not in table:
        raise ParseError(f"missing '{key}' in block '{block}'")
    value = table[key]
    if not isinstance(value, types):
        raise ParseError(f"'{key}' in block '{block}' has the wrong type")
    return value


def _entry(value, where):
    if not isinstance(value, (str, int, float)) or isinstance(value, bool):
        raise ParseError(f"entry in {where} must be an expression string or number")
    try:
        return parse_expr(value) if isinstance(value, str) else parse_expr(repr(float(value)))
    except ParseError as exc:
        raise ParseError(f"in {where}: {exc}") from exc


def _matrix(raw, m, where):
    if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
        raise ParseError(f"{where} must be a list of rows")
    if len(raw) != m or any(len(row) != m for row in raw):
        shape = f"{len(raw)}x{len(raw[0]) if raw and isinstance(raw[0], list) else '?'}"
        raise DimensionError(f"{where} must be {m}x{m}, got {shape}")
    return [[_entry(v, where) for v in row] for row in raw]


def _vector(raw, m, where):
    if not isinstance(raw, list) or any(isinstance(v, list) for v in raw):
        raise ParseError(f"{where} must be a flat list of {m} entries")
    if len(raw) != m:
        raise DimensionError(f"{where} must have {m} entries, got {len(raw)}")
    return [[_entry(v, where)] for v in raw]


def _betas(raw, m, n, where):
    if not isinstance(raw, list):
        raise ParseError(f"{where} must be a list of matrices")
    if len(raw) != n + 1:
        raise DimensionError(f"{where} must hold n + 1 = {n + 1} matrices, got {len(raw)}")
    return [_matrix(b, m, f"{where}[{k}]") for k, b in enumerate(raw)]


def _jumps(raw, m, where):
    jumps = []
    if not isinstance(raw, list):
        raise ParseError(f"{where} must be an array of tables")
    for k, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ParseError(f"{where}[{k}] must be a table")
        location = _entry(_expect_key(item, f"{where}[{k}]", "location", (str, int, float)),
                          f"{where}[{k}].location")
        matrix = _matrix(_expect_key(item, f"{where}[{k}]", "matrix", list),
                         m, f"{where}[{k}].matrix")
        jumps.append((location, matrix))
    return jumps


def parse_problem_text(text: str) -> ProblemFamily:
    """Parse file contents into a validated family (see module docstring)."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"not valid TOML: {exc}") from exc

    interval_block = _expect_table(data, "interval")
    a = _expect_key(interval_block, "interval", "a", (int, float))
    b = _expect_key(interval_block, "interval", "b", (int, float))
    space = _expect_table(data, "space")
    n = _expect_key(space, "space", "n", int)
    alpha = float(_expect_key(space, "space", "alpha", (int, float)))
    m = _expect_key(space, "space", "m", int)
    if n < 0 or m < 1 or not 0.0 <= alpha <= 1.0:
        raise ParseError(f"block 'space' out of range: n={n}, alpha={alpha}, m={m}")

    system = _expect_table(data, "system")
    A = _matrix(_expect_key(system, "system", "A", list), m, "system.A")
    f = _vector(_expect_key(system, "system", "f", list), m, "system.f")

    boundary = _expect_table(data, "boundary")
    betas = _betas(_expect_key(boundary, "boundary", "betas", list), m, n, "boundary.betas")
    density = (_matrix(boundary["density"], m, "boundary.density")
               if "density" in boundary else None)
    jumps = _jumps(boundary.get("jump", []), m, "boundary.jump")

    data_block = _expect_table(data, "data")
    q = _vector(_expect_key(data_block, "data", "q", list), m, "data.q")
    eps0 = float(data_block.get("eps0", 1.0))

    limit = data.get("limit", {})
    if not isinstance(limit, dict):
        raise ParseError("block 'limit' must be a table")
    unknown = set(limit) - {"A", "f", "q", "betas", "density", "jump"}
    if unknown:
        raise ParseError(f"unknown keys in block 'limit': {sorted(unknown)}")

    try:
        fam = ProblemFamily(
            Interval(float(a), float(b)), n, alpha, m, A, f, q, betas,
            jumps=jumps, density=density, eps0=eps0,
            limit_A=_matrix(limit["A"], m, "limit.A") if "A" in limit else None,
            limit_f=_vector(limit["f"], m, "limit.f") if "f" in limit else None,
            limit_q=_vector(limit["q"], m, "limit.q") if "q" in limit else None,
            limit_betas=(_betas(limit["betas"], m, n, "limit.betas")
                         if "betas" in limit else None),
            limit_jumps=(_jumps(limit["jump"], m, "limit.jump")
                         if "jump" in limit else None),
            limit_density=(_matrix(limit["density"], m, "limit.density")
                           if "density" in limit else None),
            source=data,
        )
    except (ParseError, DimensionError):
        raise
    except Exception as exc:
        raise ParseError(f"invalid problem data: {exc}") from exc
    return fam


def parse_problem(path) -> ProblemFamily:
    """Read and parse a problem/family file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_problem_text(text)


def _toml_value(value):
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ParseError(f"cannot serialize {value!r}")


def write_problem(fam: ProblemFamily, target) -> None:
    """Serialize a parsed family back to the file format.

    Uses the verbatim source the family was parsed from, in a fixed block
    order, so parse -> write -> parse is the identity.
    """
    if fam.source is None:
        raise ParseError("family carries no source text to serialize "
                         "(only parsed families round-trip)")
    src = fam.source
    lines = []

    def block(name, table, keys):
        lines.append(f"[{name}]")
        for key in keys:
            if key in table:
                lines.append(f"{key} = {_toml_value(table[key])}")
        lines.append("")

    block("interval", src["interval"], ["a", "b"])
    block("space", src["space"], ["n", "alpha", "m"])
    block("system", src["system"], ["A", "f"])
    block("boundary", src["boundary"], ["betas", "density"])
    for jump in src["boundary"].get("jump", []):
        lines.append("[[boundary.jump]]")
        lines.append(f"location = {_toml_value(jump['location'])}")
        lines.append(f"matrix = {_toml_value(jump['matrix'])}")
        lines.append("")
    block("data", src["data"], ["q", "eps0"])
    if "limit" in src:
        block("limit", src["limit"], ["A", "f", "q", "betas", "density"])
        for jump in src["limit"].get("jump", []):
            lines.append("[[limit.jump]]")
            lines.append(f"location = {_toml_value(jump['location'])}")
            lines.append(f"matrix = {_toml_value(jump['matrix'])}")
            lines.append("")
    text = "\n".join(lines)
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as handle:
            handle.write(text)
