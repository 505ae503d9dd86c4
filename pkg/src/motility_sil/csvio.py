"""Deterministic CSV writing and reading for all experiment outputs.

Every file is written against a named schema: exact header, floats with 17
significant digits (lossless round trip), newline-terminated rows, and no
locale-dependent formatting.  NaN is rejected rather than silently written.
"""

from __future__ import annotations

import math
import os

__all__ = ["SCHEMAS", "write_csv", "read_csv", "SchemaError"]

# column spec: (name, kind) with kind 'f' float, 'i' int
SCHEMAS = {
    "profile": (("z", "f"), ("theta0", "f"), ("dtheta0", "f")),
    "psi0": (("z", "f"), ("psi0", "f")),
    "phi_table": (("V", "f"), ("phi", "f"), ("phi_prime", "f")),
    "roots": (("F", "f"), ("V", "f"), ("stable", "i"), ("phi_prime", "f")),
    "tw_roots": (("beta", "f"), ("V", "f")),
    "beta_crit": (("beta_critical_bisect", "f"), ("beta_critical_closed_form", "f"),
                  ("asymmetry_indicator", "f")),
    "hysteresis": (("t", "f"), ("F", "f"), ("V", "f"), ("branch", "i"),
                   ("jump_flag", "i")),
    "jumps": (("t", "f"), ("F", "f"), ("V_before", "f"), ("V_after", "f")),
    "stability": (("V", "f"), ("beta", "f"), ("max_real", "f"), ("stable", "i"),
                  ("phi_prime", "f"), ("c0", "f")),
    "interface": (("t", "f"), ("x", "f"), ("V_est", "f"), ("F", "f")),
    "snapshot1d": (("x", "f"), ("rho", "f"), ("P", "f")),
    "residual": (("t", "f"), ("u_norm", "f")),
    "monitors1d": (("t", "f"), ("mass", "f"), ("rho_min", "f"), ("rho_max", "f"),
                   ("bound_violation_fraction", "f"), ("energy", "f")),
    "cell": (("t", "f"), ("x_back", "f"), ("x_front", "f"), ("V_cell", "f")),
    "monitors2d": (("t", "f"), ("mass", "f"), ("E", "f"), ("F", "f"),
                   ("rho_min", "f"), ("rho_max", "f"), ("lambda", "f")),
    "contour": (("t", "f"), ("point_index", "i"), ("x", "f"), ("y", "f")),
    "curve": (("t", "f"), ("node", "i"), ("x", "f"), ("y", "f"), ("V", "f"),
              ("kappa", "f"), ("lambda", "f")),
}


class SchemaError(ValueError):
    pass


def _format_value(value, kind, col, row_index):
    if kind == "i":
        if isinstance(value, bool):
            return "1" if value else "0"
        iv = int(value)
        if iv != value:
            raise SchemaError(f"column {col!r} expects an integer, "
                              f"got {value!r} in row {row_index}")
        return str(iv)
    fv = float(value)
    if math.isnan(fv) or math.isinf(fv):
        raise SchemaError(f"non-finite value in column {col!r}, row {row_index}")
    return f"{fv:.17g}"


def write_csv(schema_id: str, rows, path) -> str:
    """Write ``rows`` (iterables matching the schema) to ``path``."""
    if schema_id not in SCHEMAS:
        raise SchemaError(f"unknown schema {schema_id!r}")
    schema = SCHEMAS[schema_id]
    names = [c for c, _ in schema]
    lines = [",".join(names)]
    for ri, row in enumerate(rows):
        row = tuple(row)
        if len(row) != len(schema):
            raise SchemaError(
                f"row {ri} has {len(row)} fields, schema {schema_id!r} "
                f"expects {len(schema)}"
            )
        lines.append(",".join(_format_value(v, kind, col, ri)
                              for v, (col, kind) in zip(row, schema)))
    text = "\n".join(lines) + "\n"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def read_csv(path, schema_id: str | None = None):
    """Read a schema CSV back; returns (schema_id, list of row tuples)."""
    with open(path, "r", newline="\n") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(f"{path} is empty")
    header = lines[0].split(",")
    if schema_id is None:
        matches = [sid for sid, sch in SCHEMAS.items()
                   if [c for c, _ in sch] == header]
        if not matches:
            raise SchemaError(f"{path} header matches no known schema: {header}")
        schema_id = matches[0]
    schema = SCHEMAS[schema_id]
    if [c for c, _ in schema] != header:
        raise SchemaError(f"{path} header does not match schema {schema_id!r}")
    rows = []
    for li, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(schema):
            raise SchemaError(f"{path}:{li}: wrong field count")
        rows.append(tuple(int(v) if kind == "i" else float(v)
                          for v, (_, kind) in zip(parts, schema)))
    return schema_id, rows
