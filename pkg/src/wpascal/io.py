"""CSV/JSON serialization.  Exact values are written as ``p/q`` strings so they round-trip."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import InvalidParameter
from .sequences import format_scalar, is_exact, parse_scalar


def scalar_out(x):
    """JSON representation: exact -> 'p/q' string, float -> float."""
    if is_exact(x):
        return format_scalar(x)
    return float(x)


def scalar_in(x):
    if isinstance(x, str):
        return parse_scalar(x)
    return x


def table_rows(table, N):
    """(h, t, value) rows in level order for a [h][t] table."""
    for n in range(N + 1):
        for h in range(n + 1):
            yield h, n - h, table[h][n - h]


def write_grid_csv(rows, fh, value_name="value"):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["h", "t", value_name])
    for h, t, v in rows:
        w.writerow([h, t, format_scalar(v)])


def read_grid_values(fh) -> dict:
    rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 3 or [c.strip().lower() for c in rows[0][:2]] != ["h", "t"]:
        raise InvalidParameter("expected a header 'h,t,<name>'")
    return {(int(r[0]), int(r[1])): parse_scalar(r[2]) for r in rows[1:] if r}


def grid_csv_string(rows, value_name="value") -> str:
    buf = io.StringIO()
    write_grid_csv(rows, buf, value_name)
    return buf.getvalue()


def dims_to_json(table, family: dict) -> dict:
    return {
        "family": family,
        "N": table.N,
        "mode": table.graph.mode,
        "values": [[scalar_out(v) for v in row] for row in table.values],
    }


def phi_to_json(phi, family: dict, check=None) -> dict:
    doc = {
        "family": family,
        "N": phi.N,
        "mode": phi.graph.mode,
        "values": [[scalar_out(v) for v in row] for row in phi.values],
    }
    if check is not None:
        doc["check"] = check_to_json(check)
    return doc


def check_to_json(check) -> dict:
    wit = check.negativity_witness
    return {
        "max_recursion_residual": scalar_out(check.max_recursion_residual),
        "max_level_sum_error": scalar_out(check.max_level_sum_error),
        "origin_error": scalar_out(check.origin_error),
        "negativity_witness": None if wit is None else {"h": wit[0], "t": wit[1], "value": scalar_out(wit[2])},
    }


def phi_values_from_json(doc: dict):
    return [[scalar_in(v) for v in row] for row in doc["values"]]


def write_z_csv(zdist, fh):
    """``z,weight`` rows followed by a ``bound,<truncation error>`` metadata row."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["z", "weight"])
    for z, v in zdist.items():
        w.writerow([z, format_scalar(v)])
    w.writerow(["bound", repr(float(zdist.truncation_error_bound))])


def read_z_csv(fh):
    rows = list(csv.reader(fh))
    if not rows or rows[0] != ["z", "weight"]:
        raise InvalidParameter("expected header 'z,weight'")
    weights, bound = {}, None
    for r in rows[1:]:
        if not r:
            continue
        if r[0] == "bound":
            bound = float(r[1])
        else:
            weights[int(r[0])] = parse_scalar(r[1])
    return weights, bound


def read_values_csv(path) -> list:
    """A one-dimensional sequence file with header ``n,value``."""
    from .sequences import read_sequence_csv

    return list(read_sequence_csv(path).values)


def load_schema(name: str) -> dict:
    return json.loads(resources.files("wpascal").joinpath("schemas", f"{name}.schema.json").read_text())


def schema_names():
    return sorted(p.name.split(".")[0] for p in resources.files("wpascal").joinpath("schemas").iterdir()
                  if p.name.endswith(".schema.json"))


def write_text(text: str, output):
    """Write to ``output`` (a path) or stdout when it is None or '-'."""
    if output in (None, "-"):
        import sys

        sys.stdout.write(text)
        return
    p = Path(output)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
