"""Deterministic serialization of reports, branches, diagrams and snapshots."""

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum

import numpy as np

from .branch import BifurcationBranch

FLOAT_FORMAT = "{:.17g}"


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = FLOAT_FORMAT.format(x)
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def to_plain(obj):
    """Convert dataclass-like containers into JSON-compatible plain data."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if hasattr(obj, "__dataclass_fields__"):
        return {f: to_plain(getattr(obj, f)) for f in obj.__dataclass_fields__}
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, float):
            return fmt_float(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {enc(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(to_plain(obj), 0) + "\n"


def loads(text: str):
    return json.loads(text)


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def branch_header(tracked: list[str]) -> list[str]:
    return ["t_or_lambda"] + [f"amp_{k}" for k in tracked] + ["energy", "mass", "status"]


def branch_csv(branch: BifurcationBranch) -> str:
    rows = [[r.lam] + [float(r.amplitudes[k]) for k in branch.tracked] + [r.energy, r.mass, r.status] for r in branch]
    return _csv(branch_header(branch.tracked), rows)


def timeseries_csv(tracked: list[str], records: list[tuple]) -> str:
    """``records`` are ``(t, amplitudes dict, energy, mass, status)``."""
    rows = [[t] + [float(a[k]) for k in tracked] + [e, m, s] for t, a, e, m, s in records]
    return _csv(branch_header(tracked), rows)


def parse_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


DIAGRAM_HEADER = ["u0", "T", "T0", "Tstar", "region"]
CURVES_HEADER = ["u0", "T0", "Tstar", "Tstar_printed"]
EQUILIBRIA_HEADER = ["index", "symmetry_class", "stability", "residual", "y", "eigenvalues"]


def diagram_csv(rows) -> str:
    return _csv(DIAGRAM_HEADER, [[r.u0, r.T, r.T0, r.T_star, r.region] for r in rows])


def curves_csv(curves: list[dict]) -> str:
    return _csv(CURVES_HEADER, [[c[k] for k in CURVES_HEADER] for c in curves])


def equilibria_csv(eqs) -> str:
    rows = []
    for i, e in enumerate(eqs):
        rows.append(
            [
                i,
                e.symmetry_class,
                e.stability,
                float(e.residual),
                " ".join(fmt_float(float(v)) for v in e.y),
                " ".join(fmt_float(float(v)) for v in e.jacobian_eigenvalues),
            ]
        )
    return _csv(EQUILIBRIA_HEADER, rows)


def trajectory_csv(t, Y) -> str:
    header = ["t"] + [f"y{i + 1}" for i in range(Y.shape[1])]
    return _csv(header, [[float(ti)] + [float(v) for v in yi] for ti, yi in zip(t, Y)])


def snapshot_text(domain, u_nodal: np.ndarray, t: float) -> str:
    """Plain-text grid: one header line, then one row per first-axis index."""
    arr = np.asarray(u_nodal, dtype=float)
    header = f"# domain={domain.describe()} grid={'x'.join(str(s) for s in arr.shape)} t={fmt_float(float(t))}"
    if arr.ndim == 1:
        body = [fmt_float(float(v)) for v in arr]
    else:
        flat = arr.reshape(arr.shape[0], -1)
        body = [" ".join(fmt_float(float(v)) for v in row) for row in flat]
    return header + "\n" + "\n".join(body) + "\n"


def parse_snapshot(text: str) -> tuple[str, np.ndarray]:
    lines = text.splitlines()
    header = lines[0]
    grid = header.split("grid=")[1].split()[0]
    shape = tuple(int(s) for s in grid.split("x"))
    values = np.array([float(v) for line in lines[1:] for v in line.split()])
    return header, values.reshape(shape)
