"""Plain-text persistence: matrices, key-value manifests and CSV.

Matrix files hold ``rows cols`` on the first line followed by one
comma-separated row per line at 17 significant digits, which round-trips
every float64 exactly.
"""

import csv
import io
import math

import numpy as np

from .linalg import as_matrix


def fmt(value):
    """Canonical text for one CSV/manifest value."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    return str(value)


def matrix_to_text(m):
    m = as_matrix(m) if np.size(m) else np.asarray(m, dtype=np.float64).reshape(np.shape(m))
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [",".join("%.17g" % v for v in row) for row in m]
    return "\n".join(lines) + "\n"


def matrix_from_text(text):
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValueError("empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad matrix header {lines[0]!r}") from exc
    # rows of a zero-column matrix are empty lines
    body = lines[1:1 + rows] if cols == 0 else [ln for ln in lines[1:] if ln.strip()]
    if len(body) != rows:
        raise ValueError(f"header says {rows} rows, found {len(body)}")
    m = np.empty((rows, cols))
    for i, ln in enumerate(body):
        vals = [float(t) for t in ln.split(",")] if cols else []
        if len(vals) != cols:
            raise ValueError(f"row {i} has {len(vals)} entries, expected {cols}")
        m[i] = vals
    return m


def write_matrix(path, m):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(matrix_to_text(m))


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return matrix_from_text(fh.read())


def kv_to_text(items):
    return "".join(f"{k} = {fmt(v)}\n" for k, v in items.items())


def kv_from_text(text):
    out = {}
    for ln in text.splitlines():
        s = ln.strip()
        if not s or s.startswith("#"):
            continue
        key, sep, val = s.partition("=")
        if not sep:
            raise ValueError(f"expected 'key = value', got {ln!r}")
        out[key.strip()] = val.strip()
    return out


def write_kv(path, items):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(kv_to_text(items))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))
