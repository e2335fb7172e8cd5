"""Readers and writers for point clouds, covers, barcodes, complexes and nerve graphs."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from collections import Counter
from pathlib import Path
from typing import Sequence

import numpy as np

from covercraft.complex import Cover, FilteredComplex, intersection_sizes
from covercraft.errors import DomainError
from covercraft.persistence import Barcode


def fmt(x: float) -> str:
    """Shortest text that reads back to the same float."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def atomic_write(path, data: str | bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_matrix(path) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise DomainError(f"{path}:{lineno}: ragged row ({len(rows[-1])} fields, expected {len(rows[0])})")
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def _matrix_text(M: np.ndarray) -> str:
    return "".join(",".join(fmt(x) for x in row) + "\n" for row in np.atleast_2d(M))


def load_points(path) -> np.ndarray:
    """Headerless CSV, one point per row."""
    return _read_matrix(path)


def save_points(path, X):
    from covercraft.geometry import as_points

    atomic_write(path, _matrix_text(as_points(X)))


def load_fuzzy_cover(path) -> np.ndarray:
    return _read_matrix(path)


def save_fuzzy_cover(path, g):
    atomic_write(path, _matrix_text(np.asarray(g, dtype=np.float64)))


def load_labels(path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row[0].strip() for row in csv.reader(fh) if row and row[0].strip()]


def barcode_text(bc: Barcode) -> str:
    lines = ["dim,birth,death\n"]
    lines += [f"{d},{fmt(b)},{fmt(e)}\n" for d, b, e in bc.bars]
    return "".join(lines)


def save_barcode(path, bc: Barcode):
    atomic_write(path, barcode_text(bc))


def load_barcode(path) -> Barcode:
    bars = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["dim", "birth", "death"]:
            raise DomainError(f"{path}: expected header dim,birth,death")
        for row in reader:
            bars.append((int(row["dim"]), float(row["birth"]), float(row["death"])))
    return Barcode(tuple(bars))


def complex_json(K: FilteredComplex) -> str:
    items = [{"simplex": list(s), "filtration": value} for s, value in K.simplices]
    return "[\n" + ",\n".join(json.dumps(item) for item in items) + ("\n" if items else "") + "]\n"


def save_complex(path, K: FilteredComplex):
    atomic_write(path, complex_json(K))


def load_complex(path) -> FilteredComplex:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return FilteredComplex(tuple((tuple(item["simplex"]), float(item["filtration"])) for item in data))


def nerve_attributes(cover: Cover, labels: Sequence | None = None):
    """Vertex and edge attributes of the nerve's 1-skeleton for plotting.

    Vertex size is ``log(|U_i| + 1)``; edge thickness is
    ``log(|U_i & U_j| + 1)`` and edge length ``1 / |U_i & U_j|``. With
    ``labels`` each vertex also carries a label histogram.
    """
    sizes = intersection_sizes(cover, max_dim=1)
    vertices, edges = {}, {}
    for s, count in sorted(sizes.items()):
        if len(s) == 1:
            attrs = {"count": count, "size": math.log(count + 1)}
            if labels is not None:
                hist = Counter(str(labels[x]) for x in cover.members[s[0]])
                attrs["labels"] = ";".join(f"{k}:{hist[k]}" for k in sorted(hist))
            vertices[s[0]] = attrs
        else:
            edges[s] = {"count": count, "thickness": math.log(count + 1), "length": 1.0 / count}
    return vertices, edges


def _dot_attrs(attrs: dict) -> str:
    parts = []
    for key, value in attrs.items():
        text = fmt(value) if isinstance(value, float) else str(value)
        parts.append(f'{key}="{text}"' if isinstance(value, str) else f"{key}={text}")
    return ", ".join(parts)


def nerve_dot(cover: Cover, labels=None) -> str:
    vertices, edges = nerve_attributes(cover, labels)
    lines = ["graph nerve {"]
    lines += [f"  {v} [{_dot_attrs(a)}];" for v, a in vertices.items()]
    lines += [f"  {u} -- {v} [{_dot_attrs(a)}];" for (u, v), a in edges.items()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def nerve_graphml(cover: Cover, labels=None) -> str:
    import networkx as nx

    vertices, edges = nerve_attributes(cover, labels)
    G = nx.Graph()
    for v, a in vertices.items():
        G.add_node(v, **a)
    for (u, v), a in edges.items():
        G.add_edge(u, v, **a)
    buf = io.BytesIO()
    nx.write_graphml(G, buf)
    return buf.getvalue().decode("utf-8")


def load_graphml(path):
    import networkx as nx

    return nx.read_graphml(path, node_type=int)


def save_cover(path, cover: Cover):
    """Crisp cover as JSON: ``{"n": n, "members": [[ids...], ...]}``."""
    data = {"n": cover.n, "members": [sorted(m) for m in cover.members]}
    atomic_write(path, json.dumps(data) + "\n")


def load_cover(path) -> Cover:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Cover(int(data["n"]), tuple(frozenset(m) for m in data["members"]))
