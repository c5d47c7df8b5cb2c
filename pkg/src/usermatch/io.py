"""Text formats: edge lists, pair files, id lists, memberships.

Edge list: one ``u v`` pair of non-negative integers per line; lines that
start with ``#`` are comments. An optional ``# nodes=<n>`` header fixes the
node count, otherwise it is ``1 + max id``.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .generators import BipartiteAffiliation
from .graph import Graph, GraphError, build_graph
from .links import LinkSet

_HEADER = re.compile(r"#\s*nodes\s*=\s*(\d+)")


def _data_lines(path) -> tuple[list[int], list[str], dict]:
    numbers, lines, header = [], [], {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            s = raw.strip()
            if not s:
                continue
            if s.startswith("#"):
                m = _HEADER.match(s)
                if m:
                    header["nodes"] = int(m.group(1))
                continue
            numbers.append(lineno)
            lines.append(s)
    return numbers, lines, header


def _parse_int_pairs(path) -> tuple[np.ndarray, np.ndarray, dict]:
    linenos, lines, header = _data_lines(path)
    if not lines:
        return np.zeros((0, 2), np.int64), np.zeros(0, np.int64), header
    fields = [ln.split() for ln in lines]
    for lineno, f in zip(linenos, fields):
        if len(f) != 2:
            raise GraphError(f"{path}:{lineno}: expected two ids, got {len(f)} fields")
    try:
        arr = np.array(fields, dtype=np.int64)
    except ValueError:
        for lineno, f in zip(linenos, fields):
            if not (f[0].isdigit() and f[1].isdigit()):
                raise GraphError(f"{path}:{lineno}: ids must be non-negative integers") from None
        raise
    neg = (arr < 0).any(axis=1)
    if neg.any():
        raise GraphError(f"{path}:{linenos[int(np.argmax(neg))]}: negative id")
    return arr, np.array(linenos, dtype=np.int64), header


def read_edge_list(path, n: int | None = None) -> Graph:
    edges, linenos, header = _parse_int_pairs(path)
    if n is None:
        n = header.get("nodes")
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 0
    out = (edges >= n).any(axis=1) if edges.size else np.zeros(0, bool)
    if out.any():
        i = int(np.argmax(out))
        raise GraphError(f"{path}:{linenos[i]}: id out of range for {n} nodes")
    return build_graph(n, edges)


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes={g.n}\n")
        _write_rows(fh, g.edges)


def _write_rows(fh, arr: np.ndarray) -> None:
    if arr.size:
        text = "\n".join(f"{a} {b}" for a, b in arr.tolist())
        fh.write(text + "\n")


def read_pairs(path) -> np.ndarray:
    pairs, _, _ = _parse_int_pairs(path)
    return pairs


def write_pairs(path, pairs) -> None:
    arr = pairs.pairs() if isinstance(pairs, LinkSet) else np.asarray(pairs, np.int64).reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as fh:
        _write_rows(fh, arr)


def read_links(path) -> LinkSet:
    return LinkSet.from_pairs(read_pairs(path))


def write_ids(path, flags_or_ids) -> None:
    arr = np.asarray(flags_or_ids)
    ids = np.flatnonzero(arr) if arr.dtype == bool else arr
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes={arr.size}\n" if arr.dtype == bool else "")
        if ids.size:
            fh.write("\n".join(map(str, ids.tolist())) + "\n")


def read_ids(path, n: int | None = None) -> np.ndarray:
    """Read an id list; with ``n`` (or a ``# nodes=`` header) return a boolean mask."""
    linenos, lines, header = _data_lines(path)
    ids = np.array([int(s) for s in lines], dtype=np.int64)
    n = n if n is not None else header.get("nodes")
    if n is None:
        return ids
    mask = np.zeros(n, dtype=bool)
    mask[ids] = True
    return mask


def write_memberships(path, b: BipartiteAffiliation) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# users={b.users} interests={b.interests}\n")
        _write_rows(fh, b.memberships)


def read_memberships(path) -> BipartiteAffiliation:
    users = interests = None
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    m = re.match(r"#\s*users=(\d+)\s+interests=(\d+)", first)
    if m:
        users, interests = int(m.group(1)), int(m.group(2))
    pairs = read_pairs(path)
    if users is None:
        users = int(pairs[:, 0].max()) + 1 if pairs.size else 0
        interests = int(pairs[:, 1].max()) + 1 if pairs.size else 0
    return BipartiteAffiliation(users, interests, pairs)


def intern_edge_list(src, dst, sidecar) -> tuple[Graph, list[str]]:
    """Convert an edge list with arbitrary string ids to dense integers.

    Ids are numbered in order of first appearance. Writes the numeric edge
    list to ``dst`` and ``<id>\\t<label>`` lines to ``sidecar``.
    """
    index: dict[str, int] = {}
    edges = []
    linenos, lines, _ = _data_lines(src)
    for lineno, line in zip(linenos, lines):
        f = line.split()
        if len(f) != 2:
            raise GraphError(f"{src}:{lineno}: expected two ids, got {len(f)} fields")
        edges.append([index.setdefault(f[0], len(index)), index.setdefault(f[1], len(index))])
    g = build_graph(len(index), edges)
    write_edge_list(dst, g)
    labels = list(index)
    Path(sidecar).write_text(
        "".join(f"{i}\t{lab}\n" for i, lab in enumerate(labels)), encoding="utf-8"
    )
    return g, labels


def read_labels(sidecar) -> list[str]:
    out = []
    with open(sidecar, encoding="utf-8") as fh:
        for line in fh:
            i, lab = line.rstrip("\n").split("\t", 1)
            assert int(i) == len(out), "sidecar ids must be dense and ordered"
            out.append(lab)
    return out


def write_sybils(path, flags1, flags2) -> None:
    """Sybil ids of both copies as ``<copy> <id>`` lines (copy is 1 or 2)."""
    rows = [np.column_stack([np.full(ids.size, c, np.int64), ids])
            for c, ids in ((1, np.flatnonzero(flags1)), (2, np.flatnonzero(flags2)))]
    with open(path, "w", encoding="utf-8") as fh:
        _write_rows(fh, np.concatenate(rows))


def read_sybils(path, n1: int, n2: int) -> tuple[np.ndarray, np.ndarray]:
    rows = read_pairs(path)
    out = []
    for c, n in ((1, n1), (2, n2)):
        ids = rows[rows[:, 0] == c, 1]
        if ids.size and ids.max() >= n:
            raise GraphError(f"{path}: sybil id {int(ids.max())} out of range for copy {c}")
        mask = np.zeros(n, dtype=bool)
        mask[ids] = True
        out.append(mask)
    if ((rows[:, 0] < 1) | (rows[:, 0] > 2)).any():
        raise GraphError(f"{path}: copy column must be 1 or 2")
    return out[0], out[1]
