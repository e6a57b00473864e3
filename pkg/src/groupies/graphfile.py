"""Text format for sampled graphs.

::

    multipartite-v1
    parts k s_1 ... s_k
    e u v
    ...

Vertex ids are 0-based, part 0 holds the first ``s_1`` ids, and edge lines
have ``u < v`` in strictly increasing lexicographic order, so a graph has
exactly one serialization.
"""

from __future__ import annotations

import io
import os
from typing import TextIO

import numpy as np

from .model import MultipartiteGraph

MAGIC = "multipartite-v1"


class GraphFormatError(ValueError):
    pass


def format_graph(graph: MultipartiteGraph) -> str:
    buf = io.StringIO()
    write_graph(graph, buf)
    return buf.getvalue()


def write_graph(graph: MultipartiteGraph, out) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="\n") as fh:
            write_graph(graph, fh)
        return
    out.write(f"{MAGIC}\n")
    out.write("parts " + " ".join(str(x) for x in (graph.k, *graph.part_sizes)) + "\n")
    edges = graph.edges()
    if len(edges):
        out.write("\n".join(f"e {u} {v}" for u, v in edges.tolist()))
        out.write("\n")


def read_graph(src, name: str | None = None) -> MultipartiteGraph:
    """Parse a graph file (path or open text stream); raises GraphFormatError."""
    if isinstance(src, (str, os.PathLike)):
        name = name or str(src)
        try:
            with open(src) as fh:
                return _parse(fh, name)
        except OSError as exc:
            raise GraphFormatError(f"{name}: cannot read file ({exc.strerror})") from None
    return _parse(src, name or "<stream>")


def _parse(fh: TextIO, name: str) -> MultipartiteGraph:
    lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    def fail(lineno, msg):
        raise GraphFormatError(f"{name}:{lineno}: {msg}")

    if not lines or lines[0].strip() != MAGIC:
        fail(1, f"expected header {MAGIC!r}")
    if len(lines) < 2:
        fail(2, "missing 'parts' line")
    head = lines[1].split()
    if not head or head[0] != "parts":
        fail(2, "expected 'parts k s_1 ... s_k'")
    try:
        nums = [int(x) for x in head[1:]]
    except ValueError:
        fail(2, "part counts must be integers")
    if not nums or nums[0] < 2 or len(nums) != nums[0] + 1:
        fail(2, "need 'parts k' followed by exactly k sizes, k >= 2")
    sizes = tuple(nums[1:])
    if min(sizes) < 1:
        fail(2, "part sizes must be positive")
    n = sum(sizes)
    part = np.repeat(np.arange(len(sizes)), sizes)

    edges = np.empty((len(lines) - 2, 2), dtype=np.int64)
    prev = (-1, -1)
    for idx, line in enumerate(lines[2:]):
        lineno = idx + 3
        tok = line.split()
        if len(tok) != 3 or tok[0] != "e":
            fail(lineno, "expected 'e u v'")
        try:
            u, v = int(tok[1]), int(tok[2])
        except ValueError:
            fail(lineno, "vertex ids must be integers")
        if not 0 <= u < v < n:
            fail(lineno, f"need 0 <= u < v < {n}, got {u} {v}")
        if (u, v) <= prev:
            fail(lineno, "edges must be unique and sorted lexicographically")
        if part[u] == part[v]:
            fail(lineno, f"edge {u} {v} joins two vertices of part {part[u]}")
        prev = (u, v)
        edges[idx] = (u, v)
    return MultipartiteGraph.from_edges(sizes, edges)
