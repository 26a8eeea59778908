"""Interaction networks: Erdos-Renyi and Barabasi-Albert generators.

Graphs are stored in compressed sparse row form (``indptr``/``indices``) so the
dynamics can gather neighbour actions with a couple of numpy calls. A built
graph is read-only.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConfigError, UsageError

__all__ = [
    "Graph",
    "TopologySpec",
    "generate_er",
    "generate_ba",
    "build",
    "degree",
    "neighbors",
    "dump_edgelist",
    "load_edgelist",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    # row index of every entry in ``indices``; cached for bincount gathers
    rows: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 0:
            raise ConfigError(f"node count must be non-negative, got {n}")
        pairs = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise UsageError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ConfigError(f"self-loop at node {i}")
            pairs.add((min(i, j), max(i, j)))
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            src = np.concatenate([arr[:, 0], arr[:, 1]])
            dst = np.concatenate([arr[:, 1], arr[:, 0]])
        else:
            src = dst = np.empty(0, dtype=np.int64)
        return cls._from_directed(n, src, dst)

    @classmethod
    def _from_directed(cls, n, src, dst):
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        counts = np.bincount(src, minlength=n) if n else np.zeros(0, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        for a in (indptr, dst, src):
            a.setflags(write=False)
        return cls(n=n, indptr=indptr, indices=dst, rows=src)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.indices[self.indptr[i]:self.indptr[i + 1]].tolist() for i in range(self.n)]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(i, j)`` pairs with ``i < j``, sorted."""
        mask = self.rows < self.indices
        return list(zip(self.rows[mask].tolist(), self.indices[mask].tolist()))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))


@dataclass(frozen=True)
class TopologySpec:
    """Which network to generate. ``mean_degree`` is used by ER, ``m_attach`` by BA."""

    kind: str
    n: int
    mean_degree: float | None = None
    m_attach: int | None = None

    def __post_init__(self):
        if self.kind not in ("ER", "BA"):
            raise ConfigError(f"unknown topology kind {self.kind!r} (expected ER or BA)")
        if self.kind == "ER":
            _check_er(self.n, self.mean_degree)
            object.__setattr__(self, "mean_degree", float(self.mean_degree))
        else:
            _check_ba(self.n, self.m_attach)

    @property
    def parameter(self):
        """The single shape parameter: mean degree for ER, attachment count for BA."""
        return self.mean_degree if self.kind == "ER" else self.m_attach

    @property
    def label(self) -> str:
        if self.kind == "ER":
            return f"ER(n={self.n},k={self.mean_degree!r})"
        return f"BA(n={self.n},m={self.m_attach})"


def _check_er(n, mean_degree):
    if n is None or int(n) != n or n < 2:
        raise ConfigError(f"ER graphs need n >= 2, got {n}")
    if mean_degree is None or not (0 < mean_degree <= n - 1):
        raise ConfigError(f"ER mean_degree must lie in (0, n-1] = (0, {n - 1}], got {mean_degree}")


def _check_ba(n, m_attach):
    if m_attach is None or int(m_attach) != m_attach or m_attach < 1:
        raise ConfigError(f"BA m_attach must be a positive integer, got {m_attach}")
    if n is None or int(n) != n or n <= m_attach:
        raise ConfigError(f"BA graphs need n > m_attach, got n={n}, m_attach={m_attach}")


def generate_er(n: int, mean_degree: float, rng_seed: int) -> Graph:
    """G(n, p) graph with ``p = mean_degree / (n - 1)``."""
    _check_er(n, mean_degree)
    rng = np.random.default_rng(rng_seed)
    p = mean_degree / (n - 1)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    iu, ju = iu[keep], ju[keep]
    return Graph._from_directed(n, np.concatenate([iu, ju]), np.concatenate([ju, iu]))


def generate_ba(n: int, m_attach: int, rng_seed: int) -> Graph:
    """Preferential attachment grown from a complete core on ``m_attach + 1`` nodes.

    Each new node draws targets with probability proportional to current
    degree, rejecting repeats until it has ``m_attach`` distinct ones.
    """
    _check_ba(n, m_attach)
    m = int(m_attach)
    rng = np.random.default_rng(rng_seed)
    core = m + 1
    src: list[int] = []
    dst: list[int] = []
    # every node appears in `pool` once per incident edge end
    pool: list[int] = []
    for i in range(core):
        for j in range(i + 1, core):
            src.append(i)
            dst.append(j)
            pool += (i, j)
    for new in range(core, n):
        chosen: list[int] = []
        size = len(pool)
        while len(chosen) < m:
            t = pool[int(rng.integers(size))]
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            src.append(new)
            dst.append(t)
            pool += (new, t)
    s = np.array(src, dtype=np.int64)
    d = np.array(dst, dtype=np.int64)
    return Graph._from_directed(n, np.concatenate([s, d]), np.concatenate([d, s]))


def build(spec: TopologySpec, rng_seed: int) -> Graph:
    if spec.kind == "ER":
        return generate_er(spec.n, spec.mean_degree, rng_seed)
    return generate_ba(spec.n, spec.m_attach, rng_seed)


def _check_node(g: Graph, i: int):
    if not (0 <= i < g.n):
        raise UsageError(f"node {i} out of range for graph with n={g.n}")


def degree(g: Graph, i: int) -> int:
    _check_node(g, i)
    return int(g.indptr[i + 1] - g.indptr[i])


def neighbors(g: Graph, i: int) -> list[int]:
    _check_node(g, i)
    return g.indices[g.indptr[i]:g.indptr[i + 1]].tolist()


def dump_edgelist(g: Graph, path) -> None:
    """Write ``n <count>`` then one ``i j`` line per edge (``i < j``), atomically."""
    lines = [f"n {g.n}\n"] + [f"{i} {j}\n" for i, j in g.edges()]
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".edges-")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.writelines(lines)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_edgelist(path) -> Graph:
    with open(path, encoding="ascii") as fh:
        text = fh.read()
    return parse_edgelist(text)


def parse_edgelist(text: str) -> Graph:
    lines = text.splitlines()
    if not lines:
        raise ConfigError("empty edge list", line=1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n" or not head[1].isdigit():
        raise ConfigError("first line must be 'n <count>'", line=1)
    n = int(head[1])
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ConfigError(f"expected 'i j', got {line!r}", line=lineno)
        i, j = int(parts[0]), int(parts[1])
        if not i < j:
            raise ConfigError(f"edge must satisfy i < j, got {i} {j}", line=lineno)
        if j >= n:
            raise ConfigError(f"node {j} out of range for n={n}", line=lineno)
        edges.append((i, j))
    return Graph.from_edges(n, edges)
