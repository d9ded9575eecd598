"""Regular unweighted interaction graphs between populations.

Every analysis in the toolkit assumes the graph of populations is simple,
undirected, unweighted and regular (all nodes share one degree d), so this
module both constructs such graphs and refuses anything else.

The Buckminster Fuller geodesic dome (truncated icosahedron, 60 nodes of
degree 3) is built from exact integer arithmetic in Z[phi], phi the golden
ratio: each coordinate is a pair (p, q) meaning p + q*phi, squared distances
are computed exactly using phi^2 = phi + 1, and vertices are adjacent iff
their squared distance equals 4 (edge length 2). The canonical node ordering
is the lexicographic order of the integer coordinate tuples, which makes the
adjacency matrix bit-identical on every platform and every run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GraphValidationError


@dataclass(frozen=True)
class RegularGraph:
    """Immutable simple d-regular graph on n nodes.

    adjacency is a float64 0/1 matrix (kept float so it multiplies state
    vectors without casts); neighbor_lists[i] is the sorted tuple of
    neighbors of node i. The degenerate d=0 (edgeless) graph is permitted
    for decoupled-node analyses; the builders never produce it.
    """

    n: int
    d: int
    adjacency: np.ndarray
    neighbor_lists: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        self.adjacency.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return self.n * self.d // 2


def _finish(adjacency: np.ndarray) -> RegularGraph:
    d = validate_regular(adjacency)
    neighbors = tuple(
        tuple(int(j) for j in np.flatnonzero(adjacency[i])) for i in range(adjacency.shape[0])
    )
    return RegularGraph(
        n=adjacency.shape[0], d=d, adjacency=adjacency, neighbor_lists=neighbors
    )


def validate_regular(adjacency: np.ndarray) -> int:
    """Check the regular-graph invariants and return the common degree.

    Raises GraphValidationError naming the first offending row for a matrix
    that is non-square, non-binary, asymmetric, has a nonzero diagonal, or
    has unequal row sums. Non-regular graphs are refused outright because
    every result the toolkit evaluates assumes regularity.
    """
    A = np.asarray(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphValidationError(f"adjacency must be square, got shape {A.shape}")
    n = A.shape[0]
    binary = (A == 0.0) | (A == 1.0)
    if not binary.all():
        i, j = np.argwhere(~binary)[0]
        raise GraphValidationError(
            f"entry ({i}, {j}) = {A[i, j]} is not 0 or 1; graph must be unweighted"
        )
    sym = A == A.T
    if not sym.all():
        i, j = np.argwhere(~sym)[0]
        raise GraphValidationError(
            f"adjacency is asymmetric at ({i}, {j}); graph must be undirected"
        )
    diag = np.diag(A)
    if diag.any():
        i = int(np.flatnonzero(diag)[0])
        raise GraphValidationError(f"node {i} has a self-loop; diagonal must be zero")
    degrees = A.sum(axis=1)
    if not (degrees == degrees[0]).all():
        i = int(np.flatnonzero(degrees != degrees[0])[0])
        raise GraphValidationError(
            f"graph is not regular: row 0 has degree {int(degrees[0])} "
            f"but row {i} has degree {int(degrees[i])}"
        )
    return int(degrees[0])


# ---------------------------------------------------------------------------
# Exact arithmetic in Z[phi]: numbers p + q*phi stored as integer pairs.

def _zmul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    # (p1 + q1 phi)(p2 + q2 phi) with phi^2 = phi + 1
    return (a[0] * b[0] + a[1] * b[1], a[0] * b[1] + a[1] * b[0] + a[1] * b[1])


def _dome_vertices() -> list[tuple[tuple[int, int], ...]]:
    # Truncated-icosahedron vertices with edge length 2: the even (cyclic)
    # permutations of (0, +-1, +-3phi), (+-1, +-(2+phi), +-2phi),
    # (+-phi, +-2, +-(2phi+1)), each coordinate as (p, q) = p + q*phi.
    base = [
        ((0, 0), (1, 0), (0, 3)),
        ((1, 0), (2, 1), (0, 2)),
        ((0, 1), (2, 0), (1, 2)),
    ]
    verts = set()
    for shape in base:
        for sx in (1, -1):
            for sy in (1, -1):
                for sz in (1, -1):
                    signed = tuple(
                        (s * p, s * q) for s, (p, q) in zip((sx, sy, sz), shape)
                    )
                    for rot in range(3):
                        verts.add((signed[rot], signed[(rot + 1) % 3], signed[(rot + 2) % 3]))
    return sorted(verts)


def build_buckminster() -> RegularGraph:
    """The Buckminster Fuller geodesic dome: 60 nodes, degree 3, 90 edges.

    Deterministic by construction; node indices follow the canonical
    ordering described in the module docstring.
    """
    verts = _dome_vertices()
    n = len(verts)
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d2 = (0, 0)
            for c in range(3):
                diff = (verts[i][c][0] - verts[j][c][0], verts[i][c][1] - verts[j][c][1])
                sq = _zmul(diff, diff)
                d2 = (d2[0] + sq[0], d2[1] + sq[1])
            if d2 == (4, 0):
                A[i, j] = A[j, i] = 1.0
    return _finish(A)


def build_circulant(n: int, offsets: list[int]) -> RegularGraph:
    """Circulant graph: node i is joined to i +- off (mod n) for each offset.

    Each offset in [1, n/2) contributes degree 2; the offset n/2 (n even)
    contributes 1. Degree is the sum of contributions.
    """
    if n < 3:
        raise GraphValidationError(f"circulant graph needs n >= 3, got {n}")
    if len(set(offsets)) != len(offsets):
        raise GraphValidationError(f"offsets must be distinct, got {offsets}")
    A = np.zeros((n, n))
    for off in offsets:
        if not (1 <= off <= n // 2):
            raise GraphValidationError(
                f"offset {off} outside valid range [1, {n // 2}] for n={n}"
            )
        for i in range(n):
            j = (i + off) % n
            A[i, j] = A[j, i] = 1.0
    return _finish(A)


def build_complete(n: int) -> RegularGraph:
    """Complete graph on n >= 2 nodes; degree n - 1."""
    if n < 2:
        raise GraphValidationError(f"complete graph needs n >= 2, got {n}")
    A = np.ones((n, n)) - np.eye(n)
    return _finish(A)


def circulant_offsets_for_degree(n: int, d: int) -> list[int]:
    """Offsets giving a d-regular circulant on n nodes (odd d needs even n)."""
    if d < 1 or d >= n:
        raise GraphValidationError(f"degree {d} impossible on {n} nodes")
    if d % 2 == 0:
        return list(range(1, d // 2 + 1))
    if n % 2 != 0:
        raise GraphValidationError(f"odd degree {d} needs an even node count, got {n}")
    return list(range(1, (d - 1) // 2 + 1)) + [n // 2]


def from_adjacency(adjacency: np.ndarray) -> RegularGraph:
    """Wrap a raw matrix as a RegularGraph after full validation."""
    return _finish(np.array(adjacency, dtype=float))


def load_edgelist(path: str) -> RegularGraph:
    """Read an undirected edge list ("i j" per line, 0-based, '#' comments)
    and validate it as a regular graph.
    """
    edges = []
    max_node = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise GraphValidationError(
                    f"{path}:{lineno}: expected 'i j', got {text!r}"
                )
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphValidationError(
                    f"{path}:{lineno}: node ids must be integers, got {text!r}"
                ) from None
            if i < 0 or j < 0:
                raise GraphValidationError(f"{path}:{lineno}: node ids must be >= 0")
            if i == j:
                raise GraphValidationError(f"{path}:{lineno}: self-loop on node {i}")
            edges.append((i, j))
            max_node = max(max_node, i, j)
    if not edges:
        raise GraphValidationError(f"{path}: no edges found")
    n = max_node + 1
    A = np.zeros((n, n))
    for i, j in edges:
        if A[i, j]:
            raise GraphValidationError(f"{path}: duplicate edge ({i}, {j})")
        A[i, j] = A[j, i] = 1.0
    return _finish(A)
