"""Geometry of the edge-qubit lattice.

Qubits sit on the edges of a rectangular grid of vertices. The grid has
``width`` rows and ``length`` columns of vertices, so there are
``width*(length-1)`` horizontal edges and ``(width-1)*length`` vertical
edges, and ``(width-1)*(length-1)`` unit-square plaquettes.

Conventions (fixed for reproducibility):

* Vertices are ``(row, column)`` pairs, row 0 at the bottom.
* Edges are canonically indexed with all horizontal edges first in
  row-major order, then all vertical edges in row-major order.
* A plaquette is the 4-tuple of its edge indices ordered counterclockwise
  starting from the bottom edge: (bottom, right, top, left).
* Corner pairs are pairs of one horizontal and one vertical edge meeting
  at a vertex.  Collinear pairs (two horizontal or two vertical edges
  through the same vertex) are excluded: including them makes the corner
  Hamiltonian commute with the plaquette Hamiltonian on every lattice,
  which collapses the split-operator error this model is used to study.
* Device couplings are all pairs of edges sharing a vertex, i.e. the
  nearest-neighbour graph of the edge midpoints together with the
  collinear next-nearest pairs through each vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

Vertex = tuple[int, int]
Edge = tuple[Vertex, Vertex]


@dataclass(frozen=True)
class Lattice:
    """Immutable enumeration of a ``width x length`` vertex grid.

    ``edges[i]`` is the pair of vertices of qubit ``i``; the remaining
    fields hold edge-index tuples referring to that canonical order.
    """

    width: int
    length: int
    edges: tuple[Edge, ...]
    plaquettes: tuple[tuple[int, int, int, int], ...]
    corner_pairs: tuple[tuple[int, int], ...]
    couplings: tuple[tuple[int, int], ...]

    @property
    def n_qubits(self) -> int:
        return len(self.edges)


def _is_horizontal(edge: Edge) -> bool:
    (r0, _), (r1, _) = edge
    return r0 == r1


def make_lattice(width: int, length: int) -> Lattice:
    """Enumerate edges, plaquettes, corner pairs and couplings.

    Requires ``width >= 1``, ``length >= 1`` and at least one edge
    (``width*length >= 2``).
    """
    if width < 1 or length < 1:
        raise ValueError(f"lattice dimensions must be positive, got {width}x{length}")
    if width * length < 2:
        raise ValueError(
            f"a {width}x{length} vertex grid has no edges; need width*length >= 2"
        )

    edges: list[Edge] = []
    for r in range(width):
        for c in range(length - 1):
            edges.append(((r, c), (r, c + 1)))
    for r in range(width - 1):
        for c in range(length):
            edges.append(((r, c), (r + 1, c)))
    index = {e: i for i, e in enumerate(edges)}

    plaquettes = []
    for r in range(width - 1):
        for c in range(length - 1):
            bottom = index[((r, c), (r, c + 1))]
            right = index[((r, c + 1), (r + 1, c + 1))]
            top = index[((r + 1, c), (r + 1, c + 1))]
            left = index[((r, c), (r + 1, c))]
            plaquettes.append((bottom, right, top, left))

    corners = []
    couplings = []
    for i, j in combinations(range(len(edges)), 2):
        shared = set(edges[i]) & set(edges[j])
        if not shared:
            continue
        couplings.append((i, j))
        if _is_horizontal(edges[i]) != _is_horizontal(edges[j]):
            corners.append((i, j))

    return Lattice(
        width=width,
        length=length,
        edges=tuple(edges),
        plaquettes=tuple(plaquettes),
        corner_pairs=tuple(corners),
        couplings=tuple(couplings),
    )


def corner_pairs(lattice: Lattice) -> list[tuple[int, int]]:
    """Perpendicular vertex-sharing edge pairs, each listed once."""
    return list(lattice.corner_pairs)


def device_couplings(lattice: Lattice) -> list[tuple[int, int]]:
    """Edge pairs coupled on the device: all pairs sharing a vertex."""
    return list(lattice.couplings)


def describe(lattice: Lattice) -> dict:
    """JSON-serialisable enumeration of the lattice."""
    return {
        "width": lattice.width,
        "length": lattice.length,
        "n_qubits": lattice.n_qubits,
        "edges": [[list(a), list(b)] for a, b in lattice.edges],
        "plaquettes": [list(p) for p in lattice.plaquettes],
        "corner_pairs": [list(p) for p in lattice.corner_pairs],
        "couplings": [list(p) for p in lattice.couplings],
    }
