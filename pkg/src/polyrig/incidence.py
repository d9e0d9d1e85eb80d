"""Combinatorial layer: vertex-face incidence structures.

A convex polyhedron is described here purely by its face cycles. The
geometric layer attaches coordinates later; this module only validates
the combinatorics (closed surface, Euler count) and derives the pair
lists other modules iterate over: edges, same-face vertex pairs, face
adjacencies, and the incidence pairs themselves.

Vertex and face ids are 0-based and contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DanglingEdge, DegenerateFace, EulerViolation, NotReducible

VERTEX = "vertex"
FACE = "face"


@dataclass(frozen=True)
class AbstractPolyhedron:
    """Immutable incidence structure.

    faces holds one cyclic tuple of vertex ids per face. incidence lists
    every (vertex, face) pair ordered by face and then by position in the
    face cycle; its length is 2E for a closed surface, and that ordering
    fixes the row order of every Jacobian built downstream.
    """

    vertex_count: int
    faces: tuple[tuple[int, ...], ...]
    incidence: tuple[tuple[int, int], ...]

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def edge_count(self) -> int:
        return len(self.incidence) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Sorted undirected edges (u, v) with u < v."""
        seen = set()
        for cycle in self.faces:
            for a, b in _cycle_pairs(cycle):
                seen.add((min(a, b), max(a, b)))
        return sorted(seen)

    def face_vertex_pairs(self) -> list[tuple[int, int]]:
        """Sorted pairs of distinct vertices sharing at least one face."""
        seen = set()
        for cycle in self.faces:
            for i in range(len(cycle)):
                for j in range(i + 1, len(cycle)):
                    a, b = cycle[i], cycle[j]
                    seen.add((min(a, b), max(a, b)))
        return sorted(seen)

    def face_diagonals(self) -> list[tuple[int, int]]:
        """Same-face vertex pairs that are not edges."""
        edge_set = set(self.edges())
        return [p for p in self.face_vertex_pairs() if p not in edge_set]

    def adjacent_faces(self) -> list[tuple[int, int]]:
        """Sorted pairs of face ids sharing an edge."""
        by_edge: dict[tuple[int, int], list[int]] = {}
        for f, cycle in enumerate(self.faces):
            for a, b in _cycle_pairs(cycle):
                by_edge.setdefault((min(a, b), max(a, b)), []).append(f)
        return sorted((min(fs), max(fs)) for fs in by_edge.values())

    def faces_of_vertex(self, v: int) -> list[int]:
        return [f for f, cycle in enumerate(self.faces) if v in cycle]

    def face_corner_triples(self) -> list[tuple[int, int, int]]:
        """(apex, end1, end2) for every corner of every face cycle."""
        triples = []
        for cycle in self.faces:
            k = len(cycle)
            for i in range(k):
                apex = cycle[i]
                triples.append((apex, cycle[(i - 1) % k], cycle[(i + 1) % k]))
        return triples


@dataclass(frozen=True)
class EliminationOrder:
    """Ordering of all vertices and faces such that each element is incident
    to at most three earlier elements (vertex-face incidence only)."""

    elements: tuple[tuple[str, int], ...]


def _cycle_pairs(cycle: Sequence[int]):
    k = len(cycle)
    for i in range(k):
        yield cycle[i], cycle[(i + 1) % k]


def build_incidence(faces: Sequence[Sequence[int]]) -> AbstractPolyhedron:
    """Validate face cycles and assemble the incidence structure.

    Raises DegenerateFace for a cycle with fewer than three or repeated
    vertices, DanglingEdge when an edge is not shared by exactly two faces
    with opposite orientations (or a vertex lies on fewer than three faces),
    and EulerViolation when V + F != E + 2.
    """
    cycles = tuple(tuple(int(v) for v in cycle) for cycle in faces)
    if not cycles:
        raise DegenerateFace("no faces given")

    for f, cycle in enumerate(cycles):
        if len(cycle) < 3:
            raise DegenerateFace(f"face {f} has only {len(cycle)} vertices")
        if len(set(cycle)) != len(cycle):
            raise DegenerateFace(f"face {f} repeats a vertex: {cycle}")
        if any(v < 0 for v in cycle):
            raise ValueError(f"face {f} contains a negative vertex id")

    used = sorted({v for cycle in cycles for v in cycle})
    vertex_count = used[-1] + 1
    if used != list(range(vertex_count)):
        missing = sorted(set(range(vertex_count)) - set(used))
        raise ValueError(f"vertex ids are not contiguous, missing {missing}")

    directed: dict[tuple[int, int], int] = {}
    for cycle in cycles:
        for a, b in _cycle_pairs(cycle):
            directed[(a, b)] = directed.get((a, b), 0) + 1
    for (a, b), n in directed.items():
        if n != 1 or directed.get((b, a), 0) != 1:
            raise DanglingEdge(
                f"edge ({a},{b}) is traversed {n} time(s) forward and "
                f"{directed.get((b, a), 0)} time(s) backward; a closed surface "
                "needs each edge once in each direction"
            )

    edge_count = len(directed) // 2
    if vertex_count + len(cycles) != edge_count + 2:
        raise EulerViolation(
            f"V + F = {vertex_count + len(cycles)} but E + 2 = {edge_count + 2}"
        )

    face_membership: dict[int, set[int]] = {v: set() for v in used}
    for f, cycle in enumerate(cycles):
        for v in cycle:
            face_membership[v].add(f)
    for v, fs in face_membership.items():
        if len(fs) < 3:
            raise DanglingEdge(f"vertex {v} lies on only {len(fs)} face(s)")

    incidence = tuple(
        (v, f) for f, cycle in enumerate(cycles) for v in cycle
    )
    return AbstractPolyhedron(vertex_count=vertex_count, faces=cycles, incidence=incidence)


def elimination_order(poly: AbstractPolyhedron) -> EliminationOrder:
    """Order all vertices and faces so each has <= 3 earlier incidences.

    Works on the bipartite vertex-face incidence graph: repeatedly remove
    a node of minimum current degree (which is <= 3 whenever the graph is
    planar and bipartite) and reverse the removal sequence. Raises
    NotReducible if at some point every remaining node has degree >= 4.
    Deterministic: ties break on (kind, id) with vertices first.
    """
    nodes = [(VERTEX, i) for i in range(poly.vertex_count)] + [
        (FACE, j) for j in range(poly.face_count)
    ]
    neighbors: dict[tuple[str, int], set[tuple[str, int]]] = {n: set() for n in nodes}
    for v, f in poly.incidence:
        neighbors[(VERTEX, v)].add((FACE, f))
        neighbors[(FACE, f)].add((VERTEX, v))

    kind_rank = {VERTEX: 0, FACE: 1}
    removed: list[tuple[str, int]] = []
    alive = set(nodes)
    while alive:
        node = min(alive, key=lambda n: (len(neighbors[n]), kind_rank[n[0]], n[1]))
        if len(neighbors[node]) > 3:
            raise NotReducible(
                f"all remaining nodes have degree >= 4 (stuck at {node})"
            )
        for other in neighbors[node]:
            neighbors[other].discard(node)
        neighbors[node] = set()
        alive.discard(node)
        removed.append(node)

    return EliminationOrder(elements=tuple(reversed(removed)))


def earlier_incidence_counts(poly: AbstractPolyhedron, order: EliminationOrder) -> list[int]:
    """For each element of the order, how many earlier elements it touches.

    Every incidence pair charges whichever of its two endpoints appears
    later in the order, so counts[k] <= 3 for all k is exactly the defining
    property of a valid elimination order.
    """
    position = {el: k for k, el in enumerate(order.elements)}
    counts = [0] * len(order.elements)
    for v, f in poly.incidence:
        counts[max(position[(VERTEX, v)], position[(FACE, f)])] += 1
    return counts
