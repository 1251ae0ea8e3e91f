"""Directed proximity graph: construction, spanning-tree check, Laplacian."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import RobotState

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised for inconsistent topology inputs (e.g. missing edge weights)."""


@dataclass
class Topology:
    """Snapshot of the sensing graph.

    ``neighbors[i]`` lists the robots that robot i can sense (its parents:
    information flows from them to i). ``distances`` holds the distance for
    every directed edge at construction time. ``monitored_edges`` is the set
    of edges whose preservation the simulator watches; by default it is every
    edge present at construction, since the connectivity claim covers all of
    them.
    """

    n: int
    neighbors: dict[int, tuple[int, ...]]
    distances: dict[Edge, float]
    monitored_edges: tuple[Edge, ...] = field(default_factory=tuple)


@dataclass
class LaplacianSnapshot:
    matrix: np.ndarray  # (n, n)
    timestamp: float = 0.0


def build_topology(states: list[RobotState], sensing_radius: float) -> Topology:
    """Build the sensing graph: edge (i, j) iff ||p_i - p_j|| < radius, strictly.

    Edges come in mutual pairs because sensing is distance-based; the directed
    representation is kept so that hand-built asymmetric topologies can use the
    same algorithms.
    """
    n = len(states)
    neighbors: dict[int, tuple[int, ...]] = {}
    distances: dict[Edge, float] = {}
    for a in states:
        near = []
        for b in states:
            if b.id == a.id:
                continue
            d = float(np.linalg.norm(a.position - b.position))
            if d < sensing_radius:
                near.append(b.id)
                distances[(a.id, b.id)] = d
        neighbors[a.id] = tuple(near)
    edges = tuple(sorted(distances))
    return Topology(n=n, neighbors=neighbors, distances=distances,
                    monitored_edges=edges)


def has_rooted_spanning_tree(topo: Topology, root: int) -> bool:
    """True iff information from ``root`` can reach every node.

    Edge (i, j) means i senses j, so information flows j -> i; we traverse
    edges reversed and require every node reachable from the root.
    """
    if not 1 <= root <= topo.n:
        raise GraphError(f"root {root} outside 1..{topo.n}")
    children: dict[int, list[int]] = {i: [] for i in range(1, topo.n + 1)}
    for i, parents in topo.neighbors.items():
        for j in parents:
            children[j].append(i)
    seen = {root}
    queue = deque([root])
    while queue:
        j = queue.popleft()
        for i in children[j]:
            if i not in seen:
                seen.add(i)
                queue.append(i)
    return len(seen) == topo.n


def laplacian(topo: Topology, weights: dict[Edge, float],
              linear_gains: list[float], informed: int = 1,
              timestamp: float = 0.0) -> LaplacianSnapshot:
    """Assemble the weighted graph Laplacian of the follower dynamics.

    Row i (a follower) has diagonal sum(k_i * w_ij) over its neighbors and
    -k_i * w_ij off-diagonal; the informed robot's row is identically zero
    because its motion does not depend on the followers.
    """
    n = topo.n
    mat = np.zeros((n, n))
    for i in range(1, n + 1):
        if i == informed:
            continue
        k = linear_gains[i - 1]
        for j in topo.neighbors[i]:
            try:
                w = weights[(i, j)]
            except KeyError:
                raise GraphError(f"missing weight for edge ({i}, {j})") from None
            mat[i - 1, i - 1] += k * w
            mat[i - 1, j - 1] -= k * w
    return LaplacianSnapshot(matrix=mat, timestamp=timestamp)


def current_edge_distances(positions: dict[int, np.ndarray],
                           edges: tuple[Edge, ...]) -> dict[Edge, float]:
    """Recompute distances for a fixed edge set from fresh positions."""
    return {(i, j): float(np.linalg.norm(positions[i] - positions[j]))
            for i, j in edges}


def tree_edge_stress(topo: Topology, sensing_radius: float,
                     connectivity_buffer: float) -> list[tuple[Edge, float]]:
    """Margin to connectivity loss, R - d, for every monitored edge.

    A margin <= 0 means the edge has broken; margins below
    ``connectivity_buffer`` mean the edge sits inside the band where the
    connectivity term of the potential actively pulls it back.
    """
    if not 0.0 < connectivity_buffer < sensing_radius:
        raise GraphError("connectivity_buffer must be in (0, sensing_radius)")
    return [(edge, sensing_radius - topo.distances[edge])
            for edge in topo.monitored_edges]
