"""Random graph generators and brute-force oracles shared by the tests."""

import math
import random
from pathlib import Path

import numpy as np

from hubreach.netgraph import Attachment, RoadGraph

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "src" / "hubreach" / "data" / "fixture"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def random_connected_graph(rng, n_nodes, extra_edges=None, weight=None):
    """Spanning tree plus extra edges; weights uniform in (0, 100] by default."""
    if weight is None:
        weight = lambda: 100.0 - rng.random() * 100.0  # noqa: E731
    nodes = [(rng.uniform(-20, -10), rng.uniform(125, 135)) for _ in range(n_nodes)]
    edges = []
    for v in range(1, n_nodes):
        edges.append((rng.randrange(v), v, weight()))
    if extra_edges is None:
        extra_edges = rng.randint(0, n_nodes)
    for _ in range(extra_edges):
        a, b = rng.randrange(n_nodes), rng.randrange(n_nodes)
        if a != b:
            edges.append((a, b, weight()))
    return RoadGraph.from_weighted_edges(nodes, edges)


def random_attachment(rng, graph, edge_probability=0.5):
    if graph.n_edges and rng.random() < edge_probability:
        return Attachment(edge=rng.randrange(graph.n_edges), fraction=rng.uniform(0.01, 0.99))
    return Attachment(node=rng.randrange(graph.n_nodes))


def transitive_closure_components(graph):
    """Component labels from a boolean reachability matrix (Warshall)."""
    n = graph.n_nodes
    reach = np.eye(n, dtype=bool)
    for e in graph.edges:
        reach[e.a, e.b] = reach[e.b, e.a] = True
    for k in range(n):
        reach |= reach[:, k : k + 1] & reach[k : k + 1, :]
    return [int(np.flatnonzero(reach[v])[0]) for v in range(n)]


def brute_stop_count(d, R):
    k = 0
    while not d <= (k + 1) * R:
        k += 1
    return k


def law_of_cosines_km(a, b, radius=6371.0088):
    la1, lo1, la2, lo2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    c = math.sin(la1) * math.sin(la2) + math.cos(la1) * math.cos(la2) * math.cos(lo2 - lo1)
    return radius * math.acos(max(-1.0, min(1.0, c)))


def seeded(seed):
    return random.Random(seed)
