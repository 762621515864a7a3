"""Shortest-path distances over a :class:`~hubreach.netgraph.RoadGraph`.

Sources and targets are attachments: a node id, an
:class:`~hubreach.netgraph.Attachment`, or a
:class:`~hubreach.netgraph.SnapResult`. A point on an edge is routed as a
virtual split of that edge; the graph itself is never modified.

Unreachable distances are ``None`` in every public return value.
"""

import heapq
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .netgraph import Attachment, SnapResult

DEFAULT_ORACLE_CAP = 500


class OracleCapExceeded(ValueError):
    pass


def as_attachment(x):
    if isinstance(x, Attachment):
        return x
    if isinstance(x, SnapResult):
        return x.attachment
    if isinstance(x, (int, np.integer)):
        return Attachment(node=int(x))
    raise TypeError(f"not an attachment: {x!r}")


def _seeds(graph, att):
    """(node, offset) pairs through which an attachment enters the graph."""
    if att.node is not None:
        return [(att.node, 0.0)]
    e = graph.edges[att.edge]
    return [(e.a, att.fraction * e.length_km), (e.b, (1.0 - att.fraction) * e.length_km)]


def _dijkstra(graph, seeds):
    """Label-setting search over (distance, source rank) keys.

    ``seeds`` holds (node, offset, rank) triples. Ordering labels
    lexicographically makes equal-distance ties resolve to the smallest
    rank independent of heap order.
    """
    n = graph.n_nodes
    dist = [math.inf] * n
    owner = [-1] * n
    done = [False] * n
    heap = []
    for node, offset, rank in seeds:
        if (offset, rank) < (dist[node], owner[node] if owner[node] >= 0 else math.inf):
            dist[node], owner[node] = offset, rank
            heapq.heappush(heap, (offset, rank, node))
    adjacency = graph.adjacency
    while heap:
        d, r, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for _, v, w in adjacency[u]:
            if done[v]:
                continue
            nd = d + w
            if nd < dist[v] or (nd == dist[v] and r < owner[v]):
                dist[v], owner[v] = nd, r
                heapq.heappush(heap, (nd, r, v))
    return dist, owner


class DistanceLabeling:
    """Distance to, and identity of, the nearest source for every node.

    Use :meth:`distance` / :meth:`nearest` for nodes and :meth:`query` for
    arbitrary attachments (which may lie on an edge, possibly the same edge
    as a source).
    """

    def __init__(self, graph, sources, source_ids, dist, owner):
        self.graph = graph
        self.sources = tuple(sources)
        self.source_ids = tuple(source_ids)
        self._dist = dist
        self._owner = owner
        self._on_edge = {}
        for rank, att in enumerate(self.sources):
            if att.edge is not None:
                self._on_edge.setdefault(att.edge, []).append((att.fraction, rank))

    def __len__(self):
        return len(self._dist)

    def distance(self, node):
        d = self._dist[node]
        return None if d == math.inf else d

    def nearest(self, node):
        r = self._owner[node]
        return None if r < 0 else self.source_ids[r]

    @property
    def reachable(self):
        return np.array([d != math.inf for d in self._dist], dtype=bool)

    def distances_array(self):
        """Node distances as floats with NaN for unreachable nodes."""
        return np.array([d if d != math.inf else np.nan for d in self._dist], dtype=float)

    def _candidates(self, att):
        if att.node is not None:
            yield self._dist[att.node], self._owner[att.node]
            return
        e = self.graph.edges[att.edge]
        f = att.fraction
        yield self._dist[e.a] + f * e.length_km, self._owner[e.a]
        yield self._dist[e.b] + (1.0 - f) * e.length_km, self._owner[e.b]
        for fs, rank in self._on_edge.get(att.edge, ()):
            yield abs(f - fs) * e.length_km, rank

    def query(self, target):
        """(distance_km, source_id) for an attachment, or (None, None)."""
        att = as_attachment(target)
        best = (math.inf, math.inf)
        for d, r in self._candidates(att):
            if r >= 0 and (d, r) < best:
                best = (d, r)
        if best[0] == math.inf:
            return None, None
        return best[0], self.source_ids[best[1]]

    def point_distance(self, edge_id, fraction):
        """Network distance to the nearest source from a point on an edge."""
        return self.query(Attachment(edge=edge_id, fraction=fraction))[0]


def multi_source_labeling(graph, sources, source_ids=None):
    """One search from all sources at once.

    Each node gets its distance to the nearest source and that source's id;
    equal distances go to the smallest source id.
    """
    sources = [as_attachment(s) for s in sources]
    if not sources:
        raise ValueError("at least one source is required")
    if source_ids is None:
        source_ids = list(range(len(sources)))
    if len(source_ids) != len(sources):
        raise ValueError("source_ids must match sources")
    # rank = position in id order, so rank comparisons follow id comparisons
    order = sorted(range(len(sources)), key=lambda i: (source_ids[i], i))
    sources = [sources[i] for i in order]
    source_ids = [source_ids[i] for i in order]
    seeds = [(node, off, rank) for rank, s in enumerate(sources) for node, off in _seeds(graph, s)]
    dist, owner = _dijkstra(graph, seeds)
    return DistanceLabeling(graph, sources, source_ids, dist, owner)


def shortest_paths_from(graph, source):
    return multi_source_labeling(graph, [source])


@dataclass(frozen=True)
class ODMatrix:
    origins: tuple
    destinations: tuple
    distance_km: np.ndarray  # NaN where unreachable

    def get(self, i, j):
        d = self.distance_km[i, j]
        return None if np.isnan(d) else float(d)

    def nearest(self, i):
        """Column index of the nearest destination for row ``i`` (lowest index on ties)."""
        row = self.distance_km[i]
        if np.all(np.isnan(row)):
            return None
        return int(np.nanargmin(row))


_worker_graph = None


def _init_worker(graph):
    global _worker_graph
    _worker_graph = graph


def _od_rows(graph, origins, destinations):
    rows = []
    for o in origins:
        lab = shortest_paths_from(graph, o)
        rows.append([lab.query(d)[0] for d in destinations])
    return rows


def _od_rows_worker(origins, destinations):
    return _od_rows(_worker_graph, origins, destinations)


def resolve_workers(workers):
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def od_matrix(graph, origins, destinations, workers=1, origin_ids=None, destination_ids=None):
    """Pairwise network distances, one single-source search per origin.

    Rows are independent; with ``workers > 1`` they are computed in a
    process pool and reassembled in input order, so the result does not
    depend on the worker count.
    """
    origins = [as_attachment(o) for o in origins]
    destinations = [as_attachment(d) for d in destinations]
    if not origins or not destinations:
        raise ValueError("origins and destinations must be non-empty")
    workers = min(resolve_workers(workers), len(origins))
    if workers <= 1:
        rows = _od_rows(graph, origins, destinations)
    else:
        chunk = math.ceil(len(origins) / workers)
        parts = [origins[i : i + chunk] for i in range(0, len(origins), chunk)]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(graph,)) as pool:
            futures = [pool.submit(_od_rows_worker, p, destinations) for p in parts]
            rows = [row for f in futures for row in f.result()]
    table = np.array(
        [[np.nan if d is None else d for d in row] for row in rows], dtype=float
    ).reshape(len(origins), len(destinations))
    return ODMatrix(
        tuple(origin_ids if origin_ids is not None else range(len(origins))),
        tuple(destination_ids if destination_ids is not None else range(len(destinations))),
        table,
    )


@dataclass(frozen=True)
class ServiceArea:
    threshold_km: float
    covered: tuple  # ((edge_id, f0, f1), ...) sorted by edge then f0

    def intervals(self, edge_id):
        return [(f0, f1) for e, f0, f1 in self.covered if e == edge_id]

    def contains(self, edge_id, fraction):
        return any(f0 <= fraction <= f1 for f0, f1 in self.intervals(edge_id))


def _merge(intervals):
    out = []
    for f0, f1 in sorted(intervals):
        if out and f0 <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], f1))
        else:
            out.append((f0, f1))
    return out


def edge_coverage(labeling, edge, threshold_km):
    """Covered sub-intervals of one edge, from both endpoints and same-edge sources.

    Zero-width intervals (a point touched exactly at the threshold) are
    omitted.
    """
    L = edge.length_km
    pieces = []
    da, db = labeling._dist[edge.a], labeling._dist[edge.b]
    if da < threshold_km:
        pieces.append((0.0, min(1.0, (threshold_km - da) / L)))
    if db < threshold_km:
        pieces.append((max(0.0, 1.0 - (threshold_km - db) / L), 1.0))
    for fs, _ in labeling._on_edge.get(edge.id, ()):
        reach = threshold_km / L
        pieces.append((max(0.0, fs - reach), min(1.0, fs + reach)))
    return [(f0, f1) for f0, f1 in _merge(pieces) if f1 > f0]


def service_area(graph, sources, thresholds, labeling=None):
    """Network sub-edges within each threshold distance of the nearest source.

    ``thresholds`` must be strictly ascending and positive. A precomputed
    multi-source ``labeling`` over the same sources may be passed in.
    """
    thresholds = [float(t) for t in thresholds]
    if not thresholds or any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly ascending")
    if labeling is None:
        labeling = multi_source_labeling(graph, sources)
    areas = []
    for t in thresholds:
        covered = []
        for e in graph.edges:
            covered.extend((e.id, f0, f1) for f0, f1 in edge_coverage(labeling, e, t))
        areas.append(ServiceArea(t, tuple(covered)))
    return areas


def all_pairs_oracle(graph, cap=DEFAULT_ORACLE_CAP):
    """All-pairs node distances by Floyd-Warshall (inf where unreachable).

    Cubic; meant for verification on small graphs only.
    """
    n = graph.n_nodes
    if n > cap:
        raise OracleCapExceeded(f"graph has {n} nodes, oracle cap is {cap}")
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for e in graph.edges:
        if e.a != e.b and e.length_km < d[e.a, e.b]:
            d[e.a, e.b] = d[e.b, e.a] = e.length_km
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def oracle_attachment_distance(graph, table, a, b):
    """Distance between two attachments given an all-pairs node table."""
    a, b = as_attachment(a), as_attachment(b)
    best = min(
        oa + table[na, nb] + ob for na, oa in _seeds(graph, a) for nb, ob in _seeds(graph, b)
    )
    if a.edge is not None and a.edge == b.edge:
        best = min(best, abs(a.fraction - b.fraction) * graph.edges[a.edge].length_km)
    return float(best)


__all__ = [
    "DistanceLabeling",
    "ODMatrix",
    "OracleCapExceeded",
    "ServiceArea",
    "all_pairs_oracle",
    "as_attachment",
    "edge_coverage",
    "multi_source_labeling",
    "od_matrix",
    "oracle_attachment_distance",
    "service_area",
    "shortest_paths_from",
]
