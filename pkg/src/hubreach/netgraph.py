"""Routable road graph built from polylines.

Edge weights are great-circle polyline lengths in kilometres on a sphere of
radius :data:`EARTH_RADIUS_KM`. Polyline endpoints become nodes; endpoints
closer than ``merge_tolerance_m`` are merged. Interior vertices are never
split, so the input is expected to be noded at junctions.
"""

import logging
import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .ingest import DataWarning, quantize

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088
DEFAULT_MERGE_TOLERANCE_M = 1.0
DEFAULT_MAX_SNAP_KM = 5.0
# node attachment wins when within this distance of the best edge point
SNAP_TIE_KM = 1e-9

_KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


def haversine_km(a, b):
    """Great-circle distance in km between two ``(lat, lon)`` points."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    h = (
        math.sin((lat2 - lat1) / 2.0) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def _haversine_array(lat0, lon0, lats, lons):
    lat0, lon0 = math.radians(lat0), math.radians(lon0)
    lats, lons = np.radians(lats), np.radians(lons)
    h = np.sin((lats - lat0) / 2.0) ** 2 + math.cos(lat0) * np.cos(lats) * np.sin(
        (lons - lon0) / 2.0
    ) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def polyline_length_km(vertices):
    return sum(haversine_km(p, q) for p, q in zip(vertices, vertices[1:]))


def _cumulative_km(vertices):
    out = [0.0]
    for p, q in zip(vertices, vertices[1:]):
        out.append(out[-1] + haversine_km(p, q))
    return tuple(out)


@dataclass(frozen=True)
class Edge:
    id: int
    a: int
    b: int
    length_km: float
    geometry: tuple  # (lat, lon) vertices from node a to node b
    cumulative_km: tuple  # distance from node a at each vertex
    source_id: str | None = None


@dataclass(frozen=True)
class Attachment:
    """Where a point joins the network: a node, or a fraction along an edge."""

    node: int | None = None
    edge: int | None = None
    fraction: float | None = None

    def __post_init__(self):
        if (self.node is None) == (self.edge is None):
            raise ValueError("attachment needs exactly one of node or edge")
        if self.edge is not None and not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction out of [0, 1]: {self.fraction}")


@dataclass(frozen=True)
class SnapResult:
    community_id: int | None
    attachment: Attachment
    snap_distance_km: float
    point: tuple  # (lat, lon) of the attachment point

    @property
    def node(self):
        return self.attachment.node

    @property
    def edge(self):
        return self.attachment.edge

    @property
    def fraction(self):
        return self.attachment.fraction


class RoadGraph:
    """Immutable undirected graph; node ids and edge ids are dense integers."""

    def __init__(self, nodes, edges):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        adjacency = [[] for _ in self.nodes]
        for e in self.edges:
            adjacency[e.a].append((e.id, e.b, e.length_km))
            if e.b != e.a:
                adjacency[e.b].append((e.id, e.a, e.length_km))
        self.adjacency = tuple(tuple(adj) for adj in adjacency)
        self._build_segment_index()

    def __repr__(self):
        return f"RoadGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    @classmethod
    def from_weighted_edges(cls, nodes, edges):
        """Graph from ``(a, b, length_km)`` triples with straight two-point geometry.

        The given lengths are used as-is rather than measured, which is handy
        for abstract networks and tests.
        """
        built = []
        for i, (a, b, w) in enumerate(edges):
            if w < 0:
                raise ValueError("edge lengths must be non-negative")
            built.append(Edge(i, a, b, float(w), (nodes[a], nodes[b]), (0.0, float(w))))
        return cls(nodes, built)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    def _build_segment_index(self):
        lat1, lon1, lat2, lon2, edge, start = [], [], [], [], [], []
        for e in self.edges:
            g = e.geometry
            for i in range(len(g) - 1):
                lat1.append(g[i][0])
                lon1.append(g[i][1])
                lat2.append(g[i + 1][0])
                lon2.append(g[i + 1][1])
                edge.append(e.id)
                start.append(i)
        self._seg_lat1 = np.asarray(lat1, dtype=float)
        self._seg_lon1 = np.asarray(lon1, dtype=float)
        self._seg_lat2 = np.asarray(lat2, dtype=float)
        self._seg_lon2 = np.asarray(lon2, dtype=float)
        self._seg_edge = np.asarray(edge, dtype=np.int64)
        self._seg_vertex = np.asarray(start, dtype=np.int64)
        self._node_lat = np.asarray([n[0] for n in self.nodes], dtype=float)
        self._node_lon = np.asarray([n[1] for n in self.nodes], dtype=float)

    def point_at(self, edge_id, fraction):
        """Coordinate at ``fraction`` of the edge length, measured from node a."""
        e = self.edges[edge_id]
        if fraction <= 0.0:
            return e.geometry[0]
        if fraction >= 1.0:
            return e.geometry[-1]
        s = fraction * e.length_km
        cum = e.cumulative_km
        i = int(np.searchsorted(cum, s, side="right")) - 1
        i = min(max(i, 0), len(cum) - 2)
        seg = cum[i + 1] - cum[i]
        t = 0.0 if seg == 0.0 else min(1.0, max(0.0, (s - cum[i]) / seg))
        (la1, lo1), (la2, lo2) = e.geometry[i], e.geometry[i + 1]
        return (la1 + t * (la2 - la1), lo1 + t * (lo2 - lo1))

    def sub_geometry(self, edge_id, f0, f1):
        """Vertex list of the edge between fractions ``f0 <= f1``."""
        e = self.edges[edge_id]
        s0, s1 = f0 * e.length_km, f1 * e.length_km
        inner = [v for v, c in zip(e.geometry, e.cumulative_km) if s0 < c < s1]
        return [self.point_at(edge_id, f0), *inner, self.point_at(edge_id, f1)]

    def attachment_point(self, attachment):
        if attachment.node is not None:
            return self.nodes[attachment.node]
        return self.point_at(attachment.edge, attachment.fraction)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            # keep the earliest-seen point as representative
            lo, hi = min(ri, rj), max(ri, rj)
            self.parent[hi] = lo


def _unit_vectors(points):
    lat = np.radians([p[0] for p in points])
    lon = np.radians([p[1] for p in points])
    return np.column_stack((np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)))


def build_graph(roads, merge_tolerance_m=DEFAULT_MERGE_TOLERANCE_M):
    """Build a :class:`RoadGraph` from :class:`~hubreach.ingest.RoadFeature` s.

    Each road becomes one edge between the nodes of its two endpoints.
    Endpoints that quantize to the same 1e-6 degree cell are the same node;
    on top of that, endpoints within ``merge_tolerance_m`` metres are merged
    (transitively). Edges that end up with zero length are dropped with a
    :class:`~hubreach.ingest.DataWarning`.
    """
    if merge_tolerance_m < 0:
        raise ValueError("merge_tolerance_m must be >= 0")

    keys, points, key_index = [], [], {}
    road_ends = []
    for road in roads:
        ends = []
        for vertex in (road.geometry[0], road.geometry[-1]):
            k = quantize(*vertex)
            if k not in key_index:
                key_index[k] = len(keys)
                keys.append(k)
                points.append(vertex)
            ends.append(key_index[k])
        road_ends.append(ends)

    uf = _UnionFind(len(points))
    if merge_tolerance_m > 0 and len(points) > 1:
        tol_km = merge_tolerance_m / 1000.0
        chord = 2.0 * math.sin(tol_km / (2.0 * EARTH_RADIUS_KM))
        tree = cKDTree(_unit_vectors(points))
        for i, j in sorted(tree.query_pairs(chord * (1 + 1e-9))):
            if haversine_km(points[i], points[j]) <= tol_km:
                uf.union(i, j)

    node_of_root, nodes = {}, []
    point_node = []
    for i in range(len(points)):
        root = uf.find(i)
        if root not in node_of_root:
            node_of_root[root] = len(nodes)
            nodes.append(points[root])
        point_node.append(node_of_root[root])

    edges = []
    for road, (pa, pb) in zip(roads, road_ends):
        a, b = point_node[pa], point_node[pb]
        geometry = [nodes[a], *road.geometry[1:-1], nodes[b]]
        deduped = [geometry[0]]
        for v in geometry[1:]:
            if quantize(*v) != quantize(*deduped[-1]):
                deduped.append(v)
        if len(deduped) < 2:
            deduped = [nodes[a], nodes[b]]
        cum = _cumulative_km(deduped)
        if cum[-1] <= 0.0:
            warnings.warn(
                f"road {road.source_id!r}: zero-length edge dropped", DataWarning, stacklevel=2
            )
            continue
        edges.append(Edge(len(edges), a, b, cum[-1], tuple(deduped), cum, road.source_id))
    graph = RoadGraph(nodes, edges)
    logger.debug("built %r from %d roads", graph, len(road_ends))
    return graph


def snap_point(graph, point, max_snap_km=DEFAULT_MAX_SNAP_KM, community_id=None):
    """Attach ``(lat, lon)`` to the nearest point of the road network.

    Returns a :class:`SnapResult`, or ``None`` when nothing lies within
    ``max_snap_km``. The candidate on each segment is found in a local
    equirectangular frame; the reported distance is the great-circle
    distance to the attachment point.
    """
    if graph.n_edges == 0:
        raise ValueError("cannot snap to an empty graph")
    lat0, lon0 = float(point[0]), float(point[1])
    pad_lat = max_snap_km / _KM_PER_DEG * 1.01 + 1e-9
    coslat = max(math.cos(math.radians(lat0)), 1e-6)
    pad_lon = min(360.0, pad_lat / coslat)

    g = graph
    mask = (
        (np.minimum(g._seg_lat1, g._seg_lat2) <= lat0 + pad_lat)
        & (np.maximum(g._seg_lat1, g._seg_lat2) >= lat0 - pad_lat)
        & (np.minimum(g._seg_lon1, g._seg_lon2) <= lon0 + pad_lon)
        & (np.maximum(g._seg_lon1, g._seg_lon2) >= lon0 - pad_lon)
    )
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None

    lat1, lon1 = g._seg_lat1[idx], g._seg_lon1[idx]
    lat2, lon2 = g._seg_lat2[idx], g._seg_lon2[idx]
    x1, y1 = (lon1 - lon0) * coslat, lat1 - lat0
    dx, dy = (lon2 - lon1) * coslat, lat2 - lat1
    denom = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom > 0, -(x1 * dx + y1 * dy) / denom, 0.0)
    t = np.clip(t, 0.0, 1.0)
    dist = _haversine_array(lat0, lon0, lat1 + t * (lat2 - lat1), lon1 + t * (lon2 - lon1))
    best = int(np.argmin(dist))
    best_dist = float(dist[best])
    if best_dist > max_snap_km:
        return None

    edge = g.edges[int(g._seg_edge[idx[best]])]
    vertex = int(g._seg_vertex[idx[best]])
    seg_len = edge.cumulative_km[vertex + 1] - edge.cumulative_km[vertex]
    fraction = (edge.cumulative_km[vertex] + float(t[best]) * seg_len) / edge.length_km
    fraction = min(1.0, max(0.0, fraction))

    node = None
    if fraction == 0.0:
        node = edge.a
    elif fraction == 1.0:
        node = edge.b
    else:
        node_dist = _haversine_array(lat0, lon0, g._node_lat, g._node_lon)
        nearest = int(np.argmin(node_dist))
        if node_dist[nearest] <= best_dist + SNAP_TIE_KM:
            node = nearest

    if node is not None:
        attachment = Attachment(node=node)
    else:
        attachment = Attachment(edge=edge.id, fraction=fraction)
    where = g.attachment_point(attachment)
    snap_km = haversine_km((lat0, lon0), where)
    if snap_km > max_snap_km:
        return None
    return SnapResult(community_id, attachment, snap_km, where)


def connected_components(graph):
    """Component label per node: the smallest node id in its component."""
    labels = [-1] * graph.n_nodes
    for start in range(graph.n_nodes):
        if labels[start] >= 0:
            continue
        labels[start] = start
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for _, v, _ in graph.adjacency[u]:
                if labels[v] < 0:
                    labels[v] = start
                    queue.append(v)
    return labels


def unnoded_crossings(graph):
    """Pairs of edge ids whose geometries touch or cross away from shared nodes.

    Such contacts are not routable (edges are never split at interior
    points), so callers surface them as validation warnings.
    """
    from shapely import LineString, Point, STRtree

    lines = [LineString([(lon, lat) for lat, lon in e.geometry]) for e in graph.edges]
    if not lines:
        return []
    tree = STRtree(lines)
    pairs = []
    for i, j in zip(*tree.query(lines, predicate="intersects")):
        i, j = int(i), int(j)
        if i >= j:
            continue
        ei, ej = graph.edges[i], graph.edges[j]
        contact = lines[i].intersection(lines[j])
        shared = {ei.a, ei.b} & {ej.a, ej.b}
        for n in shared:
            lat, lon = graph.nodes[n]
            contact = contact.difference(Point(lon, lat).buffer(1e-7))
        if not contact.is_empty:
            pairs.append((i, j))
    return sorted(pairs)
