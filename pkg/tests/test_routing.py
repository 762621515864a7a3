import math

import numpy as np
import pytest

from helpers import random_attachment, random_connected_graph, seeded
from hubreach.netgraph import Attachment, RoadGraph
from hubreach.routing import (
    OracleCapExceeded,
    all_pairs_oracle,
    multi_source_labeling,
    od_matrix,
    oracle_attachment_distance,
    service_area,
    shortest_paths_from,
)


def line_graph(*weights):
    nodes = [(0.0, float(i)) for i in range(len(weights) + 1)]
    return RoadGraph.from_weighted_edges(nodes, [(i, i + 1, w) for i, w in enumerate(weights)])


def test_path_distances():
    g = line_graph(3.0, 4.0)
    lab = shortest_paths_from(g, 0)
    assert [lab.distance(v) for v in range(3)] == [0.0, 3.0, 7.0]


def test_source_mid_edge():
    g = line_graph(10.0)
    lab = shortest_paths_from(g, Attachment(edge=0, fraction=0.3))
    assert lab.distance(0) == pytest.approx(3.0)
    assert lab.distance(1) == pytest.approx(7.0)


def test_same_edge_source_and_target():
    g = line_graph(10.0)
    lab = shortest_paths_from(g, Attachment(edge=0, fraction=0.3))
    d, _ = lab.query(Attachment(edge=0, fraction=0.5))
    assert d == pytest.approx(2.0)


def test_unreachable_is_none():
    g = RoadGraph.from_weighted_edges([(0, 0), (0, 1), (0, 2), (0, 3)], [(0, 1, 1.0), (2, 3, 1.0)])
    lab = shortest_paths_from(g, 0)
    assert lab.distance(2) is None and lab.nearest(2) is None
    assert lab.query(3) == (None, None)
    assert np.isnan(lab.distances_array()[3])


def test_tie_goes_to_smallest_source_id():
    g = line_graph(5.0, 5.0)
    lab = multi_source_labeling(g, [2, 0], source_ids=[9, 4])
    assert lab.query(1) == (5.0, 4)


@pytest.mark.parametrize("seed", range(20))
def test_single_source_matches_floyd_warshall(seed):
    rng = seeded(seed)
    g = random_connected_graph(rng, rng.randint(2, 40))
    table = all_pairs_oracle(g)
    s = rng.randrange(g.n_nodes)
    lab = shortest_paths_from(g, s)
    for v in range(g.n_nodes):
        assert lab.distance(v) == pytest.approx(table[s, v], rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_multi_source_matches_oracle_min(seed):
    rng = seeded(100 + seed)
    g = random_connected_graph(rng, rng.randint(3, 40))
    table = all_pairs_oracle(g)
    sources = [random_attachment(rng, g) for _ in range(rng.randint(1, 4))]
    lab = multi_source_labeling(g, sources)
    for _ in range(20):
        t = random_attachment(rng, g)
        expected = min(oracle_attachment_distance(g, table, s, t) for s in sources)
        assert lab.query(t)[0] == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_od_matrix_small_example():
    g = line_graph(3.0, 4.0)
    od = od_matrix(g, [0, 1], [2, 0])
    assert od.distance_km.tolist() == [[7.0, 0.0], [4.0, 3.0]]
    assert od.nearest(0) == 1
    assert od.get(1, 0) == 4.0


def test_od_matrix_parallel_equals_serial():
    rng = seeded(5)
    g = random_connected_graph(rng, 60)
    origins = [random_attachment(rng, g) for _ in range(30)]
    dests = [random_attachment(rng, g) for _ in range(5)]
    serial = od_matrix(g, origins, dests, workers=1)
    parallel = od_matrix(g, origins, dests, workers=4)
    assert np.array_equal(serial.distance_km, parallel.distance_km, equal_nan=True)


def test_service_area_on_path():
    g = line_graph(10.0)
    (area,) = service_area(g, [0], [4.0])
    assert area.intervals(0) == [(0.0, pytest.approx(0.4))]


def test_service_area_from_mid_edge_source():
    g = line_graph(10.0, 10.0)
    (area,) = service_area(g, [Attachment(edge=0, fraction=0.5)], [7.0])
    assert area.intervals(0) == [(0.0, 1.0)]
    assert area.intervals(1) == [(0.0, pytest.approx(0.2))]


def test_service_area_on_cycle_covers_both_sides():
    g = RoadGraph.from_weighted_edges([(0, 0), (0, 1), (1, 1)], [(0, 1, 4.0), (1, 2, 4.0), (2, 0, 4.0)])
    (area,) = service_area(g, [0], [5.0])
    assert area.intervals(1) == [(0.0, pytest.approx(0.25)), (pytest.approx(0.75), 1.0)]


@pytest.mark.parametrize("seed", range(10))
def test_service_area_agrees_with_point_distance(seed):
    rng = seeded(200 + seed)
    g = random_connected_graph(rng, 20)
    table = all_pairs_oracle(g)
    sources = [random_attachment(rng, g) for _ in range(2)]
    thresholds = [40.0, 80.0, 120.0]
    areas = service_area(g, sources, thresholds)
    for area, t in zip(areas, thresholds):
        for _ in range(100):
            p = Attachment(edge=rng.randrange(g.n_edges), fraction=rng.random())
            d = min(oracle_attachment_distance(g, table, s, p) for s in sources)
            if abs(d - t) > 1e-7:
                assert area.contains(p.edge, p.fraction) == (d < t)


def covered_length(g, area):
    return math.fsum((f1 - f0) * g.edges[e].length_km for e, f0, f1 in area.covered)


@pytest.mark.parametrize("seed", range(5))
def test_service_area_monotone_in_threshold(seed):
    rng = seeded(300 + seed)
    g = random_connected_graph(rng, 30)
    areas = service_area(g, [0, 5], [10.0, 50.0, 100.0, 400.0])
    lengths = [covered_length(g, a) for a in areas]
    assert lengths == sorted(lengths)
    for small, big in zip(areas, areas[1:]):
        for e, f0, f1 in small.covered:
            assert big.contains(e, f0) and big.contains(e, f1)


def test_distances_scale_with_lengths():
    rng = seeded(7)
    g = random_connected_graph(rng, 25)
    scaled = RoadGraph.from_weighted_edges(g.nodes, [(e.a, e.b, 2.5 * e.length_km) for e in g.edges])
    a = shortest_paths_from(g, 3).distances_array()
    b = shortest_paths_from(scaled, 3).distances_array()
    assert np.allclose(2.5 * a, b, rtol=1e-12)


def test_service_area_rejects_bad_thresholds():
    g = line_graph(1.0)
    with pytest.raises(ValueError):
        service_area(g, [0], [2.0, 1.0])
    with pytest.raises(ValueError):
        service_area(g, [0], [0.0])


def test_oracle_cap():
    g = RoadGraph.from_weighted_edges([(0.0, float(i)) for i in range(501)], [])
    with pytest.raises(OracleCapExceeded):
        all_pairs_oracle(g)
