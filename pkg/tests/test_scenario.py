import math

import pytest
from hypothesis import given, strategies as st

from helpers import brute_stop_count, random_attachment, random_connected_graph, seeded
from hubreach.ingest import CommunityRecord, DataWarning
from hubreach.netgraph import Attachment, RoadGraph, SnapResult
from hubreach.routing import all_pairs_oracle, oracle_attachment_distance
from hubreach.scenario import (
    LONG_RANGE_EV,
    LOW_RANGE_EV,
    ConfigurationError,
    HubAssignment,
    HubClass,
    ScenarioConfig,
    VehicleSpec,
    assign_nearest_hubs,
    bucket_assignments,
    classify,
    derate_range,
    per_hub_average_spoke_distance,
    stop_count,
)


def town(i, pop):
    return CommunityRecord(i, f"t{i}", 0.0, float(i), pop)


def test_classify_boundary_is_inclusive():
    cfg = ScenarioConfig(1000, LOW_RANGE_EV)
    cls = classify([town(0, 999), town(1, 1000), town(2, 1001)], cfg)
    assert [c.id for c in cls.hubs] == [1, 2]
    assert [c.id for c in cls.non_hubs] == [0]


@pytest.mark.parametrize("threshold", [1000, 5000])
def test_classify_matches_brute_force(threshold):
    towns = [town(p, p) for p in range(0, 6001)]
    cls = classify(towns, ScenarioConfig(threshold, LOW_RANGE_EV))
    assert len(cls.hubs) + len(cls.non_hubs) == len(towns)
    assert all(c.population >= threshold for c in cls.hubs)
    assert all(c.population < threshold for c in cls.non_hubs)


@pytest.mark.parametrize("pop, cls", [(4999, HubClass.SMALL_HUB), (5000, HubClass.LARGE_HUB),
                                      (999, HubClass.NON_HUB), (1000, HubClass.SMALL_HUB)])
def test_hub_class_bands(pop, cls):
    assert HubClass.of(pop) is cls


@pytest.mark.parametrize("rng, f, expected", [(660, 1.0, 660), (660, 0.5, 330), (660, 336 / 660, 336)])
def test_effective_range(rng, f, expected):
    assert derate_range(rng, f) == expected


@pytest.mark.parametrize("f", [0.0, -0.1, 1.01])
def test_derate_out_of_range(f):
    with pytest.raises(ConfigurationError):
        derate_range(660, f)


@pytest.mark.parametrize("d, R, k", [
    (0, 336, 0), (335.9, 336, 0), (336, 336, 0), (336.0001, 336, 1),
    (672, 336, 1), (700, 336, 2), (1000, 336, 2), (1008, 336, 2), (1009, 336, 3),
])
def test_stop_count_examples(d, R, k):
    assert stop_count(d, R) == k


@given(st.floats(0, 1e5, allow_nan=False), st.floats(1, 1000))
def test_stop_count_matches_brute_force(d, R):
    assert stop_count(d, R) == brute_stop_count(d, R)


@given(st.integers(1, 50), st.floats(1, 1000))
def test_exact_multiple_needs_one_fewer_stop(n, R):
    assert stop_count(n * R, R) == n - 1


def test_vehicle_must_have_positive_fields():
    with pytest.raises(ConfigurationError):
        VehicleSpec("x", 0, 10, 11)


def test_default_label():
    assert ScenarioConfig(5000, LONG_RANGE_EV).label == "hub5000-660km"
    assert ScenarioConfig(1000, LONG_RANGE_EV, 0.5).label == "hub1000-660km-x0.5"


def line_world():
    # five towns on a 100 km-per-edge path
    g = RoadGraph.from_weighted_edges([(0.0, float(i)) for i in range(5)],
                                      [(i, i + 1, 100.0) for i in range(4)])
    pops = [6000, 10, 20, 30, 7000]
    towns = [town(i, p) for i, p in enumerate(pops)]
    snaps = {i: SnapResult(i, Attachment(node=i), 0.0, g.nodes[i])
             for i in range(5)}
    return g, towns, snaps


def test_assign_nearest_hub_on_path():
    g, towns, snaps = line_world()
    cfg = ScenarioConfig(5000, VehicleSpec("v", 150, 50, 11))
    got, _ = assign_nearest_hubs(g, towns, snaps, cfg)
    assert [(a.origin_community_id, a.hub_community_id, a.distance_km, a.stops) for a in got] == [
        (1, 0, 100.0, 0), (2, 0, 200.0, 1), (3, 4, 100.0, 0),
    ]


def test_assign_marks_unreachable():
    g, towns, snaps = line_world()
    snaps[2] = None
    cfg = ScenarioConfig(5000, LOW_RANGE_EV)
    with_towns = towns + [town(5, 5)]
    g2 = RoadGraph.from_weighted_edges(g.nodes + ((1.0, 1.0),), [(e.a, e.b, e.length_km) for e in g.edges])
    snaps[5] = SnapResult(5, Attachment(node=5), 0.0, (1.0, 1.0))
    got, _ = assign_nearest_hubs(g2, with_towns, snaps, cfg)
    by = {a.origin_community_id: a for a in got}
    assert by[2].reason == "off-network" and not by[2].reachable
    assert by[5].reason == "no-path" and by[5].distance_km is None


def test_assign_without_hubs_is_configuration_error():
    g, towns, snaps = line_world()
    with pytest.raises(ConfigurationError):
        assign_nearest_hubs(g, towns, snaps, ScenarioConfig(10**6, LOW_RANGE_EV))


def test_unsnapped_hub_warns():
    g, towns, snaps = line_world()
    snaps[0] = None
    with pytest.warns(DataWarning):
        got, _ = assign_nearest_hubs(g, towns, snaps, ScenarioConfig(5000, LOW_RANGE_EV))
    assert {a.hub_community_id for a in got} == {4}


@pytest.mark.parametrize("seed", range(10))
def test_assignment_matches_od_oracle(seed):
    rng = seeded(400 + seed)
    g = random_connected_graph(rng, 40)
    table = all_pairs_oracle(g)
    towns, snaps = [], {}
    for i in range(15):
        att = random_attachment(rng, g)
        towns.append(town(i, 6000 if i % 5 == 0 else rng.randint(0, 4999)))
        snaps[i] = SnapResult(i, att, 0.0, (0.0, 0.0))
    cfg = ScenarioConfig(5000, VehicleSpec("v", 60, 50, 11))
    got, _ = assign_nearest_hubs(g, towns, snaps, cfg)
    hubs = [t.id for t in towns if t.population >= 5000]
    for a in got:
        dists = [oracle_attachment_distance(g, table, snaps[a.origin_community_id].attachment,
                                            snaps[h].attachment) for h in hubs]
        best = min(dists)
        assert a.distance_km == pytest.approx(best, rel=1e-9, abs=1e-9)
        assert a.stops == brute_stop_count(a.distance_km, 60)


def assignment(i, stops, pop, hub=0, d=1.0):
    return HubAssignment(i, None if stops is None else hub, None if stops is None else d, stops, pop)


def test_buckets():
    b = bucket_assignments([assignment(0, 0, 10), assignment(1, 0, 5), assignment(2, 3, 7),
                            assignment(3, 4, 1), assignment(4, None, 2)], max_stop_bucket=3)
    assert b.towns == (2, 0, 0, 1) and b.population == (15, 0, 0, 7)
    assert b.overflow == (1, 1) and b.unreachable == (1, 2)
    assert (b.total_towns, b.total_population) == (5, 25)


def test_average_spoke_distance():
    got = per_hub_average_spoke_distance([
        assignment(0, 0, 1, hub=7, d=10.0), assignment(1, 0, 1, hub=3, d=4.0),
        assignment(2, 1, 1, hub=7, d=20.0), assignment(3, None, 1),
    ])
    assert list(got) == [3, 7]
    assert got[7] == 15.0 and got[3] == 4.0
    assert math.isclose(got[7], (10.0 + 20.0) / 2)
