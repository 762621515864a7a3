"""End-to-end orchestration behind the ``validate`` and ``analyze`` commands."""

import hashlib
import json
import logging
import math
import os
import shutil
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .ingest import filter_study_region, load_communities, load_roads
from .netgraph import build_graph, connected_components, snap_point, unnoded_crossings
from .report import (
    build_layers,
    build_table,
    export_geojson,
    export_hub_averages,
    export_od_matrix,
    export_table,
)
from .routing import od_matrix, resolve_workers, service_area
from .scenario import (
    assign_nearest_hubs,
    bucket_assignments,
    classify,
    per_hub_average_spoke_distance,
)

logger = logging.getLogger(__name__)


class InputFileMissing(FileNotFoundError):
    pass


@dataclass
class PreparedInputs:
    communities: list
    excluded: list
    graph: object
    snaps: dict  # community id -> SnapResult | None
    row_errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


@dataclass
class ScenarioResult:
    scenario: object
    classification: object
    assignments: list
    labeling: object
    buckets: object
    table: object
    layers: object
    averages: dict
    od: object = None


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _check_inputs(config):
    for path in (config.communities, config.roads):
        if not Path(path).is_file():
            raise InputFileMissing(f"input file not found: {path}")


def _record(caught, sink):
    for w in caught:
        msg = str(w.message)
        logger.warning(msg)
        sink.append(msg)


def prepare(config, strict=None):
    """Load inputs, build the graph and snap every study-region community."""
    _check_inputs(config)
    strict = config.strict if strict is None else strict
    prepared_warnings, row_errors = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        communities = load_communities(config.communities, strict=strict, errors=row_errors)
        roads = load_roads(config.roads)
        graph = build_graph(roads, config.merge_tolerance_m)
    _record(caught, prepared_warnings)
    excluded = []
    if config.region is not None:
        communities, excluded = filter_study_region(communities, config.region)
        if excluded:
            logger.info("%d communities south of %.4f excluded", len(excluded),
                        config.region.min_latitude)
    snaps = {}
    for c in communities:
        snaps[c.id] = snap_point(graph, c.point, config.max_snap_km, community_id=c.id)
        if snaps[c.id] is None:
            msg = f"community {c.name!r} (id {c.id}) has no road within {config.max_snap_km:g} km"
            logger.warning(msg)
            prepared_warnings.append(msg)
    return PreparedInputs(communities, excluded, graph, snaps, row_errors, prepared_warnings)


def run_scenario(prepared, scenario, workers=1, with_od=False):
    classification = classify(prepared.communities, scenario)
    assignments, labeling = assign_nearest_hubs(
        prepared.graph, prepared.communities, prepared.snaps, scenario, classification
    )
    buckets = bucket_assignments(assignments, scenario.max_stop_bucket)
    rng = scenario.effective_range_km
    table = build_table(buckets, None, scenario.label, scenario.hub_population_threshold,
                        scenario.vehicle.range_km, rng)
    thresholds = [k * rng for k in range(1, scenario.max_stop_bucket + 2)]
    areas = service_area(prepared.graph, labeling.sources, thresholds, labeling=labeling)
    layers = build_layers(scenario.label, prepared.communities, classification, assignments,
                          areas, prepared.graph, rng)
    averages = per_hub_average_spoke_distance(assignments)

    od = None
    if with_od:
        origins = [c for c in classification.non_hubs if prepared.snaps.get(c.id) is not None]
        hubs = [h for h in classification.hubs if prepared.snaps.get(h.id) is not None]
        if origins and hubs:
            od = od_matrix(prepared.graph, [prepared.snaps[c.id] for c in origins],
                           [prepared.snaps[h.id] for h in hubs], workers,
                           [c.id for c in origins], [h.id for h in hubs])
            _cross_check(od, assignments)
    return ScenarioResult(scenario, classification, assignments, labeling, buckets, table,
                          layers, averages, od)


def _cross_check(od, assignments):
    """The one-pass nearest-hub distances must equal the OD row minima."""
    by_origin = {a.origin_community_id: a for a in assignments}
    for i, origin in enumerate(od.origins):
        j = od.nearest(i)
        a = by_origin[origin]
        expected = None if j is None else od.get(i, j)
        if (expected is None) != (a.distance_km is None) or (
            expected is not None and not math.isclose(expected, a.distance_km, rel_tol=1e-12)
        ):
            raise RuntimeError(f"nearest-hub mismatch for origin {origin}: {a.distance_km} vs {expected}")


def write_scenario(result, directory, formats=("csv", "json")):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [export_table(result.table, directory / f"table.{fmt}", fmt) for fmt in formats]
    written += export_geojson(result.layers, directory)
    written.append(export_hub_averages(result.averages, result.classification.hubs,
                                       result.assignments, directory / "hub_averages.csv"))
    if result.od is not None:
        written.append(export_od_matrix(result.od, directory / "od_matrix.csv"))
    return written


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def analyze(config, out_dir=None, workers=None):
    """Run every scenario and write outputs plus ``manifest.json``.

    Outputs are staged in a sibling temporary directory and moved into
    ``out_dir`` only when all scenarios succeed; a failure leaves no partial
    scenario output behind.
    """
    started = time.perf_counter()
    out_dir = Path(out_dir if out_dir is not None else config.output_dir)
    workers = resolve_workers(config.workers if workers is None else workers)
    timing = {}

    t0 = time.perf_counter()
    prepared = prepare(config)
    timing["prepare_s"] = time.perf_counter() - t0

    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}-", dir=out_dir.parent))
    scenario_outputs = {}
    run_warnings = list(prepared.warnings)
    try:
        for scenario in config.scenarios:
            t0 = time.perf_counter()
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                result = run_scenario(prepared, scenario, workers, config.od_matrix)
            _record(caught, run_warnings)
            files = write_scenario(result, staging / scenario.label, config.table_formats)
            timing[f"{scenario.label}_s"] = time.perf_counter() - t0
            total = result.table.total
            scenario_outputs[scenario.label] = {
                "hub_population_threshold": scenario.hub_population_threshold,
                "vehicle": scenario.vehicle.name,
                "effective_range_km": scenario.effective_range_km,
                "hubs": len(result.classification.hubs),
                "non_hub_towns": total.towns,
                "non_hub_population": total.population,
                "outputs": [str(Path(scenario.label) / Path(f).name) for f in files],
            }
            logger.info("scenario %s: %d hubs, %d origins", scenario.label,
                        len(result.classification.hubs), total.towns)

        out_dir.mkdir(parents=True, exist_ok=True)
        for item in sorted(staging.iterdir()):
            target = out_dir / item.name
            if target.is_dir():
                shutil.rmtree(target)
            elif target.exists():
                target.unlink()
            os.replace(item, target)
    finally:
        shutil.rmtree(staging, ignore_errors=True)

    timing["total_s"] = time.perf_counter() - started
    manifest = {
        "tool": "hubreach",
        "version": __version__,
        "inputs": {
            "config": {"path": str(config.path), "sha256": file_digest(config.path)}
            if Path(config.path).is_file() else None,
            "communities": {"path": str(config.communities),
                            "sha256": file_digest(config.communities)},
            "roads": {"path": str(config.roads), "sha256": file_digest(config.roads)},
        },
        "config": _jsonable(config.raw),
        "workers": workers,
        "communities": {"in_region": len(prepared.communities),
                        "excluded_by_region": len(prepared.excluded),
                        "unsnapped": sum(s is None for s in prepared.snaps.values()),
                        "row_errors": [str(e) for e in prepared.row_errors]},
        "graph": {"nodes": prepared.graph.n_nodes, "edges": prepared.graph.n_edges},
        "scenarios": scenario_outputs,
        "warnings": run_warnings,
        "timing": timing,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


@dataclass
class Diagnostics:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.errors


def validate(config):
    """Check inputs without writing anything; collect errors and warnings."""
    diag = Diagnostics()
    missing = [p for p in (config.communities, config.roads) if not Path(p).is_file()]
    for p in missing:
        diag.errors.append(f"input file not found: {p}")
    if missing:
        return diag
    try:
        prepared = prepare(config, strict=False)
    except Exception as exc:  # any load failure is a diagnostic, not a crash
        diag.errors.append(str(exc))
        return diag
    diag.errors.extend(f"{config.communities}: {e}" for e in prepared.row_errors)
    diag.warnings.extend(prepared.warnings)

    graph = prepared.graph
    labels = connected_components(graph)
    n_components = len(set(labels))
    if n_components > 1:
        diag.warnings.append(f"road graph has {n_components} connected components")
    for i, j in unnoded_crossings(graph):
        ei, ej = graph.edges[i], graph.edges[j]
        diag.warnings.append(
            f"roads {ei.source_id or i} and {ej.source_id or j} touch or cross without a shared node"
        )

    def component(snap):
        att = snap.attachment
        return labels[att.node if att.node is not None else graph.edges[att.edge].a]

    for scenario in config.scenarios:
        cls = classify(prepared.communities, scenario)
        if not cls.hubs:
            diag.errors.append(f"scenario {scenario.label}: no hubs at threshold "
                               f"{scenario.hub_population_threshold}")
            continue
        hub_components = {component(prepared.snaps[h.id]) for h in cls.hubs
                          if prepared.snaps.get(h.id) is not None}
        if not hub_components:
            diag.errors.append(f"scenario {scenario.label}: no hub attaches to the road network")
            continue
        for c in cls.non_hubs:
            snap = prepared.snaps.get(c.id)
            if snap is not None and component(snap) not in hub_components:
                diag.warnings.append(
                    f"scenario {scenario.label}: {c.name!r} has no road connection to any hub"
                )
    return diag
