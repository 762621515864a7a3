"""Accessibility tables and GeoJSON map layers.

Output files are deterministic: rows and features follow a fixed order,
distances are written rounded to 1e-6 km and derived coordinates to
1e-6 degrees, and every file ends with a single LF.
"""

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

TABLE_COLUMNS = ("bucket", "towns", "towns_pct", "population", "population_pct")
DISTANCE_DECIMALS = 6
COORD_DECIMALS = 6
UNREACHABLE = "unreachable"

TABLE_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["scenario", "hub_threshold", "range_km", "effective_range_km", "rows"],
    "additionalProperties": False,
    "properties": {
        "scenario": {"type": "string"},
        "hub_threshold": {"type": "integer", "minimum": 1},
        "range_km": {"type": "number", "exclusiveMinimum": 0},
        "effective_range_km": {"type": "number", "exclusiveMinimum": 0},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(TABLE_COLUMNS),
                "additionalProperties": False,
                "properties": {
                    "bucket": {"type": "string"},
                    "towns": {"type": "integer", "minimum": 0},
                    "towns_pct": {"type": "number", "minimum": 0, "maximum": 100},
                    "population": {"type": "integer", "minimum": 0},
                    "population_pct": {"type": "number", "minimum": 0, "maximum": 100},
                },
            },
        },
    },
}


class EmptyTableError(ValueError):
    pass


class ExportError(OSError):
    pass


def percent(part, whole):
    """100 * part / whole rounded half-up to 2 decimals, using exact integers."""
    if whole <= 0:
        return 0.0
    hundredths = (20000 * part + whole) // (2 * whole)
    return hundredths / 100


def bucket_label(k):
    return "direct" if k == 0 else f"{k}-stop"


@dataclass(frozen=True)
class TableRow:
    bucket: str
    towns: int
    towns_pct: float
    population: int
    population_pct: float

    def as_dict(self):
        return {c: getattr(self, c) for c in TABLE_COLUMNS}


@dataclass(frozen=True)
class AccessibilityTable:
    scenario: str
    hub_threshold: int
    range_km: float
    effective_range_km: float
    rows: tuple

    def row(self, bucket):
        for r in self.rows:
            if r.bucket == bucket:
                return r
        raise KeyError(bucket)

    @property
    def total(self):
        return self.row("total")

    def as_dict(self):
        return {
            "scenario": self.scenario,
            "hub_threshold": self.hub_threshold,
            "range_km": self.range_km,
            "effective_range_km": self.effective_range_km,
            "rows": [r.as_dict() for r in self.rows],
        }


def build_table(buckets, totals=None, scenario="", hub_threshold=1, range_km=1.0,
                effective_range_km=None):
    """Percentages of non-hub towns and population per stop bucket.

    ``totals`` is the (towns, population) denominator pair, by default the
    bucket sums. Rows: ``direct``, ``1-stop`` ... ``<max>-stop``,
    ``overflow``, ``unreachable``, ``total``.
    """
    if totals is None:
        totals = (buckets.total_towns, buckets.total_population)
    n_towns, n_pop = totals
    if n_towns <= 0:
        raise EmptyTableError(f"scenario {scenario!r}: no non-hub towns")

    def make(name, towns, pop):
        return TableRow(name, towns, percent(towns, n_towns), pop, percent(pop, n_pop))

    rows = [make(bucket_label(k), t, p) for k, (t, p) in enumerate(zip(buckets.towns, buckets.population))]
    rows.append(make("overflow", *buckets.overflow))
    rows.append(make(UNREACHABLE, *buckets.unreachable))
    rows.append(make("total", n_towns, n_pop))
    return AccessibilityTable(
        scenario,
        int(hub_threshold),
        float(range_km),
        float(range_km if effective_range_km is None else effective_range_km),
        tuple(rows),
    )


def _write_text(path, text):
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _dump_json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _dump_geojson(fc):
    # one feature per line
    body = ",\n".join(json.dumps(f, ensure_ascii=False, separators=(",", ":")) for f in fc["features"])
    return '{"type":"FeatureCollection","features":[\n' + body + ("\n" if body else "") + "]}\n"


def table_csv(table):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for r in table.rows:
        writer.writerow([r.bucket, r.towns, f"{r.towns_pct:.2f}", r.population, f"{r.population_pct:.2f}"])
    return buf.getvalue()


def export_table(table, path, format="csv"):
    if format == "csv":
        return _write_text(path, table_csv(table))
    if format == "json":
        return _write_text(path, _dump_json(table.as_dict()))
    raise ValueError(f"unknown table format {format!r}")


def read_table(path):
    """Parse a table written by :func:`export_table`.

    CSV files carry rows only, so scenario metadata comes back empty.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        rows = tuple(TableRow(**r) for r in doc["rows"])
        return AccessibilityTable(
            doc["scenario"], doc["hub_threshold"], doc["range_km"], doc["effective_range_km"], rows
        )
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
    rows = tuple(
        TableRow(r["bucket"], int(r["towns"]), float(r["towns_pct"]), int(r["population"]),
                 float(r["population_pct"]))
        for r in reader
    )
    return AccessibilityTable("", 1, 1.0, 1.0, rows)


# -- map layers ---------------------------------------------------------------


@dataclass(frozen=True)
class GeoLayerSet:
    scenario: str
    points: dict
    hub_lines: dict
    service_areas: tuple  # ((multiple, FeatureCollection), ...)


def _lonlat(point, decimals=None):
    lat, lon = point
    if decimals is not None:
        lat, lon = round(lat, decimals), round(lon, decimals)
    return [lon, lat]


def _km(d):
    return None if d is None else round(d, DISTANCE_DECIMALS)


def _collection(features):
    return {"type": "FeatureCollection", "features": features}


def build_layers(scenario, communities, classification, assignments, areas, graph,
                 effective_range_km):
    """Assemble points, hub lines and service-area layers for one scenario.

    ``areas`` are :class:`~hubreach.routing.ServiceArea` s at successive
    multiples of ``effective_range_km``.
    """
    by_id = {c.id: c for c in communities}
    hub_ids = {h.id for h in classification.hubs}
    assigned = {a.origin_community_id: a for a in assignments}

    points, lines = [], []
    for c in sorted(communities, key=lambda c: c.id):
        props = {
            "scenario": scenario,
            "id": c.id,
            "name": c.name,
            "population": c.population,
            "hub_class": classification.classes[c.id].value,
            "role": "hub" if c.id in hub_ids else "origin",
            "nearest_hub": None,
            "nearest_hub_id": None,
            "distance_km": None,
            "stops": None,
        }
        a = assigned.get(c.id)
        if a is not None:
            if a.reachable:
                hub = by_id[a.hub_community_id]
                props.update(nearest_hub=hub.name, nearest_hub_id=hub.id,
                             distance_km=_km(a.distance_km), stops=a.stops)
                lines.append({
                    "type": "Feature",
                    "geometry": {"type": "LineString",
                                 "coordinates": [_lonlat(c.point), _lonlat(hub.point)]},
                    "properties": {"scenario": scenario, "origin_id": c.id, "origin": c.name,
                                   "hub_id": hub.id, "hub": hub.name,
                                   "distance_km": _km(a.distance_km), "stops": a.stops},
                })
            else:
                props["stops"] = UNREACHABLE
        points.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": _lonlat(c.point)},
            "properties": props,
        })

    layers = []
    for k, area in enumerate(areas, start=1):
        parts = []
        covered = 0.0
        for edge_id, f0, f1 in area.covered:
            parts.append([_lonlat(p, COORD_DECIMALS) for p in graph.sub_geometry(edge_id, f0, f1)])
            covered += (f1 - f0) * graph.edges[edge_id].length_km
        feature = {
            "type": "Feature",
            "geometry": {"type": "MultiLineString", "coordinates": parts},
            "properties": {"scenario": scenario, "multiple": k,
                           "threshold_km": _km(area.threshold_km),
                           "effective_range_km": _km(effective_range_km),
                           "covered_km": _km(covered)},
        }
        layers.append((k, _collection([feature])))
    return GeoLayerSet(scenario, _collection(points), _collection(lines), tuple(layers))


def export_geojson(layers, directory):
    """Write ``points.geojson``, ``hub_lines.geojson`` and ``service_area_<k>R.geojson``."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {directory}: {exc.strerror or exc}") from exc
    written = [
        _write_text(directory / "points.geojson", _dump_geojson(layers.points)),
        _write_text(directory / "hub_lines.geojson", _dump_geojson(layers.hub_lines)),
    ]
    for k, fc in layers.service_areas:
        written.append(_write_text(directory / f"service_area_{k}R.geojson", _dump_geojson(fc)))
    return written


def export_hub_averages(averages, communities, assignments, path):
    """Per-hub mean spoke distance as CSV (``hub_id,hub,origins,mean_distance_km``)."""
    by_id = {c.id: c for c in communities}
    counts = {}
    for a in assignments:
        if a.reachable:
            counts[a.hub_community_id] = counts.get(a.hub_community_id, 0) + 1
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["hub_id", "hub", "origins", "mean_distance_km"])
    for hub_id, mean in averages.items():
        writer.writerow([hub_id, by_id[hub_id].name, counts[hub_id], f"{mean:.{DISTANCE_DECIMALS}f}"])
    return _write_text(path, buf.getvalue())


def export_od_matrix(od, path):
    """Long-format OD matrix CSV (``origin_id,destination_id,distance_km``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["origin_id", "destination_id", "distance_km"])
    for i, o in enumerate(od.origins):
        for j, d in enumerate(od.destinations):
            value = od.get(i, j)
            writer.writerow([o, d, UNREACHABLE if value is None else f"{value:.{DISTANCE_DECIMALS}f}"])
    return _write_text(path, buf.getvalue())
