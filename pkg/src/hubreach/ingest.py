"""Loading of community points and road polylines.

Communities come from a pre-merged CSV with the header
``name,latitude,longitude,population``; roads come from a GeoJSON
FeatureCollection of LineString / MultiLineString features in WGS84.
"""

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

COMMUNITY_COLUMNS = ("name", "latitude", "longitude", "population")

# 1e-6 degrees, roughly 0.11 m on the ground
COORD_QUANTUM = 1e-6


class DataWarning(UserWarning):
    """Recoverable problem in an input file (skipped feature, duplicate row...)."""


class LoadError(Exception):
    """The input file as a whole could not be read."""


class RowError(ValueError):
    """A single invalid row in a communities file."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass(frozen=True)
class CommunityRecord:
    id: int
    name: str
    latitude: float
    longitude: float
    population: int

    @property
    def point(self):
        return (self.latitude, self.longitude)


@dataclass(frozen=True)
class RoadFeature:
    geometry: tuple  # ((lat, lon), ...), at least two vertices
    source_id: str | None = None


@dataclass(frozen=True)
class StudyRegion:
    min_latitude: float

    def __post_init__(self):
        if not -90.0 <= self.min_latitude <= 90.0:
            raise ValueError(f"min_latitude out of range: {self.min_latitude}")


def quantize(lat, lon):
    """Integer grid key used for coordinate identity."""
    return (round(lat / COORD_QUANTUM), round(lon / COORD_QUANTUM))


def _parse_row(row, line):
    name = (row.get("name") or "").strip()
    if not name:
        raise RowError(line, "missing name")
    coords = []
    for key, bound in (("latitude", 90.0), ("longitude", 180.0)):
        raw = (row.get(key) or "").strip()
        try:
            value = float(raw)
        except ValueError:
            raise RowError(line, f"non-numeric {key} {raw!r}") from None
        if not math.isfinite(value) or abs(value) > bound:
            raise RowError(line, f"{key} out of range: {raw}")
        coords.append(value)
    raw = (row.get("population") or "").strip()
    try:
        population = int(raw)
    except ValueError:
        try:
            as_float = float(raw)
        except ValueError:
            raise RowError(line, f"non-numeric population {raw!r}") from None
        if not as_float.is_integer():
            raise RowError(line, f"non-integer population {raw!r}")
        population = int(as_float)
    if population < 0:
        raise RowError(line, "negative population")
    return name, coords[0], coords[1], population


def load_communities(path, strict=True, errors=None):
    """Read a communities CSV into a list of :class:`CommunityRecord`.

    In strict mode the first bad row raises :class:`RowError`. In lenient
    mode bad rows are skipped; each error is logged and, when ``errors`` is a
    list, appended to it. Exact duplicate ``(name, latitude, longitude)``
    rows are collapsed with a :class:`DataWarning`. Ids are assigned
    sequentially in file order after collapsing.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None or {h.strip() for h in header} != set(COMMUNITY_COLUMNS):
                raise LoadError(
                    f"{path}: expected header {','.join(COMMUNITY_COLUMNS)}, got {header}"
                )
            reader.fieldnames = [h.strip() for h in header]
            rows = [(reader.line_num, row) for row in reader]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise LoadError(f"{path}: {exc}") from exc

    records = []
    seen = set()
    for line, row in rows:
        if None in row or any(v is None for v in row.values()):
            err = RowError(line, "wrong number of fields")
        else:
            try:
                name, lat, lon, pop = _parse_row(row, line)
                err = None
            except RowError as exc:
                err = exc
        if err is not None:
            if strict:
                raise err
            logger.warning("%s: %s", path, err)
            if errors is not None:
                errors.append(err)
            continue
        key = (name, lat, lon)
        if key in seen:
            warnings.warn(
                f"{path} line {line}: duplicate community {name!r} collapsed",
                DataWarning,
                stacklevel=2,
            )
            continue
        seen.add(key)
        records.append(CommunityRecord(len(records), name, lat, lon, pop))
    return records


def write_communities(records, path):
    """Write records back to the communities CSV layout (floats via repr)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMMUNITY_COLUMNS)
        for r in records:
            writer.writerow([r.name, repr(r.latitude), repr(r.longitude), r.population])


def _line_part(coords, where):
    vertices = []
    last_key = None
    for pos in coords:
        if not isinstance(pos, (list, tuple)) or len(pos) < 2:
            raise LoadError(f"{where}: bad coordinate {pos!r}")
        lon, lat = float(pos[0]), float(pos[1])
        if not (abs(lat) <= 90.0 and abs(lon) <= 180.0):
            raise LoadError(f"{where}: coordinate out of range {pos!r}")
        key = quantize(lat, lon)
        if key == last_key:
            continue
        last_key = key
        vertices.append((lat, lon))
    return tuple(vertices)


def load_roads(path):
    """Read road polylines from a GeoJSON FeatureCollection.

    MultiLineStrings are split into one :class:`RoadFeature` per part.
    Non-line features and parts with fewer than two distinct vertices are
    skipped with a :class:`DataWarning`.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LoadError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise LoadError(f"{path}: not a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise LoadError(f"{path}: 'features' must be a list")

    roads = []
    for i, feat in enumerate(features):
        where = f"{path} feature {i}"
        geom = feat.get("geometry") if isinstance(feat, dict) else None
        if not isinstance(geom, dict):
            warnings.warn(f"{where}: no geometry, skipped", DataWarning, stacklevel=2)
            continue
        fid = feat.get("id")
        if fid is None:
            fid = (feat.get("properties") or {}).get("id")
        source_id = None if fid is None else str(fid)
        kind = geom.get("type")
        if kind == "LineString":
            parts = [geom.get("coordinates") or []]
        elif kind == "MultiLineString":
            parts = geom.get("coordinates") or []
        else:
            warnings.warn(f"{where}: {kind} geometry skipped", DataWarning, stacklevel=2)
            continue
        for j, part in enumerate(parts):
            vertices = _line_part(part, where)
            if len(vertices) < 2:
                warnings.warn(
                    f"{where} part {j}: fewer than 2 distinct vertices, skipped",
                    DataWarning,
                    stacklevel=2,
                )
                continue
            roads.append(RoadFeature(vertices, source_id))
    return roads


def filter_study_region(communities, region):
    """Split communities into (kept, excluded); kept have latitude >= min_latitude."""
    kept, excluded = [], []
    for c in communities:
        (kept if c.latitude >= region.min_latitude else excluded).append(c)
    return kept, excluded

