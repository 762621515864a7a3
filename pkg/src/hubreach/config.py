"""Run configuration read from a TOML document.

See the README for the full grammar. Paths are resolved relative to the
directory holding the config file.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .charging import DEFAULT_CHARGERS, ChargerLevel
from .ingest import StudyRegion
from .netgraph import DEFAULT_MAX_SNAP_KM, DEFAULT_MERGE_TOLERANCE_M
from .routing import DEFAULT_ORACLE_CAP
from .scenario import LONG_RANGE_EV, LOW_RANGE_EV, ScenarioConfig, VehicleSpec

_LABEL_RE = re.compile(r"^[A-Za-z0-9._-]+$")
TABLE_FORMATS = ("csv", "json")


class ConfigFileError(Exception):
    """The config file is unreadable or does not follow the schema."""


@dataclass(frozen=True)
class RunConfig:
    path: Path
    communities: Path
    roads: Path
    output_dir: Path
    region: StudyRegion | None
    scenarios: tuple
    vehicles: dict
    chargers: tuple
    merge_tolerance_m: float = DEFAULT_MERGE_TOLERANCE_M
    max_snap_km: float = DEFAULT_MAX_SNAP_KM
    oracle_cap: int = DEFAULT_ORACLE_CAP
    workers: int = 0
    strict: bool = True
    table_formats: tuple = TABLE_FORMATS
    od_matrix: bool = False
    charge_rounding: str = "floor"
    raw: dict = field(default_factory=dict, repr=False)


def _section(doc, name):
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigFileError(f"[{name}] must be a table")
    return value


def _number(table, key, default, where, kind=float, minimum=None):
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigFileError(f"{where}.{key} must be a number")
    if kind is int and int(value) != value:
        raise ConfigFileError(f"{where}.{key} must be an integer")
    value = kind(value)
    if minimum is not None and value < minimum:
        raise ConfigFileError(f"{where}.{key} must be >= {minimum}")
    return value


def _vehicle(entry, i):
    if not isinstance(entry, dict) or "name" not in entry:
        raise ConfigFileError(f"vehicles[{i}] needs a name")
    extra = set(entry) - {"name", "range_km", "battery_kwh", "onboard_ac_cap_kw"}
    if extra:
        raise ConfigFileError(f"vehicles[{i}]: unknown keys {sorted(extra)}")
    where = f"vehicles[{i}]"
    return VehicleSpec(
        str(entry["name"]),
        _number(entry, "range_km", None, where),
        _number(entry, "battery_kwh", None, where),
        _number(entry, "onboard_ac_cap_kw", None, where),
    )


def _charger(entry, i):
    if not isinstance(entry, dict) or "label" not in entry:
        raise ConfigFileError(f"chargers[{i}] needs a label")
    return ChargerLevel(
        str(entry["label"]),
        _number(entry, "power_kw", None, f"chargers[{i}]"),
        str(entry.get("coupling", "AC")).upper(),
    )


def _scenario(entry, vehicles, where):
    extra = set(entry) - {"label", "hub_population_threshold", "vehicle", "derate_factor",
                          "max_stop_bucket"}
    if extra:
        raise ConfigFileError(f"{where}: unknown keys {sorted(extra)}")
    name = entry.get("vehicle")
    if name not in vehicles:
        raise ConfigFileError(f"{where}: unknown vehicle {name!r}")
    label = str(entry.get("label", ""))
    if label and not _LABEL_RE.match(label):
        raise ConfigFileError(f"{where}: label {label!r} may only use letters, digits, '.', '_', '-'")
    return ScenarioConfig(
        _number(entry, "hub_population_threshold", None, where, int, 1),
        vehicles[name],
        _number(entry, "derate_factor", 1.0, where),
        _number(entry, "max_stop_bucket", 3, where, int, 1),
        label,
    )


def parse_config(doc, path=Path("config.toml")):
    """Build a :class:`RunConfig` from an already-parsed TOML mapping."""
    path = Path(path)
    base = path.parent
    unknown = set(doc) - {"paths", "region", "network", "run", "vehicles", "chargers",
                          "scenarios", "grid"}
    if unknown:
        raise ConfigFileError(f"unknown sections {sorted(unknown)}")
    try:
        paths = _section(doc, "paths")
        for key in ("communities", "roads"):
            if not isinstance(paths.get(key), str):
                raise ConfigFileError(f"paths.{key} is required")
        region_doc = _section(doc, "region")
        region = None
        if "min_latitude" in region_doc:
            region = StudyRegion(_number(region_doc, "min_latitude", None, "region"))
        network = _section(doc, "network")
        run = _section(doc, "run")

        vehicles = {v.name: v for v in (LONG_RANGE_EV, LOW_RANGE_EV)}
        entries = doc.get("vehicles", [])
        if not isinstance(entries, list):
            raise ConfigFileError("vehicles must be an array of tables ([[vehicles]])")
        for i, entry in enumerate(entries):
            v = _vehicle(entry, i)
            vehicles[v.name] = v

        entries = doc.get("chargers")
        if entries is None:
            chargers = DEFAULT_CHARGERS
        elif not isinstance(entries, list) or not entries:
            raise ConfigFileError("chargers must be a non-empty array of tables")
        else:
            chargers = tuple(_charger(e, i) for i, e in enumerate(entries))

        scenarios = []
        for i, entry in enumerate(doc.get("scenarios", [])):
            if not isinstance(entry, dict):
                raise ConfigFileError(f"scenarios[{i}] must be a table")
            scenarios.append(_scenario(entry, vehicles, f"scenarios[{i}]"))
        grid = _section(doc, "grid")
        if grid:
            thresholds = grid.get("thresholds", [])
            names = grid.get("vehicles", [])
            if not (isinstance(thresholds, list) and isinstance(names, list)):
                raise ConfigFileError("grid.thresholds and grid.vehicles must be arrays")
            for t in thresholds:
                for name in names:
                    entry = {"hub_population_threshold": t, "vehicle": name}
                    for key in ("derate_factor", "max_stop_bucket"):
                        if key in grid:
                            entry[key] = grid[key]
                    scenarios.append(_scenario(entry, vehicles, "grid"))
        if not scenarios:
            raise ConfigFileError("at least one scenario is required")
        labels = [s.label for s in scenarios]
        if len(set(labels)) != len(labels):
            raise ConfigFileError(f"scenario labels must be unique: {labels}")

        formats = run.get("table_formats", list(TABLE_FORMATS))
        if not isinstance(formats, list) or not formats or set(formats) - set(TABLE_FORMATS):
            raise ConfigFileError(f"run.table_formats must be a subset of {list(TABLE_FORMATS)}")
        rounding = run.get("charge_rounding", "floor")
        if rounding not in ("floor", "half_up"):
            raise ConfigFileError("run.charge_rounding must be 'floor' or 'half_up'")

        return RunConfig(
            path=path,
            communities=base / paths["communities"],
            roads=base / paths["roads"],
            output_dir=base / str(paths.get("output", "out")),
            region=region,
            scenarios=tuple(scenarios),
            vehicles=vehicles,
            chargers=chargers,
            merge_tolerance_m=_number(network, "merge_tolerance_m", DEFAULT_MERGE_TOLERANCE_M,
                                      "network", minimum=0.0),
            max_snap_km=_number(network, "max_snap_km", DEFAULT_MAX_SNAP_KM, "network",
                                minimum=0.0),
            oracle_cap=_number(run, "oracle_cap", DEFAULT_ORACLE_CAP, "run", int, 1),
            workers=_number(run, "workers", 0, "run", int, 0),
            strict=bool(run.get("strict", True)),
            table_formats=tuple(f for f in TABLE_FORMATS if f in formats),
            od_matrix=bool(run.get("od_matrix", False)),
            charge_rounding=rounding,
            raw=doc,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigFileError(str(exc)) from exc


def load_config(path):
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomli.load(fh)
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigFileError(f"{path}: {exc}") from exc
    return parse_config(doc, path)
