"""Hub classification, nearest-hub assignment and recharge-stop bucketing."""

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

from .ingest import DataWarning
from .routing import multi_source_labeling

logger = logging.getLogger(__name__)

# ARIA+ service-centre population bands
LARGE_HUB_POPULATION = 5000
SMALL_HUB_POPULATION = 1000


class ConfigurationError(ValueError):
    pass


class HubClass(str, enum.Enum):
    LARGE_HUB = "LargeHub"
    SMALL_HUB = "SmallHub"
    NON_HUB = "NonHub"

    @classmethod
    def of(cls, population, large=LARGE_HUB_POPULATION, small=SMALL_HUB_POPULATION):
        if population >= large:
            return cls.LARGE_HUB
        if population >= small:
            return cls.SMALL_HUB
        return cls.NON_HUB


@dataclass(frozen=True)
class VehicleSpec:
    name: str
    range_km: float
    battery_kwh: float
    onboard_ac_cap_kw: float

    def __post_init__(self):
        for attr in ("range_km", "battery_kwh", "onboard_ac_cap_kw"):
            value = getattr(self, attr)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"vehicle {self.name!r}: {attr} must be positive")


LONG_RANGE_EV = VehicleSpec("long-range", 660.0, 100.0, 11.0)
LOW_RANGE_EV = VehicleSpec("low-range", 336.0, 71.0, 11.0)


@dataclass(frozen=True)
class ScenarioConfig:
    hub_population_threshold: int
    vehicle: VehicleSpec
    derate_factor: float = 1.0
    max_stop_bucket: int = 3
    label: str = ""

    def __post_init__(self):
        if int(self.hub_population_threshold) != self.hub_population_threshold or (
            self.hub_population_threshold < 1
        ):
            raise ConfigurationError("hub_population_threshold must be an integer >= 1")
        if not 0.0 < self.derate_factor <= 1.0:
            raise ConfigurationError("derate_factor must be in (0, 1]")
        if int(self.max_stop_bucket) != self.max_stop_bucket or self.max_stop_bucket < 1:
            raise ConfigurationError("max_stop_bucket must be an integer >= 1")
        if not self.label:
            rng = f"{self.vehicle.range_km:g}km"
            derate = "" if self.derate_factor == 1.0 else f"-x{self.derate_factor:g}"
            object.__setattr__(
                self, "label", f"hub{self.hub_population_threshold}-{rng}{derate}"
            )

    @property
    def effective_range_km(self):
        return effective_range_km(self.vehicle, self.derate_factor)


@dataclass(frozen=True)
class Classification:
    hubs: tuple
    non_hubs: tuple
    classes: dict = field(repr=False)  # community id -> HubClass


@dataclass(frozen=True)
class HubAssignment:
    origin_community_id: int
    hub_community_id: int | None
    distance_km: float | None
    stops: int | None  # None means unreachable
    population: int = 0
    reason: str = ""  # why unreachable, empty otherwise

    @property
    def reachable(self):
        return self.stops is not None


def classify(communities, config):
    """Split communities into (hubs, non-hubs) at the scenario threshold.

    A community is a hub when its population is at least
    ``config.hub_population_threshold``. The per-community
    :class:`HubClass` always follows the fixed ARIA+ bands.
    """
    threshold = config.hub_population_threshold
    hubs, non_hubs = [], []
    for c in communities:
        (hubs if c.population >= threshold else non_hubs).append(c)
    classes = {c.id: HubClass.of(c.population) for c in communities}
    return Classification(tuple(hubs), tuple(non_hubs), classes)


def derate_range(range_km, derate_factor=1.0):
    if not 0.0 < derate_factor <= 1.0:
        raise ConfigurationError("derate_factor must be in (0, 1]")
    # drop sub-micrometre float noise, e.g. 660 * (336 / 660) -> 336
    return round(range_km * derate_factor, 9)


def effective_range_km(vehicle, derate_factor=1.0):
    return derate_range(vehicle.range_km, derate_factor)


def stop_count(distance_km, effective_range_km):
    """Fewest en-route recharges ``k`` with ``distance_km <= (k + 1) * range``.

    A distance that is an exact multiple ``n * range`` needs ``n - 1``
    stops.
    """
    if distance_km < 0 or not effective_range_km > 0:
        raise ValueError("need distance_km >= 0 and effective_range_km > 0")
    k = max(0, math.ceil(distance_km / effective_range_km) - 1)
    # the quotient can be off by one ulp; settle on the product test
    while distance_km > (k + 1) * effective_range_km:
        k += 1
    while k > 0 and distance_km <= k * effective_range_km:
        k -= 1
    return k


def assign_nearest_hubs(graph, communities, snaps, config, classification=None):
    """Nearest reachable hub and stop count for every non-hub community.

    ``snaps`` maps community id to a :class:`~hubreach.netgraph.SnapResult`
    (or ``None`` when the community could not be attached). Hubs without an
    attachment cannot serve as destinations and are skipped with a warning.
    Unreachable origins get ``stops=None`` and a ``reason``.

    Returns ``(assignments, labeling)``; the multi-source labeling is reused
    for service areas.
    """
    if classification is None:
        classification = classify(communities, config)
    if not classification.hubs:
        raise ConfigurationError(
            f"scenario {config.label!r}: no community reaches the hub threshold "
            f"{config.hub_population_threshold}"
        )
    sources, ids = [], []
    for hub in classification.hubs:
        snap = snaps.get(hub.id)
        if snap is None:
            warnings.warn(
                f"hub {hub.name!r} (id {hub.id}) is off the network and cannot be reached",
                DataWarning,
                stacklevel=2,
            )
            continue
        sources.append(snap)
        ids.append(hub.id)
    if not sources:
        raise ConfigurationError(f"scenario {config.label!r}: no hub attaches to the network")

    labeling = multi_source_labeling(graph, sources, ids)
    rng = config.effective_range_km
    assignments = []
    for c in classification.non_hubs:
        snap = snaps.get(c.id)
        if snap is None:
            assignments.append(HubAssignment(c.id, None, None, None, c.population, "off-network"))
            continue
        dist, hub = labeling.query(snap)
        if dist is None:
            assignments.append(HubAssignment(c.id, None, None, None, c.population, "no-path"))
            continue
        assignments.append(HubAssignment(c.id, hub, dist, stop_count(dist, rng), c.population))
    return assignments, labeling


@dataclass(frozen=True)
class StopBuckets:
    """Town counts and population sums per stop count.

    ``towns[k]`` / ``population[k]`` for ``k = 0..max_stop_bucket``, plus
    ``overflow`` (more stops than ``max_stop_bucket``) and ``unreachable``
    pairs of (towns, population).
    """

    towns: tuple
    population: tuple
    overflow: tuple = (0, 0)
    unreachable: tuple = (0, 0)

    @property
    def max_stop_bucket(self):
        return len(self.towns) - 1

    @property
    def total_towns(self):
        return sum(self.towns) + self.overflow[0] + self.unreachable[0]

    @property
    def total_population(self):
        return sum(self.population) + self.overflow[1] + self.unreachable[1]


def bucket_assignments(assignments, max_stop_bucket=3):
    towns = [0] * (max_stop_bucket + 1)
    population = [0] * (max_stop_bucket + 1)
    overflow = [0, 0]
    unreachable = [0, 0]
    for a in assignments:
        if a.stops is None:
            unreachable[0] += 1
            unreachable[1] += a.population
        elif a.stops > max_stop_bucket:
            overflow[0] += 1
            overflow[1] += a.population
        else:
            towns[a.stops] += 1
            population[a.stops] += a.population
    return StopBuckets(tuple(towns), tuple(population), tuple(overflow), tuple(unreachable))


def per_hub_average_spoke_distance(assignments):
    """Mean origin-to-hub distance per hub, keyed by hub id in ascending order."""
    spokes = {}
    for a in assignments:
        if a.reachable:
            spokes.setdefault(a.hub_community_id, []).append(a.distance_km)
    return {hub: math.fsum(d) / len(d) for hub, d in sorted(spokes.items())}
