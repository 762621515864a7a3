"""Full-charge wait times under a constant-power model.

Duration is battery capacity over the power the vehicle can actually
accept: AC charging is capped by the onboard charger, DC is not.
"""

import math
from dataclasses import dataclass

from .scenario import ConfigurationError

AC, DC = "AC", "DC"

# absorbs float noise in 60 * kWh / kW before flooring to whole minutes
_MINUTE_EPS = 1e-9


@dataclass(frozen=True)
class ChargerLevel:
    label: str
    power_kw: float
    coupling: str = AC

    def __post_init__(self):
        if self.coupling not in (AC, DC):
            raise ConfigurationError(f"charger {self.label!r}: coupling must be AC or DC")
        if not (math.isfinite(self.power_kw) and self.power_kw > 0):
            raise ConfigurationError(f"charger {self.label!r}: power_kw must be positive")
        if self.label.upper() == "L3" and self.coupling != DC:
            raise ConfigurationError("Level 3 chargers are DC")


LEVEL_1 = ChargerLevel("L1", 2.4, AC)
# effective Level 1 power that the published Level 1 wait times imply
LEVEL_1_EFFECTIVE = ChargerLevel("L1-effective", 2.3, AC)
LEVEL_2 = ChargerLevel("L2", 11.0, AC)
LEVEL_3 = ChargerLevel("L3", 50.0, DC)

DEFAULT_CHARGERS = (LEVEL_1, LEVEL_1_EFFECTIVE, LEVEL_2, LEVEL_3)


@dataclass(frozen=True)
class ChargeTimeEstimate:
    vehicle: str
    charger: str
    effective_power_kw: float
    duration_minutes: int

    @property
    def formatted(self):
        return format_duration(self.duration_minutes)


def effective_power_kw(charger, vehicle):
    if charger.coupling == AC:
        return min(charger.power_kw, vehicle.onboard_ac_cap_kw)
    return charger.power_kw


def full_charge_time(vehicle, charger, rounding="floor"):
    """Minutes to charge from 0% to 100%.

    ``rounding`` is ``"floor"`` (whole elapsed minutes, the default) or
    ``"half_up"``.
    """
    if not vehicle.battery_kwh > 0:
        raise ConfigurationError(f"vehicle {vehicle.name!r}: battery_kwh must be positive")
    power = effective_power_kw(charger, vehicle)
    if not power > 0:
        raise ConfigurationError(f"charger {charger.label!r}: no usable power")
    minutes = 60.0 * vehicle.battery_kwh / power
    if rounding == "floor":
        whole = math.floor(minutes + _MINUTE_EPS)
    elif rounding == "half_up":
        whole = math.floor(minutes + 0.5 + _MINUTE_EPS)
    else:
        raise ValueError(f"unknown rounding {rounding!r}")
    return ChargeTimeEstimate(vehicle.name, charger.label, power, int(whole))


def format_duration(minutes, short=False):
    """``"6h 27m"``; with ``short=True`` whole hours render as ``"2h"``."""
    if minutes < 0:
        raise ValueError("minutes must be >= 0")
    hours, rest = divmod(int(minutes), 60)
    if short and rest == 0:
        return f"{hours}h"
    return f"{hours}h {rest}m"
