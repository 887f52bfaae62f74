"""Domain types, coordinate frame and scenario geometry.

Frame convention: the conflict point is the origin of both axes. The
vehicle drives along x in +x direction (spawn at x0 = -speed * tta), the
pedestrian crosses along the line x = 0 in +y direction, starting below
the road at y = -ped_start_lateral and finishing at +ped_start_lateral.
The kerbs sit at y = ±road_half_width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ValidationError

# Footprints (paper never states them; see notes)
VEHICLE_LENGTH = 4.5   # m
VEHICLE_WIDTH = 2.0    # m
PED_RADIUS = 0.3       # m

# Simulation defaults
DEFAULT_SPEED = 8.333      # m/s, 30 km/h
DEFAULT_DT = 0.02          # s (50 Hz)
DEFAULT_MAX_SIM_TIME = 60.0  # s
DEFAULT_FINISH_LINE = 30.0   # m past the conflict point

PEDESTRIAN_MODELS = ("scripted", "human_like", "jaywalker")
CONTROLLERS = ("cruise_brake", "foresight_yield", "constant")

TTA_RANGE = (6.0, 18.0)          # s
BRAKING_DISTANCE_RANGE = (4.0, 25.0)  # m


@dataclass(frozen=True)
class ScenarioConfig:
    """Single source of truth for one trial."""

    vehicle_speed: float = DEFAULT_SPEED  # m/s
    tta: float = 10.0                     # s, vehicle spawn time-to-arrival
    road_half_width: float = 2.0          # m, kerb offset from lane centreline
    ped_start_lateral: float = 4.0        # m, pedestrian spawn offset
    vehicle_length: float = VEHICLE_LENGTH
    vehicle_width: float = VEHICLE_WIDTH
    ped_radius: float = PED_RADIUS
    dt: float = DEFAULT_DT                # s
    max_sim_time: float = DEFAULT_MAX_SIM_TIME  # s
    finish_line: float = DEFAULT_FINISH_LINE    # m
    seed: int = 0
    pedestrian_model: str = "human_like"
    controller: str = "cruise_brake"
    controller_params: dict = field(default_factory=dict)
    free_flow: bool = False               # run without the pedestrian
    # Optional explicit parameter sets; sampled from `seed` when absent.
    individual: "IndividualParams | None" = None   # noqa: F821 (pedestrians)
    jaywalker: "JaywalkerParams | None" = None     # noqa: F821

    def __post_init__(self) -> None:
        if not self.vehicle_speed > 0:
            raise ValidationError("vehicle_speed must be > 0")
        if not TTA_RANGE[0] <= self.tta <= TTA_RANGE[1]:
            raise ValidationError(f"tta must lie in [{TTA_RANGE[0]}, {TTA_RANGE[1]}] s")
        if not 0 < self.dt <= 0.1:
            raise ValidationError("dt must lie in (0, 0.1] s")
        if not self.vehicle_length > 0:
            raise ValidationError("vehicle_length must be > 0")
        if not self.road_half_width >= 1.0:
            raise ValidationError("road_half_width must be >= 1.0 m")
        if not self.ped_start_lateral > self.road_half_width:
            raise ValidationError("pedestrian must start off the road "
                                  "(ped_start_lateral > road_half_width)")
        if self.pedestrian_model not in PEDESTRIAN_MODELS:
            raise ValidationError(f"unknown pedestrian_model {self.pedestrian_model!r}")
        if self.controller not in CONTROLLERS:
            raise ValidationError(f"unknown controller {self.controller!r}")
        bd = self.controller_params.get("braking_distance")
        if bd is not None and not (BRAKING_DISTANCE_RANGE[0] <= bd <= BRAKING_DISTANCE_RANGE[1]):
            raise ValidationError(
                f"braking_distance must lie in [{BRAKING_DISTANCE_RANGE[0]}, "
                f"{BRAKING_DISTANCE_RANGE[1]}] m")
        if not self.max_sim_time > 0:
            raise ValidationError("max_sim_time must be > 0")
        if int(self.seed) != self.seed:
            raise ValidationError("seed must be an integer")

    @property
    def spawn_x(self) -> float:
        """Vehicle spawn position; |x0| / speed == tta exactly."""
        return -self.vehicle_speed * self.tta

    def with_(self, **changes) -> "ScenarioConfig":
        """Copy with replaced fields (re-validates)."""
        return replace(self, **changes)


@dataclass
class VehicleState:
    """Longitudinal vehicle state; conflict point at x = 0, travel in +x."""

    x: float       # m, reference centre
    v: float       # m/s, >= 0
    a: float = 0.0  # m/s², signed, braking negative


@dataclass
class PedestrianState:
    """Lateral pedestrian state along the crossing line x = 0."""

    y: float        # m, kerb at -road_half_width, travel in +y
    v: float        # m/s, signed only for the jaywalker rewind
    phase: int = 0  # model-specific code, see pedestrians.phase_name
    # model-specific scalar store (accumulator, timers, flags)
    s0: float = 0.0
    s1: float = -1.0
    s2: float = 0.0


def conflict_zone(cfg: ScenarioConfig) -> tuple[float, float, float, float]:
    """Rectangle swept by the vehicle footprint across the crossing line.

    Inflated by the pedestrian radius; returns (x_lo, x_hi, y_lo, y_hi).
    The vehicle occupies the zone while x in [x_lo, x_hi], the pedestrian
    while y in [y_lo, y_hi].
    """
    hx = cfg.vehicle_length / 2.0 + cfg.ped_radius
    hy = cfg.vehicle_width / 2.0 + cfg.ped_radius
    return (-hx, hx, -hy, hy)


def vehicle_tta(veh_x: float, veh_v: float) -> float:
    """Actual time for the vehicle centre to reach the conflict point.

    +inf when stopped or already at/past the point.
    """
    if veh_v <= 0.0 or veh_x >= 0.0:
        return math.inf
    return -veh_x / veh_v
