"""AV longitudinal controllers.

* cruise_brake -- rule-based cruise with a distance-triggered emergency
  stop; `braking_distance` is the tunable optimisation parameter. The
  stop command is the deceleration needed to halt the vehicle front
  short of the conflict point, capped at max_brake, so late triggers
  brake hard and early triggers brake gently.
* foresight_yield -- smooth predictive controller: constant-velocity
  pedestrian extrapolation, comfort-limited braking to a stop ahead of
  the conflict zone.
* constant -- diagnostic controller that holds the target speed.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernel_py as _k
from .errors import ValidationError
from .world import BRAKING_DISTANCE_RANGE, PedestrianState, ScenarioConfig, VehicleState

DEFAULT_BRAKING_DISTANCE = 12.0  # m, the "before optimisation" baseline

KERB_APPROACH_BAND = _k.KERB_APPROACH_BAND
RESUME_DEBOUNCE = _k.RESUME_DEBOUNCE
BRAKE_STOP_OFFSET = _k.BRAKE_STOP_OFFSET


@dataclass(frozen=True)
class ControllerParams:
    """Longitudinal controller parameters shared by both controllers."""

    target_speed: float                 # m/s
    braking_distance: float = DEFAULT_BRAKING_DISTANCE  # m
    max_brake: float = 8.0              # m/s², positive magnitude
    comfort_accel: float = 2.0          # m/s²
    comfort_brake: float = 2.5          # m/s² (foresight controller)
    prediction_horizon: float = 4.0     # s
    stop_margin: float = 1.0            # m

    def __post_init__(self) -> None:
        lo, hi = BRAKING_DISTANCE_RANGE
        if not lo <= self.braking_distance <= hi:
            raise ValidationError(f"braking_distance must lie in [{lo}, {hi}] m")
        if not 0.0 < self.max_brake <= 8.0:
            raise ValidationError("max_brake must lie in (0, 8] m/s²")
        if not self.comfort_brake <= 2.5:
            raise ValidationError("comfort_brake must be <= 2.5 m/s²")
        if self.target_speed <= 0:
            raise ValidationError("target_speed must be > 0")


def resolve_controller_params(cfg: ScenarioConfig) -> ControllerParams:
    """ControllerParams from cfg.controller_params with defaults filled in."""
    cp = dict(cfg.controller_params)
    cp.setdefault("target_speed", cfg.vehicle_speed)
    return ControllerParams(**cp)


def _cmd_params(cfg: ScenarioConfig, p: ControllerParams) -> dict:
    return {
        "dt": cfg.dt,
        "half_len": cfg.vehicle_length / 2.0,
        "half_wid": cfg.vehicle_width / 2.0,
        "rhw": cfg.road_half_width,
        "r": cfg.ped_radius,
        "target_speed": p.target_speed,
        "d_brake": p.braking_distance,
        "max_brake": p.max_brake,
        "comfort_accel": p.comfort_accel,
        "comfort_brake": p.comfort_brake,
        "horizon": p.prediction_horizon,
        "stop_margin": p.stop_margin,
    }


def cruise_brake_command(veh: VehicleState, ped: PedestrianState,
                         params: ControllerParams, cfg: ScenarioConfig,
                         latch: float = 0.0) -> float:
    """Commanded acceleration of the rule-based controller.

    `latch` is the per-trial debounce state owned by the engine; pass the
    previous value to reproduce the resume hysteresis.
    """
    a, _ = _k.cruise_brake_command(veh.x, veh.v, ped.y, ped.v, latch,
                                   _cmd_params(cfg, params), True)
    return a


def foresight_command(veh: VehicleState, ped: PedestrianState,
                      params: ControllerParams,
                      cfg: ScenarioConfig) -> float:
    """Commanded acceleration of the predictive yield controller."""
    return _k.foresight_command(veh.x, veh.v, ped.y, ped.v,
                                _cmd_params(cfg, params), True)
