"""Deterministic fixed-timestep trial engine.

run_trial couples one pedestrian model and one AV controller with
semi-implicit Euler integration (v then x) at cfg.dt. The hot loop runs
in the compiled kernel when available (zebrasim._speedups) and falls
back to the pure-Python reference otherwise; both produce bit-identical
traces. Set ZEBRASIM_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernel_py as _kpy
from .controllers import resolve_controller_params
from .pedestrians import (IndividualParams, JaywalkerParams,
                          individual_to_dict, sample_individual)
from .rng import RngStream
from .world import PedestrianState, ScenarioConfig, VehicleState

_MODEL_CODE = {"scripted": _kpy.MODEL_SCRIPTED, "human_like": _kpy.MODEL_HUMAN,
               "jaywalker": _kpy.MODEL_JAYWALKER}
_CTRL_CODE = {"cruise_brake": _kpy.CTRL_CRUISE,
              "foresight_yield": _kpy.CTRL_FORESIGHT,
              "constant": _kpy.CTRL_CONSTANT}

EVENT_NAMES = {
    _kpy.EV_SPAWN: "spawn",
    _kpy.EV_DECISION_CROSS: "decision_cross",
    _kpy.EV_DECISION_WAIT: "decision_wait",
    _kpy.EV_COLLISION: "collision",
    _kpy.EV_PED_ZONE_ENTRY: "ped_zone_entry",
    _kpy.EV_PED_ZONE_EXIT: "ped_zone_exit",
    _kpy.EV_VEH_ZONE_ENTRY: "veh_zone_entry",
    _kpy.EV_VEH_ZONE_EXIT: "veh_zone_exit",
    _kpy.EV_CROSSING_DONE: "crossing_complete",
    _kpy.EV_VEH_FINISH: "vehicle_finish",
    _kpy.EV_TRUNCATED: "truncated",
    _kpy.EV_JAY_DASH: "jaywalker_dash",
    _kpy.EV_JAY_FREEZE: "jaywalker_freeze",
    _kpy.EV_JAY_SURVIVAL: "jaywalker_survival",
    _kpy.EV_CROSS_ABORT: "crossing_abort",
}

END_REASONS = {_kpy.END_COMPLETED: "completed",
               _kpy.END_COLLISION: "collision",
               _kpy.END_TIMEOUT: "timeout"}

# backend selection -------------------------------------------------------

_speedups = None
if not os.environ.get("ZEBRASIM_PURE"):
    try:
        from . import _speedups as _speedups  # type: ignore
    except ImportError:
        _speedups = None


def active_backend() -> str:
    """'compiled' when the Cython kernel is in use, else 'python'."""
    return "compiled" if _speedups is not None else "python"


def _simulate_fn():
    return _speedups.simulate if _speedups is not None else _kpy.simulate


@dataclass
class Trace:
    """Time-indexed states of both agents for one trial."""

    t: np.ndarray          # s
    veh_x: np.ndarray      # m
    veh_v: np.ndarray      # m/s
    veh_a: np.ndarray      # m/s² (effective, actuation-clipped)
    ped_y: np.ndarray      # m (NaN in free-flow runs)
    ped_v: np.ndarray      # m/s
    ped_phase: np.ndarray  # model-specific codes
    events: list[tuple[float, str]]
    config: ScenarioConfig
    end_reason: str
    individual: IndividualParams | None = None
    jaywalker: JaywalkerParams | None = None

    @property
    def n(self) -> int:
        return len(self.t)

    @property
    def collision(self) -> bool:
        return any(kind == "collision" for _, kind in self.events)

    @property
    def truncated(self) -> bool:
        return self.end_reason == "timeout"

    def samples(self):
        """Iterate (t, VehicleState, PedestrianState) tuples."""
        for i in range(self.n):
            yield (self.t[i],
                   VehicleState(self.veh_x[i], self.veh_v[i], self.veh_a[i]),
                   PedestrianState(self.ped_y[i], self.ped_v[i],
                                   int(self.ped_phase[i])))

    def event_time(self, kind: str) -> float | None:
        for t, k in self.events:
            if k == kind:
                return t
        return None


def detect_collision(veh: VehicleState, ped: PedestrianState,
                     cfg: ScenarioConfig) -> bool:
    """True iff the inflated vehicle footprint contains the pedestrian.

    Boundary inclusive: |veh.x| <= L/2 + r and |ped.y| <= W/2 + r.
    """
    return (abs(veh.x) <= cfg.vehicle_length / 2.0 + cfg.ped_radius
            and abs(ped.y) <= cfg.vehicle_width / 2.0 + cfg.ped_radius)


def trial_params(cfg: ScenarioConfig) -> tuple[dict, IndividualParams | None,
                                               JaywalkerParams | None]:
    """Flatten a ScenarioConfig into the kernel parameter dict.

    Samples the human individual from stream (seed, 0) when the config
    does not carry one explicitly.
    """
    ctrl = resolve_controller_params(cfg)
    model = "none" if cfg.free_flow else cfg.pedestrian_model
    p = {
        "dt": cfg.dt,
        "max_sim_time": cfg.max_sim_time,
        "finish_line": cfg.finish_line,
        "speed": cfg.vehicle_speed,
        "spawn_x": cfg.spawn_x,
        "rhw": cfg.road_half_width,
        "start_lat": cfg.ped_start_lateral,
        "half_len": cfg.vehicle_length / 2.0,
        "half_wid": cfg.vehicle_width / 2.0,
        "r": cfg.ped_radius,
        "seed": int(cfg.seed),
        "model": _kpy.MODEL_NONE if model == "none" else _MODEL_CODE[model],
        "ctrl": _CTRL_CODE[cfg.controller],
        "target_speed": ctrl.target_speed,
        "d_brake": ctrl.braking_distance,
        "max_brake": ctrl.max_brake,
        "comfort_accel": ctrl.comfort_accel,
        "comfort_brake": ctrl.comfort_brake,
        "horizon": ctrl.prediction_horizon,
        "stop_margin": ctrl.stop_margin,
        # pedestrian parameters (unused slots stay at 0)
        "v_walk": 0.0, "tau_gap": 1.0, "k_gain": 0.0, "threshold_a": 1.0,
        "sigma_noise": 0.0, "weber": 0.0, "t_react": 0.0, "speedup": 1.0,
        "j_trigger": 1.0, "j_dash": 1.0, "j_pfreeze": 0.0,
        "j_freeze_dur": 1.0, "j_ttc_surv": 1.0, "j_relax": 0.3,
    }
    individual = None
    jay = None
    if model == "human_like":
        individual = cfg.individual
        if individual is None:
            individual = sample_individual(RngStream(int(cfg.seed), 0))
        p.update(individual_to_dict(individual))
    elif model == "jaywalker":
        jay = cfg.jaywalker if cfg.jaywalker is not None else JaywalkerParams()
        p.update({
            "j_trigger": jay.trigger_tta,
            "j_dash": jay.dash_speed,
            "j_pfreeze": jay.p_freeze,
            "j_freeze_dur": jay.freeze_duration,
            "j_ttc_surv": jay.ttc_survival,
            "j_relax": jay.relax_time,
        })
    return p, individual, jay


def run_trial(cfg: ScenarioConfig) -> Trace:
    """Run one trial; a pure function of cfg (including cfg.seed).

    A collision freezes both agents and is recorded as an event; the
    trial keeps a short stationary aftermath and ends. A trial that hits
    max_sim_time is returned truncated (end_reason 'timeout'), not
    raised.
    """
    p, individual, jay = trial_params(cfg)
    n_max = int(round(cfg.max_sim_time / cfg.dt))
    t = np.empty(n_max + 1)
    veh_x = np.empty(n_max + 1)
    veh_v = np.empty(n_max + 1)
    veh_a = np.empty(n_max + 1)
    ped_y = np.empty(n_max + 1)
    ped_v = np.empty(n_max + 1)
    ped_phase = np.empty(n_max + 1, dtype=np.int32)
    ev_code = np.empty(_kpy.MAX_EVENTS, dtype=np.int32)
    ev_t = np.empty(_kpy.MAX_EVENTS)

    n, n_ev, end = _simulate_fn()(p, t, veh_x, veh_v, veh_a,
                                  ped_y, ped_v, ped_phase, ev_code, ev_t)

    events = [(float(ev_t[i]), EVENT_NAMES[int(ev_code[i])])
              for i in range(n_ev)]
    return Trace(t=t[:n].copy(), veh_x=veh_x[:n].copy(),
                 veh_v=veh_v[:n].copy(), veh_a=veh_a[:n].copy(),
                 ped_y=ped_y[:n].copy(), ped_v=ped_v[:n].copy(),
                 ped_phase=ped_phase[:n].copy(), events=events,
                 config=cfg, end_reason=END_REASONS[end],
                 individual=individual, jaywalker=jay)
