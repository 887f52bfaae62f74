"""Behavioural metrics computed from a Trace.

All passing times are zone-based: an agent "passes" the conflict area
when its coordinate crosses the footprint-inflated rectangle of
world.conflict_zone, matching standard PET practice. The deceleration
metric uses recorded speeds, so actuation clipping is reflected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .engine import Trace
from .errors import IncomparableConfigs, MalformedTrace, VehicleNeverFinished
from .world import ScenarioConfig, conflict_zone

SUDDEN_DECEL_THRESHOLD = 2.5  # m/s², strict "exceeding"


class ConflictTimes(NamedTuple):
    ped_entry: float | None
    ped_exit: float | None
    veh_entry: float | None
    veh_exit: float | None


@dataclass(frozen=True)
class InteractionOutcome:
    """Per-trial metric bundle; one outcomes-CSV row."""

    pet: float | None
    accepted: bool | None
    collision: bool
    max_decel: float
    sudden_change: bool
    time_lost: float | None
    first_passer: str  # pedestrian | vehicle | none


def _first_index(mask: np.ndarray, start: int = 0) -> int | None:
    idx = np.flatnonzero(mask[start:])
    return None if idx.size == 0 else int(idx[0]) + start


def conflict_times(trace: Trace) -> ConflictTimes:
    """Zone entry/exit times of each agent; None when never reached.

    Exit means leaving on the far side (pedestrian y, vehicle x above the
    zone); an agent that backs out of the zone never "exits".
    """
    if trace.n == 0:
        raise MalformedTrace("trace has no samples")
    _, hx, _, hy = conflict_zone(trace.config)
    t = trace.t

    ped_entry = ped_exit = None
    if not np.all(np.isnan(trace.ped_y)):
        i = _first_index(np.abs(trace.ped_y) <= hy)
        if i is not None:
            ped_entry = float(t[i])
            j = _first_index(trace.ped_y > hy, start=i)
            if j is not None:
                ped_exit = float(t[j])

    veh_entry = veh_exit = None
    i = _first_index(np.abs(trace.veh_x) <= hx)
    if i is not None:
        veh_entry = float(t[i])
        j = _first_index(trace.veh_x > hx, start=i)
        if j is not None:
            veh_exit = float(t[j])
    return ConflictTimes(ped_entry, ped_exit, veh_entry, veh_exit)


def compute_pet(trace: Trace) -> float | None:
    """Post-encroachment time, in seconds.

    None when either agent never reaches the zone. Simultaneous
    occupancy without a footprint collision (grazing, aborted crossings)
    yields 0. Undefined for collision trials (raises ValueError; callers
    gate on the collision flag).
    """
    if trace.collision:
        raise ValueError("PET undefined for collision trials")
    ct = conflict_times(trace)
    if ct.ped_entry is None or ct.veh_entry is None:
        return None
    if ct.ped_exit is not None and ct.ped_exit <= ct.veh_entry:
        return ct.veh_entry - ct.ped_exit
    if ct.veh_exit is not None and ct.veh_exit <= ct.ped_entry:
        return ct.ped_entry - ct.veh_exit
    return 0.0


def gap_accepted(trace: Trace) -> bool | None:
    """True iff the pedestrian cleared the zone before the vehicle entered.

    None for collisions and for pedestrians that never completed a pass.
    """
    if trace.collision:
        return None
    ct = conflict_times(trace)
    if ct.ped_exit is None:
        return None
    if ct.veh_entry is None or ct.ped_exit < ct.veh_entry:
        return True
    return False


def max_deceleration(trace: Trace) -> float:
    """Largest step deceleration of the vehicle, floored at 0."""
    if trace.n < 2:
        raise MalformedTrace("need at least 2 samples")
    dv = np.diff(trace.veh_v)
    dt = np.diff(trace.t)
    return float(max(0.0, np.max(-dv / dt)))


def _finish_time(trace: Trace) -> float | None:
    i = _first_index(trace.veh_x >= trace.config.finish_line)
    return None if i is None else float(trace.t[i])


_COMPARE_FIELDS = ("vehicle_speed", "tta", "road_half_width",
                   "ped_start_lateral", "vehicle_length", "vehicle_width",
                   "ped_radius", "dt", "max_sim_time", "finish_line",
                   "controller")


def time_lost(interaction: Trace, free_flow: Trace) -> float:
    """max(0, T_int - T_free) with T the time to the finish line."""
    a, b = interaction.config, free_flow.config
    for name in _COMPARE_FIELDS:
        if getattr(a, name) != getattr(b, name):
            raise IncomparableConfigs(f"configs differ in {name}")
    if a.controller_params != b.controller_params:
        raise IncomparableConfigs("configs differ in controller_params")
    t_int = _finish_time(interaction)
    t_free = _finish_time(free_flow)
    if t_int is None or t_free is None:
        raise VehicleNeverFinished("vehicle did not reach the finish line")
    return max(0.0, t_int - t_free)


def first_passer(trace: Trace) -> str:
    if trace.collision:
        return "none"
    ct = conflict_times(trace)
    if ct.ped_exit is not None and (ct.veh_entry is None
                                    or ct.ped_exit <= ct.veh_entry):
        return "pedestrian"
    if ct.veh_exit is not None and (ct.ped_entry is None
                                    or ct.veh_exit <= ct.ped_entry):
        return "vehicle"
    return "none"


def outcome_from_trace(trace: Trace,
                       free_flow: Trace | None = None) -> InteractionOutcome:
    """Bundle the per-trial metrics; collision gates PET and acceptance."""
    collision = trace.collision
    md = max_deceleration(trace)
    tl = None
    if free_flow is not None:
        try:
            tl = time_lost(trace, free_flow)
        except VehicleNeverFinished:
            tl = None
    return InteractionOutcome(
        pet=None if collision else compute_pet(trace),
        accepted=gap_accepted(trace),
        collision=collision,
        max_decel=md,
        sudden_change=md > SUDDEN_DECEL_THRESHOLD,
        time_lost=tl,
        first_passer=first_passer(trace),
    )


def aggregate(outcomes: list[InteractionOutcome]) -> dict:
    """Rates and PET summaries over a batch of outcomes.

    Rates are means of per-trial booleans; acceptance is computed over
    trials where it is defined.
    """
    n = len(outcomes)
    pets = [o.pet for o in outcomes if o.pet is not None]
    acc = [o.accepted for o in outcomes if o.accepted is not None]
    tls = [o.time_lost for o in outcomes if o.time_lost is not None]
    return {
        "n": n,
        "collision_rate": sum(o.collision for o in outcomes) / n if n else 0.0,
        "acceptance_rate": sum(acc) / len(acc) if acc else 0.0,
        "n_accept_defined": len(acc),
        "sudden_change_rate": sum(o.sudden_change for o in outcomes) / n if n else 0.0,
        "mean_pet": float(np.mean(pets)) if pets else None,
        "min_pet": float(np.min(pets)) if pets else None,
        "mean_time_lost": float(np.mean(tls)) if tls else None,
    }
