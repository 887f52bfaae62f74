"""Pedestrian behaviour models and their parameter populations.

Three models share the PedestrianState record:

* scripted   -- fixed-speed walker with short-range reactive avoidance
* human_like -- stochastic evidence-accumulation surrogate with
                per-individual parameters (inter-individual variability)
* jaywalker  -- six-state adversarial walker (dash / freeze / rewind)

The per-step arithmetic lives in the kernel module; the functions here
wrap it with the dataclass API and are what the engine composes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from . import _kernel_py as _k
from .errors import ValidationError
from .rng import RngStream
from .world import PedestrianState, ScenarioConfig, VehicleState

# re-exported behaviour constants (kernel is authoritative)
SCRIPTED_SPEED = _k.SCRIPTED_SPEED
RECOIL_TTA = _k.RECOIL_TTA
SCAN_DELAY = _k.SCAN_DELAY
CLEAR_MARGIN = _k.CLEAR_MARGIN
WAIT_SETBACK = _k.WAIT_SETBACK

HUMAN_PHASES = ("approaching", "deciding", "waiting", "crossing", "done")
JAYWALKER_PHASES = ("initialising", "waiting", "crossing", "frozen",
                    "survival", "finished")
SCRIPTED_PHASES = ("walking", "done")


@dataclass(frozen=True)
class IndividualParams:
    """One sampled human-like pedestrian (inter-individual variability)."""

    v_walk: float        # m/s preferred walking speed
    tau_gap: float       # s critical time gap
    k_gain: float        # 1/s evidence gain
    threshold_a: float   # decision threshold
    sigma_noise: float   # accumulator noise scale
    weber: float         # multiplicative TTA-perception noise fraction
    t_react: float       # s motor initiation delay
    speedup: float       # crossing-speed multiplier under pressure

    def __post_init__(self) -> None:
        if not 0.8 <= self.v_walk <= 2.0:
            raise ValidationError("v_walk must lie in [0.8, 2.0] m/s")
        if not self.tau_gap >= 2.0:
            raise ValidationError("tau_gap must be >= 2.0 s")
        if not self.k_gain > 0:
            raise ValidationError("k_gain must be > 0")
        if not self.threshold_a > 0:
            raise ValidationError("threshold_a must be > 0")
        if self.sigma_noise < 0:
            raise ValidationError("sigma_noise must be >= 0")
        if not 0.0 <= self.weber <= 0.5:
            raise ValidationError("weber must lie in [0, 0.5]")
        if self.t_react < 0:
            raise ValidationError("t_react must be >= 0")
        if not 1.0 <= self.speedup <= 1.6:
            raise ValidationError("speedup must lie in [1, 1.6]")

    def deterministic(self) -> "IndividualParams":
        """Copy with all stochastic terms zeroed (for closed-form tests)."""
        return replace(self, sigma_noise=0.0, weber=0.0)


@dataclass(frozen=True)
class JaywalkerParams:
    """Rule-based adversarial walker parameters (default risk mode)."""

    trigger_tta: float = 3.0    # s, dash when vehicle TTA falls below
    dash_speed: float = 3.5     # m/s
    p_freeze: float = 0.5       # per-crossing freeze probability
    freeze_duration: float = 1.0  # s
    ttc_survival: float = 1.3   # s, TTC threshold entering survival
    relax_time: float = 0.3     # s, social-force relaxation
    risk_mode: str = "risk"

    def __post_init__(self) -> None:
        if self.dash_speed > 4.0:
            raise ValidationError("dash_speed must be <= 4.0 m/s")
        if not 0.0 <= self.p_freeze <= 1.0:
            raise ValidationError("p_freeze must lie in [0, 1]")
        for name in ("trigger_tta", "dash_speed", "freeze_duration",
                     "ttc_survival", "relax_time"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")
        if self.risk_mode != "risk":
            raise ValidationError("only the default 'risk' mode is supported")


# Population distributions for sample_individual. Centres tuned so the
# aggregate gap-acceptance curve hits the behavioural anchors (~10% at
# TTA 6 s, ~100% at 18 s); see tests/test_acceptance.py criterion 1.
POP_V_WALK = (1.35, 0.2, 0.8, 2.0)     # trunc normal: mean, sd, lo, hi
POP_TAU_GAP = (4.5, 1.0, 3.0, 8.0)
POP_K_GAIN = (0.2, 1.0)                # log-uniform
POP_THRESHOLD = (0.8, 1.5)             # uniform
POP_SIGMA = (0.2, 0.6)
POP_WEBER = (0.05, 0.25)
POP_T_REACT = (0.2, 0.6)
POP_SPEEDUP = (1.0, 1.5)


def _trunc_normal(rng: RngStream, mean: float, sd: float,
                  lo: float, hi: float) -> float:
    while True:
        x = mean + sd * rng.normal()
        if lo <= x <= hi:
            return x


def _uniform(rng: RngStream, lo: float, hi: float) -> float:
    return lo + (hi - lo) * rng.uniform()


def sample_individual(rng: RngStream) -> IndividualParams:
    """Draw one pedestrian parameter set from the population.

    Draw order is fixed (part of the determinism contract).
    """
    v_walk = _trunc_normal(rng, *POP_V_WALK)
    tau_gap = _trunc_normal(rng, *POP_TAU_GAP)
    k_gain = math.exp(_uniform(rng, math.log(POP_K_GAIN[0]),
                               math.log(POP_K_GAIN[1])))
    threshold_a = _uniform(rng, *POP_THRESHOLD)
    sigma_noise = _uniform(rng, *POP_SIGMA)
    weber = _uniform(rng, *POP_WEBER)
    t_react = _uniform(rng, *POP_T_REACT)
    speedup = _uniform(rng, *POP_SPEEDUP)
    return IndividualParams(v_walk, tau_gap, k_gain, threshold_a,
                            sigma_noise, weber, t_react, speedup)


def individual_to_dict(p: IndividualParams) -> dict:
    return {f.name: getattr(p, f.name) for f in fields(IndividualParams)}


def individual_from_dict(d: dict) -> IndividualParams:
    return IndividualParams(**{f.name: float(d[f.name])
                               for f in fields(IndividualParams)})


def jaywalker_to_dict(p: JaywalkerParams) -> dict:
    out = {}
    for f in fields(JaywalkerParams):
        out[f.name] = getattr(p, f.name)
    return out


def jaywalker_from_dict(d: dict) -> JaywalkerParams:
    kwargs = {}
    for f in fields(JaywalkerParams):
        if f.name in d:
            v = d[f.name]
            kwargs[f.name] = v if f.name == "risk_mode" else float(v)
    return JaywalkerParams(**kwargs)


def phase_name(model: str, code: int) -> str:
    names = {"scripted": SCRIPTED_PHASES, "human_like": HUMAN_PHASES,
             "jaywalker": JAYWALKER_PHASES}[model]
    return names[code] if 0 <= code < len(names) else str(code)


# --- step-function wrappers (spec surface over the kernel) ---------------


def _geom(cfg: ScenarioConfig) -> dict:
    return {
        "dt": cfg.dt,
        "half_len": cfg.vehicle_length / 2.0,
        "half_wid": cfg.vehicle_width / 2.0,
        "rhw": cfg.road_half_width,
        "r": cfg.ped_radius,
        "start_lat": cfg.ped_start_lateral,
    }


def scripted_step(state: PedestrianState, veh: VehicleState,
                  cfg: ScenarioConfig) -> PedestrianState:
    """Deterministic walker step; seed-independent."""
    p = _geom(cfg)
    y, v, phase, _ = _k.scripted_step(state.y, state.v, state.phase,
                                      veh.x, veh.v, p)
    return PedestrianState(y=y, v=v, phase=phase)


def human_step(state: PedestrianState, params: IndividualParams,
               veh: VehicleState, cfg: ScenarioConfig,
               rng: RngStream) -> PedestrianState:
    """One evidence-accumulation step of the human-like surrogate.

    state.s0 holds the accumulator, state.s1 the active timer
    (motor-initiation countdown or post-clearance scan), -1 when idle.
    """
    p = _geom(cfg)
    p.update(individual_to_dict(params))
    y, v, phase, e, timer, new_state, _ = _k.human_step(
        state.y, state.v, state.phase, state.s0, state.s1,
        veh.x, veh.v, p, rng._state)
    rng._state = new_state
    return PedestrianState(y=y, v=v, phase=phase, s0=e, s1=timer)


def jaywalker_step(state: PedestrianState, params: JaywalkerParams,
                   veh: VehicleState, cfg: ScenarioConfig,
                   rng: RngStream) -> PedestrianState:
    """One step of the six-state adversarial walker."""
    p = _geom(cfg)
    p.update({
        "j_trigger": params.trigger_tta,
        "j_dash": params.dash_speed,
        "j_pfreeze": params.p_freeze,
        "j_freeze_dur": params.freeze_duration,
        "j_ttc_surv": params.ttc_survival,
        "j_relax": params.relax_time,
    })
    y, v, phase, s0, s1, new_state, _ = _k.jaywalker_step(
        state.y, state.v, state.phase, state.s0, state.s1,
        veh.x, veh.v, p, rng._state)
    rng._state = new_state
    return PedestrianState(y=y, v=v, phase=phase, s0=s0, s1=s1)
