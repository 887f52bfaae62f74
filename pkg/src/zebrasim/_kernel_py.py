"""Pure-Python trial kernel: the per-step hot loop and its RNG.

This module is the reference implementation; ``zebrasim._speedups`` is a
Cython transliteration of the same arithmetic in the same order, so both
backends produce bit-identical traces (the extension is compiled with
-ffp-contract=off to keep IEEE semantics aligned). Keep the two in sync:
any change here must be mirrored there.

All per-step functions operate on plain scalars; `zebrasim.pedestrians`
and `zebrasim.controllers` wrap them with the dataclass-based API.
"""

from __future__ import annotations

import math

# --- integer codes shared with the compiled kernel ---------------------

MODEL_SCRIPTED = 0
MODEL_HUMAN = 1
MODEL_JAYWALKER = 2
MODEL_NONE = 3

CTRL_CRUISE = 0
CTRL_FORESIGHT = 1
CTRL_CONSTANT = 2

# human phases
H_APPROACHING, H_DECIDING, H_WAITING, H_CROSSING, H_DONE = 0, 1, 2, 3, 4
# jaywalker phases
J_INIT, J_WAIT, J_CROSS, J_FROZEN, J_SURVIVAL, J_FINISHED = 0, 1, 2, 3, 4, 5
# scripted phases
S_WALKING, S_DONE = 0, 1

# event codes
EV_SPAWN = 0
EV_DECISION_CROSS = 1
EV_DECISION_WAIT = 2
EV_COLLISION = 3
EV_PED_ZONE_ENTRY = 4
EV_PED_ZONE_EXIT = 5
EV_VEH_ZONE_ENTRY = 6
EV_VEH_ZONE_EXIT = 7
EV_CROSSING_DONE = 8
EV_VEH_FINISH = 9
EV_TRUNCATED = 10
EV_JAY_DASH = 11
EV_JAY_FREEZE = 12
EV_JAY_SURVIVAL = 13
EV_CROSS_ABORT = 14

END_COMPLETED = 0
END_COLLISION = 1
END_TIMEOUT = 2

# --- behaviour constants (authoritative values; wrappers re-export) ----

# vehicle actuation envelope, m/s²
VEH_ACCEL_MIN = -8.0
VEH_ACCEL_MAX = 2.0

# scripted walker
SCRIPTED_SPEED = 1.4      # m/s
GUARD_INFLATE = 0.5       # m, footprint inflation for reactive avoidance
GUARD_LOOKAHEAD = 1.5     # m of path ahead that must be clear

# human-like surrogate
TTA_PERC_MAX = 60.0       # s, perceived-TTA saturation (stands in for +inf)
WAIT_SETBACK = 0.05       # m behind the road+radius line when standing
CLEAR_MARGIN = 0.5        # m the vehicle rear must clear the crossing line
SCAN_DELAY = 1.2          # s road re-check after clearance, before initiating
RECOIL_TTA = 2.3          # s, abort initiation if the actual gap is smaller
SPEEDUP_WINDOW = 2.0      # speedup when vehicle within this multiple of tau_gap

# cruise/brake controller
KERB_APPROACH_BAND = 1.0  # m beyond the kerb that counts as hazard approach
RESUME_DEBOUNCE = 0.5     # s hazard-free before releasing the brake
BRAKE_STOP_OFFSET = 1.5   # m, front stop target short of the conflict point
BRAKE_DIST_EPS = 0.05     # m, below this remaining distance brake at max

# jaywalker survival
SURVIVAL_REPULSION = 1.0  # m²/s, vehicle repulsion gain in survival
SURVIVAL_TTC_FLOOR = 0.2  # s, repulsion saturation
PED_SPEED_LIMIT = 4.0     # m/s, sprint bound

COLLISION_GRACE = 2.0     # s of frozen aftermath kept in the trace

MAX_EVENTS = 64

# --- splitmix64 RNG -----------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finaliser; deterministic across platforms."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, stream_id: int) -> int:
    """Initial state for an independent (seed, stream_id) stream."""
    s = mix64(seed & _MASK64)
    return mix64(s ^ ((stream_id * _GOLDEN) & _MASK64))


def next_u64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK64
    return state, mix64(state)


def next_uniform(state: int) -> tuple[int, float]:
    """U[0, 1) with 53 random bits."""
    state, z = next_u64(state)
    return state, (z >> 11) * 2.0 ** -53


def next_normal(state: int) -> tuple[int, float]:
    """Standard normal via Marsaglia polar; the pair's spare is discarded."""
    while True:
        state, u1 = next_uniform(state)
        state, u2 = next_uniform(state)
        u = 2.0 * u1 - 1.0
        v = 2.0 * u2 - 1.0
        s = u * u + v * v
        if 0.0 < s < 1.0:
            return state, u * math.sqrt(-2.0 * math.log(s) / s)


# --- shared per-step helpers --------------------------------------------
# p is a plain dict of floats/ints built by engine._trial_params.


def path_blocked(y: float, veh_x: float, half_len: float, half_wid: float) -> bool:
    """Reactive-avoidance check: inflated vehicle footprint blocks the next
    GUARD_LOOKAHEAD metres of the pedestrian path."""
    if abs(veh_x) <= half_len + GUARD_INFLATE:
        lo = -(half_wid + GUARD_INFLATE)
        hi = half_wid + GUARD_INFLATE
        return (y + GUARD_LOOKAHEAD >= lo) and (y <= hi)
    return False


def front_tta(veh_x: float, veh_v: float, half_len: float) -> float:
    """Time until the vehicle front reaches the crossing line.

    +inf once the rear has cleared by CLEAR_MARGIN or when the vehicle has
    stopped short of the line; 0 while straddling it.
    """
    if veh_x - half_len >= CLEAR_MARGIN:
        return math.inf
    front_dist = -veh_x - half_len
    if front_dist <= 0.0:
        return 0.0
    if veh_v <= 0.0:
        return math.inf
    return front_dist / veh_v


def perceived_tta(veh_x: float, veh_v: float, half_len: float,
                  weber: float, zeta: float) -> float:
    """Noisy perceived time-to-arrival of the vehicle at the conflict point."""
    if veh_x - half_len >= CLEAR_MARGIN or veh_v <= 0.0:
        return TTA_PERC_MAX
    raw = -veh_x / veh_v
    perc = raw * (1.0 + weber * zeta)
    if perc > TTA_PERC_MAX:
        perc = TTA_PERC_MAX
    return perc


# --- pedestrian steps ----------------------------------------------------


def scripted_step(y, v, phase, veh_x, veh_v, p):
    """Deterministic walker: fixed speed, reactive halt, no decisions."""
    ev = -1
    if phase == S_DONE:
        return y, 0.0, phase, ev
    speed = SCRIPTED_SPEED
    if path_blocked(y, veh_x, p["half_len"], p["half_wid"]):
        speed = 0.0
    ny = y + speed * p["dt"]
    v = (ny - y) / p["dt"]
    y = ny
    if y >= p["start_lat"]:
        phase = S_DONE
        ev = EV_CROSSING_DONE
    return y, v, phase, ev


def human_step(y, v, phase, e, timer, veh_x, veh_v, p, rng):
    """Evidence-accumulation surrogate step.

    Returns (y, v, phase, e, timer, rng_state, event_code). Two normal
    draws (perception, then accumulator noise) are consumed per
    accumulating step and none otherwise.
    """
    ev = -1
    dt = p["dt"]
    half_len = p["half_len"]
    y_wait = -(p["rhw"] + p["r"] + WAIT_SETBACK)
    goal = p["start_lat"]

    if phase == H_DONE:
        return y, 0.0, phase, e, timer, rng, ev

    if phase == H_CROSSING:
        speed = p["v_walk"]
        att = front_tta(veh_x, veh_v, half_len)
        if att <= SPEEDUP_WINDOW * p["tau_gap"]:
            speed = p["v_walk"] * p["speedup"]
        if path_blocked(y, veh_x, half_len, p["half_wid"]):
            speed = 0.0
        ny = y + speed * dt
        if y < y_wait and ny >= y_wait:
            # first step onto the carriageway: recoil gate
            att = front_tta(veh_x, veh_v, half_len)
            if att < RECOIL_TTA:
                ny = y_wait
                phase = H_WAITING
                e = 0.0
                timer = -1.0
                ev = EV_CROSS_ABORT
        v = (ny - y) / dt
        y = ny
        if phase == H_CROSSING and y >= goal:
            phase = H_DONE
            ev = EV_CROSSING_DONE
        return y, v, phase, e, timer, rng, ev

    if phase == H_WAITING:
        if timer >= 0.0:
            timer -= dt
            if timer < 0.0:
                phase = H_CROSSING
                timer = -1.0
        elif veh_x - half_len >= CLEAR_MARGIN:
            timer = SCAN_DELAY + p["t_react"]
        ny = y + p["v_walk"] * dt
        if ny > y_wait:
            ny = y_wait
        v = (ny - y) / dt
        y = ny
        return y, v, phase, e, timer, rng, ev

    # approaching / deciding
    if timer >= 0.0:
        timer -= dt
        if timer < 0.0:
            timer = -1.0
            if y >= y_wait:
                # initiating from the kerb line: recoil gate
                att = front_tta(veh_x, veh_v, half_len)
                if att < RECOIL_TTA:
                    phase = H_WAITING
                    e = 0.0
                    ev = EV_CROSS_ABORT
                else:
                    phase = H_CROSSING
            else:
                phase = H_CROSSING  # gate fires at the kerb line
    else:
        rng, zeta = next_normal(rng)
        rng, eta = next_normal(rng)
        tta_p = perceived_tta(veh_x, veh_v, half_len, p["weber"], zeta)
        e += (p["k_gain"] * (tta_p - p["tau_gap"]) * dt
              + p["sigma_noise"] * math.sqrt(dt) * eta)
        if e >= p["threshold_a"]:
            timer = p["t_react"]
            ev = EV_DECISION_CROSS
        elif e <= -p["threshold_a"]:
            phase = H_WAITING
            timer = -1.0
            ev = EV_DECISION_WAIT

    if phase == H_APPROACHING or phase == H_DECIDING:
        ny = y + p["v_walk"] * dt
        if ny > y_wait:
            ny = y_wait
        v = (ny - y) / dt
        y = ny
        if phase == H_APPROACHING and y >= y_wait:
            phase = H_DECIDING
    else:
        v = 0.0
    return y, v, phase, e, timer, rng, ev


def jaywalker_step(y, v, phase, s0, s1, veh_x, veh_v, p, rng):
    """Six-state adversarial walker with social-force velocity relaxation.

    s0: freeze coin (0 no, 1 pending, 2 consumed); s1: freeze timer.
    Returns (y, v, phase, s0, s1, rng_state, event_code).
    """
    ev = -1
    dt = p["dt"]
    half_len = p["half_len"]
    on_road = abs(y) <= p["rhw"] + p["r"]
    att = front_tta(veh_x, veh_v, half_len)
    stand_y = -(p["rhw"] + p["r"] + WAIT_SETBACK)
    goal = p["start_lat"]

    if phase == J_FINISHED:
        return y, 0.0, phase, s0, s1, rng, ev

    if phase == J_INIT:
        phase = J_WAIT

    v_des = 0.0
    if phase == J_WAIT:
        if veh_x - half_len >= CLEAR_MARGIN:
            phase = J_FINISHED  # vehicle gone without a dash window
            ev = EV_CROSSING_DONE
            return y, 0.0, phase, s0, s1, rng, ev
        tta_pt = math.inf
        if veh_v > 0.0 and veh_x < 0.0:
            tta_pt = -veh_x / veh_v
        if tta_pt <= p["j_trigger"]:
            phase = J_CROSS
            ev = EV_JAY_DASH
            rng, u = next_uniform(rng)
            s0 = 1.0 if u < p["j_pfreeze"] else 0.0

    if phase == J_CROSS:
        if on_road and att < p["j_ttc_surv"]:
            phase = J_SURVIVAL
            ev = EV_JAY_SURVIVAL
        elif on_road and s0 == 1.0 and att <= 2.0 * p["j_ttc_surv"]:
            phase = J_FROZEN
            s0 = 2.0
            s1 = p["j_freeze_dur"]
            ev = EV_JAY_FREEZE
        else:
            v_des = p["j_dash"]

    if phase == J_FROZEN:
        if on_road and att < p["j_ttc_surv"]:
            phase = J_SURVIVAL
            ev = EV_JAY_SURVIVAL
        else:
            s1 -= dt
            if s1 < 0.0:
                phase = J_CROSS
                v_des = p["j_dash"]
            else:
                v_des = 0.0

    if phase == J_SURVIVAL:
        if y < p["half_wid"]:
            flee = -1.0  # rewind retreat
        else:
            flee = 1.0
        ttc = att if att > SURVIVAL_TTC_FLOOR else SURVIVAL_TTC_FLOOR
        v_des = flee * (p["j_dash"] + SURVIVAL_REPULSION / ttc)
        if flee < 0.0 and y <= stand_y:
            v_des = 0.0  # retreated to safety; wait out the vehicle
            if veh_x - half_len >= CLEAR_MARGIN:
                phase = J_FINISHED
                ev = EV_CROSSING_DONE
                return y, 0.0, phase, s0, s1, rng, ev

    # social-force relaxation toward the state's desired velocity
    v = v + (v_des - v) * dt / p["j_relax"]
    if v > PED_SPEED_LIMIT:
        v = PED_SPEED_LIMIT
    elif v < -PED_SPEED_LIMIT:
        v = -PED_SPEED_LIMIT
    y = y + v * dt

    if (phase == J_CROSS or phase == J_SURVIVAL) and y >= goal:
        phase = J_FINISHED
        ev = EV_CROSSING_DONE
    return y, v, phase, s0, s1, rng, ev


# --- controllers ----------------------------------------------------------


def cruise_brake_command(veh_x, veh_v, ped_y, ped_v, latch, p, ped_present):
    """Rule-based cruise/brake command; returns (accel, latch).

    Braking commands the deceleration that stops the vehicle front
    BRAKE_STOP_OFFSET before the conflict point, capped at max_brake.
    """
    dt = p["dt"]
    half_len = p["half_len"]
    hazard = False
    if ped_present:
        band = p["rhw"] + p["r"]
        on_road = abs(ped_y) <= band
        toward = (ped_y < 0.0 and ped_v > 0.0) or (ped_y > 0.0 and ped_v < 0.0)
        near_kerb = (not on_road) and toward and abs(ped_y) <= p["rhw"] + KERB_APPROACH_BAND
        hazard = on_road or near_kerb
    passed = (veh_x + half_len) > 0.0
    front_dist = -veh_x - half_len
    dist = front_dist if front_dist > 0.0 else 0.0
    engage = hazard and (not passed) and dist <= p["d_brake"]
    if engage:
        latch = RESUME_DEBOUNCE
    else:
        latch = latch - dt if latch > 0.0 else 0.0
    if (engage or latch > 0.0) and not passed:
        avail = dist - BRAKE_STOP_OFFSET
        if avail < BRAKE_DIST_EPS:
            need = p["max_brake"]
        else:
            need = veh_v * veh_v / (2.0 * avail)
            if need > p["max_brake"]:
                need = p["max_brake"]
        return -need, latch
    if passed:
        latch = 0.0
    accel = (p["target_speed"] - veh_v) / dt
    if accel > p["comfort_accel"]:
        accel = p["comfort_accel"]
    elif accel < -p["comfort_accel"]:
        accel = -p["comfort_accel"]
    return accel, latch


def foresight_command(veh_x, veh_v, ped_y, ped_v, p, ped_present):
    """Predictive yield command (smooth stand-in for a planning stack)."""
    dt = p["dt"]
    half_len = p["half_len"]
    passed = (veh_x + half_len) > 0.0
    if ped_present and not passed and veh_v > 0.0:
        band = p["half_wid"] + p["r"]
        horizon = p["horizon"]
        # pedestrian occupancy of the vehicle path band under constant velocity
        if ped_v != 0.0:
            t1 = (-band - ped_y) / ped_v
            t2 = (band - ped_y) / ped_v
            s_lo = t1 if t1 < t2 else t2
            s_hi = t2 if t1 < t2 else t1
        elif abs(ped_y) <= band:
            s_lo, s_hi = 0.0, horizon
        else:
            s_lo, s_hi = 1.0, 0.0  # empty
        if s_lo < 0.0:
            s_lo = 0.0
        if s_hi > horizon:
            s_hi = horizon
        zone_hx = half_len + p["r"]
        v_lo = (-zone_hx - veh_x) / veh_v
        v_hi = (zone_hx - veh_x) / veh_v
        if v_lo < 0.0:
            v_lo = 0.0
        if v_hi > horizon:
            v_hi = horizon
        overlap = (s_lo <= s_hi) and (v_lo <= v_hi) and \
                  (max(s_lo, v_lo) <= min(s_hi, v_hi))
        if overlap:
            avail = -veh_x - (zone_hx + p["stop_margin"])
            if avail < BRAKE_DIST_EPS:
                need = p["comfort_brake"]
            else:
                need = veh_v * veh_v / (2.0 * avail)
                if need > p["comfort_brake"]:
                    need = p["comfort_brake"]
            return -need
    accel = (p["target_speed"] - veh_v) / dt
    if accel > p["comfort_accel"]:
        accel = p["comfort_accel"]
    elif accel < -p["comfort_accel"]:
        accel = -p["comfort_accel"]
    return accel


# --- trial loop ------------------------------------------------------------


def simulate(p, t_out, veh_x_out, veh_v_out, veh_a_out,
             ped_y_out, ped_v_out, ped_phase_out,
             ev_code_out, ev_t_out):
    """Run one trial; fills the preallocated arrays.

    Returns (n_samples, n_events, end_reason).
    """
    dt = p["dt"]
    n_max = int(round(p["max_sim_time"] / dt))
    model = p["model"]
    ctrl = p["ctrl"]
    half_len = p["half_len"]
    hx = half_len + p["r"]
    hy = p["half_wid"] + p["r"]
    ped_present = model != MODEL_NONE

    veh_x = p["spawn_x"]
    veh_v = p["speed"]
    if ped_present:
        ped_y = -p["start_lat"]
    else:
        ped_y = math.nan
    ped_v = 0.0
    phase = J_INIT if model == MODEL_JAYWALKER else 0
    e_acc = 0.0
    timer = -1.0
    s0 = 0.0
    s1 = -1.0
    rng = stream_state(p["seed"], 1)
    latch = 0.0

    n_ev = 0

    def emit(code, at):
        nonlocal n_ev
        if n_ev < MAX_EVENTS:
            ev_code_out[n_ev] = code
            ev_t_out[n_ev] = at
            n_ev += 1

    t_out[0] = 0.0
    veh_x_out[0] = veh_x
    veh_v_out[0] = veh_v
    veh_a_out[0] = 0.0
    ped_y_out[0] = ped_y
    ped_v_out[0] = ped_v
    ped_phase_out[0] = phase
    emit(EV_SPAWN, 0.0)

    collided = False
    coll_t = 0.0
    veh_fin = False
    ped_fin = not ped_present
    ped_entered = False
    ped_exited = False
    veh_entered = False
    veh_exited = False
    end_reason = END_TIMEOUT
    k = 0

    while k < n_max:
        k += 1
        t = k * dt
        if collided:
            a_eff = 0.0
        else:
            ovx, ovv = veh_x, veh_v
            if ctrl == CTRL_CRUISE:
                a_cmd, latch = cruise_brake_command(
                    ovx, ovv, ped_y, ped_v, latch, p, ped_present)
            elif ctrl == CTRL_FORESIGHT:
                a_cmd = foresight_command(ovx, ovv, ped_y, ped_v, p, ped_present)
            else:
                a_cmd = (p["target_speed"] - ovv) / dt
                if a_cmd > p["comfort_accel"]:
                    a_cmd = p["comfort_accel"]
                elif a_cmd < -p["comfort_accel"]:
                    a_cmd = -p["comfort_accel"]
            if a_cmd > VEH_ACCEL_MAX:
                a_cmd = VEH_ACCEL_MAX
            elif a_cmd < VEH_ACCEL_MIN:
                a_cmd = VEH_ACCEL_MIN
            nv = ovv + a_cmd * dt
            if nv < 0.0:
                nv = 0.0
            veh_v = nv
            veh_x = ovx + nv * dt
            a_eff = (veh_v - ovv) / dt

            ev = -1
            if model == MODEL_SCRIPTED:
                ped_y, ped_v, phase, ev = scripted_step(
                    ped_y, ped_v, phase, ovx, ovv, p)
            elif model == MODEL_HUMAN:
                ped_y, ped_v, phase, e_acc, timer, rng, ev = human_step(
                    ped_y, ped_v, phase, e_acc, timer, ovx, ovv, p, rng)
            elif model == MODEL_JAYWALKER:
                ped_y, ped_v, phase, s0, s1, rng, ev = jaywalker_step(
                    ped_y, ped_v, phase, s0, s1, ovx, ovv, p, rng)
            if ev >= 0:
                emit(ev, t)

            if ped_present and abs(veh_x) <= hx and abs(ped_y) <= hy:
                collided = True
                coll_t = t
                veh_v = 0.0
                ped_v = 0.0
                a_eff = (veh_v - ovv) / dt
                emit(EV_COLLISION, t)

        t_out[k] = t
        veh_x_out[k] = veh_x
        veh_v_out[k] = veh_v
        veh_a_out[k] = a_eff
        ped_y_out[k] = ped_y
        ped_v_out[k] = ped_v
        ped_phase_out[k] = phase

        if ped_present:
            if not ped_entered and abs(ped_y) <= hy:
                ped_entered = True
                emit(EV_PED_ZONE_ENTRY, t)
            elif ped_entered and not ped_exited and ped_y > hy:
                ped_exited = True
                emit(EV_PED_ZONE_EXIT, t)
        if not veh_entered and abs(veh_x) <= hx:
            veh_entered = True
            emit(EV_VEH_ZONE_ENTRY, t)
        elif veh_entered and not veh_exited and veh_x > hx:
            veh_exited = True
            emit(EV_VEH_ZONE_EXIT, t)
        if not veh_fin and veh_x >= p["finish_line"]:
            veh_fin = True
            emit(EV_VEH_FINISH, t)
        if ped_present and not ped_fin:
            if model == MODEL_SCRIPTED:
                ped_fin = phase == S_DONE
            elif model == MODEL_HUMAN:
                ped_fin = phase == H_DONE
            else:
                ped_fin = phase == J_FINISHED

        if collided:
            if t >= coll_t + COLLISION_GRACE:
                end_reason = END_COLLISION
                break
        elif veh_fin and ped_fin:
            end_reason = END_COMPLETED
            break
    else:
        emit(EV_TRUNCATED, k * dt)
        end_reason = END_TIMEOUT

    return k + 1, n_ev, end_reason
