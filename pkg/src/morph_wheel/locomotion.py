"""
Quasi-static robot-level simulation on piecewise terrain.

The motor is speed controlled. Each step is one of three things: the
wheel contracts while the robot holds position (radius variation), the
robot rolls at the current effective radius (direct drive), or nothing
moves (stall). Positions are in metres, radii and torques in mm and N·mm.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .behavior import (
    EQUILIBRIUM_TOL,
    DecidingForces,
    DriveSolution,
    Mode,
    ModeState,
    classify_mode,
    drive_solution,
)
from .errors import DomainError
from .wheel_model import STANDARD_GRAVITY, WheelDesign, input_torque, wheel_state

# Rolling resistance and friction for coarse ground types. These are
# order-of-magnitude figures, not measurements.
TERRAIN_COEFFICIENTS: dict[str, tuple[float, float]] = {
    "hard_floor": (0.02, 0.8),
    "gravel": (0.06, 0.6),
    "grass": (0.10, 0.5),
}

_RPM = 2.0 * math.pi / 60.0


# ---------------------------------------------------------------------------
# Scenario description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TerrainSegment:
    length: float  # m
    slope_deg: float = 0.0
    rolling_resistance: float = 0.0
    friction: float = 0.8

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError("segment length must be positive")
        if not abs(self.slope_deg) < 90.0:
            raise DomainError("|slope| must be below 90 deg")
        if self.rolling_resistance < 0 or self.friction < 0:
            raise DomainError("terrain coefficients must be non-negative")

    @classmethod
    def of(cls, kind: str, length: float, slope_deg: float = 0.0) -> "TerrainSegment":
        """Segment with coefficients taken from ``TERRAIN_COEFFICIENTS``."""
        try:
            crr, mu = TERRAIN_COEFFICIENTS[kind]
        except KeyError:
            raise DomainError(f"unknown terrain kind {kind!r}") from None
        return cls(length, slope_deg, crr, mu)


@dataclass(frozen=True)
class TerrainProfile:
    segments: tuple[TerrainSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise DomainError("terrain profile needs at least one segment")

    @property
    def boundaries(self) -> np.ndarray:
        """Cumulative segment end positions, m."""
        return np.cumsum([s.length for s in self.segments])

    @property
    def extent(self) -> float:
        return float(self.boundaries[-1])

    def segment_index(self, position: float) -> int:
        """Index of the segment containing ``position`` (boundaries belong to the next one)."""
        if not 0.0 <= position <= self.extent:
            raise DomainError(f"position {position} m is outside the profile [0, {self.extent}]")
        k = int(np.searchsorted(self.boundaries, position, side="right"))
        return min(k, len(self.segments) - 1)


@dataclass(frozen=True)
class MotorModel:
    torque_constant: float = 1900.0  # N·mm/A
    no_load_current: float = 0.02  # A
    max_torque: float = 10600.0  # N·mm
    rated_speed: float = 60.0  # rpm

    def __post_init__(self):
        if not self.torque_constant > 0:
            raise DomainError("torque_constant must be positive")
        if self.no_load_current < 0 or not self.max_torque > 0 or not self.rated_speed > 0:
            raise DomainError("motor constants out of range")

    def current(self, tau: float) -> float:
        return self.no_load_current + abs(tau) / self.torque_constant

    def torque_limit(self, speed_rpm: float) -> float:
        """Full torque up to the rated speed, constant power above it."""
        s = abs(speed_rpm)
        return self.max_torque if s <= self.rated_speed else self.max_torque * self.rated_speed / s


@dataclass(frozen=True)
class VehicleSpec:
    cart_mass: float  # kg
    onboard_load: float  # kg
    wheel_count: int
    per_wheel_design: WheelDesign
    commanded_speed: float = 60.0  # rpm, magnitude

    def __post_init__(self):
        if self.cart_mass < 0 or self.onboard_load < 0:
            raise DomainError("masses must be non-negative")
        if int(self.wheel_count) != self.wheel_count or self.wheel_count < 1:
            raise DomainError("wheel_count must be an integer >= 1")
        if not self.commanded_speed > 0:
            raise DomainError("commanded_speed must be positive")

    @property
    def total_mass(self) -> float:
        return self.cart_mass + self.onboard_load + self.wheel_count * self.per_wheel_design.wheel_weight

    @property
    def omega(self) -> float:
        """Commanded wheel speed, rad/s."""
        return self.commanded_speed * _RPM


@dataclass(frozen=True)
class TerrainScenario:
    vehicle: VehicleSpec
    profile: TerrainProfile
    motor: MotorModel = MotorModel()
    duration: float = 6.0  # s
    dt: float = 0.01  # s
    direction: int = 1  # +1 forward, -1 reverse
    reverse_at: float | None = None  # s, command sign flips here
    allow_expansion: bool = False
    stop_at_end: bool = True  # finish the run when the course is covered

    def __post_init__(self):
        if not self.duration > 0 or not self.dt > 0:
            raise DomainError("duration and dt must be positive")
        if self.direction not in (1, -1):
            raise DomainError("direction must be +1 or -1")

    def reversed(self) -> "TerrainScenario":
        return replace(self, direction=-self.direction)

    def command(self, t: float) -> int:
        if self.reverse_at is not None and t >= self.reverse_at:
            return -self.direction
        return self.direction


def resistance_force(profile: TerrainProfile, position: float, total_mass: float,
                     g: float = STANDARD_GRAVITY, driven_wheels: int = 1,
                     heading: int = 1) -> float:
    """Grade plus rolling resistance at ``position``, per driven wheel, N.

    ``heading`` is -1 when travelling back along the course, which turns
    an uphill grade into a downhill one.
    """
    if driven_wheels < 1:
        raise DomainError("driven_wheels must be >= 1")
    seg = profile.segments[profile.segment_index(position)]
    a = math.radians(seg.slope_deg)
    return total_mass * g * (heading * math.sin(a) + seg.rolling_resistance * math.cos(a)) / driven_wheels


# ---------------------------------------------------------------------------
# Integrator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimState:
    t: float = 0.0  # s
    position: float = 0.0  # m, signed
    theta_d: float = 0.0  # rad, signed like the command that wound it


@dataclass(frozen=True)
class SimSample:
    t: float  # s
    position: float  # m
    theta_d: float  # rad
    delta_r: float  # mm
    effective_radius: float  # mm
    mode: ModeState
    motor_torque: float  # N·mm
    motor_current: float  # A
    ground_speed: float  # m/s, signed
    F_res: float  # N
    segment: int
    slip_risk: bool


@functools.lru_cache(maxsize=4096)
def _drive(design: WheelDesign, F_res: float, tau_max: float, start: float,
           allow_expansion: bool) -> DriveSolution:
    return drive_solution(design, F_res, tau_max, start, allow_expansion)


def _fixed_mode(r: float, tau: float, F_res: float) -> ModeState:
    # a rigid wheel has no contraction path, so the second branch never fires
    f_out = tau / r
    mode = Mode.DIRECT_DRIVE if f_out > F_res else Mode.STALL
    return ModeState(mode, DecidingForces(f_out, F_res, 0.0, 0.0, 0.0))


def step(state: SimState, vehicle: VehicleSpec, profile: TerrainProfile, dt: float,
         motor: MotorModel = MotorModel(), command: int = 1,
         fixed_radius: float | None = None,
         allow_expansion: bool = False,
         course_direction: int = 1) -> tuple[SimState, SimSample]:
    """Advance one quasi-static step of length ``dt``.

    ``command`` is the sign of the commanded rotation and ``course_direction``
    the sign that moves along the profile. ``fixed_radius`` (mm) replaces
    the wheel with a rigid one of that radius.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    if command not in (1, -1):
        raise DomainError("command must be +1 or -1")
    design = vehicle.per_wheel_design
    distance = min(abs(state.position), profile.extent)
    seg_i = profile.segment_index(distance)
    seg = profile.segments[seg_i]
    f_res = resistance_force(profile, distance, vehicle.total_mass, design.gravity,
                             vehicle.wheel_count, command * course_direction)
    f_load = max(f_res, 0.0)  # downhill pull is not modelled as regeneration
    omega = vehicle.omega
    tau_max = motor.torque_limit(vehicle.commanded_speed)
    normal = (vehicle.total_mass * design.gravity
              * math.cos(math.radians(seg.slope_deg)) / vehicle.wheel_count)
    theta = state.theta_d
    mag = abs(theta)
    advance = omega * dt

    if fixed_radius is not None:
        r = float(fixed_radius)
        tau = f_load * r + 1e-6
        if tau > tau_max:
            tau = tau_max
        mode = _fixed_mode(r, tau, f_load)
        moving = mode.mode is Mode.DIRECT_DRIVE
        speed = command * omega * r * 1e-3 if moving else 0.0
        new = SimState(state.t + dt, state.position + speed * dt, 0.0)
        sample = SimSample(new.t, new.position, 0.0, 0.0, r, mode, tau, motor.current(tau),
                           speed, f_res, seg_i, tau / r > seg.friction * normal)
        return new, sample

    speed = 0.0
    if mag > 0.0 and math.copysign(1.0, theta) != command:
        # reversal: the coupler unwinds through the expanded state first
        mag = max(mag - advance, 0.0)
        st = wheel_state(design, mag)
        tau = float(input_torque(design, mag)) + EQUILIBRIUM_TOL
        mode = classify_mode(design, st, tau, f_load)
        new_theta = math.copysign(mag, theta) if mag > 0 else 0.0
    else:
        sol = _drive(design, f_load, tau_max, mag, allow_expansion)
        target = sol.final_state.theta_d
        if target > mag:
            # wind up along the equilibrium curve before anything rolls
            mag = min(mag + advance, target)
        elif target < mag:
            mag = max(mag - advance, target)
        st = wheel_state(design, mag)
        if mag == target:
            tau = sol.tau_used
            mode = sol.final_mode
        else:
            # just above the holding torque, so the coupler keeps moving
            tau = float(input_torque(design, mag)) + EQUILIBRIUM_TOL
            mode = classify_mode(design, st, tau, f_load)
        if mag == target and mode.mode is Mode.DIRECT_DRIVE:
            speed = command * omega * st.effective_radius * 1e-3
        new_theta = command * mag
    st = wheel_state(design, mag)
    new = SimState(state.t + dt, state.position + speed * dt, new_theta)
    sample = SimSample(new.t, new.position, new_theta, st.delta_r, st.effective_radius,
                       mode, tau, motor.current(tau), speed, f_res, seg_i,
                       tau / st.effective_radius > seg.friction * normal)
    return new, sample


# ---------------------------------------------------------------------------
# Runs and summaries
# ---------------------------------------------------------------------------

@dataclass
class SimTrace:
    variant: str
    samples: list[SimSample]
    summary: dict = field(default_factory=dict)

    def array(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def modes(self) -> list[Mode]:
        return [s.mode.mode for s in self.samples]


def _crossing_times(trace: SimTrace, boundaries: np.ndarray, dt: float) -> list[float | None]:
    """Interpolated times at which the travelled distance passes each boundary."""
    t = np.concatenate([[0.0], trace.array("t")])
    d = np.abs(np.concatenate([[0.0], trace.array("position")]))
    out: list[float | None] = []
    for b in boundaries:
        hit = np.flatnonzero(d >= b - 1e-12)
        if hit.size == 0:
            out.append(None)
            continue
        k = int(hit[0])
        if k == 0 or d[k] == d[k - 1]:
            out.append(float(t[k]))
        else:
            out.append(float(t[k - 1] + (b - d[k - 1]) / (d[k] - d[k - 1]) * (t[k] - t[k - 1])))
    return out


def summarize(trace: SimTrace, profile: TerrainProfile, dt: float) -> dict:
    cur = trace.array("motor_current")
    r = trace.array("effective_radius")
    ends = _crossing_times(trace, profile.boundaries, dt)
    starts = [0.0] + ends[:-1]
    seg_times = [None if (a is None or b is None) else b - a for a, b in zip(starts, ends)]
    tail = r[int(0.75 * len(r)):] if len(r) else r
    per_seg = []
    for i in range(len(profile.segments)):
        c = cur[[s.segment == i for s in trace.samples]]
        per_seg.append(float(c.mean()) if c.size else None)
    return {
        "mean_current_A": float(cur.mean()) if cur.size else 0.0,
        "std_current_A": float(cur.std()) if cur.size else 0.0,
        "current_range_A": float(cur.max() - cur.min()) if cur.size else 0.0,
        "segment_mean_current_A": per_seg,
        "segment_traversal_time_s": seg_times,
        "steady_radius_mm": float(tail.mean()) if tail.size else math.nan,
        "final_position_m": trace.samples[-1].position if trace.samples else 0.0,
        "completed": ends[-1] is not None,
        "mode_timeline": mode_timeline(trace),
    }


def mode_timeline(trace: SimTrace) -> list[tuple[float, str]]:
    """(start time, mode) for every run of identical modes."""
    out: list[tuple[float, str]] = []
    prev_t = 0.0
    for s in trace.samples:
        name = s.mode.mode.value
        if not out or out[-1][1] != name:
            out.append((prev_t, name))
        prev_t = s.t
    return out


def _variant_radius(variant: str) -> float | None:
    if variant == "morph":
        return None
    kind, _, value = variant.partition(":")
    if kind != "fixed" or not value:
        raise DomainError(f"unknown wheel variant {variant!r}")
    r = float(value)
    if not r > 0:
        raise DomainError("fixed radius must be positive")
    return r


def run(scenario: TerrainScenario, variant: str = "morph") -> SimTrace:
    """Deterministic trace of ``scenario``; ``variant`` is 'morph' or 'fixed:<mm>'."""
    radius = _variant_radius(variant)
    n = int(round(scenario.duration / scenario.dt))
    state = SimState()
    samples: list[SimSample] = []
    for _ in range(n):
        if scenario.stop_at_end and abs(state.position) >= scenario.profile.extent:
            break
        state, sample = step(state, scenario.vehicle, scenario.profile, scenario.dt,
                             scenario.motor, scenario.command(state.t), radius,
                             scenario.allow_expansion, scenario.direction)
        samples.append(sample)
    trace = SimTrace(variant, samples)
    trace.summary = summarize(trace, scenario.profile, scenario.dt)
    return trace


# ---------------------------------------------------------------------------
# Comparisons
# ---------------------------------------------------------------------------

DEFAULT_VARIANTS = ("morph", "fixed:80", "fixed:45")
_DELTA_KEYS = ("mean_current_A", "std_current_A", "current_range_A")


@dataclass
class ComparisonReport:
    traces: dict[str, SimTrace]
    baseline: str
    deltas: dict[str, dict]

    def summary(self) -> dict:
        return {
            "baseline": self.baseline,
            "variants": {k: v.summary for k, v in self.traces.items()},
            "deltas": self.deltas,
        }


def compare_wheels(scenario: TerrainScenario,
                   variants: Sequence[str] = DEFAULT_VARIANTS) -> ComparisonReport:
    """Run every variant on the same scenario; deltas are against the first one."""
    if len(variants) < 2:
        raise DomainError("need at least two variants to compare")
    traces = {v: run(scenario, v) for v in variants}
    base = traces[variants[0]].summary
    deltas = {}
    for v in variants[1:]:
        s = traces[v].summary
        d = {k: s[k] - base[k] for k in _DELTA_KEYS}
        d["segment_traversal_time_s"] = [
            None if (a is None or b is None) else b - a
            for a, b in zip(base["segment_traversal_time_s"], s["segment_traversal_time_s"])
        ]
        deltas[v] = d
    return ComparisonReport(traces, variants[0], deltas)


@dataclass
class SymmetryReport:
    passed: bool
    max_delta_r_difference: float  # mm
    modes_identical: bool
    first_divergence: int | None
    forward: SimTrace
    reverse: SimTrace

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "max_delta_r_difference_mm": self.max_delta_r_difference,
            "modes_identical": self.modes_identical,
            "first_divergence": self.first_divergence,
            "samples": len(self.forward.samples),
        }


def bidirectional_check(scenario: TerrainScenario, tol: float = 1e-9) -> SymmetryReport:
    """Run the scenario forward and with the command sign flipped, then compare."""
    fwd = run(replace(scenario, direction=1))
    rev = run(replace(scenario, direction=-1))
    a, b = fwd.array("delta_r"), rev.array("delta_r")
    first = None
    if len(a) != len(b):
        first = min(len(a), len(b))
    m = min(len(a), len(b))
    diff = np.abs(np.abs(a[:m]) - np.abs(b[:m]))
    bad = np.flatnonzero((diff > tol) | (np.array(fwd.modes[:m]) != np.array(rev.modes[:m])))
    if bad.size:
        first = int(bad[0]) if first is None else min(first, int(bad[0]))
    same_modes = fwd.modes == rev.modes
    worst = float(diff.max()) if diff.size else 0.0
    return SymmetryReport(first is None, worst, same_modes, first, fwd, rev)
