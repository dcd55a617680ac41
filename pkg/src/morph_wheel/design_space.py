"""
Design procedures for the wheel: segment count, coupler and strut sizing,
wheel-weight feasibility, friction requirement and spring-stiffness trade-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DomainError
from .sweep import SweepResult
from .wheel_model import (
    SpringSpec,
    WheelDesign,
    coupler_delta_r,
    input_torque,
    min_spring_force,
)

ZERO_BAND = 1e-9
REFERENCE_STRUT_BOUND = 24.6293  # mm, figure quoted for the built wheel


# ---------------------------------------------------------------------------
# Tire segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentConfig:
    n: int  # segment count
    rho_c: float  # max/min radius ratio
    r_w_max: float = 80.0  # mm

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError("segment count must be an integer >= 3")
        if self.rho_c < 1:
            raise DomainError("radius ratio must be >= 1")
        if not self.r_w_max > 0:
            raise DomainError("r_w_max must be positive")


def displacement_amplitude(cfg: SegmentConfig) -> tuple[float, float]:
    """Hub height oscillation in the expanded state: (A in mm, A as % of h_c,max).

    The segment arcs keep their compressed-state length, so at full
    expansion each one spans (rho_c - 1)/rho_c of its sector less; the hub
    drops by r (1 - cos(half that gap angle)) when a gap meets the ground.
    h_c,max is taken as r_w_max (contact at an arc midpoint).
    """
    h_max = cfg.r_w_max
    a = h_max - cfg.r_w_max * math.cos((cfg.rho_c - 1.0) * math.pi / (cfg.n * cfg.rho_c))
    return a, 100.0 * a / h_max


def min_segment_count(rho_c: float, limit: float, n_max: int = 10_000) -> int:
    """Smallest n >= 3 whose normalised amplitude is at most ``limit`` percent."""
    if not limit > 0:
        raise DomainError("limit must be positive")
    for n in range(3, n_max + 1):
        if displacement_amplitude(SegmentConfig(n, rho_c))[1] <= limit:
            return n
    raise DomainError(f"no segment count up to {n_max} meets {limit}%")


# ---------------------------------------------------------------------------
# Coupler and strut sizing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    name: str
    satisfied: bool
    margin: float
    unit: str = "mm"


@dataclass(frozen=True)
class ConstraintReport:
    constraints: tuple[Constraint, ...]

    @property
    def passed(self) -> bool:
        return all(c.satisfied for c in self.constraints)

    @property
    def violated(self) -> list[str]:
        return [c.name for c in self.constraints if not c.satisfied]

    def __getitem__(self, name: str) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def extended(self, *more: Constraint) -> "ConstraintReport":
        return ConstraintReport(self.constraints + tuple(more))


def check_coupler_constraints(l_a: float, l_b: float, r_w_max: float,
                              clearance: float = 10.0,
                              delta_r_target: float = 40.0) -> ConstraintReport:
    """Slider-crank sizing rules, with signed margins (positive = satisfied)."""
    if min(l_a, l_b, r_w_max, delta_r_target) <= 0 or clearance < 0:
        raise DomainError("lengths must be positive")
    singular = 2.0 * l_a - l_b
    stroke = l_b - delta_r_target
    # the 10 mm clearance is exactly consumed by the reference 30/40 mm
    # coupler, so a zero margin counts as satisfied
    fit = r_w_max - (l_a + l_b) - clearance
    return ConstraintReport((
        Constraint("singularity_avoidance", singular > 0, singular),
        Constraint("required_displacement", stroke >= 0, stroke),
        Constraint("geometric_feasibility", fit >= 0, fit),
    ))


@dataclass(frozen=True)
class StrutSizing:
    min_link_length: float  # mm
    reference_link_length: float  # mm
    reference_satisfies: bool
    reference_stroke: float  # mm reached by the reference length


def strut_inner_radius_bound(theta_s_max: float, L_const: float, delta_r_max: float,
                             reference: float = REFERENCE_STRUT_BOUND) -> StrutSizing:
    """Shortest strut link whose stroke covers ``L_const + delta_r_max``.

    ``theta_s_max`` is in radians.  ``reference`` is a comparison value that
    is checked against the same stroke requirement.
    """
    if not 0.0 < theta_s_max < math.pi / 2 + 1e-12:
        raise DomainError("theta_s_max must lie in (0, 90] deg")
    need = L_const + delta_r_max
    per_length = 2.0 * (1.0 - math.cos(theta_s_max))
    r_min = need / per_length
    ref_stroke = reference * per_length
    return StrutSizing(r_min, reference, ref_stroke >= need, ref_stroke)


# ---------------------------------------------------------------------------
# Wheel-weight feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityPoint:
    W_w: float  # kg
    cond1_ok: bool
    cond2_ok: bool
    min_tau: float  # N·mm, over the stroke excluding theta_d = 0
    min_dtau: float  # N·mm/rad

    @property
    def feasible(self) -> bool:
        return self.cond1_ok and self.cond2_ok


@dataclass(frozen=True)
class FeasibilityRegion:
    parameter_grid: tuple[FeasibilityPoint, ...]
    lower_bound: float | None
    upper_bound: float | None
    cond1_upper: float | None

    def to_sweep(self) -> SweepResult:
        g = self.parameter_grid
        return SweepResult.from_columns(
            [("W_w_kg", "kg"), ("cond1_ok", "bool"), ("cond2_ok", "bool"),
             ("feasible", "bool"), ("min_tau_in_Nmm", "N*mm"),
             ("min_dtau_in_Nmm_per_rad", "N*mm/rad")],
            [[p.W_w for p in g], [int(p.cond1_ok) for p in g],
             [int(p.cond2_ok) for p in g], [int(p.feasible) for p in g],
             [p.min_tau for p in g], [p.min_dtau for p in g]],
        )


def torque_slope(design: WheelDesign, theta: np.ndarray, h: float) -> np.ndarray:
    """d(tau_in)/d(theta_d) by central differences; one-sided at the ends."""
    lo, hi = theta[0], theta[-1]
    plus = np.minimum(theta + h, hi)
    minus = np.maximum(theta - h, lo)
    return (input_torque(design, plus) - input_torque(design, minus)) / (plus - minus)


def weight_feasibility(design: WheelDesign, w_min: float, w_max: float,
                       grid_points: int = 100, domain_points: int = 500) -> FeasibilityRegion:
    """Scan wheel weights for positive and strictly increasing input torque.

    Condition 1: tau_in > 0 over the stroke (tau_in(0) = 0 identically, so
    the origin is excluded).  Condition 2: d(tau_in)/d(theta_d) > 0 over
    the stroke, by central differences with a step of 1/5000 of the stroke.
    Both use a 1e-9 zero band.  ``w_min == w_max`` gives a single point.
    """
    if w_min > w_max:
        raise DomainError("w_min must not exceed w_max")
    if w_min == w_max:
        weights = np.array([float(w_min)])
    else:
        if grid_points < 10:
            raise DomainError("grid_points must be >= 10")
        weights = np.linspace(w_min, w_max, grid_points)
    top = design.theta_d_max
    theta = np.linspace(0.0, top, domain_points)
    h = top / 5000.0

    # tau_in is affine in W_w: J * F_s - W_w * g * J
    spring_only = design.with_weight(0.0)
    tau0 = input_torque(spring_only, theta)
    slope0 = torque_slope(spring_only, theta, h)
    jac = input_torque(design.with_weight(1.0 / design.gravity), theta)
    jac = tau0 - jac  # = J(theta) * 1 N
    dj = slope0 - torque_slope(design.with_weight(1.0 / design.gravity), theta, h)

    points = []
    for w in weights:
        wf = w * design.gravity
        tau = tau0 - wf * jac
        dtau = slope0 - wf * dj
        min_tau = float(tau[1:].min()) if tau.size > 1 else 0.0
        min_dtau = float(dtau.min())
        points.append(FeasibilityPoint(float(w), min_tau > ZERO_BAND, min_dtau > ZERO_BAND,
                                       min_tau, min_dtau))

    ok = [p.W_w for p in points if p.feasible]
    c1 = [p.W_w for p in points if p.cond1_ok]
    return FeasibilityRegion(
        tuple(points),
        min(ok) if ok else None,
        max(ok) if ok else None,
        max(c1) if c1 else None,
    )


def cond1_upper_closed_form(design: WheelDesign) -> float:
    """Heaviest wheel the springs hold at zero stroke: F_s(0) / g, kg."""
    return min_spring_force(design) / design.gravity


# ---------------------------------------------------------------------------
# Friction requirement and stiffness trade-off
# ---------------------------------------------------------------------------

def stroke_output_force(design: WheelDesign, points: int = 500) -> tuple[np.ndarray, np.ndarray]:
    """Drivetrain-angle grid and the output force along the equilibrium curve."""
    theta = np.linspace(0.0, design.theta_d_max, points)
    tau = input_torque(design, theta)
    r_w = design.effective_radius(coupler_delta_r(design.coupler, theta))
    return theta, tau / r_w


def min_friction_coefficient(design: WheelDesign, weights: Sequence[float] | None = None,
                             points: int = 500) -> SweepResult:
    """Least friction coefficient that avoids slip over the whole stroke.

    mu_min(W_w) = max_theta F_out(theta) / (W_w g), with the wheel weight as
    the normal load at the contact.
    """
    if weights is None:
        weights = np.linspace(0.5, 3.0, 26)
    mus, fmax = [], []
    for w in weights:
        if not w > 0:
            raise DomainError("wheel weights must be positive")
        _, f_out = stroke_output_force(design.with_weight(w), points)
        peak = max(float(f_out.max()), 0.0)
        fmax.append(peak)
        mus.append(peak / (w * design.gravity))
    return SweepResult.from_columns(
        [("W_w_kg", "kg"), ("mu_min", "1"), ("F_out_max_N", "N")],
        [list(map(float, weights)), mus, fmax],
    )


def stiffness_sweep(design: WheelDesign, k_values: Sequence[float]) -> SweepResult:
    """Full-compression torque and output force for each total spring stiffness.

    ``k_values`` are total stiffnesses in N·mm/deg (all springs combined).
    F_out,max is evaluated at the minimum contact radius.
    """
    taus, forces = [], []
    for k in k_values:
        if not k > 0:
            raise DomainError("stiffness values must be positive")
        d = replace(design, spring=SpringSpec(unit_stiffness=k, count=1))
        tau = input_torque(d, d.theta_d_max)
        taus.append(tau)
        forces.append(tau / design.min_contact_radius)
    return SweepResult.from_columns(
        [("k_total_Nmm_per_deg", "N*mm/deg"), ("tau_in_max_Nmm", "N*mm"),
         ("F_out_max_N", "N")],
        [list(map(float, k_values)), taus, forces],
        wheel_weight_kg=design.wheel_weight,
    )
