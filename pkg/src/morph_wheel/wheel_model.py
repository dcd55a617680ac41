"""
Kinematics and kinetics of the torque-response coupler and connecting struts.

Units: lengths in mm, forces in N, torques in N·mm, angles in rad, masses in
kg (converted to newtons with ``WheelDesign.gravity``).  Degrees only appear
in constructor arguments whose names say so.

All angle-taking functions are even/odd in the sign of the drivetrain angle,
so the same code serves both rotation directions.  They accept floats or
numpy arrays; scalar input gives a float back.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.optimize import bisect

from .errors import (
    DomainError,
    NearSingularWarning,
    OutOfRangeError,
    SingularConfigurationError,
)

STANDARD_GRAVITY = 9.80665  # m/s²
HALF_PI = 0.5 * math.pi
_ANGLE_SLACK = 1e-12


def _out(x):
    """Return a float for 0-d results, the array otherwise."""
    if isinstance(x, float):
        return x
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _ns(x):
    """Pick ``math`` for plain scalars (much faster) and numpy otherwise."""
    if isinstance(x, (float, int)) and not isinstance(x, bool):
        return math, float(x)
    return np, np.asarray(x, dtype=float)


@dataclass(frozen=True)
class CouplerGeometry:
    """Slider-crank of the torque-response coupler."""

    crank_length: float = 30.0  # l_a, mm
    slider_length: float = 40.0  # l_b, mm

    def __post_init__(self):
        if not (self.crank_length > 0 and self.slider_length > 0):
            raise DomainError("crank and slider lengths must be positive")
        if not self.slider_length < 2.0 * self.crank_length:
            raise DomainError(
                f"slider length {self.slider_length} mm must be shorter than "
                f"twice the crank length ({2 * self.crank_length} mm) to avoid the singular branch"
            )

    @property
    def max_angle(self) -> float:
        """End of the monotone branch of the stroke, rad."""
        if self.slider_length >= self.crank_length:
            return HALF_PI
        return math.asin(self.slider_length / self.crank_length)


@dataclass(frozen=True)
class StrutGeometry:
    """Spring-loaded connecting strut (symmetric slider-crank per segment)."""

    link_length: float = 25.0  # r_s, mm
    max_link_angle_deg: float = 74.0
    constraint_length: float = 5.0  # L_const, mm

    def __post_init__(self):
        if not self.link_length > 0:
            raise DomainError("strut link length must be positive")
        if not 0.0 < self.max_link_angle_deg < 90.0:
            raise DomainError("max strut link angle must lie in (0, 90) deg")
        if self.constraint_length < 0:
            raise DomainError("constraint length must be non-negative")

    @property
    def max_link_angle(self) -> float:
        return math.radians(self.max_link_angle_deg)

    @property
    def max_delta_r(self) -> float:
        """Radius change reachable at ``max_link_angle``."""
        return 2.0 * self.link_length * (1.0 - math.cos(self.max_link_angle))


@dataclass(frozen=True)
class SpringSpec:
    """Torsional springs at the strut joints, acting in parallel."""

    unit_stiffness: float = 2.14  # N·mm/deg per spring
    count: int = 12

    def __post_init__(self):
        if not self.unit_stiffness > 0:
            raise DomainError("spring stiffness must be positive")
        if int(self.count) != self.count or self.count < 1:
            raise DomainError("spring count must be an integer >= 1")

    @property
    def total_stiffness_deg(self) -> float:
        """Combined stiffness, N·mm/deg."""
        return self.unit_stiffness * self.count

    @property
    def total_stiffness(self) -> float:
        """Combined stiffness k_s, N·mm/rad."""
        return self.unit_stiffness * self.count * (180.0 / math.pi)


@dataclass(frozen=True)
class WheelDesign:
    """Every geometric and compliant parameter of one wheel."""

    coupler: CouplerGeometry = field(default_factory=CouplerGeometry)
    strut: StrutGeometry = field(default_factory=StrutGeometry)
    spring: SpringSpec = field(default_factory=SpringSpec)
    initial_radius: float = 80.0  # r_i, mm (fully expanded)
    min_contact_radius: float = 42.0  # r_w_min, mm
    segment_count: int = 6
    wheel_weight: float = 2.8  # kg
    gravity: float = STANDARD_GRAVITY
    delta_r_cap: float = 40.0  # mm, kinematic hard stop of the stroke
    backlash_deg: float = 0.0  # angular clearance at the spring axis

    def __post_init__(self):
        if not self.initial_radius > self.min_contact_radius > 0:
            raise DomainError("need initial_radius > min_contact_radius > 0")
        if int(self.segment_count) != self.segment_count or self.segment_count < 3:
            raise DomainError("segment_count must be an integer >= 3")
        if self.wheel_weight < 0:
            raise DomainError("wheel weight must be non-negative")
        if not self.gravity > 0:
            raise DomainError("gravity must be positive")
        if self.backlash_deg < 0:
            raise DomainError("backlash must be non-negative")
        if not self.delta_r_cap > 0:
            raise DomainError("delta_r_cap must be positive")
        reach = float(coupler_delta_r(self.coupler, self.coupler.max_angle))
        if self.delta_r_cap > reach + 1e-9:
            raise DomainError(
                f"delta_r_cap {self.delta_r_cap} mm exceeds the coupler stroke {reach:.4f} mm"
            )
        if self.delta_r_cap > 2.0 * self.strut.link_length:
            raise DomainError("delta_r_cap exceeds the strut stroke 2*r_s")

    @property
    def weight_force(self) -> float:
        """Wheel weight in newtons."""
        return self.wheel_weight * self.gravity

    @property
    def backlash(self) -> float:
        return math.radians(self.backlash_deg)

    @cached_property
    def theta_d_max(self) -> float:
        """Drivetrain angle at which the stroke reaches ``delta_r_cap``."""
        return coupler_theta_for_delta_r(self.coupler, self.delta_r_cap)

    def with_weight(self, wheel_weight: float) -> "WheelDesign":
        return replace(self, wheel_weight=wheel_weight)

    def effective_radius(self, delta_r):
        """Contact radius for a stroke, floored at ``min_contact_radius``."""
        xp, d = _ns(delta_r)
        if xp is math:
            return max(self.initial_radius - d, self.min_contact_radius)
        return np.maximum(self.initial_radius - d, self.min_contact_radius)


@dataclass(frozen=True)
class WheelState:
    """Kinematically consistent configuration; build with :func:`wheel_state`."""

    theta_d: float  # rad, signed by rotation direction
    delta_r: float  # mm
    effective_radius: float  # mm


def wheel_state(design: WheelDesign, theta_d: float) -> WheelState:
    """State at drivetrain angle ``theta_d`` (either sign)."""
    theta_d = float(theta_d)
    if abs(theta_d) > design.theta_d_max + _ANGLE_SLACK:
        raise OutOfRangeError(
            f"|theta_d| = {abs(theta_d):.6g} rad is beyond the stroke cap "
            f"{design.theta_d_max:.6g} rad"
        )
    dr = coupler_delta_r(design.coupler, theta_d)
    return WheelState(theta_d, dr, design.effective_radius(dr))


# ---------------------------------------------------------------------------
# Torque-response coupler
# ---------------------------------------------------------------------------

def _coupler_root(geom: CouplerGeometry, t, xp):
    if np.any(abs(t) > HALF_PI + _ANGLE_SLACK):
        raise DomainError("coupler angle must satisfy |theta_d| <= pi/2")
    s = geom.crank_length * xp.sin(t)
    arg = geom.slider_length**2 - s * s
    if np.any(arg < 0):
        raise DomainError(
            "slider cannot reach this crank angle (l_a*sin(theta_d) > l_b)"
        )
    return xp.sqrt(arg)


def coupler_delta_r(geom: CouplerGeometry, theta_d):
    """Radius variation produced by the coupler at drivetrain angle ``theta_d``."""
    xp, t = _ns(theta_d)
    root = _coupler_root(geom, t, xp)
    la, lb = geom.crank_length, geom.slider_length
    return _out((la + lb) - (la * xp.cos(t) + root))


def coupler_jacobian(geom: CouplerGeometry, theta_d):
    """d(delta_r)/d(theta_d), mm/rad. Odd in ``theta_d``."""
    xp, t = _ns(theta_d)
    root = _coupler_root(geom, t, xp)
    la = geom.crank_length
    if np.any(root == 0.0):
        raise SingularConfigurationError("slider is perpendicular to the crank; Jacobian is unbounded")
    if np.any(root < 1e-6 * geom.slider_length):
        warnings.warn("coupler is at a near-singular configuration", NearSingularWarning,
                      stacklevel=2)
    st = xp.sin(t)
    return _out(la * st + la * la * st * xp.cos(t) / root)


def coupler_theta_for_delta_r(geom: CouplerGeometry, delta_r: float) -> float:
    """Inverse of :func:`coupler_delta_r` on the monotone branch, by bisection."""
    top = geom.max_angle
    reach = coupler_delta_r(geom, top)
    if delta_r < 0 or delta_r > reach + 1e-12:
        raise OutOfRangeError(
            f"delta_r = {delta_r} mm is outside the reachable range [0, {reach:.6g}] mm"
        )
    if delta_r == 0:
        return 0.0
    if delta_r >= reach:
        return top
    return bisect(lambda t: coupler_delta_r(geom, t) - delta_r, 0.0, top,
                  xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


# ---------------------------------------------------------------------------
# Connecting strut
# ---------------------------------------------------------------------------

def strut_angle_for_delta_r(strut: StrutGeometry, delta_r):
    """Strut link angle for a radius variation: arccos((2 r_s - dr) / (2 r_s))."""
    xp, d = _ns(delta_r)
    if np.any(d < 0) or np.any(d > 2.0 * strut.link_length):
        raise DomainError(f"delta_r must lie in [0, {2.0 * strut.link_length}] mm")
    # half-angle form of the arccos; well conditioned near zero
    half = xp.sqrt(d / (4.0 * strut.link_length))
    return 2.0 * (math.asin(half) if xp is math else np.arcsin(half))


def strut_delta_r(strut: StrutGeometry, theta_s):
    """Forward strut kinematics, 2 r_s (1 - cos theta_s)."""
    xp, t = _ns(theta_s)
    return _out(2.0 * strut.link_length * (1.0 - xp.cos(t)))


def strut_jacobian(strut: StrutGeometry, theta_s):
    """d(delta_r)/d(theta_s) = 2 r_s sin(theta_s), mm/rad."""
    xp, t = _ns(theta_s)
    if np.any(abs(t) > HALF_PI + _ANGLE_SLACK):
        raise DomainError("strut angle must satisfy |theta_s| <= pi/2")
    return _out(2.0 * strut.link_length * xp.sin(t))


def spring_resistance_force(design: WheelDesign, delta_r):
    """Radial force of the springs seen through the strut, N.

    At zero stroke the 0/0 ratio is replaced by its limit k_s / (2 r_s)
    (zero if the spring axis has backlash).
    """
    theta = strut_angle_for_delta_r(design.strut, delta_r)
    k = design.spring.total_stiffness
    rs = design.strut.link_length
    b = design.backlash
    if isinstance(theta, float):
        if theta < 1e-6:
            return k * (1.0 + theta * theta / 6.0) / (2.0 * rs) if b == 0.0 else 0.0
        return k * max(theta - b, 0.0) / (2.0 * rs * math.sin(theta))
    small = theta < 1e-6
    safe = np.where(small, 1.0, theta)
    if b == 0.0:
        ratio = np.where(small, 1.0 + theta * theta / 6.0, safe / np.sin(safe))
        return k * ratio / (2.0 * rs)
    wound = np.maximum(theta - b, 0.0)
    return np.where(small, 0.0, k * wound / (2.0 * rs * np.sin(safe)))


def min_spring_force(design: WheelDesign) -> float:
    """Spring force at zero stroke; F_s is non-decreasing so this is its minimum."""
    return spring_resistance_force(design, 0.0)


# ---------------------------------------------------------------------------
# Torque / force mapping
# ---------------------------------------------------------------------------

def input_torque(design: WheelDesign, theta_d):
    """Input torque that holds the wheel in equilibrium at ``theta_d``, N·mm."""
    dr = coupler_delta_r(design.coupler, theta_d)
    j = coupler_jacobian(design.coupler, theta_d)
    return _out(j * (spring_resistance_force(design, dr) - design.weight_force))


def output_force(tau_in, effective_radius):
    """Tangential force at the contact point, N."""
    xp, r = _ns(effective_radius)
    if np.any(r <= 0):
        raise DomainError("effective radius must be positive")
    return _out(_ns(tau_in)[1] / r)


def contraction_force(design: WheelDesign, theta_d: float, tau_in: float) -> float:
    """Radial force the coupler exerts for a given input torque, N."""
    j = coupler_jacobian(design.coupler, theta_d)
    if j == 0.0:
        raise SingularConfigurationError(
            "coupler Jacobian is zero at theta_d = 0; use the threshold torque instead"
        )
    return float(tau_in) / j
