"""
Mode switching of the wheel and quasi-static equilibrium solvers.

The decision tree is evaluated in order:

1. direct drive      if F_out > F_res
2. radius variation  if F_c > F_s - W_w*g
3. stall             otherwise

Everything here works on magnitudes, so a negative (reverse) drivetrain
angle or torque behaves exactly like its mirror image.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, InfeasibleDesignError
from .wheel_model import (
    WheelDesign,
    WheelState,
    coupler_delta_r,
    coupler_jacobian,
    input_torque,
    spring_resistance_force,
    wheel_state,
)

EQUILIBRIUM_TOL = 1e-6  # N·mm
MAX_ITER = 200
PRESCAN_POINTS = 200
_SCAN_POINTS = 257


class Mode(enum.Enum):
    DIRECT_DRIVE = "DirectDrive"
    RADIUS_VARIATION = "RadiusVariation"
    STALL = "Stall"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DecidingForces:
    F_out: float
    F_res: float
    F_c: float
    F_s: float
    W_w_force: float


@dataclass(frozen=True)
class ModeState:
    mode: Mode
    deciding_forces: DecidingForces


@dataclass(frozen=True)
class EquilibriumSolution:
    theta_d: float
    delta_r: float
    effective_radius: float
    converged: bool
    residual: float  # N·mm


@dataclass(frozen=True)
class DriveSolution:
    final_state: WheelState
    final_mode: ModeState
    tau_used: float  # N·mm
    F_out_achieved: float  # N


def classify_mode(design: WheelDesign, state: WheelState, tau_in: float,
                  F_res: float) -> ModeState:
    """Evaluate the decision tree for one applied torque and resistance."""
    if F_res < 0:
        raise DomainError("F_res must be non-negative")
    tau = abs(float(tau_in))
    f_out = tau / state.effective_radius
    f_s = spring_resistance_force(design, state.delta_r)
    w = design.weight_force
    j = abs(coupler_jacobian(design.coupler, state.theta_d))
    if j > 0.0:
        f_c = tau / j
    else:
        # zero Jacobian: the threshold torque is zero, any torque contracts
        f_c = math.inf if tau > 0.0 else 0.0
    if f_out > F_res:
        mode = Mode.DIRECT_DRIVE
    elif f_c > f_s - w:
        mode = Mode.RADIUS_VARIATION
    else:
        mode = Mode.STALL
    return ModeState(mode, DecidingForces(f_out, float(F_res), f_c, f_s, w))


def transformation_threshold_torque(design: WheelDesign, theta_d):
    """Smallest torque that starts radius variation at ``theta_d``."""
    return input_torque(design, theta_d)


def _check_monotone(design: WheelDesign) -> None:
    grid = np.linspace(0.0, design.theta_d_max, PRESCAN_POINTS)
    tau = input_torque(design, grid)
    if not np.all(np.diff(tau) > 0):
        raise InfeasibleDesignError(
            f"input torque is not strictly increasing over the stroke for "
            f"W_w = {design.wheel_weight} kg; equilibrium is not unique"
        )


def equilibrium_delta_r(design: WheelDesign, tau_applied: float,
                        bracket: tuple[float, float] | None = None) -> EquilibriumSolution:
    """Drivetrain angle at which the held torque equals ``tau_applied``.

    Torques beyond the fully compressed value return ``converged=False``
    with the state at the stroke cap.  A negative torque gives the mirrored
    (reverse direction) solution.
    """
    sign = -1.0 if tau_applied < 0 else 1.0
    tau = abs(float(tau_applied))
    top = design.theta_d_max
    tau_top = input_torque(design, top)

    def solution(theta, converged):
        st = wheel_state(design, sign * theta)
        res = sign * (input_torque(design, theta) - tau)
        return EquilibriumSolution(st.theta_d, st.delta_r, st.effective_radius,
                                   converged, res)

    if tau > tau_top:
        return solution(top, False)
    _check_monotone(design)
    if tau == 0.0:
        return solution(0.0, True)

    lo, hi = (0.0, top) if bracket is None else (abs(bracket[0]), abs(bracket[1]))
    lo, hi = min(lo, hi), max(lo, hi)

    def f(t):
        return input_torque(design, t) - tau

    if f(lo) > 0 or f(hi) < 0:
        raise DomainError("bracket does not enclose the equilibrium")
    theta = bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                   maxiter=MAX_ITER)
    return solution(theta, abs(f(theta)) < EQUILIBRIUM_TOL)


def _first_crossing(fun, lo: float, hi: float) -> float | None:
    """Smallest theta in (lo, hi] with fun(theta) >= 0, given fun(lo) < 0."""
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    vals = fun(grid)
    idx = np.flatnonzero(vals[1:] >= 0)
    if idx.size == 0:
        return None
    k = idx[0] + 1
    a, b = grid[k - 1], grid[k]
    # keep the upper end so the returned point satisfies fun >= 0
    for _ in range(MAX_ITER):
        if b - a <= 1e-15 + 4 * np.finfo(float).eps * b:
            break
        m = 0.5 * (a + b)
        if fun(m) >= 0:
            b = m
        else:
            a = m
    return float(b)


def _holding_torque(design: WheelDesign, state: WheelState, tau: float) -> float:
    """Largest torque <= ``tau`` that does not contract the wheel at ``state``."""
    j = abs(coupler_jacobian(design.coupler, state.theta_d))
    limit = spring_resistance_force(design, state.delta_r) - design.weight_force
    if j == 0.0:
        return 0.0 if limit >= 0 else tau
    tau = min(tau, j * limit)
    while tau > 0 and tau / j > limit:
        tau = float(np.nextafter(tau, 0.0))
    return max(tau, 0.0)


def drive_solution(design: WheelDesign, F_res: float, tau_max: float,
                   start_theta: float = 0.0,
                   allow_expansion: bool = False) -> DriveSolution:
    """Quasi-static response of the wheel to a resistance ``F_res``.

    The motor raises its torque from zero. The coupler winds up along the
    equilibrium curve (radius variation) until the torque it holds suffices
    to roll the wheel, at which point the wheel drives at the reduced
    radius. If the motor saturates first, or the stroke hits its cap, the
    wheel stalls.

    ``start_theta`` is the current drivetrain angle (its sign is ignored,
    the returned state is on the positive branch); without
    ``allow_expansion`` the wheel never relaxes below it.
    """
    if F_res < 0:
        raise DomainError("F_res must be non-negative")
    if not tau_max > 0:
        raise DomainError("tau_max must be positive")
    top = design.theta_d_max
    theta0 = 0.0 if allow_expansion else min(abs(float(start_theta)), top)

    def gap(t):
        # held torque minus the torque needed to roll
        return input_torque(design, t) - F_res * design.effective_radius(
            coupler_delta_r(design.coupler, t))

    def finish_drive(theta):
        st = wheel_state(design, theta)
        tau = F_res * st.effective_radius + EQUILIBRIUM_TOL
        if tau > tau_max:
            return finish_stall(theta, tau_max)
        mode = classify_mode(design, st, tau, F_res)
        return DriveSolution(st, mode, tau, tau / st.effective_radius)

    def finish_stall(theta, tau):
        st = wheel_state(design, theta)
        tau = _holding_torque(design, st, tau)
        mode = classify_mode(design, st, tau, F_res)
        return DriveSolution(st, mode, tau, tau / st.effective_radius)

    if gap(theta0) >= 0:
        return finish_drive(theta0)
    if theta0 >= top:
        return finish_stall(top, tau_max)

    theta_eq = _first_crossing(gap, theta0, top)
    theta_sat = None
    if input_torque(design, theta0) >= tau_max:
        theta_sat = theta0
    else:
        theta_sat = _first_crossing(lambda t: input_torque(design, t) - tau_max,
                                    theta0, top)
    if theta_sat is not None and (theta_eq is None or theta_sat <= theta_eq):
        return finish_stall(theta_sat, tau_max)
    if theta_eq is None:
        return finish_stall(top, tau_max)
    return finish_drive(theta_eq)
