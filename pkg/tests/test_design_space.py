import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from morph_wheel import (
    SegmentConfig,
    WheelDesign,
    check_coupler_constraints,
    displacement_amplitude,
    min_friction_coefficient,
    min_segment_count,
    stiffness_sweep,
    strut_inner_radius_bound,
    weight_feasibility,
)
from morph_wheel.design_space import (
    REFERENCE_STRUT_BOUND,
    cond1_upper_closed_form,
    stroke_output_force,
)
from morph_wheel.errors import DomainError

D = WheelDesign()

# mpmath oracle on the slope of tau_in: condition 2 holds for 2.45057 < W < 3.00075 kg,
# so the first and last grid points inside on linspace(0.2, 4.0, 100) are these
BAND_LO = 2.4646464646464645
BAND_HI = 2.963636363636364
COND2_CRITICAL_W = 2.450568703267086


# -- segments ---------------------------------------------------------------

@pytest.mark.parametrize("n, rho, pct", [
    (6, 2.0, 3.4074173710931688), (4, 2.0, 7.612046748871322),
    (5, 2.0, 4.894348370484647), (7, 2.0, 2.5072087818176324),
])
def test_amplitude_matches_gap_geometry(n, rho, pct):
    a, a_hat = displacement_amplitude(SegmentConfig(n, rho))
    assert a_hat == pytest.approx(oracles.displacement_amplitude_pct(n, rho), rel=1e-12)
    assert a_hat == pytest.approx(pct, rel=1e-12)
    assert a == pytest.approx(0.8 * a_hat)


def test_amplitude_zero_without_radius_change():
    assert displacement_amplitude(SegmentConfig(6, 1.0)) == (0.0, 0.0)


@given(st.integers(3, 40), st.floats(1.0, 4.0))
def test_amplitude_monotone(n, rho):
    base = displacement_amplitude(SegmentConfig(n, rho))[1]
    assert displacement_amplitude(SegmentConfig(n + 1, rho))[1] <= base
    assert displacement_amplitude(SegmentConfig(n, rho + 0.1))[1] >= base


@pytest.mark.parametrize("rho, limit, n", [(2.0, 5.0, 5), (2.0, 3.0, 7), (1.0, 0.1, 3)])
def test_min_segment_count(rho, limit, n):
    assert min_segment_count(rho, limit) == n


@pytest.mark.parametrize("rho, limit", [(2.0, 5.0), (2.0, 3.0), (1.5, 1.0), (3.0, 8.0)])
def test_min_segment_count_exhaustive(rho, limit):
    ok = [n for n in range(3, 21) if oracles.displacement_amplitude_pct(n, rho) <= limit]
    assert min_segment_count(rho, limit) == ok[0]


@pytest.mark.parametrize("kw", [dict(n=2, rho_c=2.0), dict(n=6, rho_c=0.9), dict(n=6.5, rho_c=2.0)])
def test_segment_config_invariants(kw):
    with pytest.raises(DomainError):
        SegmentConfig(**kw)


def test_min_segment_count_needs_positive_limit():
    with pytest.raises(DomainError):
        min_segment_count(2.0, 0.0)


# -- coupler and strut sizing -----------------------------------------------

def test_reference_coupler_passes():
    rep = check_coupler_constraints(30, 40, 80, 10, 40)
    assert rep.passed and rep.violated == []
    assert rep["singularity_avoidance"].margin == 20.0
    assert rep["geometric_feasibility"].margin == 0.0


def test_long_slider_names_singularity():
    rep = check_coupler_constraints(30, 65, 80, 10, 40)
    assert "singularity_avoidance" in rep.violated
    assert rep["singularity_avoidance"].margin == -5.0


@pytest.mark.parametrize("args, name", [
    ((30, 61, 200, 10, 40), "singularity_avoidance"),
    ((30, 60, 200, 10, 40), "singularity_avoidance"),
    ((30, 40, 75, 10, 40), "geometric_feasibility"),
    ((30, 35, 80, 10, 40), "required_displacement"),
    ((30, 40, 80, 12, 40), "geometric_feasibility"),
])
def test_single_violation_detected(args, name):
    rep = check_coupler_constraints(*args)
    assert not rep.passed
    assert rep.violated == [name]
    assert rep[name].margin <= 0


def test_constraint_inputs_positive():
    with pytest.raises(DomainError):
        check_coupler_constraints(0, 40, 80)


def test_strut_bound_reference_geometry():
    s = strut_inner_radius_bound(math.radians(74), 5, 40)
    assert s.min_link_length == pytest.approx(45 / (2 * (1 - math.cos(math.radians(74)))), rel=1e-14)
    assert s.min_link_length == pytest.approx(31.06, abs=0.01)
    assert 2 * s.min_link_length * (1 - math.cos(math.radians(74))) >= 45 - 1e-12
    assert s.reference_link_length == REFERENCE_STRUT_BOUND
    assert not s.reference_satisfies


def test_strut_bound_right_angle():
    assert strut_inner_radius_bound(math.pi / 2, 0, 50).min_link_length == pytest.approx(25.0)


def test_strut_bound_angle_domain():
    with pytest.raises(DomainError):
        strut_inner_radius_bound(0.0, 5, 40)


# -- weight feasibility -----------------------------------------------------

@pytest.fixture(scope="module")
def region():
    return weight_feasibility(D, 0.2, 4.0, 100)


def test_feasible_band_matches_oracle(region):
    assert region.lower_bound == BAND_LO
    assert region.upper_bound == BAND_HI
    grid = [p.W_w for p in region.parameter_grid]
    assert grid == sorted(grid) and len(grid) == 100
    assert grid[58] < COND2_CRITICAL_W < grid[59]


def test_band_is_extremes_of_feasible_points(region):
    ok = [p.W_w for p in region.parameter_grid if p.cond1_ok and p.cond2_ok]
    assert (min(ok), max(ok)) == (region.lower_bound, region.upper_bound)


def test_light_wheel_fails_condition_2(region):
    p = min(region.parameter_grid, key=lambda p: abs(p.W_w - 0.5))
    assert not p.cond2_ok
    single = weight_feasibility(D, 0.5, 0.5)
    assert not single.parameter_grid[0].cond2_ok


def test_condition_1_upper_bound(region):
    closed = cond1_upper_closed_form(D)
    assert closed == pytest.approx(oracles.K_RAD / (2 * oracles.RS * oracles.G), rel=1e-14)
    assert closed == pytest.approx(3.0007, abs=1e-4)
    assert region.cond1_upper <= closed < region.cond1_upper + 4.0 / 99


def test_degenerate_range_single_point():
    r = weight_feasibility(D, 2.7, 2.7)
    assert len(r.parameter_grid) == 1
    assert r.lower_bound == r.upper_bound == 2.7


def test_feasibility_preconditions():
    with pytest.raises(DomainError):
        weight_feasibility(D, 3.0, 2.0)
    with pytest.raises(DomainError):
        weight_feasibility(D, 1.0, 2.0, grid_points=5)


def test_refinement_never_adds_feasible_points():
    coarse = weight_feasibility(D, 0.2, 4.0, 100, domain_points=100)
    fine = weight_feasibility(D, 0.2, 4.0, 100, domain_points=2000)
    for a, b in zip(coarse.parameter_grid, fine.parameter_grid):
        assert not (b.feasible and not a.feasible)


def test_feasibility_table_schema(region):
    t = region.to_sweep()
    assert t.names[:4] == ["W_w_kg", "cond1_ok", "cond2_ok", "feasible"]
    assert len(t) == 100


# -- friction and stiffness -------------------------------------------------

def test_friction_at_heavy_wheel():
    t = min_friction_coefficient(D, [2.8])
    mu = t.column("mu_min")[0]
    assert mu == pytest.approx(0.4, abs=0.1)
    assert mu == pytest.approx(t.column("F_out_max_N")[0] / (2.8 * oracles.G))


def test_friction_definition_holds_on_grid():
    weights = [1.0, 1.8, 2.3, 2.8]
    t = min_friction_coefficient(D, weights)
    for w, mu in zip(weights, t.column("mu_min")):
        _, f = stroke_output_force(D.with_weight(w))
        assert np.all(mu * w * D.gravity >= f - 1e-12)
        assert mu > 0 and math.isfinite(mu)


def test_friction_vanishes_with_peak_torque():
    # the spring force peaks at full compression, so tau_in,max reaches zero
    # once the wheel weight balances it there
    w = float(oracles.spring_force(40.0)) / oracles.G
    mu = min_friction_coefficient(D, [w - 0.05, w - 1e-6, w]).column("mu_min")
    assert mu[0] > mu[1] > 0
    assert mu[1] < 1e-5 and mu[2] == pytest.approx(0.0, abs=1e-12)


def test_stiffness_sweep_monotone_and_nominal():
    k = np.linspace(10, 50, 20)
    t = stiffness_sweep(D, k)
    tau, f = np.array(t.column("tau_in_max_Nmm")), np.array(t.column("F_out_max_N"))
    assert np.all(np.diff(tau) > 0) and np.all(np.diff(f) > 0)
    nominal = stiffness_sweep(D, [D.spring.total_stiffness_deg]).column("F_out_max_N")[0]
    assert 12.24 * 0.8 <= nominal <= 12.24 * 1.2


def test_stiffness_linear_without_weight():
    d0 = D.with_weight(0.0)
    a, b = stiffness_sweep(d0, [20.0, 40.0]).column("tau_in_max_Nmm")
    assert b == pytest.approx(2 * a, rel=1e-14)


def test_stiffness_values_positive():
    with pytest.raises(DomainError):
        stiffness_sweep(D, [1.0, 0.0])
