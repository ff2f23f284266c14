import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from helpers import SEEDS, random_perturbation, random_system
from pwmelnikov.errors import EnergyOutOfRange, LogSingularity, NoCrossing, TangentialCrossing
from pwmelnikov.flows import (
    ZoneFlow,
    crossing_time,
    flight_time,
    orbit_arcs,
    state_function,
    trajectory_rows,
    two_zone_central_angle,
    zone_flow_at,
    zone_velocity_at,
)
from pwmelnikov.model import classify, example_system


def ode_oracle(flow, start, t):
    sol = solve_ivp(
        lambda _, u: flow.field(u[0], u[1]), (0.0, t), start, rtol=1e-12, atol=1e-12, method="DOP853"
    )
    return sol.y[:, -1]


def test_flow_at_zero_time_is_identity():
    sys = example_system()
    for z in ("L", "C", "R"):
        fl = ZoneFlow.from_system(sys, z)
        assert np.allclose(zone_flow_at(fl, (0.3, -0.7), 0.0), (0.3, -0.7), rtol=0, atol=1e-15)


@pytest.mark.parametrize("seed", SEEDS)
def test_group_law_and_ode_agreement(seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng)
    pert = random_perturbation(rng)
    for z in ("L", "C", "R"):
        fl = ZoneFlow.from_system(sys, z, pert, 0.05)
        x0 = rng.uniform(-1, 1, 2)
        s, t = rng.uniform(0, 1.5, 2)
        once = zone_flow_at(fl, x0, s + t)
        twice = zone_flow_at(fl, zone_flow_at(fl, x0, s), t)
        assert np.allclose(once, twice, rtol=1e-11, atol=1e-11)
        assert np.allclose(once, ode_oracle(fl, x0, s + t), rtol=1e-9, atol=1e-9)


def test_singular_matrix_uses_augmented_flow():
    # x' = y, y' = 1: x = t^2 / 2, y = t from the origin
    fl = ZoneFlow("C", 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)
    assert fl.equilibrium is None
    assert np.allclose(zone_flow_at(fl, (0.0, 0.0), 2.0), (2.0, 2.0), atol=1e-14)
    st_ = state_function(fl, (0.0, 0.0))
    assert np.allclose(st_(2.0), (2.0, 2.0, 2.0, 1.0), atol=1e-14)


@pytest.mark.parametrize("seed", SEEDS)
def test_state_function_matches_vector_flow(seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng)
    for z in ("L", "C", "R"):
        fl = ZoneFlow.from_system(sys, z, random_perturbation(rng), 0.01)
        x0 = rng.uniform(-1, 1, 2)
        state = state_function(fl, x0)
        for t in rng.uniform(0, 3, 5):
            x, y, vx, vy = state(t)
            assert np.allclose((x, y), zone_flow_at(fl, x0, t), rtol=1e-13, atol=1e-13)
            assert np.allclose((vx, vy), zone_velocity_at(fl, x0, t), rtol=1e-13, atol=1e-13)
            assert np.allclose((vx, vy), fl.field(x, y), rtol=1e-12, atol=1e-12)


def test_perturbed_field_coefficients():
    sys = example_system()
    from pwmelnikov.model import Perturbation

    pert = Perturbation(p10=1.0, p01=2.0, p00=3.0, q10=4.0, q01=5.0, q00=6.0)
    fl = ZoneFlow.from_system(sys, "R", pert, 0.5)
    # R field (y, x - 4) plus eps (x + 2y + 3, 4x + 5y + 6)
    assert fl.field(1.0, 1.0) == pytest.approx((1 + 0.5 * 6, -3 + 0.5 * 15))


def test_right_arc_of_example_system():
    # R: x' = y, y' = x - 4, saddle at (4, 0); from (1, h) the orbit returns to (1, -h)
    sys = example_system()
    h = 2.5
    fl = ZoneFlow.from_system(sys, "R")
    t = crossing_time(fl, (1.0, h), 1.0, "entering")
    assert t == pytest.approx(math.log((3 + h) / (3 - h)), rel=1e-12)
    assert t == pytest.approx(math.log(11.0), rel=1e-12)
    assert np.allclose(zone_flow_at(fl, (1.0, h), t), (1.0, -h), atol=1e-12)


@pytest.mark.parametrize("seed", SEEDS)
def test_orbit_closes_and_conserves_energy(seed):
    sys = random_system(np.random.default_rng(seed))
    lo, hi = classify(sys).J0
    for h in np.linspace(lo, hi, 7)[1:-1]:
        arcs = orbit_arcs(sys, h)
        assert [a.zone for a in arcs] == ["R", "C", "L", "C"]
        f1 = math.sqrt(h * h - 4 * sys.beta_C)
        assert np.allclose(arcs[0].end, (1.0, -h), atol=1e-10)
        assert np.allclose(arcs[1].end, (-1.0, -f1), atol=1e-10)
        assert np.allclose(arcs[2].end, (-1.0, f1), atol=1e-10)
        assert np.allclose(arcs[3].end, (1.0, h), atol=1e-10)
        rows = trajectory_rows(sys, arcs, 100)
        for zone in ("R", "C", "L"):
            H = np.array([r[4] for r in rows if r[3] == zone])
            assert np.ptp(H) < 1e-10 * (1 + np.max(np.abs(H)))


@pytest.mark.parametrize("seed", SEEDS)
def test_crossing_times_match_closed_form_flight_times(seed):
    sys = random_system(np.random.default_rng(seed))
    geo = classify(sys)
    lo, hi = geo.J0
    for h in np.linspace(lo, hi, 12)[1:-1]:
        arcs = orbit_arcs(sys, h)
        for arc, name in zip(arcs, ("R", "C1", "L", "C2")):
            assert arc.duration == pytest.approx(flight_time(sys, name, h), rel=1e-10, abs=1e-10)
    lo, hi = geo.J1
    for h in np.linspace(lo, hi, 6)[1:-1]:
        arcs = orbit_arcs(sys, h, zones=2)
        assert arcs[1].duration == pytest.approx(flight_time(sys, "C-full", h), rel=1e-10)


def test_two_zone_time_beyond_unit_offset():
    # beta_C > 1: the central center lies outside the strip, the angle is below pi
    sys = example_system(beta_C=2.0, beta_L=4.0, beta_R=-5.0)
    for h in (0.3, 1.0, 2.0):
        arcs = orbit_arcs(sys, h, zones=2)
        assert arcs[1].duration == pytest.approx(float(two_zone_central_angle(2.0, h)), rel=1e-10)
        assert arcs[1].duration < math.pi
        # the arccos form would give 2 pi - arccos(...) > pi here
        assert arcs[1].duration != pytest.approx(2 * math.pi - math.acos((1 - 2.0) / math.hypot(h, 1 - 2.0)))


def test_flight_time_limits():
    sys = example_system(beta_C=0.5)
    assert flight_time(sys, "C-full", 1e-12) == pytest.approx(2 * math.pi, rel=1e-9)
    assert flight_time(sys, "R", 1e-9) == pytest.approx(0.0, abs=1e-8)
    # f1 ~ sqrt(rounding) at the tangency, so only ~1e-8 accuracy is available
    h0 = 2 * math.sqrt(0.5)
    assert flight_time(sys, "C1", h0) == pytest.approx(math.acos((0.5 - 1) / (0.5 + 1)), rel=1e-7)
    with pytest.raises(LogSingularity):
        flight_time(sys, "R", sys.tau_R)
    with pytest.raises(EnergyOutOfRange):
        flight_time(sys, "C1", 0.1)
    with pytest.raises(ValueError):
        flight_time(sys, "X", 1.0)


def test_no_crossing_beyond_separatrix():
    sys = example_system()
    fl = ZoneFlow.from_system(sys, "R")
    with pytest.raises(NoCrossing):
        crossing_time(fl, (1.0, 3.2), 1.0, "entering")


def test_tangential_crossing_detected():
    # C: x' = y; from (-1, 0) the orbit is tangent to x = -1
    sys = example_system(beta_C=0.5)
    fl = ZoneFlow.from_system(sys, "C")
    with pytest.raises(TangentialCrossing):
        crossing_time(fl, (-1.0, 0.0), -1.0, "leaving")


def test_direction_argument_checked():
    fl = ZoneFlow.from_system(example_system(), "C")
    with pytest.raises(ValueError):
        crossing_time(fl, (0.0, 1.0), 1.0, "sideways")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.05, 0.95))
def test_crossing_lands_on_line_with_requested_direction(seed, t):
    sys = random_system(np.random.default_rng(seed))
    lo, hi = classify(sys).J0
    h = lo + t * (hi - lo)
    for arc, line, sign in zip(orbit_arcs(sys, h), (1, -1, -1, 1), (-1, -1, 1, 1)):
        end = zone_flow_at(arc.flow, arc.start, arc.duration)
        assert abs(end[0] - line) < 1e-10
        assert zone_velocity_at(arc.flow, arc.start, arc.duration)[0] * sign > 0
