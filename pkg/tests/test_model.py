import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import SEEDS, random_system, system_from_taus
from pwmelnikov.errors import (
    CenterConditionViolated,
    CenterOffsetNotPositive,
    EnergyOutOfRange,
    SaddleConditionViolated,
    TangencyMismatch,
)
from pwmelnikov.model import (
    CenterKind,
    Perturbation,
    PortraitClass,
    RawSystem,
    classify,
    crossing_points,
    example_system,
    normalize,
    raw_from_normal,
    reflect,
    reflect_perturbation,
    validate,
)


def raw_system(rng):
    """A raw system with a clockwise center and matched tangency terms."""
    aC = rng.uniform(-1, 1)
    bC = rng.uniform(0.5, 3)
    cC = -(aC * aC + rng.uniform(0.2, 2)) / bC
    alC = rng.uniform(-1, 1)
    kw = dict(a_C=aC, b_C=bC, c_C=cC, alpha_C=alC, beta_C=rng.uniform(-2, 2))
    for z in ("L", "R"):
        a, b = rng.uniform(-1, 1), rng.uniform(0.5, 2)
        c = rng.uniform(0.1, 2)
        kw.update({f"a_{z}": a, f"b_{z}": b, f"c_{z}": c, f"beta_{z}": rng.uniform(-3, 3)})
    kw["alpha_L"] = (kw["a_L"] * bC + kw["b_L"] * (alC - aC)) / bC
    kw["alpha_R"] = (-kw["a_R"] * bC + kw["b_R"] * (aC + alC)) / bC
    return RawSystem(**kw)


def raw_field(raw, z, x, y):
    a, b, c, al, be = raw.zone(z)
    return np.array([b * y + a * x + al, c * x - a * y + be])


def normal_field(sys, z, x, y):
    a, b, c, al, be = sys.zone(z)
    return np.array([b * y + a * x + al, c * x - a * y + be])


@pytest.mark.parametrize("seed", SEEDS)
def test_normalize_maps_fields_by_the_stated_change_of_variables(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        raw = raw_system(rng)
        aC, bC, cC, alC, _ = raw.zone("C")
        w = math.sqrt(-aC * aC - bC * cC)
        try:
            sys = normalize(raw)
        except CenterOffsetNotPositive:
            continue
        for z, x in (("L", -1.5), ("C", 0.3), ("R", 1.7)):
            y = rng.uniform(-2, 2)
            xd, yd = raw_field(raw, z, x, y)
            Y = (aC * x + bC * y + alC) / w
            want = np.array([xd / w, (aC * xd + bC * yd) / w**2])
            assert np.allclose(normal_field(sys, z, x, Y), want, atol=1e-12, rtol=1e-12)


def test_normalize_scales_central_zone():
    # b_C = 4, c_C = -1: omega_C = 2, Y = 2 y, tau = 2 t.
    # Central: dx/dtau = 4 y / 2 = Y, dY/dtau = 2 (-x + 3) / 2 = -x + 3.
    # Right: T = diag(1, 2), T A T^-1 / 2 = [[0, 1/4], [1, 0]], T c / 2 = (0, -4).
    raw = RawSystem(
        a_L=0.0, b_L=1.0, c_L=1.0, alpha_L=0.0, beta_L=1.0,
        a_C=0.0, b_C=4.0, c_C=-1.0, alpha_C=0.0, beta_C=3.0,
        a_R=0.0, b_R=1.0, c_R=1.0, alpha_R=0.0, beta_R=-4.0,
    )
    sys = normalize(raw)
    assert sys.beta_C == pytest.approx(3.0, rel=1e-15)
    assert sys.b_R == pytest.approx(0.25, rel=1e-15)
    assert sys.c_R == pytest.approx(1.0, rel=1e-15)
    assert sys.beta_R == pytest.approx(-4.0, rel=1e-15)


def test_normalize_identity_and_idempotence():
    sys = example_system(0.7, 3.0, -4.0)
    assert normalize(raw_from_normal(sys)) == sys
    rng = np.random.default_rng(3)
    for _ in range(10):
        try:
            once = normalize(raw_system(rng))
        except CenterOffsetNotPositive:
            continue
        twice = normalize(raw_from_normal(once))
        for k, v in once.as_dict().items():
            assert twice.as_dict()[k] == pytest.approx(v, rel=1e-13, abs=1e-13)


def test_normalize_rejects_bad_raw_systems():
    good = raw_from_normal(example_system())
    d = good.__dict__.copy()
    with pytest.raises(CenterConditionViolated):
        normalize(RawSystem(**{**d, "b_C": -1.0}))
    with pytest.raises(SaddleConditionViolated):
        normalize(RawSystem(**{**d, "c_R": -2.0}))
    with pytest.raises(TangencyMismatch):
        normalize(RawSystem(**{**d, "alpha_L": d["alpha_L"] + 1e-6}))
    with pytest.raises(CenterOffsetNotPositive):
        normalize(RawSystem(**{**d, "beta_C": -1.0}))


def test_validate_rejects_nonpositive_center_offset():
    with pytest.raises(CenterOffsetNotPositive):
        validate(example_system(beta_C=0.0))


def test_classify_example_system():
    sys = example_system(beta_C=1.0, beta_L=3.0, beta_R=-4.0)
    g = classify(sys)
    assert g.omega_R == 1.0 and g.tau_R == 3.0
    assert g.J0 == (2.0, 3.0) and g.J1 == (0.0, 2.0)
    assert g.portrait_class is PortraitClass.HOMOCLINIC_BOUNDED
    assert g.center_kind is CenterKind.BOUNDARY
    # right saddle at (4, 0), left saddle at (-1 - beta_L, beta_L)
    for z, pt in (("R", (4.0, 0.0)), ("L", (-4.0, 3.0))):
        assert np.allclose(normal_field(sys, z, *pt), 0.0)


def test_classify_boundaries():
    sys = example_system(beta_C=2.25, beta_L=3.0, beta_R=-4.0)  # beta_C = tau_R^2 / 4
    g = classify(sys)
    assert g.portrait_class is PortraitClass.NO_THREE_ZONE_ANNULUS
    assert g.J0 is None and g.J1 == (0.0, 3.0)
    het = example_system(beta_C=1.0, beta_L=math.sqrt(5.0), beta_R=-4.0)
    assert classify(het).portrait_class is PortraitClass.HETEROCLINIC_BOUNDED
    left = example_system(beta_C=1.0, beta_L=2.0, beta_R=-4.0)
    g = classify(left)
    assert g.portrait_class is PortraitClass.LEFT_HOMOCLINIC_BOUNDED
    assert g.J0[1] == pytest.approx(math.sqrt(4.0 + 4.0))
    assert classify(example_system(0.4)).center_kind is CenterKind.REAL
    assert classify(example_system(1.4)).center_kind is CenterKind.VIRTUAL


@pytest.mark.parametrize("seed", SEEDS)
def test_reflection_swaps_separatrix_ordinates(seed):
    sys = random_system(np.random.default_rng(seed))
    ref = reflect(sys)
    assert ref.tau_R == pytest.approx(sys.tau_L, rel=1e-13)
    assert ref.tau_L == pytest.approx(sys.tau_R, rel=1e-13)
    assert reflect(ref) == sys
    p = Perturbation.from_array(np.arange(18.0))
    assert reflect_perturbation(reflect_perturbation(p)) == p


def test_crossing_points_examples():
    sys = example_system(beta_C=1.0)
    c = crossing_points(sys, 2.5)
    assert c.A2 == (-1.0, -1.5) and c.A3 == (-1.0, 1.5)
    c = crossing_points(sys, 2.0)
    assert c.A2 == c.A3 == (-1.0, 0.0)
    b = crossing_points(sys, 1.0, zones=2)
    assert b.B == (1.0, 1.0) and b.B1 == (1.0, -1.0)
    with pytest.raises(EnergyOutOfRange):
        crossing_points(sys, 3.5)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.0, 1.0))
def test_crossing_points_share_energy_levels(seed, t):
    sys = random_system(np.random.default_rng(seed))
    lo, hi = classify(sys).J0
    h = lo + t * (hi - lo)
    c = crossing_points(sys, h)
    H = sys.hamiltonian
    pairs = (("R", c.A, c.A1), ("C", c.A1, c.A2), ("L", c.A2, c.A3), ("C", c.A3, c.A))
    for z, p, q in pairs:
        assert abs(H(z, *p) - H(z, *q)) < 1e-12 * (1 + abs(H(z, *p)))


def test_perturbation_algebra():
    p = Perturbation(r10=1.0, q00=2.0)
    q = Perturbation(u01=3.0)
    assert (p + q).u01 == 3.0 and (2 * p).q00 == 4.0
    assert Perturbation().is_zero() and not p.is_zero()
    assert Perturbation.from_array(p.to_array()) == p
    assert p.zone("R") == (0.0, 0.0, 0.0, 0.0, 0.0, 2.0)


def test_system_from_taus_helper():
    sys = system_from_taus(0.2, 1.1, 0.7, 1.5, 0.5, -0.3, 0.9, 1.2, 2.8)
    assert sys.tau_L == pytest.approx(1.5) and sys.tau_R == pytest.approx(2.8)
