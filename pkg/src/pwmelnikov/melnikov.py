"""First-order Melnikov functions of the three-zone system.

``M0`` lives on the three-zone energy interval J0 and ``M1`` on the
two-zone interval J1. Both are given in closed form as combinations of a
fixed function basis with coefficients linear in the perturbation, and
both are cross-checked by a quadrature oracle that integrates
``g dx - f dy`` along the exact unperturbed arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import EnergyOutOfRange, QuadratureNonConvergence
from .flows import orbit_arcs, state_function
from .model import AnnulusGeometry, Perturbation, SystemParameters, classify

DOMAIN_MARGIN = 1e-12
REMOVABLE_GAP = 1e-13
BRANCHES = ("geometric", "arccos")


@dataclass(frozen=True)
class BasisFunctions:
    """Function basis used by the closed forms, vectorized in ``h``.

    ``f3`` and the arccos in ``f0C`` are evaluated through the exact
    sine/cosine pair of the central half arc, which is the principal
    branch of the arccos and avoids the loss of accuracy of sqrt(1 - f4^2).
    """

    beta_C: float
    tau_R: float
    tau_L: float

    def denom(self, h):
        return h * h + (self.beta_C - 1.0) ** 2

    def f1(self, h):
        return np.sqrt(np.maximum(h * h - 4.0 * self.beta_C, 0.0))

    def f2(self, h):
        b = self.beta_C
        return -(h * h + 2.0 - h * self.f1(h) - 2.0 * b) / self.denom(h)

    def f3(self, h):
        b = self.beta_C
        return ((1.0 - b) * self.f1(h) + (1.0 + b) * h) / self.denom(h)

    def f4(self, h):
        b = self.beta_C
        return (h * self.f1(h) - 1.0 + b * b) / self.denom(h)

    def half_angle(self, h):
        b = self.beta_C
        f1 = self.f1(h)
        return np.arctan2((1.0 - b) * f1 + (1.0 + b) * h, h * f1 - 1.0 + b * b)

    def f0R(self, h):
        h = np.asarray(h, dtype=float)
        t = self.tau_R
        gap = t - h
        safe = np.where(gap > REMOVABLE_GAP, gap, 1.0)
        val = -gap * (h + t) * np.log((h + t) / safe)
        return np.where(gap > REMOVABLE_GAP, val, 0.0)

    def f0L(self, h):
        t = self.tau_L
        f1 = self.f1(h)
        return (f1 * f1 - t * t) * np.log((f1 + t) / (t - f1))

    def f0C(self, h):
        return self.denom(h) * self.half_angle(h)

    def two_zone_angle(self, h, branch: str = "geometric"):
        """Central flight time of the two-zone orbit.

        ``geometric`` is the clockwise angle actually swept, valid for
        every ``beta_C > 0``. ``arccos`` is ``2 pi - arccos(...)``, which
        equals it for ``beta_C <= 1`` only.
        """
        b = self.beta_C
        if branch == "geometric":
            return 2.0 * np.pi - 2.0 * np.arctan2(h, 1.0 - b)
        if branch == "arccos":
            arg = (1.0 - h * h - 2.0 * b + b * b) / self.denom(h)
            return 2.0 * np.pi - np.arccos(np.clip(arg, -1.0, 1.0))
        raise ValueError(f"unknown branch {branch!r}")

    def f1C(self, h, branch: str = "geometric"):
        return self.denom(h) * self.two_zone_angle(h, branch)


def basis_for(sys: SystemParameters) -> BasisFunctions:
    return BasisFunctions(sys.beta_C, sys.tau_R, sys.tau_L)


@dataclass(frozen=True)
class MelnikovCoefficients:
    """Arc coefficients ``alpha_1..alpha_27`` and assembled ``k`` table.

    ``k[(i, j)]`` multiplies ``h**j`` times the i-th basis product.
    """

    alpha: tuple[float, ...]
    k: dict

    def a(self, i: int) -> float:
        return self.alpha[i - 1]


def melnikov_coefficients(sys: SystemParameters, pert: Perturbation) -> MelnikovCoefficients:
    """Closed-form coefficient tables for ``sys`` and ``pert``."""
    b = sys.beta_C
    wR, wL, tR, tL = sys.omega_R, sys.omega_L, sys.tau_R, sys.tau_L
    bR, bL = sys.b_R, sys.b_L
    P = pert
    uv = P.u01 + P.v10
    ud = P.u10 - P.v01
    us = P.u10 + P.v01
    g_c = P.v00 + P.v10 * b
    f_c = P.u00 + P.u10 * b
    q = 1.0 + 6.0 * b + b * b
    a = [0.0] * 28
    # right arc A -> A1
    a[1] = (2.0 * (P.p00 + P.p10) * wR + bR * (P.p10 + P.q01) * tR) / wR
    a[2] = bR / (2.0 * wR) * (P.p10 + P.q01)
    # central arc A1 -> A2
    a[3] = -(b - 1.0) * g_c
    a[4] = f_c
    a[5] = 0.5 * ud * (b - 1.0) ** 2
    a[6] = uv * (b - 1.0)
    a[7] = -0.5 * ud
    a[8] = -(b - 1.0) * f_c
    a[9] = -g_c
    a[10] = 0.5 * (-P.u01 - P.v10 * (b - 1.0) ** 2 + 2.0 * P.u01 * b - P.u01 * b * b)
    a[11] = ud * (b - 1.0)
    a[12] = 0.5 * uv
    a[13] = 0.5 * us
    # left arc A2 -> A3
    a[14] = (2.0 * (P.r10 - P.r00) * wL + bL * (P.r10 + P.s01) * tL) / wL
    a[15] = bL / (2.0 * wL) * (P.r10 + P.s01)
    # central arc A3 -> A
    a[16] = -(1.0 + b) * g_c
    a[17] = -f_c
    a[18] = -(1.0 + b) * f_c
    a[19] = g_c
    a[20] = -0.5 * uv * q
    a[21] = 0.5 * uv
    a[22] = -ud * (1.0 + b)
    a[23] = 0.5 * ud * q
    a[24] = -0.5 * ud
    a[25] = -uv * (1.0 + b)
    # central arc of two-zone orbits
    a[26] = 2.0 * P.u00 + ud + us * b
    a[27] = 0.5 * us
    k = {
        (0, 0): a[1],
        (1, 0): bR * (a[3] + a[16]), (1, 1): bR * a[4],
        (2, 0): bR * (a[8] + a[18]), (2, 1): bR * a[9],
        (3, 0): bR * (a[10] + a[20]), (3, 1): bR * a[11], (3, 2): bR * (a[12] + a[21]),
        (4, 0): bR * (a[5] + a[23]), (4, 1): bR * a[6], (4, 2): bR * (a[7] + a[24]),
        (5, 0): bR / bL * a[14],
        (6, 0): bR * a[17],
        (7, 0): bR * a[19],
        (8, 0): bR * a[22],
        (9, 0): bR * a[25],
        (10, 0): a[2],
        (11, 0): bR / bL * a[15],
        (12, 0): 2.0 * bR * a[13],
        (13, 0): a[1] - bR * a[26],
        (14, 0): a[2],
        (15, 0): bR * a[27],
    }
    return MelnikovCoefficients(tuple(a[1:]), k)


def _interval_check(h, interval, name: str):
    harr = np.atleast_1d(np.asarray(h, dtype=float))
    if interval is None:
        raise EnergyOutOfRange(f"{name} is empty")
    lo, hi = interval
    if np.any(harr <= lo + DOMAIN_MARGIN) or np.any(harr >= hi - DOMAIN_MARGIN):
        raise EnergyOutOfRange(f"h outside the open interval {name} = ({lo!r}, {hi!r})")


def _out(h, val):
    return float(val) if np.ndim(h) == 0 else val


def melnikov_m0(
    sys: SystemParameters,
    pert: Perturbation,
    h,
    geometry: Optional[AnnulusGeometry] = None,
):
    """Closed-form three-zone Melnikov function on J0."""
    geo = geometry or classify(sys)
    _interval_check(h, geo.J0, "J0")
    hh = np.asarray(h, dtype=float)
    B = basis_for(sys)
    k = melnikov_coefficients(sys, pert).k
    f1, f2, f3, f4 = B.f1(hh), B.f2(hh), B.f3(hh), B.f4(hh)
    val = (
        k[0, 0] * hh
        + (k[1, 0] + k[1, 1] * hh) * f2
        + (k[2, 0] + k[2, 1] * hh) * f3
        + (k[3, 0] + k[3, 1] * hh + k[3, 2] * hh * hh) * f3 * f3
        + (k[4, 0] + k[4, 1] * hh + k[4, 2] * hh * hh) * f3 * f4
        + k[5, 0] * f1
        + k[6, 0] * f1 * f2
        + k[7, 0] * f1 * f3
        + k[8, 0] * f1 * f3 * f3
        + k[9, 0] * f1 * f3 * f4
        + k[10, 0] * B.f0R(hh)
        + k[11, 0] * B.f0L(hh)
        + k[12, 0] * B.f0C(hh)
    )
    return _out(h, val)


def melnikov_m1(
    sys: SystemParameters,
    pert: Perturbation,
    h,
    branch: str = "geometric",
    geometry: Optional[AnnulusGeometry] = None,
):
    """Closed-form two-zone Melnikov function on J1.

    ``branch='arccos'`` uses the arccos form of the two-zone time, which
    departs from the true flow when ``beta_C > 1``.
    """
    geo = geometry or classify(sys)
    _interval_check(h, geo.J1, "J1")
    hh = np.asarray(h, dtype=float)
    B = basis_for(sys)
    k = melnikov_coefficients(sys, pert).k
    val = k[13, 0] * hh + k[14, 0] * B.f0R(hh) + k[15, 0] * B.f1C(hh, branch)
    return _out(h, val)


# quadrature oracle

def _arc_integral(arc, pert: Perturbation, epsabs: float, epsrel: float) -> float:
    f10, f01, f00, g10, g01, g00 = pert.zone(arc.zone)
    state = state_function(arc.flow, arc.start)

    def integrand(t):
        x, y, dx, dy = state(t)
        return (g10 * x + g01 * y + g00) * dx - (f10 * x + f01 * y + f00) * dy

    val, err, info = _quad(integrand, arc.duration, epsabs, epsrel)
    return val


def _quad(fn, T, epsabs, epsrel):
    out = quad(fn, 0.0, T, epsabs=epsabs, epsrel=epsrel, limit=400, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and err > 10 * max(epsabs, epsrel * abs(val)):
        raise QuadratureNonConvergence(out[3] if len(out) > 3 else "quad failed")
    return val, err, out[2]


def melnikov_m0_oracle(
    sys: SystemParameters,
    pert: Perturbation,
    h: float,
    epsabs: float = 1e-12,
    epsrel: float = 1e-12,
) -> float:
    """M0 by quadrature of ``g dx - f dy`` along the exact arcs of L_h.

    The arcs come from the crossing-time solver, not from the closed-form
    flight times. Weights are 1 on the right arc, b_R on the central arcs
    and b_R / b_L on the left arc.
    """
    geo = classify(sys)
    _interval_check(h, geo.J0, "J0")
    arcs = orbit_arcs(sys, float(h), zones=3)
    w = {"R": 1.0, "C": sys.b_R, "L": sys.b_R / sys.b_L}
    return float(sum(w[a.zone] * _arc_integral(a, pert, epsabs, epsrel) for a in arcs))


def melnikov_m1_oracle(
    sys: SystemParameters,
    pert: Perturbation,
    h: float,
    epsabs: float = 1e-12,
    epsrel: float = 1e-12,
) -> float:
    """M1 by quadrature along the exact two-zone arcs."""
    geo = classify(sys)
    _interval_check(h, geo.J1, "J1")
    arcs = orbit_arcs(sys, float(h), zones=2)
    w = {"R": 1.0, "C": sys.b_R}
    return float(sum(w[a.zone] * _arc_integral(a, pert, epsabs, epsrel) for a in arcs))


def melnikov_ratios(sys: SystemParameters, h: float, h_two: Optional[float] = None) -> dict:
    """Ratios of H_y at the crossing points that fix the arc weights.

    ``h`` must lie in J0; ``h_two`` in J1 (default: midpoint of J1) is
    used for the two-zone points B, B1.
    """
    geo = classify(sys)
    _interval_check(h, geo.J0, "J0")
    if h_two is None:
        h_two = 0.5 * (geo.J1[0] + geo.J1[1])
    _interval_check(h_two, geo.J1, "J1")
    f1 = math.sqrt(h * h - 4.0 * sys.beta_C)
    Hy = sys.hamiltonian_y
    A, A1, A2, A3 = (1.0, h), (1.0, -h), (-1.0, -f1), (-1.0, f1)
    B = (1.0, h_two)
    rA = Hy("R", *A) / Hy("C", *A)
    rB = Hy("R", *B) / Hy("C", *B)
    via_left = Hy("R", *A) * Hy("C", *A3) * Hy("L", *A2) / (Hy("C", *A) * Hy("L", *A3) * Hy("C", *A2))
    left_weight = Hy("R", *A) * Hy("C", *A3) / (Hy("C", *A) * Hy("L", *A3))
    closure = (
        Hy("R", *A) * Hy("C", *A3) * Hy("L", *A2) * Hy("C", *A1)
        / (Hy("C", *A) * Hy("L", *A3) * Hy("C", *A2) * Hy("R", *A1))
    )
    return {
        "right_over_center_A": rA,
        "right_over_center_B": rB,
        "three_zone_central": via_left,
        "three_zone_left": left_weight,
        "closure": closure,
    }
