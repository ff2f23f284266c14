"""Expansions of M0 and M1 at the tangency level h0 = 2 sqrt(beta_C).

With ``h = u^2 + h0`` the three-zone function is analytic in ``u`` once
``f1`` is continued as ``u sqrt(u^2 + 2 h0)``:

    M0 = C00 + D1 u + C10 u^2 + D3 u^3 + C20 u^4 + O(u^5),

and the two-zone function is analytic in ``s = h - h0``:

    M1 = C01 + C11 s + C21 s^2 + O(s^3).

Coefficients are assembled with mpmath and rounded to float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

from .errors import EmptyAnnulus, RootNotBracketed
from .melnikov import melnikov_coefficients
from .model import Perturbation, SystemParameters

WORK_DPS = 30
THREE_ZONE_NAMES = ("C00", "D1", "C10", "D3", "C20")
TWO_ZONE_NAMES = ("C01", "C11", "C21")


@dataclass(frozen=True)
class MelnikovExpansion:
    """Boundary expansion coefficients of M0 and M1.

    ``C01, C11, C21`` follow the true two-zone flow. ``arccos_two_zone``
    holds the same coefficients for the arccos form of the two-zone time, which
    coincide with them for ``beta_C <= 1``.
    """

    C00: float
    D1: float
    C10: float
    D3: float
    C20: float
    C01: float
    C11: float
    C21: float
    beta_C: float
    arccos_two_zone: tuple[float, float, float]
    system: SystemParameters = field(repr=False)
    perturbation: Perturbation = field(repr=False)

    @property
    def three_zone(self) -> tuple[float, ...]:
        return (self.C00, self.D1, self.C10, self.D3, self.C20)

    @property
    def two_zone(self) -> tuple[float, ...]:
        return (self.C01, self.C11, self.C21)

    def as_dict(self) -> dict[str, float]:
        names = THREE_ZONE_NAMES + TWO_ZONE_NAMES
        return dict(zip(names, self.three_zone + self.two_zone))


def _mpf_params(sys: SystemParameters):
    return (
        mp.mpf(sys.beta_C), mp.mpf(sys.tau_R), mp.mpf(sys.tau_L),
        mp.mpf(sys.omega_R), mp.mpf(sys.omega_L), mp.mpf(sys.b_R), mp.mpf(sys.b_L),
    )


def _special(b, tR):
    sb = mp.sqrt(b)
    A = mp.acos((b - 1) / (b + 1))
    Lg = mp.log((2 * sb + tR) / (tR - 2 * sb))
    B = mp.acos((1 - 6 * b + b * b) / (1 + b) ** 2)
    return sb, A, Lg, B


def expansion_coefficients(sys: SystemParameters, pert: Perturbation) -> MelnikovExpansion:
    """Closed-form boundary expansion coefficients.

    Raises
    ------
    EmptyAnnulus
        If ``tau_R^2 <= 4 beta_C``.
    """
    if not sys.tau_R > 0 or sys.tau_R**2 <= 4.0 * sys.beta_C:
        raise EmptyAnnulus("three-zone annulus is empty (tau_R^2 <= 4 beta_C)")
    with mp.workdps(WORK_DPS):
        b, tR, tL, wR, wL, bR, bL = _mpf_params(sys)
        P = {k: mp.mpf(v) for k, v in pert.as_dict().items()}
        sb, A, Lg, B = _special(b, tR)
        qb = mp.root(b, 4)
        pq = P["p10"] + P["q01"]
        ue = P["u10"] + P["v01"]
        cen = 2 * P["u00"] + P["u10"] - P["v01"] + ue * b
        pp = P["p00"] + P["p10"]
        r10, r00, s01 = P["r10"], P["r00"], P["s01"]
        u10, u00, v01 = P["u10"], P["u00"], P["v01"]

        C00 = (
            4 * sb * ((2 * pp - bR * cen) * wR + bR * pq * tR)
            + 2 * bR * ue * (1 + b) ** 2 * wR * A
            + bR * pq * (4 * b - tR**2) * Lg
        ) / (2 * wR)
        D1 = 4 * bR * qb / bL * (r10 - r00 + bL * (u00 - u10))
        C10 = 2 * (pp - bR * (u00 + u10) + bR * sb / wR * (2 * ue * wR * A + pq * Lg))
        D3 = (
            -3 * bR * (r00 - r10) * (1 + b) * wL * tL
            + bL * bR * (
                32 * (r10 + s01) * b * (1 + b)
                + (-3 * u10 - 35 * u10 * b - 32 * v01 * b + 3 * u00 * (1 + b)) * wL * tL
            )
        ) / (6 * bL * qb * (1 + b) * wL * tL)
        C20 = bR * ue * A + bR / (2 * wR) * (
            4 * sb / ((1 + b) ** 2 * (4 * b - tR**2))
            * (4 * ue * (b - 1) * b * wR - pq * (1 + b) ** 2 * tR - ue * (b - 1) * wR * tR**2)
            + pq * Lg
        )

        def two_zone(angle0, offset):
            # angle0: central time at h0; offset: signed distance term in the slope
            c01 = (
                8 * pp * sb - 4 * bR * sb * cen + 4 * bR * sb * tR / wR * pq
                + bR * ue * (1 + b) ** 2 * angle0
                + bR / wR * pq * (2 * sb - tR) * (2 * sb + tR) * Lg
            ) / 2
            c11 = (
                2 * pp - bR * cen + bR * tR / wR * pq
                + bR * ue * (-offset + 2 * sb * angle0)
                - bR / wR * pq * (tR - 2 * sb * Lg)
            )
            c21 = (
                bR * ue * angle0 / 2
                + 2 * bR * sb * (tR / (wR * (tR**2 - 4 * b)) * pq - offset / (b + 1) ** 2 * ue)
                + bR / (2 * wR) * pq * Lg
            )
            return c01, c11, c21

        true_tz = two_zone(2 * A, 1 - b)
        arccos_tz = two_zone(2 * mp.pi - B, abs(b - 1))
        vals = [float(v) for v in (C00, D1, C10, D3, C20) + true_tz]
        arccos_vals = tuple(float(v) for v in arccos_tz)
    return MelnikovExpansion(*vals, beta_C=sys.beta_C, arccos_two_zone=arccos_vals, system=sys, perturbation=pert)


def phi(beta_C: float) -> float:
    """2 pi - 2 arccos((b-1)/(b+1)) - arccos((1 - 6b + b^2)/(1+b)^2).

    Vanishes identically on (0, 1]; positive for ``beta_C > 1``.
    """
    with mp.workdps(WORK_DPS):
        b = mp.mpf(beta_C)
        A = mp.acos((b - 1) / (b + 1))
        B = mp.acos((1 - 6 * b + b * b) / (1 + b) ** 2)
        return float(2 * mp.pi - 2 * A - B)


def lambda1(beta_C) -> float:
    """2 (b - 1) sqrt(b) - (1 + (b - 6) b) arccos((b - 1)/(b + 1))."""
    with mp.workdps(WORK_DPS):
        return float(_lambda1_mp(mp.mpf(beta_C)))


def _lambda1_mp(b):
    return 2 * (b - 1) * mp.sqrt(b) - (1 + (b - 6) * b) * mp.acos((b - 1) / (b + 1))


def lambda1_root(lo: float = 1e-6, hi: float = 1.0, tol: float = 1e-12) -> float:
    """Zero of :func:`lambda1` in ``(0, 1]`` by bisection and Newton polish."""
    flo, fhi = lambda1(lo), lambda1(hi)
    if flo * fhi > 0:
        raise RootNotBracketed(f"lambda1 has no sign change on [{lo}, {hi}]")
    x = brentq(lambda1, lo, hi, xtol=1e-10)
    with mp.workdps(WORK_DPS):
        xm = mp.mpf(x)
        for _ in range(20):
            step = _lambda1_mp(xm) / mp.diff(_lambda1_mp, xm)
            xm -= step
            if abs(step) < tol * 1e-3:
                break
        root = float(xm)
    if not (lo <= root <= hi) or abs(root - x) > 1e-8:
        raise RootNotBracketed("Newton polish left the bisection bracket")
    return root


def lambda2(sys: SystemParameters, beta_C: Optional[float] = None) -> float:
    """Coefficient of ``p10 + q01`` in C20 along the exact-M1 family.

    With ``b = beta_C``, ``t = tau_R``, ``A = arccos((b-1)/(b+1))`` and
    ``Lg = log((2 sqrt(b) + t)/(t - 2 sqrt(b)))``:

        8 (b-1) b t ((b-1)^2 + t^2) - 4 sqrt(b) (1+b)^2 (b-1-t)(b+t-1) t A
        + (4b - t^2) [-2 (b-1) sqrt(b) ((b-1)^2 - t^2)
                      + (1+b)^2 ((b-1)^2 + t^2) A] Lg
    """
    b_val = sys.beta_C if beta_C is None else beta_C
    if not sys.tau_R > 0 or sys.tau_R**2 <= 4.0 * b_val:
        raise EmptyAnnulus("lambda2 needs tau_R^2 > 4 beta_C")
    with mp.workdps(WORK_DPS):
        b, t = mp.mpf(b_val), mp.mpf(sys.tau_R)
        sb, A, Lg, _ = _special(b, t)
        val = (
            8 * (b - 1) * b * t * ((b - 1) ** 2 + t**2)
            - 4 * sb * (1 + b) ** 2 * (b - 1 - t) * (b + t - 1) * t * A
            + (4 * b - t**2)
            * (-2 * (b - 1) * sb * ((b - 1) ** 2 - t**2) + (1 + b) ** 2 * ((b - 1) ** 2 + t**2) * A)
            * Lg
        )
        return float(val)


def identity_residuals(exp: MelnikovExpansion) -> dict[str, float]:
    """Scaled residuals of the cross-identities between M0 and M1 coefficients.

    ``arccos_*`` check the three-zone minus two-zone differences, expressed
    through ``phi``, against the arccos-branch two-zone coefficients.
    ``continuity_*`` check ``C00 = C01``, ``C10 = C11`` and ``C20 = C21``
    for the true two-zone coefficients. Residuals are divided by
    ``1 + max |coefficient|``.
    """
    sys, P = exp.system, exp.perturbation
    with mp.workdps(WORK_DPS):
        b = mp.mpf(exp.beta_C)
        bR = mp.mpf(sys.b_R)
        ue = mp.mpf(P.u10) + mp.mpf(P.v01)
        sb = mp.sqrt(b)
        ph = mp.mpf(phi(exp.beta_C))
        d00 = -bR / 2 * ue * (1 + b) ** 2 * ph
        if b <= 1:
            d10 = -bR * ue * sb * ph
            d20 = -bR / 2 * ue * ph
        else:
            d10 = 2 * bR * ue * (b - 1 - sb * ph)
            d20 = bR / (2 * (b + 1) ** 2) * ue * (8 * (b - 1) * sb - (b + 1) ** 2 * ph)
        p01, p11, p21 = exp.arccos_two_zone
        scale = 1.0 + max(abs(v) for v in exp.three_zone + exp.two_zone + exp.arccos_two_zone)
        res = {
            "arccos_00": float(exp.C00 - p01 - d00),
            "arccos_10": float(exp.C10 - p11 - d10),
            "arccos_20": float(exp.C20 - p21 - d20),
        }
    res["continuity_00"] = exp.C00 - exp.C01
    res["continuity_10"] = exp.C10 - exp.C11
    res["continuity_20"] = exp.C20 - exp.C21
    return {k: abs(v) / scale for k, v in res.items()}


# Taylor oracle

def m0_of_u(sys: SystemParameters, pert: Perturbation, u):
    """M0 at ``h = u^2 + h0`` in mpmath, analytic through ``u = 0``."""
    k = melnikov_coefficients(sys, pert).k
    b, tR, tL = mp.mpf(sys.beta_C), mp.mpf(sys.tau_R), mp.mpf(sys.tau_L)
    u = mp.mpf(u)
    h0 = 2 * mp.sqrt(b)
    h = u * u + h0
    f1 = u * mp.sqrt(u * u + 2 * h0)
    D = h * h + (b - 1) ** 2
    f2 = -(h * h + 2 - h * f1 - 2 * b) / D
    s_num = (1 - b) * f1 + (1 + b) * h
    c_num = h * f1 - 1 + b * b
    f3, f4 = s_num / D, c_num / D
    f0R = (h - tR) * (h + tR) * mp.log((h + tR) / (tR - h))
    f0L = (f1 * f1 - tL * tL) * mp.log((f1 + tL) / (tL - f1))
    f0C = D * mp.atan2(s_num, c_num)
    K = {key: mp.mpf(v) for key, v in k.items()}
    return (
        K[0, 0] * h
        + (K[1, 0] + K[1, 1] * h) * f2
        + (K[2, 0] + K[2, 1] * h) * f3
        + (K[3, 0] + K[3, 1] * h + K[3, 2] * h * h) * f3**2
        + (K[4, 0] + K[4, 1] * h + K[4, 2] * h * h) * f3 * f4
        + K[5, 0] * f1 + K[6, 0] * f1 * f2 + K[7, 0] * f1 * f3
        + K[8, 0] * f1 * f3**2 + K[9, 0] * f1 * f3 * f4
        + K[10, 0] * f0R + K[11, 0] * f0L + K[12, 0] * f0C
    )


def m1_of_s(sys: SystemParameters, pert: Perturbation, s, branch: str = "geometric"):
    """M1 at ``h = h0 + s`` in mpmath."""
    k = melnikov_coefficients(sys, pert).k
    b, tR = mp.mpf(sys.beta_C), mp.mpf(sys.tau_R)
    h = 2 * mp.sqrt(b) + mp.mpf(s)
    D = h * h + (b - 1) ** 2
    f0R = (h - tR) * (h + tR) * mp.log((h + tR) / (tR - h))
    if branch == "geometric":
        ang = 2 * mp.pi - 2 * mp.atan2(h, 1 - b)
    else:
        ang = 2 * mp.pi - mp.acos((1 - h * h - 2 * b + b * b) / D)
    return mp.mpf(k[13, 0]) * h + mp.mpf(k[14, 0]) * f0R + mp.mpf(k[15, 0]) * D * ang


def richardson_taylor(
    fn: Callable,
    order: int,
    steps: Sequence[float] = (1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4, 1.5625e-4, 1e-4),
    half_width: int = 6,
    dps: int = 40,
) -> list[float]:
    """Taylor coefficients ``c_0..c_order`` of ``fn`` at 0.

    At each step ``d`` the central stencil ``j d``, ``|j| <= half_width``,
    is interpolated exactly; the estimates from successive steps are then
    combined by Richardson extrapolation on the leading stencil error.
    """
    with mp.workdps(dps):
        per_step = []
        m = half_width
        for d in steps:
            d = mp.mpf(d)
            nodes = [j * d for j in range(-m, m + 1)]
            vals = [fn(x) for x in nodes]
            V = mp.matrix([[mp.mpf(j) ** p for p in range(2 * m + 1)] for j in range(-m, m + 1)])
            coef = mp.lu_solve(V, mp.matrix(vals))
            per_step.append([coef[p] / d**p for p in range(order + 1)])
        out = []
        for p in range(order + 1):
            est = [row[p] for row in per_step]
            expo = 2 * m + 1 - p + (1 if p % 2 == 0 else 0)
            for i in range(1, len(est)):
                r = (mp.mpf(steps[i - 1]) / mp.mpf(steps[i])) ** expo
                est[i] = (r * est[i] - est[i - 1]) / (r - 1)
            out.append(float(est[-1]))
    return out


def taylor_oracle(sys: SystemParameters, pert: Perturbation, branch: str = "geometric"):
    """Numerically differentiated expansion coefficients.

    Returns ``(three_zone, two_zone)`` ordered as in :class:`MelnikovExpansion`.
    """
    three = richardson_taylor(lambda u: m0_of_u(sys, pert, u), 4)
    two = richardson_taylor(lambda s: m1_of_s(sys, pert, s, branch), 2)
    return three, two
