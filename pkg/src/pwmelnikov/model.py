"""System parameters, normal-form reduction and annulus geometry.

Each zone Z in {L, C, R} carries a quadratic Hamiltonian

    H^Z(x, y) = b_Z y^2 / 2 - c_Z x^2 / 2 + a_Z x y + alpha_Z y - beta_Z x

whose field is (H_y, -H_x). The zones are x <= -1, |x| <= 1 and x >= 1.
In the normal form the central zone is H^C = (x^2 + y^2) / 2 - beta_C x,
alpha_L = a_L and alpha_R = -a_R.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .errors import (
    CenterConditionViolated,
    CenterOffsetNotPositive,
    EnergyOutOfRange,
    SaddleConditionViolated,
    TangencyMismatch,
    ValidationError,
)

ZONES = ("L", "C", "R")
TANGENCY_RTOL = 1e-12


@dataclass(frozen=True)
class RawSystem:
    """Unnormalized coefficients of the three zone Hamiltonians."""

    a_L: float
    b_L: float
    c_L: float
    alpha_L: float
    beta_L: float
    a_C: float
    b_C: float
    c_C: float
    alpha_C: float
    beta_C: float
    a_R: float
    b_R: float
    c_R: float
    alpha_R: float
    beta_R: float

    def zone(self, z: str) -> tuple[float, float, float, float, float]:
        """Return ``(a, b, c, alpha, beta)`` of zone ``z``."""
        return tuple(getattr(self, f"{k}_{z}") for k in ("a", "b", "c", "alpha", "beta"))


@dataclass(frozen=True)
class SystemParameters:
    """The nine parameters of the normalized unperturbed system.

    Sign and existence conditions are checked by :func:`validate`, not at
    construction, so that reflected systems with ``beta_C < 0`` can still
    be represented.
    """

    a_L: float
    b_L: float
    c_L: float
    beta_L: float
    beta_C: float
    a_R: float
    b_R: float
    c_R: float
    beta_R: float

    @property
    def omega_R(self) -> float:
        return math.sqrt(self.a_R**2 + self.b_R * self.c_R)

    @property
    def omega_L(self) -> float:
        return math.sqrt(self.a_L**2 + self.b_L * self.c_L)

    @property
    def tau_R(self) -> float:
        """Ordinate on x = 1 of the right saddle separatrix."""
        w = self.omega_R
        return (self.a_R**2 - self.b_R * self.beta_R - w * w) / (self.b_R * w)

    @property
    def tau_L(self) -> float:
        """Ordinate on x = -1 of the left saddle separatrix."""
        w = self.omega_L
        return (self.a_L**2 + self.b_L * self.beta_L - w * w) / (self.b_L * w)

    def zone(self, z: str) -> tuple[float, float, float, float, float]:
        """Return ``(a, b, c, alpha, beta)`` of zone ``z`` in the normal form."""
        if z == "L":
            return (self.a_L, self.b_L, self.c_L, self.a_L, self.beta_L)
        if z == "C":
            return (0.0, 1.0, -1.0, 0.0, self.beta_C)
        if z == "R":
            return (self.a_R, self.b_R, self.c_R, -self.a_R, self.beta_R)
        raise ValueError(f"unknown zone {z!r}")

    def hamiltonian(self, z: str, x, y):
        """Evaluate H^Z at ``(x, y)`` (scalars or arrays)."""
        a, b, c, al, be = self.zone(z)
        return 0.5 * b * y * y - 0.5 * c * x * x + a * x * y + al * y - be * x

    def hamiltonian_y(self, z: str, x, y):
        a, b, _, al, _ = self.zone(z)
        return b * y + a * x + al

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


PERTURBATION_NAMES = (
    "r10", "r01", "r00", "s10", "s01", "s00",
    "u10", "u01", "u00", "v10", "v01", "v00",
    "p10", "p01", "p00", "q10", "q01", "q00",
)
_ZONE_PREFIX = {"L": ("r", "s"), "C": ("u", "v"), "R": ("p", "q")}


@dataclass(frozen=True)
class Perturbation:
    """Linear perturbation ``(f, g)`` per zone.

    Left zone: f = r10 x + r01 y + r00, g = s10 x + s01 y + s00; the
    central zone uses u, v and the right zone p, q.
    """

    r10: float = 0.0
    r01: float = 0.0
    r00: float = 0.0
    s10: float = 0.0
    s01: float = 0.0
    s00: float = 0.0
    u10: float = 0.0
    u01: float = 0.0
    u00: float = 0.0
    v10: float = 0.0
    v01: float = 0.0
    v00: float = 0.0
    p10: float = 0.0
    p01: float = 0.0
    p00: float = 0.0
    q10: float = 0.0
    q01: float = 0.0
    q00: float = 0.0

    def zone(self, z: str) -> tuple[float, ...]:
        """Return ``(f10, f01, f00, g10, g01, g00)`` of zone ``z``."""
        fp, gp = _ZONE_PREFIX[z]
        return tuple(getattr(self, p + k) for p in (fp, gp) for k in ("10", "01", "00"))

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PERTURBATION_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "Perturbation":
        values = np.asarray(values, dtype=float)
        if values.shape != (len(PERTURBATION_NAMES),):
            raise ValueError("expected 18 perturbation coefficients")
        return cls(**{n: float(v) for n, v in zip(PERTURBATION_NAMES, values)})

    def with_values(self, **kw) -> "Perturbation":
        return replace(self, **{k: float(v) for k, v in kw.items()})

    def __add__(self, other: "Perturbation") -> "Perturbation":
        return Perturbation.from_array(self.to_array() + other.to_array())

    def __mul__(self, k: float) -> "Perturbation":
        return Perturbation.from_array(k * self.to_array())

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not np.any(self.to_array())

    def as_dict(self) -> dict[str, float]:
        return {n: float(getattr(self, n)) for n in PERTURBATION_NAMES}


class PortraitClass(str, enum.Enum):
    HOMOCLINIC_BOUNDED = "HomoclinicBounded"
    HETEROCLINIC_BOUNDED = "HeteroclinicBounded"
    LEFT_HOMOCLINIC_BOUNDED = "LeftHomoclinicBounded"
    NO_THREE_ZONE_ANNULUS = "NoThreeZoneAnnulus"


class CenterKind(str, enum.Enum):
    REAL = "Real"
    BOUNDARY = "Boundary"
    VIRTUAL = "Virtual"


@dataclass(frozen=True)
class AnnulusGeometry:
    """Saddle data and energy intervals of the period annuli.

    ``J0`` parameterizes three-zone orbits and ``J1`` two-zone orbits by
    the ordinate h of their crossing point (1, h). An empty interval is
    ``None``.
    """

    omega_R: float
    omega_L: float
    tau_R: float
    tau_L: float
    J0: Optional[tuple[float, float]]
    J1: Optional[tuple[float, float]]
    portrait_class: PortraitClass
    center_kind: CenterKind


def _rel_close(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= TANGENCY_RTOL * (abs(a) + abs(b) + scale)


def validate(sys: SystemParameters) -> SystemParameters:
    """Check the saddle conditions and ``beta_C > 0``; return ``sys``."""
    vals = np.array([getattr(sys, f.name) for f in fields(sys)], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("system parameters must be finite")
    if not (sys.b_L > 0 and sys.b_R > 0):
        raise SaddleConditionViolated("b_L and b_R must be positive")
    if not (sys.a_L**2 + sys.b_L * sys.c_L > 0 and sys.a_R**2 + sys.b_R * sys.c_R > 0):
        raise SaddleConditionViolated("a_Z^2 + b_Z c_Z must be positive in both lateral zones")
    if not sys.beta_C > 0:
        raise CenterOffsetNotPositive(
            f"beta_C = {sys.beta_C!r} must be positive; apply reflect() first"
        )
    return sys


def _zone_affine(a, b, c, alpha, beta):
    return np.array([[a, b], [c, -a]], dtype=float), np.array([alpha, beta], dtype=float)


def normalize(raw: RawSystem) -> SystemParameters:
    """Reduce a raw system to the normal form.

    The change of variables keeps x, maps y to
    ``(a_C x + b_C y + alpha_C) / omega_C`` and rescales time by
    ``omega_C = sqrt(-a_C^2 - b_C c_C)``, so the lines x = +-1 stay fixed.

    Raises
    ------
    CenterConditionViolated, SaddleConditionViolated, TangencyMismatch,
    CenterOffsetNotPositive
    """
    vals = np.array([getattr(raw, f.name) for f in fields(raw)], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("raw coefficients must be finite")
    aC, bC, cC, alC, _ = raw.zone("C")
    if not (aC * aC + bC * cC < 0 and bC > 0):
        raise CenterConditionViolated("need a_C^2 + b_C c_C < 0 and b_C > 0")
    for z in ("L", "R"):
        a, b, c, _, _ = raw.zone(z)
        if not (a * a + b * c > 0 and b > 0):
            raise SaddleConditionViolated(f"zone {z}: need a^2 + b c > 0 and b > 0")

    scale = float(np.max(np.abs(vals))) + 1e-300
    want_L = (raw.a_L * bC + raw.b_L * (alC - aC)) / bC
    want_R = (-raw.a_R * bC + raw.b_R * (aC + alC)) / bC
    if not _rel_close(raw.alpha_L, want_L, scale):
        raise TangencyMismatch(f"alpha_L = {raw.alpha_L!r}, crossing condition needs {want_L!r}")
    if not _rel_close(raw.alpha_R, want_R, scale):
        raise TangencyMismatch(f"alpha_R = {raw.alpha_R!r}, crossing condition needs {want_R!r}")

    w = math.sqrt(-aC * aC - bC * cC)
    T = np.array([[1.0, 0.0], [aC / w, bC / w]])
    Tinv = np.linalg.inv(T)
    shift = np.array([0.0, alC / w])
    out = {}
    for z in ZONES:
        A, c = _zone_affine(*raw.zone(z))
        A2 = T @ A @ Tinv / w
        c2 = (T @ c - T @ A @ Tinv @ shift) / w
        out[z] = (A2[0, 0], A2[0, 1], A2[1, 0], c2[0], c2[1])

    sys = SystemParameters(
        a_L=out["L"][0], b_L=out["L"][1], c_L=out["L"][2], beta_L=out["L"][4],
        beta_C=out["C"][4],
        a_R=out["R"][0], b_R=out["R"][1], c_R=out["R"][2], beta_R=out["R"][4],
    )
    return validate(sys)


def raw_from_normal(sys: SystemParameters) -> RawSystem:
    """Embed a normalized system back into the raw coefficient set."""
    kw = {}
    for z in ZONES:
        for k, v in zip(("a", "b", "c", "alpha", "beta"), sys.zone(z)):
            kw[f"{k}_{z}"] = float(v)
    return RawSystem(**kw)


def reflect(sys: SystemParameters) -> SystemParameters:
    """Apply the point reflection (x, y) -> (-x, -y), swapping L and R.

    The map preserves orientation and the normal form, flips the sign of
    ``beta_C`` and exchanges ``tau_L`` and ``tau_R``.
    """
    return SystemParameters(
        a_L=sys.a_R, b_L=sys.b_R, c_L=sys.c_R, beta_L=-sys.beta_R,
        beta_C=-sys.beta_C,
        a_R=sys.a_L, b_R=sys.b_L, c_R=sys.c_L, beta_R=-sys.beta_L,
    )


def reflect_perturbation(pert: Perturbation) -> Perturbation:
    """Transform a perturbation under :func:`reflect`."""
    nm = {"L": "R", "C": "C", "R": "L"}
    kw = {}
    for z in ZONES:
        vals = pert.zone(nm[z])
        fp, gp = _ZONE_PREFIX[z]
        for p, off in ((fp, 0), (gp, 3)):
            kw[p + "10"] = vals[off]
            kw[p + "01"] = vals[off + 1]
            kw[p + "00"] = -vals[off + 2]
    return Perturbation(**kw)


def center_kind(beta_C: float) -> CenterKind:
    if math.isclose(beta_C, 1.0, rel_tol=0.0, abs_tol=1e-12):
        return CenterKind.BOUNDARY
    return CenterKind.REAL if beta_C < 1.0 else CenterKind.VIRTUAL


def classify(sys: SystemParameters) -> AnnulusGeometry:
    """Energy intervals and portrait class of a valid normalized system.

    The three-zone annulus is bounded either by the right saddle loop
    (``HomoclinicBounded``), by a heteroclinic cycle through both saddles
    or by the left saddle loop (``LeftHomoclinicBounded``).
    """
    validate(sys)
    wR, wL, tR, tL = sys.omega_R, sys.omega_L, sys.tau_R, sys.tau_L
    beta = sys.beta_C
    h0 = 2.0 * math.sqrt(beta)
    kind = center_kind(beta)
    J1 = (0.0, min(h0, tR)) if tR > 0 else None
    if tR <= 0 or tL <= 0 or beta >= tR * tR / 4.0:
        return AnnulusGeometry(wR, wL, tR, tL, None, J1, PortraitClass.NO_THREE_ZONE_ANNULUS, kind)
    left_reach = math.sqrt(tR * tR - 4.0 * beta)
    if math.isclose(left_reach, tL, rel_tol=1e-12, abs_tol=1e-15):
        cls, top = PortraitClass.HETEROCLINIC_BOUNDED, tR
    elif left_reach < tL:
        cls, top = PortraitClass.HOMOCLINIC_BOUNDED, tR
    else:
        cls, top = PortraitClass.LEFT_HOMOCLINIC_BOUNDED, math.sqrt(tL * tL + 4.0 * beta)
    return AnnulusGeometry(wR, wL, tR, tL, (h0, top), J1, cls, kind)


@dataclass(frozen=True)
class ThreeZoneCrossings:
    A: tuple[float, float]
    A1: tuple[float, float]
    A2: tuple[float, float]
    A3: tuple[float, float]


@dataclass(frozen=True)
class TwoZoneCrossings:
    B: tuple[float, float]
    B1: tuple[float, float]


def _check_energy(h: float, interval, name: str, margin: float = 0.0):
    if interval is None:
        raise EnergyOutOfRange(f"{name} is empty")
    lo, hi = interval
    if not (lo + margin <= h <= hi - margin):
        raise EnergyOutOfRange(f"h = {h!r} outside {name} = ({lo!r}, {hi!r})")


def crossing_points(sys: SystemParameters, h: float, zones: int = 3):
    """Switching-line crossings of the unperturbed orbit through (1, h).

    ``zones=3`` returns A, A1, A2, A3 for h in the closure of J0 and
    ``zones=2`` returns B, B1 for h in the closure of J1.
    """
    geo = classify(sys)
    if zones == 3:
        _check_energy(h, geo.J0, "J0")
        f1 = math.sqrt(max(h * h - 4.0 * sys.beta_C, 0.0))
        return ThreeZoneCrossings((1.0, h), (1.0, -h), (-1.0, -f1), (-1.0, f1))
    if zones == 2:
        _check_energy(h, geo.J1, "J1")
        return TwoZoneCrossings((1.0, h), (1.0, -h))
    raise ValueError("zones must be 2 or 3")


def example_system(beta_C: float = 1.0, beta_L: float = 3.0, beta_R: float = -4.0) -> SystemParameters:
    """Saddle-center-saddle family with a_L = b_L = b_R = c_R = 1, c_L = a_R = 0.

    Here omega_R = 1, tau_R = -beta_R - 1 and tau_L = beta_L; the right
    saddle sits at (-beta_R, 0) and the left one at (-1 - beta_L, beta_L).
    """
    return SystemParameters(
        a_L=1.0, b_L=1.0, c_L=0.0, beta_L=beta_L, beta_C=beta_C,
        a_R=0.0, b_R=1.0, c_R=1.0, beta_R=beta_R,
    )
