"""Exact flows of the zone affine systems, flight times and crossings.

Every zone field is affine, X' = A X + c, so its flow is

    X(t) = X* + e^{A t} (X0 - X*),    A X* + c = 0,

with e^{A t} evaluated from the 2x2 identity

    e^{A t} = e^{s t} [C(t) I + S(t) (A - s I)],   s = tr(A) / 2,

where C and S are cosh/sinh, cos/sin or their common power series in
``d2 t^2`` (``d2 = s^2 - det A``). The series covers coalescing
eigenvalues without a special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import (
    DegenerateEigenstructure,
    EnergyOutOfRange,
    LogSingularity,
    NoCrossing,
    TangentialCrossing,
)
from .model import Perturbation, SystemParameters, classify

_SERIES_TERMS = 24
_SINGULAR_DET = 1e-10
ROOT_TOL = 1e-12
TANGENT_SPEED = 1e-10
POLE_GAP = 1e-14


@dataclass(frozen=True)
class ZoneFlow:
    """Affine field ``(x', y') = A (x, y) + c`` of one zone.

    At ``eps = 0`` the field is ``(H_y, -H_x)`` of the zone Hamiltonian;
    otherwise the perturbation ``eps (f, g)`` is added.
    """

    zone: str
    a11: float
    a12: float
    a21: float
    a22: float
    c1: float
    c2: float
    eps: float = 0.0

    @classmethod
    def from_system(
        cls,
        sys: SystemParameters,
        zone: str,
        pert: Optional[Perturbation] = None,
        eps: float = 0.0,
    ) -> "ZoneFlow":
        a, b, c, al, be = sys.zone(zone)
        f10 = f01 = f00 = g10 = g01 = g00 = 0.0
        if pert is not None and eps != 0.0:
            f10, f01, f00, g10, g01, g00 = pert.zone(zone)
        return cls(
            zone,
            a + eps * f10, b + eps * f01, c + eps * g10, -a + eps * g01,
            al + eps * f00, be + eps * g00, float(eps),
        )

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def offset(self) -> np.ndarray:
        return np.array([self.c1, self.c2])

    def field(self, x, y):
        return (self.a11 * x + self.a12 * y + self.c1, self.a21 * x + self.a22 * y + self.c2)

    @property
    def half_trace(self) -> float:
        return 0.5 * (self.a11 + self.a22)

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def disc(self) -> float:
        """``s^2 - det A``; positive for saddles, negative for foci."""
        d = 0.5 * (self.a11 - self.a22)
        return d * d + self.a12 * self.a21

    @property
    def equilibrium(self) -> Optional[np.ndarray]:
        if abs(self.det) <= _SINGULAR_DET * (1.0 + np.sum(self.matrix**2)):
            return None
        return -np.linalg.solve(self.matrix, self.offset)


def _cs(d2: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """C(t) and S(t) with ``C'' = d2 C``, ``C(0) = 1`` and ``S' = C``, ``S(0) = 0``."""
    z = d2 * t * t
    C = np.empty_like(t)
    S = np.empty_like(t)
    small = np.abs(z) < 1.0
    if np.any(small):
        zs = z[small]
        cterm = np.ones_like(zs)
        sterm = np.ones_like(zs)
        csum = cterm.copy()
        ssum = sterm.copy()
        for k in range(1, _SERIES_TERMS):
            cterm = cterm * zs / ((2 * k - 1) * (2 * k))
            sterm = sterm * zs / ((2 * k) * (2 * k + 1))
            csum += cterm
            ssum += sterm
        C[small] = csum
        S[small] = t[small] * ssum
    big = ~small
    if np.any(big):
        tb = t[big]
        if d2 > 0:
            d = math.sqrt(d2)
            C[big] = np.cosh(d * tb)
            S[big] = np.sinh(d * tb) / d
        else:
            w = math.sqrt(-d2)
            C[big] = np.cos(w * tb)
            S[big] = np.sin(w * tb) / w
    return C, S


def propagator(flow: ZoneFlow, t) -> np.ndarray:
    """``e^{A t}`` for scalar or array ``t``; shape ``(..., 2, 2)``."""
    t = np.asarray(t, dtype=float)
    tt = np.atleast_1d(t).ravel()
    s = flow.half_trace
    N = flow.matrix - s * np.eye(2)
    C, S = _cs(flow.disc, tt)
    g = np.exp(s * tt)
    E = g[:, None, None] * (C[:, None, None] * np.eye(2) + S[:, None, None] * N)
    return E.reshape(t.shape + (2, 2))


def _check_finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise DegenerateEigenstructure("non-finite flow input")


def zone_flow_at(flow: ZoneFlow, start, t) -> np.ndarray:
    """Exact solution through ``start`` at time(s) ``t``.

    Returns shape ``(2,)`` for scalar ``t`` and ``(n, 2)`` for an array.
    """
    start = np.asarray(start, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    _check_finite(start, t_arr, flow.matrix, flow.offset)
    xstar = flow.equilibrium
    if xstar is None:
        return _augmented_flow(flow, start, t_arr)
    E = propagator(flow, t_arr)
    return xstar + E @ (start - xstar)


def _cs_scalar(d2: float, t: float) -> tuple[float, float]:
    z = d2 * t * t
    if abs(z) < 1.0:
        c = sn = cs = ss = 1.0
        for k in range(1, _SERIES_TERMS):
            c *= z / ((2 * k - 1) * (2 * k))
            sn *= z / ((2 * k) * (2 * k + 1))
            cs += c
            ss += sn
        return cs, t * ss
    if d2 > 0:
        d = math.sqrt(d2)
        return math.cosh(d * t), math.sinh(d * t) / d
    w = math.sqrt(-d2)
    return math.cos(w * t), math.sin(w * t) / w


def state_function(flow: ZoneFlow, start) -> Callable[[float], tuple[float, float, float, float]]:
    """Scalar closure ``t -> (x, y, dx/dt, dy/dt)`` of the solution through ``start``.

    Uses the same propagator as :func:`zone_flow_at` with the matrix
    algebra unrolled, for use inside adaptive quadrature.
    """
    x0, y0 = float(start[0]), float(start[1])
    xstar = flow.equilibrium
    if xstar is None:
        def slow(t):
            pt = zone_flow_at(flow, (x0, y0), t)
            v = zone_velocity_at(flow, (x0, y0), t)
            return float(pt[0]), float(pt[1]), float(v[0]), float(v[1])
        return slow
    s, d2 = flow.half_trace, flow.disc
    n11, n12, n21, n22 = flow.a11 - s, flow.a12, flow.a21, flow.a22 - s
    xs, ys = float(xstar[0]), float(xstar[1])
    ex, ey = x0 - xs, y0 - ys
    wx = flow.a11 * x0 + flow.a12 * y0 + flow.c1
    wy = flow.a21 * x0 + flow.a22 * y0 + flow.c2

    def state(t):
        C, S = _cs_scalar(d2, t)
        g = math.exp(s * t)
        e11, e12, e21, e22 = g * (C + S * n11), g * S * n12, g * S * n21, g * (C + S * n22)
        return (
            xs + e11 * ex + e12 * ey,
            ys + e21 * ex + e22 * ey,
            e11 * wx + e12 * wy,
            e21 * wx + e22 * wy,
        )

    return state


def _augmented_flow(flow: ZoneFlow, start: np.ndarray, t: np.ndarray) -> np.ndarray:
    M = np.zeros((3, 3))
    M[:2, :2] = flow.matrix
    M[:2, 2] = flow.offset
    vec = np.array([start[0], start[1], 1.0])
    tt = np.atleast_1d(t).ravel()
    out = np.array([(expm(M * ti) @ vec)[:2] for ti in tt])
    return out.reshape(t.shape + (2,))


def zone_velocity_at(flow: ZoneFlow, start, t) -> np.ndarray:
    """Velocity ``e^{A t} (A X0 + c)`` along the solution."""
    start = np.asarray(start, dtype=float)
    w = flow.matrix @ start + flow.offset
    return propagator(flow, t) @ w


def turning_times(flow: ZoneFlow, start, t_max: float) -> list[float]:
    """Times in ``(0, t_max)`` where the x-velocity vanishes, ascending.

    Between consecutive returned times x(t) is strictly monotone.
    """
    start = np.asarray(start, dtype=float)
    w = flow.matrix @ start + flow.offset
    N = flow.matrix - flow.half_trace * np.eye(2)
    p = w[0]
    q = (N @ w)[0]
    d2 = flow.disc
    out: list[float] = []
    if p == 0.0 and q == 0.0:
        return out
    if d2 > 0:
        d = math.sqrt(d2)
        if q != 0.0:
            arg = -p * d / q
            if abs(arg) < 1.0:
                t = math.atanh(arg) / d
                if t > 0:
                    out.append(t)
    elif d2 == 0.0:
        if q != 0.0:
            t = -p / q
            if t > 0:
                out.append(t)
    else:
        om = math.sqrt(-d2)
        phase = math.atan2(q / om, p)
        t0 = (phase + 0.5 * math.pi) / om
        step = math.pi / om
        k = math.floor(-t0 / step) + 1
        t = t0 + k * step
        if t <= 0:
            t += step
        while t < t_max:
            out.append(t)
            t += step
    return [t for t in out if t < t_max]


def _required_sign(line: float, direction: str) -> float:
    if direction not in ("entering", "leaving"):
        raise ValueError("direction must be 'entering' or 'leaving'")
    # entering the strip |x| < 1 means moving toward x = 0
    inward = -1.0 if line > 0 else 1.0
    return inward if direction == "entering" else -inward


def crossing_time(
    flow: ZoneFlow,
    start,
    line: float,
    direction: str,
    max_revolutions: int = 3,
    t_cap: float = 1e4,
) -> float:
    """First ``t > 0`` with ``x(t) = line`` and the requested x-velocity sign.

    ``direction='entering'`` means moving into the strip |x| < 1 and
    ``'leaving'`` the opposite. The search walks monotone windows
    between analytic turning times and refines with Brent's method.

    Raises
    ------
    NoCrossing
        The orbit never reaches the line in the requested direction.
    TangentialCrossing
        The contact has ``|x'| < 1e-10``.
    """
    start = np.asarray(start, dtype=float)
    want = _required_sign(line, direction)

    def g(t):
        return float(zone_flow_at(flow, start, t)[0]) - line

    def vx(t):
        return float(zone_velocity_at(flow, start, t)[0])

    g0 = float(start[0]) - line
    on_line = abs(g0) <= 1e-14 * (1.0 + abs(line))
    if on_line and abs(vx(0.0)) < TANGENT_SPEED:
        raise TangentialCrossing("start point is a tangency of the line")

    d2 = flow.disc
    if d2 < 0:
        period = 2.0 * math.pi / math.sqrt(-d2)
        horizon = min(max_revolutions * period, t_cap)
    else:
        horizon = t_cap
    turns = turning_times(flow, start, horizon)
    edges = [0.0] + turns
    for i, ta in enumerate(edges):
        last = i == len(edges) - 1
        if not last:
            tb = edges[i + 1]
        elif d2 < 0:
            tb = horizon
        else:
            tb = _grow_window(g, ta, d2, t_cap, g0 if i == 0 else g(ta))
            if tb is None:
                break
        ga = g0 if i == 0 else g(ta)
        gb = g(tb)
        mid_v = vx(0.5 * (ta + tb))
        if i == 0 and on_line:
            ga = 0.0
        elif mid_v * want > 0 and ga * gb < 0:
            t = brentq(g, ta, tb, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            if abs(vx(t)) < TANGENT_SPEED:
                raise TangentialCrossing(f"tangential contact at t = {t!r}")
            return t
        if not last and abs(gb) <= ROOT_TOL:
            raise TangentialCrossing(f"orbit touches x = {line} at turning time {tb!r}")
    raise NoCrossing(f"no {direction} crossing of x = {line} found")


def _grow_window(g, ta, d2, t_cap, ga):
    """Right end of the final monotone window, or None if no crossing."""
    scale = 1.0 / math.sqrt(d2) if d2 > 0 else 1.0
    step = scale
    prev = ga
    while step < t_cap:
        tb = ta + step
        try:
            gb = g(tb)
        except FloatingPointError:
            return None
        if not np.isfinite(gb):
            return None
        if gb * prev <= 0 or gb * ga < 0:
            return tb
        if abs(gb) > 1e12:
            return None
        step *= 2.0
    return None


# closed-form flight times
ARCS = ("R", "C1", "L", "C2", "C-full")


def central_half_angle(sys: SystemParameters, h: float) -> float:
    """Clockwise angle swept by the central orbit from (1, -h) to x = -1.

    Equals arccos(f4(h)), computed as atan2(sin, cos) for accuracy.
    """
    b = sys.beta_C
    f1 = math.sqrt(max(h * h - 4.0 * b, 0.0))
    sin_num = (1.0 - b) * f1 + (1.0 + b) * h
    cos_num = h * f1 - 1.0 + b * b
    return math.atan2(sin_num, cos_num)


def two_zone_central_angle(beta_C: float, h) -> float:
    """Clockwise central time from (1, -h) back to (1, h) without reaching x = -1."""
    return 2.0 * math.pi - 2.0 * np.arctan2(h, 1.0 - beta_C)


def flight_time(sys: SystemParameters, arc: str, h: float) -> float:
    """Closed-form flight time of an unperturbed arc.

    ``arc`` is one of ``R`` (A to A1), ``C1`` (A1 to A2), ``L`` (A2 to
    A3), ``C2`` (A3 to A) or ``C-full`` (B1 to B on a two-zone orbit).
    """
    geo = classify(sys)
    tR = sys.tau_R
    if arc == "R":
        if not (0.0 < h <= tR):
            raise EnergyOutOfRange(f"h = {h!r} outside (0, tau_R)")
        if tR - h < POLE_GAP * (1.0 + tR):
            raise LogSingularity("h at the right separatrix")
        return math.log((h + tR) / (tR - h)) / sys.omega_R
    if arc in ("C1", "C2", "L"):
        if geo.J0 is None or not (geo.J0[0] <= h <= geo.J0[1]):
            raise EnergyOutOfRange(f"h = {h!r} outside J0")
        if arc != "L":
            return central_half_angle(sys, h)
        tL = sys.tau_L
        f1 = math.sqrt(max(h * h - 4.0 * sys.beta_C, 0.0))
        if tL - f1 < POLE_GAP * (1.0 + tL):
            raise LogSingularity("f1(h) at the left separatrix")
        return math.log((f1 + tL) / (tL - f1)) / sys.omega_L
    if arc == "C-full":
        if geo.J1 is None or not (geo.J1[0] <= h <= geo.J1[1]):
            raise EnergyOutOfRange(f"h = {h!r} outside J1")
        return float(two_zone_central_angle(sys.beta_C, h))
    raise ValueError(f"unknown arc {arc!r}")


@dataclass(frozen=True)
class ArcSegment:
    """One zone arc between switching-line points."""

    zone: str
    start: tuple[float, float]
    end: tuple[float, float]
    duration: float
    flow: ZoneFlow

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """``n`` equally spaced times in ``[0, duration]`` and their points."""
        t = np.linspace(0.0, self.duration, n)
        return t, zone_flow_at(self.flow, self.start, t)


def flow_arc(flow: ZoneFlow, start, line: float, direction: str) -> ArcSegment:
    """Flow from ``start`` to its next crossing of ``line``."""
    t = crossing_time(flow, start, line, direction)
    end = zone_flow_at(flow, start, t)
    end[0] = line
    return ArcSegment(flow.zone, (float(start[0]), float(start[1])), (float(end[0]), float(end[1])), t, flow)


def orbit_arcs(
    sys: SystemParameters,
    h: float,
    zones: int = 3,
    pert: Optional[Perturbation] = None,
    eps: float = 0.0,
) -> list[ArcSegment]:
    """Arcs of the orbit starting at (1, h), until its return to x = 1.

    Three-zone orbits visit R, C, L, C; two-zone orbits visit R, C.
    """
    fl = {z: ZoneFlow.from_system(sys, z, pert, eps) for z in ("L", "C", "R")}
    arcs = [flow_arc(fl["R"], (1.0, h), 1.0, "entering")]
    if zones == 3:
        arcs.append(flow_arc(fl["C"], arcs[-1].end, -1.0, "leaving"))
        arcs.append(flow_arc(fl["L"], arcs[-1].end, -1.0, "entering"))
        arcs.append(flow_arc(fl["C"], arcs[-1].end, 1.0, "leaving"))
    elif zones == 2:
        arcs.append(flow_arc(fl["C"], arcs[-1].end, 1.0, "leaving"))
    else:
        raise ValueError("zones must be 2 or 3")
    return arcs


def trajectory_rows(sys: SystemParameters, arcs: Sequence[ArcSegment], n_per_arc: int = 200):
    """Rows ``(t, x, y, zone, H)`` along consecutive arcs, ``t`` cumulative."""
    rows = []
    t0 = 0.0
    for arc in arcs:
        t, pts = arc.sample(n_per_arc)
        H = sys.hamiltonian(arc.zone, pts[:, 0], pts[:, 1])
        for ti, (x, y), hv in zip(t, pts, H):
            rows.append((t0 + float(ti), float(x), float(y), arc.zone, float(hv)))
        t0 += arc.duration
    return rows
