"""Poincare displacement map of the perturbed system and its limit cycles.

The perturbed orbit through ``(1, h)`` is followed with the exact affine
zone flows until it returns to ``x = 1``; the displacement is measured in
the right-zone energy, which at ``x = 1`` equals ``b_R y^2 / 2`` up to a
constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BracketLost,
    NoCrossing,
    OrbitEscaped,
    TangencyEncountered,
    TangentialCrossing,
)
from .flows import orbit_arcs
from .melnikov import melnikov_m0, melnikov_m1
from .model import Perturbation, SystemParameters, classify

RESIDUAL_TOL = 1e-10
CLOSURE_TOL = 1e-9
BISECT_TOL = 1e-11


def displacement(
    sys: SystemParameters, pert: Perturbation, eps: float, h: float, zones: int = 3
) -> float:
    """Right-zone energy gained over one return to ``x = 1``.

    Raises
    ------
    OrbitEscaped
        The perturbed orbit misses a switching line it must cross.
    TangencyEncountered
        The perturbed orbit touches a switching line tangentially.
    """
    try:
        arcs = orbit_arcs(sys, h, zones, pert, eps)
    except TangentialCrossing as exc:
        raise TangencyEncountered(str(exc)) from exc
    except NoCrossing as exc:
        raise OrbitEscaped(str(exc)) from exc
    y = arcs[-1].end[1]
    return 0.5 * sys.b_R * (y * y - h * h)


def _energy_interval(sys, zones):
    geo = classify(sys)
    return geo.J0 if zones == 3 else geo.J1


@dataclass(frozen=True)
class LimitCycleRecord:
    """A crossing limit cycle located by bisection of the displacement.

    ``crossings`` are the switching-line points of the cycle, starting at
    ``(1, h)``; ``closure_error`` is the distance between the start and
    the end of a fresh re-flow from it.
    """

    eps: float
    zones: int
    h: float
    bracket: tuple[float, float]
    residual: float
    closure_error: float
    melnikov_zero: Optional[float]
    distance: Optional[float]
    crossings: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class CycleSearchResult:
    """Located cycles with the brackets that could not be resolved."""

    eps: float
    cycles: tuple[LimitCycleRecord, ...]
    lost: tuple[tuple[int, tuple[float, float], str], ...] = ()

    def count(self, zones: Optional[int] = None) -> int:
        return sum(1 for c in self.cycles if zones is None or c.zones == zones)


DisplacementFn = Callable[[float, float, int], float]


def _default_displacement(sys, pert) -> DisplacementFn:
    return lambda eps, h, zones: displacement(sys, pert, eps, h, zones)


def _bisect(fn, a, b, fa, fb, tol):
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m, m, m, fm
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    if abs(fa) <= abs(fb):
        return 0.5 * (a + b), a, b, fa
    return 0.5 * (a + b), a, b, fb


def locate_cycle(
    sys: SystemParameters,
    pert: Perturbation,
    eps: float,
    bracket: tuple[float, float],
    zones: int = 3,
    melnikov_zero: Optional[float] = None,
    tol: float = BISECT_TOL,
    displacement_fn: Optional[DisplacementFn] = None,
) -> LimitCycleRecord:
    """Bisect the displacement inside ``bracket``.

    ``displacement_fn(eps, h, zones)`` replaces the flow-based displacement
    when given; the closure check is then skipped.

    Raises
    ------
    BracketLost
        No sign change of the displacement remains in ``bracket``, or the
        orbit escapes or grazes a switching line there.
    """
    dfn = displacement_fn or _default_displacement(sys, pert)
    fn = lambda h: dfn(eps, h, zones)
    a, b = bracket
    try:
        fa, fb = fn(a), fn(b)
        if fa == 0.0 or fb == 0.0:
            h = a if fa == 0.0 else b
            lo = hi = h
            res = 0.0
        elif (fa > 0) == (fb > 0):
            raise BracketLost(f"no sign change of the displacement on ({a!r}, {b!r})")
        else:
            h, lo, hi, _ = _bisect(fn, a, b, fa, fb, tol)
            res = fn(h)
    except (OrbitEscaped, TangencyEncountered) as exc:
        raise BracketLost(str(exc)) from exc
    crossings, closure = (), 0.0
    if displacement_fn is None:
        arcs = orbit_arcs(sys, h, zones, pert, eps)
        crossings = tuple(arc.start for arc in arcs)
        end = arcs[-1].end
        closure = max(abs(end[0] - 1.0), abs(end[1] - h))
    dist = None if melnikov_zero is None else abs(h - melnikov_zero)
    return LimitCycleRecord(
        float(eps), zones, float(h), (float(lo), float(hi)), float(abs(res)),
        float(closure), melnikov_zero, dist, crossings,
    )


def _separating_brackets(zeros, interval, pad):
    """Disjoint brackets, one per zero, split at the midpoints between zeros."""
    lo, hi = interval[0] + pad, interval[1] - pad
    zs = sorted(zeros)
    cuts = [lo] + [0.5 * (a + b) for a, b in zip(zs, zs[1:])] + [hi]
    return [(cuts[i], cuts[i + 1]) for i in range(len(zs))]


def _growing_bracket(fn, z, limits, first=1e-7, factor=4.0):
    """Smallest bracket around ``z`` found by geometric growth with a sign change.

    Growth stops at ``limits``; an endpoint where the orbit escapes or
    grazes ends growth on that side.
    """
    lo_lim, hi_lim = limits
    span = hi_lim - lo_lim
    w = first * span
    a_ok = b_ok = True
    a, b = max(lo_lim, z - w), min(hi_lim, z + w)
    fa = fb = None
    while True:
        if a_ok:
            try:
                fa = fn(a)
            except (OrbitEscaped, TangencyEncountered):
                a_ok = False
        if b_ok:
            try:
                fb = fn(b)
            except (OrbitEscaped, TangencyEncountered):
                b_ok = False
        if fa is not None and fb is not None and (fa > 0) != (fb > 0):
            return (a, b)
        if fa == 0.0 or fb == 0.0:
            return (a, b)
        grow_a = a_ok and a > lo_lim
        grow_b = b_ok and b < hi_lim
        if not (grow_a or grow_b):
            break
        w *= factor
        if grow_a:
            a = max(lo_lim, z - w)
        if grow_b:
            b = min(hi_lim, z + w)
    raise BracketLost(f"no sign change of the displacement near h = {z!r}")


def find_limit_cycles(
    sys: SystemParameters,
    pert: Perturbation,
    eps: float,
    m0_zeros: Sequence[float] = (),
    m1_zeros: Sequence[float] = (),
    pad: float = 1e-9,
    displacement_fn: Optional[DisplacementFn] = None,
) -> CycleSearchResult:
    """Locate one crossing limit cycle near each given Melnikov zero.

    A bracket grows geometrically around each zero, never past the
    midpoints to its neighbours; a zero without a sign change of the
    displacement is reported in ``lost`` rather than raising.
    """
    cycles, lost = [], []
    for zones, zeros in ((3, m0_zeros), (2, m1_zeros)):
        if not len(zeros):
            continue
        interval = _energy_interval(sys, zones)
        dfn = displacement_fn or _default_displacement(sys, pert)
        fn = lambda h, zones=zones: dfn(eps, h, zones)
        for z, limits in zip(sorted(zeros), _separating_brackets(zeros, interval, pad)):
            try:
                br = _growing_bracket(fn, z, limits)
                cycles.append(locate_cycle(sys, pert, eps, br, zones, z, displacement_fn=displacement_fn))
            except BracketLost as exc:
                lost.append((zones, limits, str(exc)))
    return CycleSearchResult(eps, tuple(cycles), tuple(lost))


def first_order_error(
    sys: SystemParameters, pert: Perturbation, eps: float, h: float, zones: int = 3
) -> float:
    """``|displacement / eps - M|`` with M the matching Melnikov function."""
    m = melnikov_m0(sys, pert, h) if zones == 3 else melnikov_m1(sys, pert, h)
    return abs(displacement(sys, pert, eps, h, zones) / eps - float(m))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Cycle-to-zero distances and first-order errors over an eps sweep.

    ``distances[i][j]`` is the distance between the j-th Melnikov zero
    that kept a cycle at every eps and that cycle at ``eps[i]``;
    ``errors[i][j]`` is the first-order error at ``sample_h[j]``. Orders
    are least-squares slopes against ``log(eps)``; ``fitted_order`` is the
    median distance order and ``degraded[j]`` flags distance orders
    outside ``ORDER_RANGE``.
    """

    eps: tuple[float, ...]
    zeros: tuple[tuple[int, float], ...]
    distances: tuple[tuple[float, ...], ...]
    distance_ratios: tuple[tuple[float, ...], ...]
    distance_orders: tuple[float, ...]
    degraded: tuple[bool, ...]
    sample_h: tuple[float, ...]
    errors: tuple[tuple[float, ...], ...]
    error_ratios: tuple[tuple[float, ...], ...]
    error_order: float
    fitted_order: float
    results: tuple[CycleSearchResult, ...] = ()


ORDER_RANGE = (0.8, 1.2)


def _ratios(rows):
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 2 or rows.shape[1] == 0:
        return ()
    return tuple(tuple(float(v) for v in r) for r in rows[1:] / rows[:-1])


def _slopes(eps_values, rows):
    rows = np.asarray(rows, dtype=float)
    x = np.log(np.asarray(eps_values, dtype=float))
    out = []
    for j in range(rows.shape[1] if rows.ndim == 2 else 0):
        col = rows[:, j]
        out.append(float(np.polyfit(x, np.log(col), 1)[0]) if np.all(col > 0) else float("nan"))
    return tuple(out)


def _median(vals):
    vals = [v for v in vals if np.isfinite(v)]
    return float(np.median(vals)) if vals else float("nan")


def convergence_study(
    sys: SystemParameters,
    pert: Perturbation,
    m0_zeros: Sequence[float],
    m1_zeros: Sequence[float] = (),
    eps_values: Sequence[float] = (4e-4, 2e-4, 1e-4),
    sample_h: Optional[Sequence[float]] = None,
    n_samples: int = 10,
    displacement_fn: Optional[DisplacementFn] = None,
) -> ConvergenceStudy:
    """Check the first-order Melnikov limit as eps decreases.

    ``eps_values`` must be strictly decreasing. First-order errors are
    sampled at ``sample_h`` (default: ``n_samples`` interior points of
    J0) and skipped when ``displacement_fn`` replaces the flow.

    Raises
    ------
    BracketLost
        If a zero has no cycle at the largest eps.
    """
    eps_values = tuple(float(e) for e in eps_values)
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps values must be strictly decreasing")
    if displacement_fn is not None:
        sample_h = ()
    elif sample_h is None:
        lo, hi = classify(sys).J0
        sample_h = lo + (hi - lo) * np.linspace(0.1, 0.9, n_samples)
    sample_h = tuple(float(h) for h in sample_h)
    results, errs = [], []
    for eps in eps_values:
        res = find_limit_cycles(sys, pert, eps, m0_zeros, m1_zeros, displacement_fn=displacement_fn)
        if not results and res.lost:
            raise BracketLost(f"{len(res.lost)} bracket(s) lost at eps = {eps!r}")
        results.append(res)
        errs.append(tuple(first_order_error(sys, pert, eps, h) for h in sample_h))
    by_zero = [{(c.zones, c.melnikov_zero): c.distance for c in r.cycles} for r in results]
    common = [k for k in by_zero[0] if all(k in d for d in by_zero[1:])]
    dists = [tuple(d[k] for k in common) for d in by_zero]
    orders = _slopes(eps_values, dists)
    lo_o, hi_o = ORDER_RANGE
    return ConvergenceStudy(
        eps=eps_values,
        zeros=tuple(common),
        distances=tuple(dists),
        distance_ratios=_ratios(dists),
        distance_orders=orders,
        degraded=tuple(not (lo_o <= o <= hi_o) for o in orders),
        sample_h=sample_h,
        errors=tuple(tuple(r) for r in errs),
        error_ratios=_ratios(errs),
        error_order=_median(_slopes(eps_values, errs)),
        fitted_order=_median(orders),
        results=tuple(results),
    )
