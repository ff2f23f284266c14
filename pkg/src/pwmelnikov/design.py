"""Perturbation families, coefficient ladders and zero isolation.

The expansion coefficients are linear in the perturbation, so every
construction here reduces to small linear systems. Jacobians are still
estimated by finite differences and their rank is checked by SVD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    D3Vanishes,
    EmptyAnnulus,
    Lambda1Singular,
    Lambda2Zero,
    NewtonDivergence,
    RankDeficient,
    RootNotBracketed,
    ValidationError,
)
from .expansion import THREE_ZONE_NAMES, TWO_ZONE_NAMES, expansion_coefficients, lambda1, lambda2
from .melnikov import DOMAIN_MARGIN, melnikov_m0, melnikov_m1
from .model import (
    PERTURBATION_NAMES,
    Perturbation,
    SystemParameters,
    classify,
    example_system,
)

RANK_RTOL = 1e-6
FAMILY_TOL = 1e-10
COEFF_NAMES = THREE_ZONE_NAMES + TWO_ZONE_NAMES

# parameter directions, as combinations of perturbation coefficients
REAL_UNKNOWNS = ("p00", "r10", "u10", "r00", "p10")
VIRTUAL_UNKNOWNS = ("p00", "r10", "p10", "u10=-v01")


def _direction(name: str) -> np.ndarray:
    vec = np.zeros(len(PERTURBATION_NAMES))
    if name == "u10=-v01":
        vec[PERTURBATION_NAMES.index("u10")] = 1.0
        vec[PERTURBATION_NAMES.index("v01")] = -1.0
    else:
        vec[PERTURBATION_NAMES.index(name)] = 1.0
    return vec


def coefficient_vector(sys: SystemParameters, pert: Perturbation, names: Sequence[str]) -> np.ndarray:
    d = expansion_coefficients(sys, pert).as_dict()
    return np.array([d[n] for n in names])


def coefficient_jacobian(
    sys: SystemParameters,
    pert: Perturbation,
    coeffs: Sequence[str],
    unknowns: Sequence[str],
    step: float = 1.0,
) -> np.ndarray:
    """Central finite-difference Jacobian of ``coeffs`` w.r.t. ``unknowns``."""
    base = pert.to_array()
    J = np.empty((len(coeffs), len(unknowns)))
    for j, u in enumerate(unknowns):
        d = step * _direction(u)
        hi = coefficient_vector(sys, Perturbation.from_array(base + d), coeffs)
        lo = coefficient_vector(sys, Perturbation.from_array(base - d), coeffs)
        J[:, j] = (hi - lo) / (2.0 * step)
    return J


def numerical_rank(J: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, np.ndarray]:
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[0] == 0:
        return 0, sv
    return int(np.sum(sv > rtol * sv[0])), sv


@dataclass(frozen=True)
class FamilyResult:
    """A constructed perturbation with its diagnostics."""

    perturbation: Perturbation
    coefficients: dict
    rank: int
    singular_values: tuple[float, ...]
    degenerate: bool = False
    notes: tuple[str, ...] = ()


def _scale(pert: Perturbation) -> float:
    return 1.0 + float(np.max(np.abs(pert.to_array())))


def construct_real_center_family(
    sys: SystemParameters,
    u00: float = 0.0,
    v01: float = 0.0,
    s01: float = 0.0,
    q01: float = 0.0,
    base: Optional[Perturbation] = None,
) -> FamilyResult:
    """Perturbation with C00 = D1 = C10 = D3 = C20 = 0 for 0 < beta_C <= 1.

    Sets p00 = q01 + b_R (u00 - v01), r10 = -s01, u10 = -v01,
    r00 = -s01 + b_L (u00 + v01), p10 = -q01; the remaining coefficients
    come from ``base``.
    """
    _require_annulus(sys)
    if not 0.0 < sys.beta_C <= 1.0:
        raise ValidationError("real-center family needs 0 < beta_C <= 1")
    pert = (base or Perturbation()).with_values(
        u00=u00, v01=v01, s01=s01, q01=q01,
        p00=q01 + sys.b_R * (u00 - v01), r10=-s01, u10=-v01,
        r00=-s01 + sys.b_L * (u00 + v01), p10=-q01,
    )
    J = coefficient_jacobian(sys, pert, THREE_ZONE_NAMES, REAL_UNKNOWNS)
    rank, sv = numerical_rank(J)
    if rank < 5:
        raise RankDeficient(f"Jacobian rank {rank} < 5")
    coeffs = expansion_coefficients(sys, pert).as_dict()
    return FamilyResult(pert, coeffs, rank, tuple(sv))


def predicted_c20(sys: SystemParameters, p10_plus_q01: float) -> float:
    """C20 of the exact-M1 family in terms of lambda1 and lambda2."""
    b = sys.beta_C
    return -(p10_plus_q01 * lambda2(sys)) / (
        2.0 * sys.omega_R * (1.0 + b) ** 2 * (4.0 * b - sys.tau_R**2) * lambda1(b)
    )


def construct_real_center_exact_m1(
    sys: SystemParameters,
    v01: float = 0.0,
    s01: float = 0.0,
    u00: float = 0.0,
    q01: float = 0.0,
    p10: float = 1.0,
    base: Optional[Perturbation] = None,
) -> FamilyResult:
    """Perturbation with C00 = D1 = C10 = D3 = 0 and generically C20 != 0.

    Solves the four vanishing conditions for (p00, r10, u10, r00) by a
    linear solve; the resulting C20 is checked against
    :func:`predicted_c20`.

    Raises
    ------
    Lambda1Singular
        At a zero of lambda1 the solve is singular.
    Lambda2Zero
        If lambda2 vanishes (C20 would vanish for every choice).
    """
    _require_annulus(sys)
    if not 0.0 < sys.beta_C <= 1.0:
        raise ValidationError("exact-M1 family needs 0 < beta_C <= 1")
    l1 = lambda1(sys.beta_C)
    if abs(l1) < 1e-8:
        raise Lambda1Singular(f"lambda1({sys.beta_C!r}) = {l1!r}")
    l2 = lambda2(sys)
    if abs(l2) < 1e-12:
        raise Lambda2Zero(f"lambda2 = {l2!r}")
    start = (base or Perturbation()).with_values(v01=v01, s01=s01, u00=u00, q01=q01, p10=p10)
    unknowns = ("p00", "r10", "u10", "r00")
    start = start.with_values(p00=0.0, r10=0.0, u10=0.0, r00=0.0)
    names = ("C00", "D1", "C10", "D3")
    J = coefficient_jacobian(sys, start, names, unknowns)
    rank, sv = numerical_rank(J)
    if rank < 4:
        raise Lambda1Singular(f"vanishing conditions are singular (rank {rank})")
    rhs = -coefficient_vector(sys, start, names)
    delta = np.linalg.solve(J, rhs)
    vec = start.to_array() + sum(d * _direction(u) for d, u in zip(delta, unknowns))
    pert = Perturbation.from_array(vec)
    coeffs = expansion_coefficients(sys, pert).as_dict()
    notes = []
    degenerate = p10 + q01 == 0.0
    if degenerate:
        notes.append("p10 = -q01 makes C20 vanish")
    J5 = coefficient_jacobian(sys, pert, THREE_ZONE_NAMES, REAL_UNKNOWNS)
    rank5, sv5 = numerical_rank(J5)
    return FamilyResult(pert, coeffs, rank5, tuple(sv5), degenerate, tuple(notes))


def construct_virtual_center_family(
    sys: SystemParameters,
    u00: float = 0.0,
    u10: float = 1.0,
    r00: float = 0.0,
    s01: float = 0.0,
    q01: float = 0.0,
    base: Optional[Perturbation] = None,
) -> FamilyResult:
    """Perturbation with C00 = D1 = C10 = 0 and D3 != 0 for beta_C > 1.

    Sets v01 = -u10, p00 = q01 + b_R (u00 + u10),
    r10 = r00 + b_L (u10 - u00), p10 = -q01.

    Raises
    ------
    D3Vanishes
        When u10 = u00 - (r00 + s01) / b_L.
    """
    _require_annulus(sys)
    if not sys.beta_C > 1.0:
        raise ValidationError("virtual-center family needs beta_C > 1")
    excl = u00 - (r00 + s01) / sys.b_L
    if math.isclose(u10, excl, rel_tol=1e-12, abs_tol=1e-14):
        raise D3Vanishes(f"u10 = {u10!r} hits the excluded value {excl!r}")
    pert = (base or Perturbation()).with_values(
        u00=u00, u10=u10, r00=r00, s01=s01, q01=q01, v01=-u10,
        p00=q01 + sys.b_R * (u00 + u10), r10=r00 + sys.b_L * (u10 - u00), p10=-q01,
    )
    coeffs = expansion_coefficients(sys, pert).as_dict()
    if abs(coeffs["D3"]) <= 1e-12 * _scale(pert):
        raise D3Vanishes("D3 vanishes for the chosen parameters")
    J = coefficient_jacobian(sys, pert, ("C00", "D1", "C10", "D3"), VIRTUAL_UNKNOWNS)
    rank, sv = numerical_rank(J)
    if rank < 4:
        raise RankDeficient(f"Jacobian rank {rank} < 4")
    return FamilyResult(pert, coeffs, rank, tuple(sv))


def _require_annulus(sys: SystemParameters):
    if classify(sys).J0 is None:
        raise EmptyAnnulus("three-zone annulus is empty")


@dataclass(frozen=True)
class CoefficientLadder:
    """Target values for a leading run of expansion coefficients.

    ``names`` are ordered from the lowest power upward, e.g.
    ``("C00", "D1", "C10", "D3", "C20")``. The ladder's values have
    alternating signs and magnitudes growing toward the top rung.
    """

    names: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")
        for n in self.names:
            if n not in COEFF_NAMES:
                raise ValueError(f"unknown coefficient {n!r}")

    @classmethod
    def from_roots(cls, names: Sequence[str], roots: Sequence[float], top: float = 1.0) -> "CoefficientLadder":
        """Rungs of ``top * prod(u - r_i)``, lowest power first.

        Positive distinct roots give strictly alternating signs, and the
        truncated expansion has exactly these roots in ``u``.
        """
        names = tuple(names)
        if len(roots) != len(names) - 1:
            raise ValueError("need one root fewer than rungs")
        poly = np.poly1d(list(roots), r=True) * top
        vals = tuple(float(c) for c in poly.coeffs[::-1])
        return cls(names, vals)

    @classmethod
    def uniform(cls, names: Sequence[str], rho: float = 1e-3, top: float = 1.0) -> "CoefficientLadder":
        """Rungs with a single ratio ``rho`` between consecutive magnitudes.

        The truncated polynomial is ``top rho^n P(u / rho)`` with
        ``P(w) = w^n - w^(n-1) + ... +/- 1``, which for n = 4 has no real
        roots; see :meth:`from_roots` for ladders that do produce zeros.
        """
        names = tuple(names)
        n = len(names) - 1
        vals = tuple(top * (-1) ** (n - j) * rho ** (n - j) for j in range(n + 1))
        return cls(names, vals)

    def alternates(self) -> bool:
        v = self.values
        return all(a * b < 0 for a, b in zip(v, v[1:]))

    def is_zero(self) -> bool:
        return not any(self.values)


def ladder_perturb(
    base: Perturbation,
    ladder: CoefficientLadder,
    sys: SystemParameters,
    unknowns: Optional[Sequence[str]] = None,
    tol: float = 1e-10,
    max_iter: int = 8,
) -> Perturbation:
    """Adjust ``unknowns`` of ``base`` so the ladder's coefficients are met.

    Damped Newton on the square coefficient map; the map is affine, so one
    full step normally converges.

    Raises
    ------
    RankDeficient, NewtonDivergence
    """
    if ladder.is_zero() and np.allclose(coefficient_vector(sys, base, ladder.names), 0.0, atol=tol):
        return base
    if unknowns is None:
        unknowns = REAL_UNKNOWNS if len(ladder.names) == 5 else VIRTUAL_UNKNOWNS
    unknowns = tuple(unknowns)
    if len(unknowns) != len(ladder.names):
        raise ValueError("ladder and unknowns must have equal length")
    target = np.asarray(ladder.values, dtype=float)
    vec = base.to_array()
    scale = 1.0 + float(np.max(np.abs(target)))
    dirs = np.array([_direction(u) for u in unknowns])
    for _ in range(max_iter):
        pert = Perturbation.from_array(vec)
        res = coefficient_vector(sys, pert, ladder.names) - target
        if np.max(np.abs(res)) <= tol * scale:
            return pert
        J = coefficient_jacobian(sys, pert, ladder.names, unknowns)
        rank, _ = numerical_rank(J)
        if rank < len(unknowns):
            raise RankDeficient(f"coefficient map has rank {rank} < {len(unknowns)}")
        step = np.linalg.solve(J, -res)
        lam = 1.0
        norm0 = np.linalg.norm(res)
        while lam > 1e-4:
            trial = vec + lam * step @ dirs
            r_new = coefficient_vector(sys, Perturbation.from_array(trial), ladder.names) - target
            if np.linalg.norm(r_new) < norm0 or np.max(np.abs(r_new)) <= tol * scale:
                break
            lam *= 0.5
        vec = trial
    pert = Perturbation.from_array(vec)
    res = coefficient_vector(sys, pert, ladder.names) - target
    if np.max(np.abs(res)) <= tol * scale:
        return pert
    raise NewtonDivergence(f"ladder residual {np.max(np.abs(res))!r} after {max_iter} steps")


@dataclass(frozen=True)
class ZeroCertificate:
    """Sign-change brackets of a scalar function on an interval.

    ``coarse`` are the sampling brackets, ``refined`` their bisection
    refinements. ``simple[i]`` is True when the sampled differences on the
    coarse bracket keep one sign.
    """

    interval: tuple[float, float]
    coarse: tuple[tuple[float, float], ...]
    refined: tuple[tuple[float, float], ...]
    coarse_values: tuple[tuple[float, float], ...]
    simple: tuple[bool, ...]
    scale: float

    def __len__(self) -> int:
        return len(self.refined)

    @property
    def midpoints(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in self.refined)

    @property
    def n_simple(self) -> int:
        return int(sum(self.simple))


def _sample_nodes(lo: float, hi: float, budget: int, spacing: str) -> np.ndarray:
    t = np.linspace(0.0, 1.0, budget + 1)
    if spacing == "uniform":
        return lo + (hi - lo) * t
    if spacing == "sqrt-lower":
        return lo + (hi - lo) * t * t
    if spacing == "sqrt-upper":
        return hi - (hi - lo) * (1.0 - t) ** 2
    raise ValueError(f"unknown spacing {spacing!r}")


def isolate_zeros(
    fn: Callable,
    interval: tuple[float, float],
    budget: int = 2000,
    spacing: str = "uniform",
    simplicity_samples: int = 9,
) -> ZeroCertificate:
    """Certify sign changes of ``fn`` on a closed interval.

    ``fn`` must accept numpy arrays. Samples ``budget + 1`` nodes (nested
    when the budget doubles), brackets every sign change and refines each
    bracket by Brent's method to width ``1e-12 |interval|``.
    ``spacing='sqrt-lower'`` (``'sqrt-upper'``) clusters nodes quadratically
    toward the lower (upper) end.
    """
    lo, hi = float(interval[0]), float(interval[1])
    nodes = _sample_nodes(lo, hi, budget, spacing)
    vals = np.asarray(fn(nodes), dtype=float)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    margin = 1e-14 * scale
    width = 1e-12 * (hi - lo)
    coarse, refined, cvals, simple = [], [], [], []
    sgn = np.sign(np.where(np.abs(vals) <= margin, 0.0, vals))
    idx = np.nonzero(sgn != 0)[0]
    for i, j in zip(idx[:-1], idx[1:]):
        if sgn[i] * sgn[j] >= 0:
            continue
        a, b = nodes[i], nodes[j]
        fa, fb = vals[i], vals[j]
        g = lambda x: float(np.asarray(fn(np.array([x])))[0])
        r = brentq(g, a, b, xtol=width, rtol=4 * np.finfo(float).eps)
        ra, rb = max(a, r - width), min(b, r + width)
        inner = np.linspace(a, b, simplicity_samples)
        dv = np.diff(np.asarray(fn(inner), dtype=float))
        coarse.append((float(a), float(b)))
        refined.append((float(ra), float(rb)))
        cvals.append((float(fa), float(fb)))
        simple.append(bool(np.all(dv > 0) or np.all(dv < 0)))
    return ZeroCertificate((lo, hi), tuple(coarse), tuple(refined), tuple(cvals), tuple(simple), scale)


def m0_zero_certificate(sys, pert, budget: int = 2000, edge: float = 1e-9) -> ZeroCertificate:
    """Zeros of M0 on J0, sampled densely near the tangency level."""
    geo = classify(sys)
    lo, hi = geo.J0
    pad = max(edge, 10 * DOMAIN_MARGIN)
    return isolate_zeros(
        lambda h: melnikov_m0(sys, pert, h, geometry=geo), (lo + pad, hi - pad), budget, "sqrt-lower"
    )


def m1_zero_certificate(sys, pert, budget: int = 2000, edge: float = 1e-9) -> ZeroCertificate:
    """Zeros of M1 on J1, sampled densely near the tangency level."""
    geo = classify(sys)
    lo, hi = geo.J1
    pad = max(edge, 10 * DOMAIN_MARGIN)
    return isolate_zeros(
        lambda h: melnikov_m1(sys, pert, h, geometry=geo), (lo + pad, hi - pad), budget, "sqrt-upper"
    )


# example constructions

CASES = {
    "real": dict(beta_C=0.5),
    "boundary": dict(beta_C=1.0),
    "virtual": dict(beta_C=2.0),
}


@dataclass(frozen=True)
class ExampleConstruction:
    """A constructed configuration with its zero certificates."""

    case: str
    system: SystemParameters
    perturbation: Perturbation
    ladder: CoefficientLadder
    m0_certificate: ZeroCertificate
    m1_certificate: ZeroCertificate
    targets: tuple[int, int]
    collocation: tuple[float, ...]
    score: float

    @property
    def satisfied(self) -> bool:
        n0, n1 = self.targets
        k0, k1 = self.m0_certificate.n_simple, self.m1_certificate.n_simple
        if self.case == "virtual":
            return k0 >= n0 and k1 >= n1
        return k0 >= n0 and k1 == n1


def example_for_case(case: str, beta_C: Optional[float] = None) -> SystemParameters:
    """The saddle-center-saddle example used for each construction case."""
    if case not in CASES:
        raise ValidationError(f"unknown case {case!r}")
    b = CASES[case]["beta_C"] if beta_C is None else float(beta_C)
    if b <= 0:
        raise ValidationError("beta_C must be positive")
    if case == "virtual":
        if not b > 1.0:
            raise ValidationError("virtual case needs beta_C > 1")
        return example_system(beta_C=b, beta_L=4.0, beta_R=-5.0)
    if not b <= 1.0:
        raise ValidationError(f"{case} case needs 0 < beta_C <= 1")
    return example_system(beta_C=b, beta_L=4.0, beta_R=-4.0)


def _lobe_count_and_height(vals):
    """Sign changes of sampled values and the smallest lobe maximum."""
    s = np.sign(vals)
    idx = np.nonzero(s[1:] * s[:-1] < 0)[0]
    lobes = np.split(np.abs(vals), idx + 1)
    return len(idx), min(float(l.max()) for l in lobes)


def collocation_direction(
    sys: SystemParameters, base: Perturbation, unknowns: Sequence[str], m0_zeros: Sequence[float]
) -> np.ndarray:
    """Unit combination of ``unknowns`` whose M0 vanishes at ``m0_zeros``.

    Needs one zero fewer than unknowns; the combination spans the null
    space of the collocation matrix, which is one-dimensional generically.
    """
    zs = np.asarray(m0_zeros, dtype=float)
    dirs = np.array([_direction(u) for u in unknowns])
    A = np.array([melnikov_m0(sys, Perturbation.from_array(d), zs) for d in dirs]).T
    A = np.vstack([A, np.zeros((0, len(unknowns)))])
    _, sv, vt = np.linalg.svd(A)
    if len(sv) < len(unknowns) - 1 or sv[-1] <= RANK_RTOL * sv[0]:
        raise RankDeficient("collocation conditions are dependent")
    return vt[-1] @ dirs


def search_zero_placement(
    sys: SystemParameters,
    unknowns: Sequence[str],
    targets: tuple[int, int],
    trials: int = 3000,
    seed: int = 0,
    grid: int = 800,
    min_gap: float = 0.01,
    exact_m1: bool = True,
) -> tuple[tuple[float, ...], float]:
    """Choose M0 collocation zeros that also leave the required M1 zeros.

    Candidate zeros are drawn with quadratic clustering toward the
    tangency level. Each candidate is scored by the smallest lobe height
    of M0 on J0 and M1 on J1 for a unit-norm perturbation; the best
    candidate meeting the targets is returned with its score.
    """
    geo = classify(sys)
    lo, hi = geo.J0
    top1 = geo.J1[1]
    t = np.linspace(0.0, 1.0, grid + 1)[1:-1]
    g0 = lo + (hi - lo) * t * t
    g1 = top1 - top1 * t * t
    dirs = np.array([_direction(u) for u in unknowns])
    B0 = np.array([melnikov_m0(sys, Perturbation.from_array(d), g0) for d in dirs]).T
    B1 = np.array([melnikov_m1(sys, Perturbation.from_array(d), g1) for d in dirs]).T
    n_col = len(unknowns) - 1
    n0, n1 = targets
    rng = np.random.default_rng(seed)
    best, best_score = None, -1.0
    for _ in range(trials):
        zs = lo + (hi - lo) * np.sort(rng.uniform(0.0, 1.0, n_col)) ** 2
        if np.min(np.diff(np.r_[lo, zs, hi])) < min_gap * (hi - lo):
            continue
        A = np.array([melnikov_m0(sys, Perturbation.from_array(d), zs) for d in dirs]).T
        _, sv, vt = np.linalg.svd(A)
        if sv[-1] <= RANK_RTOL * sv[0]:
            continue
        c = vt[-1] / np.linalg.norm(vt[-1] @ dirs)
        k0, a0 = _lobe_count_and_height(B0 @ c)
        k1, a1 = _lobe_count_and_height(B1 @ c)
        ok1 = k1 == n1 if exact_m1 else k1 >= n1
        if k0 >= n0 and ok1 and min(a0, a1) > best_score:
            best, best_score = tuple(float(z) for z in zs), min(a0, a1)
    if best is None:
        raise RootNotBracketed(f"no collocation placement reached {targets} zeros")
    return best, best_score


def construct_example(
    case: str,
    beta_C: Optional[float] = None,
    seed: int = 0,
    trials: int = 3000,
    budget: int = 2000,
    m0_zeros: Optional[Sequence[float]] = None,
) -> ExampleConstruction:
    """Build the limit-cycle configuration for ``case``.

    ``real`` and ``boundary`` target four zeros of M0 and exactly two of
    M1 with a five-rung ladder on (C00, D1, C10, D3, C20); ``virtual``
    targets three and one with a four-rung ladder on (C00, D1, C10, D3)
    and v01 = -u10. The rung values are those of the perturbation whose
    M0 vanishes at collocation energies chosen by
    :func:`search_zero_placement`; the ladder is then realized from the
    vanishing family by :func:`ladder_perturb` and both Melnikov
    functions are certified by :func:`isolate_zeros`.
    """
    sys = example_for_case(case, beta_C)
    if case == "virtual":
        names, unknowns, targets = THREE_ZONE_NAMES[:4], VIRTUAL_UNKNOWNS, (3, 1)
        base = Perturbation()
    else:
        names, unknowns, targets = THREE_ZONE_NAMES, REAL_UNKNOWNS, (4, 2)
        base = construct_real_center_family(sys).perturbation
    if m0_zeros is None:
        m0_zeros, score = search_zero_placement(
            sys, unknowns, targets, trials=trials, seed=seed, exact_m1=case != "virtual"
        )
    else:
        m0_zeros, score = tuple(float(z) for z in m0_zeros), float("nan")
    direction = collocation_direction(sys, base, unknowns, m0_zeros)
    rungs = coefficient_vector(sys, base + Perturbation.from_array(direction), names)
    rungs = rungs - coefficient_vector(sys, base, names)
    rungs = rungs / rungs[np.argmax(np.abs(rungs))]
    ladder = CoefficientLadder(tuple(names), tuple(float(v) for v in rungs))
    pert = ladder_perturb(base, ladder, sys, unknowns)
    c0 = m0_zero_certificate(sys, pert, budget)
    c1 = m1_zero_certificate(sys, pert, budget)
    return ExampleConstruction(case, sys, pert, ladder, c0, c1, targets, tuple(m0_zeros), score)
