"""Command-line interface.

Every command reads a scenario (except ``construct-example``), computes
its report in memory and only then writes files into ``--out``, so a
failed run leaves no partial output. Exit status is 0 on success, 2 on
validation errors and 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys as _sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .design import (
    CASES,
    construct_example,
    m0_zero_certificate,
    m1_zero_certificate,
)
from .errors import BracketLost, MelnikovError, NumericalError, ValidationError
from .expansion import expansion_coefficients, identity_residuals, lambda1, lambda2, phi
from .flows import orbit_arcs, trajectory_rows
from .melnikov import melnikov_m0, melnikov_m0_oracle, melnikov_m1, melnikov_m1_oracle
from .model import RawSystem, classify, normalize, validate
from .scenario import Scenario, fmt, read_scenario
from .verify import convergence_study, find_limit_cycles

DEFAULT_EPS = (4e-4, 2e-4, 1e-4)
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
MAX_SWEEP_SHRINK = 3


# output formatting

def _json(obj, indent: int = 0) -> str:
    """JSON text with floats at seventeen significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) or v is None for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (fmt(v) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()


def _interval(iv):
    return None if iv is None else [float(iv[0]), float(iv[1])]


def _system_of(scn: Scenario):
    if isinstance(scn.system, RawSystem):
        return normalize(scn.system)
    return validate(scn.system)


def _config_hash(scn: Scenario, extra: str = "") -> str:
    return hashlib.sha256((scn.to_text() + extra).encode()).hexdigest()


def _certificate_report(cert) -> dict:
    return {
        "interval": list(cert.interval),
        "count": len(cert),
        "simple": cert.n_simple,
        "zeros": [
            {
                "coarse": list(c),
                "refined": list(r),
                "midpoint": 0.5 * (r[0] + r[1]),
                "values": list(v),
                "simple": s,
            }
            for c, r, v, s in zip(cert.coarse, cert.refined, cert.coarse_values, cert.simple)
        ],
    }


# commands; each returns {filename: text}

def cmd_normalize(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    out = Scenario(sys, scn.perturbation, scn.run)
    return {"normalized.ini": out.to_text()}


def cmd_classify(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    g = classify(sys)
    rep = {
        "system": sys.as_dict(),
        "omega_R": g.omega_R,
        "omega_L": g.omega_L,
        "tau_R": g.tau_R,
        "tau_L": g.tau_L,
        "J0": _interval(g.J0),
        "J1": _interval(g.J1),
        "portrait_class": g.portrait_class.value,
        "center_kind": g.center_kind.value,
    }
    return {"classify.json": _json(rep) + "\n"}


def _inside(h, iv, margin=1e-12):
    return iv is not None and iv[0] + margin < h < iv[1] - margin


def cmd_melnikov_eval(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    g = classify(sys)
    n = args.grid or scn.run_int("grid", 50)
    lo = g.J1[0] if g.J1 is not None else g.J0[0]
    hi = g.J0[1] if g.J0 is not None else g.J1[1]
    hs = lo + (hi - lo) * (np.arange(1, n + 1) / (n + 1))
    rows = []
    p = scn.perturbation
    for h in hs:
        h = float(h)
        r = [h, None, None, None, None]
        if _inside(h, g.J0):
            r[1] = float(melnikov_m0(sys, p, h, geometry=g))
            r[2] = melnikov_m0_oracle(sys, p, h)
        if _inside(h, g.J1):
            r[3] = float(melnikov_m1(sys, p, h, geometry=g))
            r[4] = melnikov_m1_oracle(sys, p, h)
        rows.append(r)
    return {"melnikov.csv": _csv(["h", "M0_closed", "M0_oracle", "M1_closed", "M1_oracle"], rows)}


def cmd_expand(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    e = expansion_coefficients(sys, scn.perturbation)
    try:
        l2 = lambda2(sys)
    except MelnikovError:
        l2 = None
    rep = {
        "coefficients": e.as_dict(),
        "arccos_two_zone": dict(zip(("C01", "C11", "C21"), e.arccos_two_zone)),
        "phi": phi(sys.beta_C),
        "lambda1": lambda1(sys.beta_C),
        "lambda2": l2,
        "identity_residuals": identity_residuals(e),
    }
    return {"expand.json": _json(rep) + "\n"}


def _certificates(sys, pert, budget):
    g = classify(sys)
    c0 = m0_zero_certificate(sys, pert, budget) if g.J0 is not None else None
    c1 = m1_zero_certificate(sys, pert, budget) if g.J1 is not None else None
    return c0, c1


def cmd_find_zeros(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    budget = args.grid or scn.run_int("budget", 2000)
    c0, c1 = _certificates(sys, scn.perturbation, budget)
    rep = {
        "budget": budget,
        "M0": None if c0 is None else _certificate_report(c0),
        "M1": None if c1 is None else _certificate_report(c1),
    }
    return {"zeros.json": _json(rep) + "\n"}


def cmd_construct_example(args, scn: Optional[Scenario]) -> dict:
    case = args.case or "real"
    budget = args.grid or 2000
    ex = construct_example(case, beta_C=args.beta_C, seed=args.seed, budget=budget)
    run = {"case": case, "eps": " ".join(fmt(e) for e in DEFAULT_EPS), "budget": str(budget)}
    out = Scenario(ex.system, ex.perturbation, run)
    rep = {
        "case": case,
        "beta_C": ex.system.beta_C,
        "targets": {"M0": ex.targets[0], "M1": ex.targets[1]},
        "satisfied": ex.satisfied,
        "ladder": dict(zip(ex.ladder.names, ex.ladder.values)),
        "ladder_alternates": ex.ladder.alternates(),
        "collocation_energies": list(ex.collocation),
        "M0": _certificate_report(ex.m0_certificate),
        "M1": _certificate_report(ex.m1_certificate),
    }
    return {f"{case}.ini": out.to_text(), f"{case}_certificates.json": _json(rep) + "\n"}


def _cycle_record(c) -> dict:
    return {
        "eps": c.eps,
        "zones": c.zones,
        "h": c.h,
        "bracket": list(c.bracket),
        "melnikov_zero": c.melnikov_zero,
        "distance": c.distance,
        "residual": c.residual,
        "closure_error": c.closure_error,
        "crossings": [list(p) for p in c.crossings],
    }


def cmd_verify(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    eps = tuple(args.eps) if args.eps else scn.run_floats("eps", DEFAULT_EPS)
    eps = tuple(sorted(set(eps), reverse=True))
    if not eps or eps[-1] <= 0:
        raise ValidationError("eps values must be positive")
    requested = eps
    budget = args.grid or scn.run_int("budget", 2000)
    c0, c1 = _certificates(sys, scn.perturbation, budget)
    z0 = c0.midpoints if c0 is not None else ()
    z1 = c1.midpoints if c1 is not None else ()
    conv = None
    if len(eps) >= 2 and c0 is not None:
        # shrink the sweep if brackets are lost at its largest eps
        for attempt in range(MAX_SWEEP_SHRINK + 1):
            try:
                st = convergence_study(sys, scn.perturbation, z0, z1, eps)
                break
            except BracketLost:
                if attempt == MAX_SWEEP_SHRINK:
                    raise
                eps = tuple(e / 2 for e in eps)
        results = st.results
        conv = {
            "distance_ratios": [list(r) for r in st.distance_ratios],
            "distance_orders": list(st.distance_orders),
            "degraded": list(st.degraded),
            "fitted_order": st.fitted_order,
            "sample_h": list(st.sample_h),
            "first_order_error_ratios": [list(r) for r in st.error_ratios],
            "first_order_error_order": st.error_order,
        }
    else:
        results = [find_limit_cycles(sys, scn.perturbation, e, z0, z1) for e in eps]
    sweep = []
    for e, res in zip(eps, results):
        sweep.append({
            "eps": e,
            "cycles": res.count(),
            "three_zone": res.count(3),
            "two_zone": res.count(2),
            "records": [_cycle_record(c) for c in res.cycles],
            "lost": [{"zones": z, "bracket": list(b), "reason": r} for z, b, r in res.lost],
        })
    rep = {
        "config_hash": _config_hash(scn, repr((eps, budget))),
        "eps_requested": list(requested),
        "eps_sweep": list(eps),
        "melnikov_zeros": {"M0": list(z0), "M1": list(z1)},
        "runs": sweep,
        "convergence": conv,
    }
    return {"verify.json": _json(rep) + "\n"}


def cmd_plot(args, scn: Scenario) -> dict:
    sys = _system_of(scn)
    g = classify(sys)
    h = args.h if args.h is not None else scn.run_float("h", float("nan"))
    if not math.isfinite(h):
        iv = g.J0 or g.J1
        h = 0.5 * (iv[0] + iv[1])
    if _inside(h, g.J0, 0.0):
        zones = 3
    elif _inside(h, g.J1, 0.0):
        zones = 2
    else:
        raise ValidationError(f"h = {h!r} lies in neither J0 nor J1")
    eps = args.eps[0] if args.eps else 0.0
    arcs = orbit_arcs(sys, h, zones, scn.perturbation if eps else None, eps)
    n = args.grid or 200
    rows = trajectory_rows(sys, arcs, n)
    return {"trajectory.csv": _csv(["t", "x", "y", "zone", "H"], rows)}


COMMANDS = {
    "normalize": cmd_normalize,
    "classify": cmd_classify,
    "melnikov-eval": cmd_melnikov_eval,
    "expand": cmd_expand,
    "find-zeros": cmd_find_zeros,
    "construct-example": cmd_construct_example,
    "verify": cmd_verify,
    "plot": cmd_plot,
}


def _eps_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid eps list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pwmelnikov",
        description="Melnikov analysis of three-zone piecewise-linear Hamiltonian systems.",
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--scenario", type=Path, help="scenario INI file")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory")
    ap.add_argument("--eps", type=_eps_list, help="perturbation sizes, comma or space separated")
    ap.add_argument("--grid", type=int, help="grid size or sampling budget")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized searches")
    ap.add_argument("--case", choices=sorted(CASES), help="construction case")
    ap.add_argument("--beta-C", dest="beta_C", type=float, help="center offset for construct-example")
    ap.add_argument("--h", type=float, help="energy level for plot")
    return ap


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or _sys.stdout
    stderr = stderr or _sys.stderr
    args = build_parser().parse_args(argv)
    try:
        scn = None
        if args.command != "construct-example":
            if args.scenario is None:
                raise ValidationError("--scenario is required")
            scn = read_scenario(args.scenario)
        if args.grid is not None and args.grid < 1:
            raise ValidationError("--grid must be positive")
        outputs = COMMANDS[args.command](args, scn)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    args.out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (args.out / name).write_text(text)
        print(args.out / name, file=stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> None:
    raise SystemExit(run(argv))
