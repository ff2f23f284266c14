"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n PASS|FAIL`` line before asserting.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from helpers import SEEDS, interior_grid, random_perturbation, random_system
from pwmelnikov import cli
from pwmelnikov.design import construct_example
from pwmelnikov.expansion import (
    expansion_coefficients,
    identity_residuals,
    lambda1_root,
    lambda2,
    phi,
    taylor_oracle,
)
from pwmelnikov.flows import flight_time, orbit_arcs, trajectory_rows
from pwmelnikov.melnikov import melnikov_m0, melnikov_m0_oracle, melnikov_m1, melnikov_m1_oracle
from pwmelnikov.model import classify, example_system
from pwmelnikov.verify import first_order_error


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], stdout=out, stderr=err)
    return code, err.getvalue()


def test_criterion_1_lambda1_root(report):
    t = time.perf_counter()
    r = lambda1_root()
    dt = time.perf_counter() - t
    ok = abs(r - 0.23031022687) <= 1e-8 and dt < 1.0
    assert report(1, ok, f"root = {r:.12f}, {dt:.3f} s")


def test_criterion_2_lambda2_values(report):
    t = time.perf_counter()
    sys = example_system(1.0, 3.0, -4.0)
    v1, vh = lambda2(sys), lambda2(sys, 0.5)
    dt = time.perf_counter() - t
    ok = abs(v1 - 223.526) <= 0.1 and abs(vh - 23.0517) <= 0.01 and dt < 1.0
    assert report(2, ok, f"lambda2(1) = {v1:.6f}, lambda2(1/2) = {vh:.6f}, {dt:.3f} s")


def test_criterion_3_phi_identity(report):
    t = time.perf_counter()
    b = np.linspace(1.0 / 200, 1.0, 200)
    worst = max(abs(phi(x)) for x in b)
    dt = time.perf_counter() - t
    ok = worst < 1e-12 and dt < 1.0
    assert report(3, ok, f"max |phi| = {worst:.2e} on 200 points, {dt:.3f} s")


def test_criterion_4_oracle_equivalence(report):
    t = time.perf_counter()
    worst = 0.0
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        sys = random_system(rng)
        pert = random_perturbation(rng)
        g = classify(sys)
        for h in interior_grid(g.J0, 100, 1 / 101):
            o = melnikov_m0_oracle(sys, pert, h)
            worst = max(worst, abs(melnikov_m0(sys, pert, h, geometry=g) - o) / (1 + abs(o)))
        for h in interior_grid(g.J1, 100, 1 / 101):
            o = melnikov_m1_oracle(sys, pert, h)
            worst = max(worst, abs(melnikov_m1(sys, pert, h, geometry=g) - o) / (1 + abs(o)))
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and dt < 30.0
    assert report(4, ok, f"max |closed - oracle| / (1 + |oracle|) = {worst:.2e}, {dt:.1f} s")


def test_criterion_5_expansion_against_taylor_oracle(report):
    worst_rel, worst_id = 0.0, 0.0
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        sys = random_system(rng)
        pert = random_perturbation(rng)
        e = expansion_coefficients(sys, pert)
        three, two = taylor_oracle(sys, pert)
        for got, want in zip(e.three_zone + e.two_zone, three + two):
            worst_rel = max(worst_rel, abs(got - want) / max(abs(want), 1e-300))
        worst_id = max(worst_id, max(identity_residuals(e).values()))
    ok = worst_rel <= 1e-6 and worst_id < 1e-10
    assert report(5, ok, f"max relative error = {worst_rel:.2e}, max identity residual = {worst_id:.2e}")


def construct_and_verify(tmp_path, case, beta, eps=1e-4):
    out = tmp_path / f"{case}_{beta}"
    code, err = run_cli("construct-example", "--case", case, "--beta-C", beta, "--out", out)
    assert code == 0, err
    cert = json.loads((out / f"{case}_certificates.json").read_text())
    code, err = run_cli("verify", "--scenario", out / f"{case}.ini", "--eps", eps, "--out", out)
    assert code == 0, err
    run = json.loads((out / "verify.json").read_text())["runs"][0]
    return cert, run


@pytest.mark.parametrize("beta", [1.0, 0.5])
def test_criterion_6_six_cycles(report, tmp_path, beta):
    t = time.perf_counter()
    cert, run = construct_and_verify(tmp_path, "real", beta)
    dt = time.perf_counter() - t
    res = max((r["residual"] for r in run["records"]), default=math.inf)
    n0, n1 = cert["M0"]["simple"], cert["M1"]["simple"]
    ok = n0 >= 4 and n1 == 2 and run["cycles"] >= 6 and res < 1e-10 and dt < 120
    detail = f"beta_C = {beta}: M0 {n0} zeros, M1 {n1} zeros, {run['cycles']} cycles, max residual {res:.1e}, {dt:.1f} s"
    assert report(6, ok, detail)


def test_criterion_7_four_cycles(report, tmp_path):
    t = time.perf_counter()
    cert, run = construct_and_verify(tmp_path, "virtual", 2.0)
    dt = time.perf_counter() - t
    n0, n1 = cert["M0"]["simple"], cert["M1"]["simple"]
    ok = n0 >= 3 and n1 >= 1 and run["cycles"] >= 4 and dt < 120
    assert report(7, ok, f"M0 {n0} zeros, M1 {n1} zeros, {run['cycles']} cycles, {dt:.1f} s")


def test_criterion_8_first_order_limit(report):
    eps = (4e-4, 2e-4, 1e-4)
    configs = [(c.system, c.perturbation) for c in (construct_example("real", 1.0), construct_example("virtual"))]
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        configs.append((random_system(rng), random_perturbation(rng)))
    ratios = []
    for sys, pert in configs:
        lo, hi = classify(sys).J0
        for h in lo + (hi - lo) * np.linspace(0.1, 0.9, 10):
            e = [first_order_error(sys, pert, x, h) for x in eps]
            ratios += [e[1] / e[0], e[2] / e[1]]
    lo_r, hi_r = min(ratios), max(ratios)
    ok = 0.4 <= lo_r and hi_r <= 0.6
    assert report(8, ok, f"{len(configs)} configurations, error ratios in [{lo_r:.4f}, {hi_r:.4f}]")


def test_criterion_9_property_suites(report):
    failures = []
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        sys = random_system(rng)
        p, q = random_perturbation(rng), random_perturbation(rng)
        g = classify(sys)
        for h in interior_grid(g.J0, 8, 1e-3):
            arcs = orbit_arcs(sys, h)
            if max(abs(arcs[-1].end[0] - 1), abs(arcs[-1].end[1] - h)) > 1e-10:
                failures.append(("closure", seed, h))
            rows = trajectory_rows(sys, arcs, 50)
            for z in ("R", "C", "L"):
                H = np.array([r[4] for r in rows if r[3] == z])
                if np.ptp(H) > 1e-10 * (1 + np.max(np.abs(H))):
                    failures.append(("energy", seed, h))
            for arc, name in zip(arcs, ("R", "C1", "L", "C2")):
                if abs(arc.duration - flight_time(sys, name, h)) > 1e-10 * (1 + arc.duration):
                    failures.append(("flight time", seed, h))
        h0, h1 = interior_grid(g.J0, 10, 1e-4), interior_grid(g.J1, 10, 1e-4)
        for a, b in ((2.0, -0.5), (-1.3, 0.7)):
            for fn, hs in ((melnikov_m0, h0), (melnikov_m1, h1)):
                lhs = fn(sys, a * p + b * q, hs)
                rhs = a * fn(sys, p, hs) + b * fn(sys, q, hs)
                if np.max(np.abs(lhs - rhs)) > 1e-11 * (1 + np.max(np.abs(rhs))):
                    failures.append(("linearity", seed, fn.__name__))
    ok = not failures
    assert report(9, ok, f"{len(SEEDS)} seeds, failures: {failures[:3] or 'none'}")
