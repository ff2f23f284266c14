"""Generators of valid random configurations for the tests."""

import math

import numpy as np
from pwmelnikov.model import Perturbation, SystemParameters, classify

SEEDS = (0, 1, 2, 3, 4)


def system_from_taus(a_L, b_L, c_L, tau_L, beta_C, a_R, b_R, c_R, tau_R):
    """Normal-form system with prescribed separatrix ordinates."""
    wR = math.sqrt(a_R**2 + b_R * c_R)
    wL = math.sqrt(a_L**2 + b_L * c_L)
    beta_R = (a_R**2 - wR * wR - tau_R * b_R * wR) / b_R
    beta_L = (tau_L * b_L * wL - a_L**2 + wL * wL) / b_L
    return SystemParameters(
        a_L=a_L, b_L=b_L, c_L=c_L, beta_L=beta_L, beta_C=beta_C,
        a_R=a_R, b_R=b_R, c_R=c_R, beta_R=beta_R,
    )


def random_system(rng, beta_range=(0.15, 2.5)) -> SystemParameters:
    """A valid system with a nonempty three-zone annulus."""
    beta_C = rng.uniform(*beta_range)
    h0 = 2.0 * math.sqrt(beta_C)
    return system_from_taus(
        a_L=rng.uniform(-0.6, 0.6), b_L=rng.uniform(0.5, 2.0), c_L=rng.uniform(0.3, 2.0),
        tau_L=rng.uniform(0.8, 4.0), beta_C=beta_C,
        a_R=rng.uniform(-0.6, 0.6), b_R=rng.uniform(0.5, 2.0), c_R=rng.uniform(0.3, 2.0),
        tau_R=h0 + rng.uniform(0.5, 2.5),
    )


def random_perturbation(rng) -> Perturbation:
    return Perturbation.from_array(rng.normal(size=18))


def interior_grid(interval, n, pad=1e-3):
    lo, hi = interval
    w = hi - lo
    return np.linspace(lo + pad * w, hi - pad * w, n)
