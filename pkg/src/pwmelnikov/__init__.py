"""Melnikov analysis of three-zone piecewise linear Hamiltonian systems."""

