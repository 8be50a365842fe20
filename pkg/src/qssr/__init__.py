"""Quasi-steady-state and singular perturbation reduction of polynomial ODE systems."""
