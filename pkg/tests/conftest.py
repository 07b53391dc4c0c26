import math

import numpy as np
import pytest

import workfluct as wf

Z = 5 / math.sqrt(3)
TAU_GRID = (0.05, 0.1, 0.2, 0.3, 0.8)
BETA_Z = (0.6, 0.8)


# Closed forms for the default protocol: initial levels -+z/2, final levels
# -+z (the final gap is sqrt(z^2 + 25) = 2z). Written out by hand so they do
# not share code with the library.

def gibbs_closed_form(beta_z):
    up, down = math.exp(beta_z / 2), math.exp(-beta_z / 2)
    return up / (up + down), down / (up + down)


def jarzynski_mean_closed_form(beta_z):
    return math.cosh(beta_z) / math.cosh(beta_z / 2)


def variance_brute_force(atoms, beta):
    mean = sum(p * math.exp(-beta * w) for w, p in atoms)
    second = sum(p * math.exp(-2 * beta * w) for w, p in atoms)
    return second - mean * mean


def adiabatic_atoms(beta_z):
    pg, pe = gibbs_closed_form(beta_z)
    return [(-Z / 2, pg), (Z / 2, pe)]


def sudden_atoms(beta_z):
    # Overlap of initial and final eigenbases: cos^2(pi/6) = 3/4.
    pg, pe = gibbs_closed_form(beta_z)
    stay, flip = 0.75, 0.25
    return [(-Z / 2, pg * stay), (3 * Z / 2, pg * flip), (-3 * Z / 2, pe * flip), (Z / 2, pe * stay)]


def adiabatic_variance_closed_form(beta_z):
    return variance_brute_force(adiabatic_atoms(beta_z), beta_z / Z)


def sudden_variance_closed_form(beta_z):
    return variance_brute_force(sudden_atoms(beta_z), beta_z / Z)


@pytest.fixture
def default_protocol():
    return wf.DriveProtocol(tau=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
