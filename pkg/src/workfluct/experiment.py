"""One-call evaluation of a work protocol at a given temperature."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import EigenSystem, eigendecompose, propagate, unitarity_error
from .protocols import DriveProtocol, Kind
from .tpm import (
    JointProbabilityTable,
    WorkDistribution,
    exp_work_moments,
    free_energy_difference,
    joint_table,
    thermal_populations,
    transition_probabilities,
    work_distribution,
)

__all__ = [
    "UNITARITY_TOL",
    "ContractViolation",
    "ProtocolResult",
    "endpoint_bases",
    "reference_transitions",
    "evaluate",
    "evaluate_transitions",
]

UNITARITY_TOL = 1e-9


class ContractViolation(RuntimeError):
    """A numerical guarantee (unitarity, stochasticity) failed at run time."""


@dataclass(frozen=True)
class ProtocolResult:
    beta: float
    basis0: EigenSystem
    basis_tau: EigenSystem
    unitary: np.ndarray | None
    transitions: np.ndarray
    table: JointProbabilityTable
    work: WorkDistribution
    mean: float
    variance: float
    delta_f: float

    @property
    def jarzynski_residual(self):
        return abs(self.mean - np.exp(-self.beta * self.delta_f))


def endpoint_bases(protocol):
    """Eigensystems of the bare Hamiltonian at t = 0 and t = tau."""
    bare = protocol.with_kind(Kind.BARE)
    return eigendecompose(bare.hamiltonian(0.0)), eigendecompose(bare.hamiltonian(bare.tau))


def reference_transitions(protocol, which):
    """Transition matrix of the sudden quench or of the adiabatic limit."""
    b0, b1 = endpoint_bases(protocol)
    if which == "adiabatic":
        return np.eye(len(b0.values))
    if which == "sudden":
        return transition_probabilities(np.eye(len(b0.values)), b0, b1)
    raise ValueError(f"unknown reference protocol {which!r}")


def evaluate_transitions(protocol, beta, trans, unitary=None):
    """Work statistics of `protocol`'s endpoints with a given transition matrix."""
    b0, b1 = endpoint_bases(protocol)
    state = thermal_populations(b0.values, beta)
    trans = np.asarray(trans, dtype=float)
    if np.any(np.abs(trans.sum(axis=0) - 1) > 1e-9) or np.any(np.abs(trans.sum(axis=1) - 1) > 1e-9):
        raise ContractViolation("transition matrix is not doubly stochastic")
    wd = work_distribution(state, trans, b0.values, b1.values)
    mean, var = exp_work_moments(wd, beta)
    return ProtocolResult(
        beta=float(beta),
        basis0=b0,
        basis_tau=b1,
        unitary=unitary,
        transitions=trans,
        table=joint_table(state, trans),
        work=wd,
        mean=mean,
        variance=var,
        delta_f=free_energy_difference(b0.values, b1.values, beta),
    )


def evaluate(protocol: DriveProtocol, beta, n_steps=None, unitary=None):
    """Propagate `protocol` and return its two-point-measurement statistics.

    The measurement bases are always those of the bare Hamiltonian at the
    endpoints. Pass a precomputed `unitary` to reuse one propagation across
    several temperatures.
    """
    if unitary is None:
        unitary = propagate(protocol, n_steps)
    err = unitarity_error(unitary)
    if err > UNITARITY_TOL:
        raise ContractViolation(f"propagator unitarity error {err:.3e} exceeds {UNITARITY_TOL:g}")
    b0, b1 = endpoint_bases(protocol)
    trans = transition_probabilities(unitary, b0, b1)
    return evaluate_transitions(protocol, beta, trans, unitary=unitary)
