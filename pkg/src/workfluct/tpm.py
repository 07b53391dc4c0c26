"""Two-point-measurement work statistics.

Work for the trajectory ``|E_m(0)> -> |E~_n(tau)>`` is ``E~_n - E_m`` (kHz).
With a Gibbs initial state and any unitary drive, ``<exp(-beta W)>`` equals
``Z_tau / Z_0``; the variance of ``exp(-beta W)`` is smallest when the drive
makes no transitions between instantaneous levels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .linalg import EigenSystem

__all__ = [
    "ThermalState",
    "JointProbabilityTable",
    "WorkDistribution",
    "thermal_populations",
    "transition_probabilities",
    "joint_table",
    "work_distribution",
    "exp_work_moments",
    "free_energy_difference",
    "jarzynski_residual",
    "haar_unitary",
]

MERGE_ATOL = 1e-9  # kHz
STOCHASTIC_ATOL = 1e-9


@dataclass(frozen=True)
class ThermalState:
    beta: float
    populations: np.ndarray


@dataclass(frozen=True)
class JointProbabilityTable:
    """``entries[m, n] = p0[m] * p(m -> n)``; rows index the initial level."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.array(self.entries, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise ValueError(f"joint table must be a non-empty matrix, got shape {p.shape}")
        if np.any(p < -1e-12):
            raise ValueError(f"joint probabilities must be non-negative, min {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"joint probabilities sum to {p.sum():.12f}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "entries", p)

    @property
    def initial(self):
        return self.entries.sum(axis=1)

    @property
    def final(self):
        return self.entries.sum(axis=0)


@dataclass(frozen=True)
class WorkDistribution:
    """Discrete work distribution as parallel arrays sorted by work value."""

    work: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        if len(self.work) != len(self.prob) or len(self.work) == 0:
            raise ValueError("work and prob must be non-empty and aligned")
        if abs(float(np.sum(self.prob)) - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {np.sum(self.prob):.12f}, expected 1")

    def __len__(self):
        return len(self.work)


def thermal_populations(spectrum, beta):
    """Gibbs populations ``exp(-beta E_m) / Z`` of a spectrum in kHz."""
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    e = np.asarray(spectrum, dtype=float)
    if not np.all(np.isfinite(e)):
        raise ValueError("spectrum must be finite")
    logw = -beta * e
    logw = logw - logw.max()
    w = np.exp(logw)
    return ThermalState(float(beta), w / w.sum())


def _vectors(basis):
    return basis.vectors if isinstance(basis, EigenSystem) else np.asarray(basis)


def transition_probabilities(u, basis0, basis_tau):
    """Matrix of ``|<E~_n(tau)| U |E_m(0)>|^2`` indexed ``[m, n]``."""
    u = np.asarray(u, dtype=complex)
    v0, v1 = _vectors(basis0), _vectors(basis_tau)
    if not (u.shape[0] == u.shape[1] == v0.shape[0] == v1.shape[0]):
        raise ValueError(
            f"dimension mismatch: U {u.shape}, initial basis {v0.shape}, final basis {v1.shape}"
        )
    amp = v1.conj().T @ u @ v0  # amp[n, m]
    return np.abs(amp.T) ** 2


def joint_table(state, trans):
    """Joint probabilities of initial level m and final level n."""
    trans = np.asarray(trans, dtype=float)
    pops = np.asarray(state.populations if isinstance(state, ThermalState) else state)
    if trans.shape[0] != pops.shape[0]:
        raise ValueError(f"shape mismatch: populations {pops.shape}, transitions {trans.shape}")
    return JointProbabilityTable(pops[:, None] * trans)


def _merge(work, prob):
    keep = prob > 0
    work, prob = work[keep], prob[keep]
    order = np.argsort(work, kind="stable")
    work, prob = work[order], prob[order]
    out_w, out_p = [work[0]], [prob[0]]
    for w, p in zip(work[1:], prob[1:]):
        if abs(w - out_w[-1]) <= MERGE_ATOL:
            out_p[-1] += p
        else:
            out_w.append(w)
            out_p.append(p)
    return np.array(out_w), np.array(out_p)


def work_distribution(state, trans, spectrum0, spectrum_tau):
    """Atoms ``(E~_n - E_m, p0_m * p(m -> n))`` with equal work values merged.

    Pairs with exactly zero probability are dropped.
    """
    pops = np.asarray(state.populations if isinstance(state, ThermalState) else state, float)
    trans = np.asarray(trans, dtype=float)
    e0 = np.asarray(spectrum0, dtype=float)
    e1 = np.asarray(spectrum_tau, dtype=float)
    if trans.shape != (len(e0), len(e1)) or len(pops) != len(e0):
        raise ValueError(
            f"shape mismatch: populations {pops.shape}, transitions {trans.shape}, "
            f"spectra {e0.shape} and {e1.shape}"
        )
    if np.any(np.abs(trans.sum(axis=1) - 1.0) > STOCHASTIC_ATOL):
        raise ValueError("transition matrix rows must sum to 1")
    work = (e1[None, :] - e0[:, None]).ravel()
    prob = (pops[:, None] * trans).ravel()
    return WorkDistribution(*_merge(work, prob))


def exp_work_moments(wd, beta):
    """Mean and variance of ``exp(-beta W)`` over a work distribution."""
    f = np.exp(-beta * wd.work)
    mean = float(np.dot(wd.prob, f))
    var = float(np.dot(wd.prob, f * f)) - mean * mean
    if -1e-12 <= var < 0:
        var = 0.0
    return mean, var


def _log_partition(spectrum, beta):
    return float(logsumexp(-beta * np.asarray(spectrum, dtype=float)))


def free_energy_difference(spectrum0, spectrum_tau, beta):
    """``-ln(Z_tau/Z_0)/beta`` in kHz."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return -(_log_partition(spectrum_tau, beta) - _log_partition(spectrum0, beta)) / beta


def jarzynski_residual(wd, beta, spectrum0, spectrum_tau):
    """``|<exp(-beta W)> - exp(-beta dF)|`` for a work distribution."""
    mean, _ = exp_work_moments(wd, beta)
    df = free_energy_difference(spectrum0, spectrum_tau, beta)
    return abs(mean - np.exp(-beta * df))


def haar_unitary(dim, rng):
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
