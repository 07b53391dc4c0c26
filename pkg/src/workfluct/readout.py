"""Single-shot readout errors and their correction.

A readout model is a column-stochastic confusion matrix ``T[i, j] = p(i | j)``:
the probability of reporting level ``i`` when the system is in level ``j``.
Measured populations are ``T @ p0``. Measured conditional transition
matrices (column ``j`` = distribution of final outcomes given initial
level ``j``) are ``T @ Pc``. Correction applies ``T^-1`` to both and
recombines them into joint probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tpm import JointProbabilityTable

__all__ = [
    "ReadoutModel",
    "DEFAULT_READOUT",
    "SingularReadoutError",
    "InconsistentDataError",
    "apply_readout_noise",
    "split_joint",
    "measure_joint",
    "correct_joint",
]

MIN_DET = 1e-6
CLAMP_LIMIT = 0.05


class SingularReadoutError(ValueError):
    pass


class InconsistentDataError(ValueError):
    pass


@dataclass(frozen=True)
class ReadoutModel:
    t: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError(f"confusion matrix must be square, got shape {t.shape}")
        if np.any(t < 0) or np.any(t > 1):
            raise ValueError("confusion matrix entries must lie in [0, 1]")
        if np.any(np.abs(t.sum(axis=0) - 1.0) > 1e-12):
            raise ValueError(f"confusion matrix columns must sum to 1, got {t.sum(axis=0)}")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_rows(cls, rows):
        """Build from a row-major nested list, as written in config files."""
        return cls(np.array(rows, dtype=float))

    @property
    def determinant(self):
        return float(np.linalg.det(self.t))

    @property
    def invertible(self):
        return abs(self.determinant) >= MIN_DET


DEFAULT_READOUT = ReadoutModel(np.array([[0.980, 0.045], [0.020, 0.955]]))


def apply_readout_noise(probabilities, model):
    """Left-multiply a population vector or column-stochastic matrix by ``T``."""
    p = np.asarray(probabilities, dtype=float)
    if p.shape[0] != model.t.shape[0]:
        raise ValueError(f"shape mismatch: {p.shape} vs confusion matrix {model.t.shape}")
    if np.any(np.abs(p.sum(axis=0) - 1.0) > 1e-10):
        raise ValueError("input columns must sum to 1")
    return model.t @ p


def split_joint(table):
    """Initial populations and column-stochastic conditional matrix of a joint table.

    Returns ``(p0, pc)`` with ``pc[n, m] = p(m -> n)``. Columns for levels with
    zero initial population are set to the identity column.
    """
    p = table.entries if isinstance(table, JointProbabilityTable) else np.asarray(table, float)
    p0 = p.sum(axis=1)
    pc = np.eye(p.shape[0])
    occupied = p0 > 0
    pc[:, occupied] = (p[occupied] / p0[occupied, None]).T
    return p0, pc


def measure_joint(table, model):
    """Noisy ``(p0_exp, pc_exp)`` that a faulty readout would report for `table`."""
    p0, pc = split_joint(table)
    return apply_readout_noise(p0, model), apply_readout_noise(pc, model)


def correct_joint(p0_exp, pc_exp, model):
    """Undo readout errors on measured populations and conditional transitions.

    Computes ``P[i, j] = (T^-1 pc_exp)[i, j] * (T^-1 p0_exp)[j]`` (final i,
    initial j) and returns it transposed as a :class:`JointProbabilityTable`
    indexed ``[initial, final]``, together with the total probability mass
    moved by clamping. Entries slightly outside [0, 1] (within 0.05) are
    clamped and the table renormalised; anything further out means the
    measured data cannot come from the model and raises
    :class:`InconsistentDataError`.
    """
    if not model.invertible:
        raise SingularReadoutError(
            f"confusion matrix is not invertible (|det| = {abs(model.determinant):.3e})"
        )
    p0_exp = np.asarray(p0_exp, dtype=float)
    pc_exp = np.asarray(pc_exp, dtype=float)
    d = model.t.shape[0]
    if p0_exp.shape != (d,) or pc_exp.shape != (d, d):
        raise ValueError(f"shape mismatch: p0 {p0_exp.shape}, Pc {pc_exp.shape}, T {model.t.shape}")
    p0 = np.linalg.solve(model.t, p0_exp)
    pc = np.linalg.solve(model.t, pc_exp)
    joint = pc * p0[None, :]
    lo, hi = joint.min(), joint.max()
    if lo < -CLAMP_LIMIT or hi > 1 + CLAMP_LIMIT:
        raise InconsistentDataError(
            f"corrected joint probabilities span [{lo:.4f}, {hi:.4f}], outside the "
            f"clamping window [-{CLAMP_LIMIT}, {1 + CLAMP_LIMIT}]"
        )
    clamped = np.clip(joint, 0.0, 1.0)
    adjustment = float(np.abs(clamped - joint).sum())
    if adjustment > 0:
        clamped = clamped / clamped.sum()
    else:
        clamped = joint
    return JointProbabilityTable(clamped.T), adjustment
