"""Dense linear algebra for small Hermitian systems.

Hamiltonians are stored in frequency units (kHz) and times in milliseconds.
The factor 2*pi that turns a frequency into an angular frequency is applied
only inside :func:`evolve_step`, so the phase accumulated over ``dt`` is
``2*pi * E * dt`` radians.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Protocol

import numpy as np

__all__ = [
    "SZ",
    "SX",
    "SY",
    "EigenSystem",
    "NonHermitianError",
    "as_hermitian",
    "eigendecompose",
    "evolve_step",
    "propagate",
    "default_n_steps",
    "unitarity_error",
]

HERMITIAN_ATOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


# Spin-1/2 operators in the (|0>, |1>) basis. Note S_z = (|1><1| - |0><0|)/2,
# so |0> is the low-energy state for positive longitudinal field.
SZ = _frozen([[-0.5, 0.0], [0.0, 0.5]])
SX = _frozen([[0.0, 0.5], [0.5, 0.0]])
SY = _frozen([[0.0, 0.5j], [-0.5j, 0.0]])


class NonHermitianError(ValueError):
    """Raised when a matrix handed to the Hermitian routines is not Hermitian."""

    def __init__(self, deviation):
        self.deviation = float(deviation)
        super().__init__(
            f"matrix is not Hermitian: max |H - H^dagger| = {self.deviation:.3e} "
            f"(tolerance {HERMITIAN_ATOL:g})"
        )


class EigenSystem(NamedTuple):
    """Ascending eigenvalues (kHz) and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


class HamiltonianPath(Protocol):
    tau: float

    def hamiltonian(self, t: float) -> np.ndarray: ...


def as_hermitian(h):
    """Return `h` as a complex square array after checking Hermiticity.

    Raises
    ------
    NonHermitianError
        If any entry differs from the conjugate of its transpose partner by
        more than 1e-12.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] < 2:
        raise ValueError("Hamiltonians must have dimension >= 2")
    deviation = np.max(np.abs(h - h.conj().T))
    if deviation > HERMITIAN_ATOL:
        raise NonHermitianError(deviation)
    return h


def _fix_phases(vectors):
    # Make the largest-magnitude component of each column real and positive.
    # Near-ties in magnitude resolve to the lowest index.
    mags = np.abs(vectors)
    out = vectors.copy()
    for k in range(vectors.shape[1]):
        col = mags[:, k]
        idx = int(np.flatnonzero(col >= col.max() - 1e-12)[0])
        pivot = vectors[idx, k]
        out[:, k] = vectors[:, k] * (abs(pivot) / pivot)
        out[idx, k] = abs(pivot)
    return out


def _order_degenerate(values, vectors, rtol=1e-12):
    scale = max(1.0, float(np.max(np.abs(values))))
    order = list(range(len(values)))
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and values[stop] - values[start] <= rtol * scale:
            stop += 1
        if stop - start > 1:
            group = order[start:stop]

            def key(k):
                col = vectors[:, k]
                return tuple(x for z in col for x in (-round(z.real, 12), -round(z.imag, 12)))

            order[start:stop] = sorted(group, key=key)
        start = stop
    return values[order], vectors[:, order]


def eigendecompose(h) -> EigenSystem:
    """Full eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector's global phase is
    fixed so that its largest-magnitude component is real and positive;
    inside a degenerate eigenspace columns are ordered lexicographically
    (descending real, then imaginary part, component by component).

    Examples
    --------
    >>> es = eigendecompose(np.diag([-1.0, 1.0]))
    >>> es.values
    array([-1.,  1.])
    """
    h = as_hermitian(h)
    values, vectors = np.linalg.eigh(h)
    vectors = _fix_phases(vectors)
    values, vectors = _order_degenerate(values, vectors)
    return EigenSystem(values, vectors)


def _exp_hermitian(h, dt):
    # exp(-i 2 pi h dt) for a single matrix or a stack of matrices.
    values, vectors = np.linalg.eigh(h)
    phases = np.exp(-2j * np.pi * values * np.asarray(dt)[..., None])
    return (vectors * phases[..., None, :]) @ np.swapaxes(vectors.conj(), -1, -2)


def evolve_step(h, dt):
    """Exact propagator ``exp(-i 2 pi h dt)`` of a constant Hamiltonian.

    `h` is in kHz and `dt` in ms.
    """
    if dt < 0:
        raise ValueError(f"time step must be non-negative, got {dt}")
    h = as_hermitian(h)
    if dt == 0:
        return np.eye(h.shape[0], dtype=complex)
    return _exp_hermitian(h, float(dt))


def max_gap(path, n_samples=201):
    """Largest instantaneous eigenvalue spread (kHz) of a path over a uniform grid."""
    ts = np.linspace(0.0, path.tau, n_samples)
    spread = 0.0
    for t in ts:
        w = np.linalg.eigvalsh(np.asarray(path.hamiltonian(t)))
        spread = max(spread, float(w[-1] - w[0]))
    return spread


def default_n_steps(path):
    """Default step count: at least 2000 and at least 400 per fastest oscillation."""
    return max(2000, math.ceil(400 * path.tau * max_gap(path)))


def propagate(path: HamiltonianPath, n_steps=None):
    """Time-ordered propagator of `path` over ``[0, path.tau]``.

    Uses the exponential midpoint rule: the Hamiltonian is sampled at the
    centre of each of `n_steps` equal sub-intervals and the exact step
    propagators are multiplied with later times on the left. The result is
    unitary to rounding and second-order accurate in the step size.

    `path` needs a ``tau`` attribute (ms) and a ``hamiltonian(t)`` method
    returning kHz matrices; a vectorised ``hamiltonian_stack(ts)`` is used
    when available.
    """
    if n_steps is None:
        n_steps = default_n_steps(path)
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    dt = path.tau / n_steps
    mids = (np.arange(n_steps) + 0.5) * dt
    stack = getattr(path, "hamiltonian_stack", None)
    if stack is not None:
        hs = np.asarray(stack(mids), dtype=complex)
    else:
        hs = np.stack([as_hermitian(path.hamiltonian(t)) for t in mids])
    steps = _exp_hermitian(hs, dt)
    u = steps[0]
    for step in steps[1:]:
        u = step @ u
    return u


def unitarity_error(u):
    """Max-norm deviation of ``U^dagger U`` from the identity."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
