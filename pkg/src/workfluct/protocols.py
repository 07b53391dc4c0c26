"""Drive schedules for the two-level work protocol and their counter-diabatic partners.

The bare Hamiltonian (kHz) is ``z*S_z + x(t)*S_x`` with a transverse field
ramped from 0 to ``x_max`` over ``[0, tau]``. The counter-diabatic variant adds
``y(t)*S_y`` with ``2*pi*y = d(theta)/dt``, where ``theta = arctan(x/z)`` is the
mixing angle of the instantaneous eigenbasis; the extra term cancels every
non-adiabatic transition of the bare path.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .linalg import SX, SY, SZ

__all__ = [
    "DEFAULT_Z",
    "DEFAULT_X_MAX",
    "Kind",
    "CosineRamp",
    "PiecewiseLinearRamp",
    "DriveProtocol",
    "AdiabaticityReport",
    "x_schedule",
    "x_rate",
    "cd_field",
    "hamiltonian_at",
    "mixing_angle",
    "adiabatic_parameter",
]

DEFAULT_Z = 5.0 / math.sqrt(3.0)  # kHz
DEFAULT_X_MAX = 5.0  # kHz


class Kind(str, enum.Enum):
    BARE = "bare"
    COUNTER_DIABATIC = "cd"


@dataclass(frozen=True)
class CosineRamp:
    """Shape ``(1 - cos(pi*s))/2`` on the normalised time ``s = t/tau``."""

    name = "cosine"

    def shape(self, s):
        return 0.5 * (1.0 - np.cos(np.pi * s))

    def slope(self, s):
        return 0.5 * np.pi * np.sin(np.pi * s)


@dataclass(frozen=True)
class PiecewiseLinearRamp:
    """Piecewise-linear shape through ``(s_k, g_k)`` knots.

    Knots must start at (0, 0) and end at (1, 1). The slope at an interior
    knot is the slope of the segment to its right.
    """

    knots: tuple = ((0.0, 0.0), (1.0, 1.0))
    name = "piecewise-linear"

    def __post_init__(self):
        s, g = self._arrays()
        if len(s) < 2 or s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
            raise ValueError("knot abscissae must increase strictly from 0 to 1")
        if g[0] != 0.0 or g[-1] != 1.0:
            raise ValueError("ramp must start at 0 and end at 1")

    def _arrays(self):
        k = np.asarray(self.knots, dtype=float)
        return k[:, 0], k[:, 1]

    def shape(self, s):
        xs, gs = self._arrays()
        return np.interp(s, xs, gs)

    def slope(self, s):
        xs, gs = self._arrays()
        slopes = np.diff(gs) / np.diff(xs)
        idx = np.clip(np.searchsorted(xs, s, side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]


@dataclass(frozen=True)
class DriveProtocol:
    """Parameters of one work protocol.

    Attributes
    ----------
    z : float
        Constant longitudinal field, kHz. Must be positive so the two levels
        never cross.
    x_max : float
        Final transverse field, kHz.
    tau : float
        Protocol duration, ms.
    kind : Kind
        Bare drive or counter-diabatic (shortcut to adiabaticity).
    schedule : CosineRamp or PiecewiseLinearRamp
        Shape of the transverse ramp.
    """

    z: float = DEFAULT_Z
    x_max: float = DEFAULT_X_MAX
    tau: float = 0.05
    kind: Kind = Kind.BARE
    schedule: object = field(default_factory=CosineRamp)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.z > 0:
            raise ValueError(f"z must be positive, got {self.z}")
        object.__setattr__(self, "kind", Kind(self.kind))

    def with_kind(self, kind):
        return DriveProtocol(self.z, self.x_max, self.tau, Kind(kind), self.schedule)

    def hamiltonian(self, t):
        return hamiltonian_at(self, t)

    def hamiltonian_stack(self, ts):
        """Hamiltonians at every time in `ts`, shape ``(len(ts), 2, 2)``."""
        ts = np.asarray(ts, dtype=float)
        x = self.x_max * self.schedule.shape(ts / self.tau)
        hs = self.z * SZ + x[:, None, None] * SX
        if self.kind is Kind.COUNTER_DIABATIC:
            hs = hs + _cd_field(self, ts, x)[:, None, None] * SY
        return hs


def _check_time(p, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > p.tau):
        raise ValueError(f"t must lie in [0, tau={p.tau}], got {t}")
    return t


def x_schedule(p, t):
    """Transverse field x(t) in kHz."""
    t = _check_time(p, t)
    return p.x_max * p.schedule.shape(t / p.tau)


def x_rate(p, t):
    """Time derivative of x(t) in kHz/ms."""
    t = _check_time(p, t)
    return p.x_max * p.schedule.slope(t / p.tau) / p.tau


def _cd_field(p, t, x):
    xdot = p.x_max * p.schedule.slope(t / p.tau) / p.tau
    return p.z * xdot / (2.0 * np.pi * (x * x + p.z * p.z))


def cd_field(p, t):
    """Counter-diabatic amplitude y(t) in kHz (the S_y coefficient)."""
    t = _check_time(p, t)
    return _cd_field(p, t, p.x_max * p.schedule.shape(t / p.tau))


def hamiltonian_at(p, t):
    """Instantaneous 2x2 Hamiltonian in kHz; the 2*pi is applied at propagation."""
    t = float(_check_time(p, t))
    x = float(p.x_max * p.schedule.shape(t / p.tau))
    h = p.z * SZ + x * SX
    if p.kind is Kind.COUNTER_DIABATIC:
        h = h + float(_cd_field(p, t, x)) * SY
    return h


def mixing_angle(p, t):
    """Rotation angle ``arctan(x(t)/z)`` of the instantaneous eigenbasis."""
    return np.arctan(x_schedule(p, t) / p.z)


class AdiabaticityReport(NamedTuple):
    gamma: float
    argmax_time: float
    samples: np.ndarray  # columns: t (ms), ratio


def _gamma_ratio(p, t):
    # |<E1|dH/dt|E2>| / (E1 - E2)^2 in angular units, closed form for this model:
    # matrix element pi*xdot*z/r, gap 2*pi*r with r = sqrt(z^2 + x^2).
    x = p.x_max * p.schedule.shape(t / p.tau)
    xdot = p.x_max * p.schedule.slope(t / p.tau) / p.tau
    r2 = p.z * p.z + x * x
    return np.abs(p.z * xdot) / (4.0 * np.pi * r2 ** 1.5)


def adiabatic_parameter(p, n_samples=2001):
    """Adiabaticity measure of a bare protocol.

    The ratio ``|<E1|dH/dt|E2>| / (E1 - E2)^2`` is evaluated on a uniform
    grid of `n_samples` times and its maximum is polished by a bounded
    scalar search around the best grid point. Values well below one mean
    the drive is adiabatic.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    if p.kind is not Kind.BARE:
        raise ValueError("the adiabatic parameter is defined for the bare protocol only")
    ts = np.linspace(0.0, p.tau, n_samples)
    ratios = _gamma_ratio(p, ts)
    k = int(np.argmax(ratios))
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, n_samples - 1)]
    best_t, best = ts[k], float(ratios[k])
    if hi > lo:
        res = minimize_scalar(
            lambda t: -_gamma_ratio(p, t),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * p.tau},
        )
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    samples = np.column_stack([ts, ratios])
    if best_t not in ts:
        samples = np.vstack([samples, [best_t, best]])
        samples = samples[np.argsort(samples[:, 0], kind="stable")]
    return AdiabaticityReport(best, float(best_t), samples)
