"""Finite-sample Monte Carlo of measured work and the Jarzynski estimator.

Random streams
--------------
Every random draw comes from a Philox counter-based generator whose key is
derived from ``SeedSequence(seed, spawn_key=keys)``. The keys are integer
indices naming the unit of work: ``(scenario, grid_index, block_index)`` in
:func:`convergence_study`, where replicas are grouped in fixed blocks of
:data:`REPLICA_BLOCK`. Because a stream depends only on its keys, results are
bit-identical no matter how many workers run the blocks or in which order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .tpm import JointProbabilityTable

__all__ = [
    "REPLICA_BLOCK",
    "substream",
    "TrajectorySample",
    "TrajectorySamples",
    "EstimatorSeries",
    "sample_trajectories",
    "jarzynski_estimator",
    "exact_delta_f",
    "convergence_study",
]

REPLICA_BLOCK = 4096


def substream(seed, *keys):
    """Independent generator for the sub-stream ``keys`` of a 64-bit `seed`."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


class TrajectorySample(NamedTuple):
    m: int
    n: int
    w: float


@dataclass(frozen=True)
class TrajectorySamples:
    """Columnar batch of sampled trajectories (initial level, final level, work)."""

    m: np.ndarray
    n: np.ndarray
    w: np.ndarray

    def __len__(self):
        return len(self.w)

    def __iter__(self):
        for m, n, w in zip(self.m, self.n, self.w):
            yield TrajectorySample(int(m), int(n), float(w))


@dataclass(frozen=True)
class EstimatorSeries:
    n_grid: np.ndarray
    mean_estimate: np.ndarray
    bias: np.ndarray
    rmse: np.ndarray
    stderr: np.ndarray
    replicas: int
    seed: int
    delta_f: float


def _atoms(table, spectrum0, spectrum_tau):
    if not isinstance(table, JointProbabilityTable):
        table = JointProbabilityTable(table)
    p = table.entries
    e0 = np.asarray(spectrum0, dtype=float)
    e1 = np.asarray(spectrum_tau, dtype=float)
    if p.shape != (len(e0), len(e1)):
        raise ValueError(f"table shape {p.shape} does not match spectra {e0.shape}, {e1.shape}")
    work = (e1[None, :] - e0[:, None]).ravel()
    prob = p.ravel()
    return work, prob / prob.sum(), p.shape


def sample_trajectories(table, spectrum0, spectrum_tau, count, seed, stream=()):
    """Draw `count` independent trajectories from a joint probability table.

    Sampling is by inverse CDF over the row-major flattened table, so zero
    entries are never drawn. The same `seed` and `stream` keys always give
    the same samples.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    work, prob, shape = _atoms(table, spectrum0, spectrum_tau)
    cdf = np.cumsum(prob)
    cdf[-1] = 1.0
    u = substream(seed, *stream).random(int(count))
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    m, n = np.divmod(idx, shape[1])
    return TrajectorySamples(m, n, work[idx])


def _shifted_estimate(work, weights, total, beta, w0):
    # -ln(sum_k weights_k exp(-beta w_k) / total) / beta, shifted by w0 (the
    # smallest work that can occur) so a constant sample returns it exactly.
    s = weights @ np.exp(-beta * (work - w0))
    return w0 - np.log(s / total) / beta


def jarzynski_estimator(samples, beta):
    """Free-energy estimate ``-ln(mean(exp(-beta W_k)))/beta`` in kHz.

    `samples` is a :class:`TrajectorySamples`, a sequence of
    :class:`TrajectorySample`, or a plain array of work values.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if isinstance(samples, TrajectorySamples):
        w = samples.w
    else:
        w = np.asarray([s.w if isinstance(s, TrajectorySample) else s for s in samples], float)
    if len(w) == 0:
        raise ValueError("at least one sample is required")
    return float(_shifted_estimate(w, np.ones_like(w), len(w), beta, w.min()))


def exact_delta_f(table, spectrum0, spectrum_tau, beta):
    """``-ln(<exp(-beta W)>)/beta`` computed exactly from the table.

    Equals the partition-function free-energy difference whenever the table
    comes from a Gibbs initial state and unitary evolution.
    """
    work, prob, _ = _atoms(table, spectrum0, spectrum_tau)
    return float(_shifted_estimate(work, prob, 1.0, beta, work[prob > 0].min()))


def _block_estimates(work, prob, n, beta, seed, keys, size):
    counts = substream(seed, *keys).multinomial(n, prob, size=size)
    return _shifted_estimate(work, counts.astype(float), n, beta, work[prob > 0].min())


def convergence_study(
    table,
    spectrum0,
    spectrum_tau,
    beta,
    n_grid,
    replicas,
    seed,
    *,
    scenario=0,
    delta_f=None,
    workers=1,
):
    """Bias and RMSE of the Jarzynski estimator along a grid of sample sizes.

    For every ``N`` in `n_grid`, `replicas` independent estimates are drawn.
    Each replica draws multinomial counts of the table's atoms, which has the
    same law as ``N`` independent trajectories and costs the same for any
    ``N``. Bias and RMSE are measured against `delta_f`, which defaults to
    the exact value implied by the table.
    """
    n_grid = np.asarray(n_grid, dtype=np.int64)
    if n_grid.size == 0:
        raise ValueError("n_grid must be non-empty")
    if np.any(n_grid < 1) or np.any(np.diff(n_grid) <= 0):
        raise ValueError("n_grid must be strictly increasing positive integers")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    work, prob, _ = _atoms(table, spectrum0, spectrum_tau)
    if delta_f is None:
        delta_f = float(_shifted_estimate(work, prob, 1.0, beta, work[prob > 0].min()))

    n_blocks = math.ceil(replicas / REPLICA_BLOCK)
    tasks = []
    for i, n in enumerate(n_grid):
        for b in range(n_blocks):
            size = min(REPLICA_BLOCK, replicas - b * REPLICA_BLOCK)
            tasks.append((int(n), (scenario, i, b), size))

    def run(task):
        n, keys, size = task
        return _block_estimates(work, prob, n, beta, seed, keys, size)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    means, biases, rmses, errs = [], [], [], []
    for i in range(len(n_grid)):
        est = np.concatenate(results[i * n_blocks:(i + 1) * n_blocks])
        dev = est - delta_f
        means.append(est.mean())
        biases.append(dev.mean())
        rmses.append(np.sqrt(np.mean(dev * dev)))
        errs.append(est.std(ddof=1) / np.sqrt(len(est)))
    return EstimatorSeries(
        n_grid=n_grid,
        mean_estimate=np.array(means),
        bias=np.array(biases),
        rmse=np.array(rmses),
        stderr=np.array(errs),
        replicas=int(replicas),
        seed=int(seed),
        delta_f=float(delta_f),
    )
