"""Monte Carlo estimation of moments of moments.

The inner theta-average is computed exactly (trapezoid rule on a grid fine
enough to resolve the trigonometric polynomial), so sampling noise is the
only error source and the reported standard error is honest.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import GroupSpec, MomOrder
from .haar import EigenAngles, RngStream, sample_eigenangles_batch


@dataclass(frozen=True)
class MomEstimate:
    mean: float
    std_error: float
    num_samples: int
    config_digest: str

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.mean <= 0:
            raise ValueError("the estimated quantity is strictly positive")


def abs_charpoly_sq(angles, theta: float) -> float:
    """|det(I - A e^{-i theta})|^2 from the eigenangles of A."""
    if isinstance(angles, EigenAngles):
        angles = angles.angles
    phis = np.asarray(angles, dtype=float)
    ab2 = (2.0 - 2.0 * np.cos(phis - theta)) * (2.0 - 2.0 * np.cos(phis + theta))
    return float(np.prod(ab2))


def min_inner_grid(num_angles: int, beta: int) -> int:
    return 4 * num_angles * beta + 2


def inner_moment(angles, beta: int, theta_grid_size: int | None = None) -> float:
    """(1/2 pi) integral of |P(theta)|^{2 beta} d theta, exact for integer beta."""
    if isinstance(angles, EigenAngles):
        angles = angles.angles
    phis = np.atleast_2d(np.asarray(angles, dtype=float))
    need = min_inner_grid(phis.shape[1], beta)
    if theta_grid_size is None:
        theta_grid_size = need
    if theta_grid_size < need:
        raise ValueError("theta grid must have at least %d points" % need)
    return float(_kernels.inner_moments(phis, beta, theta_grid_size)[0])


def inner_moment_batch(phis: np.ndarray, beta: int, theta_grid_size: int) -> np.ndarray:
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    if theta_grid_size < min_inner_grid(phis.shape[1], beta):
        raise ValueError("theta grid too small for exact trapezoid integration")
    return _kernels.inner_moments(phis, beta, theta_grid_size)


def mom_estimate(
    spec: GroupSpec,
    order: MomOrder,
    num_samples: int,
    seed: int,
    num_workers: int = 1,
    antithetic: bool = False,
) -> MomEstimate:
    """Plain Monte Carlo mean of (inner theta-average)^k over Haar samples.

    Deterministic for fixed (seed, num_workers): each worker owns a derived
    stream and a fixed sample allocation.  The stream also depends on the
    group and order, so estimates for different configurations are
    statistically independent even at equal seeds.  ``antithetic`` reflects
    every spectrum through phi -> pi - phi (a distribution-preserving map);
    it is a variance option only and is excluded from statistical
    acceptance runs.
    """
    if num_samples < 2:
        raise ValueError("num_samples must be >= 2")
    tag = "%s:%d:%d:%d" % (spec.family.value, spec.half_dim, order.k, order.beta)
    base = RngStream(seed, stream_id=zlib.crc32(tag.encode()))
    grid_size = min_inner_grid(spec.half_dim, order.beta)
    per = [num_samples // num_workers] * num_workers
    for i in range(num_samples % num_workers):
        per[i] += 1

    chunk_sums, chunk_sqs = [], []
    for worker_id, n_w in enumerate(per):
        if n_w == 0:
            continue
        phis = sample_eigenangles_batch(spec, base.worker(worker_id), n_w)
        vals = inner_moment_batch(phis, order.beta, grid_size) ** order.k
        if antithetic:
            vals2 = inner_moment_batch(np.pi - phis, order.beta, grid_size) ** order.k
            vals = 0.5 * (vals + vals2)
        chunk_sums.append(math.fsum(vals))
        chunk_sqs.append(math.fsum(vals * vals))

    total = math.fsum(chunk_sums)
    total_sq = math.fsum(chunk_sqs)
    n = float(num_samples)
    mean = total / n
    var = max(0.0, (total_sq - n * mean * mean) / (n - 1.0))
    digest = "family=%s N=%d k=%d beta=%d grid=%d seed=%d workers=%d samples=%d" % (
        spec.family.value,
        spec.half_dim,
        order.k,
        order.beta,
        grid_size,
        seed,
        num_workers,
        num_samples,
    )
    return MomEstimate(
        mean=mean,
        std_error=math.sqrt(var / n),
        num_samples=num_samples,
        config_digest=digest,
    )
