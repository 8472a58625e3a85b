"""Haar-distributed eigenangle sampling for Sp(2N) and SO(2N).

Eigenvalues of both groups come in conjugate pairs e^{+-i phi_j}; only the
N representatives phi_j in [0, pi] are kept.  Matrices are built from
Gaussian ensembles by structure-preserving orthogonalisation with positive
real normalisation, which yields the exact Haar distribution; an angle-space
Metropolis sampler targeting the Weyl density is provided as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Family, GroupSpec, NumericFailure


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream: identical (seed, stream_id) pairs give
    identical draws, and distinct stream_ids are statistically independent."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def worker(self, worker_id: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id * 65536 + worker_id + 1)


@dataclass(frozen=True)
class EigenAngles:
    angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        for a in self.angles:
            if not 0.0 <= a <= math.pi:
                raise ValueError("eigenangles must lie in [0, pi]")


def _angles_from_unitary(U: np.ndarray) -> np.ndarray:
    """Representative angles of a stack of 2N x 2N matrices with +-pair
    spectra; returns shape (..., N), ascending."""
    ev = np.linalg.eigvals(U)
    ang = np.sort(np.abs(np.angle(ev)), axis=-1)
    # each phi appears twice (as +phi and -phi); average the pair for accuracy
    return 0.5 * (ang[..., 0::2] + ang[..., 1::2])


def _sample_so_batch(N: int, size: int, gen: np.random.Generator) -> np.ndarray:
    X = gen.standard_normal((size, 2 * N, 2 * N))
    Q, R = np.linalg.qr(X)
    d = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    Q = Q * d[:, None, :]
    # restrict O(2N) to SO(2N): flip one column where det = -1 (a fixed
    # right-translation between the cosets, so Haar measure is preserved)
    flip = np.linalg.det(Q) < 0
    Q[flip, :, 0] *= -1.0
    return _angles_from_unitary(Q)


def _quat_gram_schmidt(A: np.ndarray, B: np.ndarray):
    """Orthonormalise the columns of the quaternion matrix A + B j in place.

    A, B have shape (S, N, N); the quaternion inner product is taken with
    right-module conventions and the normalisation constants are real and
    positive, so Gaussian input yields exactly Haar output.
    """
    S, N, _ = A.shape
    for n in range(N):
        va, vb = A[:, :, n], B[:, :, n]
        for m in range(n):
            ua, ub = A[:, :, m], B[:, :, m]
            # h = <u, v> (quaternion-valued, shape (S,))
            ha = np.sum(np.conj(ua) * va + ub * np.conj(vb), axis=1)
            hb = np.sum(np.conj(ua) * vb - ub * np.conj(va), axis=1)
            # v -= u h (componentwise right multiplication by h)
            va -= ua * ha[:, None] - ub * np.conj(hb)[:, None]
            vb -= ua * hb[:, None] + ub * np.conj(ha)[:, None]
        norm = np.sqrt(np.sum(np.abs(va) ** 2 + np.abs(vb) ** 2, axis=1))
        va /= norm[:, None]
        vb /= norm[:, None]


def _sample_sp_batch(N: int, size: int, gen: np.random.Generator) -> np.ndarray:
    shape = (size, N, N)
    A = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    B = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    _quat_gram_schmidt(A, B)
    U = np.empty((size, 2 * N, 2 * N), dtype=complex)
    U[:, :N, :N] = A
    U[:, :N, N:] = B
    U[:, N:, :N] = -np.conj(B)
    U[:, N:, N:] = np.conj(A)
    return _angles_from_unitary(U)


def sample_eigenangles_batch(spec: GroupSpec, rng: RngStream, size: int) -> np.ndarray:
    """(size, N) array of representative eigenangles, Haar-distributed."""
    gen = rng.generator()
    if spec.family is Family.SYMPLECTIC:
        return _sample_sp_batch(spec.half_dim, size, gen)
    return _sample_so_batch(spec.half_dim, size, gen)


def sample_eigenangles(spec: GroupSpec, rng: RngStream) -> EigenAngles:
    return EigenAngles(tuple(sample_eigenangles_batch(spec, rng, 1)[0]))


# ---------------------------------------------------------------------------
# Weyl eigenangle densities


def weyl_density_grid(spec: GroupSpec, angles: np.ndarray) -> np.ndarray:
    """Unnormalised joint eigenangle density, batched over rows of ``angles``
    (shape (..., N))."""
    angles = np.asarray(angles, dtype=float)
    c = np.cos(angles)
    dens = np.ones(angles.shape[:-1])
    N = angles.shape[-1]
    for j in range(N):
        for k in range(j + 1, N):
            dens = dens * (c[..., j] - c[..., k]) ** 2
    if spec.family is Family.SYMPLECTIC:
        dens = dens * np.prod(np.sin(angles) ** 2, axis=-1)
    return dens


def weyl_density(spec: GroupSpec, angles) -> float:
    if isinstance(angles, EigenAngles):
        angles = angles.angles
    return float(weyl_density_grid(spec, np.asarray(angles, dtype=float)))


def normalize_density(spec: GroupSpec, nodes: int = 48, rtol: float = 1e-10) -> float:
    """Normalisation constant Z of the Weyl density over [0, pi]^N, by tensor
    Gauss-Legendre quadrature with a node-doubling convergence check."""
    N = spec.half_dim
    if N > 4:
        raise ValueError("normalisation quadrature is limited to N <= 4")

    def estimate(n_nodes):
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        phi = 0.5 * math.pi * (x + 1.0)
        wts = 0.5 * math.pi * w
        mesh = np.meshgrid(*([phi] * N), indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        wmesh = np.meshgrid(*([wts] * N), indexing="ij")
        weight = np.prod(np.stack(wmesh), axis=0).reshape(-1)
        return float(np.sum(weight * weyl_density_grid(spec, pts)))

    a, b = estimate(nodes), estimate(2 * nodes)
    if abs(b - a) > rtol * max(abs(b), 1.0):
        raise NumericFailure(
            "Weyl normalisation did not converge under node doubling: "
            "%.15g vs %.15g" % (a, b)
        )
    return b


def metropolis_eigenangles(
    spec: GroupSpec,
    rng: RngStream,
    size: int,
    burn_in: int = 2000,
    thin: int = 5,
    step: float = 0.6,
) -> np.ndarray:
    """Angle-space Metropolis sampler targeting the Weyl density.

    Slower and correlated, but entirely independent of the matrix-model
    construction; used only as a cross-check backend (N <= 4).
    """
    N = spec.half_dim
    if N > 4:
        raise ValueError("the Metropolis backend is limited to N <= 4")
    gen = rng.generator()
    state = gen.uniform(0.1, math.pi - 0.1, size=N)
    dens = weyl_density_grid(spec, state)
    out = np.empty((size, N))
    total = burn_in + size * thin
    proposals = gen.normal(0.0, step, size=(total, N))
    uniforms = gen.uniform(size=total)
    kept = 0
    for i in range(total):
        cand = state + proposals[i]
        if np.all((cand > 0.0) & (cand < math.pi)):
            cand_dens = weyl_density_grid(spec, cand)
            if dens == 0.0 or uniforms[i] < cand_dens / dens:
                state, dens = cand, cand_dens
        if i >= burn_in and (i - burn_in) % thin == 0:
            out[kept] = np.sort(state)
            kept += 1
    return out[:kept]
