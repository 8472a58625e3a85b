"""Exact autocorrelation integrals by residue extraction.

The multiple contour integral for the autocorrelation of characteristic
polynomials (and for the shifted-moment polynomials of L-functions, which
share its analytic structure) is evaluated configuration by configuration.
After the change of variables z_n = v_n + i*mu_n every pole is a pure
monomial v_n^{2*beta}: kernel poles over cancelled pairs are absorbed
symbolically into the vanishing Vandermonde factors, everything else is
analytic and expanded as a truncated Taylor polynomial.  The residue is the
coefficient of prod_n v_n^{2*beta-1}.

Polynomials are stored densely with per-variable degree capped at
2*beta - 1 (higher powers can never reach the target coefficient), batched
over a whole grid of shift vectors at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    ConfigurationVector,
    GroupSpec,
    MomOrder,
    NumericFailure,
    build_mu_assignment,
    combinatorial_coefficient,
    enumerate_configurations,
)
from .series import PairKernel, rmt_kernel

TWO_PI = 2.0 * np.pi

# exact evaluation is supported up to k*beta = 2; larger orders explode
# combinatorially and must be requested explicitly
MAX_EXACT_KBETA = 2


@dataclass(frozen=True)
class ShiftVector:
    theta: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        th = np.asarray(self.theta)
        if np.any(np.isclose(np.mod(th, np.pi), 0.0, atol=1e-12)):
            raise ValueError("shift angles must avoid 0 and pi (mod pi)")
        for i in range(len(th)):
            for j in range(i + 1, len(th)):
                for s in (th[i] - th[j], th[i] + th[j]):
                    if np.isclose(np.mod(s, TWO_PI), 0.0, atol=1e-12) or np.isclose(
                        np.mod(s, TWO_PI), TWO_PI, atol=1e-12
                    ):
                        raise ValueError(
                            "shift angles must have sums/differences away from 2*pi*Z"
                        )


@dataclass(frozen=True)
class IntegrandSpec:
    """Everything the residue engine needs besides the configuration.

    ``variable_prefactor(centers, deg)`` must return Taylor coefficients
    (shape ``centers.shape + (deg+1,)``) of the per-variable analytic factor
    about the complex centers ``i*mu_n``; ``joint_prefactor(mu_vals, shape)``
    returns a dense coefficient block for a jointly analytic factor such as
    an Euler product.  Both default to 1.
    """

    kernel: PairKernel
    exponent_scale: float
    diagonal_pairs: bool
    variable_prefactor: Optional[Callable] = None
    joint_prefactor: Optional[Callable] = None


def rmt_integrand(spec: GroupSpec, max_order: int = 40) -> IntegrandSpec:
    return IntegrandSpec(
        kernel=rmt_kernel(max_order),
        exponent_scale=float(spec.half_dim),
        diagonal_pairs=spec.diagonal_pairs,
    )


# ---------------------------------------------------------------------------
# dense batched polynomial helpers


def _shifted_accumulate(out, P, shifts, coeff):
    """out += coeff * (monomial shift of P); shifts = [(axis, exponent), ...].

    ``P`` has shape (G, D, ..., D); ``coeff`` is scalar or shape (G,).
    """
    idx_out = [slice(None)] * P.ndim
    idx_in = [slice(None)] * P.ndim
    for ax, e in shifts:
        if e == 0:
            continue
        D = P.shape[ax]
        if e >= D:
            return
        idx_out[ax] = slice(e, None)
        idx_in[ax] = slice(None, D - e)
    c = coeff
    if isinstance(c, np.ndarray) and c.ndim == 1:
        c = c.reshape((-1,) + (1,) * (P.ndim - 1))
    out[tuple(idx_out)] += c * P[tuple(idx_in)]


def _apply_single_var_series(P, u, var):
    """P <- P * sum_j u[..., j] v_var^j (truncated)."""
    out = np.zeros_like(P)
    D = P.shape[1 + var]
    for j in range(min(u.shape[-1], D)):
        cj = u[..., j]
        if np.all(cj == 0):
            continue
        _shifted_accumulate(out, P, [(1 + var, j)], cj)
    return out


def _apply_pair_series(P, u, var_m, var_n, sign_n=+1):
    """P <- P * sum_j u[..., j] (v_m + sign_n*v_n)^j (truncated)."""
    out = np.zeros_like(P)
    D = P.shape[1 + var_m]
    for j in range(u.shape[-1]):
        cj = u[..., j]
        if np.all(cj == 0):
            continue
        for i in range(j + 1):
            em, en = i, j - i
            if em >= D or en >= D:
                continue
            w = math.comb(j, i) * (sign_n ** en)
            _shifted_accumulate(out, P, [(1 + var_m, em), (1 + var_n, en)], w * cj)
    return out


def _apply_dense_block(P, Q):
    """P <- P * Q where Q is a dense coefficient block of the same shape."""
    out = np.zeros_like(P)
    V = P.ndim - 1
    D = P.shape[1]
    for idx in np.ndindex(*([D] * V)):
        c = Q[(slice(None),) + idx]
        if np.all(c == 0):
            continue
        _shifted_accumulate(out, P, list(zip(range(1, V + 1), idx)), c)
    return out


def _poly_pair(const, deg_needed, dtype=complex):
    """(s + const)^2 as univariate coefficients in s, shape const.shape+(deg,)."""
    const = np.asarray(const, dtype=dtype)
    u = np.zeros(const.shape + (max(3, deg_needed + 1),), dtype=dtype)
    u[..., 0] = const * const
    u[..., 1] = 2.0 * const
    u[..., 2] = 1.0
    return u


def _cauchy_taylor(evaluate, centers, deg, radius, n_fft=64, dtype=complex):
    """Taylor coefficients of an analytic function about batched centers."""
    centers = np.asarray(centers, dtype=dtype)
    real_dtype = np.zeros(1, dtype=dtype).real.dtype
    radius = np.broadcast_to(np.asarray(radius, dtype=real_dtype), centers.shape)
    phase = 2j * np.pi * np.arange(n_fft, dtype=real_dtype) / n_fft
    roots = np.exp(phase.astype(dtype))
    pts = centers[..., None] + radius[..., None] * roots
    vals = np.asarray(evaluate(pts), dtype=dtype)
    j = np.arange(deg + 1)
    if dtype == np.dtype(complex):
        coeffs = np.fft.fft(vals, axis=-1) / n_fft
    else:
        # extended precision: plain DFT (np.fft has no long-double path)
        dft = np.exp(np.outer(-phase, np.arange(n_fft)).astype(dtype))[:, : deg + 1]
        coeffs = np.tensordot(vals, dft, axes=([-1], [0])) / n_fft
    return coeffs[..., : deg + 1] / radius[..., None] ** j


def _kernel_shifted_taylor(kernel: PairKernel, centers, deg, dtype=complex):
    """Taylor of K about analytic centers, radius scaled to the nearest pole."""
    centers = np.asarray(centers, dtype=dtype)
    if kernel.name == "rmt":
        q = np.round(np.imag(centers).astype(float) / TWO_PI)
        dist = np.abs(centers - np.asarray(2j * np.pi, dtype=dtype) * q.astype(dtype))
    else:
        dist = np.abs(centers)
    if np.any(dist < 1e-9):
        raise NumericFailure("kernel pole pinches an expansion centre")
    radius = np.minimum(0.45 * dist, 0.5)
    return _cauchy_taylor(kernel.evaluator, centers, deg, radius, dtype=dtype)


# ---------------------------------------------------------------------------
# the residue engine


def mu_residue_batch(ispec: IntegrandSpec, order: MomOrder, slots, theta_grid, dtype=complex):
    """Residue (times (2*pi*i)^V) for an arbitrary slot assignment, batched.

    ``slots`` is a sequence of (m, sign) pairs of length 2*k*beta;
    ``theta_grid`` has shape (G, k).  ``dtype`` may be set to
    ``numpy.clongdouble`` to compensate the cancellation that near-pinched
    kernel centres cause at large N*beta.
    """
    dtype = np.dtype(dtype)
    real_dtype = np.zeros(1, dtype=dtype).real.dtype
    theta_grid = np.atleast_2d(np.asarray(theta_grid, dtype=real_dtype))
    G, k = theta_grid.shape
    beta = order.beta
    V = order.num_vars
    D = 2 * beta  # per-variable degrees 0 .. 2*beta-1
    if len(slots) != V:
        raise ValueError("slot assignment must have length 2*k*beta")

    signs = np.array([s for (_, s) in slots], dtype=real_dtype)
    idxs = np.array([m for (m, _) in slots], dtype=int)
    mu = signs[None, :] * theta_grid[:, idxs]  # (G, V)

    pair_deg = 2 * (D - 1)
    P = np.zeros((G,) + (D,) * V, dtype=dtype)
    P[(slice(None),) + (0,) * V] = 1.0

    # kernel factors over the pair range; cancelled pairs keep one power of
    # (v_m + v_n) from the squared Vandermonde sum factor
    g = ispec.kernel.analytic_part_coefficients(pair_deg).astype(dtype)
    s_times_g = np.concatenate([np.zeros(1, dtype=dtype), g[:pair_deg]])
    for m in range(V):
        start = m if ispec.diagonal_pairs else m + 1
        for n in range(start, V):
            im, sm = slots[m]
            in_, sn = slots[n]
            cancelled = m != n and im == in_ and sm == -sn
            if cancelled:
                # (z_m+z_n)^2 K(z_m+z_n) = s*g(s), s = v_m+v_n
                P = _apply_pair_series(P, s_times_g, m, n)
            else:
                centers = 1j * (mu[:, m] + mu[:, n])
                u = _kernel_shifted_taylor(ispec.kernel, centers, pair_deg, dtype=dtype)
                if m == n:
                    # K(2 z_n): rescale the series argument
                    u = u * (2.0 ** np.arange(pair_deg + 1)).astype(real_dtype)
                    P = _apply_single_var_series(P, u, n)
                else:
                    P = _apply_pair_series(P, u, m, n)

    # squared Vandermonde in z^2: (z_n - z_m)^2 (z_m + z_n)^2 over m < n
    for m in range(V):
        for n in range(m + 1, V):
            im, sm = slots[m]
            in_, sn = slots[n]
            sum_vanishes = im == in_ and sm == -sn
            diff_vanishes = im == in_ and sm == sn
            if not sum_vanishes:
                u = _poly_pair(1j * (mu[:, m] + mu[:, n]), pair_deg, dtype=dtype)
                P = _apply_pair_series(P, u, m, n)
            # else: one power already consumed by the kernel cancellation,
            # the surviving single power (v_m + v_n) was applied there
            if diff_vanishes:
                u = np.zeros((3,), dtype=dtype)
                u[2] = 1.0
                P = _apply_pair_series(P, u, n, m, sign_n=-1)
            else:
                u = _poly_pair(1j * (mu[:, n] - mu[:, m]), pair_deg, dtype=dtype)
                P = _apply_pair_series(P, u, n, m, sign_n=-1)

    # prod_n z_n, the non-vanishing shifted denominators, the exponential,
    # and any per-variable analytic prefactor
    scale = ispec.exponent_scale
    exp_u = np.array([scale ** j / math.factorial(j) for j in range(D)], dtype=dtype)
    for n in range(V):
        u = np.zeros((G, D), dtype=dtype)
        u[:, 0] = 1j * mu[:, n]
        if D > 1:
            u[:, 1] = 1.0
        P = _apply_single_var_series(P, u, n)
        for m in range(k):
            for sgn in (+1, -1):
                a = mu[:, n] - sgn * theta_grid[:, m]
                if slots[n] == (m, sgn):
                    # this is the extracted pole v_n^{2 beta}
                    continue
                if np.any(np.abs(a) < 1e-12):
                    raise NumericFailure("degenerate shift vector (coalescing poles)")
                # (v_n + i a)^{-2 beta}
                j = np.arange(D)
                binm = np.array(
                    [(-1) ** jj * math.comb(2 * beta + jj - 1, jj) for jj in j]
                ).astype(real_dtype)
                base = np.asarray(1j * a[:, None], dtype=dtype)
                u = binm[None, :] * base ** (-2 * beta - j[None, :])
                P = _apply_single_var_series(P, u, n)
        P = _apply_single_var_series(P, exp_u[None, :], n)
        if ispec.variable_prefactor is not None:
            u = ispec.variable_prefactor(1j * mu[:, n], D - 1)
            P = _apply_single_var_series(P, u, n)

    if ispec.joint_prefactor is not None:
        Q = ispec.joint_prefactor(mu, (D,) * V)
        P = _apply_dense_block(P, Q)

    phase = np.exp(np.asarray(1j * scale * mu.sum(axis=1), dtype=dtype))
    coeff = P[(slice(None),) + (D - 1,) * V]
    return (2j * np.pi) ** V * phase * coeff


def config_residue(ispec: IntegrandSpec, order: MomOrder, l: ConfigurationVector, theta):
    """Residue for one block configuration at a single shift vector."""
    theta = _as_theta(theta, order)
    mu = build_mu_assignment(order, l)
    return complex(mu_residue_batch(ispec, order, mu.slots, theta[None, :])[0])


def _as_theta(theta, order):
    if isinstance(theta, ShiftVector):
        theta = theta.theta
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape != (order.k,):
        raise ValueError("shift vector must have length k")
    ShiftVector(tuple(theta))  # validates
    return theta


def _assemble(ispec, order, theta_grid, check_real=True, rtol=1e-8, dtype=complex):
    kb = order.k * order.beta
    prefactor = (-1.0) ** kb * 2.0 ** (2 * kb) / math.factorial(2 * kb)
    total = np.zeros(theta_grid.shape[0], dtype=dtype)
    for l in enumerate_configurations(order):
        c = combinatorial_coefficient(order, l)
        mu = build_mu_assignment(order, l)
        # the (2 pi i)^V from the residue normalization cancels here
        total += c * mu_residue_batch(ispec, order, mu.slots, theta_grid, dtype=dtype) / (
            np.asarray(2j * np.pi, dtype=dtype) ** order.num_vars
        )
    total = np.asarray(total * prefactor, dtype=complex)
    if check_real:
        scale = max(float(np.max(np.abs(total))), 1.0)
        if np.any(np.abs(total.imag) > rtol * scale):
            raise NumericFailure(
                "autocorrelation has spurious imaginary part %.3e"
                % float(np.max(np.abs(total.imag)))
            )
    return total.real


def _check_order(order: MomOrder, allow_large: bool):
    if order.k * order.beta > MAX_EXACT_KBETA and not allow_large:
        mem = (2 * order.beta) ** order.num_vars * 16 / 1e6
        raise ValueError(
            "exact evaluation with k*beta = %d needs ~%.1f MB per grid point "
            "per configuration; pass allow_large=True to proceed"
            % (order.k * order.beta, mem)
        )


def autocorrelation(group: GroupSpec, order: MomOrder, theta, allow_large=False) -> float:
    """I_{k,beta}(G(2N), theta): exact finite-N autocorrelation value."""
    _check_order(order, allow_large)
    th = _as_theta(theta, order)
    ispec = rmt_integrand(group)
    return float(_assemble(ispec, order, th[None, :])[0])


def theta_grid(order: MomOrder, grid_size: int) -> np.ndarray:
    """Tensor quadrature grid over [0, 2*pi)^k with per-dimension offsets.

    Offsets differ between dimensions so that no grid point has theta_i =
    theta_j or theta_i + theta_j = 2*pi, where individual configuration
    residues degenerate (the assembled sum stays finite, but floating-point
    cancellation would be catastrophic).
    """
    k = order.k
    axes = []
    for j in range(k):
        delta = 0.5 + j / (2.0 * k) if k > 1 else 0.5
        axes.append((np.arange(grid_size) + delta) * TWO_PI / grid_size)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def min_theta_grid_size(group_half_dim: int, order: MomOrder) -> int:
    return 8 * group_half_dim * order.beta + 2


def mom_exact(
    group: GroupSpec,
    order: MomOrder,
    theta_grid_size=None,
    allow_large=False,
    precision: str = "auto",
) -> float:
    """MoM_{G(2N)}(k, beta) by exact trapezoid quadrature of the
    autocorrelation (a trigonometric polynomial, so the rule is exact).

    ``precision`` is one of "double", "extended", "auto".  Fine theta grids
    put kernel expansion centres close to the kernel poles at multiples of
    2*pi, and for k > 1 pairs of grid dimensions pinch each other as well;
    the induced cancellation costs roughly (grid size)^(k*(4*beta - 1)) in
    relative accuracy, so large N*beta*k runs switch to long doubles.
    """
    _check_order(order, allow_large)
    min_size = min_theta_grid_size(group.half_dim, order)
    if theta_grid_size is None:
        theta_grid_size = min_size
    if theta_grid_size < min_size:
        raise ValueError("theta grid must have at least %d points per dimension" % min_size)
    if precision not in ("double", "extended", "auto"):
        raise ValueError("precision must be 'double', 'extended' or 'auto'")
    if precision == "auto":
        loss = float(theta_grid_size) ** (order.k * (4 * order.beta - 1))
        precision = "extended" if loss > 1e7 else "double"
    dtype = np.clongdouble if precision == "extended" else complex
    grid = theta_grid(order, theta_grid_size)
    ispec = rmt_integrand(group)
    vals = _assemble(ispec, order, grid, dtype=dtype)
    return float(np.mean(vals))


def weyl_oracle_mom(group: GroupSpec, order: MomOrder, nodes: int = 64, check=True) -> float:
    """Independent brute-force MoM: tensor Gauss-Legendre quadrature of
    (inner theta-average)^k against the normalised Weyl eigenangle density."""
    from .haar import weyl_density_grid
    from .montecarlo import inner_moment_batch

    N = group.half_dim
    if N > 3:
        raise ValueError("the quadrature oracle is limited to N <= 3")

    def estimate(n_nodes):
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        phi = 0.5 * np.pi * (x + 1.0)
        wts = 0.5 * np.pi * w
        mesh = np.meshgrid(*([phi] * N), indexing="ij")
        angles = np.stack([m.reshape(-1) for m in mesh], axis=-1)  # (n^N, N)
        wmesh = np.meshgrid(*([wts] * N), indexing="ij")
        weight = np.prod(np.stack(wmesh), axis=0).reshape(-1)
        dens = weyl_density_grid(group, angles)
        Z = np.sum(weight * dens)
        grid_size = 4 * N * order.beta + 2
        inner = inner_moment_batch(angles, order.beta, grid_size)
        return float(np.sum(weight * dens * inner ** order.k) / Z)

    a, b = estimate(nodes), estimate(2 * nodes)
    if check and abs(b - a) > 1e-7 * max(abs(b), 1.0):
        raise NumericFailure(
            "Weyl-quadrature oracle did not converge: %.12g vs %.12g" % (a, b)
        )
    return b
