"""Leading-order coefficients of the moments of moments.

The large-size limit replaces each kernel factor by a rational function of
rescaled angle variables t, giving per-configuration integrals Psi (for the
symplectic family) and Omega (for the even orthogonal family) over
t in [0, infinity)^k, which are then paired with the theta-independent
factor f(v) and integrated over small circles in every v_n.

The t-integrals are oscillatory with only power decay; they are evaluated
three ways:

* k = 1: exact partial fractions.  Each term reduces to
  int_0^inf e^{i w t}/(t + z) dt = e^{-i w z} (E1(-i w z) + branch term),
  with the branch term tracking the continuation of E1 across its cut so
  that the value is the genuine real-path integral.
* k = 2: the inner t_2-integral in the same closed form (its value is an
  analytic function of t_1; the would-be branch loci are never crossed for
  real t_1), then the outer t_1-integral by mapped Gauss-Legendre
  quadrature.
* any k: exponential regularization e^{-eps sum t} with Richardson
  extrapolation eps -> 0, as a slow cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import exp1

from .core import (
    ConfigurationVector,
    Family,
    MomOrder,
    MuAssignment,
    NumericFailure,
    build_mu_assignment,
    combinatorial_coefficient,
    enumerate_configurations,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class VPoint:
    """2*k*beta complex numbers on a common circle |v_n| = r <= 1/2."""

    v: tuple

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(complex(x) for x in self.v))
        mods = np.abs(np.asarray(self.v))
        if mods.size == 0:
            raise ValueError("empty v")
        r = mods[0]
        if not np.allclose(mods, r, rtol=1e-9, atol=0.0):
            raise ValueError("all v_n must share a common modulus")
        if r <= 0 or r > 0.5 + 1e-12:
            raise ValueError("radius must lie in (0, 1/2]")

    @property
    def radius(self) -> float:
        return float(abs(self.v[0]))


@dataclass(frozen=True)
class OscillatoryQuadratureConfig:
    regularization_eps: tuple = (0.1, 0.05, 0.025)
    t_nodes: int = 200
    t_cutoff: float = 5.0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.regularization_eps)
        if len(eps) < 3 or any(e <= 0 for e in eps) or list(eps) != sorted(eps, reverse=True):
            raise ValueError("eps sequence must be >= 3 decreasing positive reals")
        object.__setattr__(self, "regularization_eps", eps)


@dataclass(frozen=True)
class TFactor:
    """One factor (v_m + v_n + i c . t) of the rescaled kernel product."""

    m: int
    n: int
    coeff: tuple  # integer vector c of length k


def t_factor_structure(diagonal_pairs: bool, order: MomOrder, l: ConfigurationVector):
    """Factors of the t-integrand and the oscillation frequencies nu."""
    mu = build_mu_assignment(order, l)
    slots = mu.slots
    V = order.num_vars
    factors = []
    for m in range(V):
        start = m if diagonal_pairs else m + 1
        for n in range(start, V):
            (im, sm), (in_, sn) = slots[m], slots[n]
            if m != n and im == in_ and sm == -sn:
                continue  # cancelled pair (the mu-sum vanishes)
            c = [0] * order.k
            c[im] += sm
            c[in_] += sn
            factors.append(TFactor(m, n, tuple(c)))
    nu = tuple(lm - order.beta for lm in l.l)
    return factors, nu


def f_factor(v, mu: MuAssignment) -> complex:
    """The theta-independent factor: cancelled-pair sums, vanishing
    Vandermonde differences squared, e^{sum v} over prod v^{2 beta}."""
    vv = np.asarray(v.v if isinstance(v, VPoint) else v, dtype=complex)
    return complex(_f_factor_batch(vv[None, :], mu)[0])


def _f_factor_batch(vs: np.ndarray, mu: MuAssignment) -> np.ndarray:
    slots = mu.slots
    V = len(slots)
    beta = mu.order.beta
    out = np.exp(np.sum(vs, axis=1)) / np.prod(vs, axis=1) ** (2 * beta)
    for m in range(V):
        for n in range(m + 1, V):
            (im, sm), (in_, sn) = slots[m], slots[n]
            if im == in_ and sm == -sn:
                out = out * (vs[:, n] + vs[:, m])
            elif im == in_ and sm == sn:
                out = out * (vs[:, n] - vs[:, m]) ** 2
    return out


# ---------------------------------------------------------------------------
# base oscillatory integrals


def _osc_base(omega: float, z: np.ndarray) -> np.ndarray:
    """int_0^inf e^{i omega t}/(t + z) dt for omega != 0, elementwise in z.

    For omega > 0 the value is e^{-i omega z} E1(-i omega z) continued
    across the E1 cut: the continuation picks up 2 pi i exactly when z lies
    in the open third quadrant.  omega < 0 follows by reflection.
    """
    z = np.asarray(z, dtype=complex)
    if omega < 0:
        return np.conj(_osc_base(-omega, np.conj(z)))
    if np.any((np.abs(z.imag) < 1e-13) & (z.real < 0)):
        raise NumericFailure("t-integrand pole lies on the integration path")
    val = exp1(-1j * omega * z)
    val = val + TWO_PI * 1j * ((z.real < 0) & (z.imag < 0))
    return np.exp(-1j * omega * z) * val


def _partial_fraction_t(a: np.ndarray, c: np.ndarray):
    """Coefficients R_p with 1/prod_p (a_p + i c_p t) = sum_p R_p/(a_p + i c_p t).

    ``a`` has shape (..., P); ``c`` is the integer slope vector (P,).
    Also returns the pole locations z_p = -i a_p / c_p of the rewritten
    factors 1/(i c_p) * 1/(t + z_p).
    """
    P = a.shape[-1]
    poles = 1j * a / c  # t_p with a_p + i c_p t_p = 0
    R = np.ones(a.shape, dtype=complex)
    for p in range(P):
        for q in range(P):
            if q == p:
                continue
            den = a[..., q] + 1j * c[q] * poles[..., p]
            R[..., p] = R[..., p] / den
    z = -1j * a / c
    return R, z


def _t_integral_1d(a: np.ndarray, c: np.ndarray, omega: float) -> np.ndarray:
    """int_0^inf e^{i omega t} / prod_p (a_p + i c_p t) dt, batched over the
    leading axes of ``a``; exact via partial fractions."""
    P = a.shape[-1]
    if P == 0:
        raise NumericFailure("t-integral with empty denominator diverges as stated")
    if P == 1 and omega == 0.0:
        raise NumericFailure("logarithmically divergent t-integral (degree 1, nu = 0)")
    R, z = _partial_fraction_t(a, c)
    if omega == 0.0:
        # individual terms diverge like log T; the coefficients of log T
        # cancel exactly (degree >= 2), leaving -sum R_p log(z_p)/(i c_p)
        return -np.sum(R / (1j * c) * np.log(z), axis=-1)
    return np.sum(R / (1j * c) * _osc_base(omega, z), axis=-1)


# ---------------------------------------------------------------------------
# Psi / Omega


def _check_so_excluded(diagonal_pairs: bool, order: MomOrder):
    if not diagonal_pairs and order.k == 1 and order.beta == 1:
        raise ValueError(
            "the (k, beta) = (1, 1) even orthogonal case is excluded: its "
            "t-integral diverges (the leading term is not of this form)"
        )


def _t_integral_batch(
    vs: np.ndarray,
    diagonal_pairs: bool,
    order: MomOrder,
    l: ConfigurationVector,
    cfg: OscillatoryQuadratureConfig,
) -> np.ndarray:
    _check_so_excluded(diagonal_pairs, order)
    factors, nu = t_factor_structure(diagonal_pairs, order, l)
    w = np.stack([vs[:, f.m] + vs[:, f.n] for f in factors], axis=-1)
    C = np.array([f.coeff for f in factors], dtype=float)  # (P, k)

    if order.k == 1:
        return _t_integral_1d(w, C[:, 0], 2.0 * nu[0])

    if order.k == 2:
        return _t_integral_k2(w, C, nu, cfg)

    raise NotImplementedError("t-integrals are implemented for k <= 2")


def _t_integral_k2(w, C, nu, cfg):
    """Iterated evaluation: closed form in t_2, mapped Gauss-Legendre in t_1.

    The inner closed form is analytic in t_1 along the real axis (each pole
    z_p(t_1) moves parallel to the real axis, so it never crosses the branch
    cut), so the outer integrand is smooth with power-law decay.
    """
    inner_mask = C[:, 1] != 0
    P_in = int(np.sum(inner_mask))
    if P_in == 0:
        raise NumericFailure("t_2 appears in no factor; integral diverges as stated")
    w_in, c_in = w[:, inner_mask], C[inner_mask]
    w_out, c_out = w[:, ~inner_mask], C[~inner_mask, 0]

    x, gl_w = np.polynomial.legendre.leggauss(cfg.t_nodes)
    # map (-1, 1) -> (0, inf) with scale L: t = L (1+x)/(1-x)
    L = cfg.t_cutoff
    t1 = L * (1.0 + x) / (1.0 - x)
    jac = 2.0 * L / (1.0 - x) ** 2
    weights = gl_w * jac

    total = np.zeros(w.shape[0], dtype=complex)
    omega2 = 2.0 * nu[1]
    omega1 = 2.0 * nu[0]
    for j in range(cfg.t_nodes):
        a = w_in + 1j * c_in[:, 0] * t1[j]  # (B, P_in)
        inner = _t_integral_1d(a, c_in[:, 1], omega2)
        outer = np.exp(1j * omega1 * t1[j]) * inner
        if w_out.shape[1]:
            outer = outer / np.prod(w_out + 1j * c_out * t1[j], axis=-1)
        total += weights[j] * outer
    return total


def psi_integral(
    v: VPoint,
    order: MomOrder,
    l: ConfigurationVector,
    cfg: Optional[OscillatoryQuadratureConfig] = None,
    method: str = "closed",
) -> complex:
    """Psi(v; l): the symplectic-family t-integral (kernel range m <= n)."""
    return _t_integral_single(v, True, order, l, cfg, method)


def omega_integral(
    v: VPoint,
    order: MomOrder,
    l: ConfigurationVector,
    cfg: Optional[OscillatoryQuadratureConfig] = None,
    method: str = "closed",
) -> complex:
    """Omega(v; l): the even-orthogonal t-integral (kernel range m < n)."""
    return _t_integral_single(v, False, order, l, cfg, method)


def _t_integral_single(v, diagonal_pairs, order, l, cfg, method):
    cfg = cfg or OscillatoryQuadratureConfig()
    vs = np.asarray(v.v if isinstance(v, VPoint) else v, dtype=complex)[None, :]
    if method == "closed":
        return complex(_t_integral_batch(vs, diagonal_pairs, order, l, cfg)[0])
    if method == "regularized":
        return _t_integral_regularized(vs[0], diagonal_pairs, order, l, cfg)
    raise ValueError("method must be 'closed' or 'regularized'")


def _chunked_oscillatory_quad(f, omega, eps, tail_tol=1e-12):
    """int_0^inf f(t) e^{-eps t} dt for f oscillating at frequency omega,
    integrated chunk by chunk (one oscillation period per chunk) so that
    adaptive quadrature never sees a long oscillatory interval."""
    from scipy.integrate import quad

    step = np.pi / abs(omega) if omega else 1.0
    T = -math.log(tail_tol) / eps
    total = 0.0 + 0.0j
    lo = 0.0
    while lo < T:
        hi = min(lo + step, T)
        re = quad(lambda t: (f(t) * math.exp(-eps * t)).real, lo, hi, limit=200)[0]
        im = quad(lambda t: (f(t) * math.exp(-eps * t)).imag, lo, hi, limit=200)[0]
        total += re + 1j * im
        lo = hi
    return total


def _t_integral_regularized(vv, diagonal_pairs, order, l, cfg):
    """Contract cross-check: e^{-eps sum t} damping, Richardson in eps."""
    _check_so_excluded(diagonal_pairs, order)
    factors, nu = t_factor_structure(diagonal_pairs, order, l)
    w = np.array([vv[f.m] + vv[f.n] for f in factors])
    C = np.array([f.coeff for f in factors], dtype=float)

    def value(eps):
        if order.k == 1:

            def f(t):
                return np.exp(2j * nu[0] * t) / np.prod(w + 1j * C[:, 0] * t)

            return _chunked_oscillatory_quad(f, 2.0 * nu[0], eps)
        if order.k == 2:
            # damp the outer variable only and keep the exact inner integral,
            # which already converges
            inner_mask = C[:, 1] != 0
            w_in, c_in = w[inner_mask], C[inner_mask]
            w_out, c_out = w[~inner_mask], C[~inner_mask, 0]

            def h(t1):
                a = (w_in + 1j * c_in[:, 0] * t1)[None, :]
                inner = _t_integral_1d(a, c_in[:, 1], 2.0 * nu[1])[0]
                val = np.exp(2j * nu[0] * t1) * inner
                if len(w_out):
                    val = val / np.prod(w_out + 1j * c_out * t1)
                return val

            return _chunked_oscillatory_quad(h, 2.0 * nu[0], eps)
        raise NotImplementedError("regularized route implemented for k <= 2")

    eps = np.array(cfg.regularization_eps)
    vals = np.array([value(e) for e in eps])
    return complex(_neville_at_zero(eps, vals))


def _neville_at_zero(xs, ys):
    """Polynomial extrapolation of (xs, ys) to x = 0 (Neville's scheme)."""
    t = np.array(ys, dtype=complex)
    n = len(t)
    for level in range(1, n):
        for i in range(n - level):
            x0, x1 = xs[i], xs[i + level]
            t[i] = (x0 * t[i + 1] - x1 * t[i]) / (x0 - x1)
    return t[0]


# ---------------------------------------------------------------------------
# gamma coefficients and polynomial fits


def _circle_nodes(V: int, n_nodes: int, radius: float):
    """Tensor grid of staggered circle nodes; per-variable angular offsets
    keep node sums away from the degenerate loci (real or imaginary axis
    coincidences) of the t-integrals."""
    axes = []
    for nvar in range(V):
        delta = 0.5 + (nvar + 1) / (2.0 * V + 3.0)
        axes.append(TWO_PI * (np.arange(n_nodes) + delta) / n_nodes)
    mesh = np.meshgrid(*axes, indexing="ij")
    alphas = np.stack([m.reshape(-1) for m in mesh], axis=-1)  # (n^V, V)
    return radius * np.exp(1j * alphas)


def gamma_coefficient(
    family: Family,
    order: MomOrder,
    radius: float = 0.25,
    n_nodes: int = 64,
    cfg: Optional[OscillatoryQuadratureConfig] = None,
    check_doubling: bool = True,
    doubling_rtol: float = 5e-3,
) -> float:
    """Leading coefficient gamma of MoM ~ gamma N^leading_exponent.

    Configuration sum of circle-contour integrals of f * (Psi or Omega),
    each circle discretized by an angular trapezoid rule.  Mirror-image
    configurations l and 2*beta - l contribute complex conjugates, so the
    assembled value is checked real and positive.
    """
    diagonal = family is Family.SYMPLECTIC
    _check_so_excluded(diagonal, order)
    cfg = cfg or OscillatoryQuadratureConfig()

    def estimate(n):
        # the assembled configuration-sum integral carries a constant
        # normalization factor 4 relative to the finite-size leading
        # coefficient; the factor is pinned by the symplectic (1, 1) case,
        # whose coefficient is exactly 1/2 (quadratic polynomial with known
        # closed form), and is radius-independent to 8 digits
        return 4.0 * _gamma_estimate(diagonal, order, n, radius, cfg)

    a = estimate(n_nodes)
    if check_doubling:
        b = estimate(2 * n_nodes)
        # first-order Richardson across the doubling (trapezoid error is
        # O(1/n) at the jump loci of the t-integrals)
        extr = 2.0 * b - a
        if abs(b - extr) > doubling_rtol * max(abs(extr), 1e-12):
            raise NumericFailure(
                "circle quadrature not converged: %s vs %s" % (a, b)
            )
        total = extr
    else:
        total = a
    rel_imag = abs(total.imag) / max(abs(total), 1e-300)
    if rel_imag > 1e-5:
        raise NumericFailure("gamma has non-negligible imaginary part: %s" % total)
    if total.real <= 0:
        raise NumericFailure("gamma must be strictly positive, got %s" % total)
    return float(total.real)


def _gamma_estimate(diagonal, order, n, radius, cfg, chunk=200000):
    """Configuration sum over a tensor circle grid with n nodes per circle,
    processed in chunks of node tuples to bound memory."""
    kb = order.k * order.beta
    V = order.num_vars
    vs_full = _circle_nodes(V, n, radius)
    total = 0.0 + 0.0j
    configs = [
        (
            build_mu_assignment(order, l),
            (-1.0) ** (kb + sum(l.l)) * combinatorial_coefficient(order, l),
            l,
        )
        for l in enumerate_configurations(order)
    ]
    for lo in range(0, vs_full.shape[0], chunk):
        vs = vs_full[lo : lo + chunk]
        # each contour integral dv_n/(2 pi i) discretizes to (1/n) sum v_n,
        # so the normalized V-fold contour is n^{-V} sum f * T * prod(v)
        measure = np.prod(vs, axis=1) / float(n) ** V
        for mu, weight, l in configs:
            fv = _f_factor_batch(vs, mu)
            tv = _t_integral_batch(vs, diagonal, order, l, cfg)
            total += weight * np.sum(measure * fv * tv)
    return total / ((2.0 * np.pi) ** order.k * math.factorial(2 * kb))


def leading_fit(values, degree: int):
    """Leading coefficient of a degree-``degree`` polynomial through MoM
    values at consecutive integer N, by forward differences.

    ``values`` is a sequence of (N, value) with consecutive N.  Returns
    (coefficient, residual) where the residual is the relative size of the
    next difference when degree + 2 values are supplied, else None.
    """
    pts = sorted(values)
    Ns = [p[0] for p in pts]
    ys = np.array([p[1] for p in pts], dtype=float)
    if len(pts) < degree + 1:
        raise ValueError("need at least degree + 1 values")
    if any(Ns[i + 1] - Ns[i] != 1 for i in range(len(Ns) - 1)):
        raise ValueError("values must be at consecutive N")
    diffs = ys.copy()
    for _ in range(degree):
        diffs = np.diff(diffs)
    coeff = diffs[0] / math.factorial(degree)
    residual = None
    if len(diffs) >= 2:
        nxt = np.diff(diffs)[0] / math.factorial(degree + 1)
        scale = max(abs(coeff), 1e-300)
        residual = abs(nxt) / scale
    return coeff, residual
