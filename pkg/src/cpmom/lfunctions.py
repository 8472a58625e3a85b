"""Arithmetic companions: quadratic characters, gamma factors, Euler
products, and the shifted-moment polynomials for two L-function families.

The family of quadratic Dirichlet L-functions has symplectic symmetry type;
quadratic twists of an elliptic curve L-function (restricted to even
functional-equation sign) have even orthogonal type.  The shifted-moment
polynomials Q and Upsilon share the contour-integral structure of the
random-matrix autocorrelations with the kernel (1 - e^{-s})^{-1} replaced
by zeta(1+s), so they are evaluated by the same residue engine.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from .autocorr import IntegrandSpec, _assemble, _as_theta, _cauchy_taylor, _check_order
from .core import Family, MomOrder, NumericFailure, leading_exponent
from .series import zeta_kernel

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

# sign of the functional equation for the default curve y^2 = x^3 - x
W_E_DEFAULT = +1


# ---------------------------------------------------------------------------
# Kronecker symbols and fundamental discriminants


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for positive n, completely multiplicative in n."""
    d = int(d)
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return 1
    result = 1
    # factor out 2s
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            result = -result
    # odd part via Legendre symbols from Euler's criterion
    p = 3
    while p * p <= n:
        while n % p == 0:
            n //= p
            result *= _legendre(d, p)
            if result == 0:
                return 0
        p += 2
    if n > 1:
        result *= _legendre(d, n)
    return result


def _legendre(d: int, p: int) -> int:
    """Legendre symbol (d/p) for odd prime p."""
    r = pow(d % p, (p - 1) // 2, p)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


@dataclass(frozen=True)
class Discriminant:
    d: int

    def __post_init__(self):
        if not is_fundamental_discriminant(self.d):
            raise ValueError("%d is not a fundamental discriminant" % self.d)

    @property
    def parity(self) -> int:
        """Gamma-factor parity a: 0 for d > 0, 1 for d < 0."""
        return 0 if self.d > 0 else 1


def _squarefree(m: int) -> bool:
    m = abs(m)
    if m == 0:
        return False
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 1
    return True


def is_fundamental_discriminant(d: int) -> bool:
    if d == 0 or d == 1:
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return _squarefree(m) and m % 4 in (2, 3)
    return False


def fundamental_discriminants(limit: int) -> list:
    """All fundamental discriminants d with |d| <= limit, sorted."""
    if limit < 1:
        raise ValueError("limit must be positive")
    # sieve squarefull numbers once instead of trial division per candidate
    squarefull = np.zeros(limit + 1, dtype=bool)
    p = 2
    while p * p <= limit:
        squarefull[p * p :: p * p] = True
        p += 1

    def sf(m):
        return not squarefull[abs(m)]

    out = []
    for d in range(-limit, limit + 1):
        if d in (0, 1):
            continue
        if d % 4 == 1 and sf(d):
            out.append(d)
        elif d % 4 == 0:
            m = d // 4
            if sf(m) and m % 4 in (2, 3):
                out.append(d)
    return out


# ---------------------------------------------------------------------------
# gamma factors


def log_gamma_factor_X(z, a: int):
    """log X(1/2 + z, a), analytic and single-valued for |Re z| < 1/2 + a.

    X(s, a) = pi^(s-1/2) Gamma((1+a-s)/2) / Gamma((s+a)/2); both gamma
    arguments keep positive real part in the strip, so the principal
    log-gamma branch is analytic there and log X(1/2, a) = 0.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.real) >= 0.5 + a):
        raise NumericFailure("gamma-factor evaluation outside the analytic strip")
    return (
        z * math.log(math.pi)
        + loggamma((0.5 + a - z) / 2.0)
        - loggamma((0.5 + a + z) / 2.0)
    )


def gamma_factor_X(s, a: int):
    """X(s, a) = pi^(s-1/2) Gamma((1+a-s)/2) / Gamma((s+a)/2)."""
    if a not in (0, 1):
        raise ValueError("parity a must be 0 or 1")
    s = np.asarray(s, dtype=complex)
    pole_dist = np.abs(np.round((1 + a - s) / 2).real * 2 - (1 + a - s))
    near = ((1 + a - s) / 2).real <= 0.25
    if np.any(near & (pole_dist < 1e-8)):
        raise NumericFailure("gamma-factor pole proximity")
    return np.exp(
        (s - 0.5) * math.log(math.pi) + loggamma((1 + a - s) / 2.0) - loggamma((s + a) / 2.0)
    )


def log_gamma_factor_Y(z, conductor: int):
    """log Y(1/2 + z), analytic and single-valued for |Re z| < 1."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.real) >= 1.0):
        raise NumericFailure("gamma-factor evaluation outside the analytic strip")
    return (
        -2.0 * z * math.log(math.sqrt(conductor) / (2.0 * math.pi))
        + loggamma(1.0 - z)
        - loggamma(1.0 + z)
    )


def gamma_factor_Y(s, conductor: int):
    """Y(s) = (sqrt(M)/2 pi)^(1-2s) Gamma(3/2 - s) / Gamma(1/2 + s)."""
    s = np.asarray(s, dtype=complex)
    arg = 1.5 - s
    if np.any((arg.real <= 0.25) & (np.abs(np.round(arg.real) - arg) < 1e-8)):
        raise NumericFailure("gamma-factor pole proximity")
    return np.exp(
        (1.0 - 2.0 * s) * math.log(math.sqrt(conductor) / (2.0 * math.pi))
        + loggamma(1.5 - s)
        - loggamma(0.5 + s)
    )


# ---------------------------------------------------------------------------
# elliptic curves: Frobenius traces by naive point counting


@dataclass(frozen=True)
class EllipticCurveData:
    """Short Weierstrass curve y^2 = x^3 + a4 x + a6 over the rationals."""

    a4: int
    a6: int
    conductor_hint: int
    ap_table: dict = field(default_factory=dict)

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a4 ** 3 + 27 * self.a6 ** 2)

    def is_good_prime(self, p: int) -> bool:
        return self.discriminant % p != 0


def ap_coefficient(curve: EllipticCurveData, p: int) -> int:
    """Frobenius trace a_p = p + 1 - #E(F_p) for good p, by point counting.

    Bad primes must be supplied through ``curve.ap_table``.
    """
    if p in curve.ap_table:
        return curve.ap_table[p]
    if not curve.is_good_prime(p):
        raise ValueError(
            "prime %d divides the discriminant; supply a_p via ap_table" % p
        )
    # chi(v) = +1/-1/0 for square/non-square/zero residues v mod p
    squares = set((x * x) % p for x in range(1, (p + 1) // 2 + 1))
    total = 0
    for x in range(p):
        v = (x * x * x + curve.a4 * x + curve.a6) % p
        if v == 0:
            continue
        total += 1 if v in squares else -1
    a_p = -total
    if a_p * a_p > 4 * p:
        raise NumericFailure("Hasse bound violated for p=%d" % p)
    return a_p


def load_ap_table(path: str) -> dict:
    """Read a 'p a_p' table, one pair per line."""
    table = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            p_str, ap_str = line.split()
            table[int(p_str)] = int(ap_str)
    return table


def save_ap_table(path: str, table: dict) -> None:
    with open(path, "w") as fh:
        for p in sorted(table):
            fh.write("%d %d\n" % (p, table[p]))


def build_ap_table(curve: EllipticCurveData, prime_cutoff: int) -> dict:
    table = dict(curve.ap_table)
    for p in _primes(prime_cutoff):
        if p not in table:
            table[p] = ap_coefficient(curve, p)
    return table


def default_curve(prime_cutoff: int = 1000) -> EllipticCurveData:
    """y^2 = x^3 - x: conductor 32, even functional-equation sign, a_2 = 0.

    Traces for p <= prime_cutoff come from the persisted cache when it covers
    the range, and are counted (and re-persisted) otherwise.
    """
    cache = os.path.join(_DATA_DIR, "ap_y2_x3_minus_x.txt")
    base = EllipticCurveData(a4=-1, a6=0, conductor_hint=32, ap_table={2: 0})
    table = dict(base.ap_table)
    if os.path.exists(cache):
        table.update(load_ap_table(cache))
    primes = _primes(prime_cutoff)
    if any(p not in table for p in primes):
        table = build_ap_table(
            EllipticCurveData(base.a4, base.a6, base.conductor_hint, table), prime_cutoff
        )
        os.makedirs(_DATA_DIR, exist_ok=True)
        save_ap_table(cache, table)
    return EllipticCurveData(base.a4, base.a6, base.conductor_hint, table)


@lru_cache(maxsize=None)
def _primes(limit: int) -> tuple:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])


# ---------------------------------------------------------------------------
# Euler products


def _euler_factor_A(z, p: float, order: MomOrder):
    """Per-prime factor of the Euler product A at shifted points z (..., V)."""
    z = np.asarray(z, dtype=complex)
    V = order.num_vars
    pair = np.ones(z.shape[:-1], dtype=complex)
    for m in range(V):
        for n in range(m, V):
            pair = pair * (1.0 - p ** (-1.0 - z[..., m] - z[..., n]))
    plus = np.prod(1.0 / (1.0 - p ** (-0.5 - z)), axis=-1)
    minus = np.prod(1.0 / (1.0 + p ** (-0.5 - z)), axis=-1)
    return pair * (0.5 * (plus + minus) + 1.0 / p) / (1.0 + 1.0 / p)


def _local_l_factor(x, p: int, a_p: int, good: bool):
    """1 / L-polynomial of the curve at p, evaluated at x = p^{-s}."""
    x = np.asarray(x, dtype=complex)
    if good:
        return 1.0 / (1.0 - a_p * x / math.sqrt(p) + x * x)
    return 1.0 / (1.0 - a_p * x / math.sqrt(p))


def _euler_factor_B(z, p: int, order: MomOrder, curve: EllipticCurveData, a_p: int):
    z = np.asarray(z, dtype=complex)
    V = order.num_vars
    pair = np.ones(z.shape[:-1], dtype=complex)
    for m in range(V):
        for n in range(m + 1, V):
            pair = pair * (1.0 - p ** (-1.0 - z[..., m] - z[..., n]))
    good = curve.is_good_prime(p)
    x = p ** (-0.5 - z)
    plus = np.prod(_local_l_factor(x, p, a_p, good), axis=-1)
    minus = np.prod(_local_l_factor(-x, p, a_p, good), axis=-1)
    return pair * (0.5 * (plus + minus) + 1.0 / p) / (1.0 + 1.0 / p)


def _euler_product(z, order, prime_cutoff, factor, drift_tol=1e-2):
    """Truncated prime product with a Cauchy self-check on the partial products.

    The drift between the half-cutoff and full partial products bounds the
    truncation scale; points with nonzero real part converge more slowly
    (the orthogonal-family product has a p^(-3/2) tail already at the
    origin), so callers sampling off the critical line pass a looser bound.
    """
    z = np.asarray(z, dtype=complex)
    primes = _primes(prime_cutoff)
    total = np.ones(z.shape[:-1], dtype=complex)
    at_half = None
    for p in primes:
        total = total * factor(z, p)
        if p <= prime_cutoff // 2:
            at_half = total.copy()
    if at_half is not None:
        drift = np.max(np.abs(total - at_half) / np.maximum(np.abs(total), 1e-300))
        if drift > drift_tol:
            raise NumericFailure(
                "Euler product partial products are not Cauchy (drift %.2e)" % drift
            )
    return total


def euler_product_A(order: MomOrder, prime_cutoff: int = 1000, z=None, drift_tol=1e-2):
    """A evaluated at z (default the origin), truncated at primes <= cutoff."""
    if prime_cutoff < 100:
        raise ValueError("prime_cutoff must be at least 100")
    if z is None:
        z = np.zeros(order.num_vars)
    value = _euler_product(
        z, order, prime_cutoff, lambda zz, p: _euler_factor_A(zz, p, order), drift_tol
    )
    if np.ndim(value) == 0 and abs(value.imag) < 1e-12 * max(abs(value.real), 1e-300):
        return float(value.real)
    return value


def euler_product_B(
    order: MomOrder,
    curve: EllipticCurveData | None = None,
    prime_cutoff: int = 1000,
    z=None,
    drift_tol=1e-1,
):
    """B evaluated at z (default the origin) for the given curve.

    The product has a genuine p^(-3/2) tail even at the origin, so the
    Cauchy self-check uses a looser default bound than the A product.
    """
    if prime_cutoff < 100:
        raise ValueError("prime_cutoff must be at least 100")
    if curve is None:
        curve = default_curve(prime_cutoff)
    if z is None:
        z = np.zeros(order.num_vars)
    ap = {p: ap_coefficient(curve, p) for p in _primes(prime_cutoff)}
    value = _euler_product(
        z,
        order,
        prime_cutoff,
        lambda zz, p: _euler_factor_B(zz, p, order, curve, ap[p]),
        drift_tol,
    )
    if np.ndim(value) == 0 and abs(value.imag) < 1e-12 * max(abs(value.real), 1e-300):
        return float(value.real)
    return value


# ---------------------------------------------------------------------------
# shifted-moment polynomials via the residue engine


def _sqrt_inv_prefactor(log_factor):
    """variable_prefactor callback: Taylor data of exp(-log_factor/2)."""

    def prefactor(centers, deg):
        def evaluate(z):
            return np.exp(-0.5 * log_factor(z))

        centers = np.asarray(centers, dtype=complex)
        return _cauchy_taylor(evaluate, centers, deg, 0.2)

    return prefactor


def _euler_joint_prefactor(order, prime_cutoff, factor, radius=0.03, n_fft=8):
    """joint_prefactor callback: dense Taylor block of the Euler product
    about the configuration centres i*mu, by a tensor Cauchy transform."""

    def prefactor(mu_vals, shape):
        G, V = mu_vals.shape
        roots = np.exp(2j * np.pi * np.arange(n_fft) / n_fft)
        # sample tensor: (G, n_fft, ..., n_fft, V)
        grids = np.meshgrid(*([roots] * V), indexing="ij")
        offsets = radius * np.stack(grids, axis=-1)  # (n_fft,)*V + (V,)
        pts = 1j * mu_vals.reshape((G,) + (1,) * V + (V,)) + offsets[None]
        vals = _euler_product(pts, order, prime_cutoff, factor, drift_tol=5e-2)
        coeffs = np.fft.fftn(vals, axes=tuple(range(1, V + 1))) / float(n_fft) ** V
        deg = shape[0]
        idx = (slice(None),) + (slice(0, deg),) * V
        block = coeffs[idx]
        powers = np.arange(deg)
        for axis in range(V):
            shape_axis = [1] * (V + 1)
            shape_axis[axis + 1] = deg
            block = block / (radius ** powers).reshape(shape_axis)
        return block

    return prefactor


def _shifted_integrand(
    order: MomOrder,
    x: float,
    diagonal: bool,
    arithmetic: bool,
    kernel=None,
    prime_cutoff: int = 1000,
    curve: EllipticCurveData | None = None,
) -> IntegrandSpec:
    if kernel is None:
        kernel = zeta_kernel()
    scale = x / 2.0 if diagonal else float(x)
    variable_prefactor = None
    joint_prefactor = None
    if arithmetic:
        if diagonal:
            # quadratic Dirichlet family: X(1/2+z, a)^{-1/2}; the two parities
            # agree at leading order and the polynomial is built with a = 0
            variable_prefactor = _sqrt_inv_prefactor(lambda z: log_gamma_factor_X(z, 0))
            factor = lambda zz, p: _euler_factor_A(zz, p, order)
        else:
            if curve is None:
                curve = default_curve(prime_cutoff)
            conductor = curve.conductor_hint
            variable_prefactor = _sqrt_inv_prefactor(
                lambda z: log_gamma_factor_Y(z, conductor)
            )
            ap = {p: ap_coefficient(curve, p) for p in _primes(prime_cutoff)}
            factor = lambda zz, p: _euler_factor_B(zz, p, order, curve, ap[p])
        joint_prefactor = _euler_joint_prefactor(order, prime_cutoff, factor)
    return IntegrandSpec(
        kernel=kernel,
        exponent_scale=scale,
        diagonal_pairs=diagonal,
        variable_prefactor=variable_prefactor,
        joint_prefactor=joint_prefactor,
    )


def q_poly(
    order: MomOrder,
    x: float,
    theta,
    prime_cutoff: int = 1000,
    arithmetic: bool = True,
    kernel=None,
    allow_large: bool = False,
) -> float:
    """Shifted-moment polynomial for the quadratic Dirichlet family.

    With ``kernel=rmt_kernel()`` and ``arithmetic=False`` the integrand
    coincides with the symplectic autocorrelation integrand at N = x/2.
    """
    _check_order(order, allow_large)
    th = _as_theta(theta, order)
    ispec = _shifted_integrand(order, x, True, arithmetic, kernel, prime_cutoff)
    return float(_assemble(ispec, order, th[None, :])[0])


def upsilon(
    order: MomOrder,
    x: float,
    theta,
    curve: EllipticCurveData | None = None,
    prime_cutoff: int = 1000,
    arithmetic: bool = True,
    kernel=None,
    allow_large: bool = False,
) -> float:
    """Shifted-moment polynomial for quadratic twists of an elliptic curve."""
    _check_order(order, allow_large)
    th = _as_theta(theta, order)
    ispec = _shifted_integrand(order, x, False, arithmetic, kernel, prime_cutoff, curve)
    return float(_assemble(ispec, order, th[None, :])[0])


# ---------------------------------------------------------------------------
# moment predictions


def even_sign_discriminants(limit: int, curve: EllipticCurveData, w_e: int = W_E_DEFAULT):
    """Fundamental d coprime to the conductor with functional-equation sign
    w_E * chi_d(-M) = +1."""
    M = curve.conductor_hint
    out = []
    for d in fundamental_discriminants(limit):
        if math.gcd(abs(d), M) != 1:
            continue
        # chi_d(-M) = chi_d(-1) * chi_d(M) with chi_d(-1) = sign of d
        chi_minus_one = 1 if d > 0 else -1
        chi = chi_minus_one * kronecker_symbol(d, M)
        if w_e * chi == 1:
            out.append(d)
    return out


def predicted_mom(
    family: Family,
    order: MomOrder,
    D: float,
    gamma_value: float,
    prime_cutoff: int = 1000,
    curve: EllipticCurveData | None = None,
) -> float:
    """Leading-order moment prediction for the arithmetic family.

    The symplectic-type (quadratic Dirichlet) prediction uses (log D)/2 as
    the large parameter; the orthogonal-type (elliptic twist) prediction
    uses log D unhalved.
    """
    if D < 3:
        raise ValueError("D must be at least 3")
    exponent = leading_exponent(family, order)
    if family is Family.SYMPLECTIC:
        const = euler_product_A(order, prime_cutoff)
        return const * gamma_value * (math.log(D) / 2.0) ** exponent
    if order.is_so_special_case(family):
        raise ValueError("the (k, beta) = (1, 1) orthogonal case is excluded")
    const = euler_product_B(order, curve, prime_cutoff)
    return const * gamma_value * math.log(D) ** exponent
