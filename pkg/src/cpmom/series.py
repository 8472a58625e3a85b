"""Truncated multivariate Taylor arithmetic and pole-kernel expansions.

Every contour integral in this package reduces, after symbolic cancellation
of the kernel poles against vanishing Vandermonde factors, to the extraction
of one Taylor coefficient of an analytic function against a pure monomial
denominator.  This module supplies the series ring that makes that exact.

Coefficients are complex doubles; storage is a sparse map from exponent
multi-indices to coefficients, truncated at a total-degree cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class MultiSeries:
    """Truncated multivariate Taylor series with complex coefficients."""

    __slots__ = ("num_vars", "cap", "coeffs")

    def __init__(self, num_vars: int, cap: int, coeffs: dict | None = None):
        self.num_vars = int(num_vars)
        self.cap = int(cap)
        clean = {}
        if coeffs:
            for idx, c in coeffs.items():
                idx = tuple(int(e) for e in idx)
                if len(idx) != self.num_vars:
                    raise ValueError("multi-index length mismatch")
                if sum(idx) <= self.cap and c != 0:
                    clean[idx] = complex(c)
        self.coeffs = clean

    @classmethod
    def constant(cls, num_vars: int, cap: int, value: complex) -> "MultiSeries":
        return cls(num_vars, cap, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, cap: int, i: int, coeff: complex = 1.0) -> "MultiSeries":
        idx = [0] * num_vars
        idx[i] = 1
        return cls(num_vars, cap, {tuple(idx): coeff})

    def __eq__(self, other):
        return (
            isinstance(other, MultiSeries)
            and self.num_vars == other.num_vars
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        terms = ", ".join(
            "%r: %.6g%+.6gj" % (idx, c.real, c.imag) for idx, c in sorted(self.coeffs.items())
        )
        return "MultiSeries(%d vars, cap %d, {%s})" % (self.num_vars, self.cap, terms)

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, MultiSeries):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__


def _check_compat(a: MultiSeries, b: MultiSeries) -> None:
    if a.num_vars != b.num_vars:
        raise ValueError("variable-count mismatch: %d vs %d" % (a.num_vars, b.num_vars))


def add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    _check_compat(a, b)
    cap = min(a.cap, b.cap)
    out = dict(a.coeffs)
    for idx, c in b.coeffs.items():
        out[idx] = out.get(idx, 0.0) + c
    return MultiSeries(a.num_vars, cap, out)


def scale(a: MultiSeries, c: complex) -> MultiSeries:
    return MultiSeries(a.num_vars, a.cap, {idx: v * c for idx, v in a.coeffs.items()})


def mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    _check_compat(a, b)
    cap = min(a.cap, b.cap)
    out: dict = {}
    for ia, ca in a.coeffs.items():
        da = sum(ia)
        for ib, cb in b.coeffs.items():
            if da + sum(ib) > cap:
                continue
            idx = tuple(x + y for x, y in zip(ia, ib))
            out[idx] = out.get(idx, 0.0) + ca * cb
    return MultiSeries(a.num_vars, cap, out)


def invert_unit(a: MultiSeries) -> MultiSeries:
    """Multiplicative inverse of a series with nonzero constant term."""
    zero = (0,) * a.num_vars
    c0 = a.coeffs.get(zero, 0.0)
    if c0 == 0:
        raise ZeroDivisionError("invert_unit requires a nonzero constant term")
    # geometric series in r = 1 - a/c0, which has no constant term
    r = MultiSeries(
        a.num_vars,
        a.cap,
        {idx: -c / c0 for idx, c in a.coeffs.items() if idx != zero},
    )
    acc = MultiSeries.constant(a.num_vars, a.cap, 1.0)
    power = MultiSeries.constant(a.num_vars, a.cap, 1.0)
    for _ in range(a.cap):
        power = mul(power, r)
        if not power.coeffs:
            break
        acc = add(acc, power)
    return scale(acc, 1.0 / c0)


def taylor_coefficient(a: MultiSeries, idx: Sequence[int]) -> complex:
    idx = tuple(int(e) for e in idx)
    if sum(idx) > a.cap:
        raise ValueError("requested index exceeds the truncation cap")
    return a.coeffs.get(idx, 0.0 + 0.0j)


# ---------------------------------------------------------------------------
# pair kernels: functions with a simple pole of residue 1 at the origin


@dataclass(frozen=True)
class PairKernel:
    """Laurent data of a kernel K with K(s) = 1/s + sum_j taylor[j] s^j."""

    name: str
    laurent_tail: complex
    taylor_coefficients: np.ndarray
    evaluator: Callable

    def analytic_part_coefficients(self, cap: int) -> np.ndarray:
        """Coefficients of g(s) = s*K(s) up to degree ``cap`` (g(0) = 1)."""
        if cap > len(self.taylor_coefficients):
            raise ValueError(
                "kernel %s holds %d Taylor coefficients, %d requested"
                % (self.name, len(self.taylor_coefficients), cap)
            )
        g = np.empty(cap + 1, dtype=complex)
        g[0] = self.laurent_tail
        g[1:] = self.taylor_coefficients[:cap]
        return g


def _poly_inverse(c: np.ndarray, n: int) -> np.ndarray:
    """Power-series inverse of sum c[m] s^m (c[0] != 0), to n+1 coefficients."""
    out = np.zeros(n + 1, dtype=complex)
    out[0] = 1.0 / c[0]
    for m in range(1, n + 1):
        s = 0.0 + 0.0j
        top = min(m, len(c) - 1)
        for j in range(1, top + 1):
            s += c[j] * out[m - j]
        out[m] = -s / c[0]
    return out


def rmt_kernel(max_order: int = 40) -> PairKernel:
    """K(s) = (1 - exp(-s))^{-1}; analytic part is the Bernoulli generating
    function s/(1 - exp(-s))."""
    # (1 - e^{-s})/s = sum_{m>=0} (-1)^m s^m / (m+1)!
    c = np.array(
        [(-1.0) ** m / math.factorial(m + 1) for m in range(max_order + 2)], dtype=complex
    )
    g = _poly_inverse(c, max_order + 1)

    def evaluate(s):
        s = np.asarray(s)
        if s.dtype.kind != "c":
            s = s.astype(complex)
        return 1.0 / (1.0 - np.exp(-s))

    return PairKernel(
        name="rmt",
        laurent_tail=complex(g[0]),
        taylor_coefficients=g[1 : max_order + 2],
        evaluator=evaluate,
    )


_EM_BERNOULLI = [
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
    43867.0 / 798,
    -174611.0 / 330,
]


def zeta_em(s, cutoff: int = 24, correction_terms: int = 9):
    """Riemann zeta by Euler-Maclaurin summation; valid away from s = 1.

    Accurate to ~1e-13 for moderate |Im s| (plenty for the shifted-moment
    contours, where |Im s| stays below ~4*pi).
    """
    s = np.asarray(s, dtype=complex)
    n = np.arange(1, cutoff)
    total = np.sum(n ** (-s[..., None]), axis=-1)
    M = float(cutoff)
    total = total + M ** (1.0 - s) / (s - 1.0) + 0.5 * M ** (-s)
    # correction terms B_{2j}/(2j)! * s(s+1)...(s+2j-2) * M^{1-s-2j}
    rising = np.ones_like(s)
    for j in range(1, correction_terms + 1):
        b2j = _EM_BERNOULLI[j - 1]
        if j == 1:
            rising = s
        else:
            rising = rising * (s + (2 * j - 3)) * (s + (2 * j - 2))
        total = total + b2j / math.factorial(2 * j) * rising * M ** (1.0 - s - 2 * j)
    return total


def zeta_kernel(max_order: int = 40) -> PairKernel:
    """K(s) = zeta(1+s); Taylor data recovered from an Euler-Maclaurin
    evaluator by Cauchy's formula on a circle (g(s) = s*zeta(1+s) is entire)."""
    n_fft = 256
    rho = 0.5
    t = np.exp(2j * np.pi * np.arange(n_fft) / n_fft)
    samples = rho * t * zeta_em(1.0 + rho * t)
    g = np.fft.fft(samples) / n_fft / rho ** np.arange(n_fft)

    def evaluate(s):
        return zeta_em(1.0 + np.asarray(s, dtype=complex))

    return PairKernel(
        name="zeta",
        laurent_tail=complex(g[0]),
        taylor_coefficients=g[1 : max_order + 2],
        evaluator=evaluate,
    )


def kernel_pole_expansion(
    kernel: PairKernel, linear_form: Sequence[int], num_vars: int, cap: int
) -> MultiSeries:
    """Analytic factor g with K(s) = g(s)/s, composed with s = sum of the
    named variables; g(0) = 1 for both kernels used here."""
    if kernel.laurent_tail != 1:
        raise ValueError("kernel_pole_expansion requires residue-1 kernels")
    g = kernel.analytic_part_coefficients(cap)
    s = MultiSeries(num_vars, cap)
    for i in linear_form:
        s = add(s, MultiSeries.variable(num_vars, cap, i))
    # Horner in s
    acc = MultiSeries.constant(num_vars, cap, g[cap])
    for j in range(cap - 1, -1, -1):
        acc = add(mul(acc, s), MultiSeries.constant(num_vars, cap, g[j]))
    return acc


# ---------------------------------------------------------------------------
# symbolic Vandermonde factorisation


@dataclass(frozen=True)
class VandermondeFactor:
    pair: tuple
    kind: str  # "sum" for (z_m + z_n)^2, "diff" for (z_n - z_m)^2
    vanishing: bool


def vandermonde_factored(mu) -> list:
    """Delta(z_1^2, ..., z_V^2)^2 as pairwise factors tagged by whether the
    corresponding mu-sum (for 'sum') or mu-difference (for 'diff') vanishes."""
    slots = mu.slots
    V = len(slots)
    factors = []
    for m in range(V):
        for n in range(m + 1, V):
            (im, sm), (in_, sn) = slots[m], slots[n]
            sum_vanishes = im == in_ and sm == -sn
            diff_vanishes = im == in_ and sm == sn
            factors.append(VandermondeFactor((m, n), "sum", sum_vanishes))
            factors.append(VandermondeFactor((m, n), "diff", diff_vanishes))
    return factors
