import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpmom.core import Family, GroupSpec, MomOrder, NumericFailure
from cpmom.autocorr import autocorrelation
from cpmom.series import rmt_kernel
from cpmom.lfunctions import (
    EllipticCurveData,
    ap_coefficient,
    build_ap_table,
    default_curve,
    euler_product_A,
    euler_product_B,
    even_sign_discriminants,
    fundamental_discriminants,
    gamma_factor_X,
    is_fundamental_discriminant,
    kronecker_symbol,
    load_ap_table,
    log_gamma_factor_X,
    log_gamma_factor_Y,
    predicted_mom,
    q_poly,
    save_ap_table,
    upsilon,
)

O11 = MomOrder(1, 1)


# ---------------------------------------------------------------------------
# Kronecker symbol and discriminants


def test_kronecker_known_values():
    # (5/.): quadratic residues mod 5 are {1, 4}
    assert [kronecker_symbol(5, n) for n in range(1, 6)] == [1, -1, -1, 1, 0]
    # (-4/.): the non-trivial character mod 4
    assert kronecker_symbol(-4, 1) == 1
    assert kronecker_symbol(-4, 3) == -1
    assert kronecker_symbol(-4, 2) == 0
    # (8/.): the character mod 8 with values at odd n
    assert kronecker_symbol(8, 3) == -1
    assert kronecker_symbol(8, 7) == 1


@given(
    d=st.sampled_from([-11, -8, -7, -4, -3, 5, 8, 12, 13, -15]),
    m=st.integers(1, 60),
    n=st.integers(1, 60),
)
@settings(max_examples=100, deadline=None)
def test_kronecker_multiplicative(d, m, n):
    assert kronecker_symbol(d, m * n) == kronecker_symbol(d, m) * kronecker_symbol(d, n)


@given(d=st.sampled_from([-11, -8, -7, -4, -3, 5, 8, 12]), n=st.integers(1, 40))
@settings(max_examples=80, deadline=None)
def test_kronecker_periodic_mod_d(d, n):
    assert kronecker_symbol(d, n) == kronecker_symbol(d, n + abs(d))


def test_fundamental_discriminants_small():
    assert set(fundamental_discriminants(12)) == {-11, -8, -7, -4, -3, 5, 8, 12}
    assert is_fundamental_discriminant(5)
    assert not is_fundamental_discriminant(1)
    assert not is_fundamental_discriminant(9)
    assert not is_fundamental_discriminant(-4 * 4)
    assert is_fundamental_discriminant(-20)


def test_fundamental_discriminant_density():
    """Asymptotically a fraction 3/pi^2 of integers of each sign is a
    fundamental discriminant."""
    limit = 10000
    count = len(fundamental_discriminants(limit))
    expected = limit * 6.0 / math.pi ** 2
    assert abs(count / expected - 1.0) < 0.05


def test_fundamental_discriminants_match_predicate():
    ds = fundamental_discriminants(200)
    for d in range(-200, 201):
        assert (d in ds) == is_fundamental_discriminant(d)


# ---------------------------------------------------------------------------
# archimedean factors


def test_gamma_factor_X_normalization_and_symmetry():
    assert complex(gamma_factor_X(0.5, 0)) == pytest.approx(1.0, rel=1e-12)
    z = 0.1 + 0.2j
    a = log_gamma_factor_X(z, 1)
    b = log_gamma_factor_X(np.conj(z), 1)
    assert np.conj(a) == pytest.approx(b, rel=1e-12)


def test_gamma_factor_X_rejects_pole_region():
    with pytest.raises(NumericFailure):
        log_gamma_factor_X(0.51, 0)


def test_gamma_factor_Y_basic():
    val = log_gamma_factor_Y(0.0, 32)
    assert val == pytest.approx(0.0, abs=1e-12)
    z = 0.05 - 0.1j
    assert np.conj(log_gamma_factor_Y(z, 32)) == pytest.approx(
        log_gamma_factor_Y(np.conj(z), 32), rel=1e-12
    )


# ---------------------------------------------------------------------------
# elliptic curve data


def test_default_curve_frobenius_traces():
    curve = default_curve(200)
    # complex multiplication: a_p = 0 for p = 3 mod 4; explicit values for
    # the first split primes
    known = {3: 0, 5: -2, 7: 0, 11: 0, 13: 6, 17: 2, 19: 0, 29: -10}
    for p, expected in known.items():
        assert ap_coefficient(curve, p) == expected, p
    for p in (23, 31, 43, 47):
        assert ap_coefficient(curve, p) == 0


def test_ap_hasse_bound():
    curve = default_curve(500)
    table = build_ap_table(curve, 500)
    for p, ap in table.items():
        assert ap * ap <= 4 * p


def test_ap_bad_prime_rejected():
    curve = EllipticCurveData(a4=-1, a6=0, conductor_hint=32, ap_table={})
    with pytest.raises(ValueError):
        ap_coefficient(curve, 2)


def test_ap_table_roundtrip(tmp_path):
    path = str(tmp_path / "table.txt")
    table = {3: 0, 5: -2, 13: 6}
    save_ap_table(path, table)
    assert load_ap_table(path) == table


# ---------------------------------------------------------------------------
# Euler products


def test_euler_product_A_stability():
    a3 = euler_product_A(O11, prime_cutoff=1000)
    a4 = euler_product_A(O11, prime_cutoff=10000)
    assert a4 == pytest.approx(0.29722, abs=5e-4)
    assert abs(a3 - a4) / abs(a4) < 1e-3


def test_euler_product_B_converges_slowly_but_stably():
    b1 = euler_product_B(O11, prime_cutoff=2000)
    b2 = euler_product_B(O11, prime_cutoff=8000)
    assert b2 == pytest.approx(0.077, abs=5e-3)
    # p^{-3/2} tail: much slower than the A product, but still Cauchy
    assert abs(b1 - b2) / abs(b2) < 2e-2


def test_euler_product_cutoff_validation():
    with pytest.raises(ValueError):
        euler_product_A(O11, prime_cutoff=10)


# ---------------------------------------------------------------------------
# shifted-moment engines


def test_q_poly_kernel_substitution_matches_autocorrelation():
    """With the random-matrix kernel, no arithmetic prefactors and x = 2N,
    the quadratic-family engine reproduces the symplectic autocorrelation."""
    kern = rmt_kernel()
    for N in (1, 2, 3):
        for theta in ((0.7,), (2.1,)):
            a = autocorrelation(GroupSpec(Family.SYMPLECTIC, N), O11, theta)
            b = q_poly(O11, 2.0 * N, theta, arithmetic=False, kernel=kern)
            assert b == pytest.approx(a, rel=1e-10)


def test_upsilon_kernel_substitution_matches_autocorrelation():
    kern = rmt_kernel()
    order = MomOrder(1, 2)
    for N in (1, 2):
        theta = (0.9,)
        a = autocorrelation(GroupSpec(Family.EVEN_ORTHOGONAL, N), order, theta)
        b = upsilon(order, float(N), theta, arithmetic=False, kernel=kern)
        assert b == pytest.approx(a, rel=1e-10)


def test_q_poly_growth_in_x():
    """At fixed shift the quadratic-family polynomial grows linearly in
    log-conductor for (k, beta) = (1, 1)."""
    q1 = q_poly(O11, 200.0, (0.7,))
    q2 = q_poly(O11, 400.0, (0.7,))
    assert q1 > 0 and q2 > 0
    assert q2 / q1 == pytest.approx(2.0, rel=0.05)


def test_upsilon_positive_and_growing():
    u1 = upsilon(O11, 200.0, (0.7,))
    u2 = upsilon(O11, 400.0, (0.7,))
    assert u1 > 0 and u2 > u1


# ---------------------------------------------------------------------------
# family selection and predictions


def test_even_sign_discriminants_default_curve():
    curve = default_curve(100)
    ds = even_sign_discriminants(40, curve)
    for d in ds:
        assert math.gcd(abs(d), 32) == 1
    assert 17 in ds
    assert -3 in ds
    assert 5 not in ds
    assert 8 not in ds  # even discriminants share a factor with the conductor


def test_predicted_mom_exponent_scaling():
    # with gamma = 1 and the same Euler constant, the ratio of predictions at
    # log D = 8 and log D = 4 isolates the leading exponent
    p1 = predicted_mom(Family.SYMPLECTIC, O11, math.exp(4.0), 1.0, prime_cutoff=200)
    p2 = predicted_mom(Family.SYMPLECTIC, O11, math.exp(8.0), 1.0, prime_cutoff=200)
    assert p2 / p1 == pytest.approx(2.0 ** 2, rel=1e-9)
    order = MomOrder(1, 2)
    q1 = predicted_mom(Family.EVEN_ORTHOGONAL, order, math.exp(4.0), 1.0, prime_cutoff=1000)
    q2 = predicted_mom(Family.EVEN_ORTHOGONAL, order, math.exp(8.0), 1.0, prime_cutoff=1000)
    assert q2 / q1 == pytest.approx(2.0 ** 5, rel=1e-9)


def test_predicted_mom_validation():
    with pytest.raises(ValueError):
        predicted_mom(Family.SYMPLECTIC, O11, 2.0, 1.0)
    with pytest.raises(ValueError):
        predicted_mom(Family.EVEN_ORTHOGONAL, O11, 100.0, 1.0)
