import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpmom.core import ConfigurationVector, MomOrder, build_mu_assignment
from cpmom.series import (
    MultiSeries,
    add,
    invert_unit,
    kernel_pole_expansion,
    mul,
    rmt_kernel,
    scale,
    taylor_coefficient,
    vandermonde_factored,
    zeta_em,
    zeta_kernel,
)

coeff_st = st.integers(-4, 4)


def _random_series(data, num_vars, cap, n_terms=4):
    coeffs = {}
    for _ in range(n_terms):
        idx = tuple(data.draw(st.integers(0, cap)) for _ in range(num_vars))
        coeffs[idx] = complex(data.draw(coeff_st))
    return MultiSeries(num_vars, cap, coeffs)


def test_constant_and_variable():
    c = MultiSeries.constant(2, 3, 5.0)
    assert taylor_coefficient(c, (0, 0)) == 5.0
    v = MultiSeries.variable(2, 3, 1, coeff=2.0)
    assert taylor_coefficient(v, (0, 1)) == 2.0
    assert taylor_coefficient(v, (1, 0)) == 0.0


def test_mul_truncates_at_cap():
    x = MultiSeries.variable(1, 2, 0)
    x3 = mul(mul(x, x), x)
    assert all(v == 0 for v in x3.coeffs.values()) or not x3.coeffs


@given(data=st.data())
@settings(max_examples=30, deadline=None)
def test_ring_axioms(data):
    a = _random_series(data, 2, 3)
    b = _random_series(data, 2, 3)
    c = _random_series(data, 2, 3)
    assert add(a, b) == add(b, a)
    assert mul(a, b) == mul(b, a)
    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))


@given(data=st.data())
@settings(max_examples=20, deadline=None)
def test_invert_unit_roundtrip(data):
    a = _random_series(data, 2, 3)
    one = MultiSeries.constant(2, 3, 1.0)
    u = add(one, mul(MultiSeries.variable(2, 3, 0), a))
    prod = mul(u, invert_unit(u))
    assert prod == one


def test_invert_requires_unit():
    x = MultiSeries.variable(1, 3, 0)
    with pytest.raises(ZeroDivisionError):
        invert_unit(x)


def test_scale():
    a = MultiSeries.variable(1, 2, 0)
    assert taylor_coefficient(scale(a, 3.0), (1,)) == 3.0


def test_rmt_kernel_laurent_data():
    k = rmt_kernel(max_order=10)
    # s*K(s) = s/(1-e^{-s}) = 1 + s/2 + s^2/12 - s^4/720 + ...
    g = k.analytic_part_coefficients(4)
    assert g[0] == pytest.approx(1.0)
    assert g[1] == pytest.approx(0.5)
    assert g[2] == pytest.approx(1.0 / 12.0)
    assert abs(g[3]) < 1e-14
    assert g[4] == pytest.approx(-1.0 / 720.0)


def test_rmt_kernel_evaluator_matches_series():
    k = rmt_kernel(max_order=30)
    s = 0.1 + 0.05j
    series_val = sum(
        c * s ** (j + 1) for j, c in enumerate(k.taylor_coefficients[:25])
    )
    series_val += k.laurent_tail
    assert complex(k.evaluator(s)) * s == pytest.approx(series_val, rel=1e-12)


def test_rmt_kernel_evaluator_preserves_extended_dtype():
    k = rmt_kernel()
    s = np.array([0.25 + 0.1j], dtype=np.clongdouble)
    assert k.evaluator(s).dtype == np.clongdouble


def test_zeta_em_against_known_values():
    assert complex(zeta_em(2.0 + 0j)) == pytest.approx(math.pi ** 2 / 6, rel=1e-12)
    assert complex(zeta_em(4.0 + 0j)) == pytest.approx(math.pi ** 4 / 90, rel=1e-12)
    # zeta(3) reference value
    assert complex(zeta_em(3.0 + 0j)) == pytest.approx(1.2020569031595943, rel=1e-12)


def test_zeta_kernel_laurent_data():
    k = zeta_kernel(max_order=6)
    assert k.laurent_tail == pytest.approx(1.0)
    # Laurent expansion of zeta(1+s): 1/s + euler_gamma - gamma_1 s + ...
    assert k.taylor_coefficients[0] == pytest.approx(0.5772156649015329, rel=1e-10)
    assert k.taylor_coefficients[1] == pytest.approx(0.0728158454836767, rel=1e-8)


def test_kernel_pole_expansion_matches_direct_values():
    kernel = rmt_kernel()
    cap = 6
    g = kernel_pole_expansion(kernel, [0, 1], 2, cap)
    # evaluate the 2-variable series at a small point and compare with
    # (z1+z2)*K(z1+z2)
    z = (0.03, -0.02 + 0.01j)
    total = 0.0
    for idx, c in g.coeffs.items():
        total += c * z[0] ** idx[0] * z[1] ** idx[1]
    s = z[0] + z[1]
    assert total == pytest.approx(s * complex(kernel.evaluator(s)), rel=1e-10)


def test_vandermonde_factored_counts_and_tags():
    order = MomOrder(1, 2)
    mu = build_mu_assignment(order, ConfigurationVector((2,)))
    factors = vandermonde_factored(mu)
    V = order.num_vars
    assert len(factors) == 2 * (V * (V - 1) // 2)
    # slots: (+,+,-,-): sums vanish exactly for the 4 mixed pairs, diffs for
    # the 2 same-sign pairs
    vanishing_sums = {f.pair for f in factors if f.kind == "sum" and f.vanishing}
    vanishing_diffs = {f.pair for f in factors if f.kind == "diff" and f.vanishing}
    assert vanishing_sums == {(0, 2), (0, 3), (1, 2), (1, 3)}
    assert vanishing_diffs == {(0, 1), (2, 3)}
