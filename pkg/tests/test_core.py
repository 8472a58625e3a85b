import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpmom.core import (
    ConfigurationVector,
    Family,
    GroupSpec,
    MomOrder,
    build_mu_assignment,
    combinatorial_coefficient,
    enumerate_configurations,
    leading_exponent,
    pairing_sets,
)


def test_group_spec_validation():
    with pytest.raises(ValueError):
        GroupSpec(Family.SYMPLECTIC, 0)
    assert GroupSpec(Family.SYMPLECTIC, 3).diagonal_pairs
    assert not GroupSpec(Family.EVEN_ORTHOGONAL, 3).diagonal_pairs


def test_mom_order_validation():
    with pytest.raises(ValueError):
        MomOrder(0, 1)
    with pytest.raises(ValueError):
        MomOrder(1, 0)
    assert MomOrder(2, 3).num_vars == 12


def test_configuration_bounds():
    order = MomOrder(2, 1)
    ConfigurationVector((0, 2)).validate(order)
    with pytest.raises(ValueError):
        ConfigurationVector((0, 3)).validate(order)
    with pytest.raises(ValueError):
        ConfigurationVector((1,)).validate(order)


def test_enumerate_configurations_count_and_order():
    order = MomOrder(2, 2)
    configs = enumerate_configurations(order)
    assert len(configs) == 5 ** 2
    assert configs[0].l == (0, 0)
    assert configs[-1].l == (4, 4)
    assert len(set(configs)) == len(configs)


def test_mu_assignment_block_layout():
    order = MomOrder(2, 1)
    mu = build_mu_assignment(order, ConfigurationVector((1, 2)))
    assert mu.slots == ((0, 1), (0, -1), (1, 1), (1, 1))
    assert mu.values((0.3, 0.7)) == [0.3, -0.3, 0.7, 0.7]
    assert len(mu) == order.num_vars


@given(
    k=st.integers(1, 3),
    beta=st.integers(1, 3),
    data=st.data(),
)
@settings(max_examples=40, deadline=None)
def test_combinatorial_coefficient_is_multinomial_count(k, beta, data):
    """c_l counts the sign words with l_m plus-entries in block m, summed over
    interleavings: equivalently the multinomial of slot multiplicities."""
    order = MomOrder(k, beta)
    l = ConfigurationVector(
        tuple(data.draw(st.integers(0, 2 * beta)) for _ in range(k))
    )
    counts = []
    for lm in l.l:
        counts.extend([lm, 2 * beta - lm])
    expected = math.factorial(order.num_vars)
    for c in counts:
        expected //= math.factorial(c)
    assert combinatorial_coefficient(order, l) == expected


def test_coefficient_sum_matches_brute_force_count():
    """Sum over l of c_l equals the number of sign assignments of the 2*k*beta
    variables to the 2k pole centres with exactly 2*beta variables per theta."""
    for k, beta in itertools.product((1, 2, 3), (1, 2, 3)):
        order = MomOrder(k, beta)
        total = sum(
            combinatorial_coefficient(order, l) for l in enumerate_configurations(order)
        )
        slots_per_theta = 2 * beta
        brute = math.factorial(order.num_vars)
        for _ in range(k):
            brute //= math.factorial(slots_per_theta)
        brute *= (2 ** slots_per_theta) ** k
        # each theta-block of size 2*beta splits freely into +/-, and the
        # blocks partition the variables
        assert total == brute


def test_leading_exponent_values():
    assert leading_exponent(Family.SYMPLECTIC, MomOrder(1, 1)) == 2
    assert leading_exponent(Family.SYMPLECTIC, MomOrder(1, 2)) == 9
    assert leading_exponent(Family.SYMPLECTIC, MomOrder(2, 1)) == 8
    assert leading_exponent(Family.EVEN_ORTHOGONAL, MomOrder(1, 1)) == 1
    assert leading_exponent(Family.EVEN_ORTHOGONAL, MomOrder(1, 2)) == 5
    assert leading_exponent(Family.EVEN_ORTHOGONAL, MomOrder(2, 1)) == 4
    assert leading_exponent(GroupSpec(Family.SYMPLECTIC, 5), MomOrder(1, 1)) == 2


def test_pairing_sets_partition_kernel_range():
    order = MomOrder(2, 1)
    theta = (0.3, 0.7)
    for spec in (GroupSpec(Family.SYMPLECTIC, 2), GroupSpec(Family.EVEN_ORTHOGONAL, 2)):
        for l in enumerate_configurations(order):
            mu = build_mu_assignment(order, l)
            ps = pairing_sets(spec, mu)
            vals = mu.values(theta)
            V = len(mu)
            kernel_pairs = {
                (m, n)
                for m in range(V)
                for n in range(m if spec.diagonal_pairs else m + 1, V)
            }
            assert ps.A | ps.T >= kernel_pairs - {(m, m) for m in range(V)}
            classified = set()
            for table in (ps.U_plus, ps.U_minus, ps.V_plus, ps.V_minus):
                for pairs in table.values():
                    classified |= set(pairs)
            assert classified == set(ps.T)
            for (m, n) in ps.A:
                assert vals[m] + vals[n] == pytest.approx(0.0)
            for (m, n) in ps.B:
                assert vals[m] == pytest.approx(vals[n])
            for (m, n) in ps.T:
                assert abs(vals[m] + vals[n]) > 1e-12


def test_pairing_sets_classified_lookup():
    order = MomOrder(1, 1)
    spec = GroupSpec(Family.SYMPLECTIC, 1)
    mu = build_mu_assignment(order, ConfigurationVector((1,)))
    ps = pairing_sets(spec, mu)
    # slots are (+theta_1, -theta_1): the off-diagonal pair is cancelled (A),
    # the two diagonal kernel pairs survive with mu-sums +/-2 theta_1
    assert ps.A == frozenset({(0, 1)})
    assert ps.T == frozenset({(0, 0), (1, 1)})
    assert ps.classified((0, 0)) == ("U+", (0, 0))
    assert ps.classified((1, 1)) == ("U-", (0, 0))
    with pytest.raises(KeyError):
        ps.classified((0, 1))
