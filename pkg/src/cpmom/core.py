"""Parameters, residue-configuration combinatorics and index-set algebra.

The residue computations downstream decompose a multiple contour integral
into a sum over "configurations": each of the ``2*k*beta`` integration
variables is assigned to one of the ``2k`` pole centres ``+theta_m`` or
``-theta_m``.  A configuration is recorded by the vector ``l`` whose entry
``l_m`` counts how many variables sit at ``+theta_m``.  Everything here is
purely symbolic/combinatorial; no angles are evaluated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator


class NumericFailure(RuntimeError):
    """A numeric sanity check (realness, convergence) failed."""


class Family(Enum):
    SYMPLECTIC = "sp"
    EVEN_ORTHOGONAL = "so"


@dataclass(frozen=True)
class GroupSpec:
    """One of the compact matrix groups Sp(2N) or SO(2N); ``half_dim`` is N."""

    family: Family
    half_dim: int

    def __post_init__(self):
        if self.half_dim < 1:
            raise ValueError("half_dim must be >= 1")

    @property
    def diagonal_pairs(self) -> bool:
        # kernel product runs over m <= n for Sp, m < n for SO
        return self.family is Family.SYMPLECTIC


@dataclass(frozen=True)
class MomOrder:
    k: int
    beta: int

    def __post_init__(self):
        if self.k < 1 or self.beta < 1:
            raise ValueError("k and beta must be positive integers")

    @property
    def num_vars(self) -> int:
        return 2 * self.k * self.beta

    def is_so_special_case(self, family: Family) -> bool:
        return family is Family.EVEN_ORTHOGONAL and self.k == 1 and self.beta == 1


@dataclass(frozen=True)
class ConfigurationVector:
    l: tuple

    def __post_init__(self):
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))

    def validate(self, order: MomOrder) -> None:
        if len(self.l) != order.k:
            raise ValueError("configuration vector must have length k")
        for lm in self.l:
            if not 0 <= lm <= 2 * order.beta:
                raise ValueError(
                    "configuration entries must lie in [0, 2*beta], got %r" % (self.l,)
                )


@dataclass(frozen=True)
class MuAssignment:
    """Block layout of the 2*k*beta slot labels.

    ``slots[n] = (m, sign)`` means the n-th variable sits at ``sign*theta_m``
    (0-based ``m``).  The layout is block-wise: ``l_1`` plus-slots for
    ``theta_1``, then ``2*beta - l_1`` minus-slots, then the ``theta_2``
    block, and so on.
    """

    order: MomOrder
    l: ConfigurationVector
    slots: tuple = field(init=False)

    def __post_init__(self):
        self.l.validate(self.order)
        slots = []
        for m, lm in enumerate(self.l.l):
            slots.extend([(m, +1)] * lm)
            slots.extend([(m, -1)] * (2 * self.order.beta - lm))
        object.__setattr__(self, "slots", tuple(slots))

    def __len__(self) -> int:
        return len(self.slots)

    def values(self, theta) -> list:
        """Numeric mu_n for a concrete shift vector theta (sequence of k reals)."""
        return [sign * theta[m] for (m, sign) in self.slots]


@dataclass(frozen=True)
class PairingSets:
    """Index-pair bookkeeping for one configuration.

    ``A``: pairs (m, n), m < n, with mu_m + mu_n = 0 (cancelled kernel poles).
    ``B``: pairs (m, n), m < n, with mu_m - mu_n = 0 (vanishing Vandermonde
    differences).  ``T``: kernel-range pairs (diagonal included only for the
    symplectic family) whose mu-sum does not vanish, partitioned into the
    ``U``/``V`` subsets keyed by (sigma, tau) with sigma <= tau.
    """

    A: frozenset
    B: frozenset
    T: frozenset
    U_plus: dict
    U_minus: dict
    V_plus: dict
    V_minus: dict

    def classified(self, pair):
        """Return ('U+'|'U-'|'V+'|'V-', (sigma, tau)) for a pair in T."""
        for name, table in (
            ("U+", self.U_plus),
            ("U-", self.U_minus),
            ("V+", self.V_plus),
            ("V-", self.V_minus),
        ):
            for key, pairs in table.items():
                if pair in pairs:
                    return name, key
        raise KeyError(pair)


def build_mu_assignment(order: MomOrder, l: ConfigurationVector) -> MuAssignment:
    return MuAssignment(order, l)


def combinatorial_coefficient(order: MomOrder, l: ConfigurationVector) -> int:
    """Number of distinct permutations of the block-form contour assignment.

    Product of binomials: at step m, choose which of the remaining slots carry
    ``+theta_m`` and which carry ``-theta_m``.  Exact integer arithmetic.
    """
    l.validate(order)
    two_beta = 2 * order.beta
    remaining = order.num_vars
    coeff = 1
    for lm in l.l:
        coeff *= math.comb(remaining, lm) * math.comb(remaining - lm, two_beta - lm)
        remaining -= two_beta
    return coeff


def enumerate_configurations(order: MomOrder) -> list:
    """All (2*beta + 1)**k configuration vectors, lexicographic."""
    rng = range(2 * order.beta + 1)
    return [ConfigurationVector(t) for t in itertools.product(rng, repeat=order.k)]


def leading_exponent(spec_or_family, order: MomOrder) -> int:
    """Degree of MoM as a polynomial in N for the given family and (k, beta)."""
    family = spec_or_family.family if isinstance(spec_or_family, GroupSpec) else spec_or_family
    k, beta = order.k, order.beta
    if family is Family.SYMPLECTIC:
        return k * beta * (2 * k * beta + 1) - k
    if order.is_so_special_case(family):
        # MoM_{SO(2N)}(1,1) = 2(N+1) is linear, not the generic degree-0 formula
        return 1
    return k * beta * (2 * k * beta - 1) - k


def _kernel_pairs(diagonal: bool, num_vars: int) -> Iterator:
    for m in range(num_vars):
        start = m if diagonal else m + 1
        for n in range(start, num_vars):
            yield (m, n)


def pairing_sets(spec: GroupSpec, mu: MuAssignment) -> PairingSets:
    slots = mu.slots
    V = len(slots)
    k = mu.order.k

    A, B = set(), set()
    for m in range(V):
        for n in range(m + 1, V):
            (im, sm), (in_, sn) = slots[m], slots[n]
            if im == in_ and sm == -sn:
                A.add((m, n))
            elif im == in_ and sm == sn:
                B.add((m, n))

    T = set()
    U_plus = {key: set() for key in _upper_keys(k)}
    U_minus = {key: set() for key in _upper_keys(k)}
    V_plus = {key: set() for key in _upper_keys(k)}
    V_minus = {key: set() for key in _upper_keys(k)}
    for (m, n) in _kernel_pairs(spec.diagonal_pairs, V):
        if (m, n) in A:
            continue
        T.add((m, n))
        (im, sm), (in_, sn) = slots[m], slots[n]
        sigma, tau = min(im, in_), max(im, in_)
        if sm == +1 and sn == +1:
            U_plus[(sigma, tau)].add((m, n))
        elif sm == -1 and sn == -1:
            U_minus[(sigma, tau)].add((m, n))
        elif sm == +1:
            # slots are block-ordered, so im < in_ here and the mu-sum is
            # theta_sigma - theta_tau
            V_plus[(sigma, tau)].add((m, n))
        else:
            V_minus[(sigma, tau)].add((m, n))

    freeze = lambda table: {key: frozenset(v) for key, v in table.items()}
    return PairingSets(
        A=frozenset(A),
        B=frozenset(B),
        T=frozenset(T),
        U_plus=freeze(U_plus),
        U_minus=freeze(U_minus),
        V_plus=freeze(V_plus),
        V_minus=freeze(V_minus),
    )


def _upper_keys(k: int):
    return [(s, t) for s in range(k) for t in range(s, k)]
