import math
import os
import subprocess
import sys

import numpy as np
import pytest

from cpmom import _kernels
from cpmom.core import Family, GroupSpec, MomOrder
from cpmom.montecarlo import (
    MomEstimate,
    abs_charpoly_sq,
    inner_moment,
    inner_moment_batch,
    min_inner_grid,
    mom_estimate,
)

SP1 = GroupSpec(Family.SYMPLECTIC, 1)
SP2 = GroupSpec(Family.SYMPLECTIC, 2)
SO2 = GroupSpec(Family.EVEN_ORTHOGONAL, 2)


def test_abs_charpoly_sq_matches_eigenvalue_product():
    angles = np.array([0.4, 1.9])
    theta = 0.77
    lams = np.concatenate([np.exp(1j * angles), np.exp(-1j * angles)])
    expected = np.prod(np.abs(np.exp(1j * theta) - lams) ** 2)
    assert abs_charpoly_sq(angles, theta) == pytest.approx(expected, rel=1e-12)


def test_inner_moment_equals_coefficient_power_sum():
    """For beta = 1 the theta-average of |P|^2 is the sum of squared absolute
    characteristic polynomial coefficients (Parseval)."""
    rng = np.random.default_rng(5)
    angles = rng.uniform(0.1, 3.0, size=3)
    lams = np.concatenate([np.exp(1j * angles), np.exp(-1j * angles)])
    coeffs = np.poly(lams)
    expected = float(np.sum(np.abs(coeffs) ** 2))
    assert inner_moment(angles, beta=1) == pytest.approx(expected, rel=1e-10)


def test_inner_moment_grid_exactness():
    """The integrand is a trig polynomial of degree 2 N beta, so any grid at
    or above the minimum gives the same answer."""
    rng = np.random.default_rng(6)
    angles = rng.uniform(0.1, 3.0, size=2)
    base = min_inner_grid(2, 2)
    a = inner_moment(angles, beta=2, theta_grid_size=base)
    b = inner_moment(angles, beta=2, theta_grid_size=base + 17)
    assert a == pytest.approx(b, rel=1e-12)


def test_inner_moment_rejects_small_grid():
    with pytest.raises(ValueError):
        inner_moment(np.array([0.5, 1.0]), beta=1, theta_grid_size=3)
    with pytest.raises(ValueError):
        inner_moment_batch(np.array([[0.5, 1.0]]), 1, 3)


def test_backend_implementations_agree():
    rng = np.random.default_rng(7)
    phis = rng.uniform(0.05, 3.1, size=(20, 3))
    a = _kernels.inner_moments_numpy(phis, 2, 30)
    b = _kernels.inner_moments(phis, 2, 30)
    np.testing.assert_allclose(a, b, rtol=1e-10)
    if _kernels.inner_moments_numba is not None:
        c = _kernels.inner_moments_numba(phis, 2, 30)
        np.testing.assert_allclose(a, c, rtol=1e-10)


def test_backend_env_selection():
    code = "import cpmom._kernels as k; print(k.BACKEND)"
    env = dict(os.environ, CPMOM_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert out.stdout.strip() == "numpy"
    env["CPMOM_BACKEND"] = "nonsense"
    bad = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert bad.returncode != 0


def test_mom_estimate_reproducible_and_positive():
    order = MomOrder(1, 1)
    a = mom_estimate(SP2, order, num_samples=500, seed=42)
    b = mom_estimate(SP2, order, num_samples=500, seed=42)
    assert a.mean == b.mean and a.std_error == b.std_error
    assert a.mean > 0 and a.std_error > 0
    c = mom_estimate(SP2, order, num_samples=500, seed=43)
    assert c.mean != a.mean


def test_mom_estimate_worker_split_consistency():
    """Different worker counts reorder the stream split; results stay within
    combined statistical error of each other."""
    order = MomOrder(1, 1)
    a = mom_estimate(SP1, order, num_samples=4000, seed=9, num_workers=1)
    b = mom_estimate(SP1, order, num_samples=4000, seed=9, num_workers=4)
    assert abs(a.mean - b.mean) < 5 * math.hypot(a.std_error, b.std_error)


def test_mom_estimate_antithetic_unbiased():
    order = MomOrder(1, 1)
    plain = mom_estimate(SO2, order, num_samples=8000, seed=3)
    anti = mom_estimate(SO2, order, num_samples=8000, seed=3, antithetic=True)
    assert abs(plain.mean - anti.mean) < 5 * math.hypot(
        plain.std_error, anti.std_error
    )


def test_mom_estimate_validation():
    with pytest.raises(ValueError):
        mom_estimate(SP1, MomOrder(1, 1), num_samples=1, seed=0)
    with pytest.raises(ValueError):
        MomEstimate(mean=-1.0, std_error=0.1, num_samples=10, config_digest="x")
