"""Backend parity: the numba kernels and the numpy fallback must agree
bit for bit, so seeds mean the same thing regardless of environment."""

import numpy as np
import pytest

from bosonsim._kernels import (
    ENV_DISABLE_NUMBA,
    active_kernels,
    numba_available,
    numba_disabled_by_env,
    numpy_kernels,
)
from bosonsim.combinat import collision_free_array
from bosonsim.unitaries import haar_unitary

needs_numba = pytest.mark.skipif(not numba_available(), reason="numba not importable")


@pytest.fixture(scope="module")
def both_kernels():
    from bosonsim._kernels import numba_kernels

    return numpy_kernels(), numba_kernels()


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 11])
def test_permanent_bitwise_equal(both_kernels, n):
    knp, knb = both_kernels
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert knp.permanent(a) == knb.permanent(a)


@needs_numba
def test_outcome_permanents_bitwise_equal(both_kernels):
    knp, knb = both_kernels
    u = haar_unitary(9, seed=21).matrix
    ucols = np.ascontiguousarray(u[:, (0, 3, 5)])
    outcomes = collision_free_array(9, 3)
    a = knp.outcome_permanents(ucols, outcomes)
    b = knb.outcome_permanents(ucols, outcomes)
    assert np.array_equal(a, b)


@needs_numba
def test_clifford_streams_bitwise_equal(both_kernels):
    knp, knb = both_kernels
    u = haar_unitary(7, seed=13).matrix
    bmat = np.ascontiguousarray(u[:, (0, 2, 4)].T)
    a = knp.clifford_samples(bmat, 1500, 987654321)
    b = knb.clifford_samples(bmat, 1500, 987654321)
    assert np.array_equal(a, b)


def test_env_flag_detection(monkeypatch):
    monkeypatch.delenv(ENV_DISABLE_NUMBA, raising=False)
    assert not numba_disabled_by_env()
    monkeypatch.setenv(ENV_DISABLE_NUMBA, "1")
    assert numba_disabled_by_env()
    monkeypatch.setenv(ENV_DISABLE_NUMBA, "true")
    assert numba_disabled_by_env()
    monkeypatch.setenv(ENV_DISABLE_NUMBA, "0")
    assert not numba_disabled_by_env()


def test_active_kernels_resolves():
    kern = active_kernels()
    assert kern.backend in ("numba", "numpy")
    assert kern.permanent(np.eye(2, dtype=complex)) == 1.0 + 0.0j


def test_numpy_fallback_zero_mass_raises():
    knp = numpy_kernels()
    bmat = np.zeros((2, 3), dtype=np.complex128)
    with pytest.raises(ValueError, match="sum to zero"):
        knp.clifford_samples(bmat, 1, 0)
