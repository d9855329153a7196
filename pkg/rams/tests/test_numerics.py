import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from rams.numerics import (NumericsError, ConvergenceError, logdet2_capacity,
                           logdet2_capacity_batch, erf_inv,
                           integrate_to_infinity, hermitian_solve,
                           RandomStream, stream_id_for)


def random_cmatrix(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def eigen_capacity(h, scale):
    eig = np.linalg.eigvalsh(h @ h.conj().T)
    return float(np.sum(np.log2(1 + scale * np.clip(eig, 0, None))))


##-------------------------------------------------------------------------
## logdet2_capacity
##-------------------------------------------------------------------------
def test_logdet_zero_matrix():
    assert logdet2_capacity(np.zeros((5, 5)), 1.0) == 0.0


def test_logdet_identity():
    assert logdet2_capacity(np.eye(5), 1.0) == pytest.approx(5.0, abs=1e-12)


@pytest.mark.parametrize('shape', [(5, 5), (3, 8), (8, 3), (1, 1)])
def test_logdet_matches_eigen_oracle(shape):
    rng = np.random.default_rng(11)
    h = random_cmatrix(rng, *shape)
    assert logdet2_capacity(h, 0.7) == pytest.approx(eigen_capacity(h, 0.7),
                                                     rel=1e-10)


def test_logdet_batch_matches_single():
    rng = np.random.default_rng(3)
    stack = np.array([random_cmatrix(rng, 2, 3) for i in range(10)])
    batch = logdet2_capacity_batch(stack, 0.5)
    single = [logdet2_capacity(h, 0.5) for h in stack]
    np.testing.assert_allclose(batch, single, rtol=1e-12)


def test_logdet_rejects_bad_input():
    with pytest.raises(NumericsError):
        logdet2_capacity(np.eye(2), 0.0)
    with pytest.raises(NumericsError):
        logdet2_capacity(np.array([[1.0, np.nan]]), 1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1),
       m=st.integers(1, 6), n=st.integers(1, 6),
       scale=st.floats(1e-3, 1e3))
def test_logdet_nonnegative_and_increasing(seed, m, n, scale):
    h = random_cmatrix(np.random.default_rng(seed), m, n)
    low = logdet2_capacity(h, scale)
    assert low >= 0
    assert logdet2_capacity(h, 2 * scale) > low


def test_hermitian_solve():
    rng = np.random.default_rng(5)
    x = random_cmatrix(rng, 4, 4)
    a = np.eye(4) + x @ x.conj().T
    b = random_cmatrix(rng, 4, 2)
    np.testing.assert_allclose(a @ hermitian_solve(a, b), b, atol=1e-12)


##-------------------------------------------------------------------------
## erf_inv
##-------------------------------------------------------------------------
def test_erf_inv_zero():
    assert erf_inv(0.0) == 0.0


@pytest.mark.parametrize('x', [-0.999, -0.5, -1e-8, 0.1, 0.3, 0.7, 0.95])
def test_erf_inv_inverts_erf(x):
    assert special.erf(erf_inv(x)) == pytest.approx(x, rel=1e-14, abs=1e-16)


@pytest.mark.parametrize('tail', [1e-6, 1e-10, 1e-14])
def test_erf_inv_near_one(tail):
    x = 1 - tail
    v = erf_inv(x)
    # erfc keeps the relative accuracy of the tail that erf loses
    assert special.erfc(v) == pytest.approx(1 - x, rel=1e-6)
    assert erf_inv(-x) == pytest.approx(-v, rel=1e-12)


def test_erf_inv_array():
    x = np.linspace(-0.9, 0.9, 7)
    np.testing.assert_allclose(erf_inv(x), special.erfinv(x), rtol=1e-13)


@pytest.mark.parametrize('x', [1.0, -1.0, 1.5, np.nan])
def test_erf_inv_domain(x):
    with pytest.raises(NumericsError):
        erf_inv(x)


def test_only_erf_inv_is_exported():
    # erf and erfc are used straight from scipy.special
    import rams.numerics
    assert not hasattr(rams.numerics, 'erf')
    assert not hasattr(rams.numerics, 'erfc')


##-------------------------------------------------------------------------
## integrate_to_infinity
##-------------------------------------------------------------------------
def test_integrate_exponential():
    value, error = integrate_to_infinity(lambda x: np.exp(-x), 0.0)
    assert value == pytest.approx(1.0, abs=1e-8)
    assert error <= 1e-8


def test_integrate_normal_tail_with_points():
    value, error = integrate_to_infinity(stats.norm(loc=30).pdf, 0.0,
                                         points=[30.0])
    assert value == pytest.approx(1.0, abs=1e-8)


def test_integrate_non_decaying_raises():
    with pytest.raises(ConvergenceError):
        integrate_to_infinity(lambda x: 1.0, 0.0, max_doublings=20)


##-------------------------------------------------------------------------
## RandomStream
##-------------------------------------------------------------------------
def test_stream_is_reproducible():
    a = RandomStream(42, 7).normal(size=5)
    b = RandomStream(42, 7).normal(size=5)
    np.testing.assert_array_equal(a, b)


def test_streams_differ_by_state_and_trial():
    a = RandomStream.for_state(42, 0, 0).normal(size=5)
    b = RandomStream.for_state(42, 0, 1).normal(size=5)
    c = RandomStream.for_state(42, 1, 0).normal(size=5)
    assert not np.allclose(a, b)
    assert not np.allclose(a, c)


def test_stream_does_not_depend_on_creation_order():
    late = RandomStream.for_state(1, 3, 2)
    for state in range(5):
        RandomStream.for_state(1, 3, state).uniform(0, 1, size=10)
    early = RandomStream.for_state(1, 3, 2)
    np.testing.assert_array_equal(late.uniform(0, 1, 4),
                                  early.uniform(0, 1, 4))


def test_complex_normal_variance():
    z = RandomStream(0).complex_normal(size=200000, variance=0.25)
    assert np.mean(np.abs(z)**2) == pytest.approx(0.25, rel=0.02)
    assert abs(np.mean(z)) < 0.01
    assert np.var(z.real) == pytest.approx(np.var(z.imag), rel=0.03)


def test_stream_id_packing():
    assert stream_id_for(1, 2) == 2**32 + 2
    with pytest.raises(NumericsError):
        stream_id_for(-1, 0)
    with pytest.raises(NumericsError):
        stream_id_for(0, 2**32)
