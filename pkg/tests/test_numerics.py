import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beamcomb import _kernels
from beamcomb._accel import python_impl
from beamcomb.errors import DimensionError, InputError, NoRootError
from beamcomb.numerics import (SecularProblem, fix_phase, herm_eig, solve_secular,
                               solve_secular_shifted)

from conftest import random_hermitian, random_psd


def test_identity_eigenvectors_are_identity():
    e = herm_eig(np.eye(3))
    np.testing.assert_allclose(e.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(e.eigenvectors, np.eye(3))


def test_diagonal_order():
    e = herm_eig(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(e.eigenvalues, [2.0, 1.0])


def test_reconstruction_8x8(rng):
    A = random_psd(rng, 8)
    e = herm_eig(A)
    V = e.eigenvectors
    assert np.linalg.norm((V * e.eigenvalues) @ V.conj().T - A) <= 1e-9 * np.linalg.norm(A)


@pytest.mark.parametrize("n", [1, 2, 5, 12, 30])
def test_matches_numpy_eigh(rng, n):
    A = random_hermitian(rng, n)
    e = herm_eig(A)
    ref = np.linalg.eigvalsh(A)[::-1]
    np.testing.assert_allclose(e.eigenvalues, ref, atol=1e-10 * np.linalg.norm(A))
    V = e.eigenvectors
    np.testing.assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-10)
    for i in range(n):
        r = A @ V[:, i] - e.eigenvalues[i] * V[:, i]
        assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(A)


def test_phase_convention_and_determinism(rng):
    A = random_hermitian(rng, 6)
    a, b = herm_eig(A), herm_eig(A.copy())
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)
    V = a.eigenvectors
    for i in range(6):
        k = np.flatnonzero(np.abs(V[:, i]) > 1e-12)[0]
        assert V[k, i].imag == 0 and V[k, i].real > 0


def test_fix_phase_handles_zero_column():
    V = np.array([[0, 1j], [0, 0]], dtype=complex)
    out = fix_phase(V)
    np.testing.assert_array_equal(out[:, 0], 0)
    assert out[0, 1] == 1


def test_eig_rejects_bad_input():
    with pytest.raises(DimensionError):
        herm_eig(np.ones((2, 3)))
    with pytest.raises(InputError):
        herm_eig(np.array([[np.nan, 0], [0, 1]]))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 9), seed=st.integers(0, 2**32 - 1))
def test_eig_trace_and_psd_properties(n, seed):
    r = np.random.default_rng(seed)
    A = random_psd(r, n, rank=int(r.integers(1, n + 1)))
    e = herm_eig(A)
    tr = np.trace(A).real
    assert abs(e.eigenvalues.sum() - tr) <= 1e-9 * abs(tr)
    assert e.eigenvalues.min() >= -1e-10 * np.linalg.norm(A)
    assert np.all(np.diff(e.eigenvalues) <= 0)


def test_secular_analytic_edge_root():
    assert solve_secular(SecularProblem([0.0], [1.0], 1.0, 0.0)) == pytest.approx(1.0, abs=1e-12)


def test_secular_zero_weights():
    assert solve_secular(SecularProblem([1.0, 0.0], [0.0, 0.0], 1.0, 2.0)) == pytest.approx(2.0, abs=1e-12)


def _bisect(prob, lo, hi, iters=400):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if prob.f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_secular_matches_bisection_oracle(rng):
    for _ in range(50):
        poles = rng.normal(size=5) * 2
        prob = SecularProblem(poles, rng.uniform(0.1, 2, 5), rng.uniform(0.5, 3), rng.uniform(0, 3))
        lam = solve_secular(prob)
        ref = _bisect(prob, np.nextafter(prob.poles[0], np.inf), prob.upper_bound() * 2 + 1)
        assert abs(lam - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_secular_monotone_bracket_and_interval(n, seed):
    r = np.random.default_rng(seed)
    prob = SecularProblem(r.normal(size=n) * 3, r.exponential(size=n) + 1e-3,
                          r.uniform(0.2, 5), r.exponential() * 2)
    lam1, mu = solve_secular_shifted(prob)
    lam = lam1 + mu
    assert mu > 0
    assert lam <= prob.upper_bound() * (1 + 1e-12) + 1e-12
    assert abs(prob.f_shifted(mu)) <= 1e-10 * max(1.0, prob.d * lam)
    delta = 1e-6 * (1 + lam)
    if lam - delta > lam1:
        assert prob.f(lam - delta) < 0 < prob.f(lam + delta)


def test_secular_no_root():
    # all weight on a lower pole and a large d*lam1 - r: f > 0 right above lam1
    with pytest.raises(NoRootError):
        solve_secular(SecularProblem([5.0, 0.0], [0.0, 1e-3], 1.0, 0.0))


def test_secular_problem_validation():
    with pytest.raises(DimensionError):
        SecularProblem([1.0, 2.0], [1.0], 1.0, 0.0)
    with pytest.raises(InputError):
        SecularProblem([1.0], [1.0], 0.0, 0.0)
    with pytest.raises(InputError):
        SecularProblem([1.0], [-1.0], 1.0, 0.0)
    p = SecularProblem([0.0, 3.0], [1.0, 2.0], 1.0, 0.0)
    np.testing.assert_array_equal(p.poles, [3.0, 0.0])
    np.testing.assert_array_equal(p.weights, [2.0, 1.0])


def test_python_fallback_matches_jitted_kernels(rng):
    A = random_hermitian(rng, 6)
    w1, v1, _ = _kernels.jacobi_hermitian(A.copy(), 1e-12, 100)
    w2, v2, _ = python_impl(_kernels.jacobi_hermitian)(A.copy(), 1e-12, 100)
    np.testing.assert_allclose(np.sort(w1), np.sort(w2), atol=1e-12)
    gaps = np.array([0.0, 0.7, 2.0])
    weights = np.array([0.5, 0.2, 0.1])
    a = _kernels.secular_root(1.0, gaps, weights, 2.0, 1.0, 1e-12, 10.0)
    b = python_impl(_kernels.secular_root)(1.0, gaps, weights, 2.0, 1.0, 1e-12, 10.0)
    assert a[1] == b[1] == _kernels.SECULAR_OK
    assert a[0] == pytest.approx(b[0], rel=1e-12)
