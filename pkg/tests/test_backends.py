"""Compiled core vs NumPy reference: identical semantics on random states."""

import numpy as np
import pytest

from qpack.backends import get_backend, reference

try:
    compiled, _ = get_backend("compiled")
    HAVE_COMPILED = True
except ImportError:
    compiled = None
    HAVE_COMPILED = False

pytestmark = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled extension not built"
)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    state = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    state /= np.linalg.norm(state)
    return state.astype(np.complex128)


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_apply_phase(n):
    diag = np.random.default_rng(n).normal(size=1 << n)
    a = random_state(n, n)
    b = a.copy()
    compiled.apply_phase(a, diag, 0.37)
    reference.apply_phase(b, diag, 0.37)
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_apply_phase_table(n):
    rng = np.random.default_rng(n + 100)
    uniq = rng.normal(size=7)
    codes = rng.integers(0, 7, size=1 << n).astype(np.int32)
    table = np.exp(-1j * 0.4 * uniq)
    a = random_state(n, n + 1)
    b = a.copy()
    compiled.apply_phase_table(a, codes, table)
    reference.apply_phase_table(b, codes, table)
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 6, 10])
def test_apply_rx_all(n):
    a = random_state(n, n + 7)
    b = a.copy()
    compiled.apply_rx_all(a, n, 0.81)
    reference.apply_rx_all(b, n, 0.81)
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("n,q", [(1, 0), (4, 0), (4, 3), (7, 5)])
def test_apply_1q(n, q):
    rng = np.random.default_rng(q)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u, _ = np.linalg.qr(z)
    u = np.ascontiguousarray(u)
    a = random_state(n, n + q)
    b = a.copy()
    compiled.apply_1q(a, n, q, u)
    reference.apply_1q(b, n, q, u)
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("n,q1,q2", [(2, 0, 1), (5, 0, 4), (6, 2, 3), (6, 5, 1)])
def test_apply_cz(n, q1, q2):
    a = random_state(n, n + q1 + q2)
    b = a.copy()
    compiled.apply_cz(a, n, q1, q2)
    reference.apply_cz(b, n, q1, q2)
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("n,q", [(1, 0), (3, 1), (8, 7)])
def test_prob_one(n, q):
    state = random_state(n, 13 * n + q)
    pc = compiled.prob_one(state, n, q)
    pr = reference.prob_one(state, n, q)
    assert pc == pytest.approx(pr, abs=1e-14)
    # independent check against a direct mask sum
    idx = np.arange(1 << n)
    direct = float(np.sum(np.abs(state[(idx >> q) & 1 == 1]) ** 2))
    assert pc == pytest.approx(direct, abs=1e-12)


def test_unitarity_preserved_many_ops():
    n = 6
    state = random_state(n, 99)
    rng = np.random.default_rng(1)
    for _ in range(50):
        q = int(rng.integers(n))
        compiled.apply_rx_all(state, n, float(rng.normal()))
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        u, _ = np.linalg.qr(z)
        compiled.apply_1q(state, n, q, np.ascontiguousarray(u))
    assert np.linalg.norm(state) == pytest.approx(1.0, abs=1e-10)
