"""Backend equivalence and adjointness of the stencil kernels."""

import numpy as np
import pytest

from boundcue.kernels import _numpy_impl
from boundcue.gsm import GsmParams

try:
    from boundcue.kernels import _numba_impl

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

FORWARD_OPS = ["grad_x", "grad_y", "second_x", "second_y"]
ADJOINT_OPS = ["grad_x_adj", "grad_y_adj", "second_x_adj", "second_y_adj"]


def _random_case(rng, size=12):
    z = rng.standard_normal((size, size))
    mask = rng.random((size, size)) < 0.8
    return np.ascontiguousarray(z), np.ascontiguousarray(mask)


@pytest.mark.parametrize("name", FORWARD_OPS + ADJOINT_OPS)
def test_backends_agree(name):
    if not HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(7)
    for _ in range(10):
        z, mask = _random_case(rng)
        a = getattr(_numpy_impl, name)(z, mask)
        b = getattr(_numba_impl, name)(z, mask)
        assert np.allclose(a, b, atol=1e-14)


def test_pair_energy_backends_agree():
    if not HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(3)
    g = GsmParams()
    for _ in range(5):
        h, active = _random_case(rng, size=10)
        va, ga = _numpy_impl.pair_energy_5x5(h, active, g.a_log, g.inv2s2, g.invs2)
        vb, gb = _numba_impl.pair_energy_5x5(h, active, g.a_log, g.inv2s2, g.invs2)
        assert np.allclose(va, vb, atol=1e-12)
        assert np.allclose(ga, gb, atol=1e-12)


@pytest.mark.parametrize(
    "fwd,adj",
    list(zip(FORWARD_OPS, ADJOINT_OPS)),
)
def test_adjoint_identity(fwd, adj):
    # <A z, c> == <z, A^T c> for every operator, the exactness the energy
    # gradients rely on
    rng = np.random.default_rng(11)
    for _ in range(20):
        z, mask = _random_case(rng, size=int(rng.integers(5, 15)))
        c = rng.standard_normal(z.shape)
        az = getattr(_numpy_impl, fwd)(z, mask)
        atc = getattr(_numpy_impl, adj)(c, mask)
        lhs = np.sum(az * c)
        rhs = np.sum(z * atc)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_grad_x_cases():
    # central inside, one-sided at mask borders, zero when isolated
    z = np.arange(9, dtype=np.float64).reshape(3, 3)
    mask = np.ones((3, 3), dtype=bool)
    gx = _numpy_impl.grad_x(z, mask)
    assert np.allclose(gx, 1.0)
    mask[1, 0] = False
    gx = _numpy_impl.grad_x(z, mask)
    assert gx[1, 1] == 1.0  # one-sided right
    lone = np.zeros((3, 3), dtype=bool)
    lone[1, 1] = True
    assert np.all(_numpy_impl.grad_x(z, lone) == 0.0)
