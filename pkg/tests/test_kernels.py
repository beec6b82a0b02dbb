"""Cross-checks between the compiled kernels and the NumPy fallback."""

import numpy as np
import pytest

from fckan import kernels
from fckan.basis import BasisKind, grid_spec

compiled_missing = "compiled" not in kernels.available_backends()
needs_compiled = pytest.mark.skipif(
    compiled_missing, reason="compiled kernel extension not built"
)

UNARY = ("relu", "sin", "cos", "arctan", "tan", "tanh", "dog", "silu")


@pytest.fixture(scope="module")
def backends():
    return kernels.load_backend("python"), kernels.load_backend("compiled")


@needs_compiled
@pytest.mark.parametrize("name", UNARY)
def test_unary_backends_agree(backends, name):
    py, cy = backends
    x = np.random.default_rng(0).uniform(-1.5, 1.5, 10_000).astype(np.float32)
    np.testing.assert_allclose(
        py.unary_values(name, x), cy.unary_values(name, x), rtol=1e-5, atol=1e-6
    )
    np.testing.assert_allclose(
        py.unary_derivs(name, x), cy.unary_derivs(name, x), rtol=1e-5, atol=1e-6
    )


@needs_compiled
def test_bspline_backends_agree(backends):
    py, cy = backends
    kind = BasisKind.bspline(5, 3, -1.0, 1.0)
    knots = grid_spec(kind).centers
    # include out-of-range points; support vanishes identically off-grid
    x = np.random.default_rng(1).uniform(-3, 3, 5_000)
    np.testing.assert_allclose(
        py.bspline_values(x, knots, 3), cy.bspline_values(x, knots, 3), rtol=1e-12
    )
    np.testing.assert_allclose(
        py.bspline_derivs(x, knots, 3), cy.bspline_derivs(x, knots, 3), rtol=1e-12
    )


@needs_compiled
def test_rbf_backends_agree(backends):
    py, cy = backends
    kind = BasisKind.rbf(8, -2.0, 2.0)
    spec = grid_spec(kind)
    x = np.random.default_rng(2).uniform(-4, 4, 5_000)
    np.testing.assert_allclose(
        py.rbf_values(x, spec.centers, spec.bandwidth),
        cy.rbf_values(x, spec.centers, spec.bandwidth),
        rtol=1e-12,
    )
    np.testing.assert_allclose(
        py.rbf_derivs(x, spec.centers, spec.bandwidth),
        cy.rbf_derivs(x, spec.centers, spec.bandwidth),
        rtol=1e-12,
    )


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_unknown_unary_kind_raises(backend):
    if backend == "compiled" and compiled_missing:
        pytest.skip("compiled kernel extension not built")
    impl = kernels.load_backend(backend)
    x = np.zeros(3, dtype=np.float32)
    with pytest.raises(ValueError, match="sigmoid"):
        impl.unary_values("sigmoid", x)
    with pytest.raises(ValueError, match="sigmoid"):
        impl.unary_derivs("sigmoid", x)


def test_active_backend_is_exposed():
    assert kernels.backend() in ("compiled", "python")
    assert kernels.backend() == kernels.BACKEND
    with pytest.raises(ValueError):
        kernels.load_backend("fortran")
