"""NumPy fallback kernels.

Same surface as the compiled extension (``fckan._kernels_cy``): elementwise
basis functions and their derivatives on float32 arrays, and grid-expanding
bases (B-spline, Gaussian RBF) on float64 arrays. The compiled kernels walk
the input one element at a time; here each pass is a vectorized NumPy
expression instead.
"""

import numpy as np

BACKEND_NAME = "python"

UNARY_KINDS = ("relu", "sin", "cos", "arctan", "tan", "tanh", "dog", "silu")


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def unary_values(name, x):
    """Apply the named elementwise function to a float32 array."""
    if name == "relu":
        return np.maximum(x, np.float32(0.0))
    if name == "sin":
        return np.sin(x)
    if name == "cos":
        return np.cos(x)
    if name == "arctan":
        return np.arctan(x)
    if name == "tan":
        return np.tan(x)
    if name == "tanh":
        return np.tanh(x)
    if name == "dog":
        return (-x * np.exp(-0.5 * x * x)).astype(x.dtype, copy=False)
    if name == "silu":
        return (x * _sigmoid(x)).astype(x.dtype, copy=False)
    raise ValueError(f"unknown elementwise kind: {name!r}")


def unary_derivs(name, x):
    """d/dx of the named elementwise function, evaluated at x."""
    one = np.float32(1.0)
    if name == "relu":
        # relu'(0) = 0 by convention
        return (x > 0).astype(x.dtype)
    if name == "sin":
        return np.cos(x)
    if name == "cos":
        return -np.sin(x)
    if name == "arctan":
        return (one / (one + x * x)).astype(x.dtype, copy=False)
    if name == "tan":
        c = np.cos(x)
        return (one / (c * c)).astype(x.dtype, copy=False)
    if name == "tanh":
        t = np.tanh(x)
        return one - t * t
    if name == "dog":
        return ((x * x - 1.0) * np.exp(-0.5 * x * x)).astype(x.dtype, copy=False)
    if name == "silu":
        s = _sigmoid(x)
        return (s * (1.0 + x * (1.0 - s))).astype(x.dtype, copy=False)
    raise ValueError(f"unknown elementwise kind: {name!r}")


def _bspline_order0(x, knots):
    # indicator of the half-open knot interval containing x
    return ((x[:, None] >= knots[None, :-1]) & (x[:, None] < knots[None, 1:])).astype(
        np.float64
    )


def _bspline_raise(x, knots, bases, k):
    # one Cox-de Boor order-raising step; knots are strictly increasing
    left = (x[:, None] - knots[None, : -k - 1]) / (knots[k:-1] - knots[: -k - 1])
    right = (knots[k + 1 :] - x[:, None]) / (knots[k + 1 :] - knots[1:-k])
    return left * bases[:, :-1] + right * bases[:, 1:]


def bspline_values(x, knots, order):
    """All order-``order`` B-spline basis values at each x.

    x: float64 [n]; knots: strictly increasing float64 [nbasis + order + 1].
    Returns float64 [n, nbasis] with nbasis = len(knots) - order - 1.
    """
    bases = _bspline_order0(x, knots)
    for k in range(1, order + 1):
        bases = _bspline_raise(x, knots, bases, k)
    return np.ascontiguousarray(bases)


def bspline_derivs(x, knots, order):
    """First derivatives of the order-``order`` basis functions at each x."""
    n = x.shape[0]
    nbasis = knots.shape[0] - order - 1
    if order == 0:
        return np.zeros((n, nbasis), dtype=np.float64)
    lower = _bspline_order0(x, knots)
    for k in range(1, order):
        lower = _bspline_raise(x, knots, lower, k)
    # d/dx N_i^k = k * (N_i^{k-1} / (t_{i+k} - t_i) - N_{i+1}^{k-1} / (t_{i+k+1} - t_{i+1}))
    dl = knots[order:-1] - knots[: -order - 1]
    dr = knots[order + 1 :] - knots[1:-order]
    return order * (lower[:, :-1] / dl - lower[:, 1:] / dr)


def rbf_values(x, centers, h):
    """Gaussian RBF values exp(-((x - c) / h)^2) for every center."""
    z = (x[:, None] - centers[None, :]) / h
    return np.exp(-z * z)


def rbf_derivs(x, centers, h):
    """d/dx of each Gaussian RBF component at x."""
    d = x[:, None] - centers[None, :]
    z = d / h
    return -2.0 * d / (h * h) * np.exp(-z * z)
