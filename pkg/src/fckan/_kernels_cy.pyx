# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar-loop kernels.

Hot inner loops for the elementwise basis functions and the grid-expanding
bases (Cox-de Boor B-splines, Gaussian RBFs). Each pass walks the input one
element at a time with no vectorization directives, which is also exactly
what the function-throughput benchmark wants to measure. Elementwise kernels
take and return float32; grid kernels work in float64.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan, cos, exp, sin, tan, tanh

cnp.import_array()

BACKEND_NAME = "compiled"

UNARY_KINDS = ("relu", "sin", "cos", "arctan", "tan", "tanh", "dog", "silu")

DEF K_RELU = 0
DEF K_SIN = 1
DEF K_COS = 2
DEF K_ARCTAN = 3
DEF K_TAN = 4
DEF K_TANH = 5
DEF K_DOG = 6
DEF K_SILU = 7

_CODES = {name: i for i, name in enumerate(UNARY_KINDS)}


cdef inline double _unary(int code, double v) noexcept nogil:
    if code == K_RELU:
        return v if v > 0.0 else 0.0
    elif code == K_SIN:
        return sin(v)
    elif code == K_COS:
        return cos(v)
    elif code == K_ARCTAN:
        return atan(v)
    elif code == K_TAN:
        return tan(v)
    elif code == K_TANH:
        return tanh(v)
    elif code == K_DOG:
        return -v * exp(-0.5 * v * v)
    else:  # K_SILU
        return v / (1.0 + exp(-v))


cdef inline double _unary_deriv(int code, double v) noexcept nogil:
    cdef double t, s
    if code == K_RELU:
        return 1.0 if v > 0.0 else 0.0
    elif code == K_SIN:
        return cos(v)
    elif code == K_COS:
        return -sin(v)
    elif code == K_ARCTAN:
        return 1.0 / (1.0 + v * v)
    elif code == K_TAN:
        t = cos(v)
        return 1.0 / (t * t)
    elif code == K_TANH:
        t = tanh(v)
        return 1.0 - t * t
    elif code == K_DOG:
        return (v * v - 1.0) * exp(-0.5 * v * v)
    else:  # K_SILU
        s = 1.0 / (1.0 + exp(-v))
        return s * (1.0 + v * (1.0 - s))


cdef int _code_of(name) except -1:
    try:
        return _CODES[name]
    except KeyError:
        raise ValueError(f"unknown elementwise kind: {name!r}") from None


def unary_values(name, x):
    """Apply the named elementwise function to a float32 array."""
    cdef int code = _code_of(name)
    cdef cnp.ndarray[cnp.float32_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float32).ravel()
    cdef cnp.ndarray[cnp.float32_t, ndim=1] out = np.empty_like(xf)
    cdef Py_ssize_t i, n = xf.shape[0]
    with nogil:
        for i in range(n):
            out[i] = <float> _unary(code, xf[i])
    return out.reshape(np.shape(x))


def unary_derivs(name, x):
    """d/dx of the named elementwise function, evaluated at x."""
    cdef int code = _code_of(name)
    cdef cnp.ndarray[cnp.float32_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float32).ravel()
    cdef cnp.ndarray[cnp.float32_t, ndim=1] out = np.empty_like(xf)
    cdef Py_ssize_t i, n = xf.shape[0]
    with nogil:
        for i in range(n):
            out[i] = <float> _unary_deriv(code, xf[i])
    return out.reshape(np.shape(x))


cdef void _bspline_point(double v, const double* t, int nk, int order,
                         double* work) noexcept nogil:
    # Cox-de Boor at a single point: order-0 indicators raised in place.
    # work has nk - 1 slots; the first nk - order - 1 hold the result.
    cdef int i, k, n0 = nk - 1
    for i in range(n0):
        work[i] = 1.0 if t[i] <= v < t[i + 1] else 0.0
    for k in range(1, order + 1):
        for i in range(n0 - k):
            work[i] = (v - t[i]) / (t[i + k] - t[i]) * work[i] \
                + (t[i + k + 1] - v) / (t[i + k + 1] - t[i + 1]) * work[i + 1]


def bspline_values(x, knots, order):
    """All order-``order`` B-spline basis values at each x.

    x: float64 [n]; knots: strictly increasing float64 [nbasis + order + 1].
    Returns float64 [n, nbasis] with nbasis = len(knots) - order - 1.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tf = np.ascontiguousarray(knots, dtype=np.float64)
    cdef int k = order, nk = tf.shape[0], nbasis = tf.shape[0] - order - 1
    cdef Py_ssize_t i, j, n = xf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, nbasis), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(nk - 1, dtype=np.float64)
    with nogil:
        for i in range(n):
            _bspline_point(xf[i], &tf[0], nk, k, &work[0])
            for j in range(nbasis):
                out[i, j] = work[j]
    return out


def bspline_derivs(x, knots, order):
    """First derivatives of the order-``order`` basis functions at each x."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tf = np.ascontiguousarray(knots, dtype=np.float64)
    cdef int k = order, nk = tf.shape[0], nbasis = tf.shape[0] - order - 1
    cdef Py_ssize_t i, j, n = xf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, nbasis), dtype=np.float64)
    if order == 0:
        return out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(nk - 1, dtype=np.float64)
    with nogil:
        for i in range(n):
            # order-(k-1) values, then the standard order-reduction identity
            _bspline_point(xf[i], &tf[0], nk, k - 1, &work[0])
            for j in range(nbasis):
                out[i, j] = k * (work[j] / (tf[j + k] - tf[j])
                                 - work[j + 1] / (tf[j + k + 1] - tf[j + 1]))
    return out


def rbf_values(x, centers, h):
    """Gaussian RBF values exp(-((x - c) / h)^2) for every center."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cf = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double hh = h, z
    cdef Py_ssize_t i, j, n = xf.shape[0], g = cf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, g), dtype=np.float64)
    with nogil:
        for i in range(n):
            for j in range(g):
                z = (xf[i] - cf[j]) / hh
                out[i, j] = exp(-z * z)
    return out


def rbf_derivs(x, centers, h):
    """d/dx of each Gaussian RBF component at x."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cf = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double hh = h, d, z
    cdef Py_ssize_t i, j, n = xf.shape[0], g = cf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, g), dtype=np.float64)
    with nogil:
        for i in range(n):
            for j in range(g):
                d = xf[i] - cf[j]
                z = d / hh
                out[i, j] = -2.0 * d / (hh * hh) * exp(-z * z)
    return out
