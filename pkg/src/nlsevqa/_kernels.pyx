# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels.

Amplitude index bit ``q`` is qubit ``q`` (qubit 0 is the least significant bit).
Every routine mutates the amplitude buffer in place and never materializes a
full unitary.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

ctypedef double complex cplx

# op codes shared with the pure-Python backend
cdef enum:
    OP_MATRIX = 0
    OP_SWAP = 1


cdef inline Py_ssize_t _insert_zero(Py_ssize_t i, int t) noexcept nogil:
    return ((i >> t) << (t + 1)) | (i & ((<Py_ssize_t>1 << t) - 1))


cdef void _apply_matrix(cplx* psi, Py_ssize_t dim, int t, Py_ssize_t cmask,
                        cplx m00, cplx m01, cplx m10, cplx m11) noexcept nogil:
    cdef Py_ssize_t stride = <Py_ssize_t>1 << t
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t i, i0, i1
    cdef cplx a, b
    for i in range(half):
        i0 = _insert_zero(i, t)
        if (i0 & cmask) != cmask:
            continue
        i1 = i0 | stride
        a = psi[i0]
        b = psi[i1]
        psi[i0] = m00 * a + m01 * b
        psi[i1] = m10 * a + m11 * b


cdef void _apply_x(cplx* psi, Py_ssize_t dim, int t, Py_ssize_t cmask) noexcept nogil:
    cdef Py_ssize_t stride = <Py_ssize_t>1 << t
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t i, i0, i1
    cdef cplx a
    for i in range(half):
        i0 = _insert_zero(i, t)
        if (i0 & cmask) != cmask:
            continue
        i1 = i0 | stride
        a = psi[i0]
        psi[i0] = psi[i1]
        psi[i1] = a


cdef void _apply_swap(cplx* psi, Py_ssize_t dim, int qa, int qb, Py_ssize_t cmask) noexcept nogil:
    cdef Py_ssize_t ba = <Py_ssize_t>1 << qa
    cdef Py_ssize_t bb = <Py_ssize_t>1 << qb
    cdef Py_ssize_t i, j
    cdef cplx tmp
    for i in range(dim):
        # visit each (a=1, b=0) index once and exchange with its (a=0, b=1) partner
        if (i & ba) == 0 or (i & bb) != 0 or (i & cmask) != cmask:
            continue
        j = (i ^ ba) | bb
        tmp = psi[i]
        psi[i] = psi[j]
        psi[j] = tmp


def apply_matrix(cplx[::1] psi, int target, Py_ssize_t cmask, cplx[::1] m):
    _apply_matrix(&psi[0], psi.shape[0], target, cmask, m[0], m[1], m[2], m[3])


def apply_swap(cplx[::1] psi, int qa, int qb, Py_ssize_t cmask):
    _apply_swap(&psi[0], psi.shape[0], qa, qb, cmask)


def apply_ops(cplx[::1] psi, const signed char[::1] kinds, const int[::1] t0,
              const int[::1] t1, const long long[::1] cmask, const cplx[:, ::1] mats):
    """Apply a compiled op list (see ``statevector.CircuitSpec.compiled``)."""
    cdef Py_ssize_t k, nops = kinds.shape[0]
    cdef Py_ssize_t dim = psi.shape[0]
    cdef cplx* p = &psi[0]
    with nogil:
        for k in range(nops):
            if kinds[k] == OP_MATRIX:
                _apply_matrix(p, dim, t0[k], <Py_ssize_t>cmask[k],
                              mats[k, 0], mats[k, 1], mats[k, 2], mats[k, 3])
            else:
                _apply_swap(p, dim, t0[k], t1[k], <Py_ssize_t>cmask[k])


# ---------------------------------------------------------------------------
# hardware-efficient ansatz: RX layer, RZ layer, then d x (CNOT ring, RX, RZ)

cdef inline void _rx(cplx* psi, Py_ssize_t dim, int q, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    _apply_matrix(psi, dim, q, 0, c, -1j * s, -1j * s, c)


cdef inline void _rz(cplx* psi, Py_ssize_t dim, int q, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    _apply_matrix(psi, dim, q, 0, c - 1j * s, 0, 0, c + 1j * s)


cdef void _ansatz_forward(cplx* psi, Py_ssize_t dim, int n, int d,
                          const double* lam, double sign) noexcept nogil:
    cdef int layer, q
    cdef Py_ssize_t k = 0
    for layer in range(d + 1):
        if layer > 0:
            for q in range(n - 1):
                _apply_x(psi, dim, q + 1, <Py_ssize_t>1 << q)
            _apply_x(psi, dim, 0, <Py_ssize_t>1 << (n - 1))
        for q in range(n):
            _rx(psi, dim, q, sign * lam[k + q])
        for q in range(n):
            _rz(psi, dim, q, sign * lam[k + n + q])
        k += 2 * n


def ansatz_state(const double[::1] lam, int n, int d, double sign=1.0):
    """Return U(sign * lam)|0...0> as a new complex array."""
    cdef Py_ssize_t dim = <Py_ssize_t>1 << n
    if lam.shape[0] != 2 * n * (d + 1):
        raise ValueError("parameter vector has length %d, expected %d"
                         % (lam.shape[0], 2 * n * (d + 1)))
    out = np.zeros(dim, dtype=np.complex128)
    cdef cplx[::1] psi = out
    psi[0] = 1.0
    with nogil:
        _ansatz_forward(&psi[0], dim, n, d, &lam[0], sign)
    return out


cdef inline void _reduced(const cplx* chi, const cplx* phi, Py_ssize_t dim, int t,
                          cplx* r) noexcept nogil:
    # r[a*2+b] = sum over pairs of conj(chi_a) * phi_b
    cdef Py_ssize_t stride = <Py_ssize_t>1 << t
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t i, i0, i1
    cdef cplx c0, c1, p0, p1
    r[0] = 0
    r[1] = 0
    r[2] = 0
    r[3] = 0
    for i in range(half):
        i0 = _insert_zero(i, t)
        i1 = i0 | stride
        c0 = chi[i0].conjugate()
        c1 = chi[i1].conjugate()
        p0 = phi[i0]
        p1 = phi[i1]
        r[0] += c0 * p0
        r[1] += c0 * p1
        r[2] += c1 * p0
        r[3] += c1 * p1


cdef inline double _rx_value(const cplx* r, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    return (c * (r[0] + r[3]) - 1j * s * (r[1] + r[2])).real


cdef inline double _rz_value(const cplx* r, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    return ((c - 1j * s) * r[0] + (c + 1j * s) * r[3]).real


cdef inline double _rx_deriv(const cplx* r, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    return (-0.5 * s * (r[0] + r[3]) - 0.5j * c * (r[1] + r[2])).real


cdef inline double _rz_deriv(const cplx* r, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    return ((-0.5j) * (c - 1j * s) * r[0] + 0.5j * (c + 1j * s) * r[3]).real


def ansatz_overlap_grad(const double[::1] lam, int n, int d, const cplx[::1] target,
                        double h=1e-7, bint exact=False):
    """Value and gradient of Re<target|U(lam)|0>.

    A single reverse sweep carries the forward state and the back-propagated
    target, so every per-parameter probe costs O(1) once the 2x2 reduced
    overlap at that gate is known. ``exact=False`` returns central differences
    with step ``h``; ``exact=True`` returns the analytic derivative.
    """
    cdef Py_ssize_t dim = <Py_ssize_t>1 << n
    cdef Py_ssize_t npar = 2 * n * (d + 1)
    if lam.shape[0] != npar:
        raise ValueError("parameter vector has length %d, expected %d" % (lam.shape[0], npar))
    if target.shape[0] != dim:
        raise ValueError("target has length %d, expected %d" % (target.shape[0], dim))
    phi_arr = np.zeros(dim, dtype=np.complex128)
    chi_arr = np.array(target, dtype=np.complex128, copy=True)
    grad_arr = np.zeros(npar, dtype=np.float64)
    cdef cplx[::1] phi = phi_arr
    cdef cplx[::1] chi = chi_arr
    cdef double[::1] grad = grad_arr
    cdef cplx r[4]
    cdef cplx value = 0
    cdef Py_ssize_t i, k
    cdef int layer, q
    cdef double theta
    phi[0] = 1.0
    with nogil:
        _ansatz_forward(&phi[0], dim, n, d, &lam[0], 1.0)
        for i in range(dim):
            value += chi[i].conjugate() * phi[i]
        for layer in range(d, -1, -1):
            k = 2 * n * layer
            for q in range(n - 1, -1, -1):
                theta = lam[k + n + q]
                _rz(&phi[0], dim, q, -theta)
                _reduced(&chi[0], &phi[0], dim, q, r)
                if exact:
                    grad[k + n + q] = _rz_deriv(r, theta)
                else:
                    grad[k + n + q] = (_rz_value(r, theta + h) - _rz_value(r, theta - h)) / (2.0 * h)
                _rz(&chi[0], dim, q, -theta)
            for q in range(n - 1, -1, -1):
                theta = lam[k + q]
                _rx(&phi[0], dim, q, -theta)
                _reduced(&chi[0], &phi[0], dim, q, r)
                if exact:
                    grad[k + q] = _rx_deriv(r, theta)
                else:
                    grad[k + q] = (_rx_value(r, theta + h) - _rx_value(r, theta - h)) / (2.0 * h)
                _rx(&chi[0], dim, q, -theta)
            if layer > 0:
                _apply_x(&phi[0], dim, 0, <Py_ssize_t>1 << (n - 1))
                _apply_x(&chi[0], dim, 0, <Py_ssize_t>1 << (n - 1))
                for q in range(n - 2, -1, -1):
                    _apply_x(&phi[0], dim, q + 1, <Py_ssize_t>1 << q)
                    _apply_x(&chi[0], dim, q + 1, <Py_ssize_t>1 << q)
    return value.real, grad_arr
