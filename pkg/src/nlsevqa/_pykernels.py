"""Pure numpy implementation of the statevector kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is unavailable or when ``NLSEVQA_BACKEND=python`` is set.
"""

from functools import lru_cache

import numpy as np

OP_MATRIX = 0
OP_SWAP = 1


@lru_cache(maxsize=512)
def _pair_indices(dim, t, cmask):
    idx = np.arange(dim, dtype=np.int64)
    i0 = idx[((idx >> t) & 1 == 0) & ((idx & cmask) == cmask)]
    return i0, i0 | (1 << t)


@lru_cache(maxsize=512)
def _swap_indices(dim, qa, qb, cmask):
    idx = np.arange(dim, dtype=np.int64)
    sel = ((idx >> qa) & 1 == 1) & ((idx >> qb) & 1 == 0) & ((idx & cmask) == cmask)
    i = idx[sel]
    return i, (i ^ (1 << qa)) | (1 << qb)


def apply_matrix(psi, target, cmask, m):
    m00, m01, m10, m11 = m[0], m[1], m[2], m[3]
    if cmask == 0:
        view = psi.reshape(-1, 2, 1 << target)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = m00 * a + m01 * b
        view[:, 1, :] = m10 * a + m11 * b
        return
    i0, i1 = _pair_indices(psi.shape[0], target, cmask)
    a = psi[i0]
    b = psi[i1]
    psi[i0] = m00 * a + m01 * b
    psi[i1] = m10 * a + m11 * b


def apply_swap(psi, qa, qb, cmask):
    i, j = _swap_indices(psi.shape[0], qa, qb, cmask)
    psi[i], psi[j] = psi[j], psi[i].copy()


def apply_ops(psi, kinds, t0, t1, cmask, mats):
    for k in range(len(kinds)):
        if kinds[k] == OP_MATRIX:
            apply_matrix(psi, int(t0[k]), int(cmask[k]), mats[k])
        else:
            apply_swap(psi, int(t0[k]), int(t1[k]), int(cmask[k]))


_X = np.array([0, 1, 1, 0], dtype=np.complex128)


def _rx(theta):
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([c, -1j * s, -1j * s, c])


def _rz(theta):
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([c - 1j * s, 0, 0, c + 1j * s])


def _ring(psi, n, inverse=False):
    pairs = [(q, q + 1) for q in range(n - 1)] + [(n - 1, 0)]
    if inverse:
        pairs.reverse()
    for ctrl, tgt in pairs:
        apply_matrix(psi, tgt, 1 << ctrl, _X)


def _check(lam, n, d):
    if len(lam) != 2 * n * (d + 1):
        raise ValueError(f"parameter vector has length {len(lam)}, expected {2 * n * (d + 1)}")


def ansatz_state(lam, n, d, sign=1.0):
    _check(lam, n, d)
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    k = 0
    for layer in range(d + 1):
        if layer > 0:
            _ring(psi, n)
        for q in range(n):
            apply_matrix(psi, q, 0, _rx(sign * lam[k + q]))
        for q in range(n):
            apply_matrix(psi, q, 0, _rz(sign * lam[k + n + q]))
        k += 2 * n
    return psi


def _reduced(chi, phi, t):
    c = chi.reshape(-1, 2, 1 << t).conj()
    p = phi.reshape(-1, 2, 1 << t)
    return np.einsum("iaj,ibj->ab", c, p).ravel()


def _value(r, mat):
    return float(np.real(np.dot(mat, r)))


def _rx_deriv(theta):
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([-0.5 * s, -0.5j * c, -0.5j * c, -0.5 * s])


def _rz_deriv(theta):
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([-0.5j * (c - 1j * s), 0, 0, 0.5j * (c + 1j * s)])


def ansatz_overlap_grad(lam, n, d, target, h=1e-7, exact=False):
    _check(lam, n, d)
    if len(target) != 1 << n:
        raise ValueError(f"target has length {len(target)}, expected {1 << n}")
    lam = np.asarray(lam, dtype=np.float64)
    phi = ansatz_state(lam, n, d)
    chi = np.array(target, dtype=np.complex128)
    value = float(np.real(np.vdot(chi, phi)))
    grad = np.zeros(len(lam))
    for layer in range(d, -1, -1):
        k = 2 * n * layer
        for offset, gate, deriv in ((n, _rz, _rz_deriv), (0, _rx, _rx_deriv)):
            for q in range(n - 1, -1, -1):
                theta = lam[k + offset + q]
                apply_matrix(phi, q, 0, gate(-theta))
                r = _reduced(chi, phi, q)
                if exact:
                    grad[k + offset + q] = _value(r, deriv(theta))
                else:
                    grad[k + offset + q] = (_value(r, gate(theta + h)) - _value(r, gate(theta - h))) / (2.0 * h)
                apply_matrix(chi, q, 0, gate(-theta))
        if layer > 0:
            _ring(phi, n, inverse=True)
            _ring(chi, n, inverse=True)
    return value, grad
