# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels.

Same contract as ``qpack.backends.reference``: in-place updates of a
contiguous complex128 state of length 2**n, qubit q = bit q of the index.
Hot loops use explicit real/imaginary arithmetic; C complex multiplication
would route through library helpers and cost several times the bandwidth.
The payoff over NumPy is per-gate overhead: trajectory noise simulation
issues millions of small-state gate applications where dispatch dominates.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def apply_phase(cnp.complex128_t[::1] state, cnp.float64_t[::1] diag, double alpha):
    """state[k] *= exp(-i * alpha * diag[k])."""
    cdef double* s = <double*> &state[0]
    cdef Py_ssize_t k, n = state.shape[0]
    cdef double c, d, re, im
    for k in range(n):
        c = cos(alpha * diag[k])
        d = -sin(alpha * diag[k])
        re = s[2 * k]
        im = s[2 * k + 1]
        s[2 * k] = re * c - im * d
        s[2 * k + 1] = re * d + im * c
    return None


def apply_phase_table(cnp.complex128_t[::1] state, cnp.int32_t[::1] codes,
                      cnp.complex128_t[::1] table):
    """state[k] *= table[codes[k]] (phases precomputed per unique energy)."""
    cdef double* s = <double*> &state[0]
    cdef double* t = <double*> &table[0]
    cdef Py_ssize_t k, n = state.shape[0]
    cdef int idx
    cdef double c, d, re, im
    for k in range(n):
        idx = codes[k]
        c = t[2 * idx]
        d = t[2 * idx + 1]
        re = s[2 * k]
        im = s[2 * k + 1]
        s[2 * k] = re * c - im * d
        s[2 * k + 1] = re * d + im * c
    return None


def apply_rx_all(cnp.complex128_t[::1] state, int n_qubits, double beta):
    """Apply exp(i * beta * X) to every qubit (mixer layer for -sum X)."""
    cdef double c = cos(beta)
    cdef double sv = sin(beta)  # multiplies i: (re, im) -> (-sv*im, sv*re)
    cdef double* s = <double*> &state[0]
    cdef Py_ssize_t q, stride, base, off, i0, i1
    cdef Py_ssize_t n = state.shape[0]
    cdef double a0r, a0i, a1r, a1i
    for q in range(n_qubits):
        stride = (<Py_ssize_t> 1) << q
        base = 0
        while base < n:
            for off in range(stride):
                i0 = 2 * (base + off)
                i1 = i0 + 2 * stride
                a0r = s[i0]
                a0i = s[i0 + 1]
                a1r = s[i1]
                a1i = s[i1 + 1]
                s[i0] = c * a0r - sv * a1i
                s[i0 + 1] = c * a0i + sv * a1r
                s[i1] = c * a1r - sv * a0i
                s[i1 + 1] = c * a1i + sv * a0r
            base += 2 * stride
    return None


def apply_1q(cnp.complex128_t[::1] state, int n_qubits, int q,
             cnp.complex128_t[:, ::1] matrix):
    """Apply a 2x2 operator (row-major [[m00, m01], [m10, m11]]) to qubit q."""
    cdef double m00r = matrix[0, 0].real, m00i = matrix[0, 0].imag
    cdef double m01r = matrix[0, 1].real, m01i = matrix[0, 1].imag
    cdef double m10r = matrix[1, 0].real, m10i = matrix[1, 0].imag
    cdef double m11r = matrix[1, 1].real, m11i = matrix[1, 1].imag
    cdef double* s = <double*> &state[0]
    cdef Py_ssize_t stride = (<Py_ssize_t> 1) << q
    cdef Py_ssize_t n = state.shape[0]
    cdef Py_ssize_t base = 0, off, i0, i1
    cdef double a0r, a0i, a1r, a1i
    while base < n:
        for off in range(stride):
            i0 = 2 * (base + off)
            i1 = i0 + 2 * stride
            a0r = s[i0]
            a0i = s[i0 + 1]
            a1r = s[i1]
            a1i = s[i1 + 1]
            s[i0] = m00r * a0r - m00i * a0i + m01r * a1r - m01i * a1i
            s[i0 + 1] = m00r * a0i + m00i * a0r + m01r * a1i + m01i * a1r
            s[i1] = m10r * a0r - m10i * a0i + m11r * a1r - m11i * a1i
            s[i1 + 1] = m10r * a0i + m10i * a0r + m11r * a1i + m11i * a1r
        base += 2 * stride
    return None


def apply_cz(cnp.complex128_t[::1] state, int n_qubits, int q1, int q2):
    """Negate amplitudes with both control bits set."""
    cdef Py_ssize_t mask = ((<Py_ssize_t> 1) << q1) | ((<Py_ssize_t> 1) << q2)
    cdef double* s = <double*> &state[0]
    cdef Py_ssize_t k, n = state.shape[0]
    for k in range(n):
        if (k & mask) == mask:
            s[2 * k] = -s[2 * k]
            s[2 * k + 1] = -s[2 * k + 1]
    return None


def prob_one(cnp.complex128_t[::1] state, int n_qubits, int q):
    """Probability that qubit q measures 1."""
    cdef double* s = <double*> &state[0]
    cdef Py_ssize_t stride = (<Py_ssize_t> 1) << q
    cdef Py_ssize_t n = state.shape[0]
    cdef Py_ssize_t base = 0, off, i1
    cdef double total = 0.0
    while base < n:
        for off in range(stride):
            i1 = 2 * (base + off + stride)
            total += s[i1] * s[i1] + s[i1 + 1] * s[i1 + 1]
        base += 2 * stride
    return total
