# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the pooled two-sample objective.

Same contract as ``pendrm._pykernels``; see that module for the formulas.
"""

from libc.math cimport exp, fabs, log1p

import numpy as np

cimport numpy as cnp

cnp.import_array()


def loglik(const double[:, ::1] t, const double[::1] beta, double alpha,
           double log_rho1, Py_ssize_t n1):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t d = t.shape[1]
    cdef Py_ssize_t i, k
    cdef double u, v, e
    cdef double acc = 0.0
    for i in range(n):
        u = alpha
        for k in range(d):
            u = u + beta[k] * t[i, k]
        v = u + log_rho1
        e = exp(-fabs(v))
        if v > 0.0:
            acc -= v + log1p(e)
        else:
            acc -= log1p(e)
        if i < n1:
            acc += u
    return acc


def loglik_score_hessian(const double[:, ::1] t, const double[::1] beta, double alpha,
                         double log_rho1, Py_ssize_t n1):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t d = t.shape[1]
    cdef Py_ssize_t i, k, l
    cdef double u, v, e, ope, sig, w2, tk, wk
    cdef double value = 0.0
    cdef double sum_sig = 0.0
    grad_arr = np.zeros(d + 1)
    hess_arr = np.zeros((d + 1, d + 1))
    cdef double[::1] grad = grad_arr
    cdef double[:, ::1] hess = hess_arr
    for i in range(n):
        u = alpha
        for k in range(d):
            u = u + beta[k] * t[i, k]
        v = u + log_rho1
        e = exp(-fabs(v))
        ope = 1.0 + e
        if v > 0.0:
            value -= v + log1p(e)
        else:
            value -= log1p(e)
        if v >= 0.0:
            sig = 1.0 / ope
        else:
            sig = e / ope
        w2 = e / (ope * ope)
        sum_sig += sig
        if i < n1:
            value += u
        for k in range(d):
            tk = t[i, k]
            if i < n1:
                grad[k + 1] += tk
            grad[k + 1] -= sig * tk
            wk = w2 * tk
            hess[0, k + 1] -= wk
            for l in range(k, d):
                hess[k + 1, l + 1] -= wk * t[i, l]
        hess[0, 0] -= w2
    grad[0] = n1 - sum_sig
    for k in range(d):
        hess[k + 1, 0] = hess[0, k + 1]
        for l in range(k + 1, d):
            hess[l + 1, k + 1] = hess[k + 1, l + 1]
    return value, grad_arr, hess_arr
