# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Sinkhorn scaling kernel; mirrors _kernels_py.scaling_loop."""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log

cnp.import_array()


cdef double _row_lse(double[:, ::1] log_k, double[::1] vec, Py_ssize_t i,
                     Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t j
    cdef double best = -1e308
    cdef double s = 0.0
    cdef double x
    for j in range(m):
        x = log_k[i, j] + vec[j]
        if x > best:
            best = x
    if best <= -1e308:
        return -1e308
    for j in range(m):
        s += exp(log_k[i, j] + vec[j] - best)
    return best + log(s)


cdef double _col_lse(double[:, ::1] log_k, double[::1] vec, Py_ssize_t j,
                     Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double best = -1e308
    cdef double s = 0.0
    cdef double x
    for i in range(n):
        x = log_k[i, j] + vec[i]
        if x > best:
            best = x
    if best <= -1e308:
        return -1e308
    for i in range(n):
        s += exp(log_k[i, j] + vec[i] - best)
    return best + log(s)


cdef double _marginal_violation(double[:, ::1] log_k, double[::1] log_u,
                                double[::1] log_v, double[::1] p,
                                double[::1] q) noexcept nogil:
    cdef Py_ssize_t n = log_k.shape[0]
    cdef Py_ssize_t m = log_k.shape[1]
    cdef Py_ssize_t i, j
    cdef double worst = 0.0
    cdef double s, d
    for i in range(n):
        s = 0.0
        for j in range(m):
            s += exp(log_k[i, j] + log_u[i] + log_v[j])
        d = fabs(s - p[i])
        if d > worst:
            worst = d
    for j in range(m):
        s = 0.0
        for i in range(n):
            s += exp(log_k[i, j] + log_u[i] + log_v[j])
        d = fabs(s - q[j])
        if d > worst:
            worst = d
    return worst


def scaling_loop(double[:, ::1] log_k, double[::1] log_p, double[::1] log_q,
                 double[::1] log_u, double[::1] log_v, int max_iters,
                 double tol, int check_every):
    """Alternating log-domain Sinkhorn scaling toward marginals exp(log_p/q).

    Same contract as _kernels_py.scaling_loop: mutates log_u/log_v, returns
    (iterations_run, final_violation).
    """
    cdef Py_ssize_t n = log_k.shape[0]
    cdef Py_ssize_t m = log_k.shape[1]
    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef double lse
    cdef double viol
    p_arr = np.exp(np.asarray(log_p))
    q_arr = np.exp(np.asarray(log_q))
    cdef double[::1] p = p_arr
    cdef double[::1] q = q_arr
    with nogil:
        for it in range(1, max_iters + 1):
            for i in range(n):
                lse = _row_lse(log_k, log_v, i, m)
                log_u[i] = 0.0 if lse <= -1e308 else log_p[i] - lse
            for j in range(m):
                lse = _col_lse(log_k, log_u, j, n)
                log_v[j] = 0.0 if lse <= -1e308 else log_q[j] - lse
            if tol > 0.0 and it % check_every == 0:
                if _marginal_violation(log_k, log_u, log_v, p, q) < tol:
                    break
    viol = _marginal_violation(log_k, log_u, log_v, p, q)
    return it, viol
