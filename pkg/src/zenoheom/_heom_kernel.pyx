# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 stepper for the hierarchy right-hand side.

Every ADO's derivative reads its neighbours from the stage buffer and writes
only its own row, in a fixed summation order, so results do not depend on how
callers schedule independent integrations across threads.

The Liouville-space blocks are stored in CSR form: commutators with sparse
system operators leave most entries zero.
"""

from libc.stdlib cimport free, malloc

import numpy as np

ctypedef double complex cplx


cdef struct Csr:
    const Py_ssize_t* ptr
    const Py_ssize_t* col
    const cplx* val


cdef class _Blocks:
    """CSR copies of ``diag``, ``phi`` and each ``links[p]``; keeps the buffers alive."""

    cdef object arrays
    cdef Csr diag, phi
    cdef Csr* links
    cdef Py_ssize_t K

    def __cinit__(self, diag, phi, links):
        self.arrays = []
        self.K = links.shape[0]
        self.links = <Csr*> NULL
        self._fill(&self.diag, diag)
        self._fill(&self.phi, phi)
        self.links = <Csr*> malloc(max(self.K, 1) * sizeof(Csr))
        if self.links == NULL:
            raise MemoryError()
        for p in range(self.K):
            self._fill(&self.links[p], links[p])

    def __dealloc__(self):
        free(self.links)

    cdef _fill(self, Csr* out, M):
        M = np.asarray(M, dtype=np.complex128)
        nz = M != 0
        ptr = np.ascontiguousarray(np.concatenate([[0], np.cumsum(nz.sum(axis=1))]), dtype=np.intp)
        col = np.ascontiguousarray(np.nonzero(nz)[1], dtype=np.intp)
        val = np.ascontiguousarray(M[nz], dtype=np.complex128)
        if col.size == 0:
            col = np.zeros(1, dtype=np.intp)
            val = np.zeros(1, dtype=np.complex128)
        self.arrays += [ptr, col, val]
        cdef const Py_ssize_t[::1] p_ = ptr
        cdef const Py_ssize_t[::1] c_ = col
        cdef const cplx[::1] v_ = val
        out.ptr = &p_[0]
        out.col = &c_[0]
        out.val = &v_[0]


cdef inline cplx _row(const Csr* m, Py_ssize_t i, const cplx* v) noexcept nogil:
    cdef cplx s = 0
    cdef Py_ssize_t k
    for k in range(m.ptr[i], m.ptr[i + 1]):
        s = s + m.val[k] * v[m.col[k]]
    return s


cdef void _rhs(const cplx[:, ::1] x, cplx[:, ::1] out, _Blocks b, const cplx[::1] decay,
               const Py_ssize_t[:, ::1] up, const Py_ssize_t[:, ::1] down,
               const double[:, ::1] level, cplx[::1] acc) noexcept nogil:
    cdef Py_ssize_t N = x.shape[0], D = x.shape[1], K = up.shape[1]
    cdef Py_ssize_t n, p, i, j, m
    cdef cplx s, dn
    cdef double lv
    cdef bint any_up
    for n in range(N):
        any_up = False
        for j in range(D):
            acc[j] = 0
        for p in range(K):
            m = up[n, p]
            if m >= 0:
                any_up = True
                for j in range(D):
                    acc[j] = acc[j] + x[m, j]
        dn = decay[n]
        for i in range(D):
            s = _row(&b.diag, i, &x[n, 0]) - dn * x[n, i]
            if any_up:
                s = s + _row(&b.phi, i, &acc[0])
            for p in range(K):
                m = down[n, p]
                if m >= 0:
                    lv = level[n, p]
                    s = s + lv * _row(&b.links[p], i, &x[m, 0])
            out[n, i] = s


cdef void _axpy(cplx[:, ::1] dst, const cplx[:, ::1] x, const cplx[:, ::1] k, double a) noexcept nogil:
    cdef Py_ssize_t n, i
    for n in range(x.shape[0]):
        for i in range(x.shape[1]):
            dst[n, i] = x[n, i] + a * k[n, i]


def rk4_steps(cplx[:, ::1] x, diag, const cplx[::1] decay,
              const Py_ssize_t[:, ::1] up, const Py_ssize_t[:, ::1] down,
              const double[:, ::1] level, phi, links, double h, Py_ssize_t nsteps):
    """Advance ``x`` in place by ``nsteps`` classic RK4 steps of size ``h``."""
    cdef Py_ssize_t N = x.shape[0], D = x.shape[1]
    cdef _Blocks b = _Blocks(diag, phi, links)
    cdef cplx[:, ::1] k1 = np.empty((N, D), dtype=np.complex128)
    cdef cplx[:, ::1] k2 = np.empty((N, D), dtype=np.complex128)
    cdef cplx[:, ::1] k3 = np.empty((N, D), dtype=np.complex128)
    cdef cplx[:, ::1] k4 = np.empty((N, D), dtype=np.complex128)
    cdef cplx[:, ::1] tmp = np.empty((N, D), dtype=np.complex128)
    cdef cplx[::1] acc = np.empty(D, dtype=np.complex128)
    cdef Py_ssize_t s, n, i
    cdef double h6 = h / 6.0
    with nogil:
        for s in range(nsteps):
            _rhs(x, k1, b, decay, up, down, level, acc)
            _axpy(tmp, x, k1, 0.5 * h)
            _rhs(tmp, k2, b, decay, up, down, level, acc)
            _axpy(tmp, x, k2, 0.5 * h)
            _rhs(tmp, k3, b, decay, up, down, level, acc)
            _axpy(tmp, x, k3, h)
            _rhs(tmp, k4, b, decay, up, down, level, acc)
            for n in range(N):
                for i in range(D):
                    x[n, i] = x[n, i] + h6 * (k1[n, i] + 2.0 * k2[n, i] + 2.0 * k3[n, i] + k4[n, i])


def rhs(const cplx[:, ::1] x, diag, const cplx[::1] decay,
        const Py_ssize_t[:, ::1] up, const Py_ssize_t[:, ::1] down,
        const double[:, ::1] level, phi, links):
    """Single evaluation of the hierarchy derivative."""
    cdef _Blocks b = _Blocks(diag, phi, links)
    out = np.empty((x.shape[0], x.shape[1]), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    cdef cplx[::1] acc = np.empty(x.shape[1], dtype=np.complex128)
    with nogil:
        _rhs(x, o, b, decay, up, down, level, acc)
    return out
