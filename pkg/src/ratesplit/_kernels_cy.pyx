# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _kernels_np: fused equalizer/weight update and
sample-average accumulation over (user, realization) pairs.

Same calling convention and return layout as the numpy backend; see
_kernels_np for the closed forms being accumulated.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log2

cnp.import_array()


def sampled_rates(const double complex[:, :, ::1] Hk,
                  const double complex[::1] Pc,
                  const double complex[:, ::1] Pp,
                  double sigma_n2):
    """Per-realization rates (Rc, R), each (K, M)."""
    cdef Py_ssize_t K = Hk.shape[0], M = Hk.shape[1], Nt = Hk.shape[2]
    cdef cnp.ndarray[double, ndim=2] Rc = np.empty((K, M), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] R = np.empty((K, M), dtype=np.float64)
    cdef double[:, ::1] Rc_v = Rc, R_v = R
    cdef Py_ssize_t k, m, i, n
    cdef double complex a, ac
    cdef double T, S, pw

    for k in range(K):
        for m in range(M):
            ac = 0
            for n in range(Nt):
                ac = ac + Hk[k, m, n].conjugate() * Pc[n]
            T = sigma_n2
            S = 0
            for i in range(K):
                a = 0
                for n in range(Nt):
                    a = a + Hk[k, m, n].conjugate() * Pp[n, i]
                pw = a.real * a.real + a.imag * a.imag
                T += pw
                if i == k:
                    S = pw
            Rc_v[k, m] = log2((T + ac.real * ac.real + ac.imag * ac.imag) / T)
            R_v[k, m] = log2(T / (T - S))
    return Rc, R


def saf_accumulate(const double complex[:, :, ::1] Hk,
                   const double complex[::1] Pc,
                   const double complex[:, ::1] Pp,
                   double sigma_n2):
    """Fused MMSE update + sample-average accumulation; see _kernels_np."""
    cdef Py_ssize_t K = Hk.shape[0], M = Hk.shape[1], Nt = Hk.shape[2]

    cdef cnp.ndarray[double complex, ndim=3] Psi_c = np.zeros((K, Nt, Nt), dtype=np.complex128)
    cdef cnp.ndarray[double complex, ndim=3] Psi = np.zeros((K, Nt, Nt), dtype=np.complex128)
    cdef cnp.ndarray[double complex, ndim=2] f_c = np.zeros((K, Nt), dtype=np.complex128)
    cdef cnp.ndarray[double complex, ndim=2] f = np.zeros((K, Nt), dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] t_c = np.zeros(K), t = np.zeros(K)
    cdef cnp.ndarray[double, ndim=1] u_c = np.zeros(K), u = np.zeros(K)
    cdef cnp.ndarray[double, ndim=1] Rc = np.zeros(K), R = np.zeros(K)

    cdef double complex[:, :, ::1] Psi_c_v = Psi_c, Psi_v = Psi
    cdef double complex[:, ::1] f_c_v = f_c, f_v = f
    cdef double[::1] t_c_v = t_c, t_v = t, u_c_v = u_c, u_v = u, Rc_v = Rc, R_v = R

    cdef Py_ssize_t k, m, i, n, p
    cdef double complex ac, a, ak, wfc, wf
    cdef double T, Tc, S, I, pw, tck, tk

    for k in range(K):
        for m in range(M):
            ac = 0
            for n in range(Nt):
                ac = ac + Hk[k, m, n].conjugate() * Pc[n]
            T = sigma_n2
            S = 0
            ak = 0
            for i in range(K):
                a = 0
                for n in range(Nt):
                    a = a + Hk[k, m, n].conjugate() * Pp[n, i]
                pw = a.real * a.real + a.imag * a.imag
                T += pw
                if i == k:
                    S = pw
                    ak = a
            I = T - S
            Tc = T + ac.real * ac.real + ac.imag * ac.imag

            tck = (Tc - T) / (T * Tc)
            tk = S / (I * T)
            t_c_v[k] += tck
            t_v[k] += tk
            u_c_v[k] += Tc / T
            u_v[k] += T / I
            Rc_v[k] += log2(Tc / T)
            R_v[k] += log2(T / I)

            wfc = ac / T
            wf = ak / I
            for n in range(Nt):
                f_c_v[k, n] = f_c_v[k, n] + wfc * Hk[k, m, n]
                f_v[k, n] = f_v[k, n] + wf * Hk[k, m, n]
                for p in range(Nt):
                    Psi_c_v[k, n, p] = Psi_c_v[k, n, p] + tck * Hk[k, m, n] * Hk[k, m, p].conjugate()
                    Psi_v[k, n, p] = Psi_v[k, n, p] + tk * Hk[k, m, n] * Hk[k, m, p].conjugate()

    cdef double inv_m = 1.0 / M
    for arr in (Psi_c, Psi, f_c, f, t_c, t, u_c, u, Rc, R):
        arr *= inv_m
    return Psi_c, Psi, f_c, f, t_c, t, u_c, u, Rc.copy(), R.copy(), Rc, R
