# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled deviation-profile kernels.

Same contract as nonstat._profile_np: a plain and a scale-normalized
profile of spectral-matrix differences over all candidate indices.  The
windowed DFT is maintained by a sliding one-bin update (re-anchored every N
windows to stop floating-point drift); each window's periodogram is kernel
smoothed through BLAS dgemm into a ring buffer that keeps the N + 1 windows
needed to pair every candidate's left and right side.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, sin
from scipy.linalg.cython_blas cimport dgemm

BACKEND = "cython"


cdef void _profile_impl(const double[:, ::1] data, int n, const double[:, ::1] weights,
                        int mode, double[::1] out):
    cdef int t_len = data.shape[0]
    cdef int n_comp = data.shape[1]
    cdef int n_win = t_len - n + 1
    cdef int l2 = n_comp * n_comp
    cdef double scale = 1.0 / (2.0 * M_PI * n)

    # dgemm needs writable pointers; private copy of the weights.
    cdef double[:, ::1] w_mat = np.array(weights, dtype=np.float64)

    # Anchor DFT matrix E[j, u] = exp(-2*pi*i*j*u/N) and per-slide rotation
    # R[j] = exp(+2*pi*i*j/N).
    cdef double[:, ::1] e_re = np.empty((n, n))
    cdef double[:, ::1] e_im = np.empty((n, n))
    cdef double[::1] rot_re = np.empty(n)
    cdef double[::1] rot_im = np.empty(n)
    cdef int j, u, a, b, w, k
    cdef double ang
    for j in range(n):
        rot_re[j] = cos(2.0 * M_PI * j / n)
        rot_im[j] = sin(2.0 * M_PI * j / n)
        for u in range(n):
            ang = -2.0 * M_PI * j * u / n
            e_re[j, u] = cos(ang)
            e_im[j, u] = sin(ang)

    cdef double[:, ::1] s_re = np.zeros((n, n_comp))
    cdef double[:, ::1] s_im = np.zeros((n, n_comp))
    cdef double[:, ::1] p_re = np.empty((n, l2))
    cdef double[:, ::1] p_im = np.empty((n, l2))
    # Ring of smoothed periodograms covering the last N + 1 windows.
    cdef double[:, :, ::1] ring_re = np.empty((n + 1, n, l2))
    cdef double[:, :, ::1] ring_im = np.empty((n + 1, n, l2))

    cdef int slot, left, tau0
    cdef double acc_re, acc_im, old, new, tmp_re, tmp_im, total
    cdef double sar, sai, sbr, sbi, d_re, d_im, denom
    cdef double avg_a, avg_b

    # Row-major G = W @ P via the column-major identity G^T = P^T W^T.
    cdef char trans = b'N'
    cdef int m_blas = l2, n_blas = n, k_blas = n
    cdef double one = 1.0, zero = 0.0

    for w in range(n_win):
        if w % n == 0:
            for j in range(n):
                for a in range(n_comp):
                    acc_re = 0.0
                    acc_im = 0.0
                    for u in range(n):
                        acc_re += e_re[j, u] * data[w + u, a]
                        acc_im += e_im[j, u] * data[w + u, a]
                    s_re[j, a] = acc_re
                    s_im[j, a] = acc_im
        else:
            for j in range(n):
                for a in range(n_comp):
                    old = data[w - 1, a]
                    new = data[w - 1 + n, a]
                    tmp_re = s_re[j, a] - old + new
                    tmp_im = s_im[j, a]
                    s_re[j, a] = rot_re[j] * tmp_re - rot_im[j] * tmp_im
                    s_im[j, a] = rot_re[j] * tmp_im + rot_im[j] * tmp_re

        for j in range(n):
            for a in range(n_comp):
                sar = s_re[j, a]
                sai = s_im[j, a]
                for b in range(n_comp):
                    sbr = s_re[j, b]
                    sbi = s_im[j, b]
                    # scale * S[j,a] * conj(S[j,b])
                    p_re[j, a * n_comp + b] = scale * (sar * sbr + sai * sbi)
                    p_im[j, a * n_comp + b] = scale * (sai * sbr - sar * sbi)

        slot = w % (n + 1)
        dgemm(&trans, &trans, &m_blas, &n_blas, &k_blas, &one,
              &p_re[0, 0], &m_blas, &w_mat[0, 0], &n_blas, &zero,
              &ring_re[slot, 0, 0], &m_blas)
        dgemm(&trans, &trans, &m_blas, &n_blas, &k_blas, &one,
              &p_im[0, 0], &m_blas, &w_mat[0, 0], &n_blas, &zero,
              &ring_im[slot, 0, 0], &m_blas)

        if w >= n:
            tau0 = w - n
            left = tau0 % (n + 1)
            total = 0.0
            if mode == 0:
                for j in range(n):
                    for k in range(l2):
                        d_re = ring_re[left, j, k] - ring_re[slot, j, k]
                        d_im = ring_im[left, j, k] - ring_im[slot, j, k]
                        total += d_re * d_re + d_im * d_im
            else:
                for j in range(n):
                    for a in range(n_comp):
                        avg_a = 0.5 * (ring_re[left, j, a * n_comp + a]
                                       + ring_re[slot, j, a * n_comp + a])
                        for b in range(n_comp):
                            avg_b = 0.5 * (ring_re[left, j, b * n_comp + b]
                                           + ring_re[slot, j, b * n_comp + b])
                            denom = avg_a * avg_b
                            if denom > 0.0:
                                k = a * n_comp + b
                                d_re = ring_re[left, j, k] - ring_re[slot, j, k]
                                d_im = ring_im[left, j, k] - ring_im[slot, j, k]
                                total += (d_re * d_re + d_im * d_im) / denom
            out[tau0] = total / n


def deviation_profile(const double[:, ::1] data, int window, const double[:, ::1] weights):
    cdef int n_tau = data.shape[0] - 2 * window + 1
    if n_tau < 1:
        raise ValueError(f"series of length {data.shape[0]} too short for window {window}")
    if weights.shape[0] != window or weights.shape[1] != window:
        raise ValueError("weights must be N x N")
    out_arr = np.empty(n_tau)
    cdef double[::1] out = out_arr
    _profile_impl(data, window, weights, 0, out)
    return out_arr


def relative_deviation_profile(const double[:, ::1] data, int window, const double[:, ::1] weights):
    cdef int n_tau = data.shape[0] - 2 * window + 1
    if n_tau < 1:
        raise ValueError(f"series of length {data.shape[0]} too short for window {window}")
    if weights.shape[0] != window or weights.shape[1] != window:
        raise ValueError("weights must be N x N")
    out_arr = np.empty(n_tau)
    cdef double[::1] out = out_arr
    _profile_impl(data, window, weights, 1, out)
    return out_arr
